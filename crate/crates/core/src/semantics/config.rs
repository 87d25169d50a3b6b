use std::collections::BTreeSet;

use super::{ensure_valid, Result, SemanticsError};
use crate::calculus::{eval_signal, exec_pattern, Env};
use crate::netmodel::{enabled_heads, event_pattern, Event, Network, RuleInstance};
use crate::qnum::{tensor, QRegisterState, QubitId};

/// Local state of one agent: `Γ`, the events still to run, and its sort.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub env: Env,
    pub remaining: Vec<Event>,
    pub sort: BTreeSet<QubitId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub qstate: QRegisterState,
    pub agents: Vec<AgentState>,
}

impl Configuration {
    pub fn is_final(&self) -> bool {
        self.agents.iter().all(|a| a.remaining.is_empty())
    }

    fn heads(&self) -> Vec<Option<&Event>> {
        self.agents.iter().map(|a| a.remaining.first()).collect()
    }
}

/// One successor of a small step, with the outcome bits it bound.
#[derive(Debug, Clone)]
pub struct Successor {
    pub config: Configuration,
    pub prob: f64,
    pub bindings: Env,
}

/// `σ ⊗ ρ` with each agent's environment holding its classical inputs.
pub fn init_configuration(n: &Network, cin: &Env, qin: &QRegisterState) -> Result<Configuration> {
    ensure_valid(n)?;
    initial(n, cin, qin, false)
}

/// As [`init_configuration`] without validation. With `context`, `qin` may
/// carry extra qubits that no agent owns and that ride along untouched.
pub(crate) fn initial(n: &Network, cin: &Env, qin: &QRegisterState, context: bool) -> Result<Configuration> {
    let names = n.cin_names();
    if let Some(x) = names.iter().find(|x| !cin.contains_key(*x)) {
        return Err(SemanticsError::InputMismatch(format!("classical input {x} not given")));
    }
    if let Some(x) = cin.keys().find(|x| !names.contains(x)) {
        return Err(SemanticsError::InputMismatch(format!("unknown classical input {x}")));
    }
    let inputs = n.input_ids();
    if let Some(q) = inputs.iter().find(|q| !qin.ids().contains(q)) {
        return Err(SemanticsError::InputMismatch(format!("no input state for qubit {q}")));
    }
    if !context {
        if let Some(q) = qin.ids().iter().find(|q| !inputs.contains(q)) {
            return Err(SemanticsError::InputMismatch(format!(
                "qubit {q} is not a network input"
            )));
        }
    }
    let qstate = tensor(&n.prep.state()?, qin)?;
    let agents = n
        .agents
        .iter()
        .map(|a| AgentState {
            env: a.cin.iter().map(|x| (x.clone(), cin[x])).collect(),
            remaining: a.events.clone(),
            sort: a.sort.clone(),
        })
        .collect();
    Ok(Configuration { qstate, agents })
}

/// Rules whose participants are all at the right event head.
pub fn enabled(c: &Configuration) -> Vec<RuleInstance> {
    enabled_heads(&c.heads())
}

/// Fire `choice`, returning every successor with its probability.
pub fn step(c: &Configuration, choice: RuleInstance) -> Result<Vec<Successor>> {
    if !enabled(c).contains(&choice) {
        return Err(SemanticsError::NotEnabled(choice));
    }
    match choice {
        RuleInstance::Local { agent } => {
            let a = &c.agents[agent];
            let Event::Pattern(cmds) = &a.remaining[0] else {
                unreachable!("local head")
            };
            let p = event_pattern(cmds, &a.sort);
            let mut sort = a.sort.clone();
            for q in &p.inputs {
                sort.remove(q);
            }
            sort.extend(p.outputs.iter().copied());
            let branches = exec_pattern(&c.qstate, &p, &a.env)?;
            Ok(branches
                .into_iter()
                .map(|b| {
                    let mut next = c.clone();
                    let st = &mut next.agents[agent];
                    st.env.extend(b.bindings.iter().map(|(k, v)| (k.clone(), *v)));
                    st.remaining.remove(0);
                    st.sort = sort.clone();
                    next.qstate = b.state;
                    Successor {
                        config: next,
                        prob: b.prob,
                        bindings: b.bindings,
                    }
                })
                .collect())
        }
        RuleInstance::Classical { sender, receiver } => {
            let (Event::Send { values, .. }, Event::Recv { names, .. }) =
                (&c.agents[sender].remaining[0], &c.agents[receiver].remaining[0])
            else {
                unreachable!("classical heads")
            };
            let mut bindings = Env::new();
            for (v, x) in values.iter().zip(names) {
                bindings.insert(x.clone(), eval_signal(v, &c.agents[sender].env)?);
            }
            let mut next = c.clone();
            next.agents[sender].remaining.remove(0);
            let r = &mut next.agents[receiver];
            r.remaining.remove(0);
            r.env.extend(bindings.iter().map(|(k, v)| (k.clone(), *v)));
            Ok(vec![Successor {
                config: next,
                prob: 1.0,
                bindings,
            }])
        }
        RuleInstance::Quantum { sender, receiver } => {
            let (Event::QSend { qubit, .. }, Event::QRecv { placeholder, .. }) =
                (&c.agents[sender].remaining[0], &c.agents[receiver].remaining[0])
            else {
                unreachable!("quantum heads")
            };
            let (q, x) = (*qubit, *placeholder);
            let mut next = c.clone();
            let s = &mut next.agents[sender];
            s.remaining.remove(0);
            s.sort.remove(&q);
            let r = &mut next.agents[receiver];
            r.remaining.remove(0);
            for e in r.remaining.iter_mut() {
                e.substitute(x, q);
            }
            r.sort.insert(q);
            Ok(vec![Successor {
                config: next,
                prob: 1.0,
                bindings: Env::new(),
            }])
        }
    }
}
