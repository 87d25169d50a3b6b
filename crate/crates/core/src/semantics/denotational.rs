use std::collections::{BTreeMap, BTreeSet};

use super::{assignments, ensure_valid, Result, RuleInstance, Schedule};
use crate::calculus::{all_branch_operators, eval_signal, signal_name, Env};
use crate::netmodel::{event_pattern, Event, Network};
use crate::qnum::{spectral, KrausSet, LinOp, QRegisterState, QubitId, PRUNE_TOL};

/// Sort evolution and classical interface of one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentType {
    pub name: String,
    pub initial_sort: BTreeSet<QubitId>,
    /// Qubits the agent supplies itself (initial sort minus the preparation).
    pub inputs: Vec<QubitId>,
    pub final_sort: BTreeSet<QubitId>,
    pub cin: Vec<String>,
    pub cout: Vec<String>,
    /// Per output name: does its value derive from a measurement?
    pub signal_outputs: Vec<bool>,
}

/// One operation element with the outcomes that produced it.
#[derive(Debug, Clone)]
pub struct KrausElement {
    pub signals: Env,
    /// Index of the preparation's spectral component (0 for pure ones).
    pub component: usize,
    pub op: LinOp,
}

/// The elements compatible with one value of the signal outputs.
#[derive(Debug, Clone)]
pub struct RestrictedClass {
    pub outputs: Env,
    pub elements: Vec<KrausElement>,
}

impl RestrictedClass {
    pub fn kraus(&self) -> KrausSet {
        KrausSet::new(self.elements.iter().map(|e| e.op.clone()).collect()).expect("non-empty class")
    }

    /// `tr L(ρ)` for a state on the input qubits.
    pub fn prob(&self, rho: &QRegisterState) -> Result<f64> {
        Ok(self.kraus().apply(rho)?.weight())
    }

    /// `tr L(I/d)`.
    pub fn prob_maximally_mixed(&self) -> f64 {
        let d = self.elements.first().map_or(1, |e| 1usize << e.op.in_ids().len()) as f64;
        self.elements.iter().map(|e| e.op.norm_sqr()).sum::<f64>() / d
    }
}

/// The semantics for one classical input assignment.
#[derive(Debug, Clone)]
pub struct DenotationEntry {
    pub cin: Env,
    /// Outputs that do not depend on measurement outcomes.
    pub external: Env,
    pub classes: Vec<RestrictedClass>,
}

impl DenotationEntry {
    pub fn total(&self) -> KrausSet {
        KrausSet::new(self.elements().map(|e| e.op.clone()).collect()).expect("at least one element")
    }

    pub fn elements(&self) -> impl Iterator<Item = &KrausElement> {
        self.classes.iter().flat_map(|c| c.elements.iter())
    }

    pub fn class(&self, outputs: &Env) -> Option<&RestrictedClass> {
        self.classes.iter().find(|c| &c.outputs == outputs)
    }
}

#[derive(Debug, Clone)]
pub struct Denotation {
    pub agents: Vec<AgentType>,
    /// Local inputs by agent position, then id.
    pub input_ids: Vec<QubitId>,
    /// Final qubits by owner position, then id.
    pub output_ids: Vec<QubitId>,
    pub table: Vec<DenotationEntry>,
}

impl Denotation {
    pub fn entry(&self, cin: &Env) -> Option<&DenotationEntry> {
        self.table.iter().find(|e| &e.cin == cin)
    }
}

struct Leaf {
    op: LinOp,
    envs: Vec<Env>,
    signals: Env,
    component: usize,
}

pub(crate) struct Extraction {
    pub entry: DenotationEntry,
    pub final_sorts: Vec<BTreeSet<QubitId>>,
    pub tainted: BTreeSet<String>,
    pub output_ids: Vec<QubitId>,
}

/// Compose branch operators along the canonical schedule into Kraus
/// elements from the local inputs to the final qubits.
pub(crate) fn extract(n: &Network, cin: &Env) -> Result<Extraction> {
    let seq = Schedule::RoundRobin.resolve(n)?;
    let inputs = n.input_ids();
    let sigma = n.prep.state()?;
    let components = if sigma.is_pure() {
        vec![(1.0, sigma)]
    } else {
        spectral(&sigma)?
    };
    let envs: Vec<Env> = n
        .agents
        .iter()
        .map(|a| {
            a.cin
                .iter()
                .map(|x| (x.clone(), cin.get(x).copied().unwrap_or(0)))
                .collect()
        })
        .collect();
    let mut leaves = components
        .iter()
        .enumerate()
        .map(|(k, (w, v))| {
            Ok(Leaf {
                op: LinOp::adjoin(inputs.clone(), &v.scale_weight(*w))?,
                envs: envs.clone(),
                signals: Env::new(),
                component: k,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut events: Vec<Vec<Event>> = n.agents.iter().map(|a| a.events.clone()).collect();
    let mut sorts: Vec<BTreeSet<QubitId>> = n.agents.iter().map(|a| a.sort.clone()).collect();
    let mut pcs = vec![0usize; n.agents.len()];
    let mut tainted: BTreeSet<String> = BTreeSet::new();

    for rule in seq {
        match rule {
            RuleInstance::Local { agent } => {
                let Event::Pattern(cmds) = &events[agent][pcs[agent]] else {
                    unreachable!("local head")
                };
                let p = event_pattern(cmds, &sorts[agent]);
                for q in &p.inputs {
                    sorts[agent].remove(q);
                }
                sorts[agent].extend(p.outputs.iter().copied());
                tainted.extend(p.measured().into_iter().map(signal_name));
                let mut next = Vec::new();
                for leaf in leaves {
                    for b in all_branch_operators(&p, &leaf.envs[agent])? {
                        let op = leaf.op.then(&b.op)?;
                        if op.norm_sqr() < PRUNE_TOL {
                            continue;
                        }
                        let mut envs = leaf.envs.clone();
                        let mut signals = leaf.signals.clone();
                        for (q, v) in &b.signals {
                            envs[agent].insert(signal_name(*q), *v);
                            signals.insert(signal_name(*q), *v);
                        }
                        next.push(Leaf {
                            op,
                            envs,
                            signals,
                            component: leaf.component,
                        });
                    }
                }
                leaves = next;
            }
            RuleInstance::Classical { sender, receiver } => {
                let (Event::Send { values, .. }, Event::Recv { names, .. }) =
                    (&events[sender][pcs[sender]], &events[receiver][pcs[receiver]])
                else {
                    unreachable!("classical heads")
                };
                for (v, x) in values.iter().zip(names) {
                    if v.names().any(|t| tainted.contains(t)) {
                        tainted.insert(x.clone());
                    }
                }
                for leaf in leaves.iter_mut() {
                    for (v, x) in values.iter().zip(names) {
                        let bit = eval_signal(v, &leaf.envs[sender])?;
                        leaf.envs[receiver].insert(x.clone(), bit);
                    }
                }
            }
            RuleInstance::Quantum { sender, receiver } => {
                let (Event::QSend { qubit, .. }, Event::QRecv { placeholder, .. }) = (
                    events[sender][pcs[sender]].clone(),
                    events[receiver][pcs[receiver]].clone(),
                ) else {
                    unreachable!("quantum heads")
                };
                sorts[sender].remove(&qubit);
                sorts[receiver].insert(qubit);
                let from = pcs[receiver] + 1;
                for e in events[receiver][from..].iter_mut() {
                    e.substitute(placeholder, qubit);
                }
            }
        }
        rule.advance(&mut pcs);
    }

    let output_ids: Vec<QubitId> = sorts.iter().flat_map(|s| s.iter().copied()).collect();
    let mut external = Env::new();
    let mut classes: BTreeMap<Env, Vec<KrausElement>> = BTreeMap::new();
    for leaf in leaves {
        let mut key = Env::new();
        for (i, a) in n.agents.iter().enumerate() {
            for y in &a.cout {
                let Some(&v) = leaf.envs[i].get(y) else { continue };
                if tainted.contains(y) {
                    key.insert(y.clone(), v);
                } else {
                    external.insert(y.clone(), v);
                }
            }
        }
        classes.entry(key).or_default().push(KrausElement {
            signals: leaf.signals,
            component: leaf.component,
            op: leaf.op.reorder(&inputs, &output_ids)?,
        });
    }
    Ok(Extraction {
        entry: DenotationEntry {
            cin: cin.clone(),
            external,
            classes: classes
                .into_iter()
                .map(|(outputs, elements)| RestrictedClass { outputs, elements })
                .collect(),
        },
        final_sorts: sorts,
        tainted,
        output_ids,
    })
}

/// The semantics for a single classical input assignment.
pub fn denote_for(n: &Network, cin: &Env) -> Result<DenotationEntry> {
    ensure_valid(n)?;
    Ok(extract(n, cin)?.entry)
}

/// Type, and one restricted-operation table per classical input.
pub fn denotational(n: &Network) -> Result<Denotation> {
    ensure_valid(n)?;
    let mut table = Vec::new();
    let mut shape = None;
    for cin in assignments(&n.cin_names()) {
        let x = extract(n, &cin)?;
        if shape.is_none() {
            shape = Some((x.final_sorts.clone(), x.tainted.clone(), x.output_ids.clone()));
        }
        table.push(x.entry);
    }
    let (final_sorts, tainted, output_ids) = shape.expect("at least one assignment");
    let agents = n
        .agents
        .iter()
        .enumerate()
        .map(|(i, a)| AgentType {
            name: a.name.clone(),
            initial_sort: a.sort.clone(),
            inputs: n.local_inputs(i),
            final_sort: final_sorts[i].clone(),
            cin: a.cin.clone(),
            cout: a.cout.clone(),
            signal_outputs: a.cout.iter().map(|y| tainted.contains(y)).collect(),
        })
        .collect();
    Ok(Denotation {
        agents,
        input_ids: n.input_ids(),
        output_ids,
        table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library;
    use crate::qnum::{choi, frob_dist, gates, qids, EQ_TOL};
    use std::f64::consts::PI;

    #[test]
    fn teleport_is_identity_channel() {
        let d = denotational(&library::teleport()).unwrap();
        assert_eq!(d.input_ids, qids(&[1]));
        assert_eq!(d.output_ids, qids(&[3]));
        let entry = &d.table[0];
        assert_eq!(entry.classes.len(), 1);
        let total = entry.total();
        assert_eq!(total.len(), 4);
        for e in total.elements() {
            let m = e.matrix();
            assert!((m[(0, 0)].norm() - 0.5).abs() < 1e-12);
            assert!((m - gates::identity(2).map(|z| z * m[(0, 0)])).norm() < 1e-12);
        }
        let id = KrausSet::new(vec![LinOp::identity(qids(&[1]))]).unwrap();
        assert!(frob_dist(&choi(&total).unwrap(), &choi(&id).unwrap()).unwrap() < EQ_TOL);
        assert!(total.is_trace_preserving(EQ_TOL));
    }

    #[test]
    fn bitflip_restricted_classes() {
        for alpha in [PI / 4.0, PI / 2.0, 2.0] {
            let d = denotational(&library::bitflip(alpha)).unwrap();
            let p = (alpha / 2.0).cos().powi(2);
            let entry = &d.table[0];
            assert_eq!(entry.classes.len(), 2);
            for class in &entry.classes {
                let s2 = class.outputs["s2"];
                let expected = if s2 == 0 { p } else { 1.0 - p };
                assert!((class.prob_maximally_mixed() - expected).abs() < 1e-12);
            }
            assert!(d.agents[0].signal_outputs[0]);
        }
    }

    #[test]
    fn bitflip_degenerate_angles_single_class() {
        for (alpha, outcome) in [(0.0, 0), (PI, 1)] {
            let d = denotational(&library::bitflip(alpha)).unwrap();
            assert_eq!(d.table[0].classes.len(), 1);
            let class = &d.table[0].classes[0];
            assert_eq!(class.outputs["s2"], outcome);
            assert!((class.prob_maximally_mixed() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_network_is_trivial() {
        let d = denotational(&Network::empty("E")).unwrap();
        let total = d.table[0].total();
        assert_eq!(total.len(), 1);
        assert_eq!(total.elements()[0].matrix().shape(), (1, 1));
        assert!((total.elements()[0].matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn superdense_outputs_are_signals() {
        let d = denotational(&library::superdense()).unwrap();
        assert_eq!(d.table.len(), 4);
        for entry in &d.table {
            assert_eq!(entry.classes.len(), 1);
            let out = &entry.classes[0].outputs;
            assert_eq!(out["s1"], entry.cin["x1"]);
            assert_eq!(out["s2"], entry.cin["x2"]);
            assert!((entry.classes[0].prob_maximally_mixed() - 1.0).abs() < 1e-12);
        }
    }
}
