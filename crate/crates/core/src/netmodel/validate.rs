use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;

use super::interleave::{finished, round_robin_sequence};
use super::{enabled_at, event_pattern, Event, Network, RuleInstance};
use crate::calculus::{signal_name, validate_pattern};
use crate::qnum::QubitId;

/// Exploration bound for the pairing check.
const MAX_STATES: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    /// Events act only on owned qubits.
    H0,
    /// Events read only bound names.
    H1,
    /// Every reception has one matching send.
    H2,
    /// Names and qubit ids are unique.
    H3,
    Disjoint,
    Coverage,
    Pattern,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub rule: Rule,
    pub agent: Option<usize>,
    pub event: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.rule, self.message)
    }
}

struct Report(Vec<Violation>);

impl Report {
    fn push(&mut self, rule: Rule, agent: Option<usize>, event: Option<usize>, message: String) {
        let v = Violation {
            rule,
            agent,
            event,
            message,
        };
        if !self.0.contains(&v) {
            self.0.push(v);
        }
    }
}

/// Every broken definiteness condition; empty means the network is valid.
pub fn validate_network(n: &Network) -> Vec<Violation> {
    let mut r = Report(Vec::new());
    check_static(n, &mut r);
    check_pairing(n, &mut r);
    check_run(n, &mut r);
    r.0
}

fn check_static(n: &Network, r: &mut Report) {
    let mut seen_names = BTreeSet::new();
    for (i, a) in n.agents.iter().enumerate() {
        if !seen_names.insert(a.name.as_str()) {
            r.push(Rule::H3, Some(i), None, format!("duplicate agent name {}", a.name));
        }
    }

    let mut owner: BTreeMap<QubitId, usize> = BTreeMap::new();
    for (i, a) in n.agents.iter().enumerate() {
        for q in &a.sort {
            if let Some(&j) = owner.get(q) {
                r.push(
                    Rule::Disjoint,
                    Some(i),
                    None,
                    format!("qubit {q} in sorts of {} and {}", n.agents[j].name, a.name),
                );
            } else {
                owner.insert(*q, i);
            }
        }
    }

    if let Err(e) = n.prep.state() {
        r.push(Rule::Coverage, None, None, e.to_string());
    }
    for q in n.prep.ids() {
        if !owner.contains_key(&q) {
            r.push(
                Rule::Coverage,
                None,
                None,
                format!("prepared qubit {q} not owned by any agent"),
            );
        }
    }
}

/// Sends and receives on one channel, as (agent, event) positions.
type Ends = (Vec<(usize, usize)>, Vec<(usize, usize)>);

/// Per channel, receptions and sends must pair up one-to-one, and no
/// reachable point may offer two different pairings or block forever.
fn check_pairing(n: &Network, r: &mut Report) {
    // (channel, quantum?) -> (sends, receives)
    let mut ends: BTreeMap<(&str, bool), Ends> = BTreeMap::new();
    for (i, a) in n.agents.iter().enumerate() {
        for (k, e) in a.events.iter().enumerate() {
            match e {
                Event::Send { channel, .. } => ends.entry((channel, false)).or_default().0.push((i, k)),
                Event::QSend { channel, .. } => ends.entry((channel, true)).or_default().0.push((i, k)),
                Event::Recv { channel, .. } => ends.entry((channel, false)).or_default().1.push((i, k)),
                Event::QRecv { channel, .. } => ends.entry((channel, true)).or_default().1.push((i, k)),
                Event::Pattern(_) => {}
            }
        }
    }
    let mut unbalanced = false;
    for ((channel, _), (sends, recvs)) in &ends {
        if recvs.len() > sends.len() {
            let &(i, k) = recvs.last().expect("non-empty");
            r.push(
                Rule::H2,
                Some(i),
                Some(k),
                format!("receive on channel {channel} has no matching send"),
            );
            unbalanced = true;
        } else if sends.len() > recvs.len() {
            let &(i, k) = sends.last().expect("non-empty");
            r.push(
                Rule::H2,
                Some(i),
                Some(k),
                format!("send on channel {channel} has no matching receive"),
            );
            unbalanced = true;
        }
    }
    if unbalanced {
        return;
    }

    let start = vec![0usize; n.agents.len()];
    let mut visited: HashSet<Vec<usize>> = HashSet::new();
    let mut queue = VecDeque::from([start.clone()]);
    visited.insert(start);
    while let Some(pcs) = queue.pop_front() {
        let enabled = enabled_at(n, &pcs);
        let mut per_channel: BTreeMap<&str, usize> = BTreeMap::new();
        for inst in &enabled {
            if let RuleInstance::Classical { sender, .. } | RuleInstance::Quantum { sender, .. } = inst {
                let c = n.agents[*sender].events[pcs[*sender]].channel().expect("communication");
                *per_channel.entry(c).or_default() += 1;
            }
        }
        for (c, count) in per_channel {
            if count > 1 {
                r.push(Rule::H2, None, None, format!("ambiguous pairing on channel {c}"));
            }
        }
        if enabled.is_empty() && !finished(n, &pcs) {
            report_blocked(n, &pcs, r);
            continue;
        }
        for inst in enabled {
            let mut next = pcs.clone();
            inst.advance(&mut next);
            if visited.len() < MAX_STATES && visited.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
}

fn report_blocked(n: &Network, pcs: &[usize], r: &mut Report) {
    for (i, a) in n.agents.iter().enumerate() {
        let Some(e) = a.events.get(pcs[i]) else { continue };
        let message = match e {
            Event::Send { channel, values } => {
                let mismatch = n
                    .agents
                    .iter()
                    .enumerate()
                    .find_map(|(j, b)| match b.events.get(pcs[j]) {
                        Some(Event::Recv { channel: c, names }) if c == channel && names.len() != values.len() => {
                            Some(names.len())
                        }
                        _ => None,
                    });
                match mismatch {
                    Some(k) => format!(
                        "arity mismatch on channel {channel}: {} sent, {k} received",
                        values.len()
                    ),
                    None => format!("deadlock: {} blocked sending on {channel}", a.name),
                }
            }
            Event::Recv { channel, .. } | Event::QRecv { channel, .. } => {
                format!("deadlock: {} blocked receiving on {channel}", a.name)
            }
            Event::QSend { channel, .. } => format!("deadlock: {} blocked sending on {channel}", a.name),
            Event::Pattern(_) => continue,
        };
        r.push(Rule::H2, Some(i), Some(pcs[i]), message);
        return;
    }
}

/// Replay the canonical interleaving, tracking sorts and bound names.
fn check_run(n: &Network, r: &mut Report) {
    let m = n.agents.len();
    let mut sorts: Vec<BTreeSet<QubitId>> = n.agents.iter().map(|a| a.sort.clone()).collect();
    let mut events: Vec<Vec<Event>> = n.agents.iter().map(|a| a.events.clone()).collect();
    let mut bound: Vec<BTreeSet<String>> = vec![BTreeSet::new(); m];
    let mut binder: BTreeMap<String, usize> = BTreeMap::new();
    let mut used: BTreeSet<QubitId> = sorts.iter().flatten().copied().collect();
    used.extend(n.prep.ids());
    let mut pcs = vec![0usize; m];

    let mut bind =
        |agent: usize, event: Option<usize>, name: &str, bound: &mut Vec<BTreeSet<String>>, r: &mut Report| {
            if binder.contains_key(name) {
                r.push(Rule::H3, Some(agent), event, format!("name {name} bound twice"));
            } else {
                binder.insert(name.to_string(), agent);
            }
            bound[agent].insert(name.to_string());
        };

    for (i, a) in n.agents.iter().enumerate() {
        for x in &a.cin {
            bind(i, None, x, &mut bound, r);
        }
    }

    let (steps, _) = round_robin_sequence(n);
    for step in steps {
        match step {
            RuleInstance::Local { agent } => {
                let k = pcs[agent];
                let Event::Pattern(cmds) = &events[agent][k] else {
                    unreachable!("local head")
                };
                let p = event_pattern(cmds, &sorts[agent]);
                let name = &n.agents[agent].name;
                for q in p.auxiliary() {
                    if let Some(j) = (0..m).find(|&j| j != agent && sorts[j].contains(&q)) {
                        r.push(
                            Rule::H0,
                            Some(agent),
                            Some(k),
                            format!("qubit {q} not in sort of {name} (owned by {})", n.agents[j].name),
                        );
                    } else if !used.insert(q) {
                        r.push(Rule::H3, Some(agent), Some(k), format!("qubit id {q} reused"));
                    }
                }
                for v in validate_pattern(&p) {
                    r.push(Rule::Pattern, Some(agent), Some(k), v.message);
                }
                for x in p.free_names() {
                    if !bound[agent].contains(&x) {
                        r.push(Rule::H1, Some(agent), Some(k), format!("name {x} not bound in {name}"));
                    }
                }
                for q in p.measured() {
                    bind(agent, Some(k), &signal_name(q), &mut bound, r);
                }
                for q in &p.inputs {
                    sorts[agent].remove(q);
                }
                sorts[agent].extend(p.outputs.iter().copied());
            }
            RuleInstance::Classical { sender, receiver } => {
                let (ks, kr) = (pcs[sender], pcs[receiver]);
                if let Event::Send { values, .. } = &events[sender][ks] {
                    for x in values.iter().flat_map(|v| v.names()) {
                        if !bound[sender].contains(x) {
                            let name = &n.agents[sender].name;
                            r.push(
                                Rule::H1,
                                Some(sender),
                                Some(ks),
                                format!("name {x} not bound in {name}"),
                            );
                        }
                    }
                }
                if let Event::Recv { names, .. } = events[receiver][kr].clone() {
                    for x in names {
                        bind(receiver, Some(kr), &x, &mut bound, r);
                    }
                }
            }
            RuleInstance::Quantum { sender, receiver } => {
                let (ks, kr) = (pcs[sender], pcs[receiver]);
                let (Event::QSend { qubit, .. }, Event::QRecv { placeholder, .. }) =
                    (events[sender][ks].clone(), events[receiver][kr].clone())
                else {
                    unreachable!("quantum rendezvous heads")
                };
                if !sorts[sender].remove(&qubit) {
                    let name = &n.agents[sender].name;
                    r.push(
                        Rule::H0,
                        Some(sender),
                        Some(ks),
                        format!("qubit {qubit} not in sort of {name}"),
                    );
                    step.advance(&mut pcs);
                    continue;
                }
                if placeholder != qubit && sorts[receiver].contains(&placeholder) {
                    let name = &n.agents[receiver].name;
                    r.push(
                        Rule::H3,
                        Some(receiver),
                        Some(kr),
                        format!("placeholder {placeholder} already owned by {name}"),
                    );
                }
                for e in events[receiver][kr + 1..].iter_mut() {
                    e.substitute(placeholder, qubit);
                }
                sorts[receiver].insert(qubit);
            }
        }
        step.advance(&mut pcs);
    }

    for (i, a) in n.agents.iter().enumerate() {
        for y in &a.cout {
            if !bound[i].contains(y) {
                r.push(Rule::H1, Some(i), None, format!("output {y} of {} never bound", a.name));
            }
        }
    }
}
