use super::{Event, Network};

/// One firing of a small-step rule. Agents are network positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleInstance {
    Local { agent: usize },
    Classical { sender: usize, receiver: usize },
    Quantum { sender: usize, receiver: usize },
}

impl RuleInstance {
    pub fn agents(&self) -> Vec<usize> {
        match *self {
            RuleInstance::Local { agent } => vec![agent],
            RuleInstance::Classical { sender, receiver } | RuleInstance::Quantum { sender, receiver } => {
                vec![sender, receiver]
            }
        }
    }

    pub fn involves(&self, agent: usize) -> bool {
        self.agents().contains(&agent)
    }

    /// Move the program counters of the participating agents.
    pub fn advance(&self, pcs: &mut [usize]) {
        for a in self.agents() {
            pcs[a] += 1;
        }
    }
}

/// Rules enabled when each agent `i` is about to run event `pcs[i]`.
/// Enabledness depends only on event heads, never on measurement outcomes.
pub fn enabled_at(n: &Network, pcs: &[usize]) -> Vec<RuleInstance> {
    let heads: Vec<Option<&Event>> = n.agents.iter().zip(pcs).map(|(a, &pc)| a.events.get(pc)).collect();
    enabled_heads(&heads)
}

/// Same as [`enabled_at`] given each agent's next event directly.
pub fn enabled_heads(heads: &[Option<&Event>]) -> Vec<RuleInstance> {
    let m = heads.len();
    let mut out = Vec::new();
    for (i, h) in heads.iter().enumerate() {
        if matches!(h, Some(Event::Pattern(_))) {
            out.push(RuleInstance::Local { agent: i });
        }
    }
    for s in 0..m {
        for r in 0..m {
            if s == r {
                continue;
            }
            match (heads[s], heads[r]) {
                (Some(Event::Send { channel: c1, values }), Some(Event::Recv { channel: c2, names }))
                    if c1 == c2 && values.len() == names.len() =>
                {
                    out.push(RuleInstance::Classical { sender: s, receiver: r });
                }
                (Some(Event::QSend { channel: c1, .. }), Some(Event::QRecv { channel: c2, .. })) if c1 == c2 => {
                    out.push(RuleInstance::Quantum { sender: s, receiver: r });
                }
                _ => {}
            }
        }
    }
    out
}

/// Rule firings chosen by `pick` from the initial configuration until
/// nothing is enabled. Returns the firings and the program counters reached.
pub fn resolve_sequence<F>(n: &Network, mut pick: F) -> (Vec<RuleInstance>, Vec<usize>)
where
    F: FnMut(&[RuleInstance], &[usize]) -> Option<RuleInstance>,
{
    let mut pcs = vec![0; n.agents.len()];
    let mut steps = Vec::new();
    loop {
        let enabled = enabled_at(n, &pcs);
        if enabled.is_empty() {
            break;
        }
        let Some(choice) = pick(&enabled, &pcs) else { break };
        choice.advance(&mut pcs);
        steps.push(choice);
    }
    (steps, pcs)
}

/// The current agent keeps firing until blocked, then the turn passes on.
pub fn round_robin_sequence(n: &Network) -> (Vec<RuleInstance>, Vec<usize>) {
    let m = n.agents.len();
    let mut current = 0;
    resolve_sequence(n, |enabled, _| {
        for k in 0..m {
            let agent = (current + k) % m;
            if let Some(r) = enabled.iter().find(|r| r.involves(agent)) {
                current = agent;
                return Some(*r);
            }
        }
        None
    })
}

pub(crate) fn finished(n: &Network, pcs: &[usize]) -> bool {
    n.agents.iter().zip(pcs).all(|(a, &pc)| pc >= a.events.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{Command, SignalExpr};
    use crate::netmodel::{Agent, Preparation};
    use crate::qnum::QubitId;

    fn h(i: u32, o: u32) -> Event {
        Event::Pattern(vec![
            Command::entangle(i, o),
            Command::measure(i, 0.0),
            Command::x(o, SignalExpr::name(format!("s{i}"))),
        ])
    }

    #[test]
    fn two_local_heads_both_enabled() {
        let n = Network::new(
            "HH",
            vec![
                Agent::new("A", &[1], vec![h(1, 2)]),
                Agent::new("B", &[3], vec![h(3, 4)]),
            ],
            Preparation::null(),
        );
        assert_eq!(
            enabled_at(&n, &[0, 0]),
            vec![RuleInstance::Local { agent: 0 }, RuleInstance::Local { agent: 1 }]
        );
        assert!(enabled_at(&n, &[1, 1]).is_empty());
        assert!(finished(&n, &[1, 1]));
    }

    #[test]
    fn quantum_rendezvous_matches_channel() {
        let n = Network::new(
            "DC",
            vec![
                Agent::new(
                    "A",
                    &[1],
                    vec![Event::QSend {
                        channel: "qc".into(),
                        qubit: QubitId(1),
                    }],
                ),
                Agent::new(
                    "B",
                    &[],
                    vec![Event::QRecv {
                        channel: "qc".into(),
                        placeholder: QubitId(1),
                    }],
                ),
            ],
            Preparation::null(),
        );
        assert_eq!(
            enabled_at(&n, &[0, 0]),
            vec![RuleInstance::Quantum { sender: 0, receiver: 1 }]
        );
        let (steps, pcs) = round_robin_sequence(&n);
        assert_eq!(steps.len(), 1);
        assert!(finished(&n, &pcs));
    }

    #[test]
    fn round_robin_runs_first_agent_until_blocked() {
        let n = Network::new(
            "HH",
            vec![
                Agent::new("A", &[1], vec![h(1, 2), h(2, 5)]),
                Agent::new("B", &[3], vec![h(3, 4)]),
            ],
            Preparation::null(),
        );
        let (steps, _) = round_robin_sequence(&n);
        assert_eq!(
            steps,
            vec![
                RuleInstance::Local { agent: 0 },
                RuleInstance::Local { agent: 0 },
                RuleInstance::Local { agent: 1 }
            ]
        );
    }

    #[test]
    fn arity_mismatch_not_enabled() {
        let n = Network::new(
            "N",
            vec![
                Agent::new(
                    "A",
                    &[],
                    vec![Event::Send {
                        channel: "c".into(),
                        values: vec![SignalExpr::constant(1)],
                    }],
                )
                .with_io(&[], &[]),
                Agent::new(
                    "B",
                    &[],
                    vec![Event::Recv {
                        channel: "c".into(),
                        names: vec!["x".into(), "y".into()],
                    }],
                ),
            ],
            Preparation::null(),
        );
        assert!(enabled_at(&n, &[0, 0]).is_empty());
    }
}
