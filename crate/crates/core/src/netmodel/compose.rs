use std::collections::BTreeSet;

use super::{output_sort, Agent, NetError, Network, Result};
use crate::qnum::QubitId;

fn union_ordered(a: &[String], b: impl IntoIterator<Item = String>) -> Vec<String> {
    let mut out = a.to_vec();
    for x in b {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

/// `second ∘ first`: run `first`'s events, then `second`'s.
pub fn agent_compose(first: &Agent, second: &Agent) -> Result<Agent> {
    if first.name != second.name {
        return Err(NetError::NameMismatch {
            first: first.name.clone(),
            second: second.name.clone(),
        });
    }
    let after_first = output_sort(first)?;
    let consumed: Vec<QubitId> = first.sort.difference(&after_first).copied().collect();
    if let Some(q) = consumed.iter().find(|q| second.sort.contains(q)) {
        return Err(NetError::SortMismatch(format!(
            "qubit {q} of {} is consumed before the second program",
            first.name
        )));
    }
    let cin = union_ordered(
        &first.cin,
        second.cin.iter().filter(|x| !first.cout.contains(x)).cloned(),
    );
    let cout = union_ordered(&first.cout, second.cout.iter().cloned());
    let sort: BTreeSet<QubitId> = first
        .sort
        .iter()
        .chain(second.sort.difference(&after_first))
        .copied()
        .collect();
    let events = first.events.iter().chain(&second.events).cloned().collect();
    Ok(Agent {
        name: first.name.clone(),
        cin,
        cout,
        sort,
        events,
    })
}

fn check_unique_names(n: &Network) -> Result<()> {
    let mut seen = BTreeSet::new();
    for a in &n.agents {
        if !seen.insert(&a.name) {
            return Err(NetError::AgentSetMismatch(format!(
                "agent {} appears twice in {}",
                a.name, n.name
            )));
        }
    }
    Ok(())
}

/// `n2 ∘ n1`. Agents present in only one network are paired with a null agent.
pub fn net_seq_compose(n1: &Network, n2: &Network) -> Result<Network> {
    check_unique_names(n1)?;
    check_unique_names(n2)?;
    let prep = n1.prep.tensor(&n2.prep)?;
    let mut names: Vec<&String> = n1.agents.iter().map(|a| &a.name).collect();
    for a in &n2.agents {
        if !names.contains(&&a.name) {
            names.push(&a.name);
        }
    }
    let pick = |n: &Network, name: &str| {
        n.agents
            .iter()
            .find(|a| a.name == name)
            .cloned()
            .unwrap_or_else(|| Agent::null(name))
    };
    let agents = names
        .into_iter()
        .map(|name| agent_compose(&pick(n1, name), &pick(n2, name)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Network::new(format!("{}_{}", n1.name, n2.name), agents, prep))
}

/// `n1 ⊗ n2`: independent networks side by side.
pub fn net_par_compose(n1: &Network, n2: &Network) -> Result<Network> {
    if let Some(a) = n1.agents.iter().find(|a| n2.agent_index(&a.name).is_some()) {
        return Err(NetError::NameCollision(a.name.clone()));
    }
    let ids = |n: &Network| -> BTreeSet<QubitId> {
        n.agents
            .iter()
            .flat_map(|a| a.sort.iter().copied())
            .chain(n.prep.ids())
            .collect()
    };
    let overlap: Vec<QubitId> = ids(n1).intersection(&ids(n2)).copied().collect();
    if !overlap.is_empty() {
        return Err(NetError::OverlappingIds(overlap));
    }
    let prep = n1.prep.tensor(&n2.prep)?;
    let agents = n1.agents.iter().chain(&n2.agents).cloned().collect();
    Ok(Network::new(format!("{}_{}", n1.name, n2.name), agents, prep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{Command, SignalExpr};
    use crate::netmodel::{validate_network, Event, Preparation};
    use crate::qnum::qids;

    fn recv(c: &str, x: &str) -> Event {
        Event::Recv {
            channel: c.into(),
            names: vec![x.into()],
        }
    }

    #[test]
    fn io_merge_feeds_outputs_forward() {
        let first = Agent::new("A", &[], vec![recv("c", "x")]).with_io(&[], &["x"]);
        let second = Agent::new(
            "A",
            &[],
            vec![Event::Send {
                channel: "d".into(),
                values: vec![SignalExpr::name("x")],
            }],
        )
        .with_io(&["x"], &[]);
        let a = agent_compose(&first, &second).unwrap();
        assert!(a.cin.is_empty());
        assert_eq!(a.cout, vec!["x".to_string()]);
        assert_eq!(a.events.len(), 2);
    }

    #[test]
    fn empty_second_keeps_program() {
        let first = Agent::new("A", &[1], vec![recv("c", "x")]).with_io(&["y"], &["x"]);
        let a = agent_compose(&first, &Agent::null("A")).unwrap();
        assert_eq!(a, first);
    }

    #[test]
    fn sort_merge_drops_carried_qubits() {
        let first = Agent::new(
            "A",
            &[1],
            vec![Event::Pattern(vec![
                Command::entangle(1, 4),
                Command::measure(1, 0.0),
                Command::x(4, SignalExpr::name("s1")),
            ])],
        );
        let second = Agent::new("A", &[4, 7], vec![]);
        let a = agent_compose(&first, &second).unwrap();
        assert_eq!(a.sort, qids(&[1, 7]).into_iter().collect());
    }

    #[test]
    fn name_mismatch() {
        assert!(matches!(
            agent_compose(&Agent::null("A"), &Agent::null("B")),
            Err(NetError::NameMismatch { .. })
        ));
    }

    #[test]
    fn consumed_qubit_reused_is_sort_mismatch() {
        let first = Agent::new("A", &[1], vec![Event::Pattern(vec![Command::measure(1, 0.0)])]);
        let second = Agent::new("A", &[1], vec![]);
        assert!(matches!(agent_compose(&first, &second), Err(NetError::SortMismatch(_))));
    }

    fn channel(from: &str, to: &str, q: u32, c: &str) -> Network {
        Network::new(
            "DC",
            vec![
                Agent::new(
                    from,
                    &[q],
                    vec![Event::QSend {
                        channel: c.into(),
                        qubit: QubitId(q),
                    }],
                ),
                Agent::new(
                    to,
                    &[],
                    vec![Event::QRecv {
                        channel: c.into(),
                        placeholder: QubitId(q),
                    }],
                ),
            ],
            Preparation::null(),
        )
    }

    #[test]
    fn round_trip_returns_qubit() {
        let there = channel("A", "B", 1, "qc");
        let back = Network::new(
            "back",
            vec![
                Agent::new(
                    "B",
                    &[1],
                    vec![Event::QSend {
                        channel: "qd".into(),
                        qubit: QubitId(1),
                    }],
                ),
                Agent::new(
                    "A",
                    &[],
                    vec![Event::QRecv {
                        channel: "qd".into(),
                        placeholder: QubitId(1),
                    }],
                ),
            ],
            Preparation::null(),
        );
        let n = net_seq_compose(&there, &back).unwrap();
        assert_eq!(n.agents[0].name, "A");
        assert_eq!(n.agents[0].sort, qids(&[1]).into_iter().collect());
        assert!(n.agents[1].sort.is_empty());
        assert_eq!(output_sort(&n.agents[0]).unwrap(), qids(&[1]).into_iter().collect());
        assert_eq!(validate_network(&n), vec![]);
    }

    #[test]
    fn seq_pads_missing_agents() {
        let n = net_seq_compose(&channel("A", "B", 1, "qc"), &channel("B", "C", 1, "qd")).unwrap();
        assert_eq!(n.agents.len(), 3);
        assert_eq!(n.agents[2].name, "C");
        assert_eq!(validate_network(&n), vec![]);
    }

    #[test]
    fn par_rejects_collisions() {
        let a = channel("A", "B", 1, "qc");
        assert!(matches!(net_par_compose(&a, &a), Err(NetError::NameCollision(_))));
        let b = channel("C", "D", 1, "qd");
        assert!(matches!(net_par_compose(&a, &b), Err(NetError::OverlappingIds(_))));
        let c = channel("C", "D", 2, "qd");
        let n = net_par_compose(&a, &c).unwrap();
        assert_eq!(n.agents.len(), 4);
        assert_eq!(validate_network(&n), vec![]);
    }

    #[test]
    fn par_with_empty_is_identity() {
        let a = channel("A", "B", 1, "qc");
        let n = net_par_compose(&a, &Network::empty("E")).unwrap();
        assert_eq!(n.agents, a.agents);
        assert_eq!(n.prep, a.prep);
    }
}
