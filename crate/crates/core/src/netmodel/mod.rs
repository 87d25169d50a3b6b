//! Agents, networks, composition and the definiteness checks.

mod compose;
mod interleave;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::calculus::{measured_qubits, signal_name, Command, Pattern, SignalExpr};
use crate::qnum::{embed_apply, gates, LinOp, QRegisterState, QnumError, QubitId};

pub use compose::{agent_compose, net_par_compose, net_seq_compose};
pub(crate) use interleave::finished;
pub use interleave::{enabled_at, enabled_heads, resolve_sequence, round_robin_sequence, RuleInstance};
pub use validate::{validate_network, Rule, Violation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetError {
    #[error("cannot compose agent {first} with agent {second}")]
    NameMismatch { first: String, second: String },
    #[error("sort mismatch: {0}")]
    SortMismatch(String),
    #[error("agent set mismatch: {0}")]
    AgentSetMismatch(String),
    #[error("agent name {0} used in both networks")]
    NameCollision(String),
    #[error("networks share qubits {0:?}")]
    OverlappingIds(Vec<QubitId>),
    #[error("agent {agent}: qubit {qubit} not in sort")]
    UnknownQubit { agent: String, qubit: QubitId },
    #[error("invalid preparation: {0}")]
    InvalidPreparation(String),
    #[error(transparent)]
    Qnum(#[from] QnumError),
}

pub type Result<T> = std::result::Result<T, NetError>;

#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    /// Command list in application order; inputs are the mentioned qubits
    /// owned when it runs, outputs those it leaves unmeasured.
    Pattern(Vec<Command>),
    Send {
        channel: String,
        values: Vec<SignalExpr>,
    },
    Recv {
        channel: String,
        names: Vec<String>,
    },
    QSend {
        channel: String,
        qubit: QubitId,
    },
    /// `placeholder` is replaced by the received qubit in later events.
    QRecv {
        channel: String,
        placeholder: QubitId,
    },
}

impl Event {
    pub fn channel(&self) -> Option<&str> {
        match self {
            Event::Pattern(_) => None,
            Event::Send { channel, .. }
            | Event::Recv { channel, .. }
            | Event::QSend { channel, .. }
            | Event::QRecv { channel, .. } => Some(channel),
        }
    }

    pub fn is_local(&self) -> bool {
        matches!(self, Event::Pattern(_))
    }

    pub fn substitute(&mut self, from: QubitId, to: QubitId) {
        match self {
            Event::Pattern(cmds) => cmds.iter_mut().for_each(|c| c.substitute(from, to)),
            Event::Send { values, .. } => {
                let (old, new) = (signal_name(from), signal_name(to));
                for v in values.iter_mut() {
                    for t in v.terms.iter_mut() {
                        if *t == old {
                            *t = new.clone();
                        }
                    }
                }
            }
            Event::QSend { qubit, .. } => {
                if *qubit == from {
                    *qubit = to;
                }
            }
            Event::QRecv { placeholder, .. } => {
                if *placeholder == from {
                    *placeholder = to;
                }
            }
            Event::Recv { .. } => {}
        }
    }

    fn relabel(&mut self, map: &BTreeMap<QubitId, QubitId>) {
        // two passes through unused ids so that swaps do not collide
        let ceiling = map.keys().chain(map.values()).map(|q| q.0).max().unwrap_or(0) + 1;
        let mut pending = Vec::new();
        for (i, (&from, &to)) in map.iter().enumerate() {
            let tmp = QubitId(ceiling + i as u32 + 1_000_000);
            self.substitute(from, tmp);
            pending.push((tmp, to));
        }
        for (tmp, to) in pending {
            self.substitute(tmp, to);
        }
    }
}

/// `A(i, o): Q.E`.
#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub name: String,
    pub cin: Vec<String>,
    pub cout: Vec<String>,
    pub sort: BTreeSet<QubitId>,
    pub events: Vec<Event>,
}

impl Agent {
    pub fn new(name: impl Into<String>, sort: &[u32], events: Vec<Event>) -> Self {
        Self {
            name: name.into(),
            cin: Vec::new(),
            cout: Vec::new(),
            sort: sort.iter().map(|&q| QubitId(q)).collect(),
            events,
        }
    }

    pub fn null(name: impl Into<String>) -> Self {
        Self::new(name, &[], Vec::new())
    }

    pub fn with_io(mut self, cin: &[&str], cout: &[&str]) -> Self {
        self.cin = cin.iter().map(|s| s.to_string()).collect();
        self.cout = cout.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn is_null(&self) -> bool {
        self.cin.is_empty() && self.cout.is_empty() && self.sort.is_empty() && self.events.is_empty()
    }
}

/// Sort after replaying the events, treating each quantum receive as
/// delivering its placeholder id.
pub fn output_sort(a: &Agent) -> Result<BTreeSet<QubitId>> {
    let mut sort = a.sort.clone();
    for e in &a.events {
        match e {
            Event::Pattern(cmds) => {
                let measured = measured_qubits(cmds);
                for q in cmds.iter().flat_map(Command::qubits) {
                    if measured.contains(&q) {
                        sort.remove(&q);
                    } else {
                        sort.insert(q);
                    }
                }
            }
            Event::QSend { qubit, .. } => {
                if !sort.remove(qubit) {
                    return Err(NetError::UnknownQubit {
                        agent: a.name.clone(),
                        qubit: *qubit,
                    });
                }
            }
            Event::QRecv { placeholder, .. } => {
                sort.insert(*placeholder);
            }
            Event::Send { .. } | Event::Recv { .. } => {}
        }
    }
    Ok(sort)
}

/// The pattern an event runs when the agent owns `sort`.
pub fn event_pattern(cmds: &[Command], sort: &BTreeSet<QubitId>) -> Pattern {
    Pattern::from_commands(cmds.to_vec(), sort)
}

/// The shared resource state.
#[derive(Debug, Clone, PartialEq)]
pub enum Preparation {
    /// `|+>` on `ids`, then controlled-Z on each edge in order.
    Graph {
        ids: Vec<QubitId>,
        edges: Vec<(QubitId, QubitId)>,
    },
    State(QRegisterState),
}

impl Preparation {
    pub fn null() -> Self {
        Preparation::Graph {
            ids: Vec::new(),
            edges: Vec::new(),
        }
    }

    /// Graph state over the qubits mentioned by `edges`.
    pub fn entangled(edges: &[(u32, u32)]) -> Self {
        let mut ids = Vec::new();
        for &(a, b) in edges {
            for q in [a, b] {
                if !ids.contains(&QubitId(q)) {
                    ids.push(QubitId(q));
                }
            }
        }
        Preparation::Graph {
            ids,
            edges: edges.iter().map(|&(a, b)| (QubitId(a), QubitId(b))).collect(),
        }
    }

    pub fn ids(&self) -> Vec<QubitId> {
        match self {
            Preparation::Graph { ids, .. } => ids.clone(),
            Preparation::State(s) => s.ids().to_vec(),
        }
    }

    pub fn is_null(&self) -> bool {
        self.ids().is_empty()
    }

    pub fn state(&self) -> Result<QRegisterState> {
        match self {
            Preparation::State(s) => Ok(s.clone()),
            Preparation::Graph { ids, edges } => {
                let mut s = QRegisterState::plus(ids.clone())?;
                for &(a, b) in edges {
                    if a == b || !ids.contains(&a) || !ids.contains(&b) {
                        return Err(NetError::InvalidPreparation(format!("bad edge E({a},{b})")));
                    }
                    let cz = LinOp::new(vec![a, b], vec![a, b], gates::cz())?;
                    s = embed_apply(&cz, &s)?;
                }
                Ok(s)
            }
        }
    }

    pub fn tensor(&self, other: &Preparation) -> Result<Preparation> {
        let overlap: Vec<QubitId> = self.ids().into_iter().filter(|q| other.ids().contains(q)).collect();
        if !overlap.is_empty() {
            return Err(NetError::OverlappingIds(overlap));
        }
        match (self, other) {
            (Preparation::Graph { ids: i1, edges: e1 }, Preparation::Graph { ids: i2, edges: e2 }) => {
                Ok(Preparation::Graph {
                    ids: i1.iter().chain(i2).copied().collect(),
                    edges: e1.iter().chain(e2).copied().collect(),
                })
            }
            _ => Ok(Preparation::State(crate::qnum::tensor(
                &self.state()?,
                &other.state()?,
            )?)),
        }
    }

    fn relabel(&self, map: &BTreeMap<QubitId, QubitId>) -> Result<Preparation> {
        let m = |q: &QubitId| *map.get(q).unwrap_or(q);
        Ok(match self {
            Preparation::Graph { ids, edges } => Preparation::Graph {
                ids: ids.iter().map(m).collect(),
                edges: edges.iter().map(|(a, b)| (m(a), m(b))).collect(),
            },
            Preparation::State(s) => {
                let ids: Vec<QubitId> = s.ids().iter().map(m).collect();
                Preparation::State(QRegisterState::from_parts(ids, s.form(), s.data().clone()))
            }
        })
    }
}

/// Agents in parallel with a shared preparation.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub name: String,
    pub agents: Vec<Agent>,
    pub prep: Preparation,
}

impl Network {
    pub fn new(name: impl Into<String>, agents: Vec<Agent>, prep: Preparation) -> Self {
        Self {
            name: name.into(),
            agents,
            prep,
        }
    }

    pub fn empty(name: impl Into<String>) -> Self {
        Self::new(name, Vec::new(), Preparation::null())
    }

    pub fn agent_index(&self, name: &str) -> Option<usize> {
        self.agents.iter().position(|a| a.name == name)
    }

    /// Qubits agent `i` supplies itself, ascending.
    pub fn local_inputs(&self, i: usize) -> Vec<QubitId> {
        let shared = self.prep.ids();
        self.agents[i]
            .sort
            .iter()
            .copied()
            .filter(|q| !shared.contains(q))
            .collect()
    }

    /// All local inputs ordered by agent position, then id.
    pub fn input_ids(&self) -> Vec<QubitId> {
        (0..self.agents.len()).flat_map(|i| self.local_inputs(i)).collect()
    }

    /// Classical inputs ordered by agent position, then declaration.
    pub fn cin_names(&self) -> Vec<String> {
        self.agents.iter().flat_map(|a| a.cin.iter().cloned()).collect()
    }

    pub fn rename_agents(&self, map: &BTreeMap<String, String>) -> Network {
        let mut n = self.clone();
        for a in n.agents.iter_mut() {
            if let Some(new) = map.get(&a.name) {
                a.name = new.clone();
            }
        }
        n
    }

    pub fn rename_channels(&self, map: &BTreeMap<String, String>) -> Network {
        let mut n = self.clone();
        for e in n.agents.iter_mut().flat_map(|a| a.events.iter_mut()) {
            match e {
                Event::Send { channel, .. }
                | Event::Recv { channel, .. }
                | Event::QSend { channel, .. }
                | Event::QRecv { channel, .. } => {
                    if let Some(new) = map.get(channel) {
                        *channel = new.clone();
                    }
                }
                Event::Pattern(_) => {}
            }
        }
        n
    }

    /// Rename classical names (inputs, outputs, received names and their uses).
    pub fn rename_names(&self, map: &BTreeMap<String, String>) -> Network {
        let r = |s: &mut String| {
            if let Some(new) = map.get(s) {
                *s = new.clone();
            }
        };
        let re = |e: &mut SignalExpr| e.terms.iter_mut().for_each(r);
        let mut n = self.clone();
        for a in n.agents.iter_mut() {
            a.cin.iter_mut().for_each(r);
            a.cout.iter_mut().for_each(r);
            for e in a.events.iter_mut() {
                match e {
                    Event::Send { values, .. } => values.iter_mut().for_each(re),
                    Event::Recv { names, .. } => names.iter_mut().for_each(r),
                    Event::Pattern(cmds) => {
                        for c in cmds.iter_mut() {
                            match c {
                                Command::Measure { s_dep, t_dep, .. } => {
                                    re(s_dep);
                                    re(t_dep);
                                }
                                Command::CorrectX { dep, .. } | Command::CorrectZ { dep, .. } => re(dep),
                                _ => {}
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
        n
    }

    /// Rename qubit ids everywhere, together with their signal names.
    pub fn relabel_qubits(&self, map: &BTreeMap<QubitId, QubitId>) -> Result<Network> {
        let signal_map: BTreeMap<String, String> =
            map.iter().map(|(a, b)| (signal_name(*a), signal_name(*b))).collect();
        let mut n = self.clone();
        for a in n.agents.iter_mut() {
            a.sort = a.sort.iter().map(|q| *map.get(q).unwrap_or(q)).collect();
            a.events.iter_mut().for_each(|e| e.relabel(map));
            for name in a.cin.iter_mut().chain(a.cout.iter_mut()) {
                if let Some(new) = signal_map.get(name) {
                    *name = new.clone();
                }
            }
        }
        n.prep = self.prep.relabel(map)?;
        Ok(n)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::H0 => "H0",
            Rule::H1 => "H1",
            Rule::H2 => "H2",
            Rule::H3 => "H3",
            Rule::Disjoint => "disjoint-sorts",
            Rule::Coverage => "prep-coverage",
            Rule::Pattern => "pattern",
        };
        f.write_str(s)
    }
}
