//! Random valid networks for property checks.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::calculus::{signal_name, Command, SignalExpr};
use crate::netmodel::{output_sort, validate_network, Agent, Event, Network, Preparation};
use crate::qnum::QubitId;

/// Classical values and an optional qubit sent from one agent to another.
type Message = (Vec<SignalExpr>, Option<u32>);

#[derive(Debug, Clone, Copy)]
pub struct GenConfig {
    pub max_agents: usize,
    /// Bound on distinct qubit ids, auxiliaries included.
    pub max_qubits: u32,
    pub max_measurements: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            max_agents: 3,
            max_qubits: 6,
            max_measurements: 2,
        }
    }
}

/// One agent under construction.
#[derive(Default)]
struct Draft {
    name: String,
    sort: BTreeSet<u32>,
    /// Qubits held at the current point of the program.
    live: Vec<u32>,
    /// Names bound at the current point.
    bound: Vec<String>,
    cin: Vec<String>,
    events: Vec<Event>,
    measured: usize,
}

struct Builder<'a, R: Rng> {
    rng: &'a mut R,
    cfg: GenConfig,
    next_id: u32,
    budget: u32,
    tag: String,
    fresh_names: usize,
}

impl<R: Rng> Builder<'_, R> {
    fn fresh_qubit(&mut self) -> Option<u32> {
        if self.budget == 0 {
            return None;
        }
        self.budget -= 1;
        self.next_id += 1;
        Some(self.next_id)
    }

    fn fresh_name(&mut self, stem: &str) -> String {
        self.fresh_names += 1;
        format!("{stem}{}{}", self.tag, self.fresh_names)
    }

    fn angle(&mut self) -> f64 {
        match self.rng.gen_range(0..4) {
            0 => 0.0,
            1 => PI / 2.0,
            2 => PI / 4.0,
            _ => self.rng.gen_range(-PI..PI),
        }
    }

    fn dep(&mut self, names: &[String]) -> SignalExpr {
        if names.is_empty() || self.rng.gen_bool(0.3) {
            return SignalExpr::constant(self.rng.gen_range(0..2));
        }
        let k = self.rng.gen_range(1..=names.len().min(2));
        let terms = names.choose_multiple(self.rng, k).cloned().collect();
        SignalExpr::new(self.rng.gen_range(0..2), terms)
    }

    /// Entangle, measure and correct what `d` currently holds.
    fn local_pattern(&mut self, d: &mut Draft, may_measure: bool) {
        let mut cmds = Vec::new();
        if !d.live.is_empty() && self.rng.gen_bool(0.5) {
            if let Some(a) = self.fresh_qubit() {
                let q = *d.live.choose(self.rng).unwrap();
                cmds.push(Command::entangle(q, a));
                d.live.push(a);
            }
        }
        if d.live.len() >= 2 && self.rng.gen_bool(0.5) {
            let pair: Vec<u32> = d.live.choose_multiple(self.rng, 2).copied().collect();
            cmds.push(Command::entangle(pair[0], pair[1]));
        }
        let budget = if may_measure {
            self.cfg.max_measurements - d.measured
        } else {
            0
        };
        let count = self.rng.gen_range(0..=budget.min(d.live.len()));
        for _ in 0..count {
            let q = d.live.remove(self.rng.gen_range(0..d.live.len()));
            let mut m = Command::measure(q, self.angle());
            if let Command::Measure { s_dep, t_dep, .. } = &mut m {
                if self.rng.gen_bool(0.4) {
                    *s_dep = self.dep(&d.bound);
                }
                if self.rng.gen_bool(0.4) {
                    *t_dep = self.dep(&d.bound);
                }
            }
            cmds.push(m);
            d.bound.push(signal_name(QubitId(q)));
            d.measured += 1;
        }
        for q in d.live.clone() {
            if self.rng.gen_bool(0.4) {
                cmds.push(Command::x(q, self.dep(&d.bound)));
            }
            if self.rng.gen_bool(0.4) {
                cmds.push(Command::z(q, self.dep(&d.bound)));
            }
        }
        if !cmds.is_empty() {
            d.events.push(Event::Pattern(cmds));
        }
    }

    /// Agents in order; each runs a pattern, receives from earlier agents,
    /// runs a second pattern, then sends to later agents. Channels join one
    /// pair of agents each, so pairing is never ambiguous.
    fn build(&mut self, name: &str, mut drafts: Vec<Draft>, prep: Preparation) -> Network {
        let k = drafts.len();
        // plans[i][j]: what agent i sends agent j, fixed once i reaches its send block
        let mut plans: Vec<Vec<Option<Message>>> = vec![vec![None; k]; k];
        for i in 0..k {
            let mut d = std::mem::take(&mut drafts[i]);
            self.local_pattern(&mut d, true);
            for (j, row) in plans.iter().enumerate().take(i) {
                let Some((values, qubit)) = &row[i] else { continue };
                if !values.is_empty() {
                    let names: Vec<String> = values.iter().map(|_| self.fresh_name("r")).collect();
                    d.events.push(Event::Recv {
                        channel: format!("c{}{j}{i}", self.tag),
                        names: names.clone(),
                    });
                    d.bound.extend(names);
                }
                if let Some(q) = qubit {
                    d.events.push(Event::QRecv {
                        channel: format!("q{}{j}{i}", self.tag),
                        placeholder: QubitId(*q),
                    });
                    d.live.push(*q);
                }
            }
            if i > 0 {
                self.local_pattern(&mut d, true);
            }
            for (j, slot) in plans[i].iter_mut().enumerate().skip(i + 1) {
                if !self.rng.gen_bool(0.5) {
                    continue;
                }
                let mut values = Vec::new();
                if !d.bound.is_empty() && self.rng.gen_bool(0.7) {
                    for _ in 0..self.rng.gen_range(1..=2) {
                        values.push(self.dep(&d.bound));
                    }
                    d.events.push(Event::Send {
                        channel: format!("c{}{i}{j}", self.tag),
                        values: values.clone(),
                    });
                }
                let mut qubit = None;
                if !d.live.is_empty() && self.rng.gen_bool(0.4) {
                    let q = d.live.remove(self.rng.gen_range(0..d.live.len()));
                    d.events.push(Event::QSend {
                        channel: format!("q{}{i}{j}", self.tag),
                        qubit: QubitId(q),
                    });
                    qubit = Some(q);
                }
                if !values.is_empty() || qubit.is_some() {
                    *slot = Some((values, qubit));
                }
            }
            drafts[i] = d;
        }
        let agents = drafts
            .into_iter()
            .map(|d| {
                let own: Vec<&String> = d.bound.iter().filter(|x| !d.cin.contains(x)).collect();
                let cout = own.into_iter().filter(|_| self.rng.gen_bool(0.5)).cloned().collect();
                Agent {
                    name: d.name,
                    cin: d.cin,
                    cout,
                    sort: d.sort.into_iter().map(QubitId).collect(),
                    events: d.events,
                }
            })
            .collect();
        Network::new(name, agents, prep)
    }
}

fn draft(name: String, sort: BTreeSet<u32>) -> Draft {
    Draft {
        name,
        live: sort.iter().copied().collect(),
        sort,
        ..Draft::default()
    }
}

/// Pick agent sorts and an optional shared pair, then build.
fn fresh_network<R: Rng>(rng: &mut R, cfg: GenConfig, names: &[&str], first_id: u32, tag: &str) -> Network {
    let mut b = Builder {
        rng,
        cfg,
        next_id: first_id - 1,
        budget: cfg.max_qubits,
        tag: tag.to_string(),
        fresh_names: 0,
    };
    let k = b.rng.gen_range(1..=cfg.max_agents.min(names.len()));
    let mut drafts: Vec<Draft> = names[..k]
        .iter()
        .map(|n| draft(n.to_string(), BTreeSet::new()))
        .collect();
    for d in drafts.iter_mut() {
        for _ in 0..b.rng.gen_range(0..=2) {
            if b.budget > 2 {
                let q = b.fresh_qubit().unwrap();
                d.sort.insert(q);
                d.live.push(q);
            }
        }
    }
    let mut prep = Preparation::null();
    if b.rng.gen_bool(0.5) && b.budget >= 2 {
        let (p, q) = (b.fresh_qubit().unwrap(), b.fresh_qubit().unwrap());
        let (i, j) = (b.rng.gen_range(0..k), b.rng.gen_range(0..k));
        drafts[i].sort.insert(p);
        drafts[i].live.push(p);
        drafts[j].sort.insert(q);
        drafts[j].live.push(q);
        prep = Preparation::entangled(&[(p, q)]);
    }
    if b.rng.gen_bool(0.3) {
        let i = b.rng.gen_range(0..k);
        let x = b.fresh_name("in");
        drafts[i].cin.push(x.clone());
        drafts[i].bound.push(x);
    }
    b.build(&format!("R{tag}"), drafts, prep)
}

fn checked(n: Network) -> Network {
    let v = validate_network(&n);
    assert!(v.is_empty(), "generated an invalid network {n:?}: {v:?}");
    n
}

/// A valid network within `cfg`.
pub fn random_network<R: Rng>(rng: &mut R, cfg: GenConfig) -> Network {
    checked(fresh_network(rng, cfg, &["A", "B", "C"], 1, ""))
}

fn max_id(n: &Network) -> u32 {
    let mut m = n.prep.ids().iter().map(|q| q.0).max().unwrap_or(0);
    for a in &n.agents {
        m = m.max(a.sort.iter().map(|q| q.0).max().unwrap_or(0));
        for e in &a.events {
            if let Event::Pattern(cmds) = e {
                m = m.max(cmds.iter().flat_map(|c| c.qubits()).map(|q| q.0).max().unwrap_or(0));
            }
        }
    }
    m
}

/// Two networks with disjoint agents, names and qubits.
pub fn random_par_pair<R: Rng>(rng: &mut R) -> (Network, Network) {
    let small = GenConfig {
        max_agents: 2,
        max_qubits: 3,
        max_measurements: 2,
    };
    let n1 = checked(fresh_network(rng, small, &["A", "B"], 1, "a"));
    let first = max_id(&n1) + 1;
    let n2 = checked(fresh_network(rng, small, &["C", "D"], first, "b"));
    (n1, n2)
}

/// Two networks over the same agent names where the second continues on
/// what the first leaves behind, possibly reading its outputs.
pub fn random_seq_pair<R: Rng>(rng: &mut R) -> (Network, Network) {
    let cfg = GenConfig {
        max_agents: 2,
        max_qubits: 4,
        max_measurements: 1,
    };
    let n1 = checked(fresh_network(rng, cfg, &["A", "B"], 1, "a"));
    let mut b = Builder {
        rng,
        cfg: GenConfig { max_qubits: 2, ..cfg },
        next_id: max_id(&n1),
        budget: 2,
        tag: "b".into(),
        fresh_names: 0,
    };
    let mut drafts = Vec::new();
    for a in &n1.agents {
        let mut sort: BTreeSet<u32> = output_sort(a).expect("valid agent").iter().map(|q| q.0).collect();
        if b.rng.gen_bool(0.3) {
            if let Some(q) = b.fresh_qubit() {
                sort.insert(q);
            }
        }
        let mut d = draft(a.name.clone(), sort);
        for y in &a.cout {
            if b.rng.gen_bool(0.8) {
                d.cin.push(y.clone());
                d.bound.push(y.clone());
            }
        }
        drafts.push(d);
    }
    let mut n2 = b.build("Rb", drafts, Preparation::null());
    // a name read from the first network is not an output of the second
    for (a, first) in n2.agents.iter_mut().zip(&n1.agents) {
        a.cout.retain(|y| !first.cout.contains(y));
    }
    (n1, checked(n2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_networks_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let n = random_network(&mut rng, GenConfig::default());
            assert!(n.agents.len() <= 3);
            assert!(max_id(&n) <= 6);
        }
    }

    #[test]
    fn pairs_compose() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let (a, b) = random_par_pair(&mut rng);
            let n = crate::netmodel::net_par_compose(&a, &b).unwrap();
            assert!(validate_network(&n).is_empty());
            let (a, b) = random_seq_pair(&mut rng);
            let n = crate::netmodel::net_seq_compose(&a, &b).unwrap();
            assert!(validate_network(&n).is_empty(), "{:?}", validate_network(&n));
        }
    }
}
