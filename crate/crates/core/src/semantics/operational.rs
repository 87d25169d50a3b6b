use std::collections::BTreeSet;

use super::config::{initial, step};
use super::{ensure_valid, Configuration, Result, RuleInstance, Schedule};
use crate::calculus::Env;
use crate::netmodel::Network;
use crate::qnum::{QRegisterState, QubitId, EQ_TOL};

#[derive(Debug, Clone)]
pub struct PathStep {
    pub rule: RuleInstance,
    pub bindings: Env,
    pub lambda: f64,
}

/// A maximal run from the initial configuration.
#[derive(Debug, Clone)]
pub struct Path {
    pub steps: Vec<PathStep>,
    pub prob: f64,
    pub final_config: Configuration,
}

/// Final configurations identified up to internal bindings.
#[derive(Debug, Clone)]
pub struct FinalClass {
    pub sorts: Vec<BTreeSet<QubitId>>,
    /// Per agent, `Γ` restricted to its classical outputs.
    pub couts: Vec<Env>,
    /// Normalized, mixed form.
    pub qfinal: QRegisterState,
}

impl FinalClass {
    pub fn of(n: &Network, c: &Configuration) -> Self {
        Self {
            sorts: c.agents.iter().map(|a| a.sort.clone()).collect(),
            couts: n
                .agents
                .iter()
                .zip(&c.agents)
                .map(|(a, st)| {
                    a.cout
                        .iter()
                        .filter_map(|y| st.env.get(y).map(|v| (y.clone(), *v)))
                        .collect()
                })
                .collect(),
            qfinal: c.qstate.to_mixed(),
        }
    }

    /// Same sorts and outputs, and states within `tol`.
    pub fn matches(&self, other: &FinalClass, tol: f64) -> bool {
        self.same_outputs(other)
            && self
                .qfinal
                .density_distance(&other.qfinal)
                .map(|d| d <= tol)
                .unwrap_or(false)
    }

    pub fn same_outputs(&self, other: &FinalClass) -> bool {
        self.sorts == other.sorts && self.couts == other.couts
    }

    /// All classical outputs merged into one map (names are unique).
    pub fn outputs(&self) -> Env {
        self.couts.iter().flatten().map(|(k, v)| (k.clone(), *v)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct Transition {
    pub class: FinalClass,
    pub prob: f64,
}

/// Probabilistic transition system for one input under one schedule.
#[derive(Debug, Clone)]
pub struct Pts {
    pub cin: Env,
    pub qin: QRegisterState,
    pub schedule: Vec<RuleInstance>,
    pub transitions: Vec<Transition>,
    /// Every path before classes are merged.
    pub paths: Vec<Path>,
}

impl Pts {
    pub fn total_prob(&self) -> f64 {
        self.transitions.iter().map(|t| t.prob).sum()
    }

    /// Probability-weighted mixture of every final state.
    pub fn mixture(&self) -> Result<QRegisterState> {
        let mut acc: Option<QRegisterState> = None;
        for t in &self.transitions {
            let term = t.class.qfinal.scale_weight(t.prob);
            acc = Some(match acc {
                None => term,
                Some(a) => a.mix_with(&term)?,
            });
        }
        Ok(acc.unwrap_or_else(QRegisterState::scalar))
    }

    /// Largest disagreement with `other`: probability gaps and state
    /// distances over matched classes, the full probability of unmatched ones.
    pub fn distance(&self, other: &Pts) -> f64 {
        fn one_way(a: &Pts, b: &Pts) -> f64 {
            a.transitions
                .iter()
                .map(|t| {
                    b.transitions
                        .iter()
                        .filter(|u| u.class.same_outputs(&t.class))
                        .filter_map(|u| {
                            let d = t.class.qfinal.density_distance(&u.class.qfinal).ok()?;
                            Some(d.max((t.prob - u.prob).abs()))
                        })
                        .fold(t.prob, f64::min)
                })
                .fold(0.0, f64::max)
        }
        one_way(self, other).max(one_way(other, self))
    }
}

/// Explore every branch of `n` under `schedule`.
pub fn run_schedule(n: &Network, cin: &Env, qin: &QRegisterState, schedule: &Schedule) -> Result<Pts> {
    ensure_valid(n)?;
    let seq = schedule.resolve(n)?;
    run_sequence(n, cin, qin, &seq, false)
}

/// The canonical round-robin run.
pub fn operational(n: &Network, cin: &Env, qin: &QRegisterState) -> Result<Pts> {
    run_schedule(n, cin, qin, &Schedule::RoundRobin)
}

pub(crate) fn run_sequence(
    n: &Network,
    cin: &Env,
    qin: &QRegisterState,
    seq: &[RuleInstance],
    context: bool,
) -> Result<Pts> {
    let start = initial(n, cin, qin, context)?;
    let mut frontier = vec![Path {
        steps: Vec::new(),
        prob: 1.0,
        final_config: start,
    }];
    for &rule in seq {
        let mut next = Vec::with_capacity(frontier.len());
        for path in frontier {
            for s in step(&path.final_config, rule)? {
                let mut steps = path.steps.clone();
                steps.push(PathStep {
                    rule,
                    bindings: s.bindings,
                    lambda: s.prob,
                });
                next.push(Path {
                    steps,
                    prob: path.prob * s.prob,
                    final_config: s.config,
                });
            }
        }
        frontier = next;
    }

    let mut transitions: Vec<Transition> = Vec::new();
    for path in &frontier {
        let class = FinalClass::of(n, &path.final_config);
        match transitions.iter_mut().find(|t| t.class.matches(&class, EQ_TOL)) {
            Some(t) => {
                let total = t.prob + path.prob;
                let merged = t
                    .class
                    .qfinal
                    .scale_weight(t.prob / total)
                    .mix_with(&class.qfinal.scale_weight(path.prob / total))?;
                t.class.qfinal = merged;
                t.prob = total;
            }
            None => transitions.push(Transition { class, prob: path.prob }),
        }
    }
    Ok(Pts {
        cin: cin.clone(),
        qin: qin.clone(),
        schedule: seq.to_vec(),
        transitions,
        paths: frontier,
    })
}
