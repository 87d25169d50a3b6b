//! Operational and denotational semantics of networks, and the checks
//! relating them.

mod checks;
mod config;
mod denotational;
mod equivalence;
mod operational;

use thiserror::Error;

use crate::calculus::{CalculusError, Env};
use crate::netmodel::{finished, resolve_sequence, round_robin_sequence, NetError, Network, Violation};
use crate::qnum::QnumError;

pub use crate::netmodel::RuleInstance;
pub use checks::{
    check_compose, check_context, check_correspondence, check_schedules, enumerate_schedules, ComposeCheck,
    ComposeMode, ContextCheck, CorrespondenceCheck, ScheduleCheck, MAX_SCHEDULES,
};
pub use config::{enabled, init_configuration, step, AgentState, Configuration, Successor};
pub use denotational::{
    denotational, denote_for, AgentType, Denotation, DenotationEntry, KrausElement, RestrictedClass,
};
pub use equivalence::{equivalent, Verdict, Witness};
pub use operational::{operational, run_schedule, FinalClass, Path, PathStep, Pts, Transition};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemanticsError {
    #[error("network is not valid: {}", join(.0))]
    ValidationFailed(Vec<Violation>),
    #[error("input mismatch: {0}")]
    InputMismatch(String),
    #[error("rule {0:?} is not enabled")]
    NotEnabled(RuleInstance),
    #[error("deadlock: {0}")]
    Deadlock(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Qnum(#[from] QnumError),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, SemanticsError>;

pub(crate) fn ensure_valid(n: &Network) -> Result<()> {
    let v = crate::netmodel::validate_network(n);
    if v.is_empty() {
        Ok(())
    } else {
        Err(SemanticsError::ValidationFailed(v))
    }
}

/// Every bit assignment over `names`, the first name being the most
/// significant bit of the enumeration index.
pub fn assignments(names: &[String]) -> Vec<Env> {
    let k = names.len();
    (0..1usize << k)
        .map(|idx| {
            names
                .iter()
                .enumerate()
                .map(|(j, n)| (n.clone(), ((idx >> (k - 1 - j)) & 1) as u8))
                .collect()
        })
        .collect()
}

/// How nondeterministic choices between enabled rules are resolved.
#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    /// The current agent fires until blocked, then the next agent in order.
    RoundRobin,
    /// Always fire a rule of the earliest listed agent that has one.
    Priority(Vec<usize>),
    /// An explicit firing sequence.
    Fixed(Vec<RuleInstance>),
}

impl Schedule {
    /// The firing sequence this schedule yields on `n`. Enabledness only
    /// depends on event heads, so the sequence is the same on every branch.
    pub fn resolve(&self, n: &Network) -> Result<Vec<RuleInstance>> {
        let (steps, pcs) = match self {
            Schedule::RoundRobin => round_robin_sequence(n),
            Schedule::Priority(order) => {
                let rank = |a: usize| order.iter().position(|&x| x == a).unwrap_or(order.len() + a);
                resolve_sequence(n, |enabled, _| {
                    enabled
                        .iter()
                        .min_by_key(|r| r.agents().into_iter().map(rank).min())
                        .copied()
                })
            }
            Schedule::Fixed(seq) => {
                let mut pcs = vec![0; n.agents.len()];
                for (k, r) in seq.iter().enumerate() {
                    if !crate::netmodel::enabled_at(n, &pcs).contains(r) {
                        return Err(SemanticsError::InvalidSchedule(format!(
                            "{r:?} is not enabled at step {k}"
                        )));
                    }
                    r.advance(&mut pcs);
                }
                if !finished(n, &pcs) {
                    return Err(SemanticsError::InvalidSchedule(
                        "schedule stops before every event has run".into(),
                    ));
                }
                (seq.clone(), pcs)
            }
        };
        if !finished(n, &pcs) {
            let blocked: Vec<String> = n
                .agents
                .iter()
                .zip(&pcs)
                .filter(|(a, &pc)| pc < a.events.len())
                .map(|(a, pc)| format!("{} at event {pc}", a.name))
                .collect();
            return Err(SemanticsError::Deadlock(blocked.join(", ")));
        }
        Ok(steps)
    }
}
