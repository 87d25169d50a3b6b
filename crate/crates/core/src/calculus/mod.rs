//! Measurement-calculus patterns: commands, well-formedness, and evaluation.
//!
//! Commands are stored in application order (first applied first). The
//! textual notation lists them the other way round; the DSL layer reverses.

mod exec;
mod operator;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::qnum::{QnumError, QubitId};

pub use exec::{exec_pattern, exec_pattern_raw, ExecBranch};
pub use operator::{all_branch_operators, branch_operator, Branch};
pub use validate::{validate_pattern, PatternViolation};

/// Classical environment: name to bit.
pub type Env = BTreeMap<String, u8>;

/// Measurement outcomes keyed by measured qubit.
pub type Signals = BTreeMap<QubitId, u8>;

/// Name of the signal produced by measuring `q`.
pub fn signal_name(q: QubitId) -> String {
    format!("s{}", q.0)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalculusError {
    #[error("unbound name {0}")]
    UnboundName(String),
    #[error("no signal given for measured qubit {0}")]
    IncompleteSignals(QubitId),
    #[error("invalid pattern: {}", format_violations(.0))]
    InvalidPattern(Vec<PatternViolation>),
    #[error(transparent)]
    Qnum(#[from] QnumError),
}

fn format_violations(v: &[PatternViolation]) -> String {
    v.iter().map(|x| x.message.as_str()).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, CalculusError>;

/// Sum mod 2 of a constant and a list of classical names.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SignalExpr {
    pub constant: u8,
    pub terms: Vec<String>,
}

impl SignalExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(bit: u8) -> Self {
        Self {
            constant: bit & 1,
            terms: Vec::new(),
        }
    }

    pub fn name(name: impl Into<String>) -> Self {
        Self {
            constant: 0,
            terms: vec![name.into()],
        }
    }

    pub fn new(constant: u8, terms: Vec<String>) -> Self {
        Self {
            constant: constant & 1,
            terms,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0 && self.terms.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(String::as_str)
    }
}

impl fmt::Display for SignalExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.terms.clone();
        if self.constant == 1 || parts.is_empty() {
            parts.push(self.constant.to_string());
        }
        write!(f, "{}", parts.join("+"))
    }
}

/// `constant + Σ terms mod 2`.
pub fn eval_signal(e: &SignalExpr, env: &Env) -> Result<u8> {
    e.terms.iter().try_fold(e.constant & 1, |acc, name| {
        env.get(name)
            .map(|v| acc ^ (v & 1))
            .ok_or_else(|| CalculusError::UnboundName(name.clone()))
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Entangle(QubitId, QubitId),
    Measure {
        qubit: QubitId,
        angle: f64,
        s_dep: SignalExpr,
        t_dep: SignalExpr,
    },
    CorrectX {
        qubit: QubitId,
        dep: SignalExpr,
    },
    CorrectZ {
        qubit: QubitId,
        dep: SignalExpr,
    },
    Nil,
}

impl Command {
    pub fn measure(qubit: u32, angle: f64) -> Self {
        Command::Measure {
            qubit: QubitId(qubit),
            angle,
            s_dep: SignalExpr::zero(),
            t_dep: SignalExpr::zero(),
        }
    }

    pub fn entangle(a: u32, b: u32) -> Self {
        Command::Entangle(QubitId(a), QubitId(b))
    }

    pub fn x(qubit: u32, dep: SignalExpr) -> Self {
        Command::CorrectX {
            qubit: QubitId(qubit),
            dep,
        }
    }

    pub fn z(qubit: u32, dep: SignalExpr) -> Self {
        Command::CorrectZ {
            qubit: QubitId(qubit),
            dep,
        }
    }

    pub fn qubits(&self) -> Vec<QubitId> {
        match self {
            Command::Entangle(a, b) => vec![*a, *b],
            Command::Measure { qubit, .. } | Command::CorrectX { qubit, .. } | Command::CorrectZ { qubit, .. } => {
                vec![*qubit]
            }
            Command::Nil => Vec::new(),
        }
    }

    /// Classical names this command reads.
    pub fn dependencies(&self) -> Vec<&str> {
        match self {
            Command::Measure { s_dep, t_dep, .. } => s_dep.names().chain(t_dep.names()).collect(),
            Command::CorrectX { dep, .. } | Command::CorrectZ { dep, .. } => dep.names().collect(),
            _ => Vec::new(),
        }
    }

    /// Rename qubit `from` to `to`, including signal names derived from it.
    pub fn substitute(&mut self, from: QubitId, to: QubitId) {
        let old_sig = signal_name(from);
        let new_sig = signal_name(to);
        let rename_expr = |e: &mut SignalExpr| {
            for t in e.terms.iter_mut() {
                if *t == old_sig {
                    *t = new_sig.clone();
                }
            }
        };
        let swap = |q: &mut QubitId| {
            if *q == from {
                *q = to;
            }
        };
        match self {
            Command::Entangle(a, b) => {
                swap(a);
                swap(b);
            }
            Command::Measure {
                qubit, s_dep, t_dep, ..
            } => {
                swap(qubit);
                rename_expr(s_dep);
                rename_expr(t_dep);
            }
            Command::CorrectX { qubit, dep } | Command::CorrectZ { qubit, dep } => {
                swap(qubit);
                rename_expr(dep);
            }
            Command::Nil => {}
        }
    }
}

/// Measurement angle after signal dependencies: `(-1)^s α + tπ`.
pub fn resolved_angle(angle: f64, s: u8, t: u8) -> f64 {
    let signed = if s & 1 == 1 { -angle } else { angle };
    signed + if t & 1 == 1 { std::f64::consts::PI } else { 0.0 }
}

/// A pattern `P(V, I, O, A)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    pub space: Vec<QubitId>,
    pub inputs: Vec<QubitId>,
    pub outputs: Vec<QubitId>,
    /// Application order.
    pub commands: Vec<Command>,
}

impl Pattern {
    pub fn new(space: Vec<QubitId>, inputs: Vec<QubitId>, outputs: Vec<QubitId>, commands: Vec<Command>) -> Self {
        Self {
            space,
            inputs,
            outputs,
            commands,
        }
    }

    /// Pattern over the qubits its commands mention. Inputs are those already
    /// available (owned), outputs those left unmeasured; both sorted.
    pub fn from_commands(commands: Vec<Command>, available: &BTreeSet<QubitId>) -> Self {
        let space: BTreeSet<QubitId> = commands.iter().flat_map(Command::qubits).collect();
        let measured = measured_qubits(&commands);
        let inputs = space.iter().copied().filter(|q| available.contains(q)).collect();
        let outputs = space.iter().copied().filter(|q| !measured.contains(q)).collect();
        Self {
            space: space.into_iter().collect(),
            inputs,
            outputs,
            commands,
        }
    }

    /// The empty pattern on `ids`.
    pub fn identity(ids: Vec<QubitId>) -> Self {
        Self {
            space: ids.clone(),
            inputs: ids.clone(),
            outputs: ids,
            commands: Vec::new(),
        }
    }

    pub fn measured(&self) -> BTreeSet<QubitId> {
        measured_qubits(&self.commands)
    }

    /// Non-input qubits, prepared in `|+>`.
    pub fn auxiliary(&self) -> Vec<QubitId> {
        self.space
            .iter()
            .copied()
            .filter(|q| !self.inputs.contains(q))
            .collect()
    }

    /// Classical names read by the pattern that it does not produce itself.
    pub fn free_names(&self) -> BTreeSet<String> {
        let produced: BTreeSet<String> = self.measured().into_iter().map(signal_name).collect();
        self.commands
            .iter()
            .flat_map(|c| c.dependencies())
            .filter(|n| !produced.contains(*n))
            .map(str::to_owned)
            .collect()
    }
}

pub(crate) fn measured_qubits(commands: &[Command]) -> BTreeSet<QubitId> {
    commands
        .iter()
        .filter_map(|c| match c {
            Command::Measure { qubit, .. } => Some(*qubit),
            _ => None,
        })
        .collect()
}
