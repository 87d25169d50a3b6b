use std::collections::BTreeSet;

use super::{Command, Pattern};
use crate::qnum::QubitId;

/// One broken well-formedness condition. `command` indexes application order.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternViolation {
    pub command: Option<usize>,
    pub qubit: Option<QubitId>,
    pub message: String,
}

impl PatternViolation {
    fn new(command: Option<usize>, qubit: QubitId, message: String) -> Self {
        Self {
            command,
            qubit: Some(qubit),
            message,
        }
    }
}

/// All violations of the pattern invariants; empty means well formed.
pub fn validate_pattern(p: &Pattern) -> Vec<PatternViolation> {
    let mut out = Vec::new();
    let space: BTreeSet<QubitId> = p.space.iter().copied().collect();

    for &q in &p.inputs {
        if !space.contains(&q) {
            out.push(PatternViolation::new(None, q, format!("input outside space: {q}")));
        }
    }
    for &q in &p.outputs {
        if !space.contains(&q) {
            out.push(PatternViolation::new(None, q, format!("output outside space: {q}")));
        }
    }

    let mut measured: BTreeSet<QubitId> = BTreeSet::new();
    for (i, cmd) in p.commands.iter().enumerate() {
        for q in cmd.qubits() {
            if !space.contains(&q) {
                out.push(PatternViolation::new(Some(i), q, format!("qubit outside space: {q}")));
            }
        }
        match cmd {
            Command::Entangle(a, b) if a == b => {
                out.push(PatternViolation::new(
                    Some(i),
                    *a,
                    format!("entangles qubit with itself: {a}"),
                ));
            }
            Command::Measure { qubit, .. } => {
                if measured.contains(qubit) {
                    out.push(PatternViolation::new(
                        Some(i),
                        *qubit,
                        format!("measured twice: {qubit}"),
                    ));
                    continue;
                }
                if p.outputs.contains(qubit) {
                    out.push(PatternViolation::new(
                        Some(i),
                        *qubit,
                        format!("output measured: {qubit}"),
                    ));
                }
                measured.insert(*qubit);
                continue;
            }
            _ => {}
        }
        for q in cmd.qubits() {
            if measured.contains(&q) {
                out.push(PatternViolation::new(
                    Some(i),
                    q,
                    format!("acts after measurement: {q}"),
                ));
            }
        }
    }

    for &q in &p.space {
        if !p.outputs.contains(&q) && !measured.contains(&q) {
            out.push(PatternViolation::new(None, q, format!("not measured: {q}")));
        }
    }
    out
}
