//! Branch operators built by composing full matrices on the pattern space.
//!
//! This route is deliberately separate from the register kernel used by
//! [`exec_pattern`](super::exec_pattern): every command becomes an explicit
//! `2^n`-dimensional matrix and the branch operator is their product.

use nalgebra::DMatrix;

use super::{
    eval_signal, resolved_angle, signal_name, validate_pattern, CalculusError, Command, Env, Pattern, Result, Signals,
};
use crate::qnum::{c, gates, LinOp, QubitId, C64, PRUNE_TOL};

/// A restricted actualization of a pattern: the operator `H_I -> H_O` for a
/// fixed assignment of measurement outcomes.
#[derive(Debug, Clone)]
pub struct Branch {
    pub signals: Signals,
    pub op: LinOp,
}

fn bit(index: usize, pos: usize, n: usize) -> usize {
    (index >> (n - 1 - pos)) & 1
}

/// `gate` on qubits at `positions` of an `n`-qubit list, identity elsewhere.
fn full_gate(gate: &DMatrix<C64>, positions: &[usize], n: usize) -> DMatrix<C64> {
    let dim = 1usize << n;
    let local = |idx: usize| positions.iter().fold(0usize, |acc, &p| (acc << 1) | bit(idx, p, n));
    let rest_mask: usize = positions.iter().fold(dim - 1, |m, &p| m & !(1usize << (n - 1 - p)));
    DMatrix::from_fn(dim, dim, |row, col| {
        if row & rest_mask != col & rest_mask {
            c(0.0, 0.0)
        } else {
            gate[(local(row), local(col))]
        }
    })
}

/// `bra` (1x2) on the qubit at `pos`, mapping `n` qubits to `n - 1`.
fn full_projection(bra: &DMatrix<C64>, pos: usize, n: usize) -> DMatrix<C64> {
    let dim_in = 1usize << n;
    let dim_out = 1usize << (n - 1);
    let mut out = DMatrix::zeros(dim_out, dim_in);
    for col in 0..dim_in {
        let b = bit(col, pos, n);
        let high = col >> (n - pos);
        let low = col & ((1usize << (n - 1 - pos)) - 1);
        let row = (high << (n - 1 - pos)) | low;
        out[(row, col)] = bra[(0, b)];
    }
    out
}

/// Operator for one signal assignment, reproducing the unrenormalized
/// branch of [`exec_pattern`](super::exec_pattern) under `embed_apply`.
pub fn branch_operator(p: &Pattern, signals: &Signals, env: &Env) -> Result<LinOp> {
    let violations = validate_pattern(p);
    if !violations.is_empty() {
        return Err(CalculusError::InvalidPattern(violations));
    }
    for q in p.measured() {
        if !signals.contains_key(&q) {
            return Err(CalculusError::IncompleteSignals(q));
        }
    }
    let mut scope = env.clone();
    for (q, v) in signals {
        scope.insert(signal_name(*q), *v);
    }

    // isometry |x> -> |x> ⊗ |+...+>
    let aux = p.auxiliary();
    let mut current: Vec<QubitId> = p.inputs.clone();
    current.extend(aux.iter().copied());
    let d_in = 1usize << p.inputs.len();
    let d_aux = 1usize << aux.len();
    let amp = c(1.0 / (d_aux as f64).sqrt(), 0.0);
    let plus = DMatrix::from_element(d_aux, 1, amp);
    let mut m = DMatrix::<C64>::identity(d_in, d_in).kronecker(&plus);

    let pos = |list: &[QubitId], q: QubitId| list.iter().position(|&x| x == q).expect("qubit in space");
    for cmd in &p.commands {
        let n = current.len();
        match cmd {
            Command::Nil => {}
            Command::Entangle(a, b) => {
                m = full_gate(&gates::cz(), &[pos(&current, *a), pos(&current, *b)], n) * m;
            }
            Command::CorrectX { qubit, dep } => {
                if eval_signal(dep, &scope)? == 1 {
                    m = full_gate(&gates::pauli_x(), &[pos(&current, *qubit)], n) * m;
                }
            }
            Command::CorrectZ { qubit, dep } => {
                if eval_signal(dep, &scope)? == 1 {
                    m = full_gate(&gates::pauli_z(), &[pos(&current, *qubit)], n) * m;
                }
            }
            Command::Measure {
                qubit,
                angle,
                s_dep,
                t_dep,
            } => {
                let alpha = resolved_angle(*angle, eval_signal(s_dep, &scope)?, eval_signal(t_dep, &scope)?);
                let at = pos(&current, *qubit);
                let bra = gates::equatorial_bra(alpha, signals[qubit]);
                m = full_projection(&bra, at, n) * m;
                current.remove(at);
            }
        }
    }
    let op = LinOp::new(p.inputs.clone(), current, m)?;
    Ok(op.reorder(&p.inputs, &p.outputs)?)
}

/// Every signal assignment whose branch operator is not (numerically) zero.
pub fn all_branch_operators(p: &Pattern, env: &Env) -> Result<Vec<Branch>> {
    let measured: Vec<QubitId> = p.measured().into_iter().collect();
    let k = measured.len();
    let mut out = Vec::with_capacity(1 << k);
    for assignment in 0..(1usize << k) {
        let signals: Signals = measured
            .iter()
            .enumerate()
            .map(|(j, q)| (*q, ((assignment >> (k - 1 - j)) & 1) as u8))
            .collect();
        let op = branch_operator(p, &signals, env)?;
        if op.norm_sqr() >= PRUNE_TOL {
            out.push(Branch { signals, op });
        }
    }
    Ok(out)
}
