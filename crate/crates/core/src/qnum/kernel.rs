//! Index arithmetic shared by states and operators.
//!
//! Matrices handled here have `2^n` rows indexed by the register and an
//! arbitrary number of columns. A pure state is the one-column case; an
//! operator `H_in -> H_register` is the `2^|in|`-column case.

use std::collections::HashSet;

use nalgebra::DMatrix;

use super::{QnumError, QubitId, Result, C64};

/// For every value of the `k` local bits, the register index it contributes
/// when those bits sit at `positions` in an `n`-qubit register.
pub(crate) fn scatter_table(positions: &[usize], n: usize) -> Vec<usize> {
    let k = positions.len();
    let mut table = vec![0usize; 1 << k];
    for (value, slot) in table.iter_mut().enumerate() {
        let mut idx = 0usize;
        for (j, &pos) in positions.iter().enumerate() {
            if (value >> (k - 1 - j)) & 1 == 1 {
                idx |= 1 << (n - 1 - pos);
            }
        }
        *slot = idx;
    }
    table
}

pub(crate) fn check_distinct(ids: &[QubitId]) -> Result<()> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(*id) {
            return Err(QnumError::DuplicateId(*id));
        }
    }
    Ok(())
}

pub(crate) fn position_of(ids: &[QubitId], q: QubitId) -> Result<usize> {
    ids.iter().position(|&x| x == q).ok_or(QnumError::UnknownQubit(q))
}

/// Reorder the rows of `mat` from `ids` order to `target` order.
pub(crate) fn permute_rows(ids: &[QubitId], mat: &DMatrix<C64>, target: &[QubitId]) -> Result<DMatrix<C64>> {
    if ids.len() != target.len() {
        return Err(QnumError::ShapeMismatch(format!(
            "cannot reorder {} qubits into {}",
            ids.len(),
            target.len()
        )));
    }
    if ids == target {
        return Ok(mat.clone());
    }
    let n = ids.len();
    let old_pos = target
        .iter()
        .map(|&q| position_of(ids, q))
        .collect::<Result<Vec<_>>>()?;
    let table = scatter_table(&old_pos, n);
    let mut out = DMatrix::zeros(mat.nrows(), mat.ncols());
    for col in 0..mat.ncols() {
        for (new_row, &old_row) in table.iter().enumerate() {
            out[(new_row, col)] = mat[(old_row, col)];
        }
    }
    Ok(out)
}

/// Id list after replacing `inputs` by `outputs`: the outputs take the slot
/// of the earliest input, or go to the end when there are no inputs.
pub(crate) fn replaced_ids(ids: &[QubitId], inputs: &[QubitId], outputs: &[QubitId]) -> Vec<QubitId> {
    let first = ids.iter().position(|q| inputs.contains(q));
    let mut result = Vec::with_capacity(ids.len() + outputs.len());
    match first {
        None => {
            result.extend(ids.iter().copied().filter(|q| !inputs.contains(q)));
            result.extend_from_slice(outputs);
        }
        Some(first) => {
            result.extend(ids[..first].iter().copied());
            result.extend_from_slice(outputs);
            result.extend(ids[first..].iter().copied().filter(|q| !inputs.contains(q)));
        }
    }
    result
}

/// Apply `op: H_inputs -> H_outputs` to the rows of `mat`, tensored with the
/// identity on every other register qubit.
pub(crate) fn apply_rows(
    ids: &[QubitId],
    mat: &DMatrix<C64>,
    inputs: &[QubitId],
    outputs: &[QubitId],
    op: &DMatrix<C64>,
) -> Result<(Vec<QubitId>, DMatrix<C64>)> {
    let n = ids.len();
    if mat.nrows() != 1 << n {
        return Err(QnumError::ShapeMismatch(format!(
            "register of {} qubits has {} rows",
            n,
            mat.nrows()
        )));
    }
    if op.nrows() != 1 << outputs.len() || op.ncols() != 1 << inputs.len() {
        return Err(QnumError::ShapeMismatch(format!(
            "operator {}x{} does not map {} to {} qubits",
            op.nrows(),
            op.ncols(),
            inputs.len(),
            outputs.len()
        )));
    }
    let in_pos = inputs
        .iter()
        .map(|&q| position_of(ids, q))
        .collect::<Result<Vec<_>>>()?;
    let rest: Vec<QubitId> = ids.iter().copied().filter(|q| !inputs.contains(q)).collect();
    let clash: Vec<QubitId> = outputs.iter().copied().filter(|q| rest.contains(q)).collect();
    if !clash.is_empty() {
        return Err(QnumError::OverlappingIds(clash));
    }
    let rest_pos_old: Vec<usize> = (0..n).filter(|p| !in_pos.contains(p)).collect();

    let new_ids = replaced_ids(ids, inputs, outputs);
    let n_new = new_ids.len();
    let out_pos = outputs
        .iter()
        .map(|&q| position_of(&new_ids, q))
        .collect::<Result<Vec<_>>>()?;
    let rest_pos_new = rest
        .iter()
        .map(|&q| position_of(&new_ids, q))
        .collect::<Result<Vec<_>>>()?;

    let in_tab = scatter_table(&in_pos, n);
    let rest_old_tab = scatter_table(&rest_pos_old, n);
    let out_tab = scatter_table(&out_pos, n_new);
    let rest_new_tab = scatter_table(&rest_pos_new, n_new);

    let cols = mat.ncols();
    let mut result = DMatrix::<C64>::zeros(1 << n_new, cols);
    let zero = C64::new(0.0, 0.0);
    for col in 0..cols {
        for (r_old, r_new) in rest_old_tab.iter().zip(&rest_new_tab) {
            for (a_out, &row_out) in out_tab.iter().enumerate() {
                let mut acc = zero;
                for (a_in, &row_in) in in_tab.iter().enumerate() {
                    let coeff = op[(a_out, a_in)];
                    if coeff != zero {
                        acc += coeff * mat[(row_in | r_old, col)];
                    }
                }
                result[(row_out | r_new, col)] = acc;
            }
        }
    }
    Ok((new_ids, result))
}

/// Kronecker product `a ⊗ b`.
pub(crate) fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qnum::{c, qids};

    #[test]
    fn scatter_table_places_msb_first() {
        // two local bits at positions 2 and 0 of a 3-qubit register
        assert_eq!(scatter_table(&[2, 0], 3), vec![0b000, 0b100, 0b001, 0b101]);
    }

    #[test]
    fn replaced_ids_keeps_slot() {
        let ids = qids(&[1, 2, 3]);
        assert_eq!(replaced_ids(&ids, &qids(&[2]), &qids(&[7])), qids(&[1, 7, 3]));
        assert_eq!(replaced_ids(&ids, &qids(&[]), &qids(&[9])), qids(&[1, 2, 3, 9]));
        assert_eq!(replaced_ids(&ids, &qids(&[1, 3]), &qids(&[])), qids(&[2]));
    }

    #[test]
    fn permute_swaps_two_qubits() {
        // |01> on (1,2) becomes |10> on (2,1)
        let mut v = DMatrix::zeros(4, 1);
        v[(1, 0)] = c(1.0, 0.0);
        let p = permute_rows(&qids(&[1, 2]), &v, &qids(&[2, 1])).unwrap();
        assert_eq!(p[(2, 0)], c(1.0, 0.0));
    }
}
