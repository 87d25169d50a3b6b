use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::kernel::{apply_rows, check_distinct, kron, permute_rows};
use super::state::{embed_apply, QRegisterState};
use super::{QnumError, QubitId, Result, C64};

/// Linear map `H_in -> H_out` between indexed qubit spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct LinOp {
    in_ids: Vec<QubitId>,
    out_ids: Vec<QubitId>,
    matrix: DMatrix<C64>,
}

impl LinOp {
    pub fn new(in_ids: Vec<QubitId>, out_ids: Vec<QubitId>, matrix: DMatrix<C64>) -> Result<Self> {
        check_distinct(&in_ids)?;
        check_distinct(&out_ids)?;
        if matrix.nrows() != 1 << out_ids.len() || matrix.ncols() != 1 << in_ids.len() {
            return Err(QnumError::ShapeMismatch(format!(
                "matrix {}x{} for {} inputs and {} outputs",
                matrix.nrows(),
                matrix.ncols(),
                in_ids.len(),
                out_ids.len()
            )));
        }
        Ok(Self {
            in_ids,
            out_ids,
            matrix,
        })
    }

    pub fn identity(ids: Vec<QubitId>) -> Self {
        let dim = 1 << ids.len();
        Self {
            in_ids: ids.clone(),
            out_ids: ids,
            matrix: DMatrix::identity(dim, dim),
        }
    }

    /// Isometry `|x> -> |x> ⊗ |v>` that adjoins the pure state `v`.
    pub fn adjoin(inputs: Vec<QubitId>, state: &QRegisterState) -> Result<Self> {
        let amps = state
            .amplitudes()
            .ok_or_else(|| QnumError::InvalidState("can only adjoin a pure state".into()))?;
        let column = DMatrix::from_iterator(amps.len(), 1, amps.iter().copied());
        let mut out_ids = inputs.clone();
        out_ids.extend_from_slice(state.ids());
        let matrix = kron(&DMatrix::identity(1 << inputs.len(), 1 << inputs.len()), &column);
        Self::new(inputs, out_ids, matrix)
    }

    pub fn in_ids(&self) -> &[QubitId] {
        &self.in_ids
    }

    pub fn out_ids(&self) -> &[QubitId] {
        &self.out_ids
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dagger(&self) -> Self {
        Self {
            in_ids: self.out_ids.clone(),
            out_ids: self.in_ids.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    /// `self ⊗ other` on disjoint spaces.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let clash: Vec<QubitId> = self
            .in_ids
            .iter()
            .chain(&self.out_ids)
            .copied()
            .filter(|q| other.in_ids.contains(q) || other.out_ids.contains(q))
            .collect();
        if !clash.is_empty() {
            return Err(QnumError::OverlappingIds(clash));
        }
        let mut in_ids = self.in_ids.clone();
        in_ids.extend_from_slice(&other.in_ids);
        let mut out_ids = self.out_ids.clone();
        out_ids.extend_from_slice(&other.out_ids);
        Ok(Self {
            in_ids,
            out_ids,
            matrix: kron(&self.matrix, &other.matrix),
        })
    }

    /// Apply `next` after `self`. Inputs of `next` that `self` does not
    /// produce pass through as identity, as do outputs of `self` that `next`
    /// does not consume.
    pub fn then(&self, next: &Self) -> Result<Self> {
        let extra: Vec<QubitId> = next
            .in_ids
            .iter()
            .copied()
            .filter(|q| !self.out_ids.contains(q))
            .collect();
        let padded = if extra.is_empty() {
            self.clone()
        } else {
            self.tensor(&Self::identity(extra))?
        };
        let (out_ids, matrix) = apply_rows(
            &padded.out_ids,
            &padded.matrix,
            &next.in_ids,
            &next.out_ids,
            &next.matrix,
        )?;
        Ok(Self {
            in_ids: padded.in_ids,
            out_ids,
            matrix,
        })
    }

    /// Same map with inputs and outputs listed in the given orders.
    pub fn reorder(&self, in_order: &[QubitId], out_order: &[QubitId]) -> Result<Self> {
        let rows = permute_rows(&self.out_ids, &self.matrix, out_order)?;
        let cols = permute_rows(&self.in_ids, &rows.transpose(), in_order)?;
        Ok(Self {
            in_ids: in_order.to_vec(),
            out_ids: out_order.to_vec(),
            matrix: cols.transpose(),
        })
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            in_ids: self.in_ids.clone(),
            out_ids: self.out_ids.clone(),
            matrix: self.matrix.map(|z| z * factor),
        }
    }

    /// Squared Frobenius norm, i.e. `tr(L†L)`.
    pub fn norm_sqr(&self) -> f64 {
        self.matrix.norm_squared()
    }

    pub fn apply(&self, state: &QRegisterState) -> Result<QRegisterState> {
        embed_apply(self, state)
    }
}

/// Operation elements of a (possibly trace-decreasing) quantum operation.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    elements: Vec<LinOp>,
}

impl KrausSet {
    /// Elements may list their ids in different orders; they are aligned to
    /// the first element.
    pub fn new(elements: Vec<LinOp>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| QnumError::ShapeMismatch("empty Kraus set".into()))?;
        let in_ids = first.in_ids.clone();
        let out_ids = first.out_ids.clone();
        let aligned = elements
            .iter()
            .map(|e| {
                if !same_set(&e.in_ids, &in_ids) || !same_set(&e.out_ids, &out_ids) {
                    return Err(QnumError::ShapeMismatch(format!(
                        "Kraus element {:?}->{:?} differs from {:?}->{:?}",
                        e.in_ids, e.out_ids, in_ids, out_ids
                    )));
                }
                e.reorder(&in_ids, &out_ids)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { elements: aligned })
    }

    pub fn elements(&self) -> &[LinOp] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn in_ids(&self) -> &[QubitId] {
        &self.elements[0].in_ids
    }

    pub fn out_ids(&self) -> &[QubitId] {
        &self.elements[0].out_ids
    }

    /// `Σ_j L_j† L_j`.
    pub fn completeness(&self) -> DMatrix<C64> {
        let dim = 1 << self.in_ids().len();
        self.elements
            .iter()
            .fold(DMatrix::zeros(dim, dim), |acc, e| acc + e.matrix.adjoint() * &e.matrix)
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        let dim = 1 << self.in_ids().len();
        (self.completeness() - DMatrix::<C64>::identity(dim, dim)).norm() <= tol
    }

    /// `Σ_j L_j†L_j ≤ I` within tolerance.
    pub fn is_trace_nonincreasing(&self, tol: f64) -> bool {
        let dim = 1 << self.in_ids().len();
        let deficit = DMatrix::<C64>::identity(dim, dim) - self.completeness();
        let eig = SymmetricEigen::new(deficit);
        eig.eigenvalues.iter().all(|&l| l >= -tol)
    }

    /// `Σ_j L_j ρ L_j†` on the embedded qubits, as a mixed state.
    pub fn apply(&self, state: &QRegisterState) -> Result<QRegisterState> {
        let mut acc: Option<QRegisterState> = None;
        for e in &self.elements {
            let term = embed_apply(e, &state.to_mixed())?;
            acc = Some(match acc {
                None => term,
                Some(a) => a.mix_with(&term)?,
            });
        }
        acc.ok_or_else(|| QnumError::ShapeMismatch("empty Kraus set".into()))
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        let mut all = self.elements.clone();
        all.extend(other.elements.iter().cloned());
        Self::new(all)
    }

    pub fn reorder(&self, in_order: &[QubitId], out_order: &[QubitId]) -> Result<Self> {
        Ok(Self {
            elements: self
                .elements
                .iter()
                .map(|e| e.reorder(in_order, out_order))
                .collect::<Result<_>>()?,
        })
    }
}

fn same_set(a: &[QubitId], b: &[QubitId]) -> bool {
    a.len() == b.len() && a.iter().all(|q| b.contains(q))
}

/// Unnormalized Choi matrix `Σ_{m,n} |m><n| ⊗ Σ_j L_j|m><n|L_j†`, with the
/// input factor first.
pub fn choi(k: &KrausSet) -> Result<DMatrix<C64>> {
    let d_in = 1 << k.in_ids().len();
    let d_out = 1 << k.out_ids().len();
    let dim = d_in * d_out;
    let mut out = DMatrix::<C64>::zeros(dim, dim);
    for e in k.elements() {
        let m = &e.matrix;
        if m.nrows() != d_out || m.ncols() != d_in {
            return Err(QnumError::ShapeMismatch("Kraus element shape".into()));
        }
        // column-stacked vec(L): index (input m, output a) -> L[a, m]
        let v = DVector::from_iterator(dim, (0..d_in).flat_map(|col| (0..d_out).map(move |row| m[(row, col)])));
        out += &v * v.adjoint();
    }
    Ok(out)
}

/// Frobenius norm of `a - b`.
pub fn frob_dist(a: &DMatrix<C64>, b: &DMatrix<C64>) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(QnumError::ShapeMismatch(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    Ok((a - b).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qnum::{c, gates, qids, real_matrix};

    fn channel(ops: &[DMatrix<C64>]) -> KrausSet {
        KrausSet::new(
            ops.iter()
                .map(|m| LinOp::new(qids(&[1]), qids(&[1]), m.clone()).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn choi_of_identity_channel() {
        let ch = choi(&channel(&[gates::identity(2)])).unwrap();
        let mut expected = DMatrix::<C64>::zeros(4, 4);
        for (r, col) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            expected[(r, col)] = c(1.0, 0.0);
        }
        assert_eq!(ch, expected);
    }

    #[test]
    fn choi_of_x_flips_output_factor() {
        let ch = choi(&channel(&[gates::pauli_x()])).unwrap();
        // |m><n| ⊗ |m^1><n^1|: nonzero at (m*2 + (1-m), n*2 + (1-n))
        let mut expected = DMatrix::<C64>::zeros(4, 4);
        for (r, col) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            expected[(r, col)] = c(1.0, 0.0);
        }
        assert_eq!(ch, expected);
    }

    #[test]
    fn choi_is_additive() {
        let a = channel(&[gates::pauli_x().map(|z| z * 0.6)]);
        let b = channel(&[gates::pauli_z().map(|z| z * 0.8)]);
        let sum = choi(&a).unwrap() + choi(&b).unwrap();
        assert!(frob_dist(&choi(&a.union(&b).unwrap()).unwrap(), &sum).unwrap() < 1e-14);
    }

    #[test]
    fn frob_dist_identity_vs_x() {
        let d = frob_dist(&gates::identity(2), &gates::pauli_x()).unwrap();
        assert!((d - 2.0).abs() < 1e-15);
        assert_eq!(frob_dist(&gates::pauli_x(), &gates::pauli_x()).unwrap(), 0.0);
        assert!(frob_dist(&gates::identity(2), &gates::identity(4)).is_err());
    }

    #[test]
    fn then_pads_with_identity() {
        let x1 = LinOp::new(qids(&[1]), qids(&[1]), gates::pauli_x()).unwrap();
        let z2 = LinOp::new(qids(&[2]), qids(&[2]), gates::pauli_z()).unwrap();
        let both = x1.then(&z2).unwrap();
        assert_eq!(both.in_ids(), qids(&[1, 2]).as_slice());
        let expected = gates::pauli_x().kronecker(&gates::pauli_z());
        assert!((both.matrix() - expected).norm() < 1e-15);
    }

    #[test]
    fn reorder_swaps_factors() {
        let xz = LinOp::new(
            qids(&[1, 2]),
            qids(&[1, 2]),
            gates::pauli_x().kronecker(&gates::pauli_z()),
        )
        .unwrap();
        let zx = xz.reorder(&qids(&[2, 1]), &qids(&[2, 1])).unwrap();
        let expected = gates::pauli_z().kronecker(&gates::pauli_x());
        assert!((zx.matrix() - expected).norm() < 1e-15);
    }

    #[test]
    fn adjoin_plus_matches_kron() {
        let plus = QRegisterState::plus(qids(&[4])).unwrap();
        let iso = LinOp::adjoin(qids(&[1]), &plus).unwrap();
        assert_eq!(iso.out_ids(), qids(&[1, 4]).as_slice());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expected = real_matrix(4, 2, &[h, 0.0, h, 0.0, 0.0, h, 0.0, h]);
        assert!((iso.matrix() - expected).norm() < 1e-15);
    }

    #[test]
    fn completeness_of_measurement() {
        let p0 = LinOp::new(qids(&[1]), qids(&[1]), real_matrix(2, 2, &[1.0, 0.0, 0.0, 0.0])).unwrap();
        let p1 = LinOp::new(qids(&[1]), qids(&[1]), real_matrix(2, 2, &[0.0, 0.0, 0.0, 1.0])).unwrap();
        let full = KrausSet::new(vec![p0.clone(), p1]).unwrap();
        assert!(full.is_trace_preserving(1e-12));
        let part = KrausSet::new(vec![p0]).unwrap();
        assert!(!part.is_trace_preserving(1e-12));
        assert!(part.is_trace_nonincreasing(1e-12));
    }

    #[test]
    fn kraus_rejects_mismatched_shapes() {
        let a = LinOp::identity(qids(&[1]));
        let b = LinOp::identity(qids(&[2]));
        assert!(KrausSet::new(vec![a, b]).is_err());
        assert!(KrausSet::new(vec![]).is_err());
    }
}
