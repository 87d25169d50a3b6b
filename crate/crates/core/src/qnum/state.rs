use nalgebra::{DMatrix, DVector};

use super::kernel::{apply_rows, check_distinct, kron, permute_rows, position_of, scatter_table};
use super::op::LinOp;
use super::{c, QnumError, QubitId, Result, C64, EQ_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateForm {
    Pure,
    Mixed,
}

/// Joint state of an ordered list of qubits, either as an amplitude vector
/// or a density matrix. Pure states may be sub-normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct QRegisterState {
    ids: Vec<QubitId>,
    form: StateForm,
    /// `2^n x 1` for pure states, `2^n x 2^n` for mixed ones.
    data: DMatrix<C64>,
}

impl QRegisterState {
    /// The zero-qubit state with amplitude 1.
    pub fn scalar() -> Self {
        Self {
            ids: Vec::new(),
            form: StateForm::Pure,
            data: DMatrix::from_element(1, 1, c(1.0, 0.0)),
        }
    }

    pub fn pure(ids: Vec<QubitId>, amplitudes: DVector<C64>) -> Result<Self> {
        check_distinct(&ids)?;
        if amplitudes.len() != 1 << ids.len() {
            return Err(QnumError::ShapeMismatch(format!(
                "{} amplitudes for {} qubits",
                amplitudes.len(),
                ids.len()
            )));
        }
        let norm = amplitudes.norm_squared();
        if norm > 1.0 + EQ_TOL {
            return Err(QnumError::InvalidState(format!("squared norm {norm} exceeds 1")));
        }
        let n = amplitudes.len();
        Ok(Self {
            ids,
            form: StateForm::Pure,
            data: DMatrix::from_iterator(n, 1, amplitudes.iter().copied()),
        })
    }

    pub fn mixed(ids: Vec<QubitId>, density: DMatrix<C64>) -> Result<Self> {
        check_distinct(&ids)?;
        let dim = 1 << ids.len();
        if density.nrows() != dim || density.ncols() != dim {
            return Err(QnumError::ShapeMismatch(format!(
                "density {}x{} for {} qubits",
                density.nrows(),
                density.ncols(),
                ids.len()
            )));
        }
        let herm = (&density - density.adjoint()).norm();
        if herm > EQ_TOL {
            return Err(QnumError::NotHermitian(herm));
        }
        let tr = density.trace().re;
        if tr > 1.0 + EQ_TOL {
            return Err(QnumError::InvalidState(format!("trace {tr} exceeds 1")));
        }
        Ok(Self {
            ids,
            form: StateForm::Mixed,
            data: density,
        })
    }

    /// Computational basis state; bit `j` of `index` (MSB first) belongs to `ids[j]`.
    pub fn basis(ids: Vec<QubitId>, index: usize) -> Result<Self> {
        let dim = 1 << ids.len();
        if index >= dim {
            return Err(QnumError::ShapeMismatch(format!("basis index {index} out of range")));
        }
        let mut amps = DVector::zeros(dim);
        amps[index] = c(1.0, 0.0);
        Self::pure(ids, amps)
    }

    /// `|+>` on every listed qubit.
    pub fn plus(ids: Vec<QubitId>) -> Result<Self> {
        let dim = 1usize << ids.len();
        let amp = c(1.0 / (dim as f64).sqrt(), 0.0);
        Self::pure(ids, DVector::from_element(dim, amp))
    }

    pub(crate) fn from_parts(ids: Vec<QubitId>, form: StateForm, data: DMatrix<C64>) -> Self {
        Self { ids, form, data }
    }

    pub fn ids(&self) -> &[QubitId] {
        &self.ids
    }

    pub fn num_qubits(&self) -> usize {
        self.ids.len()
    }

    pub fn form(&self) -> StateForm {
        self.form
    }

    pub fn is_pure(&self) -> bool {
        self.form == StateForm::Pure
    }

    /// Amplitudes of a pure state.
    pub fn amplitudes(&self) -> Option<DVector<C64>> {
        match self.form {
            StateForm::Pure => Some(DVector::from_iterator(self.data.nrows(), self.data.iter().copied())),
            StateForm::Mixed => None,
        }
    }

    pub fn density(&self) -> DMatrix<C64> {
        match self.form {
            StateForm::Pure => &self.data * self.data.adjoint(),
            StateForm::Mixed => self.data.clone(),
        }
    }

    pub fn to_mixed(&self) -> Self {
        Self {
            ids: self.ids.clone(),
            form: StateForm::Mixed,
            data: self.density(),
        }
    }

    /// Squared norm for pure states, trace for mixed ones.
    pub fn weight(&self) -> f64 {
        match self.form {
            StateForm::Pure => self.data.norm_squared(),
            StateForm::Mixed => self.data.trace().re,
        }
    }

    /// Rescale so that `weight() == 1`. Returns `None` for a zero state.
    pub fn normalized(&self) -> Option<Self> {
        let w = self.weight();
        if w <= 0.0 {
            return None;
        }
        let factor = match self.form {
            StateForm::Pure => 1.0 / w.sqrt(),
            StateForm::Mixed => 1.0 / w,
        };
        Some(Self {
            ids: self.ids.clone(),
            form: self.form,
            data: self.data.map(|z| z * factor),
        })
    }

    /// Multiply the weight by `factor` (amplitudes by its square root).
    pub fn scale_weight(&self, factor: f64) -> Self {
        let k = match self.form {
            StateForm::Pure => factor.sqrt(),
            StateForm::Mixed => factor,
        };
        Self {
            ids: self.ids.clone(),
            form: self.form,
            data: self.data.map(|z| z * k),
        }
    }

    /// Same state with qubits listed in `order`.
    pub fn reorder(&self, order: &[QubitId]) -> Result<Self> {
        let rows = permute_rows(&self.ids, &self.data, order)?;
        let data = match self.form {
            StateForm::Pure => rows,
            StateForm::Mixed => {
                let cols = permute_rows(&self.ids, &rows.adjoint(), order)?;
                cols.adjoint()
            }
        };
        Ok(Self {
            ids: order.to_vec(),
            form: self.form,
            data,
        })
    }

    /// Density matrix in the requested qubit order.
    pub fn density_in(&self, order: &[QubitId]) -> Result<DMatrix<C64>> {
        Ok(self.reorder(order)?.density())
    }

    /// Frobenius distance between density matrices, aligning qubit order.
    pub fn density_distance(&self, other: &Self) -> Result<f64> {
        let mut a: Vec<QubitId> = self.ids.clone();
        let mut b: Vec<QubitId> = other.ids.clone();
        a.sort();
        b.sort();
        if a != b {
            return Err(QnumError::ShapeMismatch(format!(
                "states on different qubits: {a:?} vs {b:?}"
            )));
        }
        Ok((self.density_in(&a)? - other.density_in(&a)?).norm())
    }

    /// Fidelity `<ψ|ρ|ψ>` against a pure reference on the same qubits.
    pub fn fidelity_with_pure(&self, reference: &Self) -> Result<f64> {
        let psi = reference
            .reorder(&self.ids)?
            .amplitudes()
            .ok_or_else(|| QnumError::InvalidState("reference must be pure".into()))?;
        let rho = self.density();
        Ok((psi.adjoint() * rho * psi)[(0, 0)].re)
    }

    /// Add `other` (same qubits) into this state as a mixture.
    pub fn mix_with(&self, other: &Self) -> Result<Self> {
        let other_rho = other.density_in(&self.ids)?;
        Ok(Self {
            ids: self.ids.clone(),
            form: StateForm::Mixed,
            data: self.density() + other_rho,
        })
    }

    /// Hermitian / trace / positivity check within tolerance.
    pub fn check_physical(&self) -> Result<()> {
        match self.form {
            StateForm::Pure => {
                let w = self.weight();
                if w > 1.0 + EQ_TOL {
                    return Err(QnumError::InvalidState(format!("squared norm {w} exceeds 1")));
                }
            }
            StateForm::Mixed => {
                let components = super::spectral(self)?;
                if components.iter().any(|(w, _)| *w < -EQ_TOL) {
                    return Err(QnumError::InvalidState("negative eigenvalue".into()));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn data(&self) -> &DMatrix<C64> {
        &self.data
    }
}

/// Joint state on the concatenated id list.
pub fn tensor(a: &QRegisterState, b: &QRegisterState) -> Result<QRegisterState> {
    let overlap: Vec<QubitId> = a.ids.iter().copied().filter(|q| b.ids.contains(q)).collect();
    if !overlap.is_empty() {
        return Err(QnumError::OverlappingIds(overlap));
    }
    let mut ids = a.ids.clone();
    ids.extend_from_slice(&b.ids);
    let (form, data) = match (a.form, b.form) {
        (StateForm::Pure, StateForm::Pure) => (StateForm::Pure, kron(&a.data, &b.data)),
        _ => (StateForm::Mixed, kron(&a.density(), &b.density())),
    };
    Ok(QRegisterState { ids, form, data })
}

/// Apply `op` to its input qubits of `state`, identity elsewhere. The op's
/// output ids take the place of its input ids; the result is not renormalized.
pub fn embed_apply(op: &LinOp, state: &QRegisterState) -> Result<QRegisterState> {
    let (ids, rows) = apply_rows(&state.ids, &state.data, op.in_ids(), op.out_ids(), op.matrix())?;
    let data = match state.form {
        StateForm::Pure => rows,
        StateForm::Mixed => {
            // (M (M ρ)†)† = M ρ M†
            let (_, twice) = apply_rows(&state.ids, &rows.adjoint(), op.in_ids(), op.out_ids(), op.matrix())?;
            twice.adjoint()
        }
    };
    Ok(QRegisterState {
        ids,
        form: state.form,
        data,
    })
}

/// Reduced density matrix on `keep`, in the order the ids appear in `state`.
pub fn partial_trace(state: &QRegisterState, keep: &[QubitId]) -> Result<QRegisterState> {
    for &q in keep {
        position_of(&state.ids, q)?;
    }
    let kept: Vec<QubitId> = state.ids.iter().copied().filter(|q| keep.contains(q)).collect();
    check_distinct(keep)?;
    let n = state.ids.len();
    let keep_pos: Vec<usize> = kept.iter().map(|q| position_of(&state.ids, *q).unwrap()).collect();
    let rest_pos: Vec<usize> = (0..n).filter(|p| !keep_pos.contains(p)).collect();
    let keep_tab = scatter_table(&keep_pos, n);
    let rest_tab = scatter_table(&rest_pos, n);
    let dim = keep_tab.len();
    let mut out = DMatrix::<C64>::zeros(dim, dim);
    match state.form {
        StateForm::Pure => {
            for (a, &ra) in keep_tab.iter().enumerate() {
                for (b, &rb) in keep_tab.iter().enumerate() {
                    let mut acc = c(0.0, 0.0);
                    for &r in &rest_tab {
                        acc += state.data[(ra | r, 0)] * state.data[(rb | r, 0)].conj();
                    }
                    out[(a, b)] = acc;
                }
            }
        }
        StateForm::Mixed => {
            for (a, &ra) in keep_tab.iter().enumerate() {
                for (b, &rb) in keep_tab.iter().enumerate() {
                    let mut acc = c(0.0, 0.0);
                    for &r in &rest_tab {
                        acc += state.data[(ra | r, rb | r)];
                    }
                    out[(a, b)] = acc;
                }
            }
        }
    }
    Ok(QRegisterState {
        ids: kept,
        form: StateForm::Mixed,
        data: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qnum::{gates, qids, real_matrix};

    fn approx_eq(a: &DMatrix<C64>, b: &DMatrix<C64>) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn tensor_of_plus_states_is_uniform() {
        let a = QRegisterState::plus(qids(&[2])).unwrap();
        let b = QRegisterState::plus(qids(&[3])).unwrap();
        let ab = tensor(&a, &b).unwrap();
        assert_eq!(ab.ids(), qids(&[2, 3]).as_slice());
        for amp in ab.amplitudes().unwrap().iter() {
            assert!((amp - c(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn tensor_rejects_overlap() {
        let a = QRegisterState::plus(qids(&[1, 2])).unwrap();
        let b = QRegisterState::plus(qids(&[2])).unwrap();
        assert_eq!(tensor(&a, &b), Err(QnumError::OverlappingIds(qids(&[2]))));
    }

    #[test]
    fn tensor_with_mixed_is_mixed() {
        let a = QRegisterState::plus(qids(&[1])).unwrap().to_mixed();
        let b = QRegisterState::basis(qids(&[2]), 1).unwrap();
        assert_eq!(tensor(&a, &b).unwrap().form(), StateForm::Mixed);
    }

    #[test]
    fn tensor_is_associative() {
        let x = QRegisterState::pure(qids(&[1]), DVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)])).unwrap();
        let y = QRegisterState::plus(qids(&[2])).unwrap();
        let z = QRegisterState::basis(qids(&[3]), 1).unwrap();
        let left = tensor(&tensor(&x, &y).unwrap(), &z).unwrap();
        let right = tensor(&x, &tensor(&y, &z).unwrap()).unwrap();
        assert!(left.density_distance(&right).unwrap() < 1e-14);
    }

    #[test]
    fn identity_op_leaves_state_unchanged() {
        let s = QRegisterState::pure(
            qids(&[1, 2]),
            DVector::from_vec(vec![c(0.5, 0.0), c(0.0, 0.5), c(0.5, 0.0), c(-0.5, 0.0)]),
        )
        .unwrap();
        let out = embed_apply(&LinOp::identity(qids(&[2])), &s).unwrap();
        assert_eq!(out.ids(), s.ids());
        assert!(approx_eq(out.data(), s.data()));
    }

    #[test]
    fn plus_projector_on_zero_has_half_weight() {
        let zero = QRegisterState::basis(qids(&[1]), 0).unwrap();
        let bra = LinOp::new(qids(&[1]), vec![], gates::equatorial_bra(0.0, 0)).unwrap();
        let branch = embed_apply(&bra, &zero).unwrap();
        assert!(branch.ids().is_empty());
        assert!((branch.weight() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn hadamard_on_first_of_five_matches_kron_conjugation() {
        let ids = qids(&[1, 2, 3, 4, 5]);
        let mut amps = DVector::zeros(32);
        for (i, a) in amps.iter_mut().enumerate() {
            *a = c((i as f64 + 1.0).sin(), (i as f64 * 0.3).cos());
        }
        let amps = &amps / c(amps.norm(), 0.0);
        let sigma = QRegisterState::pure(ids.clone(), amps).unwrap().to_mixed();
        let h = LinOp::new(qids(&[1]), qids(&[1]), gates::hadamard()).unwrap();
        let out = embed_apply(&h, &sigma).unwrap();
        let full = gates::hadamard().kronecker(&gates::identity(16));
        let expected = &full * sigma.density() * full.adjoint();
        assert!(approx_eq(&out.density(), &expected));
    }

    #[test]
    fn embed_unknown_qubit_errors() {
        let s = QRegisterState::plus(qids(&[1])).unwrap();
        let x = LinOp::new(qids(&[4]), qids(&[4]), gates::pauli_x()).unwrap();
        assert_eq!(embed_apply(&x, &s), Err(QnumError::UnknownQubit(QubitId(4))));
    }

    #[test]
    fn partial_trace_of_graph_pair_is_maximally_mixed() {
        // E(|++>) = (|00> + |01> + |10> - |11>)/2; hand-computed reduced state is I/2
        let g = QRegisterState::pure(
            qids(&[2, 3]),
            DVector::from_vec(vec![c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(-0.5, 0.0)]),
        )
        .unwrap();
        let r = partial_trace(&g, &qids(&[3])).unwrap();
        assert!(approx_eq(&r.density(), &real_matrix(2, 2, &[0.5, 0.0, 0.0, 0.5])));
    }

    #[test]
    fn partial_trace_keep_all_is_same_state() {
        let s = QRegisterState::plus(qids(&[1, 2])).unwrap();
        let r = partial_trace(&s, &qids(&[1, 2])).unwrap();
        assert_eq!(r.form(), StateForm::Mixed);
        assert!(approx_eq(&r.density(), &s.density()));
    }

    #[test]
    fn partial_trace_of_product_is_factor() {
        let x = QRegisterState::pure(qids(&[1]), DVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)])).unwrap();
        let y = QRegisterState::plus(qids(&[2])).unwrap();
        let xy = tensor(&x, &y).unwrap();
        let r = partial_trace(&xy, &qids(&[1])).unwrap();
        assert!(approx_eq(&r.density(), &x.density()));
        let r = partial_trace(&xy.to_mixed(), &qids(&[2])).unwrap();
        assert!(approx_eq(&r.density(), &y.density()));
    }

    #[test]
    fn reorder_round_trip() {
        let x = QRegisterState::pure(qids(&[1]), DVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)])).unwrap();
        let y = QRegisterState::basis(qids(&[2]), 1).unwrap();
        let xy = tensor(&x, &y).unwrap().to_mixed();
        let yx = tensor(&y, &x).unwrap();
        let moved = xy.reorder(&qids(&[2, 1])).unwrap();
        assert!(approx_eq(&moved.density(), &yx.density()));
    }
}
