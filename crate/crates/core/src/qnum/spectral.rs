use nalgebra::{DVector, SymmetricEigen};

use super::state::{QRegisterState, StateForm};
use super::{QnumError, Result, C64, EQ_TOL, PRUNE_TOL};

/// Eigen-decomposition of a density matrix into weighted normalized pure
/// states. Components with weight below the pruning tolerance are dropped.
pub fn spectral(state: &QRegisterState) -> Result<Vec<(f64, QRegisterState)>> {
    if state.form() == StateForm::Pure {
        let w = state.weight();
        return Ok(match state.normalized() {
            Some(s) if w > PRUNE_TOL => vec![(w, s)],
            _ => Vec::new(),
        });
    }
    let rho = state.density();
    let herm = (&rho - rho.adjoint()).norm();
    if herm > EQ_TOL {
        return Err(QnumError::NotHermitian(herm));
    }
    let eig = SymmetricEigen::new(rho);
    let mut components: Vec<(f64, QRegisterState)> = Vec::new();
    for (k, &w) in eig.eigenvalues.iter().enumerate() {
        if w.abs() <= PRUNE_TOL {
            continue;
        }
        let col = eig.eigenvectors.column(k);
        let v: DVector<C64> = DVector::from_iterator(col.len(), col.iter().copied());
        let v = &v / C64::new(v.norm(), 0.0);
        components.push((w, QRegisterState::pure(state.ids().to_vec(), v)?));
    }
    components.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(components)
}
