use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{QRegisterState, QubitId, Result, C64};

fn gaussian<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state on `ids`.
pub fn random_pure<R: Rng>(ids: Vec<QubitId>, rng: &mut R) -> Result<QRegisterState> {
    let dim = 1usize << ids.len();
    let v = DVector::from_fn(dim, |_, _| gaussian(rng));
    let v = &v / C64::new(v.norm(), 0.0);
    QRegisterState::pure(ids, v)
}

/// Random density matrix of the given rank (Ginibre construction).
pub fn random_density<R: Rng>(ids: Vec<QubitId>, rank: usize, rng: &mut R) -> Result<QRegisterState> {
    let dim = 1usize << ids.len();
    let g = DMatrix::from_fn(dim, rank.max(1), |_, _| gaussian(rng));
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    QRegisterState::mixed(ids, rho / tr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qnum::qids;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_states_are_physical() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_pure(qids(&[1, 2]), &mut rng).unwrap();
        assert!((p.weight() - 1.0).abs() < 1e-12);
        let m = random_density(qids(&[1, 2, 3]), 2, &mut rng).unwrap();
        assert!((m.weight() - 1.0).abs() < 1e-12);
        m.check_physical().unwrap();
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let a = random_pure(qids(&[4]), &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = random_pure(qids(&[4]), &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }
}
