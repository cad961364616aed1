//! Seeded sampling of states used by the randomized checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linops::{c, Field, Matrix, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Density matrix `G G^dagger / Tr(G G^dagger)` from a Ginibre matrix `G`.
/// `rank` columns; a real field gives a real symmetric state.
pub fn random_density<R: Rng + ?Sized>(
    dim: usize,
    rank: usize,
    field: Field,
    rng: &mut R,
) -> Matrix {
    let mut g = Vec::with_capacity(dim * rank);
    for _ in 0..dim * rank {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = match field {
            Field::Real => 0.0,
            Field::Complex => rng.sample(StandardNormal),
        };
        g.push(c(re, im));
    }
    let g = Matrix::from_parts(dim, rank, field, g).expect("sizes are consistent");
    let rho = &g * &g.adjoint();
    let tr = rho.trace().re;
    rho.scale(1.0 / tr)
}

/// Haar-ish random unit vector.
pub fn random_pure<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    let v: Vec<C64> = (0..dim)
        .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Random diagonal single-mode state `diag(p, 1 - p)`.
pub fn random_diagonal_qubit<R: Rng + ?Sized>(rng: &mut R) -> Matrix {
    let p: f64 = rng.random();
    Matrix::diag(&[p, 1.0 - p])
}
