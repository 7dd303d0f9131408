//! Seeded random matrices for sampling experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c, real, CMatrix};
use crate::linopt::{HermitianGenerator, ModeUnitary};

/// The generator behind every seeded experiment in the crate.
pub type ExperimentRng = ChaCha8Rng;

pub const RNG_NAME: &str = "ChaCha8";

pub fn seeded_rng(seed: u64) -> ExperimentRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-distributed `n x n` unitary (QR of a complex Ginibre matrix with the
/// phases of `R`'s diagonal absorbed into `Q`).
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ModeUnitary {
    let qr = ginibre(n, rng).qr();
    let (mut q, r) = qr.unpack();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { real(1.0) };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    ModeUnitary::new_unchecked(q)
}

/// Random Hermitian generator `(A + A^dagger) / 2` with Gaussian `A`.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> HermitianGenerator {
    let a = ginibre(n, rng);
    let h = (&a + a.adjoint()) * real(0.5);
    HermitianGenerator::new(h).expect("symmetrized matrix is Hermitian")
}
