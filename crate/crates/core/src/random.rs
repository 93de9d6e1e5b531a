//! Seeded random states, operators and unitaries for tests and the CLI.
//!
//! Everything draws from a caller-supplied [`rand::Rng`], so a fixed
//! `ChaCha8Rng` seed gives bit-identical output on every platform.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::lattice::TorusDim;
use crate::phase_repr::{DensityMatrix, PureState};
use crate::weylops::{CMatrix, OperatorMatrix};

pub use rand_chacha::ChaCha8Rng as SeededRng;

/// Seeded generator used everywhere a seed is accepted.
pub fn rng_from_seed(seed: u64) -> SeededRng {
    use rand::SeedableRng;
    SeededRng::seed_from_u64(seed)
}

/// One standard complex Gaussian sample, `E|z|^2 = 2`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| complex_gaussian(rng)).collect()
}

pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    // Fill column by column so the draw order matches column-major storage.
    let mut m = DMatrix::from_element(rows, cols, Complex64::new(0.0, 0.0));
    for c in 0..cols {
        for r in 0..rows {
            m[(r, c)] = complex_gaussian(rng);
        }
    }
    m
}

/// Haar-random pure state.
pub fn random_pure_state<R: Rng + ?Sized>(dim: &TorusDim, rng: &mut R) -> PureState {
    PureState::normalized(dim, gaussian_vector(rng, dim.d()))
        .expect("a Gaussian vector is nonzero with probability one")
}

/// Mixed state `G G^dag / tr(G G^dag)` with `G` a `d x rank` Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(dim: &TorusDim, rank: usize, rng: &mut R) -> DensityMatrix {
    let g = ginibre(rng, dim.d(), rank.max(1));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    let m = m.map(|z| z / tr);
    // Symmetrize to kill rounding asymmetry before validation.
    let m = (&m + m.adjoint()).map(|z| z * 0.5);
    DensityMatrix::new(dim, m).expect("Ginibre construction gives a valid density matrix")
}

/// Unstructured operator with i.i.d. complex Gaussian entries.
pub fn random_operator<R: Rng + ?Sized>(dim: &TorusDim, rng: &mut R) -> OperatorMatrix {
    OperatorMatrix::new(dim, ginibre(rng, dim.d(), dim.d())).expect("square by construction")
}

/// Haar unitary from the QR decomposition of a Ginibre matrix, with the
/// phases of `diag(R)` moved into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(dim: &TorusDim, rng: &mut R) -> OperatorMatrix {
    let d = dim.d();
    let g = ginibre(rng, d, d);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..d {
        let rc = r[(c, c)];
        let phase = if rc.norm() > 0.0 {
            rc / rc.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for row in 0..d {
            q[(row, c)] *= phase;
        }
    }
    OperatorMatrix::new(dim, q).expect("square by construction")
}

/// Random Kraus set `{K_j}` with `sum_j K_j^dag K_j = 1`, obtained from the
/// first `d` columns of a Haar isometry on `C^d (x) C^n`.
pub fn random_kraus<R: Rng + ?Sized>(dim: &TorusDim, n: usize, rng: &mut R) -> Vec<OperatorMatrix> {
    let d = dim.d();
    let n = n.max(1);
    let g = ginibre(rng, d * n, d);
    let q = g.qr().q();
    (0..n)
        .map(|j| {
            let k = CMatrix::from_fn(d, d, |r, c| q[(j * d + r, c)]);
            OperatorMatrix::new(dim, k).expect("square by construction")
        })
        .collect()
}
