//! Center (Weyl/Wigner) and chord representations.
//!
//! For an operator `A` on the torus,
//!
//! ```text
//! A(x)  = tr(A R_x)            center representation
//! Ã(xi) = tr(A T_xi^dag)       chord representation
//! A = (1/4d) sum_x A(x) R_x = (1/4d) sum_xi Ã(xi) T_xi
//! ```
//!
//! Both arrays are stored on the full `2d x 2d` label grid even though only
//! `d^2` entries are independent; the rest follow from the half-period sign
//! rule. Keeping the redundant grid makes every lattice sum in the identity
//! catalogue a plain sum with a `1/4d` prefactor.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{half_period_sign, symplectic, PhasePoint, TorusDim};
use crate::weylops::{
    trace_with_reflection, trace_with_translation_adjoint, CMatrix, OperatorMatrix,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative tolerance used when checking the half-period sign symmetry.
pub const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArrayKind {
    Center,
    Chord,
}

impl ArrayKind {
    pub fn name(self) -> &'static str {
        match self {
            ArrayKind::Center => "center",
            ArrayKind::Chord => "chord",
        }
    }

    pub fn dual(self) -> ArrayKind {
        match self {
            ArrayKind::Center => ArrayKind::Chord,
            ArrayKind::Chord => ArrayKind::Center,
        }
    }
}

impl fmt::Display for ArrayKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A complex function on the `2d x 2d` label grid, row-major in `(q, p)`.
#[derive(Clone, PartialEq)]
pub struct PhaseArray {
    dim: TorusDim,
    kind: ArrayKind,
    entries: Vec<Complex64>,
}

impl PhaseArray {
    pub fn new(dim: &TorusDim, kind: ArrayKind, entries: Vec<Complex64>) -> Result<Self> {
        let n = dim.two_d() * dim.two_d();
        if entries.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: entries.len(),
            });
        }
        Ok(PhaseArray {
            dim: dim.clone(),
            kind,
            entries,
        })
    }

    pub fn from_fn<F>(dim: &TorusDim, kind: ArrayKind, f: F) -> Self
    where
        F: Fn(PhasePoint) -> Complex64 + Sync,
    {
        let n = dim.two_d() as i64;
        let entries = (0..n * n)
            .into_par_iter()
            .map(|i| f(PhasePoint::new(i / n, i % n)))
            .collect();
        PhaseArray {
            dim: dim.clone(),
            kind,
            entries,
        }
    }

    pub fn dim(&self) -> &TorusDim {
        &self.dim
    }

    pub fn kind(&self) -> ArrayKind {
        self.kind
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Entry at any integer label; the label is reduced mod `2d`.
    #[inline]
    pub fn get(&self, x: PhasePoint) -> Complex64 {
        self.entries[self.dim.index(x)]
    }

    pub fn iter(&self) -> impl Iterator<Item = (PhasePoint, Complex64)> + '_ {
        self.dim.lattice().zip(self.entries.iter().copied())
    }

    pub fn sum(&self) -> Complex64 {
        self.entries.iter().sum()
    }

    /// Entrywise map, keeping the kind.
    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> PhaseArray {
        PhaseArray {
            dim: self.dim.clone(),
            kind: self.kind,
            entries: self.entries.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &PhaseArray) -> f64 {
        assert_eq!(self.entries.len(), other.entries.len(), "array size mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.entries.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// Largest deviation from `f(v + d w) = (-1)^(<v,w> + d w_q w_p) f(v)`,
    /// relative to `max(1, max |f|)`.
    pub fn symmetry_defect(&self) -> f64 {
        let d = self.dim.d();
        let di = d as i64;
        let scale = self.max_abs().max(1.0);
        let shifts = [
            PhasePoint::new(1, 0),
            PhasePoint::new(0, 1),
            PhasePoint::new(1, 1),
        ];
        let mut worst = 0.0f64;
        for v in self.dim.quadrant() {
            let base = self.get(v);
            for w in shifts {
                let s = half_period_sign(d, v, w);
                let dev = (self.get(v + di * w) - base * s).norm();
                worst = worst.max(dev);
            }
        }
        worst / scale
    }

    /// Sum of `|f|^2` over each of the four `d x d` quadrants.
    pub fn quadrant_norm_sums(&self) -> [f64; 4] {
        let d = self.dim.d() as i64;
        let mut out = [0.0; 4];
        for (x, z) in self.iter() {
            let k = (x.q / d) * 2 + (x.p / d);
            out[k as usize] += z.norm_sqr();
        }
        out
    }
}

impl fmt::Debug for PhaseArray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PhaseArray({}, d = {})", self.kind, self.dim.d())
    }
}

/// `A(x) = tr(A R_x)` on the full label grid.
pub fn center_repr(a: &OperatorMatrix) -> PhaseArray {
    let dim = a.dim().clone();
    let m = a.matrix();
    PhaseArray::from_fn(&dim, ArrayKind::Center, |x| trace_with_reflection(m, &dim, x))
}

/// `Ã(xi) = tr(A T_xi^dag)` on the full label grid.
pub fn chord_repr(a: &OperatorMatrix) -> PhaseArray {
    let dim = a.dim().clone();
    let m = a.matrix();
    PhaseArray::from_fn(&dim, ArrayKind::Chord, |xi| {
        trace_with_translation_adjoint(m, &dim, xi)
    })
}

/// Inverts [`center_repr`] or [`chord_repr`] depending on the array kind.
///
/// Arrays that break the half-period sign rule cannot come from any operator
/// and are rejected rather than silently projected.
pub fn reconstruct(arr: &PhaseArray) -> Result<OperatorMatrix> {
    let deviation = arr.symmetry_defect();
    if deviation > SYMMETRY_TOL {
        return Err(Error::SymmetryViolation { deviation });
    }
    let dim = arr.dim();
    let scale = 1.0 / (2 * dim.two_d()) as f64;
    Ok(assemble(dim, arr.kind(), arr.iter(), scale))
}

fn assemble(
    dim: &TorusDim,
    kind: ArrayKind,
    terms: impl Iterator<Item = (PhasePoint, Complex64)>,
    scale: f64,
) -> OperatorMatrix {
    let d = dim.d();
    let di = d as i64;
    let mut m = CMatrix::from_element(d, d, ZERO);
    for (x, c) in terms {
        if c == ZERO {
            continue;
        }
        for j in 0..di {
            let row = (j + x.q).rem_euclid(di) as usize;
            let col = match kind {
                ArrayKind::Center => (-j).rem_euclid(di) as usize,
                ArrayKind::Chord => j as usize,
            };
            m[(row, col)] += c * dim.tau_pow((2 * j + x.q) * x.p);
        }
    }
    OperatorMatrix::new(dim, m * Complex64::new(scale, 0.0)).expect("square by construction")
}

/// The symplectic Fourier transform `F[f](u) = (1/2d) sum_v tau^<v,u> f(v)`.
///
/// It sends center arrays to chord arrays and back with the same kernel, and
/// `F(F(f)) = f`.
pub fn symplectic_ft(arr: &PhaseArray) -> PhaseArray {
    let dim = arr.dim().clone();
    let norm = 1.0 / dim.two_d() as f64;
    let src: Vec<(PhasePoint, Complex64)> = arr.iter().collect();
    PhaseArray::from_fn(&dim, arr.kind().dual(), |u| {
        let s: Complex64 = src
            .iter()
            .map(|&(v, f)| f * dim.tau_pow(symplectic(v, u)))
            .sum();
        s * norm
    })
}

/// The odd-`d` reduced array on `Z_d x Z_d`: entry `x` holds the full-grid
/// value at the even label `2x`.
#[derive(Clone, Debug, PartialEq)]
pub struct RestrictedArray {
    dim: TorusDim,
    kind: ArrayKind,
    entries: Vec<Complex64>,
}

impl RestrictedArray {
    pub fn dim(&self) -> &TorusDim {
        &self.dim
    }

    pub fn kind(&self) -> ArrayKind {
        self.kind
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Entry at `x` in `Z_d x Z_d`, i.e. the full-grid value at label `2x`.
    pub fn get(&self, x: PhasePoint) -> Complex64 {
        let d = self.dim.d() as i64;
        self.entries[(x.q.rem_euclid(d) * d + x.p.rem_euclid(d)) as usize]
    }
}

/// Keeps only the even-even sublattice. For even `d` those labels do not
/// carry a complete basis, so the call fails.
pub fn odd_d_restrict(arr: &PhaseArray) -> Result<RestrictedArray> {
    let dim = arr.dim();
    if dim.d().is_multiple_of(2) {
        return Err(Error::EvenDimension(dim.d()));
    }
    let entries = dim.quadrant().map(|x| arr.get(2 * x)).collect();
    Ok(RestrictedArray {
        dim: dim.clone(),
        kind: arr.kind(),
        entries,
    })
}

/// `A = (1/d) sum_{x in Z_d^2} A(2x) R_{2x}` (or the chord analogue).
pub fn restricted_reconstruct(arr: &RestrictedArray) -> Result<OperatorMatrix> {
    let dim = arr.dim();
    if dim.d().is_multiple_of(2) {
        return Err(Error::EvenDimension(dim.d()));
    }
    let terms = dim.quadrant().map(|x| (2 * x, arr.get(x)));
    Ok(assemble(dim, arr.kind(), terms, 1.0 / dim.d() as f64))
}

/// Tolerance on `| |psi|^2 - 1 |` for [`PureState`].
pub const NORM_TOL: f64 = 1e-12;

/// A normalized vector in the position basis.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    dim: TorusDim,
    amps: Vec<Complex64>,
}

impl PureState {
    pub fn new(dim: &TorusDim, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != dim.d() {
            return Err(Error::DimensionMismatch {
                expected: dim.d(),
                found: amps.len(),
            });
        }
        let norm_sqr: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(PureState {
            dim: dim.clone(),
            amps,
        })
    }

    /// Rescales `amps` to unit norm. Fails only for the zero vector.
    pub fn normalized(dim: &TorusDim, amps: Vec<Complex64>) -> Result<Self> {
        let norm_sqr: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if norm_sqr == 0.0 || !norm_sqr.is_finite() {
            return Err(Error::NotNormalized { norm_sqr });
        }
        let n = norm_sqr.sqrt();
        Self::new(dim, amps.into_iter().map(|z| z / n).collect())
    }

    /// The position eigenstate `|q_j>`.
    pub fn position(dim: &TorusDim, j: usize) -> Self {
        let mut amps = vec![ZERO; dim.d()];
        amps[j % dim.d()] = Complex64::new(1.0, 0.0);
        PureState {
            dim: dim.clone(),
            amps,
        }
    }

    pub fn dim(&self) -> &TorusDim {
        &self.dim
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &PureState) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn projector(&self) -> OperatorMatrix {
        OperatorMatrix::outer(&self.dim, &self.amps, &self.amps).expect("lengths match")
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            op: self.projector(),
        }
    }

    /// `W(x) = <psi| R_x |psi>`.
    pub fn wigner(&self) -> PhaseArray {
        center_repr(&self.projector())
    }

    /// `chi(xi) = <psi| T_xi^dag |psi>`.
    pub fn chord(&self) -> PhaseArray {
        chord_repr(&self.projector())
    }

    /// `U psi`, renormalized against rounding.
    pub fn evolve(&self, u: &OperatorMatrix) -> PureState {
        PureState::normalized(&self.dim, u.apply(&self.amps)).expect("unitary image is nonzero")
    }
}

/// Positive, unit-trace Hermitian operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    op: OperatorMatrix,
}

impl DensityMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-12;
    pub const TRACE_TOL: f64 = 1e-12;
    pub const EIGEN_TOL: f64 = 1e-10;

    pub fn new(dim: &TorusDim, m: CMatrix) -> Result<Self> {
        let op = OperatorMatrix::new(dim, m)?;
        Self::from_operator(op)
    }

    pub fn from_operator(op: OperatorMatrix) -> Result<Self> {
        let herm = op.hermiticity_defect();
        if herm > Self::HERMITIAN_TOL {
            return Err(Error::InvalidDensity(format!(
                "not Hermitian (max |rho - rho^dag| = {herm:e})"
            )));
        }
        let tr = op.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > Self::TRACE_TOL {
            return Err(Error::InvalidDensity(format!(
                "trace is {} + {}i, expected 1",
                tr.re, tr.im
            )));
        }
        let rho = DensityMatrix { op };
        let min = rho.eigenvalues().first().copied().unwrap_or(0.0);
        if min < -Self::EIGEN_TOL {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(rho)
    }

    pub fn maximally_mixed(dim: &TorusDim) -> Self {
        DensityMatrix {
            op: OperatorMatrix::identity(dim).scale(Complex64::new(1.0 / dim.d() as f64, 0.0)),
        }
    }

    pub fn dim(&self) -> &TorusDim {
        self.op.dim()
    }

    pub fn operator(&self) -> &OperatorMatrix {
        &self.op
    }

    pub fn matrix(&self) -> &CMatrix {
        self.op.matrix()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (self.op.matrix() + self.op.matrix().adjoint()).map(|z| z * 0.5);
        let mut ev: Vec<f64> = herm.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// `tr rho^2`.
    pub fn purity(&self) -> f64 {
        self.op.matrix().iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn wigner(&self) -> PhaseArray {
        center_repr(&self.op)
    }

    pub fn chord(&self) -> PhaseArray {
        chord_repr(&self.op)
    }
}

/// Periodized Gaussian centered at the label `center` (physical point
/// `center / 2d`), with the width of the `d`-dependent coherent state
/// `exp(-pi d (q - q0)^2)`.
pub fn coherent_state(dim: &TorusDim, center: PhasePoint) -> PureState {
    let d = dim.d() as f64;
    let two_d = dim.two_d() as f64;
    let q0 = center.q as f64 / two_d;
    let p0 = center.p as f64 / two_d;
    let amps: Vec<Complex64> = (0..dim.d())
        .map(|j| {
            let qj = j as f64 / d;
            (-3..=3)
                .map(|n| {
                    let n = n as f64;
                    let envelope = (-std::f64::consts::PI * d * (qj - q0 + n).powi(2)).exp();
                    let phase = 2.0 * std::f64::consts::PI * d * p0 * (qj + n);
                    Complex64::from_polar(envelope, phase)
                })
                .sum()
        })
        .collect();
    PureState::normalized(dim, amps).expect("coherent state is nonzero")
}
