//! Product formulae for center and chord representations and the identities
//! they imply for pure states, transition operators and quartic sums.
//!
//! Each check evaluates both sides independently and reports the largest
//! discrepancy, normalized by `max(1, |lhs|)`. Lattice sums always run over
//! the full `2d x 2d` grid with a `1/4d` prefactor.
//!
//! A few phases differ from the way they are sometimes printed; the forms here
//! are the ones that hold numerically:
//!
//! ```text
//! tr(A R_x B^dag R_y) = (1/4d) sum_z Ã(z-x) B̃*(y-z) tau^{-<x+y,z>}
//! W(x)W(y)            = (1/4d) sum_z chi(x+z) chi(y+z) tau^{-<x+y,z>}
//! chi(xi)chi(om)      = (1/4d) sum_z W(xi+z) W(om+z) tau^{-<xi+om,z>}
//! W(x)^2              = (1/4d) sum_z chi(z)^2 tau^{-2<x,z>}
//! |chi12(xi)|^2       = (1/4d) sum_z chi1*(z) chi2(z) tau^{2<xi,z>}
//! ```

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::lattice::{symplectic, PhasePoint, TorusDim};
use crate::phase_repr::{center_repr, chord_repr, DensityMatrix, PhaseArray, PureState};
use crate::random::rng_from_seed;
use crate::weylops::{reflection, translation, OperatorMatrix};

/// Default tolerance for the identity catalogue.
pub const IDENTITY_TOL: f64 = 1e-9;

/// Outcome of one identity check.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport {
    pub name: String,
    pub lhs: Vec<Complex64>,
    pub rhs: Vec<Complex64>,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl IdentityReport {
    pub fn new(name: &str, lhs: Vec<Complex64>, rhs: Vec<Complex64>, tolerance: f64) -> Self {
        assert_eq!(lhs.len(), rhs.len(), "identity sides differ in length");
        let residual = lhs
            .iter()
            .zip(&rhs)
            .map(|(l, r)| (l - r).norm() / l.norm().max(1.0))
            .fold(0.0, f64::max);
        IdentityReport {
            name: name.to_string(),
            lhs,
            rhs,
            residual,
            tolerance,
            passed: residual <= tolerance,
        }
    }

    pub fn scalar(name: &str, lhs: Complex64, rhs: Complex64, tolerance: f64) -> Self {
        Self::new(name, vec![lhs], vec![rhs], tolerance)
    }
}

/// Label pairs used by the pairwise identities: every pair for `d <= 3`,
/// otherwise 64 pairs drawn from a generator seeded by `d`.
pub fn sample_pairs(dim: &TorusDim) -> Vec<(PhasePoint, PhasePoint)> {
    if dim.d() <= 3 {
        let pts: Vec<_> = dim.lattice().collect();
        return pts
            .iter()
            .flat_map(|&x| pts.iter().map(move |&y| (x, y)))
            .collect();
    }
    let mut rng = rng_from_seed(0x5eed_0000 + dim.d() as u64);
    let n = dim.two_d() as i64;
    (0..64)
        .map(|_| {
            let x = PhasePoint::new(rng.random_range(0..n), rng.random_range(0..n));
            let y = PhasePoint::new(rng.random_range(0..n), rng.random_range(0..n));
            (x, y)
        })
        .collect()
}

fn lattice_sum<F: Fn(PhasePoint) -> Complex64>(dim: &TorusDim, f: F) -> Complex64 {
    dim.lattice().map(f).sum::<Complex64>() / (2 * dim.two_d()) as f64
}

fn check_same_dim(a: &TorusDim, b: &TorusDim) -> Result<()> {
    if a.d() != b.d() {
        return Err(Error::DimensionMismatch {
            expected: a.d(),
            found: b.d(),
        });
    }
    Ok(())
}

/// Reflection-sandwich product formula: `tr(A R_x B^dag R_y)` evaluated
/// directly, from center arrays and from chord arrays.
pub fn main_formula_center(
    a: &OperatorMatrix,
    b: &OperatorMatrix,
    x: PhasePoint,
    y: PhasePoint,
) -> Result<IdentityReport> {
    check_same_dim(a.dim(), b.dim())?;
    let dim = a.dim();
    let (ac, bc) = (center_repr(a), center_repr(b));
    let (ach, bch) = (chord_repr(a), chord_repr(b));
    Ok(main_center_at(dim, a, b, (&ac, &bc, &ach, &bch), &[(x, y)]))
}

type Reps<'a> = (&'a PhaseArray, &'a PhaseArray, &'a PhaseArray, &'a PhaseArray);

fn main_center_at(
    dim: &TorusDim,
    a: &OperatorMatrix,
    b: &OperatorMatrix,
    (ac, bc, ach, bch): Reps<'_>,
    pairs: &[(PhasePoint, PhasePoint)],
) -> IdentityReport {
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    for &(x, y) in pairs {
        let direct = (a.matrix()
            * reflection(dim, x).matrix()
            * b.matrix().adjoint()
            * reflection(dim, y).matrix())
        .trace();
        let via_center = lattice_sum(dim, |z| {
            ac.get(x + z) * bc.get(y - z).conj() * dim.tau_pow(symplectic(x - y, z))
        });
        let via_chord = lattice_sum(dim, |z| {
            ach.get(z - x) * bch.get(y - z).conj() * dim.tau_pow(-symplectic(x + y, z))
        });
        lhs.extend([direct, direct]);
        rhs.extend([via_center, via_chord]);
    }
    IdentityReport::new("main_center", lhs, rhs, 1e-10)
}

/// Translation-sandwich product formula: `tr(A T_xi B^dag T_om^dag)`.
pub fn main_formula_chord(
    a: &OperatorMatrix,
    b: &OperatorMatrix,
    xi: PhasePoint,
    omega: PhasePoint,
) -> Result<IdentityReport> {
    check_same_dim(a.dim(), b.dim())?;
    let dim = a.dim();
    let (ac, bc) = (center_repr(a), center_repr(b));
    let (ach, bch) = (chord_repr(a), chord_repr(b));
    Ok(main_chord_at(dim, a, b, (&ac, &bc, &ach, &bch), &[(xi, omega)]))
}

fn main_chord_at(
    dim: &TorusDim,
    a: &OperatorMatrix,
    b: &OperatorMatrix,
    (ac, bc, ach, bch): Reps<'_>,
    pairs: &[(PhasePoint, PhasePoint)],
) -> IdentityReport {
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    for &(xi, om) in pairs {
        let direct = (a.matrix()
            * translation(dim, xi).matrix()
            * b.matrix().adjoint()
            * translation(dim, om).matrix().adjoint())
        .trace();
        let via_center = lattice_sum(dim, |z| {
            ac.get(z + xi) * bc.get(z - om).conj() * dim.tau_pow(symplectic(xi - om, z))
        });
        let via_chord = lattice_sum(dim, |z| {
            ach.get(z - xi) * bch.get(z - om).conj() * dim.tau_pow(-symplectic(xi + om, z))
        });
        lhs.extend([direct, direct]);
        rhs.extend([via_center, via_chord]);
    }
    IdentityReport::new("main_chord", lhs, rhs, 1e-10)
}

/// Both product formulae over the sampled label pairs.
pub fn main_formula_suite(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<Vec<IdentityReport>> {
    check_same_dim(a.dim(), b.dim())?;
    let dim = a.dim();
    let (ac, bc) = (center_repr(a), center_repr(b));
    let (ach, bch) = (chord_repr(a), chord_repr(b));
    let pairs = sample_pairs(dim);
    let reps = (&ac, &bc, &ach, &bch);
    Ok(vec![
        main_center_at(dim, a, b, reps, &pairs),
        main_chord_at(dim, a, b, reps, &pairs),
    ])
}

fn check_normalized(psi: &PureState) -> Result<()> {
    let norm_sqr: f64 = psi.amplitudes().iter().map(|z| z.norm_sqr()).sum();
    if (norm_sqr - 1.0).abs() > crate::phase_repr::NORM_TOL {
        return Err(Error::NotNormalized { norm_sqr });
    }
    Ok(())
}

/// The pure-state identity catalogue for `|psi><psi|`.
pub fn pure_state_suite(psi: &PureState) -> Result<Vec<IdentityReport>> {
    check_normalized(psi)?;
    Ok(state_suite(&psi.to_density()))
}

/// The same catalogue evaluated on an arbitrary density matrix. Every entry
/// passes for pure states; for mixed states the purity-sensitive ones fail,
/// and the residuals serve as a measure of mixedness.
pub fn state_suite(rho: &DensityMatrix) -> Vec<IdentityReport> {
    let dim = rho.dim();
    let w = rho.wigner();
    let c = rho.chord();
    let tol = IDENTITY_TOL;
    let pairs = sample_pairs(dim);
    let points: Vec<PhasePoint> = dim.lattice().collect();
    let tp = |k: i64| dim.tau_pow(k);
    let mut out = Vec::new();

    let pairwise = |name: &str, lhs: &dyn Fn(PhasePoint, PhasePoint) -> Complex64, rhs: &dyn Fn(PhasePoint, PhasePoint) -> Complex64| {
        let (l, r): (Vec<_>, Vec<_>) = pairs.iter().map(|&(x, y)| (lhs(x, y), rhs(x, y))).unzip();
        IdentityReport::new(name, l, r, tol)
    };
    let pointwise = |name: &str, lhs: &dyn Fn(PhasePoint) -> Complex64, rhs: &dyn Fn(PhasePoint) -> Complex64| {
        let (l, r): (Vec<_>, Vec<_>) = points.iter().map(|&x| (lhs(x), rhs(x))).unzip();
        IdentityReport::new(name, l, r, tol)
    };

    out.push(pairwise(
        "wxyw",
        &|x, y| w.get(x) * w.get(y),
        &|x, y| lattice_sum(dim, |z| w.get(x + z) * w.get(y - z) * tp(symplectic(x - y, z))),
    ));
    out.push(pairwise(
        "wxyc",
        &|x, y| w.get(x) * w.get(y),
        &|x, y| lattice_sum(dim, |z| c.get(x + z) * c.get(y + z) * tp(-symplectic(x + y, z))),
    ));
    out.push(pairwise(
        "cabc",
        &|xi, om| c.get(xi) * c.get(om),
        &|xi, om| lattice_sum(dim, |z| c.get(xi + z) * c.get(om - z) * tp(symplectic(xi - om, z))),
    ));
    out.push(pairwise(
        "cabw",
        &|xi, om| c.get(xi) * c.get(om),
        &|xi, om| lattice_sum(dim, |z| w.get(xi + z) * w.get(om + z) * tp(-symplectic(xi + om, z))),
    ));
    out.push(pointwise(
        "w2c2",
        &|x| w.get(x) * w.get(x),
        &|x| lattice_sum(dim, |z| c.get(z) * c.get(z) * tp(-2 * symplectic(x, z))),
    ));
    out.push(pointwise(
        "wwm_chord",
        &|x| w.get(x) * w.get(-x),
        &|x| lattice_sum(dim, |z| c.get(x + z) * c.get(x - z).conj()),
    ));
    out.push(pointwise(
        "wwm_center",
        &|x| w.get(x) * w.get(-x),
        &|x| lattice_sum(dim, |z| w.get(z) * w.get(-z) * tp(2 * symplectic(x, z))),
    ));
    out.push(pointwise(
        "chord_autocorrelation_center",
        &|xi| Complex64::new(c.get(xi).norm_sqr(), 0.0),
        &|xi| lattice_sum(dim, |z| w.get(z + xi) * w.get(z - xi)),
    ));
    out.push(pointwise(
        "chord_autocorrelation_chord",
        &|xi| Complex64::new(c.get(xi).norm_sqr(), 0.0),
        &|xi| lattice_sum(dim, |z| c.get(z).norm_sqr() * tp(2 * symplectic(xi, z))),
    ));

    let w0 = w.get(PhasePoint::ORIGIN);
    out.push(IdentityReport::new(
        "w0_squared",
        vec![w0 * w0, w0 * w0],
        vec![
            lattice_sum(dim, |z| c.get(z) * c.get(z)),
            lattice_sum(dim, |z| w.get(z) * w.get(-z)),
        ],
        tol,
    ));
    let one = Complex64::new(1.0, 0.0);
    out.push(IdentityReport::new(
        "purity",
        vec![one, one],
        vec![
            lattice_sum(dim, |z| Complex64::new(w.get(z).norm_sqr(), 0.0)),
            lattice_sum(dim, |z| Complex64::new(c.get(z).norm_sqr(), 0.0)),
        ],
        tol,
    ));
    out.push(IdentityReport::scalar(
        "quartic_m",
        lattice_sum(dim, |z| w.get(z).powi(4)),
        lattice_sum(dim, |z| Complex64::new(c.get(z).norm_sqr().powi(2), 0.0)),
        tol,
    ));
    out.push(IdentityReport::scalar(
        "quartic_l",
        lattice_sum(dim, |z| w.get(z).powi(2) * w.get(-z).powi(2)),
        lattice_sum(dim, |z| c.get(z).powi(4)),
        tol,
    ));
    out
}

/// `W12(x) = <psi2| R_x |psi1>` and `chi12(xi) = <psi2| T_xi^dag |psi1>`,
/// the representations of `|psi1><psi2|`.
pub fn transition_functions(psi1: &PureState, psi2: &PureState) -> Result<(PhaseArray, PhaseArray)> {
    check_same_dim(psi1.dim(), psi2.dim())?;
    check_normalized(psi1)?;
    check_normalized(psi2)?;
    let t = OperatorMatrix::outer(psi1.dim(), psi1.amplitudes(), psi2.amplitudes())?;
    Ok((center_repr(&t), chord_repr(&t)))
}

/// Identities tying the transition functions to the Wigner and chord
/// functions of the two states.
pub fn transition_suite(psi1: &PureState, psi2: &PureState) -> Result<Vec<IdentityReport>> {
    let (w12, c12) = transition_functions(psi1, psi2)?;
    let dim = psi1.dim();
    let (w1, c1) = (psi1.wigner(), psi1.chord());
    let (w2, c2) = (psi2.wigner(), psi2.chord());
    let tol = IDENTITY_TOL;
    let tp = |k: i64| dim.tau_pow(k);
    let points: Vec<PhasePoint> = dim.lattice().collect();
    let pointwise = |name: &str, lhs: &dyn Fn(PhasePoint) -> Complex64, rhs: &dyn Fn(PhasePoint) -> Complex64| {
        let (l, r): (Vec<_>, Vec<_>) = points.iter().map(|&x| (lhs(x), rhs(x))).unzip();
        IdentityReport::new(name, l, r, tol)
    };
    let sq = |z: Complex64| Complex64::new(z.norm_sqr(), 0.0);
    let one = Complex64::new(1.0, 0.0);

    let mut out = vec![
        IdentityReport::new(
            "transition_norm",
            vec![one, one],
            vec![
                lattice_sum(dim, |z| sq(w12.get(z))),
                lattice_sum(dim, |z| sq(c12.get(z))),
            ],
            tol,
        ),
        pointwise(
            "transition_center_center",
            &|x| sq(w12.get(x)),
            &|x| lattice_sum(dim, |z| w1.get(x + z) * w2.get(x - z)),
        ),
        pointwise(
            "transition_center_chord",
            &|x| sq(w12.get(x)),
            &|x| lattice_sum(dim, |z| c1.get(z) * c2.get(z) * tp(-2 * symplectic(x, z))),
        ),
        pointwise(
            "transition_chord_center",
            &|xi| sq(c12.get(xi)),
            &|xi| lattice_sum(dim, |z| w1.get(z + xi) * w2.get(z - xi)),
        ),
        pointwise(
            "transition_chord_chord",
            &|xi| sq(c12.get(xi)),
            &|xi| lattice_sum(dim, |z| c1.get(z).conj() * c2.get(z) * tp(2 * symplectic(xi, z))),
        ),
        pointwise(
            "transition_reflected_product",
            &|x| w12.get(x).conj() * w12.get(-x),
            &|x| lattice_sum(dim, |z| w1.get(z) * w2.get(-z) * tp(2 * symplectic(x, z))),
        ),
        IdentityReport::scalar(
            "quartic_k",
            lattice_sum(dim, |z| Complex64::new(w12.get(z).norm_sqr().powi(2), 0.0)),
            lattice_sum(dim, |z| Complex64::new(c12.get(z).norm_sqr().powi(2), 0.0)),
            tol,
        ),
    ];
    out.push(quartic_coherence_identity(psi1, psi2)?);
    Ok(out)
}

/// `(1/4d) sum |W12(x)|^2 |W12(-x)|^2 = (1/4d) sum |W1(x)|^2 |W2(-x)|^2`.
pub fn quartic_coherence_identity(psi1: &PureState, psi2: &PureState) -> Result<IdentityReport> {
    let (w12, _) = transition_functions(psi1, psi2)?;
    let dim = psi1.dim();
    let (w1, w2) = (psi1.wigner(), psi2.wigner());
    Ok(IdentityReport::scalar(
        "quartic_coherence",
        lattice_sum(dim, |z| Complex64::new(w12.get(z).norm_sqr() * w12.get(-z).norm_sqr(), 0.0)),
        lattice_sum(dim, |z| Complex64::new(w1.get(z).norm_sqr() * w2.get(-z).norm_sqr(), 0.0)),
        IDENTITY_TOL,
    ))
}

/// Quartic localization measures of a pure state and, optionally, of the
/// coherence between two states.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalizationReport {
    /// `(1/4d) sum W^4`.
    pub m: f64,
    /// `(1/4d) sum |chi|^4`.
    pub m_chord: f64,
    /// `(1/4d) sum W(x)^2 W(-x)^2`.
    pub l: f64,
    /// `(1/4d) sum chi^4` (real part; the sum is real for states).
    pub l_chord: f64,
    /// `(1/4d) sum |W12|^4`, when a second state is given.
    pub k: Option<f64>,
    /// `(1/4d) sum |chi12|^4` over the full grid.
    pub k_chord: Option<f64>,
    pub welch_lower: f64,
    pub upper: f64,
}

impl LocalizationReport {
    /// `welch_lower - tol <= M <= upper + tol` and `L <= M + tol`.
    pub fn within_bounds(&self, tol: f64) -> bool {
        self.m >= self.welch_lower - tol && self.m <= self.upper + tol && self.l <= self.m + tol
    }

    /// Largest disagreement between the center and chord forms.
    pub fn form_mismatch(&self) -> f64 {
        let mut r = (self.m - self.m_chord).abs().max((self.l - self.l_chord).abs());
        if let (Some(k), Some(kc)) = (self.k, self.k_chord) {
            r = r.max((k - kc).abs());
        }
        r
    }
}

pub fn welch_bound(d: usize) -> f64 {
    2.0 / (d as f64 + 1.0)
}

pub fn localization(psi: &PureState, psi2: Option<&PureState>) -> Result<LocalizationReport> {
    check_normalized(psi)?;
    let dim = psi.dim();
    let w = psi.wigner();
    let c = psi.chord();
    let norm = 1.0 / (2 * dim.two_d()) as f64;
    let m = w.entries().iter().map(|z| z.re.powi(4)).sum::<f64>() * norm;
    let m_chord = c.entries().iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>() * norm;
    let l = dim
        .lattice()
        .map(|x| (w.get(x).re * w.get(-x).re).powi(2))
        .sum::<f64>()
        * norm;
    let l_chord = c.entries().iter().map(|z| z.powi(4)).sum::<Complex64>().re * norm;
    let (k, k_chord) = match psi2 {
        Some(p2) => {
            let (w12, c12) = transition_functions(psi, p2)?;
            let k = w12.entries().iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>() * norm;
            let kc = c12.entries().iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>() * norm;
            (Some(k), Some(kc))
        }
        None => (None, None),
    };
    Ok(LocalizationReport {
        m,
        m_chord,
        l,
        l_chord,
        k,
        k_chord,
        welch_lower: welch_bound(dim.d()),
        upper: 1.0,
    })
}

/// Wigner function of `(psi1 + psi2)/sqrt 2` assembled as
/// `(W1 + W2 + W12 + W12*) / 2`. The states must be orthogonal.
pub fn cat_coherence(psi1: &PureState, psi2: &PureState) -> Result<PhaseArray> {
    check_same_dim(psi1.dim(), psi2.dim())?;
    let overlap = psi1.overlap(psi2).norm();
    if overlap > 1e-10 {
        return Err(Error::NonOrthogonal { overlap });
    }
    let (w12, _) = transition_functions(psi1, psi2)?;
    let (w1, w2) = (psi1.wigner(), psi2.wigner());
    let dim = psi1.dim();
    let entries = dim
        .lattice()
        .map(|x| (w1.get(x) + w2.get(x) + w12.get(x) + w12.get(x).conj()) * 0.5)
        .collect();
    PhaseArray::new(dim, w1.kind(), entries)
}
