//! Discrete translation and reflection operators.
//!
//! Matrices are written in the position basis `|q_0>, ..., |q_{d-1}>`, row
//! index = output, column index = input:
//!
//! ```text
//! T_xi = sum_j |q_{j + xi_q}><q_j|  tau^{(2j + xi_q) xi_p}
//! R_x  = sum_j |q_{j + x_q}><q_{-j}| tau^{(2j + x_q) x_p}
//! ```
//!
//! Both are monomial matrices (one nonzero per column), which the trace
//! helpers at the bottom of this module exploit to evaluate `tr(A R_x)` and
//! `tr(A T_xi^dag)` in `O(d)`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{symplectic, PhasePoint, TorusDim};

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A `d x d` complex matrix acting on the torus Hilbert space.
#[derive(Clone, PartialEq)]
pub struct OperatorMatrix {
    dim: TorusDim,
    m: CMatrix,
}

impl OperatorMatrix {
    pub fn new(dim: &TorusDim, m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() != dim.d() {
            return Err(Error::DimensionMismatch {
                expected: dim.d(),
                found: m.nrows(),
            });
        }
        Ok(OperatorMatrix {
            dim: dim.clone(),
            m,
        })
    }

    /// Builds an operator from a square matrix, taking `d` from its size.
    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        let dim = TorusDim::new(m.nrows().max(1));
        Self::new(&dim, m)
    }

    pub fn identity(dim: &TorusDim) -> Self {
        OperatorMatrix {
            dim: dim.clone(),
            m: CMatrix::identity(dim.d(), dim.d()),
        }
    }

    pub fn zeros(dim: &TorusDim) -> Self {
        OperatorMatrix {
            dim: dim.clone(),
            m: CMatrix::zeros(dim.d(), dim.d()),
        }
    }

    /// `|a><b|`.
    pub fn outer(dim: &TorusDim, a: &[Complex64], b: &[Complex64]) -> Result<Self> {
        for v in [a, b] {
            if v.len() != dim.d() {
                return Err(Error::DimensionMismatch {
                    expected: dim.d(),
                    found: v.len(),
                });
            }
        }
        let d = dim.d();
        Ok(OperatorMatrix {
            dim: dim.clone(),
            m: CMatrix::from_fn(d, d, |r, c| a[r] * b[c].conj()),
        })
    }

    pub fn dim(&self) -> &TorusDim {
        &self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.m[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        OperatorMatrix {
            dim: self.dim.clone(),
            m: self.m.adjoint(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.m.trace()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        OperatorMatrix {
            dim: self.dim.clone(),
            m: &self.m * s,
        }
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let d = self.dim.d();
        (0..d)
            .map(|r| (0..d).map(|c| self.m[(r, c)] * v[c]).sum())
            .collect()
    }

    /// `max |A_rc - B_rc|`.
    pub fn max_abs_diff(&self, other: &OperatorMatrix) -> f64 {
        max_abs_diff(&self.m, &other.m)
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |A^dag A - 1|`.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = self.m.adjoint() * &self.m;
        max_abs_diff(&prod, &CMatrix::identity(self.dim.d(), self.dim.d()))
    }

    pub fn hermiticity_defect(&self) -> f64 {
        max_abs_diff(&self.m, &self.m.adjoint())
    }

    /// Matrix power by repeated squaring.
    pub fn pow(&self, mut n: u64) -> Self {
        let d = self.dim.d();
        let mut acc = CMatrix::identity(d, d);
        let mut base = self.m.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            n >>= 1;
        }
        OperatorMatrix {
            dim: self.dim.clone(),
            m: acc,
        }
    }

    fn check_same(&self, other: &OperatorMatrix) {
        assert_eq!(
            self.dim.d(),
            other.dim.d(),
            "operator dimension mismatch"
        );
    }
}

impl fmt::Debug for OperatorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OperatorMatrix(d = {}){}", self.dim.d(), self.m)
    }
}

impl<'a> Mul<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &'a OperatorMatrix) -> OperatorMatrix {
        self.check_same(rhs);
        OperatorMatrix {
            dim: self.dim.clone(),
            m: &self.m * &rhs.m,
        }
    }
}

impl<'a> Add<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &'a OperatorMatrix) -> OperatorMatrix {
        self.check_same(rhs);
        OperatorMatrix {
            dim: self.dim.clone(),
            m: &self.m + &rhs.m,
        }
    }
}

impl<'a> Sub<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &'a OperatorMatrix) -> OperatorMatrix {
        self.check_same(rhs);
        OperatorMatrix {
            dim: self.dim.clone(),
            m: &self.m - &rhs.m,
        }
    }
}

pub(crate) fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

#[inline]
fn wrap(i: i64, d: usize) -> usize {
    i.rem_euclid(d as i64) as usize
}

/// `T_xi`.
pub fn translation(dim: &TorusDim, xi: PhasePoint) -> OperatorMatrix {
    let d = dim.d();
    let mut m = CMatrix::from_element(d, d, ZERO);
    for j in 0..d as i64 {
        let row = wrap(j + xi.q, d);
        m[(row, j as usize)] += dim.tau_pow((2 * j + xi.q) * xi.p);
    }
    OperatorMatrix {
        dim: dim.clone(),
        m,
    }
}

/// `R_x`.
pub fn reflection(dim: &TorusDim, x: PhasePoint) -> OperatorMatrix {
    let d = dim.d();
    let mut m = CMatrix::from_element(d, d, ZERO);
    for j in 0..d as i64 {
        let row = wrap(j + x.q, d);
        let col = wrap(-j, d);
        m[(row, col)] += dim.tau_pow((2 * j + x.q) * x.p);
    }
    OperatorMatrix {
        dim: dim.clone(),
        m,
    }
}

/// `R_x` assembled as `(1/2d) sum_xi tau^<x, xi> T_xi`.
pub fn reflection_from_translations(dim: &TorusDim, x: PhasePoint) -> OperatorMatrix {
    let d = dim.d();
    let mut m = CMatrix::from_element(d, d, ZERO);
    for xi in dim.lattice() {
        let phase = dim.tau_pow(symplectic(x, xi));
        for j in 0..d as i64 {
            let row = wrap(j + xi.q, d);
            m[(row, j as usize)] += phase * dim.tau_pow((2 * j + xi.q) * xi.p);
        }
    }
    let norm = Complex64::new(1.0 / dim.two_d() as f64, 0.0);
    OperatorMatrix {
        dim: dim.clone(),
        m: m * norm,
    }
}

/// Shift `V = T_(1,0)`.
pub fn schwinger_v(dim: &TorusDim) -> OperatorMatrix {
    translation(dim, PhasePoint::new(1, 0))
}

/// Clock `U = T_(0,1)`.
pub fn schwinger_u(dim: &TorusDim) -> OperatorMatrix {
    translation(dim, PhasePoint::new(0, 1))
}

/// The two kinds of Weyl operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WeylKind {
    Translation,
    Reflection,
}

/// A translation or reflection operator named by its label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct WeylOp {
    pub kind: WeylKind,
    pub label: PhasePoint,
}

impl WeylOp {
    pub fn translation(label: PhasePoint) -> Self {
        WeylOp {
            kind: WeylKind::Translation,
            label,
        }
    }

    pub fn reflection(label: PhasePoint) -> Self {
        WeylOp {
            kind: WeylKind::Reflection,
            label,
        }
    }

    pub fn matrix(&self, dim: &TorusDim) -> OperatorMatrix {
        match self.kind {
            WeylKind::Translation => translation(dim, self.label),
            WeylKind::Reflection => reflection(dim, self.label),
        }
    }
}

/// Result of multiplying two Weyl operators symbolically:
/// `product = tau^exponent * op`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Composition {
    pub op: WeylOp,
    pub tau_exponent: i64,
}

impl Composition {
    pub fn matrix(&self, dim: &TorusDim) -> OperatorMatrix {
        self.op.matrix(dim).scale(dim.tau_pow(self.tau_exponent))
    }
}

/// `T_a T_b = T_{a+b} tau^<a,b>`.
pub fn compose_tt(a: PhasePoint, b: PhasePoint) -> Composition {
    Composition {
        op: WeylOp::translation(a + b),
        tau_exponent: symplectic(a, b),
    }
}

/// `R_a R_b = T_{a-b} tau^{-<a,b>}`.
pub fn compose_rr(a: PhasePoint, b: PhasePoint) -> Composition {
    Composition {
        op: WeylOp::translation(a - b),
        tau_exponent: -symplectic(a, b),
    }
}

/// `T_a R_b = R_{a+b} tau^<a,b>`.
pub fn compose_tr(a: PhasePoint, b: PhasePoint) -> Composition {
    Composition {
        op: WeylOp::reflection(a + b),
        tau_exponent: symplectic(a, b),
    }
}

/// `R_a T_b = R_{a-b} tau^{-<a,b>}`.
pub fn compose_rt(a: PhasePoint, b: PhasePoint) -> Composition {
    Composition {
        op: WeylOp::reflection(a - b),
        tau_exponent: -symplectic(a, b),
    }
}

/// Dispatches on the kinds of the two factors.
pub fn compose(a: WeylOp, b: WeylOp) -> Composition {
    use WeylKind::*;
    match (a.kind, b.kind) {
        (Translation, Translation) => compose_tt(a.label, b.label),
        (Reflection, Reflection) => compose_rr(a.label, b.label),
        (Translation, Reflection) => compose_tr(a.label, b.label),
        (Reflection, Translation) => compose_rt(a.label, b.label),
    }
}

/// `tr(A R_x)` in `O(d)`.
pub fn trace_with_reflection(a: &CMatrix, dim: &TorusDim, x: PhasePoint) -> Complex64 {
    let d = dim.d();
    (0..d as i64)
        .map(|j| a[(wrap(-j, d), wrap(j + x.q, d))] * dim.tau_pow((2 * j + x.q) * x.p))
        .sum()
}

/// `tr(A T_xi^dag)` in `O(d)`.
pub fn trace_with_translation_adjoint(a: &CMatrix, dim: &TorusDim, xi: PhasePoint) -> Complex64 {
    let d = dim.d();
    (0..d as i64)
        .map(|j| a[(wrap(j + xi.q, d), j as usize)] * dim.tau_pow(-(2 * j + xi.q) * xi.p))
        .sum()
}

/// `R_x psi` in `O(d)`.
pub fn apply_reflection(dim: &TorusDim, x: PhasePoint, psi: &[Complex64]) -> Vec<Complex64> {
    let d = dim.d();
    let mut out = vec![ZERO; d];
    for j in 0..d as i64 {
        out[wrap(j + x.q, d)] += dim.tau_pow((2 * j + x.q) * x.p) * psi[wrap(-j, d)];
    }
    out
}

/// `T_xi psi` in `O(d)`.
pub fn apply_translation(dim: &TorusDim, xi: PhasePoint, psi: &[Complex64]) -> Vec<Complex64> {
    let d = dim.d();
    let mut out = vec![ZERO; d];
    for j in 0..d as i64 {
        out[wrap(j + xi.q, d)] += dim.tau_pow((2 * j + xi.q) * xi.p) * psi[j as usize];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::half_period_sign;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_point(rng: &mut impl Rng, n: i64) -> PhasePoint {
        PhasePoint::new(rng.random_range(-n..2 * n), rng.random_range(-n..2 * n))
    }

    #[test]
    fn zero_translation_is_identity() {
        for d in 1..6 {
            let dim = TorusDim::new(d);
            let t = translation(&dim, PhasePoint::ORIGIN);
            assert_eq!(t, OperatorMatrix::identity(&dim));
        }
    }

    #[test]
    fn unit_translations_are_schwinger_operators() {
        for d in 1..7 {
            let dim = TorusDim::new(d);
            let v = translation(&dim, PhasePoint::new(1, 0));
            let u = translation(&dim, PhasePoint::new(0, 1));
            for r in 0..d {
                for col in 0..d {
                    let expect_v = if r == (col + 1) % d { c(1.0) } else { c(0.0) };
                    assert!((v.get(r, col) - expect_v).norm() < 1e-15);
                    let expect_u = if r == col { dim.tau_pow(2 * r as i64) } else { c(0.0) };
                    assert!((u.get(r, col) - expect_u).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn parity_for_d3_is_anticyclic_permutation() {
        let dim = TorusDim::new(3);
        let r = reflection(&dim, PhasePoint::ORIGIN);
        let mut expect = CMatrix::zeros(3, 3);
        expect[(0, 0)] = c(1.0);
        expect[(1, 2)] = c(1.0);
        expect[(2, 1)] = c(1.0);
        assert_eq!(r.matrix(), &expect);
    }

    #[test]
    fn reflections_are_hermitian_unitary_and_shifted_parity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in 1..9 {
            let dim = TorusDim::new(d);
            let parity = reflection(&dim, PhasePoint::ORIGIN);
            for _ in 0..10 {
                let x = random_point(&mut rng, 2 * d as i64);
                let r = reflection(&dim, x);
                assert!(r.hermiticity_defect() < 1e-12);
                assert!(r.unitarity_defect() < 1e-12);
                let tr = &translation(&dim, x) * &parity;
                assert!(tr.max_abs_diff(&r) < 1e-12);
                let t_again = &r * &parity;
                assert!(t_again.max_abs_diff(&translation(&dim, x)) < 1e-12);
            }
        }
    }

    #[test]
    fn reflection_from_translations_matches() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [1, 2, 3, 4, 5, 8] {
            let dim = TorusDim::new(d);
            let parity_sum = reflection_from_translations(&dim, PhasePoint::ORIGIN);
            assert!(parity_sum.max_abs_diff(&reflection(&dim, PhasePoint::ORIGIN)) < 1e-10);
            for _ in 0..4 {
                let x = random_point(&mut rng, 2 * d as i64);
                let err = reflection_from_translations(&dim, x).max_abs_diff(&reflection(&dim, x));
                assert!(err < 1e-10, "d={d} x={x} err={err}");
            }
        }
        let dim = TorusDim::new(4);
        let x = PhasePoint::new(1, 1);
        assert!(reflection_from_translations(&dim, x).max_abs_diff(&reflection(&dim, x)) < 1e-10);
    }

    #[test]
    fn reflection_sum_is_identity() {
        for d in 1..6 {
            let dim = TorusDim::new(d);
            let mut acc = OperatorMatrix::zeros(&dim);
            for x in dim.lattice() {
                acc = &acc + &reflection(&dim, x);
            }
            let acc = acc.scale(c(1.0 / dim.two_d() as f64));
            assert!(acc.max_abs_diff(&OperatorMatrix::identity(&dim)) < 1e-12);
        }
    }

    #[test]
    fn trivial_compositions() {
        let xi = PhasePoint::new(3, -5);
        let c1 = compose_tt(xi, -xi);
        assert_eq!(c1.op, WeylOp::translation(PhasePoint::ORIGIN));
        assert_eq!(c1.tau_exponent, 0);
        let c2 = compose_rr(xi, xi);
        assert_eq!(c2.op, WeylOp::translation(PhasePoint::ORIGIN));
        assert_eq!(c2.tau_exponent, 0);
    }

    #[test]
    fn group_laws_exhaustive_small_d() {
        for d in 1..=4 {
            let dim = TorusDim::new(d);
            let labels: Vec<_> = dim.lattice().collect();
            let mats_t: Vec<_> = labels.iter().map(|&x| translation(&dim, x)).collect();
            let mats_r: Vec<_> = labels.iter().map(|&x| reflection(&dim, x)).collect();
            for (i, &a) in labels.iter().enumerate() {
                for (j, &b) in labels.iter().enumerate() {
                    for (op_a, op_b, ma, mb) in [
                        (WeylOp::translation(a), WeylOp::translation(b), &mats_t[i], &mats_t[j]),
                        (WeylOp::reflection(a), WeylOp::reflection(b), &mats_r[i], &mats_r[j]),
                        (WeylOp::translation(a), WeylOp::reflection(b), &mats_t[i], &mats_r[j]),
                        (WeylOp::reflection(a), WeylOp::translation(b), &mats_r[i], &mats_t[j]),
                    ] {
                        let prod = ma * mb;
                        let sym = compose(op_a, op_b).matrix(&dim);
                        assert!(prod.max_abs_diff(&sym) < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn periodicity_and_half_periodicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in 1..8 {
            let dim = TorusDim::new(d);
            let di = d as i64;
            for _ in 0..6 {
                let v = random_point(&mut rng, 2 * di);
                let w = random_point(&mut rng, 3);
                assert_eq!(translation(&dim, v + (2 * di) * w), translation(&dim, v));
                assert_eq!(reflection(&dim, v + (2 * di) * w), reflection(&dim, v));
                for chi in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                    let chi = PhasePoint::new(chi.0, chi.1);
                    let s = c(half_period_sign(d, v, chi));
                    let t = translation(&dim, v + di * chi);
                    assert!(t.max_abs_diff(&translation(&dim, v).scale(s)) < 1e-12);
                    let r = reflection(&dim, v + di * chi);
                    assert!(r.max_abs_diff(&reflection(&dim, v).scale(s)) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn schwinger_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for d in 1..8 {
            let dim = TorusDim::new(d);
            let v = schwinger_v(&dim);
            let u = schwinger_u(&dim);
            let parity = reflection(&dim, PhasePoint::ORIGIN);
            for _ in 0..5 {
                let x = PhasePoint::new(rng.random_range(0..2 * d as u64) as i64, rng.random_range(0..2 * d as u64) as i64);
                let vu = &v.pow(x.q as u64) * &u.pow(x.p as u64);
                let t = vu.scale(dim.tau_pow(x.q * x.p));
                assert!(t.max_abs_diff(&translation(&dim, x)) < 1e-12);
                let r = &t * &parity;
                assert!(r.max_abs_diff(&reflection(&dim, x)) < 1e-12);
            }
        }
    }

    #[test]
    fn fast_traces_match_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for d in 1..7 {
            let dim = TorusDim::new(d);
            let a = CMatrix::from_fn(d, d, |_, _| Complex64::new(rng.random(), rng.random()));
            let psi: Vec<Complex64> = (0..d).map(|_| Complex64::new(rng.random(), rng.random())).collect();
            for x in dim.lattice() {
                let r = reflection(&dim, x);
                let t = translation(&dim, x);
                let dense_r = (&a * r.matrix()).trace();
                let dense_t = (&a * t.matrix().adjoint()).trace();
                assert!((trace_with_reflection(&a, &dim, x) - dense_r).norm() < 1e-12);
                assert!((trace_with_translation_adjoint(&a, &dim, x) - dense_t).norm() < 1e-12);
                let rp = r.apply(&psi);
                let tp = t.apply(&psi);
                for (u, v) in apply_reflection(&dim, x, &psi).iter().zip(&rp) {
                    assert!((u - v).norm() < 1e-12);
                }
                for (u, v) in apply_translation(&dim, x, &psi).iter().zip(&tp) {
                    assert!((u - v).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn constructor_rejects_wrong_shape() {
        let dim = TorusDim::new(3);
        assert!(matches!(
            OperatorMatrix::new(&dim, CMatrix::zeros(2, 2)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            OperatorMatrix::new(&dim, CMatrix::zeros(3, 2)),
            Err(Error::NotSquare { .. })
        ));
    }
}
