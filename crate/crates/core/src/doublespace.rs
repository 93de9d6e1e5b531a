//! Superoperators and their double phase space representations.
//!
//! A superoperator acts linearly on operators. Operators are flattened by
//! column stacking, `vec(C)[i + d j] = C[i, j]`, so the Choi product
//! `A • B : C -> A C B` has the `d^2 x d^2` matrix `B^T (x) A`.
//!
//! Super-translations and super-reflections are labelled by points
//! `X = (x, xi)` of `Z_d^4`:
//!
//! ```text
//! T_{x,xi} = T_{x+xi} • T_{x-xi}^dag        R_{x,xi} = R_{x+xi} • R_{x-xi}
//! <<X, Y>> = <xi_X, x_Y> + <x_X, xi_Y>
//! ```
//!
//! and satisfy the Weyl-Heisenberg laws of two degrees of freedom with
//! `eta = tau^2` in place of `tau`.
//!
//! For odd `d` the `d^4` super-reflections form a complete orthogonal basis.
//! For even `d` the map `(x, xi) -> (x + xi, x - xi)` is four-to-one on
//! `Z_d^4`, the family only spans a quarter of the superoperator space, and
//! [`double_reconstruct`] refuses to run.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{half_period_sign, symplectic, PhasePoint, TorusDim};
use crate::phase_repr::{center_repr, ArrayKind, PhaseArray};
use crate::weylops::{max_abs_diff, reflection, translation, CMatrix, OperatorMatrix, WeylOp};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A point of the double lattice `Z_d^4`, both halves reduced mod `d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DoublePoint {
    pub x: PhasePoint,
    pub xi: PhasePoint,
}

impl DoublePoint {
    pub fn new(dim: &TorusDim, x: PhasePoint, xi: PhasePoint) -> Self {
        DoublePoint {
            x: x.reduced(dim.d()),
            xi: xi.reduced(dim.d()),
        }
    }

    pub const ORIGIN: DoublePoint = DoublePoint {
        x: PhasePoint::ORIGIN,
        xi: PhasePoint::ORIGIN,
    };

    /// All `d^4` points in storage order.
    pub fn all(dim: &TorusDim) -> impl Iterator<Item = DoublePoint> + Clone + '_ {
        dim.quadrant()
            .flat_map(move |x| dim.quadrant().map(move |xi| DoublePoint { x, xi }))
    }

    pub fn index(&self, dim: &TorusDim) -> usize {
        let d = dim.d() as i64;
        let r = |v: i64| v.rem_euclid(d);
        (((r(self.x.q) * d + r(self.x.p)) * d + r(self.xi.q)) * d + r(self.xi.p)) as usize
    }

    pub fn add(&self, dim: &TorusDim, other: &DoublePoint) -> DoublePoint {
        DoublePoint::new(dim, self.x + other.x, self.xi + other.xi)
    }

    pub fn sub(&self, dim: &TorusDim, other: &DoublePoint) -> DoublePoint {
        DoublePoint::new(dim, self.x - other.x, self.xi - other.xi)
    }

    /// Canonical coordinates `(Q1, Q2, P1, P2) = (x_q, x_p, xi_p, -xi_q)`.
    pub fn canonical(&self) -> [i64; 4] {
        [self.x.q, self.x.p, self.xi.p, -self.xi.q]
    }
}

impl fmt::Display for DoublePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}; {}]", self.x, self.xi)
    }
}

/// `<<X, Y>> = <xi_X, x_Y> + <x_X, xi_Y>`.
pub fn double_symplectic(a: &DoublePoint, b: &DoublePoint) -> i64 {
    symplectic(a.xi, b.x) + symplectic(a.x, b.xi)
}

/// Where a superoperator came from; informational only.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Generic,
    UnitaryConjugation,
    Kraus,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::Generic => "generic",
            Provenance::UnitaryConjugation => "unitary-conjugation",
            Provenance::Kraus => "kraus",
        }
    }
}

/// A `d^2 x d^2` matrix acting on column-stacked operators.
#[derive(Clone, PartialEq)]
pub struct SuperOperator {
    dim: TorusDim,
    m: CMatrix,
    provenance: Provenance,
}

impl fmt::Debug for SuperOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SuperOperator(d = {}, {})", self.dim.d(), self.provenance.name())
    }
}

impl SuperOperator {
    pub fn new(dim: &TorusDim, m: CMatrix) -> Result<Self> {
        let n = dim.d() * dim.d();
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.nrows(),
            });
        }
        Ok(SuperOperator {
            dim: dim.clone(),
            m,
            provenance: Provenance::Generic,
        })
    }

    pub fn identity(dim: &TorusDim) -> Self {
        let n = dim.d() * dim.d();
        SuperOperator {
            dim: dim.clone(),
            m: CMatrix::identity(n, n),
            provenance: Provenance::Generic,
        }
    }

    pub fn dim(&self) -> &TorusDim {
        &self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn with_provenance(mut self, p: Provenance) -> Self {
        self.provenance = p;
        self
    }

    /// Superoperator trace, the matrix trace of the `d^2 x d^2` realization.
    pub fn trace(&self) -> Complex64 {
        self.m.trace()
    }

    pub fn adjoint(&self) -> SuperOperator {
        SuperOperator {
            dim: self.dim.clone(),
            m: self.m.adjoint(),
            provenance: Provenance::Generic,
        }
    }

    pub fn compose(&self, other: &SuperOperator) -> SuperOperator {
        SuperOperator {
            dim: self.dim.clone(),
            m: &self.m * &other.m,
            provenance: Provenance::Generic,
        }
    }

    pub fn scale(&self, s: Complex64) -> SuperOperator {
        SuperOperator {
            dim: self.dim.clone(),
            m: &self.m * s,
            provenance: self.provenance,
        }
    }

    pub fn max_abs_diff(&self, other: &SuperOperator) -> f64 {
        max_abs_diff(&self.m, &other.m)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        max_abs_diff(&self.m, &self.m.adjoint())
    }

    /// `S(C)`.
    pub fn apply(&self, c: &OperatorMatrix) -> OperatorMatrix {
        let d = self.dim.d();
        let v = vec_op(c.matrix());
        let out = &self.m * v;
        let m = CMatrix::from_fn(d, d, |i, j| out[i + d * j]);
        OperatorMatrix::new(&self.dim, m).expect("square by construction")
    }

    /// Choi matrix `J = sum_{ij} E_ij (x) S(E_ij)`, indexed `(i d + k, j d + l)`.
    pub fn choi_matrix(&self) -> CMatrix {
        let d = self.dim.d();
        let mut j = CMatrix::zeros(d * d, d * d);
        for a in 0..d {
            for b in 0..d {
                let mut e = CMatrix::zeros(d, d);
                e[(a, b)] = Complex64::new(1.0, 0.0);
                let out = self.apply(&OperatorMatrix::new(&self.dim, e).expect("square"));
                for k in 0..d {
                    for l in 0..d {
                        j[(a * d + k, b * d + l)] = out.get(k, l);
                    }
                }
            }
        }
        j
    }

    /// Smallest eigenvalue of the Hermitian part of the Choi matrix; a
    /// diagnostic for complete positivity.
    pub fn choi_min_eigenvalue(&self) -> f64 {
        let j = self.choi_matrix();
        let h = (&j + j.adjoint()).map(|z| z * 0.5);
        h.symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

fn vec_op(c: &CMatrix) -> nalgebra::DVector<Complex64> {
    let d = c.nrows();
    nalgebra::DVector::from_fn(d * d, |k, _| c[(k % d, k / d)])
}

/// `A • B`, the map `C -> A C B`.
pub fn choi_product(a: &OperatorMatrix, b: &OperatorMatrix) -> SuperOperator {
    let dim = a.dim();
    let d = dim.d();
    let (am, bm) = (a.matrix(), b.matrix());
    let m = CMatrix::from_fn(d * d, d * d, |r, c| {
        let (i, j) = (r % d, r / d);
        let (k, l) = (c % d, c / d);
        bm[(l, j)] * am[(i, k)]
    });
    SuperOperator::new(dim, m).expect("size by construction")
}

/// `|A>><<B|`, the map `C -> A tr(B^dag C)`.
pub fn dket(a: &OperatorMatrix, b: &OperatorMatrix) -> SuperOperator {
    let (va, vb) = (vec_op(a.matrix()), vec_op(b.matrix()));
    SuperOperator::new(a.dim(), &va * vb.adjoint()).expect("size by construction")
}

/// `U • U^dag`.
pub fn unitary_superop(u: &OperatorMatrix) -> SuperOperator {
    choi_product(u, &u.adjoint()).with_provenance(Provenance::UnitaryConjugation)
}

pub fn super_translation(dim: &TorusDim, x: &DoublePoint) -> SuperOperator {
    let a = translation(dim, x.x + x.xi);
    let b = translation(dim, x.x - x.xi).adjoint();
    choi_product(&a, &b)
}

pub fn super_reflection(dim: &TorusDim, x: &DoublePoint) -> SuperOperator {
    let a = reflection(dim, x.x + x.xi);
    let b = reflection(dim, x.x - x.xi);
    choi_product(&a, &b)
}

/// Nonzero entry of each column of a monomial matrix: `(row, value)`.
fn monomial(m: &CMatrix) -> Vec<(usize, Complex64)> {
    (0..m.ncols())
        .map(|c| {
            (0..m.nrows())
                .find(|&r| m[(r, c)] != ZERO)
                .map(|r| (r, m[(r, c)]))
                .expect("monomial matrix has one nonzero entry per column")
        })
        .collect()
}

/// Sparse form of `A • B` for monomial `A`, `B`: `(row, col, value)` of the
/// `d^2` nonzero entries of `B^T (x) A`.
fn monomial_choi(a: &CMatrix, b: &CMatrix) -> Vec<(usize, usize, Complex64)> {
    let d = a.nrows();
    let ma = monomial(a);
    let mb = monomial(b);
    let mut out = Vec::with_capacity(d * d);
    for (k, &(ra, va)) in ma.iter().enumerate() {
        for (j, &(rb, vb)) in mb.iter().enumerate() {
            // (B^T)[j, rb] = B[rb, j] = vb, A[ra, k] = va.
            out.push((ra + d * j, k + d * rb, va * vb));
        }
    }
    out
}

fn super_reflection_sparse(dim: &TorusDim, x: &DoublePoint) -> Vec<(usize, usize, Complex64)> {
    monomial_choi(
        reflection(dim, x.x + x.xi).matrix(),
        reflection(dim, x.x - x.xi).matrix(),
    )
}

fn super_translation_sparse(dim: &TorusDim, x: &DoublePoint) -> Vec<(usize, usize, Complex64)> {
    monomial_choi(
        translation(dim, x.x + x.xi).matrix(),
        &translation(dim, x.x - x.xi).matrix().adjoint(),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DoubleKind {
    DoubleCenter,
    DoubleChord,
}

impl DoubleKind {
    pub fn name(self) -> &'static str {
        match self {
            DoubleKind::DoubleCenter => "double-center",
            DoubleKind::DoubleChord => "double-chord",
        }
    }
}

/// A complex function on `Z_d^4`.
#[derive(Clone, PartialEq)]
pub struct DoublePhaseArray {
    dim: TorusDim,
    kind: DoubleKind,
    entries: Vec<Complex64>,
}

impl fmt::Debug for DoublePhaseArray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DoublePhaseArray({}, d = {})", self.kind.name(), self.dim.d())
    }
}

impl DoublePhaseArray {
    pub fn new(dim: &TorusDim, kind: DoubleKind, entries: Vec<Complex64>) -> Result<Self> {
        let n = dim.d().pow(4);
        if entries.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: entries.len(),
            });
        }
        Ok(DoublePhaseArray {
            dim: dim.clone(),
            kind,
            entries,
        })
    }

    fn from_fn<F>(dim: &TorusDim, kind: DoubleKind, f: F) -> Self
    where
        F: Fn(&DoublePoint) -> Complex64 + Sync + Send,
    {
        let pts: Vec<DoublePoint> = DoublePoint::all(dim).collect();
        let entries = pts.par_iter().map(f).collect();
        DoublePhaseArray {
            dim: dim.clone(),
            kind,
            entries,
        }
    }

    pub fn dim(&self) -> &TorusDim {
        &self.dim
    }

    pub fn kind(&self) -> DoubleKind {
        self.kind
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, x: &DoublePoint) -> Complex64 {
        self.entries[x.index(&self.dim)]
    }

    pub fn iter(&self) -> impl Iterator<Item = (DoublePoint, Complex64)> + '_ {
        DoublePoint::all(&self.dim).zip(self.entries.iter().copied())
    }

    pub fn max_abs_diff(&self, other: &DoublePhaseArray) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.entries.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }
}

/// `S(X) = Tr(R_X S)`.
pub fn double_center_repr(s: &SuperOperator) -> DoublePhaseArray {
    let dim = s.dim().clone();
    let m = s.matrix();
    DoublePhaseArray::from_fn(&dim, DoubleKind::DoubleCenter, |x| {
        super_reflection_sparse(&dim, x)
            .into_iter()
            .map(|(r, c, v)| v * m[(c, r)])
            .sum()
    })
}

/// `S̃(X) = Tr(T_X^dag S)`.
pub fn double_chord_repr(s: &SuperOperator) -> DoublePhaseArray {
    let dim = s.dim().clone();
    let m = s.matrix();
    DoublePhaseArray::from_fn(&dim, DoubleKind::DoubleChord, |x| {
        super_translation_sparse(&dim, x)
            .into_iter()
            .map(|(r, c, v)| v.conj() * m[(r, c)])
            .sum()
    })
}

/// `S = (1/d^2) sum_X S(X) R_X` or `(1/d^2) sum_X S̃(X) T_X`. Odd `d` only.
pub fn double_reconstruct(arr: &DoublePhaseArray) -> Result<SuperOperator> {
    let dim = arr.dim();
    let d = dim.d();
    if d.is_multiple_of(2) {
        return Err(Error::IncompleteDoubleBasis(d));
    }
    let mut m = CMatrix::zeros(d * d, d * d);
    for (x, c) in arr.iter() {
        let sparse = match arr.kind() {
            DoubleKind::DoubleCenter => super_reflection_sparse(dim, &x),
            DoubleKind::DoubleChord => super_translation_sparse(dim, &x),
        };
        for (r, col, v) in sparse {
            m[(r, col)] += c * v;
        }
    }
    let scale = Complex64::new(1.0 / (d * d) as f64, 0.0);
    SuperOperator::new(dim, m * scale)
}

/// Tolerance on `max |U^dag U - 1|` for unitary inputs.
pub const UNITARY_TOL: f64 = 1e-8;

fn check_unitary(u: &OperatorMatrix) -> Result<()> {
    let deviation = u.unitarity_defect();
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}

/// Double center array of `U • U^dag` in product form,
/// `U(x, xi) = U(x + xi) U*(x - xi)` with `U(v) = tr(U R_v)`.
pub fn unitary_double_center(u: &OperatorMatrix) -> Result<DoublePhaseArray> {
    check_unitary(u)?;
    let uc = center_repr(u);
    Ok(product_form(&uc))
}

fn product_form(uc: &PhaseArray) -> DoublePhaseArray {
    let dim = uc.dim().clone();
    DoublePhaseArray::from_fn(&dim, DoubleKind::DoubleCenter, |x| {
        uc.get(x.x + x.xi) * uc.get(x.x - x.xi).conj()
    })
}

/// `sum_j K_j • K_j^dag`.
pub fn kraus_superop(ops: &[OperatorMatrix]) -> Result<SuperOperator> {
    let first = ops.first().ok_or(Error::EmptyList)?;
    let dim = first.dim().clone();
    for k in ops {
        if k.dim().d() != dim.d() {
            return Err(Error::DimensionMismatch {
                expected: dim.d(),
                found: k.dim().d(),
            });
        }
    }
    let defect = trace_preservation_defect(ops);
    if defect > 1e-10 {
        log::warn!("Kraus set is not trace preserving: max |sum K^dag K - 1| = {defect:e}");
    }
    let n = dim.d() * dim.d();
    let mut m = CMatrix::zeros(n, n);
    for k in ops {
        m += choi_product(k, &k.adjoint()).matrix();
    }
    Ok(SuperOperator::new(&dim, m)?.with_provenance(Provenance::Kraus))
}

/// `max |sum_j K_j^dag K_j - 1|`.
pub fn trace_preservation_defect(ops: &[OperatorMatrix]) -> f64 {
    let Some(first) = ops.first() else {
        return f64::INFINITY;
    };
    let d = first.dim().d();
    let mut acc = CMatrix::zeros(d, d);
    for k in ops {
        acc += k.matrix().adjoint() * k.matrix();
    }
    max_abs_diff(&acc, &CMatrix::identity(d, d))
}

/// Kernel taking Wigner functions through a channel:
///
/// ```text
/// W'(x+) = (1/d) sum_{x- in Z_d^2} K(x+, x-) W(x-),
/// K(x+, x-) = sum_j tr(R_{x+} K_j R_{x-} K_j^dag)
/// ```
///
/// `K` is evaluated from the Weyl symbols `K_j(v) = tr(K_j R_v)`. When
/// `x+ = x- (mod 2)` the center `x = (x+ + x-)/2` and half chord
/// `x1 = (x+ - x-)/2` are integers and
///
/// ```text
/// K = (1/d) sum_{xi in Z_d^2} K_j(x + xi) K_j*(x - xi) eta^{-<x1, xi>}.
/// ```
///
/// For odd `d` a half-period shift of `x-` always restores matching parity.
/// For even `d` and mismatched parity the same sum is written on the `2d`
/// lattice, `(1/4d) sum_z K_j(x- + z) K_j*(x+ - z) tau^{<x- - x+, z>}`.
///
/// Only the `d x d` fundamental cells are stored; other labels follow from
/// the half-period signs.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerPropagator {
    dim: TorusDim,
    cells: Vec<f64>,
}

impl WignerPropagator {
    pub fn from_unitary(u: &OperatorMatrix) -> Result<Self> {
        check_unitary(u)?;
        Ok(Self::from_symbols(u.dim(), &[center_repr(u)]))
    }

    pub fn from_kraus(ops: &[OperatorMatrix]) -> Result<Self> {
        let sup = kraus_superop(ops)?;
        let symbols: Vec<PhaseArray> = ops.iter().map(center_repr).collect();
        Ok(Self::from_symbols(sup.dim(), &symbols))
    }

    fn from_symbols(dim: &TorusDim, symbols: &[PhaseArray]) -> Self {
        let d = dim.d();
        let cells_idx: Vec<(PhasePoint, PhasePoint)> = dim
            .quadrant()
            .flat_map(|xp| dim.quadrant().map(move |xm| (xp, xm)))
            .collect();
        let cells = cells_idx
            .par_iter()
            .map(|&(xp, xm)| {
                symbols
                    .iter()
                    .map(|s| kernel_entry(dim, s, xp, xm))
                    .sum::<Complex64>()
                    .re
            })
            .collect();
        debug_assert_eq!(d.pow(4), cells_idx.len());
        WignerPropagator {
            dim: dim.clone(),
            cells,
        }
    }

    pub fn dim(&self) -> &TorusDim {
        &self.dim
    }

    /// `K(x+, x-)` for arbitrary labels.
    pub fn kernel(&self, x_plus: PhasePoint, x_minus: PhasePoint) -> f64 {
        let (cp, sp) = to_cell(&self.dim, x_plus);
        let (cm, sm) = to_cell(&self.dim, x_minus);
        let d = self.dim.d() as i64;
        let idx = ((cp.q * d + cp.p) * d * d + cm.q * d + cm.p) as usize;
        sp * sm * self.cells[idx]
    }

    /// Propagated Wigner (center) array.
    pub fn propagate(&self, w: &PhaseArray) -> Result<PhaseArray> {
        if w.kind() != ArrayKind::Center {
            return Err(Error::KindMismatch {
                expected: ArrayKind::Center.name(),
                found: w.kind().name(),
            });
        }
        if w.dim().d() != self.dim.d() {
            return Err(Error::DimensionMismatch {
                expected: self.dim.d(),
                found: w.dim().d(),
            });
        }
        let dim = self.dim.clone();
        let quad: Vec<PhasePoint> = dim.quadrant().collect();
        let norm = 1.0 / dim.d() as f64;
        Ok(PhaseArray::from_fn(&dim, ArrayKind::Center, |xp| {
            quad.iter()
                .map(|&xm| w.get(xm) * self.kernel(xp, xm))
                .sum::<Complex64>()
                * norm
        }))
    }
}

/// Splits a label into its fundamental-cell representative and the sign
/// relating the two.
fn to_cell(dim: &TorusDim, v: PhasePoint) -> (PhasePoint, f64) {
    let d = dim.d() as i64;
    let v = v.reduced(dim.two_d());
    let cell = PhasePoint::new(v.q % d, v.p % d);
    let w = PhasePoint::new(v.q / d, v.p / d);
    (cell, half_period_sign(dim.d(), cell, w))
}

fn kernel_entry(dim: &TorusDim, sym: &PhaseArray, xp: PhasePoint, xm: PhasePoint) -> Complex64 {
    let d = dim.d() as i64;
    let parity = PhasePoint::new((xp.q - xm.q).rem_euclid(2), (xp.p - xm.p).rem_euclid(2));
    if parity.is_origin() {
        return same_parity_kernel(dim, sym, xp, xm);
    }
    if d % 2 == 1 {
        // R_{xm + d w} = s R_{xm}, so K(xp, xm) = s K(xp, xm + d w).
        let s = half_period_sign(dim.d(), xm, parity);
        return same_parity_kernel(dim, sym, xp, xm + d * parity) * s;
    }
    let sum: Complex64 = dim
        .lattice()
        .map(|z| sym.get(xm + z) * sym.get(xp - z).conj() * dim.tau_pow(symplectic(xm - xp, z)))
        .sum();
    sum / (2 * dim.two_d()) as f64
}

fn same_parity_kernel(dim: &TorusDim, sym: &PhaseArray, xp: PhasePoint, xm: PhasePoint) -> Complex64 {
    let x = PhasePoint::new((xp.q + xm.q) / 2, (xp.p + xm.p) / 2);
    let x1 = PhasePoint::new((xp.q - xm.q) / 2, (xp.p - xm.p) / 2);
    let sum: Complex64 = dim
        .quadrant()
        .map(|xi| sym.get(x + xi) * sym.get(x - xi).conj() * dim.eta_pow(-symplectic(x1, xi)))
        .sum();
    sum / dim.d() as f64
}

/// Which Choi product is being expanded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChoiKind {
    Reflection,
    Translation,
}

/// One term `coeff |ket>><<bra|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChoiTerm {
    pub ket: WeylOp,
    pub bra: WeylOp,
    pub coeff: Complex64,
}

/// Expansion of a Choi monomial over the conjugate basis `|A>><<B|`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiExpansion {
    pub dim: TorusDim,
    pub kind: ChoiKind,
    pub x_plus: PhasePoint,
    pub x_minus: PhasePoint,
    pub terms: Vec<ChoiTerm>,
}

impl ChoiExpansion {
    /// The Choi product being expanded, built directly.
    pub fn monomial(&self) -> SuperOperator {
        match self.kind {
            ChoiKind::Reflection => choi_product(
                &reflection(&self.dim, self.x_plus),
                &reflection(&self.dim, self.x_minus),
            ),
            ChoiKind::Translation => choi_product(
                &translation(&self.dim, self.x_plus),
                &translation(&self.dim, self.x_minus).adjoint(),
            ),
        }
    }

    /// The expansion summed back into a matrix.
    pub fn to_superop(&self) -> SuperOperator {
        let d = self.dim.d();
        let mut m = CMatrix::zeros(d * d, d * d);
        for t in &self.terms {
            m += dket(&t.ket.matrix(&self.dim), &t.bra.matrix(&self.dim)).matrix() * t.coeff;
        }
        SuperOperator::new(&self.dim, m).expect("size by construction")
    }
}

/// Rewrites `R_{x+} • R_{x-}` (or `T_{x+} • T_{x-}^dag`) in the conjugate
/// basis:
///
/// ```text
/// R_{x+xi} • R_{x-xi}       = (1/d) sum_y |R_{x+y}>><<R_{x-y}| eta^{-<y,xi>}
/// T_{x+xi} • T_{x-xi}^dag   = (1/d) sum_y |T_{y+xi}>><<T_{y-xi}| eta^{-<y,x>}
/// ```
///
/// with `x = (x+ + x-)/2`, `xi = (x+ - x-)/2`. When the labels differ in
/// parity and `d` is odd, `x-` is first moved by half a period (picking up a
/// sign); for even `d` no integer center exists and the call fails.
pub fn choi_convert(
    dim: &TorusDim,
    x_plus: PhasePoint,
    x_minus: PhasePoint,
    kind: ChoiKind,
) -> Result<ChoiExpansion> {
    let d = dim.d() as i64;
    let parity = PhasePoint::new((x_plus.q - x_minus.q).rem_euclid(2), (x_plus.p - x_minus.p).rem_euclid(2));
    let (xm, sign) = if parity.is_origin() {
        (x_minus, 1.0)
    } else if d % 2 == 1 {
        (x_minus + d * parity, half_period_sign(dim.d(), x_minus, parity))
    } else {
        return Err(Error::ParityMismatch(x_plus.to_string(), x_minus.to_string()));
    };
    let x = PhasePoint::new((x_plus.q + xm.q) / 2, (x_plus.p + xm.p) / 2);
    let xi = PhasePoint::new((x_plus.q - xm.q) / 2, (x_plus.p - xm.p) / 2);
    let norm = sign / d as f64;
    let terms = dim
        .quadrant()
        .map(|y| match kind {
            ChoiKind::Reflection => ChoiTerm {
                ket: WeylOp::reflection(x + y),
                bra: WeylOp::reflection(x - y),
                coeff: dim.eta_pow(-symplectic(y, xi)) * norm,
            },
            ChoiKind::Translation => ChoiTerm {
                ket: WeylOp::translation(y + xi),
                bra: WeylOp::translation(y - xi),
                coeff: dim.eta_pow(-symplectic(y, x)) * norm,
            },
        })
        .collect();
    Ok(ChoiExpansion {
        dim: dim.clone(),
        kind,
        x_plus,
        x_minus,
        terms,
    })
}

/// Largest deviation from `E_{k,i} • E_{l,j}^dag = |E_{k,l}>><<E_{i,j}|` over
/// all index quadruples, `E_{k,i} = |q_k><q_i|`.
pub fn transition_basis_residual(dim: &TorusDim) -> f64 {
    let d = dim.d();
    let e = |a: usize, b: usize| {
        let mut m = CMatrix::zeros(d, d);
        m[(a, b)] = Complex64::new(1.0, 0.0);
        OperatorMatrix::new(dim, m).expect("square")
    };
    let mut worst = 0.0f64;
    for k in 0..d {
        for i in 0..d {
            for l in 0..d {
                for j in 0..d {
                    let lhs = choi_product(&e(k, i), &e(l, j).adjoint());
                    let rhs = dket(&e(k, l), &e(i, j));
                    worst = worst.max(lhs.max_abs_diff(&rhs));
                }
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, random_kraus, random_operator, random_unitary, rng_from_seed};
    use rand::Rng;

    fn random_double(dim: &TorusDim, rng: &mut impl Rng) -> DoublePoint {
        let n = dim.d() as i64;
        let mut r = || rng.random_range(0..n);
        DoublePoint::new(dim, PhasePoint::new(r(), r()), PhasePoint::new(r(), r()))
    }

    #[test]
    fn choi_product_acts_as_sandwich() {
        let mut rng = rng_from_seed(1);
        let dim = TorusDim::new(3);
        let a = random_operator(&dim, &mut rng);
        let b = random_operator(&dim, &mut rng);
        let c = random_operator(&dim, &mut rng);
        let direct = &(&a * &c) * &b;
        assert!(choi_product(&a, &b).apply(&c).max_abs_diff(&direct) < 1e-12);
        let u = random_unitary(&dim, &mut rng);
        let conj = &(&u * &c) * &u.adjoint();
        assert!(unitary_superop(&u).apply(&c).max_abs_diff(&conj) < 1e-12);
        let tr = (b.matrix().adjoint() * c.matrix()).trace();
        assert!(dket(&a, &b).apply(&c).max_abs_diff(&a.scale(tr)) < 1e-10);
        // Tr(A • B) = tr A tr B.
        let t = choi_product(&a, &b).trace();
        assert!((t - a.trace() * b.trace()).norm() < 1e-10);
    }

    #[test]
    fn super_translation_basics() {
        let mut rng = rng_from_seed(2);
        for d in 2..=4 {
            let dim = TorusDim::new(d);
            let id = super_translation(&dim, &DoublePoint::ORIGIN);
            assert!(id.max_abs_diff(&SuperOperator::identity(&dim)) < 1e-12);
            for _ in 0..5 {
                let x = random_double(&dim, &mut rng);
                let di = d as i64;
                let shifted = DoublePoint {
                    x: x.x + di * PhasePoint::new(1, -2),
                    xi: x.xi + di * PhasePoint::new(3, 1),
                };
                assert!(super_translation(&dim, &shifted).max_abs_diff(&super_translation(&dim, &x)) < 1e-12);
                assert!(super_reflection(&dim, &shifted).max_abs_diff(&super_reflection(&dim, &x)) < 1e-12);
                let r = super_reflection(&dim, &x);
                assert!(r.hermiticity_defect() < 1e-12);
                assert!(r.compose(&r).max_abs_diff(&SuperOperator::identity(&dim)) < 1e-12);
            }
        }
    }

    #[test]
    fn double_symplectic_form() {
        let mut rng = rng_from_seed(3);
        let dim = TorusDim::new(7);
        for _ in 0..50 {
            let a = random_double(&dim, &mut rng);
            let b = random_double(&dim, &mut rng);
            assert_eq!(double_symplectic(&a, &b), -double_symplectic(&b, &a));
            assert_eq!(double_symplectic(&DoublePoint::ORIGIN, &b), 0);
            let [q1, q2, p1, p2] = a.canonical();
            let [q1b, q2b, p1b, p2b] = b.canonical();
            // <<X, X'>> = Q'.P - P'.Q
            let canon = q1b * p1 + q2b * p2 - (p1b * q1 + p2b * q2);
            assert_eq!(double_symplectic(&a, &b), canon);
        }
    }

    #[test]
    fn composition_laws() {
        let mut rng = rng_from_seed(4);
        for d in 2..=5 {
            let dim = TorusDim::new(d);
            for _ in 0..10 {
                let a = random_double(&dim, &mut rng);
                let b = random_double(&dim, &mut rng);
                let k = double_symplectic(&a, &b);
                let (ta, tb) = (super_translation(&dim, &a), super_translation(&dim, &b));
                let (ra, rb) = (super_reflection(&dim, &a), super_reflection(&dim, &b));
                let sum = a.add(&dim, &b);
                let diff = a.sub(&dim, &b);
                let eta = |k: i64| dim.eta_pow(k);
                assert!(ta.compose(&tb).max_abs_diff(&super_translation(&dim, &sum).scale(eta(k))) < 1e-10);
                assert!(ra.compose(&rb).max_abs_diff(&super_translation(&dim, &diff).scale(eta(-k))) < 1e-10);
                assert!(ta.compose(&rb).max_abs_diff(&super_reflection(&dim, &sum).scale(eta(k))) < 1e-10);
                assert!(ra.compose(&tb).max_abs_diff(&super_reflection(&dim, &diff).scale(eta(-k))) < 1e-10);
            }
        }
    }

    #[test]
    fn reflection_from_super_translations() {
        for d in 2..=4 {
            let dim = TorusDim::new(d);
            let x = DoublePoint::new(&dim, PhasePoint::new(1, 0), PhasePoint::new(d as i64 - 1, 1));
            let n = d * d;
            let mut acc = CMatrix::zeros(n, n);
            for y in DoublePoint::all(&dim) {
                acc += super_translation(&dim, &y).matrix() * dim.eta_pow(double_symplectic(&x, &y));
            }
            let acc = SuperOperator::new(&dim, acc / Complex64::new((d * d) as f64, 0.0)).unwrap();
            assert!(acc.max_abs_diff(&super_reflection(&dim, &x)) < 1e-10);
        }
    }

    #[test]
    fn fast_double_reprs_match_dense_traces() {
        let mut rng = rng_from_seed(5);
        for d in 2..=4 {
            let dim = TorusDim::new(d);
            let n = d * d;
            let s = SuperOperator::new(&dim, crate::random::ginibre(&mut rng, n, n)).unwrap();
            let c = double_center_repr(&s);
            let ch = double_chord_repr(&s);
            for x in DoublePoint::all(&dim).step_by(3) {
                let dc = (super_reflection(&dim, &x).matrix() * s.matrix()).trace();
                let dt = (super_translation(&dim, &x).matrix().adjoint() * s.matrix()).trace();
                assert!((c.get(&x) - dc).norm() < 1e-10);
                assert!((ch.get(&x) - dt).norm() < 1e-10);
            }
            assert!((s.trace() - ch.get(&DoublePoint::ORIGIN)).norm() < 1e-10);
            let total: Complex64 = c.entries().iter().sum();
            assert!((s.trace() - total / (d * d) as f64).norm() < 1e-9);
        }
    }

    #[test]
    fn identity_superop_chord_is_delta() {
        let dim = TorusDim::new(3);
        let ch = double_chord_repr(&SuperOperator::identity(&dim));
        for (x, z) in ch.iter() {
            let expect = if x == DoublePoint::ORIGIN { 9.0 } else { 0.0 };
            assert!((z - expect).norm() < 1e-10, "{x}");
        }
    }

    #[test]
    fn reconstruction_odd_and_refusal_even() {
        let mut rng = rng_from_seed(6);
        for d in [1, 3, 5] {
            let dim = TorusDim::new(d);
            let n = d * d;
            let s = SuperOperator::new(&dim, crate::random::ginibre(&mut rng, n, n)).unwrap();
            let back_c = double_reconstruct(&double_center_repr(&s)).unwrap();
            let back_t = double_reconstruct(&double_chord_repr(&s)).unwrap();
            assert!(back_c.max_abs_diff(&s) < 1e-10);
            assert!(back_t.max_abs_diff(&s) < 1e-10);
        }
        let dim = TorusDim::new(4);
        let arr = double_center_repr(&SuperOperator::identity(&dim));
        assert_eq!(double_reconstruct(&arr), Err(Error::IncompleteDoubleBasis(4)));
    }

    #[test]
    fn hermitian_superop_has_real_double_center() {
        let mut rng = rng_from_seed(7);
        let dim = TorusDim::new(3);
        let n = 9;
        let g = crate::random::ginibre(&mut rng, n, n);
        let s = SuperOperator::new(&dim, &g + g.adjoint()).unwrap();
        assert!(double_center_repr(&s).max_imag() < 1e-10);
        let ch = double_chord_repr(&s);
        for x in DoublePoint::all(&dim) {
            let minus = DoublePoint::new(&dim, -x.x, -x.xi);
            assert!((ch.get(&minus) - ch.get(&x).conj()).norm() < 1e-10);
        }
    }

    #[test]
    fn unitary_product_form() {
        let mut rng = rng_from_seed(8);
        for d in 1..=4 {
            let dim = TorusDim::new(d);
            for u in [OperatorMatrix::identity(&dim), random_unitary(&dim, &mut rng)] {
                let prod = unitary_double_center(&u).unwrap();
                let direct = double_center_repr(&unitary_superop(&u));
                assert!(prod.max_abs_diff(&direct) < 1e-10);
            }
        }
        let dim = TorusDim::new(3);
        let not_u = random_operator(&dim, &mut rng);
        assert!(matches!(unitary_double_center(&not_u), Err(Error::NotUnitary { .. })));
        assert!(matches!(WignerPropagator::from_unitary(&not_u), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn propagator_matches_conjugation() {
        let mut rng = rng_from_seed(9);
        for d in 1..=5 {
            let dim = TorusDim::new(d);
            let u = random_unitary(&dim, &mut rng);
            let rho = random_density(&dim, 2, &mut rng);
            let prop = WignerPropagator::from_unitary(&u).unwrap();
            let out = prop.propagate(&rho.wigner()).unwrap();
            let direct = center_repr(&(&(&u * rho.operator()) * &u.adjoint()));
            assert!(out.max_abs_diff(&direct) < 1e-10, "d={d}");
            for xp in dim.lattice().step_by(5) {
                for xm in dim.lattice().step_by(3) {
                    let k = (reflection(&dim, xp).matrix() * u.matrix() * reflection(&dim, xm).matrix() * u.matrix().adjoint()).trace();
                    assert!((prop.kernel(xp, xm) - k.re).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn kraus_propagation_and_errors() {
        let mut rng = rng_from_seed(10);
        for d in 2..=4 {
            let dim = TorusDim::new(d);
            let ks = random_kraus(&dim, 2, &mut rng);
            let sup = kraus_superop(&ks).unwrap();
            assert_eq!(sup.provenance(), Provenance::Kraus);
            let rho = random_density(&dim, d, &mut rng);
            let mut direct = OperatorMatrix::zeros(&dim);
            for k in &ks {
                direct = &direct + &(&(k * rho.operator()) * &k.adjoint());
            }
            assert!(sup.apply(rho.operator()).max_abs_diff(&direct) < 1e-12);
            let prop = WignerPropagator::from_kraus(&ks).unwrap();
            let w = prop.propagate(&rho.wigner()).unwrap();
            assert!(w.max_abs_diff(&center_repr(&direct)) < 1e-10);
            let total = w.sum() / dim.two_d() as f64;
            assert!((total - 1.0).norm() < 1e-10);
            assert!(sup.choi_min_eigenvalue() > -1e-10);
            // Product form of the Kraus double center array.
            let dc = double_center_repr(&sup);
            let symbols: Vec<_> = ks.iter().map(center_repr).collect();
            for x in DoublePoint::all(&dim) {
                let v: Complex64 = symbols.iter().map(|s| s.get(x.x + x.xi) * s.get(x.x - x.xi).conj()).sum();
                assert!((dc.get(&x) - v).norm() < 1e-10);
            }
        }
        assert_eq!(kraus_superop(&[]), Err(Error::EmptyList));
        let mixed = vec![OperatorMatrix::identity(&TorusDim::new(2)), OperatorMatrix::identity(&TorusDim::new(3))];
        assert!(matches!(kraus_superop(&mixed), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn translation_covariance() {
        for d in 2..=5 {
            let dim = TorusDim::new(d);
            let rho = random_density(&dim, 2, &mut rng_from_seed(d as u64));
            let w = rho.wigner();
            for chi in dim.quadrant() {
                let prop = WignerPropagator::from_unitary(&translation(&dim, chi)).unwrap();
                let out = prop.propagate(&w).unwrap();
                for x in dim.lattice() {
                    assert!((out.get(x) - w.get(x - 2 * chi)).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn choi_conversions() {
        let mut rng = rng_from_seed(11);
        for d in 1..=5 {
            let dim = TorusDim::new(d);
            for _ in 0..6 {
                let n = dim.two_d() as i64;
                let xp = PhasePoint::new(rng.random_range(0..n), rng.random_range(0..n));
                let mut xm = PhasePoint::new(rng.random_range(0..n), rng.random_range(0..n));
                if d % 2 == 0 {
                    // Match parity so an integer center exists.
                    xm = PhasePoint::new(xm.q - (xm.q - xp.q).rem_euclid(2), xm.p - (xm.p - xp.p).rem_euclid(2));
                }
                for kind in [ChoiKind::Reflection, ChoiKind::Translation] {
                    let e = choi_convert(&dim, xp, xm, kind).unwrap();
                    assert!(e.to_superop().max_abs_diff(&e.monomial()) < 1e-10, "d={d} {kind:?}");
                }
            }
            assert!(transition_basis_residual(&dim) < 1e-14);
        }
        let dim = TorusDim::new(4);
        assert!(matches!(
            choi_convert(&dim, PhasePoint::new(1, 0), PhasePoint::ORIGIN, ChoiKind::Reflection),
            Err(Error::ParityMismatch(..))
        ));
    }
}
