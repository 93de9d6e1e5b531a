//! Integer phase-space lattice, the symplectic form and root-of-unity phases.
//!
//! A Hilbert space of dimension `d` lives on a unit torus whose positions and
//! momenta are quantized to multiples of `1/d`. Centers and half-chords between
//! such points fall on a lattice of half the spacing, so every label used in
//! this crate is an integer pair on `Z_2d x Z_2d`; the physical coordinate of a
//! label `(q, p)` is `(q, p) / 2d`.
//!
//! All phases that appear are integer powers of `tau = exp(i pi / d)`. They are
//! read from a precomputed table indexed by the exponent reduced mod `2d`, so
//! chains of group-law products never accumulate rounding drift.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

/// Hilbert space dimension together with its phase table.
#[derive(Clone)]
pub struct TorusDim {
    d: usize,
    table: Arc<[Complex64]>,
}

impl TorusDim {
    /// Panics if `d == 0`.
    pub fn new(d: usize) -> Self {
        assert!(d >= 1, "torus dimension must be at least 1");
        let two_d = 2 * d;
        let table: Vec<Complex64> = (0..two_d)
            .map(|k| {
                // Quarter turns are written out exactly.
                if k == 0 {
                    Complex64::new(1.0, 0.0)
                } else if k == d {
                    Complex64::new(-1.0, 0.0)
                } else if 2 * k == d {
                    Complex64::new(0.0, 1.0)
                } else if 2 * k == 3 * d {
                    Complex64::new(0.0, -1.0)
                } else {
                    let angle = std::f64::consts::PI * k as f64 / d as f64;
                    Complex64::new(angle.cos(), angle.sin())
                }
            })
            .collect();
        TorusDim {
            d,
            table: table.into(),
        }
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn two_d(&self) -> usize {
        2 * self.d
    }

    /// Planck's constant on the unit torus, `1 / (2 pi d)`.
    pub fn hbar(&self) -> f64 {
        1.0 / (2.0 * std::f64::consts::PI * self.d as f64)
    }

    /// `tau^k` with `tau = exp(i pi / d)`.
    #[inline]
    pub fn tau_pow(&self, k: i64) -> Complex64 {
        self.table[k.rem_euclid(self.two_d() as i64) as usize]
    }

    /// `eta^k` with `eta = tau^2 = exp(2 pi i / d)`.
    #[inline]
    pub fn eta_pow(&self, k: i64) -> Complex64 {
        self.tau_pow(2 * k.rem_euclid(self.d as i64))
    }

    /// The phase table itself, entry `k` holding `tau^k`.
    pub fn phase_table(&self) -> &[Complex64] {
        &self.table
    }

    /// A lattice label reduced into `[0, 2d)`.
    pub fn point(&self, q: i64, p: i64) -> PhasePoint {
        PhasePoint::new(q, p).reduced(self.two_d())
    }

    /// Every label of `Z_2d x Z_2d`, in row-major order `(q, p)`.
    pub fn lattice(&self) -> impl Iterator<Item = PhasePoint> + Clone {
        lattice_points(self.two_d())
    }

    /// Labels of the first `d x d` quadrant.
    pub fn quadrant(&self) -> impl Iterator<Item = PhasePoint> + Clone {
        lattice_points(self.d)
    }

    /// Flat row-major index of a label on the `2d x 2d` grid.
    #[inline]
    pub fn index(&self, x: PhasePoint) -> usize {
        let n = self.two_d() as i64;
        (x.q.rem_euclid(n) * n + x.p.rem_euclid(n)) as usize
    }
}

impl PartialEq for TorusDim {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d
    }
}

impl Eq for TorusDim {}

impl fmt::Debug for TorusDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TorusDim({})", self.d)
    }
}

fn lattice_points(n: usize) -> impl Iterator<Item = PhasePoint> + Clone {
    let n = n as i64;
    (0..n).flat_map(move |q| (0..n).map(move |p| PhasePoint::new(q, p)))
}

/// Integer label of a center or half-chord.
///
/// Arithmetic is plain integer arithmetic; use [`TorusDim::point`] or
/// [`PhasePoint::reduced`] to get the canonical representative in `[0, 2d)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct PhasePoint {
    pub q: i64,
    pub p: i64,
}

impl PhasePoint {
    pub const ORIGIN: PhasePoint = PhasePoint { q: 0, p: 0 };

    pub const fn new(q: i64, p: i64) -> Self {
        PhasePoint { q, p }
    }

    pub fn reduced(self, modulus: usize) -> Self {
        let m = modulus as i64;
        PhasePoint::new(self.q.rem_euclid(m), self.p.rem_euclid(m))
    }

    pub fn is_origin(self) -> bool {
        self.q == 0 && self.p == 0
    }
}

impl Add for PhasePoint {
    type Output = PhasePoint;
    fn add(self, rhs: PhasePoint) -> PhasePoint {
        PhasePoint::new(self.q + rhs.q, self.p + rhs.p)
    }
}

impl Sub for PhasePoint {
    type Output = PhasePoint;
    fn sub(self, rhs: PhasePoint) -> PhasePoint {
        PhasePoint::new(self.q - rhs.q, self.p - rhs.p)
    }
}

impl Neg for PhasePoint {
    type Output = PhasePoint;
    fn neg(self) -> PhasePoint {
        PhasePoint::new(-self.q, -self.p)
    }
}

impl Mul<PhasePoint> for i64 {
    type Output = PhasePoint;
    fn mul(self, rhs: PhasePoint) -> PhasePoint {
        PhasePoint::new(self * rhs.q, self * rhs.p)
    }
}

impl fmt::Display for PhasePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.q, self.p)
    }
}

/// The symplectic form `<a, b> = b_q a_p - b_p a_q`.
#[inline]
pub fn symplectic(a: PhasePoint, b: PhasePoint) -> i64 {
    b.q * a.p - b.p * a.q
}

/// Sign picked up by a translation or reflection label when it is shifted by
/// `d * w`: `(-1)^(<v, w> + d w_q w_p)`.
#[inline]
pub fn half_period_sign(d: usize, v: PhasePoint, w: PhasePoint) -> f64 {
    let e = symplectic(v, w) + d as i64 * w.q * w.p;
    if e.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Free-standing form of [`TorusDim::tau_pow`].
#[inline]
pub fn tau_pow(dim: &TorusDim, k: i64) -> Complex64 {
    dim.tau_pow(k)
}

/// Kronecker delta modulo `m`: 1 when `a ≡ 0 (mod m)`.
#[inline]
pub fn delta_mod(a: i64, m: usize) -> u8 {
    debug_assert!(m >= 1);
    u8::from(a.rem_euclid(m as i64) == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn symplectic_examples() {
        let o = PhasePoint::ORIGIN;
        assert_eq!(symplectic(o, PhasePoint::new(5, -3)), 0);
        assert_eq!(symplectic(PhasePoint::new(1, 0), PhasePoint::new(0, 1)), -1);
    }

    #[test]
    fn tau_table_exact_points() {
        for d in 1..=12 {
            let dim = TorusDim::new(d);
            assert_eq!(dim.tau_pow(0), Complex64::new(1.0, 0.0));
            assert_eq!(dim.tau_pow(d as i64), Complex64::new(-1.0, 0.0));
            assert_eq!(dim.tau_pow(2 * d as i64 + 3), dim.tau_pow(3));
            assert_eq!(dim.tau_pow(-1), dim.tau_pow(2 * d as i64 - 1));
            assert_eq!(dim.phase_table().len(), 2 * d);
        }
    }

    #[test]
    fn eta_has_period_d() {
        let dim = TorusDim::new(7);
        for k in -20..20 {
            assert_eq!(dim.eta_pow(k), dim.eta_pow(k + 7));
            assert!((dim.eta_pow(k) - dim.tau_pow(2 * k)).norm() < 1e-15);
        }
    }

    #[test]
    fn delta_mod_examples() {
        assert_eq!(delta_mod(0, 8), 1);
        assert_eq!(delta_mod(8, 8), 1);
        assert_eq!(delta_mod(-16, 8), 1);
        assert_eq!(delta_mod(3, 8), 0);
        assert_eq!(delta_mod(5, 1), 1);
    }

    #[test]
    fn point_reduces_negative_labels() {
        let dim = TorusDim::new(3);
        assert_eq!(dim.point(-1, 7), PhasePoint::new(5, 1));
        assert_eq!(dim.lattice().count(), 36);
        assert_eq!(dim.quadrant().count(), 9);
        assert_eq!(dim.index(PhasePoint::new(-1, 0)), 30);
    }

    proptest! {
        #[test]
        fn symplectic_bilinear_antisymmetric(
            a in (-50i64..50, -50i64..50),
            b in (-50i64..50, -50i64..50),
            c in (-50i64..50, -50i64..50),
            s in -7i64..7,
        ) {
            let (a, b, c) = (PhasePoint::new(a.0, a.1), PhasePoint::new(b.0, b.1), PhasePoint::new(c.0, c.1));
            prop_assert_eq!(symplectic(a, b), -symplectic(b, a));
            prop_assert_eq!(symplectic(a + c, b), symplectic(a, b) + symplectic(c, b));
            prop_assert_eq!(symplectic(s * a, b), s * symplectic(a, b));
        }

        #[test]
        fn tau_pow_is_a_homomorphism(d in 1usize..40, k1 in -200i64..200, k2 in -200i64..200) {
            let dim = TorusDim::new(d);
            let err = (dim.tau_pow(k1) * dim.tau_pow(k2) - dim.tau_pow(k1 + k2)).norm();
            prop_assert!(err <= 1e-14, "err = {err}");
        }
    }
}
