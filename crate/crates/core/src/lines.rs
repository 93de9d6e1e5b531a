//! Lines on the label lattice and the projectors they define.
//!
//! A direction `xi` and an offset `a` pick out the line `<xi, x> = a (mod 2d)`.
//! Summing reflections along it gives
//!
//! ```text
//! L^a_xi = (1/2d) sum_x R_x delta(<xi,x> - a) = (1/2d) sum_s T_xi^s tau^{-s a}
//! ```
//!
//! which is the spectral projector of `T_xi` onto eigenvalue `tau^a`. The
//! expectation of `L^a_xi` in a state is the Wigner function summed along the
//! line, so these marginals are honest probabilities.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{delta_mod, half_period_sign, symplectic, PhasePoint, TorusDim};
use crate::phase_repr::{ArrayKind, PhaseArray};
use crate::weylops::{reflection, translation, CMatrix, OperatorMatrix};

/// The line `<xi, x> = a (mod 2d)`. The direction is kept as given.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LineSpec {
    pub xi: PhasePoint,
    pub a: i64,
}

impl LineSpec {
    pub fn new(xi: PhasePoint, a: i64) -> Self {
        LineSpec { xi, a }
    }

    pub fn contains(&self, dim: &TorusDim, x: PhasePoint) -> bool {
        delta_mod(symplectic(self.xi, x) - self.a, dim.two_d()) == 1
    }
}

pub fn line_points(dim: &TorusDim, spec: LineSpec) -> Vec<PhasePoint> {
    dim.lattice().filter(|&x| spec.contains(dim, x)).collect()
}

/// `L^a_xi` as a sum of reflections over the line.
pub fn line_operator(dim: &TorusDim, spec: LineSpec) -> OperatorMatrix {
    let d = dim.d();
    let mut acc = CMatrix::zeros(d, d);
    for x in line_points(dim, spec) {
        acc += reflection(dim, x).matrix();
    }
    let scale = Complex64::new(1.0 / dim.two_d() as f64, 0.0);
    OperatorMatrix::new(dim, acc * scale).expect("square by construction")
}

/// `L^a_xi` as `(1/2d) sum_s T_xi^s tau^{-s a}`, using `T_xi^s = T_{s xi}`.
pub fn line_operator_from_translations(dim: &TorusDim, spec: LineSpec) -> OperatorMatrix {
    let d = dim.d();
    let mut acc = CMatrix::zeros(d, d);
    for s in 0..dim.two_d() as i64 {
        acc += translation(dim, s * spec.xi).matrix() * dim.tau_pow(-s * spec.a);
    }
    let scale = Complex64::new(1.0 / dim.two_d() as f64, 0.0);
    OperatorMatrix::new(dim, acc * scale).expect("square by construction")
}

/// `(1/2d) sum_x T_x delta(<xi,x> - a)`, which equals `L^a_xi R_0`.
pub fn chord_line_operator(dim: &TorusDim, spec: LineSpec) -> OperatorMatrix {
    let d = dim.d();
    let mut acc = CMatrix::zeros(d, d);
    for x in line_points(dim, spec) {
        acc += translation(dim, x).matrix();
    }
    let scale = Complex64::new(1.0 / dim.two_d() as f64, 0.0);
    OperatorMatrix::new(dim, acc * scale).expect("square by construction")
}

/// Rank of `L^a_xi` read off its trace.
pub fn line_rank(dim: &TorusDim, spec: LineSpec) -> f64 {
    line_operator(dim, spec).trace().re
}

/// Smallest `r >= 1` with `T_xi^r = sign * 1`, together with that sign.
///
/// `T_xi^r = T_{r xi}` is a multiple of the identity exactly when
/// `r xi = 0 (mod d)`, and then the half-period rule fixes the sign.
pub fn translation_order(dim: &TorusDim, xi: PhasePoint) -> Result<(u64, i8)> {
    let d = dim.d() as i64;
    let red = xi.reduced(dim.two_d());
    if red.is_origin() {
        return Err(Error::ZeroDirection);
    }
    let g = gcd(gcd(xi.q.rem_euclid(d), xi.p.rem_euclid(d)), d);
    let r = d / g;
    let w = PhasePoint::new((r * xi.q).div_euclid(d), (r * xi.p).div_euclid(d));
    // T_{r xi} = T_{d w} = (-1)^{d w_q w_p} T_0.
    let sign = half_period_sign(dim.d(), PhasePoint::ORIGIN, w);
    Ok((r as u64, sign as i8))
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a.rem_euclid(b))
    }
}

fn check_kind(arr: &PhaseArray, expected: ArrayKind) -> Result<()> {
    if arr.kind() != expected {
        return Err(Error::KindMismatch {
            expected: expected.name(),
            found: arr.kind().name(),
        });
    }
    Ok(())
}

fn line_sums(arr: &PhaseArray, xi: PhasePoint) -> Vec<Complex64> {
    let dim = arr.dim();
    let n = dim.two_d();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (x, z) in arr.iter() {
        out[symplectic(xi, x).rem_euclid(n as i64) as usize] += z;
    }
    let scale = 1.0 / n as f64;
    out.iter_mut().for_each(|z| *z *= scale);
    out
}

/// Wigner function summed along each of the `2d` parallel lines in direction
/// `xi`. Entry `a` is `tr(rho L^a_xi)`.
pub fn wigner_marginal(w: &PhaseArray, xi: PhasePoint) -> Result<Vec<f64>> {
    check_kind(w, ArrayKind::Center)?;
    Ok(line_sums(w, xi).into_iter().map(|z| z.re).collect())
}

/// Chord function summed along the same lines. Entry `a` is
/// `tr(rho L^{-a}_xi R_0)`, the skew-diagonal element `<phi_{-a}| rho |phi'_{-a}>`
/// with `phi'_{-a} = R_0 phi_{-a}` an eigenvector for `tau^a`.
pub fn chord_marginal(chi: &PhaseArray, xi: PhasePoint) -> Result<Vec<Complex64>> {
    check_kind(chi, ArrayKind::Chord)?;
    Ok(line_sums(chi, xi))
}

/// Eigenvectors of `T_xi` grouped by the exponent `a` of the eigenvalue
/// `tau^a`, `a` in `[0, 2d)`.
#[derive(Clone, Debug)]
pub struct TranslationEigenbasis {
    pub xi: PhasePoint,
    pub groups: BTreeMap<i64, Vec<Vec<Complex64>>>,
}

impl TranslationEigenbasis {
    /// Projector onto the `tau^a` eigenspace (zero if `a` is not in the spectrum).
    pub fn projector(&self, dim: &TorusDim, a: i64) -> OperatorMatrix {
        let d = dim.d();
        let a = a.rem_euclid(dim.two_d() as i64);
        let mut m = CMatrix::zeros(d, d);
        if let Some(vs) = self.groups.get(&a) {
            for v in vs {
                for r in 0..d {
                    for c in 0..d {
                        m[(r, c)] += v[r] * v[c].conj();
                    }
                }
            }
        }
        OperatorMatrix::new(dim, m).expect("square by construction")
    }

    /// `sum_{v in group a} <v| rho |v>` for every `a`.
    pub fn populations(&self, dim: &TorusDim, rho: &CMatrix) -> Vec<f64> {
        (0..dim.two_d() as i64)
            .map(|a| (rho * self.projector(dim, a).matrix()).trace().re)
            .collect()
    }
}

/// Diagonalizes `T_xi` by way of the Hermitian matrix
/// `(T + T^dag)/2 + c (T - T^dag)/2i`, whose eigenvalue `cos t + c sin t`
/// separates all `2d`-th roots `e^{it}` when `c` is irrational.
///
/// Each eigenvector is phased so its largest component is real positive.
pub fn translation_eigenbasis(dim: &TorusDim, xi: PhasePoint) -> TranslationEigenbasis {
    let t = translation(dim, xi);
    let tm = t.matrix();
    let c = std::f64::consts::SQRT_2;
    let half = Complex64::new(0.5, 0.0);
    let skew = Complex64::new(0.0, -0.5 * c);
    let h: DMatrix<Complex64> = (tm + tm.adjoint()) * half + (tm - tm.adjoint()) * skew;
    let eig = h.symmetric_eigen();
    let d = dim.d();
    let n = dim.two_d() as i64;
    let mut groups: BTreeMap<i64, Vec<Vec<Complex64>>> = BTreeMap::new();
    for k in 0..d {
        let mut v: Vec<Complex64> = eig.eigenvectors.column(k).iter().copied().collect();
        let big = v
            .iter()
            .copied()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .expect("d >= 1");
        let phase = big.conj() / big.norm();
        v.iter_mut().for_each(|z| *z *= phase);
        let tv = t.apply(&v);
        let lambda: Complex64 = v.iter().zip(&tv).map(|(a, b)| a.conj() * b).sum();
        let a = (lambda.arg() * d as f64 / std::f64::consts::PI).round() as i64;
        groups.entry(a.rem_euclid(n)).or_default().push(v);
    }
    TranslationEigenbasis { xi, groups }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_repr::{DensityMatrix, PureState};
    use crate::random::{random_density, random_pure_state, rng_from_seed};
    use crate::weylops::reflection;

    fn nonzero_directions(dim: &TorusDim) -> Vec<PhasePoint> {
        dim.lattice().filter(|x| !x.is_origin()).collect()
    }

    #[test]
    fn point_counts() {
        let dim = TorusDim::new(3);
        let vertical = line_points(&dim, LineSpec::new(PhasePoint::new(0, 1), 0));
        assert_eq!(vertical.len(), 6);
        assert!(vertical.iter().all(|x| x.q == 0));
        for a in 0..6 {
            assert_eq!(line_points(&dim, LineSpec::new(PhasePoint::new(1, 1), a)).len(), 6);
        }
        let dim4 = TorusDim::new(4);
        assert!(line_points(&dim4, LineSpec::new(PhasePoint::new(2, 0), 1)).is_empty());
    }

    #[test]
    fn both_routes_agree_and_form_partition_of_unity() {
        for d in 1..=6 {
            let dim = TorusDim::new(d);
            for xi in nonzero_directions(&dim) {
                let mut total = OperatorMatrix::zeros(&dim);
                let ls: Vec<_> = (0..2 * d as i64)
                    .map(|a| line_operator(&dim, LineSpec::new(xi, a)))
                    .collect();
                for (a, l) in ls.iter().enumerate() {
                    let alt = line_operator_from_translations(&dim, LineSpec::new(xi, a as i64));
                    assert!(l.max_abs_diff(&alt) < 1e-10, "d={d} xi={xi} a={a}");
                    assert!(l.hermiticity_defect() < 1e-12);
                    total = &total + l;
                }
                assert!(total.max_abs_diff(&OperatorMatrix::identity(&dim)) < 1e-10);
                for (a, la) in ls.iter().enumerate() {
                    for (b, lb) in ls.iter().enumerate() {
                        let prod = la * lb;
                        let expect = if a == b { la.clone() } else { OperatorMatrix::zeros(&dim) };
                        assert!(prod.max_abs_diff(&expect) < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn vertical_lines_are_position_projectors() {
        for d in 1..=7 {
            let dim = TorusDim::new(d);
            let xi = PhasePoint::new(0, 1);
            for a in 0..2 * d as i64 {
                let l = line_operator(&dim, LineSpec::new(xi, a));
                if a % 2 == 0 {
                    let p = PureState::position(&dim, (a / 2) as usize).projector();
                    assert!(l.max_abs_diff(&p) < 1e-12);
                } else {
                    assert!(l.max_abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn parity_of_vanishing_lines() {
        for d in 1..=6 {
            let dim = TorusDim::new(d);
            for xi in nonzero_directions(&dim) {
                for a in 0..2 * d as i64 {
                    let l = line_operator(&dim, LineSpec::new(xi, a));
                    // tau^{a d} must match the sign of T_xi^d for the line to survive.
                    let odd_allowed = (d as i64 * xi.q * xi.p).rem_euclid(2) == 1;
                    if (a.rem_euclid(2) == 1) != odd_allowed {
                        assert!(l.max_abs() < 1e-12, "d={d} xi={xi} a={a}");
                    }
                }
            }
        }
    }

    #[test]
    fn ranks_are_integers() {
        for d in 1..=8 {
            let dim = TorusDim::new(d);
            for xi in nonzero_directions(&dim) {
                let mut sum = 0.0;
                for a in 0..2 * d as i64 {
                    let r = line_rank(&dim, LineSpec::new(xi, a));
                    assert!((r - r.round()).abs() < 1e-10);
                    assert!(r > -1e-10);
                    sum += r;
                }
                assert!((sum - d as f64).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn order_matches_matrix_powers() {
        for d in 1..=8 {
            let dim = TorusDim::new(d);
            for xi in nonzero_directions(&dim) {
                let (r, sign) = translation_order(&dim, xi).unwrap();
                let t = translation(&dim, xi);
                let id = OperatorMatrix::identity(&dim);
                for s in 1..r {
                    let p = t.pow(s);
                    let scalar = p.get(0, 0);
                    assert!(p.max_abs_diff(&id.scale(scalar)) > 1e-8, "d={d} xi={xi} s={s}");
                }
                let p = t.pow(r);
                assert!(p.max_abs_diff(&id.scale(Complex64::new(sign as f64, 0.0))) < 1e-10);
            }
        }
        assert_eq!(translation_order(&TorusDim::new(5), PhasePoint::new(0, 1)).unwrap().0, 5);
        assert_eq!(translation_order(&TorusDim::new(4), PhasePoint::new(2, 0)).unwrap().0, 2);
        assert_eq!(translation_order(&TorusDim::new(4), PhasePoint::new(4, 4)).unwrap(), (1, 1));
        assert_eq!(
            translation_order(&TorusDim::new(4), PhasePoint::new(8, -16)),
            Err(Error::ZeroDirection)
        );
    }

    #[test]
    fn chord_lines_are_projectors_times_parity() {
        for d in 1..=5 {
            let dim = TorusDim::new(d);
            let parity = reflection(&dim, PhasePoint::ORIGIN);
            for xi in nonzero_directions(&dim) {
                for a in 0..2 * d as i64 {
                    let spec = LineSpec::new(xi, a);
                    let lhs = &line_operator(&dim, spec) * &parity;
                    assert!(lhs.max_abs_diff(&chord_line_operator(&dim, spec)) < 1e-10);
                }
            }
        }
    }

    #[test]
    fn marginals_match_eigenbasis() {
        let mut rng = rng_from_seed(31);
        for d in [2, 3, 4, 5, 6] {
            let dim = TorusDim::new(d);
            let parity = reflection(&dim, PhasePoint::ORIGIN);
            let rho = random_density(&dim, 2, &mut rng);
            let w = rho.wigner();
            let chi = rho.chord();
            for xi in nonzero_directions(&dim) {
                let basis = translation_eigenbasis(&dim, xi);
                let pops = basis.populations(&dim, rho.matrix());
                let wm = wigner_marginal(&w, xi).unwrap();
                let cm = chord_marginal(&chi, xi).unwrap();
                let total: f64 = wm.iter().sum();
                assert!((total - 1.0).abs() < 1e-10);
                for a in 0..2 * d as i64 {
                    assert!((wm[a as usize] - pops[a as usize]).abs() < 1e-10);
                    assert!(wm[a as usize] > -1e-10);
                    let p = basis.projector(&dim, -a);
                    let expect = (rho.matrix() * p.matrix() * parity.matrix()).trace();
                    assert!((cm[a as usize] - expect).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn position_and_mixed_marginals() {
        let dim = TorusDim::new(6);
        let xi = PhasePoint::new(0, 1);
        let w = PureState::position(&dim, 4).wigner();
        let m = wigner_marginal(&w, xi).unwrap();
        for (a, v) in m.iter().enumerate() {
            let expect = if a == 8 { 1.0 } else { 0.0 };
            assert!((v - expect).abs() < 1e-12);
        }
        let flat = wigner_marginal(&DensityMatrix::maximally_mixed(&dim).wigner(), PhasePoint::new(1, 2)).unwrap();
        for v in flat {
            assert!(v.abs() < 1e-12 || (v - 1.0 / 6.0).abs() < 1e-12);
        }
        let psi = random_pure_state(&dim, &mut rng_from_seed(1));
        assert!(matches!(
            wigner_marginal(&psi.chord(), xi),
            Err(Error::KindMismatch { .. })
        ));
        assert!(matches!(
            chord_marginal(&psi.wigner(), xi),
            Err(Error::KindMismatch { .. })
        ));
    }

    #[test]
    fn eigenstate_has_single_chord_entry() {
        let dim = TorusDim::new(5);
        let xi = PhasePoint::new(1, 2);
        let basis = translation_eigenbasis(&dim, xi);
        let (_, vs) = basis.groups.iter().next().unwrap();
        let psi = PureState::normalized(&dim, vs[0].clone()).unwrap();
        let cm = chord_marginal(&psi.chord(), xi).unwrap();
        let nonzero = cm.iter().filter(|z| z.norm() > 1e-10).count();
        assert_eq!(nonzero, 1);
    }
}
