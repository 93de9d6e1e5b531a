//! Report-producing checks for the `group`, `lines` and `double` suites.
//!
//! The `pure` and `transition` suites come straight from the library's
//! identity catalogue; these three wrap structural facts that do not
//! depend on a particular state.

use num_complex::Complex64;
use rand::Rng;
use torus_wigner::doublespace::{
    choi_convert, double_symplectic, super_reflection, super_translation, transition_basis_residual, ChoiKind,
    DoublePoint,
};
use torus_wigner::identities::{sample_pairs, IdentityReport};
use torus_wigner::lattice::half_period_sign;
use torus_wigner::lines::{line_operator, translation_eigenbasis, wigner_marginal, LineSpec};
use torus_wigner::phase_repr::DensityMatrix;
use torus_wigner::random::rng_from_seed;
use torus_wigner::weylops::{compose, OperatorMatrix, WeylOp};
use torus_wigner::{PhasePoint, Result, TorusDim};

fn flat(m: &OperatorMatrix) -> Vec<Complex64> {
    m.matrix().iter().copied().collect()
}

fn push_matrices(lhs: &mut Vec<Complex64>, rhs: &mut Vec<Complex64>, a: &OperatorMatrix, b: &OperatorMatrix) {
    lhs.extend(flat(a));
    rhs.extend(flat(b));
}

/// Composition laws, periodicity and half-periodicity of `T` and `R`.
pub fn group_suite(dim: &TorusDim, tol: f64) -> Vec<IdentityReport> {
    let pairs = sample_pairs(dim);
    let d = dim.d() as i64;
    let makers: [(&str, fn(PhasePoint) -> WeylOp, fn(PhasePoint) -> WeylOp); 4] = [
        ("group_tt", WeylOp::translation, WeylOp::translation),
        ("group_rr", WeylOp::reflection, WeylOp::reflection),
        ("group_tr", WeylOp::translation, WeylOp::reflection),
        ("group_rt", WeylOp::reflection, WeylOp::translation),
    ];
    let mut out = Vec::new();
    for (name, fa, fb) in makers {
        let (mut l, mut r) = (Vec::new(), Vec::new());
        for &(a, b) in &pairs {
            let (oa, ob) = (fa(a), fb(b));
            let product = &oa.matrix(dim) * &ob.matrix(dim);
            push_matrices(&mut l, &mut r, &product, &compose(oa, ob).matrix(dim));
        }
        out.push(IdentityReport::new(name, l, r, tol));
    }

    let (mut pl, mut pr) = (Vec::new(), Vec::new());
    let (mut hl, mut hr) = (Vec::new(), Vec::new());
    let shifts = [PhasePoint::new(1, 0), PhasePoint::new(0, 1), PhasePoint::new(1, 1)];
    for &(a, _) in &pairs {
        for w in shifts {
            for op in [WeylOp::translation, WeylOp::reflection] {
                let base = op(a).matrix(dim);
                push_matrices(&mut pl, &mut pr, &op(a + 2 * d * w).matrix(dim), &base);
                let s = half_period_sign(dim.d(), a, w);
                push_matrices(&mut hl, &mut hr, &op(a + d * w).matrix(dim), &base.scale(Complex64::new(s, 0.0)));
            }
        }
    }
    out.push(IdentityReport::new("periodicity", pl, pr, tol));
    out.push(IdentityReport::new("half_periodicity", hl, hr, tol));
    out
}

/// Marginals along every direction against explicit diagonalization of
/// `T_xi`, plus the partition of unity by line projectors.
pub fn lines_suite(rho: &DensityMatrix, tol: f64) -> Result<Vec<IdentityReport>> {
    let dim = rho.dim();
    let w = rho.wigner();
    let directions: Vec<PhasePoint> = dim.quadrant().filter(|x| !x.is_origin()).collect();
    let (mut ml, mut mr) = (Vec::new(), Vec::new());
    let (mut ul, mut ur) = (Vec::new(), Vec::new());
    let n = dim.two_d() as i64;
    for &xi in &directions {
        let marg = wigner_marginal(&w, xi)?;
        let pops = translation_eigenbasis(dim, xi).populations(dim, rho.matrix());
        ml.extend(marg.iter().map(|&v| Complex64::new(v, 0.0)));
        mr.extend(pops.iter().map(|&v| Complex64::new(v, 0.0)));

        let mut total = OperatorMatrix::zeros(dim);
        for a in 0..n {
            total = &total + &line_operator(dim, LineSpec::new(xi, a));
        }
        push_matrices(&mut ul, &mut ur, &total, &OperatorMatrix::identity(dim));
    }
    Ok(vec![
        IdentityReport::new("marginal_vs_eigenbasis", ml, mr, tol),
        IdentityReport::new("lines_partition_of_unity", ul, ur, tol),
    ])
}

/// Double composition laws, Choi conversion and the transition-basis
/// transposition on a seeded sample of double points.
pub fn double_suite(dim: &TorusDim, tol: f64) -> Result<Vec<IdentityReport>> {
    let mut rng = rng_from_seed(0xd0b1e + dim.d() as u64);
    let samples: Vec<(DoublePoint, DoublePoint)> = (0..12).map(|_| (pick(dim, &mut rng), pick(dim, &mut rng))).collect();

    let mut out = Vec::new();
    let laws: [(&str, bool, bool); 4] = [
        ("double_tt", false, false),
        ("double_rr", true, true),
        ("double_tr", false, true),
        ("double_rt", true, false),
    ];
    for (name, ra, rb) in laws {
        let (mut l, mut r) = (Vec::new(), Vec::new());
        for (a, b) in &samples {
            let op = |refl: bool, x: &DoublePoint| {
                if refl {
                    super_reflection(dim, x)
                } else {
                    super_translation(dim, x)
                }
            };
            let k = double_symplectic(a, b);
            let lhs = op(ra, a).compose(&op(rb, b));
            let rhs = match (ra, rb) {
                (false, false) => super_translation(dim, &a.add(dim, b)).scale(dim.eta_pow(k)),
                (true, true) => super_translation(dim, &a.sub(dim, b)).scale(dim.eta_pow(-k)),
                (false, true) => super_reflection(dim, &a.add(dim, b)).scale(dim.eta_pow(k)),
                (true, false) => super_reflection(dim, &a.sub(dim, b)).scale(dim.eta_pow(-k)),
            };
            l.extend(lhs.matrix().iter().copied());
            r.extend(rhs.matrix().iter().copied());
        }
        out.push(IdentityReport::new(name, l, r, tol));
    }

    let d = dim.d() as i64;
    for (name, kind) in [("choi_reflection", ChoiKind::Reflection), ("choi_translation", ChoiKind::Translation)] {
        let (mut l, mut r) = (Vec::new(), Vec::new());
        for (a, b) in &samples {
            let xp = a.x;
            // Same parity as xp, so the conversion exists for every d.
            let xm = PhasePoint::new(xp.q + 2 * b.x.q - 2 * d, xp.p + 2 * b.x.p);
            let e = choi_convert(dim, xp, xm, kind)?;
            l.extend(e.monomial().matrix().iter().copied());
            r.extend(e.to_superop().matrix().iter().copied());
        }
        out.push(IdentityReport::new(name, l, r, tol));
    }

    out.push(IdentityReport::scalar(
        "transition_basis_transposition",
        Complex64::new(transition_basis_residual(dim), 0.0),
        Complex64::new(0.0, 0.0),
        tol,
    ));
    Ok(out)
}

fn pick(dim: &TorusDim, rng: &mut impl Rng) -> DoublePoint {
    let d = dim.d() as i64;
    let mut r = || rng.random_range(0..d);
    DoublePoint::new(dim, PhasePoint::new(r(), r()), PhasePoint::new(r(), r()))
}
