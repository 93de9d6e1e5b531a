//! Search for SIC fiducials by minimizing the quartic localization measure
//!
//! ```text
//! M(psi) = (1/4d) sum_x W(x)^4,   W(x) = <psi| R_x |psi>
//! ```
//!
//! over the unit sphere. `M >= 2/(d+1)`, with equality exactly when every
//! nonzero chord in the fundamental cell has `|chi|^2 = 1/(d+1)`, which is the
//! SIC condition for the Weyl orbit of `psi`.
//!
//! The optimizer is plain projected gradient descent with Armijo backtracking
//! and renormalization after every step. Restarts draw from seeded
//! generators and run in fixed-size parallel batches, so the result depends
//! only on the configuration.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::identities::welch_bound;
use crate::lattice::{PhasePoint, TorusDim};
use crate::phase_repr::{PureState, NORM_TOL};
use crate::random::{random_pure_state, rng_from_seed};
use crate::weylops::apply_reflection;

/// Restarts evaluated together before checking for early exit.
const BATCH: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub d: usize,
    pub restarts: usize,
    pub max_iters: usize,
    pub armijo: f64,
    pub initial_step: f64,
    pub min_step: f64,
    pub seed: u64,
    /// Stop restarting once `M - 2/(d+1)` is at or below this.
    pub target_tol: f64,
    /// A single descent stops once its gap falls below this.
    pub inner_tol: f64,
}

impl SearchConfig {
    pub fn new(d: usize) -> Self {
        SearchConfig {
            d,
            restarts: 200,
            max_iters: 2000,
            armijo: 1e-4,
            initial_step: 1.0,
            min_step: 1e-12,
            seed: 0,
            target_tol: 1e-8,
            inner_tol: 1e-12,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if self.d < 1 {
            return Err("d must be at least 1".into());
        }
        if self.restarts < 1 {
            return Err("restarts must be at least 1".into());
        }
        if !(self.target_tol > 0.0) {
            return Err("target_tol must be positive".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub config: SearchConfig,
    pub best_state: PureState,
    pub best_m: f64,
    pub gap: f64,
    /// Iterations used by the winning restart.
    pub iterations: usize,
    pub best_restart: usize,
    pub restarts_run: usize,
    pub flat_chord_residual: f64,
}

/// One descent from a given starting state.
#[derive(Clone, Debug)]
pub struct Descent {
    pub state: PureState,
    pub m: f64,
    pub iterations: usize,
    /// `M` after each accepted step, starting with the initial value.
    pub history: Vec<f64>,
}

fn reflected(dim: &TorusDim, psi: &[Complex64]) -> Vec<Vec<Complex64>> {
    dim.lattice().map(|x| apply_reflection(dim, x, psi)).collect()
}

fn cost_grad_raw(dim: &TorusDim, psi: &[Complex64]) -> (f64, Vec<Complex64>) {
    let d = dim.d();
    let rpsi = reflected(dim, psi);
    let mut m = 0.0;
    let mut grad = vec![Complex64::new(0.0, 0.0); d];
    for rv in &rpsi {
        let w: f64 = psi.iter().zip(rv).map(|(a, b)| a.conj() * b).sum::<Complex64>().re;
        let w3 = w * w * w;
        m += w3 * w;
        for (g, r) in grad.iter_mut().zip(rv) {
            *g += r * w3;
        }
    }
    let four_d = (2 * dim.two_d()) as f64;
    m /= four_d;
    let gscale = 4.0 / four_d;
    grad.iter_mut().for_each(|g| *g *= gscale);
    (m, grad)
}

/// `M(psi)` and its Wirtinger gradient `dM/dpsi* = (1/d) sum_x W(x)^3 R_x psi`,
/// before projection onto the tangent space of the sphere.
pub fn cost_and_gradient(psi: &PureState) -> Result<(f64, Vec<Complex64>)> {
    let norm_sqr: f64 = psi.amplitudes().iter().map(|z| z.norm_sqr()).sum();
    if (norm_sqr - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { norm_sqr });
    }
    Ok(cost_grad_raw(psi.dim(), psi.amplitudes()))
}

fn normalize(v: &mut [Complex64]) {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= n);
}

/// Projected gradient descent with backtracking from `start`.
pub fn descend(start: &PureState, config: &SearchConfig) -> Descent {
    let dim = start.dim().clone();
    let floor = welch_bound(dim.d());
    let mut psi = start.amplitudes().to_vec();
    let (mut m, mut g) = cost_grad_raw(&dim, &psi);
    let mut history = vec![m];
    let mut iterations = 0;
    while iterations < config.max_iters && m - floor > config.inner_tol {
        let overlap: Complex64 = psi.iter().zip(&g).map(|(a, b)| a.conj() * b).sum();
        let gt: Vec<Complex64> = g.iter().zip(&psi).map(|(gi, pi)| gi - overlap * pi).collect();
        let gn: f64 = gt.iter().map(|z| z.norm_sqr()).sum();
        if gn < 1e-30 {
            break;
        }
        let mut step = config.initial_step;
        let accepted = loop {
            let mut cand: Vec<Complex64> = psi.iter().zip(&gt).map(|(p, t)| p - t * step).collect();
            normalize(&mut cand);
            let (mc, gc) = cost_grad_raw(&dim, &cand);
            if mc <= m - config.armijo * step * gn {
                break Some((cand, mc, gc));
            }
            step *= 0.5;
            if step < config.min_step {
                break None;
            }
        };
        let Some((cand, mc, gc)) = accepted else {
            break;
        };
        psi = cand;
        m = mc;
        g = gc;
        iterations += 1;
        history.push(m);
    }
    Descent {
        state: PureState::normalized(&dim, psi).expect("iterates stay on the sphere"),
        m,
        iterations,
        history,
    }
}

fn restart_seed(seed: u64, restart: usize) -> u64 {
    seed ^ (restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Best of up to `config.restarts` descents from random starts.
pub fn search(config: &SearchConfig) -> SearchResult {
    if let Err(msg) = config.validate() {
        panic!("invalid search configuration: {msg}");
    }
    let dim = TorusDim::new(config.d);
    let floor = welch_bound(config.d);
    let mut best: Option<(usize, Descent)> = None;
    let mut run = 0;
    while run < config.restarts {
        let end = (run + BATCH).min(config.restarts);
        let batch: Vec<(usize, Descent)> = (run..end)
            .into_par_iter()
            .map(|r| {
                let mut rng = rng_from_seed(restart_seed(config.seed, r));
                let start = random_pure_state(&dim, &mut rng);
                (r, descend(&start, config))
            })
            .collect();
        for (r, desc) in batch {
            log::debug!("restart {r}: M = {:.15}, gap = {:e}", desc.m, desc.m - floor);
            let better = match &best {
                None => true,
                Some((_, b)) => desc.m < b.m,
            };
            if better {
                best = Some((r, desc));
            }
        }
        run = end;
        if best.as_ref().is_some_and(|(_, b)| b.m - floor <= config.target_tol) {
            break;
        }
    }
    let (best_restart, desc) = best.expect("at least one restart");
    let flat = flat_chord_residual(&desc.state);
    SearchResult {
        config: config.clone(),
        best_m: desc.m,
        gap: desc.m - floor,
        iterations: desc.iterations,
        best_restart,
        restarts_run: run,
        flat_chord_residual: flat,
        best_state: desc.state,
    }
}

/// `max | |chi(xi)|^2 - 1/(d+1) |` over nonzero `xi` in the `d x d` cell.
pub fn flat_chord_residual(psi: &PureState) -> f64 {
    let dim = psi.dim();
    let chi = psi.chord();
    let target = 1.0 / (dim.d() as f64 + 1.0);
    dim.quadrant()
        .filter(|x| !x.is_origin())
        .map(|x| (chi.get(x).norm_sqr() - target).abs())
        .fold(0.0, f64::max)
}

/// Whether `psi` is a SIC fiducial to within `tol`, with the flat-chord
/// residual.
pub fn verify_fiducial(psi: &PureState, tol: f64) -> (bool, f64) {
    let r = flat_chord_residual(psi);
    (r <= tol, r)
}

/// The qubit fiducial with Bloch vector `(1, 1, 1)/sqrt 3`.
pub fn qubit_fiducial() -> PureState {
    let theta = (1.0f64 / 3.0f64.sqrt()).acos();
    let amps = vec![
        Complex64::new((theta / 2.0).cos(), 0.0),
        Complex64::from_polar((theta / 2.0).sin(), std::f64::consts::FRAC_PI_4),
    ];
    PureState::normalized(&TorusDim::new(2), amps).expect("nonzero")
}

/// The Weyl-orbit member of `psi` under `T_xi`, for deduplicating fiducials.
pub fn translate(psi: &PureState, xi: PhasePoint) -> PureState {
    let amps = crate::weylops::apply_translation(psi.dim(), xi, psi.amplitudes());
    PureState::normalized(psi.dim(), amps).expect("unitary image is nonzero")
}
