//! Coherent Ising machine with amplitude-heterogeneity correction,
//! integrated with classical RK4:
//!
//! ```text
//! dx_i/dt = (1 − p) x_i − x_i³ + ε(t) e_i Σ_j J_ij x_j,   ε(t) = γ t
//! de_i/dt = −β (x_i² − a) e_i
//! ```
//!
//! Each anneal starts from `x ~ N(0, σ²)`, `e ~ |N(0, σ²)|` and reads out
//! `sign(x)` at the final step.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::{CouplingProblem, SpinVector};
use crate::numerics::{normal_iter, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CimParams {
    /// Pump parameter; the linear gain is `1 − p`.
    pub p: f64,
    /// Error-variable rate.
    pub beta: f64,
    /// Target squared amplitude.
    pub a: f64,
    /// Slope of the coupling ramp `ε = γ t`.
    pub gamma: f64,
    pub dt: f64,
    pub steps: usize,
    /// Standard deviation of the initial `x` and (folded) `e`.
    pub init_std: f64,
    /// Multiplier applied to every coupling.
    pub j_scale: f64,
    /// An anneal counts as converged only if every final `|x_i|` exceeds this.
    pub amp_threshold: f64,
    /// Lower clamp applied to `e` after every step.
    pub e_floor: f64,
}

impl Default for CimParams {
    fn default() -> Self {
        CimParams {
            p: 0.98,
            beta: 1.0,
            a: 2.0,
            gamma: 1000.0 / (256.0 * 0.01),
            dt: 0.005,
            steps: 512,
            init_std: 0.001f64.sqrt(),
            j_scale: 1.0,
            amp_threshold: 0.01,
            e_floor: 1e-12,
        }
    }
}

impl CimParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.p,
            self.beta,
            self.a,
            self.gamma,
            self.dt,
            self.init_std,
            self.j_scale,
            self.amp_threshold,
            self.e_floor,
        ]
        .iter()
        .all(|v| v.is_finite());
        let bad = |m: &str| Err(Error::InvalidParameter(format!("cim: {m}")));
        if !finite {
            return bad("all parameters must be finite");
        }
        if self.dt <= 0.0 {
            return bad("dt must be positive");
        }
        if self.steps == 0 {
            return bad("steps must be at least 1");
        }
        if self.init_std < 0.0 {
            return bad("init_std must be non-negative");
        }
        if self.e_floor <= 0.0 {
            return bad("e_floor must be positive");
        }
        Ok(())
    }
}

/// Outcome of one anneal.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealResult {
    /// Readout spins; the problem's fallback pattern when not converged.
    pub spins: SpinVector,
    pub converged: bool,
    pub final_x: Vec<f64>,
    /// `−sᵀJs` of `spins`.
    pub energy: f64,
}

/// Right-hand side of the CIM equations at time `t`. `jx` receives `J x`.
#[allow(clippy::too_many_arguments)]
pub fn cim_derivative(
    x: &[f64],
    e: &[f64],
    t: f64,
    problem: &CouplingProblem,
    params: &CimParams,
    jx: &mut [f64],
    dx: &mut [f64],
    de: &mut [f64],
) {
    let mut scratch = Vec::new();
    derivative_lanes::<1>(x, e, t, problem, params, jx, &mut scratch, dx, de);
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn derivative_lanes<const L: usize>(
    x: &[f64],
    e: &[f64],
    t: f64,
    problem: &CouplingProblem,
    params: &CimParams,
    jx: &mut [f64],
    scratch: &mut Vec<f64>,
    dx: &mut [f64],
    de: &mut [f64],
) {
    problem.apply_lanes::<L>(x, jx, scratch);
    let eps = params.gamma * t * params.j_scale;
    let gain = 1.0 - params.p;
    let (beta, a) = (params.beta, params.a);
    for i in 0..x.len() {
        let xi = x[i];
        dx[i] = gain * xi - xi * xi * xi + eps * e[i] * jx[i];
        de[i] = -beta * (xi * xi - a) * e[i];
    }
}

/// RK4 over `params.steps` steps for `L` interleaved anneals (`x[i * L + l]`).
/// Lanes never interact and each performs the same arithmetic as a
/// single-lane run, so results do not depend on how anneals are grouped.
fn integrate_lanes<const L: usize>(
    problem: &CouplingProblem,
    params: &CimParams,
    x: &mut [f64],
    e: &mut [f64],
) {
    let len = x.len();
    let dt = params.dt;
    let v = || vec![0.0; len];
    let (mut jx, mut xs, mut es) = (v(), v(), v());
    let mut kx = [v(), v(), v(), v()];
    let mut ke = [v(), v(), v(), v()];
    let mut scratch = Vec::new();
    // (time offset, weight on the previous slope) per RK4 stage
    const STAGES: [(f64, f64); 4] = [(0.0, 0.0), (0.5, 0.5), (0.5, 0.5), (1.0, 1.0)];

    for step in 0..params.steps {
        let t = step as f64 * dt;
        for (k, &(c, w)) in STAGES.iter().enumerate() {
            if k == 0 {
                xs.copy_from_slice(x);
                es.copy_from_slice(e);
            } else {
                let (px, pe) = (&kx[k - 1], &ke[k - 1]);
                for i in 0..len {
                    xs[i] = x[i] + w * dt * px[i];
                    es[i] = e[i] + w * dt * pe[i];
                }
            }
            derivative_lanes::<L>(
                &xs, &es, t + c * dt, problem, params, &mut jx, &mut scratch,
                &mut kx[k], &mut ke[k],
            );
        }
        for i in 0..len {
            x[i] += dt / 6.0 * (kx[0][i] + 2.0 * kx[1][i] + 2.0 * kx[2][i] + kx[3][i]);
            e[i] += dt / 6.0 * (ke[0][i] + 2.0 * ke[1][i] + 2.0 * ke[2][i] + ke[3][i]);
            if e[i] < params.e_floor {
                e[i] = params.e_floor;
            }
        }
    }
}

fn readout(problem: &CouplingProblem, params: &CimParams, x: Vec<f64>) -> AnnealResult {
    let converged = x
        .iter()
        .all(|v| v.is_finite() && v.abs() > params.amp_threshold);
    let spins = if converged {
        SpinVector::from_signs(&x)
    } else {
        problem.fallback_spins().clone()
    };
    let energy = problem.energy(&spins);
    AnnealResult {
        spins,
        converged,
        final_x: x,
        energy,
    }
}

/// Integrates one anneal from explicit initial conditions.
pub fn run_anneal_from(
    problem: &CouplingProblem,
    params: &CimParams,
    mut x: Vec<f64>,
    mut e: Vec<f64>,
) -> AnnealResult {
    let n = problem.n_spins();
    assert_eq!(x.len(), n);
    assert_eq!(e.len(), n);
    integrate_lanes::<1>(problem, params, &mut x, &mut e);
    readout(problem, params, x)
}

/// Initial `(x, e)` for an anneal: `n` normal draws for `x` followed by
/// `n` folded-normal draws for `e`, all from the start of `stream`.
pub fn initial_state(n: usize, params: &CimParams, stream: RngStream) -> (Vec<f64>, Vec<f64>) {
    let mut rng = stream.rng();
    let mut g = normal_iter(&mut rng, 0.0, params.init_std);
    let x: Vec<f64> = g.by_ref().take(n).collect();
    let e: Vec<f64> = g.take(n).map(f64::abs).collect();
    (x, e)
}

/// One anneal seeded from `stream`.
pub fn run_anneal(problem: &CouplingProblem, params: &CimParams, stream: RngStream) -> AnnealResult {
    let (x, e) = initial_state(problem.n_spins(), params, stream);
    run_anneal_from(problem, params, x, e)
}

/// Anneals integrated together in one lockstep group.
pub const BATCH_LANES: usize = 8;

/// `n_anneals` independent anneals; anneal `i` uses `master.child(i)`.
/// Results are in anneal order and identical to calling [`run_anneal`]
/// for each index, whatever the thread count.
pub fn run_batch(
    problem: &CouplingProblem,
    params: &CimParams,
    n_anneals: usize,
    master: RngStream,
) -> Vec<AnnealResult> {
    let groups: Vec<(usize, usize)> = (0..n_anneals)
        .step_by(BATCH_LANES)
        .map(|start| (start, (start + BATCH_LANES).min(n_anneals)))
        .collect();
    groups
        .into_par_iter()
        .flat_map_iter(|(start, end)| run_group(problem, params, master, start, end))
        .collect()
}

fn run_group(
    problem: &CouplingProblem,
    params: &CimParams,
    master: RngStream,
    start: usize,
    end: usize,
) -> Vec<AnnealResult> {
    const L: usize = BATCH_LANES;
    let n = problem.n_spins();
    let count = end - start;
    if count < L / 2 {
        return (start..end)
            .map(|i| run_anneal(problem, params, master.child(i as u64)))
            .collect();
    }
    let mut x = vec![0.0; n * L];
    let mut e = vec![0.0; n * L];
    for l in 0..L {
        // idle lanes replay the first anneal of the group
        let idx = if l < count { start + l } else { start };
        let (x0, e0) = initial_state(n, params, master.child(idx as u64));
        for i in 0..n {
            x[i * L + l] = x0[i];
            e[i * L + l] = e0[i];
        }
    }
    integrate_lanes::<L>(problem, params, &mut x, &mut e);
    (0..count)
        .map(|l| readout(problem, params, (0..n).map(|i| x[i * L + l]).collect()))
        .collect()
}
