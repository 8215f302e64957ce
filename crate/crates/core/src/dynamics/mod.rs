//! Simulation of the Metzler, Laplacian and non-polynomial systems.
//!
//! [`integrate`] advances `x' = F(x)` with classical RK4 at a fixed step or
//! with the Dormand–Prince 5(4) pair, records the monitors after every
//! accepted step, and stops early on sustained consensus, on divergence
//! (`||x||_inf > 1e12`), or on a non-finite state.

mod field;
mod monitor;
mod output;

pub use field::{AssumptionReport, FieldKind, InteractionFunction, VectorField};
pub use monitor::{
    detect_consensus, monitor_vm, positivity_guard, sign_preservation, vm_nonincreasing, ConsensusHit,
    ConsensusMode, PositivityReport, Verdict, DEFAULT_NEG_TOL, SIGN_DEAD_BAND, VM_STEP_TOL,
};
pub use output::{gnuplot_script, trajectory_csv, write_csv};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::balance::FactionVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Method {
    Rk4 { dt: f64 },
    Rk45 { atol: f64, rtol: f64, h0: f64 },
}

impl Method {
    pub fn rk4(dt: f64) -> Self {
        Method::Rk4 { dt }
    }

    /// Adaptive default: absolute and relative tolerance 1e-9.
    pub fn rk45() -> Self {
        Method::Rk45 {
            atol: 1e-9,
            rtol: 1e-9,
            h0: 1e-3,
        }
    }

    /// Per-step `V_m` increase attributable to integration error.
    ///
    /// Fixed-step RK4 at practical step sizes stays within [`VM_STEP_TOL`].
    /// The adaptive scheme only controls the local error to `atol + rtol·|x|`,
    /// which propagates into `V_m` through the ratio `x_i / x*_i` raised to
    /// the power `m - 1`.
    pub fn vm_step_tolerance(&self, traj: &Trajectory, xstar: &[f64], order: usize) -> f64 {
        match *self {
            Method::Rk4 { .. } => VM_STEP_TOL,
            Method::Rk45 { atol, rtol, .. } => {
                let xmax = traj.states.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
                let ratio = traj
                    .states
                    .iter()
                    .flat_map(|x| x.iter().zip(xstar).map(|(v, s)| v.abs() / s))
                    .fold(0.0f64, f64::max);
                let smin = xstar.iter().copied().fold(f64::INFINITY, f64::min);
                let m = order.max(2) as f64;
                let bound = (m - 1.0)
                    * ratio.powf(m - 2.0)
                    * (xstar.len() as f64).sqrt()
                    * (atol + rtol * xmax)
                    / smin;
                VM_STEP_TOL.max(bound)
            }
        }
    }
}

/// Reference data for the per-step monitors.
#[derive(Debug, Clone)]
pub struct MonitorSpec {
    /// Positive reference state for `V_m`.
    pub xstar: Vec<f64>,
    /// Order used in the `V_m` exponent.
    pub order: usize,
    /// Gauge for signed runs; monitors are evaluated on `sigma ⊙ x`.
    pub sigma: Option<FactionVector>,
}

impl MonitorSpec {
    pub fn ones(n: usize, order: usize) -> Self {
        Self {
            xstar: vec![1.0; n],
            order,
            sigma: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StopRule {
    pub mode: ConsensusMode,
    pub tol: f64,
    /// Number of consecutive accepted steps the spread must stay below `tol`.
    pub window: usize,
}

pub const DEFAULT_CONSENSUS_TOL: f64 = 1e-6;
pub const DEFAULT_CONSENSUS_WINDOW: usize = 100;
pub const DIVERGENCE_LIMIT: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct IntegrateOptions {
    pub method: Method,
    pub t_end: f64,
    pub monitors: MonitorSpec,
    pub stop: Option<StopRule>,
    /// Reject initial states outside the open gauge orthant `sigma ⊙ x0 > 0`.
    pub require_orthant: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Horizon,
    Consensus,
    Diverged,
    NonFinite,
}

/// Per-sample monitor series, aligned with [`Trajectory::states`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Monitors {
    pub vm: Vec<f64>,
    /// Range of `sigma ⊙ x`.
    pub spread: Vec<f64>,
    /// Range of `|x|`.
    pub abs_spread: Vec<f64>,
    /// Sign of each component, 0 inside the dead band.
    pub signs: Vec<Vec<i8>>,
    /// `sigma ⊙ x >= -DEFAULT_NEG_TOL`.
    pub in_orthant: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub monitors: Monitors,
    pub termination: Termination,
}

impl Trajectory {
    pub fn final_state(&self) -> &[f64] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn final_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    /// Builds a trajectory from raw samples, evaluating the monitors.
    pub fn from_samples(times: Vec<f64>, states: Vec<Vec<f64>>, spec: &MonitorSpec) -> Result<Self> {
        if times.len() != states.len() {
            return Err(Error::InvalidArgument("times and states differ in length".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("times must be strictly increasing".into()));
        }
        let mut rec = Recorder::new(spec);
        for (t, x) in times.into_iter().zip(states) {
            rec.push(t, x);
        }
        Ok(rec.finish(Termination::Horizon))
    }
}

struct Recorder<'a> {
    spec: &'a MonitorSpec,
    traj: Trajectory,
}

impl<'a> Recorder<'a> {
    fn new(spec: &'a MonitorSpec) -> Self {
        Self {
            spec,
            traj: Trajectory {
                times: Vec::new(),
                states: Vec::new(),
                monitors: Monitors::default(),
                termination: Termination::Horizon,
            },
        }
    }

    fn push(&mut self, t: f64, x: Vec<f64>) {
        let gauged = match &self.spec.sigma {
            Some(s) => s.apply(&x),
            None => x.clone(),
        };
        let m = &mut self.traj.monitors;
        m.vm.push(monitor::vm_unchecked(&gauged, &self.spec.xstar, self.spec.order));
        m.spread.push(ConsensusMode::Identical.spread(&gauged));
        let abs: Vec<f64> = x.iter().map(|v| v.abs()).collect();
        m.abs_spread.push(ConsensusMode::Identical.spread(&abs));
        m.signs.push(
            x.iter()
                .map(|&v| if v.abs() <= SIGN_DEAD_BAND { 0 } else if v > 0.0 { 1 } else { -1 })
                .collect(),
        );
        m.in_orthant.push(gauged.iter().all(|&v| v >= -DEFAULT_NEG_TOL));
        self.traj.times.push(t);
        self.traj.states.push(x);
    }

    fn finish(mut self, termination: Termination) -> Trajectory {
        self.traj.termination = termination;
        self.traj
    }
}

/// Integrates `x' = field(x)` from `x0` over `[0, t_end]`.
pub fn integrate(field: &VectorField, x0: &[f64], opts: &IntegrateOptions) -> Result<Trajectory> {
    let n = field.dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x0.len() });
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("initial state must be finite".into()));
    }
    if !(opts.t_end >= 0.0) {
        return Err(Error::InvalidArgument(format!("t_end must be >= 0, got {}", opts.t_end)));
    }
    let spec = &opts.monitors;
    if spec.xstar.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: spec.xstar.len(),
        });
    }
    if spec.xstar.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidArgument("monitor reference state must be strictly positive".into()));
    }
    if let Some(s) = &spec.sigma {
        if s.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: s.len() });
        }
    }
    if opts.require_orthant {
        let gauged = match &spec.sigma {
            Some(s) => s.apply(x0),
            None => x0.to_vec(),
        };
        if let Some(i) = gauged.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "initial state is outside the gauge orthant at component {}",
                i + 1
            )));
        }
    }

    let mut rec = Recorder::new(spec);
    let mut stopper = opts.stop.as_ref().map(|rule| (rule, 0usize));
    let mut x = x0.to_vec();
    let mut t = 0.0;

    // returns Some(termination) when the run must end after recording x
    let mut observe = |t: f64, x: &[f64], rec: &mut Recorder| -> Option<Termination> {
        rec.push(t, x.to_vec());
        if x.iter().fold(0.0f64, |m, v| m.max(v.abs())) > DIVERGENCE_LIMIT {
            return Some(Termination::Diverged);
        }
        if let Some((rule, run)) = stopper.as_mut() {
            if rule.mode.spread(x) < rule.tol {
                *run += 1;
                if *run >= rule.window.max(1) {
                    return Some(Termination::Consensus);
                }
            } else {
                *run = 0;
            }
        }
        None
    };

    if let Some(term) = observe(t, &x, &mut rec) {
        return Ok(rec.finish(term));
    }

    let mut ws = Workspace::new(n);
    match opts.method {
        Method::Rk4 { dt } => {
            if !(dt > 0.0) {
                return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
            }
            let steps = (opts.t_end / dt - 1e-9).ceil().max(0.0) as usize;
            for s in 1..=steps {
                let t_next = (s as f64 * dt).min(opts.t_end);
                let h = t_next - t;
                let next = ws.rk4_step(field, &x, h);
                if next.iter().any(|v| !v.is_finite()) {
                    return Ok(rec.finish(Termination::NonFinite));
                }
                x = next;
                t = t_next;
                if let Some(term) = observe(t, &x, &mut rec) {
                    return Ok(rec.finish(term));
                }
            }
        }
        Method::Rk45 { atol, rtol, h0 } => {
            if !(atol > 0.0 && rtol >= 0.0 && h0 > 0.0) {
                return Err(Error::InvalidArgument("adaptive tolerances and h0 must be positive".into()));
            }
            let mut h = h0;
            while t < opts.t_end {
                h = h.min(opts.t_end - t);
                if h <= 4.0 * f64::EPSILON * t.abs().max(1.0) {
                    return Err(Error::StepUnderflow { t, h, state: x });
                }
                let (next, err) = ws.dopri_step(field, &x, h, atol, rtol);
                if !err.is_finite() || next.iter().any(|v| !v.is_finite()) {
                    h *= 0.2;
                    continue;
                }
                if err <= 1.0 {
                    t = if opts.t_end - (t + h) <= 4.0 * f64::EPSILON * opts.t_end { opts.t_end } else { t + h };
                    x = next;
                    if let Some(term) = observe(t, &x, &mut rec) {
                        return Ok(rec.finish(term));
                    }
                }
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                h *= factor;
            }
        }
    }
    Ok(rec.finish(Termination::Horizon))
}

struct Workspace {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    scratch: Vec<f64>,
}

// Dormand–Prince 5(4) tableau
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

impl Workspace {
    fn new(n: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; n]),
            tmp: vec![0.0; n],
            scratch: vec![0.0; n],
        }
    }

    fn rk4_step(&mut self, field: &VectorField, x: &[f64], h: f64) -> Vec<f64> {
        let [k1, k2, k3, k4, ..] = &mut self.k;
        field.eval_into(x, k1, &mut self.scratch);
        for i in 0..x.len() {
            self.tmp[i] = x[i] + 0.5 * h * k1[i];
        }
        field.eval_into(&self.tmp, k2, &mut self.scratch);
        for i in 0..x.len() {
            self.tmp[i] = x[i] + 0.5 * h * k2[i];
        }
        field.eval_into(&self.tmp, k3, &mut self.scratch);
        for i in 0..x.len() {
            self.tmp[i] = x[i] + h * k3[i];
        }
        field.eval_into(&self.tmp, k4, &mut self.scratch);
        (0..x.len())
            .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect()
    }

    /// One Dormand–Prince step; returns the 5th-order state and the scaled RMS error.
    fn dopri_step(&mut self, field: &VectorField, x: &[f64], h: f64, atol: f64, rtol: f64) -> (Vec<f64>, f64) {
        let n = x.len();
        field.eval_into(x, &mut self.k[0], &mut self.scratch);
        for stage in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, a) in A[stage - 1].iter().enumerate().take(stage) {
                    acc += a * self.k[j][i];
                }
                self.tmp[i] = x[i] + h * acc;
            }
            let (done, rest) = self.k.split_at_mut(stage);
            let _ = done;
            field.eval_into(&self.tmp, &mut rest[0], &mut self.scratch);
        }
        // stage 7 was evaluated at the 5th-order solution, which is tmp
        let next = self.tmp.clone();
        let mut sum = 0.0;
        for i in 0..n {
            let e: f64 = h * (0..7).map(|j| (B5[j] - B4[j]) * self.k[j][i]).sum::<f64>();
            let scale = atol + rtol * x[i].abs().max(next[i].abs());
            sum += (e / scale).powi(2);
        }
        (next, (sum / n as f64).sqrt())
    }
}

/// Uniform draw on `[0.5, 1.5]^n`, multiplied by `sigma` when given.
pub fn random_initial_state(n: usize, seed: u64, sigma: Option<&FactionVector>) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
    match sigma {
        Some(s) => s.apply(&x),
        None => x,
    }
}
