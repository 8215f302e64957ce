//! Lyapunov, consensus, sign and orthant monitors evaluated along trajectories.

use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::balance::FactionVector;
use crate::error::{Error, Result};

/// `V_m = max_i (x_i / x*_i)^{k-1}`.
pub fn monitor_vm(x: &[f64], xstar: &[f64], order: usize) -> Result<f64> {
    if x.len() != xstar.len() {
        return Err(Error::DimensionMismatch {
            expected: xstar.len(),
            got: x.len(),
        });
    }
    if let Some(i) = xstar.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "reference state must be strictly positive; entry {} is {}",
            i + 1,
            xstar[i]
        )));
    }
    Ok(vm_unchecked(x, xstar, order))
}

pub(crate) fn vm_unchecked(x: &[f64], xstar: &[f64], order: usize) -> f64 {
    let p = order as i32 - 1;
    x.iter()
        .zip(xstar)
        .map(|(a, b)| (a / b).powi(p))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Which agreement pattern to look for.
#[derive(Debug, Clone, PartialEq)]
pub enum ConsensusMode {
    Identical,
    /// Agreement of `sigma ⊙ x`.
    Bipartite(FactionVector),
    /// Agreement inside each group of 0-based node ids.
    Cluster(Vec<Vec<usize>>),
}

impl ConsensusMode {
    /// Largest within-group range of the (gauged) state.
    pub fn spread(&self, x: &[f64]) -> f64 {
        match self {
            ConsensusMode::Identical => range(x.iter().copied()),
            ConsensusMode::Bipartite(sigma) => range(sigma.apply(x).into_iter()),
            ConsensusMode::Cluster(groups) => groups
                .iter()
                .map(|g| range(g.iter().map(|&i| x[i])))
                .fold(0.0, f64::max),
        }
    }

    /// Mean of the (gauged) state per group; one value for identical/bipartite.
    pub fn values(&self, x: &[f64]) -> Vec<f64> {
        match self {
            ConsensusMode::Identical => vec![mean(x.iter().copied())],
            ConsensusMode::Bipartite(sigma) => vec![mean(sigma.apply(x).into_iter())],
            ConsensusMode::Cluster(groups) => groups.iter().map(|g| mean(g.iter().map(|&i| x[i]))).collect(),
        }
    }
}

fn range(it: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo.is_finite() {
        hi - lo
    } else {
        0.0
    }
}

fn mean(it: impl Iterator<Item = f64>) -> f64 {
    let (s, c) = it.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if c == 0 {
        0.0
    } else {
        s / c as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusHit {
    /// Time of the first sample of the first qualifying window.
    pub time: f64,
    pub index: usize,
    /// Common value averaged over the window (mean over all groups for clusters).
    pub alpha: f64,
    /// Per-group values averaged over the window.
    pub group_values: Vec<f64>,
}

/// First window of `window` consecutive samples whose spread stays below `tol`.
pub fn detect_consensus(traj: &Trajectory, mode: &ConsensusMode, tol: f64, window: usize) -> Option<ConsensusHit> {
    let window = window.max(1);
    let mut run = 0usize;
    for (i, x) in traj.states.iter().enumerate() {
        if mode.spread(x) < tol {
            run += 1;
        } else {
            run = 0;
        }
        if run == window {
            let start = i + 1 - window;
            let groups = mode.values(&traj.states[start]).len();
            let mut acc = vec![0.0; groups];
            for s in &traj.states[start..=i] {
                for (a, v) in acc.iter_mut().zip(mode.values(s)) {
                    *a += v;
                }
            }
            let group_values: Vec<f64> = acc.into_iter().map(|a| a / window as f64).collect();
            let alpha = mean(group_values.iter().copied());
            return Some(ConsensusHit {
                time: traj.times[start],
                index: start,
                alpha,
                group_values,
            });
        }
    }
    None
}

/// Tri-state verdict: `Flagged` marks results outside the regime the checks guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Flagged,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// Largest per-step increase of `V_m` tolerated by [`vm_nonincreasing`].
pub const VM_STEP_TOL: f64 = 1e-9;

/// True when the recorded `V_m` series never rises by more than `tol` per step.
pub fn vm_nonincreasing(traj: &Trajectory, tol: f64) -> bool {
    traj.monitors.vm.windows(2).all(|w| w[1] - w[0] <= tol)
}

pub const SIGN_DEAD_BAND: f64 = 1e-12;

/// Compares the sign of every component against the initial state. Components
/// within [`SIGN_DEAD_BAND`] of zero flag the run instead of failing it.
pub fn sign_preservation(traj: &Trajectory) -> Verdict {
    let Some(x0) = traj.states.first() else {
        return Verdict::Pass;
    };
    let mut flagged = false;
    for x in &traj.states {
        for (v, v0) in x.iter().zip(x0) {
            if v.abs() <= SIGN_DEAD_BAND || v0.abs() <= SIGN_DEAD_BAND {
                flagged = true;
            } else if v.signum() != v0.signum() {
                return Verdict::Fail;
            }
        }
    }
    if flagged {
        Verdict::Flagged
    } else {
        Verdict::Pass
    }
}

pub const DEFAULT_NEG_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PositivityReport {
    pub clean: bool,
    pub violations: usize,
    /// `(time, 0-based node, gauged value)` of the first violation.
    pub first_violation: Option<(f64, usize, f64)>,
    pub recommendation: Option<String>,
}

/// Checks that `sigma ⊙ x(t)` never drops below `-tol_neg` (plain `x` when
/// `sigma` is `None`). The initial state must lie in the closed orthant.
pub fn positivity_guard(traj: &Trajectory, sigma: Option<&FactionVector>, tol_neg: f64) -> Result<PositivityReport> {
    let gauged = |x: &[f64]| match sigma {
        Some(s) => s.apply(x),
        None => x.to_vec(),
    };
    if let Some(x0) = traj.states.first() {
        if let Some(i) = gauged(x0).iter().position(|&v| v < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "initial state component {} lies outside the orthant",
                i + 1
            )));
        }
    }
    let mut violations = 0;
    let mut first = None;
    for (t, x) in traj.times.iter().zip(&traj.states) {
        for (i, v) in gauged(x).into_iter().enumerate() {
            if v < -tol_neg {
                violations += 1;
                first.get_or_insert((*t, i, v));
            }
        }
    }
    let clean = violations == 0;
    Ok(PositivityReport {
        clean,
        violations,
        first_violation: first,
        recommendation: (!clean).then(|| {
            "state left the invariant orthant; this is integrator error, reduce the step size".to_string()
        }),
    })
}
