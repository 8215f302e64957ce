//! Experiment configuration, execution and verdict summaries.
//!
//! An [`ExperimentConfig`] names a graph (builtin or file), a Laplacian
//! construction, a field variant and integrator settings. [`run_experiment`]
//! turns it into a [`Trajectory`] plus a [`Summary`] whose verdicts are
//! tri-state: `flagged` marks regimes without a convergence guarantee
//! (unbalanced signs, odd orders, initial states outside the orthant, ...).

mod builtin;

pub use builtin::{Builtin, BUILTIN_NODES};

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::balance::{detect_joint_balance, even_order_guard, BalanceCertificate, FactionVector, OrderAdvisory};
use crate::dynamics::{
    self, detect_consensus, gnuplot_script, integrate, positivity_guard, random_initial_state, sign_preservation,
    vm_nonincreasing, ConsensusMode, InteractionFunction, IntegrateOptions, Method, MonitorSpec, StopRule,
    Termination, Trajectory, VectorField, Verdict, DEFAULT_CONSENSUS_TOL, DEFAULT_CONSENSUS_WINDOW,
    DEFAULT_NEG_TOL,
};
use crate::error::{Error, Result};
use crate::hypergraph::{parse_hypergraph, Hypergraph, LaplacianSpec};
use crate::tensor::CubicalTensor;

pub const SUMMARY_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_T_END: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphSource {
    Builtin(Builtin),
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldVariant {
    /// Uniform or non-uniform polynomial Laplacian dynamics.
    Laplacian,
    /// Interaction function applied to the head variables.
    NonPolynomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub graph: GraphSource,
    pub spec: LaplacianSpec,
    pub field: FieldVariant,
    /// `identity` or `arctan`.
    pub interaction: String,
    pub integrator: Method,
    pub seed: u64,
    pub t_end: f64,
    pub consensus_tol: f64,
    pub consensus_window: usize,
    /// Explicit initial state; drawn from `seed` when absent.
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    /// Reference state for `V_m`; `1` (or `d~` under def2) when absent.
    #[serde(default)]
    pub xstar: Option<Vec<f64>>,
    pub csv_stride: usize,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Settings for a builtin: RK4 with `dt = 1e-3`, consensus tolerance `1e-6` over 100 steps.
    pub fn builtin(b: Builtin) -> Self {
        Self {
            name: b.name().to_string(),
            graph: GraphSource::Builtin(b),
            spec: b.spec(),
            field: if b.is_non_polynomial() {
                FieldVariant::NonPolynomial
            } else {
                FieldVariant::Laplacian
            },
            interaction: if b.is_non_polynomial() { "arctan" } else { "identity" }.to_string(),
            integrator: Method::rk4(1e-3),
            seed: DEFAULT_SEED,
            t_end: DEFAULT_T_END,
            consensus_tol: DEFAULT_CONSENSUS_TOL,
            consensus_window: DEFAULT_CONSENSUS_WINDOW,
            x0: None,
            xstar: None,
            csv_stride: 10,
            out_dir: None,
        }
    }

    /// Settings for a graph file: the same fixed-step RK4 as the builtins.
    pub fn from_file(path: impl Into<PathBuf>, spec: LaplacianSpec) -> Self {
        let path = path.into();
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "experiment".into());
        Self {
            name,
            graph: GraphSource::File(path),
            spec,
            field: FieldVariant::Laplacian,
            interaction: "identity".into(),
            integrator: Method::rk4(1e-3),
            seed: DEFAULT_SEED,
            t_end: DEFAULT_T_END,
            consensus_tol: DEFAULT_CONSENSUS_TOL,
            consensus_window: DEFAULT_CONSENSUS_WINDOW,
            x0: None,
            xstar: None,
            csv_stride: 10,
            out_dir: None,
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidArgument(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !(self.consensus_tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "consensus tolerance must be positive, got {}",
                self.consensus_tol
            )));
        }
        if self.consensus_window == 0 || self.csv_stride == 0 {
            return Err(Error::InvalidArgument("consensus window and CSV stride must be at least 1".into()));
        }
        Ok(())
    }

    fn load_graph(&self) -> Result<(Hypergraph, Vec<String>)> {
        match &self.graph {
            GraphSource::Builtin(b) => Ok((b.graph(), Vec::new())),
            GraphSource::File(p) => {
                let text = std::fs::read_to_string(p)?;
                let parsed = parse_hypergraph(&text)?;
                Ok((parsed.graph, parsed.warnings))
            }
        }
    }
}

/// Result summary; identical configs yield byte-identical JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub experiment: String,
    pub spec: LaplacianSpec,
    pub field: FieldVariant,
    pub interaction: String,
    pub n: usize,
    pub orders: Vec<usize>,
    pub seed: u64,
    pub sigma: Option<Vec<i8>>,
    pub consensus_mode: String,
    pub consensus: Verdict,
    pub alpha: Option<f64>,
    pub alpha_verdict: Verdict,
    pub hit_time: Option<f64>,
    pub final_time: f64,
    pub final_spread: f64,
    pub samples: usize,
    pub termination: Termination,
    pub vm_monotone: Verdict,
    pub sign_preservation: Verdict,
    pub positivity: Verdict,
    pub positivity_violations: usize,
    pub experimental: bool,
    pub warnings: Vec<String>,
    pub passed: bool,
}

impl Summary {
    pub fn verdicts(&self) -> [(&'static str, Verdict); 5] {
        [
            ("consensus", self.consensus),
            ("alpha", self.alpha_verdict),
            ("vm_monotone", self.vm_monotone),
            ("sign_preservation", self.sign_preservation),
            ("positivity", self.positivity),
        ]
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub config: ExperimentConfig,
    pub summary: Summary,
    pub trajectory: Trajectory,
}

/// Field, gauge and monitor setup derived from a config before integration.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub graph: Hypergraph,
    pub field: VectorField,
    pub sigma: Option<FactionVector>,
    pub mode: ConsensusMode,
    pub xstar: Vec<f64>,
    pub experimental: bool,
    pub warnings: Vec<String>,
}

pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    cfg.validate()?;
    let (graph, mut warnings) = cfg.load_graph()?;
    let mut experimental = false;
    let n = graph.n();
    let orders = graph.orders();
    if orders.is_empty() {
        return Err(Error::InvalidArgument("hypergraph has no edges".into()));
    }

    let mut sigma = None;
    if graph.is_signed() {
        match detect_joint_balance(&graph)? {
            BalanceCertificate::Balanced(b) => sigma = Some(b.sigma),
            BalanceCertificate::Unbalanced(_) => {
                experimental = true;
                warnings.push("hypergraph is structurally unbalanced; dynamics are experimental".into());
            }
        }
    }
    for &m in &orders {
        if let OrderAdvisory::Warning(w) = even_order_guard(m, graph.is_signed()) {
            experimental = true;
            warnings.push(w);
        }
    }

    let layers = graph.laplacian_layers(cfg.spec)?;
    if !union_strongly_connected(&layers) {
        experimental = true;
        warnings.push("interaction digraph is not strongly connected; consensus is not guaranteed".into());
    }

    let field = match cfg.field {
        FieldVariant::Laplacian => {
            if cfg.interaction != "identity" {
                warnings.push(format!(
                    "interaction {:?} ignored by the polynomial Laplacian field",
                    cfg.interaction
                ));
            }
            VectorField::laplacian_layers(layers)?
        }
        FieldVariant::NonPolynomial => {
            let f: InteractionFunction = cfg.interaction.parse()?;
            let report = f.check_assumptions();
            let ok = if graph.is_signed() {
                report.signed_ok()
            } else {
                report.signless_ok()
            };
            if !ok {
                experimental = true;
                warnings.push(format!("interaction {} fails the sampled assumption check", f.name()));
            }
            VectorField::non_polynomial(layers, f)?
        }
    };

    let mut xstar = vec![1.0; n];
    let mut mode = match &sigma {
        Some(s) => ConsensusMode::Bipartite(s.clone()),
        None => ConsensusMode::Identical,
    };
    if cfg.spec == LaplacianSpec::DegreeNormalized {
        if let [order] = orders[..] {
            let d = graph.vertex_degrees(order)?;
            xstar = d.iter().map(|&di| (di as f64).powf(1.0 / order as f64)).collect();
            let mut degrees: Vec<usize> = d.clone();
            degrees.sort_unstable();
            degrees.dedup();
            let groups = degrees
                .iter()
                .map(|&g| (0..n).filter(|&i| d[i] == g).collect())
                .collect();
            mode = ConsensusMode::Cluster(groups);
            if d.contains(&0) {
                experimental = true;
                warnings.push("isolated nodes have no reference value; V_m is not meaningful".into());
                xstar.iter_mut().filter(|v| **v == 0.0).for_each(|v| *v = 1.0);
            }
        } else {
            experimental = true;
            warnings.push("def2 on a non-uniform hypergraph: falling back to identical-consensus monitoring".into());
        }
    }
    if let Some(user) = &cfg.xstar {
        if user.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: user.len() });
        }
        xstar = user.clone();
    }

    Ok(Prepared {
        graph,
        field,
        sigma,
        mode,
        xstar,
        experimental,
        warnings,
    })
}

fn union_strongly_connected(layers: &[CubicalTensor]) -> bool {
    let Some(first) = layers.first() else {
        return false;
    };
    let n = first.dim();
    let arcs = layers.iter().flat_map(|l| {
        l.influence_digraph()
            .into_iter()
            .enumerate()
            .flat_map(|(i, succ)| succ.into_iter().map(move |j| (vec![i, j], 1.0)))
    });
    match CubicalTensor::from_entries(2, n, arcs) {
        Ok(g) => n == 1 || g.weak_irreducibility(),
        Err(_) => false,
    }
}

fn mode_name(mode: &ConsensusMode) -> &'static str {
    match mode {
        ConsensusMode::Identical => "identical",
        ConsensusMode::Bipartite(_) => "bipartite",
        ConsensusMode::Cluster(_) => "cluster",
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome> {
    let prep = prepare(cfg)?;
    let n = prep.graph.n();
    let mut warnings = prep.warnings.clone();
    let mut experimental = prep.experimental;

    let x0 = match &cfg.x0 {
        Some(x) => {
            if x.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: x.len() });
            }
            x.clone()
        }
        None => random_initial_state(n, cfg.seed, prep.sigma.as_ref()),
    };
    let gauged0 = match &prep.sigma {
        Some(s) => s.apply(&x0),
        None => x0.clone(),
    };
    let in_orthant = gauged0.iter().all(|&v| v > 0.0);
    if !in_orthant {
        experimental = true;
        warnings.push("initial state is outside the open gauge orthant".into());
    }

    let opts = IntegrateOptions {
        method: cfg.integrator,
        t_end: cfg.t_end,
        monitors: MonitorSpec {
            xstar: prep.xstar.clone(),
            order: prep.field.leading_order(),
            sigma: prep.sigma.clone(),
        },
        stop: Some(StopRule {
            mode: prep.mode.clone(),
            tol: cfg.consensus_tol,
            window: cfg.consensus_window,
        }),
        require_orthant: false,
    };
    let traj = integrate(&prep.field, &x0, &opts)?;
    if matches!(traj.termination, Termination::Diverged | Termination::NonFinite) {
        warnings.push(format!("integration stopped early: {:?}", traj.termination));
    }

    // failures in regimes without a guarantee are reported as flagged
    let grade = |ok: bool| match (ok, experimental) {
        (true, _) => Verdict::Pass,
        (false, true) => Verdict::Flagged,
        (false, false) => Verdict::Fail,
    };

    let hit = detect_consensus(&traj, &prep.mode, cfg.consensus_tol, cfg.consensus_window);
    let final_spread = prep.mode.spread(traj.final_state());
    let consensus = grade(hit.is_some() && final_spread < cfg.consensus_tol);
    let alpha = hit.as_ref().map(|h| h.alpha);
    let alpha_verdict = grade(alpha.is_some_and(|a| a > 0.0));
    let vm_monotone = grade(vm_nonincreasing(
        &traj,
        cfg.integrator.vm_step_tolerance(&traj, &prep.xstar, prep.field.leading_order()),
    ));
    let sign = match sign_preservation(&traj) {
        Verdict::Fail => grade(false),
        v => v,
    };
    let (positivity, positivity_violations) = if in_orthant {
        let report = positivity_guard(&traj, prep.sigma.as_ref(), DEFAULT_NEG_TOL)?;
        if let Some(r) = &report.recommendation {
            warnings.push(r.clone());
        }
        (grade(report.clean), report.violations)
    } else {
        (Verdict::Flagged, 0)
    };

    let mut summary = Summary {
        schema_version: SUMMARY_SCHEMA_VERSION,
        experiment: cfg.name.clone(),
        spec: cfg.spec,
        field: cfg.field,
        interaction: cfg.interaction.clone(),
        n,
        orders: prep.graph.orders(),
        seed: cfg.seed,
        sigma: prep.sigma.as_ref().map(|s| s.as_slice().to_vec()),
        consensus_mode: mode_name(&prep.mode).to_string(),
        consensus,
        alpha,
        alpha_verdict,
        hit_time: hit.map(|h| h.time),
        final_time: traj.final_time(),
        final_spread,
        samples: traj.times.len(),
        termination: traj.termination,
        vm_monotone,
        sign_preservation: sign,
        positivity,
        positivity_violations,
        experimental,
        warnings,
        passed: false,
    };
    summary.passed = summary.verdicts().iter().all(|(_, v)| *v != Verdict::Fail);
    Ok(Outcome {
        config: cfg.clone(),
        summary,
        trajectory: traj,
    })
}

/// Writes `<name>.csv`, `<name>.gp` and `<name>.summary.json` into `dir`, creating it if needed.
pub fn write_outputs(dir: &Path, outcome: &Outcome) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let name = &outcome.summary.experiment;
    let csv = dir.join(format!("{name}.csv"));
    let gp = dir.join(format!("{name}.gp"));
    let summary = dir.join(format!("{name}.summary.json"));
    dynamics::write_csv(&csv, &outcome.trajectory, outcome.config.csv_stride)?;
    std::fs::write(
        &gp,
        gnuplot_script(&format!("{name}.csv"), outcome.summary.n, name),
    )?;
    std::fs::write(&summary, outcome.summary.to_json_string())?;
    Ok(vec![csv, gp, summary])
}

/// Runs the configs concurrently; results keep the input order.
pub fn run_batch(cfgs: &[ExperimentConfig]) -> Vec<Result<Outcome>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = cfgs.iter().map(|c| scope.spawn(move || run_experiment(c))).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::InvalidArgument("experiment thread panicked".into()))))
            .collect()
    })
}

/// `0` when every verdict passes, `1` on a failed verdict, `2` on an input or config error.
pub fn exit_code<'a>(results: impl IntoIterator<Item = &'a Result<Outcome>>) -> i32 {
    let mut code = 0;
    for r in results {
        match r {
            Err(_) => return 2,
            Ok(o) if !o.summary.passed => code = 1,
            Ok(_) => {}
        }
    }
    code
}
