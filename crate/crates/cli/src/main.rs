//! `hyperlap`: build Laplacian tensors, compute Perron pairs, test structural
//! balance and run consensus simulations from the command line.
//!
//! Exit codes: 0 when every verdict passes, 1 when a verdict fails, 2 on an
//! input or configuration error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use hyperlap::balance::{detect_joint_balance, BalanceCertificate, Conflict};
use hyperlap::dynamics::Method;
use hyperlap::hypergraph::parse_hypergraph;
use hyperlap::repro::{self, Builtin, ExperimentConfig, FieldVariant, GraphSource, Outcome};
use hyperlap::spectral::{perron_metzler, PowerIterationConfig};
use hyperlap::{CubicalTensor, Hypergraph, LaplacianSpec};

const SEED_ENV: &str = "HYPERLAP_SEED";

#[derive(Parser)]
#[command(name = "hyperlap", version, about = "Higher-order Laplacian consensus toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the Laplacian tensor of every layer and write it as JSON.
    Laplacian {
        /// Hypergraph JSON file or builtin name (fig-a .. fig-np).
        #[arg(long)]
        graph: String,
        #[arg(long, default_value = "def3")]
        spec: LaplacianSpec,
        /// Output directory; the tensor is printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Perron eigenpair of a Metzler tensor.
    Eig {
        /// Tensor JSON file.
        tensor: PathBuf,
        /// Use the negated tensor (e.g. pass L to get the pair of -L).
        #[arg(long)]
        negate: bool,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Structural-balance certificate of a signed hypergraph.
    Balance {
        #[arg(long)]
        graph: String,
    },
    /// Simulate consensus dynamics on a hypergraph.
    Simulate {
        /// Hypergraph JSON file or builtin name.
        #[arg(long, required_unless_present = "config")]
        graph: Option<String>,
        /// Experiment config JSON; command-line flags override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        spec: Option<LaplacianSpec>,
        /// Interaction function; selects the non-polynomial field.
        #[arg(long = "f")]
        f: Option<String>,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Reproduce a builtin scenario, or all of them.
    Repro {
        /// fig-a, fig-b, fig-c, fig-d, fig-np or all.
        which: String,
        #[command(flatten)]
        run: RunFlags,
    },
}

#[derive(Args)]
struct RunFlags {
    #[arg(long)]
    seed: Option<u64>,
    /// Fixed RK4 step; adaptive RK45 is used for graph files otherwise.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// Consensus tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl RunFlags {
    fn apply(&self, cfg: &mut ExperimentConfig) -> anyhow::Result<()> {
        if let Some(seed) = seed_override()?.or(self.seed) {
            cfg.seed = seed;
        }
        if let Some(dt) = self.dt {
            cfg.integrator = Method::rk4(dt);
        }
        if let Some(t) = self.t_end {
            cfg.t_end = t;
        }
        if let Some(tol) = self.tol {
            cfg.consensus_tol = tol;
        }
        cfg.out_dir = Some(self.out.clone());
        Ok(())
    }
}

fn seed_override() -> anyhow::Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => Ok(Some(
            v.trim().parse().with_context(|| format!("{SEED_ENV}={v:?} is not an unsigned integer"))?,
        )),
        Err(_) => Ok(None),
    }
}

/// A builtin name unless a file of that name exists.
fn graph_source(arg: &str) -> GraphSource {
    match arg.parse::<Builtin>() {
        Ok(b) if !Path::new(arg).exists() => GraphSource::Builtin(b),
        _ => GraphSource::File(arg.into()),
    }
}

fn load_graph(arg: &str) -> anyhow::Result<Hypergraph> {
    match graph_source(arg) {
        GraphSource::Builtin(b) => Ok(b.graph()),
        GraphSource::File(p) => {
            let text = std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
            let parsed = parse_hypergraph(&text).with_context(|| format!("parsing {}", p.display()))?;
            for w in &parsed.warnings {
                log::warn!("{w}");
            }
            Ok(parsed.graph)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Command) -> anyhow::Result<u8> {
    match cmd {
        Command::Laplacian { graph, spec, out } => cmd_laplacian(&graph, spec, out.as_deref()),
        Command::Eig { tensor, negate, tol } => cmd_eig(&tensor, negate, tol),
        Command::Balance { graph } => cmd_balance(&graph),
        Command::Simulate {
            graph,
            config,
            spec,
            f,
            run,
        } => {
            let mut cfg = match &config {
                Some(p) => {
                    let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                    ExperimentConfig::from_json_str(&text).with_context(|| format!("parsing {}", p.display()))?
                }
                None => {
                    let g = graph.as_deref().expect("clap enforces --graph or --config");
                    match graph_source(g) {
                        GraphSource::Builtin(b) => ExperimentConfig::builtin(b),
                        GraphSource::File(p) => ExperimentConfig::from_file(p, LaplacianSpec::DirectedWeighted),
                    }
                }
            };
            if let (Some(_), Some(g)) = (&config, &graph) {
                cfg.graph = graph_source(g);
            }
            if let Some(spec) = spec {
                cfg.spec = spec;
            }
            if let Some(f) = f {
                cfg.field = FieldVariant::NonPolynomial;
                cfg.interaction = f;
            }
            run.apply(&mut cfg)?;
            let result = repro::run_experiment(&cfg);
            report(&[cfg], vec![result], true)
        }
        Command::Repro { which, run } => {
            let builtins: Vec<Builtin> = if which == "all" {
                Builtin::ALL.to_vec()
            } else {
                vec![which.parse()?]
            };
            let mut cfgs = Vec::new();
            for b in builtins {
                let mut cfg = ExperimentConfig::builtin(b);
                run.apply(&mut cfg)?;
                cfgs.push(cfg);
            }
            let results = repro::run_batch(&cfgs);
            report(&cfgs, results, false)
        }
    }
}

fn cmd_laplacian(graph: &str, spec: LaplacianSpec, out: Option<&Path>) -> anyhow::Result<u8> {
    let g = load_graph(graph)?;
    let orders = g.orders();
    if orders.is_empty() {
        bail!("hypergraph has no edges");
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    for m in orders {
        let l = g.laplacian(m, spec)?;
        let diag: Vec<f64> = l.diagonal();
        eprintln!("order {m}: diagonal {diag:?}");
        match out {
            Some(dir) => {
                let path = dir.join(format!("laplacian-{spec}-k{m}.json"));
                std::fs::write(&path, l.to_json_string())?;
                println!("{}", path.display());
            }
            None => println!("{}", l.to_json_string()),
        }
    }
    Ok(0)
}

fn cmd_eig(path: &Path, negate: bool, tol: f64) -> anyhow::Result<u8> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut t = CubicalTensor::from_json_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if negate {
        t = t.scale(-1.0);
    }
    let cfg = PowerIterationConfig {
        tol,
        ..PowerIterationConfig::default()
    };
    let sol = perron_metzler(&t, &cfg)?;
    let out = json!({
        "lambda": sol.pair.lambda,
        "x": sol.pair.x,
        "residual": sol.pair.residual,
        "iterations": sol.iterations,
        "gap": sol.gap,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(0)
}

fn cmd_balance(graph: &str) -> anyhow::Result<u8> {
    let g = load_graph(graph)?;
    let out = match detect_joint_balance(&g)? {
        BalanceCertificate::Balanced(b) => json!({
            "balanced": true,
            "sigma": b.sigma.as_slice(),
        }),
        BalanceCertificate::Unbalanced(Conflict::Edges(edges)) => json!({
            "balanced": false,
            "conflict": edges.iter().map(|c| json!({
                "edge": c.edge + 1,
                "tuple": c.tuple.iter().map(|i| i + 1).collect::<Vec<_>>(),
                "weight": c.weight,
            })).collect::<Vec<_>>(),
        }),
        BalanceCertificate::Unbalanced(Conflict::Factions { certificate, nodes }) => json!({
            "balanced": false,
            "certificate": certificate,
            "nodes": nodes.iter().map(|i| i + 1).collect::<Vec<_>>(),
        }),
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(0)
}

fn report(cfgs: &[ExperimentConfig], results: Vec<hyperlap::Result<Outcome>>, print_summary: bool) -> anyhow::Result<u8> {
    let code = repro::exit_code(&results);
    for (cfg, r) in cfgs.iter().zip(&results) {
        match r {
            Ok(o) => {
                if let Some(dir) = &cfg.out_dir {
                    repro::write_outputs(dir, o).with_context(|| format!("writing outputs of {}", cfg.name))?;
                }
                if print_summary {
                    print!("{}", o.summary.to_json_string());
                } else {
                    let verdicts: Vec<String> = o
                        .summary
                        .verdicts()
                        .iter()
                        .map(|(k, v)| format!("{k}={}", serde_json::to_value(v).expect("verdict").as_str().unwrap_or("?")))
                        .collect();
                    println!(
                        "{} {} {}",
                        cfg.name,
                        if o.summary.passed { "PASS" } else { "FAIL" },
                        verdicts.join(" ")
                    );
                }
            }
            Err(e) => eprintln!("error: {}: {e}", cfg.name),
        }
    }
    Ok(code as u8)
}
