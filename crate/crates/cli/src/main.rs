//! `dockclique` command-line front end.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use dockclique::ansatz::AnsatzFamily;
use dockclique::encoding::{build_cost_diagonal, build_qubo};
use dockclique::experiment::{
    compare, penalty_depth_grid, preset, solve, ExperimentSpec, GraphSource, WarmStartMode, DEFAULT_SHOTS,
};
use dockclique::optimize::{OptimizerMethod, DEFAULT_MAX_EVALUATIONS};
use dockclique::phc4graph::{
    build_graph, generate_synthetic, load_instance, save_graph, to_dot, EdgeRule, KindWeights,
    SyntheticSpec,
};
use dockclique::relax::{
    solve_linear_relaxation, solve_quadratic_relaxation, to_warm_start_angles, DEFAULT_EPSILON,
    DEFAULT_LP_ITERATIONS, DEFAULT_QP_STEPS, DEFAULT_QP_STEP_SIZE,
};

#[derive(Parser)]
#[command(name = "dockclique", version, about = "Max-weight clique docking with QAOA-style circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a docking graph from a pharmacophore instance.
    Build(BuildArgs),
    /// Run one experiment end to end.
    Solve(SolveArgs),
    /// Run several experiments on one graph and align their cost traces.
    Compare(CompareArgs),
    /// Solve a continuous relaxation and print warm-start angles.
    Relax(RelaxArgs),
    /// Exact maximum-weight clique.
    Oracle(GraphArgs),
    /// Write a synthetic graph.
    Generate(GenerateArgs),
    /// Export the cost diagonal as `<stem>.bin` + `<stem>.json`.
    Diag(DiagArgs),
}

#[derive(Copy, Clone, ValueEnum)]
enum RuleArg {
    Tau,
    Delta,
}

#[derive(Args)]
struct BuildArgs {
    instance: PathBuf,
    #[arg(long, value_enum)]
    rule: RuleArg,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// JSON object mapping pharmacophore kinds to vertex weights.
    #[arg(long)]
    kind_weights: Option<PathBuf>,
    /// Graph JSON to write; a `.dot` rendering goes next to it.
    #[arg(long, default_value = "graph.json")]
    out: PathBuf,
}

#[derive(Args, Clone)]
#[group(required = true, multiple = false)]
struct GraphArgs {
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
}

impl GraphArgs {
    fn source(&self) -> GraphSource {
        match (&self.graph, &self.preset) {
            (Some(path), _) => GraphSource::File { path: path.clone() },
            (None, Some(name)) => GraphSource::Preset { name: name.clone() },
            (None, None) => unreachable!("clap requires one of --graph/--preset"),
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum FamilyArg {
    Conventional,
    Dc,
    Ws,
    Wsdc,
}

impl From<FamilyArg> for AnsatzFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Conventional => AnsatzFamily::Conventional,
            FamilyArg::Dc => AnsatzFamily::DcQaoa,
            FamilyArg::Ws => AnsatzFamily::WarmStart,
            FamilyArg::Wsdc => AnsatzFamily::WarmStartDc,
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum WarmArg {
    None,
    Linear,
    Quadratic,
}

impl From<WarmArg> for WarmStartMode {
    fn from(w: WarmArg) -> Self {
        match w {
            WarmArg::None => WarmStartMode::None,
            WarmArg::Linear => WarmStartMode::Linear,
            WarmArg::Quadratic => WarmStartMode::Quadratic,
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum OptimizerArg {
    NelderMead,
    Spsa,
}

impl From<OptimizerArg> for OptimizerMethod {
    fn from(o: OptimizerArg) -> Self {
        match o {
            OptimizerArg::NelderMead => OptimizerMethod::NelderMead,
            OptimizerArg::Spsa => OptimizerMethod::Spsa,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, value_enum, default_value = "dc")]
    family: FamilyArg,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    layers: u32,
    #[arg(long, default_value_t = 1.0)]
    penalty: f64,
    #[arg(long, value_enum, default_value = "none")]
    warm_start: WarmArg,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    eps: f64,
    /// Objective evaluation budget.
    #[arg(long, default_value_t = DEFAULT_MAX_EVALUATIONS as u64, value_parser = clap::value_parser!(u64).range(1..))]
    iters: u64,
    #[arg(long, value_enum, default_value = "nelder-mead")]
    optimizer: OptimizerArg,
    #[arg(long, default_value_t = DEFAULT_SHOTS, value_parser = clap::value_parser!(u64).range(1..))]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// Experiment spec JSON files.
    #[arg(long = "spec")]
    specs: Vec<PathBuf>,
    /// Run the penalty × depth × warm-start grid on this preset instead.
    #[arg(long, conflicts_with = "specs", requires = "grid")]
    preset: Option<String>,
    #[arg(long, requires = "preset")]
    grid: bool,
    /// Evaluation budget per grid run.
    #[arg(long, default_value_t = DEFAULT_MAX_EVALUATIONS as u64, value_parser = clap::value_parser!(u64).range(1..))]
    iters: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    workers: u32,
    #[arg(long, default_value = "compare-out")]
    out: PathBuf,
}

#[derive(Copy, Clone, ValueEnum)]
enum RelaxArg {
    Linear,
    Quadratic,
}

#[derive(Args)]
struct RelaxArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, value_enum)]
    method: RelaxArg,
    /// Penalty of the objective the quadratic relaxation ascends.
    #[arg(long, default_value_t = 1.0)]
    penalty: f64,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.3)]
    density: f64,
    #[arg(long, default_value_t = 0.1)]
    weight_min: f64,
    #[arg(long, default_value_t = 0.9)]
    weight_max: f64,
    /// Size of a planted clique that will be the unique optimum.
    #[arg(long)]
    planted: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "graph.json")]
    out: PathBuf,
}

#[derive(Args)]
struct DiagArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, default_value_t = 1.0)]
    penalty: f64,
    #[arg(long, default_value = "diag")]
    out: PathBuf,
}

enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<dockclique::Error> for Failure {
    fn from(e: dockclique::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn print_json(value: &impl serde::Serialize) -> anyhow::Result<()> {
    emit(&format!("{}\n", serde_json::to_string_pretty(value)?))
}

/// Writes to stdout; a closed pipe (`| head`) is not an error.
fn emit(text: &str) -> anyhow::Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Build(a) => build(a),
        Command::Solve(a) => solve_cmd(a),
        Command::Compare(a) => compare_cmd(a),
        Command::Relax(a) => relax(a),
        Command::Oracle(a) => {
            check_preset(&a)?;
            let g = a.source().load()?;
            print_json(&dockclique::experiment::exact_oracle(&g)?)?;
            Ok(())
        }
        Command::Generate(a) => generate(a),
        Command::Diag(a) => {
            check_preset(&a.graph)?;
            let g = a.graph.source().load()?;
            let qubo = build_qubo(&g, a.penalty).map_err(usage)?;
            build_cost_diagonal(&qubo)?.write(&a.out)?;
            Ok(())
        }
    }
}

fn check_preset(g: &GraphArgs) -> Result<(), Failure> {
    if let Some(name) = &g.preset {
        preset(name).map_err(usage)?;
    }
    Ok(())
}

fn build(a: BuildArgs) -> Result<(), Failure> {
    let rule = match (a.rule, a.tau, a.delta) {
        (RuleArg::Tau, Some(tau), _) => EdgeRule::TauBuffer { tau },
        (RuleArg::Delta, _, Some(delta)) => EdgeRule::DeltaSum { delta },
        (RuleArg::Tau, None, _) => return Err(usage("--rule tau needs --tau")),
        (RuleArg::Delta, _, None) => return Err(usage("--rule delta needs --delta")),
    };
    rule.validate().map_err(usage)?;
    let instance = load_instance(&a.instance)?;
    let weights: Option<KindWeights> = match &a.kind_weights {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Some(serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?)
        }
        None => None,
    };
    let graph = build_graph(&instance, rule, weights.as_ref())?;
    save_graph(&graph, &a.out)?;
    let dot = a.out.with_extension("dot");
    fs::write(&dot, to_dot(&graph, None)).with_context(|| format!("writing {}", dot.display()))?;
    eprintln!(
        "{} vertices, {} edges -> {}",
        graph.n(),
        graph.edges().len(),
        a.out.display()
    );
    Ok(())
}

fn solve_cmd(a: SolveArgs) -> Result<(), Failure> {
    check_preset(&a.graph)?;
    let spec = ExperimentSpec {
        penalty_magnitude: a.penalty,
        family: a.family.into(),
        layers: a.layers as usize,
        warm_start: a.warm_start.into(),
        epsilon: a.eps,
        optimizer: a.optimizer.into(),
        max_evaluations: a.iters as usize,
        shots: a.shots,
        seed: a.seed,
        ..ExperimentSpec::new(a.graph.source())
    };
    spec.validate().map_err(usage)?;
    let outcome = solve(&spec)?;
    outcome.write_artifacts(&a.out)?;
    write_spec(&a.out, &spec)?;
    print_json(&outcome.summary)?;
    Ok(())
}

fn write_spec(dir: &Path, spec: &ExperimentSpec) -> anyhow::Result<()> {
    let path = dir.join("spec.json");
    let mut text = serde_json::to_string_pretty(spec)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

fn compare_cmd(a: CompareArgs) -> Result<(), Failure> {
    let specs = if let Some(name) = &a.preset {
        preset(name).map_err(usage)?;
        penalty_depth_grid(GraphSource::Preset { name: name.clone() }, a.iters as usize, a.seed)
    } else {
        let mut specs = Vec::new();
        for path in &a.specs {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let spec: ExperimentSpec =
                serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            specs.push(spec);
        }
        specs
    };
    if specs.len() < 2 {
        return Err(usage(format!("need ≥ 2 specs to compare, got {}", specs.len())));
    }
    for s in &specs {
        s.validate().map_err(usage)?;
    }
    let comparison = compare(&specs, a.workers as usize)?;
    comparison.write_artifacts(&a.out)?;
    emit(&comparison.summary_csv())?;
    Ok(())
}

fn relax(a: RelaxArgs) -> Result<(), Failure> {
    check_preset(&a.graph)?;
    let g = a.graph.source().load()?;
    let sol = match a.method {
        RelaxArg::Linear => solve_linear_relaxation(&g, DEFAULT_LP_ITERATIONS)?,
        RelaxArg::Quadratic => {
            let qubo = build_qubo(&g, a.penalty).map_err(usage)?;
            solve_quadratic_relaxation(&qubo, DEFAULT_QP_STEPS, DEFAULT_QP_STEP_SIZE, a.seed)?
        }
    };
    let angles = to_warm_start_angles(&sol, a.eps).map_err(usage)?;
    print_json(&serde_json::json!({ "relaxed": sol, "warm_start": angles }))?;
    Ok(())
}

fn generate(a: GenerateArgs) -> Result<(), Failure> {
    let spec = SyntheticSpec {
        n: a.n,
        edge_density: a.density,
        weight_range: (a.weight_min, a.weight_max),
        planted_clique: a.planted,
        seed: a.seed,
    };
    spec.validate().map_err(usage)?;
    save_graph(&generate_synthetic(&spec)?, &a.out)?;
    Ok(())
}
