//! End-to-end runs: graph → optional relaxation → ansatz → optimizer →
//! sampling → decode, checked against the exact oracle.
//!
//! The two presets, `demo14` and `demo17`, are synthetic planted-clique
//! graphs with fixed seeds. They stand in for chemical instances of the same
//! size and are not derived from any real docking data.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzConfig, AnsatzFamily};
use crate::encoding::{build_cost_diagonal, build_qubo, Bitstring};
use crate::error::{Error, Result};
use crate::optimize::{
    run, run_sweep, sample_final, FinalSample, OptimizerConfig, OptimizerMethod, RunTrace,
    DEFAULT_MAX_EVALUATIONS, DEFAULT_TOLERANCE, DEFAULT_TOP_K,
};
use crate::oracle::{max_weight_clique_bb, max_weight_clique_exhaustive, OracleResult, EXHAUSTIVE_MAX_N};
use crate::phc4graph::{generate_synthetic, load_graph, to_dot, DockingGraph, SyntheticSpec};
use crate::relax::{
    solve_linear_relaxation, solve_quadratic_relaxation, to_warm_start_angles, RelaxedSolution,
    DEFAULT_EPSILON, DEFAULT_LP_ITERATIONS, DEFAULT_QP_STEPS, DEFAULT_QP_STEP_SIZE,
};

pub const PRESETS: [&str; 2] = ["demo14", "demo17"];
pub const DEFAULT_SHOTS: u64 = 8192;

/// Synthetic parameters behind a preset name.
pub fn preset(name: &str) -> Result<SyntheticSpec> {
    match name {
        "demo14" => Ok(SyntheticSpec {
            n: 14,
            edge_density: 0.3,
            weight_range: (0.1, 0.9),
            planted_clique: Some(4),
            seed: 14,
        }),
        "demo17" => Ok(SyntheticSpec {
            n: 17,
            edge_density: 0.3,
            weight_range: (0.1, 0.9),
            planted_clique: Some(5),
            seed: 6997,
        }),
        other => Err(Error::invalid(format!(
            "unknown preset {other:?} (expected one of {PRESETS:?})"
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WarmStartMode {
    None,
    Linear,
    Quadratic,
}

impl WarmStartMode {
    pub const ALL: [WarmStartMode; 3] = [Self::None, Self::Linear, Self::Quadratic];
}

impl fmt::Display for WarmStartMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::None => "none",
            Self::Linear => "linear",
            Self::Quadratic => "quadratic",
        })
    }
}

impl FromStr for WarmStartMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" | "cold" => Ok(Self::None),
            "linear" | "lp" => Ok(Self::Linear),
            "quadratic" | "qp" => Ok(Self::Quadratic),
            other => Err(Error::invalid(format!("unknown warm-start method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSource {
    File { path: PathBuf },
    Preset { name: String },
    Synthetic(SyntheticSpec),
}

impl GraphSource {
    pub fn load(&self) -> Result<DockingGraph> {
        match self {
            Self::File { path } => load_graph(path),
            Self::Preset { name } => generate_synthetic(&preset(name)?),
            Self::Synthetic(spec) => generate_synthetic(spec),
        }
    }
}

fn default_penalty() -> f64 {
    1.0
}
fn default_family() -> AnsatzFamily {
    AnsatzFamily::DcQaoa
}
fn default_layers() -> usize {
    1
}
fn default_warm_start() -> WarmStartMode {
    WarmStartMode::None
}
fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}
fn default_method() -> OptimizerMethod {
    OptimizerMethod::NelderMead
}
fn default_evaluations() -> usize {
    DEFAULT_MAX_EVALUATIONS
}
fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}
fn default_shots() -> u64 {
    DEFAULT_SHOTS
}
fn default_top_k() -> usize {
    DEFAULT_TOP_K
}

/// Everything needed to reproduce one run. `seed` drives the quadratic
/// relaxation, the initial parameters, the optimizer and the final sampling.
///
/// `family` may name a cold family together with a warm-start method; the
/// run then uses that family's warm-started counterpart. A warm family with
/// `warm_start = none` is rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub graph: GraphSource,
    #[serde(default = "default_penalty")]
    pub penalty_magnitude: f64,
    #[serde(default = "default_family")]
    pub family: AnsatzFamily,
    #[serde(default = "default_layers")]
    pub layers: usize,
    #[serde(default = "default_warm_start")]
    pub warm_start: WarmStartMode,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_method")]
    pub optimizer: OptimizerMethod,
    #[serde(default = "default_evaluations")]
    pub max_evaluations: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
}

impl ExperimentSpec {
    pub fn new(graph: GraphSource) -> Self {
        Self {
            label: None,
            graph,
            penalty_magnitude: default_penalty(),
            family: default_family(),
            layers: default_layers(),
            warm_start: default_warm_start(),
            epsilon: default_epsilon(),
            optimizer: default_method(),
            max_evaluations: default_evaluations(),
            tolerance: default_tolerance(),
            shots: default_shots(),
            seed: 0,
            top_k: default_top_k(),
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        preset(name)?;
        Ok(Self::new(GraphSource::Preset { name: name.to_owned() }))
    }

    /// Family actually run, after folding in the warm-start method.
    pub fn effective_family(&self) -> Result<AnsatzFamily> {
        match (self.family.is_warm(), self.warm_start) {
            (true, WarmStartMode::None) => Err(Error::invalid(format!(
                "family {} needs a warm-start method (linear or quadratic)",
                self.family
            ))),
            (_, mode) => Ok(self.family.with_warm_start(mode != WarmStartMode::None)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.effective_family()?;
        if !(self.penalty_magnitude.is_finite() && self.penalty_magnitude > 0.0) {
            return Err(Error::invalid("penalty magnitude must be positive"));
        }
        if self.layers == 0 {
            return Err(Error::invalid("layers must be at least 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::invalid(format!("epsilon must lie in (0, 0.5), got {}", self.epsilon)));
        }
        if self.shots == 0 {
            return Err(Error::invalid("shots must be at least 1"));
        }
        if self.top_k == 0 {
            return Err(Error::invalid("top_k must be at least 1"));
        }
        self.optimizer_config().validate()
    }

    pub fn optimizer_config(&self) -> OptimizerConfig {
        OptimizerConfig {
            method: self.optimizer,
            max_evaluations: self.max_evaluations,
            seed: self.seed,
            tolerance: self.tolerance,
        }
    }

    /// `label` if set, else e.g. `wsdc-p1-P1-quadratic-s0`.
    pub fn display_label(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        let family = self.effective_family().unwrap_or(self.family);
        format!(
            "{}-p{}-P{}-{}-s{}",
            family.short_name(),
            self.layers,
            self.penalty_magnitude,
            self.warm_start,
            self.seed
        )
    }
}

/// Reported outcome of one run; `wall_time_s` is the only field that varies
/// between identical reruns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub best_value: f64,
    pub best_params: Vec<f64>,
    pub solution_bitstring: Option<Bitstring>,
    pub solution_vertices: Vec<usize>,
    pub valid: bool,
    pub weight: f64,
    pub wall_time_s: f64,
    pub family: AnsatzFamily,
    pub layers: usize,
    pub penalty_magnitude: f64,
    pub warm_start: WarmStartMode,
    pub seed: u64,
    pub evaluations: usize,
    pub converged: bool,
    pub initial_value: f64,
    pub most_frequent_bitstring: Bitstring,
    pub oracle_weight: f64,
    pub matches_oracle: bool,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub spec: ExperimentSpec,
    pub graph: DockingGraph,
    pub relaxed: Option<RelaxedSolution>,
    pub trace: RunTrace,
    pub sample: FinalSample,
    pub oracle: OracleResult,
    pub summary: Summary,
}

pub fn exact_oracle(graph: &DockingGraph) -> Result<OracleResult> {
    if graph.n() <= EXHAUSTIVE_MAX_N {
        max_weight_clique_exhaustive(graph)
    } else {
        Ok(max_weight_clique_bb(graph))
    }
}

fn same_weight(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Runs `spec` on an already loaded graph.
pub fn solve_on(spec: &ExperimentSpec, graph: &DockingGraph) -> Result<SolveOutcome> {
    spec.validate()?;
    let start = Instant::now();
    let family = spec.effective_family()?;
    let qubo = build_qubo(graph, spec.penalty_magnitude)?;
    let diag = build_cost_diagonal(&qubo)?;

    let relaxed = match spec.warm_start {
        WarmStartMode::None => None,
        WarmStartMode::Linear => Some(solve_linear_relaxation(graph, DEFAULT_LP_ITERATIONS)?),
        WarmStartMode::Quadratic => Some(solve_quadratic_relaxation(
            &qubo,
            DEFAULT_QP_STEPS,
            DEFAULT_QP_STEP_SIZE,
            spec.seed,
        )?),
    };
    let angles = relaxed
        .as_ref()
        .map(|r| to_warm_start_angles(r, spec.epsilon))
        .transpose()?;
    let ansatz = AnsatzConfig::new(family, spec.layers, angles)?;

    let trace = run(&spec.optimizer_config(), &ansatz, &diag)?;
    let sample = sample_final(
        &ansatz,
        &diag,
        graph,
        &trace.best_params,
        spec.shots,
        spec.seed,
        spec.top_k,
    )?;
    let oracle = exact_oracle(graph)?;

    let (solution_bitstring, solution_vertices, valid, weight) = match &sample.solution {
        Some(s) => (Some(s.bitstring.clone()), s.vertices.clone(), true, s.weight),
        None => (None, Vec::new(), false, 0.0),
    };
    let summary = Summary {
        best_value: trace.best_value,
        best_params: trace.best_params.clone(),
        matches_oracle: valid && same_weight(weight, oracle.best_weight),
        solution_bitstring,
        solution_vertices,
        valid,
        weight,
        wall_time_s: start.elapsed().as_secs_f64(),
        family,
        layers: spec.layers,
        penalty_magnitude: spec.penalty_magnitude,
        warm_start: spec.warm_start,
        seed: spec.seed,
        evaluations: trace.records.len(),
        converged: trace.converged,
        initial_value: trace.records[0].expectation,
        most_frequent_bitstring: sample.top[0].bitstring.clone(),
        oracle_weight: oracle.best_weight,
    };
    Ok(SolveOutcome {
        spec: spec.clone(),
        graph: graph.clone(),
        relaxed,
        trace,
        sample,
        oracle,
        summary,
    })
}

pub fn solve(spec: &ExperimentSpec) -> Result<SolveOutcome> {
    spec.validate()?;
    solve_on(spec, &spec.graph.load()?)
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn to_json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

impl SolveOutcome {
    /// Writes `summary.json`, `trace.csv`, `histogram.json`, `top.json`,
    /// `solution.dot` and, for warm starts, `relaxed.json` into `dir`.
    pub fn write_artifacts(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_file(&dir.join("summary.json"), to_json(&self.summary))?;
        write_file(&dir.join("trace.csv"), self.trace.to_csv())?;
        write_file(&dir.join("histogram.json"), to_json(&self.sample.histogram))?;
        write_file(&dir.join("top.json"), to_json(&self.sample.top))?;
        let solution = self.sample.solution.as_ref().map(|s| s.vertices.as_slice());
        write_file(&dir.join("solution.dot"), to_dot(&self.graph, solution))?;
        if let Some(r) = &self.relaxed {
            write_file(&dir.join("relaxed.json"), to_json(r))?;
        }
        Ok(())
    }
}

/// Several runs on one graph.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub labels: Vec<String>,
    pub outcomes: Vec<SolveOutcome>,
}

/// Runs every spec on at most `workers` threads. All specs must resolve to
/// the same graph.
pub fn compare(specs: &[ExperimentSpec], workers: usize) -> Result<Comparison> {
    if specs.len() < 2 {
        return Err(Error::invalid(format!("need ≥ 2 specs to compare, got {}", specs.len())));
    }
    for s in specs {
        s.validate()?;
    }
    let graph = specs[0].graph.load()?;
    for s in &specs[1..] {
        if s.graph != specs[0].graph && s.graph.load()? != graph {
            return Err(Error::invalid("specs in a comparison must share one graph"));
        }
    }
    let mut labels: Vec<String> = specs.iter().map(ExperimentSpec::display_label).collect();
    let clashes = labels.iter().enumerate().any(|(i, l)| labels[..i].contains(l));
    if clashes {
        labels = labels.iter().enumerate().map(|(i, l)| format!("{l}#{i}")).collect();
    }
    let outcomes = run_sweep(specs.to_vec(), workers, |s| solve_on(&s, &graph))?;
    Ok(Comparison { labels, outcomes })
}

impl Comparison {
    /// `eval,<label>…`: each run's expectation per evaluation, blank once a
    /// run has stopped.
    pub fn cost_csv(&self) -> String {
        let mut out = String::from("eval");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        let rows = self.outcomes.iter().map(|o| o.trace.records.len()).max().unwrap_or(0);
        for i in 0..rows {
            out.push_str(&i.to_string());
            for o in &self.outcomes {
                out.push(',');
                if let Some(r) = o.trace.records.get(i) {
                    out.push_str(&r.expectation.to_string());
                }
            }
            out.push('\n');
        }
        out
    }

    /// One row per run: `label,family,layers,penalty,warm_start,seed,
    /// evaluations,best_value,valid,weight,oracle_weight,matched_oracle`.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from(
            "label,family,layers,penalty,warm_start,seed,evaluations,best_value,valid,weight,oracle_weight,matched_oracle\n",
        );
        for (l, o) in self.labels.iter().zip(&self.outcomes) {
            let s = &o.summary;
            out.push_str(&format!(
                "{l},{},{},{},{},{},{},{},{},{},{},{}\n",
                s.family.short_name(),
                s.layers,
                s.penalty_magnitude,
                s.warm_start,
                s.seed,
                s.evaluations,
                s.best_value,
                s.valid,
                s.weight,
                s.oracle_weight,
                s.matches_oracle
            ));
        }
        out
    }

    /// Writes `comparison.csv`, `comparison_summary.csv` and each run's
    /// artifacts under `runs/<label>/`.
    pub fn write_artifacts(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_file(&dir.join("comparison.csv"), self.cost_csv())?;
        write_file(&dir.join("comparison_summary.csv"), self.summary_csv())?;
        for (l, o) in self.labels.iter().zip(&self.outcomes) {
            let safe: String = l
                .chars()
                .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
                .collect();
            o.write_artifacts(dir.join("runs").join(safe))?;
        }
        Ok(())
    }
}

/// Penalty × depth × warm-start grid: DC-QAOA with `P ∈ {1, 2}`,
/// `p ∈ {1, 2}` and quadratic, linear and cold starts.
pub fn penalty_depth_grid(graph: GraphSource, max_evaluations: usize, seed: u64) -> Vec<ExperimentSpec> {
    let mut specs = Vec::new();
    for penalty in [1.0, 2.0] {
        for layers in [1, 2] {
            for warm_start in [WarmStartMode::Quadratic, WarmStartMode::Linear, WarmStartMode::None] {
                specs.push(ExperimentSpec {
                    penalty_magnitude: penalty,
                    layers,
                    warm_start,
                    max_evaluations,
                    seed,
                    ..ExperimentSpec::new(graph.clone())
                });
            }
        }
    }
    specs
}
