//! Classical outer loop: maximize the ansatz expectation, record every
//! evaluation, then sample the final state.
//!
//! The minimizers work on `−E` and count every objective call against the
//! budget, so `max_evaluations` is an exact cap on circuit simulations.

mod nelder_mead;
mod spsa;

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::ansatz::{evaluate, final_state, initial_parameters, AnsatzConfig};
use crate::encoding::{decode, Bitstring, CostDiagonal};
use crate::error::{Error, Result};
use crate::phc4graph::DockingGraph;
use crate::simulator::SampleHistogram;

pub use nelder_mead::NelderMead;
pub use spsa::Spsa;

pub const DEFAULT_MAX_EVALUATIONS: usize = 40_000;
pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_TOP_K: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizerMethod {
    NelderMead,
    Spsa,
}

impl FromStr for OptimizerMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nelder-mead" | "nm" => Ok(Self::NelderMead),
            "spsa" => Ok(Self::Spsa),
            other => Err(Error::invalid(format!("unknown optimizer {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub method: OptimizerMethod,
    pub max_evaluations: usize,
    /// Seeds the initial parameters and any optimizer randomness.
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            method: OptimizerMethod::NelderMead,
            max_evaluations: DEFAULT_MAX_EVALUATIONS,
            seed: 0,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_evaluations == 0 {
            return Err(Error::invalid("max_evaluations must be at least 1"));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        Ok(())
    }
}

/// Result of a budgeted minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub best_x: Vec<f64>,
    pub best_f: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Counts calls and remembers the best point seen.
struct Budget<'a> {
    f: &'a mut dyn FnMut(&[f64]) -> Result<f64>,
    used: usize,
    limit: usize,
    best_x: Vec<f64>,
    best_f: f64,
}

impl<'a> Budget<'a> {
    fn new(f: &'a mut dyn FnMut(&[f64]) -> Result<f64>, limit: usize) -> Self {
        Self {
            f,
            used: 0,
            limit,
            best_x: Vec::new(),
            best_f: f64::INFINITY,
        }
    }

    /// `None` once the budget is spent.
    fn eval(&mut self, x: &[f64]) -> Result<Option<f64>> {
        if self.used >= self.limit {
            return Ok(None);
        }
        self.used += 1;
        let v = (self.f)(x)?;
        if v < self.best_f || self.best_x.is_empty() {
            self.best_f = v;
            self.best_x = x.to_vec();
        }
        Ok(Some(v))
    }

    fn finish(self, converged: bool) -> Minimum {
        Minimum {
            best_x: self.best_x,
            best_f: self.best_f,
            evaluations: self.used,
            converged,
        }
    }
}

/// Minimize `f` from `x0` with at most `budget` calls.
pub fn minimize(
    method: OptimizerMethod,
    f: &mut dyn FnMut(&[f64]) -> Result<f64>,
    x0: &[f64],
    budget: usize,
    tolerance: f64,
    seed: u64,
) -> Result<Minimum> {
    match method {
        OptimizerMethod::NelderMead => NelderMead {
            tolerance,
            ..NelderMead::default()
        }
        .minimize(f, x0, budget),
        OptimizerMethod::Spsa => Spsa {
            tolerance,
            seed,
            ..Spsa::default()
        }
        .minimize(f, x0, budget),
    }
}

/// One objective evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub index: usize,
    pub params: Vec<f64>,
    pub expectation: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub records: Vec<EvalRecord>,
    pub best_params: Vec<f64>,
    pub best_value: f64,
    pub converged: bool,
    pub wall_time_s: f64,
}

impl RunTrace {
    /// Running maximum of the expectation, one entry per evaluation.
    pub fn best_so_far(&self) -> Vec<f64> {
        let mut best = f64::NEG_INFINITY;
        self.records
            .iter()
            .map(|r| {
                best = best.max(r.expectation);
                best
            })
            .collect()
    }

    /// `eval,expectation,param_0,…` with one row per evaluation.
    pub fn to_csv(&self) -> String {
        let width = self.records.first().map_or(0, |r| r.params.len());
        let mut out = String::from("eval,expectation");
        for i in 0..width {
            let _ = write!(out, ",param_{i}");
        }
        out.push('\n');
        for r in &self.records {
            let _ = write!(out, "{},{}", r.index, r.expectation);
            for p in &r.params {
                let _ = write!(out, ",{p}");
            }
            out.push('\n');
        }
        out
    }
}

/// Maximize `⟨H_C⟩` over the ansatz parameters.
///
/// Starts from [`initial_parameters`] seeded by `config.seed`. A NaN or
/// infinite expectation aborts the run with [`Error::NonFinite`].
pub fn run(config: &OptimizerConfig, ansatz: &AnsatzConfig, diag: &CostDiagonal) -> Result<RunTrace> {
    config.validate()?;
    let x0 = initial_parameters(ansatz, config.seed);
    run_from(config, ansatz, diag, &x0)
}

/// Like [`run`] with an explicit starting point.
pub fn run_from(
    config: &OptimizerConfig,
    ansatz: &AnsatzConfig,
    diag: &CostDiagonal,
    x0: &[f64],
) -> Result<RunTrace> {
    config.validate()?;
    ansatz.check_parameters(x0)?;
    let start = Instant::now();
    let mut records: Vec<EvalRecord> = Vec::new();
    let mut objective = |x: &[f64]| -> Result<f64> {
        let t = Instant::now();
        let e = evaluate(ansatz, diag, x)?;
        if !e.is_finite() {
            return Err(Error::NonFinite {
                evaluation: records.len(),
                params: x.to_vec(),
            });
        }
        records.push(EvalRecord {
            index: records.len(),
            params: x.to_vec(),
            expectation: e,
            wall_time_s: t.elapsed().as_secs_f64(),
        });
        Ok(-e)
    };
    let outcome = minimize(
        config.method,
        &mut objective,
        x0,
        config.max_evaluations,
        config.tolerance,
        config.seed,
    )?;
    let best = records
        .iter()
        .fold(None::<&EvalRecord>, |b, r| match b {
            Some(b) if b.expectation >= r.expectation => Some(b),
            _ => Some(r),
        })
        .expect("at least one evaluation");
    Ok(RunTrace {
        best_params: best.params.clone(),
        best_value: best.expectation,
        converged: outcome.converged,
        wall_time_s: start.elapsed().as_secs_f64(),
        records,
    })
}

/// A measured bitstring with its decoded meaning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledBitstring {
    pub bitstring: Bitstring,
    pub count: u64,
    /// Objective value `F(z)`.
    pub energy: f64,
    pub vertices: Vec<usize>,
    pub is_clique: bool,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalSample {
    pub histogram: SampleHistogram,
    /// Ordered by count, then energy, then bitstring.
    pub top: Vec<SampledBitstring>,
    /// Highest-energy valid clique among `top`.
    pub solution: Option<SampledBitstring>,
}

/// Measure the state prepared by `params` and rank the outcomes.
pub fn sample_final(
    ansatz: &AnsatzConfig,
    diag: &CostDiagonal,
    graph: &DockingGraph,
    params: &[f64],
    shots: u64,
    seed: u64,
    top_k: usize,
) -> Result<FinalSample> {
    if shots == 0 {
        return Err(Error::invalid("shots must be at least 1"));
    }
    if graph.n() != diag.n() {
        return Err(Error::DimensionMismatch {
            expected: diag.n(),
            got: graph.n(),
        });
    }
    let histogram = final_state(ansatz, diag, params)?.sample(shots, seed);
    let mut ranked = histogram
        .counts
        .iter()
        .map(|(&z, &count)| {
            let bitstring = Bitstring::from_index(z, diag.n());
            let report = decode(&bitstring, graph)?;
            Ok(SampledBitstring {
                energy: diag.energies()[z as usize],
                count,
                vertices: report.vertices,
                is_clique: report.is_clique,
                weight: report.weight,
                bitstring,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|a, b| {
        b.count
            .cmp(&a.count)
            .then(b.energy.total_cmp(&a.energy))
            .then_with(|| a.bitstring.to_string().cmp(&b.bitstring.to_string()))
    });
    ranked.truncate(top_k);
    let solution = ranked
        .iter()
        .filter(|s| s.is_clique)
        .fold(None::<&SampledBitstring>, |best, s| match best {
            Some(b) if b.energy >= s.energy => Some(b),
            _ => Some(s),
        })
        .cloned();
    Ok(FinalSample {
        histogram,
        top: ranked,
        solution,
    })
}

/// Map `job` over `items` on at most `workers` threads, keeping input order.
pub fn run_sweep<T, R, F>(items: Vec<T>, workers: usize, job: F) -> Result<Vec<R>>
where
    T: Send,
    R: Send,
    F: Fn(T) -> Result<R> + Sync + Send,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    pool.install(|| items.into_par_iter().map(job).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::AnsatzFamily;
    use crate::encoding::{build_cost_diagonal, build_qubo};

    fn single_vertex() -> (DockingGraph, CostDiagonal) {
        let g = DockingGraph::new(vec![1.0], &[], None).unwrap();
        let d = build_cost_diagonal(&build_qubo(&g, 1.0).unwrap()).unwrap();
        (g, d)
    }

    #[test]
    fn one_qubit_reaches_the_excited_state() {
        let (_, d) = single_vertex();
        let a = AnsatzConfig::new(AnsatzFamily::Conventional, 1, None).unwrap();
        let cfg = OptimizerConfig {
            max_evaluations: 500,
            ..OptimizerConfig::default()
        };
        let t = run(&cfg, &a, &d).unwrap();
        assert!(t.best_value >= 0.99, "{}", t.best_value);
        assert!(t.records.len() <= 500);

        let one = OptimizerConfig {
            max_evaluations: 1,
            ..cfg
        };
        assert_eq!(run(&one, &a, &d).unwrap().records.len(), 1);
    }

    #[test]
    fn trace_is_deterministic_and_monotone() {
        let (_, d) = single_vertex();
        let a = AnsatzConfig::new(AnsatzFamily::DcQaoa, 2, None).unwrap();
        let cfg = OptimizerConfig {
            max_evaluations: 200,
            seed: 5,
            ..OptimizerConfig::default()
        };
        let t1 = run(&cfg, &a, &d).unwrap();
        let t2 = run(&cfg, &a, &d).unwrap();
        assert_eq!(t1.to_csv(), t2.to_csv());
        let b = t1.best_so_far();
        assert!(b.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(*b.last().unwrap(), t1.best_value);
    }

    #[test]
    fn csv_header() {
        let (_, d) = single_vertex();
        let a = AnsatzConfig::new(AnsatzFamily::Conventional, 1, None).unwrap();
        let cfg = OptimizerConfig {
            max_evaluations: 3,
            ..OptimizerConfig::default()
        };
        let csv = run(&cfg, &a, &d).unwrap().to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("eval,expectation,param_0,param_1"));
        assert_eq!(lines.count(), 3);
    }

    #[test]
    fn non_finite_objective_is_reported() {
        let f = |x: &[f64]| Ok(if x[0] > 0.5 { f64::NAN } else { -x[0] });
        let mut calls = 0usize;
        let mut g = |x: &[f64]| {
            calls += 1;
            let v = f(x)?;
            if v.is_nan() {
                return Err(Error::NonFinite {
                    evaluation: calls - 1,
                    params: x.to_vec(),
                });
            }
            Ok(v)
        };
        let r = minimize(OptimizerMethod::NelderMead, &mut g, &[0.0], 100, 1e-8, 0);
        assert!(matches!(r, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn negation_duality() {
        let f = |x: &[f64]| (x[0] - 0.7).powi(2) + (x[1] + 0.1).powi(2) * 3.0;
        let mut min_f = |x: &[f64]| Ok(f(x));
        let mut max_neg = |x: &[f64]| Ok(-(-f(x)));
        let a = minimize(OptimizerMethod::NelderMead, &mut min_f, &[0.0, 0.0], 400, 1e-9, 0).unwrap();
        let b = minimize(OptimizerMethod::NelderMead, &mut max_neg, &[0.0, 0.0], 400, 1e-9, 0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn final_sample_ranks_and_picks_a_clique() {
        let (g, d) = single_vertex();
        let a = AnsatzConfig::new(AnsatzFamily::Conventional, 1, None).unwrap();
        let cfg = OptimizerConfig {
            max_evaluations: 500,
            ..OptimizerConfig::default()
        };
        let t = run(&cfg, &a, &d).unwrap();
        let s = sample_final(&a, &d, &g, &t.best_params, 1000, 3, 10).unwrap();
        assert_eq!(s.top[0].bitstring.to_string(), "1");
        assert!(s.top.windows(2).all(|w| w[0].count >= w[1].count));
        assert_eq!(s.solution.as_ref().unwrap().vertices, vec![0]);
        assert!(sample_final(&a, &d, &g, &[0.0, 0.0], 0, 3, 10).is_err());
    }

    #[test]
    fn sweep_keeps_order() {
        let out = run_sweep((0..20).collect(), 3, |i: i32| Ok(i * i)).unwrap();
        assert_eq!(out, (0..20).map(|i| i * i).collect::<Vec<_>>());
    }
}
