//! Continuous relaxations of the clique problem, used to warm-start QAOA.
//!
//! The linear relaxation maximizes `Σ w_i x_i` subject to `x_i + x_j ≤ 1` for
//! every non-edge and `0 ≤ x ≤ 1`; it is solved by a dense bounded-variable
//! primal simplex. The quadratic relaxation maximizes the multilinear
//! extension of the penalized objective over the unit box by projected
//! gradient ascent. Either solution is clipped to `[ε, 1−ε]` and mapped to
//! `RY` angles with `sin²(θ/2) = c`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::encoding::QuboProblem;
use crate::error::{Error, Result};
use crate::phc4graph::DockingGraph;

pub const DEFAULT_LP_ITERATIONS: usize = 200;
pub const DEFAULT_EPSILON: f64 = 0.25;
pub const DEFAULT_QP_STEPS: usize = 500;
pub const DEFAULT_QP_STEP_SIZE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelaxMethod {
    Linear,
    Quadratic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxedSolution {
    pub values: Vec<f64>,
    pub objective: f64,
    pub method: RelaxMethod,
    pub iterations_used: usize,
    pub converged: bool,
    /// Objective after each ascent step (quadratic only).
    #[serde(default, skip_serializing)]
    pub history: Vec<f64>,
}

const TOL: f64 = 1e-9;

/// Dense tableau for `max cᵀx, Ax + s = 1, 0 ≤ x ≤ 1, s ≥ 0` where every row
/// of `A` has two ones (one row per non-edge).
struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    basic_value: Vec<f64>,
    reduced_cost: Vec<f64>,
    at_upper: Vec<bool>,
    upper: Vec<f64>,
    structural: usize,
}

enum Step {
    Optimal,
    Moved,
    Stuck,
}

impl Tableau {
    fn new(weights: &[f64], non_edges: &[(usize, usize)]) -> Self {
        let n = weights.len();
        let m = non_edges.len();
        let rows = non_edges
            .iter()
            .enumerate()
            .map(|(r, &(i, j))| {
                let mut row = vec![0.0; n + m];
                row[i] = 1.0;
                row[j] = 1.0;
                row[n + r] = 1.0;
                row
            })
            .collect();
        let mut reduced_cost = weights.to_vec();
        reduced_cost.resize(n + m, 0.0);
        let mut upper = vec![1.0; n];
        upper.resize(n + m, f64::INFINITY);
        Self {
            rows,
            basis: (n..n + m).collect(),
            basic_value: vec![1.0; m],
            reduced_cost,
            at_upper: vec![false; n + m],
            upper,
            structural: n,
        }
    }

    fn is_basic(&self, j: usize) -> bool {
        self.basis.contains(&j)
    }

    /// One iteration with Bland's rule: lowest eligible entering index, and
    /// lowest basic index among tied leaving candidates.
    fn step(&mut self) -> Step {
        let entering = (0..self.reduced_cost.len()).find(|&j| {
            !self.is_basic(j)
                && ((!self.at_upper[j] && self.reduced_cost[j] > TOL)
                    || (self.at_upper[j] && self.reduced_cost[j] < -TOL))
        });
        let Some(q) = entering else {
            return Step::Optimal;
        };
        let dir = if self.at_upper[q] { -1.0 } else { 1.0 };

        // (step length, basis position); None means the entering bound flips
        let mut limit = self.upper[q];
        let mut leave: Option<(usize, bool)> = None;
        for (r, row) in self.rows.iter().enumerate() {
            let rate = dir * row[q];
            let (t, to_upper) = if rate > TOL {
                (self.basic_value[r] / rate, false)
            } else if rate < -TOL && self.upper[self.basis[r]].is_finite() {
                ((self.upper[self.basis[r]] - self.basic_value[r]) / -rate, true)
            } else {
                continue;
            };
            let t = t.max(0.0);
            let better = match leave {
                _ if t < limit - TOL => true,
                Some((lr, _)) => t <= limit + TOL && self.basis[r] < self.basis[lr],
                None => false,
            };
            if better {
                limit = t;
                leave = Some((r, to_upper));
            }
        }
        if !limit.is_finite() {
            return Step::Stuck;
        }

        for (r, row) in self.rows.iter().enumerate() {
            self.basic_value[r] -= dir * limit * row[q];
        }
        let entering_value = if self.at_upper[q] { self.upper[q] } else { 0.0 } + dir * limit;

        match leave {
            None => self.at_upper[q] = !self.at_upper[q],
            Some((r, to_upper)) => {
                let out = self.basis[r];
                self.at_upper[out] = to_upper;
                self.basis[r] = q;
                self.basic_value[r] = entering_value;
                self.at_upper[q] = false;
                self.pivot(r, q);
            }
        }
        Step::Moved
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let p = self.rows[r][q];
        self.rows[r].iter_mut().for_each(|v| *v /= p);
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            let f = row[q];
            if i != r && f != 0.0 {
                row.iter_mut().zip(&pivot_row).for_each(|(v, pv)| *v -= f * pv);
            }
        }
        let f = self.reduced_cost[q];
        self.reduced_cost
            .iter_mut()
            .zip(&pivot_row)
            .for_each(|(v, pv)| *v -= f * pv);
    }

    fn structural_values(&self) -> Vec<f64> {
        let mut x: Vec<f64> = (0..self.structural)
            .map(|j| if self.at_upper[j] { self.upper[j] } else { 0.0 })
            .collect();
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.structural {
                x[b] = self.basic_value[r];
            }
        }
        x.iter().map(|v| v.clamp(0.0, 1.0)).collect()
    }
}

/// Linear relaxation by bounded-variable primal simplex from the all-zero
/// vertex. On hitting `max_iterations` the current (feasible) iterate is
/// returned with `converged = false`.
pub fn solve_linear_relaxation(graph: &DockingGraph, max_iterations: usize) -> Result<RelaxedSolution> {
    if graph.n() == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut tableau = Tableau::new(graph.weights(), &graph.non_edges());
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iterations {
        match tableau.step() {
            Step::Optimal => {
                converged = true;
                break;
            }
            Step::Moved => iterations += 1,
            Step::Stuck => break,
        }
    }
    if !converged && iterations == max_iterations {
        converged = matches!(tableau.step(), Step::Optimal);
    }
    let values = tableau.structural_values();
    let objective = values.iter().zip(graph.weights()).map(|(x, w)| x * w).sum();
    Ok(RelaxedSolution {
        values,
        objective,
        method: RelaxMethod::Linear,
        iterations_used: iterations,
        converged,
        history: Vec::new(),
    })
}

/// Projected gradient ascent on the multilinear extension of the QUBO
/// objective, from `x_i = 0.5 + U(−0.01, 0.01)` (seeded). Stops early once a
/// step moves no coordinate by more than `1e-12`.
pub fn solve_quadratic_relaxation(
    qubo: &QuboProblem,
    steps: usize,
    step_size: f64,
    seed: u64,
) -> Result<RelaxedSolution> {
    if steps == 0 {
        return Err(Error::invalid("steps must be at least 1"));
    }
    if !(step_size.is_finite() && step_size > 0.0) {
        return Err(Error::invalid(format!("step size must be > 0, got {step_size}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..qubo.n()).map(|_| 0.5 + rng.gen_range(-0.01..0.01)).collect();
    let mut history = Vec::with_capacity(steps);
    let mut converged = false;
    let mut used = 0;
    for _ in 0..steps {
        used += 1;
        let grad = qubo.continuous_gradient(&x);
        let mut moved = 0.0f64;
        for (xi, g) in x.iter_mut().zip(&grad) {
            let next = (*xi + step_size * g).clamp(0.0, 1.0);
            moved = moved.max((next - *xi).abs());
            *xi = next;
        }
        history.push(qubo.continuous_objective(&x));
        if moved <= 1e-12 {
            converged = true;
            break;
        }
    }
    Ok(RelaxedSolution {
        objective: qubo.continuous_objective(&x),
        values: x,
        method: RelaxMethod::Quadratic,
        iterations_used: used,
        converged,
        history,
    })
}

/// Per-qubit `RY` preparation angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarmStartAngles {
    thetas: Vec<f64>,
    epsilon: f64,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 0.5 {
        Ok(())
    } else {
        Err(Error::invalid(format!("epsilon must lie in (0, 0.5), got {epsilon}")))
    }
}

impl WarmStartAngles {
    /// Angles given directly; each must lie in
    /// `[2·asin(√ε), 2·asin(√(1−ε))]`.
    pub fn new(thetas: Vec<f64>, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        let lo = 2.0 * epsilon.sqrt().asin();
        let hi = 2.0 * (1.0 - epsilon).sqrt().asin();
        if let Some(t) = thetas.iter().find(|&&t| !(lo - 1e-12..=hi + 1e-12).contains(&t)) {
            return Err(Error::invalid(format!("angle {t} outside [{lo}, {hi}]")));
        }
        Ok(Self { thetas, epsilon })
    }

    /// `θ_i = 2·asin(√clip(v_i, ε, 1−ε))`.
    pub fn from_values(values: &[f64], epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        let thetas = values
            .iter()
            .map(|&v| 2.0 * v.clamp(epsilon, 1.0 - epsilon).sqrt().asin())
            .collect();
        Ok(Self { thetas, epsilon })
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Initial probability of reading 1 on each qubit, `sin²(θ/2)`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.thetas.iter().map(|t| (t / 2.0).sin().powi(2)).collect()
    }
}

pub fn to_warm_start_angles(sol: &RelaxedSolution, epsilon: f64) -> Result<WarmStartAngles> {
    WarmStartAngles::from_values(&sol.values, epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::build_qubo;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    #[test]
    fn complete_graph_lp_takes_everything() {
        let g = DockingGraph::complete(vec![1.0; 5]).unwrap();
        let sol = solve_linear_relaxation(&g, DEFAULT_LP_ITERATIONS).unwrap();
        assert!(sol.converged);
        assert_eq!(sol.values, vec![1.0; 5]);
        assert_eq!(sol.objective, 5.0);
    }

    #[test]
    fn path_lp_objective_is_two() {
        let g = DockingGraph::unweighted(3, &[(0, 1), (1, 2)]).unwrap();
        let sol = solve_linear_relaxation(&g, DEFAULT_LP_ITERATIONS).unwrap();
        assert!(sol.converged);
        assert!((sol.objective - 2.0).abs() < 1e-12);
        assert!((sol.values[1] - 1.0).abs() < 1e-12);
        assert!((sol.values[0] + sol.values[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn edgeless_lp_is_half_integral() {
        // K3 complement: x_i + x_j <= 1 for all pairs, optimum 1.5 at all-halves
        let g = DockingGraph::unweighted(3, &[]).unwrap();
        let sol = solve_linear_relaxation(&g, DEFAULT_LP_ITERATIONS).unwrap();
        assert!((sol.objective - 1.5).abs() < 1e-12);
    }

    #[test]
    fn iteration_limit_reports_not_converged() {
        let g = DockingGraph::unweighted(6, &[(0, 1)]).unwrap();
        let sol = solve_linear_relaxation(&g, 1).unwrap();
        assert!(!sol.converged);
        assert_eq!(sol.iterations_used, 1);
        // still feasible
        for (i, j) in g.non_edges() {
            assert!(sol.values[i] + sol.values[j] <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn quadratic_complete_graph_goes_to_ones() {
        let g = DockingGraph::complete(vec![1.0, 2.0, 0.5]).unwrap();
        let q = build_qubo(&g, 1.0).unwrap();
        let sol = solve_quadratic_relaxation(&q, DEFAULT_QP_STEPS, DEFAULT_QP_STEP_SIZE, 0).unwrap();
        assert_eq!(sol.values, vec![1.0; 3]);
        assert!(sol.converged);
    }

    #[test]
    fn quadratic_two_vertex_matches_grid_argmax() {
        let g = DockingGraph::new(vec![1.0, 2.0], &[], None).unwrap();
        let q = build_qubo(&g, 3.0).unwrap();
        // oracle: F over a 101x101 grid of the unit square
        let mut best = (f64::NEG_INFINITY, [0.0, 0.0]);
        for a in 0..=100 {
            for b in 0..=100 {
                let x = [a as f64 / 100.0, b as f64 / 100.0];
                let f = q.continuous_objective(&x);
                if f > best.0 {
                    best = (f, x);
                }
            }
        }
        assert_eq!(best.1, [0.0, 1.0]);
        let sol = solve_quadratic_relaxation(&q, DEFAULT_QP_STEPS, DEFAULT_QP_STEP_SIZE, 3).unwrap();
        assert!((sol.values[0] - best.1[0]).abs() < 1e-9);
        assert!((sol.values[1] - best.1[1]).abs() < 1e-9);
        assert!((sol.objective - best.0).abs() < 1e-9);
    }

    #[test]
    fn quadratic_ascent_is_monotone_with_small_steps() {
        let g = DockingGraph::new(
            vec![0.9, 0.4, 0.7, 0.3, 0.8, 0.5],
            &[(0, 1), (0, 2), (1, 3), (2, 4), (4, 5), (0, 4)],
            None,
        )
        .unwrap();
        let q = build_qubo(&g, 1.5).unwrap();
        let sol = solve_quadratic_relaxation(&q, 2000, 0.01, 17).unwrap();
        for w in sol.history.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "{} -> {}", w[0], w[1]);
        }
        assert!(sol.values.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn quadratic_is_seed_deterministic() {
        let g = DockingGraph::unweighted(5, &[(0, 1), (2, 3)]).unwrap();
        let q = build_qubo(&g, 2.0).unwrap();
        let a = solve_quadratic_relaxation(&q, 50, 0.05, 8).unwrap();
        let b = solve_quadratic_relaxation(&q, 50, 0.05, 8).unwrap();
        assert_eq!(a, b);
        assert!(solve_quadratic_relaxation(&q, 0, 0.05, 8).is_err());
    }

    #[test]
    fn angle_map() {
        let a = WarmStartAngles::from_values(&[0.5, 0.0, 1.0, 0.6], 0.25).unwrap();
        let t = a.thetas();
        assert!((t[0] - FRAC_PI_2).abs() < 1e-15);
        assert!((t[1] - FRAC_PI_3).abs() < 1e-15);
        assert!((t[2] - 2.0 * PI / 3.0).abs() < 1e-15);
        let p = a.probabilities();
        for (got, want) in p.iter().zip([0.5, 0.25, 0.75, 0.6]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn epsilon_range_checked() {
        for eps in [0.0, 0.5, -0.1, 0.7] {
            assert!(WarmStartAngles::from_values(&[0.5], eps).is_err());
        }
        assert!(WarmStartAngles::new(vec![0.1], 0.25).is_err());
        assert!(WarmStartAngles::new(vec![FRAC_PI_2], 0.25).is_ok());
    }

    #[test]
    fn relaxed_solution_json_shape() {
        let g = DockingGraph::unweighted(2, &[(0, 1)]).unwrap();
        let sol = solve_linear_relaxation(&g, 200).unwrap();
        let v: serde_json::Value = serde_json::to_value(&sol).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys, ["converged", "iterations_used", "method", "objective", "values"]);
        assert_eq!(v["method"], "linear");
    }
}
