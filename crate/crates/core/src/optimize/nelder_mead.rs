use super::{Budget, Minimum};
use crate::error::Result;

/// Downhill simplex with the usual coefficients (reflection 1, expansion 2,
/// contraction ½, shrink ½).
///
/// A round ends when the simplex fits in a box of half-width `tolerance`
/// around its best vertex, or when every vertex has the same value. After a
/// converged round the simplex is re-inflated around the best point up to
/// `restarts` times.
#[derive(Debug, Clone)]
pub struct NelderMead {
    pub initial_step: f64,
    pub tolerance: f64,
    pub restarts: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            initial_step: 0.25,
            tolerance: 1e-6,
            restarts: 1,
        }
    }
}

enum Round {
    Converged,
    Exhausted,
}

impl NelderMead {
    pub fn minimize(
        &self,
        f: &mut dyn FnMut(&[f64]) -> Result<f64>,
        x0: &[f64],
        budget: usize,
    ) -> Result<Minimum> {
        let mut b = Budget::new(f, budget);
        let mut start = x0.to_vec();
        let mut converged = false;
        for _ in 0..=self.restarts {
            match self.round(&mut b, &start)? {
                Round::Converged => converged = true,
                Round::Exhausted => {
                    converged = false;
                    break;
                }
            }
            start = b.best_x.clone();
        }
        Ok(b.finish(converged))
    }

    fn round(&self, b: &mut Budget<'_>, start: &[f64]) -> Result<Round> {
        let dim = start.len();
        let mut simplex = vec![start.to_vec()];
        for i in 0..dim {
            let mut v = start.to_vec();
            v[i] += self.initial_step;
            simplex.push(v);
        }
        let mut values = Vec::with_capacity(dim + 1);
        for v in &simplex {
            match b.eval(v)? {
                Some(fv) => values.push(fv),
                None => return Ok(Round::Exhausted),
            }
        }

        macro_rules! eval_or_stop {
            ($x:expr) => {
                match b.eval($x)? {
                    Some(v) => v,
                    None => return Ok(Round::Exhausted),
                }
            };
        }

        loop {
            let mut order: Vec<usize> = (0..=dim).collect();
            order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
            let best = order[0];
            let worst = order[dim];
            let second_worst = order[dim.saturating_sub(1)];

            let size = simplex
                .iter()
                .flat_map(|v| v.iter().zip(&simplex[best]).map(|(a, c)| (a - c).abs()))
                .fold(0.0, f64::max);
            if size <= self.tolerance || values[worst] == values[best] {
                return Ok(Round::Converged);
            }

            let centroid: Vec<f64> = (0..dim)
                .map(|k| {
                    order[..dim].iter().map(|&i| simplex[i][k]).sum::<f64>() / dim as f64
                })
                .collect();
            let toward = |t: f64, from: &[f64]| -> Vec<f64> {
                centroid.iter().zip(from).map(|(c, x)| c + t * (x - c)).collect()
            };

            let reflected = toward(-1.0, &simplex[worst]);
            let fr = eval_or_stop!(&reflected);
            if fr < values[best] {
                let expanded = toward(-2.0, &simplex[worst]);
                let fe = eval_or_stop!(&expanded);
                if fe < fr {
                    simplex[worst] = expanded;
                    values[worst] = fe;
                } else {
                    simplex[worst] = reflected;
                    values[worst] = fr;
                }
                continue;
            }
            if fr < values[second_worst] {
                simplex[worst] = reflected;
                values[worst] = fr;
                continue;
            }
            let (contracted, fc, accept) = if fr < values[worst] {
                let x = toward(-0.5, &simplex[worst]);
                let fc = eval_or_stop!(&x);
                (x, fc, fc <= fr)
            } else {
                let x = toward(0.5, &simplex[worst]);
                let fc = eval_or_stop!(&x);
                (x, fc, fc < values[worst])
            };
            if accept {
                simplex[worst] = contracted;
                values[worst] = fc;
                continue;
            }
            let anchor = simplex[best].clone();
            for &i in &order[1..] {
                simplex[i] = anchor
                    .iter()
                    .zip(&simplex[i])
                    .map(|(a, x)| a + 0.5 * (x - a))
                    .collect();
                values[i] = eval_or_stop!(&simplex[i]);
            }
        }
    }
}
