use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Budget, Minimum};
use crate::error::Result;

/// Simultaneous perturbation stochastic approximation with the standard gain
/// sequences `a_k = a / (k + 1 + A)^0.602`, `c_k = c / (k + 1)^0.101`.
#[derive(Debug, Clone)]
pub struct Spsa {
    pub a: f64,
    pub c: f64,
    /// Stability constant `A`.
    pub stability: f64,
    /// Converged once an update moves the point by less than this (∞-norm).
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for Spsa {
    fn default() -> Self {
        Self {
            a: 0.1,
            c: 0.1,
            stability: 10.0,
            tolerance: 1e-7,
            seed: 0,
        }
    }
}

impl Spsa {
    pub fn minimize(
        &self,
        f: &mut dyn FnMut(&[f64]) -> Result<f64>,
        x0: &[f64],
        budget: usize,
    ) -> Result<Minimum> {
        let mut b = Budget::new(f, budget);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut x = x0.to_vec();
        if b.eval(&x)?.is_none() {
            return Ok(b.finish(false));
        }
        for k in 0.. {
            let ak = self.a / (k as f64 + 1.0 + self.stability).powf(0.602);
            let ck = self.c / (k as f64 + 1.0).powf(0.101);
            let delta: Vec<f64> = x
                .iter()
                .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
                .collect();
            let plus: Vec<f64> = x.iter().zip(&delta).map(|(v, d)| v + ck * d).collect();
            let minus: Vec<f64> = x.iter().zip(&delta).map(|(v, d)| v - ck * d).collect();
            let (Some(fp), Some(fm)) = (b.eval(&plus)?, b.eval(&minus)?) else {
                return Ok(b.finish(false));
            };
            let scale = (fp - fm) / (2.0 * ck);
            let mut moved = 0.0f64;
            for (v, d) in x.iter_mut().zip(&delta) {
                let step = ak * scale / d;
                moved = moved.max(step.abs());
                *v -= step;
            }
            if b.eval(&x)?.is_none() {
                return Ok(b.finish(false));
            }
            if moved < self.tolerance {
                return Ok(b.finish(true));
            }
        }
        unreachable!()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let mut f = |x: &[f64]| Ok((x[0] - 0.3).powi(2) + 2.0 * (x[1] + 0.2).powi(2));
        let m = Spsa {
            a: 0.3,
            ..Spsa::default()
        }
        .minimize(&mut f, &[1.0, 1.0], 4000)
        .unwrap();
        assert!(m.best_f < 1e-3, "{}", m.best_f);
    }
}
