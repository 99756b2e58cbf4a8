//! Dense statevector simulation.
//!
//! Amplitude `z` belongs to the basis state whose bit `i` is qubit `i`
//! (little-endian, matching [`crate::encoding`]). Rotations follow
//! `RX(φ) = exp(−iφX/2)`, `RY(φ) = exp(−iφY/2)`, `RZ(φ) = exp(−iφZ/2)`.
//!
//! Large states are updated with rayon. Each amplitude is always computed by
//! the same arithmetic in the same order, and reductions use fixed-size
//! chunks, so results do not depend on the number of threads.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoding::{Bitstring, CostDiagonal};
use crate::error::{Error, Result};
use crate::relax::WarmStartAngles;

pub const DEFAULT_QUBIT_CAP: usize = 26;
pub const QUBIT_CAP_ENV: &str = "DOCKCLIQUE_QUBIT_CAP";

/// Work below this many amplitudes stays on the calling thread.
const PAR_MIN_LEN: usize = 1 << 14;
/// Chunk length of the deterministic reductions.
const REDUCE_CHUNK: usize = 1 << 12;

/// Qubit cap: `DOCKCLIQUE_QUBIT_CAP` if set to an integer, else 26.
pub fn qubit_cap() -> usize {
    std::env::var(QUBIT_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_QUBIT_CAP)
}

/// 2×2 unitary, row-major.
pub type Gate = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub fn rx(phi: f64) -> Gate {
    let (s, c) = (phi / 2.0).sin_cos();
    let m = Complex64::new(0.0, -s);
    [[Complex64::new(c, 0.0), m], [m, Complex64::new(c, 0.0)]]
}

pub fn ry(phi: f64) -> Gate {
    let (s, c) = (phi / 2.0).sin_cos();
    [
        [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
        [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
    ]
}

pub fn rz(phi: f64) -> Gate {
    [
        [Complex64::from_polar(1.0, -phi / 2.0), ZERO],
        [ZERO, Complex64::from_polar(1.0, phi / 2.0)],
    ]
}

/// `a · b` (apply `b` first).
pub fn compose(a: &Gate, b: &Gate) -> Gate {
    let mut out = [[ZERO; 2]; 2];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

/// The warm-start mixer for one qubit: `RY(θ) · RZ(−2β) · RY(−θ)`.
pub fn warm_start_mixer_gate(theta: f64, beta: f64) -> Gate {
    compose(&compose(&ry(theta), &rz(-2.0 * beta)), &ry(-theta))
}

/// Neumaier-compensated sum.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() {
            (sum - t) + v
        } else {
            (v - t) + sum
        };
        sum = t;
    }
    sum + comp
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    fn check_cap(n: usize, cap: usize) -> Result<()> {
        if n > cap {
            return Err(Error::ResourceLimit {
                what: "statevector",
                n,
                cap,
            });
        }
        Ok(())
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::uniform_with_cap(n, qubit_cap())
    }

    /// `|+⟩^n`.
    pub fn uniform_with_cap(n: usize, cap: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("a statevector needs at least one qubit"));
        }
        Self::check_cap(n, cap)?;
        let a = Complex64::new((0.5f64).powf(n as f64 / 2.0), 0.0);
        Ok(Self {
            n,
            amps: vec![a; 1 << n],
        })
    }

    /// `⊗_i RY(θ_i)|0⟩`, built directly as a product state.
    pub fn warm_start(angles: &WarmStartAngles) -> Result<Self> {
        let n = angles.thetas().len();
        if n == 0 {
            return Err(Error::invalid("a statevector needs at least one qubit"));
        }
        Self::check_cap(n, qubit_cap())?;
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        for (q, &theta) in angles.thetas().iter().enumerate() {
            let (s, c) = (theta / 2.0).sin_cos();
            let half = 1 << q;
            let (lower, upper) = amps[..2 * half].split_at_mut(half);
            for (lo, hi) in lower.iter_mut().zip(upper.iter_mut()) {
                *hi = *lo * s;
                *lo *= c;
            }
        }
        Ok(Self { n, amps })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n: usize, index: u64) -> Result<Self> {
        Self::check_cap(n, qubit_cap())?;
        if index >> n != 0 {
            return Err(Error::invalid(format!("basis index {index} needs more than {n} qubits")));
        }
        let mut amps = vec![ZERO; 1 << n];
        amps[index as usize] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// Wraps raw amplitudes; the length must be a power of two. The state is
    /// not renormalized.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if !amps.len().is_power_of_two() || amps.len() < 2 {
            return Err(Error::invalid(format!(
                "{} amplitudes is not a power of two ≥ 2",
                amps.len()
            )));
        }
        Ok(Self {
            n: amps.len().trailing_zeros() as usize,
            amps,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.reduce(|_, a| a.norm_sqr())
    }

    /// Probability that qubit `q` reads 1.
    pub fn marginal_one(&self, q: usize) -> f64 {
        self.reduce(|z, a| if z >> q & 1 == 1 { a.norm_sqr() } else { 0.0 })
    }

    fn reduce(&self, term: impl Fn(usize, &Complex64) -> f64 + Sync) -> f64 {
        let chunk_sum = |(c, chunk): (usize, &[Complex64])| {
            let base = c * REDUCE_CHUNK;
            compensated_sum(chunk.iter().enumerate().map(|(k, a)| term(base + k, a)))
        };
        let partials: Vec<f64> = if self.amps.len() >= PAR_MIN_LEN {
            self.amps.par_chunks(REDUCE_CHUNK).enumerate().map(chunk_sum).collect()
        } else {
            self.amps.chunks(REDUCE_CHUNK).enumerate().map(chunk_sum).collect()
        };
        compensated_sum(partials.into_iter())
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n {
            return Err(Error::invalid(format!(
                "qubit {qubit} out of range for {} qubits",
                self.n
            )));
        }
        Ok(())
    }

    fn check_diag(&self, diag: &CostDiagonal) -> Result<()> {
        if diag.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: diag.n(),
            });
        }
        Ok(())
    }

    /// Applies `gate` to `qubit`: every amplitude pair differing only in that
    /// bit is multiplied by the 2×2 matrix.
    pub fn apply_gate(&mut self, qubit: usize, gate: &Gate) -> Result<()> {
        self.check_qubit(qubit)?;
        let g = *gate;
        let stride = 1 << qubit;
        let kernel = move |lo: &mut Complex64, hi: &mut Complex64| {
            let (a, b) = (*lo, *hi);
            *lo = g[0][0] * a + g[0][1] * b;
            *hi = g[1][0] * a + g[1][1] * b;
        };
        let block = |chunk: &mut [Complex64]| {
            let (lower, upper) = chunk.split_at_mut(stride);
            lower.iter_mut().zip(upper.iter_mut()).for_each(|(a, b)| kernel(a, b));
        };
        if self.amps.len() < PAR_MIN_LEN {
            self.amps.chunks_mut(2 * stride).for_each(block);
        } else if stride >= REDUCE_CHUNK {
            self.amps.par_chunks_mut(2 * stride).for_each(|chunk| {
                let (lower, upper) = chunk.split_at_mut(stride);
                lower
                    .par_iter_mut()
                    .zip(upper.par_iter_mut())
                    .with_min_len(REDUCE_CHUNK)
                    .for_each(|(a, b)| kernel(a, b));
            });
        } else {
            self.amps
                .par_chunks_mut(2 * stride)
                .with_min_len(REDUCE_CHUNK / (2 * stride))
                .for_each(block);
        }
        Ok(())
    }

    pub fn apply_rx(&mut self, qubit: usize, beta: f64) -> Result<()> {
        self.apply_gate(qubit, &rx(beta))
    }

    pub fn apply_ry(&mut self, qubit: usize, gamma: f64) -> Result<()> {
        self.apply_gate(qubit, &ry(gamma))
    }

    pub fn apply_rz(&mut self, qubit: usize, phi: f64) -> Result<()> {
        self.apply_gate(qubit, &rz(phi))
    }

    /// `exp(−iα H_C)`: amplitude `z` picks up the phase `exp(−iα E[z])`.
    pub fn apply_cost_phase(&mut self, diag: &CostDiagonal, alpha: f64) -> Result<()> {
        self.check_diag(diag)?;
        if alpha == 0.0 {
            return Ok(());
        }
        let phase = |(a, &e): (&mut Complex64, &f64)| {
            *a *= Complex64::from_polar(1.0, -alpha * e);
        };
        if self.amps.len() >= PAR_MIN_LEN {
            self.amps
                .par_iter_mut()
                .zip(diag.energies().par_iter())
                .with_min_len(REDUCE_CHUNK)
                .for_each(phase);
        } else {
            self.amps.iter_mut().zip(diag.energies()).for_each(phase);
        }
        Ok(())
    }

    /// Per qubit `RY(θ_i) · RZ(−2β) · RY(−θ_i)`, the rotation about the axis
    /// of qubit `i`'s warm-start state. Identity at `β = 0`.
    pub fn apply_warm_start_mixer(&mut self, angles: &WarmStartAngles, beta: f64) -> Result<()> {
        if angles.thetas().len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: angles.thetas().len(),
            });
        }
        for (q, &theta) in angles.thetas().iter().enumerate() {
            self.apply_gate(q, &warm_start_mixer_gate(theta, beta))?;
        }
        Ok(())
    }

    /// `⟨ψ|H_C|ψ⟩ = Σ_z |a_z|² E[z]`.
    pub fn expectation(&self, diag: &CostDiagonal) -> Result<f64> {
        self.check_diag(diag)?;
        let energies = diag.energies();
        Ok(self.reduce(|z, a| a.norm_sqr() * energies[z]))
    }

    /// `shots` independent measurements in the computational basis, drawn by
    /// inverse-CDF lookup. Deterministic per `seed`.
    pub fn sample(&self, shots: u64, seed: u64) -> SampleHistogram {
        let mut acc = 0.0;
        let cdf: Vec<f64> = self
            .amps
            .iter()
            .map(|a| {
                acc += a.norm_sqr();
                acc
            })
            .collect();
        let total = acc;
        let last = cdf.len() - 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            let u = rng.gen::<f64>() * total;
            let z = cdf.partition_point(|&c| c <= u).min(last);
            *counts.entry(z as u64).or_insert(0) += 1;
        }
        SampleHistogram {
            n: self.n,
            shots,
            counts,
        }
    }

    /// Debug dump: `n` as a little-endian `u64`, then `(re, im)` pairs as
    /// little-endian `f64`s.
    pub fn write_binary(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut bytes = Vec::with_capacity(8 + 16 * self.amps.len());
        bytes.extend_from_slice(&(self.n as u64).to_le_bytes());
        for a in &self.amps {
            bytes.extend_from_slice(&a.re.to_le_bytes());
            bytes.extend_from_slice(&a.im.to_le_bytes());
        }
        fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }
}

/// Measurement counts keyed by basis index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleHistogram {
    pub n: usize,
    pub shots: u64,
    pub counts: BTreeMap<u64, u64>,
}

impl SampleHistogram {
    /// Most frequent outcome; ties go to the smallest index.
    pub fn most_frequent(&self) -> Option<(Bitstring, u64)> {
        self.counts
            .iter()
            .fold(None, |best: Option<(u64, u64)>, (&z, &c)| match best {
                Some((_, bc)) if bc >= c => best,
                _ => Some((z, c)),
            })
            .map(|(z, c)| (Bitstring::from_index(z, self.n), c))
    }

    pub fn frequency(&self, index: u64) -> f64 {
        self.counts.get(&index).copied().unwrap_or(0) as f64 / self.shots as f64
    }
}

#[derive(Serialize, Deserialize)]
struct HistogramFile {
    n: usize,
    shots: u64,
    counts: BTreeMap<String, u64>,
}

impl Serialize for SampleHistogram {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        HistogramFile {
            n: self.n,
            shots: self.shots,
            counts: self
                .counts
                .iter()
                .map(|(&z, &c)| (Bitstring::from_index(z, self.n).to_string(), c))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SampleHistogram {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = HistogramFile::deserialize(d)?;
        let counts = f
            .counts
            .into_iter()
            .map(|(k, c)| {
                let b: Bitstring = k.parse().map_err(serde::de::Error::custom)?;
                if b.len() != f.n {
                    return Err(serde::de::Error::custom(format!("{k} is not {} bits", f.n)));
                }
                Ok((b.to_index(), c))
            })
            .collect::<std::result::Result<_, _>>()?;
        Ok(Self {
            n: f.n,
            shots: f.shots,
            counts,
        })
    }
}
