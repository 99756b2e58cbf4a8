//! The QAOA circuit families as parameterized programs on the simulator.
//!
//! One layer applies, in time order, the cost phase `exp(−iα H_C)`, the mixer
//! (`RX(β)` on every qubit, or the warm-start mixer for warm-started
//! families) and, for counterdiabatic families, `RY(γ)` on every qubit. The
//! per-qubit mixer and `RY` are fused into one 2×2 gate before application.
//!
//! Parameters are laid out flat, per layer `[α, β]` or `[α, β, γ]`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::encoding::CostDiagonal;
use crate::error::{Error, Result};
use crate::relax::WarmStartAngles;
use crate::simulator::{compose, rx, ry, warm_start_mixer_gate, Statevector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzFamily {
    /// Cost phase and `RX` mixer from `|+⟩^n`.
    Conventional,
    /// Conventional plus an `RY(γ)` counterdiabatic rotation per layer.
    DcQaoa,
    /// Warm-started product state with the matching rotated mixer.
    WarmStart,
    /// Warm start plus the counterdiabatic rotation.
    WarmStartDc,
}

impl AnsatzFamily {
    pub const ALL: [AnsatzFamily; 4] = [
        AnsatzFamily::Conventional,
        AnsatzFamily::DcQaoa,
        AnsatzFamily::WarmStart,
        AnsatzFamily::WarmStartDc,
    ];

    pub fn includes_cd(self) -> bool {
        matches!(self, AnsatzFamily::DcQaoa | AnsatzFamily::WarmStartDc)
    }

    pub fn is_warm(self) -> bool {
        matches!(self, AnsatzFamily::WarmStart | AnsatzFamily::WarmStartDc)
    }

    pub fn params_per_layer(self) -> usize {
        if self.includes_cd() {
            3
        } else {
            2
        }
    }

    /// Same counterdiabatic setting, other initial state.
    pub fn with_warm_start(self, warm: bool) -> Self {
        match (self.includes_cd(), warm) {
            (false, false) => AnsatzFamily::Conventional,
            (true, false) => AnsatzFamily::DcQaoa,
            (false, true) => AnsatzFamily::WarmStart,
            (true, true) => AnsatzFamily::WarmStartDc,
        }
    }

    /// Short name used on the command line.
    pub fn short_name(self) -> &'static str {
        match self {
            AnsatzFamily::Conventional => "conventional",
            AnsatzFamily::DcQaoa => "dc",
            AnsatzFamily::WarmStart => "ws",
            AnsatzFamily::WarmStartDc => "wsdc",
        }
    }
}

impl fmt::Display for AnsatzFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for AnsatzFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AnsatzFamily::ALL
            .into_iter()
            .find(|f| f.short_name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown ansatz family {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzConfig {
    family: AnsatzFamily,
    layers: usize,
    warm_start: Option<WarmStartAngles>,
}

impl AnsatzConfig {
    /// Warm-started families need angles; the others must not be given any.
    pub fn new(family: AnsatzFamily, layers: usize, warm_start: Option<WarmStartAngles>) -> Result<Self> {
        if layers == 0 {
            return Err(Error::invalid("an ansatz needs at least one layer"));
        }
        match (family.is_warm(), &warm_start) {
            (true, None) => Err(Error::invalid(format!("family {family} needs warm-start angles"))),
            (false, Some(_)) => Err(Error::invalid(format!(
                "family {family} starts from |+> and takes no warm-start angles"
            ))),
            _ => Ok(Self {
                family,
                layers,
                warm_start,
            }),
        }
    }

    pub fn family(&self) -> AnsatzFamily {
        self.family
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn warm_start(&self) -> Option<&WarmStartAngles> {
        self.warm_start.as_ref()
    }

    pub fn includes_cd(&self) -> bool {
        self.family.includes_cd()
    }

    /// `layers × (2 + includes_cd)`.
    pub fn parameter_count(&self) -> usize {
        self.layers * self.family.params_per_layer()
    }

    pub fn check_parameters(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.parameter_count() {
            return Err(Error::invalid(format!(
                "{} layer(s) of {} need {} parameters, got {}",
                self.layers,
                self.family,
                self.parameter_count(),
                params.len()
            )));
        }
        Ok(())
    }

    /// Splits a flat parameter vector into per-layer angles.
    pub fn split<'a>(&self, params: &'a [f64]) -> Result<impl Iterator<Item = LayerParams> + 'a> {
        self.check_parameters(params)?;
        let cd = self.includes_cd();
        Ok(params
            .chunks(self.family.params_per_layer())
            .map(move |c| LayerParams {
                alpha: c[0],
                beta: c[1],
                gamma: if cd { c[2] } else { 0.0 },
            }))
    }
}

/// Angles of one layer; `gamma` is 0 for families without the CD term.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LayerParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// Seeded starting point for cold optimization, uniform in `[−0.1, 0.1]`.
pub fn initial_parameters(config: &AnsatzConfig, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..config.parameter_count())
        .map(|_| rng.gen_range(-0.1..=0.1))
        .collect()
}

/// `|+⟩^n` for cold families, the warm-start product state otherwise.
pub fn prepare_initial(config: &AnsatzConfig, n: usize) -> Result<Statevector> {
    match &config.warm_start {
        Some(angles) => {
            if angles.thetas().len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: angles.thetas().len(),
                });
            }
            Statevector::warm_start(angles)
        }
        None => Statevector::uniform(n),
    }
}

pub fn apply_layer(
    sv: &mut Statevector,
    config: &AnsatzConfig,
    diag: &CostDiagonal,
    layer: LayerParams,
) -> Result<()> {
    sv.apply_cost_phase(diag, layer.alpha)?;
    let cd = config.includes_cd().then(|| ry(layer.gamma));
    let fuse = |mixer| match &cd {
        Some(g) => compose(g, &mixer),
        None => mixer,
    };
    match &config.warm_start {
        Some(angles) => {
            if angles.thetas().len() != sv.n() {
                return Err(Error::DimensionMismatch {
                    expected: sv.n(),
                    got: angles.thetas().len(),
                });
            }
            for (q, &theta) in angles.thetas().iter().enumerate() {
                sv.apply_gate(q, &fuse(warm_start_mixer_gate(theta, layer.beta)))?;
            }
        }
        None => {
            let gate = fuse(rx(layer.beta));
            for q in 0..sv.n() {
                sv.apply_gate(q, &gate)?;
            }
        }
    }
    Ok(())
}

/// State after all layers.
pub fn final_state(config: &AnsatzConfig, diag: &CostDiagonal, params: &[f64]) -> Result<Statevector> {
    let layers = config.split(params)?;
    let mut sv = prepare_initial(config, diag.n())?;
    for layer in layers {
        apply_layer(&mut sv, config, diag, layer)?;
    }
    Ok(sv)
}

/// `⟨ψ(params)|H_C|ψ(params)⟩`.
pub fn evaluate(config: &AnsatzConfig, diag: &CostDiagonal, params: &[f64]) -> Result<f64> {
    final_state(config, diag, params)?.expectation(diag)
}
