//! Experiment configuration.
//!
//! The on-disk format is flat TOML: one `key = value` per line, keys named
//! after the fields below. Missing keys take their defaults; unknown keys are
//! rejected.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::capacity::MIN_MI_SAMPLES;
use crate::detection::GaussianShape;
use crate::noise::{kappa_from_baudrate, sigma2_from_baudrate};
use crate::{Error, HadamardOrder, ModelKind, PhaseNoiseModel, Result};

/// How the detection threshold is chosen at each operating point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "ThresholdModeRepr", into = "String")]
pub enum ThresholdMode {
    #[default]
    Optimized,
    HalfMean,
    Fixed(f64),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ThresholdModeRepr {
    Number(f64),
    Text(String),
}

impl TryFrom<ThresholdModeRepr> for ThresholdMode {
    type Error = Error;

    fn try_from(repr: ThresholdModeRepr) -> Result<Self> {
        match repr {
            ThresholdModeRepr::Number(v) => ThresholdMode::fixed(v),
            ThresholdModeRepr::Text(s) => s.parse(),
        }
    }
}

impl From<ThresholdMode> for String {
    fn from(mode: ThresholdMode) -> String {
        mode.to_string()
    }
}

impl ThresholdMode {
    pub fn fixed(epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::Config(format!(
                "fixed threshold must be finite and >= 0, got {epsilon}"
            )));
        }
        Ok(ThresholdMode::Fixed(epsilon))
    }
}

impl fmt::Display for ThresholdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdMode::Optimized => f.write_str("optimized"),
            ThresholdMode::HalfMean => f.write_str("half-mean"),
            ThresholdMode::Fixed(v) => write!(f, "fixed:{v}"),
        }
    }
}

impl FromStr for ThresholdMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "optimized" => Ok(ThresholdMode::Optimized),
            "half-mean" => Ok(ThresholdMode::HalfMean),
            _ => {
                let value = s.strip_prefix("fixed:").unwrap_or(s);
                let v: f64 = value.parse().map_err(|_| {
                    Error::Config(format!(
                        "threshold_mode must be optimized, half-mean, fixed:<value> or a number, got {s:?}"
                    ))
                })?;
                ThresholdMode::fixed(v)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Fiber attenuation per km.
    pub attenuation_a: f64,
    /// Fiber length in km.
    #[serde(rename = "fiber_length_L")]
    pub fiber_length_l: f64,
    /// Transmit photon flux in photons/s.
    #[serde(rename = "photon_flux_N")]
    pub photon_flux_n: f64,
    /// Baud rates in symbols/s.
    pub baud_grid: Vec<f64>,
    pub orders: Vec<usize>,
    pub noise_model_kinds: Vec<ModelKind>,
    pub phase_samples: usize,
    pub mi_samples: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub threshold_mode: ThresholdMode,
    pub gaussian_shape: GaussianShape,
    /// Multiplier on the phase-noise strength: `sigma2` is scaled by it and
    /// `kappa` divided by it.
    pub phase_noise_scale: f64,
    /// Number of RNG partitions for each MI estimate. Fixing it here keeps
    /// results independent of the worker count.
    pub mi_partitions: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            attenuation_a: 0.046,
            fiber_length_l: 250.0,
            photon_flux_n: 1e16,
            baud_grid: (0..15).map(|i| (50.0 + 25.0 * i as f64) * 1e9).collect(),
            orders: vec![4, 32],
            noise_model_kinds: vec![ModelKind::VonMises, ModelKind::WrappedNormal],
            phase_samples: 1000,
            mi_samples: 100_000,
            repetitions: 10,
            seed: 0x5eed,
            threshold_mode: ThresholdMode::Optimized,
            gaussian_shape: GaussianShape::Clt,
            phase_noise_scale: 1.0,
            mi_partitions: 8,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        for (name, v) in [
            ("attenuation_a", self.attenuation_a),
            ("fiber_length_L", self.fiber_length_l),
            ("photon_flux_N", self.photon_flux_n),
            ("phase_noise_scale", self.phase_noise_scale),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return bad(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if self.phase_noise_scale == 0.0 {
            return bad("phase_noise_scale must be > 0".into());
        }
        if self.baud_grid.is_empty() {
            return bad("baud_grid must not be empty".into());
        }
        if let Some(b) = self
            .baud_grid
            .iter()
            .find(|b| !(**b > 0.0) || !b.is_finite())
        {
            return bad(format!("baud rates must be finite and > 0, got {b}"));
        }
        if self.orders.is_empty() {
            return bad("orders must not be empty".into());
        }
        for &n in &self.orders {
            HadamardOrder::new(n)
                .map_err(|_| Error::Config(format!("order {n} is not a power of two >= 2")))?;
        }
        if self.noise_model_kinds.is_empty() {
            return bad("noise_model_kinds must not be empty".into());
        }
        if self.phase_samples == 0 {
            return bad("phase_samples must be >= 1".into());
        }
        if self.mi_samples < MIN_MI_SAMPLES {
            return bad(format!(
                "mi_samples must be >= {MIN_MI_SAMPLES}, got {}",
                self.mi_samples
            ));
        }
        if self.repetitions == 0 {
            return bad("repetitions must be >= 1".into());
        }
        if self.mi_partitions == 0 || self.mi_partitions > self.mi_samples {
            return bad(format!(
                "mi_partitions must lie in [1, mi_samples], got {}",
                self.mi_partitions
            ));
        }
        Ok(())
    }

    /// Noise law of `kind` at baud rate `b`, including `phase_noise_scale`.
    pub fn noise_model(&self, kind: ModelKind, b: f64) -> Result<PhaseNoiseModel> {
        match kind {
            ModelKind::WrappedNormal => {
                PhaseNoiseModel::wrapped_normal(sigma2_from_baudrate(b)? * self.phase_noise_scale)
            }
            ModelKind::VonMises => {
                PhaseNoiseModel::von_mises(kappa_from_baudrate(b)? / self.phase_noise_scale)
            }
        }
    }

    pub fn hadamard_orders(&self) -> Result<Vec<HadamardOrder>> {
        self.orders.iter().map(|&n| HadamardOrder::new(n)).collect()
    }
}
