//! TOML experiment files and their merge with command-line overrides.
//!
//! ```toml
//! seed = 7
//! out = "readout.csv"
//!
//! [noise.readout]
//! p = 0.02                                   # or matrix = [[0.98, 0.02], [0.03, 0.97]]
//! [noise.depolarizing]
//! p1 = 0.001
//! p2 = 0.01
//! [noise.thermal]
//! t1_ns = 50000.0
//! t2_ns = 70000.0
//! sigma_fraction = 0.1
//! deterministic = false
//! [noise.durations]
//! cnot_ns = 300.0
//!
//! [sweep]
//! noise = "readout"
//! steps = 21
//! state = "random"
//! n_states = 20
//! mode = "shots"
//! shots = 100000
//! repeats = 30
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use qbench::circuits::{GateDurations, PreparationParams};
use qbench::noise::{ConfusionMatrix, DepolarizingError, NoiseModel, ReadoutError, ThermalRelaxation};
use qbench::sweep::{
    default_grid, NoiseAxis, StateSource, SweepConfig, SweepMode, DEFAULT_ENSEMBLE_SIZE, DEFAULT_STEPS,
    DEFAULT_T2_RATIO,
};

use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub readout: Option<ReadoutSection>,
    pub depolarizing: Option<DepolarizingSection>,
    pub thermal: Option<ThermalSection>,
    pub durations: Option<DurationsSection>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ReadoutSection {
    pub p: Option<f64>,
    pub matrix: Option<[[f64; 2]; 2]>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DepolarizingSection {
    pub p1: Option<f64>,
    pub p2: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ThermalSection {
    pub t1_ns: Option<f64>,
    pub t2_ns: Option<f64>,
    pub sigma_fraction: Option<f64>,
    pub deterministic: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DurationsSection {
    pub single_u_ns: Option<f64>,
    pub cnot_ns: Option<f64>,
    pub reset_ns: Option<f64>,
    pub measure_ns: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub noise: Option<String>,
    pub steps: Option<usize>,
    pub t2_ratio: Option<f64>,
    pub state: Option<String>,
    pub n_states: Option<usize>,
    /// `[theta1, theta2, phi1, phi2]` per state, for `state = "explicit"`.
    pub states: Option<Vec<[f64; 4]>>,
    pub mode: Option<String>,
    pub shots: Option<u64>,
    pub repeats: Option<usize>,
    pub ci_level: Option<f64>,
    pub resamples: Option<usize>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    /// The fixed (non-swept) noise described by `[noise]`.
    pub fn noise_model(&self) -> Result<NoiseModel, CliError> {
        fn key(k: &'static str) -> impl Fn(qbench::Error) -> CliError {
            move |e| CliError::Usage(format!("noise.{k}: {e}"))
        }
        let mut model = NoiseModel::ideal();
        if let Some(r) = &self.noise.readout {
            model.readout = match (r.p, r.matrix) {
                (Some(_), Some(_)) => {
                    return Err(CliError::Usage("noise.readout: give either p or matrix, not both".into()))
                }
                (Some(p), None) => Some(ReadoutError::symmetric(p).map_err(key("readout.p"))?),
                (None, Some(m)) => Some(ReadoutError::Uniform(ConfusionMatrix::new(m).map_err(key("readout.matrix"))?)),
                (None, None) => None,
            };
        }
        if let Some(d) = &self.noise.depolarizing {
            if d.p1.is_some() || d.p2.is_some() {
                let dep =
                    DepolarizingError::new(d.p1.unwrap_or(0.0), d.p2.unwrap_or(0.0)).map_err(key("depolarizing"))?;
                model.depolarizing = Some(dep);
            }
        }
        if let Some(t) = &self.noise.thermal {
            let (sigma, deterministic) = self.thermal_defaults();
            model.thermal = match (t.t1_ns, t.t2_ns) {
                (Some(t1), Some(t2)) => {
                    Some(ThermalRelaxation::new(t1, t2, sigma, deterministic).map_err(key("thermal"))?)
                }
                (None, None) => None,
                _ => return Err(CliError::Usage("noise.thermal: t1_ns and t2_ns must be given together".into())),
            };
        }
        Ok(model)
    }

    pub fn thermal_defaults(&self) -> (f64, bool) {
        let t = self.noise.thermal.clone().unwrap_or_default();
        (t.sigma_fraction.unwrap_or(ThermalRelaxation::DEFAULT_SIGMA_FRACTION), t.deterministic.unwrap_or(false))
    }

    pub fn durations(&self) -> Result<GateDurations, CliError> {
        let mut d = GateDurations::default();
        if let Some(s) = &self.noise.durations {
            d.single_u_ns = s.single_u_ns.unwrap_or(d.single_u_ns);
            d.cnot_ns = s.cnot_ns.unwrap_or(d.cnot_ns);
            d.reset_ns = s.reset_ns.unwrap_or(d.reset_ns);
            d.measure_ns = s.measure_ns.unwrap_or(d.measure_ns);
        }
        d.validate().map_err(|e| CliError::Usage(format!("noise.{e}")))?;
        Ok(d)
    }
}

/// Sweep settings given on the command line; each one wins over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepOverrides {
    pub noise: Option<String>,
    pub steps: Option<usize>,
    pub t2_ratio: Option<f64>,
    pub state: Option<String>,
    pub n_states: Option<usize>,
    pub mode: Option<String>,
    pub shots: Option<u64>,
    pub repeats: Option<usize>,
    pub ci_level: Option<f64>,
    pub resamples: Option<usize>,
}

/// Merges file and flags into a validated sweep configuration.
pub fn resolve_sweep(file: &ConfigFile, flags: &SweepOverrides, seed: u64) -> Result<SweepConfig, CliError> {
    let s = &file.sweep;
    let usage = |e: qbench::Error| CliError::Usage(e.to_string());

    let axis_name = flags.noise.clone().or_else(|| s.noise.clone()).ok_or_else(|| {
        CliError::Usage("sweep.noise is required (readout, depolarizing, thermal, readout-depolarizing)".into())
    })?;
    let axis: NoiseAxis = axis_name.parse().map_err(|e| CliError::Usage(format!("sweep.noise: {e}")))?;

    let steps = flags.steps.or(s.steps).unwrap_or(DEFAULT_STEPS);
    if steps == 0 {
        return Err(CliError::Usage("sweep.steps must be at least 1".into()));
    }
    let t2_ratio = flags.t2_ratio.or(s.t2_ratio).unwrap_or(DEFAULT_T2_RATIO);
    if !(t2_ratio.is_finite() && t2_ratio > 0.0) {
        return Err(CliError::Usage(format!("sweep.t2_ratio must be positive, got {t2_ratio}")));
    }

    let default_state = if axis == NoiseAxis::ReadoutDepolarizing { "specific" } else { "random" };
    let state = flags.state.clone().or_else(|| s.state.clone()).unwrap_or_else(|| default_state.into());
    let state_source = match state.as_str() {
        "random" => {
            StateSource::Random { n_states: flags.n_states.or(s.n_states).unwrap_or(DEFAULT_ENSEMBLE_SIZE), seed }
        }
        "specific" => StateSource::Specific,
        "explicit" => {
            let list = s
                .states
                .as_ref()
                .ok_or_else(|| CliError::Usage("sweep.states is required when state = \"explicit\"".into()))?;
            let preps = list
                .iter()
                .enumerate()
                .map(|(i, &[t1, t2, p1, p2])| {
                    PreparationParams::new(t1, t2, p1, p2)
                        .map_err(|e| CliError::Usage(format!("sweep.states[{i}]: {e}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            StateSource::Explicit(preps)
        }
        other => return Err(CliError::Usage(format!("sweep.state: unknown state source {other:?}"))),
    };

    let mode = match flags.mode.clone().or_else(|| s.mode.clone()).as_deref().unwrap_or("exact") {
        "exact" => SweepMode::Exact,
        "shots" => SweepMode::Shots {
            shots: flags.shots.or(s.shots).unwrap_or(SweepMode::DEFAULT_SHOTS),
            repeats: flags.repeats.or(s.repeats).unwrap_or(SweepMode::DEFAULT_REPEATS),
        },
        other => return Err(CliError::Usage(format!("sweep.mode: expected exact or shots, got {other:?}"))),
    };

    let mut cfg = SweepConfig::new(axis, default_grid(axis, steps, t2_ratio), state_source, mode, seed);
    cfg.base_model = file.noise_model()?;
    cfg.thermal_defaults = file.thermal_defaults();
    cfg.durations = file.durations()?;
    if let Some(level) = flags.ci_level.or(s.ci_level) {
        cfg.ci_level = level;
    }
    if let Some(n) = flags.resamples.or(s.resamples) {
        cfg.n_resamples = n;
    }
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}
