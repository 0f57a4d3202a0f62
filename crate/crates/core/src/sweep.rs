//! Joint Peres/Sorkin runs over noise grids and state ensembles.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;

use crate::circuits::{
    build_preparation_timed, build_projection_timed, random_preparation, GateDurations, PreparationParams,
    ProjectionLabel, N_QUBITS,
};
use crate::error::{Error, Result};
use crate::metrics::{self, GammaSet, PeresResult, ProjectionProbabilities, SorkinResult};
use crate::noise::{
    sample_qubit_times, simulate_with_times, DepolarizingError, NoiseModel, ReadoutError, ThermalRelaxation,
};
use crate::rng::substream;
use crate::stats::{self, BootstrapCI};

/// How outcome probabilities are obtained from the simulated distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimation {
    Exact,
    Shots(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointTestResult {
    pub pp: ProjectionProbabilities,
    pub peres: Result<PeresResult>,
    pub sorkin: SorkinResult,
}

/// Runs the seven projection circuits after preparing `prep` and evaluates
/// both tests. Relaxation times are drawn once and shared by all seven circuits.
pub fn run_joint_test<R: Rng + ?Sized>(
    prep: &PreparationParams,
    model: &NoiseModel,
    estimation: Estimation,
    durations: &GateDurations,
    rng: &mut R,
) -> Result<JointTestResult> {
    let preparation = build_preparation_timed(prep, durations)?;
    let times = sample_qubit_times(model, N_QUBITS, rng);
    let mut pp = ProjectionProbabilities::default();
    for label in ProjectionLabel::ALL {
        let plan = preparation.then(&build_projection_timed(&label.setting(), durations)?)?;
        let probs = simulate_with_times(&plan, model, times.as_deref())?;
        let p00 = match estimation {
            Estimation::Exact => probs[0],
            Estimation::Shots(n) => stats::estimate_probs(&stats::sample_counts(&probs, n, rng)?)[0],
        };
        pp.set(label, p00);
    }
    Ok(JointTestResult { pp, peres: metrics::peres(&pp), sorkin: metrics::sorkin_kappa(&pp) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseAxis {
    Readout,
    Depolarizing,
    Thermal,
    ReadoutDepolarizing,
}

impl NoiseAxis {
    pub fn name(self) -> &'static str {
        match self {
            NoiseAxis::Readout => "readout",
            NoiseAxis::Depolarizing => "depolarizing",
            NoiseAxis::Thermal => "thermal",
            NoiseAxis::ReadoutDepolarizing => "readout-depolarizing",
        }
    }
}

impl fmt::Display for NoiseAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for NoiseAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "readout" => Ok(NoiseAxis::Readout),
            "depolarizing" => Ok(NoiseAxis::Depolarizing),
            "thermal" => Ok(NoiseAxis::Thermal),
            "readout-depolarizing" | "readout_depolarizing" => Ok(NoiseAxis::ReadoutDepolarizing),
            other => Err(Error::InvalidConfig(format!("unknown noise axis {other:?}"))),
        }
    }
}

/// Values of the swept parameters at one grid point. `None` leaves the base
/// model's component untouched.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoisePoint {
    pub p_readout: Option<f64>,
    pub p_depol1: Option<f64>,
    pub p_depol2: Option<f64>,
    pub t1_ns: Option<f64>,
    pub t2_ns: Option<f64>,
}

impl NoisePoint {
    pub fn readout(p: f64) -> Self {
        Self { p_readout: Some(p), ..Self::default() }
    }

    pub fn depolarizing(p: f64) -> Self {
        Self { p_depol1: Some(p), p_depol2: Some(p), ..Self::default() }
    }

    pub fn thermal(t1_ns: f64, t2_ns: f64) -> Self {
        Self { t1_ns: Some(t1_ns), t2_ns: Some(t2_ns), ..Self::default() }
    }

    /// `base` with this point's parameters substituted. New thermal
    /// components take `sigma_fraction` and `deterministic` from `thermal_defaults`.
    pub fn apply(&self, base: &NoiseModel, thermal_defaults: (f64, bool)) -> Result<NoiseModel> {
        let mut model = base.clone();
        if let Some(p) = self.p_readout {
            model.readout = Some(ReadoutError::symmetric(p)?);
        }
        if self.p_depol1.is_some() || self.p_depol2.is_some() {
            let current = base.depolarizing.map_or((0.0, 0.0), |d| (d.p1, d.p2));
            let p1 = self.p_depol1.unwrap_or(current.0);
            let p2 = self.p_depol2.unwrap_or(current.1);
            model.depolarizing = Some(DepolarizingError::new(p1, p2)?);
        }
        if self.t1_ns.is_some() || self.t2_ns.is_some() {
            let (sigma, deterministic) = base.thermal.map_or(thermal_defaults, |t| (t.sigma_fraction, t.deterministic));
            let t1 = self.t1_ns.or(base.thermal.map(|t| t.t1_mean));
            let t2 = self.t2_ns.or(base.thermal.map(|t| t.t2_mean));
            match (t1, t2) {
                (Some(t1), Some(t2)) => {
                    model.thermal = Some(ThermalRelaxation::new(t1, t2, sigma, deterministic)?);
                }
                _ => return Err(Error::InvalidConfig("thermal point needs both t1 and t2".into())),
            }
        }
        Ok(model)
    }
}

pub const DEFAULT_STEPS: usize = 21;
pub const THERMAL_T1_RANGE_NS: (f64, f64) = (10.0, 1e5);
pub const DEFAULT_T2_RATIO: f64 = 2.0;

pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect(),
    }
}

pub fn logspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    linspace(lo.log10(), hi.log10(), steps).into_iter().map(|e| 10f64.powf(e)).collect()
}

/// Default grid for `axis`: `steps` uniform points on `[0, 1]` for
/// probabilities (a `steps x steps` product for the two-axis sweep), or
/// `steps` log-spaced `T1` values with `T2 = t2_ratio * T1`.
pub fn default_grid(axis: NoiseAxis, steps: usize, t2_ratio: f64) -> Vec<NoisePoint> {
    match axis {
        NoiseAxis::Readout => linspace(0.0, 1.0, steps).into_iter().map(NoisePoint::readout).collect(),
        NoiseAxis::Depolarizing => linspace(0.0, 1.0, steps).into_iter().map(NoisePoint::depolarizing).collect(),
        NoiseAxis::Thermal => logspace(THERMAL_T1_RANGE_NS.0, THERMAL_T1_RANGE_NS.1, steps)
            .into_iter()
            .map(|t1| NoisePoint::thermal(t1, t2_ratio * t1))
            .collect(),
        NoiseAxis::ReadoutDepolarizing => {
            let ps = linspace(0.0, 1.0, steps);
            ps.iter()
                .flat_map(|&r| {
                    ps.iter().map(move |&d| NoisePoint { p_readout: Some(r), ..NoisePoint::depolarizing(d) })
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateSource {
    Random { n_states: usize, seed: u64 },
    Specific,
    Explicit(Vec<PreparationParams>),
}

pub const DEFAULT_ENSEMBLE_SIZE: usize = 20;

impl StateSource {
    pub fn states(&self) -> Result<Vec<PreparationParams>> {
        let states = match self {
            StateSource::Random { n_states, seed } => {
                let mut rng = substream(*seed, &[STREAM_STATES]);
                (0..*n_states).map(|_| random_preparation(&mut rng)).collect()
            }
            StateSource::Specific => vec![PreparationParams::specific()],
            StateSource::Explicit(list) => list.iter().map(|p| p.canonical()).collect::<Result<Vec<_>>>()?,
        };
        if states.is_empty() {
            return Err(Error::InvalidConfig("state source yields no states".into()));
        }
        Ok(states)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    Exact,
    Shots { shots: u64, repeats: usize },
}

impl SweepMode {
    pub const DEFAULT_SHOTS: u64 = 100_000;
    pub const DEFAULT_REPEATS: usize = 30;

    pub fn name(self) -> &'static str {
        match self {
            SweepMode::Exact => "exact",
            SweepMode::Shots { .. } => "shots",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub axis: NoiseAxis,
    pub grid: Vec<NoisePoint>,
    pub base_model: NoiseModel,
    /// `(sigma_fraction, deterministic)` for thermal components created by the grid.
    pub thermal_defaults: (f64, bool),
    pub state_source: StateSource,
    pub mode: SweepMode,
    pub ci_level: f64,
    pub n_resamples: usize,
    pub durations: GateDurations,
    pub seed: u64,
}

impl SweepConfig {
    pub fn new(axis: NoiseAxis, grid: Vec<NoisePoint>, state_source: StateSource, mode: SweepMode, seed: u64) -> Self {
        Self {
            axis,
            grid,
            base_model: NoiseModel::ideal(),
            thermal_defaults: (ThermalRelaxation::DEFAULT_SIGMA_FRACTION, false),
            state_source,
            mode,
            ci_level: stats::DEFAULT_CI_LEVEL,
            n_resamples: stats::DEFAULT_RESAMPLES,
            durations: GateDurations::default(),
            seed,
        }
    }

    /// Checks everything that can fail before any circuit is simulated.
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::InvalidConfig("grid is empty".into()));
        }
        if let SweepMode::Shots { shots, repeats } = self.mode {
            if shots == 0 {
                return Err(Error::InvalidConfig("shots must be at least 1".into()));
            }
            if repeats < 2 {
                return Err(Error::InvalidConfig("shot mode needs at least 2 repeats for a bootstrap".into()));
            }
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::InvalidConfig(format!("ci_level must lie in (0, 1), got {}", self.ci_level)));
        }
        if self.n_resamples == 0 {
            return Err(Error::InvalidConfig("n_resamples must be at least 1".into()));
        }
        self.durations.validate()?;
        if let StateSource::Random { n_states: 0, .. } = self.state_source {
            return Err(Error::InvalidConfig("n_states must be at least 1".into()));
        }
        self.state_source.states()?;
        for (i, point) in self.grid.iter().enumerate() {
            point
                .apply(&self.base_model, self.thermal_defaults)
                .map_err(|e| Error::InvalidConfig(format!("grid point {i}: {e}")))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub state_id: usize,
    pub prep: PreparationParams,
    pub noise_type: NoiseAxis,
    /// Effective noise parameters, including components fixed by the base model.
    pub point: NoisePoint,
    pub mode: SweepMode,
    pub kappa: f64,
    pub kappa_ci: Option<(f64, f64)>,
    pub f: Option<f64>,
    pub f_ci: Option<(f64, f64)>,
    pub gammas: Option<GammaSet>,
    pub gamma_undefined: bool,
    pub seed: u64,
}

const STREAM_STATES: u64 = 0x5354_4154;
const STREAM_TASK: u64 = 0x5441_534b;
const STREAM_BOOTSTRAP: u64 = 0x424f_4f54;

fn effective_point(model: &NoiseModel) -> NoisePoint {
    let readout = match &model.readout {
        // symmetric readout is reported by its flip probability
        Some(ReadoutError::Uniform(m)) if m.rows()[0][1] == m.rows()[1][0] => Some(m.rows()[0][1]),
        _ => None,
    };
    NoisePoint {
        p_readout: readout,
        p_depol1: model.depolarizing.map(|d| d.p1),
        p_depol2: model.depolarizing.map(|d| d.p2),
        t1_ns: model.thermal.map(|t| t.t1_mean),
        t2_ns: model.thermal.map(|t| t.t2_mean),
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn run_point(cfg: &SweepConfig, state_id: usize, prep: &PreparationParams, point_id: usize) -> Result<SweepRecord> {
    let model = cfg.grid[point_id].apply(&cfg.base_model, cfg.thermal_defaults)?;
    let task = |repeat: usize| substream(cfg.seed, &[STREAM_TASK, state_id as u64, point_id as u64, repeat as u64]);
    let mut record = SweepRecord {
        state_id,
        prep: *prep,
        noise_type: cfg.axis,
        point: effective_point(&model),
        mode: cfg.mode,
        kappa: 0.0,
        kappa_ci: None,
        f: None,
        f_ci: None,
        gammas: None,
        gamma_undefined: false,
        seed: cfg.seed,
    };
    match cfg.mode {
        SweepMode::Exact => {
            let r = run_joint_test(prep, &model, Estimation::Exact, &cfg.durations, &mut task(0))?;
            record.kappa = r.sorkin.kappa;
            match r.peres {
                Ok(p) => {
                    record.f = Some(p.f);
                    record.gammas = Some(p.gammas);
                }
                Err(Error::GammaUndefined { .. }) => record.gamma_undefined = true,
                Err(e) => return Err(e),
            }
        }
        SweepMode::Shots { shots, repeats } => {
            let runs = (0..repeats)
                .map(|i| run_joint_test(prep, &model, Estimation::Shots(shots), &cfg.durations, &mut task(i)))
                .collect::<Result<Vec<_>>>()?;
            let kappas: Vec<f64> = runs.iter().map(|r| r.sorkin.kappa).collect();
            let ci = bootstrap(cfg, &kappas, &[state_id, point_id, 0])?;
            record.kappa = ci.mean;
            record.kappa_ci = Some((ci.lo, ci.hi));
            let mut peres = Vec::with_capacity(repeats);
            for r in &runs {
                match &r.peres {
                    Ok(p) => peres.push(*p),
                    Err(Error::GammaUndefined { .. }) => record.gamma_undefined = true,
                    Err(e) => return Err(e.clone()),
                }
            }
            if !record.gamma_undefined {
                let fs: Vec<f64> = peres.iter().map(|p| p.f).collect();
                let ci = bootstrap(cfg, &fs, &[state_id, point_id, 1])?;
                record.f = Some(ci.mean);
                record.f_ci = Some((ci.lo, ci.hi));
                let g = |sel: fn(&GammaSet) -> f64| mean(&peres.iter().map(|p| sel(&p.gammas)).collect::<Vec<_>>());
                record.gammas = Some(GammaSet { g01: g(|x| x.g01), g12: g(|x| x.g12), g20: g(|x| x.g20) });
            }
        }
    }
    Ok(record)
}

fn bootstrap(cfg: &SweepConfig, samples: &[f64], path: &[usize; 3]) -> Result<BootstrapCI> {
    let mut rng = substream(cfg.seed, &[STREAM_BOOTSTRAP, path[0] as u64, path[1] as u64, path[2] as u64]);
    stats::bootstrap_ci(samples, cfg.ci_level, cfg.n_resamples, &mut rng)
}

/// One record per (state, grid point), ordered by state then grid index.
/// Output depends only on the configuration, not on thread scheduling.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    let states = cfg.state_source.states()?;
    let tasks: Vec<(usize, usize)> = (0..states.len()).flat_map(|s| (0..cfg.grid.len()).map(move |p| (s, p))).collect();
    tasks.par_iter().map(|&(s, p)| run_point(cfg, s, &states[s], p)).collect()
}

/// Exact-mode `F` under `model_at(p)`.
fn exact_f(prep: &PreparationParams, model: &NoiseModel) -> Result<f64> {
    let r = run_joint_test(prep, model, Estimation::Exact, &GateDurations::default(), &mut substream(0, &[]))?;
    r.peres.map(|p| p.f)
}

/// Scans `p` over `(lo, hi]` in steps of `resolution` and returns the first
/// point where `F` reaches 1 from below, or `None`.
pub fn f_crossing(
    prep: &PreparationParams,
    lo: f64,
    hi: f64,
    resolution: f64,
    model_at: impl Fn(f64) -> Result<NoiseModel>,
) -> Result<Option<f64>> {
    if !(resolution > 0.0 && hi > lo) {
        return Err(Error::InvalidConfig(format!("bad scan ({lo}, {hi}] at resolution {resolution}")));
    }
    let eval = |p: f64| {
        exact_f(prep, &model_at(p)?)
            .map_err(|e| Error::InvalidConfig(format!("threshold scan aborted at p = {p}: {e}")))
    };
    let steps = ((hi - lo) / resolution).round() as usize;
    let mut prev = eval(lo)?;
    for i in 1..=steps {
        let p = (lo + i as f64 * resolution).min(hi);
        let f = eval(p)?;
        if f >= 1.0 && prev < 1.0 {
            return Ok(Some(p));
        }
        prev = f;
    }
    Ok(None)
}

/// Smallest symmetric readout error in `(0.5, 1]` past which `F` exceeds 1.
pub fn readout_threshold(prep: &PreparationParams, resolution: f64) -> Result<Option<f64>> {
    f_crossing(prep, 0.5, 1.0, resolution, NoiseModel::readout)
}
