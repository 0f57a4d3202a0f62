//! Readout, depolarizing and thermal-relaxation noise.
//!
//! Gate noise is attached to the instruction that caused it: every gate is
//! followed by depolarization of the qubits it touched, then by relaxation of
//! those qubits for the gate's duration. Idle qubits do not decohere.
//! Readout confusion acts on the final outcome distribution.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::circuits::{u_matrix, CircuitPlan, GateKind};
use crate::error::{Error, Result};
use crate::qcore::{check_qubits, DensityMatrix, UnitaryMatrix, C64};

const STOCHASTIC_TOLERANCE: f64 = 1e-12;
const DISTRIBUTION_TOLERANCE: f64 = 1e-9;

fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::InvalidProbability { name, value });
    }
    Ok(())
}

/// Row-stochastic `P[true][reported]` for one qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfusionMatrix([[f64; 2]; 2]);

impl ConfusionMatrix {
    pub fn new(rows: [[f64; 2]; 2]) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            if row.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::InvalidConfusion(format!("row {i} has an entry outside [0, 1]: {row:?}")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOLERANCE {
                return Err(Error::InvalidConfusion(format!("row {i} sums to {sum}")));
            }
        }
        Ok(Self(rows))
    }

    /// `[[1-p, p], [p, 1-p]]`.
    pub fn symmetric(p: f64) -> Result<Self> {
        check_probability("readout p", p)?;
        Self::new([[1.0 - p, p], [p, 1.0 - p]])
    }

    pub fn rows(&self) -> [[f64; 2]; 2] {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReadoutError {
    /// Same confusion on every measured qubit.
    Uniform(ConfusionMatrix),
    /// One matrix per qubit, indexed by qubit.
    PerQubit(Vec<ConfusionMatrix>),
}

impl ReadoutError {
    pub fn symmetric(p: f64) -> Result<Self> {
        Ok(ReadoutError::Uniform(ConfusionMatrix::symmetric(p)?))
    }

    fn for_qubit(&self, q: usize) -> ConfusionMatrix {
        match self {
            ReadoutError::Uniform(m) => *m,
            ReadoutError::PerQubit(ms) => ms[q],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepolarizingError {
    pub p1: f64,
    pub p2: f64,
}

impl DepolarizingError {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        check_probability("depolarizing p1", p1)?;
        check_probability("depolarizing p2", p2)?;
        Ok(Self { p1, p2 })
    }

    pub fn uniform(p: f64) -> Result<Self> {
        Self::new(p, p)
    }
}

/// Mean relaxation times, with Gaussian jitter unless `deterministic`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalRelaxation {
    pub t1_mean: f64,
    pub t2_mean: f64,
    pub sigma_fraction: f64,
    pub deterministic: bool,
}

impl ThermalRelaxation {
    pub const DEFAULT_SIGMA_FRACTION: f64 = 0.1;

    pub fn new(t1_mean: f64, t2_mean: f64, sigma_fraction: f64, deterministic: bool) -> Result<Self> {
        if !(t1_mean.is_finite() && t1_mean > 0.0) {
            return Err(Error::InvalidRelaxation(format!("t1 must be positive, got {t1_mean}")));
        }
        if !(t2_mean.is_finite() && t2_mean > 0.0) {
            return Err(Error::InvalidRelaxation(format!("t2 must be positive, got {t2_mean}")));
        }
        if !(sigma_fraction.is_finite() && sigma_fraction >= 0.0) {
            return Err(Error::InvalidRelaxation(format!("sigma_fraction must be >= 0, got {sigma_fraction}")));
        }
        check_t2_bound(t1_mean, t2_mean)?;
        Ok(Self { t1_mean, t2_mean, sigma_fraction, deterministic })
    }

    pub fn fixed(t1: f64, t2: f64) -> Result<Self> {
        Self::new(t1, t2, 0.0, true)
    }
}

fn check_t2_bound(t1: f64, t2: f64) -> Result<()> {
    if t2 > 2.0 * t1 * (1.0 + 1e-12) {
        return Err(Error::CpViolation { t1, t2 });
    }
    Ok(())
}

/// Composite noise; every component is optional and the empty model is ideal.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NoiseModel {
    pub readout: Option<ReadoutError>,
    pub depolarizing: Option<DepolarizingError>,
    pub thermal: Option<ThermalRelaxation>,
}

impl NoiseModel {
    pub fn ideal() -> Self {
        Self::default()
    }

    pub fn readout(p: f64) -> Result<Self> {
        Ok(Self { readout: Some(ReadoutError::symmetric(p)?), ..Self::default() })
    }

    pub fn depolarizing(p1: f64, p2: f64) -> Result<Self> {
        Ok(Self { depolarizing: Some(DepolarizingError::new(p1, p2)?), ..Self::default() })
    }

    pub fn thermal(t: ThermalRelaxation) -> Self {
        Self { thermal: Some(t), ..Self::default() }
    }

    pub fn is_ideal(&self) -> bool {
        self.readout.is_none() && self.depolarizing.is_none() && self.thermal.is_none()
    }
}

/// Pushes an outcome distribution through each qubit's confusion matrix.
pub fn apply_readout(probs: &[f64], readout: &ReadoutError) -> Result<Vec<f64>> {
    let dim = probs.len();
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    let n_qubits = dim.trailing_zeros() as usize;
    if let ReadoutError::PerQubit(ms) = readout {
        if ms.len() != n_qubits {
            return Err(Error::DimensionMismatch { expected: n_qubits, found: ms.len() });
        }
    }
    check_distribution(probs)?;

    let mut out = probs.to_vec();
    for q in 0..n_qubits {
        let p = readout.for_qubit(q).rows();
        let bit = 1usize << q;
        let mut next = vec![0.0; dim];
        for (i, slot) in next.iter_mut().enumerate() {
            let reported = usize::from(i & bit != 0);
            *slot = out[i & !bit] * p[0][reported] + out[i | bit] * p[1][reported];
        }
        out = next;
    }
    Ok(out)
}

fn check_distribution(probs: &[f64]) -> Result<()> {
    if let Some(bad) = probs.iter().find(|p| !p.is_finite() || **p < -DISTRIBUTION_TOLERANCE) {
        return Err(Error::InvalidDistribution(format!("entry {bad}")));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > DISTRIBUTION_TOLERANCE {
        return Err(Error::InvalidDistribution(format!("sums to {sum}")));
    }
    Ok(())
}

/// `rho -> (1-p) rho + p Tr_S(rho) (x) I_S / 2^|S|` for the qubit set `S`.
pub fn depolarize(rho: &DensityMatrix, p: f64, qubits: &[usize]) -> Result<DensityMatrix> {
    check_probability("depolarizing p", p)?;
    check_qubits(qubits, rho.n_qubits())?;
    if p == 0.0 {
        return Ok(rho.clone());
    }
    let mask: usize = qubits.iter().map(|&q| 1usize << q).sum();
    let weight = 1.0 / (1usize << qubits.len()) as f64;
    let m = rho.matrix();
    let dim = rho.dim();
    let out = DMatrix::from_fn(dim, dim, |j, k| {
        let mut value = m[(j, k)] * (1.0 - p);
        if j & mask == k & mask {
            let (jr, kr) = (j & !mask, k & !mask);
            let mut traced = C64::new(0.0, 0.0);
            // enumerate every assignment of the depolarized qubits
            let mut sub = mask;
            loop {
                traced += m[(jr | sub, kr | sub)];
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & mask;
            }
            value += traced * (p * weight);
        }
        value
    });
    Ok(DensityMatrix::from_raw(out))
}

/// Zero-temperature relaxation of `qubit` for `duration` ns: excited
/// population decays as `exp(-d/T1)` into `|0>`, coherences as `exp(-d/T2)`.
/// Completely positive iff `T2 <= 2 T1`.
pub fn thermal_relax(rho: &DensityMatrix, qubit: usize, duration: f64, t1: f64, t2: f64) -> Result<DensityMatrix> {
    check_qubits(&[qubit], rho.n_qubits())?;
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(Error::InvalidRelaxation(format!("duration must be >= 0, got {duration}")));
    }
    if !(t1 > 0.0 && t2 > 0.0) || t1.is_nan() || t2.is_nan() {
        return Err(Error::InvalidRelaxation(format!("t1 = {t1}, t2 = {t2} must be positive")));
    }
    check_t2_bound(t1, t2)?;
    if duration == 0.0 {
        return Ok(rho.clone());
    }
    let decay = 1.0 - (-duration / t1).exp();
    let coherence = (-duration / t2).exp();
    let bit = 1usize << qubit;
    let m = rho.matrix();
    let dim = rho.dim();
    let out = DMatrix::from_fn(dim, dim, |j, k| match (j & bit != 0, k & bit != 0) {
        (false, false) => m[(j, k)] + m[(j | bit, k | bit)] * decay,
        (true, true) => m[(j, k)] * (1.0 - decay),
        _ => m[(j, k)] * coherence,
    });
    Ok(DensityMatrix::from_raw(out))
}

/// Draws `(T1, T2)` for one qubit. Gaussian draws are truncated to positive
/// values and `T2` is clipped to `2 T1`.
pub fn sample_relaxation_times<R: Rng + ?Sized>(rng: &mut R, tr: &ThermalRelaxation) -> (f64, f64) {
    if tr.deterministic || tr.sigma_fraction == 0.0 {
        return (tr.t1_mean, tr.t2_mean);
    }
    let t1 = positive_gaussian(rng, tr.t1_mean, tr.sigma_fraction);
    let t2 = positive_gaussian(rng, tr.t2_mean, tr.sigma_fraction);
    (t1, t2.min(2.0 * t1))
}

fn positive_gaussian<R: Rng + ?Sized>(rng: &mut R, mean: f64, sigma_fraction: f64) -> f64 {
    let normal = Normal::new(mean, sigma_fraction * mean).expect("finite positive sigma");
    // rejection sampling; the acceptance probability is at least 1/2
    for _ in 0..1000 {
        let x = normal.sample(rng);
        if x > 0.0 {
            return x;
        }
    }
    mean
}

/// One `(T1, T2)` draw per qubit, or `None` when the model has no thermal noise.
pub fn sample_qubit_times<R: Rng + ?Sized>(
    model: &NoiseModel,
    n_qubits: usize,
    rng: &mut R,
) -> Option<Vec<(f64, f64)>> {
    model.thermal.as_ref().map(|tr| (0..n_qubits).map(|_| sample_relaxation_times(rng, tr)).collect())
}

/// Evolves `|0...0>` through `plan` under `model` and returns the reported
/// outcome distribution (exact, no shot sampling).
pub fn simulate_noisy<R: Rng + ?Sized>(plan: &CircuitPlan, model: &NoiseModel, rng: &mut R) -> Result<Vec<f64>> {
    let times = sample_qubit_times(model, plan.n_qubits(), rng);
    simulate_with_times(plan, model, times.as_deref())
}

/// [`simulate_noisy`] with relaxation times already drawn. Without `times`
/// a thermal model uses its mean values.
pub fn simulate_with_times(plan: &CircuitPlan, model: &NoiseModel, times: Option<&[(f64, f64)]>) -> Result<Vec<f64>> {
    let n = plan.n_qubits();
    let mut measured = vec![false; n];
    for ins in plan.instructions() {
        if let GateKind::Measure { qubit } = ins.kind {
            measured[qubit] = true;
        }
    }
    if let Some(q) = measured.iter().position(|m| !m) {
        return Err(Error::InvalidCircuit(format!("qubit {q} is never measured")));
    }

    let times: Option<Vec<(f64, f64)>> = match (model.thermal.as_ref(), times) {
        (None, _) => None,
        (Some(_), Some(t)) if t.len() != n => {
            return Err(Error::DimensionMismatch { expected: n, found: t.len() });
        }
        (Some(_), Some(t)) => Some(t.to_vec()),
        (Some(tr), None) => Some(vec![(tr.t1_mean, tr.t2_mean); n]),
    };
    let (p1, p2) = model.depolarizing.map_or((0.0, 0.0), |d| (d.p1, d.p2));

    let mut rho = DensityMatrix::ground(n)?;
    for ins in plan.instructions() {
        let touched = ins.kind.qubits();
        match ins.kind {
            GateKind::SingleU { qubit, theta, phi, lambda } => {
                rho = rho.apply_gate(&u_matrix(theta, phi, lambda), &[qubit])?;
                if p1 > 0.0 {
                    rho = depolarize(&rho, p1, &touched)?;
                }
            }
            GateKind::Cnot { control, target } => {
                rho = rho.apply_gate(&UnitaryMatrix::cnot(), &[control, target])?;
                if p2 > 0.0 {
                    rho = depolarize(&rho, p2, &touched)?;
                }
            }
            GateKind::Reset { qubit } => rho = rho.reset_qubit(qubit)?,
            GateKind::Measure { .. } => {}
        }
        if let Some(times) = &times {
            for &q in &touched {
                let (t1, t2) = times[q];
                rho = thermal_relax(&rho, q, ins.duration_ns, t1, t2)?;
            }
        }
    }

    let probs = rho.basis_probabilities();
    let total: f64 = probs.iter().sum();
    let probs: Vec<f64> = probs.iter().map(|p| p / total).collect();
    match &model.readout {
        Some(r) => apply_readout(&probs, r),
        None => Ok(probs),
    }
}
