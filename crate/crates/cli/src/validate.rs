//! Fast invariant suite behind `qbench validate`.

use num_complex::Complex64;
use rand::Rng;

use qbench::circuits::{analytic_amplitudes, build_preparation, random_preparation, GateDurations};
use qbench::metrics::{kappa_n, sorkin_kappa_weighted};
use qbench::noise::{depolarize, thermal_relax, NoiseModel};
use qbench::qcore::DensityMatrix;
use qbench::rng::substream;
use qbench::sweep::{run_joint_test, Estimation};

use crate::config::ConfigFile;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, failure: Option<String>, ok: String) -> Self {
        match failure {
            Some(detail) => Self { name, passed: false, detail },
            None => Self { name, passed: true, detail: ok },
        }
    }
}

#[derive(Debug, Clone)]
pub struct ValidateOptions {
    pub seed: u64,
    /// Weight on the triple-path term in the fixed-point check; 3 unless the
    /// suite itself is being tested.
    pub kappa_triple_weight: f64,
    pub config: Option<ConfigFile>,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self { seed: 0, kappa_triple_weight: 3.0, config: None }
    }
}

const CHANNEL_TRIALS: usize = 500;
const ORACLE_TRIALS: usize = 100;
const KAPPA_N_TRIALS: usize = 100;

pub fn run(opts: &ValidateOptions) -> Vec<Check> {
    let mut checks = vec![
        channel_validity(opts.seed),
        oracle_equivalence(opts.seed),
        kappa_n_fuzz(opts.seed),
        kappa_fixed_points(opts.seed, opts.kappa_triple_weight),
    ];
    if let Some(cfg) = &opts.config {
        checks.push(config_noise(cfg));
    }
    checks
}

fn channel_validity(seed: u64) -> Check {
    let mut rng = substream(seed, &[1]);
    let mut failure = None;
    for trial in 0..CHANNEL_TRIALS {
        let rho = DensityMatrix::random(2, &mut rng);
        let q = rng.random_range(0..2);
        let out = match trial % 4 {
            0 => depolarize(&rho, rng.random(), &[q]),
            1 => depolarize(&rho, rng.random(), &[0, 1]),
            2 => {
                let t1 = rng.random_range(10.0..1e5);
                let t2 = rng.random_range(1.0..=2.0 * t1);
                thermal_relax(&rho, q, rng.random_range(0.0..5000.0), t1, t2)
            }
            _ => rho.reset_qubit(q),
        };
        let problem = match out {
            Err(e) => Some(e.to_string()),
            Ok(out) => {
                let trace_err = (out.trace() - Complex64::new(1.0, 0.0)).norm();
                if trace_err > 1e-10 || out.hermiticity_error() > 1e-12 || out.min_eigenvalue() < -1e-10 {
                    Some(format!(
                        "trace error {trace_err:e}, hermiticity {:e}, min eigenvalue {:e}",
                        out.hermiticity_error(),
                        out.min_eigenvalue()
                    ))
                } else {
                    None
                }
            }
        };
        if let Some(p) = problem {
            failure = Some(format!("trial {trial}: {p}"));
            break;
        }
    }
    Check::new("channel trace/hermiticity/PSD", failure, format!("{CHANNEL_TRIALS} random channel applications"))
}

fn oracle_equivalence(seed: u64) -> Check {
    let mut rng = substream(seed, &[2]);
    let mut worst = 0.0f64;
    let mut failure = None;
    for _ in 0..ORACLE_TRIALS {
        let prep = random_preparation(&mut rng);
        let result = build_preparation(&prep).and_then(|plan| plan.simulate_pure()).and_then(|sv| {
            let oracle = analytic_amplitudes(&prep)?;
            Ok(sv.amplitudes().iter().zip(oracle.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
        });
        match result {
            Ok(d) => worst = worst.max(d),
            Err(e) => {
                failure = Some(e.to_string());
                break;
            }
        }
    }
    if failure.is_none() && worst > 1e-10 {
        failure = Some(format!("max amplitude deviation {worst:e}"));
    }
    Check::new("preparation circuit vs closed form", failure, format!("max deviation {worst:.1e}"))
}

fn kappa_n_fuzz(seed: u64) -> Check {
    let mut rng = substream(seed, &[3]);
    let mut worst = 0.0f64;
    for n in 1..=8 {
        for _ in 0..KAPPA_N_TRIALS {
            let scale = 10f64.powf(rng.random_range(-3.0..3.0));
            let x: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale)
                .collect();
            let norm: f64 = x.iter().map(|v| v.norm_sqr()).sum();
            worst = worst.max(kappa_n(&x).abs() / norm);
        }
    }
    let failure = (worst > 1e-10).then(|| format!("relative |kappa_n| up to {worst:e}"));
    Check::new("kappa_n identity", failure, format!("max relative |kappa_n| {worst:.1e}"))
}

fn kappa_fixed_points(seed: u64, weight: f64) -> Check {
    let mut rng = substream(seed, &[4]);
    let states: Vec<_> = (0..5).map(|_| random_preparation(&mut rng)).collect();
    let mut failures = Vec::new();
    for (label, model) in [
        ("readout p=0", NoiseModel::readout(0.0)),
        ("readout p=0.5", NoiseModel::readout(0.5)),
        ("depolarizing p=1", NoiseModel::depolarizing(1.0, 1.0)),
    ] {
        let worst = model.and_then(|m| {
            states.iter().try_fold(0.0f64, |worst, prep| {
                let r =
                    run_joint_test(prep, &m, Estimation::Exact, &GateDurations::default(), &mut substream(seed, &[5]))?;
                let kappa = sorkin_kappa_weighted(&r.pp, weight).kappa;
                Ok(if kappa.abs() > worst.abs() { kappa } else { worst })
            })
        });
        match worst {
            Ok(k) if k.abs() > 1e-10 => failures.push(format!("kappa = {k:.6} at {label}")),
            Ok(_) => {}
            Err(e) => failures.push(format!("{label}: {e}")),
        }
    }
    let failure = (!failures.is_empty()).then(|| failures.join("; "));
    Check::new("kappa fixed points", failure, "kappa = 0 at readout p in {0, 0.5} and depolarizing p = 1".into())
}

fn config_noise(cfg: &ConfigFile) -> Check {
    let result = cfg.noise_model().and_then(|_| cfg.durations());
    Check::new("config noise model", result.err().map(|e| e.to_string()), "noise section is physical".into())
}
