use nalgebra::DMatrix;
use qbench::circuits::{analytic_amplitudes, random_preparation, GateDurations, PreparationParams, LEVEL_INDICES};
use qbench::noise::NoiseModel;
use qbench::rng::substream;
use qbench::sweep::{
    default_grid, run_joint_test, run_sweep, Estimation, NoiseAxis, StateSource, SweepConfig, SweepMode,
};

fn states(n: usize, seed: u64) -> Vec<PreparationParams> {
    let mut rng = substream(seed, &[]);
    (0..n).map(|_| random_preparation(&mut rng)).collect()
}

fn exact(prep: &PreparationParams, model: &NoiseModel) -> qbench::sweep::JointTestResult {
    run_joint_test(prep, model, Estimation::Exact, &GateDurations::default(), &mut substream(0, &[])).unwrap()
}

/// Least-squares quadratic through `(x, y)`; returns the largest residual.
fn quadratic_residual(x: &[f64], y: &[f64]) -> f64 {
    let a = DMatrix::from_fn(x.len(), 3, |i, j| x[i].powi(j as i32));
    let b = DMatrix::from_column_slice(y.len(), 1, y);
    let coef = a.clone().svd(true, true).solve(&b, 1e-14).unwrap();
    (a * coef - b).amax()
}

#[test]
fn kappa_is_quadratic_in_readout_error() {
    let grid = default_grid(NoiseAxis::Readout, 21, 2.0);
    let ps: Vec<f64> = grid.iter().map(|p| p.p_readout.unwrap()).collect();
    for prep in states(10, 1) {
        let ks: Vec<f64> = ps.iter().map(|&p| exact(&prep, &NoiseModel::readout(p).unwrap()).sorkin.kappa).collect();
        assert!(quadratic_residual(&ps, &ks) < 1e-9);
        assert!(ks.iter().any(|k| k.abs() > 1e-6), "non-trivial curve");
    }
}

#[test]
fn readout_fixed_points_over_an_ensemble() {
    for prep in states(50, 2) {
        for p in [0.0, 0.5] {
            assert!(exact(&prep, &NoiseModel::readout(p).unwrap()).sorkin.kappa.abs() < 1e-10);
        }
    }
}

#[test]
fn depolarizing_never_pushes_f_above_one() {
    let cfg = SweepConfig::new(
        NoiseAxis::Depolarizing,
        default_grid(NoiseAxis::Depolarizing, 21, 2.0),
        StateSource::Random { n_states: 20, seed: 3 },
        SweepMode::Exact,
        3,
    );
    for r in run_sweep(&cfg).unwrap() {
        if let Some(f) = r.f {
            assert!(f <= 1.0 + 1e-9, "state {} p {:?}: F = {f}", r.state_id, r.point.p_depol1);
        }
    }
}

#[test]
fn gammas_are_cosines_of_phase_differences() {
    let mut checked = 0;
    for prep in states(1000, 4) {
        let sv = analytic_amplitudes(&prep).unwrap();
        let x = LEVEL_INDICES.map(|i| sv.amplitudes()[i]);
        if x.iter().any(|v| v.norm() < 0.05) {
            continue;
        }
        let g = exact(&prep, &NoiseModel::ideal()).peres.unwrap().gammas;
        let cos = |i: usize, j: usize| (x[i].arg() - x[j].arg()).cos();
        assert!((g.g01 - cos(0, 1)).abs() < 1e-10);
        assert!((g.g12 - cos(1, 2)).abs() < 1e-10);
        assert!((g.g20 - cos(2, 0)).abs() < 1e-10);
        checked += 1;
    }
    assert!(checked > 500);
}

#[test]
fn shot_means_converge_to_exact_values() {
    let grid = vec![
        qbench::sweep::NoisePoint::readout(0.02),
        qbench::sweep::NoisePoint::readout(0.2),
        qbench::sweep::NoisePoint::depolarizing(0.1),
    ];
    let source = StateSource::Random { n_states: 4, seed: 5 };
    let mut shots = SweepConfig::new(
        NoiseAxis::Readout,
        grid.clone(),
        source.clone(),
        SweepMode::Shots { shots: 100_000, repeats: 10 },
        5,
    );
    shots.n_resamples = 2000;
    let exact = run_sweep(&SweepConfig::new(NoiseAxis::Readout, grid, source, SweepMode::Exact, 5)).unwrap();
    let noisy = run_sweep(&shots).unwrap();
    let mut ok = 0;
    for (e, s) in exact.iter().zip(&noisy) {
        let (lo, hi) = s.kappa_ci.unwrap();
        let half = ((hi - lo) / 2.0).max(1e-12);
        if (s.kappa - e.kappa).abs() < 5.0 * half {
            ok += 1;
        }
    }
    assert!(ok as f64 >= 0.95 * exact.len() as f64, "{ok} of {}", exact.len());
}

#[test]
fn thermal_noise_vanishes_for_long_relaxation_times() {
    let prep = PreparationParams::specific();
    let far = NoiseModel::thermal(qbench::noise::ThermalRelaxation::fixed(1e12, 2e12).unwrap());
    let r = exact(&prep, &far);
    assert!(r.sorkin.kappa.abs() < 1e-8);
    assert!((r.peres.unwrap().f - 1.0).abs() < 1e-6);
}
