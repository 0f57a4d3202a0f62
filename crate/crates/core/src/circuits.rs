//! Preparation and projection circuits for the joint Peres/Sorkin test.
//!
//! The register has two qubits labelled `|q1 q0>`. Qubit 0 receives the
//! single-qubit rotations and controls both controlled gates; qubit 1 is
//! their target. Amplitude therefore flows `|00> -> |01> -> |11>`, and the
//! three levels of the test are `B(0) = |00>`, `B(1) = |01>`, `B(2) = |11>`.

use std::f64::consts::{PI, TAU};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{check_qubits, StateVector, UnitaryMatrix, C64};

/// Qubit carrying the rotations and acting as control.
pub const ROTATION_QUBIT: usize = 0;
/// Target of the controlled rotations.
pub const TARGET_QUBIT: usize = 1;
pub const N_QUBITS: usize = 2;

/// Basis indices of the three levels, in level order.
pub const LEVEL_INDICES: [usize; 3] = [0b00, 0b01, 0b11];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateDurations {
    pub single_u_ns: f64,
    pub cnot_ns: f64,
    pub reset_ns: f64,
    pub measure_ns: f64,
}

impl Default for GateDurations {
    fn default() -> Self {
        Self { single_u_ns: 100.0, cnot_ns: 300.0, reset_ns: 1000.0, measure_ns: 1000.0 }
    }
}

impl GateDurations {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("single_u", self.single_u_ns),
            ("cnot", self.cnot_ns),
            ("reset", self.reset_ns),
            ("measure", self.measure_ns),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!("durations.{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn longest(&self) -> f64 {
        self.single_u_ns.max(self.cnot_ns).max(self.reset_ns).max(self.measure_ns)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateKind {
    SingleU { qubit: usize, theta: f64, phi: f64, lambda: f64 },
    Cnot { control: usize, target: usize },
    Reset { qubit: usize },
    Measure { qubit: usize },
}

impl GateKind {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            GateKind::SingleU { qubit, .. } | GateKind::Reset { qubit } | GateKind::Measure { qubit } => {
                vec![qubit]
            }
            GateKind::Cnot { control, target } => vec![control, target],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateInstruction {
    pub kind: GateKind,
    pub duration_ns: f64,
}

impl GateInstruction {
    fn timed(kind: GateKind, durations: &GateDurations) -> Self {
        let duration_ns = match kind {
            GateKind::SingleU { .. } => durations.single_u_ns,
            GateKind::Cnot { .. } => durations.cnot_ns,
            GateKind::Reset { .. } => durations.reset_ns,
            GateKind::Measure { .. } => durations.measure_ns,
        };
        Self { kind, duration_ns }
    }
}

impl fmt::Display for GateInstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GateKind::SingleU { qubit, theta, phi, lambda } => {
                write!(f, "U {qubit} {theta},{phi},{lambda} {}", self.duration_ns)
            }
            GateKind::Cnot { control, target } => write!(f, "CNOT {control},{target} - {}", self.duration_ns),
            GateKind::Reset { qubit } => write!(f, "RESET {qubit} - {}", self.duration_ns),
            GateKind::Measure { qubit } => write!(f, "MEASURE {qubit} - {}", self.duration_ns),
        }
    }
}

/// Ordered, timed gate list. Measurements may only close the circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitPlan {
    n_qubits: usize,
    instructions: Vec<GateInstruction>,
}

impl CircuitPlan {
    pub fn new(n_qubits: usize, instructions: Vec<GateInstruction>) -> Result<Self> {
        let mut measuring = false;
        for (i, ins) in instructions.iter().enumerate() {
            check_qubits(&ins.kind.qubits(), n_qubits)?;
            if !(ins.duration_ns.is_finite() && ins.duration_ns > 0.0) {
                return Err(Error::InvalidCircuit(format!("instruction {i} has duration {}", ins.duration_ns)));
            }
            match ins.kind {
                GateKind::SingleU { theta, phi, lambda, .. } => {
                    if ![theta, phi, lambda].iter().all(|a| a.is_finite()) {
                        return Err(Error::NonFinite("gate angle"));
                    }
                }
                GateKind::Measure { .. } => measuring = true,
                _ => {}
            }
            if measuring && !matches!(ins.kind, GateKind::Measure { .. }) {
                return Err(Error::InvalidCircuit(format!("instruction {i} follows a measurement")));
            }
        }
        Ok(Self { n_qubits, instructions })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn instructions(&self) -> &[GateInstruction] {
        &self.instructions
    }

    /// Runs `self` then `next` on the same register.
    pub fn then(&self, next: &CircuitPlan) -> Result<CircuitPlan> {
        if self.n_qubits != next.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, found: next.n_qubits });
        }
        let mut instructions = self.instructions.clone();
        instructions.extend_from_slice(&next.instructions);
        CircuitPlan::new(self.n_qubits, instructions)
    }

    /// Noise-free pure-state evolution from `|0...0>`. Measurements are
    /// ignored; a reset is accepted only on a qubit already in `|0>`.
    pub fn simulate_pure(&self) -> Result<StateVector> {
        let mut sv = StateVector::basis(self.n_qubits, 0)?;
        for ins in &self.instructions {
            match ins.kind {
                GateKind::SingleU { qubit, theta, phi, lambda } => {
                    sv = sv.apply(&u_matrix(theta, phi, lambda).embed(&[qubit], self.n_qubits)?)?;
                }
                GateKind::Cnot { control, target } => {
                    sv = sv.apply(&UnitaryMatrix::cnot().embed(&[control, target], self.n_qubits)?)?;
                }
                GateKind::Reset { qubit } => {
                    let excited: f64 = sv
                        .amplitudes()
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| i & (1 << qubit) != 0)
                        .map(|(_, a)| a.norm_sqr())
                        .sum();
                    if excited > 1e-12 {
                        return Err(Error::InvalidCircuit(format!(
                            "reset of qubit {qubit} is not unitary on this state"
                        )));
                    }
                }
                GateKind::Measure { .. } => {}
            }
        }
        Ok(sv)
    }
}

impl fmt::Display for CircuitPlan {
    /// One instruction per line, four fields: `GATE qubits angles duration_ns`.
    /// Lists are comma-joined; `-` marks a gate without angles.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for ins in &self.instructions {
            writeln!(f, "{ins}")?;
        }
        Ok(())
    }
}

/// `U(theta, phi, lambda) = [[cos(t/2), -e^{i l} sin(t/2)], [e^{i p} sin(t/2), e^{i(p+l)} cos(t/2)]]`.
pub fn u_matrix(theta: f64, phi: f64, lambda: f64) -> UnitaryMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    let rows: [&[C64]; 2] = [
        &[C64::new(c, 0.0), -C64::from_polar(s, lambda)],
        &[C64::from_polar(s, phi), C64::from_polar(c, phi + lambda)],
    ];
    UnitaryMatrix::from_rows(&rows).expect("U(theta, phi, lambda) is unitary for finite angles")
}

fn canonical_theta(name: &'static str, value: f64) -> Result<f64> {
    const SLACK: f64 = 1e-12;
    if !value.is_finite() || !(-SLACK..=PI + SLACK).contains(&value) {
        return Err(Error::InvalidAngle { name, value });
    }
    Ok(value.clamp(0.0, PI))
}

fn canonical_phi(name: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::InvalidAngle { name, value });
    }
    let wrapped = value.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    Ok(if wrapped >= TAU { 0.0 } else { wrapped })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreparationParams {
    pub theta1: f64,
    pub theta2: f64,
    pub phi1: f64,
    pub phi2: f64,
}

impl PreparationParams {
    /// Checks `theta in [0, pi]` and wraps `phi` into `[0, 2 pi)`.
    pub fn new(theta1: f64, theta2: f64, phi1: f64, phi2: f64) -> Result<Self> {
        Ok(Self {
            theta1: canonical_theta("theta1", theta1)?,
            theta2: canonical_theta("theta2", theta2)?,
            phi1: canonical_phi("phi1", phi1)?,
            phi2: canonical_phi("phi2", phi2)?,
        })
    }

    /// Parameters of `(|00> + e^{i pi/4}|01> + e^{i pi/2}|11>)/sqrt(3)`.
    pub fn specific() -> Self {
        Self { theta1: 2.0 * (1.0 / 3f64.sqrt()).acos(), theta2: PI / 2.0, phi1: PI / 4.0, phi2: PI / 4.0 }
    }

    pub fn canonical(&self) -> Result<Self> {
        Self::new(self.theta1, self.theta2, self.phi1, self.phi2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionParams {
    pub t1: f64,
    pub t2: f64,
}

impl ProjectionParams {
    pub fn new(t1: f64, t2: f64) -> Result<Self> {
        Ok(Self { t1: canonical_theta("t1", t1)?, t2: canonical_theta("t2", t2)? })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProjectionLabel {
    P012,
    P01,
    P12,
    P20,
    P0,
    P1,
    P2,
}

impl ProjectionLabel {
    pub const ALL: [ProjectionLabel; 7] = [
        ProjectionLabel::P012,
        ProjectionLabel::P01,
        ProjectionLabel::P12,
        ProjectionLabel::P20,
        ProjectionLabel::P0,
        ProjectionLabel::P1,
        ProjectionLabel::P2,
    ];

    /// Levels superposed with equal weight by this projection.
    pub fn levels(self) -> &'static [usize] {
        match self {
            ProjectionLabel::P012 => &[0, 1, 2],
            ProjectionLabel::P01 => &[0, 1],
            ProjectionLabel::P12 => &[1, 2],
            ProjectionLabel::P20 => &[2, 0],
            ProjectionLabel::P0 => &[0],
            ProjectionLabel::P1 => &[1],
            ProjectionLabel::P2 => &[2],
        }
    }

    pub fn setting(self) -> ProjectionParams {
        let (t1, t2) = match self {
            ProjectionLabel::P012 => (2.0 * (1.0 / 3f64.sqrt()).acos(), PI / 2.0),
            ProjectionLabel::P01 => (PI / 2.0, 0.0),
            ProjectionLabel::P12 => (PI, PI / 2.0),
            ProjectionLabel::P20 => (PI / 2.0, PI),
            ProjectionLabel::P0 => (0.0, 0.0),
            ProjectionLabel::P1 => (PI, 0.0),
            ProjectionLabel::P2 => (PI, PI),
        };
        ProjectionParams { t1, t2 }
    }
}

impl fmt::Display for ProjectionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// The seven `(t1, t2)` settings, in [`ProjectionLabel::ALL`] order.
pub fn projection_settings() -> [(ProjectionLabel, ProjectionParams); 7] {
    ProjectionLabel::ALL.map(|l| (l, l.setting()))
}

fn single_u(qubit: usize, theta: f64, phi: f64, lambda: f64) -> GateKind {
    GateKind::SingleU { qubit, theta, phi, lambda }
}

fn cnot() -> GateKind {
    GateKind::Cnot { control: ROTATION_QUBIT, target: TARGET_QUBIT }
}

/// Controlled-`U(theta, 0, 0)` as two CNOTs and two target rotations.
fn controlled_ry(theta: f64) -> [GateKind; 4] {
    [single_u(TARGET_QUBIT, theta / 2.0, 0.0, 0.0), cnot(), single_u(TARGET_QUBIT, -theta / 2.0, 0.0, 0.0), cnot()]
}

/// Controlled-`U(0, 0, lambda)`: phase `e^{i lambda}` on `|11>`.
fn controlled_phase(lambda: f64) -> [GateKind; 5] {
    [
        single_u(ROTATION_QUBIT, 0.0, 0.0, lambda / 2.0),
        cnot(),
        single_u(TARGET_QUBIT, 0.0, 0.0, -lambda / 2.0),
        cnot(),
        single_u(TARGET_QUBIT, 0.0, 0.0, lambda / 2.0),
    ]
}

/// Unitary part of the preparation, without resets.
fn preparation_gates(p: &PreparationParams) -> Vec<GateKind> {
    let mut gates = vec![single_u(ROTATION_QUBIT, p.theta1, 0.0, 0.0), single_u(ROTATION_QUBIT, 0.0, 0.0, p.phi1)];
    gates.extend(controlled_ry(p.theta2));
    gates.extend(controlled_phase(p.phi2));
    gates
}

pub fn build_preparation(p: &PreparationParams) -> Result<CircuitPlan> {
    build_preparation_timed(p, &GateDurations::default())
}

/// Resets both qubits then applies
/// `CU(0,0,phi2) CU(theta2,0,0) U(0,0,phi1) U(theta1,0,0)`.
pub fn build_preparation_timed(p: &PreparationParams, durations: &GateDurations) -> Result<CircuitPlan> {
    let p = p.canonical()?;
    let mut kinds = vec![GateKind::Reset { qubit: ROTATION_QUBIT }, GateKind::Reset { qubit: TARGET_QUBIT }];
    kinds.extend(preparation_gates(&p));
    CircuitPlan::new(N_QUBITS, kinds.into_iter().map(|k| GateInstruction::timed(k, durations)).collect())
}

pub fn build_projection(t: &ProjectionParams) -> Result<CircuitPlan> {
    build_projection_timed(t, &GateDurations::default())
}

/// Inverse of the phase-free preparation for `(t1, t2)`, then measurement of
/// both qubits. Outcome `00` then has probability `|<phi(t1, t2)|psi>|^2`.
pub fn build_projection_timed(t: &ProjectionParams, durations: &GateDurations) -> Result<CircuitPlan> {
    let t = ProjectionParams::new(t.t1, t.t2)?;
    let forward = preparation_gates(&PreparationParams { theta1: t.t1, theta2: t.t2, phi1: 0.0, phi2: 0.0 });
    let mut kinds: Vec<GateKind> = forward
        .into_iter()
        .rev()
        .map(|k| match k {
            // every forward rotation is U(theta,0,0) or U(0,0,lambda), so negating inverts it
            GateKind::SingleU { qubit, theta, phi, lambda } => single_u(qubit, -theta, -phi, -lambda),
            other => other,
        })
        .collect();
    kinds.push(GateKind::Measure { qubit: ROTATION_QUBIT });
    kinds.push(GateKind::Measure { qubit: TARGET_QUBIT });
    CircuitPlan::new(N_QUBITS, kinds.into_iter().map(|k| GateInstruction::timed(k, durations)).collect())
}

/// Closed-form prepared state over `(|00>, |01>, |10>, |11>)`.
pub fn analytic_amplitudes(p: &PreparationParams) -> Result<StateVector> {
    let p = p.canonical()?;
    let (s1, c1) = (p.theta1 / 2.0).sin_cos();
    let (s2, c2) = (p.theta2 / 2.0).sin_cos();
    StateVector::new(vec![
        C64::new(c1, 0.0),
        C64::from_polar(s1 * c2, p.phi1),
        C64::new(0.0, 0.0),
        C64::from_polar(s1 * s2, p.phi1 + p.phi2),
    ])
}

/// Closed-form `|phi(t1, t2)>`, the state the projection circuit tests for.
pub fn projection_state(t: &ProjectionParams) -> Result<StateVector> {
    analytic_amplitudes(&PreparationParams { theta1: t.t1, theta2: t.t2, phi1: 0.0, phi2: 0.0 })
}

/// Polar angle with `cos(theta)` uniform on `[-1, 1]` from `r` uniform on `[0, 1]`.
pub fn theta_from_uniform(r: f64) -> f64 {
    (1.0 - 2.0 * r).clamp(-1.0, 1.0).acos()
}

pub fn phi_from_uniform(r: f64) -> f64 {
    TAU * r
}

pub fn random_preparation<R: Rng + ?Sized>(rng: &mut R) -> PreparationParams {
    let theta1 = theta_from_uniform(rng.random());
    let theta2 = theta_from_uniform(rng.random());
    let phi1 = phi_from_uniform(rng.random());
    let phi2 = phi_from_uniform(rng.random());
    PreparationParams::new(theta1, theta2, phi1, phi2).expect("inverse-transform draws are canonical")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::DensityMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    fn amps_close(a: &StateVector, b: &StateVector, tol: f64) -> bool {
        a.amplitudes().iter().zip(b.amplitudes()).all(|(x, y)| close(*x, *y, tol))
    }

    fn p00(plan: &CircuitPlan) -> f64 {
        let rho = DensityMatrix::from_statevector(&plan.simulate_pure().unwrap()).unwrap();
        rho.basis_probabilities()[0]
    }

    #[test]
    fn u_matrix_examples() {
        let id = u_matrix(0.0, 0.0, 0.0);
        assert!((id.matrix() - nalgebra::DMatrix::<C64>::identity(2, 2)).norm() < 1e-15);

        let m = u_matrix(PI, 0.0, 0.0);
        let expected = [[0.0, -1.0], [1.0, 0.0]];
        for (r, row) in expected.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                assert!(close(m.matrix()[(r, c)], C64::new(v, 0.0), 1e-15));
            }
        }

        let out = StateVector::basis(1, 0).unwrap().apply(&u_matrix(PI / 2.0, PI / 2.0, 0.0)).unwrap();
        assert!(close(out.amplitudes()[0], C64::new(FRAC_1_SQRT_2, 0.0), 1e-15));
        assert!(close(out.amplitudes()[1], C64::new(0.0, FRAC_1_SQRT_2), 1e-15));
    }

    #[test]
    fn u_matrix_is_unitary() {
        for &(t, p, l) in &[(0.3, 1.2, -2.0), (3.0, 6.0, 0.1), (-1.0, 0.0, 4.0)] {
            assert!(u_matrix(t, p, l).unitarity_error() < 1e-12);
        }
    }

    #[test]
    fn preparation_of_zero_params_is_ground() {
        let sv =
            build_preparation(&PreparationParams::new(0.0, 0.0, 0.0, 0.0).unwrap()).unwrap().simulate_pure().unwrap();
        assert!(amps_close(&sv, &StateVector::basis(2, 0).unwrap(), 1e-15));
    }

    #[test]
    fn preparation_full_transfer() {
        let sv =
            build_preparation(&PreparationParams::new(PI, PI, 0.0, 0.0).unwrap()).unwrap().simulate_pure().unwrap();
        assert!(close(sv.amplitudes()[3], C64::new(1.0, 0.0), 1e-12));
    }

    #[test]
    fn preparation_of_specific_state() {
        let sv = build_preparation(&PreparationParams::specific()).unwrap().simulate_pure().unwrap();
        let r = 1.0 / 3f64.sqrt();
        let expected =
            [C64::new(r, 0.0), C64::from_polar(r, PI / 4.0), C64::new(0.0, 0.0), C64::from_polar(r, PI / 2.0)];
        for (a, e) in sv.amplitudes().iter().zip(expected) {
            assert!(close(*a, e, 1e-12));
        }
        let analytic = analytic_amplitudes(&PreparationParams::specific()).unwrap();
        for (a, e) in analytic.amplitudes().iter().zip(expected) {
            assert!(close(*a, e, 1e-12));
        }
    }

    #[test]
    fn analytic_amplitude_examples() {
        let a = analytic_amplitudes(&PreparationParams::new(0.0, 1.0, 2.0, 3.0).unwrap()).unwrap();
        assert!(amps_close(&a, &StateVector::basis(2, 0).unwrap(), 1e-15));
        let a = analytic_amplitudes(&PreparationParams::new(PI, 0.0, 0.0, 0.0).unwrap()).unwrap();
        assert!(amps_close(&a, &StateVector::basis(2, 1).unwrap(), 1e-15));
    }

    #[test]
    fn projection_examples() {
        let ground = build_preparation(&PreparationParams::new(0.0, 0.0, 0.0, 0.0).unwrap()).unwrap();
        let proj = build_projection(&ProjectionParams::new(0.0, 0.0).unwrap()).unwrap();
        assert!((p00(&ground.then(&proj).unwrap()) - 1.0).abs() < 1e-12);

        // (|00> + |01>)/sqrt(2) is prepared by theta1 = pi/2
        let plus = build_preparation(&PreparationParams::new(PI / 2.0, 0.0, 0.0, 0.0).unwrap()).unwrap();
        let proj = build_projection(&ProjectionParams::new(PI / 2.0, 0.0).unwrap()).unwrap();
        assert!((p00(&plus.then(&proj).unwrap()) - 1.0).abs() < 1e-12);

        let spec = build_preparation(&PreparationParams::specific()).unwrap();
        let proj = build_projection(&ProjectionLabel::P012.setting()).unwrap();
        let expected = (1.0 / 9.0) * (C64::new(1.0, 0.0) + C64::from_polar(1.0, PI / 4.0) + C64::i()).norm_sqr();
        assert!((expected - (3.0 + 2.0 * 2f64.sqrt()) / 9.0).abs() < 1e-15);
        assert!((p00(&spec.then(&proj).unwrap()) - expected).abs() < 1e-12);
    }

    #[test]
    fn projection_states_match_their_labels() {
        let r2 = FRAC_1_SQRT_2;
        let r3 = 1.0 / 3f64.sqrt();
        let cases: [(ProjectionLabel, [f64; 4]); 3] = [
            (ProjectionLabel::P0, [1.0, 0.0, 0.0, 0.0]),
            (ProjectionLabel::P01, [r2, r2, 0.0, 0.0]),
            (ProjectionLabel::P012, [r3, r3, 0.0, r3]),
        ];
        for (label, expected) in cases {
            let phi = projection_state(&label.setting()).unwrap();
            for (a, e) in phi.amplitudes().iter().zip(expected) {
                assert!(close(*a, C64::new(e, 0.0), 1e-12), "{label}");
            }
        }
        // every setting is the equal-weight superposition of its levels
        for (label, t) in projection_settings() {
            let phi = projection_state(&t).unwrap();
            let w = 1.0 / (label.levels().len() as f64).sqrt();
            for (level, &idx) in LEVEL_INDICES.iter().enumerate() {
                let e = if label.levels().contains(&level) { w } else { 0.0 };
                assert!(close(phi.amplitudes()[idx], C64::new(e, 0.0), 1e-12), "{label} level {level}");
            }
        }
    }

    #[test]
    fn random_preparation_inverse_transform_points() {
        assert_eq!(theta_from_uniform(0.0), 0.0);
        assert!((theta_from_uniform(0.5) - PI / 2.0).abs() < 1e-15);
        assert!((theta_from_uniform(1.0) - PI).abs() < 1e-15);
        assert!((phi_from_uniform(0.25) - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn oracle_equivalence_for_random_preparations() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..200 {
            let p = random_preparation(&mut rng);
            let circuit = build_preparation(&p).unwrap().simulate_pure().unwrap();
            let analytic = analytic_amplitudes(&p).unwrap();
            assert!(amps_close(&circuit, &analytic, 1e-10), "{p:?}");
        }
    }

    #[test]
    fn projection_correctness_for_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..200 {
            let p = random_preparation(&mut rng);
            let t = ProjectionParams::new(theta_from_uniform(rng.random()), theta_from_uniform(rng.random())).unwrap();
            let plan = build_preparation(&p).unwrap().then(&build_projection(&t).unwrap()).unwrap();
            let psi = analytic_amplitudes(&p).unwrap();
            let phi = projection_state(&t).unwrap();
            let expected = phi.inner(&psi).unwrap().norm_sqr();
            assert!((p00(&plan) - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn plans_use_only_the_compiled_gate_set() {
        let plan = build_preparation(&PreparationParams::specific())
            .unwrap()
            .then(&build_projection(&ProjectionLabel::P012.setting()).unwrap())
            .unwrap();
        let cnots = plan.instructions().iter().filter(|i| matches!(i.kind, GateKind::Cnot { .. })).count();
        assert_eq!(cnots, 8);
        assert_eq!(plan.instructions().len(), 2 + 11 + 11 + 2);
    }

    #[test]
    fn measurement_must_close_the_plan() {
        let d = GateDurations::default();
        let bad = vec![
            GateInstruction::timed(GateKind::Measure { qubit: 0 }, &d),
            GateInstruction::timed(GateKind::Reset { qubit: 0 }, &d),
        ];
        assert!(matches!(CircuitPlan::new(2, bad), Err(Error::InvalidCircuit(_))));
        let proj = build_projection(&ProjectionLabel::P0.setting()).unwrap();
        assert!(proj.then(&build_preparation(&PreparationParams::specific()).unwrap()).is_err());
    }

    #[test]
    fn invalid_angles_rejected() {
        assert!(matches!(PreparationParams::new(4.0, 0.0, 0.0, 0.0), Err(Error::InvalidAngle { name: "theta1", .. })));
        assert!(PreparationParams::new(0.0, 0.0, f64::NAN, 0.0).is_err());
        let p = PreparationParams::new(0.0, 0.0, TAU, -PI / 2.0).unwrap();
        assert_eq!(p.phi1, 0.0);
        assert!((p.phi2 - 1.5 * PI).abs() < 1e-15);
    }

    #[test]
    fn durations_follow_gate_kind() {
        let plan = build_preparation(&PreparationParams::specific()).unwrap();
        for ins in plan.instructions() {
            let expected = match ins.kind {
                GateKind::SingleU { .. } => 100.0,
                GateKind::Cnot { .. } => 300.0,
                GateKind::Reset { .. } | GateKind::Measure { .. } => 1000.0,
            };
            assert_eq!(ins.duration_ns, expected);
        }
    }
}
