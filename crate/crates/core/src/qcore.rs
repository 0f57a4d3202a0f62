//! Dense complex linear algebra for few-qubit registers.
//!
//! Basis index bit `k` holds qubit `k`, so for two qubits the label
//! `|q1 q0>` maps to index `2*q1 + q0`. Qubit 0 is the rightmost character
//! of a basis label.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const MAX_QUBITS: usize = 10;

/// Tolerance on `sum |a|^2 = 1` when a vector is turned into a state.
pub const NORM_TOLERANCE: f64 = 1e-8;
pub const TRACE_TOLERANCE: f64 = 1e-10;
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;
pub const EIGEN_TOLERANCE: f64 = 1e-10;
pub const UNITARY_TOLERANCE: f64 = 1e-10;

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    let n = dim.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(Error::TooManyQubits(n));
    }
    Ok(n)
}

fn all_finite<'a>(values: impl IntoIterator<Item = &'a C64>) -> bool {
    values.into_iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// Wraps raw amplitudes. Normalization is checked only when the vector is
    /// turned into a density matrix, so unnormalized path sums can be carried.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        qubits_for_dim(amplitudes.len())?;
        if !all_finite(&amplitudes) {
            return Err(Error::NonFinite("state vector"));
        }
        Ok(Self { amplitudes })
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits(n_qubits));
        }
        let dim = 1 << n_qubits;
        if index >= dim {
            return Err(Error::DimensionMismatch { expected: dim, found: index });
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    /// Haar-distributed pure state (normalized complex Gaussian vector).
    pub fn random<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Self {
        let dim = 1 << n_qubits;
        loop {
            let amplitudes: Vec<C64> = (0..dim).map(|_| C64::new(gaussian(rng), gaussian(rng))).collect();
            let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                return Self { amplitudes: amplitudes.into_iter().map(|a| a / norm).collect() };
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn apply(&self, u: &UnitaryMatrix) -> Result<StateVector> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.dim() });
        }
        let m = u.matrix();
        let amplitudes =
            (0..self.dim()).map(|r| (0..self.dim()).map(|c| m[(r, c)] * self.amplitudes[c]).sum()).collect();
        Ok(StateVector { amplitudes })
    }
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    matrix: DMatrix<C64>,
}

impl UnitaryMatrix {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        qubits_for_dim(matrix.nrows())?;
        if !all_finite(matrix.iter()) {
            return Err(Error::NonFinite("unitary"));
        }
        let u = Self { matrix };
        let dev = u.unitarity_error();
        if dev > UNITARY_TOLERANCE {
            return Err(Error::NotUnitary(dev));
        }
        Ok(u)
    }

    pub fn from_rows(rows: &[&[C64]]) -> Result<Self> {
        let dim = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.len() });
        }
        Self::new(DMatrix::from_fn(dim, dim, |r, c| rows[r][c]))
    }

    pub fn identity(dim: usize) -> Result<Self> {
        qubits_for_dim(dim)?;
        Ok(Self { matrix: DMatrix::identity(dim, dim) })
    }

    pub fn pauli_x() -> Self {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        Self { matrix: DMatrix::from_row_slice(2, 2, &[o, l, l, o]) }
    }

    /// Controlled-NOT with the control on the first (most significant) local qubit.
    pub fn cnot() -> Self {
        let mut matrix = DMatrix::zeros(4, 4);
        let l = C64::new(1.0, 0.0);
        matrix[(0, 0)] = l;
        matrix[(1, 1)] = l;
        matrix[(2, 3)] = l;
        matrix[(3, 2)] = l;
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self { matrix: self.matrix.adjoint() }
    }

    pub fn unitarity_error(&self) -> f64 {
        let prod = self.matrix.adjoint() * &self.matrix;
        let dim = self.dim();
        let mut worst = 0.0_f64;
        for r in 0..dim {
            for c in 0..dim {
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((prod[(r, c)] - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    /// Places `self` on `targets` of an `n_qubits` register, identity elsewhere.
    ///
    /// `targets` are listed in tensor order: `targets[0]` is the most
    /// significant qubit of `self`'s local index. `embed(cnot, [c, t], n)`
    /// therefore controls on `c` and flips `t`.
    pub fn embed(&self, targets: &[usize], n_qubits: usize) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits(n_qubits));
        }
        let k = targets.len();
        if self.dim() != 1 << k {
            return Err(Error::DimensionMismatch { expected: 1 << k, found: self.dim() });
        }
        check_qubits(targets, n_qubits)?;

        let dim = 1usize << n_qubits;
        let mask: usize = targets.iter().map(|&q| 1usize << q).sum();
        let local = |global: usize| -> usize {
            targets.iter().enumerate().map(|(pos, &q)| ((global >> q) & 1) << (k - 1 - pos)).sum()
        };
        let matrix = DMatrix::from_fn(dim, dim, |r, c| {
            if r & !mask == c & !mask {
                self.matrix[(local(r), local(c))]
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Ok(Self { matrix })
    }
}

pub(crate) fn check_qubits(qubits: &[usize], n_qubits: usize) -> Result<()> {
    for (i, &q) in qubits.iter().enumerate() {
        if q >= n_qubits {
            return Err(Error::QubitOutOfRange { index: q, n_qubits });
        }
        if qubits[..i].contains(&q) {
            return Err(Error::DuplicateQubit(q));
        }
    }
    Ok(())
}

/// Hermitian, positive semidefinite, unit-trace state of a qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates every invariant: Hermitian, unit trace, eigenvalues >= -1e-10.
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        qubits_for_dim(matrix.nrows())?;
        if !all_finite(matrix.iter()) {
            return Err(Error::NonFinite("density matrix"));
        }
        let rho = Self { matrix };
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_raw(matrix: DMatrix<C64>) -> Self {
        Self { matrix }
    }

    /// `|psi><psi|`; rejects vectors whose squared norm is off by more than 1e-8.
    pub fn from_statevector(sv: &StateVector) -> Result<Self> {
        let dev = (sv.norm_sqr() - 1.0).abs();
        if dev > NORM_TOLERANCE {
            return Err(Error::NotNormalized(dev));
        }
        let a = sv.amplitudes();
        let dim = a.len();
        Ok(Self { matrix: DMatrix::from_fn(dim, dim, |j, k| a[j] * a[k].conj()) })
    }

    /// `|0...0><0...0|`.
    pub fn ground(n_qubits: usize) -> Result<Self> {
        Self::from_statevector(&StateVector::basis(n_qubits, 0)?)
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits(n_qubits));
        }
        let dim = 1 << n_qubits;
        let mut matrix = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            matrix[(i, i)] = C64::new(1.0 / dim as f64, 0.0);
        }
        Ok(Self { matrix })
    }

    /// Random mixed state `G G^dagger / tr(G G^dagger)` with a Ginibre `G` of
    /// random rank, so pure and low-rank states are drawn too.
    pub fn random<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Self {
        let dim = 1 << n_qubits;
        let rank = rng.random_range(1..=dim);
        let g = DMatrix::from_fn(dim, rank, |_, _| C64::new(gaussian(rng), gaussian(rng)));
        let mut m = &g * g.adjoint();
        let tr = m.trace().re;
        m /= C64::new(tr, 0.0);
        Self { matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Largest `|rho[j][k] - conj(rho[k][j])|`.
    pub fn hermiticity_error(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0_f64;
        for j in 0..dim {
            for k in j..dim {
                worst = worst.max((self.matrix[(j, k)] - self.matrix[(k, j)].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        // Eigen-decompose the Hermitian part so tiny asymmetries do not bias the result.
        // Subnormal entries (left by strongly decayed coherences) derail nalgebra's
        // Hermitian solver by up to ~1e-7, so they are flushed to zero first.
        let flush = |x: f64| if x.abs() < f64::MIN_POSITIVE { 0.0 } else { x };
        let herm =
            ((&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0)).map(|z| C64::new(flush(z.re), flush(z.im)));
        herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > HERMITIAN_TOLERANCE {
            return Err(Error::InvalidDensityMatrix(format!("hermiticity error {herm:e}")));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > TRACE_TOLERANCE || tr.im.abs() > TRACE_TOLERANCE {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr}")));
        }
        let min_eig = self.min_eigenvalue();
        if min_eig < -EIGEN_TOLERANCE {
            return Err(Error::InvalidDensityMatrix(format!("minimum eigenvalue {min_eig:e}")));
        }
        Ok(())
    }

    /// `U rho U^dagger`.
    pub fn apply_unitary(&self, u: &UnitaryMatrix) -> Result<Self> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.dim() });
        }
        let m = u.matrix();
        Ok(Self { matrix: m * &self.matrix * m.adjoint() })
    }

    /// Applies a small gate to `targets` (tensor order, see [`UnitaryMatrix::embed`]).
    pub fn apply_gate(&self, gate: &UnitaryMatrix, targets: &[usize]) -> Result<Self> {
        self.apply_unitary(&gate.embed(targets, self.n_qubits())?)
    }

    /// Resets `qubit` to `|0>`, discarding whatever it held.
    pub fn reset_qubit(&self, qubit: usize) -> Result<Self> {
        check_qubits(&[qubit], self.n_qubits())?;
        let bit = 1usize << qubit;
        let dim = self.dim();
        let matrix = DMatrix::from_fn(dim, dim, |j, k| {
            if j & bit == 0 && k & bit == 0 {
                self.matrix[(j, k)] + self.matrix[(j | bit, k | bit)]
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Ok(Self { matrix })
    }

    /// Computational-basis outcome distribution. Round-off negatives are clamped to zero.
    pub fn basis_probabilities(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re.clamp(0.0, 1.0)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn approx_matrix(a: &DMatrix<C64>, b: &DMatrix<C64>, tol: f64) -> bool {
        a.shape() == b.shape() && a.iter().zip(b.iter()).all(|(x, y)| (x - y).norm() <= tol)
    }

    fn ry(theta: f64) -> UnitaryMatrix {
        let (s, co) = (theta / 2.0).sin_cos();
        UnitaryMatrix::from_rows(&[&[c(co, 0.0), c(-s, 0.0)], &[c(s, 0.0), c(co, 0.0)]]).unwrap()
    }

    fn specific_state() -> StateVector {
        let r = 1.0 / 3f64.sqrt();
        StateVector::new(vec![c(r, 0.0), C64::from_polar(r, PI / 4.0), c(0.0, 0.0), C64::from_polar(r, PI / 2.0)])
            .unwrap()
    }

    #[test]
    fn density_matrix_of_basis_state() {
        let rho = DensityMatrix::from_statevector(&StateVector::basis(1, 0).unwrap()).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(approx_matrix(rho.matrix(), &expected, 0.0));
    }

    #[test]
    fn density_matrix_of_plus_state() {
        let sv = StateVector::new(vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]).unwrap();
        let rho = DensityMatrix::from_statevector(&sv).unwrap();
        assert!(rho.matrix().iter().all(|z| (z - c(0.5, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn density_matrix_of_specific_state() {
        let rho = DensityMatrix::from_statevector(&specific_state()).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| rho.matrix()[(i, i)].re).collect();
        for (d, e) in diag.iter().zip([1.0 / 3.0, 1.0 / 3.0, 0.0, 1.0 / 3.0]) {
            assert!((d - e).abs() < 1e-15);
        }
        // rho[01][00] = a1 conj(a0) = e^{i pi/4}/3
        assert!((rho.matrix()[(1, 0)] - C64::from_polar(1.0 / 3.0, PI / 4.0)).norm() < 1e-15);
        rho.validate().unwrap();
    }

    #[test]
    fn unnormalized_vector_rejected() {
        let sv = StateVector::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(matches!(DensityMatrix::from_statevector(&sv), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn non_power_of_two_rejected() {
        assert!(matches!(StateVector::new(vec![c(1.0, 0.0); 3]), Err(Error::NotPowerOfTwo(3))));
    }

    #[test]
    fn embed_x_on_qubit_zero() {
        let u = UnitaryMatrix::pauli_x().embed(&[0], 2).unwrap();
        // |q1 0> <-> |q1 1>: index pairs (0,1) and (2,3)
        let m = u.matrix();
        for (r, col) in [(0, 1), (1, 0), (2, 3), (3, 2)] {
            assert_eq!(m[(r, col)], c(1.0, 0.0));
        }
        assert_eq!(m.iter().filter(|z| z.norm() > 0.0).count(), 4);
    }

    #[test]
    fn embed_identity_is_identity() {
        let u = UnitaryMatrix::identity(2).unwrap().embed(&[1], 2).unwrap();
        assert!(approx_matrix(u.matrix(), &DMatrix::identity(4, 4), 0.0));
    }

    #[test]
    fn embed_cnot_controls_on_first_listed_qubit() {
        let u = UnitaryMatrix::cnot().embed(&[1, 0], 2).unwrap();
        // |10> (q1 = 1, q0 = 0) is index 2; flipping q0 gives |11> = index 3
        let out = StateVector::basis(2, 2).unwrap().apply(&u).unwrap();
        assert!((out.amplitudes()[3] - c(1.0, 0.0)).norm() < 1e-15);
        let u = UnitaryMatrix::cnot().embed(&[0, 1], 2).unwrap();
        // control q0: |01> (index 1) -> |11> (index 3)
        let out = StateVector::basis(2, 1).unwrap().apply(&u).unwrap();
        assert!((out.amplitudes()[3] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn embed_errors() {
        assert!(matches!(UnitaryMatrix::cnot().embed(&[0], 2), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(UnitaryMatrix::cnot().embed(&[1, 1], 2), Err(Error::DuplicateQubit(1))));
        assert!(matches!(UnitaryMatrix::pauli_x().embed(&[2], 2), Err(Error::QubitOutOfRange { .. })));
    }

    #[test]
    fn non_unitary_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(UnitaryMatrix::new(m), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn apply_identity_and_bit_flip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = DensityMatrix::random(2, &mut rng);
        let same = rho.apply_unitary(&UnitaryMatrix::identity(4).unwrap()).unwrap();
        assert!(approx_matrix(same.matrix(), rho.matrix(), 1e-15));

        let zero = DensityMatrix::ground(1).unwrap();
        let one = zero.apply_unitary(&UnitaryMatrix::pauli_x()).unwrap();
        assert_eq!(one.basis_probabilities(), vec![0.0, 1.0]);
    }

    #[test]
    fn apply_half_rotation() {
        let rho = DensityMatrix::ground(1).unwrap().apply_unitary(&ry(PI / 2.0)).unwrap();
        assert!(rho.matrix().iter().all(|z| (z - c(0.5, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn apply_dimension_mismatch() {
        let rho = DensityMatrix::ground(2).unwrap();
        assert!(matches!(rho.apply_unitary(&UnitaryMatrix::pauli_x()), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn basis_probabilities_examples() {
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        assert_eq!(mixed.basis_probabilities(), vec![0.25; 4]);
        assert_eq!(DensityMatrix::ground(2).unwrap().basis_probabilities(), vec![1.0, 0.0, 0.0, 0.0]);
        let p = DensityMatrix::from_statevector(&specific_state()).unwrap().basis_probabilities();
        for (x, e) in p.iter().zip([1.0 / 3.0, 1.0 / 3.0, 0.0, 1.0 / 3.0]) {
            assert!((x - e).abs() < 1e-15);
        }
    }

    #[test]
    fn reset_sends_qubit_to_zero() {
        let rho = DensityMatrix::maximally_mixed(2).unwrap().reset_qubit(1).unwrap();
        let p = rho.basis_probabilities();
        assert_eq!(p, vec![0.5, 0.5, 0.0, 0.0]);
        rho.validate().unwrap();
    }

    #[test]
    fn invalid_density_matrices() {
        let not_unit = DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.4, 0.0)]);
        assert!(DensityMatrix::new(not_unit).is_err());
        let negative = DMatrix::from_row_slice(2, 2, &[c(1.2, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.2, 0.0)]);
        assert!(DensityMatrix::new(negative).is_err());
        let non_herm = DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
        assert!(DensityMatrix::new(non_herm).is_err());
    }

    #[test]
    fn unitary_round_trip_and_invariants_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for i in 0..10_000 {
            let n = 1 + i % 3;
            let rho = DensityMatrix::random(n, &mut rng);
            let u = random_unitary(n, &mut rng);
            let out = rho.apply_unitary(&u).unwrap();
            assert!((out.trace().re - 1.0).abs() < 1e-10 && out.trace().im.abs() < 1e-10);
            assert!(out.hermiticity_error() < 1e-12);
            let back = out.apply_unitary(&u.adjoint()).unwrap();
            assert!(approx_matrix(back.matrix(), rho.matrix(), 1e-10));
            let p = out.basis_probabilities();
            assert!(p.iter().all(|x| (0.0..=1.0).contains(x)));
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    /// Random unitary via Gram-Schmidt on a complex Gaussian matrix.
    fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> UnitaryMatrix {
        let dim = 1 << n;
        let mut cols: Vec<Vec<C64>> = Vec::new();
        while cols.len() < dim {
            let mut v: Vec<C64> = (0..dim).map(|_| c(gaussian(rng), gaussian(rng))).collect();
            for u in &cols {
                let proj: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= proj * y;
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                cols.push(v.into_iter().map(|z| z / norm).collect());
            }
        }
        UnitaryMatrix::new(DMatrix::from_fn(dim, dim, |r, col| cols[col][r])).unwrap()
    }

    #[test]
    fn min_eigenvalue_ignores_subnormal_entries() {
        let (a, c) = (0.3879324705751147, 0.6120675294248854);
        let b = C64::new(-0.42016549886315646, 0.20876527366186234);
        let tiny = C64::new(4.363e-321, -4.78e-321);
        let mut m = DMatrix::from_element(4, 4, C64::new(0.0, 0.0));
        m[(0, 0)] = C64::new(a, 0.0);
        m[(2, 2)] = C64::new(c, 0.0);
        m[(0, 2)] = b;
        m[(2, 0)] = b.conj();
        m[(0, 1)] = tiny;
        m[(1, 0)] = tiny.conj();
        m[(2, 3)] = tiny;
        m[(3, 2)] = tiny.conj();
        let rho = DensityMatrix::new(m).unwrap();
        let exact = (1.0 - (1.0 - 4.0 * (a * c - b.norm_sqr())).sqrt()) / 2.0;
        assert!(exact > 0.017);
        assert!(rho.min_eigenvalue().abs() < 1e-12, "{}", rho.min_eigenvalue());
    }
}
