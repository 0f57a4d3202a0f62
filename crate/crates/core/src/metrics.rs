//! Interference visibilities, the Peres parameter `F` and Sorkin's `kappa`.
//!
//! Projections onto `(|B(i)> + |B(j)>)/sqrt(2)` and
//! `(|B(0)> + |B(1)> + |B(2)>)/sqrt(3)` measure the normalized path sums, so
//! the unnormalized interference terms are `|x_i + x_j|^2 = 2 p_ij` and
//! `|x_0 + x_1 + x_2|^2 = 3 p_012`. With those weights an ideal pure state
//! gives `gamma_ij = cos(arg x_i - arg x_j)`, `F = 1` and `kappa = 0`.

use std::collections::BTreeMap;

use crate::circuits::ProjectionLabel;
use crate::error::{Error, Result};
use crate::qcore::C64;

/// Marginals at or below this make `gamma` undefined.
pub const GAMMA_EPSILON: f64 = 1e-9;

/// The seven measured projection probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ProjectionProbabilities {
    pub p012: f64,
    pub p01: f64,
    pub p12: f64,
    pub p20: f64,
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
}

impl ProjectionProbabilities {
    pub fn get(&self, label: ProjectionLabel) -> f64 {
        match label {
            ProjectionLabel::P012 => self.p012,
            ProjectionLabel::P01 => self.p01,
            ProjectionLabel::P12 => self.p12,
            ProjectionLabel::P20 => self.p20,
            ProjectionLabel::P0 => self.p0,
            ProjectionLabel::P1 => self.p1,
            ProjectionLabel::P2 => self.p2,
        }
    }

    pub fn set(&mut self, label: ProjectionLabel, value: f64) {
        let slot = match label {
            ProjectionLabel::P012 => &mut self.p012,
            ProjectionLabel::P01 => &mut self.p01,
            ProjectionLabel::P12 => &mut self.p12,
            ProjectionLabel::P20 => &mut self.p20,
            ProjectionLabel::P0 => &mut self.p0,
            ProjectionLabel::P1 => &mut self.p1,
            ProjectionLabel::P2 => &mut self.p2,
        };
        *slot = value;
    }

    pub fn from_fn(mut f: impl FnMut(ProjectionLabel) -> f64) -> Self {
        let mut pp = Self::default();
        for label in ProjectionLabel::ALL {
            pp.set(label, f(label));
        }
        pp
    }

    /// Exact probabilities of a pure three-level state with amplitudes `x`.
    pub fn from_amplitudes(x: [C64; 3]) -> Self {
        Self::from_fn(|label| {
            let levels = label.levels();
            let sum: C64 = levels.iter().map(|&i| x[i]).sum();
            sum.norm_sqr() / levels.len() as f64
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_fn(|l| self.get(l) * factor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaSet {
    pub g01: f64,
    pub g12: f64,
    pub g20: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeresResult {
    pub gammas: GammaSet,
    pub f: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SorkinResult {
    pub kappa: f64,
}

/// `gamma_ij = (2 p_ij - p_i - p_j) / (2 sqrt(p_i p_j))`.
pub fn gamma(p_ij: f64, p_i: f64, p_j: f64) -> Result<f64> {
    gamma_for("ij", p_ij, p_i, p_j)
}

fn gamma_for(pair: &'static str, p_ij: f64, p_i: f64, p_j: f64) -> Result<f64> {
    for marginal in [p_i, p_j] {
        if marginal.is_nan() || marginal <= GAMMA_EPSILON {
            return Err(Error::GammaUndefined { pair, marginal });
        }
    }
    Ok((2.0 * p_ij - p_i - p_j) / (2.0 * (p_i * p_j).sqrt()))
}

pub fn gammas(pp: &ProjectionProbabilities) -> Result<GammaSet> {
    Ok(GammaSet {
        g01: gamma_for("01", pp.p01, pp.p0, pp.p1)?,
        g12: gamma_for("12", pp.p12, pp.p1, pp.p2)?,
        g20: gamma_for("20", pp.p20, pp.p2, pp.p0)?,
    })
}

/// `F = g01^2 + g12^2 + g20^2 - 2 g01 g12 g20`.
pub fn peres_f(g: &GammaSet) -> PeresResult {
    let f = g.g01 * g.g01 + g.g12 * g.g12 + g.g20 * g.g20 - 2.0 * g.g01 * g.g12 * g.g20;
    PeresResult { gammas: *g, f }
}

pub fn peres(pp: &ProjectionProbabilities) -> Result<PeresResult> {
    Ok(peres_f(&gammas(pp)?))
}

/// `kappa = 3 p012 - 2 (p01 + p12 + p20) + (p0 + p1 + p2)`.
pub fn sorkin_kappa(pp: &ProjectionProbabilities) -> SorkinResult {
    sorkin_kappa_weighted(pp, 3.0)
}

/// `kappa` with an explicit weight on the triple-path term. Only `3` measures
/// the unnormalized path sum; other weights exist for self-checks.
pub fn sorkin_kappa_weighted(pp: &ProjectionProbabilities, triple_weight: f64) -> SorkinResult {
    let kappa = triple_weight * pp.p012 - 2.0 * (pp.p01 + pp.p12 + pp.p20) + (pp.p0 + pp.p1 + pp.p2);
    SorkinResult { kappa }
}

/// `kappa_n = |sum x_i|^2 - sum_{i<j} |x_i + x_j|^2 + (n - 2) sum |x_i|^2`,
/// which vanishes identically for complex amplitudes.
pub fn kappa_n(x: &[C64]) -> f64 {
    let n = x.len() as f64;
    let full = x.iter().sum::<C64>().norm_sqr();
    let mut pairs = 0.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            pairs += (x[i] + x[j]).norm_sqr();
        }
    }
    let singles: f64 = x.iter().map(|v| v.norm_sqr()).sum();
    full - pairs + (n - 2.0) * singles
}

/// The same residual in its symmetric form,
/// `|sum x_i|^2 - (1/2) sum_{i,j} |x_i + x_j|^2 + n sum |x_i|^2`
/// (the double sum includes `i = j`, contributing `4 |x_i|^2` each).
pub fn kappa_n_symmetric(x: &[C64]) -> f64 {
    let n = x.len() as f64;
    let full = x.iter().sum::<C64>().norm_sqr();
    let all_pairs: f64 = x.iter().flat_map(|a| x.iter().map(move |b| (a + b).norm_sqr())).sum();
    let singles: f64 = x.iter().map(|v| v.norm_sqr()).sum();
    full - 0.5 * all_pairs + n * singles
}

/// Measured probabilities of equal-weight projections onto subsets of `n`
/// paths, keyed by the sorted path indices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SubsetProbabilities {
    probs: BTreeMap<Vec<usize>, f64>,
}

impl SubsetProbabilities {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, mut subset: Vec<usize>, p: f64) {
        subset.sort_unstable();
        subset.dedup();
        self.probs.insert(subset, p);
    }

    pub fn get(&self, subset: &[usize]) -> Result<f64> {
        let mut key = subset.to_vec();
        key.sort_unstable();
        self.probs.get(&key).copied().ok_or(Error::MissingSubset(key))
    }

    /// Exact probabilities for a pure state whose path amplitudes are `x`.
    pub fn from_amplitudes(x: &[C64]) -> Self {
        let n = x.len();
        let mut sp = Self::new();
        let all: Vec<usize> = (0..n).collect();
        sp.insert(all.clone(), x.iter().sum::<C64>().norm_sqr() / n as f64);
        for i in 0..n {
            sp.insert(vec![i], x[i].norm_sqr());
            for j in i + 1..n {
                sp.insert(vec![i, j], (x[i] + x[j]).norm_sqr() / 2.0);
            }
        }
        sp
    }
}

/// `n p_full - 2 sum_{i<j} p_ij + (n - 2) sum p_i` from measured probabilities.
pub fn kappa_n_defect(pp: &SubsetProbabilities, n: usize) -> Result<f64> {
    let all: Vec<usize> = (0..n).collect();
    let full = pp.get(&all)?;
    let mut pairs = 0.0;
    let mut singles = 0.0;
    for i in 0..n {
        singles += pp.get(&[i])?;
        for j in i + 1..n {
            pairs += pp.get(&[i, j])?;
        }
    }
    Ok(n as f64 * full - 2.0 * pairs + (n as f64 - 2.0) * singles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn specific_amplitudes() -> [C64; 3] {
        let r = 1.0 / 3f64.sqrt();
        [C64::new(r, 0.0), C64::from_polar(r, PI / 4.0), C64::from_polar(r, PI / 2.0)]
    }

    #[test]
    fn gamma_examples() {
        assert!((gamma(2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0).unwrap() - 1.0).abs() < 1e-15);
        let g = gamma((2.0 + 2f64.sqrt()) / 6.0, 1.0 / 3.0, 1.0 / 3.0).unwrap();
        assert!((g - FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(gamma(0.25, 0.25, 0.25).unwrap(), 0.0);
    }

    #[test]
    fn gamma_undefined_for_missing_level() {
        assert!(matches!(gamma(0.5, 0.0, 0.5), Err(Error::GammaUndefined { .. })));
        assert!(matches!(gamma(0.5, 0.5, 1e-10), Err(Error::GammaUndefined { .. })));
        let pp = ProjectionProbabilities::from_amplitudes([C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(matches!(gammas(&pp), Err(Error::GammaUndefined { pair: "01", .. })));
    }

    #[test]
    fn peres_examples() {
        assert_eq!(peres_f(&GammaSet { g01: 1.0, g12: 1.0, g20: 1.0 }).f, 1.0);
        let r = peres_f(&GammaSet { g01: FRAC_1_SQRT_2, g12: FRAC_1_SQRT_2, g20: 0.0 });
        assert!((r.f - 1.0).abs() < 1e-15);
        assert_eq!(peres_f(&GammaSet { g01: 0.0, g12: 0.0, g20: 0.0 }).f, 0.0);
    }

    #[test]
    fn sorkin_examples() {
        let pp = ProjectionProbabilities::from_amplitudes(specific_amplitudes());
        assert!((pp.p012 - (3.0 + 2.0 * 2f64.sqrt()) / 9.0).abs() < 1e-15);
        assert!((pp.p01 - (2.0 + 2f64.sqrt()) / 6.0).abs() < 1e-15);
        assert!((pp.p12 - (2.0 + 2f64.sqrt()) / 6.0).abs() < 1e-15);
        assert!((pp.p20 - 2.0 / 6.0).abs() < 1e-15);
        assert!(sorkin_kappa(&pp).kappa.abs() < 1e-12);

        let uniform = ProjectionProbabilities::from_fn(|_| 0.25);
        assert_eq!(sorkin_kappa(&uniform).kappa, 0.0);
        // with weight 2 on the triple term the uniform point is no longer fixed
        assert_eq!(sorkin_kappa_weighted(&uniform, 2.0).kappa, -0.25);

        let only_triple = ProjectionProbabilities { p012: 1.0, ..Default::default() };
        assert_eq!(sorkin_kappa(&only_triple).kappa, 3.0);
    }

    #[test]
    fn specific_state_metrics() {
        let pp = ProjectionProbabilities::from_amplitudes(specific_amplitudes());
        let r = peres(&pp).unwrap();
        assert!((r.gammas.g01 - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((r.gammas.g12 - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(r.gammas.g20.abs() < 1e-12);
        assert!((r.f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kappa_n_examples() {
        assert_eq!(kappa_n(&[C64::new(5.0, 0.0)]), 0.0);
        let x = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0)];
        assert!(kappa_n(&x).abs() < 1e-15);
        assert!(kappa_n_symmetric(&x).abs() < 1e-15);
    }

    #[test]
    fn kappa_n_defect_examples() {
        let sp = SubsetProbabilities::from_amplitudes(&specific_amplitudes());
        assert!(kappa_n_defect(&sp, 3).unwrap().abs() < 1e-10);
        let pp = ProjectionProbabilities::from_amplitudes(specific_amplitudes());
        assert!((kappa_n_defect(&sp, 3).unwrap() - sorkin_kappa(&pp).kappa).abs() < 1e-15);

        for n in 1..=8 {
            let u = 1.0 / (1u32 << n) as f64;
            let mut sp = SubsetProbabilities::new();
            sp.insert((0..n).collect(), u);
            for i in 0..n {
                sp.insert(vec![i], u);
                for j in i + 1..n {
                    sp.insert(vec![i, j], u);
                }
            }
            assert!(kappa_n_defect(&sp, n).unwrap().abs() < 1e-15, "n = {n}");

            if n < 3 {
                // for n <= 2 the full set coincides with a pair or single path
                continue;
            }
            let delta = 1e-3;
            let base = kappa_n_defect(&sp, n).unwrap();
            sp.insert((0..n).collect(), u + delta);
            let shifted = kappa_n_defect(&sp, n).unwrap();
            assert!((shifted - base - n as f64 * delta).abs() < 1e-12);
        }
    }

    #[test]
    fn kappa_n_defect_missing_subset() {
        let mut sp = SubsetProbabilities::new();
        sp.insert(vec![0, 1], 0.5);
        sp.insert(vec![0], 0.5);
        sp.insert(vec![1], 0.5);
        assert!(kappa_n_defect(&sp, 2).is_ok());
        assert!(matches!(kappa_n_defect(&sp, 3), Err(Error::MissingSubset(_))));
    }

    #[test]
    fn kappa_n_matches_brute_force_identity() {
        // brute force: |sum x|^2 expanded as sum_i sum_j Re(conj(x_i) x_j)
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..1000 {
            let n = rng.random_range(2..=8);
            let x: Vec<C64> =
                (0..n).map(|_| C64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0))).collect();
            let mut expanded = 0.0;
            for a in &x {
                for b in &x {
                    expanded += (a.conj() * b).re;
                }
            }
            let full = x.iter().sum::<C64>().norm_sqr();
            assert!((expanded - full).abs() < 1e-10);
            assert!(kappa_n(&x).abs() < 1e-10);
            assert!(kappa_n_symmetric(&x).abs() < 1e-10);
        }
    }

    #[test]
    fn ideal_states_satisfy_both_tests() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut checked = 0;
        while checked < 1000 {
            let x: [C64; 3] =
                std::array::from_fn(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let norm = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            let x = x.map(|v| v / norm);
            if x.iter().any(|v| v.norm() < 0.05) {
                continue;
            }
            checked += 1;
            let pp = ProjectionProbabilities::from_amplitudes(x);
            assert!(sorkin_kappa(&pp).kappa.abs() <= 1e-10);
            let r = peres(&pp).unwrap();
            assert!((r.f - 1.0).abs() <= 1e-8);
            let expected = (x[0].arg() - x[1].arg()).cos();
            assert!((r.gammas.g01 - expected).abs() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn kappa_n_vanishes(parts in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..=8)) {
            let x: Vec<C64> = parts.iter().map(|&(re, im)| C64::new(re, im)).collect();
            let scale: f64 = x.iter().map(|v| v.norm_sqr()).sum::<f64>().max(1.0);
            prop_assert!(kappa_n(&x).abs() / scale < 1e-9);
        }

        #[test]
        fn sorkin_kappa_is_affine(base in prop::array::uniform7(0.0f64..1.0), idx in 0usize..7, h in 0.01f64..0.5) {
            let label = ProjectionLabel::ALL[idx];
            let pp = ProjectionProbabilities::from_fn(|l| base[ProjectionLabel::ALL.iter().position(|&m| m == l).unwrap()]);
            let mut up = pp;
            up.set(label, pp.get(label) + h);
            let mut up2 = pp;
            up2.set(label, pp.get(label) + 2.0 * h);
            let k0 = sorkin_kappa(&pp).kappa;
            let k1 = sorkin_kappa(&up).kappa;
            let k2 = sorkin_kappa(&up2).kappa;
            prop_assert!((k2 - 2.0 * k1 + k0).abs() < 1e-12);
        }

        #[test]
        fn gammas_are_scale_invariant(base in prop::array::uniform7(0.05f64..1.0), lambda in 0.1f64..10.0) {
            let pp = ProjectionProbabilities::from_fn(|l| base[ProjectionLabel::ALL.iter().position(|&m| m == l).unwrap()]);
            let a = peres(&pp).unwrap();
            let b = peres(&pp.scaled(lambda)).unwrap();
            prop_assert!((a.gammas.g01 - b.gammas.g01).abs() < 1e-12 * (1.0 + a.gammas.g01.abs()));
            prop_assert!((a.f - b.f).abs() < 1e-10 * (1.0 + a.f.abs()));
        }
    }
}
