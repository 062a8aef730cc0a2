//! Expected and Poisson-fluctuated photon counts.
//!
//! A measured count is `N_k · Tr(M_k ρ_in)` where the photon budget `N_k` of
//! every measurement setting is an independent Poisson draw with mean `N`.
//! Counts stay real-valued; nothing is rounded.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Result, TomoError};
use crate::povm::{PovmSet, Scheme};
use crate::qmath::{trace_product, HermitianMatrix3};
use crate::states::InputState;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Order-sensitive avalanche mix of several 64-bit words into one seed.
pub fn mix_seed(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(GOLDEN_GAMMA, |h, &p| splitmix64(h.rotate_left(17) ^ p))
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Named, seeded random stream. Identical `(seed, label)` pairs replay
/// identical sequences.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    label: String,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, label: impl Into<String>) -> Self {
        let label = label.into();
        let key = mix_seed(&[seed, fnv1a(label.as_bytes())]);
        RngStream {
            seed,
            label,
            rng: ChaCha8Rng::seed_from_u64(key),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Below this mean the sampler inverts the CDF by sequential search.
const INVERSION_LIMIT: f64 = 30.0;

/// One draw from `Poisson(mean)`.
///
/// Sequential-search inversion for small means, Hörmann's transformed
/// rejection with squeeze (PTRS) otherwise. Both are exact samplers.
pub fn poisson_sample<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<u64> {
    if !mean.is_finite() || mean < 0.0 {
        return Err(TomoError::invalid(format!(
            "Poisson mean must be finite and non-negative, got {mean}"
        )));
    }
    if mean == 0.0 {
        return Ok(0);
    }
    if mean < INVERSION_LIMIT {
        Ok(poisson_inversion(mean, rng))
    } else {
        Ok(poisson_ptrs(mean, rng))
    }
}

fn poisson_inversion<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    let u: f64 = rng.random();
    let mut k = 0u64;
    let mut pmf = (-mean).exp();
    let mut cdf = pmf;
    while u > cdf {
        k += 1;
        pmf *= mean / k as f64;
        if pmf == 0.0 {
            break;
        }
        cdf += pmf;
    }
    k
}

fn poisson_ptrs<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    let log_mean = mean.ln();
    let b = 0.931 + 2.53 * mean.sqrt();
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let v_r = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.random::<f64>() - 0.5;
        let v: f64 = rng.random();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= v_r {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = (v * inv_alpha / (a / (us * us) + b)).ln();
        let rhs = -mean + k * log_mean - ln_factorial(k as u64);
        if lhs <= rhs {
            return k as u64;
        }
    }
}

/// `ln k!`, exact summation below 16 and a Stirling series above.
pub(crate) fn ln_factorial(k: u64) -> f64 {
    if k < 16 {
        return (2..=k).map(|i| (i as f64).ln()).sum();
    }
    let x = k as f64 + 1.0;
    let x2 = x * x;
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x)
        - 1.0 / (360.0 * x * x2)
        + 1.0 / (1260.0 * x * x2 * x2)
}

/// Source of per-setting photon budgets `N_k`.
pub trait BudgetSource {
    fn draw(&mut self, mean: f64) -> Result<f64>;
}

impl BudgetSource for RngStream {
    fn draw(&mut self, mean: f64) -> Result<f64> {
        poisson_sample(mean, self).map(|k| k as f64)
    }
}

/// Noise-free budget: every setting receives exactly the mean.
#[derive(Clone, Copy, Debug, Default)]
pub struct FixedBudget;

impl BudgetSource for FixedBudget {
    fn draw(&mut self, mean: f64) -> Result<f64> {
        if !mean.is_finite() || mean < 0.0 {
            return Err(TomoError::invalid(format!("invalid photon mean {mean}")));
        }
        Ok(mean)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CountKind {
    Expected,
    Measured,
}

/// Per-operator photon counts, indexed in POVM order.
#[derive(Clone, Debug, Serialize)]
pub struct CountVector {
    pub scheme: Scheme,
    pub values: Vec<f64>,
    pub photon_mean: f64,
    pub kind: CountKind,
}

impl CountVector {
    /// Wraps externally supplied counts, e.g. read from an experiment.
    pub fn measured(scheme: Scheme, values: Vec<f64>, photon_mean: f64) -> Result<Self> {
        check_photon_mean(photon_mean)?;
        if values.len() != scheme.element_count() {
            return Err(TomoError::invalid(format!(
                "{scheme} needs {} counts, got {}",
                scheme.element_count(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(TomoError::invalid("counts must be finite and non-negative"));
        }
        Ok(CountVector {
            scheme,
            values,
            photon_mean,
            kind: CountKind::Measured,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_photon_mean(photon_mean: f64) -> Result<()> {
    if photon_mean.is_finite() && photon_mean > 0.0 {
        Ok(())
    } else {
        Err(TomoError::invalid(format!(
            "photon mean must be positive and finite, got {photon_mean}"
        )))
    }
}

fn probabilities<'a>(rho: &HermitianMatrix3, povm: &'a PovmSet) -> impl Iterator<Item = f64> + 'a {
    let rho = *rho;
    povm.elements()
        .iter()
        .map(move |e| trace_product(&e.operator, &rho).max(0.0))
}

/// `n^E_k = N · Tr(M_k ρ)`.
pub fn expected_counts(
    rho: &HermitianMatrix3,
    povm: &PovmSet,
    photon_mean: f64,
) -> Result<CountVector> {
    check_photon_mean(photon_mean)?;
    rho.check_density()?;
    Ok(CountVector {
        scheme: povm.scheme(),
        values: probabilities(rho, povm).map(|p| photon_mean * p).collect(),
        photon_mean,
        kind: CountKind::Expected,
    })
}

/// `n^M_k = N_k · Tr(M_k ρ_in)` with `N_k ~ Poisson(N)` drawn in POVM order.
pub fn measured_counts(
    input: &InputState,
    povm: &PovmSet,
    photon_mean: f64,
    rng: &mut RngStream,
) -> Result<CountVector> {
    measured_counts_with(input, povm, photon_mean, rng)
}

/// [`measured_counts`] with an arbitrary budget source.
pub fn measured_counts_with<S: BudgetSource + ?Sized>(
    input: &InputState,
    povm: &PovmSet,
    photon_mean: f64,
    budget: &mut S,
) -> Result<CountVector> {
    check_photon_mean(photon_mean)?;
    input.rho.check_density()?;
    let values = probabilities(&input.rho, povm)
        .map(|p| budget.draw(photon_mean).map(|n| n * p))
        .collect::<Result<Vec<_>>>()?;
    Ok(CountVector {
        scheme: povm.scheme(),
        values,
        photon_mean,
        kind: CountKind::Measured,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::povm::{mub_povm, sic_povm};
    use crate::states::{apply_dark_counts, pure_state};
    use std::f64::consts::PI;

    fn moments(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn ln_factorial_matches_direct_sum() {
        for k in [0u64, 1, 5, 15, 16, 17, 30, 100, 1000, 12345] {
            let direct: f64 = (2..=k).map(|i| (i as f64).ln()).sum();
            assert!(
                (ln_factorial(k) - direct).abs() < 1e-9 * direct.max(1.0),
                "k={k}"
            );
        }
    }

    #[test]
    fn streams_are_reproducible_and_label_separated() {
        let mut a = RngStream::new(42, "counts");
        let mut b = RngStream::new(42, "counts");
        let mut c = RngStream::new(42, "restarts");
        let xa: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        let xc: Vec<u64> = (0..8).map(|_| c.next_u64()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
        assert_ne!(mix_seed(&[1, 2]), mix_seed(&[2, 1]));
    }

    #[test]
    fn poisson_zero_mean_is_zero() {
        let mut rng = RngStream::new(1, "t");
        assert!((0..1000).all(|_| poisson_sample(0.0, &mut rng).unwrap() == 0));
        assert!(poisson_sample(-1.0, &mut rng).is_err());
        assert!(poisson_sample(f64::NAN, &mut rng).is_err());
    }

    #[test]
    fn poisson_moments_small_mean() {
        let mut rng = RngStream::new(2024, "moments");
        let xs: Vec<f64> = (0..1_000_000)
            .map(|_| poisson_sample(10.0, &mut rng).unwrap() as f64)
            .collect();
        let (m, v) = moments(&xs);
        assert!((m - 10.0).abs() < 0.05, "mean {m}");
        assert!((v - 10.0).abs() < 0.2, "variance {v}");
    }

    #[test]
    fn poisson_moments_large_mean() {
        let mut rng = RngStream::new(77, "moments");
        let xs: Vec<f64> = (0..100_000)
            .map(|_| poisson_sample(10_000.0, &mut rng).unwrap() as f64)
            .collect();
        let (m, v) = moments(&xs);
        assert!((m - 10_000.0).abs() < 2.0, "mean {m}");
        assert!((v / 10_000.0 - 1.0).abs() < 0.03, "variance {v}");
    }

    #[test]
    fn ptrs_pmf_matches_exact_probabilities() {
        // chi-square style check near the regime switch
        let mean = 35.0;
        let mut rng = RngStream::new(5, "pmf");
        let n = 400_000;
        let mut hist = vec![0usize; 120];
        for _ in 0..n {
            let k = poisson_sample(mean, &mut rng).unwrap() as usize;
            hist[k.min(119)] += 1;
        }
        for k in 20..50u64 {
            let p = (-mean + k as f64 * mean.ln() - ln_factorial(k)).exp();
            let expected = p * n as f64;
            let sd = expected.sqrt();
            assert!(
                (hist[k as usize] as f64 - expected).abs() < 5.0 * sd,
                "k={k}: {} vs {expected}",
                hist[k as usize]
            );
        }
    }

    #[test]
    fn expected_count_examples() {
        let mixed = HermitianMatrix3::identity() * (1.0 / 3.0);
        let c = expected_counts(&mixed, &sic_povm(), 9000.0).unwrap();
        assert!(c.values.iter().all(|v| (v - 1000.0).abs() < 1e-9));

        let zero = pure_state(0.0, PI, 0.0, 0.0).unwrap().projector();
        let mub = mub_povm();
        let c = expected_counts(&zero, &mub, 4000.0).unwrap();
        assert!((c.values[mub.position("mub:b1:v1").unwrap()] - 1000.0).abs() < 1e-9);

        let sic = sic_povm();
        let c = expected_counts(&zero, &sic, 6000.0).unwrap();
        assert!((c.values[sic.position("sic:0:0").unwrap()] - 1000.0).abs() < 1e-9);
        assert!((c.values.iter().sum::<f64>() - 6000.0).abs() < 1e-9 * 6000.0);
    }

    #[test]
    fn expected_counts_rejects_bad_inputs() {
        let mixed = HermitianMatrix3::identity() * (1.0 / 3.0);
        assert!(expected_counts(&mixed, &sic_povm(), 0.0).is_err());
        assert!(expected_counts(&HermitianMatrix3::identity(), &sic_povm(), 10.0).is_err());
        let not_psd = HermitianMatrix3::from_real_diagonal([1.2, -0.2, 0.0]).unwrap();
        assert!(expected_counts(&not_psd, &sic_povm(), 10.0).is_err());
    }

    #[test]
    fn fixed_budget_reproduces_expected_counts() {
        let psi = pure_state(1.1, 2.2, 3.3, 4.4).unwrap();
        let input = apply_dark_counts(&psi, 0.25).unwrap();
        for povm in [sic_povm(), mub_povm()] {
            let m = measured_counts_with(&input, &povm, 500.0, &mut FixedBudget).unwrap();
            let e = expected_counts(&input.rho, &povm, 500.0).unwrap();
            assert_eq!(m.values, e.values);
            assert_eq!(m.kind, CountKind::Measured);
        }
    }

    #[test]
    fn measured_counts_fully_mixed_sic() {
        let psi = pure_state(0.3, 0.4, 0.5, 0.6).unwrap();
        let input = apply_dark_counts(&psi, 1.0).unwrap();
        let sic = sic_povm();
        let reps = 2000;
        let mut acc = vec![0.0; 9];
        for seed in 0..reps {
            let mut rng = RngStream::new(seed, "counts");
            let c = measured_counts(&input, &sic, 9000.0, &mut rng).unwrap();
            for (a, v) in acc.iter_mut().zip(&c.values) {
                // each entry is an integer budget divided by nine
                assert!(((v * 9.0) - (v * 9.0).round()).abs() < 1e-6);
                *a += v;
            }
        }
        // sd of one entry is sqrt(9000)/9 ≈ 10.5, so the mean's sd is ≈ 0.24
        for a in acc {
            assert!((a / reps as f64 - 1000.0).abs() < 1.5);
        }
    }

    #[test]
    fn measured_counts_single_photon_regime_mean() {
        let psi = pure_state(0.0, PI, 0.0, 0.0).unwrap();
        let input = apply_dark_counts(&psi, 0.0).unwrap();
        let sic = sic_povm();
        let k = sic.position("sic:0:0").unwrap();
        let n = 100_000;
        let mean = (0..n)
            .map(|seed| {
                let mut rng = RngStream::new(seed, "counts");
                measured_counts(&input, &sic, 10.0, &mut rng)
                    .unwrap()
                    .values[k]
            })
            .sum::<f64>()
            / n as f64;
        assert!((mean - 10.0 / 6.0).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn measured_counts_mean_and_variance_follow_poisson_scaling() {
        let psi = pure_state(1.0, 1.5, 2.0, 5.0).unwrap();
        let input = apply_dark_counts(&psi, 0.2).unwrap();
        let mub = mub_povm();
        let n_mean = 50.0;
        let expected = expected_counts(&input.rho, &mub, n_mean).unwrap();
        let reps = 20_000;
        let samples: Vec<Vec<f64>> = (0..reps)
            .map(|seed| {
                let mut rng = RngStream::new(seed, "counts");
                measured_counts(&input, &mub, n_mean, &mut rng)
                    .unwrap()
                    .values
            })
            .collect();
        for k in 0..mub.len() {
            let col: Vec<f64> = samples.iter().map(|s| s[k]).collect();
            let (m, v) = moments(&col);
            let prob = expected.values[k] / n_mean;
            let var_theory = prob * prob * n_mean;
            let se = (var_theory / reps as f64).sqrt();
            assert!((m - expected.values[k]).abs() <= 3.0 * se + 1e-12, "k={k}");
            if var_theory > 1e-12 {
                assert!(
                    (v / var_theory - 1.0).abs() < 0.05,
                    "k={k}: {v} vs {var_theory}"
                );
            }
        }
    }

    #[test]
    fn measured_counts_deterministic_per_seed() {
        let psi = pure_state(2.0, 1.0, 0.5, 1.5).unwrap();
        let input = apply_dark_counts(&psi, 0.1).unwrap();
        let sic = sic_povm();
        let a = measured_counts(&input, &sic, 10.0, &mut RngStream::new(9, "c")).unwrap();
        let b = measured_counts(&input, &sic, 10.0, &mut RngStream::new(9, "c")).unwrap();
        assert_eq!(a.values, b.values);
    }
}
