//! Exact small-N references.
//!
//! Two independent routes to the same partition function:
//!
//! * [`enumerate_classical`] sums the Boltzmann weights of the
//!   photon-eliminated model (couplings `K_ij`, offset `-λ²`), including the
//!   `1/β` prefactor left by the Gaussian integral over the coherent-state
//!   amplitude.
//! * [`quantum_closed_form`] works from the raw couplings `J_ij`. At zero
//!   qubit gap the photon sees a fixed source `S = Σ s_i` in every σˣ sector
//!   and becomes a displaced oscillator with levels `n − λ²S²/N`, so the trace
//!   over the photon gives `(1 − e^{−β})⁻¹ e^{βλ²S²/N}`.
//!
//! The two agree up to the ratio of free-photon partition functions,
//! `Zq (1 − e^{−β}) = β Zcl`, which [`verify_mapping`] checks.
//!
//! Sums over the 2^N configurations are split into a fixed number of chunks,
//! each walked in Gray-code order with O(N) updates per step, and merged by a
//! fixed pairwise tree, so results are bitwise identical for any thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{DisorderRealization, EffectiveModel, PairMatrix};

pub const MAX_ENUMERATION_N: usize = 24;
const CHUNK_BITS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalReport {
    #[serde(rename = "logZcl")]
    pub log_z: f64,
    pub free_energy_per_spin: f64,
    /// Boltzmann average of s̄².
    pub mean_s2: f64,
    /// Boltzmann average of |s̄|.
    pub mean_abs_m: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumReport {
    #[serde(rename = "logZq")]
    pub log_z: f64,
    /// ⟨a†a⟩/N.
    pub theta: f64,
    pub bose_occupancy: f64,
    pub beta: f64,
}

/// Streaming log-sum-exp of weights `e^x` together with two weighted
/// observables. Rescales whenever a new maximum log-weight arrives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedLogSum {
    max: f64,
    sum: f64,
    sum_a: f64,
    sum_b: f64,
}

impl Default for WeightedLogSum {
    fn default() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum: 0.0,
            sum_a: 0.0,
            sum_b: 0.0,
        }
    }
}

impl WeightedLogSum {
    #[inline]
    pub fn push(&mut self, log_w: f64, a: f64, b: f64) {
        if log_w > self.max {
            let scale = (self.max - log_w).exp();
            self.sum *= scale;
            self.sum_a *= scale;
            self.sum_b *= scale;
            self.max = log_w;
        }
        let w = (log_w - self.max).exp();
        self.sum += w;
        self.sum_a += w * a;
        self.sum_b += w * b;
    }

    pub fn merge(self, other: Self) -> Self {
        if other.max == f64::NEG_INFINITY {
            return self;
        }
        if self.max == f64::NEG_INFINITY {
            return other;
        }
        let max = self.max.max(other.max);
        let sl = (self.max - max).exp();
        let so = (other.max - max).exp();
        Self {
            max,
            sum: self.sum * sl + other.sum * so,
            sum_a: self.sum_a * sl + other.sum_a * so,
            sum_b: self.sum_b * sl + other.sum_b * so,
        }
    }

    pub fn log_sum(&self) -> f64 {
        self.max + self.sum.ln()
    }

    pub fn mean_a(&self) -> f64 {
        self.sum_a / self.sum
    }

    pub fn mean_b(&self) -> f64 {
        self.sum_b / self.sum
    }
}

fn check_inputs(n: usize, beta: f64) -> Result<()> {
    if n > MAX_ENUMERATION_N {
        return Err(Error::Capacity {
            n,
            max: MAX_ENUMERATION_N,
        });
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(invalid("beta", format!("must be finite and > 0, got {beta}")));
    }
    Ok(())
}

/// Sum over all 2^N configurations. `log_weight(pair_sum, total_spin)` maps
/// Σ_{i<j} c_ij s_i s_j and S = Σ s_i to a log-weight and two observables.
fn enumerate<F>(couplings: &PairMatrix, log_weight: F) -> WeightedLogSum
where
    F: Fn(f64, i64) -> (f64, f64, f64) + Sync,
{
    let n = couplings.n();
    let dense = couplings.to_dense();
    let chunk_bits = n.min(CHUNK_BITS);
    let low_bits = n - chunk_bits;

    let partials: Vec<WeightedLogSum> = (0..1u64 << chunk_bits)
        .into_par_iter()
        .map(|prefix| {
            // Spins low_bits.. are fixed by the prefix; the low spins start all up.
            let mut s: Vec<f64> = (0..n)
                .map(|i| {
                    if i >= low_bits && (prefix >> (i - low_bits)) & 1 == 1 {
                        -1.0
                    } else {
                        1.0
                    }
                })
                .collect();
            let mut pair_sum = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    pair_sum += dense[i * n + j] * s[i] * s[j];
                }
            }
            let mut total: i64 = s.iter().map(|&x| x as i64).sum();

            let mut acc = WeightedLogSum::default();
            let (lw, a, b) = log_weight(pair_sum, total);
            acc.push(lw, a, b);
            for step in 1..1u64 << low_bits {
                let k = step.trailing_zeros() as usize;
                let row = &dense[k * n..(k + 1) * n];
                let field: f64 = row.iter().zip(&s).map(|(c, x)| c * x).sum();
                pair_sum -= 2.0 * s[k] * field;
                total -= 2 * s[k] as i64;
                s[k] = -s[k];
                let (lw, a, b) = log_weight(pair_sum, total);
                acc.push(lw, a, b);
            }
            acc
        })
        .collect();
    tree_reduce(partials)
}

fn tree_reduce(mut parts: Vec<WeightedLogSum>) -> WeightedLogSum {
    while parts.len() > 1 {
        parts = parts
            .chunks(2)
            .map(|c| if c.len() == 2 { c[0].merge(c[1]) } else { c[0] })
            .collect();
    }
    parts.pop().unwrap_or_default()
}

/// Exact partition function of the photon-eliminated model,
/// `Zcl = (1/β) Σ_s e^{−βE(s)}`.
pub fn enumerate_classical(model: &EffectiveModel, beta: f64) -> Result<ClassicalReport> {
    let n = model.n();
    check_inputs(n, beta)?;
    let nf = n as f64;
    let offset = model.offset;
    let acc = enumerate(&model.k, |pair_sum, total| {
        let mbar = total as f64 / nf;
        (-beta * (-pair_sum + offset), mbar * mbar, mbar.abs())
    });
    let log_z = acc.log_sum() - beta.ln();
    Ok(ClassicalReport {
        log_z,
        free_energy_per_spin: -log_z / (beta * nf),
        mean_s2: acc.mean_a(),
        mean_abs_m: acc.mean_b(),
        beta,
    })
}

/// Thermal photon occupancy 1/(e^β − 1).
pub fn bose_occupancy(beta: f64) -> f64 {
    1.0 / beta.exp_m1()
}

/// Exact partition function and photon number of the full zero-gap model.
pub fn quantum_closed_form(
    disorder: &DisorderRealization,
    lambda: f64,
    beta: f64,
) -> Result<QuantumReport> {
    let n = disorder.n();
    check_inputs(n, beta)?;
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(invalid("lambda", format!("must be finite and >= 0, got {lambda}")));
    }
    let nf = n as f64;
    let g2 = lambda * lambda / nf;
    let acc = enumerate(&disorder.couplings, |pair_sum, total| {
        let s = total as f64;
        let mbar = s / nf;
        (beta * (g2 * s * s + pair_sum), mbar * mbar, 0.0)
    });
    // log (1 − e^{−β})⁻¹
    let photon = -(-(-beta).exp_m1()).ln();
    let n_b = bose_occupancy(beta);
    Ok(QuantumReport {
        log_z: acc.log_sum() + photon,
        theta: n_b / nf + lambda * lambda * acc.mean_a(),
        bose_occupancy: n_b,
        beta,
    })
}

/// Residual of the photon-elimination identity `Zq (1 − e^{−β}) = β Zcl`,
/// both sides computed by independent enumerations.
pub fn verify_mapping(disorder: &DisorderRealization, lambda: f64, beta: f64) -> Result<f64> {
    let model = crate::model::build_effective(disorder, lambda)?;
    mapping_residual(disorder, &model, lambda, beta)
}

/// As [`verify_mapping`] but against a caller-supplied effective model.
pub fn mapping_residual(
    disorder: &DisorderRealization,
    model: &EffectiveModel,
    lambda: f64,
    beta: f64,
) -> Result<f64> {
    let cl = enumerate_classical(model, beta)?;
    let q = quantum_closed_form(disorder, lambda, beta)?;
    let log_ratio = q.log_z + (-(-beta).exp_m1()).ln() - cl.log_z - beta.ln();
    Ok(log_ratio.exp_m1().abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        build_effective, effective_energy, magnetization, sample_disorder, SpinConfiguration,
    };
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    fn two_spin(j12: f64) -> DisorderRealization {
        DisorderRealization {
            couplings: PairMatrix::from_fn(2, |_, _| j12),
            seed: 0,
            j0: 0.0,
            j: 0.0,
        }
    }

    #[test]
    fn uncoupled_pair_is_uniform() {
        let m = build_effective(&two_spin(0.0), 0.0).unwrap();
        let r = enumerate_classical(&m, 1.0).unwrap();
        assert!((r.mean_s2 - 0.5).abs() < 1e-15);
        assert!((r.mean_abs_m - 0.5).abs() < 1e-15);
    }

    #[test]
    fn coupled_pair_closed_form() {
        let d = two_spin(1.0);
        assert_eq!(d.couplings.get(0, 1), 1.0);
        let r = enumerate_classical(&build_effective(&d, 0.0).unwrap(), 1.0).unwrap();
        assert!((r.mean_s2 - 0.880_797_077_977_882_4).abs() < 1e-14);
    }

    #[test]
    fn single_spin_offset_only() {
        let d = sample_disorder(1, 0.0, 1.0, 3).unwrap();
        let r = enumerate_classical(&build_effective(&d, 1.0).unwrap(), 2.0).unwrap();
        assert!((r.log_z - 2.0).abs() < 1e-14);
        assert!((r.free_energy_per_spin + 1.0).abs() < 1e-14);
    }

    #[test]
    fn decoupled_photon() {
        let d = sample_disorder(6, 0.4, 1.0, 8).unwrap();
        let beta = 1.3;
        let q = quantum_closed_form(&d, 0.0, beta).unwrap();
        let cl = enumerate_classical(&build_effective(&d, 0.0).unwrap(), beta).unwrap();
        let expected = -(1.0 - (-beta).exp()).ln() + cl.log_z + beta.ln();
        assert!((q.log_z - expected).abs() < 1e-12);
        assert!((q.theta - bose_occupancy(beta) / 6.0).abs() < 1e-15);
    }

    #[test]
    fn single_spin_ground_state_photon_number() {
        let d = sample_disorder(1, 0.0, 1.0, 3).unwrap();
        let q = quantum_closed_form(&d, 1.0, 40.0).unwrap();
        assert!((q.theta - 1.0).abs() < 1e-15);
        assert!(q.bose_occupancy < 1e-17);
    }

    #[test]
    fn mapping_identity_cases() {
        let d = sample_disorder(8, 0.2, 1.0, 42).unwrap();
        assert!(verify_mapping(&d, 0.7, 2.0).unwrap() < 1e-10);
        assert!(verify_mapping(&d, 0.0, 0.5).unwrap() < 1e-12);
        let one = sample_disorder(1, 0.0, 1.0, 0).unwrap();
        assert!(verify_mapping(&one, 1.0, 1.0).unwrap() < 1e-12);
    }

    #[test]
    fn tampered_shift_breaks_identity() {
        let d = sample_disorder(8, 0.2, 1.0, 42).unwrap();
        let lambda = 0.7;
        let mut wrong = build_effective(&d, lambda).unwrap();
        let half = lambda * lambda / 8.0;
        wrong.k = PairMatrix::from_fn(8, |i, j| d.couplings.get(i, j) + half);
        assert!(mapping_residual(&d, &wrong, lambda, 2.0).unwrap() > 1e-3);
    }

    #[test]
    fn guards() {
        let big = sample_disorder(25, 0.0, 1.0, 0).unwrap();
        let m = build_effective(&big, 0.1).unwrap();
        assert_eq!(
            enumerate_classical(&m, 1.0).unwrap_err(),
            Error::Capacity { n: 25, max: 24 }
        );
        let small = sample_disorder(3, 0.0, 1.0, 0).unwrap();
        let m = build_effective(&small, 0.1).unwrap();
        assert!(enumerate_classical(&m, 0.0).is_err());
        assert!(quantum_closed_form(&small, 0.1, -1.0).is_err());
    }

    #[test]
    fn result_independent_of_thread_count() {
        let d = sample_disorder(14, 0.3, 1.0, 77).unwrap();
        let m = build_effective(&d, 0.9).unwrap();
        let pool = |t| rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap();
        let a = pool(1).install(|| enumerate_classical(&m, 1.7).unwrap());
        let b = pool(4).install(|| enumerate_classical(&m, 1.7).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn direct_sum_in_shuffled_order_agrees() {
        let n = 9;
        let d = sample_disorder(n, 0.5, 1.0, 5).unwrap();
        let m = build_effective(&d, 1.1).unwrap();
        let beta = 1.4;
        let reference = enumerate_classical(&m, beta).unwrap();
        let mut states: Vec<u64> = (0..1 << n).collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..3 {
            states.shuffle(&mut rng);
            let mut acc = WeightedLogSum::default();
            for &bits in &states {
                let s = SpinConfiguration::from_bits(n, bits);
                let mbar = magnetization(&s);
                acc.push(-beta * effective_energy(&m, &s).unwrap(), mbar * mbar, mbar.abs());
            }
            assert!((acc.log_sum() - beta.ln() - reference.log_z).abs() < 1e-12);
            assert!((acc.mean_a() - reference.mean_s2).abs() < 1e-12);
            assert!((acc.mean_b() - reference.mean_abs_m).abs() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn photon_number_matches_classical_weights(
            n in 1usize..11, seed: u64, lambda in 0.0f64..2.0, beta in 0.1f64..5.0
        ) {
            let d = sample_disorder(n, 0.3, 1.0, seed).unwrap();
            let q = quantum_closed_form(&d, lambda, beta).unwrap();
            let cl = enumerate_classical(&build_effective(&d, lambda).unwrap(), beta).unwrap();
            let implied = (q.theta - q.bose_occupancy / n as f64) / (lambda * lambda).max(1e-300);
            if lambda > 0.05 {
                prop_assert!((implied - cl.mean_s2).abs() < 1e-12);
            }
            prop_assert!(cl.mean_s2 >= cl.mean_abs_m * cl.mean_abs_m - 1e-15);
            prop_assert!((0.0..=1.0 + 1e-15).contains(&cl.mean_s2));
            prop_assert!(q.theta >= 0.0);
            prop_assert!(verify_mapping(&d, lambda, beta).unwrap() < 1e-10);
        }
    }
}
