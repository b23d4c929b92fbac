//! Metropolis sampling with parallel tempering on the effective spin model.
//!
//! Each temperature carries two independent replicas so the overlap
//! `q = (1/N) Σ s⁽¹⁾s⁽²⁾` can be measured. Every replica owns a ChaCha8
//! stream keyed by `(seed, rung, replica)` that stays with its temperature
//! slot when configurations are exchanged, and exchanges draw from a
//! separate stream, so a run depends only on its configuration.

use std::io::{self, Write};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fmt::real;
use crate::model::{
    build_effective, sample_disorder, DisorderRealization, EffectiveModel, ModelParams,
    SpinConfiguration,
};
use crate::oracle::bose_occupancy;
use crate::seeding::{derive_seed, stream_rng};
use crate::stats::{sample_estimate, BlockAccumulator, Estimate};

pub const REPLICAS_PER_T: usize = 2;
/// Sweeps between full recomputations of the local fields.
pub const DRIFT_CHECK_INTERVAL: usize = 1000;

const SWAP_STREAM: u64 = 0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCConfig {
    /// Total sweeps per replica, burn-in included.
    pub sweeps: usize,
    pub burn_in: usize,
    /// Temperatures, strictly ascending.
    pub ladder: Vec<f64>,
    pub exchange_interval: usize,
    pub seed: u64,
    pub block_count: usize,
}

impl MCConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.sweeps {
            return Err(invalid(
                "burn_in",
                format!("must be < sweeps ({} >= {})", self.burn_in, self.sweeps),
            ));
        }
        if self.ladder.is_empty() {
            return Err(invalid("ladder", "needs at least one temperature"));
        }
        if self.ladder.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return Err(invalid("ladder", "temperatures must be finite and > 0"));
        }
        if self.ladder.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("ladder", "temperatures must be strictly ascending"));
        }
        if self.exchange_interval == 0 {
            return Err(invalid("exchange_interval", "must be >= 1"));
        }
        if self.block_count < 8 {
            return Err(invalid(
                "block_count",
                format!("must be >= 8, got {}", self.block_count),
            ));
        }
        if self.measurements() < self.block_count {
            return Err(invalid(
                "block_count",
                format!(
                    "{} measured sweeps cannot fill {} blocks",
                    self.measurements(),
                    self.block_count
                ),
            ));
        }
        Ok(())
    }

    pub fn measurements(&self) -> usize {
        self.sweeps.saturating_sub(self.burn_in)
    }
}

/// `rungs` temperatures spaced evenly in log T over `[t_min, t_max]`.
pub fn geometric_ladder(t_min: f64, t_max: f64, rungs: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0) || !t_max.is_finite() {
        return Err(invalid("t_min", "temperatures must be finite and > 0"));
    }
    match rungs {
        0 => Err(invalid("rungs", "must be >= 1")),
        1 => Ok(vec![t_min]),
        _ => {
            if !(t_min < t_max) {
                return Err(invalid("t_max", "must exceed t_min"));
            }
            let ratio = (t_max / t_min).ln() / (rungs - 1) as f64;
            Ok((0..rungs)
                .map(|k| if k == rungs - 1 { t_max } else { t_min * (ratio * k as f64).exp() })
                .collect())
        }
    }
}

/// Row-major copy of the effective couplings with a zero diagonal.
#[derive(Debug, Clone)]
pub struct DenseCouplings {
    n: usize,
    k: Vec<f64>,
    offset: f64,
}

impl DenseCouplings {
    pub fn new(model: &EffectiveModel) -> Self {
        Self {
            n: model.n(),
            k: model.k.to_dense(),
            offset: model.offset,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.k[i * self.n..(i + 1) * self.n]
    }

    fn fields(&self, spins: &[i8]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(spins).map(|(k, &s)| k * s as f64).sum())
            .collect()
    }
}

/// A spin configuration with its local fields `h_i = Σ_j K_ij s_j` and
/// energy kept current under single flips.
#[derive(Debug, Clone)]
pub struct ChainState {
    spins: SpinConfiguration,
    fields: Vec<f64>,
    energy: f64,
    order: Vec<usize>,
}

impl ChainState {
    pub fn new(couplings: &DenseCouplings, spins: SpinConfiguration) -> Result<Self> {
        if spins.len() != couplings.n {
            return Err(Error::LengthMismatch {
                expected: couplings.n,
                got: spins.len(),
            });
        }
        let mut state = Self {
            fields: Vec::new(),
            energy: 0.0,
            order: (0..couplings.n).collect(),
            spins,
        };
        state.resync(couplings);
        Ok(state)
    }

    pub fn random<R: Rng>(couplings: &DenseCouplings, rng: &mut R) -> Self {
        let spins = (0..couplings.n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        Self::new(couplings, SpinConfiguration::new(spins).expect("±1 spins"))
            .expect("length matches")
    }

    pub fn spins(&self) -> &SpinConfiguration {
        &self.spins
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn magnetization(&self) -> f64 {
        self.spins.as_slice().iter().map(|&s| s as f64).sum::<f64>() / self.spins.len() as f64
    }

    /// Largest deviation of the tracked fields from a fresh recomputation.
    pub fn field_drift(&self, couplings: &DenseCouplings) -> f64 {
        couplings
            .fields(self.spins.as_slice())
            .iter()
            .zip(&self.fields)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Recomputes fields and energy from the spins.
    pub fn resync(&mut self, couplings: &DenseCouplings) {
        self.fields = couplings.fields(self.spins.as_slice());
        let pair_sum: f64 = self
            .spins
            .as_slice()
            .iter()
            .zip(&self.fields)
            .map(|(&s, h)| s as f64 * h)
            .sum::<f64>()
            / 2.0;
        self.energy = -pair_sum + couplings.offset;
    }

    fn flip(&mut self, i: usize, delta: f64, couplings: &DenseCouplings) {
        self.spins.flip(i);
        let change = 2.0 * self.spins.as_slice()[i] as f64;
        for (h, k) in self.fields.iter_mut().zip(couplings.row(i)) {
            *h += k * change;
        }
        self.energy += delta;
    }
}

/// One proposal per spin in a fresh random order; returns the number of
/// accepted flips.
pub fn metropolis_sweep<R: Rng>(
    state: &mut ChainState,
    couplings: &DenseCouplings,
    beta: f64,
    rng: &mut R,
) -> usize {
    let mut order = std::mem::take(&mut state.order);
    order.shuffle(rng);
    let mut accepted = 0;
    for &i in &order {
        let delta = 2.0 * state.spins.as_slice()[i] as f64 * state.fields[i];
        if delta <= 0.0 || rng.random::<f64>() < (-beta * delta).exp() {
            state.flip(i, delta, couplings);
            accepted += 1;
        }
    }
    state.order = order;
    accepted
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RungEstimate {
    #[serde(rename = "T")]
    pub t: f64,
    pub mean_abs_m: Estimate,
    pub mean_m2: Estimate,
    pub q_overlap: Estimate,
    pub abs_q_overlap: Estimate,
    pub theta_hat: Estimate,
    /// Accepted fraction of exchanges involving this rung; absent for a
    /// single-temperature run.
    pub swap_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCEstimates {
    pub n: usize,
    pub lambda: f64,
    pub rungs: Vec<RungEstimate>,
    pub block_size: usize,
    pub max_field_drift: f64,
}

struct Replica {
    state: ChainState,
    rng: ChaCha8Rng,
}

struct Rung {
    beta: f64,
    replicas: Vec<Replica>,
    abs_m: BlockAccumulator,
    m2: BlockAccumulator,
    q: BlockAccumulator,
    abs_q: BlockAccumulator,
    drift: f64,
    swaps_tried: u64,
    swaps_accepted: u64,
}

impl Rung {
    fn advance(&mut self, couplings: &DenseCouplings, from: usize, to: usize, burn_in: usize) {
        for sweep in from + 1..=to {
            for rep in &mut self.replicas {
                metropolis_sweep(&mut rep.state, couplings, self.beta, &mut rep.rng);
                if sweep % DRIFT_CHECK_INTERVAL == 0 {
                    self.drift = self.drift.max(rep.state.field_drift(couplings));
                    rep.state.resync(couplings);
                }
            }
            if sweep > burn_in {
                self.measure();
            }
        }
    }

    fn measure(&mut self) {
        let (a, b) = (&self.replicas[0].state, &self.replicas[1].state);
        let (ma, mb) = (a.magnetization(), b.magnetization());
        let n = a.spins.len() as f64;
        let q = a
            .spins
            .as_slice()
            .iter()
            .zip(b.spins.as_slice())
            .map(|(&x, &y)| (x * y) as f64)
            .sum::<f64>()
            / n;
        self.abs_m.push(0.5 * (ma.abs() + mb.abs()));
        self.m2.push(0.5 * (ma * ma + mb * mb));
        self.q.push(q);
        self.abs_q.push(q.abs());
    }
}

pub fn run_parallel_tempering(model: &EffectiveModel, config: &MCConfig) -> Result<MCEstimates> {
    config.validate()?;
    let couplings = DenseCouplings::new(model);
    let n = couplings.n();
    let measurements = config.measurements();
    let mut rungs: Vec<Rung> = config
        .ladder
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let replicas = (0..REPLICAS_PER_T)
                .map(|r| {
                    let mut rng = stream_rng(config.seed, 1 + (k * REPLICAS_PER_T + r) as u64);
                    let state = ChainState::random(&couplings, &mut rng);
                    Replica { state, rng }
                })
                .collect();
            let acc = || BlockAccumulator::new(measurements, config.block_count);
            Ok(Rung {
                beta: 1.0 / t,
                replicas,
                abs_m: acc()?,
                m2: acc()?,
                q: acc()?,
                abs_q: acc()?,
                drift: 0.0,
                swaps_tried: 0,
                swaps_accepted: 0,
            })
        })
        .collect::<Result<_>>()?;

    let mut swap_rng = stream_rng(config.seed, SWAP_STREAM);
    let interval = if rungs.len() > 1 {
        config.exchange_interval
    } else {
        config.sweeps
    };
    let mut done = 0;
    while done < config.sweeps {
        let next = (done + interval).min(config.sweeps);
        rungs
            .par_iter_mut()
            .for_each(|r| r.advance(&couplings, done, next, config.burn_in));
        done = next;
        if rungs.len() > 1 && done % config.exchange_interval == 0 {
            exchange(&mut rungs, &mut swap_rng);
        }
    }

    let rung_estimates = config
        .ladder
        .iter()
        .zip(&rungs)
        .map(|(&t, r)| {
            let m2 = r.m2.estimate();
            RungEstimate {
                t,
                mean_abs_m: r.abs_m.estimate(),
                mean_m2: m2,
                q_overlap: r.q.estimate(),
                abs_q_overlap: r.abs_q.estimate(),
                theta_hat: m2.affine(bose_occupancy(r.beta) / n as f64, model.lambda * model.lambda),
                swap_rate: (r.swaps_tried > 0).then(|| r.swaps_accepted as f64 / r.swaps_tried as f64),
            }
        })
        .collect();
    Ok(MCEstimates {
        n,
        lambda: model.lambda,
        rungs: rung_estimates,
        block_size: rungs[0].abs_m.block_size(),
        max_field_drift: rungs.iter().map(|r| r.drift).fold(0.0, f64::max),
    })
}

fn exchange(rungs: &mut [Rung], rng: &mut ChaCha8Rng) {
    for k in 0..rungs.len() - 1 {
        let (lo, hi) = rungs.split_at_mut(k + 1);
        let (a, b) = (&mut lo[k], &mut hi[0]);
        for r in 0..REPLICAS_PER_T {
            let (ea, eb) = (a.replicas[r].state.energy, b.replicas[r].state.energy);
            let log_p = (a.beta - b.beta) * (ea - eb);
            a.swaps_tried += 1;
            b.swaps_tried += 1;
            if log_p >= 0.0 || rng.random::<f64>() < log_p.exp() {
                std::mem::swap(&mut a.replicas[r].state, &mut b.replicas[r].state);
                a.swaps_accepted += 1;
                b.swaps_accepted += 1;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizationSeeds {
    pub disorder: u64,
    pub mc: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderAverage {
    /// Disorder means; errors from the spread between realizations.
    pub average: MCEstimates,
    pub seeds: Vec<RealizationSeeds>,
    /// `N` times the mean pair coupling of each realization; its
    /// expectation is exactly `J0`, which makes it a control variate.
    pub realized_j0: Vec<f64>,
    pub realizations: Vec<MCEstimates>,
}

pub fn realization_seeds(master: u64, index: usize) -> RealizationSeeds {
    RealizationSeeds {
        disorder: derive_seed(master, 2 * index as u64),
        mc: derive_seed(master, 2 * index as u64 + 1),
    }
}

/// Runs [`run_parallel_tempering`] on `realizations` independent couplings
/// drawn from `params` (its temperature is unused; the ladder sets it) and
/// averages rung by rung. `config.seed` is the master seed.
pub fn disorder_average(
    params: &ModelParams,
    realizations: usize,
    config: &MCConfig,
) -> Result<DisorderAverage> {
    params.validate()?;
    config.validate()?;
    if realizations == 0 {
        return Err(invalid("realizations", "must be >= 1"));
    }
    let seeds: Vec<RealizationSeeds> =
        (0..realizations).map(|r| realization_seeds(config.seed, r)).collect();
    let (realized_j0, runs): (Vec<f64>, Vec<MCEstimates>) = seeds
        .par_iter()
        .map(|s| {
            let disorder = sample_disorder(params.n, params.j0, params.j, s.disorder)?;
            let model = build_effective(&disorder, params.lambda)?;
            let est = run_parallel_tempering(&model, &MCConfig { seed: s.mc, ..config.clone() })?;
            Ok((realized_mean(&disorder), est))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();

    let combine = |pick: &dyn Fn(&RungEstimate) -> Estimate, k: usize| {
        if runs.len() == 1 {
            pick(&runs[0].rungs[k])
        } else {
            sample_estimate(&runs.iter().map(|r| pick(&r.rungs[k]).mean).collect::<Vec<_>>())
        }
    };
    let rungs = (0..config.ladder.len())
        .map(|k| RungEstimate {
            t: config.ladder[k],
            mean_abs_m: combine(&|r| r.mean_abs_m, k),
            mean_m2: combine(&|r| r.mean_m2, k),
            q_overlap: combine(&|r| r.q_overlap, k),
            abs_q_overlap: combine(&|r| r.abs_q_overlap, k),
            theta_hat: combine(&|r| r.theta_hat, k),
            swap_rate: runs[0].rungs[k].swap_rate.map(|_| {
                runs.iter().map(|r| r.rungs[k].swap_rate.unwrap_or(0.0)).sum::<f64>()
                    / runs.len() as f64
            }),
        })
        .collect();
    let average = MCEstimates {
        n: params.n,
        lambda: params.lambda,
        rungs,
        block_size: runs[0].block_size,
        max_field_drift: runs.iter().map(|r| r.max_field_drift).fold(0.0, f64::max),
    };
    Ok(DisorderAverage {
        average,
        seeds,
        realized_j0,
        realizations: runs,
    })
}

/// `N` times the mean pair coupling, or `J0` itself when there are no pairs.
pub fn realized_mean(disorder: &DisorderRealization) -> f64 {
    let pairs = disorder.couplings.values();
    if pairs.is_empty() {
        return disorder.j0;
    }
    disorder.n() as f64 * pairs.iter().sum::<f64>() / pairs.len() as f64
}

pub fn write_csv<W: Write>(mut out: W, rungs: &[RungEstimate]) -> io::Result<()> {
    writeln!(
        out,
        "T,mean_abs_m,stderr,mean_m2,stderr,q_overlap,stderr,abs_q_overlap,stderr,theta_hat,stderr,swap_rate"
    )?;
    for r in rungs {
        let mut row = vec![real(r.t)];
        for e in [r.mean_abs_m, r.mean_m2, r.q_overlap, r.abs_q_overlap, r.theta_hat] {
            row.push(real(e.mean));
            row.push(real(e.stderr));
        }
        row.push(r.swap_rate.map(real).unwrap_or_default());
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::effective_energy;
    use crate::oracle::enumerate_classical;
    use crate::seeding::stream_rng;

    fn model(n: usize, lambda: f64, j0: f64, j: f64, seed: u64) -> EffectiveModel {
        build_effective(&sample_disorder(n, j0, j, seed).unwrap(), lambda).unwrap()
    }

    fn config(ladder: Vec<f64>, sweeps: usize, seed: u64) -> MCConfig {
        MCConfig {
            sweeps,
            burn_in: sweeps / 10,
            ladder,
            exchange_interval: 10,
            seed,
            block_count: 32,
        }
    }

    #[test]
    fn infinite_temperature_accepts_everything() {
        let m = model(32, 0.5, 0.3, 1.0, 1);
        let c = DenseCouplings::new(&m);
        let mut rng = stream_rng(1, 1);
        let mut s = ChainState::random(&c, &mut rng);
        for _ in 0..10 {
            assert_eq!(metropolis_sweep(&mut s, &c, 0.0, &mut rng), 32);
        }
    }

    #[test]
    fn greedy_limit_never_raises_energy() {
        let m = model(48, 0.5, 0.3, 1.0, 2);
        let c = DenseCouplings::new(&m);
        let mut rng = stream_rng(2, 1);
        let mut s = ChainState::random(&c, &mut rng);
        for _ in 0..50 {
            let before = s.energy();
            metropolis_sweep(&mut s, &c, 1e6, &mut rng);
            assert!(s.energy() <= before + 1e-12);
            let exact = effective_energy(&m, s.spins()).unwrap();
            assert!((s.energy() - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn sweeps_are_reproducible() {
        let m = model(20, 0.5, 0.3, 1.0, 3);
        let c = DenseCouplings::new(&m);
        let run = || {
            let mut rng = stream_rng(9, 4);
            let mut s = ChainState::random(&c, &mut rng);
            (0..200)
                .map(|_| {
                    metropolis_sweep(&mut s, &c, 0.8, &mut rng);
                    s.spins().clone()
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn tracked_fields_do_not_drift() {
        let m = model(64, 0.7, 0.2, 1.0, 4);
        let c = DenseCouplings::new(&m);
        let mut rng = stream_rng(4, 1);
        let mut s = ChainState::random(&c, &mut rng);
        for sweep in 1..=5000 {
            metropolis_sweep(&mut s, &c, 0.7, &mut rng);
            if sweep % DRIFT_CHECK_INTERVAL == 0 {
                assert!(s.field_drift(&c) < 1e-9);
                let exact = effective_energy(&m, s.spins()).unwrap();
                assert!((s.energy() - exact).abs() < 1e-9);
            }
        }
        let est = run_parallel_tempering(&m, &config(vec![0.7, 1.4], 5000, 4)).unwrap();
        assert!(est.max_field_drift < 1e-9, "{}", est.max_field_drift);
    }

    #[test]
    fn detailed_balance_at_three_spins() {
        let m = model(3, 0.4, 0.5, 1.0, 11);
        let c = DenseCouplings::new(&m);
        let beta = 0.9;
        let weights: Vec<f64> = (0..8u64)
            .map(|b| {
                let s = SpinConfiguration::from_bits(3, b);
                (-beta * effective_energy(&m, &s).unwrap()).exp()
            })
            .collect();
        let z: f64 = weights.iter().sum();
        let mut rng = stream_rng(11, 1);
        let mut s = ChainState::random(&c, &mut rng);
        let sweeps = 10_000_000usize;
        let mut counts = [0u64; 8];
        for _ in 0..sweeps {
            metropolis_sweep(&mut s, &c, beta, &mut rng);
            let idx = s
                .spins()
                .as_slice()
                .iter()
                .enumerate()
                .fold(0usize, |acc, (i, &x)| acc | (((x > 0) as usize) << i));
            counts[idx] += 1;
        }
        for (b, &count) in counts.iter().enumerate() {
            let p = weights[b] / z;
            let sigma = (p * (1.0 - p) / sweeps as f64).sqrt();
            let freq = count as f64 / sweeps as f64;
            assert!((freq - p).abs() < 4.0 * sigma, "state {b}: {freq} vs {p} (σ = {sigma})");
        }
    }

    #[test]
    fn small_system_matches_enumeration() {
        let m = model(8, 0.5, 0.3, 1.0, 5);
        let exact = enumerate_classical(&m, 1.0).unwrap();
        let est = run_parallel_tempering(&m, &config(vec![1.0], 200_000, 5)).unwrap();
        let r = &est.rungs[0];
        assert!((r.mean_abs_m.mean - exact.mean_abs_m).abs() < 3.0 * r.mean_abs_m.stderr);
        assert!((r.mean_m2.mean - exact.mean_s2).abs() < 3.0 * r.mean_m2.stderr);
        assert!(r.swap_rate.is_none());
    }

    #[test]
    fn paramagnetic_overlap_vanishes() {
        let m = model(64, 0.0, 1.0, 1.0, 6);
        let est = run_parallel_tempering(&m, &config(vec![3.0], 40_000, 6)).unwrap();
        let q = est.rungs[0].q_overlap;
        assert!(q.mean.abs() < 3.0 * q.stderr, "{q:?}");
    }

    #[test]
    fn swap_rates_are_proper_fractions() {
        let m = model(64, 0.5, 0.3, 1.0, 7);
        let ladder = geometric_ladder(0.5, 3.0, 8).unwrap();
        let est = run_parallel_tempering(&m, &config(ladder, 4000, 7)).unwrap();
        for r in &est.rungs {
            let rate = r.swap_rate.unwrap();
            assert!(rate > 0.0 && rate < 1.0, "{rate}");
        }
    }

    #[test]
    fn theta_hat_follows_the_photon_identity() {
        let m = model(8, 0.6, 0.3, 1.0, 8);
        let est = run_parallel_tempering(&m, &config(vec![0.8, 1.6], 20_000, 8)).unwrap();
        for r in &est.rungs {
            let expected = bose_occupancy(1.0 / r.t) / 8.0 + 0.36 * r.mean_m2.mean;
            assert!((r.theta_hat.mean - expected).abs() < 1e-15);
            assert!((r.theta_hat.stderr - 0.36 * r.mean_m2.stderr).abs() < 1e-15);
        }
    }

    #[test]
    fn config_validation() {
        let good = config(vec![0.5, 1.0], 1000, 1);
        assert!(good.validate().is_ok());
        let bad = |f: &dyn Fn(&mut MCConfig)| {
            let mut c = good.clone();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(&|c| c.burn_in = 1000));
        assert!(bad(&|c| c.ladder = vec![1.0, 0.5]));
        assert!(bad(&|c| c.ladder = vec![]));
        assert!(bad(&|c| c.block_count = 7));
        assert!(bad(&|c| c.exchange_interval = 0));
        assert!(bad(&|c| {
            c.sweeps = 20;
            c.burn_in = 15;
        }));
        let ladder = geometric_ladder(0.5, 3.0, 8).unwrap();
        assert_eq!((ladder[0], ladder[7]), (0.5, 3.0));
        let r = ladder[1] / ladder[0];
        assert!(ladder.windows(2).all(|w| (w[1] / w[0] - r).abs() < 1e-12));
    }

    fn params(n: usize, j: f64) -> ModelParams {
        ModelParams::new(n, 0.5, 0.3, j, 1.0).unwrap()
    }

    #[test]
    fn without_disorder_realizations_differ_only_by_noise() {
        let avg = disorder_average(&params(16, 0.0), 5, &config(vec![1.5], 20_000, 12)).unwrap();
        let first = sample_disorder(16, 0.3, 0.0, avg.seeds[0].disorder).unwrap();
        let second = sample_disorder(16, 0.3, 0.0, avg.seeds[1].disorder).unwrap();
        assert_eq!(first.couplings, second.couplings);
        assert!(avg.realized_j0.iter().all(|&x| (x - 0.3).abs() < 1e-15));
        let mc_noise = avg.realizations.iter().map(|r| r.rungs[0].mean_m2.stderr).sum::<f64>() / 5.0;
        let spread = avg.average.rungs[0].mean_m2.stderr * 5f64.sqrt();
        let ratio = spread / mc_noise;
        assert!(ratio > 0.25 && ratio < 4.0, "{ratio}");
    }

    #[test]
    fn disorder_error_shrinks_as_root_r() {
        let c = config(vec![1.0], 4000, 13);
        let small = disorder_average(&params(16, 1.0), 8, &c).unwrap();
        let large = disorder_average(&params(16, 1.0), 32, &c).unwrap();
        let ratio = small.average.rungs[0].mean_m2.stderr / large.average.rungs[0].mean_m2.stderr;
        assert!((ratio / 2.0 - 1.0).abs() < 0.5, "{ratio}");
    }

    #[test]
    fn output_is_independent_of_worker_count() {
        let c = MCConfig {
            ladder: geometric_ladder(0.6, 2.0, 4).unwrap(),
            ..config(vec![], 3000, 14)
        };
        let csv = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            let avg = pool.install(|| disorder_average(&params(24, 1.0), 3, &c)).unwrap();
            let mut out = Vec::new();
            write_csv(&mut out, &avg.average.rungs).unwrap();
            out
        };
        assert_eq!(csv(1), csv(4));
    }
}
