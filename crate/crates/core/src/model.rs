//! Model parameters, quenched disorder and the photon-eliminated classical model.
//!
//! With the qubit gap set to zero every term of the Hamiltonian commutes with
//! all σˣ_j, so the cavity mode can be integrated out exactly. What remains is
//! a classical Ising model on the σˣ eigenvalues with couplings
//! `K_ij = J_ij + 2λ²/N` and a constant energy shift `-λ²`.

use std::fmt::Write as _;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fmt::real;
use crate::seeding::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    /// Qubit-cavity coupling λ in units of the photon energy.
    pub lambda: f64,
    /// Mean coupling scale J₀ (the mean of each J_ij is J₀/N).
    pub j0: f64,
    /// Coupling spread J (the variance of each J_ij is J²/N).
    pub j: f64,
    pub t: f64,
    /// Qubit gap ε. Carried for bookkeeping only; every computation assumes ε = 0.
    pub epsilon: f64,
}

impl ModelParams {
    pub fn new(n: usize, lambda: f64, j0: f64, j: f64, t: f64) -> Result<Self> {
        let p = Self {
            n,
            lambda,
            j0,
            j,
            t,
            epsilon: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(invalid("n", "must be at least 1"));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(invalid("lambda", format!("must be finite and >= 0, got {}", self.lambda)));
        }
        if !self.j0.is_finite() {
            return Err(invalid("j0", "must be finite"));
        }
        if !(self.j >= 0.0) || !self.j.is_finite() {
            return Err(invalid("j", format!("must be finite and >= 0, got {}", self.j)));
        }
        if !(self.t > 0.0) || !self.t.is_finite() {
            return Err(invalid("t", format!("must be finite and > 0, got {}", self.t)));
        }
        if self.epsilon != 0.0 {
            return Err(invalid("epsilon", "only the zero-gap model is implemented"));
        }
        Ok(())
    }

    pub fn beta(&self) -> f64 {
        1.0 / self.t
    }

    /// Mean coupling after photon elimination, J̃₀ = J₀ + 2λ².
    pub fn jtilde0(&self) -> f64 {
        shifted_mean(self.j0, self.lambda)
    }
}

/// J̃₀ = J₀ + 2λ².
pub fn shifted_mean(j0: f64, lambda: f64) -> f64 {
    j0 + 2.0 * lambda * lambda
}

/// Symmetric pair array with zero diagonal, stored strictly upper-triangular.
#[derive(Debug, Clone, PartialEq)]
pub struct PairMatrix {
    n: usize,
    data: Vec<f64>,
}

impl PairMatrix {
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64 + Sync) -> Self {
        let data: Vec<f64> = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let f = &f;
                (i + 1..n).map(move |j| f(i, j))
            })
            .collect();
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    /// Symmetric access; the diagonal reads as zero.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.data[self.offset(i, j)],
            std::cmp::Ordering::Greater => self.data[self.offset(j, i)],
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    /// Iterates `(i, j, value)` over `i < j` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n;
        (0..n)
            .flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
            .zip(self.data.iter().copied())
            .map(|((i, j), v)| (i, j, v))
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    /// Full row-major `n × n` symmetric copy, for kernels that want contiguous rows.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut dense = vec![0.0; n * n];
        for (i, j, v) in self.iter() {
            dense[i * n + j] = v;
            dense[j * n + i] = v;
        }
        dense
    }
}

/// One quenched draw of the couplings J_ij.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderRealization {
    pub couplings: PairMatrix,
    pub seed: u64,
    pub j0: f64,
    pub j: f64,
}

impl DisorderRealization {
    pub fn n(&self) -> usize {
        self.couplings.n()
    }

    /// Text form: `N=`, `J0=`, `J=`, `seed=` header lines followed by one
    /// `i j J_ij` line per pair (1-based indices, 17 significant digits).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "N={}", self.n());
        let _ = writeln!(out, "J0={}", real(self.j0));
        let _ = writeln!(out, "J={}", real(self.j));
        let _ = writeln!(out, "seed={}", self.seed);
        for (i, j, v) in self.couplings.iter() {
            let _ = writeln!(out, "{} {} {}", i + 1, j + 1, real(v));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());

        let mut header = |key: &str| -> Result<String> {
            let (line, l) = lines.next().ok_or(Error::Parse {
                line: 0,
                msg: format!("missing `{key}=` header"),
            })?;
            match l.split_once('=') {
                Some((k, v)) if k.trim() == key => Ok(v.trim().to_string()),
                _ => Err(Error::Parse {
                    line,
                    msg: format!("expected `{key}=<value>`, found `{l}`"),
                }),
            }
        };
        let parse_err = |key: &str, v: &str| Error::Parse {
            line: 0,
            msg: format!("bad value `{v}` for `{key}`"),
        };
        let n_s = header("N")?;
        let j0_s = header("J0")?;
        let j_s = header("J")?;
        let seed_s = header("seed")?;
        let n: usize = n_s.parse().map_err(|_| parse_err("N", &n_s))?;
        let j0: f64 = j0_s.parse().map_err(|_| parse_err("J0", &j0_s))?;
        let j: f64 = j_s.parse().map_err(|_| parse_err("J", &j_s))?;
        let seed: u64 = seed_s.parse().map_err(|_| parse_err("seed", &seed_s))?;
        if n < 1 {
            return Err(invalid("n", "must be at least 1"));
        }

        let npairs = n * (n - 1) / 2;
        let mut values = vec![f64::NAN; npairs];
        let mut seen = vec![false; npairs];
        let index = |i: usize, j: usize| i * (2 * n - i - 1) / 2 + (j - i - 1);
        for (line, l) in lines {
            let mut it = l.split_whitespace();
            let (Some(a), Some(b), Some(v), None) = (it.next(), it.next(), it.next(), it.next())
            else {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected `i j J_ij`, found `{l}`"),
                });
            };
            let bad = |msg: String| Error::Parse { line, msg };
            let i: usize = a.parse().map_err(|_| bad(format!("bad index `{a}`")))?;
            let jj: usize = b.parse().map_err(|_| bad(format!("bad index `{b}`")))?;
            let v: f64 = v.parse().map_err(|_| bad(format!("bad coupling `{v}`")))?;
            if !(1 <= i && i < jj && jj <= n) {
                return Err(bad(format!("pair ({i}, {jj}) outside 1 <= i < j <= {n}")));
            }
            let k = index(i - 1, jj - 1);
            if seen[k] {
                return Err(bad(format!("duplicate pair ({i}, {jj})")));
            }
            seen[k] = true;
            values[k] = v;
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(Error::Parse {
                line: 0,
                msg: format!("missing coupling entry #{k} of {npairs}"),
            });
        }
        Ok(Self {
            couplings: PairMatrix { n, data: values },
            seed,
            j0,
            j,
        })
    }
}

/// Draws J_ij ~ Normal(J₀/N, J²/N) independently for every pair `i < j`.
///
/// Row `i` reads its own random stream keyed by `(seed, i)` and consumes it
/// in order of increasing `j`, so a pair's value depends only on
/// `(seed, i, j)`: not on `n`, generation order or thread count.
pub fn sample_disorder(n: usize, j0: f64, j: f64, seed: u64) -> Result<DisorderRealization> {
    if n < 1 {
        return Err(invalid("n", "must be at least 1"));
    }
    if !(j >= 0.0) || !j.is_finite() {
        return Err(invalid("j", format!("must be finite and >= 0, got {j}")));
    }
    if !j0.is_finite() {
        return Err(invalid("j0", "must be finite"));
    }
    let nf = n as f64;
    let mean = j0 / nf;
    let sd = j / nf.sqrt();
    let data = (0..n)
        .into_par_iter()
        .flat_map_iter(|a| {
            let mut rng = stream_rng(seed, a as u64);
            (a + 1..n).map(move |_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                mean + sd * z
            })
        })
        .collect();
    let couplings = PairMatrix { n, data };
    Ok(DisorderRealization {
        couplings,
        seed,
        j0,
        j,
    })
}

/// Classical Ising model left after integrating out the photon.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveModel {
    pub k: PairMatrix,
    /// Constant energy term, −λ².
    pub offset: f64,
    pub jtilde0: f64,
    pub lambda: f64,
}

impl EffectiveModel {
    pub fn n(&self) -> usize {
        self.k.n()
    }

    /// Uniform coupling shift 2λ²/N carried by every pair.
    pub fn coupling_shift(&self) -> f64 {
        2.0 * self.lambda * self.lambda / self.n() as f64
    }
}

pub fn build_effective(disorder: &DisorderRealization, lambda: f64) -> Result<EffectiveModel> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(invalid("lambda", format!("must be finite and >= 0, got {lambda}")));
    }
    let n = disorder.n();
    let shift = 2.0 * lambda * lambda / n as f64;
    let k = PairMatrix {
        n,
        data: disorder.couplings.values().iter().map(|v| v + shift).collect(),
    };
    Ok(EffectiveModel {
        k,
        offset: -lambda * lambda,
        jtilde0: shifted_mean(disorder.j0, lambda),
        lambda,
    })
}

/// σˣ eigenvalues, one ±1 entry per qubit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfiguration(Vec<i8>);

impl SpinConfiguration {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if spins.is_empty() {
            return Err(invalid("spins", "configuration must be non-empty"));
        }
        if let Some(p) = spins.iter().position(|&s| s != 1 && s != -1) {
            return Err(invalid("spins", format!("entry {p} is {}, expected ±1", spins[p])));
        }
        Ok(Self(spins))
    }

    pub fn all_up(n: usize) -> Self {
        Self(vec![1; n])
    }

    /// Configuration whose spin `i` is −1 when bit `i` of `bits` is set.
    pub fn from_bits(n: usize, bits: u64) -> Self {
        Self((0..n).map(|i| if bits >> i & 1 == 1 { -1 } else { 1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = -self.0[i];
    }

    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }
}

/// E(s) = −Σ_{i<j} K_ij s_i s_j − λ².
pub fn effective_energy(model: &EffectiveModel, spins: &SpinConfiguration) -> Result<f64> {
    if spins.len() != model.n() {
        return Err(Error::LengthMismatch {
            expected: model.n(),
            got: spins.len(),
        });
    }
    let s = spins.as_slice();
    let pair: f64 = model
        .k
        .iter()
        .map(|(i, j, k)| k * f64::from(s[i] * s[j]))
        .sum();
    Ok(-pair + model.offset)
}

/// (1/N) Σ s_i.
pub fn magnetization(spins: &SpinConfiguration) -> f64 {
    let total: i64 = spins.as_slice().iter().map(|&s| i64::from(s)).sum();
    total as f64 / spins.len() as f64
}
