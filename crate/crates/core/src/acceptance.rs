//! End-to-end validation suite. Each criterion runs a complete workflow and
//! compares it with an independent reference: exact enumeration, closed-form
//! critical lines, or a bisection root written out here.
//!
//! `quick` shrinks every criterion to something that finishes in seconds;
//! enumeration runs stay at N ≤ 8 and the Monte Carlo ladders get shorter.

use std::fmt;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::mc::{disorder_average, run_parallel_tempering, MCConfig};
use crate::model::{build_effective, sample_disorder, DisorderRealization, EffectiveModel, ModelParams};
use crate::oracle::{enumerate_classical, mapping_residual};
use crate::phase::{
    locate_boundary, scan_matter, scan_optical, Axis, BoundarySearch, FixedParams, GridSpec,
    PhaseLabel, PhaseMap, ScanAxis,
};
use crate::rs::{free_energy_gradient, solve_rs, RSParams, SolveOptions};
use crate::quadrature::PanelRule;
use crate::seeding::derive_seed;
use crate::stats::{control_variate_estimate, Estimate};

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    pub time_limit: f64,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] criterion {}: {} ({:.1}s / {:.0}s) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.time_limit,
            self.detail
        )
    }
}

/// Runs `body`, which returns `(passed, detail)`, and folds the time limit
/// and any error into the report.
fn timed(
    id: u8,
    name: &'static str,
    time_limit: Duration,
    body: impl FnOnce() -> Result<(bool, String)>,
) -> CriterionReport {
    let start = Instant::now();
    let outcome = body();
    let elapsed = start.elapsed();
    let (mut passed, mut detail) = match outcome {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    if elapsed > time_limit {
        passed = false;
        detail.push_str("; over the time limit");
    }
    CriterionReport {
        id,
        name,
        passed,
        detail,
        seconds: elapsed.as_secs_f64(),
        time_limit: time_limit.as_secs_f64(),
    }
}

pub fn run_all(quick: bool) -> Vec<CriterionReport> {
    vec![
        photon_elimination(quick),
        curie_weiss_limit(),
        critical_lines(),
        matter_topology(quick),
        optical_boundary(quick),
        monte_carlo_vs_enumeration(quick),
        theta_finite_size(quick),
        solver_robustness(quick),
    ]
}

pub fn run_one(id: u8, quick: bool) -> Option<CriterionReport> {
    Some(match id {
        1 => photon_elimination(quick),
        2 => curie_weiss_limit(),
        3 => critical_lines(),
        4 => matter_topology(quick),
        5 => optical_boundary(quick),
        6 => monte_carlo_vs_enumeration(quick),
        7 => theta_finite_size(quick),
        8 => solver_robustness(quick),
        _ => return None,
    })
}

const MAPPING_TOL: f64 = 1e-10;

pub fn photon_elimination(quick: bool) -> CriterionReport {
    photon_elimination_with(quick, build_effective)
}

/// The mapping check with a caller-supplied photon elimination, so a
/// deliberately wrong one can be shown to fail.
pub fn photon_elimination_with<B>(quick: bool, builder: B) -> CriterionReport
where
    B: Fn(&DisorderRealization, f64) -> Result<EffectiveModel> + Sync,
{
    let (max_n, seeds) = if quick { (8, 10) } else { (12, 100) };
    timed(1, "photon-elimination identity", Duration::from_secs(120), || {
        let cases: Vec<(usize, u64)> =
            (1..=max_n).flat_map(|n| (0..seeds).map(move |s| (n, s))).collect();
        let worst = cases
            .par_iter()
            .map(|&(n, s)| -> Result<(f64, String)> {
                let disorder = sample_disorder(n, 0.3, 1.0, derive_seed(0xD1CE, s))?;
                let mut worst = (0.0f64, String::new());
                for lambda in [0.0, 0.3, 1.0, 2.0] {
                    let model = builder(&disorder, lambda)?;
                    for beta in [0.1, 1.0, 5.0] {
                        let r = mapping_residual(&disorder, &model, lambda, beta)?;
                        if !(r <= worst.0) {
                            worst = (r, format!("N={n} seed#{s} λ={lambda} β={beta}"));
                        }
                    }
                }
                Ok(worst)
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold((0.0f64, String::new()), |a, b| if !(b.0 <= a.0) { b } else { a });
        Ok((
            worst.0 < MAPPING_TOL,
            format!(
                "{} realizations × 12 (λ, β); max |Zq(1−e^−β)/(βZcl) − 1| = {:.3e} at {}",
                cases.len(),
                worst.0,
                worst.1
            ),
        ))
    })
}

/// Root of `m = tanh(β J̃₀ m)` on (0, 1] by bisection.
fn curie_weiss_root(beta_j: f64) -> f64 {
    let g = |m: f64| (beta_j * m).tanh() - m;
    let (mut lo, mut hi) = (1e-3, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn curie_weiss_limit() -> CriterionReport {
    timed(2, "Curie–Weiss limit", Duration::from_secs(1), || {
        let sol = solve_rs(&RSParams::new(0.5, 1.0, 0.0, 1.0)?, &SolveOptions::default())?;
        let root = curie_weiss_root(2.0);
        let dm = (sol.m - root).abs();
        let dtheta = (sol.theta - sol.m * sol.m).abs();
        Ok((
            sol.converged && dm < 1e-4 && dtheta < 1e-4,
            format!(
                "m = {:.10} vs root {:.10} (Δ {dm:.1e}); θ − m² = {dtheta:.1e}",
                sol.m, root
            ),
        ))
    })
}

pub fn critical_lines() -> CriterionReport {
    timed(3, "critical lines", Duration::from_secs(10), || {
        let ferro = BoundarySearch::new(
            ScanAxis::Temperature,
            FixedParams {
                t: 1.0,
                j0: 2.0,
                j: 1.0,
                lambda: 0.0,
            },
            PhaseLabel::Ferromagnetic,
            (0.5, 3.0),
        );
        let glass = BoundarySearch::new(
            ScanAxis::Temperature,
            FixedParams {
                t: 1.0,
                j0: 0.0,
                j: 1.0,
                lambda: 0.0,
            },
            PhaseLabel::SpinGlass,
            (0.5, 1.5),
        );
        let tf = locate_boundary(&ferro)?;
        let tg = locate_boundary(&glass)?;
        Ok((
            (tf - 2.0).abs() < 1e-3 && (tg - 1.0).abs() < 1e-3,
            format!("T_c(J̃₀=2) = {tf:.6}, T_c(J̃₀=0) = {tg:.6}"),
        ))
    })
}

pub fn matter_grid(quick: bool) -> Result<GridSpec> {
    let (nj, nt) = if quick { (21, 20) } else { (41, 40) };
    Ok(GridSpec::matter(
        Axis::linspace("jtilde0/J", 0.0, 2.0, nj)?,
        Axis::linspace("T/J", 0.05, 2.0, nt)?,
        1.0,
    ))
}

/// Exactly three labels, each one connected region, and a cell holding all
/// three within one grid cell of (1, 1).
pub fn topology_check(map: &PhaseMap) -> (bool, String) {
    let regions = map.regions();
    let expected = [
        PhaseLabel::Paramagnetic,
        PhaseLabel::Ferromagnetic,
        PhaseLabel::SpinGlass,
    ];
    let three = regions.len() == 3
        && regions.iter().all(|(l, count)| expected.contains(l) && *count == 1);
    let (dx, dy) = map.cell_size();
    let triples = map.triple_cells();
    let near = triples
        .iter()
        .copied()
        .filter(|(x, y)| (x - 1.0).abs() <= dx && (y - 1.0).abs() <= dy)
        .collect::<Vec<_>>();
    let regions_text = regions
        .iter()
        .map(|(l, c)| format!("{l}×{c}"))
        .collect::<Vec<_>>()
        .join(", ");
    (
        three && !near.is_empty(),
        format!("regions [{regions_text}]; triple cells near (1,1): {near:?}"),
    )
}

pub fn matter_topology(quick: bool) -> CriterionReport {
    timed(4, "matter phase-diagram topology", Duration::from_secs(120), || {
        let grid = matter_grid(quick)?;
        let map = PhaseMap::new(&grid, scan_matter(&grid)?)?;
        let (ok, detail) = topology_check(&map);
        Ok((ok, format!("{}×{} grid: {detail}", grid.axis1.len(), grid.axis2.len())))
    })
}

pub fn optical_boundary(quick: bool) -> CriterionReport {
    timed(5, "optical boundary and shift equivalence", Duration::from_secs(30), || {
        let fixed = FixedParams {
            t: 1.5,
            j0: 0.0,
            j: 1.0,
            lambda: 0.0,
        };
        let search = BoundarySearch::new(ScanAxis::Lambda, fixed, PhaseLabel::Ferromagnetic, (0.0, 2.0));
        let lambda_star = locate_boundary(&search)?;
        let exact = 0.75f64.sqrt();

        let (nl, nt) = if quick { (6, 8) } else { (16, 20) };
        let j0 = 0.0;
        let lambdas = Axis::linspace("lambda", 0.0, 1.5, nl)?;
        let temps = Axis::linspace("T", 0.1, 2.0, nt)?;
        let shifted: Vec<f64> = lambdas.values().iter().map(|l| j0 + 2.0 * l * l).collect();
        let optical = scan_optical(&GridSpec::optical(lambdas, temps.clone(), j0, 1.0))?;
        let matter = scan_matter(&GridSpec::matter(Axis::explicit("jtilde0/J", shifted)?, temps, 1.0))?;
        let mismatches = optical
            .iter()
            .zip(&matter)
            .filter(|(a, b)| {
                a.axis2 != b.axis2 || a.m.to_bits() != b.m.to_bits() || a.q.to_bits() != b.q.to_bits() || a.label != b.label
            })
            .count();
        Ok((
            (lambda_star - exact).abs() < 1e-4 && mismatches == 0,
            format!(
                "λ* = {lambda_star:.6} vs √0.75 = {exact:.6}; {} shared nodes, {mismatches} differ",
                optical.len()
            ),
        ))
    })
}

pub fn monte_carlo_vs_enumeration(quick: bool) -> CriterionReport {
    let (trials, sweeps) = if quick { (10, 20_000) } else { (50, 40_000) };
    timed(6, "Monte Carlo vs exact enumeration", Duration::from_secs(300), || {
        let outcomes = (0..trials as u64)
            .into_par_iter()
            .map(|s| -> Result<bool> {
                let seed = derive_seed(0x6C0DE, s);
                let disorder = sample_disorder(8, 0.3, 1.0, seed)?;
                let model = build_effective(&disorder, 0.5)?;
                let exact = enumerate_classical(&model, 1.0)?;
                let config = MCConfig {
                    sweeps,
                    burn_in: sweeps / 10,
                    ladder: vec![1.0, 1.5, 2.25],
                    exchange_interval: 10,
                    seed: derive_seed(seed, 1),
                    block_count: 32,
                };
                let r = run_parallel_tempering(&model, &config)?.rungs[0];
                let within = |e: Estimate, x: f64| (e.mean - x).abs() < 3.0 * e.stderr;
                Ok(within(r.mean_abs_m, exact.mean_abs_m) && within(r.mean_m2, exact.mean_s2))
            })
            .collect::<Result<Vec<bool>>>()?;
        let hits = outcomes.iter().filter(|&&ok| ok).count();
        Ok((
            hits as f64 >= 0.95 * trials as f64,
            format!("{hits}/{trials} realizations within 3σ on both ⟨|m|⟩ and ⟨m²⟩"),
        ))
    })
}

/// One size of the θ finite-size study.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ThetaGap {
    pub n: usize,
    pub realizations: usize,
    /// Disorder-averaged `theta_hat − λ² m²_RS`.
    pub gap: Estimate,
}

/// Disorder-averaged gap between the Monte Carlo photon number and the RS
/// prediction at `T = 0.5`, `J0 = 0`, `J = 0.2`, `λ = √0.5` (so `J̃₀ = 1`).
/// The realized mean coupling, whose expectation is `J0`, is used as a
/// control variate: it carries most of the sample-to-sample scatter.
pub fn theta_gap(n: usize, realizations: usize, sweeps: usize, seed: u64) -> Result<ThetaGap> {
    let (t, j0, j, lambda) = (0.5, 0.0, 0.2, 0.5f64.sqrt());
    let rs = solve_rs(&RSParams::new(t, j0 + 2.0 * lambda * lambda, j, lambda)?, &SolveOptions::default())?;
    let config = MCConfig {
        sweeps,
        burn_in: sweeps / 4,
        ladder: vec![t],
        exchange_interval: 10,
        seed,
        block_count: 16,
    };
    let avg = disorder_average(&ModelParams::new(n, lambda, j0, j, t)?, realizations, &config)?;
    let theta: Vec<f64> = avg.realizations.iter().map(|r| r.rungs[0].theta_hat.mean).collect();
    let est = control_variate_estimate(&theta, &avg.realized_j0, j0)?;
    Ok(ThetaGap {
        n,
        realizations,
        gap: est.affine(-rs.theta, 1.0),
    })
}

/// `|gap|` must fall at every step, each drop exceeding three combined
/// standard errors.
pub fn gaps_decrease(gaps: &[ThetaGap]) -> bool {
    gaps.windows(2).all(|w| {
        let (a, b) = (w[0].gap, w[1].gap);
        let sigma = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
        a.mean.abs() - b.mean.abs() > 3.0 * sigma
    })
}

pub fn theta_finite_size(quick: bool) -> CriterionReport {
    let plan: &[(usize, usize, usize)] = if quick {
        &[(16, 1000, 400), (64, 400, 400), (256, 200, 400)]
    } else {
        &[(64, 1000, 600), (256, 2000, 400), (1024, 600, 400)]
    };
    timed(7, "θ finite-size consistency", Duration::from_secs(900), || {
        let gaps = plan
            .iter()
            .map(|&(n, r, sweeps)| theta_gap(n, r, sweeps, derive_seed(0x7E7A, n as u64)))
            .collect::<Result<Vec<_>>>()?;
        let text = gaps
            .iter()
            .map(|g| format!("N={}: {:+.2e} ± {:.1e}", g.n, g.gap.mean, g.gap.stderr))
            .collect::<Vec<_>>()
            .join(", ");
        Ok((gaps_decrease(&gaps), format!("θ̂ − λ²m²_RS: {text}")))
    })
}

pub fn solver_robustness(quick: bool) -> CriterionReport {
    timed(8, "quadrature and solver robustness", Duration::from_secs(600), || {
        let grid = matter_grid(quick)?;
        let mut doubled = grid.clone();
        doubled.solve.order *= 2;
        let base = scan_matter(&grid)?;
        let fine = scan_matter(&doubled)?;
        let rule = PanelRule::new(grid.solve.order)?;
        let mut shift: f64 = 0.0;
        let mut gradient: f64 = 0.0;
        let mut converged = 0;
        for (a, b) in base.iter().zip(&fine) {
            if !(a.converged && b.converged) {
                continue;
            }
            converged += 1;
            shift = shift.max((a.m - b.m).abs()).max((a.q - b.q).abs());
            let params = RSParams::new(a.axis2 * grid.j, a.axis1 * grid.j, grid.j, grid.lambda)?;
            let (gm, gq) = free_energy_gradient(a.m, a.q, &params, &rule);
            gradient = gradient.max(gm.abs()).max(gq.abs());
        }
        Ok((
            converged == base.len() && shift < 1e-10 && gradient < 1e-6,
            format!(
                "{converged}/{} nodes converged; max |Δ(m,q)| on doubling order = {shift:.2e}; max |∇f| = {gradient:.2e}",
                base.len()
            ),
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::shifted_mean;

    #[test]
    fn tampered_photon_elimination_is_caught() {
        // λ²/N instead of 2λ²/N on every pair.
        let halved = |d: &DisorderRealization, lambda: f64| -> Result<EffectiveModel> {
            let mut m = build_effective(d, lambda)?;
            let n = d.n() as f64;
            let k = crate::model::PairMatrix::from_fn(d.n(), |i, j| d.couplings.get(i, j) + lambda * lambda / n);
            m.k = k;
            m.jtilde0 = shifted_mean(d.j0, lambda) - lambda * lambda;
            Ok(m)
        };
        let report = photon_elimination_with(true, halved);
        assert!(!report.passed, "{report}");
        assert!(photon_elimination(true).passed);
    }

    #[test]
    fn curie_weiss_root_is_a_fixed_point() {
        let m = curie_weiss_root(2.0);
        assert!(((2.0 * m).tanh() - m).abs() < 1e-15);
        assert!((m - 0.9575040240772687).abs() < 1e-15);
    }

    #[test]
    fn gap_ordering_needs_three_sigma_drops() {
        let gap = |n, mean, stderr| ThetaGap {
            n,
            realizations: 10,
            gap: Estimate { mean, stderr },
        };
        assert!(gaps_decrease(&[gap(1, -1e-3, 1e-4), gap(2, 2e-4, 1e-5), gap(3, 0.0, 1e-5)]));
        assert!(!gaps_decrease(&[gap(1, -1e-3, 1e-4), gap(2, 7e-4, 1e-4)]));
        assert!(!gaps_decrease(&[gap(1, 1e-4, 1e-5), gap(2, 2e-4, 1e-5)]));
    }
}
