//! Replica-symmetric saddle point of the photon-eliminated spin glass.
//!
//! Integrating out the couplings with replicas and taking all replica
//! overlaps equal (`q_uv = q`) and all replica magnetizations equal
//! (`m_u = m`), the `n → 0` limit of the saddle-point conditions becomes
//!
//! ```text
//! m = ∫Dz tanh β(J̃₀ m + J √q z)
//! q = ∫Dz tanh² β(J̃₀ m + J √q z)
//! ```
//!
//! with free energy per spin
//!
//! ```text
//! f = −(βJ²/4)(1 − q)² + (J̃₀/2) m² − (1/β) ∫Dz log 2cosh β(J̃₀ m + J √q z).
//! ```
//!
//! The source term used to extract the photon number from the free energy
//! is a derivation device only; at the saddle it leaves `θ = λ² m²`, the
//! constant being pinned by the exact small-N identity `θ − n_B/N = λ²⟨s̄²⟩`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quadrature::{GaussianMeasure, PanelRule};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RSParams {
    pub t: f64,
    pub jtilde0: f64,
    pub j: f64,
    /// Only used to report θ.
    pub lambda: f64,
}

impl RSParams {
    pub fn new(t: f64, jtilde0: f64, j: f64, lambda: f64) -> Result<Self> {
        let p = Self {
            t,
            jtilde0,
            j,
            lambda,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t > 0.0) || !self.t.is_finite() {
            return Err(invalid("t", format!("must be finite and > 0, got {}", self.t)));
        }
        if !self.jtilde0.is_finite() {
            return Err(invalid("jtilde0", "must be finite"));
        }
        if !(self.j >= 0.0) || !self.j.is_finite() {
            return Err(invalid("j", format!("must be finite and >= 0, got {}", self.j)));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(invalid("lambda", format!("must be finite and >= 0, got {}", self.lambda)));
        }
        Ok(())
    }

    pub fn beta(&self) -> f64 {
        1.0 / self.t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "ferro-start")]
    FerroStart,
    #[serde(rename = "zero-m-branch")]
    ZeroM,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::FerroStart => "ferro-start",
            Branch::ZeroM => "zero-m-branch",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RSSolution {
    pub m: f64,
    pub q: f64,
    pub free_energy: f64,
    pub theta: f64,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    pub branch: Branch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    /// Gauss–Legendre points per panel of the Gaussian integration rule.
    pub order: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100_000,
            damping: 0.5,
            order: 20,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(invalid("tol", "must be > 0"));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter", "must be >= 1"));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(invalid("damping", format!("must lie in (0, 1], got {}", self.damping)));
        }
        if self.order < 2 {
            return Err(invalid("order", "must be >= 2"));
        }
        Ok(())
    }
}

pub const SNAP_M: f64 = 1e-8;
pub const FERRO_START: (f64, f64) = (0.999, 0.999);
pub const ZERO_M_START: (f64, f64) = (0.0, 0.999);

/// Arguments `(a, b)` of `x = a + b z = β(J̃₀ m + J√q z)`.
fn field_arguments(m: f64, q: f64, p: &RSParams) -> (f64, f64) {
    let beta = p.beta();
    (beta * p.jtilde0 * m, beta * p.j * q.max(0.0).sqrt())
}

/// One application of the saddle-point map, `(m, q) ↦ (m', q')`.
///
/// A zero mean field makes the `m'` integrand odd, so `m' = 0` is returned
/// exactly; a zero spread collapses the average to a point evaluation.
pub fn rs_map<G: GaussianMeasure>(m: f64, q: f64, params: &RSParams, rule: &G) -> (f64, f64) {
    let (a, b) = field_arguments(m, q, params);
    let mut mt = 0.0;
    let mut qt = 0.0;
    rule.for_each_node(a, b, 1.0, |x, w| {
        let t = x.tanh();
        mt += w * t;
        qt += w * t * t;
    });
    if a == 0.0 {
        mt = 0.0;
    }
    (mt, qt.clamp(0.0, 1.0))
}

/// The map together with its Jacobian `[[∂m'/∂m, ∂m'/∂q], [∂q'/∂m, ∂q'/∂q]]`.
///
/// q-derivatives are taken through Gaussian integration by parts so that no
/// `1/√q` appears.
fn rs_map_jacobian<G: GaussianMeasure>(
    m: f64,
    q: f64,
    params: &RSParams,
    rule: &G,
) -> ((f64, f64), [[f64; 2]; 2]) {
    let beta = params.beta();
    let (a, b) = field_arguments(m, q, params);
    let (mut mt, mut qt, mut e_s, mut e_ts, mut e_q) = (0.0, 0.0, 0.0, 0.0, 0.0);
    rule.for_each_node(a, b, 1.0, |x, w| {
        let t = x.tanh();
        let s = 1.0 - t * t;
        mt += w * t;
        qt += w * t * t;
        e_s += w * s;
        e_ts += w * t * s;
        e_q += w * s * (1.0 - 3.0 * t * t);
    });
    if a == 0.0 {
        mt = 0.0;
        e_ts = 0.0;
    }
    let bj = beta * params.j;
    let jac = [
        [beta * params.jtilde0 * e_s, -bj * bj * e_ts],
        [2.0 * beta * params.jtilde0 * e_ts, bj * bj * e_q],
    ];
    ((mt, qt), jac)
}

/// `log 2cosh x` without overflow.
fn log_2cosh(x: f64) -> f64 {
    let ax = x.abs();
    ax + (-2.0 * ax).exp().ln_1p()
}

/// Replica-symmetric free energy per spin at `(m, q)`.
pub fn rs_free_energy<G: GaussianMeasure>(m: f64, q: f64, params: &RSParams, rule: &G) -> f64 {
    let beta = params.beta();
    let (a, b) = field_arguments(m, q, params);
    let avg = rule.expect_affine(a, b, 1.0, log_2cosh);
    let j2 = params.j * params.j;
    -(beta * j2 / 4.0) * (1.0 - q).powi(2) + 0.5 * params.jtilde0 * m * m - avg / beta
}

/// Finite-difference gradient `(∂f/∂m, ∂f/∂q)` of the free energy. Central
/// differences, with a one-sided second-order stencil at the `q = 0` edge.
pub fn free_energy_gradient<G: GaussianMeasure>(m: f64, q: f64, params: &RSParams, rule: &G) -> (f64, f64) {
    let h = 1e-5;
    let f = |m, q| rs_free_energy(m, q, params, rule);
    let dm = (f(m + h, q) - f(m - h, q)) / (2.0 * h);
    let dq = if q > h {
        (f(m, q + h) - f(m, q - h)) / (2.0 * h)
    } else {
        (-3.0 * f(m, q) + 4.0 * f(m, q + h) - f(m, q + 2.0 * h)) / (2.0 * h)
    };
    (dm, dq)
}

/// Photon occupation per qubit at the saddle, θ = λ² m².
pub fn photon_order(m: f64, lambda: f64) -> f64 {
    lambda * lambda * m * m
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchRun {
    pub m: f64,
    pub q: f64,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
}

/// Consecutive slow iterations (update ratio above `SLOW_RATIO`) before the
/// iteration hands over to Newton.
const SLOW_STREAK: usize = 50;
const SLOW_RATIO: f64 = 0.9;
const NEWTON_STEPS: usize = 200;
/// A final polish may move a converged iterate at most this far; anything
/// larger means Newton wandered to a different root.
const POLISH_RADIUS: f64 = 1e-6;

fn clamp_state(m: f64, q: f64) -> (f64, f64) {
    (m.clamp(-1.0, 1.0), q.clamp(0.0, 1.0))
}

/// Damped fixed-point iteration from `start`.
///
/// Near a continuous transition the map's Jacobian approaches the identity
/// and the damped iteration slows to algebraic convergence; once the update
/// ratio has stayed above `SLOW_RATIO` for `SLOW_STREAK` steps the current
/// iterate is polished with Newton's method on `map(x) − x`.
pub fn iterate_branch<G: GaussianMeasure>(
    start: (f64, f64),
    params: &RSParams,
    opts: &SolveOptions,
    rule: &G,
) -> BranchRun {
    let eta = opts.damping;
    let (mut m, mut q) = clamp_state(start.0, start.1);
    let mut prev_step = f64::INFINITY;
    let mut slow = 0usize;
    let mut newton_blocked_until = 0usize;
    let mut step = f64::INFINITY;
    let mut it = 0usize;
    while it < opts.max_iter {
        it += 1;
        let (mp, qp) = rs_map(m, q, params, rule);
        let (nm, nq) = clamp_state((1.0 - eta) * m + eta * mp, (1.0 - eta) * q + eta * qp);
        step = (nm - m).abs().max((nq - q).abs());
        m = nm;
        q = nq;
        if step < opts.tol {
            // A linearly converging iteration stops up to tol/(1 − rate) from
            // the root; one Newton pass removes that lag.
            let mut run = BranchRun {
                m,
                q,
                converged: true,
                iterations: it,
                residual: step,
            };
            if let Some((x, steps, res)) = newton_polish((m, q), params, opts, rule) {
                if (x.0 - m).abs().max((x.1 - q).abs()) < POLISH_RADIUS {
                    run = BranchRun {
                        m: x.0,
                        q: x.1,
                        iterations: it + steps,
                        residual: res,
                        ..run
                    };
                }
            }
            return run;
        }
        if step > SLOW_RATIO * prev_step {
            slow += 1;
        } else {
            slow = 0;
        }
        prev_step = step;
        if slow >= SLOW_STREAK && it >= newton_blocked_until {
            match newton_polish((m, q), params, opts, rule) {
                Some((x, steps, res)) => {
                    return BranchRun {
                        m: x.0,
                        q: x.1,
                        converged: true,
                        iterations: it + steps,
                        residual: res,
                    };
                }
                None => {
                    newton_blocked_until = it + 1000;
                    slow = 0;
                }
            }
        }
    }
    BranchRun {
        m,
        q,
        converged: false,
        iterations: it,
        residual: step,
    }
}

fn newton_polish<G: GaussianMeasure>(
    start: (f64, f64),
    params: &RSParams,
    opts: &SolveOptions,
    rule: &G,
) -> Option<((f64, f64), usize, f64)> {
    let (mut m, mut q) = start;
    let pinned_m = m == 0.0;
    for k in 1..=NEWTON_STEPS {
        let ((mp, qp), jac) = rs_map_jacobian(m, q, params, rule);
        let fm = mp - m;
        let fq = qp - q;
        let a11 = jac[0][0] - 1.0;
        let a12 = jac[0][1];
        let a21 = jac[1][0];
        let a22 = jac[1][1] - 1.0;
        let (dm, dq) = if pinned_m {
            if a22 == 0.0 {
                return None;
            }
            (0.0, -fq / a22)
        } else {
            let det = a11 * a22 - a12 * a21;
            if det == 0.0 || !det.is_finite() {
                return None;
            }
            ((-fm * a22 + fq * a12) / det, (-a11 * fq + a21 * fm) / det)
        };
        let (nm, nq) = clamp_state(m + dm, q + dq);
        let step = (nm - m).abs().max((nq - q).abs());
        m = nm;
        q = nq;
        if !step.is_finite() {
            return None;
        }
        if step < opts.tol {
            let (mp, qp) = rs_map(m, q, params, rule);
            let residual = (mp - m).abs().max((qp - q).abs());
            return (residual < opts.tol).then_some(((m, q), k, step));
        }
    }
    None
}

/// Solves the saddle-point equations from the two standard starts and keeps
/// the converged branch with the lower free energy.
pub fn solve_rs(params: &RSParams, opts: &SolveOptions) -> Result<RSSolution> {
    solve_rs_from(params, opts, FERRO_START, ZERO_M_START)
}

/// As [`solve_rs`] with caller-chosen starting points for the two branches.
/// The zero-m start must have `m = 0`, which the iteration then preserves.
pub fn solve_rs_from(
    params: &RSParams,
    opts: &SolveOptions,
    ferro_start: (f64, f64),
    zero_m_start: (f64, f64),
) -> Result<RSSolution> {
    solve_rs_branches(params, opts, ferro_start, zero_m_start).map(|(s, _)| s)
}

/// Like [`solve_rs_from`], also returning the raw run of each branch
/// (ferro-start first) so callers can continue both along a parameter path.
pub fn solve_rs_branches(
    params: &RSParams,
    opts: &SolveOptions,
    ferro_start: (f64, f64),
    zero_m_start: (f64, f64),
) -> Result<(RSSolution, [BranchRun; 2])> {
    params.validate()?;
    opts.validate()?;
    if zero_m_start.0 != 0.0 {
        return Err(invalid("zero_m_start", "the zero-m branch must start at m = 0"));
    }
    let rule = PanelRule::new(opts.order)?;
    let ferro = iterate_branch(ferro_start, params, opts, &rule);
    let zero = iterate_branch(zero_m_start, params, opts, &rule);
    let runs = [(Branch::FerroStart, ferro), (Branch::ZeroM, zero)];
    Ok((select_branch(&runs, params, &rule), [ferro, zero]))
}

pub(crate) fn select_branch<G: GaussianMeasure>(
    runs: &[(Branch, BranchRun)],
    params: &RSParams,
    rule: &G,
) -> RSSolution {
    let finish = |branch: Branch, run: &BranchRun| {
        let mut m = run.m.abs();
        if m < SNAP_M {
            m = 0.0;
        }
        RSSolution {
            m,
            q: run.q,
            free_energy: rs_free_energy(m, run.q, params, rule),
            theta: photon_order(m, params.lambda),
            converged: run.converged,
            iterations: run.iterations,
            residual: run.residual,
            branch,
        }
    };
    let candidates: Vec<RSSolution> = runs.iter().map(|(b, r)| finish(*b, r)).collect();
    let converged: Vec<&RSSolution> = candidates.iter().filter(|s| s.converged).collect();
    let pick = if converged.is_empty() {
        candidates
            .iter()
            .min_by(|a, b| a.residual.total_cmp(&b.residual))
            .expect("two branches")
    } else {
        // Equal free energies (the branches met at the same solution) go to
        // the later, zero-m, candidate.
        converged
            .iter()
            .copied()
            .reduce(|best, s| if s.free_energy <= best.free_energy { s } else { best })
            .expect("non-empty")
    };
    *pick
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_hermite;

    fn rule() -> PanelRule {
        PanelRule::new(20).unwrap()
    }

    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        assert!(f(lo) * f(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn map_fixed_points_and_degenerate_cases() {
        let p = RSParams::new(0.7, 1.3, 0.8, 0.0).unwrap();
        assert_eq!(rs_map(0.0, 0.0, &p, &rule()), (0.0, 0.0));

        let cw = RSParams::new(0.7, 1.3, 0.0, 0.0).unwrap();
        for (m, q) in [(0.3, 0.2), (-0.6, 0.9), (0.9, 0.0)] {
            let (mp, qp) = rs_map(m, q, &cw, &rule());
            assert!((mp - (1.3 * m / 0.7f64).tanh()).abs() < 1e-15);
            assert!((qp - mp * mp).abs() < 1e-16);
        }
    }

    #[test]
    fn map_matches_frozen_integral() {
        let p = RSParams::new(0.5, 0.0, 1.0, 0.0).unwrap();
        let (mp, qp) = rs_map(0.0, 0.5, &p, &rule());
        assert_eq!(mp, 0.0);
        assert!((qp - 0.519_975_745_663_948_6).abs() < 1e-14);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let r = rule();
        for &(t, jt, j, m, q) in &[(0.5, 1.2, 1.0, 0.4, 0.6), (1.3, 0.7, 0.9, -0.2, 0.3), (0.2, 1.5, 0.5, 0.9, 0.85)] {
            let p = RSParams::new(t, jt, j, 0.0).unwrap();
            let (_, jac) = rs_map_jacobian(m, q, &p, &r);
            let h = 1e-6;
            let (mp1, qp1) = rs_map(m + h, q, &p, &r);
            let (mm1, qm1) = rs_map(m - h, q, &p, &r);
            let (mp2, qp2) = rs_map(m, q + h, &p, &r);
            let (mm2, qm2) = rs_map(m, q - h, &p, &r);
            let fd = [
                [(mp1 - mm1) / (2.0 * h), (mp2 - mm2) / (2.0 * h)],
                [(qp1 - qm1) / (2.0 * h), (qp2 - qm2) / (2.0 * h)],
            ];
            for i in 0..2 {
                for k in 0..2 {
                    assert!((jac[i][k] - fd[i][k]).abs() < 1e-6, "entry {i}{k}: {} vs {}", jac[i][k], fd[i][k]);
                }
            }
        }
    }

    #[test]
    fn curie_weiss_limit() {
        let root = bisect(|m| m - (2.0 * m).tanh(), 0.5, 1.0);
        assert!((root - 0.957_504_024_077_268_7).abs() < 1e-12);
        let sol = solve_rs(&RSParams::new(0.5, 1.0, 0.0, 0.0).unwrap(), &SolveOptions::default()).unwrap();
        assert!(sol.converged);
        assert!((sol.m - root).abs() < 1e-9);
        assert!((sol.q - root * root).abs() < 1e-9);
        assert_eq!(sol.theta, 0.0);
        assert_eq!(sol.branch, Branch::FerroStart);
        // f = (J̃₀/2) m² − T log 2cosh(βJ̃₀m)
        let f = 0.5 * root * root - 0.5 * (2.0 * (2.0 * root).cosh()).ln();
        assert!((sol.free_energy - f).abs() < 1e-12);

        let lit = solve_rs(&RSParams::new(0.5, 1.0, 0.0, 1.0).unwrap(), &SolveOptions::default()).unwrap();
        assert!((lit.theta - 0.916_813_956_124_162_8).abs() < 1e-8);
    }

    #[test]
    fn paramagnet_above_both_instabilities() {
        let sol = solve_rs(&RSParams::new(2.0, 1.0, 1.0, 0.3).unwrap(), &SolveOptions::default()).unwrap();
        assert!(sol.converged);
        assert_eq!(sol.m, 0.0);
        assert!(sol.q < 1e-9);
        assert_eq!(sol.theta, 0.0);
        let f = -0.25 * 0.5 - 2.0 * 2f64.ln();
        assert!((sol.free_energy - f).abs() < 1e-9);
    }

    #[test]
    fn spin_glass_branch() {
        let sol = solve_rs(&RSParams::new(0.5, 0.0, 1.0, 0.0).unwrap(), &SolveOptions::default()).unwrap();
        assert!(sol.converged);
        assert_eq!(sol.m, 0.0);
        // q = ∫Dz tanh²(2√q z), solved with mpmath.
        assert!((sol.q - 0.530_368_392_050_794_6).abs() < 1e-9, "q = {}", sol.q);
        assert!((sol.free_energy - -0.792_392_945_134_697_9).abs() < 1e-9);
    }

    #[test]
    fn free_energy_limits() {
        let r = rule();
        let hot = RSParams::new(1e4, 1.0, 1.0, 0.0).unwrap();
        let f = rs_free_energy(0.0, 0.0, &hot, &r);
        assert!((f / (-1e4 * 2f64.ln()) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn stationarity_at_converged_solutions() {
        let r = rule();
        for &(t, jt, j) in &[(0.5, 1.5, 1.0), (0.3, 0.4, 1.0), (1.2, 2.0, 1.0), (0.05, 1.8, 1.0), (0.8, 0.0, 1.0)] {
            let p = RSParams::new(t, jt, j, 0.0).unwrap();
            let s = solve_rs(&p, &SolveOptions::default()).unwrap();
            assert!(s.converged);
            let (dm, dq) = free_energy_gradient(s.m, s.q, &p, &r);
            assert!(dm.abs() < 1e-6 && dq.abs() < 1e-6, "T={t} J0={jt}: {dm} {dq}");
        }
    }

    #[test]
    fn ferro_branch_wins_on_free_energy() {
        let p = RSParams::new(0.5, 1.5, 1.0, 0.0).unwrap();
        let r = rule();
        let opts = SolveOptions::default();
        let ferro = iterate_branch(FERRO_START, &p, &opts, &r);
        let zero = iterate_branch(ZERO_M_START, &p, &opts, &r);
        assert!(ferro.converged && zero.converged);
        assert!(ferro.m > 0.5 && zero.m == 0.0);
        let ff = rs_free_energy(ferro.m, ferro.q, &p, &r);
        let fz = rs_free_energy(zero.m, zero.q, &p, &r);
        assert!(ff < fz);
        assert_eq!(solve_rs(&p, &opts).unwrap().branch, Branch::FerroStart);
    }

    #[test]
    fn critical_points_converge() {
        // T = J at J̃₀ = 0 and T = J̃₀ > J: the damped map converges only
        // algebraically here.
        let opts = SolveOptions::default();
        for p in [RSParams::new(1.0, 0.0, 1.0, 0.0).unwrap(), RSParams::new(2.0, 2.0, 1.0, 0.0).unwrap(), RSParams::new(1.0, 1.0, 1.0, 0.0).unwrap()] {
            let s = solve_rs(&p, &opts).unwrap();
            assert!(s.converged, "{p:?}");
            assert_eq!(s.m, 0.0);
            assert!(s.q < 1e-6);
        }
    }

    #[test]
    fn solutions_are_fixed_points() {
        let r = rule();
        for &(t, jt, j) in &[(0.5, 1.5, 1.0), (0.9, 0.95, 1.0), (0.1, 1.0, 1.0), (1.5, 1.6, 1.0)] {
            let p = RSParams::new(t, jt, j, 0.0).unwrap();
            let s = solve_rs(&p, &SolveOptions::default()).unwrap();
            let (mp, qp) = rs_map(s.m, s.q, &p, &r);
            assert!((mp - s.m).abs().max((qp - s.q).abs()) < 1e-9);
            assert!(s.q >= s.m * s.m - 1e-9);
        }
    }

    #[test]
    fn reports_non_convergence() {
        let opts = SolveOptions {
            max_iter: 3,
            ..SolveOptions::default()
        };
        let s = solve_rs(&RSParams::new(0.5, 1.2, 1.0, 0.0).unwrap(), &opts).unwrap();
        assert!(!s.converged);
        assert!(s.residual > 0.0);
        assert!(solve_rs(&RSParams { t: 0.0, jtilde0: 1.0, j: 1.0, lambda: 0.0 }, &opts).is_err());
    }

    #[test]
    fn hermite_rule_agrees_at_high_temperature() {
        let p = RSParams::new(3.0, 4.0, 1.0, 0.0).unwrap();
        let gh = gauss_hermite(80).unwrap();
        let (a, b) = rs_map(0.6, 0.4, &p, &gh);
        let (c, d) = rs_map(0.6, 0.4, &p, &rule());
        assert!((a - c).abs() < 1e-12 && (b - d).abs() < 1e-12);
    }

    #[test]
    fn photon_order_cases() {
        assert_eq!(photon_order(0.0, 2.0), 0.0);
        assert_eq!(photon_order(0.7, 0.0), 0.0);
        assert!((photon_order(0.9575, 1.0) - 0.9168).abs() < 1e-4);
    }
}
