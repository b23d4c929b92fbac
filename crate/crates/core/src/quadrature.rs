//! Expectations over the standard Gaussian measure ∫Dz f(z), with
//! Dz = e^{−z²/2}/√(2π) dz.
//!
//! [`QuadratureRule`] is classical Gauss–Hermite. It converges spectrally
//! for integrands that are analytic in a wide strip around the real axis, but
//! the saddle-point integrands here are `tanh(βh)` and `log 2cosh(βh)` with
//! `h` affine in `z`: at low temperature they have poles (or a kink) within
//! `~T` of the real axis and Gauss–Hermite stalls at percent-level error.
//! [`PanelRule`] handles that case with composite Gauss–Legendre panels that
//! are graded geometrically towards the kink.

use std::f64::consts::PI;

use crate::error::{invalid, Result};

/// Integration scheme for `E_z[f(a + b z)]`, where `f` may change sharply
/// within `width` of argument zero.
pub trait GaussianMeasure {
    /// Calls `visit(a + b z_k, w_k)` for every node of a rule adapted to the
    /// affine map `z ↦ a + b z`.
    fn for_each_node<F: FnMut(f64, f64)>(&self, a: f64, b: f64, width: f64, visit: F);

    fn expect_affine<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, width: f64, mut f: F) -> f64 {
        let mut acc = 0.0;
        self.for_each_node(a, b, width, |x, w| acc += w * f(x));
        acc
    }
}

/// Gauss–Hermite rule rescaled to the unit-variance Gaussian measure.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub order: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX: usize = 100;

/// Physicists' Gauss–Hermite nodes by Newton iteration on the orthonormal
/// three-term recurrence, mapped to `z = √2 x` with weights `w/√π`.
pub fn gauss_hermite(order: usize) -> Result<QuadratureRule> {
    if order < 2 {
        return Err(invalid("order", format!("Gauss-Hermite order must be >= 2, got {order}")));
    }
    let n = order;
    let nf = n as f64;
    let pim4 = PI.powf(-0.25);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = n.div_ceil(2);
    let mut z = 0.0;
    for i in 0..half {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..NEWTON_MAX {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= NEWTON_TOL * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    // Ascending order; odd orders carry the exact zero node.
    x.reverse();
    w.reverse();
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    let sqrt_pi = PI.sqrt();
    Ok(QuadratureRule {
        order,
        nodes: x.iter().map(|v| v * std::f64::consts::SQRT_2).collect(),
        weights: w.iter().map(|v| v / sqrt_pi).collect(),
    })
}

impl QuadratureRule {
    pub fn expect<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| w * f(z))
            .sum()
    }
}

impl GaussianMeasure for QuadratureRule {
    fn for_each_node<F: FnMut(f64, f64)>(&self, a: f64, b: f64, _width: f64, mut visit: F) {
        if b == 0.0 {
            visit(a, 1.0);
            return;
        }
        for (&z, &w) in self.nodes.iter().zip(&self.weights) {
            visit(a + b * z, w);
        }
    }
}

/// Gauss–Legendre nodes and weights on [−1, 1], ascending.
pub fn gauss_legendre(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if order < 1 {
        return Err(invalid("order", "Gauss-Legendre order must be >= 1"));
    }
    let n = order;
    let nf = n as f64;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp = 1.0;
        for _ in 0..NEWTON_MAX {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= NEWTON_TOL {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    Ok((x, w))
}

/// Composite Gauss–Legendre rule for the Gaussian measure on `[−Z, Z]`,
/// with extra breakpoints at the integrand's kink and at geometrically
/// growing distances from it.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelRule {
    pub order: usize,
    unit_nodes: Vec<f64>,
    unit_weights: Vec<f64>,
}

/// Half-width of the integration range in z. The measure outside carries
/// mass below 1e-21.
const Z_MAX: f64 = 9.5;
/// Spacing of the background panels.
const BASE_STEP: f64 = 1.0;

impl PanelRule {
    /// `order` Gauss–Legendre points per panel.
    pub fn new(order: usize) -> Result<Self> {
        if order < 2 {
            return Err(invalid("order", format!("panel order must be >= 2, got {order}")));
        }
        let (unit_nodes, unit_weights) = gauss_legendre(order)?;
        Ok(Self {
            order,
            unit_nodes,
            unit_weights,
        })
    }

    fn breakpoints(&self, kink: Option<(f64, f64)>) -> Vec<f64> {
        let steps = (2.0 * Z_MAX / BASE_STEP).round() as usize;
        let mut pts: Vec<f64> = (0..=steps)
            .map(|k| -Z_MAX + 2.0 * Z_MAX * k as f64 / steps as f64)
            .collect();
        if let Some((z0, width)) = kink {
            if z0 > -Z_MAX - BASE_STEP && z0 < Z_MAX + BASE_STEP && width < BASE_STEP {
                pts.push(z0);
                let mut d = width;
                while d < BASE_STEP {
                    pts.push(z0 - d);
                    pts.push(z0 + d);
                    d *= 2.0;
                }
            }
        }
        pts.retain(|p| (-Z_MAX..=Z_MAX).contains(p));
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        pts
    }
}

impl GaussianMeasure for PanelRule {
    fn for_each_node<F: FnMut(f64, f64)>(&self, a: f64, b: f64, width: f64, mut visit: F) {
        if b == 0.0 {
            visit(a, 1.0);
            return;
        }
        let kink = (width > 0.0).then(|| (-a / b, width / b.abs()));
        let norm = 1.0 / (2.0 * PI).sqrt();
        let pts = self.breakpoints(kink);
        for win in pts.windows(2) {
            let center = 0.5 * (win[0] + win[1]);
            let half = 0.5 * (win[1] - win[0]);
            for (&u, &wu) in self.unit_nodes.iter().zip(&self.unit_weights) {
                let z = center + half * u;
                let w = half * wu * norm * (-0.5 * z * z).exp();
                visit(a + b * z, w);
            }
        }
    }
}
