//! Phase diagrams from the replica-symmetric solver.
//!
//! Two planes are scanned: the matter plane `(J̃₀/J, T/J)` and the optical
//! plane `(λ, T)` at fixed `J0, J`, where the cavity enters only through
//! `J̃₀ = J0 + 2λ²`. Each grid column (fixed first axis) is solved from the
//! hottest node downwards, seeding both branches from the node above.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fmt::real;
use crate::rs::{
    solve_rs, solve_rs_branches, BranchRun, RSParams, RSSolution, SolveOptions, FERRO_START,
    ZERO_M_START,
};

pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-6;
pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-4;

/// Warm starts never begin closer to the trivial fixed point than this, so
/// a branch that was absent at the previous temperature can still appear.
const WARM_FLOOR: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PhaseLabel {
    Paramagnetic,
    Ferromagnetic,
    SpinGlass,
    /// The solver did not converge at this node.
    Unclassified,
}

impl PhaseLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseLabel::Paramagnetic => "PARAMAGNETIC",
            PhaseLabel::Ferromagnetic => "FERROMAGNETIC",
            PhaseLabel::SpinGlass => "SPIN_GLASS",
            PhaseLabel::Unclassified => "UNCLASSIFIED",
        }
    }

    /// The cavity is superradiant exactly when the spins order ferromagnetically.
    pub fn is_superradiant(self) -> bool {
        self == PhaseLabel::Ferromagnetic
    }

    pub fn optical(self) -> Option<OpticalLabel> {
        match self {
            PhaseLabel::Unclassified => None,
            PhaseLabel::Ferromagnetic => Some(OpticalLabel::Superradiant),
            _ => Some(OpticalLabel::Subradiant),
        }
    }
}

impl fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PhaseLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "PARAMAGNETIC" => Ok(PhaseLabel::Paramagnetic),
            "FERROMAGNETIC" => Ok(PhaseLabel::Ferromagnetic),
            "SPIN_GLASS" => Ok(PhaseLabel::SpinGlass),
            "UNCLASSIFIED" => Ok(PhaseLabel::Unclassified),
            other => Err(invalid("label", format!("unknown phase label `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OpticalLabel {
    Subradiant,
    Superradiant,
}

impl OpticalLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            OpticalLabel::Subradiant => "SUBRADIANT",
            OpticalLabel::Superradiant => "SUPERRADIANT",
        }
    }
}

pub fn classify(solution: &RSSolution, tol: f64) -> PhaseLabel {
    if !solution.converged {
        PhaseLabel::Unclassified
    } else if solution.m.abs() > tol {
        PhaseLabel::Ferromagnetic
    } else if solution.q > tol {
        PhaseLabel::SpinGlass
    } else {
        PhaseLabel::Paramagnetic
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub axis1: f64,
    pub axis2: f64,
    pub m: f64,
    pub q: f64,
    pub theta: f64,
    pub free_energy: f64,
    pub label: PhaseLabel,
    pub converged: bool,
    pub iterations: usize,
}

impl PhasePoint {
    fn new(axis1: f64, axis2: f64, sol: &RSSolution, tol: f64) -> Self {
        Self {
            axis1,
            axis2,
            m: sol.m,
            q: sol.q,
            theta: sol.theta,
            free_energy: sol.free_energy,
            label: classify(sol, tol),
            converged: sol.converged,
            iterations: sol.iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    values: Vec<f64>,
}

impl Axis {
    /// `count` evenly spaced nodes with both ends included.
    pub fn linspace(name: &str, min: f64, max: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(invalid("count", format!("axis `{name}` needs at least 2 nodes")));
        }
        if !(min < max) || !min.is_finite() || !max.is_finite() {
            return Err(invalid("min", format!("axis `{name}` needs finite min < max")));
        }
        let last = (count - 1) as f64;
        let values = (0..count)
            .map(|k| if k == count - 1 { max } else { min + (max - min) * (k as f64 / last) })
            .collect();
        Ok(Self {
            name: name.to_owned(),
            values,
        })
    }

    /// Arbitrary strictly increasing nodes.
    pub fn explicit(name: &str, values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(invalid("count", format!("axis `{name}` needs at least 2 nodes")));
        }
        if values.iter().any(|v| !v.is_finite()) || values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid(
                "values",
                format!("axis `{name}` must be finite and strictly increasing"),
            ));
        }
        Ok(Self {
            name: name.to_owned(),
            values,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }
}

/// Grid plus the parameters held fixed across it. In the matter plane the
/// axes are `(J̃₀/J, T/J)` and `lambda` only scales the reported θ; in the
/// optical plane they are `(λ, T)` and `j0` is the bare mean coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub axis1: Axis,
    pub axis2: Axis,
    pub j: f64,
    pub j0: f64,
    pub lambda: f64,
    pub tol: f64,
    pub warm_start: bool,
    pub solve: SolveOptions,
}

impl GridSpec {
    pub fn matter(jt_over_j: Axis, t_over_j: Axis, j: f64) -> Self {
        Self {
            axis1: jt_over_j,
            axis2: t_over_j,
            j,
            j0: 0.0,
            lambda: 0.0,
            tol: DEFAULT_CLASSIFY_TOL,
            warm_start: true,
            solve: SolveOptions::default(),
        }
    }

    pub fn optical(lambda: Axis, t: Axis, j0: f64, j: f64) -> Self {
        Self {
            axis1: lambda,
            axis2: t,
            j,
            j0,
            lambda: 0.0,
            tol: DEFAULT_CLASSIFY_TOL,
            warm_start: true,
            solve: SolveOptions::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.j > 0.0) || !self.j.is_finite() {
            return Err(invalid("j", format!("must be finite and > 0, got {}", self.j)));
        }
        if !self.j0.is_finite() {
            return Err(invalid("j0", "must be finite"));
        }
        if !(self.tol > 0.0) {
            return Err(invalid("tol", "classification tolerance must be > 0"));
        }
        if !(self.axis2.min() > 0.0) {
            return Err(invalid("t_min", "temperatures must be > 0"));
        }
        self.solve.validate()
    }
}

pub fn scan_matter(grid: &GridSpec) -> Result<Vec<PhasePoint>> {
    grid.validate()?;
    let j = grid.j;
    scan(grid, |x, y| RSParams::new(y * j, x * j, j, grid.lambda))
}

pub fn scan_optical(grid: &GridSpec) -> Result<Vec<PhasePoint>> {
    grid.validate()?;
    if !(grid.axis1.min() >= 0.0) {
        return Err(invalid("lambda_min", "coupling must be >= 0"));
    }
    scan(grid, |x, y| RSParams::new(y, grid.j0 + 2.0 * x * x, grid.j, x))
}

fn scan<F>(grid: &GridSpec, params_at: F) -> Result<Vec<PhasePoint>>
where
    F: Fn(f64, f64) -> Result<RSParams> + Sync,
{
    let columns: Vec<Vec<PhasePoint>> = grid
        .axis1
        .values()
        .par_iter()
        .map(|&x| scan_column(grid, x, &params_at))
        .collect::<Result<_>>()?;
    Ok(columns.into_iter().flatten().collect())
}

fn scan_column<F>(grid: &GridSpec, x: f64, params_at: &F) -> Result<Vec<PhasePoint>>
where
    F: Fn(f64, f64) -> Result<RSParams>,
{
    let ys = grid.axis2.values();
    let mut points = Vec::with_capacity(ys.len());
    let mut previous: Option<[BranchRun; 2]> = None;
    for &y in ys.iter().rev() {
        let p = params_at(x, y)?;
        let (mut sol, mut runs) = match previous.filter(|_| grid.warm_start) {
            Some([ferro, zero]) => {
                let ferro_start = (ferro.m.abs().max(WARM_FLOOR), ferro.q.max(WARM_FLOOR));
                let zero_start = (0.0, zero.q.max(WARM_FLOOR));
                solve_rs_branches(&p, &grid.solve, ferro_start, zero_start)?
            }
            None => solve_rs_branches(&p, &grid.solve, FERRO_START, ZERO_M_START)?,
        };
        if !sol.converged && previous.is_some() && grid.warm_start {
            (sol, runs) = solve_rs_branches(&p, &grid.solve, FERRO_START, ZERO_M_START)?;
        }
        previous = Some(runs);
        points.push(PhasePoint::new(x, y, &sol, grid.tol));
    }
    points.reverse();
    Ok(points)
}

pub fn write_csv<W: Write>(mut out: W, points: &[PhasePoint]) -> io::Result<()> {
    writeln!(out, "axis1,axis2,m,q,theta,free_energy,label,converged,iterations")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            real(p.axis1),
            real(p.axis2),
            real(p.m),
            real(p.q),
            real(p.theta),
            real(p.free_energy),
            p.label,
            p.converged,
            p.iterations
        )?;
    }
    Ok(())
}

/// Which control parameter a boundary search moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanAxis {
    Temperature,
    /// Moves `J̃₀` directly; `j0` and `lambda` are then ignored for the shift.
    JTilde0,
    /// Moves `λ`, with `J̃₀ = j0 + 2λ²`.
    Lambda,
}

/// Values held fixed during a boundary search. Outside the `JTilde0` axis
/// the effective mean coupling is `j0 + 2·lambda²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedParams {
    pub t: f64,
    pub j0: f64,
    pub j: f64,
    pub lambda: f64,
}

impl FixedParams {
    pub fn at(&self, axis: ScanAxis, x: f64) -> Result<RSParams> {
        let shifted = |lambda: f64| self.j0 + 2.0 * lambda * lambda;
        match axis {
            ScanAxis::Temperature => RSParams::new(x, shifted(self.lambda), self.j, self.lambda),
            ScanAxis::JTilde0 => RSParams::new(self.t, x, self.j, self.lambda),
            ScanAxis::Lambda => RSParams::new(self.t, shifted(x), self.j, x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySearch {
    pub axis: ScanAxis,
    pub fixed: FixedParams,
    /// The predicate is `label == target`.
    pub target: PhaseLabel,
    pub bracket: (f64, f64),
    pub tol: f64,
    pub classify_tol: f64,
    pub solve: SolveOptions,
}

impl BoundarySearch {
    pub fn new(axis: ScanAxis, fixed: FixedParams, target: PhaseLabel, bracket: (f64, f64)) -> Self {
        Self {
            axis,
            fixed,
            target,
            bracket,
            tol: DEFAULT_BOUNDARY_TOL,
            classify_tol: DEFAULT_CLASSIFY_TOL,
            solve: SolveOptions::default(),
        }
    }

    fn label_at(&self, x: f64) -> Result<PhaseLabel> {
        let params = self.fixed.at(self.axis, x)?;
        let sol = solve_rs(&params, &self.solve)?;
        if !sol.converged {
            return Err(Error::NotConverged {
                context: format!("{:?} = {x} during boundary search", self.axis),
            });
        }
        Ok(classify(&sol, self.classify_tol))
    }
}

/// Bisects the bracket on the target-label predicate until narrower than
/// `tol` and returns the midpoint.
pub fn locate_boundary(search: &BoundarySearch) -> Result<f64> {
    let (mut lo, mut hi) = search.bracket;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(invalid("bracket", format!("need finite lo < hi, got [{lo}, {hi}]")));
    }
    if !(search.tol > 0.0) {
        return Err(invalid("tol", "must be > 0"));
    }
    let lo_label = search.label_at(lo)?;
    let hi_label = search.label_at(hi)?;
    let lo_in = lo_label == search.target;
    if lo_in == (hi_label == search.target) {
        let label = if lo_label == hi_label {
            lo_label.to_string()
        } else {
            format!("{lo_label}/{hi_label}, neither or both {}", search.target)
        };
        return Err(Error::Bracket { lo, hi, label });
    }
    while hi - lo > search.tol {
        let mid = 0.5 * (lo + hi);
        if (search.label_at(mid)? == search.target) == lo_in {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Scan results arranged on their grid, for region-level checks.
#[derive(Debug, Clone)]
pub struct PhaseMap {
    axis1: Vec<f64>,
    axis2: Vec<f64>,
    points: Vec<PhasePoint>,
}

impl PhaseMap {
    /// `points` must be in scan order: first axis outer, second axis inner.
    pub fn new(grid: &GridSpec, points: Vec<PhasePoint>) -> Result<Self> {
        let (n1, n2) = (grid.axis1.len(), grid.axis2.len());
        if points.len() != n1 * n2 {
            return Err(Error::LengthMismatch {
                expected: n1 * n2,
                got: points.len(),
            });
        }
        Ok(Self {
            axis1: grid.axis1.values().to_vec(),
            axis2: grid.axis2.values().to_vec(),
            points,
        })
    }

    pub fn point(&self, i: usize, k: usize) -> &PhasePoint {
        &self.points[i * self.axis2.len() + k]
    }

    pub fn label(&self, i: usize, k: usize) -> PhaseLabel {
        self.point(i, k).label
    }

    pub fn column(&self, i: usize) -> &[PhasePoint] {
        let n2 = self.axis2.len();
        &self.points[i * n2..(i + 1) * n2]
    }

    /// Labels in order of first appearance, each with the number of
    /// 4-connected grid regions it occupies.
    pub fn regions(&self) -> Vec<(PhaseLabel, usize)> {
        let (n1, n2) = (self.axis1.len(), self.axis2.len());
        let mut seen = vec![false; n1 * n2];
        let mut counts: Vec<(PhaseLabel, usize)> = Vec::new();
        for start in 0..n1 * n2 {
            if seen[start] {
                continue;
            }
            let label = self.points[start].label;
            match counts.iter_mut().find(|(l, _)| *l == label) {
                Some((_, c)) => *c += 1,
                None => counts.push((label, 1)),
            }
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(idx) = stack.pop() {
                let (i, k) = (idx / n2, idx % n2);
                let mut visit = |ni: usize, nk: usize| {
                    let nidx = ni * n2 + nk;
                    if !seen[nidx] && self.points[nidx].label == label {
                        seen[nidx] = true;
                        stack.push(nidx);
                    }
                };
                if i > 0 {
                    visit(i - 1, k);
                }
                if i + 1 < n1 {
                    visit(i + 1, k);
                }
                if k > 0 {
                    visit(i, k - 1);
                }
                if k + 1 < n2 {
                    visit(i, k + 1);
                }
            }
        }
        counts
    }

    /// Centres `(axis1, axis2)` of 2×2 node blocks holding all three phases.
    pub fn triple_cells(&self) -> Vec<(f64, f64)> {
        let (n1, n2) = (self.axis1.len(), self.axis2.len());
        let mut cells = Vec::new();
        for i in 0..n1 - 1 {
            for k in 0..n2 - 1 {
                let block = [
                    self.label(i, k),
                    self.label(i + 1, k),
                    self.label(i, k + 1),
                    self.label(i + 1, k + 1),
                ];
                let has = |l: PhaseLabel| block.contains(&l);
                if has(PhaseLabel::Paramagnetic)
                    && has(PhaseLabel::Ferromagnetic)
                    && has(PhaseLabel::SpinGlass)
                {
                    cells.push((
                        0.5 * (self.axis1[i] + self.axis1[i + 1]),
                        0.5 * (self.axis2[k] + self.axis2[k + 1]),
                    ));
                }
            }
        }
        cells
    }

    /// Second-axis values `(below, above)` bracketing each label change up
    /// column `i`.
    pub fn flips(&self, i: usize) -> Vec<(f64, f64, PhaseLabel, PhaseLabel)> {
        self.column(i)
            .windows(2)
            .filter(|w| w[0].label != w[1].label)
            .map(|w| (w[0].axis2, w[1].axis2, w[0].label, w[1].label))
            .collect()
    }

    /// Largest axis spacings, the size of "one grid cell".
    pub fn cell_size(&self) -> (f64, f64) {
        let widest = |v: &[f64]| v.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        (widest(&self.axis1), widest(&self.axis2))
    }

    pub fn axis1(&self) -> &[f64] {
        &self.axis1
    }

    pub fn axis2(&self) -> &[f64] {
        &self.axis2
    }

    pub fn points(&self) -> &[PhasePoint] {
        &self.points
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rs::Branch;

    fn sol(m: f64, q: f64, converged: bool) -> RSSolution {
        RSSolution {
            m,
            q,
            free_energy: 0.0,
            theta: 0.0,
            converged,
            iterations: 1,
            residual: 0.0,
            branch: Branch::FerroStart,
        }
    }

    #[test]
    fn classification_rule() {
        let tol = DEFAULT_CLASSIFY_TOL;
        assert_eq!(classify(&sol(0.3, 0.3, true), tol), PhaseLabel::Ferromagnetic);
        assert_eq!(classify(&sol(1e-12, 0.4, true), tol), PhaseLabel::SpinGlass);
        assert_eq!(classify(&sol(0.0, 0.0, true), tol), PhaseLabel::Paramagnetic);
        assert_eq!(classify(&sol(0.3, 0.3, false), tol), PhaseLabel::Unclassified);
        for l in [
            PhaseLabel::Paramagnetic,
            PhaseLabel::Ferromagnetic,
            PhaseLabel::SpinGlass,
            PhaseLabel::Unclassified,
        ] {
            assert_eq!(l.as_str().parse::<PhaseLabel>().unwrap(), l);
            assert_eq!(l.optical() == Some(OpticalLabel::Superradiant), l.is_superradiant());
        }
        assert!(PhaseLabel::Ferromagnetic.is_superradiant());
        assert_eq!(PhaseLabel::SpinGlass.optical(), Some(OpticalLabel::Subradiant));
    }

    #[test]
    fn axis_validation() {
        assert!(Axis::linspace("t", 0.0, 1.0, 1).is_err());
        assert!(Axis::linspace("t", 1.0, 1.0, 3).is_err());
        assert!(Axis::explicit("t", vec![0.0, 0.0]).is_err());
        let a = Axis::linspace("t", 0.05, 2.0, 40).unwrap();
        assert_eq!(a.min(), 0.05);
        assert_eq!(a.max(), 2.0);
        assert!((a.values()[1] - 0.1).abs() < 1e-15);
    }

    fn matter_column(jt: f64, t: Axis) -> Vec<PhasePoint> {
        let grid = GridSpec::matter(Axis::explicit("jt", vec![jt, jt + 1.0]).unwrap(), t, 1.0);
        let pts = scan_matter(&grid).unwrap();
        pts[..grid.axis2.len()].to_vec()
    }

    fn single_flip(col: &[PhasePoint]) -> (f64, f64, PhaseLabel, PhaseLabel) {
        let flips: Vec<_> = col
            .windows(2)
            .filter(|w| w[0].label != w[1].label)
            .map(|w| (w[0].axis2, w[1].axis2, w[0].label, w[1].label))
            .collect();
        assert_eq!(flips.len(), 1, "{flips:?}");
        flips[0]
    }

    #[test]
    fn ferro_line_at_jtilde0_two() {
        let col = matter_column(2.0, Axis::linspace("t", 1.025, 3.0, 80).unwrap());
        let (below, above, cold, hot) = single_flip(&col);
        assert_eq!((cold, hot), (PhaseLabel::Ferromagnetic, PhaseLabel::Paramagnetic));
        assert!(below < 2.0 && 2.0 <= above, "{below} {above}");
    }

    #[test]
    fn glass_line_at_zero_mean() {
        let col = matter_column(0.0, Axis::linspace("t", 0.3125, 2.0, 55).unwrap());
        let (below, above, cold, hot) = single_flip(&col);
        assert_eq!((cold, hot), (PhaseLabel::SpinGlass, PhaseLabel::Paramagnetic));
        assert!(below < 1.0 && 1.0 <= above, "{below} {above}");
    }

    #[test]
    fn boundary_search_examples() {
        let fixed = FixedParams {
            t: 1.5,
            j0: 0.0,
            j: 1.0,
            lambda: 0.0,
        };
        let search = BoundarySearch::new(ScanAxis::Lambda, fixed, PhaseLabel::Ferromagnetic, (0.0, 2.0));
        let lambda_star = locate_boundary(&search).unwrap();
        assert!((lambda_star - 0.75f64.sqrt()).abs() < 1e-4, "{lambda_star}");

        let at_two = FixedParams {
            t: 1.0,
            j0: 2.0,
            j: 1.0,
            lambda: 0.0,
        };
        let mut search =
            BoundarySearch::new(ScanAxis::Temperature, at_two, PhaseLabel::Ferromagnetic, (0.5, 3.0));
        let tc = locate_boundary(&search).unwrap();
        assert!((tc - 2.0).abs() < 1e-4, "{tc}");

        search.bracket = (2.1, 2.9);
        assert!(matches!(locate_boundary(&search), Err(Error::Bracket { .. })));
    }

    #[test]
    fn same_label_bracket_is_rejected() {
        // Both ends lie below T = J̃₀ = 2, so both are ferromagnetic.
        let fixed = FixedParams {
            t: 1.0,
            j0: 2.0,
            j: 1.0,
            lambda: 0.0,
        };
        let search =
            BoundarySearch::new(ScanAxis::Temperature, fixed, PhaseLabel::Ferromagnetic, (1.6, 1.9));
        match locate_boundary(&search) {
            Err(Error::Bracket { label, .. }) => assert_eq!(label, "FERROMAGNETIC"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn optical_scan_examples() {
        let grid = GridSpec::optical(
            Axis::explicit("lambda", vec![0.0, 2.0]).unwrap(),
            Axis::linspace("t", 0.1, 2.0, 20).unwrap(),
            0.0,
            1.0,
        );
        let pts = scan_optical(&grid).unwrap();
        let map = PhaseMap::new(&grid, pts).unwrap();
        for p in map.column(0) {
            assert_eq!(p.m, 0.0);
            assert!(!p.label.is_superradiant());
        }
        let hot = map.column(1).iter().find(|p| p.axis2 == 1.5).unwrap();
        assert_eq!(hot.label, PhaseLabel::Ferromagnetic);
        assert!(hot.theta > 0.0);
        assert!((hot.theta - 4.0 * hot.m * hot.m).abs() < 1e-15);
    }

    #[test]
    fn optical_scan_matches_shifted_matter_scan() {
        let lambdas = vec![0.0, 0.3, 0.55, 0.7, 0.8, 1.0, 1.3];
        let j0 = 0.1;
        let temps = Axis::linspace("t", 0.2, 2.0, 19).unwrap();
        let optical = GridSpec::optical(
            Axis::explicit("lambda", lambdas.clone()).unwrap(),
            temps.clone(),
            j0,
            1.0,
        );
        let shifted = lambdas.iter().map(|l| j0 + 2.0 * l * l).collect();
        let matter = GridSpec::matter(Axis::explicit("jt", shifted).unwrap(), temps, 1.0);
        let a = scan_optical(&optical).unwrap();
        let b = scan_matter(&matter).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.axis2, y.axis2);
            assert_eq!((x.m, x.q, x.label), (y.m, y.q, y.label));
        }
    }

    #[test]
    fn warm_start_does_not_change_labels() {
        let mut grid = GridSpec::matter(
            Axis::linspace("jt", 0.0, 2.0, 11).unwrap(),
            Axis::linspace("t", 0.05, 2.0, 14).unwrap(),
            1.0,
        );
        let warm = scan_matter(&grid).unwrap();
        grid.warm_start = false;
        let cold = scan_matter(&grid).unwrap();
        for (w, c) in warm.iter().zip(&cold) {
            assert_eq!(w.label, c.label, "at ({}, {})", w.axis1, w.axis2);
        }
        assert!(warm.iter().all(|p| p.converged));
    }

    #[test]
    fn magnetization_falls_with_temperature_at_strong_mean_coupling() {
        let grid = GridSpec::matter(
            Axis::explicit("jt", vec![2.0, 2.5, 3.0]).unwrap(),
            Axis::linspace("t", 0.05, 3.5, 40).unwrap(),
            1.0,
        );
        let map = PhaseMap::new(&grid, scan_matter(&grid).unwrap()).unwrap();
        for i in 0..3 {
            for w in map.column(i).windows(2) {
                assert!(w[1].m <= w[0].m + 1e-12, "{:?} -> {:?}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn magnetization_rises_on_warming_near_the_glass_boundary() {
        // Independent high-precision fixed points at J̃₀ = 1.8, J = 1.
        let grid = GridSpec::matter(
            Axis::explicit("jt", vec![1.8, 2.0]).unwrap(),
            Axis::explicit("t", vec![0.05, 0.134]).unwrap(),
            1.0,
        );
        let map = PhaseMap::new(&grid, scan_matter(&grid).unwrap()).unwrap();
        let (cold, warm) = (map.point(0, 0), map.point(0, 1));
        assert!((cold.m - 0.89396075499043815).abs() < 1e-9, "{}", cold.m);
        assert!((cold.q - 0.98914626623394989).abs() < 1e-9, "{}", cold.q);
        assert!((warm.m - 0.89548049030851143).abs() < 1e-9, "{}", warm.m);
        assert!((warm.q - 0.97116814925776785).abs() < 1e-9, "{}", warm.q);
        assert!(warm.m > cold.m);
    }

    #[test]
    fn replica_symmetric_reentrance_below_the_zero_temperature_threshold() {
        // At T → 0 the ferro solution needs J̃₀ > √(π/2) J ≈ 1.2533, so for
        // J < J̃₀ below that the column goes P → F → SG on cooling.
        let grid = GridSpec::matter(
            Axis::explicit("jt", vec![1.2, 1.26]).unwrap(),
            Axis::explicit("t", vec![0.02, 0.3, 1.5]).unwrap(),
            1.0,
        );
        let map = PhaseMap::new(&grid, scan_matter(&grid).unwrap()).unwrap();
        let labels: Vec<_> = map.column(0).iter().map(|p| p.label).collect();
        use PhaseLabel::*;
        assert_eq!(labels, vec![SpinGlass, Ferromagnetic, Paramagnetic]);
        assert_eq!(map.label(1, 0), Ferromagnetic);
    }

    #[test]
    fn scan_is_deterministic_across_thread_counts() {
        let grid = GridSpec::matter(
            Axis::linspace("jt", 0.0, 2.0, 6).unwrap(),
            Axis::linspace("t", 0.2, 2.0, 6).unwrap(),
            1.0,
        );
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| scan_matter(&grid)).unwrap();
        let b = four.install(|| scan_matter(&grid)).unwrap();
        let (mut ca, mut cb) = (Vec::new(), Vec::new());
        write_csv(&mut ca, &a).unwrap();
        write_csv(&mut cb, &b).unwrap();
        assert_eq!(ca, cb);
    }

    #[test]
    fn region_analysis_on_a_hand_made_map() {
        let grid = GridSpec::matter(
            Axis::linspace("x", 0.0, 2.0, 3).unwrap(),
            Axis::linspace("y", 1.0, 3.0, 3).unwrap(),
            1.0,
        );
        use PhaseLabel::*;
        let labels = [
            [SpinGlass, Paramagnetic, Paramagnetic],
            [SpinGlass, Ferromagnetic, Paramagnetic],
            [Ferromagnetic, Ferromagnetic, SpinGlass],
        ];
        let mut pts = Vec::new();
        for (i, col) in labels.iter().enumerate() {
            for (k, &label) in col.iter().enumerate() {
                let mut p = PhasePoint::new(i as f64, 1.0 + k as f64, &sol(0.0, 0.0, true), 1e-6);
                p.label = label;
                pts.push(p);
            }
        }
        let map = PhaseMap::new(&grid, pts).unwrap();
        assert_eq!(
            map.regions(),
            vec![(SpinGlass, 2), (Paramagnetic, 1), (Ferromagnetic, 1)]
        );
        assert_eq!(map.triple_cells(), vec![(0.5, 1.5), (1.5, 2.5)]);
        assert_eq!(map.flips(1).len(), 2);
        assert_eq!(map.cell_size(), (1.0, 1.0));
    }
}
