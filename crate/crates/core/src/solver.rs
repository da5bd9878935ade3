//! Backward-forward reachability passes.
//!
//! The backward pass computes, from the end of the path, the largest squared
//! speed at each grid point from which the next point's cap can still be met
//! while braking as hard as allowed. The forward pass then accelerates as hard
//! as allowed from the start, clipped by those caps. Both passes are linear in
//! the number of grid points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Pass, Result};
use crate::grid::Discretization;
use crate::model::{DynamicsModel, Endpoints};
use crate::profile::{profile_error, Provenance, SpeedProfile};
use crate::retime;

/// Settings for the scalar maximization solved at each backward step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSolverConfig {
    /// Bracket width (squared-speed units) at which bisection stops.
    pub abs_tol: f64,
    /// Cells used to search for a bracket when the end values do not give one.
    pub scan_cells: usize,
}

impl StepSolverConfig {
    pub fn new(abs_tol: f64, scan_cells: usize) -> Result<Self> {
        if !(abs_tol > 0.0 && abs_tol.is_finite()) {
            return Err(Error::contract(format!("abs_tol must be positive, got {abs_tol}")));
        }
        if scan_cells < 2 {
            return Err(Error::contract(format!("scan_cells must be >= 2, got {scan_cells}")));
        }
        Ok(Self { abs_tol, scan_cells })
    }

    /// `abs_tol = 1e-12 * max(1, max B_u)` over the grid, 1024 scan cells.
    pub fn default_for(grid: &Discretization, model: &DynamicsModel) -> Self {
        let upper_max = grid.points().iter().map(|&s| model.upper(s)).filter(|u| u.is_finite()).fold(1.0, f64::max);
        Self { abs_tol: 1e-12 * upper_max, scan_cells: 1024 }
    }
}

/// Largest `h` in `[B_l(s), B_u(s)]` with `h + f⁻(s, h)·ds <= h_next`, or
/// `None` when no such value exists.
pub fn backward_step(
    s: f64,
    ds: f64,
    h_next: f64,
    model: &DynamicsModel,
    cfg: &StepSolverConfig,
) -> Result<Option<f64>> {
    if !(ds > 0.0 && ds.is_finite()) {
        return Err(Error::contract(format!("step length must be positive, got {ds}")));
    }
    if !h_next.is_finite() {
        return Err(Error::contract(format!("next squared speed must be finite, got {h_next}")));
    }
    let (lo, hi) = (model.lower(s), model.upper(s));
    if !(lo <= hi) {
        return Ok(None);
    }
    if !hi.is_finite() {
        return Err(Error::contract(format!("upper bound at s={s} is not finite")));
    }

    let g = |h: f64| h + model.fminus(s, h) * ds - h_next;
    let g_hi = g(hi);
    if g_hi <= 0.0 {
        return Ok(Some(hi));
    }
    let g_lo = g(lo);
    if g_lo <= 0.0 {
        return Ok(Some(refine_root(&g, lo, hi, g_lo, g_hi, cfg.abs_tol)));
    }

    // No sign change across the interval: look for the highest cell whose
    // left edge satisfies the constraint.
    let cells = cfg.scan_cells;
    let at = |k: usize| lo + (hi - lo) * k as f64 / cells as f64;
    let mut right = (hi, g_hi);
    for k in (1..cells).rev() {
        let x = at(k);
        let gx = g(x);
        if gx <= 0.0 {
            return Ok(Some(refine_root(&g, x, right.0, gx, right.1, cfg.abs_tol)));
        }
        right = (x, gx);
    }
    Ok(None)
}

/// Shrinks a bracket with `g(a) <= 0 < g(b)` down to `abs_tol`, then polishes
/// with a few secant steps. Always returns a point where `g <= 0`.
fn refine_root(g: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut ga: f64, mut gb: f64, abs_tol: f64) -> f64 {
    while b - a > abs_tol {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = g(m);
        if gm <= 0.0 {
            a = m;
            ga = gm;
        } else {
            b = m;
            gb = gm;
        }
    }
    for _ in 0..4 {
        if ga == 0.0 {
            break;
        }
        let c = a - ga * (b - a) / (gb - ga);
        if !(c > a && c < b) {
            break;
        }
        let gc = g(c);
        if gc <= 0.0 {
            a = c;
            ga = gc;
        } else {
            b = c;
            gb = gc;
        }
    }
    a
}

/// `min(h_cap, h_prev + f⁺(s_prev, h_prev)·ds)`, or `None` when that falls
/// below the lower bound at `s_prev + ds`.
pub fn forward_step(s_prev: f64, ds: f64, h_prev: f64, h_cap: f64, model: &DynamicsModel) -> Result<Option<f64>> {
    if !(ds > 0.0 && ds.is_finite()) {
        return Err(Error::contract(format!("step length must be positive, got {ds}")));
    }
    Ok(advance(s_prev, s_prev + ds, h_prev, h_cap, model))
}

fn advance(s_prev: f64, s_next: f64, h_prev: f64, h_cap: f64, model: &DynamicsModel) -> Option<f64> {
    let reach = h_prev + model.fplus(s_prev, h_prev) * (s_next - s_prev);
    let next = h_cap.min(reach);
    (next >= model.lower(s_next)).then_some(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SolveStatus {
    Feasible,
    Infeasible { index: usize, pass: Pass },
}

/// Result of [`solve`], including both intermediate passes.
///
/// Entries a failed pass never reached are `NaN` (`null` in JSON).
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub profile: Option<SpeedProfile>,
    pub backward: Vec<f64>,
    pub forward: Vec<f64>,
    pub status: SolveStatus,
    pub traversal_time: Option<f64>,
    pub error_vs_reference: Option<f64>,
}

impl SolveReport {
    pub fn is_feasible(&self) -> bool {
        self.status == SolveStatus::Feasible
    }

    /// The solved profile, or the infeasibility as an error.
    pub fn into_profile(self) -> Result<SpeedProfile> {
        match (self.status, self.profile) {
            (SolveStatus::Feasible, Some(p)) => Ok(p),
            (SolveStatus::Infeasible { index, pass }, _) => Err(Error::Infeasible { index, pass }),
            (SolveStatus::Feasible, None) => unreachable!("feasible report without profile"),
        }
    }

    /// Records the sup-norm error against `reference`.
    pub fn compare_with(&mut self, reference: &SpeedProfile) -> Result<f64> {
        let profile = self.profile.as_ref().ok_or_else(|| Error::contract("cannot compare an infeasible solve"))?;
        let rho = profile_error(profile, reference)?;
        self.error_vs_reference = Some(rho);
        Ok(rho)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Runs the backward pass seeded at `min(B_u(b), end cap)` and the forward
/// pass seeded at `min(h_0 backward, start cap)`.
pub fn solve(
    grid: &Discretization,
    model: &DynamicsModel,
    endpoints: Endpoints,
    cfg: &StepSolverConfig,
) -> Result<SolveReport> {
    endpoints.validate()?;
    let pts = grid.points();
    let n = grid.segments();
    let mut backward = vec![f64::NAN; n + 1];
    let mut forward = vec![f64::NAN; n + 1];
    let infeasible = |index, pass, backward, forward| {
        Ok(SolveReport {
            profile: None,
            backward,
            forward,
            status: SolveStatus::Infeasible { index, pass },
            traversal_time: None,
            error_vs_reference: None,
        })
    };

    let end_seed = endpoints.end.map_or(model.upper(pts[n]), |cap| cap.min(model.upper(pts[n])));
    if !(end_seed >= model.lower(pts[n])) || !end_seed.is_finite() {
        return infeasible(n, Pass::Backward, backward, forward);
    }
    backward[n] = end_seed;
    for i in (0..n).rev() {
        match backward_step(pts[i], pts[i + 1] - pts[i], backward[i + 1], model, cfg)? {
            Some(h) => backward[i] = h,
            None => return infeasible(i, Pass::Backward, backward, forward),
        }
    }

    let start_seed = endpoints.start.map_or(backward[0], |cap| cap.min(backward[0]));
    if !(start_seed >= model.lower(pts[0])) {
        return infeasible(0, Pass::Forward, backward, forward);
    }
    forward[0] = start_seed;
    for i in 1..=n {
        match advance(pts[i - 1], pts[i], forward[i - 1], backward[i], model) {
            Some(h) => forward[i] = h,
            None => return infeasible(i, Pass::Forward, backward, forward),
        }
    }

    let profile = SpeedProfile::new(grid.clone(), forward.clone(), Provenance::Solver)?;
    let traversal_time = retime::traversal_time(&profile).ok();
    Ok(SolveReport {
        profile: Some(profile),
        backward,
        forward,
        status: SolveStatus::Feasible,
        traversal_time,
        error_vs_reference: None,
    })
}

/// [`solve`] with [`StepSolverConfig::default_for`].
pub fn solve_default(grid: &Discretization, model: &DynamicsModel, endpoints: Endpoints) -> Result<SolveReport> {
    solve(grid, model, endpoints, &StepSolverConfig::default_for(grid, model))
}
