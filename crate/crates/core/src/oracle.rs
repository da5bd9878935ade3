//! Brute-force reference solutions.
//!
//! [`dp_optimum`] propagates whole sets of squared speeds over a uniform
//! lattice of value cells: first the controllable sets backward from the end
//! of the path, then the reachable sets forward from the start, restricted to
//! the controllable ones. Each occupied cell stores the exact continuous
//! extent of the set inside it, so lattice resolution limits how finely a set
//! is split but does not round its values.
//!
//! [`random_admissible`] produces admissible profiles by solving tightened
//! versions of a car model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Pass, Result};
use crate::grid::Discretization;
use crate::model::{DynamicsModel, Endpoints};
use crate::path::PathSpec;
use crate::profile::{Provenance, SpeedProfile};
use crate::solver::solve_default;

pub const DEFAULT_LEVELS: usize = 512;
pub const MIN_LEVELS: usize = 8;

/// Points sampled per cell, minus one.
const CELL_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Span {
    lo: f64,
    hi: f64,
}

impl Span {
    fn merge(self, other: Span) -> Span {
        Span { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }
}

/// Uniform partition of `[min B_l, max B_u]` into `levels - 1` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    pub lo: f64,
    pub hi: f64,
    pub levels: usize,
}

impl Lattice {
    pub fn new(grid: &Discretization, model: &DynamicsModel, levels: usize) -> Result<Self> {
        if levels < MIN_LEVELS {
            return Err(Error::contract(format!("levels must be >= {MIN_LEVELS}, got {levels}")));
        }
        let lo = grid.points().iter().map(|&s| model.lower(s)).fold(f64::INFINITY, f64::min);
        let hi = grid.points().iter().map(|&s| model.upper(s)).fold(f64::NEG_INFINITY, f64::max);
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::contract("value bounds must be finite on the grid"));
        }
        Ok(Self { lo, hi: hi.max(lo), levels })
    }

    /// Distance between adjacent lattice values; zero when all bounds coincide.
    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.levels - 1) as f64
    }

    fn cells(&self) -> usize {
        if self.hi > self.lo {
            self.levels - 1
        } else {
            1
        }
    }

    fn edge(&self, k: usize) -> f64 {
        if k >= self.cells() {
            self.hi
        } else {
            self.lo + (self.hi - self.lo) * k as f64 / self.cells() as f64
        }
    }

    fn cell_of(&self, x: f64) -> usize {
        if !(self.hi > self.lo) {
            return 0;
        }
        let k = ((x - self.lo) / (self.hi - self.lo) * self.cells() as f64).floor();
        (k.max(0.0) as usize).min(self.cells() - 1)
    }

    /// Cells that may hold values in `[x, y]`, padded by one for rounding.
    fn cells_between(&self, x: f64, y: f64) -> std::ops::RangeInclusive<usize> {
        let first = self.cell_of(x).saturating_sub(1);
        let last = (self.cell_of(y) + 1).min(self.cells() - 1);
        first..=last
    }
}

/// `2·spacing + 2·B·Δ(D)`: how far the oracle and the solver may disagree.
pub fn agreement_tolerance(spacing: f64, slope_cap: f64, resolution: f64) -> f64 {
    2.0 * spacing + 2.0 * slope_cap * resolution
}

type Column = Vec<Option<Span>>;

fn column_hits(lattice: &Lattice, column: &Column, x: f64, y: f64) -> bool {
    lattice.cells_between(x, y).filter_map(|k| column[k]).any(|c| c.lo <= y && c.hi >= x)
}

fn samples(lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    let count = if hi > lo { CELL_SAMPLES + 1 } else { 1 };
    (0..count).map(move |j| if j == CELL_SAMPLES { hi } else { lo + (hi - lo) * j as f64 / CELL_SAMPLES as f64 })
}

/// Boundary between a passing point and a failing one.
fn bisect_predicate(pred: &impl Fn(f64) -> bool, mut pass: f64, mut fail: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (pass + fail);
        if mid == pass || mid == fail || (pass - fail).abs() <= 1e-14 * pass.abs().max(1.0) {
            break;
        }
        if pred(mid) {
            pass = mid;
        } else {
            fail = mid;
        }
    }
    pass
}

/// Extent of `{x ∈ [lo, hi] : pred(x)}`, assumed to be an interval at cell
/// scale, found by sampling and bisecting its two ends.
fn passing_span(pred: &impl Fn(f64) -> bool, lo: f64, hi: f64) -> Option<Span> {
    let xs: Vec<f64> = samples(lo, hi).collect();
    let ok: Vec<bool> = xs.iter().map(|&x| pred(x)).collect();
    let first = ok.iter().position(|&b| b)?;
    let last = ok.iter().rposition(|&b| b)?;
    let bottom = if first > 0 { bisect_predicate(pred, xs[first], xs[first - 1]) } else { xs[first] };
    let top = if last + 1 < xs.len() { bisect_predicate(pred, xs[last], xs[last + 1]) } else { xs[last] };
    Some(Span { lo: bottom, hi: top })
}

fn clip_cell(lattice: &Lattice, k: usize, lower: f64, upper: f64) -> Option<(f64, f64)> {
    let lo = lattice.edge(k).max(lower);
    let hi = lattice.edge(k + 1).min(upper);
    (lo <= hi).then_some((lo, hi))
}

fn column_top(column: &Column) -> Option<f64> {
    column.iter().flatten().map(|c| c.hi).reduce(f64::max)
}

/// Per-index maximum of the forward-reachable ∩ backward-controllable sets on
/// a lattice of `levels` values.
pub fn dp_optimum(
    grid: &Discretization,
    model: &DynamicsModel,
    levels: usize,
    endpoints: Endpoints,
) -> Result<SpeedProfile> {
    endpoints.validate()?;
    let lattice = Lattice::new(grid, model, levels)?;
    let pts = grid.points();
    let n = grid.segments();
    let cells = lattice.cells();

    let mut controllable: Vec<Column> = vec![vec![None; cells]; n + 1];
    let end_upper = endpoints.end.map_or(model.upper(pts[n]), |cap| cap.min(model.upper(pts[n])));
    controllable[n] = (0..cells)
        .map(|k| clip_cell(&lattice, k, model.lower(pts[n]), end_upper).map(|(lo, hi)| Span { lo, hi }))
        .collect();
    if controllable[n].iter().all(Option::is_none) {
        return Err(Error::Infeasible { index: n, pass: Pass::Backward });
    }
    for i in (0..n).rev() {
        let (s, ds) = (pts[i], pts[i + 1] - pts[i]);
        let next = &controllable[i + 1];
        let pred = |g: f64| column_hits(&lattice, next, g + model.fminus(s, g) * ds, g + model.fplus(s, g) * ds);
        let column: Column = (0..cells)
            .map(|k| {
                clip_cell(&lattice, k, model.lower(s), model.upper(s)).and_then(|(lo, hi)| passing_span(&pred, lo, hi))
            })
            .collect();
        if column.iter().all(Option::is_none) {
            return Err(Error::Infeasible { index: i, pass: Pass::Backward });
        }
        controllable[i] = column;
    }

    let start = {
        let cap = endpoints.start.unwrap_or(f64::INFINITY);
        controllable[0]
            .iter()
            .flatten()
            .filter(|c| c.lo <= cap)
            .map(|c| c.hi.min(cap))
            .reduce(f64::max)
            .ok_or(Error::Infeasible { index: 0, pass: Pass::Forward })?
    };
    let mut reach: Column = vec![None; cells];
    reach[lattice.cell_of(start)] = Some(Span { lo: start, hi: start });
    let mut tops = Vec::with_capacity(n + 1);
    tops.push(start);
    for i in 0..n {
        let (s, ds) = (pts[i], pts[i + 1] - pts[i]);
        let target = &controllable[i + 1];
        let mut next: Column = vec![None; cells];
        for span in reach.iter().flatten() {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for h in samples(span.lo, span.hi) {
                lo = lo.min(h + model.fminus(s, h) * ds);
                hi = hi.max(h + model.fplus(s, h) * ds);
            }
            for k in lattice.cells_between(lo, hi) {
                if let Some(c) = target[k] {
                    let piece = Span { lo: lo.max(c.lo), hi: hi.min(c.hi) };
                    if piece.lo <= piece.hi {
                        next[k] = Some(next[k].map_or(piece, |old| old.merge(piece)));
                    }
                }
            }
        }
        let top = column_top(&next).ok_or(Error::Infeasible { index: i + 1, pass: Pass::Forward })?;
        tops.push(top);
        reach = next;
    }
    SpeedProfile::new(grid.clone(), tops, Provenance::Oracle)
}

/// Solves the car model tightened to `u_f·F_fr` and `u_v·v_max` on `grid`,
/// keeping the original endpoint caps.
pub fn tightened_solution(grid: &Discretization, path: &PathSpec, u_f: f64, u_v: f64) -> Result<SpeedProfile> {
    if !(u_f > 0.0 && u_f <= 1.0 && u_v > 0.0 && u_v <= 1.0) {
        return Err(Error::contract(format!("multipliers must lie in (0, 1], got {u_f}, {u_v}")));
    }
    let tight = PathSpec { f_fr: u_f * path.f_fr, v_max: u_v * path.v_max, ..path.clone() };
    let model = tight.build_model()?;
    solve_default(grid, &model, path.endpoints())?.into_profile()
}

/// Admissible profile for `path` drawn from a seeded family of tightened
/// models. Infeasible draws are retried with multipliers moved halfway to 1.
pub fn random_admissible(grid: &Discretization, path: &PathSpec, seed: u64) -> Result<SpeedProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u_f: f64 = rng.gen_range(0.3..1.0);
    let mut u_v: f64 = rng.gen_range(0.3..1.0);
    let mut last_err = None;
    for _ in 0..8 {
        match tightened_solution(grid, path, u_f, u_v) {
            Ok(profile) => return Ok(profile.with_provenance(Provenance::Synthetic { seed: Some(seed) })),
            Err(e @ Error::Infeasible { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
        u_f = 0.5 * (u_f + 1.0);
        u_v = 0.5 * (u_v + 1.0);
    }
    Err(last_err.expect("loop ran at least once"))
}
