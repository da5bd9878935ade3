//! Refinement and relaxation sweeps.

use std::io::Write;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Discretization;
use crate::model::{DynamicsModel, Endpoints};
use crate::path::PathSpec;
use crate::profile::{check_admissible, profile_error, SpeedProfile};
use crate::retime::traversal_time;
use crate::solver::solve_default;

/// What the error `ρ` of each sweep entry is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    /// Closed-form optimum of the path.
    Analytic,
    /// Solve on a grid with `4·(n_max − 1)` segments, restricted to each
    /// coarser grid's points.
    Finest,
}

impl std::str::FromStr for Reference {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Reference::Analytic),
            "finest" => Ok(Reference::Finest),
            other => Err(Error::contract(format!("unknown reference {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    /// Number of grid points.
    pub n: usize,
    pub delta: f64,
    pub rho: f64,
    /// Traversal time of the solved profile; `None` if it diverges.
    pub time_s: Option<f64>,
}

fn at_size(size: usize) -> impl FnOnce(Error) -> Error {
    move |e| Error::Sweep { at: format!("n={size}"), source: Box::new(e) }
}

fn solve_checked(grid: &Discretization, model: &DynamicsModel, endpoints: Endpoints) -> Result<SpeedProfile> {
    let profile = solve_default(grid, model, endpoints)?.into_profile()?;
    let verdict = check_admissible(&profile, model, model.default_tol())?;
    if let Some(v) = verdict.violation {
        return Err(Error::Check(format!("solver output is not admissible: {v}")));
    }
    Ok(profile)
}

/// Solves `path` on uniform grids of each size (number of points) and
/// reports the sup-norm error against `reference`.
pub fn convergence_sweep(path: &PathSpec, sizes: &[usize], reference: Reference) -> Result<Vec<SweepRow>> {
    if sizes.len() < 2 {
        return Err(Error::contract("a sweep needs at least 2 resolutions"));
    }
    if sizes[0] < 2 || sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::contract(format!("resolutions must be >= 2 and strictly increasing, got {sizes:?}")));
    }
    let model = path.build_model()?;
    let endpoints = path.endpoints();

    let finest = match reference {
        Reference::Analytic => None,
        Reference::Finest => {
            let segments = 4 * (sizes[sizes.len() - 1] - 1);
            if let Some(bad) = sizes.iter().find(|&&n| !segments.is_multiple_of(n - 1)) {
                return Err(Error::Alignment(format!(
                    "{} segments do not divide the {segments} segments of the reference grid",
                    bad - 1
                )));
            }
            let grid = path.uniform_grid(segments + 1)?;
            Some(solve_checked(&grid, &model, endpoints).map_err(at_size(segments + 1))?)
        }
    };

    sizes
        .iter()
        .map(|&n| {
            let (grid, exact) = match &finest {
                None => {
                    let grid = path.uniform_grid(n)?;
                    let exact = path.analytic_optimum(&grid)?;
                    (grid, exact)
                }
                Some(fine) => {
                    let stride = fine.grid().segments() / (n - 1);
                    let grid = fine.grid().subsample(stride)?;
                    let values = fine.values().iter().copied().step_by(stride).collect();
                    (grid.clone(), SpeedProfile::new(grid, values, fine.provenance())?)
                }
            };
            let profile = solve_checked(&grid, &model, endpoints).map_err(at_size(n))?;
            Ok(SweepRow {
                n,
                delta: grid.resolution(),
                rho: profile_error(&profile, &exact)?,
                time_s: traversal_time(&profile).ok(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XiRow {
    pub xi: f64,
    /// Largest pointwise gap to the unrelaxed solve.
    pub gap: f64,
}

/// Solves `path` under decreasing relaxations `ξ` (ending at 0) and reports
/// the distance of each solution to the unrelaxed one. Fails if the gaps are
/// not non-increasing within the default tolerance.
pub fn xi_sweep(path: &PathSpec, grid: &Discretization, xis: &[f64]) -> Result<Vec<XiRow>> {
    if xis.last() != Some(&0.0) {
        return Err(Error::contract("relaxation levels must end at 0"));
    }
    if xis.windows(2).any(|w| !(w[1] < w[0])) || xis.iter().any(|x| !(*x >= 0.0)) {
        return Err(Error::contract(format!("relaxation levels must be strictly decreasing, got {xis:?}")));
    }
    let model = path.build_model()?;
    let endpoints = path.endpoints();
    let at_xi = |xi: f64| move |e| Error::Sweep { at: format!("xi={xi}"), source: Box::new(e) };
    let base = solve_checked(grid, &model, endpoints).map_err(at_xi(0.0))?;

    let mut rows = Vec::with_capacity(xis.len());
    for &xi in xis {
        let relaxed = model.relax(xi)?;
        let profile = solve_checked(grid, &relaxed, endpoints).map_err(at_xi(xi))?;
        rows.push(XiRow { xi, gap: profile_error(&profile, &base)? });
    }
    let tol = model.default_tol();
    if let Some(w) = rows.windows(2).find(|w| w[1].gap > w[0].gap + tol) {
        return Err(Error::Check(format!(
            "gap grew from {} at xi={} to {} at xi={}",
            w[0].gap, w[0].xi, w[1].gap, w[1].xi
        )));
    }
    Ok(rows)
}

/// Fastest of `reps` solves of `grid`, for scaling measurements.
pub fn solver_wall_time(
    grid: &Discretization,
    model: &DynamicsModel,
    endpoints: Endpoints,
    reps: usize,
) -> Result<Duration> {
    let mut best = Duration::MAX;
    for _ in 0..reps.max(1) {
        let start = Instant::now();
        let report = solve_default(grid, model, endpoints)?;
        best = best.min(start.elapsed());
        std::hint::black_box(report);
    }
    Ok(best)
}

pub fn write_convergence_csv<W: Write>(rows: &[SweepRow], writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["n", "delta", "rho", "time_s"])?;
    for r in rows {
        out.write_record([
            r.n.to_string(),
            format!("{:.16e}", r.delta),
            format!("{:.16e}", r.rho),
            r.time_s.map_or_else(|| "inf".to_string(), |t| format!("{t:.16e}")),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_xi_csv<W: Write>(rows: &[XiRow], writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["xi", "gap"])?;
    for r in rows {
        out.write_record([format!("{:.16e}", r.xi), format!("{:.16e}", r.gap)])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rest_line() -> PathSpec {
        PathSpec::line(1.0, 10.0, 1.0).with_endpoints(Endpoints::rest_to_rest())
    }

    #[test]
    fn circle_is_grid_exact() {
        let spec = PathSpec::arc(1.0, std::f64::consts::TAU, 10.0, 1.0);
        let rows = convergence_sweep(&spec, &[5, 17, 65], Reference::Analytic).unwrap();
        let tol = spec.build_model().unwrap().default_tol();
        assert!(rows.iter().all(|r| r.rho <= tol));
        assert!(rows.iter().all(|r| (r.time_s.unwrap() - std::f64::consts::TAU).abs() < 1e-9));
    }

    #[test]
    fn finest_reference_alignment() {
        let spec = PathSpec::table(vec![[0.0, 0.0], [5.0, 0.4], [10.0, 0.0]], 5.0, 1.0);
        assert!(matches!(convergence_sweep(&spec, &[4, 11], Reference::Finest), Err(Error::Alignment(_))));
        let rows = convergence_sweep(&spec, &[6, 11, 21], Reference::Finest).unwrap();
        assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![6, 11, 21]);
        assert!((rows[0].delta - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_preconditions() {
        assert!(convergence_sweep(&rest_line(), &[10], Reference::Analytic).is_err());
        assert!(convergence_sweep(&rest_line(), &[100, 10], Reference::Analytic).is_err());
        let table = PathSpec::table(vec![[0.0, 0.1], [1.0, 0.1]], 1.0, 1.0);
        assert!(matches!(convergence_sweep(&table, &[3, 5], Reference::Analytic), Err(Error::Unsupported(_))));
    }

    #[test]
    fn infeasible_sweep_names_resolution() {
        let spec = PathSpec::line(1.0, 3.0, 1.0).with_v_min(1.0).with_endpoints(Endpoints::rest_to_rest());
        match convergence_sweep(&spec, &[3, 5], Reference::Finest) {
            Err(Error::Sweep { at, source }) => {
                assert_eq!(at, "n=17");
                assert!(matches!(*source, Error::Infeasible { .. }));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn xi_zero_only() {
        let grid = rest_line().uniform_grid(11).unwrap();
        let rows = xi_sweep(&rest_line(), &grid, &[0.0]).unwrap();
        assert_eq!(rows, vec![XiRow { xi: 0.0, gap: 0.0 }]);
    }

    #[test]
    fn xi_sweep_line() {
        let grid = rest_line().uniform_grid(101).unwrap();
        let rows = xi_sweep(&rest_line(), &grid, &[0.2, 0.1, 0.05, 0.0]).unwrap();
        assert_eq!(rows.last().unwrap().gap, 0.0);
        // relaxed tent peaks at (2 + ξ)/2
        assert!((rows[0].gap - 0.1).abs() < 1e-9, "{rows:?}");
    }

    #[test]
    fn xi_sweep_preconditions() {
        let grid = rest_line().uniform_grid(11).unwrap();
        assert!(xi_sweep(&rest_line(), &grid, &[0.1, 0.2, 0.0]).is_err());
        assert!(xi_sweep(&rest_line(), &grid, &[0.1]).is_err());
        assert!(xi_sweep(&rest_line(), &grid, &[]).is_err());
    }

    #[test]
    fn csv_headers() {
        let mut buf = Vec::new();
        write_convergence_csv(&[SweepRow { n: 3, delta: 0.5, rho: 0.0, time_s: None }], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,delta,rho,time_s\n3,"));
        assert!(text.trim_end().ends_with(",inf"));
        let mut buf = Vec::new();
        write_xi_csv(&[XiRow { xi: 0.0, gap: 0.0 }], &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("xi,gap\n"));
    }

    #[test]
    fn reference_parse() {
        assert_eq!("analytic".parse::<Reference>().unwrap(), Reference::Analytic);
        assert_eq!("finest".parse::<Reference>().unwrap(), Reference::Finest);
        assert!("best".parse::<Reference>().is_err());
    }
}
