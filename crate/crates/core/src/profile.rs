//! Squared-speed profiles on a grid, the discrete admissibility test, and
//! the sup-norm error between profiles.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Discretization;
use crate::model::DynamicsModel;

/// Where a profile came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Provenance {
    Solver,
    Oracle,
    Analytic,
    Synthetic { seed: Option<u64> },
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Solver => f.write_str("solver"),
            Provenance::Oracle => f.write_str("oracle"),
            Provenance::Analytic => f.write_str("analytic"),
            Provenance::Synthetic { seed: None } => f.write_str("synthetic"),
            Provenance::Synthetic { seed: Some(seed) } => write!(f, "synthetic:seed={seed}"),
        }
    }
}

impl FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "solver" => Ok(Provenance::Solver),
            "oracle" => Ok(Provenance::Oracle),
            "analytic" => Ok(Provenance::Analytic),
            "synthetic" => Ok(Provenance::Synthetic { seed: None }),
            other => other
                .strip_prefix("synthetic:seed=")
                .and_then(|seed| seed.parse().ok())
                .map(|seed| Provenance::Synthetic { seed: Some(seed) })
                .ok_or_else(|| Error::contract(format!("unknown provenance {other:?}"))),
        }
    }
}

impl From<Provenance> for String {
    fn from(p: Provenance) -> Self {
        p.to_string()
    }
}

impl TryFrom<String> for Provenance {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Squared-speed values `h_i` aligned with a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile")]
pub struct SpeedProfile {
    grid: Discretization,
    values: Vec<f64>,
    provenance: Provenance,
}

#[derive(Deserialize)]
struct RawProfile {
    grid: Discretization,
    values: Vec<f64>,
    provenance: Provenance,
}

impl TryFrom<RawProfile> for SpeedProfile {
    type Error = Error;

    fn try_from(raw: RawProfile) -> Result<Self> {
        SpeedProfile::new(raw.grid, raw.values, raw.provenance)
    }
}

impl SpeedProfile {
    pub fn new(grid: Discretization, values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::contract(format!(
                "profile has {} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|h| h.is_nan()) {
            return Err(Error::contract(format!("profile value {i} is NaN")));
        }
        Ok(Self { grid, values, provenance })
    }

    /// Samples `f(s)` at every grid point.
    pub fn from_fn(grid: Discretization, provenance: Provenance, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.points().iter().map(|&s| f(s)).collect();
        Self { grid, values, provenance }
    }

    pub fn grid(&self) -> &Discretization {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    /// Pointwise `theta * self + (1 - theta) * other` on a shared grid.
    pub fn blend(&self, other: &SpeedProfile, theta: f64) -> Result<SpeedProfile> {
        same_grid(self, other)?;
        let values = self.values.iter().zip(&other.values).map(|(p, q)| theta * p + (1.0 - theta) * q).collect();
        SpeedProfile::new(self.grid.clone(), values, Provenance::Synthetic { seed: None })
    }

    /// Squared speed at `s` by linear interpolation between grid points.
    pub fn interpolate(&self, s: f64) -> f64 {
        let pts = self.grid.points();
        if s <= pts[0] {
            return self.values[0];
        }
        let last = pts.len() - 1;
        if s >= pts[last] {
            return self.values[last];
        }
        let i = pts.partition_point(|&p| p <= s) - 1;
        let w = (s - pts[i]) / (pts[i + 1] - pts[i]);
        self.values[i] + w * (self.values[i + 1] - self.values[i])
    }

    /// Writes `s,h` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["s", "h"])?;
        for (s, h) in self.grid.points().iter().zip(&self.values) {
            out.write_record([format!("{s:.16e}"), format!("{h:.16e}")])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R, provenance: Provenance) -> Result<Self> {
        let mut input = csv::Reader::from_reader(reader);
        let headers = input.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "s" || &headers[1] != "h" {
            return Err(Error::contract(format!("expected header \"s,h\", got {headers:?}")));
        }
        let mut points = Vec::new();
        let mut values = Vec::new();
        for (row, record) in input.records().enumerate() {
            let record = record?;
            let field = |k: usize| -> Result<f64> {
                let raw = record.get(k).unwrap_or("").trim();
                raw.parse().map_err(|_| Error::contract(format!("row {}: {raw:?} is not a number", row + 2)))
            };
            points.push(field(0)?);
            values.push(field(1)?);
        }
        SpeedProfile::new(Discretization::new(points)?, values, provenance)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn same_grid(a: &SpeedProfile, b: &SpeedProfile) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::contract("profiles are defined on different grids"));
    }
    Ok(())
}

/// Which constraint an inadmissible profile breaks first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    Lower,
    Upper,
    SlopeBelowMin,
    SlopeAboveMax,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Constraint::Lower => "h below lower bound",
            Constraint::Upper => "h above upper bound",
            Constraint::SlopeBelowMin => "slope below f-",
            Constraint::SlopeAboveMax => "slope above f+",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub index: usize,
    pub constraint: Constraint,
    /// Offending value (a squared speed or a slope).
    pub value: f64,
    /// The bound it was compared against, before tolerance.
    pub bound: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "index {}: {} ({} vs {})", self.index, self.constraint, self.value, self.bound)
    }
}

/// Outcome of [`check_admissible`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Admissibility {
    pub violation: Option<Violation>,
}

impl Admissibility {
    pub fn is_admissible(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks value bounds at every grid point and left-evaluated slope bounds
/// on every segment, each widened by `tol`. Reports the first violation
/// in index order; at equal index, value bounds come before slopes.
pub fn check_admissible(profile: &SpeedProfile, model: &DynamicsModel, tol: f64) -> Result<Admissibility> {
    if profile.grid.len() != profile.values.len() {
        return Err(Error::contract("profile grid and values differ in length"));
    }
    if !(tol >= 0.0) {
        return Err(Error::contract(format!("tolerance must be >= 0, got {tol}")));
    }
    let pts = profile.grid.points();
    let h = &profile.values;
    let fail = |index, constraint, value, bound| {
        Ok(Admissibility { violation: Some(Violation { index, constraint, value, bound }) })
    };
    for i in 0..h.len() {
        let s = pts[i];
        let (lo, hi) = (model.lower(s), model.upper(s));
        if h[i] < lo - tol {
            return fail(i, Constraint::Lower, h[i], lo);
        }
        if h[i] > hi + tol {
            return fail(i, Constraint::Upper, h[i], hi);
        }
        if i + 1 < h.len() {
            let slope = (h[i + 1] - h[i]) / (pts[i + 1] - s);
            let (fm, fp) = (model.fminus(s, h[i]), model.fplus(s, h[i]));
            if slope < fm - tol {
                return fail(i, Constraint::SlopeBelowMin, slope, fm);
            }
            if slope > fp + tol {
                return fail(i, Constraint::SlopeAboveMax, slope, fp);
            }
        }
    }
    Ok(Admissibility { violation: None })
}

/// Largest pointwise deviation between two profiles on the same grid.
pub fn profile_error(candidate: &SpeedProfile, reference: &SpeedProfile) -> Result<f64> {
    same_grid(candidate, reference)?;
    Ok(candidate.values.iter().zip(&reference.values).map(|(c, r)| (c - r).abs()).fold(0.0, f64::max))
}
