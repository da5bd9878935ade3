//! Discretizations of the path interval `[a, b]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A strictly increasing sequence of path positions `a = s_0 < ... < s_n = b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Discretization {
    points: Vec<f64>,
}

impl Discretization {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::contract(format!("a discretization needs at least 2 points, got {}", points.len())));
        }
        if let Some(bad) = points.iter().position(|s| !s.is_finite()) {
            return Err(Error::contract(format!("grid point {bad} is not finite")));
        }
        if let Some(i) = points.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::contract(format!(
                "grid points must be strictly increasing (s[{}]={} >= s[{}]={})",
                i,
                points[i],
                i + 1,
                points[i + 1]
            )));
        }
        Ok(Self { points })
    }

    /// Uniform grid with `size` points on `[a, b]`; both ends are hit exactly.
    pub fn uniform(a: f64, b: f64, size: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::contract(format!("grid size must be >= 2, got {size}")));
        }
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::contract(format!("invalid interval [{a}, {b}]")));
        }
        let segments = (size - 1) as f64;
        let points = (0..size).map(|i| if i == size - 1 { b } else { a + (b - a) * (i as f64) / segments }).collect();
        Self::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Number of points, `|D| = n + 1`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of segments `n`.
    pub fn segments(&self) -> usize {
        self.points.len() - 1
    }

    pub fn start(&self) -> f64 {
        self.points[0]
    }

    pub fn end(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// Length of segment `i`, `s_{i+1} - s_i`.
    pub fn step(&self, i: usize) -> f64 {
        self.points[i + 1] - self.points[i]
    }

    /// Largest gap between consecutive points.
    pub fn resolution(&self) -> f64 {
        self.points.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Every `stride`-th point, which must land on the last point.
    pub fn subsample(&self, stride: usize) -> Result<Self> {
        if stride == 0 || !self.segments().is_multiple_of(stride) {
            return Err(Error::Alignment(format!("stride {stride} does not divide {} segments", self.segments())));
        }
        Self::new(self.points.iter().copied().step_by(stride).collect())
    }
}

impl TryFrom<Vec<f64>> for Discretization {
    type Error = Error;

    fn try_from(points: Vec<f64>) -> Result<Self> {
        Self::new(points)
    }
}

impl From<Discretization> for Vec<f64> {
    fn from(grid: Discretization) -> Self {
        grid.points
    }
}
