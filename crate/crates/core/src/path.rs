//! Car-on-a-path models: an arc-length parametrized path with a speed limit
//! and a bound `F_fr` on total acceleration magnitude.
//!
//! With `h = |v|²` and curvature `κ`, the acceleration bound becomes
//! `|h'| <= 2·√(F_fr² − κ²h²)`, which also forces `h <= F_fr/κ`.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Discretization;
use crate::model::{DynamicsModel, Endpoints};
use crate::profile::{Provenance, SpeedProfile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PathKind {
    Line {
        length: f64,
    },
    Arc {
        radius: f64,
        angle: f64,
    },
    /// `(s, κ)` samples, linearly interpolated.
    Table {
        table: Vec<[f64; 2]>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    #[serde(flatten)]
    pub kind: PathKind,
    /// Speed limit (m/s).
    pub v_max: f64,
    /// Acceleration magnitude limit (m/s²).
    pub f_fr: f64,
    /// Optional minimum speed (m/s); its square is the lower bound on `h`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoints: Option<Endpoints>,
}

fn positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::contract(format!("{name} must be positive and finite, got {value}")))
    }
}

impl PathSpec {
    pub fn line(length: f64, v_max: f64, f_fr: f64) -> Self {
        Self { kind: PathKind::Line { length }, v_max, f_fr, v_min: None, endpoints: None }
    }

    pub fn arc(radius: f64, angle: f64, v_max: f64, f_fr: f64) -> Self {
        Self { kind: PathKind::Arc { radius, angle }, v_max, f_fr, v_min: None, endpoints: None }
    }

    pub fn table(table: Vec<[f64; 2]>, v_max: f64, f_fr: f64) -> Self {
        Self { kind: PathKind::Table { table }, v_max, f_fr, v_min: None, endpoints: None }
    }

    pub fn with_endpoints(mut self, endpoints: Endpoints) -> Self {
        self.endpoints = Some(endpoints);
        self
    }

    pub fn with_v_min(mut self, v_min: f64) -> Self {
        self.v_min = Some(v_min);
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: PathSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        positive("v_max", self.v_max)?;
        positive("f_fr", self.f_fr)?;
        if let Some(v_min) = self.v_min {
            if !(v_min >= 0.0 && v_min.is_finite()) {
                return Err(Error::contract(format!("v_min must be >= 0, got {v_min}")));
            }
        }
        self.endpoints().validate()?;
        match &self.kind {
            PathKind::Line { length } => positive("length", *length),
            PathKind::Arc { radius, angle } => {
                positive("radius", *radius)?;
                positive("angle", *angle)
            }
            PathKind::Table { table } => {
                if table.len() < 2 {
                    return Err(Error::contract("curvature table needs at least 2 samples"));
                }
                for (i, [s, k]) in table.iter().enumerate() {
                    if !s.is_finite() || !(*k >= 0.0 && k.is_finite()) {
                        return Err(Error::contract(format!("table row {i}: ({s}, {k}) is invalid")));
                    }
                }
                if let Some(i) = table.windows(2).position(|w| w[1][0] <= w[0][0]) {
                    return Err(Error::contract(format!(
                        "table positions must be strictly increasing at row {}",
                        i + 1
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn endpoints(&self) -> Endpoints {
        self.endpoints.unwrap_or_default()
    }

    /// The arc-length interval `[a, b]` covered by the path.
    pub fn domain(&self) -> (f64, f64) {
        match &self.kind {
            PathKind::Line { length } => (0.0, *length),
            PathKind::Arc { radius, angle } => (0.0, radius * angle),
            PathKind::Table { table } => (table[0][0], table[table.len() - 1][0]),
        }
    }

    pub fn length(&self) -> f64 {
        let (a, b) = self.domain();
        b - a
    }

    /// Uniform grid with `size` points over the path.
    pub fn uniform_grid(&self, size: usize) -> Result<Discretization> {
        let (a, b) = self.domain();
        Discretization::uniform(a, b, size)
    }

    /// Curvature `|γ''(s)|` at arc length `s`.
    pub fn curvature(&self, s: f64) -> Result<f64> {
        let (a, b) = self.domain();
        if !(s >= a && s <= b) {
            return Err(Error::contract(format!("s={s} lies outside [{a}, {b}]")));
        }
        Ok(self.curvature_clamped(s))
    }

    fn curvature_clamped(&self, s: f64) -> f64 {
        match &self.kind {
            PathKind::Line { .. } => 0.0,
            PathKind::Arc { radius, .. } => 1.0 / radius,
            PathKind::Table { table } => {
                if s <= table[0][0] {
                    return table[0][1];
                }
                let last = table.len() - 1;
                if s >= table[last][0] {
                    return table[last][1];
                }
                let i = table.partition_point(|row| row[0] <= s) - 1;
                let [s0, k0] = table[i];
                let [s1, k1] = table[i + 1];
                k0 + (k1 - k0) * (s - s0) / (s1 - s0)
            }
        }
    }

    /// `B_u(s) = min(v_max², F_fr/κ(s))`.
    pub fn upper_bound(&self, s: f64) -> f64 {
        let kappa = self.curvature_clamped(s);
        let speed_cap = self.v_max * self.v_max;
        if kappa > 0.0 {
            speed_cap.min(self.f_fr / kappa)
        } else {
            speed_cap
        }
    }

    pub fn lower_bound(&self) -> f64 {
        self.v_min.map_or(0.0, |v| v * v)
    }

    /// Slope bounds `±2·√(F_fr² − κ²h²)` (radicand clamped at zero), value
    /// bounds `[v_min², min(v_max², F_fr/κ)]` and slope cap `2·F_fr`.
    pub fn build_model(&self) -> Result<DynamicsModel> {
        self.validate()?;
        let path = Arc::new(self.clone());
        let f_fr = self.f_fr;
        let slope = {
            let path = Arc::clone(&path);
            move |s: f64, h: f64| {
                let kappa = path.curvature_clamped(s);
                let kh = kappa * h;
                2.0 * (f_fr * f_fr - kh * kh).max(0.0).sqrt()
            }
        };
        let fplus = slope.clone();
        let fminus = move |s, h| -slope(s, h);
        let upper = {
            let path = Arc::clone(&path);
            move |s| path.upper_bound(s)
        };
        let lower = self.lower_bound();
        DynamicsModel::new(fplus, fminus, upper, move |_| lower, 2.0 * f_fr)
    }

    /// Closed-form optimal profile for straight lines (any endpoint caps) and
    /// arcs whose endpoint caps do not bind.
    pub fn analytic_optimum(&self, grid: &Discretization) -> Result<SpeedProfile> {
        self.check_analytic_support()?;
        let profile = SpeedProfile::from_fn(grid.clone(), Provenance::Analytic, |s| self.analytic_value(s));
        let floor = self.lower_bound();
        if let Some(i) = profile.values().iter().position(|&h| h < floor) {
            return Err(Error::Unsupported(format!(
                "analytic optimum drops below the minimum speed at grid index {i}"
            )));
        }
        Ok(profile)
    }

    /// Exact traversal time of the analytic optimum.
    pub fn analytic_time(&self) -> Result<f64> {
        self.check_analytic_support()?;
        match &self.kind {
            PathKind::Arc { .. } => Ok(self.length() / self.analytic_value(0.0).sqrt()),
            PathKind::Line { length } => {
                // The optimum is the lower envelope of three lines in s, so it
                // is piecewise linear with kinks only where two of them cross.
                let (ramp, cap, brake) = self.line_pieces();
                let two_f = 2.0 * self.f_fr;
                let mut knots = vec![0.0, *length];
                knots.push((cap - ramp) / two_f);
                knots.push(length - (cap - brake) / two_f);
                knots.push((brake - ramp + two_f * length) / (2.0 * two_f));
                knots.retain(|s| s.is_finite() && *s >= 0.0 && *s <= *length);
                knots.sort_by(f64::total_cmp);
                knots.dedup();
                let mut total = 0.0;
                for (i, w) in knots.windows(2).enumerate() {
                    let (h0, h1) = (self.analytic_value(w[0]), self.analytic_value(w[1]));
                    if h0 == 0.0 && h1 == 0.0 {
                        return Err(Error::Diverged { segment: i });
                    }
                    total += 2.0 * (w[1] - w[0]) / (h0.sqrt() + h1.sqrt());
                }
                Ok(total)
            }
            PathKind::Table { .. } => unreachable!("rejected by check_analytic_support"),
        }
    }

    fn check_analytic_support(&self) -> Result<()> {
        self.validate()?;
        match &self.kind {
            PathKind::Line { .. } => Ok(()),
            PathKind::Arc { .. } => {
                let steady = self.upper_bound(0.0);
                let ends = self.endpoints();
                if ends.start.is_some_and(|h| h < steady) || ends.end.is_some_and(|h| h < steady) {
                    Err(Error::Unsupported("arc with binding endpoint speeds".into()))
                } else {
                    Ok(())
                }
            }
            PathKind::Table { .. } => Err(Error::Unsupported("curvature tables have no closed-form optimum".into())),
        }
    }

    /// Start ramp intercept, speed cap and end ramp intercept of a straight line.
    fn line_pieces(&self) -> (f64, f64, f64) {
        let ends = self.endpoints();
        (ends.start.unwrap_or(f64::INFINITY), self.v_max * self.v_max, ends.end.unwrap_or(f64::INFINITY))
    }

    fn analytic_value(&self, s: f64) -> f64 {
        match &self.kind {
            PathKind::Line { length } => {
                let (ramp, cap, brake) = self.line_pieces();
                let two_f = 2.0 * self.f_fr;
                (ramp + two_f * s).min(brake + two_f * (length - s)).min(cap)
            }
            PathKind::Arc { .. } => self.upper_bound(s),
            PathKind::Table { .. } => f64::NAN,
        }
    }
}
