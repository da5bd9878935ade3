//! The constraint model of a path parametrization problem: slope bounds
//! `f⁻(s, h) <= dh/ds <= f⁺(s, h)` and value bounds `B_l(s) <= h <= B_u(s)`
//! on the squared speed `h`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type SlopeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type BoundFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Slope and value bounds on squared speed, with an optional relaxation `ξ`
/// that widens both slope bounds.
///
/// Cloning is cheap; the evaluators are shared.
#[derive(Clone)]
pub struct DynamicsModel {
    fplus: SlopeFn,
    fminus: SlopeFn,
    upper: BoundFn,
    lower: BoundFn,
    slope_cap: f64,
    xi: f64,
}

impl DynamicsModel {
    /// `slope_cap` must bound `|f⁺|` and `|f⁻|` on the feasible region.
    pub fn new<P, M, U, L>(fplus: P, fminus: M, upper: U, lower: L, slope_cap: f64) -> Result<Self>
    where
        P: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        M: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        U: Fn(f64) -> f64 + Send + Sync + 'static,
        L: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(slope_cap.is_finite() && slope_cap > 0.0) {
            return Err(Error::contract(format!("slope cap must be positive, got {slope_cap}")));
        }
        Ok(Self {
            fplus: Arc::new(fplus),
            fminus: Arc::new(fminus),
            upper: Arc::new(upper),
            lower: Arc::new(lower),
            slope_cap,
            xi: 0.0,
        })
    }

    /// Model with constant slope bounds and constant value bounds.
    pub fn constant(fplus: f64, fminus: f64, upper: f64, lower: f64) -> Result<Self> {
        let cap = fplus.abs().max(fminus.abs()).max(f64::MIN_POSITIVE);
        Self::new(move |_, _| fplus, move |_, _| fminus, move |_| upper, move |_| lower, cap)
    }

    pub fn fplus(&self, s: f64, h: f64) -> f64 {
        (self.fplus)(s, h) + self.xi
    }

    pub fn fminus(&self, s: f64, h: f64) -> f64 {
        (self.fminus)(s, h) - self.xi
    }

    pub fn upper(&self, s: f64) -> f64 {
        (self.upper)(s)
    }

    pub fn lower(&self, s: f64) -> f64 {
        (self.lower)(s)
    }

    pub fn slope_cap(&self) -> f64 {
        self.slope_cap + self.xi
    }

    /// Accumulated relaxation level.
    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// Widen both slope bounds by `xi`; value bounds are untouched.
    pub fn relax(&self, xi: f64) -> Result<Self> {
        if !(xi >= 0.0 && xi.is_finite()) {
            return Err(Error::contract(format!("relaxation must be a finite value >= 0, got {xi}")));
        }
        let mut relaxed = self.clone();
        relaxed.xi += xi;
        Ok(relaxed)
    }

    /// Admissibility tolerance used when none is given: `1e-9 * max(1, B)`.
    pub fn default_tol(&self) -> f64 {
        1e-9 * self.slope_cap().max(1.0)
    }

    /// Samples `samples_s × samples_h` points of the region `[a, b] × [B_l, B_u]`
    /// and reports the first point that breaks a model invariant.
    pub fn spot_check(&self, a: f64, b: f64, samples_s: usize, samples_h: usize) -> Option<String> {
        let cap = self.slope_cap() * (1.0 + 1e-12);
        for i in 0..samples_s.max(1) {
            let s = if samples_s <= 1 { a } else { a + (b - a) * i as f64 / (samples_s - 1) as f64 };
            let (lo, hi) = (self.lower(s), self.upper(s));
            if !(hi >= lo && lo >= 0.0) {
                return Some(format!("bounds at s={s}: lower={lo}, upper={hi}"));
            }
            for j in 0..samples_h.max(1) {
                let h = if samples_h <= 1 { lo } else { lo + (hi - lo) * j as f64 / (samples_h - 1) as f64 };
                let (fp, fm) = (self.fplus(s, h), self.fminus(s, h));
                if fp < fm {
                    return Some(format!("f+ < f- at (s={s}, h={h}): {fp} < {fm}"));
                }
                if fp.abs() > cap || fm.abs() > cap {
                    return Some(format!("slope cap exceeded at (s={s}, h={h}): f+={fp}, f-={fm}"));
                }
            }
        }
        None
    }
}

impl fmt::Debug for DynamicsModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DynamicsModel")
            .field("slope_cap", &self.slope_cap)
            .field("xi", &self.xi)
            .finish_non_exhaustive()
    }
}

/// Optional squared-speed caps at the two ends of the path.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Endpoints {
    #[serde(default, rename = "start_h", skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, rename = "end_h", skip_serializing_if = "Option::is_none")]
    pub end: Option<f64>,
}

impl Endpoints {
    pub const FREE: Endpoints = Endpoints { start: None, end: None };

    pub fn rest_to_rest() -> Self {
        Self { start: Some(0.0), end: Some(0.0) }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("start_h", self.start), ("end_h", self.end)] {
            if let Some(v) = value {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::contract(format!("endpoint {name} must be finite and >= 0, got {v}")));
                }
            }
        }
        Ok(())
    }
}
