//! Traversal time and time sampling of squared-speed profiles.
//!
//! Between grid points `h` is taken to be linear in `s`, so each segment is
//! traversed at constant acceleration and every quantity here has a closed
//! form.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::profile::SpeedProfile;

fn check_nonnegative(profile: &SpeedProfile) -> Result<()> {
    if let Some(i) = profile.values().iter().position(|&h| !(h >= 0.0)) {
        return Err(Error::contract(format!("squared speed at index {i} is negative ({})", profile.values()[i])));
    }
    Ok(())
}

/// Time to traverse one segment with squared speeds `h0` and `h1` at its ends.
fn segment_time(ds: f64, h0: f64, h1: f64) -> f64 {
    2.0 * ds / (h0.sqrt() + h1.sqrt())
}

/// Cumulative arrival times at each grid point, starting at 0.
pub fn arrival_times(profile: &SpeedProfile) -> Result<Vec<f64>> {
    check_nonnegative(profile)?;
    let pts = profile.grid().points();
    let h = profile.values();
    let mut times = Vec::with_capacity(h.len());
    let mut t = 0.0;
    times.push(t);
    for i in 0..h.len() - 1 {
        if h[i] == 0.0 && h[i + 1] == 0.0 {
            return Err(Error::Diverged { segment: i });
        }
        t += segment_time(pts[i + 1] - pts[i], h[i], h[i + 1]);
        times.push(t);
    }
    Ok(times)
}

/// `∫ ds / √h(s)` for the piecewise-linear interpolant of `profile`.
///
/// A segment whose two ends are both at rest makes the integral infinite and
/// is reported as [`Error::Diverged`].
pub fn traversal_time(profile: &SpeedProfile) -> Result<f64> {
    arrival_times(profile).map(|t| t[t.len() - 1])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub s: f64,
    pub v: f64,
}

/// Samples `s(t)` and speed at `t = 0, dt, 2·dt, ...` plus the final instant.
pub fn sample_trajectory(profile: &SpeedProfile, dt: f64) -> Result<Vec<TrajectorySample>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::contract(format!("dt must be positive, got {dt}")));
    }
    let times = arrival_times(profile)?;
    let pts = profile.grid().points();
    let h = profile.values();
    let total = times[times.len() - 1];
    let last = pts.len() - 1;

    let mut samples = Vec::new();
    let mut seg = 0;
    let mut k = 0u64;
    loop {
        let t = k as f64 * dt;
        // Drop a uniform sample that would collide with the final instant.
        if t >= total - 1e-12 * total.max(1.0) {
            break;
        }
        while seg + 1 < last && times[seg + 1] <= t {
            seg += 1;
        }
        let tau = t - times[seg];
        let ds = pts[seg + 1] - pts[seg];
        let v0 = h[seg].sqrt();
        // dh/ds is constant on the segment, so the acceleration is half of it.
        let accel = 0.5 * (h[seg + 1] - h[seg]) / ds;
        let offset = (v0 * tau + 0.5 * accel * tau * tau).clamp(0.0, ds);
        let s = pts[seg] + offset;
        let v = (h[seg] + (h[seg + 1] - h[seg]) * offset / ds).max(0.0).sqrt();
        samples.push(TrajectorySample { t, s, v });
        k += 1;
    }
    samples.push(TrajectorySample { t: total, s: pts[last], v: h[last].sqrt() });
    Ok(samples)
}

/// Writes `t,s,v` rows with 17 significant digits.
pub fn write_trajectory_csv<W: Write>(samples: &[TrajectorySample], writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["t", "s", "v"])?;
    for p in samples {
        out.write_record([format!("{:.16e}", p.t), format!("{:.16e}", p.s), format!("{:.16e}", p.v)])?;
    }
    out.flush()?;
    Ok(())
}
