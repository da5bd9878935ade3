//! Named test instances and a generator of random curvature-table paths.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::Endpoints;
use crate::path::PathSpec;

/// 1 m straight line, rest to rest, `F_fr = 1`, `v_max = 10`.
pub fn line() -> PathSpec {
    PathSpec::line(1.0, 10.0, 1.0).with_endpoints(Endpoints::rest_to_rest())
}

/// Full unit circle with free endpoints, `F_fr = 1`, `v_max = 10`.
pub fn circle() -> PathSpec {
    PathSpec::arc(1.0, TAU, 10.0, 1.0)
}

/// 10 m line where the speed limit cuts the peak (`v_max² < F_fr·S`).
pub fn trapezoid() -> PathSpec {
    PathSpec::line(10.0, 2.0, 1.0).with_endpoints(Endpoints::rest_to_rest())
}

/// Straight, left bend, right bend, straight; rest to rest.
pub fn chicane() -> PathSpec {
    PathSpec::table(
        vec![
            [0.0, 0.0],
            [8.0, 0.0],
            [10.0, 0.25],
            [14.0, 0.25],
            [16.0, 0.0],
            [18.0, 0.2],
            [22.0, 0.2],
            [24.0, 0.0],
            [30.0, 0.0],
        ],
        6.0,
        2.0,
    )
    .with_endpoints(Endpoints::rest_to_rest())
}

/// Half turn of radius 5 m entered from rest, leaving at up to 1 m/s.
pub fn hairpin() -> PathSpec {
    PathSpec::arc(5.0, PI, 8.0, 1.5).with_endpoints(Endpoints { start: Some(0.0), end: Some(1.0) })
}

/// All bundled instances by name; the same set ships as JSON under `instances/`.
pub fn bundled() -> Vec<(&'static str, PathSpec)> {
    vec![
        ("line", line()),
        ("circle", circle()),
        ("trapezoid", trapezoid()),
        ("chicane", chicane()),
        ("hairpin", hairpin()),
    ]
}

/// Random curvature-table path: 2–10 knots over 5–40 m, curvature up to
/// 0.4 1/m with some straight stretches, random limits and endpoint caps.
pub fn random_table(seed: u64) -> PathSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let length: f64 = rng.gen_range(5.0..40.0);
    let interior = rng.gen_range(0..=8);
    let mut knots: Vec<f64> = (0..interior).map(|_| rng.gen_range(0.0..length)).collect();
    knots.push(0.0);
    knots.push(length);
    knots.sort_by(f64::total_cmp);
    knots.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
    let table = knots
        .into_iter()
        .map(|s| {
            let kappa = if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..0.4) };
            [s, kappa]
        })
        .collect();
    let v_max = rng.gen_range(2.0..15.0);
    let f_fr = rng.gen_range(0.5..5.0);
    let cap = |rng: &mut ChaCha8Rng| match rng.gen_range(0..3) {
        0 => None,
        1 => Some(0.0),
        _ => Some(rng.gen_range(0.0..v_max * v_max)),
    };
    let endpoints = Endpoints { start: cap(&mut rng), end: cap(&mut rng) };
    PathSpec::table(table, v_max, f_fr).with_endpoints(endpoints)
}
