use proptest::prelude::*;

use toppkit::harness::{self, Reference};
use toppkit::instances;
use toppkit::oracle;
use toppkit::retime::{sample_trajectory, traversal_time};
use toppkit::{check_admissible, profile_error, solve_default, Discretization, PathSpec, Provenance, SpeedProfile};

fn values(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..5.0f64, len)
}

fn profile(grid: &Discretization, values: Vec<f64>) -> SpeedProfile {
    SpeedProfile::new(grid.clone(), values, Provenance::Synthetic { seed: None }).unwrap()
}

fn solve(spec: &PathSpec, n: usize) -> SpeedProfile {
    let grid = spec.uniform_grid(n).unwrap();
    solve_default(&grid, &spec.build_model().unwrap(), spec.endpoints()).unwrap().into_profile().unwrap()
}

/// Whether `h + f⁺(s, h)·ds` is non-decreasing in `h` on `[bl, bu]` at every
/// grid point. For the car model the derivative is smallest at `h = bu`.
fn forward_map_monotone(spec: &PathSpec, grid: &Discretization) -> bool {
    let model = spec.build_model().unwrap();
    let f = spec.f_fr;
    (0..grid.segments()).all(|i| {
        let s = grid.points()[i];
        let k = spec.curvature(s).unwrap();
        let h = model.upper(s);
        2.0 * k * k * h * grid.step(i) <= (f * f - k * k * h * h).max(0.0).sqrt()
    })
}

fn relaxation_monotone(spec: &PathSpec, grid: &Discretization, xi1: f64, xi2: f64) -> Result<(), TestCaseError> {
    let model = spec.build_model().unwrap();
    let lower = solve_default(grid, &model.relax(xi1).unwrap(), spec.endpoints()).unwrap().into_profile().unwrap();
    let upper = solve_default(grid, &model.relax(xi2).unwrap(), spec.endpoints()).unwrap().into_profile().unwrap();
    for (a, b) in lower.values().iter().zip(upper.values()) {
        prop_assert!(*a <= b + model.default_tol(), "xi {} -> {}: {} > {}", xi1, xi2, a, b);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn relaxing_keeps_admissible(seed in 0u64..10_000, xi in 0.0..3.0f64) {
        let spec = instances::random_table(seed);
        let model = spec.build_model().unwrap();
        let grid = spec.uniform_grid(60).unwrap();
        let p = oracle::random_admissible(&grid, &spec, seed).unwrap();
        prop_assert!(check_admissible(&p, &model, 0.0).unwrap().is_admissible());
        let relaxed = model.relax(xi).unwrap();
        prop_assert!(check_admissible(&p, &relaxed, 0.0).unwrap().is_admissible());
    }

    #[test]
    fn profile_error_is_a_metric(a in values(12), b in values(12), c in values(12)) {
        let grid = Discretization::uniform(0.0, 1.0, 12).unwrap();
        let (a, b, c) = (profile(&grid, a), profile(&grid, b), profile(&grid, c));
        let ab = profile_error(&a, &b).unwrap();
        prop_assert_eq!(ab, profile_error(&b, &a).unwrap());
        prop_assert_eq!(profile_error(&a, &a).unwrap(), 0.0);
        prop_assert!(ab >= 0.0);
        prop_assert!(profile_error(&a, &c).unwrap() <= ab + profile_error(&b, &c).unwrap() + 1e-15);
        if ab == 0.0 {
            prop_assert_eq!(a.values(), b.values());
        }
    }

    #[test]
    fn convex_combinations_stay_admissible(seed in 0u64..10_000) {
        let spec = instances::random_table(seed);
        let model = spec.build_model().unwrap();
        let grid = spec.uniform_grid(80).unwrap();
        let p = oracle::random_admissible(&grid, &spec, 2 * seed).unwrap();
        let q = oracle::random_admissible(&grid, &spec, 2 * seed + 1).unwrap();
        for theta in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let mix = p.blend(&q, theta).unwrap();
            let verdict = check_admissible(&mix, &model, model.default_tol()).unwrap();
            prop_assert!(verdict.is_admissible(), "theta {}: {:?}", theta, verdict.violation);
        }
    }

    #[test]
    fn car_model_shape(seed in 0u64..10_000, s in 0.0..1.0f64, u in 0.0..1.0f64) {
        let spec = instances::random_table(seed);
        let model = spec.build_model().unwrap();
        let (a, b) = spec.domain();
        let s = a + s * (b - a);
        let (lo, hi) = (model.lower(s), model.upper(s));
        prop_assert!(hi >= lo && lo >= 0.0);
        let h = lo + u * (hi - lo);
        prop_assert_eq!(model.fplus(s, h), -model.fminus(s, h));
        prop_assert!(model.fplus(s, h) >= model.fminus(s, h));
        prop_assert!(model.fplus(s, h).abs() <= model.slope_cap());

        // second difference in h: f+ concave, f- convex
        let d = 1e-3 * (hi - lo).max(1e-6);
        if h - d >= lo && h + d <= hi {
            let second = model.fplus(s, h + d) - 2.0 * model.fplus(s, h) + model.fplus(s, h - d);
            prop_assert!(second <= 1e-9);
            let second = model.fminus(s, h + d) - 2.0 * model.fminus(s, h) + model.fminus(s, h - d);
            prop_assert!(second >= -1e-9);
        }
    }

    #[test]
    fn solver_dominates_random_candidates(seed in 0u64..10_000) {
        let spec = instances::random_table(seed);
        let model = spec.build_model().unwrap();
        let grid = spec.uniform_grid(100).unwrap();
        let best = solve(&spec, 100);
        let candidate = oracle::random_admissible(&grid, &spec, seed).unwrap();
        let tol = model.default_tol();
        for (c, b) in candidate.values().iter().zip(best.values()) {
            prop_assert!(*c <= b + tol);
        }
        // a pointwise-larger profile is never slower
        let (tb, tc) = (traversal_time(&best), traversal_time(&candidate));
        if let (Ok(tb), Ok(tc)) = (tb, tc) {
            prop_assert!(tb <= tc * (1.0 + 1e-12));
        }
    }

    #[test]
    fn relaxation_only_raises_solution(seed in 0u64..10_000, xi1 in 0.0..1.0f64, dxi in 0.0..1.0f64) {
        let spec = instances::random_table(seed);
        let grid = spec.uniform_grid(80).unwrap();
        prop_assume!(forward_map_monotone(&spec, &grid));
        relaxation_monotone(&spec, &grid, xi1, xi1 + dxi)?;
    }

    #[test]
    fn trajectory_respects_speed_cap(seed in 0u64..10_000, dt in 0.01..0.5f64) {
        let spec = instances::random_table(seed);
        let model = spec.build_model().unwrap();
        let best = solve(&spec, 60);
        let Ok(samples) = sample_trajectory(&best, dt) else { return Ok(()); };
        let v_cap = best.grid().points().iter().fold(0.0_f64, |m, &s| m.max(model.upper(s))).sqrt();
        for w in samples.windows(2) {
            prop_assert!(w[1].t > w[0].t);
            prop_assert!(w[1].s >= w[0].s - 1e-12);
        }
        prop_assert!(samples.iter().all(|x| x.v <= v_cap + 1e-9 && x.v >= 0.0));
        let last = samples[samples.len() - 1];
        prop_assert!((last.s - best.grid().end()).abs() <= 1e-9 * best.grid().end().max(1.0));
    }
}

#[test]
fn model_invariants_on_dense_samples() {
    for (name, spec) in instances::bundled() {
        let model = spec.build_model().unwrap();
        let (a, b) = spec.domain();
        assert_eq!(model.spot_check(a, b, 100, 100), None, "{name}");
    }
}

#[test]
fn midpoint_refinement_agrees_on_shared_points() {
    // halving the spacing keeps every coarse point; the refined solution stays
    // within the oracle bound of the coarse one there
    for (name, spec) in instances::bundled() {
        let model = spec.build_model().unwrap();
        let coarse = solve(&spec, 101);
        let fine = solve(&spec, 201);
        let restricted = SpeedProfile::new(
            coarse.grid().clone(),
            fine.values().iter().copied().step_by(2).collect(),
            fine.provenance(),
        )
        .unwrap();
        let bound = 2.0 * model.slope_cap() * coarse.grid().resolution();
        let rho = profile_error(&restricted, &coarse).unwrap();
        assert!(rho <= bound, "{name}: {rho} > {bound}");
    }
}

#[test]
fn solving_is_deterministic() {
    let spec = instances::chicane();
    let grid = spec.uniform_grid(500).unwrap();
    let model = spec.build_model().unwrap();
    let a = solve_default(&grid, &model, spec.endpoints()).unwrap();
    let b = solve_default(&grid, &model, spec.endpoints()).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    let r1 = oracle::random_admissible(&grid, &spec, 42).unwrap();
    let r2 = oracle::random_admissible(&grid, &spec, 42).unwrap();
    assert_eq!(r1.values(), r2.values());
}

#[test]
fn feasible_report_invariants() {
    for (name, spec) in instances::bundled() {
        let grid = spec.uniform_grid(300).unwrap();
        let report = solve_default(&grid, &spec.build_model().unwrap(), spec.endpoints()).unwrap();
        let profile = report.profile.as_ref().unwrap();
        assert_eq!(report.forward, profile.values(), "{name}");
        assert!(report.forward.iter().zip(&report.backward).all(|(f, b)| f <= b), "{name}");
    }
}

#[test]
fn oracle_refines_with_more_levels() {
    for (name, spec) in instances::bundled() {
        let model = spec.build_model().unwrap();
        let grid = spec.uniform_grid(60).unwrap();
        let fine = oracle::dp_optimum(&grid, &model, 2048, spec.endpoints()).unwrap();
        for levels in [64, 128, 256] {
            let coarse = oracle::dp_optimum(&grid, &model, levels, spec.endpoints()).unwrap();
            let spacing = oracle::Lattice::new(&grid, &model, levels).unwrap().spacing();
            let gap = profile_error(&coarse, &fine).unwrap();
            assert!(gap <= spacing, "{name} levels {levels}: {gap} > {spacing}");
        }
    }
}

#[test]
fn relaxation_monotone_on_bundled_instances() {
    for (_, spec) in instances::bundled() {
        let grid = spec.uniform_grid(200).unwrap();
        let xis = [0.0, 0.01, 0.1, 0.5, 1.0];
        for w in xis.windows(2) {
            relaxation_monotone(&spec, &grid, w[0], w[1]).unwrap();
        }
    }
}

#[test]
fn greedy_forward_pass_is_not_monotone_in_relaxation_near_curvature_limit() {
    // Where the curvature bound binds, a lower speed at one point can reach a
    // higher speed at the next, so widening the slope bounds can lower the
    // greedy solution. Pinned instance and the size of the effect.
    let spec = instances::random_table(9734);
    let grid = spec.uniform_grid(80).unwrap();
    assert!(!forward_map_monotone(&spec, &grid));
    let model = spec.build_model().unwrap();
    let base = solve_default(&grid, &model, spec.endpoints()).unwrap().into_profile().unwrap();
    let relaxed = solve_default(&grid, &model.relax(0.1).unwrap(), spec.endpoints()).unwrap().into_profile().unwrap();
    let deficit = base.values().iter().zip(relaxed.values()).fold(0.0_f64, |m, (b, r)| m.max(b - r));
    assert!(deficit > 1e-2 && deficit < 0.1, "{deficit}");
    // some admissible sequence is faster at index 17, and it is slower
    // elsewhere: the per-index maxima are not jointly admissible
    let brute = oracle::dp_optimum(&grid, &model, 1024, spec.endpoints()).unwrap();
    assert!(brute.values()[17] > base.values()[17] + 0.1);
    assert!(!check_admissible(&brute, &model, model.default_tol()).unwrap().is_admissible());
}

#[test]
fn line_sweep_is_exact_at_grid_points() {
    let spec = instances::line();
    let tol = spec.build_model().unwrap().default_tol();
    let rows = harness::convergence_sweep(&spec, &[10, 100, 1000], Reference::Analytic).unwrap();
    assert!(rows.iter().all(|r| r.rho <= tol), "{rows:?}");
    let errors: Vec<f64> = rows.iter().map(|r| (r.time_s.unwrap() - 2.0).abs()).collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
}

#[test]
fn finest_reference_on_table() {
    let rows = harness::convergence_sweep(&instances::chicane(), &[11, 31, 61, 121], Reference::Finest).unwrap();
    assert!(rows.windows(2).all(|w| w[1].delta < w[0].delta));
    assert!(rows.iter().all(|r| r.rho.is_finite() && r.time_s.is_some()));
}
