use plad::fields::{discretize, DensityField, Grid, Profile};
use plad::regime::RegimeParams;
use plad::solver::{cfl_dt, run, step, RunStatus, SolverConfig};
use plad::{Field, Field32};
use proptest::prelude::*;

fn config(d: usize, p: f64, alpha: f64, lambda: f64, n: usize, half_width: f64, t_end: f64) -> SolverConfig<f64> {
    let params = RegimeParams::validate(d as u32, p, alpha, 1.0).unwrap();
    let params = if lambda == 0.0 {
        params.p_heat()
    } else {
        params.with_lambda(lambda).unwrap()
    };
    let grid = Grid::new(d, half_width, n).unwrap();
    let mut cfg = SolverConfig::new(params, grid, t_end).unwrap();
    cfg.diag_every = 100;
    cfg
}

fn two_bumps(grid: &Grid<f64>, gap: f64) -> Field {
    let at = |x: f64| Profile::gaussian(&[x, 0.0], 0.4, 1.0);
    let mix = Profile::Mixture {
        components: vec![at(-gap), at(gap)],
    };
    discretize(&mix, grid).unwrap()
}

/// Distance between the centroids of the `x < 0` and `x > 0` halves.
fn half_centroid_gap(f: &Field) -> f64 {
    let g = f.grid();
    let (mut left, mut right) = ([0.0, 0.0], [0.0, 0.0]);
    for (i, &v) in f.values().iter().enumerate() {
        let x = g.center(i)[0];
        let side = if x < 0.0 { &mut left } else { &mut right };
        side[0] += v;
        side[1] += v * x;
    }
    right[1] / right[0] - left[1] / left[0]
}

#[test]
fn bumps_attract() {
    for (d, p, alpha, n, t_end) in [(1, 1.4, 0.8, 128, 2e-3), (2, 5.0 / 3.0, 1.0, 48, 2e-2)] {
        let cfg = config(d, p, alpha, 2.0, n, 6.0, t_end);
        let heat = config(d, p, alpha, 0.0, n, 6.0, t_end);
        let start = two_bumps(&cfg.grid, 1.5);
        let pulled = run(&start, &cfg).unwrap().final_field;
        let spread = run(&start, &heat).unwrap().final_field;
        let (g0, g1, g_heat) = (half_centroid_gap(&start), half_centroid_gap(&pulled), half_centroid_gap(&spread));
        assert!(g1 < g0, "d={d}: {g0} -> {g1}");
        assert!(g1 < g_heat, "d={d}: attraction {g1} vs diffusion only {g_heat}");
    }
}

#[test]
fn centered_bump_keeps_its_centroid() {
    let cfg = config(2, 5.0 / 3.0, 1.0, 1.0, 64, 6.0, 2e-2);
    let start = discretize(&Profile::gaussian(&[0.0, 0.0], 0.7, 3.0), &cfg.grid).unwrap();
    let end = run(&start, &cfg).unwrap().final_field;
    let [cx, cy] = end.centroid();
    assert!(cx.abs() <= 1e-10 && cy.abs() <= 1e-10, "centroid ({cx}, {cy})");
}

#[test]
fn even_data_stays_even() {
    let cfg = config(1, 1.4, 0.8, 1.0, 200, 6.0, 2e-3);
    let start = two_bumps(&cfg.grid, 1.2);
    let end = run(&start, &cfg).unwrap().final_field;
    let mirror = end.reflected();
    let gap = end
        .values()
        .iter()
        .zip(mirror.values())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(gap <= 1e-10 * end.max(), "asymmetry {gap}");
}

#[test]
fn kernel_refinement_is_cauchy() {
    // ε = 2dx shrinks with the grid; terminal diagnostics should settle
    let terminal = |n: usize| {
        let cfg = config(1, 1.4, 0.8, 0.5, n, 6.0, 1e-3);
        let start = discretize(&Profile::gaussian(&[0.0], 0.8, 1.0), &cfg.grid).unwrap();
        let traj = run(&start, &cfg).unwrap();
        assert_eq!(traj.status, RunStatus::ReachedTEnd);
        let last = *traj.rows.last().unwrap();
        [last.entropy, last.interaction_energy, last.moment_k]
    };
    let (a, b, c) = (terminal(64), terminal(128), terminal(256));
    for i in 0..3 {
        let (coarse, fine) = ((a[i] - b[i]).abs(), (b[i] - c[i]).abs());
        assert!(fine < coarse, "diagnostic {i}: {coarse} then {fine}");
    }
}

#[test]
fn p_heat_entropy_never_increases() {
    for (d, p, alpha, n) in [(1, 1.2, 0.9, 96), (1, 1.45, 0.7, 96), (2, 1.5, 1.0, 32), (2, 1.95, 1.0, 32)] {
        let mut cfg = config(d, p, alpha, 0.0, n, 6.0, 2e-3);
        cfg.diag_every = 1;
        let start = discretize(&Profile::gaussian(&[0.3, -0.2], 0.6, 1.0), &cfg.grid).unwrap();
        let traj = run(&start, &cfg).unwrap();
        for w in traj.rows.windows(2) {
            assert!(
                w[1].entropy <= w[0].entropy + 1e-12 * w[0].entropy.abs().max(1.0),
                "d={d} p={p}: {} -> {} at t = {}",
                w[0].entropy,
                w[1].entropy,
                w[1].t
            );
        }
    }
}

#[test]
fn single_precision_run() {
    let params = RegimeParams::validate(1, 1.4f32, 0.8, 0.5).unwrap();
    let grid = Grid::new(1, 6.0f32, 64).unwrap();
    let mut cfg = SolverConfig::new(params, grid, 5e-4).unwrap();
    cfg.diag_every = 50;
    let start: Field32 = discretize(&Profile::gaussian(&[0.0], 0.8, 1.0), &grid).unwrap();
    let traj = run(&start, &cfg).unwrap();
    assert_eq!(traj.status, RunStatus::ReachedTEnd);
    // f32 rounding accumulates step by step
    assert!(traj.mass_drift() < 1e-4, "drift {}", traj.mass_drift());

    let wide = run(&start.cast::<f64>(), &config(1, 1.4, 0.8, 0.5, 64, 6.0, 5e-4)).unwrap();
    let gap = traj
        .final_field
        .values()
        .iter()
        .zip(wide.final_field.values())
        .fold(0.0f64, |m, (a, b)| m.max((f64::from(*a) - b).abs()));
    assert!(gap < 1e-3 * wide.final_field.max(), "f32 vs f64 gap {gap}");
}

fn mixture(d: usize, bumps: &[(f64, f64, f64, f64)]) -> Profile {
    Profile::Mixture {
        components: bumps
            .iter()
            .map(|&(x, y, sigma, mass)| Profile::gaussian(&[x, y][..d.max(1)], sigma, mass))
            .collect(),
    }
}

fn bump() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (-2.0..2.0, -2.0..2.0, 0.3..1.0, 0.1..2.0)
}

proptest! {
    #![proptest_config(ProptestConfig {
        failure_persistence: None,
        ..ProptestConfig::with_cases(48)
    })]

    #[test]
    fn step_conserves_mass_and_sign(
        d in 1usize..=2,
        bumps in prop::collection::vec(bump(), 1..4),
        p_frac in 0.05..0.95f64,
        lambda in 0.0..2.0f64,
    ) {
        let (lo, hi) = if d == 1 { (1.0, 1.5) } else { (4.0 / 3.0, 2.0) };
        let p = lo + p_frac * (hi - lo);
        let n = if d == 1 { 96 } else { 24 };
        let alpha = if d == 1 { 1.0 - (p - 1.0) } else { 1.0 };
        let cfg = config(d, p, alpha, lambda, n, 6.0, 1.0);
        let field = discretize(&mixture(d, &bumps), &cfg.grid).unwrap();
        let dt = cfl_dt(&field, &cfg).unwrap();
        let next = step(&field, &cfg, dt).unwrap();
        let (m0, m1) = (field.mass(), next.mass());
        prop_assert!((m1 - m0).abs() <= 1e-13 * m0, "mass {} -> {}", m0, m1);
        prop_assert!(next.min() >= 0.0);
    }

    #[test]
    fn step_commutes_with_reflection(
        bumps in prop::collection::vec(bump(), 1..4),
        lambda in 0.0..2.0f64,
    ) {
        let cfg = config(1, 1.3, 0.9, lambda, 80, 6.0, 1.0);
        let field = discretize(&mixture(1, &bumps), &cfg.grid).unwrap();
        let mirror = field.reflected();
        let dt = cfl_dt(&field, &cfg).unwrap().min(cfl_dt(&mirror, &cfg).unwrap());
        let a = step(&field, &cfg, dt).unwrap().reflected();
        let b = step(&mirror, &cfg, dt).unwrap();
        let gap = a.values().iter().zip(b.values()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        prop_assert!(gap <= 1e-12 * field.max(), "gap {}", gap);
    }
}

#[test]
fn zero_field_step_is_capped() {
    let mut cfg = config(1, 1.4, 0.8, 1.0, 32, 4.0, 1.0);
    cfg.dt_cap = 0.25;
    let zero = DensityField::zeros(cfg.grid);
    assert_eq!(cfl_dt(&zero, &cfg).unwrap(), 0.25);
}
