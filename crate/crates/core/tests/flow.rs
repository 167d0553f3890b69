use acflow_core::contour::radius_estimate;
use acflow_core::solver::{
    energy_identity_defect, init_well_prepared, run, shrinking_circle_radius,
};
use acflow_core::{Interface, PolarGrid, PotentialSpec, SolverConfig};

#[test]
fn coarse_circle_shrinks_by_curvature() {
    let p = PotentialSpec::quartic();
    let eps = 0.06;
    let grid = PolarGrid::new(80, 128, 1.0).unwrap();
    let initial = init_well_prepared(grid, eps, Interface::Concentric { r0: 0.6 }, &p).unwrap();
    let mut cfg = SolverConfig::new(eps, 0.05);
    cfg.checkpoints = vec![0.025];
    let (last, table) = run(initial, &cfg, &p, &mut []).unwrap();

    assert!((last.t - 0.05).abs() < 1e-12);
    assert!(table.rows.iter().any(|r| (r.t - 0.025).abs() < 1e-12));
    let r = radius_estimate(&last.u).unwrap();
    let oracle = shrinking_circle_radius(0.6, 0.05);
    assert!((r - oracle).abs() / oracle < 0.02, "{r} vs {oracle}");
    assert!(table.max_abs_u <= 1.0 + 1e-9);
    assert!(table.max_energy_increase() <= 1e-10);
    assert!(energy_identity_defect(&table).unwrap() < 0.02);
}

#[test]
fn diameter_is_stationary_after_relaxation() {
    let p = PotentialSpec::quartic();
    let eps = 0.08;
    let grid = PolarGrid::new(50, 64, 1.0).unwrap();
    let initial = init_well_prepared(grid, eps, Interface::Diameter, &p).unwrap();
    // The sampled profile first relaxes onto the discrete standing wave.
    let (relaxed, _) = run(initial, &SolverConfig::new(eps, 0.1), &p, &mut []).unwrap();
    let u0 = relaxed.u.clone();
    let cfg = SolverConfig::new(eps, 0.12);
    let (last, table) = run(relaxed, &cfg, &p, &mut []).unwrap();
    let change = last
        .u
        .values
        .iter()
        .zip(&u0.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(change < 1e-4, "{change}");
    assert!(table.max_energy_increase() <= 1e-10);
}
