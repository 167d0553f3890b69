//! Run orchestration: one experiment, or an `ε`-sweep of experiments.

use std::f64::consts::PI;
use std::path::Path;
use std::time::{Duration, Instant};

use acflow_core::contour::{interface_and_angle, RIGHT_ANGLE_DEG};
use acflow_core::kernels::{
    kernel_mass_checks, KernelMassReport, MonotonicityReport, MonotonicityTracker, ProbeObserver,
};
use acflow_core::measures::{
    density_ratios, sample_test_function, semidecreasing_check, ConstantTest, DensityReport,
    RadialCosine, TestFunction,
};
use acflow_core::potential::surface_tension;
use acflow_core::solver::{
    self, energy_identity_defect, init_well_prepared, interval, shrinking_circle_radius,
};
use acflow_core::solver::{ResolutionWarning, RunObserver, Sample};
use acflow_core::varifold::{
    brakke_ledger, first_variation_pde_rhs, BrakkeObserver, BrakkeSample, ConstantField,
    FirstVariationReport, RadialBump, TangentialPolynomial, VectorField,
};
use acflow_core::{
    DiagnosticsRow, DiagnosticsTable, DiskGeometry, PolarGrid, PotentialSpec, State, Vec2,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::checks::{format_report, Check};
use crate::config::{BrakkeTest, ExperimentConfig, FieldSpec, Scenario};
use crate::error::{HarnessError, Result};
use crate::output::{cell, diagnostics_csv, interface_csv, write};
use crate::snapshot::write_snapshot;

/// Slack on energy increases between samples.
pub const ENERGY_SLACK: f64 = 1e-10;
pub const MAX_PRINCIPLE_SLACK: f64 = 1e-9;
pub const LEDGER_TOL: f64 = 0.02;
pub const RADIUS_TOL: f64 = 0.02;
pub const ENERGY_LENGTH_TOL: f64 = 0.05;
pub const VARIATION_TOL: f64 = 0.05;
pub const BRAKKE_IDENTITY_TOL: f64 = 0.02;
pub const BRAKKE_ORACLE_TOL: f64 = 0.10;
pub const DENSITY_FACTOR: f64 = 6.0;
pub const SEMIDECREASING_TOL: f64 = 1e-8;
pub const SUP_XI_RATIO: f64 = 1.5;
/// Translation and scale ranges for the Gaussian near-continuity estimates.
pub const GAMMA: f64 = 0.1;

fn same_time(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * b.abs().max(1.0)
}

/// Zero level set and contact data at one sampled time.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceSample {
    pub t: f64,
    pub radius: Option<f64>,
    pub angles: Option<(f64, f64)>,
    pub height: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub config: ExperimentConfig,
    pub grid: Option<PolarGrid>,
    pub table: DiagnosticsTable,
    pub final_state: Option<State>,
    pub checks: Vec<Check>,
    pub values: Vec<(String, f64)>,
    pub warnings: Vec<ResolutionWarning>,
    pub interface: Vec<InterfaceSample>,
    pub monotonicity: Vec<MonotonicityReport>,
    pub brakke: Vec<Vec<BrakkeSample>>,
    pub variation: Vec<(FieldSpec, FirstVariationReport)>,
    pub density: Option<DensityReport>,
    pub mass: Option<KernelMassReport>,
    pub semidecreasing: Option<f64>,
    pub elapsed: Duration,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    pub fn report(&self) -> String {
        format_report(
            &format!(
                "run: {}, eps = {}",
                self.config.scenario.name(),
                self.config.eps
            ),
            &self.checks,
            &self.values,
        )
    }
}

fn vector_field(spec: FieldSpec, radius: f64, row: &DiagnosticsRow) -> Box<dyn VectorField> {
    match spec {
        FieldSpec::Constant => Box::new(ConstantField(Vec2::new(1.0, 0.5))),
        FieldSpec::Tangential => Box::new(TangentialPolynomial { radius, swirl: 0.5 }),
        FieldSpec::RadialBump => {
            let center = row.radius_est.unwrap_or(0.5 * radius);
            let width = (0.25 * radius)
                .min(0.5 * center)
                .min(0.9 * (radius - center));
            Box::new(RadialBump { center, width })
        }
    }
}

fn random_in_disk(rng: &mut ChaCha8Rng, radius: f64) -> Vec2 {
    let r = radius * rng.gen::<f64>().sqrt();
    Vec2::from_polar(r, 2.0 * PI * rng.gen::<f64>())
}

/// Half of the points uniform in the disk, half on the zero level set.
fn sample_points(rng: &mut ChaCha8Rng, radius: f64, level_set: &[Vec2], n: usize) -> Vec<Vec2> {
    (0..n)
        .map(|k| {
            if k % 2 == 1 && !level_set.is_empty() {
                level_set[rng.gen_range(0..level_set.len())]
            } else {
                random_in_disk(rng, radius)
            }
        })
        .collect()
}

/// Everything the harness computes from a sample besides the core columns.
struct HarnessObserver<'c> {
    config: &'c ExperimentConfig,
    geometry: DiskGeometry,
    rng: ChaCha8Rng,
    sd_weights: Option<Vec<f64>>,
    sd_series: Vec<(f64, f64)>,
    interface: Vec<InterfaceSample>,
    snapshots: Vec<(State, Vec<Vec<Vec2>>)>,
    variation: Vec<(FieldSpec, FirstVariationReport)>,
    density: Option<DensityReport>,
    mass: Option<KernelMassReport>,
}

impl RunObserver for HarnessObserver<'_> {
    fn observe(
        &mut self,
        sample: &Sample<'_>,
        row: &mut DiagnosticsRow,
    ) -> acflow_core::error::Result<()> {
        let cfg = self.config;
        let state = sample.state;
        let t = state.t;
        let radius = self.geometry.radius;
        if !cfg.measures {
            row.sup_xi = None;
            row.int_abs_xi = None;
        }
        let at_end = t >= cfg.t_end - 1e-9 * cfg.resolved_dt();
        let snap = t == 0.0 || at_end || cfg.snapshot_times.iter().any(|&s| same_time(t, s));
        let mut polylines = Vec::new();
        if cfg.interface {
            if let Ok(rep) = interface_and_angle(&state.u, state.eps, cfg.angle_band) {
                row.radius_est = rep.radius_estimate;
                if let Some((lo, hi)) = rep.angle_range() {
                    row.angle_min = Some(lo);
                    row.angle_max = Some(hi);
                }
                self.interface.push(InterfaceSample {
                    t,
                    radius: rep.radius_estimate,
                    angles: rep.angle_range(),
                    height: rep.mean_height(),
                });
                polylines = rep.polylines;
            }
        }
        if snap {
            self.snapshots.push((state.clone(), polylines.clone()));
        }
        if let Some(w) = &self.sd_weights {
            self.sd_series.push((t, sample.measures.weighted_energy(w)));
        }
        if !cfg.fields.is_empty() && same_time(t, cfg.variation_time) {
            for &spec in &cfg.fields {
                let g = vector_field(spec, radius, row);
                let rep =
                    first_variation_pde_rhs(&state.u, state.eps, sample.potential, g.as_ref());
                self.variation.push((spec, rep));
            }
        }
        let density_time = cfg.density_time.unwrap_or(cfg.t_end);
        if (cfg.density_samples > 0 || cfg.kernel_mass_samples > 0) && same_time(t, density_time) {
            let level: Vec<Vec2> = if polylines.is_empty() {
                acflow_core::contour::zero_level_set(&state.u)
                    .into_iter()
                    .flatten()
                    .collect()
            } else {
                polylines.iter().flatten().copied().collect()
            };
            let c2 = self.geometry.c2();
            let hi = 0.25 * c2;
            let lo = (4.0 * state.eps).min(0.5 * hi);
            let n = cfg.density_samples.max(1);
            let pts = sample_points(&mut self.rng, radius, &level, n);
            let samples: Vec<(Vec2, f64)> = pts
                .into_iter()
                .map(|y| (y, self.rng.gen_range(lo..=hi)))
                .collect();
            let dens = density_ratios(sample.measures, c2, &samples)?;
            if cfg.kernel_mass_samples > 0 {
                let pts = sample_points(&mut self.rng, radius, &level, cfg.kernel_mass_samples);
                let a1: Vec<(Vec2, f64, f64)> = pts
                    .into_iter()
                    .map(|x| {
                        let r = self.rng.gen_range(lo..=hi);
                        (x, r, r * self.rng.gen_range(1.0..3.0))
                    })
                    .collect();
                self.mass = Some(kernel_mass_checks(
                    sample.measures,
                    dens.d0,
                    &a1,
                    GAMMA,
                    GAMMA,
                ));
            }
            if cfg.density_samples > 0 {
                self.density = Some(dens);
            }
        }
        Ok(())
    }
}

fn brakke_tests(config: &ExperimentConfig) -> Vec<Box<dyn TestFunction>> {
    config
        .brakke
        .iter()
        .map(|b| -> Box<dyn TestFunction> {
            match b {
                BrakkeTest::One => Box::new(ConstantTest(1.0)),
                BrakkeTest::RadialCosine => Box::new(RadialCosine {
                    radius: config.radius,
                }),
            }
        })
        .collect()
}

fn run_interval(config: &ExperimentConfig, potential: &PotentialSpec) -> Result<RunOutcome> {
    let start = Instant::now();
    let cells = config.resolved_nr();
    let run =
        interval::standing_wave_run(potential, config.eps, config.radius, cells, config.t_end)?;
    let checks = vec![
        Check::at_most("standing_wave_drift", run.drift(), run.cell_width),
        Check::at_most("max_principle", run.max_abs_u, 1.0 + MAX_PRINCIPLE_SLACK),
    ];
    Ok(RunOutcome {
        config: config.clone(),
        grid: None,
        table: DiagnosticsTable::default(),
        final_state: None,
        checks,
        values: vec![("cell_width".into(), run.cell_width)],
        warnings: Vec::new(),
        interface: Vec::new(),
        monotonicity: Vec::new(),
        brakke: Vec::new(),
        variation: Vec::new(),
        density: None,
        mass: None,
        semidecreasing: None,
        elapsed: start.elapsed(),
    })
}

/// Runs one experiment, evaluates every enabled check, and writes the
/// output files when `out` is given.
pub fn run_experiment(config: &ExperimentConfig, out: Option<&Path>) -> Result<RunOutcome> {
    let potential = PotentialSpec::quartic();
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    let outcome = match config.scenario.interface() {
        None => run_interval(config, &potential)?,
        Some(interface) => run_disk(config, interface, &potential, out)?,
    };
    if let Some(dir) = out {
        write(
            &dir.join("diagnostics.csv"),
            &diagnostics_csv(&outcome.table),
        )?;
        write(&dir.join("report.txt"), &outcome.report())?;
    }
    Ok(outcome)
}

fn run_disk(
    config: &ExperimentConfig,
    interface: acflow_core::Interface,
    potential: &PotentialSpec,
    out: Option<&Path>,
) -> Result<RunOutcome> {
    let start = Instant::now();
    let geometry = DiskGeometry::new(config.radius)?;
    let grid = PolarGrid::new(
        config.resolved_nr(),
        config.resolved_ntheta(),
        config.radius,
    )?;
    let solver_cfg = config.solver_config();
    let warnings = solver_cfg.validate(&grid)?;
    let initial = init_well_prepared(grid, config.eps, interface, potential)?;
    let sigma = surface_tension(potential)?;

    let mut harness = HarnessObserver {
        config,
        geometry,
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        sd_weights: config.semidecreasing.then(|| {
            sample_test_function(
                &grid,
                &RadialCosine {
                    radius: config.radius,
                },
                0.0,
            )
        }),
        sd_series: Vec::new(),
        interface: Vec::new(),
        snapshots: Vec::new(),
        variation: Vec::new(),
        density: None,
        mass: None,
    };
    let mut probes = ProbeObserver {
        trackers: config
            .probes
            .iter()
            .map(|p| MonotonicityTracker::new(geometry, p.y, p.s, config.c3))
            .collect::<acflow_core::error::Result<Vec<_>>>()?,
    };
    let sample_times: Vec<f64> = vec![0.0, config.t_end];
    let mut brakke = BrakkeObserver::new(brakke_tests(config), config.radius, &sample_times)?;
    let (final_state, table) = {
        let mut observers: [&mut dyn RunObserver; 3] = [&mut harness, &mut probes, &mut brakke];
        solver::run(initial, &solver_cfg, potential, &mut observers)?
    };

    let mut checks = Vec::new();
    let mut values = Vec::new();
    checks.push(Check::at_most(
        "max_principle",
        table.max_abs_u,
        1.0 + MAX_PRINCIPLE_SLACK,
    ));
    if table.rows.len() > 1 {
        checks.push(Check::at_most(
            "energy_monotone",
            table.max_energy_increase(),
            ENERGY_SLACK,
        ));
        checks.push(Check::at_most(
            "energy_ledger",
            energy_identity_defect(&table)?,
            LEDGER_TOL,
        ));
    }
    values.push(("sigma".into(), sigma));
    values.push(("E0".into(), table.first()?.e_total));
    values.push(("steps".into(), table.steps as f64));

    let row_at = |t: f64| table.rows.iter().find(|r| same_time(r.t, t));
    if let Scenario::Concentric { r0 } = config.scenario {
        for &t in &config.radius_times {
            let name = format!("radius_t{t}");
            match row_at(t).and_then(|r| r.radius_est) {
                Some(est) => {
                    let oracle = shrinking_circle_radius(r0, t);
                    checks.push(Check::at_most(
                        name,
                        (est - oracle).abs() / oracle,
                        RADIUS_TOL,
                    ));
                }
                None => checks.push(Check::missing(name)),
            }
        }
    }
    if let Some(t) = config.energy_length_time {
        match row_at(t).and_then(|r| r.radius_est.map(|est| (r.e_total, est))) {
            Some((e, est)) => {
                let gap = (e - sigma * 2.0 * PI * est).abs() / e;
                checks.push(Check::at_most("energy_length", gap, ENERGY_LENGTH_TOL));
            }
            None => checks.push(Check::missing("energy_length")),
        }
    }
    if config.interface {
        let (tol, from) = match config.scenario {
            Scenario::Diameter => (
                config.angle_tol.unwrap_or(1.0),
                config.angle_from.unwrap_or(0.0),
            ),
            Scenario::Chord { .. } => (
                config.angle_tol.unwrap_or(5.0),
                config.angle_from.unwrap_or(0.02),
            ),
            _ => (f64::NAN, f64::INFINITY),
        };
        if tol.is_finite() {
            let worst = harness
                .interface
                .iter()
                .filter(|s| s.t >= from - 1e-12)
                .map(|s| {
                    s.angles.map_or(f64::INFINITY, |(lo, hi)| {
                        (RIGHT_ANGLE_DEG - lo).max(hi - RIGHT_ANGLE_DEG)
                    })
                })
                .fold(f64::NEG_INFINITY, f64::max);
            checks.push(Check::at_most("contact_angle", worst, tol));
        }
        if config.scenario == Scenario::Diameter {
            match (harness.interface.first(), harness.interface.last()) {
                (Some(a), Some(b)) if table.rows.len() > 1 => {
                    checks.push(Check::at_most(
                        "interface_drift",
                        (b.height - a.height).abs(),
                        grid.dr(),
                    ));
                }
                _ => {}
            }
        }
    }

    let dt = solver_cfg.dt;
    let monotonicity: Vec<MonotonicityReport> = probes
        .trackers
        .iter()
        .map(|tr| tr.report(dt, config.c4.unwrap_or(f64::INFINITY)))
        .collect();
    for (k, rep) in monotonicity.iter().enumerate() {
        let worst = rep.max_defect();
        if let Some(d) = worst {
            values.push((format!("monotonicity_max_defect_{}", k + 1), d));
        }
        if let Some(c4) = config.c4 {
            match worst {
                Some(d) => checks.push(Check::at_most(format!("monotonicity_{}", k + 1), d, c4)),
                None => checks.push(Check::missing(format!("monotonicity_{}", k + 1))),
            }
        }
    }

    for (spec, rep) in &harness.variation {
        let name = match spec {
            FieldSpec::Constant => "first_variation_constant",
            FieldSpec::Tangential => "first_variation_tangential",
            FieldSpec::RadialBump => "first_variation_radial_bump",
        };
        checks.push(Check::at_most(name, rep.relative_gap(), VARIATION_TOL));
        if *spec == FieldSpec::Tangential {
            checks.push(Check::equal(
                "first_variation_tangential_boundary",
                rep.boundary,
                0.0,
            ));
        }
    }
    if !config.fields.is_empty() && harness.variation.is_empty() {
        checks.push(Check::missing("first_variation"));
    }

    let (t1, t2) = config.brakke_window;
    for (k, (test, series)) in config.brakke.iter().zip(&brakke.samples).enumerate() {
        let ledger = brakke_ledger(series, t1, t2)?;
        values.push((format!("brakke_lhs_{}", k + 1), ledger.lhs));
        values.push((
            format!("brakke_identity_rhs_{}", k + 1),
            ledger.identity_rhs,
        ));
        values.push((
            format!("brakke_varifold_rhs_{}", k + 1),
            ledger.varifold_rhs,
        ));
        if *test == BrakkeTest::One {
            checks.push(Check::at_most(
                format!("brakke_identity_{}", k + 1),
                ledger.identity_defect(),
                BRAKKE_IDENTITY_TOL,
            ));
            if let Scenario::Concentric { r0 } = config.scenario {
                let oracle = -sigma
                    * 2.0
                    * PI
                    * (shrinking_circle_radius(r0, ledger.t1)
                        - shrinking_circle_radius(r0, ledger.t2));
                values.push((format!("brakke_oracle_{}", k + 1), oracle));
                let gap = (ledger.varifold_rhs - oracle).abs() / oracle.abs();
                checks.push(Check::at_most(
                    format!("brakke_varifold_oracle_{}", k + 1),
                    gap,
                    BRAKKE_ORACLE_TOL,
                ));
            }
        }
    }

    if config.density_samples > 0 {
        match &harness.density {
            Some(d) => {
                values.push(("D0_measured".into(), d.d0));
                checks.push(Check::at_most(
                    "density_bound",
                    d.d0,
                    DENSITY_FACTOR * sigma,
                ));
            }
            None => checks.push(Check::missing("density_bound")),
        }
    }
    if config.kernel_mass_samples > 0 {
        match &harness.mass {
            Some(m) => {
                checks.push(Check::at_most(
                    "kernel_mass_ratio",
                    m.worst_mass_ratio(),
                    1.0,
                ));
                checks.push(Check::at_most(
                    "kernel_tail_ratio",
                    m.worst_tail_ratio(),
                    1.0,
                ));
                values.push(("kernel_mass_delta_translation".into(), m.delta_translation));
                values.push(("kernel_mass_delta_scale".into(), m.delta_scale));
            }
            None => checks.push(Check::missing("kernel_mass_ratio")),
        }
    }

    let mut semidecreasing = None;
    if config.semidecreasing {
        let (ts, ms): (Vec<f64>, Vec<f64>) = harness.sd_series.iter().copied().unzip();
        let e0 = table.first()?.e_total;
        let phi = RadialCosine {
            radius: config.radius,
        };
        let v = semidecreasing_check(&ts, &ms, e0, phi.c2_norm());
        semidecreasing = Some(v);
        checks.push(Check::at_most("semidecreasing", v, SEMIDECREASING_TOL * e0));
    }

    values.push(("dr".into(), grid.dr()));
    values.push(("outer_arc".into(), grid.radius() * grid.dtheta()));
    let elapsed = start.elapsed();
    values.push(("runtime_s".into(), elapsed.as_secs_f64()));

    let outcome = RunOutcome {
        config: config.clone(),
        grid: Some(grid),
        table,
        final_state: Some(final_state),
        checks,
        values,
        warnings,
        interface: harness.interface.clone(),
        monotonicity,
        brakke: brakke.samples,
        variation: harness.variation.clone(),
        density: harness.density.clone(),
        mass: harness.mass.clone(),
        semidecreasing,
        elapsed,
    };
    if let Some(dir) = out {
        for (state, polylines) in &harness.snapshots {
            let tag = format!("t{:.6}", state.t);
            write_snapshot(&dir.join(format!("snapshot_{tag}.acsnap")), state)?;
            if config.interface {
                write(
                    &dir.join(format!("interface_{tag}.csv")),
                    &interface_csv(polylines),
                )?;
            }
        }
    }
    Ok(outcome)
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub eps: Vec<f64>,
    pub runs: Vec<RunOutcome>,
    /// Largest monotonicity defect of the first (coarsest) run, floored at 0.
    pub c4_fit: Option<f64>,
    pub matched_times: Vec<f64>,
    pub checks: Vec<Check>,
    pub values: Vec<(String, f64)>,
}

impl SweepOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass) && self.runs.iter().all(RunOutcome::passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn report(&self) -> String {
        format_report("sweep", &self.checks, &self.values)
    }

    /// `sweep.csv`: one row per `ε`.
    pub fn csv(&self) -> String {
        let mut s = String::from("eps,nr,ntheta");
        for t in &self.matched_times {
            s.push_str(&format!(",int_abs_xi_t{t}"));
        }
        s.push_str(",sup_xi,monotonicity_max_defect,c4_fit,sup_eps_grad\n");
        for run in &self.runs {
            let (nr, nt) = run.grid.map_or((0, 0), |g| (g.nr(), g.ntheta()));
            s.push_str(&format!("{},{nr},{nt}", run.config.eps));
            for &t in &self.matched_times {
                s.push(',');
                s.push_str(&cell(int_abs_xi_at(run, t)));
            }
            s.push_str(&format!(
                ",{},{},{},{}\n",
                cell(sup_xi(run)),
                cell(max_defect(run)),
                cell(self.c4_fit),
                cell(sup_eps_grad(run))
            ));
        }
        s
    }
}

fn int_abs_xi_at(run: &RunOutcome, t: f64) -> Option<f64> {
    run.table
        .rows
        .iter()
        .find(|r| same_time(r.t, t))
        .and_then(|r| r.int_abs_xi)
}

/// `sup ξ` over all post-transient samples.
fn sup_xi(run: &RunOutcome) -> Option<f64> {
    run.table
        .rows
        .iter()
        .filter_map(|r| r.sup_xi)
        .reduce(f64::max)
}

fn sup_eps_grad(run: &RunOutcome) -> Option<f64> {
    run.table
        .rows
        .iter()
        .filter_map(|r| r.sup_eps_grad)
        .reduce(f64::max)
}

fn max_defect(run: &RunOutcome) -> Option<f64> {
    run.monotonicity
        .iter()
        .filter_map(MonotonicityReport::max_defect)
        .reduce(f64::max)
}

/// Thread count for parallel work: `AC_THREADS` if set, else rayon's default.
pub fn thread_count() -> Option<usize> {
    std::env::var("AC_THREADS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n| n > 0)
}

/// Runs `config` at each `ε` of a strictly decreasing list (grids rescaled
/// to each `ε`) and evaluates the cross-`ε` trends: `∫|ξ|` at each matched
/// time strictly decreasing, the spread of `sup ξ`, and the monotonicity
/// defect against the constant fitted on the coarsest run.
pub fn sweep(
    config: &ExperimentConfig,
    eps_list: &[f64],
    matched_times: &[f64],
    out: Option<&Path>,
) -> Result<SweepOutcome> {
    if eps_list.is_empty() {
        return Err(HarnessError::Invalid("empty eps list".into()));
    }
    if eps_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(HarnessError::Invalid(
            "eps list must be strictly decreasing".into(),
        ));
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    let configs: Vec<ExperimentConfig> = eps_list.iter().map(|&e| config.with_eps(e)).collect();
    let job = |cfg: &ExperimentConfig| -> Result<RunOutcome> {
        let mut cfg = cfg.clone();
        cfg.c4 = None;
        cfg.checkpoints.extend(matched_times);
        let dir = out.map(|d| d.join(format!("eps_{}", cfg.eps)));
        run_experiment(&cfg, dir.as_deref())
    };
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = thread_count() {
            b = b.num_threads(n);
        }
        b.build()
            .map_err(|e| HarnessError::Invalid(format!("thread pool: {e}")))?
    };
    let runs: Vec<RunOutcome> =
        pool.install(|| configs.par_iter().map(job).collect::<Result<Vec<_>>>())?;

    let mut checks = Vec::new();
    let mut values = Vec::new();
    let times: Vec<f64> = matched_times
        .iter()
        .copied()
        .filter(|&t| t <= config.t_end)
        .collect();
    if runs.len() > 1 {
        for &t in &times {
            let series: Vec<Option<f64>> = runs.iter().map(|r| int_abs_xi_at(r, t)).collect();
            let name = format!("int_abs_xi_decreasing_t{t}");
            if series.iter().any(Option::is_none) {
                checks.push(Check::missing(name));
                continue;
            }
            let s: Vec<f64> = series.into_iter().flatten().collect();
            // Largest ratio of a finer run to its coarser neighbour; below 1 means strict decrease.
            let worst = s
                .windows(2)
                .map(|w| w[1] / w[0])
                .fold(f64::NEG_INFINITY, f64::max);
            checks.push(Check {
                pass: worst < 1.0,
                ..Check::at_most(name, worst, 1.0)
            });
        }
        let sups: Vec<Option<f64>> = runs.iter().map(sup_xi).collect();
        if sups.iter().all(Option::is_some) {
            let s: Vec<f64> = sups.into_iter().flatten().collect();
            let hi = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
            let ratio = if lo > 0.0 { hi / lo } else { f64::INFINITY };
            checks.push(Check::at_most("sup_xi_ratio", ratio, SUP_XI_RATIO));
        } else {
            checks.push(Check::missing("sup_xi_ratio"));
        }
    }
    let c4_fit = if config.probes.is_empty() {
        None
    } else {
        max_defect(&runs[0]).map(|d| d.max(0.0))
    };
    if let Some(c4) = c4_fit {
        values.push(("c4_fit".into(), c4));
        for run in &runs[1..] {
            let name = format!("monotonicity_uniform_eps{}", run.config.eps);
            match max_defect(run) {
                Some(d) => checks.push(Check::at_most(name, d, c4)),
                None => checks.push(Check::missing(name)),
            }
        }
    }
    for run in &runs {
        if let Some(v) = sup_xi(run) {
            values.push((format!("sup_xi_eps{}", run.config.eps), v));
        }
        values.push((
            format!("runtime_s_eps{}", run.config.eps),
            run.elapsed.as_secs_f64(),
        ));
    }
    let outcome = SweepOutcome {
        eps: eps_list.to_vec(),
        runs,
        c4_fit,
        matched_times: times,
        checks,
        values,
    };
    if let Some(dir) = out {
        write(&dir.join("sweep.csv"), &outcome.csv())?;
        write(&dir.join("report.txt"), &outcome.report())?;
    }
    Ok(outcome)
}
