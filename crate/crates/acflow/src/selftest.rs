//! Standalone checks that need no PDE run on the disk.

use std::f64::consts::PI;

use acflow_core::kernels::{
    identity_residual_reflected, identity_residual_standard, HeatKernel, ReflectedKernel,
};
use acflow_core::potential::{standing_wave_residual, surface_tension};
use acflow_core::solver::interval;
use acflow_core::{DiskGeometry, PolarGrid, PotentialSpec, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::checks::Check;
use crate::error::{HarnessError, Result};

pub const STANDARD_IDENTITY_TOL: f64 = 1e-10;
pub const REFLECTED_IDENTITY_TOL: f64 = 1e-8;

/// Worst sample of an identity check.
#[derive(Debug, Clone, PartialEq)]
pub struct WorstSample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub tau: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSelftest {
    pub n: usize,
    pub samples: usize,
    pub standard: WorstSample,
    pub reflected: Option<WorstSample>,
    pub checks: Vec<Check>,
}

impl KernelSelftest {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn unit<const N: usize>(rng: &mut ChaCha8Rng) -> [f64; N] {
    loop {
        let mut a = [0.0; N];
        for v in a.iter_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
        let n = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 1e-3 {
            return a.map(|v| v / n);
        }
    }
}

fn standard<const N: usize>(rng: &mut ChaCha8Rng, samples: usize) -> Result<WorstSample> {
    let mut worst = WorstSample {
        x: vec![],
        y: vec![],
        tau: 0.0,
        residual: -1.0,
    };
    for _ in 0..samples {
        let mut y = [0.0; N];
        let mut x = [0.0; N];
        for i in 0..N {
            y[i] = rng.gen_range(-1.0..1.0);
            x[i] = y[i] + rng.gen_range(-0.5..0.5);
        }
        let s = rng.gen_range(0.0..1.0);
        // t < s by construction.
        let tau = rng.gen_range(0.01..1.0);
        let a = unit::<N>(rng);
        let k = HeatKernel::new(y, s);
        let res = identity_residual_standard(&k, x, s - tau, a)?;
        let scale = k.jet(x, s - tau)?.dt.abs() + 1.0;
        let rel = res.abs() / scale;
        if !(rel <= worst.residual) {
            worst = WorstSample {
                x: x.to_vec(),
                y: y.to_vec(),
                tau,
                residual: rel,
            };
        }
    }
    Ok(worst)
}

fn reflected(rng: &mut ChaCha8Rng, samples: usize) -> Result<WorstSample> {
    let geometry = DiskGeometry::new(1.0)?;
    let inner = geometry.radius - 0.5 * geometry.c2();
    let mut worst = WorstSample {
        x: vec![],
        y: vec![],
        tau: 0.0,
        residual: -1.0,
    };
    let point = |rng: &mut ChaCha8Rng| {
        Vec2::from_polar(
            rng.gen_range(inner..=geometry.radius),
            rng.gen_range(0.0..2.0 * PI),
        )
    };
    for _ in 0..samples {
        let x = point(rng);
        let y = point(rng);
        let s = rng.gen_range(0.0..1.0);
        let tau = rng.gen_range(0.01..1.0);
        let a = unit::<2>(rng);
        let k = ReflectedKernel::new(geometry, y, s);
        let (lhs, rhs) = identity_residual_reflected(&k, x, s - tau, Vec2::new(a[0], a[1]))?;
        let rel = (lhs - rhs).abs() / (lhs.abs() + rhs.abs() + 1.0);
        if !(rel <= worst.residual) {
            worst = WorstSample {
                x: x.to_array().to_vec(),
                y: y.to_array().to_vec(),
                tau,
                residual: rel,
            };
        }
    }
    Ok(worst)
}

/// Kernel identities at `samples` seeded random points in dimension `n`;
/// the reflected identity is included for `n = 2`.
pub fn kernel_selftest(n: usize, samples: usize, seed: u64) -> Result<KernelSelftest> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std_worst = match n {
        2 => standard::<2>(&mut rng, samples)?,
        3 => standard::<3>(&mut rng, samples)?,
        _ => {
            return Err(HarnessError::Invalid(format!(
                "kernel-check needs n in {{2, 3}}, got {n}"
            )))
        }
    };
    let mut checks = vec![Check::at_most(
        format!("identity_standard_n{n}"),
        std_worst.residual.max(0.0),
        STANDARD_IDENTITY_TOL,
    )];
    let refl = if n == 2 {
        let w = reflected(&mut rng, samples)?;
        checks.push(Check::at_most(
            "identity_reflected",
            w.residual.max(0.0),
            REFLECTED_IDENTITY_TOL,
        ));
        Some(w)
    } else {
        None
    };
    Ok(KernelSelftest {
        n,
        samples,
        standard: std_worst,
        reflected: refl,
        checks,
    })
}

/// Standing wave on an interval, surface tension, and grid and potential
/// invariants.
pub fn selftest() -> Result<Vec<Check>> {
    let p = PotentialSpec::quartic();
    let mut checks = Vec::new();

    let sigma = surface_tension(&p)?;
    checks.push(Check::at_most(
        "surface_tension",
        (sigma - 2.0 * 2f64.sqrt() / 3.0).abs(),
        1e-8,
    ));
    let s: Vec<f64> = (-80..=80).map(|k| k as f64 * 0.1).collect();
    checks.push(Check::at_most(
        "standing_wave_residual",
        standing_wave_residual(&p, &s),
        1e-12,
    ));
    checks.push(Check::equal(
        "potential_valid",
        p.validate().map_or(1.0, |_| 0.0),
        0.0,
    ));

    let run = interval::standing_wave_run(&p, 0.05, 1.0, 400, 0.01)?;
    checks.push(Check::at_most(
        "standing_wave_drift",
        run.drift(),
        run.cell_width,
    ));
    checks.push(Check::at_most(
        "interval_max_principle",
        run.max_abs_u,
        1.0 + 1e-9,
    ));

    let g = PolarGrid::new(64, 64, 1.0)?;
    let area = g.sample(0.0, |_| 1.0).integrate();
    checks.push(Check::at_most("disk_area", (area - PI).abs(), 1e-12));
    let u = g.sample(0.0, |x| (3.0 * x.x).sin() + x.y * x.y * x.x);
    let div = u.laplacian().integrate().abs();
    checks.push(Check::at_most(
        "discrete_divergence",
        div,
        1e-10 * u.max_abs().max(1.0),
    ));
    let circumference = g.integrate_boundary(&vec![1.0; g.ntheta()]);
    checks.push(Check::at_most(
        "circumference",
        (circumference - 2.0 * PI).abs(),
        1e-12,
    ));
    Ok(checks)
}
