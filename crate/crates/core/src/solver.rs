//! Time integration of `∂_t u = Δu − W′(u)/ε²` with `∂_ν u = 0` on the disk.
//!
//! The default scheme is IMEX Euler (explicit reaction, implicit diffusion)
//! Richardson extrapolated to second order: `2·S(dt/2)² − S(dt)`. The
//! implicit solve of `(I − h L)` is exact, by a Fourier transform in `θ`
//! and one tridiagonal solve in `r` per mode. Every IMEX Euler step has the
//! discrete steady states as fixed points, so the extrapolated step does
//! too. No clamping is applied; the maximum principle is checked, not
//! enforced.

// Float methods for builds where std is not linked.
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::diagnostics::{DiagnosticsRow, DiagnosticsTable};
use crate::error::{Error, Result};
use crate::fft::Fft;
use crate::grid::{PolarGrid, ScalarField};
use crate::measures::{
    boundary_energy, dirichlet_energy, discrepancy_burn_in, discrepancy_stats, MeasureFields,
};
use crate::potential::PotentialSpec;
use crate::tridiag::solve_tridiagonal;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Extrapolated IMEX Euler with an exact implicit diffusion solve.
    ImexAdi,
    /// Forward Euler.
    Explicit,
}

/// Fraction of `ε²` allowed for the explicit reaction.
pub const REACTION_DT_FACTOR: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub eps: f64,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub save_every: u64,
    /// Times the integrator must land on exactly; a diagnostics row is
    /// recorded at each of them.
    pub checkpoints: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResolutionWarning {
    RadialSpacing { dr: f64, limit: f64 },
    OuterArcSpacing { arc: f64, limit: f64 },
}

impl SolverConfig {
    /// IMEX configuration with `dt = 0.2ε²`.
    pub fn new(eps: f64, t_end: f64) -> Self {
        SolverConfig {
            eps,
            dt: REACTION_DT_FACTOR * eps * eps,
            t_end,
            scheme: Scheme::ImexAdi,
            save_every: 1,
            checkpoints: Vec::new(),
        }
    }

    pub fn auto_dt(eps: f64) -> f64 {
        REACTION_DT_FACTOR * eps * eps
    }

    /// Hard errors for unstable settings, warnings for an under-resolved
    /// interface.
    pub fn validate(&self, grid: &PolarGrid) -> Result<Vec<ResolutionWarning>> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidConfig("eps must be positive"));
        }
        if !(self.dt > 0.0) {
            return Err(Error::InvalidConfig("dt must be positive"));
        }
        if self.dt > REACTION_DT_FACTOR * self.eps * self.eps * (1.0 + 1e-12) {
            return Err(Error::InvalidConfig("dt exceeds 0.2 eps^2"));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidConfig("t_end must be nonnegative"));
        }
        if self.save_every == 0 {
            return Err(Error::InvalidConfig("save_every must be at least 1"));
        }
        if self.scheme == Scheme::Explicit {
            let arc = grid.r(0) * grid.dtheta();
            let lim = REACTION_DT_FACTOR * (grid.dr() * grid.dr()).min(arc * arc);
            if self.dt > lim * (1.0 + 1e-12) {
                return Err(Error::InvalidConfig(
                    "explicit scheme: dt exceeds 0.2 min(dr^2, (r0 dtheta)^2)",
                ));
            }
        }
        if self.scheme == Scheme::ImexAdi && !grid.ntheta().is_power_of_two() {
            return Err(Error::InvalidConfig(
                "implicit scheme needs a power-of-two ntheta",
            ));
        }
        let mut warnings = Vec::new();
        let limit = self.eps / 4.0;
        if grid.dr() > limit {
            warnings.push(ResolutionWarning::RadialSpacing {
                dr: grid.dr(),
                limit,
            });
        }
        let arc = grid.radius() * grid.dtheta();
        if arc > limit {
            warnings.push(ResolutionWarning::OuterArcSpacing { arc, limit });
        }
        Ok(warnings)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub u: ScalarField,
    pub t: f64,
    pub eps: f64,
    pub step: u64,
}

impl State {
    pub fn new(u: ScalarField, eps: f64) -> Self {
        let t = u.t;
        State { u, t, eps, step: 0 }
    }

    pub fn grid(&self) -> &PolarGrid {
        &self.u.grid
    }
}

/// Initial interface shapes. `u₀ = Φ(d/ε)` with `d` the signed distance to
/// the interface, positive on the inner side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Interface {
    /// Circle `r = r₀`; inside is `r < r₀`.
    Concentric { r0: f64 },
    /// The line `x₂ = 0`; inside is `x₂ < 0`.
    Diameter,
    /// The line `x₂ = b`; inside is `x₂ < b`.
    Chord { b: f64 },
}

impl Interface {
    pub fn signed_distance(&self, x: crate::geometry::Vec2) -> f64 {
        match *self {
            Interface::Concentric { r0 } => r0 - x.norm(),
            Interface::Diameter => -x.y,
            Interface::Chord { b } => b - x.y,
        }
    }
}

pub fn init_well_prepared(
    grid: PolarGrid,
    eps: f64,
    interface: Interface,
    potential: &PotentialSpec,
) -> Result<State> {
    if !(eps > 0.0) {
        return Err(Error::InvalidConfig("eps must be positive"));
    }
    let radius = grid.radius();
    match interface {
        Interface::Concentric { r0 } => {
            if !(r0 > 0.0 && r0 < radius) {
                return Err(Error::InvalidConfig("concentric radius must lie in (0, R)"));
            }
            if r0 <= 2.0 * eps {
                return Err(Error::InvalidConfig("degenerate interface: r0 <= 2 eps"));
            }
        }
        Interface::Chord { b } => {
            if b.abs() >= radius {
                return Err(Error::InvalidConfig("chord offset must satisfy |b| < R"));
            }
        }
        Interface::Diameter => {}
    }
    let wave = potential.standing_wave();
    let u = grid.sample(0.0, |x| wave.phi(interface.signed_distance(x) / eps));
    Ok(State::new(u, eps))
}

/// Implicit diffusion operator `I − dt L` for one step size, diagonalized in
/// `θ` so that each Fourier mode is a tridiagonal system in `r`.
struct DiffusionOps {
    dt: f64,
    radial_a: Vec<f64>,
    radial_c: Vec<f64>,
    /// `dt/(r_i² Δθ²)`.
    angular: Vec<f64>,
    /// `2 − 2cos(2πm/Nθ)`.
    symbol: Vec<f64>,
}

impl DiffusionOps {
    fn new(g: &PolarGrid, dt: f64) -> Self {
        let dr = g.dr();
        let nr = g.nr();
        let radial_a = (0..nr)
            .map(|i| -dt * (i as f64 * dr) / (g.r(i) * dr * dr))
            .collect();
        let radial_c = (0..nr)
            .map(|i| {
                if i + 1 == nr {
                    0.0
                } else {
                    -dt * ((i + 1) as f64 * dr) / (g.r(i) * dr * dr)
                }
            })
            .collect();
        let dth = g.dtheta();
        let angular = (0..nr)
            .map(|i| dt / (g.r(i) * g.r(i) * dth * dth))
            .collect();
        let nt = g.ntheta();
        let symbol = (0..nt)
            .map(|m| 2.0 - 2.0 * (2.0 * PI * m as f64 / nt as f64).cos())
            .collect();
        DiffusionOps {
            dt,
            radial_a,
            radial_c,
            angular,
            symbol,
        }
    }
}

/// Reusable stepping machinery for one grid and one time-step size.
pub struct Stepper<'p> {
    grid: PolarGrid,
    eps: f64,
    scheme: Scheme,
    potential: &'p PotentialSpec,
    ops: Vec<DiffusionOps>,
    active: usize,
    fft: Option<Fft>,
    spec_re: Vec<f64>,
    spec_im: Vec<f64>,
    diag: Vec<f64>,
    col_re: Vec<f64>,
    col_im: Vec<f64>,
    scratch: Vec<f64>,
}

/// Result of one step: the new state and `ε∫((u^{k+1} − u^k)/dt)² dx`.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: State,
    pub dissipation_rate: f64,
    pub dt: f64,
}

impl<'p> Stepper<'p> {
    pub fn new(grid: PolarGrid, eps: f64, scheme: Scheme, potential: &'p PotentialSpec) -> Self {
        let nr = grid.nr();
        Stepper {
            grid,
            eps,
            scheme,
            potential,
            ops: Vec::new(),
            active: 0,
            fft: Fft::new(grid.ntheta()),
            spec_re: vec![0.0; grid.len()],
            spec_im: vec![0.0; grid.len()],
            diag: vec![0.0; nr],
            col_re: vec![0.0; nr],
            col_im: vec![0.0; nr],
            scratch: vec![0.0; nr],
        }
    }

    fn prepare(&mut self, dt: f64) {
        if let Some(k) = self.ops.iter().position(|o| o.dt == dt) {
            self.active = k;
            return;
        }
        if self.ops.len() >= 4 {
            self.ops.remove(0);
        }
        self.ops.push(DiffusionOps::new(&self.grid, dt));
        self.active = self.ops.len() - 1;
    }

    /// Replaces `v` by `(I − dt L)⁻¹ v`, solved for the increment
    /// `δ = (I − dt L)⁻¹ dt L v` so that constants pass through exactly.
    fn diffuse(&mut self, v: &mut [f64]) -> Result<()> {
        let (nr, nt) = (self.grid.nr(), self.grid.ntheta());
        let fft = self.fft.as_ref().ok_or(Error::InvalidConfig(
            "implicit scheme needs a power-of-two ntheta",
        ))?;
        let ops = &self.ops[self.active];
        let (a, c, k) = (&ops.radial_a, &ops.radial_c, &ops.angular);
        let (re, im) = (&mut self.spec_re, &mut self.spec_im);
        for i in 0..nr {
            for j in 0..nt {
                let u = v[i * nt + j];
                let jp = if j + 1 == nt { 0 } else { j + 1 };
                let jm = if j == 0 { nt - 1 } else { j - 1 };
                let mut rhs = k[i] * ((v[i * nt + jp] - u) + (v[i * nt + jm] - u));
                if i > 0 {
                    rhs -= a[i] * (v[(i - 1) * nt + j] - u);
                }
                if i + 1 < nr {
                    rhs -= c[i] * (v[(i + 1) * nt + j] - u);
                }
                re[i * nt + j] = rhs;
                im[i * nt + j] = 0.0;
            }
            fft.forward(&mut re[i * nt..(i + 1) * nt], &mut im[i * nt..(i + 1) * nt]);
        }
        for m in 0..nt {
            for i in 0..nr {
                self.diag[i] = 1.0 - a[i] - c[i] + k[i] * ops.symbol[m];
                self.col_re[i] = re[i * nt + m];
                self.col_im[i] = im[i * nt + m];
            }
            solve_tridiagonal(a, &self.diag, c, &mut self.col_re, &mut self.scratch);
            solve_tridiagonal(a, &self.diag, c, &mut self.col_im, &mut self.scratch);
            for i in 0..nr {
                re[i * nt + m] = self.col_re[i];
                im[i * nt + m] = self.col_im[i];
            }
        }
        for i in 0..nr {
            fft.inverse(&mut re[i * nt..(i + 1) * nt], &mut im[i * nt..(i + 1) * nt]);
            for j in 0..nt {
                v[i * nt + j] += re[i * nt + j];
            }
        }
        Ok(())
    }

    /// `v ← (I − h L)⁻¹ (v − h W′(v)/ε²)`.
    fn imex_euler(&mut self, v: &mut [f64], h: f64) -> Result<()> {
        let eps2 = self.eps * self.eps;
        for x in v.iter_mut() {
            *x -= h * self.potential.dw(*x) / eps2;
        }
        self.prepare(h);
        self.diffuse(v)
    }

    /// Advances `state` by `dt`.
    pub fn step(&mut self, state: &State, dt: f64) -> Result<StepOutcome> {
        let eps2 = self.eps * self.eps;
        let u = &state.u.values;
        let mut next: Vec<f64> = match self.scheme {
            Scheme::ImexAdi => {
                let mut full = u.clone();
                self.imex_euler(&mut full, dt)?;
                let mut v = u.clone();
                self.imex_euler(&mut v, 0.5 * dt)?;
                self.imex_euler(&mut v, 0.5 * dt)?;
                for (a, b) in v.iter_mut().zip(&full) {
                    *a = 2.0 * *a - b;
                }
                v
            }
            Scheme::Explicit => {
                let lap = state.u.laplacian();
                u.iter()
                    .zip(&lap.values)
                    .map(|(&x, &l)| x + dt * (l - self.potential.dw(x) / eps2))
                    .collect()
            }
        };
        let step = state.step + 1;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalBlowup { step });
        }
        let g = self.grid;
        let rate = self.eps
            * g.integrate_by(|k| {
                let d = (next[k] - u[k]) / dt;
                d * d
            });
        let t = state.t + dt;
        let field = ScalarField {
            grid: g,
            values: core::mem::take(&mut next),
            t,
        };
        Ok(StepOutcome {
            state: State {
                u: field,
                t,
                eps: state.eps,
                step,
            },
            dissipation_rate: rate,
            dt,
        })
    }
}

/// One step with a throwaway [`Stepper`].
pub fn step(state: &State, config: &SolverConfig, potential: &PotentialSpec) -> Result<State> {
    let mut s = Stepper::new(state.u.grid, config.eps, config.scheme, potential);
    Ok(s.step(state, config.dt)?.state)
}

/// What a run observer sees at each sampled time.
pub struct Sample<'a> {
    pub state: &'a State,
    pub measures: &'a MeasureFields,
    pub potential: &'a PotentialSpec,
    /// Cumulative dissipated energy up to this time.
    pub dissipation: f64,
}

/// Extra diagnostics evaluated at every sampled time. Observers may fill
/// the optional columns of the row.
pub trait RunObserver {
    fn observe(&mut self, sample: &Sample<'_>, row: &mut DiagnosticsRow) -> Result<()>;
}

fn base_row(sample: &Sample<'_>) -> DiagnosticsRow {
    let mf = sample.measures;
    let state = sample.state;
    let mut row = DiagnosticsRow {
        t: state.t,
        e_total: dirichlet_energy(&state.u, state.eps, sample.potential),
        e_boundary: boundary_energy(&state.u, state.eps, sample.potential),
        dissipation: sample.dissipation,
        ..Default::default()
    };
    if state.t >= discrepancy_burn_in(state.eps) {
        let st = discrepancy_stats(mf);
        row.sup_xi = Some(st.sup_xi);
        row.int_abs_xi = Some(st.int_abs_xi);
    }
    if state.t >= state.eps * state.eps {
        row.sup_eps_grad = Some(mf.sup_eps_gradient());
    }
    row
}

fn record(
    state: &State,
    potential: &PotentialSpec,
    dissipation: f64,
    observers: &mut [&mut dyn RunObserver],
    table: &mut DiagnosticsTable,
) -> Result<()> {
    let mf = MeasureFields::new(&state.u, state.eps, potential);
    let sample = Sample {
        state,
        measures: &mf,
        potential,
        dissipation,
    };
    let mut row = base_row(&sample);
    for obs in observers.iter_mut() {
        obs.observe(&sample, &mut row)?;
    }
    table.rows.push(row);
    Ok(())
}

/// Advances to `config.t_end`, sampling diagnostics at `t = 0`, every
/// `save_every` steps, at each checkpoint and at the final time.
pub fn run(
    initial: State,
    config: &SolverConfig,
    potential: &PotentialSpec,
    observers: &mut [&mut dyn RunObserver],
) -> Result<(State, DiagnosticsTable)> {
    config.validate(initial.grid())?;
    let mut checkpoints: Vec<f64> = config
        .checkpoints
        .iter()
        .copied()
        .filter(|&c| c > initial.t && c < config.t_end)
        .collect();
    checkpoints.sort_by(|a, b| a.total_cmp(b));
    checkpoints.dedup();
    let mut next_cp = 0usize;

    let mut table = DiagnosticsTable {
        max_abs_u: initial.u.max_abs(),
        ..Default::default()
    };
    let mut dissipation = 0.0;
    let mut stepper = Stepper::new(*initial.grid(), config.eps, config.scheme, potential);
    let mut state = initial;
    record(&state, potential, dissipation, observers, &mut table)?;

    let tiny = 1e-9 * config.dt;
    while state.t < config.t_end - tiny {
        let mut target = config.t_end;
        if next_cp < checkpoints.len() {
            target = target.min(checkpoints[next_cp]);
        }
        let mut h = config.dt.min(target - state.t);
        let mut landed = false;
        if target - state.t - h <= tiny {
            h = target - state.t;
            landed = true;
        }
        let out = stepper.step(&state, h)?;
        dissipation += out.dt * out.dissipation_rate;
        state = out.state;
        if landed {
            state.t = target;
            state.u.t = target;
        }
        table.max_abs_u = table.max_abs_u.max(state.u.max_abs());
        table.steps = state.step;
        let at_cp = next_cp < checkpoints.len() && landed && target == checkpoints[next_cp];
        if at_cp {
            next_cp += 1;
        }
        let at_end = state.t >= config.t_end - tiny;
        if at_cp || at_end || state.step % config.save_every == 0 {
            record(&state, potential, dissipation, observers, &mut table)?;
        }
    }
    Ok((state, table))
}

/// `|E(T) + ∫₀ᵀ D dt − E(0)| / E(0)` from the first and last rows.
pub fn energy_identity_defect(table: &DiagnosticsTable) -> Result<f64> {
    let first = table.first()?;
    let last = table.last()?;
    let gap = (last.e_total + last.dissipation - first.e_total).abs();
    if first.e_total == 0.0 {
        return Ok(gap);
    }
    Ok(gap / first.e_total)
}

/// `max ε|∇u|` over cells.
pub fn sup_eps_gradient(state: &State) -> f64 {
    let (gx, gy) = state.u.gradient();
    let m = gx
        .values
        .iter()
        .zip(&gy.values)
        .fold(0.0f64, |m, (a, b)| m.max(a.hypot(*b)));
    state.eps * m
}

/// Sharp-interface radius of a circle shrinking by curvature: `√(r₀² − 2t)`.
pub fn shrinking_circle_radius(r0: f64, t: f64) -> f64 {
    (r0 * r0 - 2.0 * t).max(0.0).sqrt()
}

/// One-dimensional verification mode: Allen–Cahn on `[−L, L]` with Neumann
/// ends, same IMEX treatment. This geometry exists only to check the time
/// integrator against the exact stationary standing wave.
pub mod interval {
    use super::*;

    #[derive(Debug, Clone)]
    pub struct IntervalRun {
        pub initial_position: f64,
        pub final_position: f64,
        pub cell_width: f64,
        pub max_abs_u: f64,
    }

    impl IntervalRun {
        pub fn drift(&self) -> f64 {
            (self.final_position - self.initial_position).abs()
        }
    }

    fn zero_crossing(x: &[f64], u: &[f64]) -> Option<f64> {
        u.windows(2)
            .position(|w| w[0] >= 0.0 && w[1] < 0.0 || w[0] < 0.0 && w[1] >= 0.0)
            .map(|k| {
                let (a, b) = (u[k], u[k + 1]);
                x[k] + (x[k + 1] - x[k]) * a / (a - b)
            })
    }

    /// Starts from `Φ(−x/ε)` and integrates to `t_end`.
    pub fn standing_wave_run(
        potential: &PotentialSpec,
        eps: f64,
        half_length: f64,
        cells: usize,
        t_end: f64,
    ) -> Result<IntervalRun> {
        if cells < 8 || !(eps > 0.0) || !(half_length > 0.0) {
            return Err(Error::InvalidConfig(
                "interval run needs eps > 0, L > 0, >= 8 cells",
            ));
        }
        let h = 2.0 * half_length / cells as f64;
        let xs: Vec<f64> = (0..cells)
            .map(|i| -half_length + (i as f64 + 0.5) * h)
            .collect();
        let wave = potential.standing_wave();
        let mut u: Vec<f64> = xs.iter().map(|&x| wave.phi(-x / eps)).collect();
        let x0 = zero_crossing(&xs, &u).ok_or(Error::NoInterface)?;
        let steps = (t_end / SolverConfig::auto_dt(eps)).ceil().max(1.0) as usize;
        let dt = t_end / steps as f64;
        let matrices = |k: f64| {
            let mut a = vec![-k; cells];
            let mut c = vec![-k; cells];
            a[0] = 0.0;
            c[cells - 1] = 0.0;
            let b: Vec<f64> = (0..cells).map(|i| 1.0 - a[i] - c[i]).collect();
            (a, b, c)
        };
        let (af, bf, cf) = matrices(dt / (h * h));
        let (ah, bh, ch) = matrices(0.5 * dt / (h * h));
        let eps2 = eps * eps;
        let mut scratch = vec![0.0; cells];
        let mut max_abs = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let imex =
            |v: &mut Vec<f64>, h: f64, a: &[f64], b: &[f64], c: &[f64], scratch: &mut Vec<f64>| {
                for x in v.iter_mut() {
                    *x -= h * potential.dw(*x) / eps2;
                }
                solve_tridiagonal(a, b, c, v, scratch);
            };
        for step in 0..steps {
            let mut full = u.clone();
            imex(&mut full, dt, &af, &bf, &cf, &mut scratch);
            imex(&mut u, 0.5 * dt, &ah, &bh, &ch, &mut scratch);
            imex(&mut u, 0.5 * dt, &ah, &bh, &ch, &mut scratch);
            for (v, f) in u.iter_mut().zip(&full) {
                *v = 2.0 * *v - f;
            }
            if u.iter().any(|v| !v.is_finite()) {
                return Err(Error::NumericalBlowup {
                    step: step as u64 + 1,
                });
            }
            max_abs = u.iter().fold(max_abs, |m, v| m.max(v.abs()));
        }
        let x1 = zero_crossing(&xs, &u).ok_or(Error::NoInterface)?;
        Ok(IntervalRun {
            initial_position: x0,
            final_position: x1,
            cell_width: h,
            max_abs_u: max_abs,
        })
    }
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn maximum_principle_and_energy_decay(values in proptest::collection::vec(-1.0f64..1.0, 16 * 16), explicit in any::<bool>()) {
            let p = PotentialSpec::quartic();
            let g = PolarGrid::new(16, 16, 1.0).unwrap();
            let eps = 0.25;
            let u = ScalarField::from_values(g, 0.0, values).unwrap();
            let mut cfg = SolverConfig::new(eps, 0.05);
            if explicit {
                cfg.scheme = Scheme::Explicit;
                cfg.dt = 2e-5;
                cfg.t_end = 0.02;
            }
            let (_, table) = run(State::new(u, eps), &cfg, &p, &mut []).unwrap();
            prop_assert!(table.max_abs_u <= 1.0 + 1e-9);
            prop_assert!(table.max_energy_increase() <= 1e-10);
        }
    }
}
