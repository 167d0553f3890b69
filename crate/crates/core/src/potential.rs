//! Double-well potentials, the one-dimensional standing wave and the
//! surface tension constant.

// Float methods for builds where std is not linked.
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;
use core::fmt;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// A `C³` double well with equal minima at `±1`.
pub trait DoubleWell: Send + Sync {
    fn w(&self, u: f64) -> f64;
    fn dw(&self, u: f64) -> f64;
    fn d2w(&self, u: f64) -> f64;
}

/// `W(u) = (1 − u²)² / 4`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Quartic;

impl DoubleWell for Quartic {
    #[inline]
    fn w(&self, u: f64) -> f64 {
        let a = 1.0 - u * u;
        0.25 * a * a
    }
    #[inline]
    fn dw(&self, u: f64) -> f64 {
        u * u * u - u
    }
    #[inline]
    fn d2w(&self, u: f64) -> f64 {
        3.0 * u * u - 1.0
    }
}

/// A double well together with its structural constants: `W′ < 0` on
/// `(γ, 1)`, `W′ > 0` on `(−1, γ)` and `W″ ≥ κ` for `α ≤ |u| ≤ 1`.
#[derive(Clone)]
pub struct PotentialSpec {
    pub name: String,
    pub gamma: f64,
    pub alpha: f64,
    pub kappa: f64,
    well: Arc<dyn DoubleWell>,
    wave: StandingWave,
    quartic: bool,
}

impl fmt::Debug for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialSpec")
            .field("name", &self.name)
            .field("gamma", &self.gamma)
            .field("alpha", &self.alpha)
            .field("kappa", &self.kappa)
            .finish_non_exhaustive()
    }
}

impl PotentialSpec {
    /// The quartic well with `γ = 0`, `α = √(2/3)`, `κ = 1`.
    pub fn quartic() -> Self {
        PotentialSpec {
            name: "quartic".into(),
            gamma: 0.0,
            alpha: (2.0f64 / 3.0).sqrt(),
            kappa: 1.0,
            well: Arc::new(Quartic),
            wave: StandingWave::Quartic,
            quartic: true,
        }
    }

    /// A user-supplied well. The structural conditions are checked on a
    /// sample grid; the standing wave is integrated numerically.
    pub fn custom(
        name: impl Into<String>,
        well: Arc<dyn DoubleWell>,
        gamma: f64,
        alpha: f64,
        kappa: f64,
    ) -> Result<Self> {
        let mut spec = PotentialSpec {
            name: name.into(),
            gamma,
            alpha,
            kappa,
            well,
            wave: StandingWave::Quartic,
            quartic: false,
        };
        spec.validate()?;
        spec.wave = StandingWave::integrate(&*spec.well);
        Ok(spec)
    }

    pub fn is_quartic(&self) -> bool {
        self.quartic
    }

    #[inline]
    pub fn w(&self, u: f64) -> f64 {
        self.well.w(u)
    }

    #[inline]
    pub fn dw(&self, u: f64) -> f64 {
        self.well.dw(u)
    }

    /// `(W(u), W′(u), W″(u))`.
    pub fn eval(&self, u: f64) -> (f64, f64, f64) {
        (self.well.w(u), self.well.dw(u), self.well.d2w(u))
    }

    pub fn standing_wave(&self) -> &StandingWave {
        &self.wave
    }

    /// Checks the double-well conditions by sampling `u ∈ [−1.5, 1.5]`.
    pub fn validate(&self) -> Result<()> {
        if !(-1.0 < self.gamma && self.gamma < 1.0) {
            return Err(Error::InvalidConfig("gamma must lie in (-1, 1)"));
        }
        if !(0.0 < self.alpha && self.alpha < 1.0) {
            return Err(Error::InvalidConfig("alpha must lie in (0, 1)"));
        }
        if !(self.kappa > 0.0) {
            return Err(Error::InvalidConfig("kappa must be positive"));
        }
        if self.w(1.0).abs() > 1e-12 || self.w(-1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig("W(+-1) must vanish"));
        }
        let n = 3000;
        for k in 0..=n {
            let u = -1.5 + 3.0 * k as f64 / n as f64;
            let (w, dw, d2w) = self.eval(u);
            if w < -1e-14 {
                return Err(Error::InvalidConfig("W must be nonnegative"));
            }
            let inner = u.abs() < 1.0 - 1e-9;
            if inner && u > self.gamma + 1e-9 && dw >= 0.0 {
                return Err(Error::InvalidConfig("W' must be negative on (gamma, 1)"));
            }
            if inner && u < self.gamma - 1e-9 && dw <= 0.0 {
                return Err(Error::InvalidConfig("W' must be positive on (-1, gamma)"));
            }
            if u.abs() >= self.alpha && u.abs() <= 1.0 && d2w < self.kappa * (1.0 - 1e-12) {
                return Err(Error::InvalidConfig(
                    "W'' must be at least kappa for alpha <= |u| <= 1",
                ));
            }
        }
        Ok(())
    }
}

/// The heteroclinic profile `Φ` with `Φ″ = W′(Φ)`, `Φ(0) = 0`, `Φ(±∞) = ±1`.
#[derive(Debug, Clone)]
pub enum StandingWave {
    /// `Φ(s) = tanh(s/√2)`.
    Quartic,
    /// Nodes `s_k = s0 + k·h` with values and slopes, interpolated by cubic
    /// Hermite polynomials.
    Tabulated {
        s0: f64,
        h: f64,
        phi: Vec<f64>,
        dphi: Vec<f64>,
    },
}

const TABLE_STEP: f64 = 1e-3;
const TABLE_HALF_WIDTH: f64 = 20.0;

impl StandingWave {
    /// Integrates `Φ′ = √(2W(Φ))` from `Φ(0) = 0` in both directions with
    /// classical RK4 at a fixed step of `1e−3`.
    pub fn integrate(well: &dyn DoubleWell) -> Self {
        let h = TABLE_STEP;
        let half = (TABLE_HALF_WIDTH / h) as usize;
        let slope = |p: f64| (2.0 * well.w(p).max(0.0)).sqrt();
        let mut forward = Vec::with_capacity(half + 1);
        let mut backward = Vec::with_capacity(half + 1);
        for (dir, out) in [(1.0, &mut forward), (-1.0, &mut backward)] {
            let mut p = 0.0f64;
            out.push(p);
            let step = dir * h;
            for _ in 0..half {
                let k1 = slope(p);
                let k2 = slope(p + 0.5 * step * k1);
                let k3 = slope(p + 0.5 * step * k2);
                let k4 = slope(p + step * k3);
                p += step * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
                p = p.clamp(-1.0, 1.0);
                out.push(p);
            }
        }
        let mut phi: Vec<f64> = backward.iter().rev().copied().collect();
        phi.extend_from_slice(&forward[1..]);
        let dphi = phi.iter().map(|&p| slope(p)).collect();
        StandingWave::Tabulated {
            s0: -(half as f64) * h,
            h,
            phi,
            dphi,
        }
    }

    fn hermite(&self, s: f64) -> (f64, f64) {
        match self {
            StandingWave::Quartic => unreachable!(),
            StandingWave::Tabulated { s0, h, phi, dphi } => {
                let n = phi.len();
                let x = (s - s0) / h;
                if x <= 0.0 {
                    return (phi[0], 0.0);
                }
                if x >= (n - 1) as f64 {
                    return (phi[n - 1], 0.0);
                }
                let k = (x.floor() as usize).min(n - 2);
                let t = x - k as f64;
                let (p0, p1) = (phi[k], phi[k + 1]);
                let (m0, m1) = (dphi[k] * h, dphi[k + 1] * h);
                let t2 = t * t;
                let t3 = t2 * t;
                let v = (2.0 * t3 - 3.0 * t2 + 1.0) * p0
                    + (t3 - 2.0 * t2 + t) * m0
                    + (-2.0 * t3 + 3.0 * t2) * p1
                    + (t3 - t2) * m1;
                let d = ((6.0 * t2 - 6.0 * t) * p0
                    + (3.0 * t2 - 4.0 * t + 1.0) * m0
                    + (-6.0 * t2 + 6.0 * t) * p1
                    + (3.0 * t2 - 2.0 * t) * m1)
                    / h;
                (v, d)
            }
        }
    }

    pub fn phi(&self, s: f64) -> f64 {
        match self {
            StandingWave::Quartic => (s / SQRT_2).tanh(),
            _ => self.hermite(s).0,
        }
    }

    pub fn dphi(&self, s: f64) -> f64 {
        match self {
            StandingWave::Quartic => {
                let t = (s / SQRT_2).tanh();
                (1.0 - t * t) / SQRT_2
            }
            _ => self.hermite(s).1,
        }
    }

    /// Closed form for the quartic well, central second difference with
    /// step `1e−4` otherwise.
    pub fn d2phi(&self, s: f64) -> f64 {
        match self {
            StandingWave::Quartic => {
                let t = (s / SQRT_2).tanh();
                -t * (1.0 - t * t)
            }
            _ => {
                let h = 1e-4;
                (self.phi(s + h) - 2.0 * self.phi(s) + self.phi(s - h)) / (h * h)
            }
        }
    }
}

/// `max |Φ″(s) − W′(Φ(s))|` over the samples.
pub fn standing_wave_residual(spec: &PotentialSpec, samples: &[f64]) -> f64 {
    let wave = spec.standing_wave();
    samples
        .iter()
        .map(|&s| (wave.d2phi(s) - spec.dw(wave.phi(s))).abs())
        .fold(0.0, f64::max)
}

/// `σ = ∫₋₁¹ √(2W(u)) du`, adaptive Simpson with absolute tolerance `1e−10`.
pub fn surface_tension(spec: &PotentialSpec) -> Result<f64> {
    surface_tension_split(spec, &[])
}

/// Surface tension with the quadrature split at extra interior breakpoints.
/// The result must not depend on the breakpoints beyond the tolerance.
pub fn surface_tension_split(spec: &PotentialSpec, breakpoints: &[f64]) -> Result<f64> {
    let mut nodes: Vec<f64> = Vec::with_capacity(breakpoints.len() + 2);
    nodes.push(-1.0);
    nodes.extend(
        breakpoints
            .iter()
            .copied()
            .filter(|b| *b > -1.0 && *b < 1.0),
    );
    nodes.push(1.0);
    nodes.sort_by(|a, b| a.total_cmp(b));
    let tol = 1e-10 / (nodes.len() - 1) as f64;
    let f = |u: f64| (2.0 * spec.w(u).max(0.0)).sqrt();
    let mut total = 0.0;
    for pair in nodes.windows(2) {
        total += adaptive_simpson(&f, pair[0], pair[1], tol)?;
    }
    Ok(total)
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 {
            return Err(Error::Quadrature {
                estimate: left + right,
            });
        }
        Ok(rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
            + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, a, b);
    rec(f, a, b, fa, fm, fb, whole, tol, 48)
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn well_shape(u in -1.5f64..1.5) {
            let p = PotentialSpec::quartic();
            prop_assert!(p.w(u) >= 0.0);
            if u > p.gamma && u < 1.0 {
                prop_assert!(p.dw(u) < 0.0);
            }
            if u > -1.0 && u < p.gamma {
                prop_assert!(p.dw(u) > 0.0);
            }
            if u.abs() >= p.alpha && u.abs() <= 1.0 {
                prop_assert!(p.eval(u).2 >= p.kappa);
            }
        }

        #[test]
        fn profile_equipartition(s in -12.0f64..12.0, eps in 0.005f64..0.5) {
            let p = PotentialSpec::quartic();
            let wave = p.standing_wave();
            let v = wave.phi(s / eps);
            let dv = wave.dphi(s / eps) / eps;
            prop_assert!((eps * dv * dv / 2.0 - p.w(v) / eps).abs() <= 1e-10);
            prop_assert!((wave.dphi(s) - (2.0 * p.w(wave.phi(s))).sqrt()).abs() <= 1e-12);
            prop_assert!(wave.dphi(s) > 0.0 && wave.phi(s).abs() < 1.0);
        }
    }
}
