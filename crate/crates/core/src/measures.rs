//! Diffuse energy and discrepancy densities and the scalar diagnostics built
//! from them.
//!
//! `e = ε|∇u|²/2 + W(u)/ε` is the density of the energy measure and
//! `ξ = ε|∇u|²/2 − W(u)/ε` the density of the discrepancy measure.

// Float methods for builds where std is not linked.
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::grid::{PolarGrid, ScalarField};
use crate::potential::PotentialSpec;
use crate::sum::pairwise_sum;

/// Pointwise densities of one snapshot, with the gradient that produced them.
#[derive(Debug, Clone)]
pub struct MeasureFields {
    pub grid: PolarGrid,
    pub t: f64,
    pub eps: f64,
    pub gx: Vec<f64>,
    pub gy: Vec<f64>,
    pub e: Vec<f64>,
    pub xi: Vec<f64>,
}

impl MeasureFields {
    pub fn new(u: &ScalarField, eps: f64, potential: &PotentialSpec) -> Self {
        let (gx, gy) = u.gradient();
        let n = u.values.len();
        let mut e = Vec::with_capacity(n);
        let mut xi = Vec::with_capacity(n);
        for k in 0..n {
            let grad2 = gx.values[k] * gx.values[k] + gy.values[k] * gy.values[k];
            let kinetic = 0.5 * eps * grad2;
            let well = potential.w(u.values[k]) / eps;
            e.push(kinetic + well);
            xi.push(kinetic - well);
        }
        MeasureFields {
            grid: u.grid,
            t: u.t,
            eps,
            gx: gx.values,
            gy: gy.values,
            e,
            xi,
        }
    }

    #[inline]
    pub fn grad(&self, k: usize) -> Vec2 {
        Vec2::new(self.gx[k], self.gy[k])
    }

    /// `μ(Ω)`.
    pub fn energy(&self) -> f64 {
        self.grid.integrate_by(|k| self.e[k])
    }

    /// `∫ φ dμ` for cellwise weights `φ`.
    pub fn weighted_energy(&self, phi: &[f64]) -> f64 {
        self.grid.integrate_by(|k| phi[k] * self.e[k])
    }

    /// `max ε|∇u|` over cells.
    pub fn sup_eps_gradient(&self) -> f64 {
        let mut m = 0.0f64;
        for k in 0..self.e.len() {
            m = m.max(self.grad(k).norm());
        }
        self.eps * m
    }
}

/// Discrete total energy `∫ (ε/2)|∇_h u|² + W(u)/ε` with the face-difference
/// gradient of the five-point Laplacian. This is the functional the time
/// stepper dissipates; `μ(Ω)` from centered gradients agrees with it to
/// `O(Δr²)` but is not exactly monotone along discrete trajectories.
pub fn dirichlet_energy(u: &ScalarField, eps: f64, potential: &PotentialSpec) -> f64 {
    let g2 = u.face_grad_sq();
    u.grid
        .integrate_by(|k| 0.5 * eps * g2.values[k] + potential.w(u.values[k]) / eps)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscrepancyStats {
    pub sup_xi: f64,
    pub int_abs_xi: f64,
}

/// `sup ξ` and `∫|ξ| dx`.
pub fn discrepancy_stats(mf: &MeasureFields) -> DiscrepancyStats {
    let sup_xi = mf.xi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let int_abs_xi = mf.grid.integrate_by(|k| mf.xi[k].abs());
    DiscrepancyStats { sup_xi, int_abs_xi }
}

/// Burn-in before discrepancy statements apply: `4ε²`.
pub fn discrepancy_burn_in(eps: f64) -> f64 {
    4.0 * eps * eps
}

/// Boundary energy density at the ring angles `θ_j`. The trace of `u` is the
/// even quadratic extrapolation of the two outer rings; on `∂Ω` the normal
/// derivative is zero, so only the tangential derivative enters.
pub fn boundary_energy_density(u: &ScalarField, eps: f64, potential: &PotentialSpec) -> Vec<f64> {
    let g = &u.grid;
    let ub = u.boundary_values();
    let n = ub.len();
    let h = g.radius() * g.dtheta();
    (0..n)
        .map(|j| {
            let tang = (ub[(j + 1) % n] - ub[(j + n - 1) % n]) / (2.0 * h);
            0.5 * eps * tang * tang + potential.w(ub[j]) / eps
        })
        .collect()
}

/// `∫_{∂Ω} (ε|∇u|²/2 + W(u)/ε) dH¹`.
pub fn boundary_energy(u: &ScalarField, eps: f64, potential: &PotentialSpec) -> f64 {
    u.grid
        .integrate_boundary(&boundary_energy_density(u, eps, potential))
}

/// Boundary trace of `|∇u|²` and its outward normal derivative at each
/// `θ_j`, from the quadratic through the three outermost rings.
pub fn grad_sq_boundary_trace(u: &ScalarField) -> (Vec<f64>, Vec<f64>) {
    let g = &u.grid;
    let (gx, gy) = u.gradient();
    let sq = |i: usize, j: usize| {
        let k = g.idx(i, j);
        gx.values[k] * gx.values[k] + gy.values[k] * gy.values[k]
    };
    let n = g.nr();
    let mut trace = Vec::with_capacity(g.ntheta());
    let mut normal = Vec::with_capacity(g.ntheta());
    for j in 0..g.ntheta() {
        let (f1, f2, f3) = (sq(n - 1, j), sq(n - 2, j), sq(n - 3, j));
        trace.push(1.875 * f1 - 1.25 * f2 + 0.375 * f3);
        normal.push((2.0 * f1 - 3.0 * f2 + f3) / g.dr());
    }
    (trace, normal)
}

/// `μ(B_r(y) ∩ Ω)` counting whole cells whose centers lie in the open ball.
pub fn ball_mass(mf: &MeasureFields, y: Vec2, r: f64) -> f64 {
    let g = &mf.grid;
    let ry = y.norm();
    let lo = ((ry - r) / g.dr() - 0.5).floor().max(0.0) as usize;
    let hi = (((ry + r) / g.dr() - 0.5).ceil().max(0.0) as usize + 1).min(g.nr());
    let mut terms = Vec::new();
    for i in lo..hi {
        for j in 0..g.ntheta() {
            if (g.center(i, j) - y).norm() < r {
                terms.push(mf.e[g.idx(i, j)] * g.cell_area(i));
            }
        }
    }
    pairwise_sum(&terms)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityReport {
    /// `max μ(B_r(y) ∩ Ω)/r` over the samples (`n = 2`).
    pub d0: f64,
    pub samples: Vec<DensitySample>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensitySample {
    pub y: Vec2,
    pub r: f64,
    pub ratio: f64,
}

/// Upper density ratios `μ(B_r(y) ∩ Ω)/r` at the given centers and radii.
/// Radii must satisfy `0 < r ≤ c₂/4`.
pub fn density_ratios(
    mf: &MeasureFields,
    c2: f64,
    samples: &[(Vec2, f64)],
) -> Result<DensityReport> {
    let mut out = Vec::with_capacity(samples.len());
    let mut d0 = 0.0f64;
    for &(y, r) in samples {
        if !(r > 0.0 && r <= 0.25 * c2 * (1.0 + 1e-12)) {
            return Err(Error::InvalidConfig("density radius must lie in (0, c2/4]"));
        }
        let ratio = ball_mass(mf, y, r) / r;
        d0 = d0.max(ratio);
        out.push(DensitySample { y, r, ratio });
    }
    Ok(DensityReport { d0, samples: out })
}

/// A space-time test function `φ(x, t)` with closed-form derivatives.
pub trait TestFunction {
    fn value(&self, x: Vec2, t: f64) -> f64;
    fn grad(&self, x: Vec2, t: f64) -> Vec2;
    fn dt(&self, _x: Vec2, _t: f64) -> f64 {
        0.0
    }
    /// `sup|φ| + sup|∇φ| + sup‖∇²φ‖` over the closed disk.
    fn c2_norm(&self) -> f64;
}

/// `φ ≡ c`.
#[derive(Debug, Clone, Copy)]
pub struct ConstantTest(pub f64);

impl TestFunction for ConstantTest {
    fn value(&self, _x: Vec2, _t: f64) -> f64 {
        self.0
    }
    fn grad(&self, _x: Vec2, _t: f64) -> Vec2 {
        Vec2::ZERO
    }
    fn c2_norm(&self) -> f64 {
        self.0.abs()
    }
}

/// `φ = 2 + cos(π r²/R²)`; its radial slope `−(2πr/R²) sin(πr²/R²)` vanishes
/// at `r = R`.
#[derive(Debug, Clone, Copy)]
pub struct RadialCosine {
    pub radius: f64,
}

impl TestFunction for RadialCosine {
    fn value(&self, x: Vec2, _t: f64) -> f64 {
        2.0 + (PI * x.norm_sq() / (self.radius * self.radius)).cos()
    }
    fn grad(&self, x: Vec2, _t: f64) -> Vec2 {
        let r2 = self.radius * self.radius;
        let s = -2.0 * PI / r2 * (PI * x.norm_sq() / r2).sin();
        x * s
    }
    fn c2_norm(&self) -> f64 {
        // φ = 2 + cos(q), q = π|x|²/R². ∇φ = −(2π/R²) sin(q) x,
        // ∇²φ = −(2π/R²)[sin(q) I + (2π/R²) cos(q) x⊗x].
        // Bound each sup by a dense radial scan; the Hessian eigenvalues are
        // −(2π/R²)sin q and −(2π/R²)(sin q + 2q cos q).
        let a = 2.0 * PI / (self.radius * self.radius);
        let mut g = 0.0f64;
        let mut h = 0.0f64;
        let n = 20_000;
        for k in 0..=n {
            let r = self.radius * k as f64 / n as f64;
            let q = PI * r * r / (self.radius * self.radius);
            g = g.max((a * q.sin() * r).abs());
            h = h
                .max((a * q.sin()).abs())
                .max((a * (q.sin() + 2.0 * q * q.cos())).abs());
        }
        3.0 + g + h
    }
}

/// Cellwise values of `φ(·, t)`.
pub fn sample_test_function(grid: &PolarGrid, phi: &dyn TestFunction, t: f64) -> Vec<f64> {
    grid.centers()
        .into_iter()
        .map(|x| phi.value(x, t))
        .collect()
}

/// Largest `|∇φ · ν|` over `points` equally spaced boundary points at time `t`.
pub fn max_normal_derivative(phi: &dyn TestFunction, radius: f64, t: f64, points: usize) -> f64 {
    (0..points)
        .map(|k| {
            let th = 2.0 * PI * k as f64 / points as f64;
            let nu = Vec2::from_polar(1.0, th);
            phi.grad(nu * radius, t).dot(nu).abs()
        })
        .fold(0.0, f64::max)
}

/// Rejects test functions whose normal derivative exceeds `1e−8` on `∂Ω`.
pub fn require_neumann(phi: &dyn TestFunction, radius: f64, times: &[f64]) -> Result<()> {
    let worst = times
        .iter()
        .map(|&t| max_normal_derivative(phi, radius, t, 720))
        .fold(0.0, f64::max);
    if worst > 1e-8 {
        return Err(Error::NeumannViolation {
            max_normal_derivative: worst,
        });
    }
    Ok(())
}

/// Largest positive increment of `∫φ dμ_t − C₁‖φ‖_{C²} t` between
/// consecutive samples. Zero when the quantity is nonincreasing throughout.
pub fn semidecreasing_check(
    times: &[f64],
    weighted_energy: &[f64],
    c1: f64,
    phi_c2_norm: f64,
) -> f64 {
    let q: Vec<f64> = times
        .iter()
        .zip(weighted_energy)
        .map(|(&t, &m)| m - c1 * phi_c2_norm * t)
        .collect();
    q.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn densities_split_energy(values in proptest::collection::vec(-1.2f64..1.2, 16 * 16), eps in 0.01f64..0.5) {
            let p = PotentialSpec::quartic();
            let g = PolarGrid::new(16, 16, 1.0).unwrap();
            let u = ScalarField::from_values(g, 0.0, values).unwrap();
            let mf = MeasureFields::new(&u, eps, &p);
            for k in 0..mf.e.len() {
                let scale = 1.0 + mf.e[k];
                prop_assert!(mf.e[k] >= mf.xi[k].abs());
                prop_assert!((mf.e[k] + mf.xi[k] - eps * mf.grad(k).norm_sq()).abs() <= 1e-12 * scale);
                prop_assert!((mf.e[k] - mf.xi[k] - 2.0 * p.w(u.values[k]) / eps).abs() <= 1e-12 * scale);
            }
        }
    }
}
