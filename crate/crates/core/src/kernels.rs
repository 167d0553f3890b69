//! Backward heat kernels, their reflection across the disk boundary, the
//! truncated pair `ρ₁, ρ₂`, the monotonicity tracker and Gaussian mass
//! bounds for the energy measure.

use alloc::vec::Vec;
use core::f64::consts::PI;

// Float methods for builds where std is not linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::diagnostics::DiagnosticsRow;
use crate::error::{Error, Result};
use crate::geometry::{CutoffEta, DiskGeometry, Vec2};
use crate::grid::PolarGrid;
use crate::measures::MeasureFields;
use crate::solver::{RunObserver, Sample};
use crate::sum::pairwise_sum_by;

/// Value and derivatives of a kernel at one space-time point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelJet<const N: usize> {
    pub value: f64,
    pub grad: [f64; N],
    pub hess: [[f64; N]; N],
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelOrder {
    Value,
    Grad,
    Hess,
    Dt,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelValue<const N: usize> {
    Scalar(f64),
    Vector([f64; N]),
    Matrix([[f64; N]; N]),
}

impl<const N: usize> KernelJet<N> {
    pub fn select(&self, order: KernelOrder) -> KernelValue<N> {
        match order {
            KernelOrder::Value => KernelValue::Scalar(self.value),
            KernelOrder::Grad => KernelValue::Vector(self.grad),
            KernelOrder::Hess => KernelValue::Matrix(self.hess),
            KernelOrder::Dt => KernelValue::Scalar(self.dt),
        }
    }
}

#[inline]
fn dot<const N: usize>(a: &[f64; N], b: &[f64; N]) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        s += a[i] * b[i];
    }
    s
}

/// `(I − a⊗a)·M`.
fn projected_trace<const N: usize>(a: &[f64; N], m: &[[f64; N]; N]) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        for j in 0..N {
            let p = if i == j { 1.0 } else { 0.0 } - a[i] * a[j];
            s += p * m[i][j];
        }
    }
    s
}

/// `ρ_{(y,s)}(x,t) = (4π(s−t))^{−(n−1)/2} exp(−|x−y|²/(4(s−t)))` in `ℝᴺ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatKernel<const N: usize> {
    pub y: [f64; N],
    pub s: f64,
}

impl<const N: usize> HeatKernel<N> {
    pub fn new(y: [f64; N], s: f64) -> Self {
        HeatKernel { y, s }
    }

    /// `s − t`, or an error unless `t < s`.
    pub fn tau(&self, t: f64) -> Result<f64> {
        let tau = self.s - t;
        if tau > 0.0 {
            Ok(tau)
        } else {
            Err(Error::KernelTime { t, s: self.s })
        }
    }

    fn prefactor(tau: f64) -> f64 {
        (4.0 * PI * tau).powf(-0.5 * (N as f64 - 1.0))
    }

    pub fn value(&self, x: [f64; N], t: f64) -> Result<f64> {
        let tau = self.tau(t)?;
        let mut z2 = 0.0;
        for i in 0..N {
            z2 += (x[i] - self.y[i]) * (x[i] - self.y[i]);
        }
        Ok(Self::prefactor(tau) * (-z2 / (4.0 * tau)).exp())
    }

    pub fn jet(&self, x: [f64; N], t: f64) -> Result<KernelJet<N>> {
        let tau = self.tau(t)?;
        let mut z = [0.0; N];
        for i in 0..N {
            z[i] = x[i] - self.y[i];
        }
        let z2 = dot(&z, &z);
        let rho = Self::prefactor(tau) * (-z2 / (4.0 * tau)).exp();
        let mut grad = [0.0; N];
        let mut hess = [[0.0; N]; N];
        for i in 0..N {
            grad[i] = -z[i] * rho / (2.0 * tau);
            for j in 0..N {
                let delta = if i == j { 1.0 } else { 0.0 };
                hess[i][j] = (z[i] * z[j] / (4.0 * tau * tau) - delta / (2.0 * tau)) * rho;
            }
        }
        let dt = ((N as f64 - 1.0) / (2.0 * tau) - z2 / (4.0 * tau * tau)) * rho;
        Ok(KernelJet {
            value: rho,
            grad,
            hess,
            dt,
        })
    }

    pub fn eval(&self, x: [f64; N], t: f64, order: KernelOrder) -> Result<KernelValue<N>> {
        Ok(self.jet(x, t)?.select(order))
    }
}

/// `(a·∇ρ)²/ρ + (I − a⊗a)·∇²ρ + ∂_tρ`, which vanishes identically.
pub fn identity_residual_standard<const N: usize>(
    kernel: &HeatKernel<N>,
    x: [f64; N],
    t: f64,
    a: [f64; N],
) -> Result<f64> {
    let j = kernel.jet(x, t)?;
    let ag = dot(&a, &j.grad);
    Ok(ag * ag / j.value + projected_trace(&a, &j.hess) + j.dt)
}

/// How derivatives of the reflected kernel treat `x ↦ x̃`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Jacobian {
    /// `∇ζ = I − ν⊗ν` with `ν = x/|x|` differentiated only where it appears
    /// explicitly; this is the form under which the reflected identity is
    /// an algebraic equality.
    Frozen,
    /// Full chain rule through `x̃ = (2R/|x| − 1)x`.
    Exact,
}

/// `ρ̃_{(y,s)}(x,t) = ρ_{(y,s)}(x̃,t)` on the disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectedKernel {
    pub base: HeatKernel<2>,
    pub geometry: DiskGeometry,
}

/// `∂_j(ν_i ν_k)` for `ν = x/|x|`, indexed `[i][j][k]`.
fn normal_product_derivative(x: Vec2) -> [[[f64; 2]; 2]; 2] {
    let r = x.norm();
    let nu = [x.x / r, x.y / r];
    let p = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 } - nu[i] * nu[j];
    let mut d = [[[0.0; 2]; 2]; 2];
    for (i, di) in d.iter_mut().enumerate() {
        for (j, dij) in di.iter_mut().enumerate() {
            for (k, v) in dij.iter_mut().enumerate() {
                *v = (p(i, j) * nu[k] + nu[i] * p(k, j)) / r;
            }
        }
    }
    d
}

impl ReflectedKernel {
    pub fn new(geometry: DiskGeometry, y: Vec2, s: f64) -> Self {
        ReflectedKernel {
            base: HeatKernel::new(y.to_array(), s),
            geometry,
        }
    }

    fn reflect(&self, x: Vec2) -> Result<Vec2> {
        let r = x.norm();
        if r > self.geometry.radius * (1.0 + 1e-12) {
            return Err(Error::OutOfDomain {
                radius: r,
                domain_radius: self.geometry.radius,
            });
        }
        Ok(self.geometry.nearest_and_reflect(x)?.xtilde)
    }

    pub fn value(&self, x: Vec2, t: f64) -> Result<f64> {
        self.base.value(self.reflect(x)?.to_array(), t)
    }

    pub fn jet(&self, x: Vec2, t: f64, jacobian: Jacobian) -> Result<KernelJet<2>> {
        let xt = self.reflect(x)?;
        let tau = self.base.tau(t)?;
        let outer = self.base.jet(xt.to_array(), t)?;
        let w = [xt.x - self.base.y[0], xt.y - self.base.y[1]];
        let r = x.norm();
        let nu = [x.x / r, x.y / r];
        let rho = outer.value;
        let mut grad = [0.0; 2];
        let mut hess = [[0.0; 2]; 2];
        match jacobian {
            Jacobian::Frozen => {
                // ∇|x̃−y|² = 2(I − 2ν⊗ν)(x̃−y); ∇²|x̃−y|² = 2I − 4Σ_k ∂_j(ν_iν_k)(x̃_k − y_k).
                let nw = nu[0] * w[0] + nu[1] * w[1];
                let g = [
                    2.0 * (w[0] - 2.0 * nu[0] * nw),
                    2.0 * (w[1] - 2.0 * nu[1] * nw),
                ];
                let d = normal_product_derivative(x);
                for i in 0..2 {
                    grad[i] = -g[i] * rho / (4.0 * tau);
                    for j in 0..2 {
                        let curv = d[i][j][0] * w[0] + d[i][j][1] * w[1];
                        let delta = if i == j { 1.0 } else { 0.0 };
                        hess[i][j] = (g[i] * g[j] / (16.0 * tau * tau) - delta / (2.0 * tau)
                            + curv / tau)
                            * rho;
                    }
                }
            }
            Jacobian::Exact => {
                let big_r = self.geometry.radius;
                let c = 2.0 * big_r / r - 1.0;
                let c1 = -2.0 * big_r / (r * r);
                let c2 = 4.0 * big_r / (r * r * r);
                let xs = [x.x, x.y];
                // jac[k][i] = ∂x̃_k/∂x_i
                let mut jac = [[0.0; 2]; 2];
                for (k, row) in jac.iter_mut().enumerate() {
                    for (i, v) in row.iter_mut().enumerate() {
                        *v = if i == k { c } else { 0.0 } + c1 * nu[i] * xs[k];
                    }
                }
                for i in 0..2 {
                    grad[i] = jac[0][i] * outer.grad[0] + jac[1][i] * outer.grad[1];
                }
                for i in 0..2 {
                    for j in 0..2 {
                        let mut h = 0.0;
                        for k in 0..2 {
                            for l in 0..2 {
                                h += jac[k][i] * outer.hess[k][l] * jac[l][j];
                            }
                        }
                        let pij = if i == j { 1.0 } else { 0.0 } - nu[i] * nu[j];
                        for k in 0..2 {
                            let dik = if i == k { 1.0 } else { 0.0 };
                            let djk = if j == k { 1.0 } else { 0.0 };
                            let second = c1 * (nu[j] * dik + nu[i] * djk)
                                + xs[k] * (c2 * nu[i] * nu[j] + c1 * pij / r);
                            h += outer.grad[k] * second;
                        }
                        hess[i][j] = h;
                    }
                }
            }
        }
        Ok(KernelJet {
            value: rho,
            grad,
            hess,
            dt: outer.dt,
        })
    }
}

/// Both sides of the reflected identity
/// `(a·∇ρ̃)²/ρ̃ + (I − a⊗a)·∇²ρ̃ + ∂_tρ̃ = Σ (δ_ij − a_i a_j) ∂_j(ν_iν_k)(x̃_k − y_k) ρ̃/(s−t)`,
/// the left side from the frozen-Jacobian derivatives.
pub fn identity_residual_reflected(
    kernel: &ReflectedKernel,
    x: Vec2,
    t: f64,
    a: Vec2,
) -> Result<(f64, f64)> {
    let jet = kernel.jet(x, t, Jacobian::Frozen)?;
    let a = a.to_array();
    let ag = dot(&a, &jet.grad);
    let lhs = ag * ag / jet.value + projected_trace(&a, &jet.hess) + jet.dt;
    Ok((lhs, reflected_identity_rhs(kernel, x, t, a, jet.value)?))
}

fn reflected_identity_rhs(
    kernel: &ReflectedKernel,
    x: Vec2,
    t: f64,
    a: [f64; 2],
    rho: f64,
) -> Result<f64> {
    let tau = kernel.base.tau(t)?;
    let xt = kernel.geometry.nearest_and_reflect(x)?.xtilde;
    let w = [xt.x - kernel.base.y[0], xt.y - kernel.base.y[1]];
    let d = normal_product_derivative(x);
    let mut s = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let p = if i == j { 1.0 } else { 0.0 } - a[i] * a[j];
            for k in 0..2 {
                s += p * d[i][j][k] * w[k];
            }
        }
    }
    Ok(s * rho / tau)
}

/// The truncated pair `ρ₁ = η(x−y)ρ` and `ρ₂ = η(x̃−y)ρ̃` for one probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedKernels {
    pub y: Vec2,
    pub s: f64,
    pub geometry: DiskGeometry,
    eta: CutoffEta,
    reflected: bool,
}

impl TruncatedKernels {
    /// `ρ₂` is used when `y` lies in the closed tube `R − |y| ≤ c₂/2`;
    /// otherwise it is identically zero.
    pub fn new(geometry: DiskGeometry, y: Vec2, s: f64) -> Result<Self> {
        if y.norm() > geometry.radius {
            return Err(Error::OutOfDomain {
                radius: y.norm(),
                domain_radius: geometry.radius,
            });
        }
        let reflected = geometry.radius - y.norm() <= 0.5 * geometry.c2();
        Ok(TruncatedKernels {
            y,
            s,
            geometry,
            eta: geometry.cutoff(),
            reflected,
        })
    }

    pub fn uses_reflection(&self) -> bool {
        self.reflected
    }

    fn kernel(&self) -> HeatKernel<2> {
        HeatKernel::new(self.y.to_array(), self.s)
    }

    pub fn rho1(&self, x: Vec2, t: f64) -> Result<f64> {
        let eta = self.eta.eval(x - self.y);
        let v = self.kernel().value(x.to_array(), t)?;
        Ok(if eta == 0.0 { 0.0 } else { eta * v })
    }

    /// Zero for interior probes and for `|x| ≤ c₂/2`.
    pub fn rho2(&self, x: Vec2, t: f64) -> Result<f64> {
        self.kernel().tau(t)?;
        if !self.reflected || x.norm() <= 0.5 * self.geometry.c2() {
            return Ok(0.0);
        }
        let xt = self.geometry.nearest_and_reflect(x)?.xtilde;
        let eta = self.eta.eval(xt - self.y);
        if eta == 0.0 {
            return Ok(0.0);
        }
        Ok(eta * self.kernel().value(xt.to_array(), t)?)
    }

    pub fn sum(&self, x: Vec2, t: f64) -> Result<f64> {
        Ok(self.rho1(x, t)? + self.rho2(x, t)?)
    }

    /// `∇η(z)ρ(z) + η∇ρ(z)` at `z`.
    fn truncated_grad(&self, z: Vec2, t: f64) -> Result<Vec2> {
        let jet = self.kernel().jet(z.to_array(), t)?;
        let d = z - self.y;
        let (eta, deta, _) = self.eta.radial(d.norm());
        let dir = if d.norm() > 0.0 {
            d * (1.0 / d.norm())
        } else {
            Vec2::ZERO
        };
        Ok(dir * (deta * jet.value) + Vec2::from(jet.grad) * eta)
    }

    /// `∇(ρ₁ + ρ₂)` with the exact chain rule through the reflection.
    pub fn grad_sum(&self, x: Vec2, t: f64) -> Result<Vec2> {
        let mut g = self.truncated_grad(x, t)?;
        let r = x.norm();
        if self.reflected && r > 0.5 * self.geometry.c2() {
            let xt = self.geometry.nearest_and_reflect(x)?.xtilde;
            let outer = self.truncated_grad(xt, t)?;
            let big_r = self.geometry.radius;
            let c = 2.0 * big_r / r - 1.0;
            let c1 = -2.0 * big_r / (r * r);
            let nu = x * (1.0 / r);
            // Jacobian c·I + c1·x⊗ν, transposed onto the outer gradient.
            g = g + outer * c + nu * (c1 * x.dot(outer));
        }
        Ok(g)
    }
}

/// `e^{C₃(s−t)^{1/4}}`.
pub fn monotonicity_weight(c3: f64, tau: f64) -> f64 {
    (c3 * tau.powf(0.25)).exp()
}

/// One probe of the boundary monotonicity functional.
#[derive(Debug, Clone)]
pub struct MonotonicityTracker {
    pub kernels: TruncatedKernels,
    pub c3: f64,
    times: Vec<f64>,
    g: Vec<Option<f64>>,
    budget: Vec<Option<f64>>,
}

/// Integrals of `(ρ₁+ρ₂)` against `μ` and of `(ρ₁+ρ₂)/(2(s−t))` against `ξ`.
pub fn kernel_integrals(kernels: &TruncatedKernels, mf: &MeasureFields) -> Result<(f64, f64)> {
    let g: &PolarGrid = &mf.grid;
    let tau = kernels.kernel().tau(mf.t)?;
    let weights: Vec<f64> = g
        .centers()
        .into_iter()
        .map(|x| kernels.sum(x, mf.t))
        .collect::<Result<Vec<f64>>>()?;
    let mass = g.integrate_by(|k| weights[k] * mf.e[k]);
    let budget = g.integrate_by(|k| weights[k] * mf.xi[k]) / (2.0 * tau);
    Ok((mass, budget))
}

impl MonotonicityTracker {
    /// `c3` is ignored for interior probes, whose functional carries no
    /// exponential factor.
    pub fn new(geometry: DiskGeometry, y: Vec2, s: f64, c3: f64) -> Result<Self> {
        let kernels = TruncatedKernels::new(geometry, y, s)?;
        let c3 = if kernels.uses_reflection() { c3 } else { 0.0 };
        Ok(MonotonicityTracker {
            kernels,
            c3,
            times: Vec::new(),
            g: Vec::new(),
            budget: Vec::new(),
        })
    }

    /// Records one sample and returns `G(t)`, or `None` once `t ≥ s`.
    pub fn sample(&mut self, mf: &MeasureFields) -> Result<Option<f64>> {
        self.times.push(mf.t);
        if mf.t >= self.kernels.s {
            self.g.push(None);
            self.budget.push(None);
            return Ok(None);
        }
        let (mass, budget) = kernel_integrals(&self.kernels, mf)?;
        let w = monotonicity_weight(self.c3, self.kernels.s - mf.t);
        self.g.push(Some(w * mass));
        self.budget.push(Some(budget));
        Ok(Some(w * mass))
    }

    /// Defect series with samples closer than `4·dt` to `s` (and the two
    /// end samples) left empty.
    pub fn report(&self, dt: f64, c4: f64) -> MonotonicityReport {
        let n = self.times.len();
        let mut defect = alloc::vec![None; n];
        for k in 1..n.saturating_sub(1) {
            let tau = self.kernels.s - self.times[k];
            if tau < 4.0 * dt {
                continue;
            }
            let (Some(g0), Some(g1), Some(g2), Some(b)) =
                (self.g[k - 1], self.g[k], self.g[k + 1], self.budget[k])
            else {
                continue;
            };
            let h1 = self.times[k] - self.times[k - 1];
            let h2 = self.times[k + 1] - self.times[k];
            if h1 <= 0.0 || h2 <= 0.0 {
                continue;
            }
            let dg = -h2 / (h1 * (h1 + h2)) * g0
                + (h2 - h1) / (h1 * h2) * g1
                + h1 / (h2 * (h1 + h2)) * g2;
            defect[k] = Some(dg - monotonicity_weight(self.c3, tau) * b);
        }
        MonotonicityReport {
            times: self.times.clone(),
            g: self.g.clone(),
            budget: self.budget.clone(),
            defect,
            c3: self.c3,
            c4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub times: Vec<f64>,
    pub g: Vec<Option<f64>>,
    pub budget: Vec<Option<f64>>,
    pub defect: Vec<Option<f64>>,
    pub c3: f64,
    pub c4: f64,
}

impl MonotonicityReport {
    pub fn max_defect(&self) -> Option<f64> {
        self.defect.iter().flatten().copied().reduce(f64::max)
    }

    /// Whether every resolved sample satisfies `D(t) ≤ C₄`.
    pub fn holds(&self) -> bool {
        self.defect.iter().flatten().all(|&d| d <= self.c4)
    }
}

/// Run observer filling the `G_k` columns, one per tracker.
#[derive(Debug, Clone, Default)]
pub struct ProbeObserver {
    pub trackers: Vec<MonotonicityTracker>,
}

impl RunObserver for ProbeObserver {
    fn observe(&mut self, sample: &Sample<'_>, row: &mut DiagnosticsRow) -> Result<()> {
        for tr in self.trackers.iter_mut() {
            row.probes.push(tr.sample(sample.measures)?);
        }
        Ok(())
    }
}

/// Gaussian `ρ_x^r(y) = (√(2π) r)^{−1} exp(−|x−y|²/(2r²))` in the plane.
pub fn gaussian_density(x: Vec2, r: f64, y: Vec2) -> f64 {
    (-(x - y).norm_sq() / (2.0 * r * r)).exp() / ((2.0 * PI).sqrt() * r)
}

/// `∫ρ_x^r dμ` restricted to cells with `|y − x| ≥ outside`.
pub fn gaussian_mass(mf: &MeasureFields, x: Vec2, r: f64, outside: f64) -> f64 {
    let g = &mf.grid;
    let nt = g.ntheta();
    pairwise_sum_by(g.len(), &|k| {
        let c = g.center(k / nt, k % nt);
        if (c - x).norm() < outside {
            return 0.0;
        }
        gaussian_density(x, r, c) * mf.e[k] * g.cell_area(k / nt)
    })
}

/// One `(x, r, R)` sample of the Gaussian mass bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassSample {
    pub x: Vec2,
    pub r: f64,
    pub tail_radius: f64,
    pub mass: f64,
    pub tail: f64,
    pub tail_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelMassReport {
    pub d: f64,
    pub samples: Vec<MassSample>,
    /// Smallest `δ` making the translation estimate hold at `|x − x₀| < γ₁r`.
    pub delta_translation: f64,
    /// Smallest `δ` making the scale estimate hold at `R = (1 + γ₂)r`.
    pub delta_scale: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl KernelMassReport {
    pub fn mass_bound_holds(&self) -> bool {
        self.samples.iter().all(|s| s.mass <= self.d)
    }

    pub fn tail_bound_holds(&self) -> bool {
        self.samples.iter().all(|s| s.tail <= s.tail_bound)
    }

    pub fn worst_mass_ratio(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.mass / self.d)
            .fold(0.0, f64::max)
    }

    pub fn worst_tail_ratio(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| {
                if s.tail_bound > 0.0 {
                    s.tail / s.tail_bound
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max)
    }
}

fn needed_delta(lhs: f64, rhs: f64, d: f64) -> f64 {
    ((lhs - rhs) / (rhs + d)).max(0.0)
}

/// Checks `∫ρ_x^r dμ ≤ D` and the tail estimate at each `(x, r, R)`, and
/// measures the `δ` required by the translation and scale estimates.
pub fn kernel_mass_checks(
    mf: &MeasureFields,
    d: f64,
    samples: &[(Vec2, f64, f64)],
    gamma1: f64,
    gamma2: f64,
) -> KernelMassReport {
    let mut out = Vec::with_capacity(samples.len());
    let mut delta_translation = 0.0f64;
    let mut delta_scale = 0.0f64;
    for &(x, r, tail_radius) in samples {
        let mass = gaussian_mass(mf, x, r, 0.0);
        let tail = gaussian_mass(mf, x, r, tail_radius);
        let tail_bound = 2.0 * (-3.0 * tail_radius * tail_radius / (8.0 * r * r)).exp() * d;
        for q in 0..4 {
            let dir = Vec2::from_polar(1.0, 0.5 * PI * q as f64);
            let x0 = x + dir * (0.999 * gamma1 * r);
            let m0 = gaussian_mass(mf, x0, r, 0.0);
            delta_translation = delta_translation.max(needed_delta(m0, mass, d));
        }
        let wide = gaussian_mass(mf, x, (1.0 + gamma2) * r, 0.0);
        delta_scale = delta_scale.max(needed_delta(wide, mass, d));
        out.push(MassSample {
            x,
            r,
            tail_radius,
            mass,
            tail,
            tail_bound,
        });
    }
    KernelMassReport {
        d,
        samples: out,
        delta_translation,
        delta_scale,
        gamma1,
        gamma2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ScalarField;
    use crate::potential::PotentialSpec;

    /// SplitMix64 mapped to `[0, 1)`.
    struct Mix(u64);

    impl Mix {
        fn next(&mut self) -> f64 {
            self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = self.0;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            ((z ^ (z >> 31)) >> 11) as f64 / (1u64 << 53) as f64
        }

        fn range(&mut self, lo: f64, hi: f64) -> f64 {
            lo + (hi - lo) * self.next()
        }

        fn unit<const N: usize>(&mut self) -> [f64; N] {
            let mut a = [0.0; N];
            for v in a.iter_mut() {
                *v = self.range(-1.0, 1.0);
            }
            let n = dot(&a, &a).sqrt();
            a.map(|v| v / n)
        }

        fn annulus(&mut self, lo: f64, hi: f64) -> Vec2 {
            Vec2::from_polar(self.range(lo, hi), self.range(0.0, 2.0 * PI))
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / (a.abs().max(b.abs()).max(1e-3))
    }

    #[test]
    fn value_at_center() {
        let k = HeatKernel::new([0.3, -0.2], 1.0);
        let t = 1.0 - 1.0 / (4.0 * PI);
        assert!((k.value([0.3, -0.2], t).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(k.jet([0.3, -0.2], t).unwrap().grad, [0.0, 0.0]);
        assert!(matches!(
            k.value([0.0, 0.0], 1.0),
            Err(Error::KernelTime { .. })
        ));
        assert!(k.eval([0.0, 0.0], 2.0, KernelOrder::Value).is_err());
    }

    fn fd_check<const N: usize>(f: &dyn Fn([f64; N], f64) -> KernelJet<N>, x: [f64; N], t: f64) {
        let h = 1e-5;
        let j = f(x, t);
        for i in 0..N {
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            let (p, m) = (f(xp, t), f(xm, t));
            let fd = (p.value - m.value) / (2.0 * h);
            assert!(rel(j.grad[i], fd) < 1e-6, "grad {i}: {} vs {fd}", j.grad[i]);
            for k in 0..N {
                let fd = (p.grad[k] - m.grad[k]) / (2.0 * h);
                assert!(
                    rel(j.hess[k][i], fd) < 1e-6,
                    "hess {k}{i}: {} vs {fd}",
                    j.hess[k][i]
                );
            }
        }
        let fd = (f(x, t + h).value - f(x, t - h).value) / (2.0 * h);
        assert!(rel(j.dt, fd) < 1e-6, "dt {} vs {fd}", j.dt);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = Mix(11);
        for _ in 0..100 {
            let y = [rng.range(-1.0, 1.0), rng.range(-1.0, 1.0)];
            let k = HeatKernel::new(y, 1.0);
            let x = [y[0] + rng.range(-0.5, 0.5), y[1] + rng.range(-0.5, 0.5)];
            let t = rng.range(0.0, 0.9);
            fd_check(&|x, t| k.jet(x, t).unwrap(), x, t);
            let k3 = HeatKernel::new([y[0], y[1], 0.1], 1.0);
            fd_check(&|x, t| k3.jet(x, t).unwrap(), [x[0], x[1], -0.2], t);
        }
    }

    #[test]
    fn exact_reflected_derivatives_match_finite_differences() {
        let disk = DiskGeometry::new(1.0).unwrap();
        let mut rng = Mix(5);
        for _ in 0..100 {
            let y = rng.annulus(0.5, 1.0);
            let k = ReflectedKernel::new(disk, y, 1.0);
            let x = rng.annulus(0.55, 0.98);
            let t = rng.range(0.6, 0.95);
            fd_check(
                &|x, t| k.jet(Vec2::from(x), t, Jacobian::Exact).unwrap(),
                x.to_array(),
                t,
            );
        }
    }

    #[test]
    fn frozen_and_exact_agree_on_value_and_boundary_gradient() {
        let disk = DiskGeometry::new(1.0).unwrap();
        let k = ReflectedKernel::new(disk, Vec2::new(0.8, 0.1), 1.0);
        let x = Vec2::from_polar(1.0, 0.4);
        let a = k.jet(x, 0.9, Jacobian::Frozen).unwrap();
        let b = k.jet(x, 0.9, Jacobian::Exact).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.dt, b.dt);
        for i in 0..2 {
            assert!((a.grad[i] - b.grad[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn standard_identity_vanishes() {
        let mut rng = Mix(3);
        for _ in 0..100 {
            let k = HeatKernel::new([rng.range(-1.0, 1.0), rng.range(-1.0, 1.0)], 1.0);
            let x = [rng.range(-1.0, 1.0), rng.range(-1.0, 1.0)];
            let t = rng.range(0.0, 0.99);
            let a = rng.unit::<2>();
            let res = identity_residual_standard(&k, x, t, a).unwrap();
            assert!(res.abs() <= 1e-10 * (k.jet(x, t).unwrap().dt.abs() + 1.0));

            let k3 = HeatKernel::new(
                [
                    rng.range(-1.0, 1.0),
                    rng.range(-1.0, 1.0),
                    rng.range(-1.0, 1.0),
                ],
                1.0,
            );
            let x3 = [
                rng.range(-1.0, 1.0),
                rng.range(-1.0, 1.0),
                rng.range(-1.0, 1.0),
            ];
            let res = identity_residual_standard(&k3, x3, t, rng.unit::<3>()).unwrap();
            assert!(res.abs() <= 1e-10 * (k3.jet(x3, t).unwrap().dt.abs() + 1.0));
        }
    }

    #[test]
    fn identity_is_direction_independent() {
        let k = HeatKernel::new([0.1, 0.2], 0.5);
        let x = [0.4, -0.3];
        let z = [0.3, -0.5];
        let n = dot(&z, &z).sqrt();
        let along = [z[0] / n, z[1] / n];
        let across = [-along[1], along[0]];
        for a in [along, across] {
            assert!(identity_residual_standard(&k, x, 0.2, a).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn reflected_identity_holds() {
        let disk = DiskGeometry::new(1.0).unwrap();
        let mut rng = Mix(17);
        for _ in 0..100 {
            let k = ReflectedKernel::new(disk, rng.annulus(0.5, 1.0), 1.0);
            let x = rng.annulus(0.5, 1.0);
            let a = Vec2::from(rng.unit::<2>());
            let (l, r) = identity_residual_reflected(&k, x, rng.range(0.0, 0.99), a).unwrap();
            assert!(
                (l - r).abs() <= 1e-8 * (l.abs() + r.abs() + 1.0),
                "{l} vs {r}"
            );
        }
    }

    #[test]
    fn reflected_identity_at_boundary_with_tangent_direction() {
        let disk = DiskGeometry::new(1.0).unwrap();
        let k = ReflectedKernel::new(disk, Vec2::new(0.7, 0.3), 1.0);
        let x = Vec2::from_polar(1.0, 0.6);
        let a = Vec2::new(-(0.6f64).sin(), 0.6f64.cos());
        let (l, r) = identity_residual_reflected(&k, x, 0.8, a).unwrap();
        assert!(l.is_finite() && r.is_finite());
        assert!((l - r).abs() <= 1e-8 * (l.abs() + r.abs() + 1.0));
        assert!(k.value(Vec2::new(1.1, 0.0), 0.5).is_err());
    }

    #[test]
    fn flat_limit_sends_both_sides_to_zero() {
        let mut last = f64::INFINITY;
        for big_r in [10.0, 100.0, 1000.0] {
            let disk = DiskGeometry::new(big_r).unwrap();
            let y = Vec2::new(big_r - 0.1, 0.05);
            let x = Vec2::new(big_r - 0.2, -0.1);
            let k = ReflectedKernel::new(disk, y, 1.0);
            let (l, r) = identity_residual_reflected(&k, x, 0.9, Vec2::new(0.6, 0.8)).unwrap();
            assert!(r.abs() < last && (l - r).abs() < 1e-10);
            last = r.abs();
        }
        assert!(last < 1e-2);
    }

    #[test]
    fn truncated_sum_has_zero_normal_derivative() {
        let disk = DiskGeometry::new(1.0).unwrap();
        let tk = TruncatedKernels::new(disk, Vec2::new(0.85, 0.1), 1.0).unwrap();
        for q in 0..100 {
            let th = 2.0 * PI * q as f64 / 100.0;
            let x = Vec2::from_polar(1.0, th);
            let g = tk.grad_sum(x, 0.95).unwrap();
            let scale = g.norm().max(1e-300) + tk.sum(x, 0.95).unwrap();
            assert!(
                g.dot(x).abs() <= 1e-12 * scale.max(1.0),
                "θ={th}: {}",
                g.dot(x)
            );
        }
    }

    #[test]
    fn normalized_kernel_has_unit_mass() {
        let k = HeatKernel::new([0.1, -0.2], 1.0);
        let tau: f64 = 0.01;
        let t = 1.0 - tau;
        let (n, half) = (800usize, 1.5f64);
        let h = 2.0 * half / n as f64;
        let total = pairwise_sum_by(n * n, &|q| {
            let x = [
                -half + 0.1 + (q / n) as f64 * h + 0.5 * h,
                -half - 0.2 + (q % n) as f64 * h + 0.5 * h,
            ];
            k.value(x, t).unwrap() * h * h
        });
        assert!((total / (4.0 * PI * tau).sqrt() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn truncation_consistency() {
        let disk = DiskGeometry::new(1.0).unwrap();
        let y = Vec2::new(0.2, 0.1);
        let tk = TruncatedKernels::new(disk, y, 1.0).unwrap();
        assert!(!tk.uses_reflection());
        let base = HeatKernel::new(y.to_array(), 1.0);
        let mut rng = Mix(23);
        for _ in 0..200 {
            let x = rng.annulus(0.0, 1.0);
            let d = (x - y).norm();
            let r1 = tk.rho1(x, 0.5).unwrap();
            if d < 0.25 {
                assert_eq!(r1, base.value(x.to_array(), 0.5).unwrap());
            } else if d > 0.5 {
                assert_eq!(r1, 0.0);
            }
            assert_eq!(tk.rho2(x, 0.5).unwrap(), 0.0);
        }
    }

    #[test]
    fn zero_measure_gives_zero_functional() {
        let g = PolarGrid::new(32, 32, 1.0).unwrap();
        let disk = DiskGeometry::new(1.0).unwrap();
        let p = PotentialSpec::quartic();
        let mut tr = MonotonicityTracker::new(disk, Vec2::new(0.9, 0.0), 0.2, 1.0).unwrap();
        for k in 0..6 {
            let u = ScalarField::constant(g, 0.02 * k as f64, 1.0);
            let mf = MeasureFields::new(&u, 0.1, &p);
            assert_eq!(tr.sample(&mf).unwrap(), Some(0.0));
        }
        let rep = tr.report(1e-3, 0.0);
        assert!(rep.defect.iter().flatten().all(|&d| d == 0.0));
        assert!(rep.holds());
    }

    #[test]
    fn gaussian_mass_bounds_on_constant_field() {
        let g = PolarGrid::new(64, 64, 1.0).unwrap();
        let p = PotentialSpec::quartic();
        let u = ScalarField::constant(g, 0.0, 1.0);
        let mf = MeasureFields::new(&u, 0.1, &p);
        let rep = kernel_mass_checks(&mf, 1.0, &[(Vec2::new(0.1, 0.1), 0.2, 0.4)], 0.1, 0.0);
        assert!(rep.mass_bound_holds() && rep.tail_bound_holds());
        assert_eq!(rep.delta_scale, 0.0);
    }
}
