//! The diffuse varifold of a phase field, its first variation, the diffuse
//! mean curvature and the Brakke ledger.

use alloc::boxed::Box;
use alloc::vec::Vec;

// Float methods for builds where std is not linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::diagnostics::DiagnosticsRow;
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::grid::{PolarGrid, ScalarField};
use crate::measures::{boundary_energy_density, require_neumann, MeasureFields, TestFunction};
use crate::potential::PotentialSpec;
use crate::solver::{RunObserver, Sample};

pub type Mat2 = [[f64; 2]; 2];

/// `∇g · S = Σ ∂_j g_i S_ij`.
#[inline]
fn contract(dg: &Mat2, s: &Mat2) -> f64 {
    dg[0][0] * s[0][0] + dg[0][1] * s[0][1] + dg[1][0] * s[1][0] + dg[1][1] * s[1][1]
}

/// Default threshold below which a gradient carries no direction.
pub fn default_gradient_tolerance(eps: f64) -> f64 {
    1e-10 / eps
}

/// Default regularization of the curvature denominator.
pub fn default_curvature_regularization(eps: f64) -> f64 {
    1e-8 / eps
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarifoldCell {
    /// Flat cell index.
    pub k: usize,
    /// `e · area`.
    pub weight: f64,
    /// Unit normal `a = ∇u/|∇u|`.
    pub a: Vec2,
}

impl VarifoldCell {
    /// `P = I − a⊗a`.
    pub fn projection(&self) -> Mat2 {
        let a = self.a;
        [[1.0 - a.x * a.x, -a.x * a.y], [-a.y * a.x, 1.0 - a.y * a.y]]
    }
}

/// Cellwise varifold with the cells of vanishing gradient kept aside.
#[derive(Debug, Clone)]
pub struct DiscreteVarifold {
    pub grid: PolarGrid,
    pub cells: Vec<VarifoldCell>,
    /// `(k, W/ε · area)` for cells with `|∇u| ≤ g_tol`.
    pub null_cells: Vec<(usize, f64)>,
    pub g_tol: f64,
}

impl DiscreteVarifold {
    pub fn mass(&self) -> f64 {
        crate::sum::pairwise_sum_by(self.cells.len(), &|q| self.cells[q].weight)
    }
}

pub fn build_varifold(
    mf: &MeasureFields,
    u: &ScalarField,
    potential: &PotentialSpec,
    g_tol: f64,
) -> DiscreteVarifold {
    let g = mf.grid;
    let nt = g.ntheta();
    let mut cells = Vec::new();
    let mut null_cells = Vec::new();
    for k in 0..g.len() {
        let area = g.cell_area(k / nt);
        let grad = mf.grad(k);
        let n = grad.norm();
        if n > g_tol {
            cells.push(VarifoldCell {
                k,
                weight: mf.e[k] * area,
                a: grad * (1.0 / n),
            });
        } else {
            null_cells.push((k, potential.w(u.values[k]) / mf.eps * area));
        }
    }
    DiscreteVarifold {
        grid: g,
        cells,
        null_cells,
        g_tol,
    }
}

/// A `C¹` vector field on the closed disk.
pub trait VectorField {
    fn value(&self, x: Vec2) -> Vec2;
    /// `[i][j] = ∂_j g_i`.
    fn jacobian(&self, x: Vec2) -> Mat2;
    /// `g · ν` at the boundary point with angle `theta`.
    fn boundary_normal(&self, theta: f64, radius: f64) -> f64 {
        let nu = Vec2::from_polar(1.0, theta);
        self.value(nu * radius).dot(nu)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantField(pub Vec2);

impl VectorField for ConstantField {
    fn value(&self, _x: Vec2) -> Vec2 {
        self.0
    }
    fn jacobian(&self, _x: Vec2) -> Mat2 {
        [[0.0; 2]; 2]
    }
}

/// `g = (1 − |x|²/R²)(x₁ + x₂², x₁x₂) + c(−x₂, x₁)`, tangent to `∂Ω`.
#[derive(Debug, Clone, Copy)]
pub struct TangentialPolynomial {
    pub radius: f64,
    pub swirl: f64,
}

impl VectorField for TangentialPolynomial {
    fn value(&self, x: Vec2) -> Vec2 {
        let f = 1.0 - x.norm_sq() / (self.radius * self.radius);
        Vec2::new(x.x + x.y * x.y, x.x * x.y) * f + Vec2::new(-x.y, x.x) * self.swirl
    }
    fn jacobian(&self, x: Vec2) -> Mat2 {
        let r2 = self.radius * self.radius;
        let f = 1.0 - x.norm_sq() / r2;
        let p = [x.x + x.y * x.y, x.x * x.y];
        let dp = [[1.0, 2.0 * x.y], [x.y, x.x]];
        let df = [-2.0 * x.x / r2, -2.0 * x.y / r2];
        let c = self.swirl;
        let rot = [[0.0, -c], [c, 0.0]];
        let mut m = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = df[j] * p[i] + f * dp[i][j] + rot[i][j];
            }
        }
        m
    }
    fn boundary_normal(&self, _theta: f64, _radius: f64) -> f64 {
        0.0
    }
}

/// `g = b(|x|) x/|x|` with `b(r) = (1 − ((r − center)/width)²)³` on
/// `|r − center| < width`.
#[derive(Debug, Clone, Copy)]
pub struct RadialBump {
    pub center: f64,
    pub width: f64,
}

impl RadialBump {
    fn profile(&self, r: f64) -> (f64, f64) {
        let s = (r - self.center) / self.width;
        if s.abs() >= 1.0 {
            return (0.0, 0.0);
        }
        let q = 1.0 - s * s;
        (q * q * q, -6.0 * s * q * q / self.width)
    }
}

impl VectorField for RadialBump {
    fn value(&self, x: Vec2) -> Vec2 {
        let r = x.norm();
        if r == 0.0 {
            return Vec2::ZERO;
        }
        x * (self.profile(r).0 / r)
    }
    fn jacobian(&self, x: Vec2) -> Mat2 {
        let r = x.norm();
        if r == 0.0 {
            return [[0.0; 2]; 2];
        }
        let (b, db) = self.profile(r);
        let nu = [x.x / r, x.y / r];
        let mut m = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let p = if i == j { 1.0 } else { 0.0 } - nu[i] * nu[j];
                m[i][j] = db * nu[i] * nu[j] + b * p / r;
            }
        }
        m
    }
}

/// `δV(g) = ∫ ∇g · S dV`.
pub fn first_variation_direct(v: &DiscreteVarifold, g: &dyn VectorField) -> f64 {
    let nt = v.grid.ntheta();
    crate::sum::pairwise_sum_by(v.cells.len(), &|q| {
        let c = &v.cells[q];
        let x = v.grid.center(c.k / nt, c.k % nt);
        c.weight * contract(&g.jacobian(x), &c.projection())
    })
}

/// The first variation and the four terms of its integration-by-parts form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstVariationReport {
    pub lhs: f64,
    /// `∫ (g·∇u)(εΔu − W′/ε)`.
    pub curvature: f64,
    /// `∫_{|∇u|>tol} ∇g·(a⊗a) ξ`.
    pub discrepancy: f64,
    /// `∫_{∂Ω} (g·ν) e`.
    pub boundary: f64,
    /// `−∫_{|∇u|≤tol} div g W/ε`.
    pub null_gradient: f64,
    pub mass: f64,
}

impl FirstVariationReport {
    pub fn rhs(&self) -> f64 {
        self.curvature + self.discrepancy + self.boundary + self.null_gradient
    }

    /// `|lhs − rhs| / (|lhs| + |rhs| + mass)`.
    pub fn relative_gap(&self) -> f64 {
        let r = self.rhs();
        (self.lhs - r).abs() / (self.lhs.abs() + r.abs() + self.mass)
    }
}

/// `f = −εΔu + W′(u)/ε` cellwise.
pub fn chemical_potential(u: &ScalarField, eps: f64, potential: &PotentialSpec) -> Vec<f64> {
    let lap = u.laplacian();
    u.values
        .iter()
        .zip(&lap.values)
        .map(|(&v, &l)| -eps * l + potential.dw(v) / eps)
        .collect()
}

pub fn first_variation_pde_rhs(
    u: &ScalarField,
    eps: f64,
    potential: &PotentialSpec,
    g: &dyn VectorField,
) -> FirstVariationReport {
    let mf = MeasureFields::new(u, eps, potential);
    let v = build_varifold(&mf, u, potential, default_gradient_tolerance(eps));
    let grid = u.grid;
    let nt = grid.ntheta();
    let f = chemical_potential(u, eps, potential);
    let curvature =
        grid.integrate_by(|k| -g.value(grid.center(k / nt, k % nt)).dot(mf.grad(k)) * f[k]);
    let discrepancy = crate::sum::pairwise_sum_by(v.cells.len(), &|q| {
        let c = &v.cells[q];
        let x = grid.center(c.k / nt, c.k % nt);
        let a = c.a;
        let aa = [[a.x * a.x, a.x * a.y], [a.y * a.x, a.y * a.y]];
        contract(&g.jacobian(x), &aa) * mf.xi[c.k] * grid.cell_area(c.k / nt)
    });
    let dens = boundary_energy_density(u, eps, potential);
    let gn: Vec<f64> = (0..nt)
        .map(|j| g.boundary_normal(grid.theta(j), grid.radius()) * dens[j])
        .collect();
    let boundary = grid.integrate_boundary(&gn);
    let null_gradient = -crate::sum::pairwise_sum_by(v.null_cells.len(), &|q| {
        let (k, w) = v.null_cells[q];
        let dg = g.jacobian(grid.center(k / nt, k % nt));
        (dg[0][0] + dg[1][1]) * w
    });
    FirstVariationReport {
        lhs: first_variation_direct(&v, g),
        curvature,
        discrepancy,
        boundary,
        null_gradient,
        mass: v.mass(),
    }
}

/// `h = f∇u/(ε|∇u|² + δ_reg)`, so that `∫(g·∇u)(εΔu − W′/ε) dx = −∫ g·h dμ`
/// on the interface where `ε|∇u|²` carries the energy.
pub fn mean_curvature_field(
    u: &ScalarField,
    eps: f64,
    potential: &PotentialSpec,
    delta_reg: f64,
) -> Vec<Vec2> {
    let (gx, gy) = u.gradient();
    let f = chemical_potential(u, eps, potential);
    (0..u.values.len())
        .map(|k| {
            let g = Vec2::new(gx.values[k], gy.values[k]);
            g * (f[k] / (eps * g.norm_sq() + delta_reg))
        })
        .collect()
}

/// `|∫(g·∇u) f dx|` against `(∫|g|² dμ)^{1/2} (∫ f²/ε dx)^{1/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchySchwarz {
    pub lhs: f64,
    pub bound: f64,
}

impl CauchySchwarz {
    pub fn slack(&self) -> f64 {
        self.bound - self.lhs
    }
}

pub fn cauchy_schwarz_check(
    u: &ScalarField,
    eps: f64,
    potential: &PotentialSpec,
    g: &dyn VectorField,
) -> CauchySchwarz {
    let mf = MeasureFields::new(u, eps, potential);
    let grid = u.grid;
    let nt = grid.ntheta();
    let f = chemical_potential(u, eps, potential);
    let lhs = grid
        .integrate_by(|k| g.value(grid.center(k / nt, k % nt)).dot(mf.grad(k)) * f[k])
        .abs();
    let gm = grid.integrate_by(|k| g.value(grid.center(k / nt, k % nt)).norm_sq() * mf.e[k]);
    let ff = grid.integrate_by(|k| f[k] * f[k] / eps);
    CauchySchwarz {
        lhs,
        bound: gm.sqrt() * ff.sqrt(),
    }
}

/// Integrands of the Brakke ledger at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrakkeSample {
    pub t: f64,
    /// `∫φ dμ_t`.
    pub mass: f64,
    /// `∫ −f²φ/ε + f∇φ·∇u dx + ∫∂_tφ dμ`.
    pub identity: f64,
    /// `∫ (−φ|h|² + ∇φ·h) dμ + ∫∂_tφ dμ`.
    pub varifold: f64,
}

pub fn brakke_sample(
    u: &ScalarField,
    mf: &MeasureFields,
    potential: &PotentialSpec,
    phi: &dyn TestFunction,
    delta_reg: f64,
) -> BrakkeSample {
    let grid = u.grid;
    let eps = mf.eps;
    let t = mf.t;
    let f = chemical_potential(u, eps, potential);
    let h = mean_curvature_field(u, eps, potential, delta_reg);
    let xs = grid.centers();
    let mass = grid.integrate_by(|k| phi.value(xs[k], t) * mf.e[k]);
    let dphi = grid.integrate_by(|k| phi.dt(xs[k], t) * mf.e[k]);
    let identity = grid.integrate_by(|k| {
        let x = xs[k];
        -f[k] * f[k] * phi.value(x, t) / eps + f[k] * phi.grad(x, t).dot(mf.grad(k))
    }) + dphi;
    let varifold = grid.integrate_by(|k| {
        let x = xs[k];
        (-phi.value(x, t) * h[k].norm_sq() + phi.grad(x, t).dot(h[k])) * mf.e[k]
    }) + dphi;
    BrakkeSample {
        t,
        mass,
        identity,
        varifold,
    }
}

/// The Brakke ledger over one time interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrakkeInterval {
    pub t1: f64,
    pub t2: f64,
    /// `∫φ dμ_{t₂} − ∫φ dμ_{t₁}`.
    pub lhs: f64,
    /// Time integral of the identity integrand (trapezoid rule).
    pub identity_rhs: f64,
    /// Time integral of the varifold integrand (trapezoid rule).
    pub varifold_rhs: f64,
}

impl BrakkeInterval {
    /// `|lhs − identity_rhs| / |lhs|`.
    pub fn identity_defect(&self) -> f64 {
        let d = (self.lhs - self.identity_rhs).abs();
        if self.lhs == 0.0 {
            d
        } else {
            d / self.lhs.abs()
        }
    }

    /// `varifold_rhs − lhs`; nonnegative when the inequality holds.
    pub fn margin(&self) -> f64 {
        self.varifold_rhs - self.lhs
    }
}

fn trapezoid(samples: &[BrakkeSample], f: impl Fn(&BrakkeSample) -> f64) -> f64 {
    samples
        .windows(2)
        .map(|w| 0.5 * (w[1].t - w[0].t) * (f(&w[0]) + f(&w[1])))
        .sum()
}

/// Ledger between the samples nearest to `t1` and `t2`.
pub fn brakke_ledger(samples: &[BrakkeSample], t1: f64, t2: f64) -> Result<BrakkeInterval> {
    let nearest = |t: f64| {
        samples
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1.t - t).abs().total_cmp(&(b.1.t - t).abs()))
            .map(|(i, _)| i)
    };
    let (Some(a), Some(b)) = (nearest(t1), nearest(t2)) else {
        return Err(Error::EmptyTable);
    };
    if b <= a {
        return Err(Error::InvalidConfig(
            "ledger interval must span at least two samples",
        ));
    }
    let span = &samples[a..=b];
    Ok(BrakkeInterval {
        t1: samples[a].t,
        t2: samples[b].t,
        lhs: samples[b].mass - samples[a].mass,
        identity_rhs: trapezoid(span, |s| s.identity),
        varifold_rhs: trapezoid(span, |s| s.varifold),
    })
}

/// Per-interval ledgers between consecutive samples.
pub fn brakke_intervals(samples: &[BrakkeSample]) -> Vec<BrakkeInterval> {
    samples
        .windows(2)
        .map(|w| BrakkeInterval {
            t1: w[0].t,
            t2: w[1].t,
            lhs: w[1].mass - w[0].mass,
            identity_rhs: trapezoid(w, |s| s.identity),
            varifold_rhs: trapezoid(w, |s| s.varifold),
        })
        .collect()
}

/// Run observer recording Brakke samples for a list of test functions and
/// filling the `brakke_lhs_k` (change of `∫φ dμ` since the first sample)
/// and `brakke_rhs_k` (cumulative varifold-side integral) columns.
pub struct BrakkeObserver {
    pub tests: Vec<Box<dyn TestFunction>>,
    pub delta_reg: Option<f64>,
    pub samples: Vec<Vec<BrakkeSample>>,
}

impl BrakkeObserver {
    /// Fails if some `φ` has a nonzero normal derivative on `∂Ω`.
    pub fn new(tests: Vec<Box<dyn TestFunction>>, radius: f64, times: &[f64]) -> Result<Self> {
        for phi in &tests {
            require_neumann(phi.as_ref(), radius, times)?;
        }
        let samples = tests.iter().map(|_| Vec::new()).collect();
        Ok(BrakkeObserver {
            tests,
            delta_reg: None,
            samples,
        })
    }
}

impl RunObserver for BrakkeObserver {
    fn observe(&mut self, sample: &Sample<'_>, row: &mut DiagnosticsRow) -> Result<()> {
        let eps = sample.state.eps;
        let delta = self
            .delta_reg
            .unwrap_or_else(|| default_curvature_regularization(eps));
        for (phi, series) in self.tests.iter().zip(self.samples.iter_mut()) {
            let s = brakke_sample(
                &sample.state.u,
                sample.measures,
                sample.potential,
                phi.as_ref(),
                delta,
            );
            series.push(s);
            let first = series[0];
            row.brakke_lhs.push(Some(s.mass - first.mass));
            row.brakke_rhs.push(Some(trapezoid(series, |s| s.varifold)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::ConstantTest;
    use crate::solver::{init_well_prepared, Interface};

    const EPS: f64 = 0.04;

    fn profile(interface: Interface) -> ScalarField {
        let p = PotentialSpec::quartic();
        let g = PolarGrid::new(160, 256, 1.0).unwrap();
        init_well_prepared(g, EPS, interface, &p).unwrap().u
    }

    fn varifold(u: &ScalarField) -> DiscreteVarifold {
        let p = PotentialSpec::quartic();
        let mf = MeasureFields::new(u, EPS, &p);
        build_varifold(&mf, u, &p, default_gradient_tolerance(EPS))
    }

    #[test]
    fn constant_field_has_empty_varifold() {
        let g = PolarGrid::new(16, 16, 1.0).unwrap();
        let u = ScalarField::constant(g, 0.0, 1.0);
        let v = varifold(&u);
        assert!(v.cells.is_empty());
        assert_eq!(v.mass(), 0.0);
        let h = mean_curvature_field(&u, EPS, &PotentialSpec::quartic(), 1e-8);
        assert!(h.iter().all(|v| *v == Vec2::ZERO));
    }

    #[test]
    fn projections_are_orthogonal_projections() {
        let v = varifold(&profile(Interface::Concentric { r0: 0.5 }));
        for c in &v.cells {
            let p = c.projection();
            assert!((p[0][1] - p[1][0]).abs() <= 1e-12);
            assert!((p[0][0] + p[1][1] - 1.0).abs() <= 1e-12);
            for i in 0..2 {
                for j in 0..2 {
                    let pp = p[i][0] * p[0][j] + p[i][1] * p[1][j];
                    assert!((pp - p[i][j]).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn normals_follow_the_interface() {
        let u = profile(Interface::Diameter);
        let v = varifold(&u);
        let mass = v.mass();
        let tilt: f64 = v.cells.iter().map(|c| c.weight * c.a.x.abs()).sum::<f64>() / mass;
        assert!(tilt < 1e-3, "{tilt}");

        let u = profile(Interface::Concentric { r0: 0.5 });
        let v = varifold(&u);
        let nt = v.grid.ntheta();
        for c in &v.cells {
            let x = v.grid.center(c.k / nt, c.k % nt);
            let er = x * (1.0 / x.norm());
            assert!((c.a.dot(er).abs() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn mass_equals_energy_off_the_null_set() {
        let u = profile(Interface::Concentric { r0: 0.5 });
        let p = PotentialSpec::quartic();
        let mf = MeasureFields::new(&u, EPS, &p);
        let v = varifold(&u);
        let g = mf.grid;
        let nt = g.ntheta();
        let null_energy: f64 = v
            .null_cells
            .iter()
            .map(|&(k, _)| mf.e[k] * g.cell_area(k / nt))
            .sum();
        assert!((v.mass() + null_energy - mf.energy()).abs() < 1e-10 * mf.energy());
    }

    #[test]
    fn constant_field_has_zero_first_variation() {
        let u = profile(Interface::Concentric { r0: 0.5 });
        let g = ConstantField(Vec2::new(0.3, -0.7));
        let rep = first_variation_pde_rhs(&u, EPS, &PotentialSpec::quartic(), &g);
        assert_eq!(rep.lhs, 0.0);
        assert_eq!(rep.discrepancy, 0.0);
        assert_eq!(rep.null_gradient, 0.0);
        assert!(rep.rhs().abs() < 1e-2 * rep.mass, "{rep:?}");
    }

    #[test]
    fn tangential_field_has_no_boundary_term() {
        let u = profile(Interface::Chord { b: 0.3 });
        let g = TangentialPolynomial {
            radius: 1.0,
            swirl: 0.5,
        };
        let rep = first_variation_pde_rhs(&u, EPS, &PotentialSpec::quartic(), &g);
        assert_eq!(rep.boundary, 0.0);
        assert!(rep.relative_gap() < 0.05, "{rep:?}");
    }

    #[test]
    fn circle_first_variation_matches_curvature() {
        let r0 = 0.5;
        let u = profile(Interface::Concentric { r0 });
        let p = PotentialSpec::quartic();
        let g = RadialBump {
            center: r0,
            width: 0.3,
        };
        let rep = first_variation_pde_rhs(&u, EPS, &p, &g);
        assert!(rep.relative_gap() < 0.05, "{rep:?}");
        let mf = MeasureFields::new(&u, EPS, &p);
        let grid = mf.grid;
        let nt = grid.ntheta();
        let oracle = grid.integrate_by(|k| {
            let x = grid.center(k / nt, k % nt);
            g.value(x).dot(x * (1.0 / x.norm())) / r0 * mf.e[k]
        });
        assert!(
            (rep.lhs - oracle).abs() < 0.1 * oracle.abs(),
            "{} vs {oracle}",
            rep.lhs
        );
    }

    #[test]
    fn circle_curvature_magnitude() {
        let r0 = 0.5;
        let u = profile(Interface::Concentric { r0 });
        let h = mean_curvature_field(
            &u,
            EPS,
            &PotentialSpec::quartic(),
            default_curvature_regularization(EPS),
        );
        let g = u.grid;
        for i in 0..g.nr() {
            if (g.r(i) - r0).abs() < EPS {
                for j in 0..g.ntheta() {
                    let hv = h[g.idx(i, j)];
                    assert!(
                        (hv.norm() * r0 - 1.0).abs() < 0.1,
                        "r={} |h|={}",
                        g.r(i),
                        hv.norm()
                    );
                    assert!(hv.dot(g.center(i, j)) < 0.0);
                }
            }
        }
    }

    #[test]
    fn cauchy_schwarz_has_slack() {
        let u = profile(Interface::Concentric { r0: 0.5 });
        let p = PotentialSpec::quartic();
        for g in [
            &ConstantField(Vec2::new(1.0, 0.0)) as &dyn VectorField,
            &TangentialPolynomial {
                radius: 1.0,
                swirl: 0.2,
            },
            &RadialBump {
                center: 0.5,
                width: 0.3,
            },
        ] {
            assert!(cauchy_schwarz_check(&u, EPS, &p, g).slack() >= 0.0);
        }
    }

    #[test]
    fn stationary_diameter_ledger_is_flat() {
        let p = PotentialSpec::quartic();
        let mut state = crate::solver::State::new(profile(Interface::Diameter), EPS);
        let cfg = crate::solver::SolverConfig::new(EPS, 0.01);
        let mut stepper = crate::solver::Stepper::new(state.u.grid, EPS, cfg.scheme, &p);
        while state.t < 0.01 {
            state = stepper.step(&state, cfg.dt).unwrap().state;
        }
        let u = state.u;
        let mf = MeasureFields::new(&u, EPS, &p);
        let s = brakke_sample(&u, &mf, &p, &ConstantTest(1.0), 1e-8 / EPS);
        assert!(s.identity.abs() < 1e-2 * s.mass, "{s:?}");
        assert!(s.varifold.abs() < 1e-2 * s.mass, "{s:?}");
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn projections_are_rank_one(values in proptest::collection::vec(-1.0f64..1.0, 16 * 16)) {
            let p = PotentialSpec::quartic();
            let g = PolarGrid::new(16, 16, 1.0).unwrap();
            let u = ScalarField::from_values(g, 0.0, values).unwrap();
            let eps = 0.1;
            let mf = MeasureFields::new(&u, eps, &p);
            let v = build_varifold(&mf, &u, &p, default_gradient_tolerance(eps));
            for c in &v.cells {
                let m = c.projection();
                prop_assert!((m[0][0] + m[1][1] - 1.0).abs() <= 1e-12);
                prop_assert_eq!(m[0][1], m[1][0]);
                for i in 0..2 {
                    for j in 0..2 {
                        let sq = m[i][0] * m[0][j] + m[i][1] * m[1][j];
                        prop_assert!((sq - m[i][j]).abs() <= 1e-12);
                    }
                }
            }
        }
    }
}
