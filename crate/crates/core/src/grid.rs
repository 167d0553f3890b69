//! Cell-centered polar grid on the disk and the discrete operators on it.
//!
//! Cells are annular sectors `[r_i − Δr/2, r_i + Δr/2] × [θ_j − Δθ/2, θ_j + Δθ/2]`
//! with centers `r_i = (i + ½)Δr`, `θ_j = (j + ½)Δθ`. Values are stored
//! row-major with the radial index outermost. No cell sits on the pole; the
//! innermost ring talks to its antipodal partner across `r = 0`.

// Float methods for builds where std is not linked.
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::sum::{pairwise_sum, pairwise_sum_by};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarGrid {
    nr: usize,
    ntheta: usize,
    radius: f64,
}

impl PolarGrid {
    /// `nr ≥ 8`, `ntheta ≥ 8` and even (the pole closure pairs antipodal cells).
    pub fn new(nr: usize, ntheta: usize, radius: f64) -> Result<Self> {
        if nr < 8 {
            return Err(Error::InvalidConfig("grid needs at least 8 radial cells"));
        }
        if ntheta < 8 || ntheta % 2 != 0 {
            return Err(Error::InvalidConfig(
                "grid needs an even angular count of at least 8",
            ));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidConfig("grid radius must be positive"));
        }
        Ok(PolarGrid { nr, ntheta, radius })
    }

    #[inline]
    pub fn nr(&self) -> usize {
        self.nr
    }
    #[inline]
    pub fn ntheta(&self) -> usize {
        self.ntheta
    }
    #[inline]
    pub fn radius(&self) -> f64 {
        self.radius
    }
    #[inline]
    pub fn len(&self) -> usize {
        self.nr * self.ntheta
    }
    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }
    #[inline]
    pub fn dr(&self) -> f64 {
        self.radius / self.nr as f64
    }
    #[inline]
    pub fn dtheta(&self) -> f64 {
        TAU / self.ntheta as f64
    }
    #[inline]
    pub fn r(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dr()
    }
    #[inline]
    pub fn theta(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dtheta()
    }
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.ntheta + j
    }
    #[inline]
    pub fn center(&self, i: usize, j: usize) -> Vec2 {
        Vec2::from_polar(self.r(i), self.theta(j))
    }
    /// Exact area of the annular sector, `r_i Δr Δθ`.
    #[inline]
    pub fn cell_area(&self, i: usize) -> f64 {
        self.r(i) * self.dr() * self.dtheta()
    }

    pub fn centers(&self) -> Vec<Vec2> {
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.nr {
            for j in 0..self.ntheta {
                out.push(self.center(i, j));
            }
        }
        out
    }

    /// Field sampled from a function of the Cartesian cell center.
    pub fn sample<F: Fn(Vec2) -> f64>(&self, t: f64, f: F) -> ScalarField {
        let values = self.centers().into_iter().map(f).collect();
        ScalarField {
            grid: *self,
            values,
            t,
        }
    }

    /// `Σ f(k)·area(k)` in fixed pairwise order over the row-major index `k`.
    pub fn integrate_by<F: Fn(usize) -> f64>(&self, f: F) -> f64 {
        let nt = self.ntheta;
        pairwise_sum_by(self.len(), &|k| f(k) * self.cell_area(k / nt))
    }

    /// Periodic trapezoid rule on the boundary circle for values at `θ_j`.
    pub fn integrate_boundary(&self, samples: &[f64]) -> f64 {
        debug_assert_eq!(samples.len(), self.ntheta);
        pairwise_sum(samples) * self.radius * self.dtheta()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: PolarGrid,
    pub values: Vec<f64>,
    pub t: f64,
}

impl ScalarField {
    pub fn zeros(grid: PolarGrid, t: f64) -> Self {
        ScalarField {
            grid,
            values: vec![0.0; grid.len()],
            t,
        }
    }

    pub fn constant(grid: PolarGrid, t: f64, c: f64) -> Self {
        ScalarField {
            grid,
            values: vec![c; grid.len()],
            t,
        }
    }

    pub fn from_values(grid: PolarGrid, t: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidConfig("value count does not match the grid"));
        }
        Ok(ScalarField { grid, values, t })
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
            t: self.t,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Value of the ghost cell at radial index `i` (which may be `-1` or
    /// `nr`) and angle index `j`.
    #[inline]
    fn radial_neighbor(&self, i: isize, j: usize) -> f64 {
        let g = &self.grid;
        if i < 0 {
            self.at(0, (j + g.ntheta / 2) % g.ntheta)
        } else if i as usize >= g.nr {
            self.at(g.nr - 1, j)
        } else {
            self.at(i as usize, j)
        }
    }

    /// `(∂_r u, r⁻¹∂_θ u)` by centered differences. Mirror ghost at `r = R`,
    /// antipodal ghost across the pole, periodic in `θ`.
    pub fn polar_gradient(&self) -> (Vec<f64>, Vec<f64>) {
        let g = &self.grid;
        let (nr, nt) = (g.nr, g.ntheta);
        let (dr, dth) = (g.dr(), g.dtheta());
        let mut ur = vec![0.0; g.len()];
        let mut ut = vec![0.0; g.len()];
        for i in 0..nr {
            let r = g.r(i);
            for j in 0..nt {
                let k = g.idx(i, j);
                let up = self.radial_neighbor(i as isize + 1, j);
                let dn = self.radial_neighbor(i as isize - 1, j);
                ur[k] = (up - dn) / (2.0 * dr);
                let jp = if j + 1 == nt { 0 } else { j + 1 };
                let jm = if j == 0 { nt - 1 } else { j - 1 };
                ut[k] = (self.at(i, jp) - self.at(i, jm)) / (2.0 * dth * r);
            }
        }
        (ur, ut)
    }

    /// Cartesian components of `∇u`.
    pub fn gradient(&self) -> (ScalarField, ScalarField) {
        let g = &self.grid;
        let (ur, ut) = self.polar_gradient();
        let mut gx = vec![0.0; g.len()];
        let mut gy = vec![0.0; g.len()];
        for j in 0..g.ntheta {
            let (s, c) = g.theta(j).sin_cos();
            for i in 0..g.nr {
                let k = g.idx(i, j);
                gx[k] = ur[k] * c - ut[k] * s;
                gy[k] = ur[k] * s + ut[k] * c;
            }
        }
        (
            ScalarField {
                grid: *g,
                values: gx,
                t: self.t,
            },
            ScalarField {
                grid: *g,
                values: gy,
                t: self.t,
            },
        )
    }

    /// Conservative five-point Laplacian with zero flux through `r = R` and
    /// through the (zero-length) inner face at the pole.
    pub fn laplacian(&self) -> ScalarField {
        let g = &self.grid;
        let (nr, nt) = (g.nr, g.ntheta);
        let (dr, dth) = (g.dr(), g.dtheta());
        let mut out = vec![0.0; g.len()];
        for i in 0..nr {
            let r = g.r(i);
            let r_in = i as f64 * dr;
            let r_out = if i + 1 == nr {
                0.0
            } else {
                (i as f64 + 1.0) * dr
            };
            let cr = 1.0 / (r * dr * dr);
            let ct = 1.0 / (r * r * dth * dth);
            for j in 0..nt {
                let u = self.at(i, j);
                let flux_out = if i + 1 < nr {
                    r_out * (self.at(i + 1, j) - u)
                } else {
                    0.0
                };
                let flux_in = if i > 0 {
                    r_in * (u - self.at(i - 1, j))
                } else {
                    0.0
                };
                let jp = if j + 1 == nt { 0 } else { j + 1 };
                let jm = if j == 0 { nt - 1 } else { j - 1 };
                out[g.idx(i, j)] =
                    cr * (flux_out - flux_in) + ct * (self.at(i, jp) - 2.0 * u + self.at(i, jm));
            }
        }
        ScalarField {
            grid: *g,
            values: out,
            t: self.t,
        }
    }

    /// Cellwise `|∇u|²` from one-sided face differences (outward in `r`,
    /// forward in `θ`), weighted so that `∫` of it is the Dirichlet form of
    /// [`Self::laplacian`]: `∫ face_grad_sq = −∫ u Δ_h u`.
    pub fn face_grad_sq(&self) -> ScalarField {
        let g = &self.grid;
        let (nr, nt) = (g.nr, g.ntheta);
        let (dr, dth) = (g.dr(), g.dtheta());
        let mut out = vec![0.0; g.len()];
        for i in 0..nr {
            let r = g.r(i);
            let r_out = (i as f64 + 1.0) * dr;
            for j in 0..nt {
                let u = self.at(i, j);
                let radial = if i + 1 < nr {
                    let d = (self.at(i + 1, j) - u) / dr;
                    d * d * r_out / r
                } else {
                    0.0
                };
                let jp = if j + 1 == nt { 0 } else { j + 1 };
                let a = (self.at(i, jp) - u) / (r * dth);
                out[g.idx(i, j)] = radial + a * a;
            }
        }
        ScalarField {
            grid: *g,
            values: out,
            t: self.t,
        }
    }

    /// `∫ u dx` with fixed-order pairwise summation.
    pub fn integrate(&self) -> f64 {
        self.grid.integrate_by(|k| self.values[k])
    }

    /// Values extrapolated to `r = R` with the even quadratic
    /// `a + b(r − R)²` through the two outermost rings, so the extrapolant has
    /// zero normal slope just like the mirror ghost.
    pub fn boundary_values(&self) -> Vec<f64> {
        let g = &self.grid;
        (0..g.ntheta)
            .map(|j| {
                let u1 = self.at(g.nr - 1, j);
                let u2 = self.at(g.nr - 2, j);
                (9.0 * u1 - u2) / 8.0
            })
            .collect()
    }

    /// Bilinear interpolation in `(r, θ)`. Points within half a cell of the
    /// boundary take the outermost ring's value.
    pub fn interpolate(&self, x: Vec2) -> Result<f64> {
        let g = &self.grid;
        let r = x.norm();
        if r > g.radius * (1.0 + 1e-12) {
            return Err(Error::OutOfDomain {
                radius: r,
                domain_radius: g.radius,
            });
        }
        let mut theta = x.y.atan2(x.x);
        if theta < 0.0 {
            theta += TAU;
        }
        let nt = g.ntheta;
        let q = theta / g.dtheta() - 0.5;
        let qf = q.floor();
        let wt = q - qf;
        let j0 = (qf as isize).rem_euclid(nt as isize) as usize;
        let j1 = (j0 + 1) % nt;
        let ring = |i: isize| -> f64 {
            if i < 0 {
                let a = self.at(0, (j0 + nt / 2) % nt);
                let b = self.at(0, (j1 + nt / 2) % nt);
                a * (1.0 - wt) + b * wt
            } else {
                let i = i as usize;
                self.at(i, j0) * (1.0 - wt) + self.at(i, j1) * wt
            }
        };
        let p = r / g.dr() - 0.5;
        if p >= (g.nr - 1) as f64 {
            return Ok(ring(g.nr as isize - 1));
        }
        let pf = p.floor();
        let wr = p - pf;
        let i0 = pf as isize;
        Ok(ring(i0) * (1.0 - wr) + ring(i0 + 1) * wr)
    }
}

/// `π R²`, for tests and sanity checks.
pub fn disk_area(radius: f64) -> f64 {
    PI * radius * radius
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid(nr: usize, nt: usize) -> PolarGrid {
        PolarGrid::new(nr, nt, 1.0).unwrap()
    }

    #[test]
    fn rejects_small_or_odd_grids() {
        assert!(PolarGrid::new(4, 16, 1.0).is_err());
        assert!(PolarGrid::new(16, 7, 1.0).is_err());
        assert!(PolarGrid::new(16, 9, 1.0).is_err());
        assert!(PolarGrid::new(16, 16, 0.0).is_err());
    }

    #[test]
    fn cells_tile_the_disk() {
        for &(nr, nt, rad) in &[(8, 8, 1.0), (37, 64, 2.5), (300, 256, 1.0)] {
            let g = PolarGrid::new(nr, nt, rad).unwrap();
            let area = ScalarField::constant(g, 0.0, 1.0).integrate();
            assert!((area - disk_area(rad)).abs() <= 1e-12 * disk_area(rad));
        }
    }

    #[test]
    fn integral_of_r_squared() {
        let g = grid(200, 64);
        let f = g.sample(0.0, |x| x.norm_sq());
        // Midpoint rule in r on r^3: error Δr²/8 · ∫ 6r/... ~ O(Δr²).
        assert_abs_diff_eq!(f.integrate(), PI / 2.0, epsilon = 2e-5);
    }

    #[test]
    fn boundary_circumference() {
        let g = PolarGrid::new(16, 48, 1.7).unwrap();
        let ones = vec![1.0; 48];
        assert!((g.integrate_boundary(&ones) - TAU * 1.7).abs() <= 1e-12);
    }

    #[test]
    fn constant_field_has_no_derivatives() {
        let f = ScalarField::constant(grid(16, 32), 0.0, 0.37);
        let (gx, gy) = f.gradient();
        assert_eq!(gx.max_abs(), 0.0);
        assert_eq!(gy.max_abs(), 0.0);
        assert!(f.laplacian().max_abs() < 1e-10);
    }

    #[test]
    fn gradient_of_linear_field() {
        let g = grid(64, 128);
        let f = g.sample(0.0, |x| x.x);
        let (gx, gy) = f.gradient();
        let tol = 2.0 * g.dtheta() * g.dtheta();
        for i in 0..g.nr() - 1 {
            for j in 0..g.ntheta() {
                assert!((gx.at(i, j) - 1.0).abs() <= tol, "gx at {i},{j}");
                assert!(gy.at(i, j).abs() <= tol);
            }
        }
    }

    #[test]
    fn radial_derivative_of_r_squared() {
        let g = grid(50, 32);
        let f = g.sample(0.0, |x| x.norm_sq());
        let (ur, ut) = f.polar_gradient();
        for i in 0..g.nr() - 1 {
            for j in 0..g.ntheta() {
                assert_abs_diff_eq!(ur[g.idx(i, j)], 2.0 * g.r(i), epsilon = 1e-12);
                assert_abs_diff_eq!(ut[g.idx(i, j)], 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn laplacian_of_r_squared_and_harmonic() {
        let g = grid(40, 64);
        let lap = g.sample(0.0, |x| x.norm_sq()).laplacian();
        for i in 0..g.nr() - 1 {
            for j in 0..g.ntheta() {
                assert_abs_diff_eq!(lap.at(i, j), 4.0, epsilon = 1e-9);
            }
        }
        let lap = g.sample(0.0, |x| x.x).laplacian();
        let tol = 0.5 * g.dtheta() * g.dtheta() / g.r(1);
        for i in 1..g.nr() - 1 {
            for j in 0..g.ntheta() {
                assert!(lap.at(i, j).abs() <= tol);
            }
        }
    }

    #[test]
    fn discrete_divergence_theorem() {
        let g = PolarGrid::new(24, 40, 1.3).unwrap();
        let f = g.sample(0.0, |x| {
            (3.0 * x.x).sin() * (x.y * x.y + 0.2 * x.x).cos() + x.y
        });
        let total = f.laplacian().integrate();
        assert!(total.abs() <= 1e-10 * f.max_abs());
    }

    #[test]
    fn summation_is_bitwise_deterministic() {
        let g = grid(33, 40);
        let f = g.sample(0.0, |x| (x.x * 7.0).sin() * 1e3 + x.y);
        assert_eq!(f.integrate().to_bits(), f.clone().integrate().to_bits());
    }

    #[test]
    fn interpolation_at_centers_and_wrap() {
        let g = grid(16, 32);
        let f = g.sample(0.0, |x| (2.0 * x.x).sin() + x.y * x.y);
        for &(i, j) in &[(0usize, 0usize), (3, 5), (14, 31), (7, 16)] {
            assert_abs_diff_eq!(
                f.interpolate(g.center(i, j)).unwrap(),
                f.at(i, j),
                epsilon = 1e-12
            );
        }
        let r = 0.53;
        let a = f.interpolate(Vec2::from_polar(r, 1e-13)).unwrap();
        let b = f.interpolate(Vec2::from_polar(r, TAU - 1e-13)).unwrap();
        assert!((a - b).abs() <= 1e-12);
        assert!(f.interpolate(Vec2::new(1.01, 0.0)).is_err());
    }

    #[test]
    fn interpolation_of_linear_field() {
        let g = grid(64, 128);
        let f = g.sample(0.0, |x| x.x);
        let h = g.dr().max(g.dtheta());
        for k in 0..200 {
            let r = 0.9 * ((k * 37 % 200) as f64 + 0.5) / 200.0;
            let th = (k as f64) * 0.731;
            let x = Vec2::from_polar(r, th);
            assert!((f.interpolate(x).unwrap() - x.x).abs() <= 2.0 * h * h);
        }
    }

    /// `u = cos(πr²) + xy(2 − r²)` has zero normal derivative at `r = 1` and
    /// `Δu = −4π sin(πr²) − 4π²r² cos(πr²) − 12xy`.
    fn manufactured(x: Vec2) -> f64 {
        let r2 = x.norm_sq();
        (PI * r2).cos() + x.x * x.y * (2.0 - r2)
    }
    fn manufactured_lap(x: Vec2) -> f64 {
        let r2 = x.norm_sq();
        -4.0 * PI * (PI * r2).sin() - 4.0 * PI * PI * r2 * (PI * r2).cos() - 12.0 * x.x * x.y
    }
    fn manufactured_grad(x: Vec2) -> Vec2 {
        let r2 = x.norm_sq();
        let s = -2.0 * PI * (PI * r2).sin();
        Vec2::new(
            s * x.x + x.y * (2.0 - r2) - 2.0 * x.x * x.x * x.y,
            s * x.y + x.x * (2.0 - r2) - 2.0 * x.x * x.y * x.y,
        )
    }

    /// Area-weighted L² errors of the Laplacian and the gradient. The
    /// outermost ring carries an O(Δr) pointwise truncation error (one face
    /// flux is exact, the other second order), which the L² norm weights by
    /// its O(Δr) area.
    fn errors(n: usize) -> (f64, f64) {
        let g = grid(n, 4 * n);
        let f = g.sample(0.0, manufactured);
        let lap = f.laplacian();
        let (gx, gy) = f.gradient();
        let el = g.integrate_by(|k| {
            let x = g.center(k / g.ntheta(), k % g.ntheta());
            (lap.values[k] - manufactured_lap(x)).powi(2)
        });
        let eg = g.integrate_by(|k| {
            let x = g.center(k / g.ntheta(), k % g.ntheta());
            let ge = manufactured_grad(x);
            (gx.values[k] - ge.x).powi(2) + (gy.values[k] - ge.y).powi(2)
        });
        (el.sqrt(), eg.sqrt())
    }

    #[test]
    fn second_order_convergence() {
        let e: Vec<(f64, f64)> = [16, 32, 64].iter().map(|&n| errors(n)).collect();
        for w in e.windows(2) {
            let order_lap = (w[0].0 / w[1].0).log2();
            let order_grad = (w[0].1 / w[1].1).log2();
            assert!(order_lap >= 1.8, "laplacian order {order_lap} ({:?})", e);
            assert!(order_grad >= 1.8, "gradient order {order_grad} ({:?})", e);
        }
    }
}
