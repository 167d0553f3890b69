//! The disk domain: nearest-point projection onto the boundary, the mirror
//! reflection across it, and the radial cutoff used to truncate kernels.

// Float methods for builds where std is not linked.
use core::ops::{Add, AddAssign, Mul, Neg, Sub};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    #[inline]
    pub fn from_polar(r: f64, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Vec2 { x: r * c, y: r * s }
    }

    #[inline]
    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn to_array(self) -> [f64; 2] {
        [self.x, self.y]
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2::new(a[0], a[1])
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    #[inline]
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Result of projecting a point onto the circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reflection {
    /// Signed distance to the boundary, positive inside.
    pub d: f64,
    /// Nearest boundary point `ζ(x)`.
    pub zeta: Vec2,
    /// Mirror image `2ζ(x) − x`.
    pub xtilde: Vec2,
    /// Outer unit normal at `ζ(x)`.
    pub normal: Vec2,
}

/// Disk of radius `R` centered at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskGeometry {
    pub radius: f64,
}

impl DiskGeometry {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidConfig("disk radius must be positive"));
        }
        Ok(DiskGeometry { radius })
    }

    /// Reciprocal of the largest principal curvature; equals `R` for a disk.
    #[inline]
    pub fn c2(&self) -> f64 {
        self.radius
    }

    pub fn cutoff(&self) -> CutoffEta {
        CutoffEta { c2: self.c2() }
    }

    pub fn contains(&self, x: Vec2) -> bool {
        x.norm() <= self.radius
    }

    /// Whether `x` lies in the open interior tube `N_r`.
    pub fn in_tube(&self, x: Vec2, r: f64) -> bool {
        let rx = x.norm();
        rx <= self.radius && self.radius - rx < r
    }

    /// Projection onto `∂Ω` and reflection across it. Defined for every
    /// `x ≠ 0`, so reflecting a reflected point is allowed.
    pub fn nearest_and_reflect(&self, x: Vec2) -> Result<Reflection> {
        let r = x.norm();
        if r == 0.0 {
            return Err(Error::FocalPoint);
        }
        let normal = x * (1.0 / r);
        let zeta = normal * self.radius;
        Ok(Reflection {
            d: self.radius - r,
            zeta,
            xtilde: zeta * 2.0 - x,
            normal,
        })
    }

    /// `B(τ, τ)` for a unit tangent `τ`, with the sign convention under which
    /// `∂_ν|∇u|² = 2B(∇u, ∇u)` for Neumann data.
    pub fn second_fundamental_form_tangent(&self) -> f64 {
        -1.0 / self.radius
    }
}

/// Radially symmetric cutoff: 1 on `B_{c₂/4}`, 0 outside `B_{c₂/2}`, a
/// quintic smoothstep in between (C², nonincreasing).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffEta {
    pub c2: f64,
}

impl CutoffEta {
    pub fn new(c2: f64) -> Self {
        CutoffEta { c2 }
    }

    #[inline]
    pub fn eval(&self, z: Vec2) -> f64 {
        self.radial(z.norm()).0
    }

    /// `(η, ∂η/∂r, ∂²η/∂r²)` at radius `r`.
    pub fn radial(&self, r: f64) -> (f64, f64, f64) {
        let q = 0.25 * self.c2;
        if r <= q {
            return (1.0, 0.0, 0.0);
        }
        if r >= 2.0 * q {
            return (0.0, 0.0, 0.0);
        }
        let s = (r - q) / q;
        let s2 = s * s;
        let step = s2 * s * (10.0 - 15.0 * s + 6.0 * s2);
        let dstep = 30.0 * s2 * (1.0 - s) * (1.0 - s);
        let d2step = 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s);
        (1.0 - step, -dstep / q, -d2step / (q * q))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn radial_reflection() {
        let g = DiskGeometry::new(1.0).unwrap();
        let r = g.nearest_and_reflect(Vec2::new(0.9, 0.0)).unwrap();
        assert_abs_diff_eq!(r.d, 0.1, epsilon = 1e-15);
        assert_eq!(r.zeta, Vec2::new(1.0, 0.0));
        assert_abs_diff_eq!(r.xtilde.x, 1.1, epsilon = 1e-15);
        assert_eq!(r.xtilde.y, 0.0);
    }

    #[test]
    fn boundary_points_are_fixed() {
        let g = DiskGeometry::new(2.0).unwrap();
        let x = Vec2::from_polar(2.0, 0.7);
        let r = g.nearest_and_reflect(x).unwrap();
        assert_abs_diff_eq!((r.xtilde - x).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn reflecting_twice_is_identity() {
        let g = DiskGeometry::new(1.0).unwrap();
        let x = Vec2::new(0.6, 0.0);
        let once = g.nearest_and_reflect(x).unwrap().xtilde;
        let twice = g.nearest_and_reflect(once).unwrap().xtilde;
        assert!((twice - x).norm() <= 1e-14);
    }

    #[test]
    fn center_is_rejected() {
        let g = DiskGeometry::new(1.0).unwrap();
        assert_eq!(g.nearest_and_reflect(Vec2::ZERO), Err(Error::FocalPoint));
    }

    #[test]
    fn eta_landmarks() {
        let eta = CutoffEta::new(1.0);
        assert_eq!(eta.eval(Vec2::ZERO), 1.0);
        assert_eq!(eta.eval(Vec2::new(0.5, 0.0)), 0.0);
        assert_abs_diff_eq!(eta.eval(Vec2::new(0.0, 0.375)), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn eta_derivatives_match_differences() {
        let eta = CutoffEta::new(1.3);
        let h = 1e-6;
        for k in 1..200 {
            let r = k as f64 * 0.004;
            let (_, d1, d2) = eta.radial(r);
            let fd1 = (eta.radial(r + h).0 - eta.radial(r - h).0) / (2.0 * h);
            let fd2 = (eta.radial(r + h).1 - eta.radial(r - h).1) / (2.0 * h);
            assert_abs_diff_eq!(d1, fd1, epsilon = 1e-6);
            assert_abs_diff_eq!(d2, fd2, epsilon = 1e-4);
        }
    }

    #[test]
    fn sff_scales_with_radius() {
        assert_eq!(
            DiskGeometry::new(1.0)
                .unwrap()
                .second_fundamental_form_tangent(),
            -1.0
        );
        assert_eq!(
            DiskGeometry::new(2.0)
                .unwrap()
                .second_fundamental_form_tangent(),
            -0.5
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn reflection_moves_away_from_interior_points(
            rx in 0.0f64..=1.0, tx in 0.0f64..6.3, ry in 0.5f64..=1.0, ty in 0.0f64..6.3
        ) {
            prop_assume!(rx > 0.0);
            let g = DiskGeometry::new(1.0).unwrap();
            let x = Vec2::from_polar(rx, tx);
            let y = Vec2::from_polar(ry, ty);
            let xt = g.nearest_and_reflect(x).unwrap().xtilde;
            prop_assert!((xt - y).norm() >= (x - y).norm() - 1e-12);
        }

        #[test]
        fn eta_bounded_and_nonincreasing(r in 0.0f64..2.0, dr in 0.0f64..0.1) {
            let eta = CutoffEta::new(1.7);
            let (a, da, _) = eta.radial(r);
            let (b, _, _) = eta.radial(r + dr);
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert!(b <= a);
            prop_assert!(da <= 0.0);
        }
    }
}
