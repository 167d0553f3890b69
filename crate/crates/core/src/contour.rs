//! Zero level set extraction on the polar grid (marching squares in index
//! space), ray-based radius estimates and contact angles with the boundary.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

// Float methods for builds where std is not linked.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::grid::ScalarField;

/// Edge of the dual mesh: `(i, j, dir)` with `dir = 0` joining `(i, j)` to
/// `(i + 1, j)` and `dir = 1` joining `(i, j)` to `(i, j + 1)`.
type EdgeKey = (usize, usize, u8);

#[inline]
fn crosses(a: f64, b: f64) -> bool {
    (a >= 0.0) != (b >= 0.0)
}

#[inline]
fn lerp_zero(a: f64, b: f64) -> f64 {
    a / (a - b)
}

fn edge_point(u: &ScalarField, key: EdgeKey) -> Vec2 {
    let g = &u.grid;
    let (i, j, dir) = key;
    let nt = g.ntheta();
    if dir == 0 {
        let w = lerp_zero(u.at(i, j), u.at(i + 1, j));
        Vec2::from_polar(g.r(i) + w * g.dr(), g.theta(j))
    } else {
        let jn = (j + 1) % nt;
        let w = lerp_zero(u.at(i, j), u.at(i, jn));
        Vec2::from_polar(g.r(i), g.theta(j) + w * g.dtheta())
    }
}

/// Zero level set as polylines of Cartesian points. Closed curves repeat
/// their first vertex at the end.
pub fn zero_level_set(u: &ScalarField) -> Vec<Vec<Vec2>> {
    let g = &u.grid;
    let (nr, nt) = (g.nr(), g.ntheta());
    let mut segments: Vec<(EdgeKey, EdgeKey)> = Vec::new();
    for i in 0..nr - 1 {
        for j in 0..nt {
            let jn = (j + 1) % nt;
            // Corners counter-clockwise in (r, θ): (i,j), (i+1,j), (i+1,jn), (i,jn).
            let v = [u.at(i, j), u.at(i + 1, j), u.at(i + 1, jn), u.at(i, jn)];
            let edges: [EdgeKey; 4] = [(i, j, 0), (i + 1, j, 1), (i, jn, 0), (i, j, 1)];
            let hit: Vec<usize> = (0..4).filter(|&e| crosses(v[e], v[(e + 1) % 4])).collect();
            match hit.len() {
                2 => segments.push((edges[hit[0]], edges[hit[1]])),
                4 => {
                    let center = 0.25 * (v[0] + v[1] + v[2] + v[3]);
                    if (center >= 0.0) == (v[0] >= 0.0) {
                        segments.push((edges[1], edges[2]));
                        segments.push((edges[3], edges[0]));
                    } else {
                        segments.push((edges[0], edges[1]));
                        segments.push((edges[2], edges[3]));
                    }
                }
                _ => {}
            }
        }
    }
    chain(u, &segments)
}

fn chain(u: &ScalarField, segments: &[(EdgeKey, EdgeKey)]) -> Vec<Vec<Vec2>> {
    let mut adj: BTreeMap<EdgeKey, Vec<usize>> = BTreeMap::new();
    for (s, (a, b)) in segments.iter().enumerate() {
        adj.entry(*a).or_default().push(s);
        adj.entry(*b).or_default().push(s);
    }
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();
    // Open chains start at edges touched by a single segment.
    let starts: Vec<EdgeKey> = adj
        .iter()
        .filter(|(_, v)| v.len() == 1)
        .map(|(k, _)| *k)
        .collect();
    let walk = |start: EdgeKey, used: &mut Vec<bool>| -> Option<Vec<Vec2>> {
        let mut key = start;
        let mut pts = vec![edge_point(u, key)];
        loop {
            let next = adj.get(&key)?.iter().copied().find(|&s| !used[s]);
            let Some(s) = next else { break };
            used[s] = true;
            let (a, b) = segments[s];
            key = if a == key { b } else { a };
            pts.push(edge_point(u, key));
        }
        if pts.len() > 1 {
            Some(pts)
        } else {
            None
        }
    };
    for k in starts {
        if let Some(p) = walk(k, &mut used) {
            lines.push(p);
        }
    }
    for s in 0..segments.len() {
        if !used[s] {
            if let Some(p) = walk(segments[s].0, &mut used) {
                lines.push(p);
            }
        }
    }
    lines
}

/// Mean over rays of the outermost radial sign change of `u`. `None` when
/// no ray crosses zero.
pub fn radius_estimate(u: &ScalarField) -> Option<f64> {
    let g = &u.grid;
    let mut total = 0.0;
    let mut count = 0usize;
    for j in 0..g.ntheta() {
        for i in (0..g.nr() - 1).rev() {
            let (a, b) = (u.at(i, j), u.at(i + 1, j));
            if crosses(a, b) {
                total += g.r(i) + lerp_zero(a, b) * g.dr();
                count += 1;
                break;
            }
        }
    }
    (count > 0).then(|| total / count as f64)
}

/// One contact of the level set with `∂Ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contact {
    /// Outermost crossing point used as the contact location.
    pub point: Vec2,
    /// Angle in degrees between the fitted interface line and the boundary
    /// tangent; 90 means the interface meets the boundary along the normal.
    pub angle_deg: f64,
    /// Number of crossings in the fit.
    pub samples: usize,
}

/// Contact angles from a total-least-squares line through the angular zero
/// crossings on rings with `r ≥ R − band`.
pub fn contact_angles(u: &ScalarField, band: f64) -> Vec<Contact> {
    let g = &u.grid;
    let nt = g.ntheta();
    let outer = g.nr() - 1;
    let mut seeds: Vec<Vec2> = Vec::new();
    for j in 0..nt {
        if crosses(u.at(outer, j), u.at(outer, (j + 1) % nt)) {
            seeds.push(edge_point(u, (outer, j, 1)));
        }
    }
    if seeds.is_empty() {
        return Vec::new();
    }
    let mut clusters: Vec<Vec<Vec2>> = vec![Vec::new(); seeds.len()];
    let r_min = g.radius() - band;
    for i in 0..g.nr() {
        if g.r(i) < r_min {
            continue;
        }
        for j in 0..nt {
            if crosses(u.at(i, j), u.at(i, (j + 1) % nt)) {
                let p = edge_point(u, (i, j, 1));
                let (k, _) = seeds
                    .iter()
                    .enumerate()
                    .map(|(k, s)| (k, (*s - p).norm()))
                    .fold(
                        (0, f64::INFINITY),
                        |best, c| if c.1 < best.1 { c } else { best },
                    );
                clusters[k].push(p);
            }
        }
    }
    seeds
        .iter()
        .zip(clusters)
        .filter(|(_, pts)| pts.len() >= 2)
        .map(|(seed, pts)| {
            let dir = principal_direction(&pts);
            let normal = *seed * (1.0 / seed.norm());
            let tangent = Vec2::new(-normal.y, normal.x);
            let c = dir.dot(tangent).abs().min(1.0);
            Contact {
                point: *seed,
                angle_deg: c.acos() * 180.0 / PI,
                samples: pts.len(),
            }
        })
        .collect()
}

/// Unit direction of the best-fit line (largest principal axis).
fn principal_direction(pts: &[Vec2]) -> Vec2 {
    let n = pts.len() as f64;
    let mean = pts.iter().fold(Vec2::ZERO, |a, p| a + *p) * (1.0 / n);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in pts {
        let d = *p - mean;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    let phi = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    Vec2::from_polar(1.0, phi)
}

#[derive(Debug, Clone)]
pub struct InterfaceReport {
    pub polylines: Vec<Vec<Vec2>>,
    pub radius_estimate: Option<f64>,
    pub contacts: Vec<Contact>,
}

impl InterfaceReport {
    pub fn angle_range(&self) -> Option<(f64, f64)> {
        if self.contacts.is_empty() {
            return None;
        }
        let lo = self
            .contacts
            .iter()
            .map(|c| c.angle_deg)
            .fold(f64::INFINITY, f64::min);
        let hi = self
            .contacts
            .iter()
            .map(|c| c.angle_deg)
            .fold(f64::NEG_INFINITY, f64::max);
        Some((lo, hi))
    }

    /// Mean `x₂` over all polyline vertices.
    pub fn mean_height(&self) -> f64 {
        let (s, n) = self
            .polylines
            .iter()
            .flatten()
            .fold((0.0, 0usize), |(s, n), p| (s + p.y, n + 1));
        if n == 0 {
            0.0
        } else {
            s / n as f64
        }
    }
}

/// Level set, radius estimate and contact angles (fit band `band_widths·ε`).
pub fn interface_and_angle(u: &ScalarField, eps: f64, band_widths: f64) -> Result<InterfaceReport> {
    let has_pos = u.values.iter().any(|&v| v >= 0.0);
    let has_neg = u.values.iter().any(|&v| v < 0.0);
    if !(has_pos && has_neg) {
        return Err(Error::NoInterface);
    }
    let contacts = contact_angles(u, band_widths * eps);
    Ok(InterfaceReport {
        polylines: zero_level_set(u),
        radius_estimate: if contacts.is_empty() {
            radius_estimate(u)
        } else {
            None
        },
        contacts,
    })
}

/// Right angle in degrees.
pub const RIGHT_ANGLE_DEG: f64 = FRAC_PI_2 * 180.0 / PI;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PolarGrid;
    use crate::potential::PotentialSpec;
    use crate::solver::{init_well_prepared, Interface};

    #[test]
    fn concentric_circle_radius() {
        let p = PotentialSpec::quartic();
        let g = PolarGrid::new(120, 96, 1.0).unwrap();
        let s = init_well_prepared(g, 0.04, Interface::Concentric { r0: 0.55 }, &p).unwrap();
        let rep = interface_and_angle(&s.u, 0.04, 5.0).unwrap();
        assert!(rep.contacts.is_empty());
        assert!((rep.radius_estimate.unwrap() - 0.55).abs() <= g.dr());
        assert_eq!(rep.polylines.len(), 1);
        let line = &rep.polylines[0];
        assert_eq!(line.first(), line.last());
        for pt in line {
            assert!((pt.norm() - 0.55).abs() < g.dr());
        }
    }

    #[test]
    fn diameter_meets_boundary_at_right_angles() {
        let p = PotentialSpec::quartic();
        let g = PolarGrid::new(100, 256, 1.0).unwrap();
        let s = init_well_prepared(g, 0.04, Interface::Diameter, &p).unwrap();
        let rep = interface_and_angle(&s.u, 0.04, 5.0).unwrap();
        assert_eq!(rep.contacts.len(), 2);
        for c in &rep.contacts {
            assert!((c.angle_deg - 90.0).abs() <= 1.0, "{c:?}");
        }
        assert!(rep.mean_height().abs() < 1e-12);
    }

    #[test]
    fn chord_angle_matches_geometry() {
        let p = PotentialSpec::quartic();
        let g = PolarGrid::new(200, 512, 1.0).unwrap();
        let b: f64 = 0.3;
        let s = init_well_prepared(g, 0.02, Interface::Chord { b }, &p).unwrap();
        let rep = interface_and_angle(&s.u, 0.02, 5.0).unwrap();
        // The line x₂ = b meets the unit circle at angle acos(b) to the tangent.
        let expected = (b).acos() * 180.0 / PI;
        assert_eq!(rep.contacts.len(), 2);
        for c in &rep.contacts {
            assert!(
                (c.angle_deg - expected).abs() < 1.0,
                "{} vs {expected}",
                c.angle_deg
            );
        }
    }

    #[test]
    fn constant_field_has_no_interface() {
        let g = PolarGrid::new(16, 16, 1.0).unwrap();
        let u = ScalarField::constant(g, 0.0, 0.4);
        assert!(matches!(
            interface_and_angle(&u, 0.1, 5.0),
            Err(Error::NoInterface)
        ));
    }
}
