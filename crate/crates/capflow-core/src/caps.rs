//! Spherical caps: exact solutions, comparison bodies and convergence
//! targets. Closed-form quantities, graph profiles, capillary inner/outer
//! radii of general bodies, and best-cap fitting.
//!
//! The cap `C_{r,theta}(x0)` is the sphere of radius `r` centered at
//! `x0 - r cos(theta) E` intersected with the closed half-space; for
//! `theta < pi/2` the ball center lies below the floor.

use crate::geometry::{DimensionMode, NodalFields, RadialGraph};
use crate::{Error, Result};

/// A spherical cap: floor point, radius and contact angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalCap {
    /// Horizontal floor coordinate of the cap's floor center.
    pub x0: f64,
    pub r: f64,
    pub theta: f64,
}

/// Closed-form scalar quantities of a cap.
#[derive(Debug, Clone, Copy)]
pub struct CapQuantities {
    pub area: f64,
    pub wetted: f64,
    pub volume: f64,
    pub w_theta: f64,
    /// Capillary isoperimetric ratio; depends only on `(n, theta)`.
    pub i_theta: f64,
    /// Mean curvature `n / r`.
    pub h: f64,
    /// Minkowski constant `n (n+1)^(1/n) |unit cap|^(1/n)`.
    pub c_n_theta: f64,
}

/// Enclosed volume of the unit cap with angle `theta`.
pub fn unit_cap_volume(n: usize, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    match n {
        1 => theta - s * c,
        2 => std::f64::consts::PI * (1.0 - c).powi(2) * (2.0 + c) / 3.0,
        _ => unreachable!("only n = 1 and n = 2 are supported"),
    }
}

/// Capillary area of the unit cap with angle `theta`.
pub fn unit_cap_w_theta(n: usize, theta: f64) -> f64 {
    // W = (n+1) |cap| / r for a cap of radius r
    (n as f64 + 1.0) * unit_cap_volume(n, theta)
}

/// Closed-form quantities of the cap of radius `r`.
pub fn cap_quantities(n: usize, theta: f64, r: f64) -> CapQuantities {
    let (s, c) = theta.sin_cos();
    let (area, wetted, volume) = match n {
        1 => (2.0 * r * theta, 2.0 * r * s, r * r * (theta - s * c)),
        2 => {
            let pi = std::f64::consts::PI;
            (
                2.0 * pi * r * r * (1.0 - c),
                pi * r * r * s * s,
                pi * r.powi(3) * (1.0 - c).powi(2) * (2.0 + c) / 3.0,
            )
        }
        _ => unreachable!("only n = 1 and n = 2 are supported"),
    };
    let w_theta = area - c * wetted;
    let i_theta = w_theta.powi(n as i32 + 1) / volume.powi(n as i32);
    let nf = n as f64;
    let c_n_theta = nf * (nf + 1.0).powf(1.0 / nf) * unit_cap_volume(n, theta).powf(1.0 / nf);
    CapQuantities { area, wetted, volume, w_theta, i_theta, h: nf / r, c_n_theta }
}

/// Closed-form polar graph of the cap about its own floor center.
pub fn cap_profile(cap: &SphericalCap, mode: DimensionMode, n_nodes: usize) -> Result<RadialGraph> {
    if cap.r <= 0.0 {
        return Err(Error::ValidationError(format!("cap radius must be positive, got {}", cap.r)));
    }
    let len = mode.domain_len();
    let h = len / (n_nodes - 1) as f64;
    let ct = cap.theta.cos();
    let s2 = cap.theta.sin().powi(2);
    let rho = (0..n_nodes)
        .map(|i| {
            let v = mode.vertical(i as f64 * h);
            cap.r * (-ct * v + (ct * ct * v * v + s2).sqrt())
        })
        .collect();
    RadialGraph::new(mode, cap.theta, rho, cap.x0)
}

/// Constraint kind for [`radius_from_constraint`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    Volume,
    CapillaryArea,
}

/// Radius of the cap with the prescribed volume or capillary area.
pub fn radius_from_constraint(n: usize, theta: f64, target: f64, kind: ConstraintKind) -> Result<f64> {
    if target <= 0.0 {
        return Err(Error::NonPositiveTarget(target));
    }
    Ok(match kind {
        ConstraintKind::Volume => (target / unit_cap_volume(n, theta)).powf(1.0 / (n as f64 + 1.0)),
        ConstraintKind::CapillaryArea => {
            (target / unit_cap_w_theta(n, theta)).powf(1.0 / n as f64)
        }
    })
}

/// Whether the point `p = (horizontal, height)` lies in the closed body
/// enclosed by the graph. Axisymmetric points must already be reduced to
/// (axis distance, height).
pub fn contains_point(g: &RadialGraph, p: (f64, f64)) -> bool {
    let (x, z) = p;
    let z = z.max(0.0);
    let dx = match g.mode {
        DimensionMode::Planar => x - g.center,
        DimensionMode::Axisymmetric => x.abs(),
    };
    let dist = (dx * dx + z * z).sqrt();
    if dist == 0.0 {
        return true;
    }
    let phi_p = match g.mode {
        DimensionMode::Planar => z.atan2(dx),
        DimensionMode::Axisymmetric => dx.atan2(z),
    };
    let len = g.mode.domain_len();
    let phi_p = phi_p.clamp(0.0, len);
    let h = g.h();
    let i = ((phi_p / h) as usize).min(g.len() - 2);
    let t = (phi_p - g.phi[i]) / h;
    let rho_p = g.rho[i] * (1.0 - t) + g.rho[i + 1] * t;
    dist <= rho_p
}

fn golden_min(mut a: f64, mut b: f64, mut f: impl FnMut(f64) -> f64, iters: usize) -> f64 {
    let gr = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut c1 = b - gr * (b - a);
    let mut c2 = a + gr * (b - a);
    let mut f1 = f(c1);
    let mut f2 = f(c2);
    for _ in 0..iters {
        if f1 < f2 {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - gr * (b - a);
            f1 = f(c1);
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + gr * (b - a);
            f2 = f(c2);
        }
    }
    0.5 * (a + b)
}

/// Smallest radius of a cap centered at `x0` whose enclosed region contains
/// every graph node, from the implicit ball inequality solved per node.
fn min_enclosing_radius(g: &RadialGraph, x0: f64) -> f64 {
    let ct = g.theta.cos();
    let s2 = g.theta.sin().powi(2);
    let mut r = 0.0f64;
    for i in 0..g.len() {
        let (x, z) = g.node(i);
        let dx = x - x0;
        let need = (z * ct + (z * z * ct * ct + s2 * (dx * dx + z * z)).sqrt()) / s2;
        r = r.max(need);
    }
    r
}

/// Whether the cap `C_{r,theta}(x0)` fits inside the body, tested by
/// sampling the cap's own profile densely through [`contains_point`].
fn cap_fits_inside(g: &RadialGraph, x0: f64, r: f64) -> bool {
    let m = 4 * g.len();
    let len = g.mode.domain_len();
    let ct = g.theta.cos();
    let s2 = g.theta.sin().powi(2);
    for j in 0..=m {
        let p = j as f64 * len / m as f64;
        let v = g.mode.vertical(p);
        let rho_c = r * (-ct * v + (ct * ct * v * v + s2).sqrt());
        let (x, z) = match g.mode {
            DimensionMode::Planar => (x0 + rho_c * p.cos(), rho_c * p.sin()),
            DimensionMode::Axisymmetric => (rho_c * p.sin(), rho_c * p.cos()),
        };
        if !contains_point(g, (x, z)) {
            return false;
        }
    }
    true
}

/// Largest inscribed cap radius for a fixed floor center, by bisection.
fn max_inscribed_radius(g: &RadialGraph, x0: f64, tol: f64) -> f64 {
    let hi0 = g.rho.iter().cloned().fold(0.0f64, f64::max) * 2.0;
    if !cap_fits_inside(g, x0, tol) {
        return 0.0;
    }
    let mut lo = tol;
    let mut hi = hi0;
    if cap_fits_inside(g, x0, hi) {
        return hi;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if cap_fits_inside(g, x0, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Smallest cap containing the body, center on the floor (the outer cap
/// realizing `rho_plus`, with its center exposed for enclosure tests).
pub fn enclosing_cap(g: &RadialGraph) -> SphericalCap {
    let diameter = 2.0 * g.rho.iter().cloned().fold(0.0f64, f64::max);
    let x0 = match g.mode {
        DimensionMode::Axisymmetric => 0.0,
        DimensionMode::Planar => {
            let (a, b) = (g.center - diameter, g.center + diameter);
            golden_min(a, b, |x| min_enclosing_radius(g, x), 64)
        }
    };
    SphericalCap { x0, r: min_enclosing_radius(g, x0), theta: g.theta }
}

/// Capillary inner and outer radii `(rho_minus, rho_plus)`: the largest cap
/// contained in, and the smallest cap containing, the body, with centers on
/// the floor. Axisymmetric centers are fixed to the axis by symmetry.
pub fn capillary_radii(g: &RadialGraph) -> Result<(f64, f64)> {
    let scale = g.rho.iter().cloned().fold(0.0f64, f64::max);
    let tol = 1e-8 * scale;
    let diameter = 2.0 * scale;
    let rho_minus = match g.mode {
        DimensionMode::Axisymmetric => max_inscribed_radius(g, 0.0, tol),
        DimensionMode::Planar => {
            // bracket centers by the wetted extent
            let (a, b) = (g.center - g.rho[g.len() - 1], g.center + g.rho[0]);
            let x_in = golden_min(a, b, |x| -max_inscribed_radius(g, x, tol), 48);
            max_inscribed_radius(g, x_in, tol)
        }
    };
    let rho_plus = enclosing_cap(g).r;
    if rho_plus > 10.0 * diameter {
        return Err(Error::SearchBracketFailure(10.0));
    }
    Ok((rho_minus, rho_plus))
}

/// Best-fit spherical cap and the maximum absolute radial residual
/// `max_i | |X_i - center| - r |`, a Hausdorff-type distance for
/// star-shaped bodies.
pub fn fit_cap(g: &RadialGraph) -> (SphericalCap, f64) {
    let ct = g.theta.cos();
    let nodes: Vec<(f64, f64)> = (0..g.len()).map(|i| g.node(i)).collect();
    let eval = |x0: f64| -> (f64, f64) {
        // fixed point of r = mean |X_i - (x0, -r cos(theta))|
        let mut r = nodes.iter().map(|&(x, z)| ((x - x0).powi(2) + z * z).sqrt()).sum::<f64>()
            / nodes.len() as f64;
        for _ in 0..200 {
            let next = nodes
                .iter()
                .map(|&(x, z)| ((x - x0).powi(2) + (z + r * ct).powi(2)).sqrt())
                .sum::<f64>()
                / nodes.len() as f64;
            if (next - r).abs() < 1e-15 {
                r = next;
                break;
            }
            r = next;
        }
        let res = nodes
            .iter()
            .map(|&(x, z)| (((x - x0).powi(2) + (z + r * ct).powi(2)).sqrt() - r).abs())
            .fold(0.0f64, f64::max);
        (r, res)
    };
    let x0 = match g.mode {
        DimensionMode::Axisymmetric => 0.0,
        DimensionMode::Planar => {
            let scale = g.rho.iter().cloned().fold(0.0f64, f64::max);
            golden_min(g.center - scale, g.center + scale, |x| eval(x).1, 64)
        }
    };
    let (r, residual) = eval(x0);
    (SphericalCap { x0, r, theta: g.theta }, residual)
}

/// Both sides of the capillary Minkowski inequality:
/// `lhs = integral of H (1 - cos(theta) <nu, E>) dA`,
/// `rhs = c_{n,theta} W_theta^((n-1)/n)`. Callers assert `lhs >= rhs - tol`.
pub fn minkowski_check(g: &RadialGraph, fields: &NodalFields) -> (f64, f64) {
    let w = crate::geometry::simpson_weights(g.len(), g.h());
    let ct = g.theta.cos();
    let lhs: f64 = w
        .iter()
        .zip(fields.h.iter().zip(fields.nu_e.iter().zip(&fields.area_elem)))
        .map(|(wi, (h, (nu, da)))| wi * h * (1.0 - ct * nu) * da)
        .sum();
    let n = g.mode.n();
    let ints = crate::geometry::integrals(g, fields);
    let (w_theta, _) = crate::geometry::capillary_area(g, fields, &ints);
    let cq = cap_quantities(n, g.theta, 1.0);
    let rhs = cq.c_n_theta * w_theta.powf((n as f64 - 1.0) / n as f64);
    (lhs, rhs)
}
