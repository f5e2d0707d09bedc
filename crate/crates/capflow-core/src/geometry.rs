//! Discrete differential and integral calculus for hypersurfaces given as
//! radial graphs `rho(phi)` over the upper half-sphere.
//!
//! Planar mode (`n = 1`): curves in the half-plane, `phi` in `[0, pi]`
//! measured from the floor, both endpoints on the floor. Axisymmetric mode
//! (`n = 2`): surfaces of revolution, `phi` in `[0, pi/2]` measured from
//! the vertical axis, `phi = 0` at the pole and `phi = pi/2` on the floor.
//!
//! Sign conventions, fixed once: outward unit normal, positive principal
//! curvatures for convex bodies, so the unit cap has `H = n`.

use crate::{Error, Result};

/// Which instantiation of the radial-graph calculus is in use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimensionMode {
    /// n = 1, planar curve over `phi` in `[0, pi]`.
    Planar,
    /// n = 2, surface of revolution over `phi` in `[0, pi/2]`.
    Axisymmetric,
}

impl DimensionMode {
    pub fn n(self) -> usize {
        match self {
            DimensionMode::Planar => 1,
            DimensionMode::Axisymmetric => 2,
        }
    }

    /// Length of the angular domain.
    pub fn domain_len(self) -> f64 {
        match self {
            DimensionMode::Planar => std::f64::consts::PI,
            DimensionMode::Axisymmetric => std::f64::consts::FRAC_PI_2,
        }
    }

    /// Vertical component of the unit radial direction at polar angle `phi`.
    pub fn vertical(self, phi: f64) -> f64 {
        match self {
            DimensionMode::Planar => phi.sin(),
            DimensionMode::Axisymmetric => phi.cos(),
        }
    }
}

/// Discrete radial graph over a uniform polar-angle grid; the evolving state.
///
/// `center` is the horizontal floor coordinate of the star center (always 0
/// in axisymmetric mode, where the center is the symmetry axis foot).
#[derive(Debug, Clone)]
pub struct RadialGraph {
    pub mode: DimensionMode,
    /// Contact angle in radians.
    pub theta: f64,
    /// Uniform node angles, both endpoints included.
    pub phi: Vec<f64>,
    /// Radial values at the nodes, all positive.
    pub rho: Vec<f64>,
    pub center: f64,
}

impl RadialGraph {
    pub fn new(mode: DimensionMode, theta: f64, rho: Vec<f64>, center: f64) -> Result<Self> {
        let n = rho.len();
        if n < 7 {
            return Err(Error::GridTooSmall { min: 7, got: n });
        }
        if n % 2 == 0 {
            return Err(Error::EvenGrid(n));
        }
        if !(theta > 0.0 && theta < std::f64::consts::PI) {
            return Err(Error::ValidationError(format!(
                "contact angle must lie in (0, pi), got {theta}"
            )));
        }
        if let Some((i, &v)) = rho.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
            return Err(Error::NonPositiveRho { node: i, value: v });
        }
        let len = mode.domain_len();
        let h = len / (n - 1) as f64;
        let phi = (0..n).map(|i| i as f64 * h).collect();
        Ok(RadialGraph { mode, theta, phi, rho, center })
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// Grid spacing.
    pub fn h(&self) -> f64 {
        self.mode.domain_len() / (self.len() - 1) as f64
    }

    /// Node position `(x, z)`: horizontal coordinate (axis distance in
    /// axisymmetric mode) and height above the floor.
    pub fn node(&self, i: usize) -> (f64, f64) {
        let (p, r) = (self.phi[i], self.rho[i]);
        match self.mode {
            DimensionMode::Planar => (self.center + r * p.cos(), r * p.sin()),
            DimensionMode::Axisymmetric => (r * p.sin(), r * p.cos()),
        }
    }
}

/// Per-node derived quantities of a graph.
#[derive(Debug, Clone)]
pub struct NodalFields {
    pub rho_d1: Vec<f64>,
    pub rho_d2: Vec<f64>,
    /// Vertical component `<nu, E>` of the outward unit normal.
    pub nu_e: Vec<f64>,
    /// Mean curvature, sum of the principal curvatures.
    pub h: Vec<f64>,
    /// Principal curvature in the profile plane.
    pub kappa_profile: Vec<f64>,
    /// Azimuthal principal curvature (axisymmetric mode only).
    pub kappa_azimuthal: Option<Vec<f64>>,
    /// Area element `dA/dphi`.
    pub area_elem: Vec<f64>,
    /// Support function `u = <X - z, nu>` about the floor point `z`.
    pub u: Vec<f64>,
    /// Capillary support function `u / (1 - cos(theta) <nu, E>)`.
    pub ubar: Vec<f64>,
}

impl NodalFields {
    /// Smallest principal curvature over all nodes.
    pub fn kappa_min(&self) -> f64 {
        let kp = self.kappa_profile.iter().cloned().fold(f64::INFINITY, f64::min);
        match &self.kappa_azimuthal {
            Some(ka) => kp.min(ka.iter().cloned().fold(f64::INFINITY, f64::min)),
            None => kp,
        }
    }
}

/// Composite Simpson weights for an odd node count.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    debug_assert!(n % 2 == 1 && n >= 3);
    let mut w = vec![0.0; n];
    w[0] = h / 3.0;
    w[n - 1] = h / 3.0;
    for (i, wi) in w.iter_mut().enumerate().take(n - 1).skip(1) {
        *wi = if i % 2 == 1 { 4.0 * h / 3.0 } else { 2.0 * h / 3.0 };
    }
    w
}

/// First and second angular derivatives of `rho` by fourth-order central
/// differences, with matching one-sided stencils at the two nodes nearest
/// each endpoint. Exact on polynomials up to degree four.
pub fn derivatives(g: &RadialGraph) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = g.len();
    if n < 7 {
        return Err(Error::GridTooSmall { min: 7, got: n });
    }
    let h = g.h();
    let r = &g.rho;
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    for i in 2..n - 2 {
        d1[i] = (r[i - 2] - 8.0 * r[i - 1] + 8.0 * r[i + 1] - r[i + 2]) / (12.0 * h);
        d2[i] = (-r[i - 2] + 16.0 * r[i - 1] - 30.0 * r[i] + 16.0 * r[i + 1] - r[i + 2])
            / (12.0 * h * h);
    }
    let c0 = [-25.0, 48.0, -36.0, 16.0, -3.0];
    let c1 = [-3.0, -10.0, 18.0, -6.0, 1.0];
    let e0 = [45.0, -154.0, 214.0, -156.0, 61.0, -10.0];
    let e1 = [10.0, -15.0, -4.0, 14.0, -6.0, 1.0];
    let dot = |c: &[f64], v: &mut dyn Iterator<Item = f64>| -> f64 {
        c.iter().zip(v).map(|(a, b)| a * b).sum()
    };
    d1[0] = dot(&c0, &mut r[..5].iter().cloned()) / (12.0 * h);
    d1[1] = dot(&c1, &mut r[..5].iter().cloned()) / (12.0 * h);
    d1[n - 1] = -dot(&c0, &mut r[n - 5..].iter().rev().cloned()) / (12.0 * h);
    d1[n - 2] = -dot(&c1, &mut r[n - 5..].iter().rev().cloned()) / (12.0 * h);
    d2[0] = dot(&e0, &mut r[..6].iter().cloned()) / (12.0 * h * h);
    d2[1] = dot(&e1, &mut r[..6].iter().cloned()) / (12.0 * h * h);
    d2[n - 1] = dot(&e0, &mut r[n - 6..].iter().rev().cloned()) / (12.0 * h * h);
    d2[n - 2] = dot(&e1, &mut r[n - 6..].iter().rev().cloned()) / (12.0 * h * h);
    Ok((d1, d2))
}

/// Vertical normal component `<nu, E>` from precomputed derivatives.
pub fn nu_dot_e(g: &RadialGraph, d1: &[f64]) -> Vec<f64> {
    let n = g.len();
    let mut out = vec![0.0; n];
    for i in 0..n {
        let (p, r, rp) = (g.phi[i], g.rho[i], d1[i]);
        let sq = (r * r + rp * rp).sqrt();
        out[i] = match g.mode {
            DimensionMode::Planar => (r * p.sin() - rp * p.cos()) / sq,
            DimensionMode::Axisymmetric => (r * p.cos() + rp * p.sin()) / sq,
        };
    }
    out
}

/// Principal curvatures and mean curvature from precomputed derivatives.
///
/// Planar: single curvature by the polar formula. Axisymmetric: profile
/// curvature by the same formula, azimuthal curvature as the horizontal
/// normal component over the distance to the axis; at the pole the
/// azimuthal curvature equals the profile curvature (symmetric limit).
pub fn mean_curvature(
    g: &RadialGraph,
    d1: &[f64],
    d2: &[f64],
) -> Result<(Vec<f64>, Vec<f64>, Option<Vec<f64>>)> {
    let n = g.len();
    if let Some((i, &v)) = g.rho.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
        return Err(Error::NonPositiveRho { node: i, value: v });
    }
    let mut kp = vec![0.0; n];
    for i in 0..n {
        let (r, rp, rpp) = (g.rho[i], d1[i], d2[i]);
        let q = r * r + rp * rp;
        kp[i] = (r * r + 2.0 * rp * rp - r * rpp) / (q * q.sqrt());
    }
    match g.mode {
        DimensionMode::Planar => Ok((kp.clone(), kp, None)),
        DimensionMode::Axisymmetric => {
            let mut ka = vec![0.0; n];
            ka[0] = kp[0]; // pole: rotational symmetry forces umbilicity
            for i in 1..n {
                let (p, r, rp) = (g.phi[i], g.rho[i], d1[i]);
                let sq = (r * r + rp * rp).sqrt();
                ka[i] = (r * p.sin() - rp * p.cos()) / (r * p.sin() * sq);
            }
            let h: Vec<f64> = kp.iter().zip(&ka).map(|(a, b)| a + b).collect();
            Ok((h, kp, Some(ka)))
        }
    }
}

/// Area element `dA/dphi` at each node.
pub fn area_element(g: &RadialGraph, d1: &[f64]) -> Vec<f64> {
    let n = g.len();
    let mut out = vec![0.0; n];
    for i in 0..n {
        let (p, r, rp) = (g.phi[i], g.rho[i], d1[i]);
        let sq = (r * r + rp * rp).sqrt();
        out[i] = match g.mode {
            DimensionMode::Planar => sq,
            DimensionMode::Axisymmetric => 2.0 * std::f64::consts::PI * r * p.sin() * sq,
        };
    }
    out
}

/// Support function `u = <X - z, nu>` and capillary support function
/// `ubar = u / (1 - cos(theta) <nu, E>)` about the floor point `z`
/// (horizontal coordinate; ignored in axisymmetric mode where `z` must be
/// the axis foot).
pub fn support_functions(
    g: &RadialGraph,
    d1: &[f64],
    nu_e: &[f64],
    z: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = g.len();
    let ct = g.theta.cos();
    let mut u = vec![0.0; n];
    let mut ubar = vec![0.0; n];
    for i in 0..n {
        let (p, r, rp) = (g.phi[i], g.rho[i], d1[i]);
        let sq = (r * r + rp * rp).sqrt();
        let radial = r * r / sq;
        u[i] = match g.mode {
            DimensionMode::Planar => {
                // horizontal normal component
                let nu_x = (r * p.cos() + rp * p.sin()) / sq;
                radial + (g.center - z) * nu_x
            }
            DimensionMode::Axisymmetric => radial,
        };
        let w = 1.0 - ct * nu_e[i];
        if w <= 1e-12 {
            return Err(Error::DegenerateWeight(i));
        }
        ubar[i] = u[i] / w;
    }
    Ok((u, ubar))
}

/// All nodal fields in one pass, using the crate's fourth-order stencils.
pub fn compute_fields(g: &RadialGraph) -> Result<NodalFields> {
    let (d1, d2) = derivatives(g)?;
    fields_from_derivatives(g, d1, d2)
}

/// Nodal fields from externally supplied derivatives (the flow substitutes
/// its ghost-extended second-order ones here).
pub fn fields_from_derivatives(g: &RadialGraph, d1: Vec<f64>, d2: Vec<f64>) -> Result<NodalFields> {
    let nu_e = nu_dot_e(g, &d1);
    let (h, kappa_profile, kappa_azimuthal) = mean_curvature(g, &d1, &d2)?;
    let area_elem = area_element(g, &d1);
    let (u, ubar) = support_functions(g, &d1, &nu_e, g.center)?;
    Ok(NodalFields {
        rho_d1: d1,
        rho_d2: d2,
        nu_e,
        h,
        kappa_profile,
        kappa_azimuthal,
        area_elem,
        u,
        ubar,
    })
}

/// Surface area, wetted floor measure and enclosed volume.
#[derive(Debug, Clone, Copy)]
pub struct Integrals {
    pub area: f64,
    pub wetted: f64,
    pub volume: f64,
}

/// Composite Simpson quadrature of area, wetted region and volume.
pub fn integrals(g: &RadialGraph, fields: &NodalFields) -> Integrals {
    let n = g.len();
    let w = simpson_weights(n, g.h());
    let area: f64 = w.iter().zip(&fields.area_elem).map(|(a, b)| a * b).sum();
    match g.mode {
        DimensionMode::Planar => {
            let wetted = g.rho[0] + g.rho[n - 1];
            let volume = 0.5 * w.iter().zip(&g.rho).map(|(a, r)| a * r * r).sum::<f64>();
            Integrals { area, wetted, volume }
        }
        DimensionMode::Axisymmetric => {
            let rf = g.rho[n - 1];
            let wetted = std::f64::consts::PI * rf * rf;
            let volume = 2.0 * std::f64::consts::PI / 3.0
                * w.iter()
                    .zip(g.rho.iter().zip(&g.phi))
                    .map(|(a, (r, p))| a * r * r * r * p.sin())
                    .sum::<f64>();
            Integrals { area, wetted, volume }
        }
    }
}

/// Capillary area `W_theta`, computed two independent ways:
/// `area - cos(theta) * wetted` and the quadrature of
/// `(1 - cos(theta) <nu, E>) dA`. Callers assert agreement.
pub fn capillary_area(g: &RadialGraph, fields: &NodalFields, ints: &Integrals) -> (f64, f64) {
    let ct = g.theta.cos();
    let way_a = ints.area - ct * ints.wetted;
    let w = simpson_weights(g.len(), g.h());
    let way_b = w
        .iter()
        .zip(fields.nu_e.iter().zip(&fields.area_elem))
        .map(|(wi, (nu, da))| wi * (1.0 - ct * nu) * da)
        .sum();
    (way_a, way_b)
}

/// Capillary isoperimetric ratio `W^(n+1) / V^n`.
pub fn iso_ratio(w_theta: f64, volume: f64, n: usize) -> Result<f64> {
    if volume <= 0.0 {
        return Err(Error::ZeroVolume);
    }
    Ok(w_theta.powi(n as i32 + 1) / volume.powi(n as i32))
}
