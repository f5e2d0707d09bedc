//! Python bindings: closed-form cap quantities, graph measurement,
//! capillary radii / cap fitting, and full flow runs driven from a
//! configuration string. The module mirrors the CLI's capabilities for
//! scripted analysis.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use capflow_core::caps;
use capflow_core::config::parse_config_str;
use capflow_core::diagnostics;
use capflow_core::flow;
use capflow_core::geometry::{self, DimensionMode, RadialGraph};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn mode_from_str(mode: &str) -> PyResult<DimensionMode> {
    match mode {
        "planar" => Ok(DimensionMode::Planar),
        "axisymmetric" => Ok(DimensionMode::Axisymmetric),
        other => Err(PyValueError::new_err(format!(
            "mode must be 'planar' or 'axisymmetric', got {other:?}"
        ))),
    }
}

fn graph_from(mode: &str, theta: f64, rho: Vec<f64>, center: f64) -> PyResult<RadialGraph> {
    RadialGraph::new(mode_from_str(mode)?, theta, rho, center).map_err(err)
}

/// Closed-form quantities of the spherical cap `C_{r,theta}` in dimension n.
#[pyfunction]
fn cap_quantities(py: Python<'_>, n: usize, theta: f64, r: f64) -> PyResult<Py<PyDict>> {
    if n != 1 && n != 2 {
        return Err(PyValueError::new_err("n must be 1 or 2"));
    }
    if !(r > 0.0) || !(theta > 0.0 && theta < std::f64::consts::PI) {
        return Err(PyValueError::new_err("need r > 0 and theta in (0, pi)"));
    }
    let q = caps::cap_quantities(n, theta, r);
    let d = PyDict::new(py);
    d.set_item("area", q.area)?;
    d.set_item("wetted", q.wetted)?;
    d.set_item("volume", q.volume)?;
    d.set_item("w_theta", q.w_theta)?;
    d.set_item("i_theta", q.i_theta)?;
    d.set_item("h", q.h)?;
    d.set_item("c_n_theta", q.c_n_theta)?;
    Ok(d.into())
}

/// Discrete cap profile: returns `(phi, rho)` node arrays.
#[pyfunction]
fn cap_profile(
    mode: &str,
    theta: f64,
    r: f64,
    n_nodes: usize,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let cap = caps::SphericalCap { x0: 0.0, r, theta };
    let g = caps::cap_profile(&cap, mode_from_str(mode)?, n_nodes).map_err(err)?;
    Ok((g.phi, g.rho))
}

/// Measure a radial graph: integrals, capillary area both ways, the
/// isoperimetric ratio, curvature extrema and the contact residual.
#[pyfunction]
#[pyo3(signature = (mode, theta, rho, center=0.0))]
fn measure(
    py: Python<'_>,
    mode: &str,
    theta: f64,
    rho: Vec<f64>,
    center: f64,
) -> PyResult<Py<PyDict>> {
    let g = graph_from(mode, theta, rho, center)?;
    let f = geometry::compute_fields(&g).map_err(err)?;
    let ints = geometry::integrals(&g, &f);
    let (wa, wb) = geometry::capillary_area(&g, &f, &ints);
    let i_theta = geometry::iso_ratio(wa, ints.volume, g.mode.n()).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("area", ints.area)?;
    d.set_item("wetted", ints.wetted)?;
    d.set_item("volume", ints.volume)?;
    d.set_item("w_theta", wa)?;
    d.set_item("w_theta_integral", wb)?;
    d.set_item("i_theta", i_theta)?;
    d.set_item("h_min", f.h.iter().cloned().fold(f64::INFINITY, f64::min))?;
    d.set_item("h_max", f.h.iter().cloned().fold(f64::NEG_INFINITY, f64::max))?;
    d.set_item("kappa_min", f.kappa_min())?;
    let n = g.len();
    let ct = theta.cos();
    let contact = (f.nu_e[n - 1] - ct).abs().max(match g.mode {
        DimensionMode::Planar => (f.nu_e[0] - ct).abs(),
        DimensionMode::Axisymmetric => 0.0,
    });
    d.set_item("contact_residual", contact)?;
    Ok(d.into())
}

/// Capillary inner and outer radii `(rho_minus, rho_plus)` of a graph.
#[pyfunction]
#[pyo3(signature = (mode, theta, rho, center=0.0))]
fn capillary_radii(mode: &str, theta: f64, rho: Vec<f64>, center: f64) -> PyResult<(f64, f64)> {
    let g = graph_from(mode, theta, rho, center)?;
    caps::capillary_radii(&g).map_err(err)
}

/// Best-fit spherical cap of a graph: returns `(x0, r, residual)`.
#[pyfunction]
#[pyo3(signature = (mode, theta, rho, center=0.0))]
fn fit_cap(mode: &str, theta: f64, rho: Vec<f64>, center: f64) -> PyResult<(f64, f64, f64)> {
    let g = graph_from(mode, theta, rho, center)?;
    let (cap, residual) = caps::fit_cap(&g);
    Ok((cap.x0, cap.r, residual))
}

/// Cap radius matching a conserved quantity: `kind` is "volume" or "area".
#[pyfunction]
fn radius_from_constraint(n: usize, theta: f64, target: f64, kind: &str) -> PyResult<f64> {
    let kind = match kind {
        "volume" => caps::ConstraintKind::Volume,
        "area" => caps::ConstraintKind::CapillaryArea,
        other => {
            return Err(PyValueError::new_err(format!(
                "kind must be 'volume' or 'area', got {other:?}"
            )))
        }
    };
    caps::radius_from_constraint(n, theta, target, kind).map_err(err)
}

/// Run a flow from configuration text (same key=value format as the CLI).
/// Returns a dict with the verdict, the assertion-suite report text, the
/// per-snapshot scalar series and the final node data.
#[pyfunction]
fn run(py: Python<'_>, config_text: &str) -> PyResult<Py<PyDict>> {
    let parsed = parse_config_str(config_text).map_err(err)?;
    let (series, state, verdict) = flow::run(&parsed.flow).map_err(err)?;
    let report = diagnostics::assert_suite(&series, &parsed.flow);
    let d = PyDict::new(py);
    d.set_item("verdict", format!("{verdict:?}"))?;
    d.set_item("steps", state.step_count)?;
    d.set_item("t_final", state.t)?;
    d.set_item("phi_final", state.phi)?;
    d.set_item("suite_pass", report.all_pass())?;
    d.set_item("report", report.to_text())?;
    let snaps: Vec<Py<PyDict>> = series
        .snapshots
        .iter()
        .map(|s| {
            let sd = PyDict::new(py);
            sd.set_item("t", s.t)?;
            sd.set_item("volume", s.volume)?;
            sd.set_item("w_theta", s.w_theta_a)?;
            sd.set_item("i_theta", s.i_theta)?;
            sd.set_item("phi", s.phi)?;
            sd.set_item("h_min", s.h_min)?;
            sd.set_item("h_max", s.h_max)?;
            sd.set_item("kappa_min", s.kappa_min)?;
            sd.set_item("rho_minus", s.rho_minus)?;
            sd.set_item("rho_plus", s.rho_plus)?;
            Ok(sd.into())
        })
        .collect::<PyResult<_>>()?;
    d.set_item("snapshots", snaps)?;
    d.set_item("phi_grid", state.g.phi.clone())?;
    d.set_item("rho_final", state.g.rho.clone())?;
    if verdict == flow::Verdict::Converged {
        let conv = diagnostics::convergence_report(&state, &series, &parsed.flow).map_err(err)?;
        d.set_item("fit_r", conv.fit.r)?;
        d.set_item("fit_residual", conv.fit_residual)?;
        d.set_item("predicted_radius", conv.predicted_radius)?;
        d.set_item("radius_rel_error", conv.radius_rel_error)?;
    }
    Ok(d.into())
}

/// Capillary flow simulator: volume- and area-preserving power mean
/// curvature flow of convex capillary hypersurfaces in the half-space.
#[pymodule]
fn capflow(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(cap_quantities, m)?)?;
    m.add_function(wrap_pyfunction!(cap_profile, m)?)?;
    m.add_function(wrap_pyfunction!(measure, m)?)?;
    m.add_function(wrap_pyfunction!(capillary_radii, m)?)?;
    m.add_function(wrap_pyfunction!(fit_cap, m)?)?;
    m.add_function(wrap_pyfunction!(radius_from_constraint, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
