//! Command implementations behind the `capflow` binary: run orchestration
//! and artifact emission, cap closed-form inspection, snapshot radii,
//! the built-in verification suite, and SVG plotting.

pub mod artifacts;
pub mod plots;

use std::fs;
use std::path::{Path, PathBuf};

use capflow_core::caps::{self, cap_quantities};
use capflow_core::config::parse_config_str;
use capflow_core::diagnostics::{self, TimeSeries};
use capflow_core::flow::{self, FlowConfig, InitialShape, PerturbMode, Variant, Verdict};
use capflow_core::geometry::DimensionMode;

use artifacts::{atomic_write, fmt_f64, render_csv, render_snap, DirLock};

/// Environment variable overriding the configured output directory.
pub const OUT_ENV: &str = "CAPFLOW_OUT";

fn io_err<E: std::fmt::Display>(ctx: &str) -> impl Fn(E) -> String + '_ {
    move |e| format!("{ctx}: {e}")
}

/// Execute a configured run and write the full artifact set. Exit code:
/// 0 converged and suite passed, 2 suite failed, 3 aborted, 4 timed out.
pub fn cmd_run(config_path: &Path) -> Result<i32, String> {
    let text = fs::read_to_string(config_path)
        .map_err(io_err(&format!("cannot read {}", config_path.display())))?;
    let parsed = parse_config_str(&text).map_err(|e| e.to_string())?;
    let out_dir: PathBuf = std::env::var(OUT_ENV)
        .ok()
        .or(parsed.out_dir.clone())
        .unwrap_or_else(|| "capflow-out".into())
        .into();
    let _lock = DirLock::acquire(&out_dir).map_err(|e| e.to_string())?;
    let (series, state, verdict) = flow::run(&parsed.flow).map_err(|e| e.to_string())?;

    write_artifacts(&out_dir, &text, &series, &state, &parsed.flow)?;

    let report = diagnostics::assert_suite(&series, &parsed.flow);
    Ok(match verdict {
        Verdict::Aborted(_) => 3,
        Verdict::TimedOut => 4,
        Verdict::Converged => {
            if report.all_pass() {
                0
            } else {
                2
            }
        }
    })
}

fn write_artifacts(
    out_dir: &Path,
    config_text: &str,
    series: &TimeSeries,
    state: &flow::FlowState,
    cfg: &FlowConfig,
) -> Result<i32, String> {
    let w = io_err("write artifact");
    fs::create_dir_all(out_dir.join("snapshots")).map_err(&w)?;
    fs::create_dir_all(out_dir.join("plots")).map_err(&w)?;
    atomic_write(&out_dir.join("config.echo"), config_text).map_err(&w)?;
    atomic_write(&out_dir.join("series.csv"), &render_csv(series)).map_err(&w)?;
    for (i, s) in series.snapshots.iter().enumerate() {
        atomic_write(&out_dir.join(format!("snapshots/{i:06}.snap")), &render_snap(s))
            .map_err(&w)?;
    }

    let suite = diagnostics::assert_suite(series, cfg);
    let mut report = String::new();
    report.push_str(&format!("verdict={:?}\n", series.verdict));
    report.push_str(&format!("wall_time_s={}\n", fmt_f64(series.wall_time)));
    report.push_str(&format!("snapshots={}\n", series.snapshots.len()));
    report.push_str(&suite.to_text());
    if series.verdict == Verdict::Converged {
        match diagnostics::convergence_report(state, series, cfg) {
            Ok(c) => report.push_str(&c.to_text()),
            Err(e) => report.push_str(&format!("convergence_report_error={e}\n")),
        }
    }
    atomic_write(&out_dir.join("report.txt"), &report).map_err(&w)?;

    if let Some(last) = series.snapshots.last() {
        let g = last.graph().map_err(|e| e.to_string())?;
        atomic_write(&out_dir.join("plots/shape.svg"), &plots::shape_svg(&g, last.t))
            .map_err(&w)?;
    }
    let col = |f: fn(&diagnostics::Snapshot) -> f64| -> Vec<(f64, f64)> {
        series.snapshots.iter().map(|s| (s.t, f(s))).collect()
    };
    let i_pts = col(|s| s.i_theta);
    let v_pts = col(|s| s.volume);
    let w_pts = col(|s| s.w_theta_a);
    let hmin_pts = col(|s| s.h_min);
    let hmax_pts = col(|s| s.h_max);
    atomic_write(
        &out_dir.join("plots/i_theta.svg"),
        &plots::series_svg("capillary isoperimetric ratio", "I_theta", &[("I_theta", &i_pts)]),
    )
    .map_err(&w)?;
    atomic_write(
        &out_dir.join("plots/volume.svg"),
        &plots::series_svg("enclosed volume", "V", &[("volume", &v_pts)]),
    )
    .map_err(&w)?;
    atomic_write(
        &out_dir.join("plots/w_theta.svg"),
        &plots::series_svg("capillary area", "W_theta", &[("W_theta", &w_pts)]),
    )
    .map_err(&w)?;
    atomic_write(
        &out_dir.join("plots/h_extrema.svg"),
        &plots::series_svg(
            "mean curvature envelope",
            "H",
            &[("H_min", &hmin_pts), ("H_max", &hmax_pts)],
        ),
    )
    .map_err(&w)?;
    Ok(0)
}

/// Print the closed-form quantities of the spherical cap `C_{r,theta}`.
pub fn cmd_cap_info(n: usize, theta: f64, r: f64) -> Result<i32, String> {
    if n != 1 && n != 2 {
        return Err(format!("n must be 1 or 2, got {n}"));
    }
    if !(theta > 0.0 && theta < std::f64::consts::PI) {
        return Err(format!("theta must lie in (0, pi), got {theta}"));
    }
    if !(r > 0.0) {
        return Err(format!("r must be positive, got {r}"));
    }
    let q = cap_quantities(n, theta, r);
    println!("n={n}");
    println!("theta={}", fmt_f64(theta));
    println!("r={}", fmt_f64(r));
    println!("area={}", fmt_f64(q.area));
    println!("wetted={}", fmt_f64(q.wetted));
    println!("volume={}", fmt_f64(q.volume));
    println!("W_theta={}", fmt_f64(q.w_theta));
    println!("I_theta={}", fmt_f64(q.i_theta));
    println!("H={}", fmt_f64(q.h));
    println!("c_n_theta={}", fmt_f64(q.c_n_theta));
    Ok(0)
}

/// Compute capillary radii and the best-fit cap of a stored snapshot.
pub fn cmd_radii(snap_path: &Path) -> Result<i32, String> {
    let text = fs::read_to_string(snap_path)
        .map_err(io_err(&format!("cannot read {}", snap_path.display())))?;
    let (g, t) = artifacts::parse_snap(&text)?;
    let (rho_minus, rho_plus) = caps::capillary_radii(&g).map_err(|e| e.to_string())?;
    let (fit, residual) = caps::fit_cap(&g);
    println!("t={}", fmt_f64(t));
    println!("rho_minus={}", fmt_f64(rho_minus));
    println!("rho_plus={}", fmt_f64(rho_plus));
    println!("ratio={}", fmt_f64(rho_plus / rho_minus));
    println!("fit_r={}", fmt_f64(fit.r));
    println!("fit_x0={}", fmt_f64(fit.x0));
    println!("fit_residual={}", fmt_f64(residual));
    Ok(0)
}

fn builtin_configs(quick: bool) -> Vec<(String, FlowConfig)> {
    let perturbed = |mode: DimensionMode, variant: Variant, alpha: f64, n_nodes: usize| {
        let (k, eps) = match mode {
            DimensionMode::Planar => (2, 0.05),
            DimensionMode::Axisymmetric => (1, 0.02),
        };
        FlowConfig {
            mode,
            alpha,
            theta: std::f64::consts::FRAC_PI_3,
            variant,
            n_nodes,
            initial: InitialShape { radius: 1.0, modes: vec![PerturbMode { k, eps }] },
            ..FlowConfig::default()
        }
    };
    if quick {
        vec![
            (
                "quick-planar-volume".into(),
                perturbed(DimensionMode::Planar, Variant::VolumePreserving, 1.0, 101),
            ),
            (
                "quick-exact-cap".into(),
                FlowConfig {
                    mode: DimensionMode::Planar,
                    n_nodes: 101,
                    theta: std::f64::consts::FRAC_PI_3,
                    ..FlowConfig::default()
                },
            ),
        ]
    } else {
        vec![
            (
                "planar-volume-a1".into(),
                perturbed(DimensionMode::Planar, Variant::VolumePreserving, 1.0, 201),
            ),
            (
                "planar-area-a1".into(),
                perturbed(DimensionMode::Planar, Variant::AreaPreserving, 1.0, 201),
            ),
            (
                "planar-volume-a2".into(),
                perturbed(DimensionMode::Planar, Variant::VolumePreserving, 2.0, 201),
            ),
            (
                "axisym-volume-a1".into(),
                perturbed(DimensionMode::Axisymmetric, Variant::VolumePreserving, 1.0, 201),
            ),
        ]
    }
}

/// Run the built-in verification configurations and print per-check
/// PASS/FAIL lines with margins. Exit 0 iff every check of every run
/// passes and every run converges.
pub fn cmd_verify(quick: bool) -> Result<i32, String> {
    let mut all_ok = true;
    for (name, cfg) in builtin_configs(quick) {
        let (series, state, verdict) = flow::run(&cfg).map_err(|e| e.to_string())?;
        println!("run={name} verdict={verdict:?}");
        let report = diagnostics::assert_suite(&series, &cfg);
        print!("{}", report.to_text());
        all_ok &= report.all_pass();
        if verdict == Verdict::Converged {
            let conv = diagnostics::convergence_report(&state, &series, &cfg)
                .map_err(|e| e.to_string())?;
            let ok = conv.radius_rel_error < 1e-3 && conv.fit_residual < 1e-3 * conv.fit.r;
            println!(
                "convergence_target={} radius_rel_error={} fit_residual={}",
                if ok { "PASS" } else { "FAIL" },
                fmt_f64(conv.radius_rel_error),
                fmt_f64(conv.fit_residual),
            );
            all_ok &= ok;
        } else {
            println!("convergence_target=FAIL verdict={verdict:?}");
            all_ok = false;
        }
    }
    println!("verify={}", if all_ok { "PASS" } else { "FAIL" });
    Ok(if all_ok { 0 } else { 2 })
}

/// Plot a snapshot (`*.snap` -> shape SVG next to it) or a series
/// (`series.csv` -> time-series SVGs in a sibling `plots/` directory).
pub fn cmd_plot(path: &Path) -> Result<i32, String> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    match ext {
        "snap" => {
            let text = fs::read_to_string(path)
                .map_err(io_err(&format!("cannot read {}", path.display())))?;
            let (g, t) = artifacts::parse_snap(&text)?;
            let out = path.with_extension("svg");
            atomic_write(&out, &plots::shape_svg(&g, t)).map_err(|e| e.to_string())?;
            println!("{}", out.display());
            Ok(0)
        }
        "csv" => {
            let text = fs::read_to_string(path)
                .map_err(io_err(&format!("cannot read {}", path.display())))?;
            let mut lines = text.lines();
            let header = lines.next().ok_or("empty series file")?;
            if header != artifacts::CSV_HEADER {
                return Err(format!("unexpected CSV header: {header}"));
            }
            let mut rows: Vec<Vec<f64>> = Vec::new();
            for (i, line) in lines.enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let vals: Vec<f64> = line
                    .split(',')
                    .map(|c| if c.is_empty() { f64::NAN } else { c.parse().unwrap_or(f64::NAN) })
                    .collect();
                if vals.len() < 13 {
                    return Err(format!("series row {} is malformed", i + 2));
                }
                rows.push(vals);
            }
            if rows.is_empty() {
                return Err("series file contains no data rows".into());
            }
            let dir = path.parent().unwrap_or_else(|| Path::new(".")).join("plots");
            fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
            let col = |j: usize| -> Vec<(f64, f64)> {
                rows.iter().map(|r| (r[0], r[j])).collect()
            };
            let specs: [(&str, &str, Vec<(&str, Vec<(f64, f64)>)>); 4] = [
                ("i_theta.svg", "I_theta", vec![("I_theta", col(5))]),
                ("volume.svg", "V", vec![("volume", col(3))]),
                ("w_theta.svg", "W_theta", vec![("W_theta", col(4))]),
                ("h_extrema.svg", "H", vec![("H_min", col(8)), ("H_max", col(9))]),
            ];
            for (file, ylabel, series) in specs {
                let borrowed: Vec<(&str, &[(f64, f64)])> =
                    series.iter().map(|(n, p)| (*n, p.as_slice())).collect();
                let svg = plots::series_svg(ylabel, ylabel, &borrowed);
                let out = dir.join(file);
                atomic_write(&out, &svg).map_err(|e| e.to_string())?;
                println!("{}", out.display());
            }
            Ok(0)
        }
        _ => Err(format!(
            "don't know how to plot {}: expected a .snap or .csv file",
            path.display()
        )),
    }
}
