//! Run artifact plumbing: atomic file writes, the output-directory lock,
//! the CSV time series and the plain-text snapshot format.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use capflow_core::diagnostics::{Snapshot, TimeSeries};
use capflow_core::geometry::{DimensionMode, RadialGraph};

/// Fixed CSV header of `series.csv`.
pub const CSV_HEADER: &str = "t,area,wetted,volume,W_theta,I_theta,phi,q,H_min,H_max,kappa_min,contact_residual,fit_residual,rho_minus,rho_plus";

/// 17-significant-digit locale-independent float formatting; round-trips
/// every finite f64 bit-exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write `contents` atomically: temp file in the same directory, then rename.
pub fn atomic_write(path: &Path, contents: &str) -> io::Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// Exclusive lock on an output directory, released on drop. Concurrent runs
/// must target distinct directories.
pub struct DirLock {
    path: PathBuf,
}

impl DirLock {
    pub fn acquire(dir: &Path) -> io::Result<DirLock> {
        fs::create_dir_all(dir)?;
        let path = dir.join(".lock");
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(DirLock { path })
            }
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => Err(io::Error::new(
                io::ErrorKind::AlreadyExists,
                format!("output directory {} is locked by another run ({})", dir.display(), path.display()),
            )),
            Err(e) => Err(e),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

fn csv_cell(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// One CSV row per snapshot, radii columns empty when not computed.
pub fn render_csv(series: &TimeSeries) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for s in &series.snapshots {
        let row = [
            fmt_f64(s.t),
            fmt_f64(s.area),
            fmt_f64(s.wetted),
            fmt_f64(s.volume),
            fmt_f64(s.w_theta_a),
            fmt_f64(s.i_theta),
            fmt_f64(s.phi),
            fmt_f64(s.q),
            fmt_f64(s.h_min),
            fmt_f64(s.h_max),
            fmt_f64(s.kappa_min),
            fmt_f64(s.contact_residual),
            fmt_f64(s.fit_residual),
            csv_cell(s.rho_minus),
            csv_cell(s.rho_plus),
        ];
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn mode_name(mode: DimensionMode) -> &'static str {
    match mode {
        DimensionMode::Planar => "planar",
        DimensionMode::Axisymmetric => "axisymmetric",
    }
}

/// Plain-text snapshot file: version line, key=value metadata, then
/// `phi rho` node lines. Round-trips bit-exactly through [`parse_snap`].
pub fn render_snap(s: &Snapshot) -> String {
    let mut out = String::from("CAPFLOW-SNAP v1\n");
    out.push_str(&format!(
        "mode={} theta={} N={} t={} center={}\n",
        mode_name(s.mode),
        fmt_f64(s.theta),
        s.rho.len(),
        fmt_f64(s.t),
        fmt_f64(s.center),
    ));
    let g = s.graph().expect("snapshot holds a valid graph");
    for i in 0..g.len() {
        out.push_str(&fmt_f64(g.phi[i]));
        out.push(' ');
        out.push_str(&fmt_f64(g.rho[i]));
        out.push('\n');
    }
    out
}

/// Parse a snapshot file back into a graph and its time stamp.
pub fn parse_snap(text: &str) -> Result<(RadialGraph, f64), String> {
    let mut lines = text.lines();
    match lines.next() {
        Some("CAPFLOW-SNAP v1") => {}
        other => return Err(format!("bad snapshot header: {other:?}")),
    }
    let meta = lines.next().ok_or("missing metadata line")?;
    let mut mode = None;
    let mut theta = None;
    let mut n = None;
    let mut t = None;
    let mut center = None;
    for pair in meta.split_whitespace() {
        let (k, v) = pair.split_once('=').ok_or_else(|| format!("bad metadata pair {pair:?}"))?;
        match k {
            "mode" => {
                mode = Some(match v {
                    "planar" => DimensionMode::Planar,
                    "axisymmetric" => DimensionMode::Axisymmetric,
                    other => return Err(format!("unknown mode {other:?}")),
                })
            }
            "theta" => theta = Some(v.parse::<f64>().map_err(|e| e.to_string())?),
            "N" => n = Some(v.parse::<usize>().map_err(|e| e.to_string())?),
            "t" => t = Some(v.parse::<f64>().map_err(|e| e.to_string())?),
            "center" => center = Some(v.parse::<f64>().map_err(|e| e.to_string())?),
            other => return Err(format!("unknown metadata key {other:?}")),
        }
    }
    let (mode, theta, n, t, center) = (
        mode.ok_or("missing mode")?,
        theta.ok_or("missing theta")?,
        n.ok_or("missing N")?,
        t.ok_or("missing t")?,
        center.ok_or("missing center")?,
    );
    let mut rho = Vec::with_capacity(n);
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let _phi: f64 = parts
            .next()
            .ok_or_else(|| format!("node line {i}: missing phi"))?
            .parse()
            .map_err(|e| format!("node line {i}: {e}"))?;
        let r: f64 = parts
            .next()
            .ok_or_else(|| format!("node line {i}: missing rho"))?
            .parse()
            .map_err(|e| format!("node line {i}: {e}"))?;
        rho.push(r);
    }
    if rho.len() != n {
        return Err(format!("expected {n} nodes, found {}", rho.len()));
    }
    let g = RadialGraph::new(mode, theta, rho, center).map_err(|e| e.to_string())?;
    Ok((g, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use capflow_core::flow::{self, FlowConfig};

    #[test]
    fn snap_round_trips_bit_exactly() {
        let cfg = FlowConfig::default();
        let state = flow::initial_data(&cfg).unwrap();
        let snap = capflow_core::diagnostics::snapshot(&state, &cfg, false).unwrap();
        let text = render_snap(&snap);
        let (g, t) = parse_snap(&text).unwrap();
        assert_eq!(t.to_bits(), snap.t.to_bits());
        assert_eq!(g.len(), snap.rho.len());
        for (a, b) in g.rho.iter().zip(&snap.rho) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(g.center.to_bits(), snap.center.to_bits());
        // and re-rendering is byte-identical
        let snap2 = Snapshot { rho: g.rho.clone(), center: g.center, ..snap };
        assert_eq!(render_snap(&snap2), text);
    }

    #[test]
    fn fmt_round_trips() {
        for &x in &[std::f64::consts::PI, 1.0 / 3.0, 1e-300, 123456.789] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn atomic_write_replaces(){
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.txt");
        atomic_write(&p, "one").unwrap();
        atomic_write(&p, "two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert!(!p.with_extension("txt.tmp").exists());
    }

    #[test]
    fn lock_is_exclusive() {
        let dir = tempfile::tempdir().unwrap();
        let l1 = DirLock::acquire(dir.path()).unwrap();
        assert!(DirLock::acquire(dir.path()).is_err());
        drop(l1);
        assert!(DirLock::acquire(dir.path()).is_ok());
    }

    #[test]
    fn parse_snap_rejects_garbage() {
        assert!(parse_snap("nope").is_err());
        assert!(parse_snap("CAPFLOW-SNAP v1\nmode=planar theta=1.0 N=3 t=0 center=0\n1 2\n").is_err());
    }
}
