//! Minimal self-contained SVG 1.1 emission: a shape plot of one profile
//! (curve, floor line, contact-angle markers) and line plots of scalar
//! time series. No external assets, no dependencies.

use capflow_core::geometry::RadialGraph;

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 60.0;

fn svg_open(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" font-family=\"monospace\" font-size=\"16\" text-anchor=\"middle\">{title}</text>\n",
        W / 2.0
    )
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let sx = (W - 2.0 * MARGIN) / (self.x1 - self.x0);
        let sy = (H - 2.0 * MARGIN) / (self.y1 - self.y0);
        (MARGIN + (x - self.x0) * sx, H - MARGIN - (y - self.y0) * sy)
    }
}

fn polyline(frame: &Frame, pts: &[(f64, f64)], color: &str) -> String {
    let coords: Vec<String> = pts
        .iter()
        .map(|&(x, y)| {
            let (px, py) = frame.map(x, y);
            format!("{px:.2},{py:.2}")
        })
        .collect();
    format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
        coords.join(" ")
    )
}

fn axes(frame: &Frame, xlabel: &str, ylabel: &str) -> String {
    let (ox, oy) = frame.map(frame.x0, frame.y0);
    let (xx, _) = frame.map(frame.x1, frame.y0);
    let (_, yy) = frame.map(frame.x0, frame.y1);
    format!(
        "<line x1=\"{ox:.1}\" y1=\"{oy:.1}\" x2=\"{xx:.1}\" y2=\"{oy:.1}\" stroke=\"black\"/>\n\
         <line x1=\"{ox:.1}\" y1=\"{oy:.1}\" x2=\"{ox:.1}\" y2=\"{yy:.1}\" stroke=\"black\"/>\n\
         <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">{xlabel}</text>\n\
         <text x=\"16\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"12\" writing-mode=\"tb\">{ylabel}</text>\n\
         <text x=\"{ox:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"10\">{:.4}</text>\n\
         <text x=\"{xx:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"end\">{:.4}</text>\n\
         <text x=\"{:.1}\" y=\"{oy:.1}\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"end\">{:.6}</text>\n\
         <text x=\"{:.1}\" y=\"{yy:.1}\" font-family=\"monospace\" font-size=\"10\" text-anchor=\"end\">{:.6}</text>\n",
        (ox + xx) / 2.0,
        H - 12.0,
        (oy + yy) / 2.0,
        H - MARGIN + 24.0,
        frame.x0,
        H - MARGIN + 24.0,
        frame.x1,
        ox - 4.0,
        frame.y0,
        ox - 4.0,
        frame.y1,
    )
}

/// Shape plot: the profile polyline, the floor, and short rays at the
/// contact points drawn at the prescribed contact angle for visual
/// comparison.
pub fn shape_svg(g: &RadialGraph, t: f64) -> String {
    let pts: Vec<(f64, f64)> = (0..g.len()).map(|i| g.node(i)).collect();
    let xmax = pts.iter().map(|p| p.0.abs().max(p.0.abs())).fold(0.0f64, f64::max);
    let xlo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min).min(-0.1 * xmax) - 0.2;
    let xhi = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max) + 0.2;
    let zhi = pts.iter().map(|p| p.1).fold(0.0f64, f64::max) + 0.2;
    // equal aspect: pad the shorter extent
    let (dx, dz) = (xhi - xlo, zhi + 0.2);
    let aspect = (W - 2.0 * MARGIN) / (H - 2.0 * MARGIN);
    let (xlo, xhi, zhi) = if dx / dz > aspect {
        (xlo, xhi, dx / aspect - 0.2)
    } else {
        let need = dz * aspect;
        let pad = (need - dx) / 2.0;
        (xlo - pad, xhi + pad, zhi)
    };
    let frame = Frame { x0: xlo, x1: xhi, y0: -0.2, y1: zhi };
    let mut out = svg_open(&format!("profile at t = {t:.6}"));
    // floor
    let (fx0, fy) = frame.map(xlo, 0.0);
    let (fx1, _) = frame.map(xhi, 0.0);
    out.push_str(&format!(
        "<line x1=\"{fx0:.1}\" y1=\"{fy:.1}\" x2=\"{fx1:.1}\" y2=\"{fy:.1}\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n"
    ));
    out.push_str(&polyline(&frame, &pts, "steelblue"));
    // contact-angle markers: rays of the prescribed interior angle at the
    // floor endpoints (last node; planar also first node)
    let mut contacts = vec![(pts[pts.len() - 1], -1.0f64)];
    if matches!(g.mode, capflow_core::geometry::DimensionMode::Planar) {
        contacts.push((pts[0], 1.0));
    }
    let len = 0.25 * (xhi - xlo) / 4.0;
    for ((cx, cz), side) in contacts {
        let (ex, ez) = (cx - side * len * g.theta.cos(), cz + len * g.theta.sin());
        let (ax, ay) = frame.map(cx, cz);
        let (bx, by) = frame.map(ex, ez);
        out.push_str(&format!(
            "<line x1=\"{ax:.1}\" y1=\"{ay:.1}\" x2=\"{bx:.1}\" y2=\"{by:.1}\" stroke=\"crimson\" stroke-width=\"1.5\"/>\n"
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// Line plot of one or more named scalar series against time.
pub fn series_svg(title: &str, ylabel: &str, series: &[(&str, &[(f64, f64)])]) -> String {
    let all: Vec<(f64, f64)> = series.iter().flat_map(|(_, pts)| pts.iter().copied()).collect();
    let x0 = all.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let x1 = all.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let mut y0 = all.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let mut y1 = all.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    if (y1 - y0).abs() < 1e-12 * y1.abs().max(1e-300) {
        let pad = y1.abs().max(1e-12) * 1e-6;
        y0 -= pad;
        y1 += pad;
    }
    let x1 = if x1 > x0 { x1 } else { x0 + 1.0 };
    let frame = Frame { x0, x1, y0, y1 };
    let mut out = svg_open(title);
    out.push_str(&axes(&frame, "t", ylabel));
    let colors = ["steelblue", "crimson", "seagreen", "darkorange"];
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = colors[i % colors.len()];
        out.push_str(&polyline(&frame, pts, color));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"12\" fill=\"{color}\">{name}</text>\n",
            W - MARGIN - 90.0,
            40.0 + 16.0 * i as f64
        ));
    }
    out.push_str("</svg>\n");
    out
}
