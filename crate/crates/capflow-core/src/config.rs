//! Plain-text run configuration: `key=value` lines, `#` comments, unknown
//! keys rejected, missing keys defaulted. The format is deliberately flat
//! so that a config echoes byte-for-byte into the run artifacts.

use crate::flow::{FlowConfig, InitialShape, PerturbMode, Variant};
use crate::geometry::DimensionMode;
use crate::{Error, Result};

/// A parsed configuration file: the flow parameters plus artifact keys the
/// solver itself does not consume.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConfig {
    pub flow: FlowConfig,
    /// Output directory, if given (`out_dir=`); overridable by CAPFLOW_OUT.
    pub out_dir: Option<String>,
}

/// Parse configuration text. Recognized keys: `mode`, `alpha`, `theta`,
/// `variant`, `N`, `cfl_safety`, `t_max`, `conv_tol`, `snapshot_stride`,
/// `H_floor`, `perturb_modes` (semicolon-separated `k:eps` pairs),
/// `radii_stride`, `out_dir`.
pub fn parse_config_str(text: &str) -> Result<ParsedConfig> {
    let mut flow = FlowConfig::default();
    let mut out_dir = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::ParseError {
            line: line_no,
            msg: format!("expected key=value, got {line:?}"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let bad = |msg: String| Error::ParseError { line: line_no, msg };
        let num = |v: &str| -> Result<f64> {
            v.parse::<f64>().map_err(|_| bad(format!("invalid number {v:?} for key {key:?}")))
        };
        let int = |v: &str| -> Result<usize> {
            v.parse::<usize>().map_err(|_| bad(format!("invalid integer {v:?} for key {key:?}")))
        };
        match key {
            "mode" => {
                flow.mode = match value {
                    "planar" => DimensionMode::Planar,
                    "axisymmetric" => DimensionMode::Axisymmetric,
                    other => return Err(bad(format!("mode must be planar or axisymmetric, got {other:?}"))),
                }
            }
            "alpha" => flow.alpha = num(value)?,
            "theta" => flow.theta = num(value)?,
            "variant" => {
                flow.variant = match value {
                    "volume" => Variant::VolumePreserving,
                    "area" => Variant::AreaPreserving,
                    other => return Err(bad(format!("variant must be volume or area, got {other:?}"))),
                }
            }
            "N" => flow.n_nodes = int(value)?,
            "cfl_safety" => flow.cfl_safety = num(value)?,
            "t_max" => flow.t_max = num(value)?,
            "conv_tol" => flow.conv_tol = num(value)?,
            "snapshot_stride" => {
                flow.snapshot_stride = int(value)?;
                if flow.snapshot_stride == 0 {
                    return Err(bad("snapshot_stride must be positive".into()));
                }
            }
            "H_floor" => flow.h_floor = num(value)?,
            "perturb_modes" => {
                flow.initial = InitialShape { radius: flow.initial.radius, modes: parse_modes(value, line_no)? };
            }
            "radii_stride" => {
                flow.radii_stride = int(value)?;
                if flow.radii_stride == 0 {
                    return Err(bad("radii_stride must be positive".into()));
                }
            }
            "out_dir" => out_dir = Some(value.to_string()),
            other => return Err(bad(format!("unknown key {other:?}"))),
        }
    }
    flow.validate()?;
    Ok(ParsedConfig { flow, out_dir })
}

fn parse_modes(value: &str, line: usize) -> Result<Vec<PerturbMode>> {
    let mut modes = Vec::new();
    for part in value.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, eps) = part.split_once(':').ok_or_else(|| Error::ParseError {
            line,
            msg: format!("perturb mode must be k:eps, got {part:?}"),
        })?;
        let k = k.trim().parse::<usize>().map_err(|_| Error::ParseError {
            line,
            msg: format!("invalid mode number {k:?}"),
        })?;
        let eps = eps.trim().parse::<f64>().map_err(|_| Error::ParseError {
            line,
            msg: format!("invalid mode amplitude {eps:?}"),
        })?;
        if k == 0 {
            return Err(Error::ParseError { line, msg: "mode number must be positive".into() });
        }
        modes.push(PerturbMode { k, eps });
    }
    Ok(modes)
}

/// Read and parse a configuration file.
pub fn parse_config(path: &std::path::Path) -> Result<ParsedConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::ValidationError(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_basic_config() {
        let c = parse_config_str(
            "mode=planar\nalpha=1\ntheta=1.0471975512\nvariant=volume\nN=201\n",
        )
        .unwrap();
        assert_eq!(c.flow.mode, DimensionMode::Planar);
        assert!((c.flow.theta - std::f64::consts::FRAC_PI_3).abs() < 1e-9);
        assert_eq!(c.flow.n_nodes, 201);
        assert_eq!(c.flow.variant, Variant::VolumePreserving);
        assert!(c.out_dir.is_none());
    }

    #[test]
    fn comments_blank_lines_and_defaults() {
        let c = parse_config_str("# a comment\n\ntheta=0.5 # trailing\n").unwrap();
        assert!((c.flow.theta - 0.5).abs() < 1e-15);
        assert_eq!(c.flow.n_nodes, FlowConfig::default().n_nodes);
        assert_eq!(c.flow.cfl_safety, FlowConfig::default().cfl_safety);
    }

    #[test]
    fn perturb_modes_and_out_dir() {
        let c = parse_config_str("perturb_modes=2:0.05; 3:0.01\nout_dir=/tmp/x\n").unwrap();
        assert_eq!(c.flow.initial.modes.len(), 2);
        assert_eq!(c.flow.initial.modes[0], PerturbMode { k: 2, eps: 0.05 });
        assert_eq!(c.flow.initial.modes[1], PerturbMode { k: 3, eps: 0.01 });
        assert_eq!(c.out_dir.as_deref(), Some("/tmp/x"));
    }

    #[test]
    fn unknown_key_is_error_with_line() {
        match parse_config_str("alpha=1\nbogus=3\n") {
            Err(Error::ParseError { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(parse_config_str("theta=2.0\n"), Err(Error::ValidationError(_))));
        assert!(matches!(parse_config_str("alpha=0\n"), Err(Error::ValidationError(_))));
        assert!(matches!(parse_config_str("N=200\n"), Err(Error::ValidationError(_))));
    }

    #[test]
    fn malformed_lines() {
        assert!(matches!(parse_config_str("justtext\n"), Err(Error::ParseError { line: 1, .. })));
        assert!(matches!(parse_config_str("alpha=abc\n"), Err(Error::ParseError { .. })));
        assert!(matches!(parse_config_str("perturb_modes=2-0.05\n"), Err(Error::ParseError { .. })));
    }
}
