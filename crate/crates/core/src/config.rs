//! Flat `key = value` parameter files.
//!
//! Frequencies are ordinary frequencies in Hz, phases in rad, flux biases in
//! units of Φ₀. Unspecified keys keep their working-point values; unknown
//! keys are rejected.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{
    default_working_point, derive_ip_slope, from_hz, to_hz, FieldUnit, FluxParams, SystemParams, FIELDS,
};
use crate::spectroscopy::LevelModel;

/// Keys recognized besides the [`SystemParams`] fields.
pub const FLUX_KEYS: [&str; 6] = [
    "gap_delta",
    "ip_slope",
    "phi_n_index",
    "delta_phi",
    "dg_gap",
    "dg_slope",
];

/// Everything a parameter file can set.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub params: SystemParams,
    pub flux: FluxParams,
    pub level: LevelModel,
    /// True when `ip_slope` was derived from ω_eg rather than given.
    pub ip_slope_derived: bool,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            params: default_working_point(),
            flux: FluxParams::working_point(),
            level: LevelModel::Fixed,
            ip_slope_derived: true,
        }
    }
}

fn parse_number(key: &str, value: &str, line: usize) -> Result<f64> {
    let v: f64 = value
        .parse()
        .map_err(|_| Error::Config(format!("line {line}: `{key}` expects a number, got `{value}`")))?;
    if !v.is_finite() {
        return Err(Error::Config(format!("line {line}: `{key}` must be finite")));
    }
    Ok(v)
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        let mut ip_slope = None;
        let mut gap_delta = None;
        let (mut dg_gap, mut dg_slope) = (None, None);
        let mut seen = std::collections::BTreeSet::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {line_no}: expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!("line {line_no}: duplicate key `{key}`")));
            }
            match key {
                "gap_delta" => gap_delta = Some(from_hz(parse_number(key, value, line_no)?)),
                "ip_slope" => ip_slope = Some(from_hz(parse_number(key, value, line_no)?)),
                "delta_phi" => cfg.flux.delta_phi = parse_number(key, value, line_no)?,
                "phi_n_index" => {
                    cfg.flux.phi_n_index = value.parse().map_err(|_| {
                        Error::Config(format!(
                            "line {line_no}: `phi_n_index` expects an integer, got `{value}`"
                        ))
                    })?
                }
                "dg_gap" => dg_gap = Some(from_hz(parse_number(key, value, line_no)?)),
                "dg_slope" => dg_slope = Some(from_hz(parse_number(key, value, line_no)?)),
                _ => {
                    let v = parse_number(key, value, line_no)?;
                    cfg.params
                        .set_field(key, v)
                        .map_err(|_| Error::Config(format!("line {line_no}: unknown key `{key}`")))?;
                }
            }
        }

        if let Some(g) = gap_delta {
            cfg.flux.gap_delta = g;
        }
        match ip_slope {
            Some(s) => {
                cfg.flux.ip_slope = s;
                cfg.ip_slope_derived = false;
            }
            None => {
                cfg.flux.ip_slope = derive_ip_slope(cfg.flux.gap_delta, cfg.flux.delta_phi, cfg.params.omega_eg)
                    .map_err(|e| Error::Config(format!("cannot derive ip_slope: {e}")))?;
                cfg.ip_slope_derived = true;
            }
        }
        cfg.level = match (dg_gap, dg_slope) {
            (None, None) => LevelModel::Fixed,
            (Some(gap), Some(slope)) => LevelModel::Hyperbolic { gap, slope },
            _ => return Err(Error::Config("`dg_gap` and `dg_slope` must be given together".into())),
        };
        cfg.params.validate().map_err(|e| Error::Config(e.to_string()))?;
        cfg.flux.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read parameter file {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Resolved values as `key = value` lines in file units.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (key, unit) in FIELDS {
            let v = self.params.get_field(key).expect("known field");
            let unit = match unit {
                FieldUnit::Frequency => "Hz",
                FieldUnit::Phase => "rad",
            };
            let _ = writeln!(out, "{key} = {v:.11e}  # {unit}");
        }
        let _ = writeln!(out, "omega_de = {:.11e}  # Hz, derived", to_hz(self.params.omega_de()));
        let _ = writeln!(out, "gap_delta = {:.11e}  # Hz", to_hz(self.flux.gap_delta));
        let _ = writeln!(
            out,
            "ip_slope = {:.11e}  # Hz per flux quantum{}",
            to_hz(self.flux.ip_slope),
            if self.ip_slope_derived {
                ", derived from omega_eg at delta_phi"
            } else {
                ""
            }
        );
        let _ = writeln!(out, "phi_n_index = {}", self.flux.phi_n_index);
        let _ = writeln!(out, "delta_phi = {:.11e}  # flux quanta", self.flux.delta_phi);
        if let LevelModel::Hyperbolic { gap, slope } = self.level {
            let _ = writeln!(out, "dg_gap = {:.11e}  # Hz", to_hz(gap));
            let _ = writeln!(out, "dg_slope = {:.11e}  # Hz per flux quantum", to_hz(slope));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_working_point() {
        let c = Config::parse("# nothing\n\n").unwrap();
        assert_eq!(c.params, default_working_point());
        assert!(c.ip_slope_derived);
    }

    #[test]
    fn overrides_in_hz() {
        let c = Config::parse("Omega = 1.0e8 # weaker pump\nphi = 0.5\n").unwrap();
        assert!((c.params.rabi - from_hz(1.0e8)).abs() < 1e-6);
        assert_eq!(c.params.phi, 0.5);
    }

    #[test]
    fn unknown_and_malformed_keys() {
        assert!(Config::parse("bogus = 1").is_err());
        assert!(Config::parse("omega1 1e9").is_err());
        assert!(Config::parse("omega1 = abc").is_err());
        assert!(Config::parse("omega1 = 1e9\nomega1 = 2e9").is_err());
        assert!(Config::parse("dg_gap = 1e9").is_err());
    }

    #[test]
    fn invariants_checked() {
        assert!(Config::parse("omega_dg = 1e9").is_err());
        assert!(Config::parse("kappa1 = -1").is_err());
    }

    #[test]
    fn render_round_trips() {
        let c = Config::parse("Omega = 1.234e8\nip_slope = 6e11\n").unwrap();
        let again = Config::parse(
            &c.render()
                .lines()
                .filter(|l| !l.starts_with("omega_de"))
                .collect::<Vec<_>>()
                .join("\n"),
        )
        .unwrap();
        assert!((again.params.rabi - c.params.rabi).abs() <= 1e-9 * c.params.rabi);
        assert!(!again.ip_slope_derived);
    }
}
