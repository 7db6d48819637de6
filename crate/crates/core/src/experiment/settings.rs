//! Layered run settings: built-in defaults, `SPDC_SEED`, a flat TOML file,
//! then command-line flags, each overriding the one before.

use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::optics::GainParams;
use crate::DEFAULT_SEED;

/// Environment variable consulted for the seed when none is configured.
pub const SEED_ENV: &str = "SPDC_SEED";

/// Parses a repetition count such as `1000`, `1e6` or `2.5e5`.
pub fn parse_count(s: &str) -> Result<usize> {
    let s = s.trim();
    if let Ok(n) = s.parse::<usize>() {
        return Ok(n);
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 => Ok(v as usize),
        _ => Err(Error::Config(format!("not a whole repetition count: {s:?}"))),
    }
}

fn count_field<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<usize>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(u64),
        Float(f64),
        Text(String),
    }
    let parsed = match Raw::deserialize(d)? {
        Raw::Int(n) => Ok(n as usize),
        Raw::Float(v) => parse_count(&v.to_string()),
        Raw::Text(s) => parse_count(&s),
    };
    parsed.map(Some).map_err(serde::de::Error::custom)
}

/// Every tunable of every experiment. Unset fields fall through to the
/// layer below.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    #[serde(default, deserialize_with = "count_field", skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gain_gl: Option<f64>,
    /// Mean photon number per mode, `sinh^2(gL)`.
    #[serde(rename = "G", skip_serializing_if = "Option::is_none")]
    pub mean_photons: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transmittance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta1_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta2_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub photons_per_pixel: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crystal_length_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pump_width_px: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pm_width_px_at_1mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pixel_angle_rad: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode_floor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_max_rad: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_values: Option<Vec<f64>>,
}

macro_rules! overlay_fields {
    ($base:ident, $top:ident; $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f.clone(); } )*
    };
}

impl Settings {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// `self` with every field that `top` sets replaced. Setting either gain
    /// key in `top` clears both gain keys below it.
    pub fn overlay(mut self, top: &Settings) -> Settings {
        if top.gain_gl.is_some() || top.mean_photons.is_some() {
            self.gain_gl = None;
            self.mean_photons = None;
        }
        overlay_fields!(self, top; reps, seed, threads, gain_gl, mean_photons, eta, transmittance,
            theta1_deg, theta2_deg, photons_per_pixel, grid, crystal_length_mm, pump_width_px,
            pm_width_px_at_1mm, pixel_angle_rad, mode_floor, theta_max_rad, theta_points, g_values);
        self
    }

    /// Combines the layers. `env_seed` is the raw `SPDC_SEED` value, if any.
    pub fn resolve(cli: &Settings, file: Option<&Settings>, env_seed: Option<&str>) -> Result<Settings> {
        let mut base = Settings::default();
        if let Some(raw) = env_seed {
            let seed = raw
                .trim()
                .parse::<u64>()
                .map_err(|_| Error::Config(format!("{SEED_ENV} is not an unsigned integer: {raw:?}")))?;
            base.seed = Some(seed);
        }
        if let Some(f) = file {
            f.check_gain_exclusive()?;
            base = base.overlay(f);
        }
        cli.check_gain_exclusive()?;
        Ok(base.overlay(cli))
    }

    fn check_gain_exclusive(&self) -> Result<()> {
        if self.gain_gl.is_some() && self.mean_photons.is_some() {
            return Err(Error::Config("gain_gl and G are mutually exclusive".into()));
        }
        Ok(())
    }

    pub fn seed_or_default(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn reps_or(&self, default: usize) -> usize {
        self.reps.unwrap_or(default)
    }

    /// Gain from `gain_gl` or `G`, else `G = default_photons`.
    pub fn gain(&self, default_photons: f64) -> Result<GainParams> {
        self.check_gain_exclusive()?;
        match (self.gain_gl, self.mean_photons) {
            (Some(gl), None) => GainParams::from_gl(gl),
            (None, Some(g)) => GainParams::from_mean_photons(g),
            _ => GainParams::from_mean_photons(default_photons),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_accept_scientific_notation() {
        assert_eq!(parse_count("1e6").unwrap(), 1_000_000);
        assert_eq!(parse_count("2500").unwrap(), 2500);
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
    }

    #[test]
    fn file_parses_flat_keys() {
        let s = Settings::from_toml_str("reps = \"1e5\"\nseed = 9\nG = 0.5\ntheta1_deg = 22.5\n").unwrap();
        assert_eq!(s.reps, Some(100_000));
        assert_eq!(s.seed, Some(9));
        assert_eq!(s.mean_photons, Some(0.5));
        assert!(Settings::from_toml_str("bogus = 1").is_err());
        assert_eq!(Settings::from_toml_str("reps = 1e3").unwrap().reps, Some(1000));
    }

    #[test]
    fn precedence_is_defaults_env_file_cli() {
        let file = Settings { seed: Some(2), reps: Some(10), gain_gl: Some(1.0), ..Settings::default() };
        let cli = Settings { reps: Some(20), mean_photons: Some(3.0), ..Settings::default() };
        let r = Settings::resolve(&cli, Some(&file), Some("1")).unwrap();
        assert_eq!(r.seed, Some(2));
        assert_eq!(r.reps, Some(20));
        assert_eq!(r.gain_gl, None);
        assert_eq!(r.mean_photons, Some(3.0));
        let r = Settings::resolve(&Settings::default(), None, Some("7")).unwrap();
        assert_eq!(r.seed_or_default(), 7);
        assert_eq!(Settings::default().seed_or_default(), DEFAULT_SEED);
        assert!(Settings::resolve(&Settings::default(), None, Some("x")).is_err());
    }

    #[test]
    fn gain_keys_are_exclusive() {
        let both = Settings { gain_gl: Some(1.0), mean_photons: Some(1.0), ..Settings::default() };
        assert!(Settings::resolve(&both, None, None).is_err());
        assert!(both.gain(1.0).is_err());
    }
}
