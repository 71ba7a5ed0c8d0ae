//! Run configuration: command-line flags override keys of the TOML file
//! given with `--config`, which override the built-in defaults.

use std::path::{Path, PathBuf};

use gfbbm::{Error, Result};
use serde::{Deserialize, Serialize};

/// Every key a config file may set. All optional; unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub alpha: Option<f64>,
    pub p: Option<u32>,
    pub c: Option<f64>,
    pub half_length: Option<f64>,
    pub n_points: Option<usize>,
    /// Read `half_length` in units of the wave's natural length `1/theta`.
    pub scaled_domain: Option<bool>,
    pub tolerance: Option<f64>,
    pub max_iterations: Option<usize>,
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub gamma: Option<f64>,
    pub sample_interval: Option<f64>,
    pub snapshots: Option<bool>,
    pub dc: Option<f64>,
    pub growing_modes: Option<bool>,
    pub alpha_min: Option<f64>,
    pub alpha_max: Option<f64>,
    pub c_min: Option<f64>,
    pub c_max: Option<f64>,
    pub resolution: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub profile: Option<PathBuf>,
}

macro_rules! overlay {
    ($hi:expr, $lo:expr; $($f:ident),* $(,)?) => {
        Settings { $($f: $hi.$f.or($lo.$f),)* }
    };
}

impl Settings {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text)
            .map_err(|e| Error::Config(format!("config file {}: {e}", path.display())))
    }

    /// Fields of `self` win; gaps are filled from `lower`.
    pub fn over(self, lower: Settings) -> Settings {
        overlay!(self, lower;
            alpha, p, c, half_length, n_points, scaled_domain, tolerance,
            max_iterations, dt, t_final, gamma, sample_interval, snapshots, dc,
            growing_modes, alpha_min, alpha_max, c_min, c_max, resolution,
            out_dir, profile,
        )
    }
}

/// Built-in defaults for each subcommand.
pub fn defaults(command: &str) -> Settings {
    let (half_length, n_points, scaled) = match command {
        "spectrum" => (64.0, 1024, false),
        "sweep" => (64.0, 1024, true),
        _ => (128.0, 2048, false),
    };
    Settings {
        p: Some(1),
        half_length: Some(half_length),
        n_points: Some(n_points),
        scaled_domain: Some(scaled),
        tolerance: Some(1e-12),
        max_iterations: Some(500),
        dt: Some(5e-4),
        t_final: Some(10.0),
        gamma: Some(1.1),
        sample_interval: Some(0.5),
        snapshots: Some(false),
        dc: Some(1e-3),
        growing_modes: Some(false),
        alpha_min: Some(0.01),
        alpha_max: Some(2.0),
        c_min: Some(0.01),
        c_max: Some(2.0),
        resolution: Some(0.01),
        out_dir: Some(PathBuf::from(".")),
        ..Settings::default()
    }
}

/// Resolves `flags > file > defaults`.
pub fn resolve(command: &str, flags: Settings, file: Option<&Path>) -> Result<Settings> {
    let from_file = match file {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    Ok(flags.over(from_file).over(defaults(command)))
}

pub fn require<T: Copy>(value: Option<T>, key: &str) -> Result<T> {
    value.ok_or_else(|| {
        Error::Config(format!(
            "missing `{key}`: pass --{} or set `{key}` in the config file",
            key.replace('_', "-")
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "alpha = 0.6\nc = 1.1\ndt = 1e-3\n").unwrap();
        let flags = Settings {
            c: Some(1.5),
            ..Settings::default()
        };
        let s = resolve("evolve", flags, Some(&path)).unwrap();
        assert_eq!(s.c, Some(1.5));
        assert_eq!(s.alpha, Some(0.6));
        assert_eq!(s.dt, Some(1e-3));
        assert_eq!(s.gamma, Some(1.1));
        assert_eq!(s.n_points, Some(2048));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "alpah = 0.6\n").unwrap();
        let err = resolve("solve", Settings::default(), Some(&path)).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(err.to_string().contains("alpah"));
    }

    #[test]
    fn missing_key_is_named() {
        let err = require::<f64>(None, "half_length").unwrap_err();
        assert!(err.to_string().contains("--half-length"));
    }
}
