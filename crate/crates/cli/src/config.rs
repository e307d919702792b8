//! Flat `key = value` experiment configuration.

use std::path::PathBuf;

use qarrow_core::interferometer::{UGrid, MIN_SAMPLES};
use qarrow_core::quench::{PropagationSettings, QuenchProtocol};
use qarrow_core::qubit::InverseTemperature;

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// `k_BT/h` in kHz; the inverse temperature is its reciprocal.
    pub beta_h_inv_khz: f64,
    pub nu0_khz: f64,
    pub nu_tau_khz: f64,
    /// Total rotation of the field direction over the quench, degrees.
    pub phase_sweep_deg: f64,
    pub tau_list_us: Vec<f64>,
    pub n_steps: usize,
    /// Samples per trajectory and per identity-check time grid.
    pub n_time_points: usize,
    pub n_char_samples: usize,
    pub u_span_ms: f64,
    pub noise_sigma: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            beta_h_inv_khz: 1.56,
            nu0_khz: 1.0,
            nu_tau_khz: 1.8,
            phase_sweep_deg: 90.0,
            tau_list_us: vec![100.0, 200.0, 260.0, 320.0, 420.0, 500.0, 700.0],
            n_steps: 2000,
            n_time_points: 21,
            n_char_samples: 360,
            u_span_ms: 2.5,
            noise_sigma: 0.0,
            seed: 0,
            output_dir: PathBuf::from("qarrow-out"),
        }
    }
}

fn bad(key: &str, value: &str) -> CliError {
    CliError::Config(format!("cannot parse {key} = {value}"))
}

fn parse_f64(key: &str, value: &str) -> Result<f64, CliError> {
    value.parse::<f64>().map_err(|_| bad(key, value))
}

fn parse_usize(key: &str, value: &str) -> Result<usize, CliError> {
    value.parse::<usize>().map_err(|_| bad(key, value))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, CliError> {
    let inner = value.trim().trim_start_matches('[').trim_end_matches(']');
    inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_f64(key, s))
        .collect()
}

impl ExperimentConfig {
    /// Parses a config file body on top of the defaults. Blank lines and `#`
    /// comments are ignored; unknown and repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = ExperimentConfig::default();
        let mut seen: Vec<String> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            if seen.iter().any(|k| k == key) {
                return Err(CliError::Config(format!("line {}: {key} set twice", lineno + 1)));
            }
            seen.push(key.to_string());
            match key {
                "beta_h_inv_khz" => cfg.beta_h_inv_khz = parse_f64(key, value)?,
                "nu0_khz" => cfg.nu0_khz = parse_f64(key, value)?,
                "nu_tau_khz" => cfg.nu_tau_khz = parse_f64(key, value)?,
                "phase_sweep_deg" => cfg.phase_sweep_deg = parse_f64(key, value)?,
                "tau_list_us" => cfg.tau_list_us = parse_list(key, value)?,
                "n_steps" => cfg.n_steps = parse_usize(key, value)?,
                "n_time_points" => cfg.n_time_points = parse_usize(key, value)?,
                "n_char_samples" => cfg.n_char_samples = parse_usize(key, value)?,
                "u_span_ms" => cfg.u_span_ms = parse_f64(key, value)?,
                "noise_sigma" => cfg.noise_sigma = parse_f64(key, value)?,
                "seed" => cfg.seed = value.parse().map_err(|_| bad(key, value))?,
                "output_dir" => cfg.output_dir = PathBuf::from(value),
                other => {
                    return Err(CliError::Config(format!("line {}: unknown key {other}", lineno + 1)))
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("beta_h_inv_khz", self.beta_h_inv_khz),
            ("nu0_khz", self.nu0_khz),
            ("nu_tau_khz", self.nu_tau_khz),
            ("u_span_ms", self.u_span_ms),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CliError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.tau_list_us.is_empty() {
            return Err(CliError::Config("tau_list_us is empty".into()));
        }
        if let Some(t) = self.tau_list_us.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
            return Err(CliError::Config(format!("quench durations must be positive, got {t}")));
        }
        if !self.phase_sweep_deg.is_finite() {
            return Err(CliError::Config("phase_sweep_deg must be finite".into()));
        }
        if self.n_steps == 0 {
            return Err(CliError::Config("n_steps must be at least 1".into()));
        }
        if self.n_time_points < 2 {
            return Err(CliError::Config("n_time_points must be at least 2".into()));
        }
        if self.n_char_samples < MIN_SAMPLES {
            return Err(CliError::Config(format!("n_char_samples must be at least {MIN_SAMPLES}")));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(CliError::Config(format!("noise_sigma must be non-negative, got {}", self.noise_sigma)));
        }
        Ok(())
    }

    pub fn beta(&self) -> Result<InverseTemperature, CliError> {
        Ok(InverseTemperature::from_spin_temperature_khz(self.beta_h_inv_khz)?)
    }

    pub fn protocol(&self, tau_us: f64) -> Result<QuenchProtocol, CliError> {
        Ok(QuenchProtocol::new(self.nu0_khz, self.nu_tau_khz, tau_us * 1e-6)?
            .with_phase_sweep(self.phase_sweep_deg.to_radians())?)
    }

    pub fn settings(&self) -> PropagationSettings {
        PropagationSettings::with_steps(self.n_steps)
    }

    pub fn u_grid(&self) -> UGrid {
        UGrid { n_samples: self.n_char_samples, u_span: self.u_span_ms * 1e-3 }
    }
}
