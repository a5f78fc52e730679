//! Machine constants and the `key = value` configuration file format.
//!
//! Every energy is carried as a frequency in Hz. Magnetons are stored as
//! frequency per tesla (`mu/h`), so a Zeeman splitting is simply
//! `g * mu * B`.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{EndosError, Result};

/// Lattice spacing below which neighbouring donors start to interact.
pub const MIN_LATTICE_SPACING: f64 = 30e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MachineConfig {
    /// Static field along z, tesla.
    pub b_field: f64,
    /// Bare donor hyperfine coupling, Hz.
    pub a_z: f64,
    /// Donor hyperfine coupling with the tip in place, Hz.
    pub a_z_prime: f64,
    /// Electron to tip 13C hyperfine coupling, Hz.
    pub a_prime: f64,
    /// Kelvin.
    pub temperature: f64,
    /// Coherence time, seconds.
    pub t2: f64,
    /// Metres.
    pub lattice_spacing: f64,
    /// Seconds per site-to-site hop of the tip.
    pub tip_move_time: f64,
    pub nuclear_pi_duration: f64,
    pub electron_pi_duration: f64,
    /// Readout dwell per measurement, seconds.
    pub measurement_dwell: f64,
    /// Half-width of the resonance window of a selective pulse, Hz.
    pub selectivity_tolerance: f64,
    /// Tolerance used to classify an exact (noise-free) readout frequency, Hz.
    pub readout_tolerance: f64,
    /// Divisor applied to modulation lines when synthesizing current traces.
    pub trace_scale: f64,
    /// Bohr magneton over h, Hz/T.
    pub mu_b: f64,
    /// Nuclear magneton over h, Hz/T.
    pub mu_n: f64,
    /// Boltzmann constant, J/K.
    pub k_b: f64,
    /// Planck constant, J s.
    pub h: f64,
    /// Register size; 0 means "infer from the circuit".
    pub num_qubits: usize,
    /// Columns of the qubit grid; 0 lays every qubit on one row.
    pub grid_columns: usize,
}

impl Default for MachineConfig {
    fn default() -> Self {
        MachineConfig {
            b_field: 5.0,
            a_z: 120e6,
            a_z_prime: 120e6,
            a_prime: 2e9,
            temperature: 1.0,
            t2: 10.0,
            lattice_spacing: 30e-9,
            tip_move_time: 15e-6,
            nuclear_pi_duration: 10e-6,
            electron_pi_duration: 0.1e-6,
            measurement_dwell: 15e-6,
            selectivity_tolerance: 1e3,
            readout_tolerance: 1e6,
            trace_scale: 1e6,
            // CODATA 2018
            mu_b: 1.39962449361e10,
            mu_n: 7.6225932291e6,
            k_b: 1.380649e-23,
            h: 6.62607015e-34,
            num_qubits: 0,
            grid_columns: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ConfigWarning {
    LatticeSpacingBelowMinimum { spacing: f64 },
}

impl std::fmt::Display for ConfigWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigWarning::LatticeSpacingBelowMinimum { spacing } => write!(
                f,
                "lattice spacing {spacing:e} m is below {MIN_LATTICE_SPACING:e} m; neighbouring donors may couple"
            ),
        }
    }
}

const FLOAT_KEYS: &[&str] = &[
    "b_field",
    "a_z",
    "a_z_prime",
    "a_prime",
    "temperature",
    "t2",
    "lattice_spacing",
    "tip_move_time",
    "nuclear_pi_duration",
    "electron_pi_duration",
    "measurement_dwell",
    "selectivity_tolerance",
    "readout_tolerance",
    "trace_scale",
    "mu_b",
    "mu_n",
    "k_b",
    "h",
];

const COUNT_KEYS: &[&str] = &["num_qubits", "grid_columns"];

impl MachineConfig {
    fn float_mut(&mut self, key: &str) -> Option<&mut f64> {
        Some(match key {
            "b_field" => &mut self.b_field,
            "a_z" => &mut self.a_z,
            "a_z_prime" => &mut self.a_z_prime,
            "a_prime" => &mut self.a_prime,
            "temperature" => &mut self.temperature,
            "t2" => &mut self.t2,
            "lattice_spacing" => &mut self.lattice_spacing,
            "tip_move_time" => &mut self.tip_move_time,
            "nuclear_pi_duration" => &mut self.nuclear_pi_duration,
            "electron_pi_duration" => &mut self.electron_pi_duration,
            "measurement_dwell" => &mut self.measurement_dwell,
            "selectivity_tolerance" => &mut self.selectivity_tolerance,
            "readout_tolerance" => &mut self.readout_tolerance,
            "trace_scale" => &mut self.trace_scale,
            "mu_b" => &mut self.mu_b,
            "mu_n" => &mut self.mu_n,
            "k_b" => &mut self.k_b,
            "h" => &mut self.h,
            _ => return None,
        })
    }

    /// Parses the line-oriented `key = value` format. Missing keys keep
    /// their defaults; unknown or repeated keys are errors. The result is
    /// not validated, see [`MachineConfig::validate`].
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = MachineConfig::default();
        let mut seen: Vec<String> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let content = raw.split('#').next().unwrap_or("");
            if content.trim().is_empty() {
                continue;
            }
            let Some(eq) = content.find('=') else {
                let col = content.len() - content.trim_start().len() + 1;
                return Err(EndosError::parse(line_no, col, "expected `key = value`"));
            };
            let key = content[..eq].trim();
            let value = content[eq + 1..].trim();
            let key_col = content.len() - content.trim_start().len() + 1;
            let value_col = eq + 2 + (content[eq + 1..].len() - content[eq + 1..].trim_start().len());
            if key.is_empty() {
                return Err(EndosError::parse(line_no, key_col, "missing key before `=`"));
            }
            if seen.iter().any(|k| k == key) {
                return Err(EndosError::parse(line_no, key_col, format!("duplicate key `{key}`")));
            }
            if let Some(slot) = cfg.float_mut(key) {
                *slot = value.parse::<f64>().map_err(|_| {
                    EndosError::parse(line_no, value_col, format!("`{value}` is not a number"))
                })?;
            } else if COUNT_KEYS.contains(&key) {
                let n = value.parse::<usize>().map_err(|_| {
                    EndosError::parse(
                        line_no,
                        value_col,
                        format!("`{value}` is not a non-negative integer"),
                    )
                })?;
                match key {
                    "num_qubits" => cfg.num_qubits = n,
                    _ => cfg.grid_columns = n,
                }
            } else {
                return Err(EndosError::parse(
                    line_no,
                    key_col,
                    format!("unknown key `{key}`"),
                ));
            }
            seen.push(key.to_string());
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            EndosError::InvalidConfig(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    /// Renders the configuration back into the file format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut copy = self.clone();
        for key in FLOAT_KEYS {
            let v = *copy.float_mut(key).expect("listed key");
            let _ = writeln!(out, "{key} = {v:e}");
        }
        let _ = writeln!(out, "num_qubits = {}", self.num_qubits);
        let _ = writeln!(out, "grid_columns = {}", self.grid_columns);
        out
    }

    /// Checks physical sanity. Hard violations are errors; soft ones come
    /// back as warnings.
    pub fn validate(&self) -> Result<Vec<ConfigWarning>> {
        let positive = [
            ("b_field", self.b_field),
            ("temperature", self.temperature),
            ("t2", self.t2),
            ("lattice_spacing", self.lattice_spacing),
            ("tip_move_time", self.tip_move_time),
            ("nuclear_pi_duration", self.nuclear_pi_duration),
            ("electron_pi_duration", self.electron_pi_duration),
            ("measurement_dwell", self.measurement_dwell),
            ("selectivity_tolerance", self.selectivity_tolerance),
            ("readout_tolerance", self.readout_tolerance),
            ("trace_scale", self.trace_scale),
            ("mu_b", self.mu_b),
            ("mu_n", self.mu_n),
            ("k_b", self.k_b),
            ("h", self.h),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(EndosError::InvalidConfig(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        for (name, v) in [("a_z", self.a_z), ("a_z_prime", self.a_z_prime), ("a_prime", self.a_prime)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(EndosError::InvalidConfig(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        if let Some(gap) = crate::physics::min_spectral_gap(self) {
            if self.selectivity_tolerance >= gap {
                return Err(EndosError::InvalidConfig(format!(
                    "selectivity_tolerance {} Hz is not below the smallest spectral gap {gap} Hz",
                    self.selectivity_tolerance
                )));
            }
        }
        let mut warnings = Vec::new();
        if self.lattice_spacing < MIN_LATTICE_SPACING {
            warnings.push(ConfigWarning::LatticeSpacingBelowMinimum {
                spacing: self.lattice_spacing,
            });
        }
        Ok(warnings)
    }
}
