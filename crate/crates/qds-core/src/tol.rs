use serde::{Deserialize, Serialize};

/// Numerical tolerances used throughout the crate.
///
/// Defaults are absolute tolerances calibrated for dimensions up to 64 with
/// entries of order one. Every field can be overridden (the CLI exposes
/// `--tol name=value`).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Tolerances {
    pub hermitian_tol: f64,
    pub psd_tol: f64,
    pub trace_tol: f64,
    pub recon_tol: f64,
    pub orth_tol: f64,
    pub tp_tol: f64,
    pub un_tol: f64,
    pub conv_tol: f64,
    pub maj_tol: f64,
    pub ds_tol: f64,
    pub realize_tol: f64,
    pub mono_tol: f64,
    pub unitary_tol: f64,
    pub strict_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian_tol: 1e-10,
            psd_tol: 1e-10,
            trace_tol: 1e-10,
            recon_tol: 1e-9,
            orth_tol: 1e-9,
            tp_tol: 1e-10,
            un_tol: 1e-10,
            conv_tol: 1e-9,
            maj_tol: 1e-9,
            ds_tol: 1e-9,
            realize_tol: 1e-8,
            mono_tol: 1e-10,
            unitary_tol: 1e-8,
            strict_floor: 1e-12,
        }
    }
}

impl Tolerances {
    /// Set a tolerance by name. Returns false for an unknown name.
    pub fn set(&mut self, name: &str, value: f64) -> bool {
        match name {
            "hermitian_tol" => self.hermitian_tol = value,
            "psd_tol" => self.psd_tol = value,
            "trace_tol" => self.trace_tol = value,
            "recon_tol" => self.recon_tol = value,
            "orth_tol" => self.orth_tol = value,
            "tp_tol" => self.tp_tol = value,
            "un_tol" => self.un_tol = value,
            "conv_tol" => self.conv_tol = value,
            "maj_tol" => self.maj_tol = value,
            "ds_tol" => self.ds_tol = value,
            "realize_tol" => self.realize_tol = value,
            "mono_tol" => self.mono_tol = value,
            "unitary_tol" => self.unitary_tol = value,
            "strict_floor" => self.strict_floor = value,
            _ => return false,
        }
        true
    }
}
