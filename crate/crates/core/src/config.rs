//! Calibratable constants.  Every `≲` in the verified inequalities hides an
//! absolute constant; these are its configured stand-ins, overridable from
//! the CLI via `--set NAME=VALUE`.

use serde::Serialize;

use crate::error::Error;

#[derive(Debug, Clone, Serialize)]
pub struct Constants {
    /// Density-split certificate: `Σ|I_T| ≤ C_dens·δ^{-1}|G|`.
    pub c_dens: f64,
    /// Size-split certificate: `Σ|I_T| ≤ C_size·σ^{-2}‖f‖₂²`.
    pub c_size: f64,
    /// Tree bound: `|B_T| ≤ C_tree·dense·size·|I_T|`.
    pub c_tree: f64,
    /// Effective bilinear bound ratio.
    pub c_eff: f64,
    /// Restricted weak-type ratio.
    pub c_rw: f64,
    /// Distributional curve ratio.
    pub c_dist: f64,
    /// Factorization check ratio.
    pub c_fac: f64,
    /// `k₀ = C_k·loglog_+(1/λ)` in the level summation.
    pub c_k: f64,
    /// Gate `|F| ≤ C₀|G|` for the major-subset construction.
    pub c_zero: f64,
    /// φ-chain ratios (per interval and global).
    pub c_phi: f64,
    /// Size-vs-maximal-function bound.
    pub c_upper: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            c_dens: 16.0,
            c_size: 4.0,
            c_tree: 8.0,
            c_eff: 32.0,
            c_rw: 64.0,
            c_dist: 64.0,
            c_fac: 64.0,
            c_k: 8.0,
            c_zero: 0.25,
            c_phi: 16.0,
            c_upper: 8.0,
        }
    }
}

impl Constants {
    /// Apply a `NAME=VALUE` override; unknown names are rejected.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), Error> {
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::Config(format!(
                "constant {name} must be positive and finite, got {value}"
            )));
        }
        match name {
            "C_dens" => self.c_dens = value,
            "C_size" => self.c_size = value,
            "C_tree" => self.c_tree = value,
            "C_eff" => self.c_eff = value,
            "C_rw" => self.c_rw = value,
            "C_dist" => self.c_dist = value,
            "C_fac" => self.c_fac = value,
            "C_k" => self.c_k = value,
            "C0" => self.c_zero = value,
            "C_phi" => self.c_phi = value,
            "C_upper" => self.c_upper = value,
            _ => return Err(Error::Config(format!("unknown constant '{name}'"))),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides() {
        let mut c = Constants::default();
        c.set("C_dens", 8.0).unwrap();
        assert_eq!(c.c_dens, 8.0);
        c.set("C0", 0.5).unwrap();
        assert_eq!(c.c_zero, 0.5);
        assert!(c.set("C_bogus", 1.0).is_err());
        assert!(c.set("C_dens", -1.0).is_err());
        assert!(c.set("C_dens", f64::NAN).is_err());
    }
}
