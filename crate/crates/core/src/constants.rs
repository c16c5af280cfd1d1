//! Calibrated constants, stored as TOML.
//!
//! The bundled file is regenerated by `cargo run --release --example
//! calibrate`. Setting `NODAL_LAB_CONSTANTS` to a path loads that file instead.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::weight::SignCase;
use crate::{Error, Result};

pub const BUNDLED: &str = include_str!("../data/constants.toml");
pub const ENV_OVERRIDE: &str = "NODAL_LAB_CONSTANTS";

/// Calibrated multiplier and measurements for one `(d, m, case)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightEntry {
    pub d: usize,
    pub m: usize,
    pub case: SignCase,
    /// Multiplier in the choice of `α`.
    pub k: f64,
    pub alpha: f64,
    /// `sup_{B_r} |𝓛v_r|`.
    pub c_measured: f64,
    /// `max_q sup |Δ^q ṽ_r| / Δ^q |x|^{-α}`.
    pub domination: f64,
    /// `min Δ^m ṽ_r / (∏(α+j)|x|^{-α-2m})` on `[r, 3r]`.
    pub main_term: f64,
}

/// `C₀, C₁` in `C ≤ C₀ exp(C₁ σ)` for one `(d, case)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthEntry {
    pub d: usize,
    pub case: SignCase,
    pub c0: f64,
    pub c1: f64,
}

/// Ellipticity-to-doubling calibration for general operators of order `2m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralOperatorEntry {
    pub m: usize,
    /// Largest doubling ratio observed over the sampled operators and subsolutions.
    pub max_ratio: f64,
    /// Ceiling used by the verifier: `max_ratio` times the safety factor.
    pub ceiling: f64,
}

/// `C₀, C₁` in the potential bound `exp(C₀ + C₁√η)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchrodingerEntry {
    pub d: usize,
    pub c0: f64,
    pub c1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct DoublingConstants {
    /// Multiplier applied to the largest observed ratio to get a ceiling.
    pub safety: f64,
    pub general: Vec<GeneralOperatorEntry>,
    pub schrodinger: Vec<SchrodingerEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub version: u32,
    pub r0: f64,
    /// Outer radius factor `c` in `r ≤ r₀/c`.
    pub c: f64,
    pub case_b_gamma: f64,
    pub k_prime: f64,
    /// Worst ratio of `|coeff Δ^m |x|^l|` to `l!!(l+d−2)!!(2m−1−l)!`.
    pub semifactorial: f64,
    /// Worst `|Δ^q ṽ_r| / Δ^q |x|^{-α}` over calibrated configurations.
    pub domination: f64,
    pub weight: Vec<WeightEntry>,
    pub growth: Vec<GrowthEntry>,
    #[serde(default)]
    pub doubling: DoublingConstants,
}

impl Constants {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Constants(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Constants(e.to_string()))
    }

    pub fn weight(&self, d: usize, m: usize, case: SignCase) -> Result<&WeightEntry> {
        self.weight
            .iter()
            .find(|e| e.d == d && e.m == m && e.case == case)
            .ok_or_else(|| Error::Constants(format!("no weight entry for d={d}, m={m}, case {}", case.label())))
    }

    pub fn growth(&self, d: usize, case: SignCase) -> Result<GrowthEntry> {
        self.growth
            .iter()
            .find(|e| e.d == d && e.case == case)
            .copied()
            .ok_or_else(|| Error::Constants(format!("no growth entry for d={d}, case {}", case.label())))
    }

    pub fn general(&self, m: usize) -> Result<GeneralOperatorEntry> {
        self.doubling
            .general
            .iter()
            .find(|e| e.m == m)
            .copied()
            .ok_or_else(|| Error::Constants(format!("no general-operator entry for m={m}")))
    }

    pub fn schrodinger(&self, d: usize) -> Result<SchrodingerEntry> {
        self.doubling
            .schrodinger
            .iter()
            .find(|e| e.d == d)
            .copied()
            .ok_or_else(|| Error::Constants(format!("no potential entry for d={d}")))
    }
}

/// Loads the override file if set, else the bundled constants.
pub fn load() -> Result<Constants> {
    match std::env::var_os(ENV_OVERRIDE) {
        Some(path) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::Constants(format!("{}: {e}", path.to_string_lossy())))?;
            Constants::parse(&text)
        }
        None => Constants::parse(BUNDLED),
    }
}

/// Process-wide constants, loaded once.
pub fn global() -> Result<&'static Constants> {
    static CELL: OnceLock<std::result::Result<Constants, Error>> = OnceLock::new();
    CELL.get_or_init(load).as_ref().map_err(Clone::clone)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_file_parses_and_round_trips() {
        let c = Constants::parse(BUNDLED).unwrap();
        let again = Constants::parse(&c.to_toml().unwrap()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn missing_entries_are_errors() {
        let c = Constants::parse(BUNDLED).unwrap();
        assert!(c.weight(99, 1, SignCase::A).is_err());
        assert!(c.growth(99, SignCase::B).is_err());
        assert!(Constants::parse("version = 1").is_err());
    }
}
