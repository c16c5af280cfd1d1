//! Experiment configuration: TOML in, validated and hashed.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Density,
    Doubling,
    Weight,
    Theorem3,
    Theorem4,
    Schrodinger,
    Gap,
    Ibp,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Density => "density",
            Self::Doubling => "doubling",
            Self::Weight => "weight",
            Self::Theorem3 => "theorem3",
            Self::Theorem4 => "theorem4",
            Self::Schrodinger => "schrodinger",
            Self::Gap => "gap",
            Self::Ibp => "ibp",
        }
    }
}

/// Parameters of every command; each command reads the fields it needs and
/// falls back to its defaults for the rest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub manifold: Option<String>,
    pub d: Option<usize>,
    pub m: Option<usize>,
    pub ms: Option<Vec<usize>>,
    pub ds: Option<Vec<usize>>,
    pub gammas: Option<Vec<f64>>,
    pub betas: Option<Vec<f64>>,
    pub r: Option<f64>,
    pub r0: Option<f64>,
    pub alpha: Option<f64>,
    pub n: Option<Vec<usize>>,
    pub samples_per_period: Option<usize>,
    pub k: Option<u32>,
    pub ks: Option<Vec<u32>>,
    pub lambdas: Option<Vec<f64>>,
    pub u: Option<String>,
    pub center: Option<Vec<f64>>,
    pub spectrum: Option<Vec<i64>>,
    pub interval: Option<[f64; 2]>,
    pub delta: Option<f64>,
    pub random_cases: Option<usize>,
}

/// Overrides for the pass/fail thresholds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative deviation of `density_radius · √λ₁` from `π/2`.
    pub density: Option<f64>,
    /// Largest max/min of the product along a multi-term family.
    pub product_spread: Option<f64>,
    /// Relative error of exact doubling ratios.
    pub ratio: Option<f64>,
    /// Relative variation of `r_min √λ` across the threshold sweep.
    pub threshold: Option<f64>,
    /// Smallest accepted R² of the potential scan.
    pub r_squared: Option<f64>,
    /// Largest density radius relative to the lowest zonal harmonic.
    pub isolated_zero: Option<f64>,
}

impl Tolerances {
    pub fn density(&self) -> f64 {
        self.density.unwrap_or(0.05)
    }
    pub fn product_spread(&self) -> f64 {
        self.product_spread.unwrap_or(1.5)
    }
    pub fn ratio(&self) -> f64 {
        self.ratio.unwrap_or(1e-8)
    }
    pub fn threshold(&self) -> f64 {
        self.threshold.unwrap_or(0.2)
    }
    pub fn r_squared(&self) -> f64 {
        self.r_squared.unwrap_or(0.999)
    }
    pub fn isolated_zero(&self) -> f64 {
        self.isolated_zero.unwrap_or(1.2)
    }
}

/// Contents of a config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub command: Option<Command>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }
}

/// Flags given on the command line.
#[derive(Debug, Clone, Default)]
pub struct Flags {
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
}

/// A resolved experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub seed: u64,
    pub params: Params,
    pub tolerances: Tolerances,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub threads: Option<usize>,
}

pub const DEFAULT_SEED: u64 = 0;

impl ExperimentConfig {
    /// Merges flags and file; the file wins on conflict and each conflict
    /// produces a warning.
    pub fn resolve(command: Command, file: ConfigFile, flags: Flags) -> Result<(Self, Vec<String>), Vec<String>> {
        let mut warnings = Vec::new();
        if let Some(c) = file.command {
            if c != command {
                return Err(vec![format!(
                    "config file is for command `{}` but `{}` was requested",
                    c.name(),
                    command.name()
                )]);
            }
        }
        fn pick<T: PartialEq + std::fmt::Debug>(
            name: &str,
            file: Option<T>,
            flag: Option<T>,
            warnings: &mut Vec<String>,
        ) -> Option<T> {
            match (file, flag) {
                (Some(f), Some(c)) => {
                    if f != c {
                        warnings.push(format!("--{name} {c:?} overridden by config value {f:?}"));
                    }
                    Some(f)
                }
                (f, c) => f.or(c),
            }
        }
        let out = pick("out", file.out, flags.out, &mut warnings);
        let threads = pick("threads", file.threads, flags.threads, &mut warnings);
        let seed = pick("seed", file.seed, flags.seed, &mut warnings).unwrap_or(DEFAULT_SEED);
        if threads == Some(0) {
            return Err(vec!["threads must be at least 1".into()]);
        }
        let cfg = Self { command, seed, params: file.params, tolerances: file.tolerances, out, threads };
        let errors = crate::run::validate(&cfg);
        if errors.is_empty() {
            Ok((cfg, warnings))
        } else {
            Err(errors)
        }
    }

    /// Canonical bytes: JSON of command, seed, parameters and tolerances in
    /// declaration order, with unset fields omitted.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let value = serde_json::to_value(self).expect("config serializes");
        serde_json::to_vec(&strip_nulls(value)).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_bytes()))
    }
}

fn strip_nulls(v: serde_json::Value) -> serde_json::Value {
    use serde_json::Value;
    match v {
        Value::Object(map) => {
            Value::Object(map.into_iter().filter(|(_, v)| !v.is_null()).map(|(k, v)| (k, strip_nulls(v))).collect())
        }
        Value::Array(a) => Value::Array(a.into_iter().map(strip_nulls).collect()),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_wins_with_warning() {
        let file = ConfigFile { seed: Some(5), threads: Some(2), ..Default::default() };
        let flags = Flags { seed: Some(9), threads: Some(2), out: None };
        let (cfg, warnings) = ExperimentConfig::resolve(Command::Doubling, file, flags).unwrap();
        assert_eq!(cfg.seed, 5);
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("seed"));
    }

    #[test]
    fn hash_ignores_output_location_and_threads() {
        let a = ExperimentConfig::resolve(Command::Doubling, ConfigFile::default(), Flags::default()).unwrap().0;
        let flags = Flags { out: Some("x".into()), threads: Some(3), seed: None };
        let b = ExperimentConfig::resolve(Command::Doubling, ConfigFile::default(), flags).unwrap().0;
        assert_eq!(a.hash(), b.hash());
        let file = ConfigFile { seed: Some(1), ..Default::default() };
        let c = ExperimentConfig::resolve(Command::Doubling, file, Flags::default()).unwrap().0;
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn unknown_keys_and_command_mismatch_are_rejected() {
        assert!(ConfigFile::parse("[params]\nbogus = 1").is_err());
        let file = ConfigFile::parse("command = \"gap\"").unwrap();
        assert!(ExperimentConfig::resolve(Command::Weight, file, Flags::default()).is_err());
    }
}
