use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::ExpError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Shape,
    Construct,
    Oriented,
    Compete,
    Ends,
    Busemann,
    Diagnose,
}

impl Kind {
    pub const ALL: [Kind; 7] =
        [Kind::Shape, Kind::Construct, Kind::Oriented, Kind::Compete, Kind::Ends, Kind::Busemann, Kind::Diagnose];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Shape => "shape",
            Kind::Construct => "construct",
            Kind::Oriented => "oriented",
            Kind::Compete => "compete",
            Kind::Ends => "ends",
            Kind::Busemann => "busemann",
            Kind::Diagnose => "diagnose",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kind {
    type Err = ExpError;

    fn from_str(s: &str) -> Result<Self, ExpError> {
        Kind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ExpError::Config(format!("unknown experiment kind {s:?}")))
    }
}

fn default_trials() -> usize {
    20
}

/// One experiment: what to run, how many trials, and under which seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub master_seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Worker count; never affects results.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub params: Value,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str, expected: Option<Kind>) -> Result<ExperimentConfig, ExpError> {
        let mut v: Value = serde_json::from_str(text).map_err(|e| ExpError::Config(format!("invalid JSON: {e}")))?;
        if let (Some(k), Some(obj)) = (expected, v.as_object_mut()) {
            obj.entry("kind").or_insert_with(|| Value::String(k.name().into()));
        }
        let cfg: ExperimentConfig =
            serde_json::from_value(v).map_err(|e| ExpError::Config(format!("config does not match the schema: {e}")))?;
        if let Some(k) = expected {
            if cfg.kind != k {
                return Err(ExpError::Config(format!("config is for kind {} but {k} was requested", cfg.kind)));
            }
        }
        if cfg.trials == 0 {
            return Err(ExpError::Config("trials must be positive".into()));
        }
        if cfg.threads == Some(0) {
            return Err(ExpError::Config("threads must be positive".into()));
        }
        crate::experiments::check_params(&cfg)?;
        Ok(cfg)
    }

    pub fn load(path: &Path, expected: Option<Kind>) -> Result<ExperimentConfig, ExpError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExpError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text, expected)
    }

    pub fn apply(mut self, o: &Overrides) -> ExperimentConfig {
        if let Some(s) = o.seed {
            self.master_seed = s;
        }
        if let Some(t) = o.trials {
            self.trials = t;
        }
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
        if let Some(t) = o.threads {
            self.threads = Some(t);
        }
        self
    }

    /// SHA-256 of the canonical (sorted-key) JSON of everything that can
    /// influence results; `threads` and `out` are excluded.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("threads");
            obj.remove("out");
        }
        let canonical = serde_json::to_string(&v).expect("value serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Output directory: explicit setting, else `$FPPLAB_OUT` (or
    /// `fpplab-out`) joined with `<kind>-<hash prefix>`.
    pub fn out_dir(&self) -> PathBuf {
        if let Some(o) = &self.out {
            return o.clone();
        }
        let root = std::env::var_os("FPPLAB_OUT").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("fpplab-out"));
        root.join(format!("{}-{}", self.kind, &self.hash()[..12]))
    }

    /// Deserializes the parameter block for this kind, rejecting unknown keys.
    pub fn params<T: serde::de::DeserializeOwned>(&self) -> Result<T, ExpError> {
        let v = if self.params.is_null() { Value::Object(Default::default()) } else { self.params.clone() };
        serde_json::from_value(v).map_err(|e| ExpError::Config(format!("invalid {} params: {e}", self.kind)))
    }
}
