//! Declarative experiment configs.

use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use absum_core::colsum::MatrixBlock;
use absum_core::matrixclass::MatrixKind;
use absum_core::{SeriesKind, TruncWindow, WeightKind};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Version of the config and report layout; bumped on breaking changes.
pub const SCHEMA_VERSION: &str = "1.0";

/// The config schema shipped under `schema/`.
pub const SCHEMA_JSON: &str = include_str!("../schema/experiment-config.schema.json");

fn schema() -> &'static jsonschema::Validator {
    static VALIDATOR: OnceLock<jsonschema::Validator> = OnceLock::new();
    VALIDATOR.get_or_init(|| {
        let value = serde_json::from_str(SCHEMA_JSON).expect("shipped schema is JSON");
        jsonschema::validator_for(&value).expect("shipped schema is a valid JSON schema")
    })
}

/// The example configs under `configs/`, embedded for the verification suite.
pub const SHIPPED_CONFIGS: &[(&str, &str)] = &[
    ("almost_alternating.json", include_str!("../configs/almost_alternating.json")),
    ("classify_c_constant.json", include_str!("../configs/classify_c_constant.json")),
    ("classify_c_half_diagonal.json", include_str!("../configs/classify_c_half_diagonal.json")),
    ("classify_l1_half_diagonal.json", include_str!("../configs/classify_l1_half_diagonal.json")),
    ("hypotheses_bs.json", include_str!("../configs/hypotheses_bs.json")),
    ("member_bs_sine.json", include_str!("../configs/member_bs_sine.json")),
    ("member_ones.json", include_str!("../configs/member_ones.json")),
    ("norm_unit_basis.json", include_str!("../configs/norm_unit_basis.json")),
    ("sandwich_identity.json", include_str!("../configs/sandwich_identity.json")),
    ("transform_geometric.json", include_str!("../configs/transform_geometric.json")),
    ("transform_psi_alternating.json", include_str!("../configs/transform_psi_alternating.json")),
    ("verify_small.json", include_str!("../configs/verify_small.json")),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Transform,
    Norm,
    Member,
    Hypotheses,
    Almost,
    #[value(name = "classify-l1")]
    #[serde(rename = "classify-l1")]
    ClassifyL1,
    ClassifyC,
    #[value(alias = "lemma31")]
    #[serde(alias = "lemma31")]
    Sandwich,
    VerifyAll,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Transform => "transform",
            Command::Norm => "norm",
            Command::Member => "member",
            Command::Hypotheses => "hypotheses",
            Command::Almost => "almost",
            Command::ClassifyL1 => "classify-l1",
            Command::ClassifyC => "classify-c",
            Command::Sandwich => "sandwich",
            Command::VerifyAll => "verify-all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    #[default]
    Small,
    Standard,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<SeriesKind>,
    /// Weights `p`; unit when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<WeightKind>,
    /// Weights `u`; unit when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<WeightKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixKind>,
    /// Finite block for the column-sum functionals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block: Option<MatrixBlock>,
    /// Exponents `p_v` for the column-sum functionals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponents: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<TruncWindow>,
    /// Probe length for the weight hypotheses.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<Scale>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputPaths>,
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            series: None,
            p: None,
            u: None,
            k: None,
            matrix: None,
            block: None,
            exponents: None,
            window: None,
            probe: None,
            scale: None,
            seed: None,
            threads: None,
            output: None,
        }
    }

    /// Parses and checks a config: JSON syntax, then the shipped schema,
    /// then the typed fields.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let problems: Vec<String> =
            schema().iter_errors(&value).take(3).map(|e| format!("{} at `{}`", e, e.instance_path())).collect();
        if !problems.is_empty() {
            return Err(CliError::Config(format!("schema violation: {}", problems.join("; "))));
        }
        let cfg: Self = serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks that the fields the command needs are present.
    pub fn validate(&self) -> Result<(), CliError> {
        let need = |present: bool, field: &str| {
            if present {
                Ok(())
            } else {
                Err(CliError::Config(format!("command {} needs field `{field}`", self.command.as_str())))
            }
        };
        use Command::*;
        match self.command {
            Transform | Almost => {
                need(self.series.is_some(), "series")?;
                need(self.window.is_some(), "window")?;
            }
            Norm | Member => {
                need(self.series.is_some(), "series")?;
                need(self.k.is_some(), "k")?;
                need(self.window.is_some(), "window")?;
            }
            Hypotheses => {
                need(self.k.is_some(), "k")?;
                need(self.probe.is_some(), "probe")?;
                if self.series.is_some() {
                    need(self.window.is_some(), "window")?;
                }
            }
            ClassifyL1 | ClassifyC => {
                need(self.matrix.is_some(), "matrix")?;
                need(self.k.is_some(), "k")?;
                need(self.window.is_some(), "window")?;
            }
            Sandwich => {
                need(self.block.is_some(), "block")?;
                need(self.exponents.is_some(), "exponents")?;
            }
            VerifyAll => {}
        }
        if let Some(w) = &self.window {
            w.validate()?;
        }
        if self.threads == Some(0) {
            return Err(CliError::Config("threads must be at least 1".into()));
        }
        Ok(())
    }
}
