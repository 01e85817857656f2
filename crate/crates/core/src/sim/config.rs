use serde::{Deserialize, Serialize};

use crate::analysis::ThroughputProtocol;
use crate::channel::FeedbackKind;
use crate::error::{Error, Result};
use crate::recovery::RecoveryMethod;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// ECM trace and determinant against the number of shared channels.
    Fig1EcmTrace,
    /// Analog shared feedback over `c/2` for several sparsity levels.
    Fig2AnalogSweep,
    /// Recovery methods side by side.
    Fig3Methods,
    /// Digital shared feedback over `c/2` for several threshold counts.
    Fig5DigitalSweep,
    /// Digital shared feedback under fixed `p·k·r` bit budgets.
    Fig6BitBudget,
    Custom,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        Self::Fig1EcmTrace,
        Self::Fig2AnalogSweep,
        Self::Fig3Methods,
        Self::Fig5DigitalSweep,
        Self::Fig6BitBudget,
        Self::Custom,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Self::Fig1EcmTrace => "fig1_ecm_trace",
            Self::Fig2AnalogSweep => "fig2_analog_sweep",
            Self::Fig3Methods => "fig3_methods",
            Self::Fig5DigitalSweep => "fig5_digital_sweep",
            Self::Fig6BitBudget => "fig6_bit_budget",
            Self::Custom => "custom",
        }
    }

    /// Accepts the full id or its `figN` prefix.
    pub fn from_id(id: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.id() == id || k.id().split('_').next() == Some(id))
    }
}

/// Shared-channel family; block-diagonal takes its group count from `block_groups`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackFamily {
    GaussianFading,
    BernoulliChips,
    BlockDiagonal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_experiment")]
    pub experiment: ExperimentKind,
    /// Protocol for `custom` runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol: Option<ThroughputProtocol>,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_p")]
    pub p: usize,
    #[serde(default = "default_db")]
    pub rho_dl_db: f64,
    #[serde(default = "default_db")]
    pub rho_ul_db: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_values: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_half_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_values: Option<Vec<usize>>,
    /// Channel counts for the ECM sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_values: Option<Vec<usize>>,
    /// Bit budgets `p·k·r` for the budget sweep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budgets: Option<Vec<usize>>,
    #[serde(default = "default_recovery")]
    pub recovery: RecoveryMethod,
    #[serde(default = "default_feedback")]
    pub feedback: FeedbackFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_groups: Option<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_path: Option<String>,
}

fn default_experiment() -> ExperimentKind {
    ExperimentKind::Custom
}
fn default_n() -> usize {
    100
}
fn default_p() -> usize {
    4
}
fn default_db() -> f64 {
    10.0
}
fn default_recovery() -> RecoveryMethod {
    RecoveryMethod::MaxCorrelation
}
fn default_feedback() -> FeedbackFamily {
    FeedbackFamily::GaussianFading
}
fn default_trials() -> usize {
    500
}
fn default_seed() -> u64 {
    1
}

fn steps(lo: f64, step: f64, count: usize) -> Vec<f64> {
    // Rounded so that grid points print cleanly.
    (0..count)
        .map(|i| ((lo + step * i as f64) * 1e9).round() / 1e9)
        .collect()
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::preset(ExperimentKind::Custom)
    }
}

impl ExperimentConfig {
    /// Preset with every sweep axis filled in.
    pub fn preset(kind: ExperimentKind) -> Self {
        let mut cfg = Self {
            experiment: kind,
            protocol: None,
            n: default_n(),
            p: default_p(),
            rho_dl_db: default_db(),
            rho_ul_db: default_db(),
            s_values: None,
            c_half_values: None,
            k_values: None,
            r_values: None,
            budgets: None,
            recovery: default_recovery(),
            feedback: default_feedback(),
            block_groups: None,
            trials: default_trials(),
            master_seed: default_seed(),
            out_path: None,
        };
        cfg.fill_defaults();
        cfg
    }

    fn fill_defaults(&mut self) {
        use ExperimentKind::*;
        let (s, c, k): (Vec<usize>, Vec<f64>, Vec<usize>) = match self.experiment {
            Fig1EcmTrace => (vec![2, 6, 10], vec![], vec![]),
            Fig2AnalogSweep => ((2..=8).collect(), steps(0.2, 0.2, 6), vec![1]),
            Fig3Methods => (vec![6], steps(0.2, 0.2, 6), vec![1]),
            Fig5DigitalSweep => (vec![1], steps(0.5, 0.5, 6), vec![1, 2, 4, 8]),
            Fig6BitBudget => (vec![1], vec![], (1..=8).collect()),
            Custom => (vec![5], vec![0.8], vec![1]),
        };
        self.s_values.get_or_insert(s);
        if !c.is_empty() {
            self.c_half_values.get_or_insert(c);
        }
        if !k.is_empty() {
            self.k_values.get_or_insert(k);
        }
        match self.experiment {
            Fig1EcmTrace => {
                self.r_values.get_or_insert_with(|| (1..=10).map(|i| 10 * i).collect());
            }
            Fig6BitBudget => {
                self.budgets.get_or_insert_with(|| vec![80, 160, 320]);
            }
            Fig3Methods => {
                self.block_groups.get_or_insert(2);
            }
            Custom => {
                self.protocol.get_or_insert(ThroughputProtocol::AnalogShared);
            }
            _ => {}
        }
        if self.feedback == FeedbackFamily::BlockDiagonal {
            self.block_groups.get_or_insert(2);
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, why: String| Err(Error::InvalidConfig(format!("config key `{key}`: {why}")));
        if self.trials == 0 {
            return bad("trials", "must be at least 1".into());
        }
        if self.p == 0 {
            return bad("p", "must be at least 1".into());
        }
        if self.n < self.p {
            return bad("n", format!("must be at least p = {}", self.p));
        }
        if !self.rho_dl_db.is_finite() {
            return bad("rho_dl_db", "must be finite".into());
        }
        if !self.rho_ul_db.is_finite() {
            return bad("rho_ul_db", "must be finite".into());
        }
        let lists: [(&str, Option<usize>); 5] = [
            ("s_values", self.s_values.as_ref().map(Vec::len)),
            ("c_half_values", self.c_half_values.as_ref().map(Vec::len)),
            ("k_values", self.k_values.as_ref().map(Vec::len)),
            ("r_values", self.r_values.as_ref().map(Vec::len)),
            ("budgets", self.budgets.as_ref().map(Vec::len)),
        ];
        for (key, len) in lists {
            if len == Some(0) {
                return bad(key, "must not be empty".into());
            }
        }
        if self.s_values.iter().flatten().any(|&s| s == 0 || s >= self.n) {
            return bad("s_values", format!("entries must lie in 1..{}", self.n));
        }
        if self
            .c_half_values
            .iter()
            .flatten()
            .any(|c| !(c.is_finite() && *c > 0.0))
        {
            return bad("c_half_values", "entries must be positive and finite".into());
        }
        if self.k_values.iter().flatten().any(|&k| k == 0) {
            return bad("k_values", "entries must be at least 1".into());
        }
        if self.r_values.iter().flatten().any(|&r| r == 0) {
            return bad("r_values", "entries must be at least 1".into());
        }
        if self.budgets.iter().flatten().any(|&b| b == 0) {
            return bad("budgets", "entries must be at least 1".into());
        }
        if self.block_groups == Some(0) {
            return bad("block_groups", "must be at least 1".into());
        }
        if self.protocol.is_some() && self.experiment != ExperimentKind::Custom {
            return bad("protocol", "only applies to custom experiments".into());
        }
        Ok(())
    }

    pub fn rho_dl(&self) -> f64 {
        db_to_linear(self.rho_dl_db)
    }

    pub fn rho_ul(&self) -> f64 {
        db_to_linear(self.rho_ul_db)
    }

    pub fn s_values(&self) -> &[usize] {
        self.s_values.as_deref().unwrap_or(&[])
    }

    pub fn c_half_values(&self) -> &[f64] {
        self.c_half_values.as_deref().unwrap_or(&[])
    }

    pub fn k_values(&self) -> &[usize] {
        self.k_values.as_deref().unwrap_or(&[1])
    }

    pub fn r_values(&self) -> &[usize] {
        self.r_values.as_deref().unwrap_or(&[])
    }

    pub fn budgets(&self) -> &[usize] {
        self.budgets.as_deref().unwrap_or(&[])
    }

    pub fn feedback_kind(&self) -> FeedbackKind {
        match self.feedback {
            FeedbackFamily::GaussianFading => FeedbackKind::GaussianFading,
            FeedbackFamily::BernoulliChips => FeedbackKind::BernoulliChips,
            FeedbackFamily::BlockDiagonal => FeedbackKind::BlockDiagonal {
                groups: self.block_groups.unwrap_or(2),
            },
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config fields are all TOML-representable")
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Parses a TOML document, fills the preset axes for the chosen experiment
/// and validates. Errors name the offending key and fit on one line.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    parse_config_as(text, None)
}

/// As [`parse_config`], with the experiment forced to `kind` before the
/// preset axes are filled.
pub fn parse_config_as(text: &str, kind: Option<ExperimentKind>) -> Result<ExperimentConfig> {
    let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
        let key = e.span().and_then(|sp| key_at(text, sp.start));
        let msg = e.message().split_whitespace().collect::<Vec<_>>().join(" ");
        match key {
            Some(k) if !msg.contains(&format!("`{k}`")) => Error::InvalidConfig(format!("config key `{k}`: {msg}")),
            _ => Error::InvalidConfig(format!("config: {msg}")),
        }
    })?;
    if let Some(kind) = kind {
        cfg.experiment = kind;
    }
    cfg.fill_defaults();
    cfg.validate()?;
    Ok(cfg)
}

/// Key of the `key = value` line containing byte offset `pos`.
fn key_at(text: &str, pos: usize) -> Option<String> {
    let start = text[..pos.min(text.len())].rfind('\n').map_or(0, |i| i + 1);
    let line = text[start..].lines().next()?;
    let (key, _) = line.split_once('=')?;
    let key = key.trim().trim_matches('"');
    (!key.is_empty()).then(|| key.to_string())
}
