use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::SplitMode;
use crate::error::{BcvError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitKind {
    Kfold,
    Bernoulli,
}

/// Which expression turns the empirical density into the penalty factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PenaltyForm {
    /// `C * rho^{3/2} / sqrt(min(n1, n2))`
    #[default]
    Geometric,
    /// `C * rho^2 / sqrt(log max(n1, n2))`
    RhoSquaredLog,
}

/// Model complexity `d(K1', K2')` multiplying the penalty factor.
#[derive(Debug, Clone, Default)]
pub enum DRule {
    /// `K1' * K2'`, the number of free block probabilities.
    #[default]
    Product,
    /// Values read from a `K1,K2,d` CSV; pairs missing from the table use the product.
    Table {
        path: PathBuf,
        values: Arc<HashMap<(usize, usize), f64>>,
    },
}

impl DRule {
    pub fn complexity(&self, k1: usize, k2: usize) -> f64 {
        match self {
            DRule::Product => (k1 * k2) as f64,
            DRule::Table { values, .. } => values.get(&(k1, k2)).copied().unwrap_or((k1 * k2) as f64),
        }
    }

    pub fn from_table(path: impl AsRef<Path>) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            #[serde(rename = "K1")]
            k1: usize,
            #[serde(rename = "K2")]
            k2: usize,
            d: f64,
        }
        let path = path.as_ref();
        let mut rdr = csv::Reader::from_path(path)?;
        let mut values = HashMap::new();
        for row in rdr.deserialize() {
            let row: Row = row?;
            if !(row.d.is_finite() && row.d >= 0.0) {
                return Err(BcvError::Config(format!(
                    "complexity {} for ({}, {}) must be >= 0",
                    row.d, row.k1, row.k2
                )));
            }
            values.insert((row.k1, row.k2), row.d);
        }
        Ok(DRule::Table {
            path: path.to_path_buf(),
            values: Arc::new(values),
        })
    }
}

impl PartialEq for DRule {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (DRule::Product, DRule::Product) => true,
            (DRule::Table { values: a, .. }, DRule::Table { values: b, .. }) => a == b,
            _ => false,
        }
    }
}

impl Serialize for DRule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            DRule::Product => s.serialize_str("product"),
            DRule::Table { path, .. } => s.serialize_str(&path.to_string_lossy()),
        }
    }
}

impl<'de> Deserialize<'de> for DRule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        if raw == "product" {
            Ok(DRule::Product)
        } else {
            DRule::from_table(&raw).map_err(serde::de::Error::custom)
        }
    }
}

/// Tuning of the cross-validated selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BcvConfig {
    pub mode: SplitKind,
    /// Number of folds under `kfold`.
    pub folds: usize,
    /// Training proportion under `bernoulli`.
    pub w: f64,
    /// Independent splits under `bernoulli`.
    pub replications: usize,
    /// Penalty constant.
    #[serde(rename = "C")]
    pub c: f64,
    pub penalty_form: PenaltyForm,
    /// Frontier steps without improvement before stopping; `None` (written
    /// `"inf"`) never stops early.
    #[serde(with = "patience_serde")]
    pub patience: Option<usize>,
    /// k-means restarts per clustering.
    pub restarts: usize,
    pub seed: u64,
    /// Largest frontier step; defaults to `min(n1, n2)`.
    pub max_frontier: Option<usize>,
    pub d_rule: DRule,
}

impl Default for BcvConfig {
    fn default() -> Self {
        Self {
            mode: SplitKind::Kfold,
            folds: 10,
            w: 0.9,
            replications: 10,
            c: 0.01,
            penalty_form: PenaltyForm::Geometric,
            patience: Some(3),
            restarts: 10,
            seed: 0,
            max_frontier: None,
            d_rule: DRule::Product,
        }
    }
}

impl BcvConfig {
    pub fn split_mode(&self) -> SplitMode {
        match self.mode {
            SplitKind::Kfold => SplitMode::KFold { folds: self.folds },
            SplitKind::Bernoulli => SplitMode::Bernoulli {
                w: self.w,
                replications: self.replications,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.split_mode().validate()?;
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(BcvError::InvalidParameter(format!(
                "penalty constant C = {} must be positive",
                self.c
            )));
        }
        if self.patience == Some(0) {
            return Err(BcvError::InvalidParameter("patience must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(BcvError::InvalidParameter("restarts must be at least 1".into()));
        }
        if self.max_frontier == Some(0) {
            return Err(BcvError::InvalidParameter("max_frontier must be at least 1".into()));
        }
        Ok(())
    }
}

mod patience_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Steps(usize),
        Word(String),
    }

    pub fn serialize<S: Serializer>(v: &Option<usize>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(n) => s.serialize_u64(*n as u64),
            None => s.serialize_str("inf"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<usize>, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Steps(n) => Ok(Some(n)),
            Raw::Word(w) if w == "inf" => Ok(None),
            Raw::Word(w) => Err(serde::de::Error::custom(format!(
                "patience must be an integer or \"inf\", got `{w}`"
            ))),
        }
    }
}
