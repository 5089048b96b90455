use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bcv::BcvConfig;
use crate::error::{BcvError, Result};
use crate::graph::{Membership, SbmSpec};
use crate::rng::{task_rng, TAG_SETTING};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SettingId {
    #[serde(rename = "balanced-1")]
    Balanced1,
    #[serde(rename = "balanced-2")]
    Balanced2,
    #[serde(rename = "balanced-3")]
    Balanced3,
    #[serde(rename = "poly-1")]
    Poly1,
    #[serde(rename = "poly-2")]
    Poly2,
    Custom,
}

impl SettingId {
    pub const ALL: [SettingId; 6] = [
        SettingId::Balanced1,
        SettingId::Balanced2,
        SettingId::Balanced3,
        SettingId::Poly1,
        SettingId::Poly2,
        SettingId::Custom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SettingId::Balanced1 => "balanced-1",
            SettingId::Balanced2 => "balanced-2",
            SettingId::Balanced3 => "balanced-3",
            SettingId::Poly1 => "poly-1",
            SettingId::Poly2 => "poly-2",
            SettingId::Custom => "custom",
        }
    }
}

impl fmt::Display for SettingId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SettingId {
    type Err = BcvError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| BcvError::UnknownSetting(s.to_string()))
    }
}

/// Community proportions: equal, or the skewed vectors of each setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Balance {
    #[default]
    Balanced,
    Unbalanced,
}

/// How node counts follow the grid value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Growth {
    /// `n_l = K_l * n0`.
    #[default]
    Balanced,
    /// `n1` is the grid value and `n2 = round(n1^1.5)`.
    Polynomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bcv,
    Projection,
    Bimodularity,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Bcv => "bcv",
            Method::Projection => "projection",
            Method::Bimodularity => "bimodularity",
        }
    }
}

impl FromStr for Method {
    type Err = BcvError;

    fn from_str(s: &str) -> Result<Self> {
        [Method::Bcv, Method::Projection, Method::Bimodularity]
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| BcvError::Config(format!("unknown method `{s}`")))
    }
}

/// Explicit model for the `custom` setting. `b0` is scaled by `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSetting {
    pub b0: Vec<Vec<f64>>,
    pub pi1: Vec<f64>,
    pub pi2: Vec<f64>,
    #[serde(default)]
    pub growth: Growth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub setting: SettingId,
    /// Sparsity scale: `B = r * B0`.
    pub r: f64,
    /// Grid of `n0` values (or of `n1` under polynomial growth).
    pub n0: Vec<usize>,
    pub balance: Balance,
    pub reps: usize,
    pub methods: Vec<Method>,
    pub seed: u64,
    /// Module counts tried by the bimodularity baseline.
    pub max_modules: usize,
    pub output: Option<PathBuf>,
    pub bcv: BcvConfig,
    pub custom: Option<CustomSetting>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            setting: SettingId::Balanced1,
            r: 0.05,
            n0: vec![300],
            balance: Balance::Balanced,
            reps: 20,
            methods: vec![Method::Bcv],
            seed: 0,
            max_modules: 25,
            output: None,
            bcv: BcvConfig::default(),
            custom: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| BcvError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n0.is_empty() || self.n0.contains(&0) {
            return Err(BcvError::Config("n0 grid must be nonempty and positive".into()));
        }
        if self.reps == 0 {
            return Err(BcvError::Config("reps must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(BcvError::Config("no methods requested".into()));
        }
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(BcvError::Config("r must be positive".into()));
        }
        if self.max_modules == 0 {
            return Err(BcvError::Config("max_modules must be positive".into()));
        }
        if self.setting == SettingId::Custom && self.custom.is_none() {
            return Err(BcvError::Config("setting `custom` needs a [custom] block".into()));
        }
        self.bcv.validate()?;
        build_setting(self).map(|_| ())
    }
}

/// Draws the block matrix of each replication for one setting.
#[derive(Debug, Clone, PartialEq)]
pub struct SettingGenerator {
    setting: SettingId,
    r: f64,
    growth: Growth,
    /// `None` when the base matrix is redrawn per replication.
    fixed_b0: Option<DMatrix<f64>>,
    shape: (usize, usize),
    pi1: Vec<f64>,
    pi2: Vec<f64>,
}

fn fractions(v: &[f64], denom: f64) -> Vec<f64> {
    v.iter().map(|x| x / denom).collect()
}

fn equal(k: usize) -> Vec<f64> {
    vec![1.0 / k as f64; k]
}

fn setting3_b0() -> DMatrix<f64> {
    let mut b = DMatrix::from_element(10, 14, 0.25);
    for k in 0..10 {
        b[(k, k)] = 1.0;
    }
    for i in 0..3 {
        b[(i, 11)] = 0.75;
    }
    for i in 3..6 {
        b[(i, 12)] = 0.75;
    }
    for i in 6..10 {
        b[(i, 13)] = 0.75;
    }
    b
}

fn poly2_b0() -> DMatrix<f64> {
    DMatrix::from_row_slice(
        3,
        6,
        &[
            1.0, 0.25, 0.25, 0.75, 0.75, 0.25, //
            0.25, 1.0, 0.25, 0.75, 0.25, 0.75, //
            0.25, 0.25, 1.0, 0.25, 0.75, 0.75,
        ],
    )
}

/// Resolves a configuration into its model generator.
pub fn build_setting(config: &ExperimentConfig) -> Result<SettingGenerator> {
    let unbalanced = config.balance == Balance::Unbalanced;
    let (growth, fixed_b0, shape, pi1, pi2) = match config.setting {
        SettingId::Balanced1 | SettingId::Poly1 => {
            let pi = if unbalanced {
                fractions(&[1.0, 2.0, 3.0], 6.0)
            } else {
                equal(3)
            };
            let growth = if config.setting == SettingId::Poly1 {
                Growth::Polynomial
            } else {
                Growth::Balanced
            };
            (growth, None, (3, 3), pi.clone(), pi)
        }
        SettingId::Balanced2 => {
            let (pi1, pi2) = if unbalanced {
                (fractions(&[3.0, 2.0, 1.0], 6.0), fractions(&[3.0, 2.0, 2.0, 1.0], 8.0))
            } else {
                (equal(3), equal(4))
            };
            (Growth::Balanced, None, (3, 4), pi1, pi2)
        }
        SettingId::Balanced3 => {
            let (pi1, pi2) = if unbalanced {
                (
                    fractions(&[2.0, 2.0, 2.0, 2.0, 3.0, 3.0, 4.0, 4.0, 4.0, 4.0], 30.0),
                    fractions(
                        &[2.0, 2.0, 2.0, 2.0, 2.0, 3.0, 3.0, 3.0, 3.0, 4.0, 4.0, 4.0, 4.0, 4.0],
                        42.0,
                    ),
                )
            } else {
                (equal(10), equal(14))
            };
            (Growth::Balanced, Some(setting3_b0()), (10, 14), pi1, pi2)
        }
        SettingId::Poly2 => {
            let (pi1, pi2) = if unbalanced {
                (
                    fractions(&[3.0, 2.0, 1.0], 6.0),
                    fractions(&[3.0, 3.0, 2.0, 2.0, 1.0, 1.0], 12.0),
                )
            } else {
                (equal(3), equal(6))
            };
            (Growth::Polynomial, Some(poly2_b0()), (3, 6), pi1, pi2)
        }
        SettingId::Custom => {
            let c = config
                .custom
                .as_ref()
                .ok_or_else(|| BcvError::Config("setting `custom` needs a [custom] block".into()))?;
            let k1 = c.b0.len();
            let k2 = c.b0.first().map_or(0, Vec::len);
            if k1 == 0 || k2 == 0 || c.b0.iter().any(|row| row.len() != k2) {
                return Err(BcvError::Config(
                    "custom b0 must be a nonempty rectangular matrix".into(),
                ));
            }
            let b0 = DMatrix::from_fn(k1, k2, |i, j| c.b0[i][j]);
            (c.growth, Some(b0), (k1, k2), c.pi1.clone(), c.pi2.clone())
        }
    };
    let generator = SettingGenerator {
        setting: config.setting,
        r: config.r,
        growth,
        fixed_b0,
        shape,
        pi1,
        pi2,
    };
    // Validate the scaled model once up front.
    generator.spec(0)?;
    Ok(generator)
}

impl SettingGenerator {
    pub fn setting(&self) -> SettingId {
        self.setting
    }

    pub fn truth(&self) -> (usize, usize) {
        self.shape
    }

    pub fn growth(&self) -> Growth {
        self.growth
    }

    pub fn node_counts(&self, n0: usize) -> (usize, usize) {
        match self.growth {
            Growth::Balanced => (self.shape.0 * n0, self.shape.1 * n0),
            Growth::Polynomial => (n0, (n0 as f64).powf(1.5).round() as usize),
        }
    }

    /// Base matrix for one replication: fixed, or diagonal `U(0.7, 1)` and
    /// off-diagonal `U(0.1, 0.3)` drawn from `seed`.
    pub fn base_matrix(&self, seed: u64) -> DMatrix<f64> {
        if let Some(b0) = &self.fixed_b0 {
            return b0.clone();
        }
        let mut rng = task_rng(seed, &[TAG_SETTING]);
        let (k1, k2) = self.shape;
        let mut b = DMatrix::zeros(k1, k2);
        for i in 0..k1 {
            for j in 0..k2 {
                b[(i, j)] = if i == j {
                    rng.random_range(0.7..1.0)
                } else {
                    rng.random_range(0.1..0.3)
                };
            }
        }
        b
    }

    pub fn spec(&self, seed: u64) -> Result<SbmSpec> {
        SbmSpec::scaled(
            &self.base_matrix(seed),
            self.r,
            Membership::Multinomial {
                pi1: self.pi1.clone(),
                pi2: self.pi2.clone(),
            },
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(setting: SettingId, balance: Balance) -> ExperimentConfig {
        ExperimentConfig {
            setting,
            balance,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn setting3_pattern() {
        let g = build_setting(&cfg(SettingId::Balanced3, Balance::Balanced)).unwrap();
        assert_eq!(g.truth(), (10, 14));
        let b = g.base_matrix(5);
        assert_eq!(b, g.base_matrix(6));
        for k in 0..10 {
            assert_eq!(b[(k, k)], 1.0);
        }
        let col = |j: usize| (0..10).map(|i| b[(i, j)]).collect::<Vec<_>>();
        assert_eq!(col(11), [0.75, 0.75, 0.75, 0.25, 0.25, 0.25, 0.25, 0.25, 0.25, 0.25]);
        assert_eq!(col(12), [0.25, 0.25, 0.25, 0.75, 0.75, 0.75, 0.25, 0.25, 0.25, 0.25]);
        assert_eq!(col(13), [0.25, 0.25, 0.25, 0.25, 0.25, 0.25, 0.75, 0.75, 0.75, 0.75]);
        assert_eq!(col(10), [0.25; 10]);
        assert_eq!(b.iter().filter(|&&x| x == 0.75).count(), 10);
    }

    #[test]
    fn poly2_matrix_and_counts() {
        let g = build_setting(&cfg(SettingId::Poly2, Balance::Unbalanced)).unwrap();
        assert_eq!(g.truth(), (3, 6));
        assert_eq!(g.base_matrix(0), poly2_b0());
        assert_eq!(g.node_counts(100), (100, 1000));
        assert_eq!(g.node_counts(50), (50, 354));
    }

    #[test]
    fn random_base_matrix_ranges() {
        let g = build_setting(&cfg(SettingId::Balanced2, Balance::Balanced)).unwrap();
        assert_eq!(g.node_counts(300), (900, 1200));
        let b = g.base_matrix(3);
        assert_ne!(b, g.base_matrix(4));
        for i in 0..3 {
            for j in 0..4 {
                let x = b[(i, j)];
                if i == j {
                    assert!((0.7..1.0).contains(&x));
                } else {
                    assert!((0.1..0.3).contains(&x));
                }
            }
        }
    }

    #[test]
    fn unbalanced_proportions_sum_to_one() {
        for id in [
            SettingId::Balanced1,
            SettingId::Balanced2,
            SettingId::Balanced3,
            SettingId::Poly2,
        ] {
            let g = build_setting(&cfg(id, Balance::Unbalanced)).unwrap();
            assert!((g.pi1.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!((g.pi2.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let g = build_setting(&cfg(SettingId::Balanced3, Balance::Unbalanced)).unwrap();
        assert!((g.pi1[0] - 1.0 / 15.0).abs() < 1e-15);
        assert!((g.pi2[13] - 2.0 / 21.0).abs() < 1e-15);
    }

    #[test]
    fn custom_passes_through() {
        let mut c = cfg(SettingId::Custom, Balance::Balanced);
        c.r = 0.5;
        c.custom = Some(CustomSetting {
            b0: vec![vec![0.8, 0.2], vec![0.2, 0.8]],
            pi1: vec![0.5, 0.5],
            pi2: vec![0.25, 0.75],
            growth: Growth::Balanced,
        });
        let g = build_setting(&c).unwrap();
        assert_eq!(g.truth(), (2, 2));
        let spec = g.spec(0).unwrap();
        assert!((spec.block_matrix()[(0, 0)] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn parse_ids_and_toml() {
        assert_eq!("poly-2".parse::<SettingId>().unwrap(), SettingId::Poly2);
        assert!("setting-9".parse::<SettingId>().is_err());
        let cfg = ExperimentConfig::from_toml(
            "setting = \"balanced-2\"\nr = 0.1\nn0 = [100, 200]\nreps = 3\nmethods = [\"bcv\", \"bimodularity\"]\n[bcv]\nfolds = 5\n",
        )
        .unwrap();
        assert_eq!(cfg.setting, SettingId::Balanced2);
        assert_eq!(cfg.n0, vec![100, 200]);
        assert_eq!(cfg.bcv.folds, 5);
        assert!(ExperimentConfig::from_toml("reps = 0").is_err());
        assert!(ExperimentConfig::from_toml("setting = \"custom\"").is_err());
    }
}
