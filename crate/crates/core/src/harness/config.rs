//! Declarative experiment configuration, deserializable from JSON.

use serde::{Deserialize, Serialize};

use crate::blocks::{
    AllValuesIndicator, ClusterFunctional, ClusterLength, ClusterMax, OrderStatIndicator,
    SurvivalIndicator, TailArraySum,
};
use crate::error::{Error, Result};
use crate::processes::{Family, TailScale};

/// Declarative description of a cluster functional.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionalSpec {
    ExceedanceIndicator { thresholds: Vec<f64> },
    ExcessOver { deductible: f64 },
    Upcrossing { x: f64, y: f64 },
    Survival { thresholds: Vec<f64> },
    OrderStat { thresholds: Vec<f64> },
    AllValues { core_length: usize, thresholds: Vec<f64> },
    ClusterMax,
    ClusterLength,
    HillLog,
    HillCount,
}

impl FunctionalSpec {
    pub fn build(&self) -> Result<Box<dyn ClusterFunctional>> {
        Ok(match self {
            FunctionalSpec::ExceedanceIndicator { thresholds } => {
                Box::new(TailArraySum::exceedance_indicator(thresholds)?)
            }
            FunctionalSpec::ExcessOver { deductible } => {
                Box::new(TailArraySum::excess_over(*deductible)?)
            }
            FunctionalSpec::Upcrossing { x, y } => Box::new(TailArraySum::upcrossing(*x, *y)?),
            FunctionalSpec::Survival { thresholds } => {
                Box::new(SurvivalIndicator::new(thresholds)?)
            }
            FunctionalSpec::OrderStat { thresholds } => {
                Box::new(OrderStatIndicator::new(thresholds)?)
            }
            FunctionalSpec::AllValues {
                core_length,
                thresholds,
            } => Box::new(AllValuesIndicator::new(*core_length, thresholds)?),
            FunctionalSpec::ClusterMax => Box::new(ClusterMax),
            FunctionalSpec::ClusterLength => Box::new(ClusterLength),
            FunctionalSpec::HillLog => Box::new(TailArraySum::hill_log()),
            FunctionalSpec::HillCount => Box::new(TailArraySum::hill_count()),
        })
    }

    /// Point dimension the functional expects.
    pub fn dim(&self) -> usize {
        match self {
            FunctionalSpec::ExceedanceIndicator { thresholds } => thresholds.len(),
            FunctionalSpec::Upcrossing { .. } => 2,
            _ => 1,
        }
    }
}

/// How rows of standardized excesses are produced from raw series.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum StandardizeMode {
    Shifted,
    Window,
    Ratio,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ConventionSpec {
    UniformMargin,
    HeavyTail,
}

impl From<ConventionSpec> for crate::standardize::ScaleConvention {
    fn from(c: ConventionSpec) -> Self {
        match c {
            ConventionSpec::UniformMargin => crate::standardize::ScaleConvention::UniformMargin,
            ConventionSpec::HeavyTail => crate::standardize::ScaleConvention::HeavyTail,
        }
    }
}

/// Threshold selection: either an explicit `(threshold, scale)` pair or
/// an empirical quantile targeting exceedance probability `target_v`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StandardizeSpec {
    pub mode: StandardizeMode,
    /// Window width for `mode = "window"`.
    #[serde(default)]
    pub window: Option<usize>,
    #[serde(default)]
    pub threshold: Option<f64>,
    #[serde(default)]
    pub scale: Option<f64>,
    #[serde(default)]
    pub target_v: Option<f64>,
    #[serde(default)]
    pub convention: Option<ConventionSpec>,
    /// Known marginal exceedance probability; when set it is used for
    /// the `sqrt(n v)` normalization instead of the empirical `v_hat`.
    #[serde(default)]
    pub assume_v: Option<f64>,
}

impl StandardizeSpec {
    pub fn validate(&self) -> Result<()> {
        match (self.threshold, self.target_v) {
            (Some(_), Some(_)) => {
                return Err(Error::config("give either threshold or target_v, not both"))
            }
            (None, None) => {
                return Err(Error::config("standardization needs a threshold or target_v"))
            }
            _ => {}
        }
        if self.threshold.is_some()
            && self.mode != StandardizeMode::Ratio
            && self.scale.is_none()
        {
            return Err(Error::config("explicit threshold needs an explicit scale"));
        }
        if self.target_v.is_some() && self.convention.is_none() {
            return Err(Error::config("target_v needs a scale convention"));
        }
        if self.mode == StandardizeMode::Window && self.window.unwrap_or(0) < 1 {
            return Err(Error::config("window mode needs window >= 1"));
        }
        if let Some(v) = self.assume_v {
            if !(0.0 < v && v < 1.0) {
                return Err(Error::config(format!("assume_v must be in (0, 1), got {v}")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self.mode {
            StandardizeMode::Window => self.window.unwrap_or(1),
            _ => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BlockingSpec {
    pub block_length: usize,
    pub small_block_length: usize,
}

/// Centering used for the block process.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CenteringSpec {
    /// Analytic expected block values, one per functional.
    Known { values: Vec<f64> },
    /// Grand mean of the block values across all replications.
    Plugin,
}

/// Tail-chain oracle settings: which scale the chain lives on and the
/// Monte Carlo budget for limit covariances.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleSpec {
    pub scale: TailScale,
    #[serde(default = "default_oracle_draws")]
    pub draws: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_oracle_draws() -> usize {
    200_000
}

/// Pass/fail tolerances for oracle comparisons.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Tolerances {
    #[serde(default = "default_mean_tol")]
    pub mean: f64,
    #[serde(default = "default_cov_tol")]
    pub covariance: f64,
    #[serde(default = "default_theta_tol")]
    pub theta: f64,
    /// Maximum total-variation distance between the empirical and limit
    /// cluster-size laws.
    #[serde(default = "default_tv_tol")]
    pub cluster_size_tv: f64,
    /// Significance level of the normality test (a replication batch
    /// fails if the test rejects at this level).
    #[serde(default = "default_normality_level")]
    pub normality_level: f64,
}

fn default_mean_tol() -> f64 {
    0.1
}
fn default_cov_tol() -> f64 {
    0.1
}
fn default_theta_tol() -> f64 {
    0.05
}
fn default_tv_tol() -> f64 {
    0.05
}
fn default_normality_level() -> f64 {
    0.01
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            mean: default_mean_tol(),
            covariance: default_cov_tol(),
            theta: default_theta_tol(),
            cluster_size_tv: default_tv_tol(),
            normality_level: default_normality_level(),
        }
    }
}

/// A complete replication experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub generator: Family,
    pub n: usize,
    pub seed: u64,
    pub replications: usize,
    pub standardize: StandardizeSpec,
    pub blocking: BlockingSpec,
    pub functionals: Vec<FunctionalSpec>,
    pub centering: CenteringSpec,
    #[serde(default)]
    pub oracle: Option<OracleSpec>,
    /// Also estimate the cluster-size distribution up to this size and,
    /// when an oracle is configured, compare it in total variation.
    #[serde(default)]
    pub cluster_size_max_k: Option<usize>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Worker threads; `None` uses the default pool.
    #[serde(default)]
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.generator.validate()?;
        self.standardize.validate()?;
        if self.n == 0 {
            return Err(Error::config("n must be >= 1"));
        }
        if self.replications == 0 {
            return Err(Error::config("replications must be >= 1"));
        }
        if self.functionals.is_empty() {
            return Err(Error::config("at least one functional is required"));
        }
        let dim = self.standardize.dim();
        for f in &self.functionals {
            f.build()?;
            if f.dim() != dim {
                return Err(Error::config(format!(
                    "functional expects dimension {} but standardization produces {}",
                    f.dim(),
                    dim
                )));
            }
        }
        if let CenteringSpec::Known { values } = &self.centering {
            if values.len() != self.functionals.len() {
                return Err(Error::config(format!(
                    "{} centering values for {} functionals",
                    values.len(),
                    self.functionals.len()
                )));
            }
        }
        // blocking is validated against the realized row length at run
        // time (window mode shortens the row), but catch the obvious
        if self.blocking.block_length > self.n {
            return Err(Error::config("block length exceeds series length"));
        }
        if let Some(o) = &self.oracle {
            if o.draws == 0 {
                return Err(Error::config("oracle draws must be >= 1"));
            }
            crate::processes::TailChainModel::new(self.generator.clone(), o.scale)?;
        }
        if self.cluster_size_max_k == Some(0) {
            return Err(Error::config("cluster_size_max_k must be >= 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config() -> ExperimentConfig {
        ExperimentConfig {
            generator: Family::IidUniform,
            n: 1_000,
            seed: 1,
            replications: 4,
            standardize: StandardizeSpec {
                mode: StandardizeMode::Shifted,
                window: None,
                threshold: None,
                scale: None,
                target_v: Some(0.05),
                convention: Some(ConventionSpec::UniformMargin),
                assume_v: Some(0.05),
            },
            blocking: BlockingSpec {
                block_length: 50,
                small_block_length: 5,
            },
            functionals: vec![FunctionalSpec::ExceedanceIndicator { thresholds: vec![0.0] }],
            centering: CenteringSpec::Plugin,
            oracle: None,
            cluster_size_max_k: None,
            tolerances: Tolerances::default(),
            threads: None,
        }
    }

    #[test]
    fn json_roundtrip() {
        let cfg = base_config();
        let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back.n, cfg.n);
        assert_eq!(back.functionals.len(), 1);
    }

    #[test]
    fn rejects_inconsistent_configs() {
        let mut cfg = base_config();
        cfg.standardize.threshold = Some(0.9);
        assert!(cfg.validate().is_err()); // threshold and target_v

        let mut cfg = base_config();
        cfg.functionals = vec![FunctionalSpec::Upcrossing { x: 0.2, y: 0.8 }];
        assert!(cfg.validate().is_err()); // dim 2 vs univariate rows

        let mut cfg = base_config();
        cfg.centering = CenteringSpec::Known { values: vec![0.1, 0.2] };
        assert!(cfg.validate().is_err()); // wrong number of centerings

        let mut cfg = base_config();
        cfg.oracle = Some(OracleSpec {
            scale: TailScale::Ratio,
            draws: 1000,
            seed: 0,
        });
        // uniform family has no ratio-scale tail chain
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_parses_from_literal_json() {
        let text = r#"{
            "generator": {"family": "armax_frechet", "alpha": 0.5},
            "n": 10000, "seed": 7, "replications": 8,
            "standardize": {"mode": "shifted", "target_v": 0.02,
                            "convention": "uniform_margin"},
            "blocking": {"block_length": 100, "small_block_length": 10},
            "functionals": [{"kind": "exceedance_indicator", "thresholds": [0.5]},
                            {"kind": "cluster_length"}],
            "centering": {"mode": "plugin"},
            "oracle": {"scale": "uniform_excess", "draws": 1000, "seed": 3},
            "cluster_size_max_k": 8
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(cfg.functionals.len(), 2);
        assert!(cfg.oracle.is_some());
    }
}
