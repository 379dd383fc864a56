//! Replication harness: run a configured experiment many times with
//! independent RNG streams, aggregate the normalized block processes,
//! and compare everything against tail-chain oracles.

pub mod config;
pub mod report;

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;

use crate::blocks::{Blocking, ClusterFunctional};
use crate::empirical::{cluster_size_histogram, diagnostics, theta_hat, DiagnosticsReport, ThetaHat};
use crate::error::{Error, Result};
use crate::processes::{simulate_with, TailChainModel};
use crate::standardize::{
    ratio_excesses, threshold_from_quantile, univariate_excesses, window_excesses, ExcessArray,
    RawSeries,
};
use crate::stats::{anderson_darling_normal, mean, total_variation};

pub use config::{
    BlockingSpec, CenteringSpec, ConventionSpec, ExperimentConfig, FunctionalSpec, OracleSpec,
    StandardizeMode, StandardizeSpec, Tolerances,
};
pub use report::{ExperimentReport, ReportRow};

/// Standardize one raw series according to the configuration.
pub fn standardize_series(spec: &StandardizeSpec, series: &RawSeries) -> Result<ExcessArray> {
    let (threshold, scale) = match (spec.threshold, spec.target_v) {
        (Some(u), _) => (u, spec.scale.unwrap_or(1.0)),
        (None, Some(v)) => {
            let conv = spec
                .convention
                .ok_or_else(|| Error::config("target_v needs a scale convention"))?;
            threshold_from_quantile(series, v, conv.into())?
        }
        (None, None) => return Err(Error::config("no threshold rule configured")),
    };
    match spec.mode {
        StandardizeMode::Shifted => univariate_excesses(series, threshold, scale),
        StandardizeMode::Window => {
            window_excesses(series, threshold, scale, spec.window.unwrap_or(1))
        }
        StandardizeMode::Ratio => ratio_excesses(series, threshold),
    }
}

struct RepOutcome {
    /// Per functional, the raw block values of this replication.
    block_values: Vec<Vec<f64>>,
    v: f64,
    row_len: usize,
    theta: Option<ThetaHat>,
    sizes: Option<Vec<f64>>,
}

fn run_one(
    cfg: &ExperimentConfig,
    functionals: &[Box<dyn ClusterFunctional>],
    index: u64,
) -> Result<RepOutcome> {
    let mut rng = crate::processes::replication_rng(cfg.seed, index);
    let series = simulate_with(&cfg.generator, cfg.n, &mut rng)?;
    let row = standardize_series(&cfg.standardize, &series)?;
    let blocking = Blocking::new(
        row.len(),
        cfg.blocking.block_length,
        cfg.blocking.small_block_length,
    )?;
    let (blocks, _rem) = row.segment(&blocking)?;
    let block_values = functionals
        .iter()
        .map(|f| blocks.iter().map(|b| f.evaluate(b)).collect())
        .collect();
    let v = cfg.standardize.assume_v.unwrap_or_else(|| row.exceed_prob());
    let sizes = match cfg.cluster_size_max_k {
        Some(k) => Some(cluster_size_histogram(&row, &blocking, k)?),
        None => None,
    };
    Ok(RepOutcome {
        block_values,
        v,
        row_len: row.len(),
        theta: theta_hat(&row, &blocking).ok(),
        sizes,
    })
}

/// Diagnostics for one replication of a configured experiment
/// (replication `index` of the same streams `run_experiment` uses).
pub fn run_diagnostics(cfg: &ExperimentConfig, index: u64) -> Result<DiagnosticsReport> {
    let functionals: Vec<Box<dyn ClusterFunctional>> = cfg
        .functionals
        .iter()
        .map(|f| f.build())
        .collect::<Result<_>>()?;
    let mut rng = crate::processes::replication_rng(cfg.seed, index);
    let series = simulate_with(&cfg.generator, cfg.n, &mut rng)?;
    let row = standardize_series(&cfg.standardize, &series)?;
    let blocking = Blocking::new(
        row.len(),
        cfg.blocking.block_length,
        cfg.blocking.small_block_length,
    )?;
    let refs: Vec<&dyn ClusterFunctional> = functionals.iter().map(|b| b.as_ref()).collect();
    let intervals: [(f64, f64); 2] = match cfg.standardize.mode {
        StandardizeMode::Ratio => [(1.0, 2.0), (2.0, 4.0)],
        _ => [(0.0, 0.5), (0.5, 1.0)],
    };
    diagnostics(&row, &blocking, &refs, 0.25, &intervals)
}

/// Run the full experiment. Deterministic in the configuration: the
/// same config always produces byte-identical reports, independent of
/// the number of worker threads.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::config(format!("thread pool: {e}")))?
            .install(|| run_experiment_inner(cfg)),
        None => run_experiment_inner(cfg),
    }
}

fn run_experiment_inner(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let functionals: Vec<Box<dyn ClusterFunctional>> = cfg
        .functionals
        .iter()
        .map(|f| f.build())
        .collect::<Result<_>>()?;
    let names: Vec<String> = functionals.iter().map(|f| f.name().to_string()).collect();
    let nf = names.len();
    let reps = cfg.replications;

    // replication i always uses RNG stream i: results do not depend on
    // scheduling, and collect() preserves index order
    let outcomes: Vec<RepOutcome> = (0..reps as u64)
        .into_par_iter()
        .map(|i| run_one(cfg, &functionals, i))
        .collect::<Result<Vec<_>>>()?;

    // centering: analytic expected block values, or the grand mean of
    // the observed block values pooled over every replication
    let centering: Vec<f64> = match &cfg.centering {
        CenteringSpec::Known { values } => values.clone(),
        CenteringSpec::Plugin => (0..nf)
            .map(|f| {
                let (sum, count) = outcomes
                    .iter()
                    .map(|o| {
                        (
                            o.block_values[f].iter().sum::<f64>(),
                            o.block_values[f].len(),
                        )
                    })
                    .fold((0.0, 0usize), |(s, c), (bs, bc)| (s + bs, c + bc));
                sum / count as f64
            })
            .collect(),
    };

    // normalized process value per functional and replication
    let zn: Vec<Vec<f64>> = (0..nf)
        .map(|f| {
            outcomes
                .iter()
                .map(|o| {
                    let scale = (o.row_len as f64 * o.v).sqrt();
                    o.block_values[f]
                        .iter()
                        .map(|&y| y - centering[f])
                        .sum::<f64>()
                        / scale
                })
                .collect()
        })
        .collect();

    let means: Vec<f64> = zn.iter().map(|z| mean(z)).collect();
    let covariance: Vec<Vec<f64>> = (0..nf)
        .map(|f| {
            (0..nf)
                .map(|g| {
                    if reps < 2 {
                        return 0.0;
                    }
                    zn[f]
                        .iter()
                        .zip(&zn[g])
                        .map(|(&a, &b)| (a - means[f]) * (b - means[g]))
                        .sum::<f64>()
                        / (reps - 1) as f64
                })
                .collect()
        })
        .collect();

    let oracle_model = match &cfg.oracle {
        Some(o) => Some((
            TailChainModel::new(cfg.generator.clone(), o.scale)?,
            o.draws,
            o.seed,
        )),
        None => None,
    };
    let tol = &cfg.tolerances;
    let mut rows = Vec::new();

    for f in 0..nf {
        match &oracle_model {
            Some(_) => rows.push(ReportRow::checked(
                "process",
                format!("mean({})", names[f]),
                means[f],
                0.0,
                tol.mean,
            )),
            None => rows.push(ReportRow::info(
                "process",
                format!("mean({})", names[f]),
                means[f],
            )),
        }
        match &oracle_model {
            Some((model, draws, oseed)) => {
                let (c, _se) =
                    model.limit_covariance(functionals[f].as_ref(), functionals[f].as_ref(), *draws, *oseed);
                rows.push(ReportRow::checked(
                    "process",
                    format!("var({})", names[f]),
                    covariance[f][f],
                    c,
                    tol.covariance,
                ));
            }
            None => rows.push(ReportRow::info(
                "process",
                format!("var({})", names[f]),
                covariance[f][f],
            )),
        }
        if reps >= 20 {
            match anderson_darling_normal(&zn[f]) {
                Ok(ad) => {
                    rows.push(ReportRow {
                        section: "normality".into(),
                        name: format!("ad_p({})", names[f]),
                        value: ad.p_value,
                        oracle: Some(tol.normality_level),
                        tolerance: None,
                        pass: Some(!ad.rejects_at(tol.normality_level)),
                    });
                    rows.push(ReportRow::info(
                        "normality",
                        format!("skewness({})", names[f]),
                        ad.skewness,
                    ));
                    rows.push(ReportRow::info(
                        "normality",
                        format!("excess_kurtosis({})", names[f]),
                        ad.excess_kurtosis,
                    ));
                }
                Err(e) => {
                    return Err(Error::undefined(format!(
                        "normality test for {}: {e}",
                        names[f]
                    )))
                }
            }
        }
    }

    for f in 0..nf {
        for g in f + 1..nf {
            match &oracle_model {
                Some((model, draws, oseed)) => {
                    let (c, _se) = model.limit_covariance(
                        functionals[f].as_ref(),
                        functionals[g].as_ref(),
                        *draws,
                        *oseed,
                    );
                    rows.push(ReportRow::checked(
                        "covariance",
                        format!("cov({},{})", names[f], names[g]),
                        covariance[f][g],
                        c,
                        tol.covariance,
                    ));
                }
                None => rows.push(ReportRow::info(
                    "covariance",
                    format!("cov({},{})", names[f], names[g]),
                    covariance[f][g],
                )),
            }
        }
    }

    let thetas: Vec<&ThetaHat> = outcomes.iter().filter_map(|o| o.theta.as_ref()).collect();
    if !thetas.is_empty() {
        let log_mean =
            thetas.iter().map(|t| t.log_corrected).sum::<f64>() / thetas.len() as f64;
        let raw_mean = thetas.iter().map(|t| t.raw).sum::<f64>() / thetas.len() as f64;
        match &oracle_model {
            Some((model, _, _)) => rows.push(ReportRow::checked(
                "theta",
                "log_corrected",
                log_mean,
                model.theta_true(),
                tol.theta,
            )),
            None => rows.push(ReportRow::info("theta", "log_corrected", log_mean)),
        }
        rows.push(ReportRow::info("theta", "raw", raw_mean));
        rows.push(ReportRow::info(
            "theta",
            "replications_defined",
            thetas.len() as f64,
        ));
    }

    if let Some(k) = cfg.cluster_size_max_k {
        let mut pooled = vec![0.0; k];
        let mut counted = 0usize;
        for o in &outcomes {
            if let Some(s) = &o.sizes {
                for (acc, &p) in pooled.iter_mut().zip(s) {
                    *acc += p;
                }
                counted += 1;
            }
        }
        if counted > 0 {
            for p in pooled.iter_mut() {
                *p /= counted as f64;
            }
            match &oracle_model {
                Some((model, _, _)) => {
                    let law = model.cluster_size_law(k);
                    let tv = total_variation(&pooled, &law);
                    rows.push(ReportRow::checked(
                        "cluster_size",
                        format!("tv_distance(k<={k})"),
                        tv,
                        0.0,
                        tol.cluster_size_tv,
                    ));
                }
                None => {}
            }
            for (i, &p) in pooled.iter().enumerate() {
                rows.push(ReportRow::info("cluster_size", format!("p({})", i + 1), p));
            }
        }
    }

    let diag = run_diagnostics(cfg, 0).ok();
    Ok(ExperimentReport {
        rows,
        functional_names: names,
        zn,
        covariance,
        diagnostics: diag,
    })
}

/// File-backed cache of oracle values, stored as a JSON object mapping
/// canonical keys to numbers. Missing files read as an empty cache.
#[derive(Clone, Debug, Default)]
pub struct OracleCache {
    map: BTreeMap<String, f64>,
}

impl OracleCache {
    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Ok(OracleCache::default());
        }
        let text = std::fs::read_to_string(path)?;
        let map: BTreeMap<String, f64> =
            serde_json::from_str(&text).map_err(|e| Error::Parse(format!("oracle cache: {e}")))?;
        Ok(OracleCache { map })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text =
            serde_json::to_string_pretty(&self.map).expect("cache serializes");
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.map.get(key).copied()
    }

    pub fn put(&mut self, key: impl Into<String>, value: f64) {
        self.map.insert(key.into(), value);
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, f64)> {
        self.map.iter().map(|(k, &v)| (k.as_str(), v))
    }
}

/// Canonical cache key for a limit covariance oracle value.
pub fn covariance_key(
    model: &TailChainModel,
    f_name: &str,
    g_name: &str,
    draws: usize,
    seed: u64,
) -> String {
    format!(
        "{}|{:?}|cov|{}|{}|{}|{}",
        model.family().tag(),
        model.scale(),
        f_name,
        g_name,
        draws,
        seed
    )
}

/// Look up a limit covariance in the cache, computing and inserting it
/// on a miss.
pub fn cached_limit_covariance(
    cache: &mut OracleCache,
    model: &TailChainModel,
    f: &dyn ClusterFunctional,
    g: &dyn ClusterFunctional,
    draws: usize,
    seed: u64,
) -> f64 {
    let key = covariance_key(model, f.name(), g.name(), draws, seed);
    if let Some(v) = cache.get(&key) {
        return v;
    }
    let (v, _se) = model.limit_covariance(f, g, draws, seed);
    cache.put(key, v);
    v
}
