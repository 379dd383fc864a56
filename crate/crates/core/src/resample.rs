//! Hill estimation of the extreme value index on dependent data, its
//! block-sum covariance matrix, and a disjoint-blocks bootstrap for the
//! sampling distribution of the estimator.

use std::path::Path;

use rand::Rng;

use crate::blocks::{Blocking, ClusterFunctional, TailArraySum};
use crate::error::{Error, Result};
use crate::processes::replication_rng;
use crate::standardize::{ExcessArray, ExcessMode};

/// Hill estimator on a ratio-standardized row:
/// `gamma = sum log(X/u) 1{X > u} / #{X > u}`.
#[derive(Clone, Copy, Debug)]
pub struct HillEstimate {
    pub gamma: f64,
    pub exceedances: usize,
}

pub fn hill_estimate(row: &ExcessArray) -> Result<HillEstimate> {
    if row.mode != ExcessMode::Ratio {
        return Err(Error::config(
            "Hill estimation needs ratio-standardized data (X / u above the threshold)",
        ));
    }
    let log_kernel = TailArraySum::hill_log();
    let count_kernel = TailArraySum::hill_count();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..row.len() {
        let p = row.point(i);
        num += log_kernel.phi(p);
        den += count_kernel.phi(p);
    }
    if den == 0.0 {
        return Err(Error::undefined("no exceedances: Hill estimator undefined"));
    }
    Ok(HillEstimate {
        gamma: num / den,
        exceedances: den as usize,
    })
}

/// Estimated 2x2 covariance matrix of the Hill block sums:
/// `sigma_kl = (1/(m r v)) sum_j (sum phi_k over block j)(sum phi_l over block j)`
/// with `phi_1 = log` and `phi_2 = count`. The asymptotic variance of
/// `sqrt(n v) (gamma_hat - gamma)` is
/// `sigma_11 + gamma^2 sigma_22 - 2 gamma sigma_12`.
#[derive(Clone, Copy, Debug)]
pub struct SigmaMatrix {
    pub log_log: f64,
    pub log_count: f64,
    pub count_count: f64,
}

impl SigmaMatrix {
    pub fn hill_variance(&self, gamma: f64) -> f64 {
        self.log_log + gamma * gamma * self.count_count - 2.0 * gamma * self.log_count
    }
}

pub fn sigma_matrix(row: &ExcessArray, blocking: &Blocking) -> Result<SigmaMatrix> {
    if row.mode != ExcessMode::Ratio {
        return Err(Error::config("sigma matrix needs ratio-standardized data"));
    }
    let v = row.exceed_prob();
    if v <= 0.0 {
        return Err(Error::undefined("no exceedances in row"));
    }
    let (blocks, _rem) = row.segment(blocking)?;
    let log_kernel = TailArraySum::hill_log();
    let count_kernel = TailArraySum::hill_count();
    let mut s11 = 0.0;
    let mut s12 = 0.0;
    let mut s22 = 0.0;
    for b in &blocks {
        let a = log_kernel.evaluate(b);
        let c = count_kernel.evaluate(b);
        s11 += a * a;
        s12 += a * c;
        s22 += c * c;
    }
    let norm = blocks.len() as f64 * blocking.block_length() as f64 * v;
    Ok(SigmaMatrix {
        log_log: s11 / norm,
        log_count: s12 / norm,
        count_count: s22 / norm,
    })
}

/// Bootstrap output: the point estimate on the blocked part of the row,
/// per-resample statistics, and their centered and scaled versions.
#[derive(Clone, Debug)]
pub struct BootstrapResult {
    /// Hill estimate on the first `r * m` observations, the population
    /// the resamples are drawn from.
    pub estimate: f64,
    /// Per-resample Hill statistics; `None` marks resamples in which no
    /// block contained an exceedance.
    pub replicates: Vec<Option<f64>>,
    /// `sqrt(r m v) (gamma* - estimate)` for the valid resamples, in
    /// resample order.
    pub centered_scaled: Vec<f64>,
    /// Number of invalid resamples.
    pub invalid: usize,
}

/// Disjoint-blocks bootstrap of the Hill estimator: each resample draws
/// `m` blocks i.i.d. with replacement from the `m` observed blocks and
/// recomputes the ratio of block sums. Resample `b` uses its own RNG
/// stream derived from `seed`, so results are independent of evaluation
/// order.
pub fn block_bootstrap_hill(
    row: &ExcessArray,
    blocking: &Blocking,
    num_resamples: usize,
    seed: u64,
) -> Result<BootstrapResult> {
    if num_resamples == 0 {
        return Err(Error::config("bootstrap needs >= 1 resample"));
    }
    if row.mode != ExcessMode::Ratio {
        return Err(Error::config("bootstrap needs ratio-standardized data"));
    }
    let v = row.exceed_prob();
    if v <= 0.0 {
        return Err(Error::undefined("no exceedances in row"));
    }
    let (blocks, _rem) = row.segment(blocking)?;
    let m = blocks.len();
    if m < 2 {
        return Err(Error::config("bootstrap needs >= 2 blocks"));
    }
    let log_kernel = TailArraySum::hill_log();
    let count_kernel = TailArraySum::hill_count();
    let log_sums: Vec<f64> = blocks.iter().map(|b| log_kernel.evaluate(b)).collect();
    let count_sums: Vec<f64> = blocks.iter().map(|b| count_kernel.evaluate(b)).collect();

    let total_count: f64 = count_sums.iter().sum();
    if total_count == 0.0 {
        return Err(Error::undefined("no exceedances in the blocked part of the row"));
    }
    let estimate = log_sums.iter().sum::<f64>() / total_count;
    let scale = (m as f64 * blocking.block_length() as f64 * v).sqrt();

    let mut replicates = Vec::with_capacity(num_resamples);
    let mut centered_scaled = Vec::new();
    let mut invalid = 0usize;
    for b in 0..num_resamples {
        // stream 0 generated the data; resamples start at stream 1
        let mut rng = replication_rng(seed, b as u64 + 1);
        let mut num = 0.0;
        let mut den = 0.0;
        for _ in 0..m {
            let j = rng.gen_range(0..m);
            num += log_sums[j];
            den += count_sums[j];
        }
        if den == 0.0 {
            replicates.push(None);
            invalid += 1;
        } else {
            let g = num / den;
            replicates.push(Some(g));
            centered_scaled.push(scale * (g - estimate));
        }
    }
    Ok(BootstrapResult {
        estimate,
        replicates,
        centered_scaled,
        invalid,
    })
}

/// Write a bootstrap result as CSV with a versioned schema header.
pub fn write_bootstrap_csv(path: &Path, result: &BootstrapResult) -> Result<()> {
    let mut out = String::new();
    out.push_str("# schema=1\n");
    out.push_str("resample_index,statistic,centered_scaled,valid\n");
    let mut cs = result.centered_scaled.iter();
    for (i, rep) in result.replicates.iter().enumerate() {
        match rep {
            Some(g) => {
                let z = cs.next().expect("one scaled value per valid resample");
                out.push_str(&format!("{i},{g},{z},1\n"));
            }
            None => out.push_str(&format!("{i},,,0\n")),
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}
