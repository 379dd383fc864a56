//! Small statistical utilities: quantiles, sample moments, the
//! Anderson-Darling normality test and Kolmogorov-Smirnov distances.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Type-7 (linear interpolation) quantile of an already sorted slice.
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = lo + 1;
    if hi >= n {
        return sorted[n - 1];
    }
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|&x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Sample covariance (unbiased) of two equal-length samples.
pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let mx = mean(xs);
    let my = mean(ys);
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| (x - mx) * (y - my))
        .sum::<f64>()
        / (xs.len() - 1) as f64
}

/// Bias-corrected sample skewness (G1).
pub fn skewness(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = mean(xs);
    let m2 = xs.iter().map(|&x| (x - m).powi(2)).sum::<f64>() / n;
    let m3 = xs.iter().map(|&x| (x - m).powi(3)).sum::<f64>() / n;
    let g1 = m3 / m2.powf(1.5);
    (n * (n - 1.0)).sqrt() / (n - 2.0) * g1
}

/// Bias-corrected sample excess kurtosis (G2).
pub fn excess_kurtosis(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = mean(xs);
    let m2 = xs.iter().map(|&x| (x - m).powi(2)).sum::<f64>() / n;
    let m4 = xs.iter().map(|&x| (x - m).powi(4)).sum::<f64>() / n;
    let g2 = m4 / (m2 * m2) - 3.0;
    ((n - 1.0) / ((n - 2.0) * (n - 3.0))) * ((n + 1.0) * g2 + 6.0)
}

/// Anderson-Darling test of normality with estimated mean and variance
/// (Stephens "case 3" adjustment).
#[derive(Clone, Copy, Debug)]
pub struct AndersonDarling {
    /// Raw A^2 statistic.
    pub statistic: f64,
    /// Finite-sample adjusted statistic A*^2 = A^2 (1 + 0.75/n + 2.25/n^2).
    pub adjusted: f64,
    /// Approximate p-value (D'Agostino-Stephens formula).
    pub p_value: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

impl AndersonDarling {
    pub fn rejects_at(&self, level: f64) -> bool {
        self.p_value < level
    }
}

/// Upper-tail critical values for the adjusted statistic, case 3
/// (normal, both parameters estimated).
pub const AD_CRITICAL_VALUES: [(f64, f64); 5] = [
    (0.15, 0.576),
    (0.10, 0.656),
    (0.05, 0.787),
    (0.025, 0.918),
    (0.01, 1.092),
];

pub fn anderson_darling_normal(sample: &[f64]) -> Result<AndersonDarling> {
    let n = sample.len();
    if n < 20 {
        return Err(Error::config(format!(
            "Anderson-Darling test needs >= 20 samples, got {n}"
        )));
    }
    let m = mean(sample);
    let sd = variance(sample).sqrt();
    if sd == 0.0 || !sd.is_finite() {
        return Err(Error::undefined("degenerate sample: zero variance"));
    }
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let mut sorted = sample.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let nf = n as f64;
    let mut a2 = 0.0;
    for i in 0..n {
        let zi = normal.cdf((sorted[i] - m) / sd).clamp(1e-300, 1.0 - 1e-16);
        let zrev = normal
            .cdf((sorted[n - 1 - i] - m) / sd)
            .clamp(1e-300, 1.0 - 1e-16);
        a2 += (2.0 * (i as f64) + 1.0) * (zi.ln() + (1.0 - zrev).ln());
    }
    let a2 = -nf - a2 / nf;
    let adjusted = a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf));
    let p_value = ad_p_value(adjusted);
    Ok(AndersonDarling {
        statistic: a2,
        adjusted,
        p_value,
        skewness: skewness(sample),
        excess_kurtosis: excess_kurtosis(sample),
    })
}

// D'Agostino & Stephens (1986), case 3 approximation.
fn ad_p_value(a: f64) -> f64 {
    // the quadratic approximation turns back upward for very large a;
    // any such statistic is an unambiguous rejection
    if a > 10.0 {
        return 0.0;
    }
    let p = if a >= 0.6 {
        (1.2937 - 5.709 * a + 0.0186 * a * a).exp()
    } else if a >= 0.34 {
        (0.9177 - 4.279 * a - 1.38 * a * a).exp()
    } else if a >= 0.2 {
        1.0 - (-8.318 + 42.796 * a - 59.938 * a * a).exp()
    } else {
        1.0 - (-13.436 + 101.14 * a - 223.73 * a * a).exp()
    };
    p.clamp(0.0, 1.0)
}

/// One-sample Kolmogorov-Smirnov distance between the empirical cdf of
/// `sample` and a reference cdf.
pub fn ks_distance<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut sorted = sample.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    d
}

/// Asymptotic one-sample KS critical value at 5%.
pub fn ks_critical_5pct(n: usize) -> f64 {
    1.358 / (n as f64).sqrt()
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn two_sample_ks(a: &[f64], b: &[f64]) -> f64 {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    ys.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (mut i, mut j) = (0usize, 0usize);
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        // advance past the smaller value (and all ties) on both sides
        // before measuring, so identical samples give distance 0
        let t = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= t {
            i += 1;
        }
        while j < ys.len() && ys[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Total-variation distance between two discrete mass vectors over the
/// same support (any leftover mass is compared too).
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len());
    let diff: f64 = p.iter().zip(q).map(|(&a, &b)| (a - b).abs()).sum();
    let tail = ((1.0 - p.iter().sum::<f64>()) - (1.0 - q.iter().sum::<f64>())).abs();
    0.5 * (diff + tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quantile_linear_interpolation() {
        let sorted = [1.0, 2.0, 3.0, 4.0];
        assert!((quantile_type7(&sorted, 0.5) - 2.5).abs() < 1e-15);
        assert!((quantile_type7(&sorted, 0.0) - 1.0).abs() < 1e-15);
        assert!((quantile_type7(&sorted, 1.0) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn ad_accepts_seeded_normal() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sample: Vec<f64> = (0..10_000)
            .map(|_| {
                // Box-Muller
                let u1: f64 = rng.gen::<f64>().max(1e-12);
                let u2: f64 = rng.gen();
                (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            })
            .collect();
        let ad = anderson_darling_normal(&sample).unwrap();
        assert!(!ad.rejects_at(0.01), "A*^2 = {}", ad.adjusted);
        assert!(ad.skewness.abs() < 0.1);
    }

    #[test]
    fn ad_rejects_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let sample: Vec<f64> = (0..10_000)
            .map(|_| -rng.gen::<f64>().max(1e-12).ln())
            .collect();
        let ad = anderson_darling_normal(&sample).unwrap();
        assert!(ad.rejects_at(0.01), "A*^2 = {}", ad.adjusted);
    }

    #[test]
    fn ad_rejects_degenerate_and_short_samples() {
        assert!(anderson_darling_normal(&[1.0; 19]).is_err());
        assert!(anderson_darling_normal(&[1.0; 25]).is_err());
    }

    #[test]
    fn ks_uniform_self_distance_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sample: Vec<f64> = (0..10_000).map(|_| rng.gen::<f64>()).collect();
        let d = ks_distance(&sample, |x| x.clamp(0.0, 1.0));
        assert!(d < ks_critical_5pct(sample.len()), "d = {d}");
    }

    #[test]
    fn two_sample_ks_detects_shift() {
        let a: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
        let b: Vec<f64> = a.iter().map(|x| x + 0.5).collect();
        assert!(two_sample_ks(&a, &b) > 0.45);
        assert!(two_sample_ks(&a, &a) < 1e-12);
    }

    #[test]
    fn tv_distance_basics() {
        assert!(total_variation(&[0.5, 0.5], &[0.5, 0.5]) < 1e-15);
        assert!((total_variation(&[1.0, 0.0], &[0.0, 1.0]) - 1.0).abs() < 1e-15);
    }
}
