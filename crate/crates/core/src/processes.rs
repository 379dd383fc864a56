//! Stationary test-bed processes with known extremal behavior, and
//! tail-chain oracles for the limit quantities they imply: the extremal
//! index, limit covariances of cluster functionals and the cluster-size
//! law.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::blocks::{evaluate_chain, ClusterFunctional};
use crate::error::{Error, Result};
use crate::standardize::RawSeries;

/// Steps discarded before recording ARMAX / moving-maxima paths. The
/// chains are started in their exact stationary marginal, so this is
/// redundant in theory; it guards against implementation drift.
const BURN_IN: usize = 1_000;

/// Process family of a simulated series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    IidUniform,
    IidPareto { gamma: f64 },
    ArmaxFrechet { alpha: f64 },
    MovingMaxima { weights: Vec<f64> },
}

impl Family {
    pub fn validate(&self) -> Result<()> {
        match self {
            Family::IidUniform => Ok(()),
            Family::IidPareto { gamma } => {
                if *gamma > 0.0 {
                    Ok(())
                } else {
                    Err(Error::config(format!("pareto gamma must be > 0, got {gamma}")))
                }
            }
            Family::ArmaxFrechet { alpha } => {
                if *alpha > 0.0 && *alpha < 1.0 {
                    Ok(())
                } else {
                    Err(Error::config(format!("armax alpha must be in (0, 1), got {alpha}")))
                }
            }
            Family::MovingMaxima { weights } => {
                if weights.is_empty() {
                    return Err(Error::config("moving maxima needs >= 1 weight"));
                }
                if weights.iter().any(|&w| w < 0.0) {
                    return Err(Error::config("moving maxima weights must be nonnegative"));
                }
                let s: f64 = weights.iter().sum();
                if (s - 1.0).abs() > 1e-9 {
                    return Err(Error::config(format!(
                        "moving maxima weights must sum to 1, got {s}"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn tag(&self) -> String {
        match self {
            Family::IidUniform => "iid_uniform".into(),
            Family::IidPareto { gamma } => format!("iid_pareto({gamma})"),
            Family::ArmaxFrechet { alpha } => format!("armax_frechet({alpha})"),
            Family::MovingMaxima { weights } => format!(
                "moving_maxima({})",
                weights
                    .iter()
                    .map(|w| format!("{w}"))
                    .collect::<Vec<_>>()
                    .join(",")
            ),
        }
    }
}

/// Full simulation request: family, path length and seed.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub family: Family,
    pub n: usize,
    pub seed: u64,
}

/// Independent RNG stream for one replication. Streams for different
/// indices never overlap (ChaCha stream separation).
pub fn replication_rng(seed: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication);
    rng
}

fn uniform_open(rng: &mut impl Rng) -> f64 {
    // (0, 1): never exactly 0 so logs stay finite
    loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            return u;
        }
    }
}

/// Standard Frechet via inverse transform: X = -1 / log(U).
fn frechet(rng: &mut impl Rng) -> f64 {
    -1.0 / uniform_open(rng).ln()
}

/// Pareto(1): P{Y > y} = 1/y, y >= 1.
fn pareto1(rng: &mut impl Rng) -> f64 {
    1.0 / uniform_open(rng)
}

/// Simulate a path. Deterministic given the same family, length and seed.
pub fn simulate(spec: &GeneratorSpec) -> Result<RawSeries> {
    spec.family.validate()?;
    if spec.n == 0 {
        return Err(Error::config("path length must be >= 1"));
    }
    let mut rng = replication_rng(spec.seed, 0);
    simulate_with(&spec.family, spec.n, &mut rng)
}

/// Simulate with an externally managed RNG stream (used by the
/// replication harness).
pub fn simulate_with(family: &Family, n: usize, rng: &mut ChaCha8Rng) -> Result<RawSeries> {
    family.validate()?;
    let values = match family {
        Family::IidUniform => (0..n).map(|_| rng.gen::<f64>()).collect(),
        Family::IidPareto { gamma } => (0..n).map(|_| uniform_open(rng).powf(-gamma)).collect(),
        Family::ArmaxFrechet { alpha } => {
            let a = *alpha;
            let mut x = frechet(rng);
            for _ in 0..BURN_IN {
                x = (a * x).max((1.0 - a) * frechet(rng));
            }
            let mut out = Vec::with_capacity(n);
            out.push(x);
            for _ in 1..n {
                x = (a * x).max((1.0 - a) * frechet(rng));
                out.push(x);
            }
            out
        }
        Family::MovingMaxima { weights } => {
            let q = weights.len();
            let total = n + q - 1 + BURN_IN;
            let noise: Vec<f64> = (0..total).map(|_| frechet(rng)).collect();
            let offset = BURN_IN;
            (0..n)
                .map(|i| {
                    weights
                        .iter()
                        .enumerate()
                        .map(|(j, &w)| w * noise[offset + i + q - 1 - j])
                        .fold(0.0, f64::max)
                })
                .collect()
        }
    };
    Ok(RawSeries::new(values)?.with_model(family.tag()))
}

/// Scale on which tail-chain samples are expressed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailScale {
    /// Conditional law of a uniform-margin standardized excess: values
    /// in (0, 1], the i.i.d. limit is U(0, 1].
    UniformExcess,
    /// Exceedance-ratio scale: values in (1, infinity), the i.i.d.
    /// heavy-tail limit is Pareto.
    Ratio,
}

/// Sampler and closed-form source for the limit sequence W = (W_i)
/// conditioned on an exceedance at position one.
#[derive(Clone, Debug)]
pub struct TailChainModel {
    family: Family,
    scale: TailScale,
}

impl TailChainModel {
    pub fn new(family: Family, scale: TailScale) -> Result<Self> {
        family.validate()?;
        if scale == TailScale::Ratio {
            match family {
                Family::IidPareto { .. } | Family::ArmaxFrechet { .. } | Family::MovingMaxima { .. } => {}
                Family::IidUniform => {
                    return Err(Error::config(
                        "ratio-scale tail chain requires a heavy-tailed family",
                    ))
                }
            }
        }
        Ok(TailChainModel { family, scale })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn scale(&self) -> TailScale {
        self.scale
    }

    fn convert(&self, ratio: f64) -> f64 {
        // ratio > 1 is an exceedance; below-threshold entries are 0
        if ratio <= 1.0 {
            return 0.0;
        }
        match self.scale {
            TailScale::Ratio => ratio,
            TailScale::UniformExcess => 1.0 - 1.0 / ratio,
        }
    }

    /// Draw one finite chain (W_1, ..., W_{m_W}); W_1 != 0 always, the
    /// last entry is nonzero, interior zeros are possible for
    /// non-monotone moving-maxima weights.
    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        let mut chain = match &self.family {
            Family::IidUniform => vec![self.convert(pareto1(rng))],
            Family::IidPareto { gamma } => {
                let w1 = match self.scale {
                    TailScale::Ratio => uniform_open(rng).powf(-gamma),
                    TailScale::UniformExcess => self.convert(pareto1(rng)),
                };
                vec![w1]
            }
            Family::ArmaxFrechet { alpha } => {
                let y = pareto1(rng);
                let mut out = Vec::new();
                let mut level = y;
                while level > 1.0 {
                    out.push(self.convert(level));
                    level *= alpha;
                }
                out
            }
            Family::MovingMaxima { weights } => {
                // The exceedance is caused by noise term j with
                // probability w_j; the forward chain follows the weight
                // ratios from there.
                let y = pareto1(rng);
                let mut pick: f64 = rng.gen();
                let mut j = 0;
                for (idx, &w) in weights.iter().enumerate() {
                    if pick < w || idx == weights.len() - 1 {
                        j = idx;
                        break;
                    }
                    pick -= w;
                }
                let base = weights[j];
                weights[j..]
                    .iter()
                    .map(|&w| self.convert(y * w / base))
                    .collect()
            }
        };
        while chain.last() == Some(&0.0) {
            chain.pop();
        }
        chain
    }

    /// Extremal index theta = P{W_i = 0 for all i >= 2}. Closed form for
    /// every built-in family.
    pub fn theta_true(&self) -> f64 {
        match &self.family {
            Family::IidUniform | Family::IidPareto { .. } => 1.0,
            Family::ArmaxFrechet { alpha } => 1.0 - alpha,
            Family::MovingMaxima { weights } => {
                weights.iter().cloned().fold(0.0, f64::max)
            }
        }
    }

    /// Monte Carlo estimate of theta with its standard error; a check on
    /// the closed forms and the escape hatch for new families.
    pub fn theta_monte_carlo(&self, draws: usize, seed: u64) -> (f64, f64) {
        let mut rng = replication_rng(seed, 0);
        let mut hits = 0usize;
        for _ in 0..draws {
            if self.sample(&mut rng).len() == 1 {
                hits += 1;
            }
        }
        let p = hits as f64 / draws as f64;
        (p, (p * (1.0 - p) / draws as f64).sqrt())
    }

    /// Limit covariance c(f, g) = E((fg)(W) - (fg)(W^{(2;infinity)}))
    /// by Monte Carlo over tail-chain draws. Returns (estimate, SE).
    pub fn limit_covariance(
        &self,
        f: &dyn ClusterFunctional,
        g: &dyn ClusterFunctional,
        draws: usize,
        seed: u64,
    ) -> (f64, f64) {
        let mut rng = replication_rng(seed, 0);
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..draws {
            let w = self.sample(&mut rng);
            let shifted = trim_chain(&w[1..]);
            let full = evaluate_chain(f, &w) * evaluate_chain(g, &w);
            let rest = evaluate_chain(f, shifted) * evaluate_chain(g, shifted);
            let term = full - rest;
            sum += term;
            sumsq += term * term;
        }
        let n = draws as f64;
        let mean = sum / n;
        let var = (sumsq / n - mean * mean).max(0.0);
        (mean, (var / n).sqrt())
    }

    /// Limit law of the core length over a cluster,
    /// mu_{L,W}({k}) = (P{L(W)=k} - P{L(W^{(2;inf)})=k, m_W>=2}) / theta.
    /// Closed form where available, otherwise Monte Carlo.
    pub fn cluster_size_law(&self, max_k: usize) -> Vec<f64> {
        match &self.family {
            Family::IidUniform | Family::IidPareto { .. } => {
                let mut p = vec![0.0; max_k];
                if max_k >= 1 {
                    p[0] = 1.0;
                }
                p
            }
            Family::ArmaxFrechet { alpha } => {
                // geometric: P(k) = alpha^{k-1} (1 - alpha)
                (1..=max_k).map(|k| alpha.powi(k as i32 - 1) * (1.0 - alpha)).collect()
            }
            Family::MovingMaxima { .. } => self.cluster_size_monte_carlo(max_k, 1_000_000, 0xC1A5),
        }
    }

    /// Monte Carlo evaluation of the two-term cluster-size formula.
    pub fn cluster_size_monte_carlo(&self, max_k: usize, draws: usize, seed: u64) -> Vec<f64> {
        let mut rng = replication_rng(seed, 0);
        let mut full = vec![0.0; max_k + 1];
        let mut shifted_counts = vec![0.0; max_k + 1];
        for _ in 0..draws {
            let w = self.sample(&mut rng);
            let l = core_length(&w);
            if l <= max_k {
                full[l] += 1.0;
            }
            if w.len() >= 2 {
                let ls = core_length(trim_chain(&w[1..]));
                if ls <= max_k {
                    shifted_counts[ls] += 1.0;
                }
            }
        }
        let n = draws as f64;
        let theta = self.theta_true();
        (1..=max_k)
            .map(|k| (full[k] - shifted_counts[k]) / (n * theta))
            .collect()
    }
}

/// Drop leading and trailing zeros of a chain segment (the core view of
/// the shifted chain).
fn trim_chain(w: &[f64]) -> &[f64] {
    let start = w.iter().position(|&x| x != 0.0);
    match start {
        None => &[],
        Some(s) => {
            let e = w.iter().rposition(|&x| x != 0.0).unwrap();
            &w[s..=e]
        }
    }
}

fn core_length(w: &[f64]) -> usize {
    trim_chain(w).len()
}

/// Standard Frechet cdf.
pub fn frechet_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Pareto cdf with extreme value index gamma: P{X <= x} = 1 - x^{-1/gamma}.
pub fn pareto_cdf(gamma: f64, x: f64) -> f64 {
    if x <= 1.0 {
        0.0
    } else {
        1.0 - x.powf(-1.0 / gamma)
    }
}

/// Pre-limit Hill target gamma_n = E(log(X/u) | X > u) for standard
/// Frechet margins, by quadrature of the conditional survival function.
pub fn frechet_hill_target(u: f64) -> f64 {
    let v = 1.0 - frechet_cdf(u);
    // E log(X/u) 1{X>u} = integral over s >= 0 of P{X > u e^s} ds
    let surv = |s: f64| 1.0 - frechet_cdf(u * s.exp());
    let upper = 60.0;
    let steps = 600_000;
    let h = upper / steps as f64;
    // Simpson's rule
    let mut acc = surv(0.0) + surv(upper);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * surv(i as f64 * h);
    }
    (acc * h / 3.0) / v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::TailArraySum;
    use crate::stats::{ks_critical_5pct, ks_distance};

    #[test]
    fn same_seed_same_path() {
        let spec = GeneratorSpec {
            family: Family::ArmaxFrechet { alpha: 0.5 },
            n: 500,
            seed: 11,
        };
        let a = simulate(&spec).unwrap();
        let b = simulate(&spec).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn iid_uniform_passes_ks() {
        let spec = GeneratorSpec {
            family: Family::IidUniform,
            n: 10_000,
            seed: 3,
        };
        let s = simulate(&spec).unwrap();
        let d = ks_distance(&s.values, |x| x.clamp(0.0, 1.0));
        assert!(d < ks_critical_5pct(s.len()), "d = {d}");
    }

    #[test]
    fn armax_marginal_is_frechet() {
        let spec = GeneratorSpec {
            family: Family::ArmaxFrechet { alpha: 0.5 },
            n: 20_000,
            seed: 4,
        };
        let s = simulate(&spec).unwrap();
        // dependent path: KS critical value for the effective sample is
        // looser; use the extremal-index-adjusted count theta * n
        let d = ks_distance(&s.values, frechet_cdf);
        assert!(d < ks_critical_5pct(s.len() / 2), "d = {d}");
    }

    #[test]
    fn moving_maxima_marginal_is_frechet() {
        let spec = GeneratorSpec {
            family: Family::MovingMaxima { weights: vec![0.5, 0.3, 0.2] },
            n: 20_000,
            seed: 5,
        };
        let s = simulate(&spec).unwrap();
        let d = ks_distance(&s.values, frechet_cdf);
        assert!(d < ks_critical_5pct(s.len() / 2), "d = {d}");
    }

    #[test]
    fn pareto_marginal_exact() {
        let spec = GeneratorSpec {
            family: Family::IidPareto { gamma: 1.0 },
            n: 10_000,
            seed: 6,
        };
        let s = simulate(&spec).unwrap();
        let d = ks_distance(&s.values, |x| pareto_cdf(1.0, x));
        assert!(d < ks_critical_5pct(s.len()), "d = {d}");
    }

    #[test]
    fn stationarity_across_segments() {
        for family in [
            Family::ArmaxFrechet { alpha: 0.5 },
            Family::MovingMaxima { weights: vec![0.6, 0.4] },
        ] {
            let spec = GeneratorSpec { family, n: 40_000, seed: 7 };
            let s = simulate(&spec).unwrap();
            for half in s.values.chunks(20_000) {
                // serial dependence inflates the KS distance relative to
                // the iid critical value; allow an effective sample of a
                // quarter of the path
                let d = ks_distance(half, frechet_cdf);
                assert!(d < ks_critical_5pct(half.len() / 4), "d = {d}");
            }
        }
    }

    #[test]
    fn iid_chain_has_length_one() {
        let model = TailChainModel::new(Family::IidUniform, TailScale::UniformExcess).unwrap();
        let mut rng = replication_rng(1, 0);
        for _ in 0..100 {
            let w = model.sample(&mut rng);
            assert_eq!(w.len(), 1);
            assert!(w[0] > 0.0 && w[0] <= 1.0);
        }
    }

    #[test]
    fn armax_chain_is_deterministic_decay() {
        // Y = 3, alpha = 0.5 -> ratio chain (3, 1.5), m_W = 2
        let model = TailChainModel::new(Family::ArmaxFrechet { alpha: 0.5 }, TailScale::Ratio).unwrap();
        let mut level: f64 = 3.0;
        let mut expect = Vec::new();
        while level > 1.0 {
            expect.push(level);
            level *= 0.5;
        }
        assert_eq!(expect, vec![3.0, 1.5]);
        // sampled chains always form a prefix without interior zeros
        let mut rng = replication_rng(2, 0);
        for _ in 0..200 {
            let w = model.sample(&mut rng);
            assert!(!w.is_empty());
            assert!(w.iter().all(|&x| x > 1.0));
            for pair in w.windows(2) {
                assert!((pair[1] / pair[0] - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn armax_chain_length_is_geometric() {
        // P(m_W >= k) = alpha^{k-1}
        let alpha = 0.5f64;
        let model =
            TailChainModel::new(Family::ArmaxFrechet { alpha }, TailScale::Ratio).unwrap();
        let mut rng = replication_rng(3, 0);
        let draws = 100_000;
        let mut counts = vec![0usize; 8];
        for _ in 0..draws {
            let m = model.sample(&mut rng).len();
            for k in 1..=m.min(8) {
                counts[k - 1] += 1;
            }
        }
        for k in 1..=8usize {
            let p_hat = counts[k - 1] as f64 / draws as f64;
            let p = alpha.powi(k as i32 - 1);
            let se = (p * (1.0 - p) / draws as f64).sqrt().max(1e-9);
            assert!((p_hat - p).abs() < 3.0 * se + 1e-9, "k={k}: {p_hat} vs {p}");
        }
    }

    #[test]
    fn theta_closed_forms() {
        let iid = TailChainModel::new(Family::IidUniform, TailScale::UniformExcess).unwrap();
        assert_eq!(iid.theta_true(), 1.0);
        for alpha in [0.25, 0.5, 0.75] {
            let m = TailChainModel::new(Family::ArmaxFrechet { alpha }, TailScale::Ratio).unwrap();
            assert!((m.theta_true() - (1.0 - alpha)).abs() < 1e-15);
            let (est, se) = m.theta_monte_carlo(200_000, 9);
            assert!((est - (1.0 - alpha)).abs() < 3.0 * se + 1e-3);
        }
        let mm = TailChainModel::new(
            Family::MovingMaxima { weights: vec![0.2, 0.5, 0.3] },
            TailScale::Ratio,
        )
        .unwrap();
        assert!((mm.theta_true() - 0.5).abs() < 1e-15);
        let (est, se) = mm.theta_monte_carlo(200_000, 10);
        assert!((est - 0.5).abs() < 3.0 * se + 1e-3);
    }

    #[test]
    fn limit_covariance_iid_closed_form() {
        // c(g_{1_(x,1]}, g_{1_(y,1]}) = 1 - max(x, y) on uniform scale
        let model = TailChainModel::new(Family::IidUniform, TailScale::UniformExcess).unwrap();
        let f = TailArraySum::exceedance_indicator(&[0.3]).unwrap();
        let g = TailArraySum::exceedance_indicator(&[0.5]).unwrap();
        let (c, se) = model.limit_covariance(&f, &g, 400_000, 12);
        assert!((c - 0.5).abs() < 3.0 * se + 1e-3, "c = {c}");
        let (cxx, se) = model.limit_covariance(&g, &g, 400_000, 13);
        assert!((cxx - 0.5).abs() < 3.0 * se + 1e-3, "c = {cxx}");
    }

    #[test]
    fn limit_covariance_self_is_nonnegative() {
        let model =
            TailChainModel::new(Family::ArmaxFrechet { alpha: 0.5 }, TailScale::UniformExcess)
                .unwrap();
        let f = TailArraySum::exceedance_indicator(&[0.0]).unwrap();
        let (c, se) = model.limit_covariance(&f, &f, 100_000, 14);
        assert!(c >= -3.0 * se);
        // ARMAX(alpha): c(g_1, g_1) = E(2 m_W - 1) = 2/(1-alpha) - 1 = 3
        assert!((c - 3.0).abs() < 3.0 * se + 0.02, "c = {c}");
    }

    #[test]
    fn cluster_size_law_examples() {
        let iid = TailChainModel::new(Family::IidUniform, TailScale::UniformExcess).unwrap();
        assert_eq!(iid.cluster_size_law(3), vec![1.0, 0.0, 0.0]);

        let armax =
            TailChainModel::new(Family::ArmaxFrechet { alpha: 0.5 }, TailScale::Ratio).unwrap();
        let law = armax.cluster_size_law(3);
        assert!((law[0] - 0.5).abs() < 1e-15);
        assert!((law[1] - 0.25).abs() < 1e-15);
        assert!((law[2] - 0.125).abs() < 1e-15);

        // two-term Monte Carlo formula agrees with the closed form
        let mc = armax.cluster_size_monte_carlo(6, 400_000, 21);
        let exact6 = armax.cluster_size_law(6);
        for (k, (&est, &exact)) in mc.iter().zip(&exact6).enumerate() {
            assert!((est - exact).abs() < 0.01, "k={} {est} vs {exact}", k + 1);
        }
        // truncation at k = 6 leaves exactly the geometric tail behind
        let total: f64 = mc.iter().sum();
        let expected: f64 = exact6.iter().sum();
        assert!((total - expected).abs() < 0.01, "masses sum to {total}");
    }

    #[test]
    fn cluster_size_law_is_positive_for_moving_maxima() {
        let mm = TailChainModel::new(
            Family::MovingMaxima { weights: vec![0.5, 0.2, 0.3] },
            TailScale::Ratio,
        )
        .unwrap();
        let law = mm.cluster_size_monte_carlo(8, 300_000, 22);
        let se = 3.0 / (300_000f64).sqrt();
        for (k, &p) in law.iter().enumerate() {
            assert!(p >= -3.0 * se, "mass at {} is {p}", k + 1);
        }
        let total: f64 = law.iter().sum();
        assert!((total - 1.0).abs() < 0.01);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(Family::ArmaxFrechet { alpha: 1.0 }.validate().is_err());
        assert!(Family::IidPareto { gamma: 0.0 }.validate().is_err());
        assert!(Family::MovingMaxima { weights: vec![0.5, 0.4] }.validate().is_err());
        assert!(Family::MovingMaxima { weights: vec![] }.validate().is_err());
        assert!(TailChainModel::new(Family::IidUniform, TailScale::Ratio).is_err());
    }

    #[test]
    fn frechet_hill_target_tends_to_gamma() {
        // Frechet has extreme value index 1; gamma_n -> 1 as u grows
        let g = frechet_hill_target(100.0);
        assert!((g - 1.0).abs() < 0.01, "gamma_n = {g}");
        let g_low = frechet_hill_target(10.0);
        assert!((g_low - 1.0).abs() < 0.1, "gamma_n = {g_low}");
    }
}
