//! Randomized invariants of the core pipeline: padding invariance of
//! cluster functionals, exact segmentation, the tail-array identity,
//! and monotonicity of standardization.

use cluster_extremes::blocks::{
    AllValuesIndicator, Block, Blocking, ClusterFunctional, ClusterLength, ClusterMax,
    OrderStatIndicator, SurvivalIndicator, TailArraySum, core_block, segment_blocks,
};
use cluster_extremes::empirical::compute_tilde_zn;
use cluster_extremes::standardize::{univariate_excesses, RawSeries};
use proptest::prelude::*;

/// Sparse-ish block entries: zeros are common, as after standardization.
fn entry() -> impl Strategy<Value = f64> {
    prop_oneof![
        3 => Just(0.0),
        2 => 0.01f64..1.0,
    ]
}

fn block_data() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(entry(), 1..12)
}

fn builtin_functionals() -> Vec<Box<dyn ClusterFunctional>> {
    vec![
        Box::new(TailArraySum::exceedance_indicator(&[0.4]).unwrap()),
        Box::new(TailArraySum::excess_over(0.3).unwrap()),
        Box::new(SurvivalIndicator::new(&[0.4, 0.1]).unwrap()),
        Box::new(OrderStatIndicator::new(&[0.6, 0.2]).unwrap()),
        Box::new(AllValuesIndicator::new(2, &[0.8, 0.8]).unwrap()),
        Box::new(ClusterMax),
        Box::new(ClusterLength),
    ]
}

proptest! {
    /// Surrounding a block with zeros never changes any functional.
    #[test]
    fn padding_invariance(data in block_data(), front in 0usize..8, back in 0usize..8) {
        let mut padded = vec![0.0; front];
        padded.extend_from_slice(&data);
        padded.extend(std::iter::repeat(0.0).take(back));
        for f in builtin_functionals() {
            let a = f.evaluate(&Block::univariate(&data));
            let b = f.evaluate(&Block::univariate(&padded));
            prop_assert_eq!(a, b, "{} changed under zero padding", f.name());
        }
    }

    /// Every functional depends on a block only through its core.
    #[test]
    fn core_dependence(data in block_data()) {
        let block = Block::univariate(&data);
        let core = core_block(&block);
        for f in builtin_functionals() {
            let full = f.evaluate(&block);
            let on_core = match &core {
                Some(c) => f.evaluate(c),
                None => 0.0,
            };
            prop_assert_eq!(full, on_core, "{} is not core-determined", f.name());
        }
    }

    /// Blocks plus remainder reproduce the row exactly, and every block
    /// has length r.
    #[test]
    fn segmentation_is_a_partition(
        data in prop::collection::vec(0.0f64..1.0, 4..200),
        r in 2usize..20,
        l in 1usize..19,
    ) {
        prop_assume!(r <= data.len() && l < r);
        let blocking = Blocking::new(data.len(), r, l).unwrap();
        let (blocks, rem) = segment_blocks(&data, 1, &blocking).unwrap();
        prop_assert_eq!(blocks.len(), data.len() / r);
        let mut rebuilt = Vec::new();
        for b in &blocks {
            prop_assert_eq!(b.len(), r);
            rebuilt.extend_from_slice(b.raw());
        }
        rebuilt.extend_from_slice(rem.raw());
        prop_assert_eq!(rebuilt, data);
    }

    /// The row-sum process always equals the block process plus the
    /// trailing remainder term.
    #[test]
    fn tail_array_identity(
        values in prop::collection::vec(0.0f64..1.0, 20..300),
        r in 2usize..15,
        level in 0.0f64..0.95,
        point_mean in 0.0f64..0.3,
    ) {
        prop_assume!(r <= values.len());
        let series = RawSeries::new(values).unwrap();
        let row = univariate_excesses(&series, 0.5, 0.5).unwrap();
        let blocking = Blocking::new(row.len(), r, 1.max(r / 4).min(r - 1)).unwrap();
        let phi = TailArraySum::exceedance_indicator(&[level]).unwrap();
        let dec = compute_tilde_zn(&row, &blocking, &phi, point_mean, 0.25).unwrap();
        let gap = (dec.tilde - dec.blocked - dec.remainder).abs();
        prop_assert!(gap <= 1e-12 * dec.tilde.abs().max(1.0), "gap = {}", gap);
    }

    /// Raising the threshold is pointwise monotone and can only reduce
    /// the exceedance probability.
    #[test]
    fn standardization_monotone(
        values in prop::collection::vec(0.0f64..2.0, 1..100),
        u_lo in 0.0f64..1.0,
        bump in 0.0f64..1.0,
    ) {
        let series = RawSeries::new(values).unwrap();
        let lo = univariate_excesses(&series, u_lo, 1.0).unwrap();
        let hi = univariate_excesses(&series, u_lo + bump, 1.0).unwrap();
        for i in 0..series.len() {
            prop_assert!(hi.point(i)[0] <= lo.point(i)[0]);
            prop_assert!(lo.point(i)[0] >= 0.0);
        }
        prop_assert!(hi.exceed_prob() <= lo.exceed_prob());
    }

    /// Nonzero entries of a standardized row always decode back above
    /// the threshold; zero entries decode to at most the threshold.
    #[test]
    fn standardization_partitions_by_threshold(
        values in prop::collection::vec(0.0f64..2.0, 1..100),
        u in 0.0f64..1.5,
        a in 0.1f64..2.0,
    ) {
        let series = RawSeries::new(values.clone()).unwrap();
        let row = univariate_excesses(&series, u, a).unwrap();
        for (i, &x) in values.iter().enumerate() {
            let e = row.point(i)[0];
            if x > u {
                prop_assert!(e > 0.0 && (e - (x - u) / a).abs() < 1e-12);
            } else {
                prop_assert_eq!(e, 0.0);
            }
        }
    }
}
