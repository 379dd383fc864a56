//! Blocks, cores and cluster functionals.
//!
//! A row of standardized excesses is split into consecutive blocks of
//! `r` observations. The core of a block is the run from its first to
//! its last nonzero entry; a cluster functional depends only on that
//! core and vanishes on all-zero blocks.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Immutable view of one block: `len` points of dimension `dim`,
/// stored flat. Dimension-1 blocks view plain `&[f64]` slices.
#[derive(Clone, Copy, Debug)]
pub struct Block<'a> {
    data: &'a [f64],
    dim: usize,
}

impl<'a> Block<'a> {
    pub fn new(data: &'a [f64], dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::structure("block dimension must be >= 1"));
        }
        if data.len() % dim != 0 {
            return Err(Error::structure(format!(
                "block data length {} is not a multiple of dimension {}",
                data.len(),
                dim
            )));
        }
        Ok(Block { data, dim })
    }

    /// View over a univariate slice.
    pub fn univariate(data: &'a [f64]) -> Self {
        Block { data, dim: 1 }
    }

    /// Number of points in the block.
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The `i`th point (0-based).
    pub fn point(&self, i: usize) -> &'a [f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Exact comparison against the origin; standardization produces
    /// exact zeros, so no epsilon is involved.
    pub fn is_zero_point(&self, i: usize) -> bool {
        self.point(i).iter().all(|&x| x == 0.0)
    }

    pub fn points(&self) -> impl Iterator<Item = &'a [f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    /// Sub-block covering points `start..start+len`.
    pub fn slice(&self, start: usize, len: usize) -> Block<'a> {
        Block {
            data: &self.data[start * self.dim..(start + len) * self.dim],
            dim: self.dim,
        }
    }

    pub fn raw(&self) -> &'a [f64] {
        self.data
    }
}

/// Core of a block: offset of the first nonzero point (0-based) and the
/// number of points from first to last nonzero one. `len == 0` means the
/// block was all zeros and `start` is meaningless.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoreSpan {
    pub start: usize,
    pub len: usize,
}

impl CoreSpan {
    pub const EMPTY: CoreSpan = CoreSpan { start: 0, len: 0 };

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// Locate the core of a block.
pub fn extract_core(block: &Block) -> CoreSpan {
    let n = block.len();
    let first = (0..n).find(|&i| !block.is_zero_point(i));
    match first {
        None => CoreSpan::EMPTY,
        Some(l1) => {
            let l2 = (0..n).rev().find(|&i| !block.is_zero_point(i)).unwrap();
            CoreSpan {
                start: l1,
                len: l2 - l1 + 1,
            }
        }
    }
}

/// Core as a sub-block view. `None` for all-zero blocks.
pub fn core_block<'a>(block: &Block<'a>) -> Option<Block<'a>> {
    let span = extract_core(block);
    if span.is_empty() {
        None
    } else {
        Some(block.slice(span.start, span.len))
    }
}

/// Blocking scheme for a row of `n` observations: big blocks of length
/// `r`, small blocks of length `l` (used only by the omission
/// diagnostic), `m = floor(n / r)` blocks in total.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Blocking {
    row_length: usize,
    block_length: usize,
    small_block_length: usize,
    num_blocks: usize,
}

impl Blocking {
    pub fn new(row_length: usize, block_length: usize, small_block_length: usize) -> Result<Self> {
        if block_length > row_length {
            return Err(Error::config(format!(
                "block length {} exceeds row length {}",
                block_length, row_length
            )));
        }
        if small_block_length == 0 || small_block_length >= block_length {
            return Err(Error::config(format!(
                "small block length {} must satisfy 1 <= l < r = {}",
                small_block_length, block_length
            )));
        }
        Ok(Blocking {
            row_length,
            block_length,
            small_block_length,
            num_blocks: row_length / block_length,
        })
    }

    pub fn row_length(&self) -> usize {
        self.row_length
    }

    pub fn block_length(&self) -> usize {
        self.block_length
    }

    pub fn small_block_length(&self) -> usize {
        self.small_block_length
    }

    pub fn num_blocks(&self) -> usize {
        self.num_blocks
    }

    /// Desk-scale sanity checks standing in for the asymptotic rate
    /// conditions (l = o(r), r = o(n)). Violations are reported, not
    /// fatal.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.block_length * 10 > self.row_length {
            w.push(format!(
                "r = {} is not small relative to n = {} (want r <= n/10)",
                self.block_length, self.row_length
            ));
        }
        if self.small_block_length * 10 > self.block_length {
            w.push(format!(
                "l = {} is not small relative to r = {} (want l <= r/10)",
                self.small_block_length, self.block_length
            ));
        }
        w
    }
}

/// Split a flat data buffer into `m` block views plus the remainder
/// (observations beyond `r * m`, possibly empty). Concatenating blocks
/// and remainder reproduces the input exactly.
pub fn segment_blocks<'a>(
    data: &'a [f64],
    dim: usize,
    blocking: &Blocking,
) -> Result<(Vec<Block<'a>>, Block<'a>)> {
    let n = data.len() / dim;
    if data.len() % dim != 0 {
        return Err(Error::structure("data length not a multiple of dimension"));
    }
    if n != blocking.row_length() {
        return Err(Error::config(format!(
            "blocking expects row length {}, data has {}",
            blocking.row_length(),
            n
        )));
    }
    let r = blocking.block_length();
    let m = blocking.num_blocks();
    let blocks = (0..m)
        .map(|j| Block {
            data: &data[j * r * dim..(j + 1) * r * dim],
            dim,
        })
        .collect();
    let remainder = Block {
        data: &data[m * r * dim..],
        dim,
    };
    Ok((blocks, remainder))
}

/// A real-valued functional of blocks that depends only on the core and
/// vanishes on all-zero blocks.
pub trait ClusterFunctional: Send + Sync {
    fn name(&self) -> &str;
    fn evaluate(&self, block: &Block) -> f64;
}

/// Evaluate a functional on a finite chain given as a plain univariate
/// slice; empty chains count as the zero block.
pub fn evaluate_chain(f: &dyn ClusterFunctional, chain: &[f64]) -> f64 {
    if chain.is_empty() {
        0.0
    } else {
        f.evaluate(&Block::univariate(chain))
    }
}

type PointFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Tail array sum functional `g_phi(x) = sum_i phi(x_i)` for a point
/// function with `phi(0) = 0`. Core invariance is automatic.
#[derive(Clone)]
pub struct TailArraySum {
    name: String,
    dim: usize,
    phi: PointFn,
}

impl TailArraySum {
    pub fn new(name: impl Into<String>, dim: usize, phi: PointFn) -> Result<Self> {
        let zero = vec![0.0; dim];
        let at_zero = phi(&zero);
        if at_zero.abs() > 1e-12 {
            return Err(Error::config(format!(
                "tail array kernel must vanish at 0, got {}",
                at_zero
            )));
        }
        Ok(TailArraySum {
            name: name.into(),
            dim,
            phi,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The per-observation kernel.
    pub fn phi(&self, point: &[f64]) -> f64 {
        (self.phi)(point)
    }

    /// Indicator kernel `1_{(x, 1]}` (all coordinates strictly above the
    /// corresponding threshold), the building block of tail empirical
    /// processes.
    pub fn exceedance_indicator(x: &[f64]) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::config("exceedance indicator needs >= 1 threshold"));
        }
        let thresholds = x.to_vec();
        let name = format!(
            "ind({})",
            thresholds
                .iter()
                .map(|t| format!("{t}"))
                .collect::<Vec<_>>()
                .join(",")
        );
        let dim = thresholds.len();
        Self::new(name, dim, Arc::new(move |p: &[f64]| {
            if p.iter().zip(&thresholds).all(|(&v, &t)| v > t) {
                1.0
            } else {
                0.0
            }
        }))
    }

    /// Excess-over-deductible kernel `phi_t(x) = (x - t)_+` on
    /// univariate excesses (standardized total claimed amount).
    pub fn excess_over(t: f64) -> Result<Self> {
        if t < 0.0 {
            return Err(Error::config("deductible must be nonnegative"));
        }
        Self::new(
            format!("claim({t})"),
            1,
            Arc::new(move |p: &[f64]| if p[0] > t { p[0] - t } else { 0.0 }),
        )
    }

    /// Upcrossing kernel on paired-coordinate windows (d = 2): counts
    /// indices with first coordinate below `x` and second above `y`.
    pub fn upcrossing(x: f64, y: f64) -> Result<Self> {
        if x > y {
            return Err(Error::config(format!(
                "upcrossing needs x <= y, got x = {x}, y = {y}"
            )));
        }
        Self::new(
            format!("upcross({x},{y})"),
            2,
            Arc::new(move |p: &[f64]| if p[0] < x && p[1] > y { 1.0 } else { 0.0 }),
        )
    }

    /// `phi_1(x) = log(x) 1{x > 1}` on ratio-standardized data (Hill
    /// numerator).
    pub fn hill_log() -> Self {
        Self::new(
            "hill_log",
            1,
            Arc::new(|p: &[f64]| if p[0] > 1.0 { p[0].ln() } else { 0.0 }),
        )
        .expect("kernel vanishes at zero")
    }

    /// `phi_2(x) = 1{x > 1}` on ratio-standardized data (Hill
    /// denominator).
    pub fn hill_count() -> Self {
        Self::new(
            "hill_count",
            1,
            Arc::new(|p: &[f64]| if p[0] > 1.0 { 1.0 } else { 0.0 }),
        )
        .expect("kernel vanishes at zero")
    }
}

impl ClusterFunctional for TailArraySum {
    fn name(&self) -> &str {
        &self.name
    }

    fn evaluate(&self, block: &Block) -> f64 {
        debug_assert_eq!(block.dim(), self.dim);
        block.points().map(|p| (self.phi)(p)).sum()
    }
}

/// Indicator of the joint survival set: after the leading zeros the
/// next `k` components exist and component `j` strictly exceeds `t_j`.
/// Strict inequalities follow the open intervals `(t, infinity)` of the
/// set definition.
pub struct SurvivalIndicator {
    name: String,
    thresholds: Vec<f64>,
}

impl SurvivalIndicator {
    pub fn new(thresholds: &[f64]) -> Result<Self> {
        if thresholds.is_empty() {
            return Err(Error::config("survival indicator needs k >= 1 thresholds"));
        }
        if thresholds.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::config("survival thresholds must lie in [0, 1]"));
        }
        Ok(SurvivalIndicator {
            name: format!(
                "survival({})",
                thresholds
                    .iter()
                    .map(|t| format!("{t}"))
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            thresholds: thresholds.to_vec(),
        })
    }
}

impl ClusterFunctional for SurvivalIndicator {
    fn name(&self) -> &str {
        &self.name
    }

    fn evaluate(&self, block: &Block) -> f64 {
        debug_assert_eq!(block.dim(), 1);
        let n = block.len();
        let start = match (0..n).find(|&i| !block.is_zero_point(i)) {
            Some(s) => s,
            None => return 0.0,
        };
        let k = self.thresholds.len();
        if start + k > n {
            return 0.0;
        }
        for (j, &t) in self.thresholds.iter().enumerate() {
            if block.point(start + j)[0] <= t {
                return 0.0;
            }
        }
        1.0
    }
}

/// Indicator of the order-statistic set: for every `j <= k` at least
/// `j` components strictly exceed `t_j`.
pub struct OrderStatIndicator {
    name: String,
    thresholds: Vec<f64>,
}

impl OrderStatIndicator {
    pub fn new(thresholds: &[f64]) -> Result<Self> {
        if thresholds.is_empty() {
            return Err(Error::config("order-stat indicator needs k >= 1 thresholds"));
        }
        if thresholds.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::config("order-stat thresholds must lie in [0, 1]"));
        }
        Ok(OrderStatIndicator {
            name: format!(
                "orderstat({})",
                thresholds
                    .iter()
                    .map(|t| format!("{t}"))
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            thresholds: thresholds.to_vec(),
        })
    }
}

impl ClusterFunctional for OrderStatIndicator {
    fn name(&self) -> &str {
        &self.name
    }

    fn evaluate(&self, block: &Block) -> f64 {
        debug_assert_eq!(block.dim(), 1);
        for (j, &t) in self.thresholds.iter().enumerate() {
            let need = j + 1;
            let count = block.points().filter(|p| p[0] > t).count();
            if count < need {
                return 0.0;
            }
        }
        1.0
    }
}

/// Indicator of the all-cluster-values set: core length is exactly `j`
/// and core component `i` lies in the closed interval `[0, t_i]`.
pub struct AllValuesIndicator {
    name: String,
    thresholds: Vec<f64>,
}

impl AllValuesIndicator {
    pub fn new(core_length: usize, thresholds: &[f64]) -> Result<Self> {
        if core_length == 0 {
            return Err(Error::config("all-values indicator needs core length >= 1"));
        }
        if thresholds.len() != core_length {
            return Err(Error::config(format!(
                "all-values indicator needs {} thresholds, got {}",
                core_length,
                thresholds.len()
            )));
        }
        Ok(AllValuesIndicator {
            name: format!(
                "allvalues({};{})",
                core_length,
                thresholds
                    .iter()
                    .map(|t| format!("{t}"))
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            thresholds: thresholds.to_vec(),
        })
    }

    pub fn core_length(&self) -> usize {
        self.thresholds.len()
    }
}

impl ClusterFunctional for AllValuesIndicator {
    fn name(&self) -> &str {
        &self.name
    }

    fn evaluate(&self, block: &Block) -> f64 {
        debug_assert_eq!(block.dim(), 1);
        let span = extract_core(block);
        if span.len != self.thresholds.len() {
            return 0.0;
        }
        for (i, &t) in self.thresholds.iter().enumerate() {
            let v = block.point(span.start + i)[0];
            if !(0.0..=t).contains(&v) {
                return 0.0;
            }
        }
        1.0
    }
}

/// Cluster maximum `max_i x_i` on univariate blocks.
pub struct ClusterMax;

impl ClusterFunctional for ClusterMax {
    fn name(&self) -> &str {
        "cluster_max"
    }

    fn evaluate(&self, block: &Block) -> f64 {
        debug_assert_eq!(block.dim(), 1);
        block.points().map(|p| p[0]).fold(0.0, f64::max)
    }
}

/// Core length `L(x)` as a real-valued functional.
pub struct ClusterLength;

impl ClusterFunctional for ClusterLength {
    fn name(&self) -> &str {
        "cluster_length"
    }

    fn evaluate(&self, block: &Block) -> f64 {
        extract_core(block).len as f64
    }
}
