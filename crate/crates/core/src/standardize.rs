//! Standardized excesses: turning a raw stationary series into a
//! triangular-array row in which non-extreme observations are exactly 0.

use std::path::Path;

use crate::blocks::{Block, Blocking, segment_blocks};
use crate::error::{Error, Result};

/// A raw univariate series, optionally tagged with the generating model
/// so oracle lookups can find its tail chain.
#[derive(Clone, Debug)]
pub struct RawSeries {
    pub values: Vec<f64>,
    pub declared_model: Option<String>,
}

impl RawSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::structure("series must be nonempty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::structure("series contains NaN or infinite values"));
        }
        Ok(RawSeries {
            values,
            declared_model: None,
        })
    }

    pub fn with_model(mut self, model: impl Into<String>) -> Self {
        self.declared_model = Some(model.into());
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Read a single-column CSV (`value` header optional).
    pub fn from_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if lineno == 0 && line.eq_ignore_ascii_case("value") {
                continue;
            }
            let v: f64 = line
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: not a number: {line:?}", lineno + 1)))?;
            if !v.is_finite() {
                return Err(Error::Parse(format!("line {}: non-finite value", lineno + 1)));
            }
            values.push(v);
        }
        RawSeries::new(values)
    }

    pub fn to_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::with_capacity(self.values.len() * 12 + 8);
        out.push_str("value\n");
        for v in &self.values {
            out.push_str(&format!("{v}\n"));
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// How a row of excesses was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExcessMode {
    /// `((X_i - u) / a)_+`, univariate.
    Shifted,
    /// Sliding windows of `d` consecutive shifted excesses.
    Window,
    /// `X_i / u` where `X_i > u`, else 0.
    Ratio,
}

/// One triangular-array row of standardized excesses plus its threshold
/// metadata. Points of dimension `dim` are stored flat.
#[derive(Clone, Debug)]
pub struct ExcessArray {
    data: Vec<f64>,
    dim: usize,
    pub threshold: f64,
    pub scale: f64,
    pub mode: ExcessMode,
    exceed_prob: f64,
}

impl ExcessArray {
    fn finish(data: Vec<f64>, dim: usize, threshold: f64, scale: f64, mode: ExcessMode) -> Self {
        let rows = data.len() / dim;
        let nonzero = data
            .chunks_exact(dim)
            .filter(|p| p.iter().any(|&x| x != 0.0))
            .count();
        ExcessArray {
            data,
            dim,
            threshold,
            scale,
            mode,
            exceed_prob: nonzero as f64 / rows as f64,
        }
    }

    /// Number of points in the row.
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Empirical exceedance probability `v_hat`.
    pub fn exceed_prob(&self) -> f64 {
        self.exceed_prob
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_block(&self) -> Block<'_> {
        Block::new(&self.data, self.dim).expect("internal layout is consistent")
    }

    pub fn segment(&self, blocking: &Blocking) -> Result<(Vec<Block<'_>>, Block<'_>)> {
        segment_blocks(&self.data, self.dim, blocking)
    }
}

/// `X_{n,i} = ((X_i - u) / a)_+`. Entries at or below the threshold map
/// to exactly 0.
pub fn univariate_excesses(series: &RawSeries, threshold: f64, scale: f64) -> Result<ExcessArray> {
    if scale <= 0.0 {
        return Err(Error::config(format!("scale must be > 0, got {scale}")));
    }
    let data = series
        .values
        .iter()
        .map(|&x| if x > threshold { (x - threshold) / scale } else { 0.0 })
        .collect();
    Ok(ExcessArray::finish(data, 1, threshold, scale, ExcessMode::Shifted))
}

/// Vectors of `d` consecutive standardized excesses. The row shortens to
/// `n - d + 1` so no window indexes past the series.
pub fn window_excesses(
    series: &RawSeries,
    threshold: f64,
    scale: f64,
    d: usize,
) -> Result<ExcessArray> {
    if d == 0 {
        return Err(Error::config("window width must be >= 1"));
    }
    if series.len() < d {
        return Err(Error::config(format!(
            "series of length {} is shorter than window width {}",
            series.len(),
            d
        )));
    }
    if scale <= 0.0 {
        return Err(Error::config(format!("scale must be > 0, got {scale}")));
    }
    let uni: Vec<f64> = series
        .values
        .iter()
        .map(|&x| if x > threshold { (x - threshold) / scale } else { 0.0 })
        .collect();
    let rows = series.len() - d + 1;
    let mut data = Vec::with_capacity(rows * d);
    for i in 0..rows {
        data.extend_from_slice(&uni[i..i + d]);
    }
    Ok(ExcessArray::finish(data, d, threshold, scale, ExcessMode::Window))
}

/// `X_{n,i} = (X_i / u) 1{X_i > u}` for heavy-tail (Hill) work.
pub fn ratio_excesses(series: &RawSeries, threshold: f64) -> Result<ExcessArray> {
    if threshold <= 0.0 {
        return Err(Error::config(format!(
            "ratio threshold must be > 0, got {threshold}"
        )));
    }
    let data = series
        .values
        .iter()
        .map(|&x| if x > threshold { x / threshold } else { 0.0 })
        .collect();
    Ok(ExcessArray::finish(data, 1, threshold, 1.0, ExcessMode::Ratio))
}

/// How the scale `a_n` is derived from the threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScaleConvention {
    /// Uniform margins: `a = 1 - u`, so conditional excesses are U(0,1].
    UniformMargin,
    /// Heavy tails: `a = u` (scale-invariant default).
    HeavyTail,
}

/// Pick `(u, a)` so that roughly a `target_v` fraction of the sample
/// exceeds `u` (type-7 empirical quantile).
pub fn threshold_from_quantile(
    series: &RawSeries,
    target_v: f64,
    convention: ScaleConvention,
) -> Result<(f64, f64)> {
    if !(0.0 < target_v && target_v < 1.0) {
        return Err(Error::config(format!(
            "target exceedance probability must be in (0, 1), got {target_v}"
        )));
    }
    let mut sorted = series.values.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let first = sorted[0];
    if sorted[sorted.len() - 1] == first {
        return Err(Error::undefined("degenerate sample: all values equal"));
    }
    let u = crate::stats::quantile_type7(&sorted, 1.0 - target_v);
    let a = match convention {
        ScaleConvention::UniformMargin => 1.0 - u,
        ScaleConvention::HeavyTail => u,
    };
    if a <= 0.0 {
        return Err(Error::config(format!(
            "derived scale {a} is not positive (threshold {u})"
        )));
    }
    Ok((u, a))
}
