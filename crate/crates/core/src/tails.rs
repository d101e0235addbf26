//! Empirical tail probabilities `ℙ(sup_n X_n ≥ R)` with Wilson intervals and
//! log-linear shape fits.

use crate::error::{Error, Result};
use crate::harness::{linear_fit, PathRecord};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959963984540054;
/// Below this many paths the shape fit is not attempted.
pub const MIN_FIT_PATHS: usize = 100;
/// A threshold enters the fit when it has at least this many exceedances.
pub const MIN_EXCEEDANCES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailQuantity {
    SupL2,
    SupH1,
    SupLinf,
    SupUtilde,
}

/// Abscissa against which `log ℙ` is regressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailShape {
    /// `−R²`: Gaussian-type tails of the mass and `ℍ¹` suprema.
    NegSquare,
    /// `−R⁴`: the `L^∞` supremum in one dimension.
    NegFourth,
    /// `−log log R`: iterated-logarithmic tails in two dimensions.
    NegLogLog,
    /// `−log R`: polynomial tails.
    NegLog,
}

impl TailShape {
    /// Shape matching a quantity in dimension `dim`.
    pub fn for_quantity(q: TailQuantity, dim: usize) -> TailShape {
        match (q, dim) {
            (TailQuantity::SupL2 | TailQuantity::SupH1, _) => TailShape::NegSquare,
            (TailQuantity::SupLinf, 1) => TailShape::NegFourth,
            (TailQuantity::SupLinf, _) => TailShape::NegLogLog,
            (TailQuantity::SupUtilde, _) => TailShape::NegLog,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TailShape::NegSquare => "-R^2",
            TailShape::NegFourth => "-R^4",
            TailShape::NegLogLog => "-loglogR",
            TailShape::NegLog => "-logR",
        }
    }

    pub fn abscissa(self, r: f64) -> f64 {
        match self {
            TailShape::NegSquare => -r * r,
            TailShape::NegFourth => -r.powi(4),
            TailShape::NegLogLog => -r.ln().ln(),
            TailShape::NegLog => -r.ln(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailPoint {
    pub r: f64,
    pub exceedances: usize,
    pub p_hat: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
}

/// `log p̂ ≈ intercept + η·x(R)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeFit {
    pub shape: TailShape,
    pub eta: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points_used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailCurve {
    pub n_paths: usize,
    pub points: Vec<TailPoint>,
    pub fit: Option<ShapeFit>,
}

/// 95% Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: usize, n: usize) -> (f64, f64) {
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n_f;
    let centre = (p + z2 / (2.0 * n_f)) / denom;
    let half = Z95 * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// The supremum of `quantity` along a path; overflowed paths count as `+∞`.
pub fn path_supremum(record: &PathRecord, quantity: TailQuantity) -> f64 {
    if record.diverged() {
        return f64::INFINITY;
    }
    match quantity {
        TailQuantity::SupL2 => record.sup.l2,
        TailQuantity::SupH1 => record.sup.h1,
        TailQuantity::SupLinf => record.sup.linf,
        TailQuantity::SupUtilde => record.sup.utilde,
    }
}

/// Tail curve of per-path suprema, with a shape fit over the resolved range
/// (`p̂ ≤ ½` and at least [`MIN_EXCEEDANCES`] exceedances) when there are at
/// least [`MIN_FIT_PATHS`] samples.
pub fn tail_curve(samples: &[f64], thresholds: &[f64], shape: TailShape) -> Result<TailCurve> {
    if samples.is_empty() {
        return Err(Error::config("tail estimate needs at least one path"));
    }
    if thresholds.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::config("tail thresholds must be strictly increasing"));
    }
    let n = samples.len();
    let points: Vec<TailPoint> = thresholds
        .iter()
        .map(|&r| {
            let k = samples.iter().filter(|&&s| s >= r).count();
            let (lo, hi) = wilson_interval(k, n);
            TailPoint {
                r,
                exceedances: k,
                p_hat: k as f64 / n as f64,
                wilson_lo: lo,
                wilson_hi: hi,
            }
        })
        .collect();
    let fit = if n < MIN_FIT_PATHS {
        log::info!("{n} paths: shape fit needs at least {MIN_FIT_PATHS}");
        None
    } else {
        let (x, y): (Vec<f64>, Vec<f64>) = points
            .iter()
            .filter(|p| p.p_hat <= 0.5 && p.exceedances >= MIN_EXCEEDANCES)
            .map(|p| (shape.abscissa(p.r), p.p_hat.ln()))
            .filter(|(x, _)| x.is_finite())
            .unzip();
        if x.len() < 3 {
            None
        } else {
            linear_fit(&x, &y).ok().map(|f| ShapeFit {
                shape,
                eta: f.slope,
                intercept: f.intercept,
                r_squared: f.r_squared,
                points_used: x.len(),
            })
        }
    };
    Ok(TailCurve { n_paths: n, points, fit })
}

/// Tail of `quantity` over the records, fitted with the shape for `dim`.
pub fn estimate_tail(records: &[PathRecord], quantity: TailQuantity, thresholds: &[f64], dim: usize) -> Result<TailCurve> {
    let samples: Vec<f64> = records.iter().map(|r| path_supremum(r, quantity)).collect();
    tail_curve(&samples, thresholds, TailShape::for_quantity(quantity, dim))
}
