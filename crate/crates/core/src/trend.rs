//! Per-scale maxima and the growth test used to flag non-uniform constants.

use serde::{Deserialize, Serialize};

/// Largest value observed at one scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalePoint {
    pub scale: f64,
    pub sup: f64,
    pub count: usize,
}

/// Groups `(scale, value)` pairs by scale (relative tolerance `1e-9`) and
/// keeps the maximum of each group, ordered from coarse to fine.
pub fn scale_trend(pairs: &[(f64, f64)]) -> Vec<ScalePoint> {
    let mut out: Vec<ScalePoint> = Vec::new();
    for &(scale, value) in pairs {
        match out
            .iter_mut()
            .find(|pt| (pt.scale - scale).abs() <= 1e-9 * scale.abs().max(pt.scale.abs()))
        {
            Some(pt) => {
                pt.sup = pt.sup.max(value);
                pt.count += 1;
            }
            None => out.push(ScalePoint {
                scale,
                sup: value,
                count: 1,
            }),
        }
    }
    out.sort_by(|a, b| b.scale.total_cmp(&a.scale));
    out
}

/// True when the per-scale maxima never decrease from coarse to fine over
/// at least three scales and the finest exceeds the coarsest by more than
/// the factor `1 + band`.
pub fn trend_growing(trend: &[ScalePoint], band: f64) -> bool {
    if trend.len() < 3 {
        return false;
    }
    let monotone = trend.windows(2).all(|w| w[1].sup >= w[0].sup);
    let first = trend[0].sup;
    let last = trend[trend.len() - 1].sup;
    monotone && last > first * (1.0 + band)
}
