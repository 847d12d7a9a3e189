//! Order-statistic quantiles.
//!
//! Uses selection rather than a full sort. For `n` values and level `q`,
//! the fractional rank is `h = (n - 1) q`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantileMethod {
    /// `x[floor(h)] + frac(h) * (x[floor(h) + 1] - x[floor(h)])`
    #[default]
    LinearInterpolation,
    /// `x[round(h)]`, halves rounded up.
    Nearest,
}

/// Quantile of `values` at level `q` in `[0, 1]`. Reorders `values`.
/// Returns `None` for an empty slice.
pub fn quantile_in_place(values: &mut [f64], q: f64, method: QuantileMethod) -> Option<f64> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let q = q.clamp(0.0, 1.0);
    let h = (n - 1) as f64 * q;
    match method {
        QuantileMethod::Nearest => {
            let idx = ((h + 0.5).floor() as usize).min(n - 1);
            let (_, v, _) = values.select_nth_unstable_by(idx, f64::total_cmp);
            Some(*v)
        }
        QuantileMethod::LinearInterpolation => {
            let lo = (h.floor() as usize).min(n - 1);
            let frac = h - lo as f64;
            let (_, lo_val, upper) = values.select_nth_unstable_by(lo, f64::total_cmp);
            let lo_val = *lo_val;
            if frac == 0.0 || upper.is_empty() {
                return Some(lo_val);
            }
            let hi_val = upper.iter().copied().fold(f64::INFINITY, f64::min);
            Some(lo_val + frac * (hi_val - lo_val))
        }
    }
}

/// Quantile of `values` without modifying them.
pub fn quantile(values: &[f64], q: f64, method: QuantileMethod) -> Option<f64> {
    let mut scratch = values.to_vec();
    quantile_in_place(&mut scratch, q, method)
}
