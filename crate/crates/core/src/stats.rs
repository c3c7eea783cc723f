//! Small numeric helpers shared by the curve and bootstrap code.

/// Arithmetic mean; caller guarantees a non-empty slice.
pub(crate) fn mean(values: &[f64]) -> f64 {
    debug_assert!(!values.is_empty());
    values.iter().sum::<f64>() / values.len() as f64
}

/// Percentile with linear interpolation between order statistics
/// (`p` in [0, 100]); caller guarantees a non-empty slice.
pub(crate) fn percentile(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p / 100.0;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * (h - lo as f64)
    }
}

/// Sorts a sample and returns the `(2.5%, 97.5%)` percentile band.
pub(crate) fn central_band(values: &mut [f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("NaN in bootstrap sample"));
    Some((percentile(values, 2.5), percentile(values, 97.5)))
}
