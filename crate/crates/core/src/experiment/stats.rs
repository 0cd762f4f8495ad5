use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxStats {
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("box statistics of an empty sample")]
    EmptyInput,
    #[error("sample contains a non-finite value")]
    NonFinite,
}

/// Quantile of sorted data by linear interpolation between order statistics.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Quartiles, 1.5 IQR whiskers and outliers.
pub fn box_stats(values: &[f64]) -> Result<BoxStats, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q25 = quantile(&sorted, 0.25);
    let median = quantile(&sorted, 0.5);
    let q75 = quantile(&sorted, 0.75);
    let reach = 1.5 * (q75 - q25);
    let (lo_fence, hi_fence) = (q25 - reach, q75 + reach);
    let inside = |v: &&f64| (lo_fence..=hi_fence).contains(*v);
    let whisker_low = *sorted.iter().find(inside).expect("quartiles lie inside the fences");
    let whisker_high = *sorted.iter().rev().find(inside).expect("quartiles lie inside the fences");
    let outliers = sorted.iter().copied().filter(|v| !(lo_fence..=hi_fence).contains(v)).collect();
    Ok(BoxStats { median, q25, q75, whisker_low, whisker_high, outliers })
}
