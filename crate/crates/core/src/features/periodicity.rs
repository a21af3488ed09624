use crate::events::AccountTimeline;

/// Largest lag, in days, scanned for repetition.
pub const MAX_LAG_DAYS: usize = 30;
/// Activity spanning fewer days than this is not scored.
pub const MIN_SPAN_DAYS: usize = 14;

/// Event counts per day bucket of the timeline's window.
pub fn daily_counts(timeline: &AccountTimeline) -> Vec<f64> {
    let mut series = vec![0.0; timeline.window.n_days()];
    for e in &timeline.events {
        if let Some(d) = timeline.window.day_index(e.occurred_at) {
            series[d] += 1.0;
        }
    }
    series
}

/// Autocorrelation of a mean-centred series at `lag`, with the lagged
/// cross-product averaged over its `n - lag` terms and divided by the
/// variance.
pub fn autocorrelation(series: &[f64], lag: usize) -> Option<f64> {
    let n = series.len();
    if lag == 0 || lag >= n {
        return None;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let var = series.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
    if var <= 0.0 {
        return None;
    }
    let cov = (0..n - lag)
        .map(|t| (series[t] - mean) * (series[t + lag] - mean))
        .sum::<f64>()
        / (n - lag) as f64;
    Some(cov / var)
}

/// Strength of fixed-interval repetition in the daily activity series, in `[0, 1]`.
pub fn periodicity(timeline: &AccountTimeline) -> f64 {
    let series = daily_counts(timeline);
    let active: Vec<usize> = series
        .iter()
        .enumerate()
        .filter(|(_, c)| **c > 0.0)
        .map(|(i, _)| i)
        .collect();
    let span = match (active.first(), active.last()) {
        (Some(a), Some(b)) => b - a + 1,
        _ => 0,
    };
    if span < MIN_SPAN_DAYS {
        return 0.0;
    }
    (1..=MAX_LAG_DAYS)
        .filter_map(|lag| autocorrelation(&series, lag))
        .fold(0.0f64, f64::max)
        .clamp(0.0, 1.0)
}
