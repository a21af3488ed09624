//! Small descriptive statistics shared across modules.

use crate::scalar::Scalar;

/// Median; even-length input averages the two central values.
pub fn median<F: Scalar>(values: &[F]) -> Option<F> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("median of NaN"));
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) * F::half()
    })
}

/// Linearly interpolated quantile over sorted data, `q` in `[0, 1]`.
pub fn quantile_sorted<F: Scalar>(sorted: &[F], q: F) -> Option<F> {
    let n = sorted.len();
    if n == 0 {
        return None;
    }
    let pos = q * F::from_usize_lossy(n - 1);
    let lo = pos.floor();
    let i = lo.to_usize().unwrap_or(0).min(n - 1);
    let j = (i + 1).min(n - 1);
    Some(sorted[i] + (sorted[j] - sorted[i]) * (pos - lo))
}

pub fn mean<F: Scalar>(values: &[F]) -> Option<F> {
    (!values.is_empty()).then(|| values.iter().copied().sum::<F>() / F::from_usize_lossy(values.len()))
}

/// Population (divide by n) standard deviation.
pub fn population_std<F: Scalar>(values: &[F]) -> Option<F> {
    let m = mean(values)?;
    let var = values.iter().map(|&v| (v - m) * (v - m)).sum::<F>() / F::from_usize_lossy(values.len());
    Some(var.sqrt())
}

/// Sample (divide by n - 1) standard deviation; zero for a single value.
pub fn sample_std<F: Scalar>(values: &[F]) -> Option<F> {
    let m = mean(values)?;
    if values.len() < 2 {
        return Some(F::zero());
    }
    let var = values.iter().map(|&v| (v - m) * (v - m)).sum::<F>() / F::from_usize_lossy(values.len() - 1);
    Some(var.sqrt())
}
