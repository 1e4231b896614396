//! Small sample-statistics helpers used by the Monte Carlo code.

/// A sample mean together with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
}

impl Estimate {
    /// Number of standard errors separating the estimate from `value`.
    pub fn z_score(&self, value: f64) -> f64 {
        if self.std_err == 0.0 {
            if self.mean == value {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mean - value).abs() / self.std_err
        }
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; zero for fewer than two samples.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Mean with the naive i.i.d. standard error.
pub fn iid_estimate(xs: &[f64]) -> Estimate {
    Estimate {
        mean: mean(xs),
        std_err: (variance(xs) / xs.len() as f64).sqrt(),
    }
}

/// Batch-means estimate for a correlated time series.
///
/// The series is cut into `n_batches` contiguous batches of equal length
/// (a trailing remainder is dropped) and the error is taken from the spread
/// of the batch averages.
pub fn batch_means(xs: &[f64], n_batches: usize) -> Estimate {
    let n_batches = n_batches.clamp(1, xs.len().max(1));
    let len = xs.len() / n_batches;
    if len == 0 || n_batches < 2 {
        return iid_estimate(xs);
    }
    let batches: Vec<f64> = xs.chunks_exact(len).take(n_batches).map(mean).collect();
    let est = iid_estimate(&batches);
    Estimate {
        mean: mean(&xs[..len * n_batches]),
        std_err: est.std_err,
    }
}

/// Median of the finite values; `None` when there are none.
pub fn median(xs: impl IntoIterator<Item = f64>) -> Option<f64> {
    let mut v: Vec<f64> = xs.into_iter().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batch_means_of_constant_has_zero_error() {
        let xs = vec![0.25; 100];
        let e = batch_means(&xs, 10);
        assert_eq!(e.mean, 0.25);
        assert_eq!(e.std_err, 0.0);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median([3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median([4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median([f64::NAN]), None);
    }
}
