//! Small binomial-proportion helpers.

/// Standard error of a proportion `p` estimated from `n` trials.
pub fn binomial_stderr(p: f64, n: u64) -> f64 {
    if n == 0 {
        return f64::NAN;
    }
    libm::sqrt((p * (1.0 - p)).max(0.0) / n as f64)
}

/// `successes / trials`, or NaN when there were no trials.
pub fn ratio(successes: u64, trials: u64) -> f64 {
    if trials == 0 {
        f64::NAN
    } else {
        successes as f64 / trials as f64
    }
}

/// Whether an observed rate lies within `k` binomial standard errors of an
/// expected probability. The error is computed from the expected value, so
/// a degenerate expectation (0 or 1) demands an exact match.
pub fn within_sigma(observed: f64, expected: f64, n: u64, k: f64) -> bool {
    let sigma = binomial_stderr(expected, n);
    (observed - expected).abs() <= k * sigma
}
