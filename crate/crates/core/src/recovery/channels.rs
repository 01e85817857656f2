//! Number of shared feedback channels needed for support recovery.

use crate::error::{Error, Result};

/// `ceil((c/2) · s · ln(n − s))`.
pub fn required_channels(c_half: f64, s: usize, n: usize) -> Result<usize> {
    if !(c_half > 0.0) || !c_half.is_finite() {
        return Err(Error::Domain(format!("c/2 must be positive, got {c_half}")));
    }
    if s == 0 || n <= s {
        return Err(Error::Domain(format!("need n > s >= 1 (got s = {s}, n = {n})")));
    }
    let r = (c_half * s as f64 * ((n - s) as f64).ln()).ceil();
    Ok((r as usize).max(1))
}

/// `(ln ln ln n) · ln n`: channel growth when `s` scales as `ln ln ln n`.
pub fn asymptotic_channels(n: usize) -> Result<f64> {
    let ln = (n as f64).ln();
    let lll = ln.ln().ln();
    if n < 16 || !(lll > 0.0) {
        return Err(Error::Domain(format!(
            "need n >= 16 so that ln ln ln n > 0 (got n = {n})"
        )));
    }
    Ok(lll * ln)
}

/// Total channels when users are split into `k` groups that each run their
/// own recovery: `k · ceil(c'/2 · (s/k) · ln(n/k))`.
pub fn block_diag_channels(c_half_prime: f64, s: usize, n: usize, k: usize) -> Result<usize> {
    if !(c_half_prime > 0.0) || !c_half_prime.is_finite() {
        return Err(Error::Domain(format!("c'/2 must be positive, got {c_half_prime}")));
    }
    if k == 0 || s == 0 || !s.is_multiple_of(k) {
        return Err(Error::Domain(format!(
            "group count k = {k} must divide the sparsity s = {s}"
        )));
    }
    if n < k {
        return Err(Error::Domain(format!("more groups ({k}) than users ({n})")));
    }
    let per_block = (c_half_prime * (s / k) as f64 * (n as f64 / k as f64).ln()).ceil();
    Ok(k * (per_block as usize).max(1))
}
