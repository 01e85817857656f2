use crate::error::{Error, Result};
use crate::rbf::sinr_ccdf_inv;

/// SINR threshold that makes `s` of `n` users strong on average.
pub fn analog_threshold(s: usize, n: usize, rho: f64, p: usize) -> Result<f64> {
    if s == 0 || s > n {
        return Err(Error::Domain(format!("need 1 <= s <= n (got s = {s}, n = {n})")));
    }
    sinr_ccdf_inv(s as f64 / n as f64, rho, p)
}

/// Ascending digital thresholds `ζ_1 < … < ζ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSet {
    zetas: Vec<f64>,
}

impl ThresholdSet {
    pub fn new(zetas: Vec<f64>) -> Result<Self> {
        if zetas.is_empty() {
            return Err(Error::Domain("threshold set must not be empty".into()));
        }
        if zetas.iter().any(|z| !(*z >= 0.0) || !z.is_finite()) {
            return Err(Error::Domain("thresholds must be finite and >= 0".into()));
        }
        if zetas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("thresholds must be strictly ascending".into()));
        }
        Ok(Self { zetas })
    }

    pub fn zetas(&self) -> &[f64] {
        &self.zetas
    }

    pub fn len(&self) -> usize {
        self.zetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zetas.is_empty()
    }

    /// Half-open interval `[ζ_i, ζ_{i+1})`; the last one is unbounded.
    pub fn interval(&self, i: usize) -> (f64, f64) {
        let hi = self.zetas.get(i + 1).copied().unwrap_or(f64::INFINITY);
        (self.zetas[i], hi)
    }
}

/// `ζ_i = F̄⁻¹(s (k − i + 1) / n)` for `i = 1..k`.
pub fn digital_thresholds(s: usize, n: usize, k: usize, rho: f64, p: usize) -> Result<ThresholdSet> {
    if k == 0 || s == 0 {
        return Err(Error::Domain(format!("need k >= 1 and s >= 1 (got k = {k}, s = {s})")));
    }
    if s * k > n {
        return Err(Error::Domain(format!(
            "s * k = {} exceeds n = {n}; the lowest threshold would need a CCDF above 1",
            s * k
        )));
    }
    let zetas = (1..=k)
        .map(|i| sinr_ccdf_inv((s * (k - i + 1)) as f64 / n as f64, rho, p))
        .collect::<Result<Vec<_>>>()?;
    ThresholdSet::new(zetas)
}
