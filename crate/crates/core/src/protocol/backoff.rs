//! Back-off on noisy analog CQI.

use crate::analysis::effective_throughput;
use crate::error::{Error, Result};
use crate::special::q_function;

const SCAN_PANELS: usize = 1000;
const EDGE: f64 = 1e-9;

/// `β = 1 + ρ ln n − ρ (p − 2) ln ln n`, the typical best SINR on a beam plus one.
pub fn rbf_beta(n: usize, p: usize, rho: f64) -> Result<f64> {
    if n < 2 || p == 0 || !(rho > 0.0) {
        return Err(Error::Domain(format!(
            "need n >= 2, p >= 1, rho > 0 (got n = {n}, p = {p}, rho = {rho})"
        )));
    }
    let ln_n = (n as f64).ln();
    let beta = 1.0 + rho * ln_n - rho * (p as f64 - 2.0) * ln_n.ln();
    if !beta.is_finite() {
        return Err(Error::Domain(format!("beta is not finite for n = {n}, p = {p}")));
    }
    Ok(beta)
}

/// `1 − Q(Δ/σ_w)`: probability that the backed-off value does not exceed the truth.
pub fn backoff_efficiency(delta: f64, sigma_w: f64) -> Result<f64> {
    if !(sigma_w > 0.0) || !(delta >= 0.0) {
        return Err(Error::Domain(format!(
            "need sigma_w > 0 and delta >= 0 (got sigma_w = {sigma_w}, delta = {delta})"
        )));
    }
    Ok(1.0 - q_function(delta / sigma_w))
}

/// Left side minus right side of the stationarity condition of the effective
/// throughput in `Δ`:
/// `Q(Δ/σ) + (β − Δ)/(√(2π) σ) · exp(−Δ²/2σ²) · ln(β − Δ) − 1`.
pub fn backoff_condition(delta: f64, beta: f64, sigma_w: f64) -> f64 {
    let z = delta / sigma_w;
    let density = (-0.5 * z * z).exp() / ((2.0 * std::f64::consts::PI).sqrt() * sigma_w);
    q_function(z) + (beta - delta) * density * (beta - delta).ln() - 1.0
}

/// Back-off `Δ*` maximizing `(1 − Q(Δ/σ_w)) · log2(β − Δ)`.
///
/// Scans `(0, β − 1)` for sign changes of [`backoff_condition`], bisects every
/// bracket and keeps the root with the largest effective throughput.
pub fn optimal_backoff(beta: f64, sigma_w: f64) -> Result<f64> {
    if !(beta > 2.0) || !beta.is_finite() {
        return Err(Error::Domain(format!("back-off needs beta > 2, got {beta}")));
    }
    if !(sigma_w > 0.0) || !sigma_w.is_finite() {
        return Err(Error::Domain(format!("back-off needs sigma_w > 0, got {sigma_w}")));
    }
    let g = |d: f64| backoff_condition(d, beta, sigma_w);
    let lo = EDGE;
    let hi = beta - 1.0 - EDGE;
    let step = (hi - lo) / SCAN_PANELS as f64;

    let mut best: Option<(f64, f64)> = None;
    let mut a = lo;
    let mut ga = g(a);
    for i in 1..=SCAN_PANELS {
        let b = if i == SCAN_PANELS { hi } else { lo + step * i as f64 };
        let gb = g(b);
        if ga == 0.0 || ga.signum() != gb.signum() {
            let root = if ga == 0.0 { a } else { bisect(&g, a, ga, b) };
            let value = effective_throughput(beta, root, sigma_w, 1)?;
            if best.is_none_or(|(_, v)| value > v) {
                best = Some((root, value));
            }
        }
        a = b;
        ga = gb;
    }
    best.map(|(root, _)| root).ok_or(Error::NoBackoffRoot { beta, sigma_w })
}

fn bisect<F: Fn(f64) -> f64>(g: &F, mut a: f64, ga: f64, mut b: f64) -> f64 {
    let sign_a = ga.signum();
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if gm.signum() == sign_a {
            a = mid;
        } else {
            b = mid;
        }
    }
    // endpoint with the smaller residual
    if g(a).abs() <= g(b).abs() {
        a
    } else {
        b
    }
}

/// Back-off operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackoffParams {
    pub beta: f64,
    pub sigma_w: f64,
    pub delta: f64,
    pub eta: f64,
}

impl BackoffParams {
    pub fn optimal(beta: f64, sigma_w: f64) -> Result<Self> {
        let delta = optimal_backoff(beta, sigma_w)?;
        Ok(Self {
            beta,
            sigma_w,
            delta,
            eta: backoff_efficiency(delta, sigma_w)?,
        })
    }
}
