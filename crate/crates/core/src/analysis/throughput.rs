use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mean_ci;
use crate::channel::{gen_downlink, FeedbackKind};
use crate::error::{Error, Result};
use crate::protocol::{
    rbf_beta, realized_rate, run_analog_round, run_digital_round, ChannelRealization, ProtocolConfig, ProtocolPlan,
    ThresholdSet,
};
use crate::rbf::{ccdf_unchecked, compute_sinr, gen_beams};
use crate::rng::Rng;
use crate::special::q_function;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputEstimate {
    /// Bits/s/Hz.
    pub value: f64,
    pub ci_half_width: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThroughputProtocol {
    /// Best SINR per beam over all users, known perfectly.
    GenieDedicated,
    /// Dedicated channels, every user reports its best-beam SINR without noise.
    NoiselessDedicated,
    /// Dedicated channels with link noise and a back-off sized for it.
    NoisyDedicated,
    AnalogShared,
    DigitalShared,
}

/// Monte Carlo sum rate. Trial `t` uses the stream `rng.derive(t)`, so the
/// estimate does not depend on how trials are spread over threads.
pub fn rbf_throughput_mc(
    cfg: &ProtocolConfig,
    protocol: ThroughputProtocol,
    trials: usize,
    rng: &Rng,
) -> Result<ThroughputEstimate> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    let rates: Vec<f64> = match protocol {
        ThroughputProtocol::GenieDedicated => (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut trng = rng.derive(t as u64);
                let h = gen_downlink(cfg.n, cfg.p, &mut trng)?;
                let beams = gen_beams(cfg.p, &mut trng)?;
                let sinr = compute_sinr(&h, &beams, cfg.rho_dl)?;
                Ok((0..cfg.p)
                    .map(|m| sinr.column_max(m).ln_1p() / std::f64::consts::LN_2)
                    .sum())
            })
            .collect::<Result<_>>()?,
        _ => {
            let mut c = cfg.clone();
            match protocol {
                ThroughputProtocol::NoiselessDedicated => {
                    c.feedback = FeedbackKind::DedicatedDiagonal;
                    c.rho_ul = f64::INFINITY;
                }
                ThroughputProtocol::NoisyDedicated => c.feedback = FeedbackKind::DedicatedDiagonal,
                _ => {}
            }
            let plan = ProtocolPlan::new(&c)?;
            let digital = protocol == ThroughputProtocol::DigitalShared;
            (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut trng = rng.derive(t as u64);
                    let chan = ChannelRealization::draw(&plan, &mut trng)?;
                    let outcomes = if digital {
                        run_digital_round(&chan, &plan, &mut trng)?
                    } else {
                        run_analog_round(&chan, &plan, &mut trng)?
                    };
                    Ok(realized_rate(&outcomes, &chan.sinr))
                })
                .collect::<Result<_>>()?
        }
    };
    let (value, ci_half_width) = mean_ci(&rates);
    Ok(ThroughputEstimate {
        value,
        ci_half_width,
        trials,
    })
}

/// Large-`n` sum rate `p · log2(1 + ρ ln n − ρ (p − 2) ln ln n)`.
pub fn rbf_throughput_approx(n: usize, p: usize, rho: f64) -> Result<f64> {
    let beta = rbf_beta(n, p, rho)?;
    if !(beta > 0.0) {
        return Err(Error::Domain(format!(
            "log argument {beta} is not positive for n = {n}, p = {p}, rho = {rho}"
        )));
    }
    Ok(p as f64 * beta.log2())
}

/// `(1 − Q(Δ/σ_w)) · p · log2(β − Δ)`.
pub fn effective_throughput(beta: f64, delta: f64, sigma_w: f64, p: usize) -> Result<f64> {
    if !(delta >= 0.0 && delta < beta - 1.0) {
        return Err(Error::Domain(format!(
            "need 0 <= delta < beta - 1 (delta = {delta}, beta = {beta})"
        )));
    }
    if !(sigma_w > 0.0) {
        return Err(Error::Domain(format!("sigma_w must be positive, got {sigma_w}")));
    }
    Ok((1.0 - q_function(delta / sigma_w)) * p as f64 * (beta - delta).log2())
}

/// Closed-form digital sum rate
/// `p Σ_i log2(1 + ζ_i) (F(ζ_{i+1})ⁿ − F(ζ_i)ⁿ)` with `F(ζ_{k+1}) = 1`.
pub fn digital_throughput_closed(n: usize, p: usize, rho: f64, thresholds: &ThresholdSet) -> Result<f64> {
    if n == 0 || p == 0 || !(rho > 0.0) {
        return Err(Error::Domain(format!(
            "need n, p >= 1 and rho > 0 (n = {n}, p = {p}, rho = {rho})"
        )));
    }
    let cdf_pow = |z: f64| -> f64 {
        if z.is_infinite() {
            1.0
        } else {
            (1.0 - ccdf_unchecked(z, rho, p)).powi(n as i32)
        }
    };
    let per_beam: f64 = (0..thresholds.len())
        .map(|i| {
            let (lo, hi) = thresholds.interval(i);
            lo.ln_1p() / std::f64::consts::LN_2 * (cdf_pow(hi) - cdf_pow(lo))
        })
        .sum();
    Ok(p as f64 * per_beam)
}
