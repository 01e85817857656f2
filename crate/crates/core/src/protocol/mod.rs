//! The analog and digital opportunistic feedback protocols, one coherence
//! block at a time.
//!
//! Per beam, users whose best beam it is and whose SINR clears the threshold
//! transmit on every shared channel at once. The base station recovers who
//! transmitted, refines their values by least squares and schedules one user.

mod backoff;
mod threshold;

pub use backoff::{backoff_condition, backoff_efficiency, optimal_backoff, rbf_beta, BackoffParams};
pub use threshold::{analog_threshold, digital_thresholds, ThresholdSet};

use rand::Rng as _;

use crate::channel::{
    gen_downlink, gen_feedback_matrix, transmit_feedback, DownlinkChannels, FeedbackKind, FeedbackMatrix,
    DEDICATED_GAIN,
};
use crate::error::{Error, Result};
use crate::rbf::{compute_sinr, gen_beams, BeamSet, SinrTable};
use crate::recovery::{block_diag_channels, lift_to_real, recover, required_channels, LiftedSystem, RecoveryMethod};
use crate::rng::Rng;

/// Recovered values below this fraction of the reference level (the analog
/// threshold, or the unit digital amplitude) are treated as noise.
pub const ENERGY_TEST_FRACTION: f64 = 0.5;

/// Floor on the automatic LASSO penalty, used when the feedback link is noiseless.
pub const MIN_LASSO_ALPHA: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    pub n: usize,
    pub p: usize,
    /// Downlink SNR, linear.
    pub rho_dl: f64,
    /// Feedback-link SNR, linear; the noise variance is `1 / rho_ul`.
    pub rho_ul: f64,
    /// Target number of strong users per beam (per interval for digital).
    pub s: usize,
    pub c_half: f64,
    /// Number of digital thresholds.
    pub k: usize,
    pub recovery: RecoveryMethod,
    pub feedback: FeedbackKind,
    /// Explicit shared-channel count, overriding the `c_half` rule.
    pub channels: Option<usize>,
    /// Explicit LASSO penalty.
    pub alpha: Option<f64>,
    pub seed: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            n: 100,
            p: 4,
            rho_dl: 10.0,
            rho_ul: 10.0,
            s: 5,
            c_half: 0.8,
            k: 1,
            recovery: RecoveryMethod::MaxCorrelation,
            feedback: FeedbackKind::GaussianFading,
            channels: None,
            alpha: None,
            seed: 0,
        }
    }
}

impl ProtocolConfig {
    pub fn sigma_w_sq(&self) -> f64 {
        1.0 / self.rho_ul
    }

    /// Number of feedback channels `r` for this configuration.
    pub fn channel_count(&self) -> Result<usize> {
        match self.feedback {
            FeedbackKind::DedicatedDiagonal => Ok(self.n),
            _ if self.channels.is_some() => Ok(self.channels.unwrap()),
            FeedbackKind::BlockDiagonal { groups } => block_diag_channels(self.c_half, self.s, self.n, groups)
                .map_err(|e| Error::InvalidConfig(e.to_string())),
            _ => required_channels(self.c_half, self.s, self.n).map_err(|e| Error::InvalidConfig(e.to_string())),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.p == 0 || self.n < self.p {
            return Err(Error::InvalidConfig(format!(
                "need n >= p >= 1 (n = {}, p = {})",
                self.n, self.p
            )));
        }
        if !(self.rho_dl > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "downlink SNR must be positive, got {}",
                self.rho_dl
            )));
        }
        if !(self.rho_ul > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "uplink SNR must be positive, got {}",
                self.rho_ul
            )));
        }
        if self.s == 0 || self.s > self.n {
            return Err(Error::InvalidConfig(format!("need 1 <= s <= n, got s = {}", self.s)));
        }
        if let FeedbackKind::BlockDiagonal { groups } = self.feedback {
            if groups == 0 || !self.s.is_multiple_of(groups) || !self.n.is_multiple_of(groups) {
                return Err(Error::InvalidConfig(format!(
                    "block groups {groups} must divide s = {} and n = {}",
                    self.s, self.n
                )));
            }
        }
        Ok(())
    }
}

/// Everything about a configuration that does not change between rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolPlan {
    pub config: ProtocolConfig,
    /// Feedback channel count.
    pub r: usize,
    /// Analog threshold; zero for dedicated feedback, where every user reports.
    pub zeta: f64,
    /// Digital thresholds, when `s * k <= n`.
    pub thresholds: Option<ThresholdSet>,
    /// Noise std of one refined estimate, the scale the back-off is designed for.
    pub sigma_eff: f64,
    pub backoff: f64,
}

impl ProtocolPlan {
    pub fn new(config: &ProtocolConfig) -> Result<Self> {
        config.validate()?;
        let cfg = config.clone();
        let r = cfg.channel_count()?;
        if let FeedbackKind::BlockDiagonal { groups } = cfg.feedback {
            if r % groups != 0 {
                return Err(Error::InvalidConfig(format!(
                    "block groups {groups} must divide r = {r}"
                )));
            }
        }
        let shared = cfg.feedback.is_shared();
        let zeta = if shared {
            analog_threshold(cfg.s, cfg.n, cfg.rho_dl, cfg.p)?
        } else {
            0.0
        };
        let thresholds = digital_thresholds(cfg.s, cfg.n, cfg.k, cfg.rho_dl, cfg.p).ok();
        let sigma_w = cfg.sigma_w_sq().sqrt();
        let sigma_eff = if shared { sigma_w / (r as f64).sqrt() } else { sigma_w };
        let backoff = if sigma_eff > 0.0 {
            rbf_beta(cfg.n, cfg.p, cfg.rho_dl)
                .and_then(|beta| optimal_backoff(beta, sigma_eff))
                .unwrap_or(0.0)
        } else {
            0.0
        };
        Ok(Self {
            config: cfg,
            r,
            zeta,
            thresholds,
            sigma_eff,
            backoff,
        })
    }

    /// LASSO penalty for a block with `users` columns and `rows` real measurements.
    pub fn lasso_alpha(&self, users: usize, rows: usize) -> f64 {
        self.config.alpha.unwrap_or_else(|| {
            let sigma_w = self.config.sigma_w_sq().sqrt();
            let a = sigma_w * (2.0 * (users as f64).ln() / rows as f64).sqrt();
            a.max(MIN_LASSO_ALPHA)
        })
    }
}

/// One coherence block: downlink, beams, feedback matrix and noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub downlink: DownlinkChannels,
    pub beams: BeamSet,
    pub feedback: FeedbackMatrix,
    pub sigma_w_sq: f64,
    pub sinr: SinrTable,
}

impl ChannelRealization {
    pub fn new(
        downlink: DownlinkChannels,
        beams: BeamSet,
        feedback: FeedbackMatrix,
        rho_dl: f64,
        sigma_w_sq: f64,
    ) -> Result<Self> {
        if feedback.users() != downlink.users() {
            return Err(Error::DimensionMismatch(format!(
                "feedback matrix has {} users, downlink has {}",
                feedback.users(),
                downlink.users()
            )));
        }
        let sinr = compute_sinr(&downlink, &beams, rho_dl)?;
        Ok(Self {
            downlink,
            beams,
            feedback,
            sigma_w_sq,
            sinr,
        })
    }

    /// Draws downlink, then beams, then the feedback matrix, in that order.
    pub fn draw(plan: &ProtocolPlan, rng: &mut Rng) -> Result<Self> {
        let cfg = &plan.config;
        let h = gen_downlink(cfg.n, cfg.p, rng)?;
        let beams = gen_beams(cfg.p, rng)?;
        let a = gen_feedback_matrix(cfg.feedback, plan.r, cfg.n, rng)?;
        Self::new(h, beams, a, cfg.rho_dl, cfg.sigma_w_sq())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamOutcome {
    pub beam: usize,
    pub selected_user: Option<usize>,
    /// Backed-off SINR estimate (analog) or interval lower edge (digital).
    pub reported_cqi: Option<f64>,
}

impl BeamOutcome {
    fn outage(beam: usize) -> Self {
        Self {
            beam,
            selected_user: None,
            reported_cqi: None,
        }
    }

    pub fn is_outage(&self) -> bool {
        self.selected_user.is_none()
    }
}

/// Sum over beams of `log2(1 + reported)` where the report does not exceed the
/// selected user's true SINR; overestimated and outage beams contribute zero.
pub fn realized_rate(outcomes: &[BeamOutcome], sinr: &SinrTable) -> f64 {
    outcomes
        .iter()
        .filter_map(|o| match (o.selected_user, o.reported_cqi) {
            (Some(u), Some(c)) if c <= sinr.get(u, o.beam) => Some((1.0 + c).log2()),
            _ => None,
        })
        .sum()
}

fn check_realization(chan: &ChannelRealization, plan: &ProtocolPlan) -> Result<()> {
    let cfg = &plan.config;
    if chan.sinr.users() != cfg.n || chan.sinr.beams() != cfg.p {
        return Err(Error::DimensionMismatch(format!(
            "realization is {}x{}, configuration expects {}x{}",
            chan.sinr.users(),
            chan.sinr.beams(),
            cfg.n,
            cfg.p
        )));
    }
    if chan.feedback.kind() != cfg.feedback {
        return Err(Error::InvalidConfig(
            "realization feedback kind differs from configuration".into(),
        ));
    }
    Ok(())
}

/// Send `v`, then recover `(user, estimate)` pairs. Recovery failures yield
/// an empty list.
fn detect(chan: &ChannelRealization, plan: &ProtocolPlan, v: &[f64], rng: &mut Rng) -> Result<Vec<(usize, f64)>> {
    let obs = transmit_feedback(&chan.feedback, v, chan.sigma_w_sq, rng)?;
    let cfg = &plan.config;
    let a = chan.feedback.matrix();
    let found = match chan.feedback.kind() {
        FeedbackKind::DedicatedDiagonal => v
            .iter()
            .enumerate()
            .filter(|(_, x)| **x != 0.0)
            .map(|(j, _)| (j, obs.y[j].re / DEDICATED_GAIN))
            .collect(),
        FeedbackKind::BlockDiagonal { groups } => {
            let (rb, nb) = (a.nrows() / groups, a.ncols() / groups);
            let mut all = Vec::new();
            for g in 0..groups {
                let sub_a = a.view((g * rb, g * nb), (rb, nb)).into_owned();
                let sub_y = obs.y.rows(g * rb, rb).into_owned();
                let sys = lift_to_real(&sub_a, &sub_y)?;
                let alpha = plan.lasso_alpha(nb, sys.rows());
                all.extend(
                    recover_or_empty(&sys, cfg.recovery, cfg.s / groups, alpha)
                        .into_iter()
                        .map(|(j, x)| (g * nb + j, x)),
                );
            }
            all
        }
        _ => {
            let sys = lift_to_real(a, &obs.y)?;
            let alpha = plan.lasso_alpha(cfg.n, sys.rows());
            recover_or_empty(&sys, cfg.recovery, cfg.s, alpha)
        }
    };
    Ok(found)
}

fn recover_or_empty(sys: &LiftedSystem, method: RecoveryMethod, s: usize, alpha: f64) -> Vec<(usize, f64)> {
    match recover(sys, method, s, alpha) {
        Ok(res) => res.entries().collect(),
        Err(_) => Vec::new(),
    }
}

/// One round of analog feedback over all beams.
pub fn run_analog_round(chan: &ChannelRealization, plan: &ProtocolPlan, rng: &mut Rng) -> Result<Vec<BeamOutcome>> {
    check_realization(chan, plan)?;
    let (n, p) = (plan.config.n, plan.config.p);
    let floor = ENERGY_TEST_FRACTION * plan.zeta;
    let best: Vec<(usize, f64)> = (0..n).map(|i| chan.sinr.best_beam(i)).collect();
    let mut outcomes = Vec::with_capacity(p);
    for m in 0..p {
        let v: Vec<f64> = best
            .iter()
            .map(|&(b, x)| if b == m && x >= plan.zeta { x } else { 0.0 })
            .collect();
        let found = detect(chan, plan, &v, rng)?;
        let top = found
            .iter()
            .map(|e| e.1)
            .filter(|x| *x >= floor)
            .fold(f64::NEG_INFINITY, f64::max);
        if !top.is_finite() {
            outcomes.push(BeamOutcome::outage(m));
            continue;
        }
        let ties: Vec<usize> = found.iter().filter(|e| e.1 == top).map(|e| e.0).collect();
        let user = if ties.len() == 1 {
            ties[0]
        } else {
            ties[rng.random_range(0..ties.len())]
        };
        outcomes.push(BeamOutcome {
            beam: m,
            selected_user: Some(user),
            reported_cqi: Some((top - plan.backoff).max(0.0)),
        });
    }
    Ok(outcomes)
}

/// One round of multi-threshold digital feedback over all beams.
pub fn run_digital_round(chan: &ChannelRealization, plan: &ProtocolPlan, rng: &mut Rng) -> Result<Vec<BeamOutcome>> {
    check_realization(chan, plan)?;
    let thresholds = plan.thresholds.as_ref().ok_or_else(|| {
        Error::InvalidConfig(format!(
            "no digital thresholds for s = {}, k = {}, n = {}",
            plan.config.s, plan.config.k, plan.config.n
        ))
    })?;
    let (n, p) = (plan.config.n, plan.config.p);
    let best: Vec<(usize, f64)> = (0..n).map(|i| chan.sinr.best_beam(i)).collect();
    let mut outcomes = Vec::with_capacity(p);
    for m in 0..p {
        let mut outcome = BeamOutcome::outage(m);
        for i in (0..thresholds.len()).rev() {
            let (lo, hi) = thresholds.interval(i);
            let v: Vec<f64> = best
                .iter()
                .map(|&(b, x)| if b == m && x >= lo && x < hi { 1.0 } else { 0.0 })
                .collect();
            let active: Vec<usize> = detect(chan, plan, &v, rng)?
                .into_iter()
                .filter(|e| e.1 >= ENERGY_TEST_FRACTION)
                .map(|e| e.0)
                .collect();
            if !active.is_empty() {
                let user = active[rng.random_range(0..active.len())];
                outcome = BeamOutcome {
                    beam: m,
                    selected_user: Some(user),
                    reported_cqi: Some(lo),
                };
                break;
            }
        }
        outcomes.push(outcome);
    }
    Ok(outcomes)
}
