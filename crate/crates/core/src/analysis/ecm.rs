//! Error covariance of the refined feedback estimates,
//! `ECM = (σ_v⁻² I + σ_w⁻² A_S* A_S)⁻¹`, for shared and dedicated channels.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use super::mean_ci;
use crate::channel::complex_gaussian_matrix;
use crate::error::{Error, Result};
use crate::quad::integrate_to_infinity;
use crate::rng::Rng;
use crate::special::{laguerre, upper_gamma_neg_int};

const QUAD_REL_TOL: f64 = 1e-10;
const DENSITY_NORM_TOL: f64 = 1e-6;
/// Largest `r` for which the incomplete-gamma form is trusted.
pub const INCGAMMA_MAX_R: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EcmVariant {
    MonteCarlo,
    ClosedForm,
    LargeRApprox,
    Dedicated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcmStats {
    pub trace: f64,
    pub determinant: f64,
    pub variant: EcmVariant,
    /// 95% half-width of the trace, Monte Carlo only.
    pub trace_ci: Option<f64>,
}

fn check_shared(s: usize, r: usize) -> Result<()> {
    if s == 0 || r < s {
        return Err(Error::Domain(format!("need r >= s >= 1 (got s = {s}, r = {r})")));
    }
    Ok(())
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("SNR must be positive, got {rho}")));
    }
    Ok(())
}

/// Monte Carlo over `r × s` matrices with `CN(0, 1)` entries.
pub fn ecm_shared_mc(
    s: usize,
    r: usize,
    sigma_v_sq: f64,
    sigma_w_sq: f64,
    trials: usize,
    rng: &Rng,
) -> Result<EcmStats> {
    check_shared(s, r)?;
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    if !(sigma_v_sq > 0.0) || !(sigma_w_sq > 0.0) {
        return Err(Error::Domain("signal and noise variances must be positive".into()));
    }
    let samples: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut trng = rng.derive(t as u64);
            let a = complex_gaussian_matrix(r, s, &mut trng);
            let gram = a.adjoint() * &a;
            let info: DMatrix<Complex64> =
                DMatrix::from_diagonal_element(s, s, Complex64::new(1.0 / sigma_v_sq, 0.0)) + gram.unscale(sigma_w_sq);
            let chol = info
                .cholesky()
                .ok_or_else(|| Error::Numerical("information matrix not positive definite".into()))?;
            let det_info: f64 = chol.l().diagonal().iter().map(|d| d.norm_sqr()).product();
            let trace = chol.inverse().trace().re;
            Ok((trace, 1.0 / det_info))
        })
        .collect::<Result<_>>()?;
    let traces: Vec<f64> = samples.iter().map(|x| x.0).collect();
    let (trace, ci) = mean_ci(&traces);
    let determinant = samples.iter().map(|x| x.1).sum::<f64>() / trials as f64;
    Ok(EcmStats {
        trace,
        determinant,
        variant: EcmVariant::MonteCarlo,
        trace_ci: Some(ci),
    })
}

/// `x^{r−1} e^{−x} / Γ(r)`.
fn gamma_density(x: f64, r: usize) -> f64 {
    if x <= 0.0 {
        return if r == 1 && x == 0.0 { 1.0 } else { 0.0 };
    }
    let rf = r as f64;
    ((rf - 1.0) * x.ln() - x - ln_gamma(rf)).exp()
}

/// `s ∫ (1 + ρx)⁻¹ Gamma(r, 1)(x) dx` by adaptive quadrature.
pub fn ecm_shared_trace_closed(s: usize, r: usize, rho: f64) -> Result<f64> {
    if s == 0 || r == 0 {
        return Err(Error::Domain(format!("need s, r >= 1 (got s = {s}, r = {r})")));
    }
    check_rho(rho)?;
    let integral = integrate_to_infinity(|x| gamma_density(x, r) / (1.0 + rho * x), 0.0, 0.0, QUAD_REL_TOL)?;
    Ok(s as f64 * integral)
}

/// `s ρ^{−r} e^{1/ρ} Γ(1 − r, 1/ρ)`; cancellation makes it unreliable past
/// [`INCGAMMA_MAX_R`].
pub fn ecm_shared_trace_incgamma(s: usize, r: usize, rho: f64) -> Result<f64> {
    if s == 0 || r == 0 || r > INCGAMMA_MAX_R {
        return Err(Error::Domain(format!(
            "incomplete-gamma form needs s >= 1 and 1 <= r <= {INCGAMMA_MAX_R} (got s = {s}, r = {r})"
        )));
    }
    check_rho(rho)?;
    let x = 1.0 / rho;
    Ok(s as f64 * x.powi(r as i32) * x.exp() * upper_gamma_neg_int(r as u32 - 1, x))
}

/// Marginal density of an unordered eigenvalue of `A_S* A_S`, `A_S` being
/// `r × s` with `CN(0, 1)` entries and `r ≥ s`:
/// `(1/s) Σ_{l<s} l!/(l+r−s)! [L_l^{(r−s)}(λ)]² λ^{r−s} e^{−λ}`.
pub fn eigenvalue_density(lambda: f64, s: usize, r: usize) -> f64 {
    if lambda < 0.0 {
        return 0.0;
    }
    let a = (r - s) as f64;
    let log_weight = if a == 0.0 { -lambda } else { a * lambda.ln() - lambda };
    let sum: f64 = (0..s)
        .map(|l| {
            let lf = l as f64;
            let ratio = (ln_gamma(lf + 1.0) - ln_gamma(lf + a + 1.0) + log_weight).exp();
            ratio * laguerre(l, a, lambda).powi(2)
        })
        .sum();
    sum / s as f64
}

/// `[∫ (1 + ρλ)⁻¹ p(λ) dλ]^s` over the eigenvalue density.
pub fn ecm_shared_det_closed(s: usize, r: usize, rho: f64) -> Result<f64> {
    check_shared(s, r)?;
    check_rho(rho)?;
    let mass = integrate_to_infinity(|l| eigenvalue_density(l, s, r), 0.0, 0.0, QUAD_REL_TOL)?;
    if (mass - 1.0).abs() > DENSITY_NORM_TOL {
        return Err(Error::Numerical(format!(
            "eigenvalue density integrates to {mass} for s = {s}, r = {r}"
        )));
    }
    let per = integrate_to_infinity(
        |l| eigenvalue_density(l, s, r) / (1.0 + rho * l),
        0.0,
        0.0,
        QUAD_REL_TOL,
    )?;
    Ok(per.powi(s as i32))
}

pub fn ecm_shared_closed(s: usize, r: usize, rho: f64) -> Result<EcmStats> {
    Ok(EcmStats {
        trace: ecm_shared_trace_closed(s, r, rho)?,
        determinant: ecm_shared_det_closed(s, r, rho)?,
        variant: EcmVariant::ClosedForm,
        trace_ci: None,
    })
}

/// Large-`r` approximation `ECM ≈ (σ_w²/r) I`: trace `s/(ρr)`, determinant `(ρr)^{−s}`.
pub fn ecm_shared_approx(s: usize, r: usize, rho: f64) -> Result<EcmStats> {
    if s == 0 || r == 0 {
        return Err(Error::Domain(format!("need s, r >= 1 (got s = {s}, r = {r})")));
    }
    check_rho(rho)?;
    let per = 1.0 / (rho * r as f64);
    Ok(EcmStats {
        trace: s as f64 * per,
        determinant: per.powi(s as i32),
        variant: EcmVariant::LargeRApprox,
        trace_ci: None,
    })
}

/// One dedicated channel per user: trace `n/(1+ρ)`, determinant `(1+ρ)^{−n}`.
pub fn ecm_dedicated(n: usize, rho: f64) -> Result<EcmStats> {
    if n == 0 || !(rho >= 0.0) {
        return Err(Error::Domain(format!(
            "need n >= 1 and rho >= 0 (got n = {n}, rho = {rho})"
        )));
    }
    Ok(EcmStats {
        trace: n as f64 / (1.0 + rho),
        determinant: (1.0 + rho).powi(-(n as i32)),
        variant: EcmVariant::Dedicated,
        trace_ci: None,
    })
}
