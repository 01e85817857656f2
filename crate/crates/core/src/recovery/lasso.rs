use nalgebra::DVector;

use super::LiftedSystem;
use crate::error::{Error, Result};

/// Stopping rule for cyclic coordinate descent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LassoSettings {
    /// Stop once no coordinate moves by more than this in a full pass.
    pub tol: f64,
    pub max_passes: usize,
}

impl Default for LassoSettings {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_passes: 100_000,
        }
    }
}

/// `(1/(2m)) ‖y − A v‖² + α ‖v‖₁` with `m` the number of rows.
pub fn lasso_objective(sys: &LiftedSystem, v: &DVector<f64>, alpha: f64) -> f64 {
    let m = sys.rows() as f64;
    sys.residual_norm_sq(v) / (2.0 * m) + alpha * v.lp_norm(1)
}

pub fn lasso(sys: &LiftedSystem, alpha: f64) -> Result<DVector<f64>> {
    lasso_with(sys, alpha, LassoSettings::default())
}

/// Cyclic coordinate descent with soft thresholding, started from zero.
pub fn lasso_with(sys: &LiftedSystem, alpha: f64, settings: LassoSettings) -> Result<DVector<f64>> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("LASSO penalty must be positive, got {alpha}")));
    }
    let n = sys.unknowns();
    let m = sys.rows() as f64;
    let shrink = m * alpha;
    let col_sq: Vec<f64> = (0..n).map(|j| sys.a.column(j).norm_squared()).collect();
    let mut v: DVector<f64> = DVector::zeros(n);
    let mut resid = sys.y.clone();
    let mut last_change = f64::INFINITY;
    for _ in 0..settings.max_passes {
        let mut max_change = 0.0f64;
        for j in 0..n {
            if col_sq[j] == 0.0 {
                continue;
            }
            let col = sys.a.column(j);
            let rho = col.dot(&resid) + col_sq[j] * v[j];
            let updated = soft_threshold(rho, shrink) / col_sq[j];
            let delta = updated - v[j];
            if delta != 0.0 {
                resid.axpy(-delta, &col, 1.0);
                v[j] = updated;
                max_change = max_change.max(delta.abs());
            }
        }
        last_change = max_change;
        if max_change < settings.tol {
            return Ok(v);
        }
    }
    Err(Error::NotConverged {
        passes: settings.max_passes,
        last_change,
        last_iterate: v.iter().copied().collect(),
    })
}

fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}
