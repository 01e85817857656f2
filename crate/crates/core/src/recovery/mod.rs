//! Sparse support recovery on the real-valued equivalent of `y = A v + w`.

mod channels;
mod lasso;
mod rip;

pub use channels::{asymptotic_channels, block_diag_channels, required_channels};
pub use lasso::{lasso, lasso_objective, lasso_with, LassoSettings};
pub use rip::rip_constant;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::channel::{CMatrix, CVector};
use crate::error::{Error, Result};

/// Coefficients with magnitude at or below this are treated as zero when
/// reading a support off a LASSO solution.
pub const LASSO_SUPPORT_THRESHOLD: f64 = 1e-6;

/// Real-valued stacking `[Re A; Im A] v = [Re y; Im y]` for a real unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedSystem {
    pub a: DMatrix<f64>,
    pub y: DVector<f64>,
}

impl LiftedSystem {
    pub fn new(a: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        if a.nrows() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} rows, observation has {} entries",
                a.nrows(),
                y.len()
            )));
        }
        Ok(Self { a, y })
    }

    /// Number of real measurements, `2r` for a lifted complex system.
    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    pub fn unknowns(&self) -> usize {
        self.a.ncols()
    }

    pub fn residual_norm_sq(&self, v: &DVector<f64>) -> f64 {
        (&self.y - &self.a * v).norm_squared()
    }
}

pub fn lift_to_real(a: &CMatrix, y: &CVector) -> Result<LiftedSystem> {
    let (r, n) = a.shape();
    if y.len() != r {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {r} rows, observation has {} entries",
            y.len()
        )));
    }
    let mut a_real = DMatrix::zeros(2 * r, n);
    let mut y_real = DVector::zeros(2 * r);
    for i in 0..r {
        for j in 0..n {
            a_real[(i, j)] = a[(i, j)].re;
            a_real[(r + i, j)] = a[(i, j)].im;
        }
        y_real[i] = y[i].re;
        y_real[r + i] = y[i].im;
    }
    Ok(LiftedSystem { a: a_real, y: y_real })
}

/// Sorted, duplicate-free set of user indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SupportSet(Vec<usize>);

impl SupportSet {
    pub fn new(mut indices: Vec<usize>, n: usize) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Domain("support indices must be unique".into()));
        }
        if let Some(&last) = indices.last() {
            if last >= n {
                return Err(Error::Domain(format!("support index {last} out of range for n = {n}")));
            }
        }
        Ok(Self(indices))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryMethod {
    MaxCorrelation,
    Lasso,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub support: SupportSet,
    /// LS estimates, aligned with `support.indices()`.
    pub values: Vec<f64>,
    pub method: RecoveryMethod,
}

impl RecoveryResult {
    pub fn empty(method: RecoveryMethod) -> Self {
        Self {
            support: SupportSet::default(),
            values: Vec::new(),
            method,
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.support.indices().iter().copied().zip(self.values.iter().copied())
    }
}

/// Indices of the `s` largest normalized correlations `|a_jᵀ y| / ‖a_j‖`.
///
/// Zero columns score zero. Ties go to the lower index.
pub fn max_correlation_support(sys: &LiftedSystem, s: usize) -> Result<SupportSet> {
    let n = sys.unknowns();
    if s == 0 || s > n {
        return Err(Error::Domain(format!("support size must lie in 1..={n}, got {s}")));
    }
    let corr = sys.a.tr_mul(&sys.y);
    let mut scored: Vec<(usize, f64)> = (0..n)
        .map(|j| {
            let norm = sys.a.column(j).norm();
            let score = if norm > 0.0 { corr[j].abs() / norm } else { 0.0 };
            (j, score)
        })
        .collect();
    scored.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    SupportSet::new(scored.into_iter().take(s).map(|(j, _)| j).collect(), n)
}

/// Least squares restricted to the columns in `support`.
pub fn ls_refine(sys: &LiftedSystem, support: &SupportSet) -> Result<Vec<f64>> {
    let k = support.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    if k > sys.rows() {
        return Err(Error::DegenerateSupport(format!(
            "support of size {k} exceeds the {} available measurements",
            sys.rows()
        )));
    }
    let sub = sys.a.select_columns(support.indices());
    let svd = sub.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smax > 0.0) || smin <= smax * 1e-12 {
        return Err(Error::DegenerateSupport(format!(
            "restricted matrix is rank deficient (singular values {smin:e} .. {smax:e})"
        )));
    }
    let x = svd.solve(&sys.y, 0.0).map_err(|e| Error::Numerical(e.to_string()))?;
    Ok(x.iter().copied().collect())
}

/// Support recovery followed by least-squares refinement.
///
/// `s` is the target support size for max-correlation; `alpha` is the LASSO
/// penalty. LASSO supports larger than the number of measurements keep only
/// the largest coefficients.
pub fn recover(sys: &LiftedSystem, method: RecoveryMethod, s: usize, alpha: f64) -> Result<RecoveryResult> {
    let support = match method {
        RecoveryMethod::MaxCorrelation => max_correlation_support(sys, s.min(sys.unknowns()))?,
        RecoveryMethod::Lasso => {
            let v = lasso(sys, alpha)?;
            let mut nz: Vec<(usize, f64)> = v
                .iter()
                .enumerate()
                .filter(|(_, x)| x.abs() > LASSO_SUPPORT_THRESHOLD)
                .map(|(j, x)| (j, x.abs()))
                .collect();
            if nz.len() > sys.rows() {
                nz.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
                nz.truncate(sys.rows());
            }
            SupportSet::new(nz.into_iter().map(|(j, _)| j).collect(), sys.unknowns())?
        }
    };
    let values = ls_refine(sys, &support)?;
    Ok(RecoveryResult {
        support,
        values,
        method,
    })
}
