//! Random channel objects: downlink gains, feedback matrices and the
//! feedback transmission `y = A v + w`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Gain of every dedicated feedback channel.
pub const DEDICATED_GAIN: f64 = 1.0;

/// One `CN(0, 1)` draw: independent real and imaginary parts, each `N(0, 1/2)`.
pub fn complex_normal(rng: &mut Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub(crate) fn complex_gaussian_matrix(rows: usize, cols: usize, rng: &mut Rng) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = complex_normal(rng);
        }
    }
    m
}

/// Downlink channel matrix; row `i` is user `i`'s gain vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DownlinkChannels {
    h: CMatrix,
}

impl DownlinkChannels {
    pub fn from_matrix(h: CMatrix) -> Self {
        Self { h }
    }

    pub fn users(&self) -> usize {
        self.h.nrows()
    }

    pub fn antennas(&self) -> usize {
        self.h.ncols()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.h
    }
}

pub fn gen_downlink(n: usize, p: usize, rng: &mut Rng) -> Result<DownlinkChannels> {
    if p == 0 {
        return Err(Error::InvalidConfig("antenna count p must be at least 1".into()));
    }
    if n < p {
        return Err(Error::InvalidConfig(format!(
            "user count n = {n} must be at least the antenna count p = {p}"
        )));
    }
    Ok(DownlinkChannels {
        h: complex_gaussian_matrix(n, p, rng),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackKind {
    /// Shared channels under block Rayleigh fading, `CN(0, 1)` entries.
    GaussianFading,
    /// Non-fading shared channels with ±1 chip sequences per user.
    BernoulliChips,
    /// One reserved channel per user, constant diagonal.
    DedicatedDiagonal,
    /// Users split into `groups` equal groups, each with its own channels.
    BlockDiagonal { groups: usize },
}

impl FeedbackKind {
    pub fn is_shared(&self) -> bool {
        !matches!(self, FeedbackKind::DedicatedDiagonal)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackMatrix {
    kind: FeedbackKind,
    a: CMatrix,
}

impl FeedbackMatrix {
    pub fn new(kind: FeedbackKind, a: CMatrix) -> Self {
        Self { kind, a }
    }

    pub fn kind(&self) -> FeedbackKind {
        self.kind
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.a
    }

    /// Number of feedback channels `r`.
    pub fn channels(&self) -> usize {
        self.a.nrows()
    }

    pub fn users(&self) -> usize {
        self.a.ncols()
    }
}

pub fn gen_feedback_matrix(kind: FeedbackKind, r: usize, n: usize, rng: &mut Rng) -> Result<FeedbackMatrix> {
    if r == 0 || n == 0 {
        return Err(Error::InvalidConfig(format!(
            "feedback matrix needs r >= 1 and n >= 1 (got r = {r}, n = {n})"
        )));
    }
    let a = match kind {
        FeedbackKind::GaussianFading => complex_gaussian_matrix(r, n, rng),
        FeedbackKind::BernoulliChips => CMatrix::from_fn(r, n, |_, _| {
            let chip = if rng.random::<bool>() { 1.0 } else { -1.0 };
            Complex64::new(chip, 0.0)
        }),
        FeedbackKind::DedicatedDiagonal => {
            if r != n {
                return Err(Error::InvalidConfig(format!(
                    "dedicated feedback needs one channel per user (r = {r}, n = {n})"
                )));
            }
            CMatrix::from_diagonal_element(n, n, Complex64::new(DEDICATED_GAIN, 0.0))
        }
        FeedbackKind::BlockDiagonal { groups } => {
            if groups == 0 || !n.is_multiple_of(groups) || !r.is_multiple_of(groups) {
                return Err(Error::InvalidConfig(format!(
                    "block-diagonal feedback needs the group count {groups} to divide n = {n} and r = {r}"
                )));
            }
            let (rb, nb) = (r / groups, n / groups);
            let mut a = CMatrix::zeros(r, n);
            for g in 0..groups {
                for i in 0..rb {
                    for j in 0..nb {
                        a[(g * rb + i, g * nb + j)] = complex_normal(rng);
                    }
                }
            }
            a
        }
    };
    Ok(FeedbackMatrix { kind, a })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackObservation {
    pub y: CVector,
    pub sigma_w_sq: f64,
}

/// Send the real feedback vector `v` over all channels and add `CN(0, σ²)` noise.
pub fn transmit_feedback(a: &FeedbackMatrix, v: &[f64], sigma_w_sq: f64, rng: &mut Rng) -> Result<FeedbackObservation> {
    if v.len() != a.users() {
        return Err(Error::DimensionMismatch(format!(
            "feedback vector has {} entries, matrix has {} users",
            v.len(),
            a.users()
        )));
    }
    if !(sigma_w_sq >= 0.0) {
        return Err(Error::Domain(format!("noise variance must be >= 0, got {sigma_w_sq}")));
    }
    let r = a.channels();
    let mut y = CVector::zeros(r);
    for (j, &vj) in v.iter().enumerate() {
        if vj != 0.0 {
            y.axpy(Complex64::new(vj, 0.0), &a.matrix().column(j), Complex64::new(1.0, 0.0));
        }
    }
    if sigma_w_sq > 0.0 {
        let sd = sigma_w_sq.sqrt();
        for yi in y.iter_mut() {
            *yi += complex_normal(rng) * sd;
        }
    }
    Ok(FeedbackObservation { y, sigma_w_sq })
}
