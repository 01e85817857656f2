//! Random beamforming: orthonormal beam sets, per-beam SINR, and the SINR
//! distribution seen by a single user on a single beam.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::channel::{complex_gaussian_matrix, CMatrix, DownlinkChannels};
use crate::error::{Error, Result};
use crate::rng::Rng;

/// `p` orthonormal beams stored as the columns of a `p × p` unitary matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamSet {
    phi: CMatrix,
}

impl BeamSet {
    /// Wraps an existing matrix; columns must already be orthonormal.
    pub fn from_matrix(phi: CMatrix) -> Result<Self> {
        if !phi.is_square() {
            return Err(Error::DimensionMismatch("beam matrix must be square".into()));
        }
        let set = Self { phi };
        if set.orthonormality_error() > 1e-10 {
            return Err(Error::Domain("beam columns are not orthonormal".into()));
        }
        Ok(set)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.phi
    }

    pub fn len(&self) -> usize {
        self.phi.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.ncols() == 0
    }

    /// `max |(Φ*Φ − I)_ij|`.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.phi.adjoint() * &self.phi;
        let p = self.phi.ncols();
        let mut worst = 0.0f64;
        for i in 0..p {
            for j in 0..p {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

/// Haar-distributed beams: QR of a complex Gaussian matrix with the phases of
/// `diag(R)` folded back into `Q`.
pub fn gen_beams(p: usize, rng: &mut Rng) -> Result<BeamSet> {
    if p == 0 {
        return Err(Error::InvalidConfig("beam count p must be at least 1".into()));
    }
    let g = complex_gaussian_matrix(p, p, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..p {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..p {
            q[(i, j)] *= phase;
        }
    }
    Ok(BeamSet { phi: q })
}

/// Per-user, per-beam SINR.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrTable {
    sinr: DMatrix<f64>,
    gains: DMatrix<f64>,
    rho: f64,
}

impl SinrTable {
    pub fn users(&self) -> usize {
        self.sinr.nrows()
    }

    pub fn beams(&self) -> usize {
        self.sinr.ncols()
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn get(&self, user: usize, beam: usize) -> f64 {
        self.sinr[(user, beam)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.sinr
    }

    /// `|h_i φ_m|²`, kept so the orthonormal expansion can be checked.
    pub fn gains(&self) -> &DMatrix<f64> {
        &self.gains
    }

    /// Beam with the highest SINR for `user`, and that SINR.
    pub fn best_beam(&self, user: usize) -> (usize, f64) {
        let row = self.sinr.row(user);
        let mut best = (0, row[0]);
        for (m, &v) in row.iter().enumerate().skip(1) {
            if v > best.1 {
                best = (m, v);
            }
        }
        best
    }

    /// Largest SINR on `beam` over all users.
    pub fn column_max(&self, beam: usize) -> f64 {
        self.sinr.column(beam).iter().cloned().fold(0.0, f64::max)
    }
}

pub fn compute_sinr(h: &DownlinkChannels, beams: &BeamSet, rho: f64) -> Result<SinrTable> {
    if h.antennas() != beams.len() {
        return Err(Error::DimensionMismatch(format!(
            "channel has {} antennas, beam set has {} beams",
            h.antennas(),
            beams.len()
        )));
    }
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("SNR must be positive, got {rho}")));
    }
    let proj = h.matrix() * beams.matrix();
    let gains = proj.map(|z| z.norm_sqr());
    let inv_rho = 1.0 / rho;
    let mut sinr = DMatrix::zeros(gains.nrows(), gains.ncols());
    for i in 0..gains.nrows() {
        let total: f64 = gains.row(i).iter().sum();
        for m in 0..gains.ncols() {
            let g = gains[(i, m)];
            let interference = (total - g).max(0.0);
            sinr[(i, m)] = g / (inv_rho + interference);
        }
    }
    Ok(SinrTable { sinr, gains, rho })
}

fn check_ccdf_args(rho: f64, p: usize) -> Result<()> {
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("SNR must be positive, got {rho}")));
    }
    if p == 0 {
        return Err(Error::Domain("beam count must be at least 1".into()));
    }
    Ok(())
}

/// `P[SINR > ζ] = exp(−ζ/ρ) / (1 + ζ)^(p−1)`.
pub fn sinr_ccdf(zeta: f64, rho: f64, p: usize) -> Result<f64> {
    check_ccdf_args(rho, p)?;
    if !(zeta >= 0.0) {
        return Err(Error::Domain(format!("SINR threshold must be >= 0, got {zeta}")));
    }
    Ok(ccdf_unchecked(zeta, rho, p))
}

pub(crate) fn ccdf_unchecked(zeta: f64, rho: f64, p: usize) -> f64 {
    if zeta.is_infinite() {
        return 0.0;
    }
    (-zeta / rho - (p as f64 - 1.0) * zeta.ln_1p()).exp()
}

/// Inverse of [`sinr_ccdf`] by bracketing bisection.
pub fn sinr_ccdf_inv(u: f64, rho: f64, p: usize) -> Result<f64> {
    check_ccdf_args(rho, p)?;
    if !(u > 0.0 && u <= 1.0) {
        return Err(Error::Domain(format!("CCDF level must lie in (0, 1], got {u}")));
    }
    if u == 1.0 {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while ccdf_unchecked(hi, rho, p) >= u {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ccdf_unchecked(mid, rho, p) > u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::gen_downlink;
    use approx::assert_relative_eq;

    #[test]
    fn single_beam_is_unit_norm() {
        let b = gen_beams(1, &mut Rng::new(0, 0)).unwrap();
        assert_relative_eq!(b.matrix()[(0, 0)].norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn beams_orthonormal_and_seed_dependent() {
        let a = gen_beams(4, &mut Rng::new(1, 0)).unwrap();
        let b = gen_beams(4, &mut Rng::new(2, 0)).unwrap();
        assert!(a.orthonormality_error() < 1e-10);
        assert!(b.orthonormality_error() < 1e-10);
        assert_ne!(a, b);
    }

    #[test]
    fn single_beam_has_no_interference() {
        let mut rng = Rng::new(3, 0);
        let h = gen_downlink(5, 1, &mut rng).unwrap();
        let b = gen_beams(1, &mut rng).unwrap();
        let t = compute_sinr(&h, &b, 4.0).unwrap();
        for i in 0..5 {
            let g = (h.matrix()[(i, 0)] * b.matrix()[(0, 0)]).norm_sqr();
            assert_relative_eq!(t.get(i, 0), 4.0 * g, max_relative = 1e-12);
        }
    }

    #[test]
    fn orthogonal_user_sees_zero() {
        let beams = BeamSet::from_matrix(CMatrix::identity(2, 2)).unwrap();
        let h = DownlinkChannels::from_matrix(CMatrix::from_row_slice(
            1,
            2,
            &[Complex64::new(0.0, 0.0), Complex64::new(1.0, 1.0)],
        ));
        let t = compute_sinr(&h, &beams, 10.0).unwrap();
        assert_eq!(t.get(0, 0), 0.0);
        assert!(t.get(0, 1) > 0.0);
    }

    #[test]
    fn gains_expand_channel_norm() {
        let mut rng = Rng::new(4, 0);
        let h = gen_downlink(20, 4, &mut rng).unwrap();
        let b = gen_beams(4, &mut rng).unwrap();
        let t = compute_sinr(&h, &b, 10.0).unwrap();
        for i in 0..20 {
            let norm: f64 = h.matrix().row(i).iter().map(|z| z.norm_sqr()).sum();
            let sum: f64 = t.gains().row(i).iter().sum();
            assert_relative_eq!(norm, sum, max_relative = 1e-12);
        }
    }

    #[test]
    fn permuting_beams_permutes_columns() {
        let mut rng = Rng::new(5, 0);
        let h = gen_downlink(10, 3, &mut rng).unwrap();
        let b = gen_beams(3, &mut rng).unwrap();
        let perm = [2usize, 0, 1];
        let mut permuted = CMatrix::zeros(3, 3);
        for (new, &old) in perm.iter().enumerate() {
            permuted.set_column(new, &b.matrix().column(old));
        }
        let pb = BeamSet::from_matrix(permuted).unwrap();
        let t = compute_sinr(&h, &b, 10.0).unwrap();
        let tp = compute_sinr(&h, &pb, 10.0).unwrap();
        for i in 0..10 {
            for (new, &old) in perm.iter().enumerate() {
                assert_relative_eq!(tp.get(i, new), t.get(i, old), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn ccdf_reference_values() {
        assert_eq!(sinr_ccdf(0.0, 3.0, 5).unwrap(), 1.0);
        assert_relative_eq!(
            sinr_ccdf(1.0, 1.0, 1).unwrap(),
            0.367_879_441_171_442_3,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            sinr_ccdf(1.0, 10.0, 4).unwrap(),
            (-0.1f64).exp() / 8.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(sinr_ccdf(1.0, 10.0, 4).unwrap(), 0.113_105, epsilon = 1e-6);
        assert!(sinr_ccdf(-0.1, 1.0, 1).is_err());
    }

    #[test]
    fn ccdf_inverse() {
        assert_eq!(sinr_ccdf_inv(1.0, 2.0, 3).unwrap(), 0.0);
        assert_relative_eq!(sinr_ccdf_inv((-2.0f64).exp(), 1.0, 1).unwrap(), 2.0, epsilon = 1e-12);
        for &z in &[0.1, 1.0, 10.0] {
            let u = sinr_ccdf(z, 10.0, 4).unwrap();
            let back = sinr_ccdf_inv(u, 10.0, 4).unwrap();
            assert!((back - z).abs() < 1e-8, "{z} -> {back}");
            assert!((sinr_ccdf(back, 10.0, 4).unwrap() - u).abs() < 1e-10);
        }
        assert!(sinr_ccdf_inv(0.0, 1.0, 1).is_err());
        assert!(sinr_ccdf_inv(1.5, 1.0, 1).is_err());
    }
}
