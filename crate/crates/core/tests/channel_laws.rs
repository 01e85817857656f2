use csfb::channel::gen_downlink;
use csfb::channel::{gen_feedback_matrix, transmit_feedback, FeedbackKind};
use csfb::rbf::{compute_sinr, gen_beams, sinr_ccdf, sinr_ccdf_inv};
use csfb::Rng;
use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

#[test]
fn gaussian_feedback_entries_pass_ks() {
    let a = gen_feedback_matrix(FeedbackKind::GaussianFading, 1000, 1000, &mut Rng::new(11, 0)).unwrap();
    let law = Normal::new(0.0, 0.5f64.sqrt()).unwrap();
    for part in [0, 1] {
        let mut xs: Vec<f64> = a.matrix().iter().map(|z| if part == 0 { z.re } else { z.im }).collect();
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        let d = xs
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let f = law.cdf(*x);
                (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
            })
            .fold(0.0, f64::max);
        assert!(d < 0.005, "KS statistic {d}");
    }
}

#[test]
fn bernoulli_chips_are_balanced() {
    let a = gen_feedback_matrix(FeedbackKind::BernoulliChips, 200, 500, &mut Rng::new(12, 0)).unwrap();
    let positive = a.matrix().iter().filter(|z| z.re > 0.0).count() as f64;
    let frac = positive / (200.0 * 500.0);
    assert!((frac - 0.5).abs() < 0.01, "{frac}");
}

#[test]
fn pooled_sinr_matches_law_on_every_beam() {
    let (p, rho) = (3, 2.0);
    let mut hits = vec![0usize; p];
    let mut total = 0usize;
    let mut rng = Rng::new(13, 0);
    for _ in 0..200 {
        let h = gen_downlink(500, p, &mut rng).unwrap();
        let t = compute_sinr(&h, &gen_beams(p, &mut rng).unwrap(), rho).unwrap();
        for u in 0..500 {
            for (m, hit) in hits.iter_mut().enumerate() {
                *hit += usize::from(t.get(u, m) > 1.0);
            }
        }
        total += 500;
    }
    let want = sinr_ccdf(1.0, rho, p).unwrap();
    for h in hits {
        assert!((h as f64 / total as f64 - want).abs() < 0.005);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn noiseless_transmission_is_linear(
        seed in any::<u64>(),
        r in 1usize..12,
        v1 in prop::collection::vec(-5.0f64..5.0, 15),
        v2 in prop::collection::vec(-5.0f64..5.0, 15),
        scale in -3.0f64..3.0,
    ) {
        let mut rng = Rng::new(seed, 0);
        let a = gen_feedback_matrix(FeedbackKind::GaussianFading, r, 15, &mut rng).unwrap();
        let combo: Vec<f64> = v1.iter().zip(&v2).map(|(x, y)| scale * x + y).collect();
        let y1 = transmit_feedback(&a, &v1, 0.0, &mut rng).unwrap().y;
        let y2 = transmit_feedback(&a, &v2, 0.0, &mut rng).unwrap().y;
        let y = transmit_feedback(&a, &combo, 0.0, &mut rng).unwrap().y;
        let diff = (y - (y1.scale(scale) + y2)).norm();
        prop_assert!(diff < 1e-10);
    }

    #[test]
    fn beams_are_orthonormal(seed in any::<u64>(), p in 1usize..9) {
        let beams = gen_beams(p, &mut Rng::new(seed, 1)).unwrap();
        prop_assert!(beams.orthonormality_error() < 1e-12);
    }

    #[test]
    fn ccdf_inverse_round_trips(u in 1e-6f64..1.0, rho in 0.1f64..100.0, p in 1usize..8) {
        let z = sinr_ccdf_inv(u, rho, p).unwrap();
        prop_assert!((sinr_ccdf(z, rho, p).unwrap() - u).abs() < 1e-10);
    }

    #[test]
    fn sinr_bounded_by_single_beam_snr(seed in any::<u64>(), p in 1usize..6, rho in 0.1f64..50.0) {
        let mut rng = Rng::new(seed, 2);
        let h = gen_downlink(20.max(p), p, &mut rng).unwrap();
        let t = compute_sinr(&h, &gen_beams(p, &mut rng).unwrap(), rho).unwrap();
        for u in 0..t.users() {
            for m in 0..p {
                let x = t.get(u, m);
                prop_assert!(x >= 0.0 && x <= rho * t.gains()[(u, m)] + 1e-12);
            }
        }
    }
}
