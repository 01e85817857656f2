//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Every stochastic check uses a fixed seed.

use std::time::Instant;

use csfb::analysis::{
    digital_throughput_closed, ecm_dedicated, ecm_shared_mc, ecm_shared_trace_closed, rbf_throughput_mc,
    ThroughputProtocol,
};
use csfb::channel::{gen_downlink, gen_feedback_matrix, transmit_feedback, FeedbackKind};
use csfb::protocol::{backoff_condition, digital_thresholds, optimal_backoff, ProtocolConfig};
use csfb::rbf::{compute_sinr, gen_beams, sinr_ccdf};
use csfb::recovery::{lift_to_real, recover, required_channels, rip_constant, RecoveryMethod};
use csfb::sim::{run_experiment_with_workers, write_csv, ExperimentConfig, ExperimentKind};
use csfb::Rng;
use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand_distr::{Distribution, Exp1, StandardNormal};
use statrs::function::erf::erfc;

const SEED: u64 = 1;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn c1_channel_anchors() -> Outcome {
    let cases = [((0.4, 6), 11), ((0.8, 5), 19), ((0.8, 4), 15), ((2.0, 1), 10)];
    let mut pass = true;
    let mut got = Vec::new();
    for ((c, s), want) in cases {
        let r = required_channels(c, s, 100).unwrap();
        pass &= r == want;
        got.push(format!("({c},{s})->{r}/{want}"));
    }
    outcome(pass, got.join(" "))
}

fn c2_dedicated_ecm() -> Outcome {
    let mut pass = true;
    let mut got = Vec::new();
    for (n, rho) in [(100usize, 10.0f64), (10, 1.0)] {
        let st = ecm_dedicated(n, rho).unwrap();
        let tr_err = rel(st.trace, n as f64 / (1.0 + rho));
        let det_err = rel(st.determinant, (1.0 + rho).powf(-(n as f64)));
        pass &= tr_err <= 4.0 * f64::EPSILON && det_err <= 64.0 * f64::EPSILON;
        got.push(format!(
            "(n={n},rho={rho}) trace rel {tr_err:.1e} det rel {det_err:.1e}"
        ));
    }
    outcome(pass, got.join("; "))
}

fn c3_shared_ecm() -> Outcome {
    let mut pass = true;
    let mut got = Vec::new();
    for (i, (s, r, rho)) in [(1usize, 1usize, 1.0f64), (2, 8, 10.0), (6, 11, 10.0)]
        .into_iter()
        .enumerate()
    {
        let mc = ecm_shared_mc(s, r, 1.0, 1.0 / rho, 100_000, &Rng::new(SEED, i as u64)).unwrap();
        let closed = ecm_shared_trace_closed(s, r, rho).unwrap();
        let e = rel(mc.trace, closed);
        pass &= e <= 0.02;
        got.push(format!(
            "({s},{r},{rho}) mc {:.5} closed {closed:.5} err {:.1}%",
            mc.trace,
            100.0 * e
        ));
    }
    let (s, r, rho) = (6usize, 50usize, 10.0f64);
    let closed = ecm_shared_trace_closed(s, r, rho).unwrap();
    let approx = s as f64 / (rho * r as f64);
    let e = rel(closed, approx);
    pass &= e <= 0.10;
    got.push(format!(
        "r=50 closed {closed:.5} vs s/(rho r) {approx:.5} err {:.1}%",
        100.0 * e
    ));
    outcome(pass, got.join("; "))
}

fn q(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

fn c4_backoff() -> Outcome {
    let mut pass = true;
    let mut got = Vec::new();
    for (beta, sigma) in [(10.0f64, 0.1f64), (10.0, 0.316), (6.0, 0.5)] {
        let d = optimal_backoff(beta, sigma).unwrap();
        let resid = backoff_condition(d, beta, sigma).abs();
        let reff = |x: f64| (1.0 - q(x / sigma)) * (beta - x).log2();
        let grid_best = (0..)
            .map(|i| i as f64 * 1e-3)
            .take_while(|x| *x < beta - 1.0)
            .max_by(|a, b| reff(*a).total_cmp(&reff(*b)))
            .unwrap();
        let gap = (d - grid_best).abs();
        pass &= resid < 1e-8 && gap <= 2e-3;
        got.push(format!(
            "({beta},{sigma}) delta {d:.4} grid {grid_best:.3} resid {resid:.1e}"
        ));
    }
    outcome(pass, got.join("; "))
}

/// Per-beam SINRs built from i.i.d. unit-exponential beam gains, which is the
/// law of `|h φ_m|²` for an isotropic channel and orthonormal beams.
fn oracle_sinr_row(p: usize, rho: f64, rng: &mut Rng) -> Vec<f64> {
    let g: Vec<f64> = (0..p).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = g.iter().sum();
    g.iter().map(|x| x / (1.0 / rho + total - x)).collect()
}

fn c5_digital_closed() -> Outcome {
    let (n, p, rho, s) = (100usize, 4usize, 10.0f64, 1usize);
    let trials = 100_000;
    let mut pass = true;
    let mut got = Vec::new();
    for k in [2usize, 4] {
        let th = digital_thresholds(s, n, k, rho, p).unwrap();
        let closed = digital_throughput_closed(n, p, rho, &th).unwrap();
        let z = th.zetas();
        let mut rng = Rng::new(SEED, 50 + k as u64);
        let mut total = 0.0;
        for _ in 0..trials {
            let mut col_max = vec![0.0f64; p];
            for _ in 0..n {
                for (m, x) in oracle_sinr_row(p, rho, &mut rng).into_iter().enumerate() {
                    col_max[m] = col_max[m].max(x);
                }
            }
            for x in col_max {
                if let Some(zi) = z.iter().rev().find(|zi| x >= **zi) {
                    total += (1.0 + zi).log2();
                }
            }
        }
        let mc = total / trials as f64;
        let e = rel(closed, mc);
        pass &= e <= 0.01;
        got.push(format!("k={k} closed {closed:.4} oracle {mc:.4} err {:.2}%", 100.0 * e));
    }
    outcome(pass, got.join("; "))
}

fn c6_sinr_law() -> Outcome {
    let (p, rho) = (4usize, 10.0f64);
    let zetas = [0.5, 1.0, 2.0, 4.0];
    let mut counts = [0usize; 4];
    let (chunks, per) = (1000usize, 1000usize);
    let mut rng = Rng::new(SEED, 60);
    for _ in 0..chunks {
        let h = gen_downlink(per, p, &mut rng).unwrap();
        let beams = gen_beams(p, &mut rng).unwrap();
        let t = compute_sinr(&h, &beams, rho).unwrap();
        for u in 0..per {
            let x = t.get(u, 0);
            for (c, z) in counts.iter_mut().zip(zetas) {
                *c += usize::from(x > z);
            }
        }
    }
    let total = (chunks * per) as f64;
    let worst = zetas
        .iter()
        .zip(counts)
        .map(|(z, c)| (c as f64 / total - sinr_ccdf(*z, rho, p).unwrap()).abs())
        .fold(0.0, f64::max);
    outcome(
        worst < 0.01,
        format!("max |empirical - law| = {worst:.5} over 1e6 draws"),
    )
}

fn c7_support_recovery() -> Outcome {
    let (n, s, sigma_w_sq) = (100usize, 3usize, 0.01f64);
    let r = required_channels(2.0, s, n).unwrap();
    let trials = 500;
    let alpha = (sigma_w_sq.sqrt() * (2.0 * (n as f64).ln() / (2 * r) as f64).sqrt()).max(1e-6);
    let (mut mc_hits, mut lasso_hits) = (0usize, 0usize);
    let mut rng = Rng::new(SEED, 70);
    for _ in 0..trials {
        let a = gen_feedback_matrix(FeedbackKind::GaussianFading, r, n, &mut rng).unwrap();
        let mut truth: Vec<usize> = sample(&mut rng, n, s).into_vec();
        truth.sort_unstable();
        let mut v = vec![0.0; n];
        for &j in &truth {
            v[j] = 1.0;
        }
        let obs = transmit_feedback(&a, &v, sigma_w_sq, &mut rng).unwrap();
        let sys = lift_to_real(a.matrix(), &obs.y).unwrap();
        let exact = |m: RecoveryMethod| {
            recover(&sys, m, s, alpha)
                .map(|res| {
                    let mut got = res.support.indices().to_vec();
                    got.sort_unstable();
                    got == truth
                })
                .unwrap_or(false)
        };
        mc_hits += usize::from(exact(RecoveryMethod::MaxCorrelation));
        lasso_hits += usize::from(exact(RecoveryMethod::Lasso));
    }
    let (mc, la) = (mc_hits as f64 / trials as f64, lasso_hits as f64 / trials as f64);
    outcome(
        r == 28 && mc >= 0.90 && la >= mc - 0.02,
        format!("r={r} max-correlation {mc:.3} lasso {la:.3} ({trials} trials)"),
    )
}

fn c8_analog_anchor() -> Outcome {
    let cfg = ProtocolConfig {
        s: 5,
        c_half: 0.8,
        seed: SEED,
        ..ProtocolConfig::default()
    };
    let r = cfg.channel_count().unwrap();
    let rng = Rng::new(SEED, 80);
    let shared = rbf_throughput_mc(&cfg, ThroughputProtocol::AnalogShared, 500, &rng).unwrap();
    let ideal = rbf_throughput_mc(&cfg, ThroughputProtocol::NoiselessDedicated, 500, &rng).unwrap();
    let ratio = shared.value / ideal.value;
    outcome(
        r == 19 && ratio >= 0.85,
        format!(
            "r={r} analog shared {:.3}±{:.3} noiseless dedicated {:.3}±{:.3} ratio {ratio:.3} (gate 0.85)",
            shared.value, shared.ci_half_width, ideal.value, ideal.ci_half_width
        ),
    )
}

fn c9_digital_anchor() -> Outcome {
    let cfg = ProtocolConfig {
        s: 1,
        k: 4,
        c_half: 2.0,
        seed: SEED,
        ..ProtocolConfig::default()
    };
    let r = cfg.channel_count().unwrap();
    let th = digital_thresholds(cfg.s, cfg.n, cfg.k, cfg.rho_dl, cfg.p).unwrap();
    let closed = digital_throughput_closed(cfg.n, cfg.p, cfg.rho_dl, &th).unwrap();
    let mc = rbf_throughput_mc(&cfg, ThroughputProtocol::DigitalShared, 500, &Rng::new(SEED, 90)).unwrap();
    let ratio = mc.value / closed;
    outcome(
        r == 10 && ratio >= 0.95,
        format!(
            "r={r} digital shared {:.3}±{:.3} closed {closed:.3} ratio {ratio:.3}",
            mc.value, mc.ci_half_width
        ),
    )
}

fn c10_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut pass = true;
    let mut got = Vec::new();
    for kind in ExperimentKind::ALL {
        let mut cfg = ExperimentConfig::preset(kind);
        cfg.trials = 20;
        let mut files = Vec::new();
        for (run, workers) in [(0, 1usize), (1, 1), (2, 4), (3, 4)] {
            let rows = run_experiment_with_workers(&cfg, workers).unwrap();
            let path = dir.path().join(format!("{}_{run}.csv", kind.id()));
            write_csv(&rows, &path).unwrap();
            files.push(std::fs::read(&path).unwrap());
        }
        let same = files.windows(2).all(|w| w[0] == w[1]);
        pass &= same;
        got.push(format!("{}:{}", kind.id(), if same { "identical" } else { "DIFFERS" }));
    }
    outcome(pass, got.join(" "))
}

/// Squared singular values of a two-column matrix from its 2×2 Gram matrix.
fn gram2_extremes(c0: &[f64], c1: &[f64]) -> (f64, f64) {
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let (a, b, c) = (dot(c0, c0), dot(c0, c1), dot(c1, c1));
    let mid = 0.5 * (a + c);
    let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    (mid - rad, mid + rad)
}

fn c11_rip_oracle() -> Outcome {
    let mut rng = Rng::new(SEED, 110);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let a = DMatrix::from_fn(8, 12, |_, _| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z / 8f64.sqrt()
        });
        let cols: Vec<Vec<f64>> = (0..12).map(|j| a.column(j).iter().copied().collect()).collect();
        let mut oracle = 0.0f64;
        for i in 0..12 {
            for j in i + 1..12 {
                let (lo, hi) = gram2_extremes(&cols[i], &cols[j]);
                oracle = oracle.max(1.0 - lo).max(hi - 1.0);
            }
        }
        let eps = rip_constant(&a, 2).unwrap();
        worst = worst.max((eps - oracle).abs());
    }
    outcome(
        worst <= 1e-12,
        format!("max |rip - oracle| = {worst:.1e} over 10 instances"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("channel-count anchors", c1_channel_anchors),
        ("dedicated ECM exact", c2_dedicated_ecm),
        ("shared ECM consistency", c3_shared_ecm),
        ("back-off optimality", c4_backoff),
        ("digital closed form vs oracle", c5_digital_closed),
        ("SINR law", c6_sinr_law),
        ("support recovery at n=100, s=3", c7_support_recovery),
        ("analog end-to-end anchor", c8_analog_anchor),
        ("digital end-to-end anchor", c9_digital_anchor),
        ("determinism across workers", c10_determinism),
        ("RIP oracle equivalence", c11_rip_oracle),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "[{tag}] {:>2} {name}: {} ({:.1}s)",
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
        if !o.pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
    } else {
        println!(
            "acceptance: {} of {} criteria failed: {failed:?}",
            failed.len(),
            criteria.len()
        );
        std::process::exit(1);
    }
}
