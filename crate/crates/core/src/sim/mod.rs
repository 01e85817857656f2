//! Seeded experiment sweeps and their CSV output.

mod config;
mod output;

pub use config::{db_to_linear, parse_config, parse_config_as, ExperimentConfig, ExperimentKind, FeedbackFamily};
pub use output::{emit_csv, format_float, write_csv, CSV_HEADER, PLOT_SCRIPT};

use crate::analysis::{
    digital_throughput_closed, ecm_dedicated, ecm_shared_approx, ecm_shared_closed, ecm_shared_mc,
    effective_throughput, feedback_load, rbf_throughput_approx, rbf_throughput_mc, EcmStats, LoadProtocol,
    ThroughputEstimate, ThroughputProtocol,
};
use crate::channel::FeedbackKind;
use crate::error::{Error, Result};
use crate::protocol::{digital_thresholds, rbf_beta, BackoffParams, ProtocolConfig};
use crate::recovery::{block_diag_channels, required_channels, RecoveryMethod};
use crate::rng::Rng;

/// One value at one sweep point. Coordinates that do not apply are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub c_half: Option<f64>,
    pub s: Option<usize>,
    pub k: Option<usize>,
    pub r: Option<usize>,
    pub metric: String,
    /// NaN when `error` is set.
    pub value: f64,
    pub ci: Option<f64>,
    pub trials: Option<usize>,
    pub seed: u64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, Default)]
struct Point {
    c_half: Option<f64>,
    s: Option<usize>,
    k: Option<usize>,
    r: Option<usize>,
}

struct Sweep<'a> {
    cfg: &'a ExperimentConfig,
    rows: Vec<ResultRow>,
    next_stream: u64,
}

impl<'a> Sweep<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Self {
        Self {
            cfg,
            rows: Vec::new(),
            next_stream: 0,
        }
    }

    /// Fresh stream per Monte Carlo quantity, numbered in emission order.
    fn stream(&mut self) -> Rng {
        let rng = Rng::new(self.cfg.master_seed, self.next_stream);
        self.next_stream += 1;
        rng
    }

    fn push(&mut self, at: Point, metric: &str, value: Result<(f64, Option<f64>, Option<usize>)>) {
        let (value, ci, trials, error) = match value {
            Ok((v, ci, t)) => (v, ci, t, None),
            Err(e) => (f64::NAN, None, None, Some(e.to_string())),
        };
        self.rows.push(ResultRow {
            experiment: self.cfg.experiment.id().to_string(),
            c_half: at.c_half,
            s: at.s,
            k: at.k,
            r: at.r,
            metric: metric.to_string(),
            value,
            ci,
            trials,
            seed: self.cfg.master_seed,
            error,
        });
    }

    fn exact(&mut self, at: Point, metric: &str, value: Result<f64>) {
        self.push(at, metric, value.map(|v| (v, None, None)));
    }

    fn estimate(&mut self, at: Point, metric: &str, value: Result<ThroughputEstimate>) {
        self.push(
            at,
            metric,
            value.map(|e| (e.value, Some(e.ci_half_width), Some(e.trials))),
        );
    }

    fn protocol_config(&self, s: usize, c_half: f64, k: usize) -> ProtocolConfig {
        ProtocolConfig {
            n: self.cfg.n,
            p: self.cfg.p,
            rho_dl: self.cfg.rho_dl(),
            rho_ul: self.cfg.rho_ul(),
            s,
            c_half,
            k,
            recovery: self.cfg.recovery,
            feedback: self.cfg.feedback_kind(),
            channels: None,
            alpha: None,
            seed: self.cfg.master_seed,
        }
    }

    fn throughput(&mut self, at: Point, metric: &str, pc: &ProtocolConfig, protocol: ThroughputProtocol) {
        let rng = self.stream();
        let est = rbf_throughput_mc(pc, protocol, self.cfg.trials, &rng);
        self.estimate(at, metric, est);
    }

    fn baselines(&mut self) {
        let pc = self.protocol_config(1, 1.0, 1);
        let at = Point::default();
        self.throughput(at, "throughput_genie", &pc, ThroughputProtocol::GenieDedicated);
        self.throughput(
            at,
            "throughput_noiseless_dedicated",
            &pc,
            ThroughputProtocol::NoiselessDedicated,
        );
        self.throughput(
            at,
            "throughput_noisy_dedicated",
            &pc,
            ThroughputProtocol::NoisyDedicated,
        );
        let approx = rbf_throughput_approx(self.cfg.n, self.cfg.p, self.cfg.rho_dl());
        self.exact(at, "throughput_approx", approx);
        let load = feedback_load(LoadProtocol::Dedicated, self.cfg.p, self.cfg.n, 1, self.cfg.n);
        self.exact(at, "dedicated_feedback_reals", Ok(load.reals as f64));
        self.exact(at, "dedicated_feedback_bits", Ok(load.bits));
    }

    fn digital_closed(&mut self, at: Point, s: usize, k: usize) {
        let (n, p, rho) = (self.cfg.n, self.cfg.p, self.cfg.rho_dl());
        let v = digital_thresholds(s, n, k, rho, p).and_then(|th| digital_throughput_closed(n, p, rho, &th));
        self.exact(at, "throughput_digital_closed", v);
    }

    fn ecm(&mut self, at: Point, tag: &str, stats: Result<EcmStats>) {
        let (trace, det) = match stats {
            Ok(st) => (
                Ok((st.trace, st.trace_ci, st.trace_ci.map(|_| self.cfg.trials))),
                Ok(st.determinant),
            ),
            Err(e) => (Err(e.clone()), Err(e)),
        };
        self.push(at, &format!("ecm_trace_{tag}"), trace);
        self.exact(at, &format!("ecm_det_{tag}"), det);
    }
}

/// Runs `cfg` on the global rayon pool.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    Ok(run_inner(cfg))
}

/// Runs `cfg` on a dedicated pool of `workers` threads. Output is identical
/// for every worker count.
pub fn run_experiment_with_workers(cfg: &ExperimentConfig, workers: usize) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(|| run_inner(cfg)))
}

fn run_inner(cfg: &ExperimentConfig) -> Vec<ResultRow> {
    let mut sw = Sweep::new(cfg);
    let (n, p) = (cfg.n, cfg.p);
    match cfg.experiment {
        ExperimentKind::Fig1EcmTrace => {
            let rho = cfg.rho_ul();
            let ded = ecm_dedicated(n, rho);
            sw.ecm(Point::default(), "dedicated", ded);
            for &s in cfg.s_values() {
                for &r in cfg.r_values() {
                    let at = Point {
                        s: Some(s),
                        r: Some(r),
                        ..Point::default()
                    };
                    let rng = sw.stream();
                    sw.ecm(at, "mc", ecm_shared_mc(s, r, 1.0, 1.0 / rho, cfg.trials, &rng));
                    sw.ecm(at, "closed", ecm_shared_closed(s, r, rho));
                    sw.ecm(at, "approx", ecm_shared_approx(s, r, rho));
                }
            }
        }
        ExperimentKind::Fig2AnalogSweep => {
            sw.baselines();
            for &s in cfg.s_values() {
                for &c in cfg.c_half_values() {
                    let pc = sw.protocol_config(s, c, 1);
                    let at = Point {
                        c_half: Some(c),
                        s: Some(s),
                        r: pc.channel_count().ok(),
                        ..Point::default()
                    };
                    sw.throughput(at, "throughput_analog_shared", &pc, ThroughputProtocol::AnalogShared);
                    if let Some(r) = at.r {
                        sw.exact(
                            at,
                            "feedback_reals",
                            Ok(feedback_load(LoadProtocol::AnalogShared, p, r, 1, n).reals as f64),
                        );
                    }
                }
            }
        }
        ExperimentKind::Fig3Methods => {
            sw.baselines();
            let groups = cfg.block_groups.unwrap_or(2);
            for &s in cfg.s_values() {
                for &c in cfg.c_half_values() {
                    for (metric, recovery, feedback) in [
                        (
                            "throughput_max_correlation".to_string(),
                            RecoveryMethod::MaxCorrelation,
                            FeedbackKind::GaussianFading,
                        ),
                        (
                            "throughput_lasso".to_string(),
                            RecoveryMethod::Lasso,
                            FeedbackKind::GaussianFading,
                        ),
                        (
                            format!("throughput_max_correlation_block{groups}"),
                            RecoveryMethod::MaxCorrelation,
                            FeedbackKind::BlockDiagonal { groups },
                        ),
                    ] {
                        let mut pc = sw.protocol_config(s, c, 1);
                        pc.recovery = recovery;
                        pc.feedback = feedback;
                        let at = Point {
                            c_half: Some(c),
                            s: Some(s),
                            r: pc.channel_count().ok(),
                            ..Point::default()
                        };
                        sw.throughput(at, &metric, &pc, ThroughputProtocol::AnalogShared);
                    }
                }
            }
        }
        ExperimentKind::Fig5DigitalSweep => {
            sw.baselines();
            for &s in cfg.s_values() {
                for &k in cfg.k_values() {
                    sw.digital_closed(
                        Point {
                            s: Some(s),
                            k: Some(k),
                            ..Point::default()
                        },
                        s,
                        k,
                    );
                    for &c in cfg.c_half_values() {
                        let pc = sw.protocol_config(s, c, k);
                        let at = Point {
                            c_half: Some(c),
                            s: Some(s),
                            k: Some(k),
                            r: pc.channel_count().ok(),
                        };
                        sw.throughput(at, "throughput_digital_shared", &pc, ThroughputProtocol::DigitalShared);
                        if let Some(r) = at.r {
                            sw.exact(
                                at,
                                "feedback_bits",
                                Ok(feedback_load(LoadProtocol::DigitalShared, p, r, k, n).bits),
                            );
                        }
                    }
                }
            }
        }
        ExperimentKind::Fig6BitBudget => {
            sw.baselines();
            for &budget in cfg.budgets() {
                for &s in cfg.s_values() {
                    for &k in cfg.k_values() {
                        let r = budget / (p * k);
                        if r == 0 {
                            continue;
                        }
                        let mut pc = sw.protocol_config(s, 1.0, k);
                        pc.channels = Some(r);
                        let at = Point {
                            s: Some(s),
                            k: Some(k),
                            r: Some(r),
                            ..Point::default()
                        };
                        sw.exact(at, "bit_budget", Ok(budget as f64));
                        sw.exact(
                            at,
                            "feedback_bits",
                            Ok(feedback_load(LoadProtocol::DigitalShared, p, r, k, n).bits),
                        );
                        sw.throughput(at, "throughput_digital_shared", &pc, ThroughputProtocol::DigitalShared);
                        sw.digital_closed(at, s, k);
                    }
                }
            }
        }
        ExperimentKind::Custom => {
            let protocol = cfg.protocol.unwrap_or(ThroughputProtocol::AnalogShared);
            let name = match protocol {
                ThroughputProtocol::GenieDedicated => "throughput_genie",
                ThroughputProtocol::NoiselessDedicated => "throughput_noiseless_dedicated",
                ThroughputProtocol::NoisyDedicated => "throughput_noisy_dedicated",
                ThroughputProtocol::AnalogShared => "throughput_analog_shared",
                ThroughputProtocol::DigitalShared => "throughput_digital_shared",
            };
            for &s in cfg.s_values() {
                for &k in cfg.k_values() {
                    for &c in cfg.c_half_values() {
                        let pc = sw.protocol_config(s, c, k);
                        let at = Point {
                            c_half: Some(c),
                            s: Some(s),
                            k: Some(k),
                            r: pc.channel_count().ok(),
                        };
                        sw.throughput(at, name, &pc, protocol);
                        if protocol == ThroughputProtocol::DigitalShared {
                            sw.digital_closed(at, s, k);
                        }
                    }
                }
            }
        }
    }
    sw.rows
}

/// Optimal back-off over the `(s, c/2)` grid of `cfg`, plus the dedicated
/// case. Metrics: `beta`, `sigma_eff`, `delta_star`, `eta` and `r_eff`, the
/// effective sum rate.
pub fn backoff_table(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let mut sw = Sweep::new(cfg);
    let (n, p) = (cfg.n, cfg.p);
    let sigma_w = (1.0 / cfg.rho_ul()).sqrt();
    let beta = rbf_beta(n, p, cfg.rho_dl());
    let row = |sw: &mut Sweep, at: Point, sigma: f64| {
        let params = beta.clone().and_then(|b| BackoffParams::optimal(b, sigma));
        sw.exact(at, "beta", beta.clone());
        sw.exact(at, "sigma_eff", Ok(sigma));
        sw.exact(at, "delta_star", params.clone().map(|x| x.delta));
        sw.exact(at, "eta", params.clone().map(|x| x.eta));
        sw.exact(
            at,
            "r_eff",
            params.and_then(|x| effective_throughput(x.beta, x.delta, x.sigma_w, p)),
        );
    };
    row(
        &mut sw,
        Point {
            r: Some(n),
            ..Point::default()
        },
        sigma_w,
    );
    for &s in cfg.s_values() {
        for &c in cfg.c_half_values() {
            let r = match cfg.feedback_kind() {
                FeedbackKind::BlockDiagonal { groups } => block_diag_channels(c, s, n, groups),
                _ => required_channels(c, s, n),
            };
            let at = Point {
                c_half: Some(c),
                s: Some(s),
                r: r.as_ref().ok().copied(),
                ..Point::default()
            };
            match r {
                Ok(r) => row(&mut sw, at, sigma_w / (r as f64).sqrt()),
                Err(e) => sw.exact(at, "delta_star", Err(e)),
            }
        }
    }
    for r in &mut sw.rows {
        r.experiment = "backoff".into();
    }
    Ok(sw.rows)
}
