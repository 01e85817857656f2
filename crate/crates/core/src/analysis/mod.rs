//! Throughput, error-covariance and feedback-load figures.

mod ecm;
mod load;
mod throughput;

pub use ecm::{
    ecm_dedicated, ecm_shared_approx, ecm_shared_closed, ecm_shared_det_closed, ecm_shared_mc, ecm_shared_trace_closed,
    ecm_shared_trace_incgamma, eigenvalue_density, EcmStats, EcmVariant,
};
pub use load::{feedback_load, FeedbackLoad, LoadProtocol};
pub use throughput::{
    digital_throughput_closed, effective_throughput, rbf_throughput_approx, rbf_throughput_mc, ThroughputEstimate,
    ThroughputProtocol,
};

/// Mean and 95% normal-approximation half-width of a sample.
pub(crate) fn mean_ci(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, 1.96 * (var / n).sqrt())
}
