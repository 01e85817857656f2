use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoadProtocol {
    AnalogShared,
    DigitalShared,
    Dedicated,
}

/// Feedback volume per coherence block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackLoad {
    pub reals: usize,
    pub bits: f64,
}

/// Analog shared: `p·r` reals. Digital shared: `p·k·r` bits. Dedicated:
/// `n` reals plus `n·log2(p)` bits of beam index.
pub fn feedback_load(protocol: LoadProtocol, p: usize, r: usize, k: usize, n: usize) -> FeedbackLoad {
    match protocol {
        LoadProtocol::AnalogShared => FeedbackLoad {
            reals: p * r,
            bits: 0.0,
        },
        LoadProtocol::DigitalShared => FeedbackLoad {
            reals: 0,
            bits: (p * k * r) as f64,
        },
        LoadProtocol::Dedicated => FeedbackLoad {
            reals: n,
            bits: n as f64 * (p as f64).log2(),
        },
    }
}
