//! Special functions used by the closed-form analysis.

use statrs::function::erf::erfc;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Gaussian tail probability `Q(x) = P[N(0,1) > x]`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Exponential integral `E1(x) = Γ(0, x)` for `x > 0`.
pub fn exp_integral_e1(x: f64) -> f64 {
    assert!(x > 0.0, "E1 requires x > 0, got {x}");
    if x <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -x / k as f64;
            let contrib = -term / k as f64;
            sum += contrib;
            if contrib.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        -EULER_GAMMA - x.ln() + sum
    } else {
        // Modified Lentz on the continued fraction.
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// Upper incomplete gamma `Γ(-m, x)` for a nonpositive integer order `-m`.
///
/// Downward recurrence from `Γ(0, x) = E1(x)`; loses digits quickly as `m`
/// grows, so only suitable for small `m`.
pub fn upper_gamma_neg_int(m: u32, x: f64) -> f64 {
    let mut g = exp_integral_e1(x);
    let ex = (-x).exp();
    for j in 1..=m {
        let jf = j as f64;
        g = (x.powi(-(j as i32)) * ex - g) / jf;
    }
    g
}

/// Generalized Laguerre polynomial `L_l^{(a)}(x)` via the three-term recurrence.
pub fn laguerre(l: usize, a: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if l == 0 {
        return prev;
    }
    let mut cur = 1.0 + a - x;
    for k in 1..l {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - x) * cur - (kf + a) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}
