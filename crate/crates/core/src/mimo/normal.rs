//! Standard normal CDF in linear and log domain.

use libm::erfc;

const ASYMPTOTIC_BELOW: f64 = -8.0;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// `Phi(x)`, the standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// `ln Phi(x)`, finite for every finite `x`.
///
/// Below -8 the tail is evaluated from the asymptotic expansion
/// `Phi(x) = phi(x)/|x| * (1 - 1/x^2 + 3/x^4 - 15/x^6 + ...)`, which never
/// underflows.
pub fn log_norm_cdf(x: f64) -> f64 {
    if x < ASYMPTOTIC_BELOW {
        log_tail_asymptotic(x)
    } else if x > 0.0 {
        (-norm_cdf(-x)).ln_1p()
    } else {
        norm_cdf(x).ln()
    }
}

fn log_tail_asymptotic(x: f64) -> f64 {
    let inv_x2 = 1.0 / (x * x);
    let mut term = 1.0;
    let mut series = 1.0;
    for k in 1..=24 {
        let next = -term * (2 * k - 1) as f64 * inv_x2;
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        series += term;
    }
    -0.5 * x * x - (-x).ln() - HALF_LN_2PI + series.ln()
}
