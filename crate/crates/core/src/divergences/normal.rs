use libm::erfc;
use statrs::function::erf::erfc_inv;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use crate::error::{Error, Result};

/// Standard normal cumulative distribution function.
pub fn normal_cdf(a: f64) -> f64 {
    0.5 * erfc(-a * FRAC_1_SQRT_2)
}

fn normal_pdf(a: f64) -> f64 {
    (-0.5 * a * a).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Inverse of [`normal_cdf`] on `(0, 1)`.
pub fn normal_quantile(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::OutOfRange(format!("quantile needs eps in (0, 1), got {eps}")));
    }
    if eps == 0.5 {
        return Ok(0.0);
    }
    let mut x = -SQRT_2 * erfc_inv(2.0 * eps);
    // Newton steps on the accurate cdf tighten the inverse to its accuracy
    for _ in 0..2 {
        let pdf = normal_pdf(x);
        if pdf > 0.0 {
            x -= (normal_cdf(x) - eps) / pdf;
        }
    }
    Ok(x)
}

/// `n D + sqrt(n V) Phi^{-1}(eps)`.
pub fn second_order_value(d: f64, v: f64, n: usize, eps: f64) -> Result<f64> {
    if v < 0.0 {
        return Err(Error::OutOfRange(format!("variance must be nonnegative, got {v}")));
    }
    if n == 0 {
        return Err(Error::OutOfRange("blocklength must be at least 1".into()));
    }
    let n = n as f64;
    Ok(n * d + (n * v).sqrt() * normal_quantile(eps)?)
}
