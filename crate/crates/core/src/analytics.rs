//! Closed-form and series quantities: expected inferior allocations, Wald
//! thresholds, Wald ASN approximations and leading-order log error rates.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::distributions::LlrMoments;
use crate::error::{Error, Result};

/// Standard normal CDF, `Φ(x) = erfc(−x/√2)/2`.
///
/// `libm::erfc` is a port of the FreeBSD msun routine (error below 1 ulp), well
/// inside the 1e-12 absolute accuracy the series needs.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Wald's SPRT boundaries for nominal error rates `alpha` and `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Upper boundary; crossing it accepts K1.
    pub a: f64,
    /// Lower boundary; crossing it accepts K0.
    pub b: f64,
    pub alpha: f64,
    pub beta: f64,
}

pub fn wald_thresholds(alpha: f64, beta: f64) -> Result<Thresholds> {
    for (name, v) in [("alpha", alpha), ("beta", beta)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::domain(format!("{name} must lie in (0, 1), got {v}")));
        }
    }
    Ok(Thresholds { a: ((1.0 - beta) / alpha).ln(), b: (beta / (1.0 - alpha)).ln(), alpha, beta })
}

/// `N1* = ½(σx²/ηx² + σy²/ηy²)`, the limiting expected number of draws from
/// the inferior population.
pub fn n1_star_closed_form(m: &LlrMoments) -> f64 {
    0.5 * (m.sigma2_x / (m.eta_x * m.eta_x) + m.sigma2_y / (m.eta_y * m.eta_y))
}

/// `Σ_{i≥1} Φ(−cx√i) + Σ_{j≥1} Φ(−cy√j)` with `c = |η|/σ` per side.
///
/// Each side stops at the first index `m` with `Φ(−c√m) < eps` and
/// `m > (8/c)²`. Since `Φ(−x) ≤ φ(x)/x`, the omitted remainder is at most
/// `∫_m^∞ Φ(−c√t) dt ≤ (2/c²)·Φ(−c√m)`, which is below `2e-15/c²` once `c√m > 8`.
pub fn n1_star_series(m: &LlrMoments, eps: f64) -> f64 {
    let cx = m.eta_x / m.sigma2_x.sqrt();
    let cy = -m.eta_y / m.sigma2_y.sqrt();
    one_sided_series(cx, eps) + one_sided_series(cy, eps)
}

fn one_sided_series(c: f64, eps: f64) -> f64 {
    let min_terms = (8.0 / c).powi(2);
    let mut total = 0.0;
    let mut i = 1u64;
    loop {
        let term = normal_cdf(-c * (i as f64).sqrt());
        total += term;
        if term < eps && (i as f64) > min_terms {
            return total;
        }
        i += 1;
    }
}

/// Wald's approximations `(ASN_K0, ASN_K1)` to the expected SPRT length under
/// each hypothesis.
pub fn asn_wald(m: &LlrMoments, t: &Thresholds) -> (f64, f64) {
    let k0 = (t.b * (1.0 - t.alpha) + t.a * t.alpha) / -m.eta_x;
    let k1 = (t.b * t.beta + t.a * (1.0 - t.beta)) / -m.eta_y;
    (k0, k1)
}

/// Leading terms `(log PICS_I, log PICS_II) = (ηy·ASN_K1, −ηx·ASN_K0)`.
/// The `o(ASN)` remainders are not included.
pub fn log_pics_approx(m: &LlrMoments, t: &Thresholds) -> (f64, f64) {
    let (k0, k1) = asn_wald(m, t);
    (m.eta_y * k1, -m.eta_x * k0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticSummary {
    pub n1_star_closed: f64,
    pub n1_star_series: f64,
    pub asn_k0: f64,
    pub asn_k1: f64,
    pub log_pics_i: f64,
    pub log_pics_ii: f64,
}

/// Series truncation used for reported values.
pub const SERIES_EPS: f64 = 1e-12;

impl AnalyticSummary {
    pub fn new(m: &LlrMoments, t: &Thresholds) -> Self {
        let (asn_k0, asn_k1) = asn_wald(m, t);
        let (log_pics_i, log_pics_ii) = log_pics_approx(m, t);
        AnalyticSummary {
            n1_star_closed: n1_star_closed_form(m),
            n1_star_series: n1_star_series(m, SERIES_EPS),
            asn_k0,
            asn_k1,
            log_pics_i,
            log_pics_ii,
        }
    }
}
