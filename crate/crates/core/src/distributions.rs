//! Population models, exact samplers, and moments of the per-observation
//! log-likelihood ratio `Z = log(f0(U) / f1(U))`.
//!
//! The Poisson moment formulas used by [`HypothesisPair::llr_moments_analytic`]
//! follow from `Z = U·log(λ0/λ1) − (λ0 − λ1)` being affine in a Poisson count:
//! `E[Z] = λ·log(λ0/λ1) − (λ0 − λ1)` and `Var[Z] = λ·log²(λ0/λ1)` under rate `λ`.
//! They are checked against direct summation and Monte Carlo in the test suite.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

/// Default absolute tolerance used when moments have to be integrated numerically.
pub const DEFAULT_MOMENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Normal,
    Poisson,
    #[serde(alias = "laplace", alias = "al")]
    AsymmetricLaplace,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Normal => "normal",
            Family::Poisson => "poisson",
            Family::AsymmetricLaplace => "asymmetric_laplace",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One population model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DistributionSpec {
    Normal {
        mean: f64,
        variance: f64,
    },
    Poisson {
        rate: f64,
    },
    /// Density `λ/(κ+1/κ)·exp(λ(x−m)/κ)` left of `m` and `λ/(κ+1/κ)·exp(−λκ(x−m))` from `m` on.
    AsymmetricLaplace {
        location: f64,
        scale: f64,
        asymmetry: f64,
    },
}

impl DistributionSpec {
    pub fn normal(mean: f64, variance: f64) -> Result<Self> {
        let spec = DistributionSpec::Normal { mean, variance };
        spec.validate()?;
        Ok(spec)
    }

    pub fn poisson(rate: f64) -> Result<Self> {
        let spec = DistributionSpec::Poisson { rate };
        spec.validate()?;
        Ok(spec)
    }

    pub fn asymmetric_laplace(location: f64, scale: f64, asymmetry: f64) -> Result<Self> {
        let spec = DistributionSpec::AsymmetricLaplace { location, scale, asymmetry };
        spec.validate()?;
        Ok(spec)
    }

    pub fn family(&self) -> Family {
        match self {
            DistributionSpec::Normal { .. } => Family::Normal,
            DistributionSpec::Poisson { .. } => Family::Poisson,
            DistributionSpec::AsymmetricLaplace { .. } => Family::AsymmetricLaplace,
        }
    }

    /// Parameter vector in declaration order.
    pub fn params(&self) -> Vec<f64> {
        match *self {
            DistributionSpec::Normal { mean, variance } => vec![mean, variance],
            DistributionSpec::Poisson { rate } => vec![rate],
            DistributionSpec::AsymmetricLaplace { location, scale, asymmetry } => {
                vec![location, scale, asymmetry]
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn finite(name: &str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::domain(format!("{name} must be finite, got {v}")))
            }
        }
        fn positive(name: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::domain(format!("{name} must be > 0, got {v}")))
            }
        }
        match *self {
            DistributionSpec::Normal { mean, variance } => {
                finite("mean", mean)?;
                positive("variance", variance)
            }
            DistributionSpec::Poisson { rate } => positive("rate", rate),
            DistributionSpec::AsymmetricLaplace { location, scale, asymmetry } => {
                finite("location", location)?;
                positive("scale", scale)?;
                positive("asymmetry", asymmetry)
            }
        }
    }

    /// Natural log of the density (or mass function for Poisson) at `x`.
    pub fn log_density(&self, x: f64) -> Result<f64> {
        match *self {
            DistributionSpec::Normal { mean, variance } => {
                if !x.is_finite() {
                    return Err(Error::domain(format!("normal observation must be finite, got {x}")));
                }
                let d = x - mean;
                Ok(-0.5 * (2.0 * PI * variance).ln() - d * d / (2.0 * variance))
            }
            DistributionSpec::Poisson { rate } => {
                check_count(x)?;
                Ok(x * rate.ln() - rate - libm::lgamma(x + 1.0))
            }
            DistributionSpec::AsymmetricLaplace { location, scale, asymmetry } => {
                if !x.is_finite() {
                    return Err(Error::domain(format!("asymmetric Laplace observation must be finite, got {x}")));
                }
                let norm = (scale / (asymmetry + asymmetry.recip())).ln();
                let d = x - location;
                if d < 0.0 {
                    Ok(norm + scale / asymmetry * d)
                } else {
                    Ok(norm - scale * asymmetry * d)
                }
            }
        }
    }

    /// One exact draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            DistributionSpec::Normal { mean, variance } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + variance.sqrt() * z
            }
            DistributionSpec::Poisson { rate } => sample_poisson(rate, rng),
            DistributionSpec::AsymmetricLaplace { location, scale, asymmetry } => {
                let left_mass = asymmetry * asymmetry / (1.0 + asymmetry * asymmetry);
                let side: f64 = rng.random();
                let e: f64 = rng.sample(Exp1);
                if side < left_mass {
                    location - e * asymmetry / scale
                } else {
                    location + e / (scale * asymmetry)
                }
            }
        }
    }

    /// Probability mass strictly below the location parameter (AL only).
    pub fn left_mass(&self) -> Option<f64> {
        match *self {
            DistributionSpec::AsymmetricLaplace { asymmetry, .. } => {
                Some(asymmetry * asymmetry / (1.0 + asymmetry * asymmetry))
            }
            _ => None,
        }
    }

    // Length scale for mapping an unbounded tail onto (0, 1). For AL this is
    // twice the reciprocal decay rate, so the mapped integrand vanishes at 1.
    fn tail_scale(&self, left: bool) -> f64 {
        match *self {
            DistributionSpec::Normal { variance, .. } => variance.sqrt(),
            DistributionSpec::Poisson { rate } => rate.sqrt(),
            DistributionSpec::AsymmetricLaplace { scale, asymmetry, .. } => {
                if left {
                    2.0 * asymmetry / scale
                } else {
                    2.0 / (scale * asymmetry)
                }
            }
        }
    }

    fn breakpoint(&self) -> f64 {
        match *self {
            DistributionSpec::Normal { mean, .. } => mean,
            DistributionSpec::Poisson { rate } => rate,
            DistributionSpec::AsymmetricLaplace { location, .. } => location,
        }
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            DistributionSpec::Normal { mean, variance } => write!(f, "N({mean}, {variance})"),
            DistributionSpec::Poisson { rate } => write!(f, "Poisson({rate})"),
            DistributionSpec::AsymmetricLaplace { location, scale, asymmetry } => {
                write!(f, "AL({location}, {scale}, {asymmetry})")
            }
        }
    }
}

fn check_count(x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 && x.fract() == 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("Poisson observation must be a non-negative integer, got {x}")))
    }
}

/// Sequential-search inversion.
fn sample_poisson<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    let mut k = 0u32;
    let mut p = (-rate).exp();
    let mut cdf = p;
    // The cap only matters when the cdf rounds short of u far in the tail.
    let cap = (rate + 40.0 * rate.sqrt() + 100.0) as u32;
    while u > cdf && k < cap {
        k += 1;
        p *= rate / f64::from(k);
        cdf += p;
    }
    f64::from(k)
}

/// The ordered pair `(f0, f1)`; `f0` is the superior population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypothesisPair {
    f0: DistributionSpec,
    f1: DistributionSpec,
}

impl HypothesisPair {
    pub fn new(f0: DistributionSpec, f1: DistributionSpec) -> Result<Self> {
        f0.validate()?;
        f1.validate()?;
        if f0.family() != f1.family() {
            return Err(Error::domain(format!(
                "hypotheses must share a family, got {} and {}",
                f0.family(),
                f1.family()
            )));
        }
        if f0 == f1 {
            return Err(Error::domain("f0 and f1 must differ"));
        }
        Ok(HypothesisPair { f0, f1 })
    }

    /// Unit-variance normal pair, the setting of all normal tables.
    pub fn normal(mean0: f64, mean1: f64) -> Result<Self> {
        Self::new(DistributionSpec::normal(mean0, 1.0)?, DistributionSpec::normal(mean1, 1.0)?)
    }

    pub fn poisson(rate0: f64, rate1: f64) -> Result<Self> {
        Self::new(DistributionSpec::poisson(rate0)?, DistributionSpec::poisson(rate1)?)
    }

    pub fn asymmetric_laplace(p0: (f64, f64, f64), p1: (f64, f64, f64)) -> Result<Self> {
        Self::new(
            DistributionSpec::asymmetric_laplace(p0.0, p0.1, p0.2)?,
            DistributionSpec::asymmetric_laplace(p1.0, p1.1, p1.2)?,
        )
    }

    pub fn f0(&self) -> &DistributionSpec {
        &self.f0
    }

    pub fn f1(&self) -> &DistributionSpec {
        &self.f1
    }

    pub fn family(&self) -> Family {
        self.f0.family()
    }

    /// `log(f0(u) / f1(u))`.
    pub fn llr(&self, u: f64) -> Result<f64> {
        match (self.f0, self.f1) {
            (
                DistributionSpec::Normal { mean: m0, variance: v0 },
                DistributionSpec::Normal { mean: m1, variance: v1 },
            ) if v0 == v1 => {
                if !u.is_finite() {
                    return Err(Error::domain(format!("normal observation must be finite, got {u}")));
                }
                Ok((m0 - m1) * (u - 0.5 * (m0 + m1)) / v0)
            }
            (DistributionSpec::Poisson { rate: r0 }, DistributionSpec::Poisson { rate: r1 }) => {
                check_count(u)?;
                Ok(u * (r0 / r1).ln() - (r0 - r1))
            }
            _ => Ok(self.f0.log_density(u)? - self.f1.log_density(u)?),
        }
    }

    /// Closed-form LLR moments; available for normal and Poisson pairs.
    pub fn llr_moments_analytic(&self) -> Result<LlrMoments> {
        let moments = match (self.f0, self.f1) {
            (
                DistributionSpec::Normal { mean: m0, variance: v0 },
                DistributionSpec::Normal { mean: m1, variance: v1 },
            ) => {
                // Z = A u² + B u + C
                let a = 0.5 / v1 - 0.5 / v0;
                let b = m0 / v0 - m1 / v1;
                let c = -0.5 * (v0 / v1).ln() - m0 * m0 / (2.0 * v0) + m1 * m1 / (2.0 * v1);
                let under = |mu: f64, v: f64| {
                    let mean = a * (mu * mu + v) + b * mu + c;
                    let var = a * a * (4.0 * mu * mu * v + 2.0 * v * v) + b * b * v + 4.0 * a * b * mu * v;
                    (mean, var)
                };
                let (eta_x, sigma2_x) = under(m0, v0);
                let (eta_y, sigma2_y) = under(m1, v1);
                LlrMoments { eta_x, sigma2_x, eta_y, sigma2_y }
            }
            (DistributionSpec::Poisson { rate: r0 }, DistributionSpec::Poisson { rate: r1 }) => {
                let log_ratio = (r0 / r1).ln();
                LlrMoments {
                    eta_x: r0 * log_ratio - (r0 - r1),
                    sigma2_x: r0 * log_ratio * log_ratio,
                    eta_y: r1 * log_ratio - (r0 - r1),
                    sigma2_y: r1 * log_ratio * log_ratio,
                }
            }
            _ => {
                return Err(Error::UnsupportedVariant(format!(
                    "no closed-form LLR moments for the {} family; use llr_moments_numeric",
                    self.family()
                )))
            }
        };
        moments.validate()?;
        Ok(moments)
    }

    /// LLR moments by quadrature (continuous families) or direct summation
    /// (Poisson), each to absolute accuracy `tol`.
    pub fn llr_moments_numeric(&self, tol: f64) -> Result<LlrMoments> {
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::domain(format!("tolerance must be > 0, got {tol}")));
        }
        let (eta_x, sigma2_x) = self.moments_under(&self.f0, tol)?;
        let (eta_y, sigma2_y) = self.moments_under(&self.f1, tol)?;
        let moments = LlrMoments { eta_x, sigma2_x, eta_y, sigma2_y };
        moments.validate()?;
        Ok(moments)
    }

    /// Closed form where available, quadrature otherwise.
    pub fn llr_moments(&self) -> Result<LlrMoments> {
        match self.family() {
            Family::AsymmetricLaplace => self.llr_moments_numeric(DEFAULT_MOMENT_TOL),
            _ => self.llr_moments_analytic(),
        }
    }

    fn moments_under(&self, truth: &DistributionSpec, tol: f64) -> Result<(f64, f64)> {
        if let DistributionSpec::Poisson { rate } = *truth {
            return self.poisson_moments_by_summation(rate, tol);
        }
        // Z and log f are smooth between the two breakpoints and beyond them.
        let (p0, p1) = {
            let (a, b) = (self.f0.breakpoint(), self.f1.breakpoint());
            (a.min(b), a.max(b))
        };
        let llr = |u: f64| self.llr(u).unwrap_or(f64::NAN);
        let density = |u: f64| truth.log_density(u).map(f64::exp).unwrap_or(0.0);
        let left_scale = truth.tail_scale(true);
        let right_scale = truth.tail_scale(false);

        let integrate_all = |h: &dyn Fn(f64) -> f64, tol: f64| -> Result<f64> {
            let piece_tol = tol / 3.0;
            // u = p0 − scale·(−ln(1 − s)) on the left, u = p1 + scale·(−ln(1 − s)) on the right.
            let left = |s: f64| {
                let t = -(-s).ln_1p();
                let w = h(p0 - left_scale * t);
                if w == 0.0 {
                    0.0
                } else {
                    w * left_scale / (1.0 - s)
                }
            };
            let right = |s: f64| {
                let t = -(-s).ln_1p();
                let w = h(p1 + right_scale * t);
                if w == 0.0 {
                    0.0
                } else {
                    w * right_scale / (1.0 - s)
                }
            };
            let (l, _) = quadrature::integrate(left, 0.0, 1.0, piece_tol)?;
            let (m, _) = quadrature::integrate(h, p0, p1, piece_tol)?;
            let (r, _) = quadrature::integrate(right, 0.0, 1.0, piece_tol)?;
            Ok(l + m + r)
        };

        let mean = integrate_all(&|u| llr(u) * density(u), tol)?;
        let var = integrate_all(
            &|u| {
                let d = llr(u) - mean;
                d * d * density(u)
            },
            tol,
        )?;
        Ok((mean, var))
    }

    fn poisson_moments_by_summation(&self, rate: f64, tol: f64) -> Result<(f64, f64)> {
        let truth = DistributionSpec::Poisson { rate };
        let terms = |f: &dyn Fn(f64) -> f64| -> Result<f64> {
            let mut total = 0.0;
            let mut k = 0.0_f64;
            loop {
                let p = truth.log_density(k)?.exp();
                let term = p * f(k);
                total += term;
                if k > rate && p * (1.0 + f(k).abs()) < tol * 1e-3 {
                    return Ok(total);
                }
                k += 1.0;
                if k > 1e7 {
                    return Err(Error::Numeric {
                        message: "Poisson moment summation did not converge".into(),
                        achieved: term.abs(),
                    });
                }
            }
        };
        let llr = |k: f64| self.llr(k).unwrap_or(f64::NAN);
        let mean = terms(&llr)?;
        let var = terms(&|k| (llr(k) - mean).powi(2))?;
        Ok((mean, var))
    }
}

/// Mean and variance of `log(f0(U)/f1(U))` under `U ~ f0` (x side) and `U ~ f1` (y side).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LlrMoments {
    pub eta_x: f64,
    pub sigma2_x: f64,
    pub eta_y: f64,
    pub sigma2_y: f64,
}

impl LlrMoments {
    pub fn new(eta_x: f64, sigma2_x: f64, eta_y: f64, sigma2_y: f64) -> Result<Self> {
        let m = LlrMoments { eta_x, sigma2_x, eta_y, sigma2_y };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta_x > 0.0 && self.eta_y < 0.0) {
            return Err(Error::domain(format!(
                "LLR means must satisfy eta_x > 0 > eta_y, got eta_x = {}, eta_y = {}",
                self.eta_x, self.eta_y
            )));
        }
        if !(self.sigma2_x > 0.0 && self.sigma2_y > 0.0) || !self.sigma2_x.is_finite() || !self.sigma2_y.is_finite() {
            return Err(Error::domain(format!(
                "LLR variances must be finite and > 0, got {} and {}",
                self.sigma2_x, self.sigma2_y
            )));
        }
        Ok(())
    }
}
