//! Scalar random variables: primitive beta/gamma/Poisson draws and the
//! stick-breaking identities built from them.
//!
//! Primitive samplers:
//! - `Beta(1, b)` by inversion, `V = 1 - U^(1/b)`.
//! - general `Beta(a, b)` by Cheng (1978) rejection, via `rand_distr::Beta`.
//! - `Gamma(k, rate)` by Marsaglia & Tsang (2000), via `rand_distr::Gamma`.
//! - Poisson by inversion for small means and transformed rejection
//!   (PTRS, Hörmann 1993) otherwise, via `rand_distr::Poisson`.
//!
//! All draws consume only the supplied [`RngStream`], so results are a pure
//! function of the parameters and the stream.

use rand::Rng;
use rand_distr::{Distribution, Open01};

use crate::error::{ensure_positive, Error, Result};
use crate::rng::RngStream;

/// Expected ignored stick mass below which the default truncation stops.
pub const DEFAULT_STICK_TOLERANCE: f64 = 1e-12;

/// `Beta(1, b)` by inversion; strictly positive, at most 1.
pub fn beta_one(b: f64, rng: &mut RngStream) -> f64 {
    let u: f64 = Open01.sample(rng);
    -(u.ln() / b).exp_m1()
}

/// `Beta(a, b)` with the degenerate conventions `Beta(c, 0) = delta_1` and
/// `Beta(0, c) = delta_0` for `c > 0`.
pub fn beta(a: f64, b: f64, rng: &mut RngStream) -> Result<f64> {
    if !(a >= 0.0 && a.is_finite()) {
        return Err(Error::param("a", a, "beta shape must be finite and >= 0"));
    }
    if !(b >= 0.0 && b.is_finite()) {
        return Err(Error::param("b", b, "beta shape must be finite and >= 0"));
    }
    match (a > 0.0, b > 0.0) {
        (false, false) => Err(Error::param("a + b", 0.0, "beta shapes cannot both be zero")),
        (true, false) => Ok(1.0),
        (false, true) => Ok(0.0),
        (true, true) if a == 1.0 => Ok(beta_one(b, rng)),
        (true, true) => {
            let d = rand_distr::Beta::new(a, b).map_err(|_| Error::param("a", a, "bad beta shape"))?;
            Ok(d.sample(rng))
        }
    }
}

/// `Gamma(shape, rate)`; mean `shape / rate`.
pub fn gamma(shape: f64, rate: f64, rng: &mut RngStream) -> Result<f64> {
    ensure_positive("shape", shape)?;
    ensure_positive("rate", rate)?;
    let d = rand_distr::Gamma::new(shape, 1.0 / rate)
        .map_err(|_| Error::param("shape", shape, "bad gamma parameters"))?;
    Ok(d.sample(rng))
}

pub fn poisson(mean: f64, rng: &mut RngStream) -> Result<u64> {
    if mean == 0.0 {
        return Ok(0);
    }
    ensure_positive("mean", mean)?;
    let d = rand_distr::Poisson::new(mean).map_err(|_| Error::param("mean", mean, "bad poisson mean"))?;
    Ok(d.sample(rng) as u64)
}

pub fn bernoulli(p: f64, rng: &mut RngStream) -> bool {
    rng.random::<f64>() < p
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StickBrokenBetaConfig {
    pub a: f64,
    pub b: f64,
    pub truncation: u32,
}

impl StickBrokenBetaConfig {
    pub fn new(a: f64, b: f64, truncation: u32) -> Result<Self> {
        ensure_positive("a", a)?;
        ensure_positive("b", b)?;
        if truncation == 0 {
            return Err(Error::param("truncation", 0.0, "must be >= 1"));
        }
        Ok(Self { a, b, truncation })
    }

    /// Truncates where the expected ignored mass
    /// `a/(a+b) * ((a+b)/(1+a+b))^R` drops below [`DEFAULT_STICK_TOLERANCE`].
    pub fn with_default_truncation(a: f64, b: f64) -> Result<Self> {
        ensure_positive("a", a)?;
        ensure_positive("b", b)?;
        let p = a / (a + b);
        let ratio = (a + b) / (1.0 + a + b);
        let r = ((DEFAULT_STICK_TOLERANCE / p).ln() / ratio.ln()).floor() as u32 + 1;
        Self::new(a, b, r.max(1))
    }
}

/// Partial sums `pi_1, ..., pi_R` of the stick-broken beta construction:
/// `pi_R = sum_{i<=R} V_i prod_{j<i}(1 - V_j) 1(Y_i = 1)` with
/// `V_i ~ Beta(1, a+b)` and `Y_i ~ Bern(a/(a+b))`.
pub fn stick_broken_beta_partial_sums(cfg: &StickBrokenBetaConfig, rng: &mut RngStream) -> Vec<f64> {
    let c = cfg.a + cfg.b;
    let p = cfg.a / c;
    let mut remaining = 1.0;
    let mut total = 0.0;
    let mut sums = Vec::with_capacity(cfg.truncation as usize);
    for _ in 0..cfg.truncation {
        let v = beta_one(c, rng);
        if bernoulli(p, rng) {
            total += v * remaining;
        }
        remaining *= 1.0 - v;
        sums.push(total);
    }
    sums
}

/// An approximate `Beta(a, b)` draw from the truncated stick-breaking series.
pub fn sample_stick_broken_beta(cfg: &StickBrokenBetaConfig, rng: &mut RngStream) -> f64 {
    *stick_broken_beta_partial_sums(cfg, rng)
        .last()
        .expect("truncation >= 1")
}

/// `prod_{j<=r} (1 - V_j)` with `V_j ~ Beta(1, alpha)`; equal in law to
/// `exp(-Gamma(r, alpha))`.
pub fn sample_stick_product(r: u32, alpha: f64, rng: &mut RngStream) -> Result<f64> {
    if r == 0 {
        return Err(Error::param("r", 0.0, "must be >= 1"));
    }
    ensure_positive("alpha", alpha)?;
    Ok((0..r).map(|_| 1.0 - beta_one(alpha, rng)).product())
}

/// `eta3 * eta1 + (1 - eta3) * eta2` with `eta1 ~ Beta(a1, a2)`,
/// `eta2 ~ Beta(b1, b2)`, `eta3 ~ Beta(a1 + a2, b1 + b2)`, which is
/// `Beta(a1 + b1, a2 + b2)`. A component whose mixing weight is
/// degenerate at zero is not drawn.
pub fn sample_product_beta(a1: f64, a2: f64, b1: f64, b2: f64, rng: &mut RngStream) -> Result<f64> {
    for (name, v) in [("a1", a1), ("a2", a2), ("b1", b1), ("b2", b2)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::param(name, v, "must be finite and >= 0"));
        }
    }
    let (a, b) = (a1 + a2, b1 + b2);
    if a == 0.0 && b == 0.0 {
        return Err(Error::param("a1 + a2 + b1 + b2", 0.0, "all four parameters are zero"));
    }
    let eta3 = beta(a, b, rng)?;
    let eta1 = if eta3 > 0.0 { beta(a1, a2, rng)? } else { 0.0 };
    let eta2 = if eta3 < 1.0 { beta(b1, b2, rng)? } else { 0.0 };
    Ok(eta3 * eta1 + (1.0 - eta3) * eta2)
}
