//! Whole-process constructions: Dirichlet-process stick-breaking, the beta
//! process stick-breaking construction (and its gamma-exponential and
//! power-law variants), the beta sieve and the truncated `K x R` array.
//!
//! Atoms whose weight underflows to exactly zero carry no mass and are
//! dropped from every construction.

use rand::Rng;

use crate::error::{ensure_positive, Error, Result};
use crate::measure::{Atom, BaseMeasureSpec, ConstructionTag, DiscreteMeasure};
use crate::rng::RngStream;
use crate::rv::{beta, beta_one, gamma, poisson};

/// Expected missing mass targeted by "effectively untruncated" runs.
pub const DEFAULT_MISSING_MASS: f64 = 1e-6;

/// Smallest `R >= 1` with `gamma * (alpha / (1 + alpha))^R < tol`.
pub fn effective_truncation(alpha: f64, gamma: f64, tol: f64) -> u32 {
    let ratio = alpha / (1.0 + alpha);
    let mut r = 1u32;
    let mut missing = gamma * ratio;
    while missing >= tol {
        r += 1;
        missing *= ratio;
    }
    r
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StickVariant {
    Standard,
    /// Breaks `V^(l) ~ Beta(1 - discount, alpha + l * discount)`, indexed by
    /// break number `l`.
    PowerLaw { discount: f64 },
    GammaExponential,
}

#[derive(Clone, Debug)]
pub struct StickBreakingConfig {
    pub base: BaseMeasureSpec,
    pub groups: u32,
    pub variant: StickVariant,
}

impl StickBreakingConfig {
    pub fn new(base: BaseMeasureSpec, groups: u32, variant: StickVariant) -> Result<Self> {
        if groups == 0 {
            return Err(Error::param("groups", 0.0, "must be >= 1"));
        }
        if let StickVariant::PowerLaw { discount } = variant {
            if !(discount > 0.0 && discount < 1.0) {
                return Err(Error::param("discount", discount, "must lie in (0, 1)"));
            }
            base.constant_alpha("power-law variant")?;
        }
        Ok(Self {
            base,
            groups,
            variant,
        })
    }

    /// Standard construction truncated where the expected missing mass,
    /// bounded with the largest concentration, is below
    /// [`DEFAULT_MISSING_MASS`].
    pub fn effectively_untruncated(base: BaseMeasureSpec) -> Result<Self> {
        let groups = effective_truncation(
            base.concentration().upper_bound(),
            base.total_mass(),
            DEFAULT_MISSING_MASS,
        );
        Self::new(base, groups, StickVariant::Standard)
    }

    fn tag(&self) -> ConstructionTag {
        match self.variant {
            StickVariant::Standard => ConstructionTag::StickBreaking,
            StickVariant::PowerLaw { .. } => ConstructionTag::PowerLaw,
            StickVariant::GammaExponential => ConstructionTag::GammaExponential,
        }
    }
}

/// `G = sum_i V_i prod_{j<i}(1 - V_j) delta_theta_i`, truncated at `groups`
/// atoms.
pub fn sample_dp_stick_breaking(
    base: &BaseMeasureSpec,
    groups: u32,
    rng: &mut RngStream,
) -> Result<DiscreteMeasure> {
    let alpha = base.constant_alpha("dp stick-breaking")?;
    if groups == 0 {
        return Err(Error::param("groups", 0.0, "must be >= 1"));
    }
    let mut remaining = 1.0;
    let mut atoms = Vec::with_capacity(groups as usize);
    for i in 1..=groups {
        let v = beta_one(alpha, rng);
        let w = v * remaining;
        remaining *= 1.0 - v;
        let theta = base.sample_location(rng);
        if w > 0.0 {
            atoms.push(Atom::new(theta, w, i, 1));
        }
    }
    Ok(DiscreteMeasure::new(ConstructionTag::Dp, groups, atoms))
}

/// Beta process stick-breaking: group `i` holds `C_i ~ Pois(gamma)` atoms,
/// each keeping the `i`-th break of its own stick.
pub fn sample_bp_stick_breaking(
    cfg: &StickBreakingConfig,
    rng: &mut RngStream,
) -> Result<DiscreteMeasure> {
    let gamma_mass = cfg.base.total_mass();
    let mut atoms = Vec::new();
    for i in 1..=cfg.groups {
        let count = poisson(gamma_mass, rng)?;
        for j in 1..=count {
            let theta = cfg.base.sample_location(rng);
            let alpha = cfg.base.concentration().at(theta)?;
            let w = atom_weight(cfg.variant, i, alpha, rng)?;
            if w > 0.0 {
                atoms.push(Atom::new(theta, w, i, j as u32));
            }
        }
    }
    Ok(DiscreteMeasure::new(cfg.tag(), cfg.groups, atoms))
}

fn atom_weight(variant: StickVariant, group: u32, alpha: f64, rng: &mut RngStream) -> Result<f64> {
    match variant {
        StickVariant::Standard => {
            let mut remaining = 1.0;
            for _ in 1..group {
                remaining *= 1.0 - beta_one(alpha, rng);
            }
            Ok(beta_one(alpha, rng) * remaining)
        }
        StickVariant::PowerLaw { discount } => {
            let mut remaining = 1.0;
            for l in 1..group {
                remaining *= 1.0 - beta(1.0 - discount, alpha + f64::from(l) * discount, rng)?;
            }
            Ok(beta(1.0 - discount, alpha + f64::from(group) * discount, rng)? * remaining)
        }
        StickVariant::GammaExponential => {
            let v = beta_one(alpha, rng);
            if group == 1 {
                Ok(v)
            } else {
                Ok(v * (-gamma(f64::from(group - 1), alpha, rng)?).exp())
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct SieveConfig {
    pub base: BaseMeasureSpec,
    pub k: u32,
}

impl SieveConfig {
    pub fn new(base: BaseMeasureSpec, k: u32) -> Result<Self> {
        base.constant_alpha("sieve")?;
        if f64::from(k) <= base.total_mass() {
            return Err(Error::param("K", f64::from(k), "must exceed the base mass gamma"));
        }
        Ok(Self { base, k })
    }
}

/// `H_K = sum_k pi_k delta_theta_k`, `pi_k ~ Beta(alpha gamma / K, alpha (1 - gamma / K))`.
pub fn sample_bp_sieve(cfg: &SieveConfig, rng: &mut RngStream) -> Result<DiscreteMeasure> {
    let alpha = cfg.base.constant_alpha("sieve")?;
    let k = f64::from(cfg.k);
    let frac = cfg.base.total_mass() / k;
    let dist = rand_distr::Beta::new(alpha * frac, alpha * (1.0 - frac))
        .map_err(|_| Error::param("K", k, "beta shapes out of range"))?;
    let mut atoms = Vec::new();
    for idx in 1..=cfg.k {
        let w: f64 = rng.sample(&dist);
        let theta = cfg.base.sample_location(rng);
        if w > 0.0 {
            atoms.push(Atom::new(theta, w, 1, idx));
        }
    }
    Ok(DiscreteMeasure::new(ConstructionTag::Sieve, 0, atoms))
}

#[derive(Clone, Debug)]
pub struct ArrayConfig {
    pub base: BaseMeasureSpec,
    pub k: u32,
    pub groups: u32,
}

impl ArrayConfig {
    pub fn new(base: BaseMeasureSpec, k: u32, groups: u32) -> Result<Self> {
        base.constant_alpha("truncated array")?;
        if f64::from(k) <= base.total_mass() {
            return Err(Error::param("K", f64::from(k), "must exceed the base mass gamma"));
        }
        if groups == 0 {
            return Err(Error::param("groups", 0.0, "must be >= 1"));
        }
        Ok(Self { base, k, groups })
    }
}

/// Truncated `K x R` array construction. Row `k` receives
/// `sum_{i<=R} V_ki prod_{i'<i}(1 - V_ki') 1(Y_ki = 1)`; rows without any
/// indicator set are dropped. The indicator array is generated by
/// geometric skipping over its `K * R` cells, and the breaks of a row are
/// only drawn up to its last set indicator; both are equal in law to the
/// dense draw.
pub fn sample_bp_truncated_array(cfg: &ArrayConfig, rng: &mut RngStream) -> Result<DiscreteMeasure> {
    let alpha = cfg.base.constant_alpha("truncated array")?;
    let p = cfg.base.total_mass() / f64::from(cfg.k);
    let cells = u64::from(cfg.k) * u64::from(cfg.groups);
    let groups = u64::from(cfg.groups);

    // Row-major positions of the ones in Y.
    let mut ones: Vec<(u32, u32)> = Vec::new();
    let log_q = (-p).ln_1p();
    let mut pos: u64 = 0;
    loop {
        let u: f64 = rand_distr::Distribution::sample(&rand_distr::Open01, rng);
        let gap = (u.ln() / log_q).floor();
        if !gap.is_finite() || gap >= (cells - pos) as f64 {
            break;
        }
        pos += gap as u64;
        ones.push(((pos / groups) as u32, (pos % groups) as u32 + 1));
        pos += 1;
        if pos >= cells {
            break;
        }
    }

    let mut atoms = Vec::new();
    let mut start = 0;
    while start < ones.len() {
        let row = ones[start].0;
        let end = start + ones[start..].iter().take_while(|(r, _)| *r == row).count();
        let hits = &ones[start..end];
        let last = hits.last().map(|&(_, i)| i).unwrap_or(0);
        let mut remaining = 1.0;
        let mut weight = 0.0;
        let mut next = 0;
        for i in 1..=last {
            let v = beta_one(alpha, rng);
            if hits[next].1 == i {
                weight += v * remaining;
                next += 1;
            }
            remaining *= 1.0 - v;
        }
        let theta = cfg.base.sample_location(rng);
        if weight > 0.0 {
            atoms.push(Atom::new(theta, weight.min(1.0), hits[0].1, row + 1));
        }
        start = end;
    }
    Ok(DiscreteMeasure::new(ConstructionTag::TruncatedArray, 0, atoms))
}

/// Any of the constructions, for callers that pick one at run time.
#[derive(Clone, Debug)]
pub enum Construction {
    Stick(StickBreakingConfig),
    Sieve(SieveConfig),
    Array(ArrayConfig),
    Dp { base: BaseMeasureSpec, groups: u32 },
}

impl Construction {
    pub fn base(&self) -> &BaseMeasureSpec {
        match self {
            Construction::Stick(c) => &c.base,
            Construction::Sieve(c) => &c.base,
            Construction::Array(c) => &c.base,
            Construction::Dp { base, .. } => base,
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> Result<DiscreteMeasure> {
        match self {
            Construction::Stick(c) => sample_bp_stick_breaking(c, rng),
            Construction::Sieve(c) => sample_bp_sieve(c, rng),
            Construction::Array(c) => sample_bp_truncated_array(c, rng),
            Construction::Dp { base, groups } => sample_dp_stick_breaking(base, *groups, rng),
        }
    }
}

/// Samples `n_reps` independent replicates, replicate `k` on stream
/// `rng.derive(k)`, and maps each through `stat`.
pub fn replicate<T, S, F>(n_reps: usize, rng: &RngStream, mut sample: S, stat: F) -> Result<Vec<T>>
where
    S: FnMut(&mut RngStream) -> Result<DiscreteMeasure>,
    F: Fn(&DiscreteMeasure) -> T,
{
    (0..n_reps)
        .map(|k| {
            let mut r = rng.derive(k as u64);
            sample(&mut r).map(|m| stat(&m))
        })
        .collect()
}

/// Validates `gamma` for callers that build a base measure from raw flags.
pub fn check_mass(gamma: f64) -> Result<()> {
    ensure_positive("gamma", gamma)
}
