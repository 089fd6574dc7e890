//! Base measures, concentration functions and the atom container shared by
//! every construction.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::rng::RngStream;

/// Concentration `alpha(theta)`.
#[derive(Clone)]
pub enum ConcentrationFn {
    Constant(f64),
    General {
        eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        upper_bound: f64,
    },
}

impl ConcentrationFn {
    pub fn constant(alpha: f64) -> Result<Self> {
        ensure_positive("alpha", alpha)?;
        Ok(ConcentrationFn::Constant(alpha))
    }

    pub fn general<F>(eval: F, upper_bound: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        ensure_positive("alpha upper bound", upper_bound)?;
        Ok(ConcentrationFn::General {
            eval: Arc::new(eval),
            upper_bound,
        })
    }

    /// Evaluates `alpha(theta)`, rejecting values outside `(0, upper_bound]`.
    pub fn at(&self, theta: f64) -> Result<f64> {
        match self {
            ConcentrationFn::Constant(a) => Ok(*a),
            ConcentrationFn::General { eval, upper_bound } => {
                let a = eval(theta);
                if a.is_finite() && a > 0.0 && a <= *upper_bound {
                    Ok(a)
                } else {
                    Err(Error::param(
                        "alpha(theta)",
                        a,
                        "must lie in (0, upper_bound]",
                    ))
                }
            }
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            ConcentrationFn::Constant(a) => Some(*a),
            ConcentrationFn::General { .. } => None,
        }
    }

    pub fn upper_bound(&self) -> f64 {
        match self {
            ConcentrationFn::Constant(a) => *a,
            ConcentrationFn::General { upper_bound, .. } => *upper_bound,
        }
    }
}

impl fmt::Debug for ConcentrationFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConcentrationFn::Constant(a) => f.debug_tuple("Constant").field(a).finish(),
            ConcentrationFn::General { upper_bound, .. } => f
                .debug_struct("General")
                .field("upper_bound", upper_bound)
                .finish_non_exhaustive(),
        }
    }
}

/// Draws locations from the normalized base measure `mu / mu(Theta)`.
#[derive(Clone, Default)]
pub enum LocationSampler {
    #[default]
    UnitInterval,
    Uniform {
        lower: f64,
        upper: f64,
    },
    Custom(Arc<dyn Fn(&mut RngStream) -> f64 + Send + Sync>),
}

impl LocationSampler {
    pub fn uniform(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(Error::param("upper", upper, "uniform range must satisfy lower < upper"));
        }
        Ok(LocationSampler::Uniform { lower, upper })
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match self {
            LocationSampler::UnitInterval => rng.random::<f64>(),
            LocationSampler::Uniform { lower, upper } => {
                lower + (upper - lower) * rng.random::<f64>()
            }
            LocationSampler::Custom(f) => f(rng),
        }
    }
}

impl LocationSampler {
    /// Support of a uniform sampler, `None` for custom samplers.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            LocationSampler::UnitInterval => Some((0.0, 1.0)),
            LocationSampler::Uniform { lower, upper } => Some((*lower, *upper)),
            LocationSampler::Custom(_) => None,
        }
    }
}

impl fmt::Debug for LocationSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocationSampler::UnitInterval => f.write_str("UnitInterval"),
            LocationSampler::Uniform { lower, upper } => f
                .debug_struct("Uniform")
                .field("lower", lower)
                .field("upper", upper)
                .finish(),
            LocationSampler::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// A closed interval of locations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Region {
    pub lower: f64,
    pub upper: f64,
}

impl Region {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower <= upper) {
            return Err(Error::param("upper", upper, "region needs lower <= upper"));
        }
        Ok(Self { lower, upper })
    }

    pub fn everywhere() -> Self {
        Self {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.lower <= theta && theta <= self.upper
    }
}

/// The pair `(alpha, mu)`: a finite diffuse base measure of total mass
/// `gamma` together with a concentration function.
#[derive(Clone, Debug)]
pub struct BaseMeasureSpec {
    total_mass: f64,
    locations: LocationSampler,
    concentration: ConcentrationFn,
}

impl BaseMeasureSpec {
    pub fn new(
        total_mass: f64,
        locations: LocationSampler,
        concentration: ConcentrationFn,
    ) -> Result<Self> {
        ensure_positive("gamma", total_mass)?;
        Ok(Self {
            total_mass,
            locations,
            concentration,
        })
    }

    /// Uniform base measure on `[0, 1]` with mass `gamma` and constant `alpha`.
    pub fn unit(alpha: f64, gamma: f64) -> Result<Self> {
        Self::new(
            gamma,
            LocationSampler::UnitInterval,
            ConcentrationFn::constant(alpha)?,
        )
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn concentration(&self) -> &ConcentrationFn {
        &self.concentration
    }

    pub fn locations(&self) -> &LocationSampler {
        &self.locations
    }

    /// `mu(A)` and the part of the support it covers, for uniform samplers.
    pub fn region_span(&self, region: &Region) -> Result<(f64, f64, f64)> {
        let (lo, hi) = self.locations.support().ok_or(Error::param(
            "region",
            f64::NAN,
            "region mass needs a uniform location sampler",
        ))?;
        let (a, b) = (region.lower.max(lo), region.upper.min(hi));
        let mass = if b > a { self.total_mass * (b - a) / (hi - lo) } else { 0.0 };
        Ok((mass, a, b))
    }

    pub fn sample_location(&self, rng: &mut RngStream) -> f64 {
        self.locations.sample(rng)
    }

    /// The constant concentration, or an error naming `what` when the
    /// concentration varies with location.
    pub(crate) fn constant_alpha(&self, what: &'static str) -> Result<f64> {
        self.concentration.as_constant().ok_or(Error::param(
            what,
            self.concentration.upper_bound(),
            "requires a constant concentration",
        ))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructionTag {
    StickBreaking,
    GammaExponential,
    Sieve,
    TruncatedArray,
    Dp,
    PowerLaw,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub weight: f64,
    pub group: u32,
    pub index_in_group: u32,
    /// Which part of a partitioned union the atom came from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub part: Option<u32>,
}

impl Atom {
    pub fn new(location: f64, weight: f64, group: u32, index_in_group: u32) -> Self {
        Self {
            location,
            weight,
            group,
            index_in_group,
            part: None,
        }
    }
}

/// A finite sum of weighted point masses. `truncation_level == 0` marks a
/// measure that was not truncated by group (sieve, array, unions thereof).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    pub construction_tag: ConstructionTag,
    pub truncation_level: u32,
    pub atoms: Vec<Atom>,
}

impl DiscreteMeasure {
    pub fn new(construction_tag: ConstructionTag, truncation_level: u32, atoms: Vec<Atom>) -> Self {
        Self {
            construction_tag,
            truncation_level,
            atoms,
        }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `H(A)` for the region `A` given as a predicate on locations.
    pub fn measure_total<F: Fn(f64) -> bool>(&self, region: F) -> f64 {
        self.atoms
            .iter()
            .filter(|a| region(a.location))
            .map(|a| a.weight)
            .sum()
    }

    /// `H(Theta)`.
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.atoms.iter().map(|a| a.weight)
    }

    /// Checks weight bounds, distinct locations and group bounds.
    pub fn validate(&self) -> Result<()> {
        let upper_weight_ok = |w: f64| match self.construction_tag {
            ConstructionTag::Dp => w < 1.0,
            _ => w <= 1.0,
        };
        let mut seen = HashMap::with_capacity(self.atoms.len());
        for atom in &self.atoms {
            if !(atom.weight > 0.0 && upper_weight_ok(atom.weight)) {
                return Err(Error::param("weight", atom.weight, "atom weight out of range"));
            }
            if self.truncation_level > 0 && atom.group > self.truncation_level {
                return Err(Error::param(
                    "group",
                    f64::from(atom.group),
                    "exceeds the truncation level",
                ));
            }
            if seen.insert(atom.location.to_bits(), ()).is_some() {
                return Err(Error::param(
                    "location",
                    atom.location,
                    "atom locations must be distinct",
                ));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Sums measures built over disjoint regions (the sigma-finite extension).
/// Atoms are tagged with the index of the part they came from.
pub fn partition_union(parts: &[DiscreteMeasure]) -> Result<DiscreteMeasure> {
    let tag = match parts.first() {
        Some(p) => p.construction_tag,
        None => return Ok(DiscreteMeasure::new(ConstructionTag::StickBreaking, 0, Vec::new())),
    };
    if let Some(other) = parts.iter().find(|p| p.construction_tag != tag) {
        return Err(Error::MixedConstructions(format!(
            "{:?} and {:?}",
            tag, other.construction_tag
        )));
    }

    let mut owner: HashMap<u64, usize> = HashMap::new();
    let mut atoms = Vec::with_capacity(parts.iter().map(DiscreteMeasure::len).sum());
    for (k, part) in parts.iter().enumerate() {
        for atom in &part.atoms {
            if let Some(&first) = owner.get(&atom.location.to_bits()) {
                if first != k {
                    return Err(Error::OverlappingParts {
                        first,
                        second: k,
                        location: atom.location,
                    });
                }
            }
            owner.insert(atom.location.to_bits(), k);
            atoms.push(Atom {
                part: Some(k as u32),
                ..atom.clone()
            });
        }
    }
    let truncation_level = parts.iter().map(|p| p.truncation_level).max().unwrap_or(0);
    Ok(DiscreteMeasure::new(tag, truncation_level, atoms))
}
