//! Conjugate posterior draws given Bernoulli or negative binomial process
//! data.
//!
//! The posterior splits into the observed atoms (positive total count) and
//! a fresh beta process draw `H'` over the rest of the space. An observed
//! atom gets weight `eta * P` with
//!
//! ```text
//! Bernoulli:  eta ~ Beta(n, alpha),           P ~ Beta(M1, M0)
//! NegBin:     eta ~ Beta(sum X + n r, alpha),  P ~ Beta(sum X, n r)
//! ```
//!
//! which is `Beta(M1, alpha + M0)` (resp. `Beta(sum X, alpha + n r)`) in
//! law. Each atom of `H'` is scaled by its own `Beta(alpha, n)` (resp.
//! `Beta(alpha, n r)`) draw.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::construct::{effective_truncation, sample_bp_stick_breaking, StickBreakingConfig, StickVariant, DEFAULT_MISSING_MASS};
use crate::error::{Error, Result};
use crate::likelihood::{count_stats, CountStats, FeatureMatrix, LikelihoodKind};
use crate::measure::{Atom, BaseMeasureSpec, ConstructionTag, DiscreteMeasure};
use crate::rng::RngStream;
use crate::rv::{beta, sample_product_beta};

#[derive(Clone, Debug)]
pub struct PosteriorSpec {
    pub base: BaseMeasureSpec,
    pub stats: CountStats,
    /// Number of stick-breaking groups used for `H'`.
    pub prior_truncation: u32,
}

impl PosteriorSpec {
    /// Truncates `H'` where the prior expected missing mass drops below
    /// [`DEFAULT_MISSING_MASS`].
    pub fn new(base: BaseMeasureSpec, stats: CountStats) -> Result<Self> {
        let r = effective_truncation(
            base.concentration().upper_bound(),
            base.total_mass(),
            DEFAULT_MISSING_MASS,
        );
        Self::with_truncation(base, stats, r)
    }

    pub fn with_truncation(base: BaseMeasureSpec, stats: CountStats, prior_truncation: u32) -> Result<Self> {
        if prior_truncation == 0 {
            return Err(Error::param("prior_truncation", 0.0, "must be >= 1"));
        }
        if let LikelihoodKind::Negbin { r } = stats.likelihood {
            crate::error::ensure_positive("r", r)?;
        }
        Ok(Self {
            base,
            stats,
            prior_truncation,
        })
    }

    pub fn from_matrix(base: BaseMeasureSpec, x: &FeatureMatrix) -> Result<Self> {
        Self::new(base, count_stats(x))
    }

    pub fn n(&self) -> u32 {
        self.stats.n
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservedAtom {
    pub location: f64,
    pub weight: f64,
    /// `M1`, the total count at this atom.
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorDraw {
    pub observed_atoms: Vec<ObservedAtom>,
    /// `H'` after down-weighting.
    pub unobserved_part: DiscreteMeasure,
}

#[derive(Serialize, Deserialize)]
struct DrawAtomJson {
    location: f64,
    weight: f64,
    observed: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    count: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    group: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    index_in_group: Option<u32>,
}

#[derive(Serialize, Deserialize)]
struct DrawJson {
    construction_tag: ConstructionTag,
    truncation_level: u32,
    atoms: Vec<DrawAtomJson>,
}

impl PosteriorDraw {
    /// All atoms as one measure; observed atoms are placed in group 0.
    pub fn to_measure(&self) -> DiscreteMeasure {
        let mut atoms: Vec<Atom> = self
            .observed_atoms
            .iter()
            .enumerate()
            .map(|(j, a)| Atom::new(a.location, a.weight, 0, j as u32 + 1))
            .collect();
        atoms.extend(self.unobserved_part.atoms.iter().cloned());
        DiscreteMeasure::new(
            self.unobserved_part.construction_tag,
            self.unobserved_part.truncation_level,
            atoms,
        )
    }

    pub fn total_mass(&self) -> f64 {
        self.observed_atoms.iter().map(|a| a.weight).sum::<f64>() + self.unobserved_part.total_mass()
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for a in &self.observed_atoms {
            if !(a.weight > 0.0 && a.weight <= 1.0) {
                return Err(Error::param("weight", a.weight, "atom weight out of range"));
            }
            if a.count == 0 {
                return Err(Error::UnobservedAtom { location: a.location });
            }
            seen.insert(a.location.to_bits());
        }
        if let Some(a) = self
            .unobserved_part
            .atoms
            .iter()
            .find(|a| seen.contains(&a.location.to_bits()))
        {
            return Err(Error::OverlappingParts {
                first: 0,
                second: 1,
                location: a.location,
            });
        }
        self.unobserved_part.validate()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_json_value())?)
    }

    fn to_json_value(&self) -> DrawJson {
        let mut atoms: Vec<DrawAtomJson> = self
            .observed_atoms
            .iter()
            .map(|a| DrawAtomJson {
                location: a.location,
                weight: a.weight,
                observed: true,
                count: Some(a.count),
                group: None,
                index_in_group: None,
            })
            .collect();
        atoms.extend(self.unobserved_part.atoms.iter().map(|a| DrawAtomJson {
            location: a.location,
            weight: a.weight,
            observed: false,
            count: None,
            group: Some(a.group),
            index_in_group: Some(a.index_in_group),
        }));
        DrawJson {
            construction_tag: self.unobserved_part.construction_tag,
            truncation_level: self.unobserved_part.truncation_level,
            atoms,
        }
    }

    /// Several draws as one JSON array.
    pub fn many_to_json(draws: &[PosteriorDraw]) -> Result<String> {
        let v: Vec<DrawJson> = draws.iter().map(PosteriorDraw::to_json_value).collect();
        Ok(serde_json::to_string_pretty(&v)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: DrawJson = serde_json::from_str(s)?;
        let mut observed = Vec::new();
        let mut rest = Vec::new();
        for (k, a) in j.atoms.into_iter().enumerate() {
            let missing = |field: &str| Error::Malformed {
                record: format!("atom {k}"),
                reason: format!("missing {field}"),
            };
            if a.observed {
                observed.push(ObservedAtom {
                    location: a.location,
                    weight: a.weight,
                    count: a.count.ok_or_else(|| missing("count"))?,
                });
            } else {
                rest.push(Atom::new(
                    a.location,
                    a.weight,
                    a.group.ok_or_else(|| missing("group"))?,
                    a.index_in_group.ok_or_else(|| missing("index_in_group"))?,
                ));
            }
        }
        let draw = PosteriorDraw {
            observed_atoms: observed,
            unobserved_part: DiscreteMeasure::new(j.construction_tag, j.truncation_level, rest),
        };
        draw.validate()?;
        Ok(draw)
    }
}

/// Weight of one observed atom: `Beta(a, alpha + b)` built as `eta * P`.
fn observed_weight(m1: u64, m0: f64, alpha: f64, location: f64, rng: &mut RngStream) -> Result<f64> {
    if m1 == 0 {
        return Err(Error::UnobservedAtom { location });
    }
    sample_product_beta(m1 as f64, m0, 0.0, alpha, rng)
}

fn sample_posterior(spec: &PosteriorSpec, rng: &mut RngStream) -> Result<PosteriorDraw> {
    let stats = &spec.stats;
    let concentration = spec.base.concentration();
    let observed_atoms = stats
        .observed()
        .map(|j| {
            let location = stats.atoms[j];
            let alpha = concentration.at(location)?;
            let weight = observed_weight(stats.m1[j], stats.m0[j], alpha, location, rng)?;
            Ok(ObservedAtom {
                location,
                weight,
                count: stats.m1[j],
            })
        })
        .collect::<Result<Vec<_>>>()?;

    // 1 - eta ~ Beta(alpha, n) or Beta(alpha, n r), fresh for each atom.
    let shrink = f64::from(stats.n) * stats.likelihood.dispersion();
    let cfg = StickBreakingConfig::new(spec.base.clone(), spec.prior_truncation, StickVariant::Standard)?;
    let mut fresh = sample_bp_stick_breaking(&cfg, rng)?;
    let mut atoms = Vec::with_capacity(fresh.atoms.len());
    for mut a in fresh.atoms.drain(..) {
        a.weight *= beta(concentration.at(a.location)?, shrink, rng)?;
        if a.weight > 0.0 {
            atoms.push(a);
        }
    }
    fresh.atoms = atoms;
    Ok(PosteriorDraw {
        observed_atoms,
        unobserved_part: fresh,
    })
}

pub fn sample_posterior_bernoulli(spec: &PosteriorSpec, rng: &mut RngStream) -> Result<PosteriorDraw> {
    if spec.stats.likelihood != LikelihoodKind::Bernoulli {
        return Err(Error::param("likelihood", f64::NAN, "expected bernoulli counts"));
    }
    sample_posterior(spec, rng)
}

pub fn sample_posterior_negbin(spec: &PosteriorSpec, rng: &mut RngStream) -> Result<PosteriorDraw> {
    if !matches!(spec.stats.likelihood, LikelihoodKind::Negbin { .. }) {
        return Err(Error::param("likelihood", f64::NAN, "expected negative binomial counts"));
    }
    sample_posterior(spec, rng)
}

/// Dispatches on the likelihood recorded in the counts.
pub fn sample_posterior_any(spec: &PosteriorSpec, rng: &mut RngStream) -> Result<PosteriorDraw> {
    sample_posterior(spec, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{check_mean, ks_two_sample, DEFAULT_LEVEL};

    fn stats(n: u32, kind: LikelihoodKind, m1: u64) -> CountStats {
        let entries: Vec<(u32, u32, u64)> = match kind {
            LikelihoodKind::Bernoulli => (0..m1 as u32).map(|i| (i, 0, 1)).collect(),
            LikelihoodKind::Negbin { .. } => vec![(0, 0, m1)],
        };
        count_stats(&FeatureMatrix::from_triplets(n, kind, vec![0.5], entries).unwrap())
    }

    fn observed_weights(spec: &PosteriorSpec, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = RngStream::new(seed, 0);
        (0..n)
            .map(|_| sample_posterior(spec, &mut rng).unwrap().observed_atoms[0].weight)
            .collect()
    }

    fn direct_beta(a: f64, b: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = RngStream::new(seed, 99);
        (0..n).map(|_| beta(a, b, &mut rng).unwrap()).collect()
    }

    #[test]
    fn all_ones_column_is_beta_n_alpha() {
        let spec = PosteriorSpec::with_truncation(
            BaseMeasureSpec::unit(2.0, 1.0).unwrap(),
            stats(3, LikelihoodKind::Bernoulli, 3),
            5,
        )
        .unwrap();
        let w = observed_weights(&spec, 10_000, 1);
        assert!(ks_two_sample(&w, &direct_beta(3.0, 2.0, 10_000, 1), DEFAULT_LEVEL).unwrap().passed());
    }

    #[test]
    fn bernoulli_mean_is_conjugate() {
        let spec = PosteriorSpec::with_truncation(
            BaseMeasureSpec::unit(1.0, 1.0).unwrap(),
            stats(5, LikelihoodKind::Bernoulli, 2),
            3,
        )
        .unwrap();
        let w = observed_weights(&spec, 100_000, 2);
        assert!(check_mean(&w, 1.0 / 3.0, 4.0).unwrap().passed());
    }

    #[test]
    fn negbin_observed_weight() {
        let spec = PosteriorSpec::with_truncation(
            BaseMeasureSpec::unit(1.0, 1.0).unwrap(),
            stats(2, LikelihoodKind::Negbin { r: 1.0 }, 4),
            3,
        )
        .unwrap();
        let w = observed_weights(&spec, 10_000, 3);
        assert!(ks_two_sample(&w, &direct_beta(4.0, 3.0, 10_000, 3), DEFAULT_LEVEL).unwrap().passed());
        assert!(sample_posterior_bernoulli(&spec, &mut RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn larger_dispersion_shrinks_weights() {
        let mean_for = |r: f64| {
            let spec = PosteriorSpec::with_truncation(
                BaseMeasureSpec::unit(1.0, 1.0).unwrap(),
                stats(2, LikelihoodKind::Negbin { r }, 4),
                2,
            )
            .unwrap();
            let w = observed_weights(&spec, 20_000, 4);
            w.iter().sum::<f64>() / w.len() as f64
        };
        let means: Vec<f64> = [0.5, 2.0, 8.0, 32.0].into_iter().map(mean_for).collect();
        // Beta(4, 1 + 2r) means: 4 / (5 + 2r)
        for w in means.windows(2) {
            assert!(w[1] < w[0]);
        }
        assert!((means[3] - 4.0 / 69.0).abs() < 0.01);
    }

    #[test]
    fn no_data_recovers_prior() {
        let base = BaseMeasureSpec::unit(1.0, 1.0).unwrap();
        let empty = count_stats(&FeatureMatrix::empty(0, LikelihoodKind::Bernoulli).unwrap());
        let spec = PosteriorSpec::new(base.clone(), empty).unwrap();
        let cfg = StickBreakingConfig::new(base, spec.prior_truncation, StickVariant::Standard).unwrap();
        let a = sample_posterior_bernoulli(&spec, &mut RngStream::new(9, 0)).unwrap();
        let b = sample_bp_stick_breaking(&cfg, &mut RngStream::new(9, 0)).unwrap();
        assert!(a.observed_atoms.is_empty());
        // Beta(alpha, 0) is the unit point mass, so weights are untouched.
        assert_eq!(a.unobserved_part, b);
    }

    #[test]
    fn split_is_disjoint_and_round_trips() {
        let x = FeatureMatrix::from_triplets(
            3,
            LikelihoodKind::Bernoulli,
            vec![0.1, 0.2, 0.3],
            [(0, 0, 1), (2, 0, 1), (1, 2, 1)],
        )
        .unwrap();
        let spec = PosteriorSpec::from_matrix(BaseMeasureSpec::unit(1.5, 2.0).unwrap(), &x).unwrap();
        let d = sample_posterior_bernoulli(&spec, &mut RngStream::new(5, 0)).unwrap();
        d.validate().unwrap();
        let locs: Vec<f64> = d.observed_atoms.iter().map(|a| a.location).collect();
        assert_eq!(locs, vec![0.1, 0.3]);
        let back = PosteriorDraw::from_json(&d.to_json().unwrap()).unwrap();
        assert_eq!(back, d);
        let m = d.to_measure();
        m.validate().unwrap();
        assert!((m.total_mass() - d.total_mass()).abs() < 1e-12);
    }

    #[test]
    fn rejects_observed_atom_without_count() {
        let mut rng = RngStream::new(0, 0);
        assert!(matches!(
            observed_weight(0, 3.0, 1.0, 0.4, &mut rng),
            Err(Error::UnobservedAtom { .. })
        ));
        let bad = r#"{"construction_tag":"stick_breaking","truncation_level":2,
            "atoms":[{"location":0.5,"weight":0.3,"observed":true,"count":0}]}"#;
        assert!(PosteriorDraw::from_json(bad).is_err());
    }
}
