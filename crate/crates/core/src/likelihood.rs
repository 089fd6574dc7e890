//! Bernoulli and negative binomial processes drawn over a discrete measure,
//! stored sparse by column, and the per-atom count statistics used by the
//! posterior samplers.
//!
//! `NegBin(r, p)` has pmf proportional to `p^k (1 - p)^r`, so its mean is
//! `r p / (1 - p)` and it is sampled as `Poisson(Gamma(r, scale p / (1 - p)))`.

use std::collections::HashSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::measure::DiscreteMeasure;
use crate::rng::RngStream;
use crate::rv;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LikelihoodKind {
    Bernoulli,
    Negbin { r: f64 },
}

impl LikelihoodKind {
    pub fn negbin(r: f64) -> Result<Self> {
        ensure_positive("r", r)?;
        Ok(LikelihoodKind::Negbin { r })
    }

    /// The dispersion `r`; 1 for Bernoulli processes.
    pub fn dispersion(&self) -> f64 {
        match self {
            LikelihoodKind::Bernoulli => 1.0,
            LikelihoodKind::Negbin { r } => *r,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            LikelihoodKind::Bernoulli => Ok(()),
            LikelihoodKind::Negbin { r } => ensure_positive("r", *r),
        }
    }
}

/// `n` processes by `atoms.len()` columns of counts. Only nonzero entries
/// are stored: `columns[j]` lists `(row, count)` pairs in row order.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    n: u32,
    kind: LikelihoodKind,
    atoms: Vec<f64>,
    columns: Vec<Vec<(u32, u64)>>,
}

/// Sparse triplet form used for JSON.
#[derive(Serialize, Deserialize)]
struct FeatureMatrixJson {
    n: u32,
    likelihood: LikelihoodKind,
    atoms: Vec<f64>,
    /// `[row, column, count]` for each nonzero entry.
    entries: Vec<(u32, u32, u64)>,
}

impl FeatureMatrix {
    /// Builds a matrix from `(row, column, count)` triplets. Zero counts
    /// are dropped; repeated cells are an error.
    pub fn from_triplets(
        n: u32,
        kind: LikelihoodKind,
        atoms: Vec<f64>,
        entries: impl IntoIterator<Item = (u32, u32, u64)>,
    ) -> Result<Self> {
        kind.validate()?;
        let mut seen = HashSet::new();
        for &a in &atoms {
            if !a.is_finite() || !seen.insert(a.to_bits()) {
                return Err(Error::Malformed {
                    record: format!("atom {a}"),
                    reason: "atom locations must be finite and distinct".into(),
                });
            }
        }
        let mut columns = vec![Vec::new(); atoms.len()];
        for (row, col, count) in entries {
            let bad = |reason: &str| Error::Malformed {
                record: format!("[{row}, {col}, {count}]"),
                reason: reason.into(),
            };
            if row >= n {
                return Err(bad("row index out of range"));
            }
            let column: &mut Vec<(u32, u64)> =
                columns.get_mut(col as usize).ok_or_else(|| bad("column index out of range"))?;
            if kind == LikelihoodKind::Bernoulli && count > 1 {
                return Err(bad("bernoulli entries must be 0 or 1"));
            }
            if count > 0 {
                column.push((row, count));
            }
        }
        for (j, col) in columns.iter_mut().enumerate() {
            col.sort_unstable_by_key(|&(r, _)| r);
            if col.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::Malformed {
                    record: format!("column {j}"),
                    reason: "repeated cell".into(),
                });
            }
        }
        Ok(Self {
            n,
            kind,
            atoms,
            columns,
        })
    }

    pub fn empty(n: u32, kind: LikelihoodKind) -> Result<Self> {
        Self::from_triplets(n, kind, Vec::new(), [])
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn kind(&self) -> LikelihoodKind {
        self.kind
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.len()
    }

    /// Nonzero `(row, count)` pairs of column `j`.
    pub fn column(&self, j: usize) -> &[(u32, u64)] {
        &self.columns[j]
    }

    pub fn get(&self, row: u32, col: usize) -> u64 {
        self.columns[col]
            .binary_search_by_key(&row, |&(r, _)| r)
            .map_or(0, |k| self.columns[col][k].1)
    }

    pub fn total(&self) -> u64 {
        self.columns.iter().flatten().map(|&(_, c)| c).sum()
    }

    /// Columns with at least one nonzero entry.
    pub fn active_columns(&self) -> usize {
        self.columns.iter().filter(|c| !c.is_empty()).count()
    }

    fn triplets(&self) -> Vec<(u32, u32, u64)> {
        let mut t: Vec<_> = self
            .columns
            .iter()
            .enumerate()
            .flat_map(|(j, col)| col.iter().map(move |&(r, c)| (r, j as u32, c)))
            .collect();
        t.sort_unstable();
        t
    }

    pub fn to_json(&self) -> Result<String> {
        let j = FeatureMatrixJson {
            n: self.n,
            likelihood: self.kind,
            atoms: self.atoms.clone(),
            entries: self.triplets(),
        };
        Ok(serde_json::to_string_pretty(&j)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: FeatureMatrixJson = serde_json::from_str(s)?;
        Self::from_triplets(j.n, j.likelihood, j.atoms, j.entries)
    }

    /// Dense CSV: a header of atom locations, then one row per process.
    /// Locations use the shortest representation that parses back exactly.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if self.atoms.is_empty() {
            // A record with no fields cannot be told apart from no record.
            w.flush()?;
            return Ok(());
        }
        w.write_record(self.atoms.iter().map(|a| format!("{a:?}")))?;
        let mut dense = vec![0u64; self.atoms.len()];
        let mut cursors = vec![0usize; self.atoms.len()];
        for row in 0..self.n {
            for (j, col) in self.columns.iter().enumerate() {
                dense[j] = match col.get(cursors[j]) {
                    Some(&(r, c)) if r == row => {
                        cursors[j] += 1;
                        c
                    }
                    _ => 0,
                };
            }
            w.write_record(dense.iter().map(u64::to_string))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads [`write_csv`](Self::write_csv) output. The likelihood kind is
    /// not part of the CSV and must be supplied.
    pub fn read_csv<R: Read>(input: R, kind: LikelihoodKind) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let atoms = rdr
            .headers()?
            .iter()
            .enumerate()
            .filter(|(_, h)| !h.is_empty())
            .map(|(j, h)| {
                h.trim().parse::<f64>().map_err(|_| Error::Malformed {
                    record: format!("header field {}", j + 1),
                    reason: format!("cannot parse atom location {h:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut entries = Vec::new();
        let mut n = 0u32;
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            if rec.len() != atoms.len() {
                return Err(Error::Malformed {
                    record: format!("line {line}"),
                    reason: format!("expected {} fields, found {}", atoms.len(), rec.len()),
                });
            }
            for (j, field) in rec.iter().enumerate() {
                let c: u64 = field.trim().parse().map_err(|_| Error::Malformed {
                    record: format!("line {line}, field {}", j + 1),
                    reason: format!("not a nonnegative integer: {field:?}"),
                })?;
                if c > 0 {
                    entries.push((n, j as u32, c));
                }
            }
            n += 1;
        }
        Self::from_triplets(n, kind, atoms, entries)
    }
}

fn check_weights(h: &DiscreteMeasure, allow_one: bool) -> Result<()> {
    for a in &h.atoms {
        let ok = a.weight > 0.0 && (a.weight < 1.0 || (allow_one && a.weight == 1.0));
        if !ok {
            return Err(Error::Domain {
                what: if allow_one {
                    "atom weight outside (0, 1]"
                } else {
                    "atom weight outside (0, 1)"
                },
                value: a.weight,
            });
        }
    }
    Ok(())
}

fn sample_columns<F>(h: &DiscreteMeasure, n: u32, kind: LikelihoodKind, mut draw: F) -> Result<FeatureMatrix>
where
    F: FnMut(f64) -> Result<u64>,
{
    let atoms: Vec<f64> = h.atoms.iter().map(|a| a.location).collect();
    let mut entries = Vec::new();
    for (j, a) in h.atoms.iter().enumerate() {
        for row in 0..n {
            let c = draw(a.weight)?;
            if c > 0 {
                entries.push((row, j as u32, c));
            }
        }
    }
    FeatureMatrix::from_triplets(n, kind, atoms, entries)
}

/// `X_i({theta}) ~ Bern(H({theta}))` independently, one row per process.
pub fn sample_bernoulli_process(h: &DiscreteMeasure, n: u32, rng: &mut RngStream) -> Result<FeatureMatrix> {
    check_weights(h, true)?;
    sample_columns(h, n, LikelihoodKind::Bernoulli, |p| {
        Ok(u64::from(rv::bernoulli(p, rng)))
    })
}

/// `X_i({theta}) ~ NegBin(r, H({theta}))` independently.
pub fn sample_negbin_process(h: &DiscreteMeasure, n: u32, r: f64, rng: &mut RngStream) -> Result<FeatureMatrix> {
    let kind = LikelihoodKind::negbin(r)?;
    check_weights(h, false)?;
    sample_columns(h, n, kind, |p| sample_negbin(r, p, rng))
}

/// One `NegBin(r, p)` draw, `p` in `(0, 1)`.
pub fn sample_negbin(r: f64, p: f64, rng: &mut RngStream) -> Result<u64> {
    ensure_positive("r", r)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain {
            what: "negative binomial probability outside (0, 1)",
            value: p,
        });
    }
    let rate = rv::gamma(r, (1.0 - p) / p, rng)?;
    rv::poisson(rate, rng)
}

/// Per-atom totals: `M1 = sum_i X_i({theta})`, and `M0 = n - M1`
/// (Bernoulli) or `M0 = n r` (negative binomial).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountStats {
    pub n: u32,
    pub likelihood: LikelihoodKind,
    pub atoms: Vec<f64>,
    pub m1: Vec<u64>,
    pub m0: Vec<f64>,
}

impl CountStats {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Indices of atoms with `M1 > 0`.
    pub fn observed(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&j| self.m1[j] > 0)
    }
}

pub fn count_stats(x: &FeatureMatrix) -> CountStats {
    let m1: Vec<u64> = x.columns.iter().map(|c| c.iter().map(|&(_, k)| k).sum()).collect();
    let n = f64::from(x.n);
    let m0 = match x.kind {
        LikelihoodKind::Bernoulli => m1.iter().map(|&k| n - k as f64).collect(),
        LikelihoodKind::Negbin { r } => vec![n * r; m1.len()],
    };
    CountStats {
        n: x.n,
        likelihood: x.kind,
        atoms: x.atoms.clone(),
        m1,
        m0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{sample_bp_stick_breaking, StickBreakingConfig};
    use crate::measure::{Atom, BaseMeasureSpec, ConstructionTag};
    use crate::verify::{check_mean, check_poisson_counts, chi_square_gof, DEFAULT_LEVEL};
    use proptest::prelude::*;
    use statrs::distribution::{Binomial, Discrete};

    fn single(weight: f64) -> DiscreteMeasure {
        DiscreteMeasure::new(
            ConstructionTag::StickBreaking,
            1,
            vec![Atom::new(0.25, weight, 1, 1)],
        )
    }

    #[test]
    fn weight_one_gives_all_ones() {
        let mut rng = RngStream::new(1, 0);
        let x = sample_bernoulli_process(&single(1.0), 7, &mut rng).unwrap();
        assert_eq!(x.column(0).len(), 7);
        assert_eq!(x.total(), 7);
        assert!(sample_negbin_process(&single(1.0), 2, 1.0, &mut rng).is_err());
        assert!(sample_bernoulli_process(&single(1.5), 2, &mut rng).is_err());
    }

    #[test]
    fn empty_measure_gives_empty_matrix() {
        let mut rng = RngStream::new(1, 0);
        let h = DiscreteMeasure::new(ConstructionTag::StickBreaking, 3, vec![]);
        let x = sample_bernoulli_process(&h, 4, &mut rng).unwrap();
        assert_eq!((x.n(), x.n_atoms(), x.total()), (4, 0, 0));
        assert!(count_stats(&x).is_empty());
    }

    #[test]
    fn column_counts_are_binomial() {
        let (n, p) = (6u32, 0.3);
        let mut rng = RngStream::new(11, 0);
        let mut hist = vec![0u64; n as usize + 1];
        let h = single(p);
        for _ in 0..20_000 {
            let x = sample_bernoulli_process(&h, n, &mut rng).unwrap();
            hist[x.total() as usize] += 1;
        }
        let bin = Binomial::new(p, u64::from(n)).unwrap();
        let probs: Vec<f64> = (0..=u64::from(n)).map(|k| bin.pmf(k)).collect();
        assert!(chi_square_gof(&hist, &probs, DEFAULT_LEVEL).unwrap().passed());
    }

    #[test]
    fn first_customer_takes_poisson_gamma_dishes() {
        let base = BaseMeasureSpec::unit(1.0, 1.0).unwrap();
        let cfg = StickBreakingConfig::effectively_untruncated(base).unwrap();
        let root = RngStream::new(12, 0);
        let totals: Vec<u64> = (0..10_000)
            .map(|k| {
                let mut rng = root.derive(k);
                let h = sample_bp_stick_breaking(&cfg, &mut rng).unwrap();
                sample_bernoulli_process(&h, 1, &mut rng).unwrap().total()
            })
            .collect();
        assert!(check_poisson_counts(&totals, 1.0).unwrap().passed());
    }

    #[test]
    fn negbin_means() {
        let mut rng = RngStream::new(13, 0);
        let geo: Vec<f64> = (0..100_000).map(|_| sample_negbin(1.0, 0.5, &mut rng).unwrap() as f64).collect();
        assert!(check_mean(&geo, 1.0, 4.0).unwrap().passed());
        // Oracle: count failures before the first success, twice.
        let direct: Vec<f64> = (0..100_000)
            .map(|_| {
                let mut k = 0u32;
                for _ in 0..2 {
                    while rv::bernoulli(0.5, &mut rng) {
                        k += 1;
                    }
                }
                f64::from(k)
            })
            .collect();
        let nb2: Vec<f64> = (0..100_000).map(|_| sample_negbin(2.0, 0.5, &mut rng).unwrap() as f64).collect();
        assert!(check_mean(&nb2, 2.0, 4.0).unwrap().passed());
        assert!(crate::verify::ks_two_sample(&nb2, &direct, DEFAULT_LEVEL).unwrap().passed());
        let tiny: u64 = (0..1000).map(|_| sample_negbin(1.0, 1e-12, &mut rng).unwrap()).sum();
        assert_eq!(tiny, 0);
    }

    #[test]
    fn count_stats_examples() {
        let x = FeatureMatrix::from_triplets(3, LikelihoodKind::Bernoulli, vec![0.5], [(0, 0, 1), (1, 0, 1)]).unwrap();
        let s = count_stats(&x);
        assert_eq!((s.m1[0], s.m0[0]), (2, 1.0));
        let x = FeatureMatrix::from_triplets(2, LikelihoodKind::negbin(1.5).unwrap(), vec![0.5], [(0, 0, 3)]).unwrap();
        let s = count_stats(&x);
        assert_eq!((s.m1[0], s.m0[0]), (3, 3.0));
        assert_eq!(s.observed().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn rejects_bad_matrices() {
        let b = LikelihoodKind::Bernoulli;
        assert!(FeatureMatrix::from_triplets(2, b, vec![0.1, 0.1], []).is_err());
        assert!(FeatureMatrix::from_triplets(2, b, vec![0.1], [(0, 0, 2)]).is_err());
        assert!(FeatureMatrix::from_triplets(2, b, vec![0.1], [(2, 0, 1)]).is_err());
        assert!(FeatureMatrix::from_triplets(2, b, vec![0.1], [(0, 1, 1)]).is_err());
        assert!(FeatureMatrix::from_triplets(2, b, vec![0.1], [(0, 0, 1), (0, 0, 1)]).is_err());
        assert!(LikelihoodKind::negbin(0.0).is_err());
        let err = FeatureMatrix::read_csv("0.5,0.25\n1,0\n1,x\n".as_bytes(), b).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn deterministic_per_stream() {
        let h = DiscreteMeasure::new(
            ConstructionTag::StickBreaking,
            2,
            vec![Atom::new(0.1, 0.4, 1, 1), Atom::new(0.7, 0.2, 2, 1)],
        );
        let a = sample_negbin_process(&h, 5, 2.0, &mut RngStream::new(4, 1)).unwrap();
        let b = sample_negbin_process(&h, 5, 2.0, &mut RngStream::new(4, 1)).unwrap();
        assert_eq!(a, b);
    }

    fn matrix_strategy() -> impl Strategy<Value = FeatureMatrix> {
        (1u32..6, 0usize..5, any::<bool>()).prop_flat_map(|(n, m, bern)| {
            let max = if bern { 1u64 } else { 9 };
            (
                proptest::collection::btree_set(-1_000_000i64..1_000_000, m),
                proptest::collection::vec(0..=max, n as usize * m),
                0.1f64..5.0,
            )
                .prop_map(move |(locs, cells, r)| {
                    let atoms: Vec<f64> = locs.into_iter().map(|k| k as f64 / 7.0).collect();
                    let m = atoms.len();
                    let kind = if bern { LikelihoodKind::Bernoulli } else { LikelihoodKind::Negbin { r } };
                    let entries = cells
                        .into_iter()
                        .enumerate()
                        .map(|(k, c)| ((k / m) as u32, (k % m) as u32, c));
                    FeatureMatrix::from_triplets(n, kind, atoms, entries).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn json_round_trip(x in matrix_strategy()) {
            prop_assert_eq!(FeatureMatrix::from_json(&x.to_json().unwrap()).unwrap(), x);
        }

        #[test]
        fn csv_round_trip(x in matrix_strategy()) {
            prop_assume!(x.n_atoms() > 0);
            let mut buf = Vec::new();
            x.write_csv(&mut buf).unwrap();
            prop_assert_eq!(FeatureMatrix::read_csv(buf.as_slice(), x.kind()).unwrap(), x);
        }

        #[test]
        fn bernoulli_stats_balance(x in matrix_strategy()) {
            let s = count_stats(&x);
            if x.kind() == LikelihoodKind::Bernoulli {
                for j in 0..s.len() {
                    prop_assert_eq!(s.m1[j] as f64 + s.m0[j], f64::from(s.n));
                }
            }
        }
    }
}
