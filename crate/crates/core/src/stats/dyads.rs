use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::corpus::{InstitutionRecord, Institutions};
use crate::diffusion::FlowNetwork;

/// Pairwise research fit between institutions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitMap {
    /// Keyed by the lexicographically ordered pair.
    values: BTreeMap<(String, String), f64>,
    /// Institutions with a mean vector, i.e. at least one nonempty document.
    covered: BTreeSet<String>,
}

impl FitMap {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        if a == b {
            return self.covered.contains(a).then_some(1.0);
        }
        let key = if a < b { (a.to_string(), b.to_string()) } else { (b.to_string(), a.to_string()) };
        self.values.get(&key).copied()
    }

    pub fn covered(&self) -> &BTreeSet<String> {
        &self.covered
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn cosine(a: &BTreeMap<&str, f64>, na: f64, b: &BTreeMap<&str, f64>, nb: f64) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let dot: f64 = small.iter().filter_map(|(t, v)| large.get(t).map(|w| v * w)).sum();
    (dot / (na * nb)).clamp(0.0, 1.0)
}

/// Cosine similarity between institutions' mean TF-IDF vectors. Institutions
/// without documents, or whose mean vector is zero, get no fit and are logged.
pub fn fit_similarity(vectors: &BTreeMap<String, Vec<&BTreeMap<String, f64>>>) -> FitMap {
    let mut means: Vec<(&str, BTreeMap<&str, f64>, f64)> = Vec::new();
    for (inst, docs) in vectors {
        let mut mean: BTreeMap<&str, f64> = BTreeMap::new();
        for doc in docs {
            for (t, v) in doc.iter() {
                *mean.entry(t.as_str()).or_insert(0.0) += v;
            }
        }
        let count = docs.len() as f64;
        mean.values_mut().for_each(|v| *v /= count);
        mean.retain(|_, v| *v != 0.0);
        let norm = mean.values().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            means.push((inst, mean, norm));
        } else {
            log::warn!("institution {inst:?} has no first-period vocabulary; research fit undefined");
        }
    }
    let mut out = FitMap::default();
    for (i, (a, va, na)) in means.iter().enumerate() {
        out.covered.insert(a.to_string());
        for (b, vb, nb) in &means[i + 1..] {
            out.values.insert((a.to_string(), b.to_string()), cosine(va, *na, vb, *nb));
        }
    }
    out
}

/// One producer/adopter pair of institutions with its outcome and features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadRow {
    pub producer: String,
    pub adopter: String,
    pub y: f64,
    pub same_rank: u8,
    pub same_size: u8,
    pub same_location: u8,
    pub both_public: u8,
    pub both_private: u8,
    pub both_landgrant: u8,
    pub fit: Option<f64>,
    pub rank_gap: f64,
    pub size_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DyadTable {
    pub rows: Vec<DyadRow>,
    pub directed: bool,
}

impl DyadTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Tier of ten ranks: 1-10 is tier 0, 11-20 tier 1 and so on.
pub fn rank_tier(ranking: u32) -> u32 {
    ranking.saturating_sub(1) / 10
}

/// Percentile with linear interpolation between order statistics.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * q / 100.0;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Size tercile per institution, 0 for the smallest third. Values on a
/// boundary go to the lower tercile.
pub fn size_terciles<'a>(records: impl IntoIterator<Item = &'a InstitutionRecord>) -> BTreeMap<String, u8> {
    let records: Vec<&InstitutionRecord> = records.into_iter().collect();
    let mut sizes: Vec<f64> = records.iter().map(|r| f64::from(r.size)).collect();
    sizes.sort_by(f64::total_cmp);
    let lo = percentile(&sizes, 100.0 / 3.0);
    let hi = percentile(&sizes, 200.0 / 3.0);
    records
        .iter()
        .map(|r| {
            let s = f64::from(r.size);
            let t = if s <= lo {
                0
            } else if s <= hi {
                1
            } else {
                2
            };
            (r.name.clone(), t)
        })
        .collect()
}

/// One row per ordered pair of institutions (or unordered when
/// `directed` is false, with the outcome summed over both directions).
pub fn build_dyads(
    flow: &FlowNetwork,
    institutions: &Institutions,
    fit: &FitMap,
    directed: bool,
) -> Result<DyadTable, StatsError> {
    let missing: Vec<String> = flow.nodes.iter().filter(|n| !institutions.contains(n)).cloned().collect();
    if !missing.is_empty() {
        return Err(StatsError::Metadata { missing });
    }
    let terciles = size_terciles(institutions.iter());
    let recs: Vec<&InstitutionRecord> = institutions.iter().collect();
    let mut rows = Vec::new();
    for (i, p) in recs.iter().enumerate() {
        for (j, a) in recs.iter().enumerate() {
            if i == j || (!directed && j < i) {
                continue;
            }
            let mut y = flow.weight(&p.name, &a.name);
            if !directed {
                y += flow.weight(&a.name, &p.name);
            }
            let flag = |b: bool| u8::from(b);
            rows.push(DyadRow {
                producer: p.name.clone(),
                adopter: a.name.clone(),
                y,
                same_rank: flag(rank_tier(p.ranking) == rank_tier(a.ranking)),
                same_size: flag(terciles[&p.name] == terciles[&a.name]),
                same_location: flag(p.region == a.region),
                both_public: flag(p.public && a.public),
                both_private: flag(p.private && a.private),
                both_landgrant: flag(p.land_grant && a.land_grant),
                fit: fit.get(&p.name, &a.name),
                rank_gap: f64::from(p.ranking.abs_diff(a.ranking)),
                size_gap: f64::from(p.size.abs_diff(a.size)),
            });
        }
    }
    Ok(DyadTable { rows, directed })
}
