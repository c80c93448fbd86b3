use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::DiffusionError;
use crate::corpus::{Document, Extractor};
use crate::semnet::{build_network, EdgeKey, TermNetwork};

/// Reputation and impact factor as supplied by the user.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct JournalMeta {
    pub reputation: Option<f64>,
    pub impact_factor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JournalOverlapRow {
    pub journal: String,
    pub overlap: f64,
    pub reputation: Option<f64>,
    pub impact_factor: Option<f64>,
    pub edges: usize,
    pub vogue_edges: usize,
}

/// `(|E ∩ vogue|, |E|, share)`; an edgeless network scores 0.
pub fn network_overlap(net: &TermNetwork, vogue: &BTreeSet<EdgeKey>) -> (usize, usize, f64) {
    let total = net.edge_count();
    let hits = net.edges.keys().filter(|k| vogue.contains(*k)).count();
    let share = if total == 0 { 0.0 } else { hits as f64 / total as f64 };
    (hits, total, share)
}

/// Builds one network per journal with the shared extraction pipeline
/// (TF-IDF fit within each journal) and scores it against the vogue set.
/// Rows are sorted by overlap descending, then by name.
pub fn journal_overlap(
    journals: &BTreeMap<String, Vec<&Document>>,
    vogue: &BTreeSet<EdgeKey>,
    extractor: &Extractor,
    min_weight: u32,
    meta: &BTreeMap<String, JournalMeta>,
) -> Result<Vec<JournalOverlapRow>, DiffusionError> {
    let entries: Vec<(&String, &Vec<&Document>)> = journals.iter().collect();
    let mut rows = entries
        .par_iter()
        .map(|&(name, docs)| {
            let terms: Vec<BTreeSet<String>> = if docs.is_empty() {
                Vec::new()
            } else {
                extractor.extract(docs.iter().copied())?.into_iter().map(|d| d.terms).collect()
            };
            let net = build_network(&terms, name, min_weight);
            let (hits, total, overlap) = network_overlap(&net, vogue);
            if total == 0 {
                log::warn!("journal {name:?} has an empty semantic network; overlap set to 0");
            }
            let m = meta.get(name).copied().unwrap_or_default();
            Ok(JournalOverlapRow {
                journal: name.clone(),
                overlap,
                reputation: m.reputation,
                impact_factor: m.impact_factor,
                edges: total,
                vogue_edges: hits,
            })
        })
        .collect::<Result<Vec<_>, DiffusionError>>()?;
    rows.sort_by(|x, y| y.overlap.total_cmp(&x.overlap).then_with(|| x.journal.cmp(&y.journal)));
    Ok(rows)
}

fn parse_optional(field: &str) -> Result<Option<f64>, String> {
    let f = field.trim();
    if f.is_empty() || f.eq_ignore_ascii_case("unavailable") || f.eq_ignore_ascii_case("na") {
        return Ok(None);
    }
    f.parse().map(Some).map_err(|_| format!("not a number: {f:?}"))
}

/// Reads `journal,reputation,impact_factor`. Empty or "Unavailable" cells are
/// missing values.
pub fn read_journal_meta<R: Read>(reader: R) -> Result<BTreeMap<String, JournalMeta>, DiffusionError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| DiffusionError::Format(e.to_string()))?;
        if rec.len() != 3 {
            return Err(DiffusionError::Format(format!("row {row}: expected 3 columns")));
        }
        let bad = |e: String| DiffusionError::Format(format!("row {row}: {e}"));
        let meta = JournalMeta {
            reputation: parse_optional(&rec[1]).map_err(bad)?,
            impact_factor: parse_optional(&rec[2]).map_err(bad)?,
        };
        if out.insert(rec[0].trim().to_string(), meta).is_some() {
            return Err(DiffusionError::Format(format!("row {row}: duplicate journal {:?}", &rec[0])));
        }
    }
    Ok(out)
}

pub fn write_journal_csv<W: Write>(rows: &[JournalOverlapRow], writer: W) -> csv::Result<()> {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["journal", "overlap", "reputation", "impact_factor"])?;
    for r in rows {
        w.write_record([r.journal.clone(), r.overlap.to_string(), opt(r.reputation), opt(r.impact_factor)])?;
    }
    w.flush()?;
    Ok(())
}
