use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::DiffusionError;
use crate::corpus::{Institutions, Source};
use crate::semnet::EdgeKey;

/// The pieces of a document attribution needs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributedDoc {
    pub id: String,
    pub institution: Option<String>,
    pub source: Source,
    pub year: i32,
    pub terms: BTreeSet<String>,
}

/// Which first-period users of a pair count as its producers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProducerRule {
    /// Every institution that used the pair in T1.
    #[default]
    All,
    /// Only institutions that used it in the earliest T1 year it appears.
    EarliestYear,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairAttribution {
    pub edge: EdgeKey,
    pub producers: BTreeSet<String>,
    pub adopters: BTreeSet<String>,
}

/// Pair -> (institution -> earliest year of co-use) for one period.
fn co_use<'a>(
    docs: &'a [AttributedDoc],
    by_term: &BTreeMap<&str, Vec<&'a EdgeKey>>,
    institutions: &Institutions,
) -> Result<BTreeMap<&'a EdgeKey, BTreeMap<&'a str, i32>>, DiffusionError> {
    let mut out: BTreeMap<&EdgeKey, BTreeMap<&str, i32>> = BTreeMap::new();
    for doc in docs.iter().filter(|d| d.source == Source::Dissertation) {
        let Some(inst) = doc.institution.as_deref() else { continue };
        if !institutions.contains(inst) {
            return Err(DiffusionError::UnknownInstitution {
                doc: doc.id.clone(),
                institution: inst.to_string(),
            });
        }
        for term in &doc.terms {
            let Some(edges) = by_term.get(term.as_str()) else { continue };
            // visit each pair from its `a` endpoint only
            for edge in edges.iter().filter(|e| e.a() == term) {
                if doc.terms.contains(edge.b()) {
                    let year = out.entry(edge).or_default().entry(inst).or_insert(doc.year);
                    *year = (*year).min(doc.year);
                }
            }
        }
    }
    Ok(out)
}

/// Attributes each vogue pair to the institutions whose first-period
/// dissertations co-extract both terms (producers) and whose second-period
/// dissertations do (adopters). Journal documents never attribute.
pub fn attribute_pairs(
    docs_t1: &[AttributedDoc],
    docs_t2: &[AttributedDoc],
    vogue: &BTreeSet<EdgeKey>,
    institutions: &Institutions,
    rule: ProducerRule,
) -> Result<Vec<PairAttribution>, DiffusionError> {
    let mut by_term: BTreeMap<&str, Vec<&EdgeKey>> = BTreeMap::new();
    for e in vogue {
        by_term.entry(e.a()).or_default().push(e);
        by_term.entry(e.b()).or_default().push(e);
    }
    let produced = co_use(docs_t1, &by_term, institutions)?;
    let adopted = co_use(docs_t2, &by_term, institutions)?;

    Ok(vogue
        .iter()
        .map(|edge| {
            let producers = match produced.get(edge) {
                None => BTreeSet::new(),
                Some(users) => {
                    let first = users.values().copied().min();
                    users
                        .iter()
                        .filter(|(_, &y)| rule == ProducerRule::All || Some(y) == first)
                        .map(|(i, _)| i.to_string())
                        .collect()
                }
            };
            let adopters = adopted
                .get(edge)
                .map(|users| users.keys().map(|i| i.to_string()).collect())
                .unwrap_or_default();
            PairAttribution {
                edge: edge.clone(),
                producers,
                adopters,
            }
        })
        .collect())
}
