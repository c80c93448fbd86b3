use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::CorpusError;

/// A normalized document ready for vectorization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedDoc {
    pub id: String,
    pub tokens: Vec<String>,
}

/// TF-IDF scores for one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermVector {
    pub doc_id: String,
    pub scores: BTreeMap<String, f64>,
}

/// Raw term frequency times natural-log inverse document frequency:
/// `count(t, d) * ln(N / df(t))`. Terms present in every document score 0.
pub fn tfidf(docs: &[TokenizedDoc]) -> Result<Vec<TermVector>, CorpusError> {
    if docs.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let counts: Vec<HashMap<&str, u32>> = docs
        .par_iter()
        .map(|doc| {
            let mut tf = HashMap::new();
            for t in &doc.tokens {
                *tf.entry(t.as_str()).or_insert(0u32) += 1;
            }
            tf
        })
        .collect();

    let mut df: HashMap<&str, u32> = HashMap::new();
    for tf in &counts {
        for &term in tf.keys() {
            *df.entry(term).or_insert(0) += 1;
        }
    }

    let n = docs.len() as f64;
    let vectors = docs
        .par_iter()
        .zip(counts.par_iter())
        .map(|(doc, tf)| {
            let scores = tf
                .iter()
                .map(|(&term, &count)| {
                    let idf = (n / df[term] as f64).ln();
                    (term.to_string(), count as f64 * idf)
                })
                .collect();
            TermVector {
                doc_id: doc.id.clone(),
                scores,
            }
        })
        .collect();
    Ok(vectors)
}

/// The `k` highest-scoring terms with positive score; ties go to the
/// lexicographically smaller term.
pub fn extract_terms(vec: &TermVector, k: usize) -> BTreeSet<String> {
    let mut ranked: Vec<(&String, f64)> = vec.scores.iter().filter(|(_, &s)| s > 0.0).map(|(t, &s)| (t, s)).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.into_iter().take(k).map(|(t, _)| t.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn doc(id: &str, toks: &[&str]) -> TokenizedDoc {
        TokenizedDoc {
            id: id.into(),
            tokens: toks.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn vector(scores: &[(&str, f64)]) -> TermVector {
        TermVector {
            doc_id: "d".into(),
            scores: scores.iter().map(|(t, s)| (t.to_string(), *s)).collect(),
        }
    }

    #[test]
    fn empty_is_an_error() {
        assert!(matches!(tfidf(&[]), Err(CorpusError::EmptyCorpus)));
    }

    #[test]
    fn two_document_example() {
        let v = tfidf(&[doc("A", &["health", "health", "stigma"]), doc("B", &["stigma"])]).unwrap();
        assert!((v[0].scores["health"] - 2.0 * 2f64.ln()).abs() < 1e-12);
        assert!((v[0].scores["health"] - 1.3863).abs() < 1e-4);
        assert_eq!(v[0].scores["stigma"], 0.0);
        assert_eq!(v[1].doc_id, "B");
    }

    #[test]
    fn ubiquitous_term_scores_zero() {
        let v = tfidf(&[doc("a", &["x", "y"]), doc("b", &["x"]), doc("c", &["x", "x"])]).unwrap();
        assert!(v.iter().all(|tv| tv.scores["x"] == 0.0));
    }

    #[test]
    fn extract_tie_break_and_limits() {
        let v = vector(&[("a", 2.0), ("b", 2.0), ("c", 1.0)]);
        assert_eq!(extract_terms(&v, 2), BTreeSet::from(["a".to_string(), "b".to_string()]));
        assert_eq!(extract_terms(&v, 10).len(), 3);
        assert!(extract_terms(&vector(&[("a", 0.0), ("b", 0.0)]), 3).is_empty());
    }

    proptest! {
        #[test]
        fn scores_nonnegative(docs in prop::collection::vec(prop::collection::vec("[a-e]", 0..8), 1..10)) {
            let docs: Vec<_> = docs.iter().enumerate().map(|(i, d)| TokenizedDoc { id: i.to_string(), tokens: d.clone() }).collect();
            let n = docs.len();
            let vecs = tfidf(&docs).unwrap();
            for v in &vecs {
                for (term, &s) in &v.scores {
                    prop_assert!(s >= 0.0);
                    let df = docs.iter().filter(|d| d.tokens.contains(term)).count();
                    if df == n { prop_assert_eq!(s, 0.0); }
                }
            }
        }

        #[test]
        fn extraction_bounded_and_deterministic(scores in prop::collection::btree_map("[a-h]", 0.0f64..3.0, 0..8), k in 1usize..6) {
            let v = TermVector { doc_id: "d".into(), scores };
            let a = extract_terms(&v, k);
            prop_assert!(a.len() <= k);
            prop_assert_eq!(a, extract_terms(&v.clone(), k));
        }
    }
}
