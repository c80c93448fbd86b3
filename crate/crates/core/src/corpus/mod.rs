//! Corpus ingestion, cleaning, period splitting and TF-IDF term extraction.

mod document;
mod institutions;
mod normalize;
mod tfidf;

use std::collections::BTreeSet;

use rayon::prelude::*;
use thiserror::Error;

pub use document::{load_corpus, read_corpus, Corpus, CorpusSchema, Document, Source};
pub use institutions::{InstitutionRecord, Institutions};
pub use normalize::{normalize_text, Lemmatizer, Normalizer, Stopwords, CORPUS_STOPWORDS, MIN_TOKEN_LEN};
pub use tfidf::{extract_terms, tfidf, TermVector, TokenizedDoc};

/// Default number of terms kept per abstract.
pub const DEFAULT_TERMS_PER_DOC: usize = 20;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed input: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: {msg}")]
    Validation { line: usize, msg: String },
    #[error("invalid period configuration: {0}")]
    Config(String),
    #[error("no documents to vectorize")]
    EmptyCorpus,
}

/// Document ids assigned to the two analysis periods.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PeriodSplit {
    /// Years in `[start, boundary]`.
    pub t1: BTreeSet<String>,
    /// Years in `(boundary, end]`.
    pub t2: BTreeSet<String>,
    /// Documents outside `[start, end]`.
    pub excluded: usize,
}

/// Which of the two periods a document belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Period {
    T1,
    T2,
}

impl PeriodSplit {
    pub fn period_of(&self, id: &str) -> Option<Period> {
        if self.t1.contains(id) {
            Some(Period::T1)
        } else if self.t2.contains(id) {
            Some(Period::T2)
        } else {
            None
        }
    }
}

pub fn split_periods(corpus: &Corpus, start: i32, boundary: i32, end: i32) -> Result<PeriodSplit, CorpusError> {
    if !(start <= boundary && boundary < end) {
        return Err(CorpusError::Config(format!(
            "need start <= boundary < end, got {start} / {boundary} / {end}"
        )));
    }
    let mut split = PeriodSplit::default();
    for doc in corpus.iter() {
        if doc.year < start || doc.year > end {
            split.excluded += 1;
        } else if doc.year <= boundary {
            split.t1.insert(doc.id.clone());
        } else {
            split.t2.insert(doc.id.clone());
        }
    }
    if split.excluded > 0 {
        log::warn!("{} document(s) outside {start}-{end} excluded", split.excluded);
    }
    Ok(split)
}

/// A document after cleaning, vectorization and top-K extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedDoc {
    pub id: String,
    pub vector: TermVector,
    pub terms: BTreeSet<String>,
}

/// The text-to-terms pipeline shared by period and journal networks.
#[derive(Debug, Clone)]
pub struct Extractor {
    pub normalizer: Normalizer,
    pub terms_per_doc: usize,
}

impl Default for Extractor {
    fn default() -> Self {
        Self {
            normalizer: Normalizer::default(),
            terms_per_doc: DEFAULT_TERMS_PER_DOC,
        }
    }
}

impl Extractor {
    pub fn new(normalizer: Normalizer, terms_per_doc: usize) -> Self {
        assert!(terms_per_doc >= 1, "terms_per_doc must be positive");
        Self { normalizer, terms_per_doc }
    }

    /// Normalizes every document, fits TF-IDF over this collection and keeps
    /// each document's top terms. Output order matches input order.
    pub fn extract<'a, I>(&self, docs: I) -> Result<Vec<ExtractedDoc>, CorpusError>
    where
        I: IntoIterator<Item = &'a Document>,
    {
        let docs: Vec<&Document> = docs.into_iter().collect();
        let tokenized: Vec<TokenizedDoc> = docs
            .par_iter()
            .map(|d| TokenizedDoc {
                id: d.id.clone(),
                tokens: self.normalizer.normalize(&d.text),
            })
            .collect();
        let vectors = tfidf(&tokenized)?;
        Ok(vectors
            .into_iter()
            .map(|vector| ExtractedDoc {
                id: vector.doc_id.clone(),
                terms: extract_terms(&vector, self.terms_per_doc),
                vector,
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str, year: i32) -> Document {
        Document {
            id: id.into(),
            text: String::new(),
            year,
            institution: Some("U".into()),
            source: Source::Dissertation,
            journal: None,
        }
    }

    #[test]
    fn boundary_year_goes_to_first_period() {
        let corpus = Corpus::new(vec![doc("a", 2015), doc("b", 2016), doc("c", 2021), doc("d", 2011)]).unwrap();
        let split = split_periods(&corpus, 2011, 2015, 2020).unwrap();
        assert!(split.t1.contains("a") && split.t1.contains("d"));
        assert!(split.t2.contains("b"));
        assert_eq!(split.excluded, 1);
        assert_eq!(split.t1.len() + split.t2.len() + split.excluded, corpus.len());
        assert_eq!(split.period_of("c"), None);
    }

    #[test]
    fn bad_boundary_is_config_error() {
        let corpus = Corpus::default();
        assert!(matches!(split_periods(&corpus, 2011, 2020, 2020), Err(CorpusError::Config(_))));
        assert!(matches!(split_periods(&corpus, 2011, 2010, 2020), Err(CorpusError::Config(_))));
    }

    #[test]
    fn extractor_keeps_top_terms() {
        let mut a = doc("a", 2012);
        a.text = "stigma stigma health".into();
        let mut b = doc("b", 2012);
        b.text = "health prison".into();
        let out = Extractor::default().extract([&a, &b]).unwrap();
        assert_eq!(out[0].terms, BTreeSet::from(["stigma".to_string()]));
        assert_eq!(out[1].terms, BTreeSet::from(["prison".to_string()]));
    }
}
