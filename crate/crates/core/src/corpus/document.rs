use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::CorpusError;

/// Where an abstract came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Dissertation,
    Journal,
}

impl Source {
    fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dissertation" | "thesis" => Some(Source::Dissertation),
            "journal" | "article" => Some(Source::Journal),
            _ => None,
        }
    }
}

/// One abstract.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub year: i32,
    pub institution: Option<String>,
    pub source: Source,
    pub journal: Option<String>,
}

/// Field names used when reading corpus JSONL.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusSchema {
    pub id_field: String,
    pub text_field: String,
    pub year_field: String,
    pub source_field: String,
    pub institution_field: String,
    pub journal_field: String,
}

impl Default for CorpusSchema {
    fn default() -> Self {
        Self {
            id_field: "id".into(),
            text_field: "text".into(),
            year_field: "year".into(),
            source_field: "source".into(),
            institution_field: "institution".into(),
            journal_field: "journal".into(),
        }
    }
}

/// A validated set of documents with unique ids, kept in input order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    docs: Vec<Document>,
    index: BTreeMap<String, usize>,
}

impl Corpus {
    /// Builds a corpus, rejecting duplicate ids and documents that violate the
    /// source/institution/journal invariants.
    pub fn new(docs: Vec<Document>) -> Result<Self, CorpusError> {
        let mut index = BTreeMap::new();
        for (i, doc) in docs.iter().enumerate() {
            check_document(doc).map_err(|msg| CorpusError::Validation { line: i + 1, msg })?;
            if index.insert(doc.id.clone(), i).is_some() {
                return Err(CorpusError::Validation {
                    line: i + 1,
                    msg: format!("duplicate id {:?}", doc.id),
                });
            }
        }
        Ok(Self { docs, index })
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Document> {
        self.docs.iter()
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.index.get(id).map(|&i| &self.docs[i])
    }

    pub fn documents(&self) -> &[Document] {
        &self.docs
    }
}

fn check_document(doc: &Document) -> Result<(), String> {
    if doc.id.is_empty() {
        return Err("empty id".into());
    }
    match doc.source {
        Source::Journal if doc.journal.as_deref().is_none_or(str::is_empty) => {
            Err(format!("journal document {:?} has no journal name", doc.id))
        }
        Source::Dissertation if doc.institution.as_deref().is_none_or(str::is_empty) => {
            Err(format!("dissertation {:?} has no institution", doc.id))
        }
        _ => Ok(()),
    }
}

/// Reads a JSONL corpus from disk.
pub fn load_corpus(path: &Path, schema: &CorpusSchema) -> Result<Corpus, CorpusError> {
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_corpus(file, schema)
}

/// Reads a JSONL corpus from any reader. Blank lines are skipped; line numbers
/// in errors are 1-based physical line numbers.
pub fn read_corpus<R: Read>(reader: R, schema: &CorpusSchema) -> Result<Corpus, CorpusError> {
    let mut docs = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|source| CorpusError::Io {
            path: format!("<line {lineno}>"),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
        let doc = parse_document(&value, schema)
            .map_err(|msg| CorpusError::Validation { line: lineno, msg })?;
        check_document(&doc).map_err(|msg| CorpusError::Validation { line: lineno, msg })?;
        if !seen.insert(doc.id.clone()) {
            return Err(CorpusError::Validation {
                line: lineno,
                msg: format!("duplicate id {:?}", doc.id),
            });
        }
        docs.push(doc);
    }
    Corpus::new(docs)
}

fn parse_document(value: &Value, schema: &CorpusSchema) -> Result<Document, String> {
    let obj = value.as_object().ok_or("line is not a JSON object")?;
    let required = |key: &str| obj.get(key).filter(|v| !v.is_null()).ok_or_else(|| format!("missing field {key:?}"));
    let optional_str = |key: &str| -> Result<Option<String>, String> {
        match obj.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::String(s)) if s.is_empty() => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(format!("field {key:?} must be a string")),
        }
    };

    let id = match required(&schema.id_field)? {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        _ => return Err(format!("field {:?} must be a string", schema.id_field)),
    };
    let text = required(&schema.text_field)?
        .as_str()
        .ok_or_else(|| format!("field {:?} must be a string", schema.text_field))?
        .to_string();
    let year = required(&schema.year_field)?
        .as_i64()
        .and_then(|y| i32::try_from(y).ok())
        .ok_or_else(|| format!("field {:?} must be an integer year", schema.year_field))?;
    let source_raw = required(&schema.source_field)?
        .as_str()
        .ok_or_else(|| format!("field {:?} must be a string", schema.source_field))?;
    let source = Source::parse(source_raw).ok_or_else(|| format!("unknown source {source_raw:?}"))?;

    Ok(Document {
        id,
        text,
        year,
        institution: optional_str(&schema.institution_field)?,
        source,
        journal: optional_str(&schema.journal_field)?,
    })
}
