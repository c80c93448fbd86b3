use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CorpusError, Document, Source};

/// Metadata for one degree-granting institution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstitutionRecord {
    pub name: String,
    /// Census division code.
    pub region: String,
    pub public: bool,
    pub private: bool,
    pub land_grant: bool,
    /// Lower is higher status.
    pub ranking: u32,
    /// Dissertation count, filled in from the corpus.
    pub size: u32,
}

/// Institution metadata keyed by name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Institutions {
    records: BTreeMap<String, InstitutionRecord>,
}

#[derive(Debug, Deserialize)]
struct RawRecord {
    name: String,
    region: String,
    public: String,
    private: String,
    land_grant: String,
    ranking: String,
}

fn parse_flag(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "y" => Some(true),
        "0" | "false" | "no" | "n" | "" => Some(false),
        _ => None,
    }
}

impl Institutions {
    pub fn new(records: Vec<InstitutionRecord>) -> Result<Self, CorpusError> {
        let mut map = BTreeMap::new();
        for (i, rec) in records.into_iter().enumerate() {
            let line = i + 2;
            if rec.public == rec.private {
                return Err(CorpusError::Validation {
                    line,
                    msg: format!("{}: exactly one of public/private must be set", rec.name),
                });
            }
            if rec.ranking < 1 {
                return Err(CorpusError::Validation {
                    line,
                    msg: format!("{}: ranking must be >= 1", rec.name),
                });
            }
            let name = rec.name.clone();
            if map.insert(name.clone(), rec).is_some() {
                return Err(CorpusError::Validation {
                    line,
                    msg: format!("duplicate institution {name:?}"),
                });
            }
        }
        Ok(Self { records: map })
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let file = std::fs::File::open(path).map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::read(file)
    }

    /// Reads `name,region,public,private,land_grant,ranking` CSV.
    pub fn read<R: Read>(reader: R) -> Result<Self, CorpusError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut records = Vec::new();
        for (i, row) in rdr.deserialize::<RawRecord>().enumerate() {
            let line = i + 2;
            let raw = row.map_err(|e| CorpusError::Parse { line, msg: e.to_string() })?;
            let flag = |s: &str, field: &str| {
                parse_flag(s).ok_or_else(|| CorpusError::Validation {
                    line,
                    msg: format!("{field} must be a boolean, got {s:?}"),
                })
            };
            let ranking = raw.ranking.trim().parse::<u32>().map_err(|_| CorpusError::Validation {
                line,
                msg: format!("ranking must be a positive integer, got {:?}", raw.ranking),
            })?;
            records.push(InstitutionRecord {
                public: flag(&raw.public, "public")?,
                private: flag(&raw.private, "private")?,
                land_grant: flag(&raw.land_grant, "land_grant")?,
                name: raw.name,
                region: raw.region,
                ranking,
                size: 0,
            });
        }
        Self::new(records)
    }

    /// Sets every institution's size to its dissertation count among `docs`.
    pub fn compute_sizes<'a>(&mut self, docs: impl IntoIterator<Item = &'a Document>) {
        for rec in self.records.values_mut() {
            rec.size = 0;
        }
        for doc in docs {
            if doc.source != Source::Dissertation {
                continue;
            }
            if let Some(rec) = doc.institution.as_ref().and_then(|i| self.records.get_mut(i)) {
                rec.size += 1;
            }
        }
    }

    pub fn set_size(&mut self, name: &str, size: u32) -> bool {
        match self.records.get_mut(name) {
            Some(rec) => {
                rec.size = size;
                true
            }
            None => false,
        }
    }

    pub fn get(&self, name: &str) -> Option<&InstitutionRecord> {
        self.records.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.records.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.records.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = &InstitutionRecord> {
        self.records.values()
    }
}
