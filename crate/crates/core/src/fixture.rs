//! Synthetic corpora with planted vogue pairs and a planted diffusion regime.
//!
//! Content words are pseudo-words built from consonant-vowel syllables, so
//! cleaning leaves them untouched, and every document carries few enough of
//! them that top-K extraction keeps all of its words. Co-occurrence weights
//! are then exact document counts chosen by the generator:
//!
//! * a vogue pair is co-used in two first-period dissertations of its
//!   producer (each term also appears alone elsewhere, which keeps the edge
//!   out of the first backbone) and in twenty or more second-period
//!   dissertations spread over its adopters;
//! * a foundation pair is co-used in about twenty dissertations per period;
//! * background words are drawn from a vocabulary large enough that chance
//!   co-occurrence rarely exceeds two documents.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, InstitutionRecord, Normalizer, Source};

/// Planted diffusion pattern.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Top-tier schools produce every trend and all tiers adopt.
    #[default]
    Hierarchical,
    /// Each trend stays inside the ranking tier of its producer.
    Niche,
}

impl FromStr for Regime {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "hierarchical" => Ok(Self::Hierarchical),
            "niche" => Ok(Self::Niche),
            _ => Err(format!("unknown regime {s:?} (hierarchical|niche)")),
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Hierarchical => "hierarchical",
            Self::Niche => "niche",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureParams {
    pub seed: u64,
    pub schools: usize,
    /// Background dissertations per school, spread over both periods.
    pub docs_per_school: usize,
    pub vogue_pairs: usize,
    pub foundation_pairs: usize,
    pub regime: Regime,
    /// Number of journals; the first is vogue-heavy and the second shares no
    /// vocabulary with the dissertations.
    pub journals: usize,
    pub docs_per_journal: usize,
    pub year_start: i32,
    pub year_boundary: i32,
    pub year_end: i32,
}

impl Default for FixtureParams {
    fn default() -> Self {
        Self {
            seed: 1,
            schools: 16,
            docs_per_school: 125,
            vogue_pairs: 8,
            foundation_pairs: 6,
            regime: Regime::Hierarchical,
            journals: 4,
            docs_per_journal: 40,
            year_start: 2011,
            year_boundary: 2015,
            year_end: 2020,
        }
    }
}

/// Schools per ranking tier.
pub const TIER_SIZE: usize = 4;
const BACKGROUND_VOCAB: usize = 1500;
const WORDS_PER_DOC: usize = 6;
const VOGUE_T1_COUSE: usize = 2;
const VOGUE_T1_SOLO: usize = 10;
const VOGUE_T2_COUSE: std::ops::RangeInclusive<usize> = 20..=24;
const FOUNDATION_COUSE: usize = 20;
const DIVISIONS: [&str; 4] = ["new_england", "middle_atlantic", "east_north_central", "pacific"];
const FILLER: [&str; 10] = ["the", "of", "and", "this", "dissertation", "in", "chapter", "with", "for", "on"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedPair {
    pub a: String,
    pub b: String,
    pub producers: BTreeSet<String>,
    pub adopters: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub params: FixtureParams,
    pub vogue: Vec<PlantedPair>,
    pub foundation: Vec<(String, String)>,
    /// Producer -> adopter flows implied by the planted pairs, self-flows
    /// excluded.
    pub flows: BTreeMap<String, BTreeMap<String, u32>>,
    pub cross_tier_flows: u32,
    pub tiers: BTreeMap<String, usize>,
    pub vogue_journal: Option<String>,
    pub disjoint_journal: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub documents: Vec<Document>,
    pub institutions: Vec<InstitutionRecord>,
    /// `(journal, reputation, impact_factor)`; `None` marks a missing value.
    pub journal_meta: Vec<(String, Option<f64>, Option<f64>)>,
    pub truth: GroundTruth,
}

struct Words {
    rng: ChaCha8Rng,
    seen: BTreeSet<String>,
    normalizer: Normalizer,
}

impl Words {
    const CONSONANTS: &'static [u8] = b"bdfgklmnprstvz";
    const VOWELS: &'static [u8] = b"aeiou";

    /// A fresh pseudo-word that survives cleaning unchanged.
    fn fresh(&mut self) -> String {
        loop {
            let syllables = self.rng.random_range(3..=4);
            let mut w = String::with_capacity(syllables * 2);
            for _ in 0..syllables {
                w.push(*Self::CONSONANTS.choose(&mut self.rng).unwrap() as char);
                w.push(*Self::VOWELS.choose(&mut self.rng).unwrap() as char);
            }
            if !self.seen.contains(&w) && self.normalizer.normalize(&w) == [w.as_str()] {
                self.seen.insert(w.clone());
                return w;
            }
        }
    }

    fn many(&mut self, n: usize) -> Vec<String> {
        (0..n).map(|_| self.fresh()).collect()
    }
}

fn text(rng: &mut ChaCha8Rng, vocab: &[String], planted: &[&str]) -> String {
    let mut words: Vec<String> = planted.iter().map(|s| s.to_string()).collect();
    while words.len() < WORDS_PER_DOC + planted.len().saturating_sub(1) {
        let w = vocab.choose(rng).unwrap();
        if !words.contains(w) {
            words.push(w.clone());
        }
    }
    words.shuffle(rng);
    let mut out = String::from("<p>");
    for w in words {
        for _ in 0..rng.random_range(0..=2) {
            out.push_str(FILLER.choose(rng).unwrap());
            out.push(' ');
        }
        out.push_str(&w);
        out.push(' ');
    }
    out.push_str("</p>");
    out
}

struct Builder<'a> {
    params: &'a FixtureParams,
    rng: ChaCha8Rng,
    background: Vec<String>,
    docs: Vec<Document>,
}

impl Builder<'_> {
    fn year(&mut self, period: u8) -> i32 {
        let p = self.params;
        match period {
            1 => self.rng.random_range(p.year_start..=p.year_boundary),
            _ => self.rng.random_range(p.year_boundary + 1..=p.year_end),
        }
    }

    fn dissertation(&mut self, school: &str, year: i32, planted: &[&str]) {
        let text = text(&mut self.rng, &self.background, planted);
        let id = format!("d{:05}", self.docs.len());
        self.docs.push(Document {
            id,
            text,
            year,
            institution: Some(school.to_string()),
            source: Source::Dissertation,
            journal: None,
        });
    }

    fn article(&mut self, journal: &str, planted: &[&str], vocab: Option<&[String]>) {
        let text = text(&mut self.rng, vocab.unwrap_or(&self.background), planted);
        let year = self.year(1);
        let id = format!("j{:05}", self.docs.len());
        self.docs.push(Document {
            id,
            text,
            year,
            institution: None,
            source: Source::Journal,
            journal: Some(journal.to_string()),
        });
    }
}

pub fn school_name(i: usize) -> String {
    format!("U{:03}", i + 1)
}

/// School `i`: tier `i / 4`, public when `i` is even, land-grant for two of
/// every four public schools, census divisions in rotation.
pub fn school_record(i: usize) -> InstitutionRecord {
    let tier = i / TIER_SIZE;
    InstitutionRecord {
        name: school_name(i),
        region: DIVISIONS[i % DIVISIONS.len()].to_string(),
        public: i.is_multiple_of(2),
        private: i % 2 == 1,
        land_grant: i.is_multiple_of(2) && i % 8 < 4,
        ranking: (tier * 10 + (i % TIER_SIZE) * 2 + 1) as u32,
        size: 0,
    }
}

pub fn make_fixture(params: &FixtureParams) -> Fixture {
    assert!(params.schools >= 2, "a fixture needs at least two schools");
    assert!(params.year_start <= params.year_boundary && params.year_boundary < params.year_end);
    let mut words = Words {
        rng: ChaCha8Rng::seed_from_u64(params.seed ^ 0x005e_ed0f_70c5),
        seen: BTreeSet::new(),
        normalizer: Normalizer::default(),
    };
    let background = words.many(BACKGROUND_VOCAB);
    let mut b = Builder {
        params,
        rng: ChaCha8Rng::seed_from_u64(params.seed),
        background,
        docs: Vec::new(),
    };

    let institutions: Vec<InstitutionRecord> = (0..params.schools).map(school_record).collect();
    let names: Vec<String> = institutions.iter().map(|r| r.name.clone()).collect();
    let tiers: BTreeMap<String, usize> = names.iter().enumerate().map(|(i, n)| (n.clone(), i / TIER_SIZE)).collect();
    let n_tiers = params.schools.div_ceil(TIER_SIZE);

    for school in &names {
        for _ in 0..params.docs_per_school {
            let period = if b.rng.random_bool(0.5) { 1 } else { 2 };
            let year = if b.rng.random_bool(0.01) { params.year_end + 1 } else { b.year(period) };
            b.dissertation(school, year, &[]);
        }
    }

    let mut vogue = Vec::new();
    for j in 0..params.vogue_pairs {
        let (x, y) = (words.fresh(), words.fresh());
        let (producer, adopters): (String, Vec<String>) = match params.regime {
            Regime::Hierarchical => {
                let elites = TIER_SIZE.min(params.schools);
                let p = names[j % elites].clone();
                (p.clone(), names.iter().filter(|n| **n != p).cloned().collect())
            }
            Regime::Niche => {
                let tier = j % n_tiers;
                let members: Vec<&String> = names.iter().filter(|n| tiers[*n] == tier).collect();
                let p = members[(j / n_tiers) % members.len()].clone();
                let others: Vec<String> = members.iter().filter(|n| ***n != p).map(|n| (*n).clone()).collect();
                // a lone school in a tier keeps its own trend
                let adopters = if others.is_empty() { vec![p.clone()] } else { others };
                (p, adopters)
            }
        };
        for _ in 0..VOGUE_T1_COUSE {
            let year = b.year(1);
            b.dissertation(&producer, year, &[&x, &y]);
        }
        for term in [&x, &y] {
            for _ in 0..VOGUE_T1_SOLO {
                let school = names.choose(&mut b.rng).unwrap().clone();
                let year = b.year(1);
                b.dissertation(&school, year, &[term]);
            }
        }
        let n_t2 = b.rng.random_range(VOGUE_T2_COUSE);
        for k in 0..n_t2 {
            let school = adopters[k % adopters.len()].clone();
            let year = b.year(2);
            b.dissertation(&school, year, &[&x, &y]);
        }
        let (a, bb) = if x < y { (x, y) } else { (y, x) };
        vogue.push(PlantedPair {
            a,
            b: bb,
            producers: BTreeSet::from([producer]),
            adopters: adopters.into_iter().collect(),
        });
    }

    let mut foundation = Vec::new();
    for _ in 0..params.foundation_pairs {
        let (x, y) = (words.fresh(), words.fresh());
        for period in [1, 2] {
            for _ in 0..FOUNDATION_COUSE {
                let school = names.choose(&mut b.rng).unwrap().clone();
                let year = b.year(period);
                b.dissertation(&school, year, &[&x, &y]);
            }
        }
        foundation.push(if x < y { (x, y) } else { (y, x) });
    }

    let mut journal_meta = Vec::new();
    let mut vogue_journal = None;
    let mut disjoint_journal = None;
    let own_vocab = words.many(200);
    for j in 0..params.journals {
        let name = format!("Journal {}", (b'A' + (j % 26) as u8) as char);
        for _ in 0..params.docs_per_journal {
            match j {
                0 if !vogue.is_empty() && b.rng.random_bool(0.7) => {
                    let p = vogue.choose(&mut b.rng).unwrap();
                    let (x, y) = (p.a.clone(), p.b.clone());
                    b.article(&name, &[&x, &y], None);
                }
                1 => b.article(&name, &[], Some(&own_vocab)),
                _ if !foundation.is_empty() && b.rng.random_bool(0.3) => {
                    let (x, y) = foundation.choose(&mut b.rng).unwrap().clone();
                    b.article(&name, &[&x, &y], None);
                }
                _ => b.article(&name, &[], None),
            }
        }
        match j {
            0 => vogue_journal = Some(name.clone()),
            1 => disjoint_journal = Some(name.clone()),
            _ => {}
        }
        let reputation = (j % 3 != 2).then(|| (j + 1) as f64);
        let impact = (j != 1).then(|| ((30 - j as i32) as f64) / 10.0);
        journal_meta.push((name, reputation, impact));
    }

    let mut flows: BTreeMap<String, BTreeMap<String, u32>> = BTreeMap::new();
    let mut cross_tier_flows = 0;
    for p in &vogue {
        for src in &p.producers {
            for dst in p.adopters.iter().filter(|d| *d != src) {
                *flows.entry(src.clone()).or_default().entry(dst.clone()).or_default() += 1;
                if tiers[src] != tiers[dst] {
                    cross_tier_flows += 1;
                }
            }
        }
    }

    Fixture {
        documents: b.docs,
        institutions,
        journal_meta,
        truth: GroundTruth {
            params: params.clone(),
            vogue,
            foundation,
            flows,
            cross_tier_flows,
            tiers,
            vogue_journal,
            disjoint_journal,
        },
    }
}

impl Fixture {
    pub fn write_corpus<W: Write>(&self, mut w: W) -> io::Result<()> {
        for d in &self.documents {
            serde_json::to_writer(&mut w, d)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn write_institutions<W: Write>(&self, w: W) -> csv::Result<()> {
        let flag = |b: bool| if b { "1" } else { "0" };
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["name", "region", "public", "private", "land_grant", "ranking"])?;
        for r in &self.institutions {
            w.write_record([
                r.name.as_str(),
                &r.region,
                flag(r.public),
                flag(r.private),
                flag(r.land_grant),
                &r.ranking.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_journal_meta<W: Write>(&self, w: W) -> csv::Result<()> {
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_else(|| "Unavailable".into());
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["journal", "reputation", "impact_factor"])?;
        for (name, rep, imp) in &self.journal_meta {
            w.write_record([name.clone(), cell(*rep), cell(*imp)])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `corpus.jsonl`, `institutions.csv`, `journals.csv`,
    /// `ground_truth.json` and a ready-to-run `vogue.conf` into `dir`.
    pub fn write_to(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        self.write_corpus(io::BufWriter::new(fs::File::create(dir.join("corpus.jsonl"))?))?;
        self.write_institutions(fs::File::create(dir.join("institutions.csv"))?)?;
        self.write_journal_meta(fs::File::create(dir.join("journals.csv"))?)?;
        let truth = serde_json::to_string_pretty(&self.truth)?;
        fs::write(dir.join("ground_truth.json"), truth + "\n")?;
        let p = &self.truth.params;
        let conf = format!(
            "# synthetic fixture, seed {seed}, regime {regime}\n\
             corpus = corpus.jsonl\n\
             institutions = institutions.csv\n\
             journals = journals.csv\n\
             out = out\n\
             year_start = {ys}\n\
             year_boundary = {yb}\n\
             year_end = {ye}\n",
            seed = p.seed,
            regime = p.regime,
            ys = p.year_start,
            yb = p.year_boundary,
            ye = p.year_end,
        );
        fs::write(dir.join("vogue.conf"), conf)
    }
}
