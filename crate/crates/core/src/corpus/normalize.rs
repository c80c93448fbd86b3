//! Text cleaning: HTML stripping, case folding, stopword removal and a
//! dictionary-backed lemmatizer.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::Path;

use super::CorpusError;

const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");
const DEFAULT_LEMMAS: &str = include_str!("../../data/lemmas_en.txt");
const DEFAULT_LEXICON: &str = include_str!("../../data/lexicon_en.txt");

/// Words that show up in nearly every abstract and carry no topic.
pub const CORPUS_STOPWORDS: [&str; 2] = ["chapter", "dissertation"];

pub const MIN_TOKEN_LEN: usize = 3;

/// Suffix rewrites tried in order: (suffix, replacement).
const SUFFIX_RULES: [(&str, &str); 5] = [("ies", "y"), ("es", ""), ("s", ""), ("ing", ""), ("ed", "")];
const MIN_STEM_LEN: usize = 4;

fn entries(text: &str) -> impl Iterator<Item = &str> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'))
}

fn read_text(path: &Path) -> Result<String, CorpusError> {
    std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Stopword set. Always contains [`CORPUS_STOPWORDS`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set: HashSet<String> = words.into_iter().map(|w| w.as_ref().to_lowercase()).collect();
        set.extend(CORPUS_STOPWORDS.iter().map(|w| w.to_string()));
        Self(set)
    }

    pub fn english() -> Self {
        Self::new(entries(DEFAULT_STOPWORDS))
    }

    /// Replaces the base list with the words in `path` (one per line).
    pub fn from_file(path: &Path) -> Result<Self, CorpusError> {
        Ok(Self::new(entries(&read_text(path)?)))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for Stopwords {
    fn default() -> Self {
        Self::english()
    }
}

/// Maps inflected forms to base forms.
///
/// Lookup order: explicit lemma map, known base form, then suffix rules. A
/// suffix rule only fires when the stripped candidate is a known base form
/// (lexicon entry or lemma-map value), so verbs and unknown words pass
/// through untouched.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lemmatizer {
    map: HashMap<String, String>,
    bases: HashSet<String>,
}

impl Lemmatizer {
    pub fn new(map: impl IntoIterator<Item = (String, String)>, lexicon: impl IntoIterator<Item = String>) -> Self {
        let raw: BTreeMap<String, String> = map.into_iter().collect();
        // resolve chains so every value is a fixed point
        let mut map = HashMap::with_capacity(raw.len());
        for key in raw.keys() {
            let mut cur = key;
            let mut steps = 0;
            while let Some(next) = raw.get(cur) {
                if next == cur || steps > raw.len() {
                    break;
                }
                cur = next;
                steps += 1;
            }
            if cur != key {
                map.insert(key.clone(), cur.clone());
            }
        }
        let mut bases: HashSet<String> = lexicon.into_iter().collect();
        bases.extend(map.values().cloned());
        Self { map, bases }
    }

    /// Lemma map only, no lexicon.
    pub fn from_map<I, K, V>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        Self::new(pairs.into_iter().map(|(k, v)| (k.into(), v.into())), std::iter::empty())
    }

    pub fn english() -> Self {
        Self::new(parse_lemma_lines(DEFAULT_LEMMAS), entries(DEFAULT_LEXICON).map(String::from))
    }

    /// The shipped tables with additional `form base` lines from `path` layered on top.
    pub fn english_with_overrides(path: &Path) -> Result<Self, CorpusError> {
        let mut map: BTreeMap<String, String> = parse_lemma_lines(DEFAULT_LEMMAS).collect();
        map.extend(parse_lemma_lines(&read_text(path)?));
        Ok(Self::new(map, entries(DEFAULT_LEXICON).map(String::from)))
    }

    pub fn lemma(&self, token: &str) -> String {
        if let Some(base) = self.map.get(token) {
            return base.clone();
        }
        if self.bases.contains(token) {
            return token.to_string();
        }
        for (suffix, replacement) in SUFFIX_RULES {
            let Some(stem) = token.strip_suffix(suffix) else { continue };
            if stem.chars().count() < MIN_STEM_LEN {
                continue;
            }
            let candidate = format!("{stem}{replacement}");
            if let Some(base) = self.map.get(&candidate) {
                return base.clone();
            }
            if self.bases.contains(&candidate) {
                return candidate;
            }
        }
        token.to_string()
    }
}

impl Default for Lemmatizer {
    fn default() -> Self {
        Self::english()
    }
}

fn parse_lemma_lines(text: &str) -> impl Iterator<Item = (String, String)> + '_ {
    entries(text).filter_map(|line| {
        let mut parts = line.split(|c: char| c.is_whitespace() || c == ',').filter(|p| !p.is_empty());
        let form = parts.next()?.to_lowercase();
        let base = parts.next()?.to_lowercase();
        Some((form, base))
    })
}

/// Replaces HTML tags and character entities with spaces.
fn strip_html(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut chars = raw.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '<' => {
                // only treat as a tag if it closes
                let rest: String = chars.clone().take_while(|&c| c != '<').collect();
                if let Some(end) = rest.find('>') {
                    for _ in 0..rest[..=end].chars().count() {
                        chars.next();
                    }
                    out.push(' ');
                } else {
                    out.push(c);
                }
            }
            '&' => {
                let rest: String = chars.clone().take(10).collect();
                let entity_len = rest.find(';').filter(|&end| {
                    end > 0
                        && rest[..end]
                            .trim_start_matches('#')
                            .chars()
                            .all(|c| c.is_ascii_alphanumeric())
                });
                match entity_len {
                    Some(end) => {
                        for _ in 0..=end {
                            chars.next();
                        }
                        out.push(' ');
                    }
                    None => out.push(c),
                }
            }
            _ => out.push(c),
        }
    }
    out
}

/// Runs the cleaning pipeline: strip HTML, lowercase, replace non-alphabetic
/// characters with spaces, split, drop stopwords, lemmatize, drop stopwords
/// and tokens shorter than [`MIN_TOKEN_LEN`].
pub fn normalize_text(raw: &str, stopwords: &Stopwords, lemmatizer: &Lemmatizer) -> Vec<String> {
    let cleaned: String = strip_html(raw)
        .to_lowercase()
        .chars()
        .map(|c| if c.is_alphabetic() { c } else { ' ' })
        .collect();
    cleaned
        .split_whitespace()
        .filter(|t| !stopwords.contains(t))
        .map(|t| lemmatizer.lemma(t))
        .filter(|t| t.chars().count() >= MIN_TOKEN_LEN && !stopwords.contains(t))
        .collect()
}

/// Stopwords plus lemmatizer, bundled for reuse across documents.
#[derive(Debug, Clone, Default)]
pub struct Normalizer {
    pub stopwords: Stopwords,
    pub lemmatizer: Lemmatizer,
}

impl Normalizer {
    pub fn new(stopwords: Stopwords, lemmatizer: Lemmatizer) -> Self {
        Self { stopwords, lemmatizer }
    }

    pub fn normalize(&self, raw: &str) -> Vec<String> {
        normalize_text(raw, &self.stopwords, &self.lemmatizer)
    }

    pub fn vocabulary<'a>(&self, texts: impl IntoIterator<Item = &'a str>) -> BTreeSet<String> {
        texts.into_iter().flat_map(|t| self.normalize(t)).collect()
    }
}
