use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::PipelineError;
use crate::diffusion::{CoreRule, ProducerRule};
use crate::stats::FixedEffects;

/// Every configuration key with its default and meaning. Keys without a
/// default are required. This table is the only place defaults live; the
/// parser starts from it.
pub const DEFAULTS: &[(&str, Option<&str>, &str)] = &[
    ("corpus", None, "JSONL corpus path"),
    ("institutions", None, "institution metadata CSV path"),
    ("journals", Some(""), "journal metadata CSV (journal,reputation,impact_factor); empty for none"),
    ("stopwords", Some(""), "stopword list replacing the English default; empty for the default"),
    ("lemmas", Some(""), "extra `form base` lemma pairs; empty for none"),
    ("out", Some("out"), "artifact directory"),
    ("year_start", Some("2011"), "first year of the first period (calendar year)"),
    ("year_boundary", Some("2015"), "last year of the first period (calendar year)"),
    ("year_end", Some("2020"), "last year of the second period (calendar year)"),
    ("terms_per_doc", Some("20"), "top TF-IDF terms kept per abstract (count)"),
    ("min_weight", Some("1"), "minimum co-occurrence count for an edge (documents)"),
    ("alpha", Some("0.05"), "disparity-filter significance level (probability)"),
    ("emergent_as_vogue", Some("false"), "count pairs absent from T1 that enter the T2 backbone as vogue"),
    ("allow_self_flows", Some("false"), "keep producer == adopter flows"),
    ("fractional_flows", Some("false"), "divide each pair's flows by |producers|*|adopters|"),
    ("producers", Some("all"), "producer rule: all | earliest_year"),
    ("core_rule", Some("largest_scc"), "core rule: largest_scc | nontrivial_sccs"),
    ("fixed_effects", Some("adopter"), "dyad model fixed effects: none | adopter | producer | both"),
    ("directed_dyads", Some("true"), "one dyad per ordered pair of schools"),
    ("seed", Some("0"), "random seed (only used by Monte-Carlo checks)"),
    ("topics", Some(""), "comma-separated terms for neighbour reports; empty for the top vogue terms"),
    ("threads", Some("0"), "worker threads (0 = all cores)"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub corpus: PathBuf,
    pub institutions: PathBuf,
    pub journals: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub lemmas: Option<PathBuf>,
    pub out: PathBuf,
    pub year_start: i32,
    pub year_boundary: i32,
    pub year_end: i32,
    pub terms_per_doc: usize,
    pub min_weight: u32,
    pub alpha: f64,
    pub emergent_as_vogue: bool,
    pub allow_self_flows: bool,
    pub fractional_flows: bool,
    pub producers: ProducerRule,
    pub core_rule: CoreRule,
    pub fixed_effects: FixedEffects,
    pub directed_dyads: bool,
    pub seed: u64,
    pub topics: Vec<String>,
    pub threads: usize,
}

fn parse_bool(key: &str, v: &str) -> Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("{key}: expected true or false, got {v:?}")),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("{key}: not a valid number: {v:?}"))
}

/// Splits `key = value` lines. `#` starts a comment at the beginning of a
/// line or after whitespace.
fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = match raw.find(" #").or_else(|| raw.find("\t#")) {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `key = value`", i + 1))?;
        let (k, v) = (k.trim(), v.trim());
        if !DEFAULTS.iter().any(|(name, _, _)| *name == k) {
            return Err(format!("line {}: unknown key {k:?}", i + 1));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(format!("line {}: {k} given twice", i + 1));
        }
    }
    Ok(out)
}

impl PipelineConfig {
    /// Parses config text. Relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, PipelineError> {
        Self::from_pairs(parse_pairs(text).map_err(PipelineError::Config)?, base)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    fn from_pairs(given: BTreeMap<String, String>, base: &Path) -> Result<Self, PipelineError> {
        let mut values = BTreeMap::new();
        for (key, default, _) in DEFAULTS {
            match (given.get(*key), default) {
                (Some(v), _) => values.insert(*key, v.as_str()),
                (None, Some(d)) => values.insert(*key, *d),
                (None, None) => return Err(PipelineError::Config(format!("missing required key {key:?}"))),
            };
        }
        let get = |k: &str| values[k];
        let path = |k: &str| -> Option<PathBuf> {
            let v = get(k);
            (!v.is_empty()).then(|| base.join(v))
        };
        let build = || -> Result<Self, String> {
            Ok(Self {
                corpus: path("corpus").ok_or("corpus must not be empty")?,
                institutions: path("institutions").ok_or("institutions must not be empty")?,
                journals: path("journals"),
                stopwords: path("stopwords"),
                lemmas: path("lemmas"),
                out: path("out").ok_or("out must not be empty")?,
                year_start: parse_num("year_start", get("year_start"))?,
                year_boundary: parse_num("year_boundary", get("year_boundary"))?,
                year_end: parse_num("year_end", get("year_end"))?,
                terms_per_doc: parse_num("terms_per_doc", get("terms_per_doc"))?,
                min_weight: parse_num("min_weight", get("min_weight"))?,
                alpha: parse_num("alpha", get("alpha"))?,
                emergent_as_vogue: parse_bool("emergent_as_vogue", get("emergent_as_vogue"))?,
                allow_self_flows: parse_bool("allow_self_flows", get("allow_self_flows"))?,
                fractional_flows: parse_bool("fractional_flows", get("fractional_flows"))?,
                producers: match get("producers") {
                    "all" => ProducerRule::All,
                    "earliest_year" => ProducerRule::EarliestYear,
                    v => return Err(format!("producers: expected all or earliest_year, got {v:?}")),
                },
                core_rule: match get("core_rule") {
                    "largest_scc" => CoreRule::LargestScc,
                    "nontrivial_sccs" => CoreRule::NontrivialSccs,
                    v => return Err(format!("core_rule: expected largest_scc or nontrivial_sccs, got {v:?}")),
                },
                fixed_effects: get("fixed_effects").parse()?,
                directed_dyads: parse_bool("directed_dyads", get("directed_dyads"))?,
                seed: parse_num("seed", get("seed"))?,
                topics: get("topics")
                    .split(',')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .map(String::from)
                    .collect(),
                threads: parse_num("threads", get("threads"))?,
            })
        };
        let cfg = build().map_err(PipelineError::Config)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let fail = |m: String| Err(PipelineError::Config(m));
        if !(self.year_start <= self.year_boundary && self.year_boundary < self.year_end) {
            return fail(format!(
                "years must satisfy year_start <= year_boundary < year_end, got {} / {} / {}",
                self.year_start, self.year_boundary, self.year_end
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return fail(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.terms_per_doc == 0 {
            return fail("terms_per_doc must be at least 1".into());
        }
        if self.min_weight == 0 {
            return fail("min_weight must be at least 1".into());
        }
        Ok(())
    }

    /// Analysis parameters in canonical `key=value` form. Paths, the output
    /// directory and the thread count are left out: inputs are identified by
    /// content hash and threads never change results.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            s.push_str(k);
            s.push('=');
            s.push_str(&v);
            s.push('\n');
        };
        put("year_start", self.year_start.to_string());
        put("year_boundary", self.year_boundary.to_string());
        put("year_end", self.year_end.to_string());
        put("terms_per_doc", self.terms_per_doc.to_string());
        put("min_weight", self.min_weight.to_string());
        put("alpha", self.alpha.to_string());
        put("emergent_as_vogue", self.emergent_as_vogue.to_string());
        put("allow_self_flows", self.allow_self_flows.to_string());
        put("fractional_flows", self.fractional_flows.to_string());
        put("producers", format!("{:?}", self.producers));
        put("core_rule", format!("{:?}", self.core_rule));
        put("fixed_effects", self.fixed_effects.to_string());
        put("directed_dyads", self.directed_dyads.to_string());
        put("seed", self.seed.to_string());
        put("topics", self.topics.join(","));
        s
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "corpus = c.jsonl\ninstitutions = i.csv\n";

    #[test]
    fn defaults_fill_in() {
        let cfg = PipelineConfig::parse(MINIMAL, Path::new("/data")).unwrap();
        assert_eq!(cfg.corpus, Path::new("/data/c.jsonl"));
        assert_eq!(cfg.out, Path::new("/data/out"));
        assert_eq!((cfg.year_start, cfg.year_boundary, cfg.year_end), (2011, 2015, 2020));
        assert_eq!((cfg.terms_per_doc, cfg.min_weight, cfg.alpha), (20, 1, 0.05));
        assert_eq!(cfg.fixed_effects, FixedEffects::Adopter);
        assert_eq!(cfg.producers, ProducerRule::All);
        assert_eq!(cfg.core_rule, CoreRule::LargestScc);
        assert!(cfg.directed_dyads && !cfg.allow_self_flows && !cfg.fractional_flows && !cfg.emergent_as_vogue);
        assert!(cfg.journals.is_none() && cfg.topics.is_empty());
    }

    #[test]
    fn comments_and_overrides() {
        let text = "# analysis\ncorpus = c.jsonl  # the corpus\ninstitutions=i.csv\nalpha = 0.01\ntopics = gender, health\nproducers = earliest_year\n";
        let cfg = PipelineConfig::parse(text, Path::new("/x")).unwrap();
        assert_eq!(cfg.alpha, 0.01);
        assert_eq!(cfg.topics, ["gender", "health"]);
        assert_eq!(cfg.producers, ProducerRule::EarliestYear);
    }

    #[test]
    fn rejects_bad_input() {
        for bad in [
            "institutions = i.csv\n",
            "corpus = c\ninstitutions = i\nalpha = 1.5\n",
            "corpus = c\ninstitutions = i\nyear_boundary = 2020\n",
            "corpus = c\ninstitutions = i\ncolour = blue\n",
            "corpus = c\ninstitutions = i\ncorpus = d\n",
            "corpus = c\ninstitutions = i\nfixed_effects = school\n",
            "corpus = c\ninstitutions = i\nsomething\n",
        ] {
            let err = PipelineConfig::parse(bad, Path::new(".")).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{bad:?}");
        }
    }

    #[test]
    fn hash_ignores_paths_and_threads() {
        let a = PipelineConfig::parse(MINIMAL, Path::new("/a")).unwrap();
        let b = PipelineConfig::parse("corpus = x\ninstitutions = y\nthreads = 8\nout = elsewhere\n", Path::new("/b")).unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = PipelineConfig::parse("corpus = x\ninstitutions = y\nalpha = 0.1\n", Path::new("/b")).unwrap();
        assert_ne!(a.hash(), c.hash());
    }
}
