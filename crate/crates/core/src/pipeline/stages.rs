use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;

use serde::{Deserialize, Serialize};

use super::{PipelineConfig, PipelineError, Stage};
use crate::backbone::{extract_backbone, Backbone};
use crate::corpus::{
    read_corpus, split_periods, Corpus, CorpusError, CorpusSchema, Extractor, Institutions, Lemmatizer, Normalizer,
    Period, Source, Stopwords,
};
use crate::diffusion::{
    attribute_pairs, build_flow, core_periphery, flow_shares, journal_overlap, read_journal_meta, write_journal_csv,
    AttributedDoc, CoreLabel, FlowNetwork, FlowOptions, FlowShares,
};
use crate::semnet::{build_network, EdgeKey, TermNetwork};
use crate::stats::{
    build_dyads, fit_dyad_model, fit_similarity, school_level_regression, table_models, write_models_csv, FitResult,
    SchoolRow, SchoolTarget,
};
use crate::vogue::{
    classify_edges, edges_in, read_categories_csv, top_vogue_terms, topic_neighbors, write_categories_csv, EdgeCategory,
    EdgeClass, TopicNeighbors, VogueReport,
};

type Inputs = BTreeMap<&'static str, Vec<u8>>;
type Outputs = Vec<(&'static str, Vec<u8>)>;

/// One line of `terms.jsonl`: a dissertation's extracted terms and its full
/// TF-IDF vector within its period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub id: String,
    pub institution: Option<String>,
    pub year: i32,
    pub period: Period,
    pub terms: Vec<String>,
    pub tfidf: BTreeMap<String, f64>,
}

/// One line of `labels.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelRow {
    pub institution: String,
    pub label: CoreLabel,
    pub region: String,
    pub produced: u32,
    pub adopted: u32,
}

/// Contents of `vogue_report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VogueSummary {
    pub counts: BTreeMap<EdgeCategory, usize>,
    pub declined: usize,
    pub weak_tie_share: f64,
    pub bridging_share: f64,
    pub vogue: Vec<EdgeKey>,
    pub foundation: Vec<EdgeKey>,
    pub top_vogue_terms: Vec<String>,
    pub topics: Vec<TopicNeighbors>,
}

#[derive(Serialize)]
struct SharesFile {
    #[serde(flatten)]
    shares: FlowShares,
    core: Vec<String>,
    periphery: Vec<String>,
    vogue_pairs: usize,
    attributed_pairs: usize,
}

#[derive(Serialize)]
#[serde(untagged)]
enum ModelOutcome {
    Fit(Box<FitResult>),
    Failed { model: String, error: String },
}

#[derive(Serialize)]
struct ModelsFile {
    dyads: usize,
    directed: bool,
    models: Vec<ModelOutcome>,
    school_models: Vec<ModelOutcome>,
}

const TOPIC_FALLBACK: usize = 5;

fn invalid<E: Display>(what: &str) -> impl Fn(E) -> PipelineError + '_ {
    move |e| PipelineError::Validation(format!("{what}: {e}"))
}

fn corpus_err(e: CorpusError) -> PipelineError {
    match e {
        CorpusError::Io { path, source } => PipelineError::io(path.as_ref(), source),
        CorpusError::Config(m) => PipelineError::Config(m),
        other => PipelineError::Validation(other.to_string()),
    }
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>) -> Result<Vec<u8>, PipelineError> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| PipelineError::Internal(e.to_string()))?;
    Ok(buf)
}

fn json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>, PipelineError> {
    let mut buf = serde_json::to_vec_pretty(v).map_err(|e| PipelineError::Internal(e.to_string()))?;
    buf.push(b'\n');
    Ok(buf)
}

fn extractor(cfg: &PipelineConfig) -> Result<Extractor, PipelineError> {
    let stopwords = match &cfg.stopwords {
        Some(p) => Stopwords::from_file(p).map_err(corpus_err)?,
        None => Stopwords::english(),
    };
    let lemmatizer = match &cfg.lemmas {
        Some(p) => Lemmatizer::english_with_overrides(p).map_err(corpus_err)?,
        None => Lemmatizer::english(),
    };
    Ok(Extractor::new(Normalizer::new(stopwords, lemmatizer), cfg.terms_per_doc))
}

fn corpus(inputs: &Inputs) -> Result<Corpus, PipelineError> {
    read_corpus(&inputs["corpus"][..], &CorpusSchema::default()).map_err(corpus_err)
}

fn institutions(inputs: &Inputs) -> Result<Institutions, PipelineError> {
    Institutions::read(&inputs["institutions"][..]).map_err(corpus_err)
}

fn term_records(inputs: &Inputs) -> Result<Vec<TermRecord>, PipelineError> {
    let text = std::str::from_utf8(&inputs["terms.jsonl"]).map_err(invalid("terms.jsonl"))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(invalid("terms.jsonl")))
        .collect()
}

fn categories(inputs: &Inputs) -> Result<BTreeMap<EdgeKey, EdgeClass>, PipelineError> {
    read_categories_csv(&inputs["categories.csv"][..]).map_err(invalid("categories.csv"))
}

pub(super) fn execute(stage: Stage, cfg: &PipelineConfig, inputs: &Inputs) -> Result<Outputs, PipelineError> {
    match stage {
        Stage::All => Ok(Vec::new()),
        Stage::Network => network(cfg, inputs),
        Stage::Backbone => backbone(cfg, inputs),
        Stage::Vogue => vogue(cfg, inputs),
        Stage::Diffusion => diffusion(cfg, inputs),
        Stage::Journals => journals(cfg, inputs),
        Stage::Regress => regress(cfg, inputs),
    }
}

fn network(cfg: &PipelineConfig, inputs: &Inputs) -> Result<Outputs, PipelineError> {
    let corpus = corpus(inputs)?;
    let split = split_periods(&corpus, cfg.year_start, cfg.year_boundary, cfg.year_end).map_err(corpus_err)?;
    let ex = extractor(cfg)?;
    let mut lines = Vec::new();
    let mut nets = Vec::new();
    for (period, ids, label) in [(Period::T1, &split.t1, "T1"), (Period::T2, &split.t2, "T2")] {
        let docs: Vec<_> = corpus
            .iter()
            .filter(|d| d.source == Source::Dissertation && ids.contains(&d.id))
            .collect();
        if docs.is_empty() {
            return Err(PipelineError::Validation(format!("no dissertations in period {label}")));
        }
        let extracted = ex.extract(docs.iter().copied()).map_err(corpus_err)?;
        for (doc, e) in docs.iter().zip(&extracted) {
            let rec = TermRecord {
                id: doc.id.clone(),
                institution: doc.institution.clone(),
                year: doc.year,
                period,
                terms: e.terms.iter().cloned().collect(),
                tfidf: e.vector.scores.clone(),
            };
            let mut line = serde_json::to_vec(&rec).map_err(|e| PipelineError::Internal(e.to_string()))?;
            line.push(b'\n');
            lines.extend(line);
        }
        let sets: Vec<BTreeSet<String>> = extracted.into_iter().map(|e| e.terms).collect();
        let net = build_network(&sets, label, cfg.min_weight);
        log::info!("{label}: {} documents, {} nodes, {} edges", sets.len(), net.node_count(), net.edge_count());
        nets.push(csv_bytes(|b| net.write_edge_csv(b))?);
    }
    let t2 = nets.pop().unwrap_or_default();
    let t1 = nets.pop().unwrap_or_default();
    Ok(vec![("terms.jsonl", lines), ("network_t1.csv", t1), ("network_t2.csv", t2)])
}

fn backbone(cfg: &PipelineConfig, inputs: &Inputs) -> Result<Outputs, PipelineError> {
    let mut out = Vec::new();
    for (src, dst, label) in [
        ("network_t1.csv", "backbone_t1.csv", "T1"),
        ("network_t2.csv", "backbone_t2.csv", "T2"),
    ] {
        let net = TermNetwork::read_edge_csv(label, &inputs[src][..]).map_err(invalid(src))?;
        let bb = extract_backbone(&net, cfg.alpha).map_err(invalid(src))?;
        log::info!("{label}: backbone keeps {} of {} edges", bb.len(), net.edge_count());
        out.push((dst, csv_bytes(|b| bb.write_csv(&net, b))?));
    }
    Ok(out)
}

fn vogue(cfg: &PipelineConfig, inputs: &Inputs) -> Result<Outputs, PipelineError> {
    let (n1, b1) = Backbone::read_csv("T1", cfg.alpha, &inputs["backbone_t1.csv"][..]).map_err(invalid("backbone_t1.csv"))?;
    let (n2, b2) = Backbone::read_csv("T2", cfg.alpha, &inputs["backbone_t2.csv"][..]).map_err(invalid("backbone_t2.csv"))?;
    let cats = classify_edges(&n1, &b1, &n2, &b2, cfg.emergent_as_vogue).map_err(invalid("backbones"))?;
    let report = VogueReport::new(&cats, &n1, &b1);
    let top = top_vogue_terms(&cats, TOPIC_FALLBACK);
    let topics = if cfg.topics.is_empty() { top.clone() } else { cfg.topics.clone() };
    let summary = VogueSummary {
        counts: report.counts.clone(),
        declined: report.declined,
        weak_tie_share: report.weak_tie_share,
        bridging_share: report.bridging_share,
        vogue: report.edges[&EdgeCategory::Vogue].clone(),
        foundation: report.edges[&EdgeCategory::Foundation].clone(),
        top_vogue_terms: top,
        topics: topics.iter().map(|t| topic_neighbors(t, &cats, &n2)).collect(),
    };
    log::info!(
        "{} vogue and {} foundation pairs among {} edges",
        summary.vogue.len(),
        summary.foundation.len(),
        report.total()
    );
    Ok(vec![
        ("categories.csv", csv_bytes(|b| write_categories_csv(&cats, &n1, &b1, &n2, &b2, b))?),
        ("vogue_report.json", json_bytes(&summary)?),
    ])
}

fn diffusion(cfg: &PipelineConfig, inputs: &Inputs) -> Result<Outputs, PipelineError> {
    let inst = institutions(inputs)?;
    let cats = categories(inputs)?;
    let vogue = edges_in(&cats, EdgeCategory::Vogue);
    let (mut t1, mut t2) = (Vec::new(), Vec::new());
    for r in term_records(inputs)? {
        let doc = AttributedDoc {
            id: r.id,
            institution: r.institution,
            source: Source::Dissertation,
            year: r.year,
            terms: r.terms.into_iter().collect(),
        };
        match r.period {
            Period::T1 => t1.push(doc),
            Period::T2 => t2.push(doc),
        }
    }
    let attrs = attribute_pairs(&t1, &t2, &vogue, &inst, cfg.producers).map_err(invalid("attribution"))?;
    let options = FlowOptions {
        allow_self: cfg.allow_self_flows,
        fractional: cfg.fractional_flows,
    };
    let flow = build_flow(&attrs, inst.names(), options);
    let labels = core_periphery(&flow, cfg.core_rule);
    let shares = flow_shares(&flow, &labels).map_err(|e| PipelineError::Internal(e.to_string()))?;

    let mut produced: BTreeMap<&str, u32> = BTreeMap::new();
    let mut adopted: BTreeMap<&str, u32> = BTreeMap::new();
    for a in &attrs {
        a.producers.iter().for_each(|p| *produced.entry(p).or_default() += 1);
        a.adopters.iter().for_each(|p| *adopted.entry(p).or_default() += 1);
    }
    let rows: Vec<LabelRow> = inst
        .iter()
        .map(|r| LabelRow {
            institution: r.name.clone(),
            label: labels.get(&r.name).copied().unwrap_or(CoreLabel::Periphery),
            region: r.region.clone(),
            produced: produced.get(r.name.as_str()).copied().unwrap_or(0),
            adopted: adopted.get(r.name.as_str()).copied().unwrap_or(0),
        })
        .collect();
    let regions: BTreeMap<String, String> = inst.iter().map(|r| (r.name.clone(), r.region.clone())).collect();
    let group = |want: CoreLabel| -> Vec<String> {
        labels.iter().filter(|(_, &l)| l == want).map(|(n, _)| n.clone()).collect()
    };
    let file = SharesFile {
        shares,
        core: group(CoreLabel::Core),
        periphery: group(CoreLabel::Periphery),
        vogue_pairs: vogue.len(),
        attributed_pairs: attrs.iter().filter(|a| !a.producers.is_empty() && !a.adopters.is_empty()).count(),
    };
    log::info!(
        "flows: total {:.3}, core->periphery share {:.3}, {} core institutions",
        shares.total,
        shares.core_periphery,
        file.core.len()
    );

    let mut dot = Vec::new();
    flow.write_dot(&labels, &regions, &mut dot)
        .map_err(|e| PipelineError::Internal(e.to_string()))?;
    Ok(vec![
        ("flow.csv", csv_bytes(|b| flow.write_csv(b))?),
        (
            "labels.csv",
            csv_bytes(|b| {
                let mut w = csv::Writer::from_writer(b);
                rows.iter().try_for_each(|r| w.serialize(r))?;
                w.flush()?;
                Ok(())
            })?,
        ),
        ("shares.json", json_bytes(&file)?),
        ("flow.dot", dot),
    ])
}

fn journals(cfg: &PipelineConfig, inputs: &Inputs) -> Result<Outputs, PipelineError> {
    let corpus = corpus(inputs)?;
    let vogue = edges_in(&categories(inputs)?, EdgeCategory::Vogue);
    let meta = match inputs.get("journals") {
        Some(b) => read_journal_meta(&b[..]).map_err(invalid("journal metadata"))?,
        None => BTreeMap::new(),
    };
    let mut groups: BTreeMap<String, Vec<_>> = meta.keys().map(|k| (k.clone(), Vec::new())).collect();
    for doc in corpus.iter() {
        if doc.source != Source::Journal || doc.year < cfg.year_start || doc.year > cfg.year_boundary {
            continue;
        }
        if let Some(j) = &doc.journal {
            groups.entry(j.clone()).or_default().push(doc);
        }
    }
    if groups.is_empty() {
        log::warn!("no journal articles in the first period");
    }
    let rows = journal_overlap(&groups, &vogue, &extractor(cfg)?, cfg.min_weight, &meta).map_err(invalid("journals"))?;
    Ok(vec![("journals.csv", csv_bytes(|b| write_journal_csv(&rows, b))?)])
}

fn outcome(model: &str, r: Result<FitResult, crate::stats::StatsError>) -> ModelOutcome {
    match r {
        Ok(f) => ModelOutcome::Fit(Box::new(f)),
        Err(e) => {
            log::warn!("model {model} not estimated: {e}");
            ModelOutcome::Failed {
                model: model.to_string(),
                error: e.to_string(),
            }
        }
    }
}

fn regress(cfg: &PipelineConfig, inputs: &Inputs) -> Result<Outputs, PipelineError> {
    use rayon::prelude::*;

    let mut inst = institutions(inputs)?;
    let records = term_records(inputs)?;
    let mut sizes: BTreeMap<&str, u32> = BTreeMap::new();
    let mut vectors: BTreeMap<String, Vec<&BTreeMap<String, f64>>> = BTreeMap::new();
    for r in &records {
        let Some(name) = r.institution.as_deref() else { continue };
        *sizes.entry(name).or_default() += 1;
        if r.period == Period::T1 {
            vectors.entry(name.to_string()).or_default().push(&r.tfidf);
        }
    }
    let names: Vec<String> = inst.names().map(String::from).collect();
    for n in &names {
        inst.set_size(n, sizes.get(n.as_str()).copied().unwrap_or(0));
    }
    let flow = FlowNetwork::read_csv(&inputs["flow.csv"][..], names.iter().cloned()).map_err(invalid("flow.csv"))?;
    let fit = fit_similarity(&vectors);
    let table = build_dyads(&flow, &inst, &fit, cfg.directed_dyads).map_err(invalid("dyads"))?;

    let models: Vec<ModelOutcome> = table_models()
        .par_iter()
        .map(|s| outcome(&s.name, fit_dyad_model(&table, s, cfg.fixed_effects)))
        .collect();

    let mut counts: BTreeMap<String, (u32, u32)> = BTreeMap::new();
    for row in csv::Reader::from_reader(&inputs["labels.csv"][..]).deserialize::<LabelRow>() {
        let row = row.map_err(invalid("labels.csv"))?;
        counts.insert(row.institution, (row.produced, row.adopted));
    }
    let school_rows: Vec<SchoolRow> = inst
        .iter()
        .map(|r| SchoolRow {
            institution: r.name.clone(),
            produced: counts.get(&r.name).map_or(0, |c| c.0),
            adopted: counts.get(&r.name).map_or(0, |c| c.1),
            size: f64::from(r.size),
            private: u8::from(r.private),
            public: u8::from(r.public),
            land_grant: u8::from(r.land_grant),
            avg_ranking: f64::from(r.ranking),
        })
        .collect();
    let school_models = [(SchoolTarget::Produced, "production"), (SchoolTarget::Adopted, "adoption")]
        .into_iter()
        .map(|(t, label)| outcome(label, school_level_regression(&school_rows, t)))
        .collect();

    let file = ModelsFile {
        dyads: table.len(),
        directed: table.directed,
        models,
        school_models,
    };
    let fitted: Vec<FitResult> = file
        .models
        .iter()
        .chain(&file.school_models)
        .filter_map(|m| match m {
            ModelOutcome::Fit(f) => Some((**f).clone()),
            ModelOutcome::Failed { .. } => None,
        })
        .collect();
    Ok(vec![
        ("dyads.csv", csv_bytes(|b| table.write_csv(b))?),
        ("models.json", json_bytes(&file)?),
        ("models.csv", csv_bytes(|b| write_models_csv(&fitted, b))?),
    ])
}
