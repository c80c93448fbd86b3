//! Temporal careers of term pairs across two period networks.
//!
//! A pair present in the first network but outside its backbone that enters
//! the second backbone is *vogue*; a pair in both backbones is a
//! *foundation*.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backbone::Backbone;
use crate::semnet::{EdgeKey, TermNetwork};

#[derive(Debug, Error, PartialEq)]
pub enum VogueError {
    #[error("backbone edge {edge} is missing from network {network:?}")]
    Containment { edge: EdgeKey, network: String },
    #[error("categories table: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeCategory {
    /// Backbone in both periods.
    Foundation,
    /// Periphery in T1, backbone in T2.
    Vogue,
    /// Absent in T1, backbone in T2.
    Emergent,
    /// Absent in T1, periphery in T2.
    NewPeripheral,
    /// Present in both periods, periphery in T2.
    NonVogue,
    /// Present in T1, gone in T2.
    Unused,
}

impl EdgeCategory {
    pub const ALL: [EdgeCategory; 6] = [
        EdgeCategory::Foundation,
        EdgeCategory::Vogue,
        EdgeCategory::Emergent,
        EdgeCategory::NewPeripheral,
        EdgeCategory::NonVogue,
        EdgeCategory::Unused,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeCategory::Foundation => "foundation",
            EdgeCategory::Vogue => "vogue",
            EdgeCategory::Emergent => "emergent",
            EdgeCategory::NewPeripheral => "new_peripheral",
            EdgeCategory::NonVogue => "non_vogue",
            EdgeCategory::Unused => "unused",
        }
    }
}

impl fmt::Display for EdgeCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EdgeCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown category {s:?}"))
    }
}

/// Category plus the `declined` flag (T1 backbone, still present in T2 but
/// no longer in its backbone).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeClass {
    pub category: EdgeCategory,
    pub declined: bool,
}

fn check_containment(net: &TermNetwork, bb: &Backbone) -> Result<(), VogueError> {
    match bb.edges.iter().find(|e| !net.contains_edge(e)) {
        Some(edge) => Err(VogueError::Containment {
            edge: edge.clone(),
            network: net.label.clone(),
        }),
        None => Ok(()),
    }
}

/// Classifies every edge of `E(T1) ∪ E(T2)`. With `emergent_as_vogue`,
/// pairs absent from T1 that enter the T2 backbone are labelled vogue.
pub fn classify_edges(
    net_t1: &TermNetwork,
    bb_t1: &Backbone,
    net_t2: &TermNetwork,
    bb_t2: &Backbone,
    emergent_as_vogue: bool,
) -> Result<BTreeMap<EdgeKey, EdgeClass>, VogueError> {
    check_containment(net_t1, bb_t1)?;
    check_containment(net_t2, bb_t2)?;

    let all: BTreeSet<&EdgeKey> = net_t1.edges.keys().chain(net_t2.edges.keys()).collect();
    Ok(all
        .into_iter()
        .map(|e| {
            let (in1, in2) = (net_t1.contains_edge(e), net_t2.contains_edge(e));
            let (b1, b2) = (bb_t1.contains(e), bb_t2.contains(e));
            let category = match (in1, b1, in2, b2) {
                (true, true, true, true) => EdgeCategory::Foundation,
                (true, false, true, true) => EdgeCategory::Vogue,
                (false, _, true, true) if emergent_as_vogue => EdgeCategory::Vogue,
                (false, _, true, true) => EdgeCategory::Emergent,
                (true, _, false, _) => EdgeCategory::Unused,
                (false, _, true, false) => EdgeCategory::NewPeripheral,
                _ => EdgeCategory::NonVogue,
            };
            let class = EdgeClass {
                category,
                declined: b1 && in2 && !b2,
            };
            (e.clone(), class)
        })
        .collect())
}

/// Edges of one category, in key order.
pub fn edges_in(categories: &BTreeMap<EdgeKey, EdgeClass>, category: EdgeCategory) -> BTreeSet<EdgeKey> {
    categories
        .iter()
        .filter(|(_, c)| c.category == category)
        .map(|(k, _)| k.clone())
        .collect()
}

/// Share of vogue edges present in T1 whose endpoints each touch at least one
/// T1 backbone edge. 0 when no vogue edge is present in T1.
pub fn weak_tie_share(vogue: &BTreeSet<EdgeKey>, net_t1: &TermNetwork, bb_t1: &Backbone) -> f64 {
    let touched: BTreeSet<&str> = bb_t1.edges.iter().flat_map(|e| [e.a(), e.b()]).collect();
    let eligible: Vec<&EdgeKey> = vogue.iter().filter(|e| net_t1.contains_edge(e)).collect();
    if eligible.is_empty() {
        return 0.0;
    }
    let weak = eligible
        .iter()
        .filter(|e| touched.contains(e.a()) && touched.contains(e.b()))
        .count();
    weak as f64 / eligible.len() as f64
}

/// Share of T1-present vogue edges whose endpoints sit in two different
/// connected components of the T1 backbone. 0 when none is eligible.
pub fn bridging_share(vogue: &BTreeSet<EdgeKey>, net_t1: &TermNetwork, bb_t1: &Backbone) -> f64 {
    let comp = components(&bb_t1.edges);
    let eligible: Vec<&EdgeKey> = vogue.iter().filter(|e| net_t1.contains_edge(e)).collect();
    if eligible.is_empty() {
        return 0.0;
    }
    let bridging = eligible
        .iter()
        .filter(|e| matches!((comp.get(e.a()), comp.get(e.b())), (Some(x), Some(y)) if x != y))
        .count();
    bridging as f64 / eligible.len() as f64
}

/// Connected-component id per node of an edge set (union-find).
fn components(edges: &BTreeSet<EdgeKey>) -> BTreeMap<&str, usize> {
    let nodes: BTreeSet<&str> = edges.iter().flat_map(|e| [e.a(), e.b()]).collect();
    let index: BTreeMap<&str, usize> = nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let mut parent: Vec<usize> = (0..nodes.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for e in edges {
        let (ra, rb) = (find(&mut parent, index[e.a()]), find(&mut parent, index[e.b()]));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    index.iter().map(|(&n, &i)| (n, find(&mut parent, i))).collect()
}

/// Per-category edge lists and counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VogueReport {
    pub counts: BTreeMap<EdgeCategory, usize>,
    pub edges: BTreeMap<EdgeCategory, Vec<EdgeKey>>,
    pub declined: usize,
    pub weak_tie_share: f64,
    pub bridging_share: f64,
}

impl VogueReport {
    pub fn new(categories: &BTreeMap<EdgeKey, EdgeClass>, net_t1: &TermNetwork, bb_t1: &Backbone) -> Self {
        let mut edges: BTreeMap<EdgeCategory, Vec<EdgeKey>> = EdgeCategory::ALL.iter().map(|&c| (c, Vec::new())).collect();
        for (k, c) in categories {
            edges.entry(c.category).or_default().push(k.clone());
        }
        let vogue: BTreeSet<EdgeKey> = edges[&EdgeCategory::Vogue].iter().cloned().collect();
        Self {
            counts: edges.iter().map(|(&c, v)| (c, v.len())).collect(),
            declined: categories.values().filter(|c| c.declined).count(),
            weak_tie_share: weak_tie_share(&vogue, net_t1, bb_t1),
            bridging_share: bridging_share(&vogue, net_t1, bb_t1),
            edges,
        }
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicNeighbors {
    pub term: String,
    pub vogue_neighbors: Vec<String>,
    pub foundation_neighbors: Vec<String>,
}

/// Vogue and foundation neighbours of `term`, heaviest T2 edge first, ties
/// in lexicographic order.
pub fn topic_neighbors(term: &str, categories: &BTreeMap<EdgeKey, EdgeClass>, net_t2: &TermNetwork) -> TopicNeighbors {
    let collect = |category: EdgeCategory| {
        let mut v: Vec<(&str, u32)> = categories
            .iter()
            .filter(|(_, c)| c.category == category)
            .filter_map(|(k, _)| k.other(term).map(|o| (o, net_t2.weight(k).unwrap_or(0))))
            .collect();
        v.sort_by(|x, y| y.1.cmp(&x.1).then_with(|| x.0.cmp(y.0)));
        v.into_iter().map(|(t, _)| t.to_string()).collect()
    };
    TopicNeighbors {
        term: term.to_string(),
        vogue_neighbors: collect(EdgeCategory::Vogue),
        foundation_neighbors: collect(EdgeCategory::Foundation),
    }
}

/// Terms with the most vogue edges (ties lexicographic).
pub fn top_vogue_terms(categories: &BTreeMap<EdgeKey, EdgeClass>, n: usize) -> Vec<String> {
    let mut deg: BTreeMap<&str, usize> = BTreeMap::new();
    for (k, c) in categories {
        if c.category == EdgeCategory::Vogue {
            *deg.entry(k.a()).or_default() += 1;
            *deg.entry(k.b()).or_default() += 1;
        }
    }
    let mut v: Vec<(&str, usize)> = deg.into_iter().collect();
    v.sort_by(|x, y| y.1.cmp(&x.1).then_with(|| x.0.cmp(y.0)));
    v.into_iter().take(n).map(|(t, _)| t.to_string()).collect()
}

fn fmt_opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes `term_a,term_b,w_t1,w_t2,alpha_t1,alpha_t2,category,declined`.
/// Weights are 0 and alphas empty where the pair is absent.
pub fn write_categories_csv<W: Write>(
    categories: &BTreeMap<EdgeKey, EdgeClass>,
    net_t1: &TermNetwork,
    bb_t1: &Backbone,
    net_t2: &TermNetwork,
    bb_t2: &Backbone,
    writer: W,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["term_a", "term_b", "w_t1", "w_t2", "alpha_t1", "alpha_t2", "category", "declined"])?;
    for (k, c) in categories {
        w.write_record([
            k.a(),
            k.b(),
            &net_t1.weight(k).unwrap_or(0).to_string(),
            &net_t2.weight(k).unwrap_or(0).to_string(),
            &fmt_opt(bb_t1.significance.get(k).map(|s| s.alpha())),
            &fmt_opt(bb_t2.significance.get(k).map(|s| s.alpha())),
            c.category.as_str(),
            if c.declined { "1" } else { "0" },
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the categories table back into a map.
pub fn read_categories_csv<R: Read>(reader: R) -> Result<BTreeMap<EdgeKey, EdgeClass>, VogueError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| VogueError::Format(e.to_string()))?;
        let bad = |what: &str| VogueError::Format(format!("row {}: bad {what}", i + 2));
        if rec.len() != 8 {
            return Err(bad("column count"));
        }
        let key = EdgeKey::new(&rec[0], &rec[1]).ok_or_else(|| bad("edge"))?;
        let category = rec[6].parse().map_err(|_| bad("category"))?;
        let declined = match &rec[7] {
            "1" => true,
            "0" => false,
            _ => return Err(bad("declined")),
        };
        out.insert(key, EdgeClass { category, declined });
    }
    Ok(out)
}
