//! Undirected co-occurrence networks over extracted terms.
//!
//! An edge's weight is the number of documents in which both of its terms
//! were extracted; within one document a pair counts once.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Canonically ordered term pair (`a < b`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeKey {
    a: String,
    b: String,
}

impl EdgeKey {
    /// `None` for a self-pair.
    pub fn new(x: impl Into<String>, y: impl Into<String>) -> Option<Self> {
        let (x, y) = (x.into(), y.into());
        match x.cmp(&y) {
            std::cmp::Ordering::Less => Some(Self { a: x, b: y }),
            std::cmp::Ordering::Greater => Some(Self { a: y, b: x }),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn a(&self) -> &str {
        &self.a
    }

    pub fn b(&self) -> &str {
        &self.b
    }

    pub fn contains(&self, term: &str) -> bool {
        self.a == term || self.b == term
    }

    /// The endpoint that is not `term`.
    pub fn other(&self, term: &str) -> Option<&str> {
        if self.a == term {
            Some(&self.b)
        } else if self.b == term {
            Some(&self.a)
        } else {
            None
        }
    }
}

impl fmt::Display for EdgeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}--{}", self.a, self.b)
    }
}

/// Weighted undirected co-occurrence graph.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TermNetwork {
    pub label: String,
    pub nodes: BTreeSet<String>,
    pub edges: BTreeMap<EdgeKey, u32>,
}

impl TermNetwork {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            ..Default::default()
        }
    }

    /// Inserts an edge (and its endpoints). Zero weights are ignored.
    pub fn insert_edge(&mut self, key: EdgeKey, weight: u32) {
        if weight == 0 {
            return;
        }
        self.nodes.insert(key.a.clone());
        self.nodes.insert(key.b.clone());
        self.edges.insert(key, weight);
    }

    pub fn weight(&self, key: &EdgeKey) -> Option<u32> {
        self.edges.get(key).copied()
    }

    pub fn contains_edge(&self, key: &EdgeKey) -> bool {
        self.edges.contains_key(key)
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Neighbour lists with weights, for every node (isolated nodes included).
    pub fn adjacency(&self) -> BTreeMap<&str, Vec<(&str, u32)>> {
        let mut adj: BTreeMap<&str, Vec<(&str, u32)>> = self.nodes.iter().map(|n| (n.as_str(), Vec::new())).collect();
        for (key, &w) in &self.edges {
            adj.entry(&key.a).or_default().push((&key.b, w));
            adj.entry(&key.b).or_default().push((&key.a, w));
        }
        adj
    }

    /// (degree, strength) per node.
    pub fn degree_strength(&self) -> BTreeMap<&str, (usize, u64)> {
        let mut out: BTreeMap<&str, (usize, u64)> = self.nodes.iter().map(|n| (n.as_str(), (0, 0))).collect();
        for (key, &w) in &self.edges {
            for end in [&key.a, &key.b] {
                let e = out.entry(end.as_str()).or_default();
                e.0 += 1;
                e.1 += u64::from(w);
            }
        }
        out
    }

    pub fn write_edge_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["term_a", "term_b", "weight"])?;
        for (key, weight) in &self.edges {
            w.write_record([key.a.as_str(), key.b.as_str(), &weight.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads `term_a,term_b,weight` CSV. Extra columns are ignored.
    pub fn read_edge_csv<R: Read>(label: impl Into<String>, reader: R) -> Result<Self, String> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut net = Self::new(label);
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| e.to_string())?;
            let field = |j: usize| rec.get(j).ok_or_else(|| format!("row {}: missing column {j}", i + 2));
            let key = EdgeKey::new(field(0)?, field(1)?).ok_or_else(|| format!("row {}: self-loop", i + 2))?;
            let weight: u32 = field(2)?.parse().map_err(|_| format!("row {}: bad weight", i + 2))?;
            if weight == 0 {
                return Err(format!("row {}: weight must be >= 1", i + 2));
            }
            net.insert_edge(key, weight);
        }
        Ok(net)
    }

    pub fn write_dot<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "graph {:?} {{", self.label)?;
        for n in &self.nodes {
            writeln!(w, "  {n:?};")?;
        }
        for (key, weight) in &self.edges {
            writeln!(w, "  {:?} -- {:?} [weight={weight}];", key.a, key.b)?;
        }
        writeln!(w, "}}")
    }
}

/// Builds the co-occurrence network of a set of documents' term sets.
/// Edges with weight below `min_weight` are dropped; their endpoints stay in
/// the node set.
pub fn build_network(term_sets: &[BTreeSet<String>], label: &str, min_weight: u32) -> TermNetwork {
    let counts: HashMap<(&str, &str), u32> = term_sets
        .par_iter()
        .fold(HashMap::new, |mut acc, terms| {
            let terms: Vec<&str> = terms.iter().map(String::as_str).collect();
            for (i, a) in terms.iter().enumerate() {
                for b in &terms[i + 1..] {
                    *acc.entry((*a, *b)).or_insert(0u32) += 1;
                }
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });

    let mut net = TermNetwork::new(label);
    net.nodes = term_sets.iter().flatten().cloned().collect();
    net.edges = counts
        .into_iter()
        .filter(|&(_, w)| w >= min_weight.max(1))
        .map(|((a, b), w)| {
            (
                EdgeKey {
                    a: a.to_string(),
                    b: b.to_string(),
                },
                w,
            )
        })
        .collect();
    net
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkStats {
    pub nodes: usize,
    pub edges: usize,
    pub total_weight: u64,
    /// Degree quantiles at 0, 0.25, 0.5, 0.75, 1 (linear interpolation).
    pub degree_quantiles: [f64; 5],
}

pub fn network_stats(net: &TermNetwork) -> NetworkStats {
    let mut degrees: Vec<f64> = net.degree_strength().values().map(|&(d, _)| d as f64).collect();
    degrees.sort_by(f64::total_cmp);
    let q = |p: f64| -> f64 {
        if degrees.is_empty() {
            return 0.0;
        }
        let pos = p * (degrees.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        degrees[lo] + (degrees[hi] - degrees[lo]) * (pos - lo as f64)
    };
    NetworkStats {
        nodes: net.node_count(),
        edges: net.edge_count(),
        total_weight: net.edges.values().map(|&w| u64::from(w)).sum(),
        degree_quantiles: [q(0.0), q(0.25), q(0.5), q(0.75), q(1.0)],
    }
}
