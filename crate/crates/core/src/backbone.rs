//! Disparity-filter backbone extraction.
//!
//! Under the null model a node of degree `k` spreads its strength uniformly at
//! random over its `k` edges, so a normalized weight `p` is at least as large
//! with probability `(1 - p)^(k - 1)`. Each edge gets that probability from
//! both endpoints; it belongs to the backbone when either is below the
//! threshold.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::semnet::{EdgeKey, TermNetwork};

pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Error, PartialEq)]
pub enum BackboneError {
    #[error("network {0:?} has no edges")]
    EmptyNetwork(String),
    #[error("significance threshold must lie in (0, 1), got {0}")]
    Config(f64),
    #[error("backbone table: {0}")]
    Format(String),
}

/// Per-edge null-model probabilities seen from each endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSignificance {
    pub edge: EdgeKey,
    pub alpha_from_a: f64,
    pub alpha_from_b: f64,
}

impl EdgeSignificance {
    pub fn alpha(&self) -> f64 {
        self.alpha_from_a.min(self.alpha_from_b)
    }
}

/// Probability under the null model that one of a node's `degree` edges
/// carries at least `weight / strength` of its strength. Degree-1 nodes
/// cannot be evaluated and get 1.
pub fn node_alpha(weight: f64, strength: f64, degree: usize) -> f64 {
    if degree <= 1 {
        return 1.0;
    }
    let p = weight / strength;
    (1.0 - p).powi((degree - 1) as i32).clamp(0.0, 1.0)
}

pub fn disparity_alpha(net: &TermNetwork) -> Result<BTreeMap<EdgeKey, EdgeSignificance>, BackboneError> {
    if net.is_empty() {
        return Err(BackboneError::EmptyNetwork(net.label.clone()));
    }
    let ds = net.degree_strength();
    let edges: Vec<(&EdgeKey, &u32)> = net.edges.iter().collect();
    Ok(edges
        .par_iter()
        .map(|&(key, &w)| {
            let from = |end: &str| {
                let (k, s) = ds[end];
                node_alpha(f64::from(w), s as f64, k)
            };
            (
                key.clone(),
                EdgeSignificance {
                    edge: key.clone(),
                    alpha_from_a: from(key.a()),
                    alpha_from_b: from(key.b()),
                },
            )
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect())
}

/// Significant edge subset of a network.
#[derive(Debug, Clone, PartialEq)]
pub struct Backbone {
    pub label: String,
    pub alpha_t: f64,
    pub edges: BTreeSet<EdgeKey>,
    pub significance: BTreeMap<EdgeKey, EdgeSignificance>,
}

impl Backbone {
    pub fn contains(&self, key: &EdgeKey) -> bool {
        self.edges.contains(key)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Re-thresholds already computed significances.
    pub fn from_significance(
        label: impl Into<String>,
        significance: BTreeMap<EdgeKey, EdgeSignificance>,
        alpha_t: f64,
    ) -> Result<Self, BackboneError> {
        check_alpha(alpha_t)?;
        let edges = significance
            .values()
            .filter(|s| s.alpha() < alpha_t)
            .map(|s| s.edge.clone())
            .collect();
        Ok(Self {
            label: label.into(),
            alpha_t,
            edges,
            significance,
        })
    }

    /// Writes `term_a,term_b,weight,alpha_a,alpha_b,in_backbone` for every
    /// edge of `net`.
    pub fn write_csv<W: Write>(&self, net: &TermNetwork, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["term_a", "term_b", "weight", "alpha_a", "alpha_b", "in_backbone"])?;
        for (key, weight) in &net.edges {
            let (aa, ab) = self
                .significance
                .get(key)
                .map(|s| (s.alpha_from_a.to_string(), s.alpha_from_b.to_string()))
                .unwrap_or_default();
            w.write_record([
                key.a(),
                key.b(),
                &weight.to_string(),
                &aa,
                &ab,
                if self.contains(key) { "1" } else { "0" },
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the table written by [`Backbone::write_csv`], recovering both the
    /// parent network and the backbone.
    pub fn read_csv<R: Read>(label: &str, alpha_t: f64, reader: R) -> Result<(TermNetwork, Backbone), BackboneError> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut net = TermNetwork::new(label);
        let mut bb = Backbone {
            label: label.to_string(),
            alpha_t,
            edges: BTreeSet::new(),
            significance: BTreeMap::new(),
        };
        for (i, rec) in rdr.records().enumerate() {
            let row = i + 2;
            let rec = rec.map_err(|e| BackboneError::Format(e.to_string()))?;
            if rec.len() != 6 {
                return Err(BackboneError::Format(format!("row {row}: expected 6 columns")));
            }
            let bad = |what: &str| BackboneError::Format(format!("row {row}: bad {what}"));
            let key = EdgeKey::new(&rec[0], &rec[1]).ok_or_else(|| bad("edge"))?;
            let weight: u32 = rec[2].parse().map_err(|_| bad("weight"))?;
            let alpha_from_a: f64 = rec[3].parse().map_err(|_| bad("alpha_a"))?;
            let alpha_from_b: f64 = rec[4].parse().map_err(|_| bad("alpha_b"))?;
            match &rec[5] {
                "1" => {
                    bb.edges.insert(key.clone());
                }
                "0" => {}
                _ => return Err(bad("in_backbone")),
            }
            bb.significance.insert(
                key.clone(),
                EdgeSignificance {
                    edge: key.clone(),
                    alpha_from_a,
                    alpha_from_b,
                },
            );
            net.insert_edge(key, weight);
        }
        Ok((net, bb))
    }
}

fn check_alpha(alpha_t: f64) -> Result<(), BackboneError> {
    if alpha_t > 0.0 && alpha_t < 1.0 {
        Ok(())
    } else {
        Err(BackboneError::Config(alpha_t))
    }
}

/// Keeps edges significant from at least one endpoint at level `alpha_t`.
pub fn extract_backbone(net: &TermNetwork, alpha_t: f64) -> Result<Backbone, BackboneError> {
    check_alpha(alpha_t)?;
    let significance = if net.is_empty() {
        BTreeMap::new()
    } else {
        disparity_alpha(net)?
    };
    Backbone::from_significance(net.label.clone(), significance, alpha_t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(a: &str, b: &str) -> EdgeKey {
        EdgeKey::new(a, b).unwrap()
    }

    fn net(edges: &[(&str, &str, u32)]) -> TermNetwork {
        let mut n = TermNetwork::new("t");
        for &(a, b, w) in edges {
            n.insert_edge(key(a, b), w);
        }
        n
    }

    fn star() -> TermNetwork {
        net(&[("hub", "x", 8), ("hub", "y", 1), ("hub", "z", 1)])
    }

    #[test]
    fn equal_weights_at_degree_two() {
        let sig = disparity_alpha(&net(&[("a", "b", 3), ("a", "c", 3)])).unwrap();
        assert_eq!(sig[&key("a", "b")].alpha_from_a, 0.5);
        assert_eq!(sig[&key("a", "c")].alpha_from_a, 0.5);
    }

    #[test]
    fn hub_alphas() {
        let sig = disparity_alpha(&star()).unwrap();
        let heavy = &sig[&key("hub", "x")];
        assert!((heavy.alpha_from_a - 0.04).abs() < 1e-12);
        assert!((sig[&key("hub", "y")].alpha_from_a - 0.81).abs() < 1e-12);
        // leaves have degree 1
        assert_eq!(heavy.alpha_from_b, 1.0);
        assert!((heavy.alpha() - 0.04).abs() < 1e-12);
    }

    #[test]
    fn empty_network_errors_for_alpha_but_not_backbone() {
        let empty = TermNetwork::new("e");
        assert!(matches!(disparity_alpha(&empty), Err(BackboneError::EmptyNetwork(_))));
        assert!(extract_backbone(&empty, 0.05).unwrap().is_empty());
    }

    #[test]
    fn star_backbone_keeps_heavy_edge() {
        let bb = extract_backbone(&star(), 0.05).unwrap();
        assert_eq!(bb.edges, BTreeSet::from([key("hub", "x")]));
    }

    #[test]
    fn equal_triangle_has_empty_backbone() {
        let bb = extract_backbone(&net(&[("a", "b", 1), ("b", "c", 1), ("a", "c", 1)]), 0.05).unwrap();
        assert!(bb.is_empty());
    }

    #[test]
    fn threshold_outside_unit_interval() {
        for bad in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(extract_backbone(&star(), bad).is_err());
        }
    }

    #[test]
    fn csv_round_trip() {
        let n = star();
        let bb = extract_backbone(&n, 0.05).unwrap();
        let mut buf = Vec::new();
        bb.write_csv(&n, &mut buf).unwrap();
        let (n2, bb2) = Backbone::read_csv("t", 0.05, buf.as_slice()).unwrap();
        assert_eq!(n2.edges, n.edges);
        assert_eq!(bb2.edges, bb.edges);
        assert_eq!(bb2.significance, bb.significance);
    }
}
