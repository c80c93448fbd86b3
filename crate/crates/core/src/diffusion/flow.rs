use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{CoreLabel, DiffusionError, PairAttribution};

/// Directed producer -> adopter graph of vogue-pair flows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlowNetwork {
    pub nodes: BTreeSet<String>,
    pub edges: BTreeMap<(String, String), f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowOptions {
    /// Keep producer == adopter flows.
    pub allow_self: bool,
    /// Each pair contributes `1 / (|producers| * |adopters|)` per flow
    /// instead of 1.
    pub fractional: bool,
}

impl FlowNetwork {
    pub fn weight(&self, from: &str, to: &str) -> f64 {
        self.edges.get(&(from.to_string(), to.to_string())).copied().unwrap_or(0.0)
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.values().sum()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["producer", "adopter", "weight"])?;
        for ((p, a), weight) in &self.edges {
            w.write_record([p.as_str(), a.as_str(), &weight.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads `producer,adopter,weight`; `nodes` supplies isolated institutions.
    pub fn read_csv<R: Read>(reader: R, nodes: impl IntoIterator<Item = String>) -> Result<Self, DiffusionError> {
        let mut net = FlowNetwork {
            nodes: nodes.into_iter().collect(),
            edges: BTreeMap::new(),
        };
        let mut rdr = csv::Reader::from_reader(reader);
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| DiffusionError::Format(e.to_string()))?;
            if rec.len() != 3 {
                return Err(DiffusionError::Format(format!("row {}: expected 3 columns", i + 2)));
            }
            let w: f64 = rec[2]
                .parse()
                .map_err(|_| DiffusionError::Format(format!("row {}: bad weight", i + 2)))?;
            net.nodes.insert(rec[0].to_string());
            net.nodes.insert(rec[1].to_string());
            net.edges.insert((rec[0].to_string(), rec[1].to_string()), w);
        }
        Ok(net)
    }

    /// Plot-ready DOT with a `group` attribute per node.
    pub fn write_dot<W: Write>(
        &self,
        labels: &BTreeMap<String, CoreLabel>,
        regions: &BTreeMap<String, String>,
        mut w: W,
    ) -> std::io::Result<()> {
        writeln!(w, "digraph flows {{")?;
        for n in &self.nodes {
            let group = labels.get(n).map(|l| l.as_str()).unwrap_or("unlabelled");
            let region = regions.get(n).map(String::as_str).unwrap_or("");
            writeln!(w, "  {n:?} [group={group:?}, region={region:?}];")?;
        }
        for ((p, a), weight) in &self.edges {
            writeln!(w, "  {p:?} -> {a:?} [weight={weight}];")?;
        }
        writeln!(w, "}}")
    }
}

/// Sums producer x adopter flows over all pairs. Every institution in
/// `nodes` is a node even without flows.
pub fn build_flow<I, S>(attributions: &[PairAttribution], nodes: I, options: FlowOptions) -> FlowNetwork
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let mut net = FlowNetwork {
        nodes: nodes.into_iter().map(Into::into).collect(),
        edges: BTreeMap::new(),
    };
    for attr in attributions {
        let pairs = attr.producers.len() * attr.adopters.len();
        if pairs == 0 {
            continue;
        }
        let unit = if options.fractional { 1.0 / pairs as f64 } else { 1.0 };
        for p in &attr.producers {
            for a in &attr.adopters {
                if p == a && !options.allow_self {
                    continue;
                }
                net.nodes.insert(p.clone());
                net.nodes.insert(a.clone());
                *net.edges.entry((p.clone(), a.clone())).or_insert(0.0) += unit;
            }
        }
    }
    net
}

/// Weight shares of flows by (source, target) group.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FlowShares {
    pub core_core: f64,
    pub core_periphery: f64,
    pub periphery_core: f64,
    pub periphery_periphery: f64,
    pub total: f64,
}

impl FlowShares {
    pub fn sum(&self) -> f64 {
        self.core_core + self.core_periphery + self.periphery_core + self.periphery_periphery
    }
}

pub fn flow_shares(flow: &FlowNetwork, labels: &BTreeMap<String, CoreLabel>) -> Result<FlowShares, DiffusionError> {
    let mut buckets = [[0.0f64; 2]; 2];
    for ((p, a), &w) in &flow.edges {
        let idx = |n: &String| match labels.get(n) {
            Some(CoreLabel::Core) => Ok(0),
            Some(CoreLabel::Periphery) => Ok(1),
            None => Err(DiffusionError::MissingLabel(n.clone())),
        };
        buckets[idx(p)?][idx(a)?] += w;
    }
    let total: f64 = buckets.iter().flatten().sum();
    if total <= 0.0 {
        return Ok(FlowShares::default());
    }
    Ok(FlowShares {
        core_core: buckets[0][0] / total,
        core_periphery: buckets[0][1] / total,
        periphery_core: buckets[1][0] / total,
        periphery_periphery: buckets[1][1] / total,
        total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semnet::EdgeKey;

    fn attr(edge: (&str, &str), producers: &[&str], adopters: &[&str]) -> PairAttribution {
        PairAttribution {
            edge: EdgeKey::new(edge.0, edge.1).unwrap(),
            producers: producers.iter().map(|s| s.to_string()).collect(),
            adopters: adopters.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn empty() {
        let f = build_flow(&[], Vec::<String>::new(), FlowOptions::default());
        assert!(f.edges.is_empty() && f.nodes.is_empty());
    }

    #[test]
    fn one_pair_two_adopters() {
        let f = build_flow(&[attr(("x", "y"), &["A"], &["B", "C"])], ["A", "B", "C", "D"], FlowOptions::default());
        assert_eq!(f.weight("A", "B"), 1.0);
        assert_eq!(f.weight("A", "C"), 1.0);
        assert_eq!(f.edges.len(), 2);
        assert!(f.nodes.contains("D"));
    }

    #[test]
    fn pairs_accumulate_and_self_flows_drop() {
        let attrs = [attr(("x", "y"), &["A"], &["A", "B"]), attr(("u", "v"), &["A"], &["B"])];
        let f = build_flow(&attrs, ["A", "B"], FlowOptions::default());
        assert_eq!(f.weight("A", "B"), 2.0);
        assert_eq!(f.weight("A", "A"), 0.0);
        let with_self = build_flow(&attrs, ["A", "B"], FlowOptions { allow_self: true, fractional: false });
        assert_eq!(with_self.weight("A", "A"), 1.0);
    }

    #[test]
    fn fractional_flows() {
        let attrs = [attr(("x", "y"), &["A", "B"], &["C", "D"])];
        let f = build_flow(&attrs, ["A"], FlowOptions { allow_self: false, fractional: true });
        assert_eq!(f.weight("A", "C"), 0.25);
        assert!((f.total_weight() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn shares() {
        let labels: BTreeMap<String, CoreLabel> = [("A", CoreLabel::Core), ("B", CoreLabel::Core), ("P", CoreLabel::Periphery)]
            .into_iter()
            .map(|(n, l)| (n.to_string(), l))
            .collect();
        let mut f = FlowNetwork::default();
        f.edges.insert(("A".into(), "B".into()), 3.0);
        f.edges.insert(("A".into(), "P".into()), 1.0);
        let s = flow_shares(&f, &labels).unwrap();
        assert_eq!((s.core_core, s.core_periphery, s.periphery_core, s.periphery_periphery), (0.75, 0.25, 0.0, 0.0));

        let all_core: BTreeMap<_, _> = labels.keys().map(|k| (k.clone(), CoreLabel::Core)).collect();
        assert_eq!(flow_shares(&f, &all_core).unwrap().core_core, 1.0);
        assert_eq!(flow_shares(&FlowNetwork::default(), &labels).unwrap().sum(), 0.0);

        f.edges.insert(("A".into(), "Q".into()), 1.0);
        assert!(matches!(flow_shares(&f, &labels), Err(DiffusionError::MissingLabel(_))));
    }

    #[test]
    fn csv_round_trip() {
        let f = build_flow(&[attr(("x", "y"), &["A"], &["B", "C"])], ["A", "B", "C", "D"], FlowOptions::default());
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let back = FlowNetwork::read_csv(buf.as_slice(), f.nodes.iter().cloned()).unwrap();
        assert_eq!(back, f);
    }
}
