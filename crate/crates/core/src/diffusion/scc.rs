use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::FlowNetwork;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoreLabel {
    Core,
    Periphery,
}

impl CoreLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            CoreLabel::Core => "core",
            CoreLabel::Periphery => "periphery",
        }
    }
}

/// How strongly connected components map onto the core.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoreRule {
    /// The single largest component.
    #[default]
    LargestScc,
    /// Every component with at least two members; falls back to the largest
    /// component when there is none.
    NontrivialSccs,
}

/// Tarjan's algorithm over an index adjacency list, iterative. Components
/// come out in reverse topological order with members sorted.
pub fn tarjan_scc(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut next = 0;

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        // (node, next child position)
        let mut call = vec![(root, 0usize)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&(v, pos)) = call.last() {
            if let Some(&w) = adj[v].get(pos) {
                if let Some(top) = call.last_mut() {
                    top.1 += 1;
                }
                if index[w] == UNSEEN {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                while let Some(w) = stack.pop() {
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                out.push(comp);
            }
        }
    }
    out
}

/// Labels institutions core or periphery from the flow graph's strongly
/// connected components. Under [`CoreRule::LargestScc`] ties on size go to
/// the larger internal flow weight, then to the lexicographically smaller
/// member list.
pub fn core_periphery(flow: &FlowNetwork, rule: CoreRule) -> BTreeMap<String, CoreLabel> {
    let names: Vec<&String> = flow.nodes.iter().collect();
    let idx: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let mut adj = vec![Vec::new(); names.len()];
    for (p, a) in flow.edges.keys() {
        if let (Some(&i), Some(&j)) = (idx.get(p.as_str()), idx.get(a.as_str())) {
            adj[i].push(j);
        }
    }
    let comps = tarjan_scc(&adj);

    let mut comp_of = vec![0; names.len()];
    for (c, members) in comps.iter().enumerate() {
        for &m in members {
            comp_of[m] = c;
        }
    }
    let mut internal = vec![0.0f64; comps.len()];
    for ((p, a), &w) in &flow.edges {
        let (ci, cj) = (comp_of[idx[p.as_str()]], comp_of[idx[a.as_str()]]);
        if ci == cj {
            internal[ci] += w;
        }
    }

    let largest = (0..comps.len()).max_by(|&x, &y| {
        comps[x]
            .len()
            .cmp(&comps[y].len())
            .then(internal[x].total_cmp(&internal[y]))
            .then_with(|| {
                // smaller member list wins, so reverse
                let mx: Vec<&str> = comps[x].iter().map(|&i| names[i].as_str()).collect();
                let my: Vec<&str> = comps[y].iter().map(|&i| names[i].as_str()).collect();
                my.cmp(&mx)
            })
    });

    let is_core: Vec<bool> = match rule {
        CoreRule::NontrivialSccs if comps.iter().any(|c| c.len() >= 2) => comps.iter().map(|c| c.len() >= 2).collect(),
        _ => (0..comps.len()).map(|c| Some(c) == largest).collect(),
    };

    names
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let label = if is_core[comp_of[i]] { CoreLabel::Core } else { CoreLabel::Periphery };
            ((*n).clone(), label)
        })
        .collect()
}
