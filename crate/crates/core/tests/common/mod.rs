//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use vogue_core::semnet::{EdgeKey, TermNetwork};

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `P(share >= p)` for one of `k` edges under the uniform null, by
/// integrating the Beta(1, k-1) density over [p, 1].
pub fn quadrature_alpha(p: f64, k: usize, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    if k <= 1 {
        return 1.0;
    }
    let (half, mid) = ((1.0 - p) / 2.0, (1.0 + p) / 2.0);
    let km1 = (k - 1) as f64;
    rule.0
        .iter()
        .zip(&rule.1)
        .map(|(t, w)| {
            let x = mid + half * t;
            w * km1 * (1.0 - x).powi(k as i32 - 2)
        })
        .sum::<f64>()
        * half
}

/// Monte-Carlo estimate and standard error: the share of the first edge is
/// the smallest of `k - 1` uniform cut points.
pub fn monte_carlo_alpha<R: Rng>(p: f64, k: usize, samples: usize, rng: &mut R) -> (f64, f64) {
    let hits = (0..samples)
        .filter(|_| (0..k - 1).map(|_| rng.random::<f64>()).fold(1.0, f64::min) >= p)
        .count();
    let est = hits as f64 / samples as f64;
    (est, (est * (1.0 - est) / samples as f64).sqrt())
}

/// Literal dyadic sandwich: the meat sums `x_r u_r u_s x_s'` over every
/// ordered pair of rows whose dyads share a school, one pair at a time.
pub fn brute_force_dcr(x: &DMatrix<f64>, u: &DVector<f64>, members: &[(usize, usize)]) -> DMatrix<f64> {
    let p = x.ncols();
    let mut meat = DMatrix::zeros(p, p);
    for r in 0..x.nrows() {
        for s in 0..x.nrows() {
            let (a, b) = members[r];
            let (c, d) = members[s];
            if a == c || a == d || b == c || b == d {
                let xr = x.row(r).transpose() * u[r];
                let xs = x.row(s).transpose() * u[s];
                meat += xr * xs.transpose();
            }
        }
    }
    let bread = (x.transpose() * x).try_inverse().expect("full rank");
    &bread * meat * &bread
}

pub fn hc0_literal(x: &DMatrix<f64>, u: &DVector<f64>) -> DMatrix<f64> {
    let p = x.ncols();
    let mut meat = DMatrix::zeros(p, p);
    for r in 0..x.nrows() {
        let xr = x.row(r).transpose() * u[r];
        meat += &xr * xr.transpose();
    }
    let bread = (x.transpose() * x).try_inverse().expect("full rank");
    &bread * meat * &bread
}

pub fn rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Strongly connected components as mutual-reachability classes, via the
/// transitive closure.
pub fn reachability_sccs(adj: &[Vec<usize>]) -> BTreeSet<Vec<usize>> {
    let n = adj.len();
    let mut reach = vec![vec![false; n]; n];
    for (v, row) in reach.iter_mut().enumerate() {
        row[v] = true;
        for &w in &adj[v] {
            row[w] = true;
        }
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    (0..n)
        .map(|i| (0..n).filter(|&j| reach[i][j] && reach[j][i]).collect())
        .collect()
}

pub fn random_digraph<R: Rng>(rng: &mut R, max_nodes: usize) -> Vec<Vec<usize>> {
    let n = rng.random_range(1..=max_nodes);
    let density = rng.random::<f64>() * 0.5;
    (0..n)
        .map(|i| (0..n).filter(|&j| j != i && rng.random_bool(density)).collect())
        .collect()
}

/// Random weighted term network on `n` nodes named `t000`...
pub fn random_network<R: Rng>(rng: &mut R, n: usize) -> TermNetwork {
    let mut net = TermNetwork::new("random");
    let density = (rng.random::<f64>() * 0.3).max(2.0 / n as f64).min(1.0);
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(density) {
                let w = if rng.random_bool(0.1) { rng.random_range(20..200) } else { rng.random_range(1..10) };
                net.insert_edge(EdgeKey::new(format!("t{i:03}"), format!("t{j:03}")).unwrap(), w);
            }
        }
    }
    net
}

/// Pairs appearing in at least `min_weight` of the term sets, by direct
/// enumeration.
pub fn enumerate_pairs(term_sets: &[BTreeSet<String>], min_weight: u32) -> BTreeSet<EdgeKey> {
    let mut counts: BTreeMap<EdgeKey, u32> = BTreeMap::new();
    for set in term_sets {
        for a in set {
            for b in set {
                if a < b {
                    *counts.entry(EdgeKey::new(a.clone(), b.clone()).unwrap()).or_default() += 1;
                }
            }
        }
    }
    counts.into_iter().filter(|&(_, c)| c >= min_weight).map(|(k, _)| k).collect()
}
