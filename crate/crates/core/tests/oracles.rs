mod common;

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vogue_core::backbone::{disparity_alpha, extract_backbone, node_alpha};
use vogue_core::diffusion::{core_periphery, tarjan_scc, CoreLabel, CoreRule, FlowNetwork};
use vogue_core::semnet::TermNetwork;
use vogue_core::stats::{bread, dcr_variance, hc0};

use common::*;

#[test]
fn quadrature_rule_is_exact_for_polynomials() {
    let rule = gauss_legendre(32);
    assert!((rule.1.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    // integral of x^10 over [-1, 1]
    let v: f64 = rule.0.iter().zip(&rule.1).map(|(x, w)| w * x.powi(10)).sum();
    assert!((v - 2.0 / 11.0).abs() < 1e-14);
}

proptest! {
    #[test]
    fn closed_form_alpha_matches_quadrature(k in 2usize..=50, p in 0.0f64..1.0) {
        let rule = gauss_legendre(32);
        let closed = node_alpha(p, 1.0, k);
        prop_assert!((closed - quadrature_alpha(p, k, &rule)).abs() < 1e-12);
    }

    #[test]
    fn dcr_equals_literal_double_sum(seed in any::<u64>(), n in 4usize..=12, p in 1usize..=4, schools in 3usize..=6) {
        // a saturated fit leaves only roundoff in the residuals
        prop_assume!(n > p);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(n, p, |_, j| if j == 0 { 1.0 } else { rand::Rng::random::<f64>(&mut rng) });
        prop_assume!((x.transpose() * &x).determinant().abs() > 1e-6);
        let u = DVector::from_fn(n, |_, _| rand::Rng::random::<f64>(&mut rng) - 0.5);
        let members: Vec<(usize, usize)> = (0..n)
            .map(|_| {
                let a = rand::Rng::random_range(&mut rng, 0..schools);
                let b = (a + rand::Rng::random_range(&mut rng, 1..schools)) % schools;
                (a, b)
            })
            .collect();
        let fast = dcr_variance(&bread(&x).unwrap(), &x, &u, &members).unwrap();
        prop_assert!(rel_diff(&fast, &brute_force_dcr(&x, &u, &members)) < 1e-10);
    }

    #[test]
    fn tarjan_matches_reachability(seed in any::<u64>()) {
        let adj = random_digraph(&mut ChaCha8Rng::seed_from_u64(seed), 8);
        let comps: BTreeSet<Vec<usize>> = tarjan_scc(&adj).into_iter().collect();
        prop_assert_eq!(comps, reachability_sccs(&adj));
    }

    #[test]
    fn backbone_is_monotone_and_scale_free(seed in any::<u64>(), n in 3usize..60, scale in 2u32..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = random_network(&mut rng, n);
        prop_assume!(!net.is_empty());
        let mut prev = BTreeSet::new();
        for a in [0.001, 0.01, 0.05, 0.1, 0.3, 0.9] {
            let bb = extract_backbone(&net, a).unwrap();
            prop_assert!(prev.is_subset(&bb.edges));
            prev = bb.edges;
        }
        let mut scaled = TermNetwork::new("scaled");
        for (k, &w) in &net.edges {
            scaled.insert_edge(k.clone(), w * scale);
        }
        prop_assert_eq!(disparity_alpha(&net).unwrap(), disparity_alpha(&scaled).unwrap());
    }
}

#[test]
fn disjoint_dyads_reduce_to_hc0() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = DMatrix::from_fn(8, 3, |_, j| if j == 0 { 1.0 } else { rand::Rng::random::<f64>(&mut rng) });
    let u = DVector::from_fn(8, |i, _| (i as f64 - 3.5) / 4.0);
    let members: Vec<(usize, usize)> = (0..8).map(|i| (2 * i, 2 * i + 1)).collect();
    let b = bread(&x).unwrap();
    let v = dcr_variance(&b, &x, &u, &members).unwrap();
    assert!(rel_diff(&v, &hc0(&b, &x, &u).unwrap()) < 1e-13);
    assert!(rel_diff(&v, &hc0_literal(&x, &u)) < 1e-12);
}

#[test]
fn core_is_largest_reachability_class() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..300 {
        let adj = random_digraph(&mut rng, 8);
        let mut flow = FlowNetwork::default();
        let name = |i: usize| format!("n{i}");
        flow.nodes = (0..adj.len()).map(name).collect();
        for (i, out) in adj.iter().enumerate() {
            for &j in out {
                flow.edges.insert((name(i), name(j)), 1.0 + (i * 7 + j) as f64 % 3.0);
            }
        }
        let classes = reachability_sccs(&adj);
        let internal = |c: &Vec<usize>| -> f64 {
            c.iter()
                .flat_map(|&i| adj[i].iter().filter(|j| c.contains(j)).map(move |&j| 1.0 + (i * 7 + j) as f64 % 3.0))
                .sum()
        };
        // biggest, then heaviest, then smallest names
        let best = classes
            .iter()
            .max_by(|a, b| {
                a.len()
                    .cmp(&b.len())
                    .then(internal(a).total_cmp(&internal(b)))
                    .then_with(|| {
                        let na: Vec<String> = a.iter().map(|&i| name(i)).collect();
                        let nb: Vec<String> = b.iter().map(|&i| name(i)).collect();
                        nb.cmp(&na)
                    })
            })
            .unwrap();
        let expected: BTreeSet<String> = best.iter().map(|&i| name(i)).collect();
        let got: BTreeSet<String> = core_periphery(&flow, CoreRule::LargestScc)
            .into_iter()
            .filter(|(_, l)| *l == CoreLabel::Core)
            .map(|(n, _)| n)
            .collect();
        assert_eq!(got, expected, "{adj:?}");
    }
}
