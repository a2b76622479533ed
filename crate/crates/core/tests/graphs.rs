mod common;

use common::functional;
use paqft_core::functionals::{FunctionalSpace, PolyFunctional};
use paqft_core::graphs::{
    brute_force_symmetry_factor, divergence_degree, eg_subgraphs, enumerate_graphs, graph_expand_tn, operator_expand_tn,
    symmetry_factor, Multigraph,
};
use paqft_core::lattice::{Lattice1p1, PropagatorSet};
use paqft_core::quantization::{ProductKind, Quantizer};
use proptest::prelude::*;
use std::collections::BTreeSet;
use std::sync::OnceLock;

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Permutations of the labelled lines that keep every line on its pair of endpoints.
fn line_automorphisms(g: &Multigraph) -> u64 {
    let lines: Vec<(usize, usize)> = g.lines().flat_map(|(&p, &l)| std::iter::repeat(p).take(l as usize)).collect();
    let mut perm: Vec<usize> = (0..lines.len()).collect();
    let mut count = 0;
    loop {
        if perm.iter().enumerate().all(|(k, &p)| lines[k] == lines[p]) {
            count += 1;
        }
        // next lexicographic permutation
        let Some(i) = (1..perm.len()).rev().find(|&i| perm[i - 1] < perm[i]) else {
            return count;
        };
        let j = (i..perm.len()).rev().find(|&j| perm[j] > perm[i - 1]).unwrap();
        perm.swap(i - 1, j);
        perm[i..].reverse();
    }
}

fn graphs(max_vertices: usize, max_lines: u32) -> impl Strategy<Value = Multigraph> {
    (2..=max_vertices).prop_flat_map(move |n| {
        proptest::collection::vec(((1..=n, 1..=n), 1..=max_lines), 0..4).prop_map(move |ls| {
            let ls: Vec<_> = ls.into_iter().filter(|((i, j), _)| i != j).collect();
            Multigraph::from_lines(n, &ls).unwrap()
        })
    })
}

fn lattice() -> Lattice1p1 {
    Lattice1p1::new(10, 6, 0.5, 1.0, 1.0).unwrap()
}

fn props() -> &'static PropagatorSet {
    static PS: OnceLock<PropagatorSet> = OnceLock::new();
    PS.get_or_init(|| PropagatorSet::new(&lattice()).unwrap())
}

fn pool() -> Vec<usize> {
    let lat = lattice();
    vec![lat.site(3, 2), lat.site(4, 2), lat.site(5, 0), lat.site(6, 3)]
}

fn field(trunc_h: u32) -> impl Strategy<Value = PolyFunctional> {
    functional(FunctionalSpace::for_lattice(&lattice(), trunc_h, 0).with_max_degree(9), pool(), 3, 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn enumeration_is_complete_and_distinct(n in 1usize..5, max_lines in 0u32..4) {
        let all = enumerate_graphs(n, max_lines);
        let pairs = (n * (n - 1) / 2) as u64;
        prop_assert_eq!(all.len() as u64, binomial(max_lines as u64 + pairs, pairs));
        prop_assert!(all.iter().all(|g| g.n_vertices == n && g.n_lines() <= max_lines));
        prop_assert_eq!(all.iter().collect::<BTreeSet<_>>().len(), all.len());
    }

    #[test]
    fn symmetry_factor_counts_line_automorphisms(g in graphs(4, 3)) {
        prop_assume!(g.n_lines() <= 7);
        let oracle = line_automorphisms(&g);
        prop_assert_eq!(symmetry_factor(&g), oracle);
        prop_assert_eq!(brute_force_symmetry_factor(&g), oracle);
    }

    #[test]
    fn divergence_degree_is_additive_up_to_one_vertex(a in graphs(3, 3), b in graphs(3, 3), d in 2i64..7) {
        let u = a.disjoint_union(&b);
        prop_assert_eq!(divergence_degree(&u, d), divergence_degree(&a, d) + divergence_degree(&b, d) - d);
        prop_assert_eq!(divergence_degree(&a.with_extra_line(1, 2).unwrap(), d), divergence_degree(&a, d) + d - 2);
    }

    #[test]
    fn subgraphs_are_induced(g in graphs(5, 3)) {
        let subs = eg_subgraphs(&g);
        prop_assert_eq!(subs.len(), 1 << g.n_vertices);
        let distinct: BTreeSet<_> = subs.iter().map(|s| s.vertices.clone()).collect();
        prop_assert_eq!(distinct.len(), subs.len());
        for s in &subs {
            prop_assert_eq!(s.graph.n_vertices, s.vertices.len());
            for (a, &va) in s.vertices.iter().enumerate() {
                for (b, &vb) in s.vertices.iter().enumerate().skip(a + 1) {
                    prop_assert_eq!(s.graph.multiplicity(a + 1, b + 1), g.multiplicity(va, vb));
                }
            }
        }
        let whole = subs.iter().find(|s| s.vertices.len() == g.n_vertices).unwrap();
        prop_assert_eq!(&whole.graph, &g);
    }

    #[test]
    fn two_vertex_graph_sum_is_the_feynman_product(f in field(2), g in field(2)) {
        let q = Quantizer::new(props());
        let t2 = graph_expand_tn(&q, &[f.clone(), g.clone()]).unwrap();
        prop_assert_eq!(&t2, &q.product(ProductKind::TimeOrderedF, &f, &g).unwrap());
        prop_assert_eq!(t2, graph_expand_tn(&q, &[g, f]).unwrap());
    }

    #[test]
    fn three_vertex_graph_sum_is_the_exponential(f in field(2), g in field(2), h in field(2)) {
        let q = Quantizer::new(props());
        let by_graphs = graph_expand_tn(&q, &[f.clone(), g.clone(), h.clone()]).unwrap();
        prop_assert_eq!(&by_graphs, &operator_expand_tn(&q, &[f.clone(), g.clone(), h.clone()]).unwrap());
        // the product is associative, so iterating ·_T′ gives the same T_3
        let nested = q.product(ProductKind::TimeOrderedF, &q.product(ProductKind::TimeOrderedF, &f, &g).unwrap(), &h).unwrap();
        prop_assert_eq!(by_graphs, nested);
    }
}

#[test]
fn graph_counts_for_small_orders() {
    assert_eq!(enumerate_graphs(2, 3).len(), 4);
    assert_eq!(enumerate_graphs(3, 2).len(), 10);
    assert_eq!(enumerate_graphs(4, 1).len(), 7);
    let melon = Multigraph::from_lines(2, &[((1, 2), 3)]).unwrap();
    assert_eq!(symmetry_factor(&melon), 6);
    assert_eq!(divergence_degree(&melon, 4), 2);
    assert_eq!(divergence_degree(&melon, 2), -2);
    let triangle = Multigraph::from_lines(3, &[((1, 2), 1), ((2, 3), 1), ((1, 3), 1)]).unwrap();
    assert_eq!(divergence_degree(&triangle, 4), -2);
    assert!(Multigraph::from_lines(2, &[((1, 1), 1)]).is_none());
    assert!(Multigraph::from_lines(2, &[((1, 3), 1)]).is_none());
}
