use std::collections::BTreeSet;
use std::sync::OnceLock;

use contact_core::ribbon::*;
use contact_core::*;
use proptest::prelude::*;

fn graph(s: &str) -> RibbonGraph {
    s.replace(" | ", "\n").parse().unwrap()
}

fn catalan(k: u64) -> u64 {
    // C(2k, k) / (k + 1)
    let mut c: u64 = 1;
    for i in 0..k {
        c = c * (2 * k - i) / (i + 1);
    }
    c / (k + 1)
}

#[test]
fn rooted_counts_are_catalan() {
    for n in 1..=8 {
        let want = catalan(n as u64 - 1) as usize;
        assert_eq!(
            rooted_plane_tree_count(n, TreeStrategy::DyckGluing),
            want,
            "n = {n}"
        );
        assert_eq!(rooted_plane_tree_count(n, TreeStrategy::AddLeaf), want, "n = {n}");
    }
}

#[test]
fn enumeration_strategies_agree() {
    for n in 1..=8 {
        let a: BTreeSet<String> = plane_trees(n, TreeStrategy::DyckGluing)
            .iter()
            .map(|g| g.to_string())
            .collect();
        let b = plane_trees(n, TreeStrategy::AddLeaf);
        assert_eq!(a.len(), b.len(), "n = {n}");
    }
    assert_eq!(plane_trees(2, TreeStrategy::AddLeaf).len(), 1);
    let count = |s| {
        (1..=4)
            .flat_map(|n| plane_trees(n, s))
            .map(|t| arc_placements(&t).len())
            .sum::<usize>()
    };
    assert_eq!(count(TreeStrategy::DyckGluing), count(TreeStrategy::AddLeaf));
}

#[test]
fn enumerated_trees_are_planar_trees() {
    for n in 1..=7 {
        for t in plane_trees(n, TreeStrategy::AddLeaf) {
            assert!(t.is_tree() && t.is_planar());
            assert_eq!(t.vertex_count(), n);
        }
    }
}

#[test]
fn shared_origin_fails_both_conditions() {
    let mut seen = 0;
    for g in enumerate_instances(5) {
        let (a1, a2) = (g.arc(1).unwrap(), g.arc(2).unwrap());
        if a1.origin != a2.origin {
            continue;
        }
        seen += 1;
        let c = prop_trees_conditions(&g, SegmentReading::InnerSegment).unwrap();
        assert_eq!((c.cond1, c.cond2), (false, false), "{g}");
    }
    assert!(seen > 0);
}

#[test]
fn moved_edge_to_destination_adds_a_component() {
    for n in 1..=3 {
        for t in plane_trees(n, TreeStrategy::DyckGluing) {
            for g in arc_placements(&t) {
                let Ok(e) = g.moved_edge(1, Chirality::Clockwise) else {
                    continue;
                };
                let a = g.arc(1).unwrap();
                let (x, y) = g.edges()[&e];
                let v = if x == a.origin { y } else { x };
                if v != a.destination {
                    continue;
                }
                let h = g.apply_arc(1, Chirality::Clockwise).unwrap();
                assert_eq!(h.component_count(), g.component_count() + 1, "{g}");
            }
        }
    }
}

#[test]
fn figure_instance() {
    // star centred at 0; A₁ from 0 to 1, A₂ from 1 to 0
    let g = graph("0: <2 e0 >1 e1 | 1: >2 <1 e0 | 2: e1");
    let c = prop_trees_conditions(&g, SegmentReading::InnerSegment).unwrap();
    assert_eq!((c.cond1, c.cond2), (true, true));
    assert!(!g.apply_arc(2, Chirality::Clockwise).unwrap().is_tree());

    // with A₁ reversed the corollary can fail already on three vertices
    let t = &plane_trees(3, TreeStrategy::DyckGluing)[0];
    let failures = arc_placements(t)
        .into_iter()
        .filter(|g| {
            cond1(g, Chirality::Counterclockwise)
                && g.apply_arc(2, Chirality::Clockwise).is_ok_and(|h| h.is_tree())
        })
        .count();
    assert!(failures > 0);
}

#[test]
fn proposition_holds_up_to_six_vertices() {
    let r = verify_tree_proposition(6, SegmentReading::InnerSegment);
    assert_eq!(r.trees, 1 + 1 + 1 + 2 + 3 + 6);
    assert!(r.cond1 > 0);
    assert_eq!(r.cond1, r.cond2);
    assert_eq!(r.mismatches, 0);
    assert_eq!(r.corollary_failures, 0);
    assert!(r.reversed_corollary_failures > 0);
    assert!(r.passed());
    assert!(r
        .counterexamples
        .iter()
        .all(|c| c.kind == CounterexampleKind::ReversedCorollary));
    assert!(r.counterexamples.len() <= COUNTEREXAMPLE_CAP);
}

#[test]
fn local_reading_is_weaker() {
    let r = verify_tree_proposition(5, SegmentReading::Local);
    assert!(r.mismatches > 0);
    assert!(r.cond2 > r.cond1);
}

#[test]
fn gamma_plus_std_sphere() {
    let m = ContactModel::catalog("std_cyl").unwrap();
    let a = analyze_foliation(&m, &ParamSurface::sphere(1.0), &AnalysisConfig::default()).unwrap();
    let gp = gamma_plus_of(&a).unwrap();
    assert_eq!(
        (gp.graph.vertex_count(), gp.graph.edge_count(), gp.nodes.len()),
        (1, 0, 1)
    );
    assert!(gp.graph.is_tree() && gp.closed_leaves.is_empty());
}

#[test]
fn gamma_plus_ot_sphere_with_closed_leaves() {
    let m = ContactModel::catalog("ot").unwrap();
    let cfg = AnalysisConfig::default();
    let a = analyze_foliation(&m, &ParamSurface::sphere(5.0), &cfg).unwrap();
    let gp = gamma_plus_of(&a).unwrap();
    assert!(gp.graph.is_tree() && gp.graph.vertex_count() == 1);
    assert_eq!(gp.closed_leaves.len(), 1);
    let v = convexity_verdict(&a, &cfg).unwrap();
    let gamma = v.dividing_set.as_ref().expect("convex");
    assert!(gamma.components.len() > 1);
}

fn instances() -> &'static [RibbonGraph] {
    static ALL: OnceLock<Vec<RibbonGraph>> = OnceLock::new();
    ALL.get_or_init(|| enumerate_instances(5).collect())
}

/// Relabels vertices by `perm` and rotates each cyclic order by `shift[v]`.
fn transform(g: &RibbonGraph, perm: &[usize], shift: &[usize]) -> RibbonGraph {
    let n = g.vertex_count();
    let mut rot = vec![Vec::new(); n];
    for v in 0..n {
        let mut ds = g.rotation(v).to_vec();
        if !ds.is_empty() {
            let k = shift[v] % ds.len();
            ds.rotate_left(k);
        }
        rot[perm[v]] = ds;
    }
    RibbonGraph::new(rot).unwrap()
}

fn same_up_to_rotation(a: &RibbonGraph, b: &RibbonGraph) -> bool {
    a.vertex_count() == b.vertex_count()
        && (0..a.vertex_count()).all(|v| {
            let (x, y) = (a.rotation(v), b.rotation(v));
            x.len() == y.len()
                && (x.is_empty() || (0..x.len()).any(|k| x.iter().cycle().skip(k).take(x.len()).eq(y.iter())))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn apply_arc_preserves_counts(i in 0usize..1_000_000) {
        let g = &instances()[i % instances().len()];
        if let Ok(h) = g.apply_arc(1, Chirality::Clockwise) {
            prop_assert_eq!(h.vertex_count(), g.vertex_count());
            prop_assert_eq!(h.edge_count(), g.edge_count());
            prop_assert!(h.is_planar());
        }
    }

    #[test]
    fn apply_arc_is_covariant(i in 0usize..1_000_000, seed in any::<u64>()) {
        let g = &instances()[i % instances().len()];
        let n = g.vertex_count();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for k in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(k, (s >> 33) as usize % (k + 1));
        }
        let shift: Vec<usize> = (0..n).map(|k| (seed >> (4 * k)) as usize & 15).collect();
        let t = transform(g, &perm, &shift);
        for chir in [Chirality::Clockwise, Chirality::Counterclockwise] {
            match (g.apply_arc(1, chir), t.apply_arc(1, chir)) {
                (Ok(a), Ok(b)) => prop_assert!(same_up_to_rotation(&transform(&a, &perm, &vec![0; n]), &b)),
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "validity changed under relabeling: {}", g),
            }
        }
        prop_assert_eq!(cond1(g, Chirality::Clockwise), cond1(&t, Chirality::Clockwise));
        prop_assert_eq!(cond2(g, SegmentReading::InnerSegment), cond2(&t, SegmentReading::InnerSegment));
    }
}

#[test]
fn gamma_plus_across_rotating_torus_connection() {
    let m = ContactModel::catalog("r2s1").unwrap();
    let fam = movie::SurfaceFamily::parse("rotating_tori").unwrap();
    let cfg = AnalysisConfig::default();
    let shapes: Vec<(String, bool)> = [-0.05, 0.05]
        .iter()
        .map(|&t| {
            let a = analyze_foliation(&m, &fam.frame(t).unwrap(), &cfg).unwrap();
            let gp = gamma_plus_of(&a).unwrap();
            (gp.graph.to_string(), gp.graph.is_tree())
        })
        .collect();
    // one positive focus with the two stable separatrices of P as a loop
    assert_eq!(shapes[0], ("0: e0 e0\n".to_string(), false));
    assert_eq!(shapes[0], shapes[1]);
}

#[test]
fn fixture_file_parses() {
    let g: RibbonGraph = include_str!("fixtures/three_vertex_star.ribbon").parse().unwrap();
    assert_eq!(g.to_string(), graph("0: <2 e0 >1 e1 | 1: >2 <1 e0 | 2: e1").to_string());
    assert_eq!((g.vertex_count(), g.edge_count(), g.arcs().len()), (3, 2, 2));
    assert!(matches!("0: e0\n2: e0\n".parse::<RibbonGraph>(), Err(Error::Parse { line: 2, .. })));
}
