use impdimer::lattice::{
    build_g1, build_rooted, Direction, GridSpec, RootedVariant, Shape, Site, TerminalSite,
};
use impdimer::linalg::dirichlet_matrix;
use impdimer::oracle::list_spanning_trees;
use impdimer::walks::*;
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn ts(x: usize, y: usize, dir: Direction) -> TerminalSite {
    TerminalSite {
        site: Site::new(x, y),
        dir,
    }
}

/// Exact `K⁻¹(x, t)` for every site `x`, in site order.
fn exact_column(spec: &GridSpec, t: Site) -> Vec<f64> {
    let g1 = build_g1(spec).unwrap();
    let k = dirichlet_matrix(&g1);
    let col = k.inverse_column(g1.primal(t).unwrap()).unwrap();
    spec.sites()
        .iter()
        .map(|&s| {
            col[k.row_index(g1.primal(s).unwrap()).unwrap()]
                .to_f64()
                .unwrap()
        })
        .collect()
}

fn exact_tree_count(spec: &GridSpec) -> u64 {
    let k = dirichlet_matrix(&build_g1(spec).unwrap());
    k.det().unwrap().to_integer().to_u64().unwrap()
}

fn assert_uniform_trees(spec: &GridSpec, samples: usize, seed: u64) {
    let g = build_rooted(spec, RootedVariant::TerminalsIdentified).unwrap();
    let trees = wilson_samples(&g, samples, RngSeed(seed)).unwrap();
    assert!(trees.iter().all(TreeSample::is_spanning_tree));
    let hist = tree_histogram(&trees);
    assert_eq!(hist.len() as u64, exact_tree_count(spec), "{}", spec.shape);
    let listed: std::collections::BTreeSet<Vec<(usize, u32)>> =
        list_spanning_trees(&g).unwrap().into_iter().collect();
    assert!(
        hist.keys().eq(listed.iter()),
        "{}: sampled trees differ from the oracle listing",
        spec.shape
    );
    let counts: Vec<u64> = hist.values().copied().collect();
    let (_, p) = uniformity_test(&counts).unwrap();
    assert!(p > 0.001, "{}: p = {p}", spec.shape);
}

#[test]
fn wilson_is_uniform_on_two_by_two() {
    let spec = GridSpec::rect_one(2, 2, ts(1, 1, Direction::S)).unwrap();
    assert_eq!(exact_tree_count(&spec), 192);
    assert_uniform_trees(&spec, 100_000, 11);
}

#[test]
fn wilson_is_uniform_on_small_graphs() {
    for spec in [
        GridSpec::rect_one(1, 1, ts(1, 1, Direction::W)).unwrap(),
        GridSpec::rect_one(2, 1, ts(1, 1, Direction::S)).unwrap(),
        GridSpec::new(Shape::Chain { len: 3 }, 1, vec![ts(2, 1, Direction::N)]).unwrap(),
    ] {
        assert_uniform_trees(&spec, 100_000, 12);
    }
}

#[test]
fn ti_length_two_by_two() {
    let spec = GridSpec::rect_one(2, 2, ts(1, 1, Direction::S)).unwrap();
    let stats = ti_length_stats(&spec, 100_000, RngSeed(21)).unwrap();
    assert!(
        stats.mean_length().covers(96.0 / 192.0, 3.0),
        "{:?}",
        stats.mean_length()
    );
    let exact = exact_column(&spec, Site::new(1, 1));
    for (s, e) in spec.sites().iter().zip(&exact) {
        let f = stats.membership_frequency(*s).unwrap();
        assert!(f.covers(*e, 3.0), "{s}: {f:?} vs {e}");
    }
}

#[test]
fn membership_tracks_cofactor_weights() {
    for (w, h, t) in [
        (3, 3, ts(2, 1, Direction::S)),
        (4, 4, ts(1, 3, Direction::W)),
        (3, 4, ts(3, 4, Direction::N)),
    ] {
        let spec = GridSpec::rect_one(w, h, t).unwrap();
        let stats = ti_length_stats(&spec, 40_000, RngSeed(31)).unwrap();
        let exact = exact_column(&spec, t.site);
        for (s, e) in spec.sites().iter().zip(&exact) {
            let f = stats.membership_frequency(*s).unwrap();
            assert!(f.covers(*e, 3.0), "{w}x{h} {s}: {f:?} vs {e}");
        }
        let sum: f64 = exact.iter().sum();
        assert!(stats.mean_length().covers(sum, 3.0));
    }
}

#[test]
fn ti_length_sixteen_grid() {
    let spec = GridSpec::rect_one(16, 16, ts(1, 1, Direction::S)).unwrap();
    let exact: f64 = exact_column(&spec, Site::new(1, 1)).iter().sum();
    let stats = ti_length_stats(&spec, 4_000, RngSeed(41)).unwrap();
    assert!(
        stats.mean_length().covers(exact, 3.0),
        "{:?} vs {exact}",
        stats.mean_length()
    );
}

#[test]
fn hitting_two_by_two_at_terminal() {
    let spec = GridSpec::rect_one(2, 2, ts(1, 1, Direction::S)).unwrap();
    let est = srw_hitting_estimate(&spec, Site::new(1, 1), 100_000, RngSeed(51)).unwrap();
    assert_eq!(est.total_frequency(), 1.0);
    let f = est.terminal_frequency(0).unwrap();
    assert!(f.covers(7.0 / 24.0, 3.0), "{f:?}");
}

#[test]
fn hitting_estimates_cover_exact_inverse_on_four_by_four() {
    let terms = vec![
        ts(4, 1, Direction::E),
        ts(2, 4, Direction::N),
        ts(1, 2, Direction::W),
    ];
    let spec = GridSpec::new(
        Shape::Rect {
            width: 4,
            height: 4,
        },
        2,
        terms.clone(),
    )
    .unwrap();
    let columns: Vec<Vec<f64>> = terms.iter().map(|t| exact_column(&spec, t.site)).collect();
    let mut pairs = 0;
    for (i, &x) in spec.sites().iter().enumerate() {
        let est = srw_hitting_estimate(&spec, x, 20_000, RngSeed(60 + i as u64)).unwrap();
        assert_eq!(est.total_frequency(), 1.0);
        for (ti, col) in columns.iter().enumerate() {
            let f = est.terminal_frequency(ti).unwrap();
            assert!(f.covers(col[i], 3.0), "x={x} t={ti}: {f:?} vs {}", col[i]);
            pairs += 1;
        }
    }
    assert!(pairs >= 20);
}

#[test]
fn lerw_on_tree_is_the_tree_path() {
    let spec = GridSpec::new(Shape::Chain { len: 6 }, 1, vec![ts(1, 1, Direction::N)]).unwrap();
    let g = build_g1(&spec).unwrap();
    let (from, to) = (
        g.primal(Site::new(1, 1)).unwrap(),
        g.primal(Site::new(6, 1)).unwrap(),
    );
    for seed in 0..20 {
        let p = lerw(&g, from, &[to], RngSeed(seed)).unwrap();
        let expect: Vec<usize> = (1..=6)
            .map(|x| g.primal(Site::new(x, 1)).unwrap())
            .collect();
        assert_eq!(p.vertices, expect);
        assert!(p.raw_steps >= 5);
    }
}

#[test]
fn lerw_reports_unreachable_target() {
    let spec = GridSpec::rect_one(2, 2, ts(1, 1, Direction::S)).unwrap();
    let g = build_g1(&spec).unwrap();
    let g2 = build_rooted(&spec, RootedVariant::TerminalsIdentified).unwrap();
    assert_eq!(
        lerw(&g, 0, &[g.vertex_count() + 3], RngSeed(0)),
        Err(impdimer::Error::UnknownVertex(g.vertex_count() + 3))
    );
    assert_eq!(
        lerw(&g, 0, &[], RngSeed(0)),
        Err(impdimer::Error::Unreachable(0))
    );
    let root = g2.vertex_count() - 1;
    assert!(lerw(&g2, 0, &[root], RngSeed(0)).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lerw_is_self_avoiding(w in 1usize..6, h in 1usize..6, seed in any::<u64>()) {
        let spec = GridSpec::rect_one(w, h, ts(1, 1, Direction::S)).unwrap();
        let g = build_rooted(&spec, RootedVariant::TerminalsIdentified).unwrap();
        let root = g.vertex_count() - 1;
        let start = spec.index(Site::new(w, h));
        let p = lerw(&g, start, &[root], RngSeed(seed)).unwrap();
        let mut seen = p.vertices.clone();
        seen.sort_unstable();
        seen.dedup();
        prop_assert_eq!(seen.len(), p.vertices.len());
        prop_assert_eq!(p.vertices.len(), p.moves.len() + 1);
        for (i, m) in p.moves.iter().enumerate() {
            prop_assert_eq!(m.to, p.vertices[i + 1]);
            prop_assert_eq!(g.other(m.edge, p.vertices[i]), m.to);
        }
        prop_assert_eq!(*p.vertices.last().unwrap(), root);
    }

    #[test]
    fn wilson_produces_spanning_trees(w in 1usize..7, h in 1usize..7, seed in any::<u64>()) {
        let spec = GridSpec::rect_one(w, h, ts(w, 1, Direction::E)).unwrap();
        let g = build_rooted(&spec, RootedVariant::TerminalsIdentified).unwrap();
        let t = wilson_sample(&g, RngSeed(seed)).unwrap();
        prop_assert!(t.is_spanning_tree());
        prop_assert_eq!(t.key().len(), g.vertex_count() - 1);
        let comp = t.terminal_component(&g, 0);
        let via_root: usize = t.root_moves().iter().filter(|(_, m)| g.edges[m.edge].terminal == Some(0)).count();
        prop_assert!(via_root <= 1);
        prop_assert_eq!(comp.is_empty(), via_root == 0);
    }

    #[test]
    fn statistics_are_reproducible(seed in any::<u64>()) {
        let spec = GridSpec::rect_one(3, 2, ts(2, 2, Direction::N)).unwrap();
        prop_assert_eq!(ti_length_stats(&spec, 50, RngSeed(seed)).unwrap(), ti_length_stats(&spec, 50, RngSeed(seed)).unwrap());
        prop_assert_eq!(
            srw_hitting_estimate(&spec, Site::new(1, 1), 50, RngSeed(seed)).unwrap(),
            srw_hitting_estimate(&spec, Site::new(1, 1), 50, RngSeed(seed)).unwrap()
        );
    }
}
