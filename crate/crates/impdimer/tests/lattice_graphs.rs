use impdimer::lattice::*;
use proptest::prelude::*;

fn rect_with_slot(w: usize, h: usize, pick: usize) -> GridSpec {
    let probe = GridSpec {
        shape: Shape::Rect {
            width: w,
            height: h,
        },
        k: 1,
        terminals: vec![],
    };
    let slots = probe.slots();
    let s = slots[pick % slots.len()];
    GridSpec::rect_one(
        w,
        h,
        TerminalSite {
            site: s.site,
            dir: s.dir,
        },
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rooted_graph_gives_degree_four(w in 1usize..7, h in 1usize..7, pick in 0usize..64) {
        let spec = rect_with_slot(w, h, pick);
        let g = build_rooted(&spec, RootedVariant::TerminalsIdentified).unwrap();
        for v in g.with_role(Role::Primal) {
            prop_assert_eq!(g.degree(v), 4);
        }
        let tagged: Vec<&Edge> = g.edges.iter().filter(|e| e.terminal.is_some()).collect();
        prop_assert_eq!(tagged.len(), 1);
    }

    #[test]
    fn slot_cycle_and_primal_edges(w in 1usize..8, h in 1usize..8) {
        let spec = rect_with_slot(w, h, 0);
        prop_assert_eq!(spec.slots().len(), 2 * (w + h));
        let g1 = build_g1(&spec).unwrap();
        prop_assert_eq!(g1.edge_count(), w * (h - 1) + h * (w - 1));
        prop_assert_eq!(g1.vertex_count(), w * h);
    }

    #[test]
    fn superposition_has_four_diagonals_per_site(w in 1usize..5, h in 1usize..5, pick in 0usize..32) {
        let spec = rect_with_slot(w, h, pick);
        let g = build_superposition(&spec).unwrap();
        prop_assert_eq!(g.vertex_count() % 2, 0);
        for s in spec.sites() {
            let v = g.primal(s).unwrap();
            let diagonals = g.adjacent(v).iter().filter(|&&(_, e)| g.edges[e].kind == EdgeKind::DiagonalImpurity).count();
            prop_assert_eq!(diagonals, 4);
        }
        let t = g.find(Label::Terminal(0)).unwrap();
        let diagonals = g.adjacent(t).iter().filter(|&&(_, e)| g.edges[e].kind == EdgeKind::DiagonalImpurity).count();
        prop_assert_eq!(diagonals, 2);
    }

    #[test]
    fn exports_are_deterministic(w in 1usize..5, h in 1usize..5, pick in 0usize..32) {
        let spec = rect_with_slot(w, h, pick);
        let a = build_superposition(&spec).unwrap();
        let b = build_superposition(&spec).unwrap();
        prop_assert_eq!(export_dot(&a), export_dot(&b));
        prop_assert_eq!(a.to_json().to_string(), b.to_json().to_string());
        prop_assert_eq!(&a.to_json()["schema"], &serde_json::json!(1));
    }
}

#[test]
fn invalid_specs_are_rejected() {
    let t = TerminalSite {
        site: Site::new(2, 2),
        dir: Direction::N,
    };
    assert!(GridSpec::rect_one(3, 3, t).is_err());
    assert!(GridSpec::rect_one(
        0,
        3,
        TerminalSite {
            site: Site::new(1, 1),
            dir: Direction::S
        }
    )
    .is_err());
    let two = vec![
        TerminalSite {
            site: Site::new(1, 1),
            dir: Direction::S,
        },
        TerminalSite {
            site: Site::new(2, 1),
            dir: Direction::S,
        },
    ];
    assert!(GridSpec::new(
        Shape::Rect {
            width: 3,
            height: 3
        },
        1,
        two
    )
    .is_err());
}
