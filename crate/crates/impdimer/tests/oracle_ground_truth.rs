use impdimer::counts::{count_one_impurity, impurity_distribution};
use impdimer::lattice::*;
use impdimer::linalg::{abs_integer, dirichlet_matrix};
use impdimer::oracle::*;
use num_bigint::BigInt;

fn with_terminal(shape: Shape, slot: Slot) -> GridSpec {
    GridSpec::new(
        shape,
        1,
        vec![TerminalSite {
            site: slot.site,
            dir: slot.dir,
        }],
    )
    .unwrap()
}

/// Every single-terminal placement on the small instances of the one-impurity check.
fn one_terminal_instances() -> Vec<GridSpec> {
    let shapes: Vec<Shape> = [
        Shape::Rect {
            width: 2,
            height: 2,
        },
        Shape::Rect {
            width: 2,
            height: 3,
        },
    ]
    .into_iter()
    .chain((1..=5).map(|len| Shape::Chain { len }))
    .collect();
    let mut out = Vec::new();
    for shape in shapes {
        let probe = GridSpec {
            shape,
            k: 1,
            terminals: vec![],
        };
        for slot in probe.slots() {
            out.push(with_terminal(shape, slot));
        }
    }
    out
}

#[test]
fn per_site_counts_share_one_integer_multiplicity() {
    for spec in one_terminal_instances() {
        let g = build_superposition(&spec).unwrap();
        let table = count_matchings_by_impurity(&g).unwrap();
        let by_site = table.by_primal();
        let mut multiplicity: Option<BigInt> = None;
        for s in spec.sites() {
            let m = count_one_impurity(&spec, s).unwrap().value;
            let got = BigInt::from(by_site.get(&vec![Label::Primal(s)]).copied().unwrap_or(0));
            assert!(m > BigInt::from(0));
            assert_eq!(
                &got % &m,
                BigInt::from(0),
                "{} {:?} at {s}",
                spec.shape,
                spec.terminals
            );
            let q = &got / &m;
            match &multiplicity {
                None => multiplicity = Some(q),
                Some(prev) => assert_eq!(prev, &q, "{} {:?} at {s}", spec.shape, spec.terminals),
            }
        }
        assert_eq!(multiplicity, Some(BigInt::from(4)));
    }
}

#[test]
fn grand_total_fixes_the_normalization() {
    for spec in one_terminal_instances() {
        let g = build_superposition(&spec).unwrap();
        let table = count_matchings_by_impurity(&g).unwrap();
        let dist = impurity_distribution(&spec).unwrap();
        let sum_m: BigInt = dist.rows.iter().map(|r| &r.weight).sum();
        assert_eq!(
            BigInt::from(table.total),
            &sum_m * 4 + &dist.det_k * 2,
            "{} {:?}",
            spec.shape,
            spec.terminals
        );
        assert_ne!(BigInt::from(table.total), sum_m.clone());
        let terminal_matchings: u128 = table
            .by_primal()
            .iter()
            .filter(|(k, _)| matches!(k[0], Label::Terminal(_)))
            .map(|(_, v)| *v)
            .sum();
        assert_eq!(BigInt::from(terminal_matchings), &dist.det_k * 2);
    }
}

#[test]
fn oracle_tables_are_self_consistent() {
    for spec in one_terminal_instances().into_iter().take(12) {
        let g = build_superposition(&spec).unwrap();
        let table = count_matchings_by_impurity(&g).unwrap();
        assert_eq!(table.entries.values().sum::<u128>(), table.total);
        let mut streamed = 0u128;
        for m in enumerate_matchings(&g) {
            assert_eq!(m.impurities(&g).len(), spec.k);
            streamed += 1;
        }
        assert_eq!(streamed, table.total);
    }
}

#[test]
fn every_matching_has_k_impurities_for_k_two() {
    let spec = GridSpec::new(
        Shape::Chain { len: 4 },
        2,
        vec![
            TerminalSite {
                site: Site::new(1, 1),
                dir: Direction::W,
            },
            TerminalSite {
                site: Site::new(2, 1),
                dir: Direction::N,
            },
            TerminalSite {
                site: Site::new(4, 1),
                dir: Direction::E,
            },
        ],
    )
    .unwrap();
    let g = build_superposition(&spec).unwrap();
    let mut count = 0;
    for m in enumerate_matchings(&g) {
        assert_eq!(m.impurities(&g).len(), 2);
        count += 1;
    }
    assert!(count > 0);
}

#[test]
fn matrix_tree_by_deletion_contraction() {
    let mut specs = vec![
        GridSpec::rect_one(
            2,
            2,
            TerminalSite {
                site: Site::new(1, 1),
                dir: Direction::S,
            },
        )
        .unwrap(),
        GridSpec::rect_one(
            1,
            2,
            TerminalSite {
                site: Site::new(1, 1),
                dir: Direction::S,
            },
        )
        .unwrap(),
        GridSpec::rect_one(
            2,
            3,
            TerminalSite {
                site: Site::new(2, 3),
                dir: Direction::N,
            },
        )
        .unwrap(),
    ];
    specs.extend((1..=5).map(|len| {
        with_terminal(
            Shape::Chain { len },
            Slot {
                site: Site::new(1, 1),
                dir: Direction::W,
            },
        )
    }));
    for spec in specs {
        let g = build_rooted(&spec, RootedVariant::TerminalsIdentified).unwrap();
        let trees = count_spanning_trees(&g).unwrap();
        let det = abs_integer(&dirichlet_matrix(&build_g1(&spec).unwrap()).det().unwrap()).unwrap();
        assert_eq!(BigInt::from(trees), det, "{}", spec.shape);
        if spec.shape
            == (Shape::Rect {
                width: 2,
                height: 2,
            })
        {
            assert_eq!(trees, 192);
        }
    }
}
