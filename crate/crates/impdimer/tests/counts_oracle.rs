use impdimer::counts::*;
use impdimer::lattice::{
    build_superposition, Direction, DualPos, GridSpec, Label, Shape, Site, TerminalSite,
};
use impdimer::oracle::{
    count_matchings_filtered, enumerate_constrained_forests, ImpurityTable, Placement,
};
use num_bigint::BigInt;

fn ts(x: usize, y: usize, dir: Direction) -> TerminalSite {
    TerminalSite {
        site: Site::new(x, y),
        dir,
    }
}

fn rect(w: usize, h: usize, terms: Vec<TerminalSite>) -> GridSpec {
    GridSpec::new(
        Shape::Rect {
            width: w,
            height: h,
        },
        terms.len().div_ceil(2),
        terms,
    )
    .unwrap()
}

/// Matching counts keyed by impurity placement, restricted to primal endpoints in `sites`.
fn matchings_at(spec: &GridSpec, sites: &[Site]) -> ImpurityTable {
    let g = build_superposition(spec).unwrap();
    count_matchings_filtered(&g, &|p: &Placement| match &p.primal {
        Label::Primal(s) => sites.contains(s),
        _ => false,
    })
    .unwrap()
}

fn lookup(table: &ImpurityTable, imps: &[Impurity]) -> BigInt {
    let mut key: Vec<Placement> = imps
        .iter()
        .map(|i| Placement {
            primal: Label::Primal(i.site),
            dual: i.dual,
        })
        .collect();
    key.sort();
    BigInt::from(table.get(&key))
}

fn boundary_duals(spec: &GridSpec, s: Site) -> Vec<DualPos> {
    spec.corners(s)
        .into_iter()
        .filter(|&d| spec.is_dual_boundary(d))
        .collect()
}

fn four_by_five_right_terminals() -> GridSpec {
    rect(
        4,
        5,
        vec![
            ts(4, 5, Direction::E),
            ts(4, 3, Direction::E),
            ts(4, 1, Direction::E),
        ],
    )
}

#[test]
fn two_boundary_matches_forest_and_matching_oracles() {
    let spec = four_by_five_right_terminals();
    let (a, b) = (Site::new(1, 5), Site::new(1, 2));
    let det = count_two_boundary(&spec, a, b).unwrap().value;
    let forests =
        enumerate_constrained_forests(&spec, &k_boundary_pattern(&spec, &[a, b]).unwrap()).unwrap();
    assert_eq!(det, BigInt::from(forests));
    assert_eq!(det, hitting_matrix_count(&spec, a, b).unwrap().value);
    assert_eq!(det, count_k_boundary_grove(&spec, &[a, b]).unwrap().value);
    let table = matchings_at(&spec, &[a, b]);
    for da in boundary_duals(&spec, a) {
        for db in boundary_duals(&spec, b) {
            let imps = [
                Impurity::new(&spec, a, da).unwrap(),
                Impurity::new(&spec, b, db).unwrap(),
            ];
            assert_eq!(lookup(&table, &imps), det, "duals {da} {db}");
        }
    }
}

#[test]
fn two_boundary_all_pairs_small_grid() {
    let spec = rect(
        3,
        3,
        vec![
            ts(3, 3, Direction::E),
            ts(3, 2, Direction::E),
            ts(3, 1, Direction::E),
        ],
    );
    let free: Vec<Site> = spec
        .sites()
        .into_iter()
        .filter(|&s| spec.is_boundary(s) && s.x != 3)
        .collect();
    let table = matchings_at(&spec, &free);
    for &a in &free {
        for &b in &free {
            if a == b {
                continue;
            }
            let det = count_two_boundary(&spec, a, b).unwrap().value;
            assert_eq!(det, count_two_boundary(&spec, b, a).unwrap().value);
            let imps = [
                Impurity::on_boundary(&spec, a).unwrap(),
                Impurity::on_boundary(&spec, b).unwrap(),
            ];
            assert_eq!(lookup(&table, &imps), det, "{a} {b}");
        }
    }
}

fn three_by_six_right_terminals() -> GridSpec {
    rect(
        3,
        6,
        vec![
            ts(3, 1, Direction::E),
            ts(3, 3, Direction::E),
            ts(3, 6, Direction::E),
        ],
    )
}

#[test]
fn near_boundary_matches_forest_and_matching_oracles() {
    let spec = three_by_six_right_terminals();
    let a = Impurity::new(&spec, Site::new(1, 5), DualPos::new(1, 4)).unwrap();
    let b = Impurity::new(&spec, Site::new(1, 1), DualPos::new(0, 0)).unwrap();
    let r = count_two_near_boundary(&spec, a, b).unwrap();
    let fa = enumerate_constrained_forests(
        &spec,
        &k_boundary_pattern(&spec, &[a.site, b.site]).unwrap(),
    )
    .unwrap();
    let fb =
        enumerate_constrained_forests(&spec, &near_boundary_pattern(&spec, a, b.site).unwrap())
            .unwrap();
    assert_eq!(r.part("A").unwrap(), &BigInt::from(fa));
    assert_eq!(r.part("B_a").unwrap(), &BigInt::from(fb));
    assert_eq!(r.value, BigInt::from(fa + fb));
    let table = matchings_at(&spec, &[a.site, b.site]);
    assert_eq!(lookup(&table, &[a, b]), r.value);
}

#[test]
fn near_boundary_mirror_and_double() {
    let spec = rect(
        3,
        4,
        vec![
            ts(3, 4, Direction::E),
            ts(3, 2, Direction::E),
            ts(3, 1, Direction::E),
        ],
    );
    let (sa, sb) = (Site::new(1, 4), Site::new(1, 1));
    let table = matchings_at(&spec, &[sa, sb]);
    for da in spec.corners(sa) {
        for db in spec.corners(sb) {
            let a = Impurity::new(&spec, sa, da).unwrap();
            let b = Impurity::new(&spec, sb, db).unwrap();
            let r = count_two_near_boundary(&spec, a, b).unwrap();
            assert_eq!(lookup(&table, &[a, b]), r.value, "duals {da} {db}");
        }
    }
}

fn five_terminal_layouts() -> [GridSpec; 2] {
    [
        rect(
            4,
            4,
            vec![
                ts(4, 1, Direction::E),
                ts(4, 2, Direction::E),
                ts(4, 3, Direction::E),
                ts(4, 4, Direction::E),
                ts(3, 4, Direction::N),
            ],
        ),
        rect(
            5,
            5,
            vec![
                ts(2, 1, Direction::S),
                ts(3, 1, Direction::S),
                ts(5, 3, Direction::E),
                ts(5, 4, Direction::E),
                ts(5, 5, Direction::N),
            ],
        ),
    ]
}

#[test]
fn three_boundary_sweep_matches_matchings() {
    let mut nonzero = Vec::new();
    for spec in five_terminal_layouts() {
        let free: Vec<Site> = spec
            .sites()
            .into_iter()
            .filter(|&s| spec.is_boundary(s) && spec.terminals.iter().all(|t| t.site != s))
            .collect();
        let g = build_superposition(&spec).unwrap();
        let table = count_matchings_filtered(&g, &|p: &Placement| {
            matches!(&p.primal, Label::Primal(s) if free.contains(s))
                && spec.is_dual_boundary(p.dual)
        })
        .unwrap();
        let mut checked = 0;
        let mut found = 0;
        for &x in &free {
            for &y in &free {
                for &z in &free {
                    let Ok(r) = count_k_boundary(&spec, &[x, y, z]) else {
                        continue;
                    };
                    let imps: Vec<Impurity> = [x, y, z]
                        .iter()
                        .map(|&s| Impurity::on_boundary(&spec, s).unwrap())
                        .collect();
                    assert_eq!(lookup(&table, &imps), r.value, "{x} {y} {z}");
                    checked += 1;
                    found += usize::from(r.value != BigInt::from(0));
                }
            }
        }
        assert!(checked > 0);
        nonzero.push(found);
    }
    assert_eq!(
        nonzero[0], 0,
        "five nested paths cannot cross a four-vertex cut"
    );
    assert!(nonzero[1] > 0);
}

#[test]
fn out_of_domain_boundary_configurations_are_rejected() {
    let spec = rect(
        4,
        4,
        vec![
            ts(1, 1, Direction::S),
            ts(2, 1, Direction::S),
            ts(3, 1, Direction::S),
            ts(4, 1, Direction::S),
            ts(4, 3, Direction::E),
        ],
    );
    let on_terminal = [Site::new(4, 1), Site::new(4, 3), Site::new(1, 4)];
    assert!(count_k_boundary(&spec, &on_terminal).is_err());
    assert!(count_k_boundary_grove(&spec, &on_terminal).is_err());
    let interleaved = [Site::new(4, 2), Site::new(2, 4), Site::new(1, 2)];
    assert!(count_k_boundary(&spec, &interleaved).is_err());
    let two = rect(
        3,
        3,
        vec![
            ts(3, 3, Direction::E),
            ts(3, 2, Direction::E),
            ts(3, 1, Direction::E),
        ],
    );
    assert!(count_two_boundary(&two, Site::new(1, 3), Site::new(3, 3)).is_err());
    assert!(hitting_matrix_count(&two, Site::new(1, 3), Site::new(3, 3)).is_err());
}

#[test]
fn three_impurities_on_five_by_five() {
    let spec = rect(
        5,
        5,
        vec![
            ts(2, 1, Direction::S),
            ts(3, 1, Direction::S),
            ts(5, 3, Direction::E),
            ts(5, 4, Direction::E),
            ts(5, 5, Direction::N),
        ],
    );
    let a = [Site::new(4, 5), Site::new(1, 3), Site::new(1, 1)];
    let det = count_k_boundary(&spec, &a).unwrap().value;
    assert_eq!(det, BigInt::from(114_688));
    let forests =
        enumerate_constrained_forests(&spec, &k_boundary_pattern(&spec, &a).unwrap()).unwrap();
    assert_eq!(det, BigInt::from(forests));
    assert_eq!(det, count_k_boundary_grove(&spec, &a).unwrap().value);
    let reversed = [a[2], a[1], a[0]];
    assert_eq!(det, count_k_boundary(&spec, &reversed).unwrap().value);
    let table = matchings_at(&spec, &a);
    for d0 in boundary_duals(&spec, a[0]) {
        for d2 in boundary_duals(&spec, a[2]) {
            let imps = [
                Impurity::new(&spec, a[0], d0).unwrap(),
                Impurity::on_boundary(&spec, a[1]).unwrap(),
                Impurity::new(&spec, a[2], d2).unwrap(),
            ];
            assert_eq!(lookup(&table, &imps), det);
        }
    }
}

fn chain(len: usize, terms: Vec<TerminalSite>) -> GridSpec {
    GridSpec::new(Shape::Chain { len }, terms.len().div_ceil(2), terms).unwrap()
}

#[test]
fn chain_seven_two_impurities() {
    let spec = chain(
        7,
        vec![
            ts(1, 1, Direction::N),
            ts(4, 1, Direction::N),
            ts(7, 1, Direction::N),
        ],
    );
    let a = Impurity::new(&spec, Site::new(2, 1), DualPos::new(2, 1)).unwrap();
    let b = Impurity::new(&spec, Site::new(6, 1), DualPos::new(5, 0)).unwrap();
    let config = ImpurityConfig::new(vec![a, b]).unwrap();
    let r = count_chain(&spec, &config).unwrap();
    assert_eq!(r.value, BigInt::from(28));
    assert_eq!(r.part("C_a"), Some(&BigInt::from(4)));
    let table = matchings_at(&spec, &[a.site, b.site]);
    assert_eq!(lookup(&table, &[a, b]), r.value);
    for (name, p) in chain_patterns(&spec, &config).unwrap() {
        assert_eq!(
            r.part(&name).unwrap(),
            &BigInt::from(enumerate_constrained_forests(&spec, &p).unwrap())
        );
    }
}

#[test]
fn chain_two_impurities_exhaustive() {
    for len in 3..=5 {
        let base = chain(len, vec![ts(1, 1, Direction::N)]);
        let slots = base.slots();
        let n = slots.len();
        for i in 0..n {
            for j in i + 1..n {
                for l in j + 1..n {
                    let terms: Vec<TerminalSite> = [i, j, l]
                        .iter()
                        .map(|&s| TerminalSite {
                            site: slots[s].site,
                            dir: slots[s].dir,
                        })
                        .collect();
                    let Ok(spec) = GridSpec::new(Shape::Chain { len }, 2, terms.clone()) else {
                        continue;
                    };
                    let both = terms.iter().any(|t| t.dir == Direction::N)
                        && terms.iter().any(|t| t.dir == Direction::S);
                    let sites: Vec<Site> = spec
                        .sites()
                        .into_iter()
                        .filter(|s| terms.iter().all(|t| t.site != *s))
                        .collect();
                    let table = matchings_at(&spec, &sites);
                    for &sa in &sites {
                        for &sb in &sites {
                            if sa >= sb {
                                continue;
                            }
                            for da in spec.corners(sa) {
                                for db in spec.corners(sb) {
                                    let a = Impurity::new(&spec, sa, da).unwrap();
                                    let b = Impurity::new(&spec, sb, db).unwrap();
                                    let config = ImpurityConfig::new(vec![a, b]).unwrap();
                                    let r = count_chain(&spec, &config);
                                    if both {
                                        assert!(r.is_err());
                                        continue;
                                    }
                                    assert_eq!(
                                        r.unwrap().value,
                                        lookup(&table, &[a, b]),
                                        "len {len} {terms:?} {a:?} {b:?}"
                                    );
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn chain_one_impurity_reduces_to_cofactor() {
    let spec = chain(6, vec![ts(3, 1, Direction::S)]);
    for s in spec.sites() {
        let imp = Impurity::on_boundary(&spec, s).unwrap();
        let r = count_chain(&spec, &ImpurityConfig::new(vec![imp]).unwrap()).unwrap();
        assert_eq!(r.value, count_one_impurity(&spec, s).unwrap().value);
    }
}

#[test]
fn one_impurity_oracle_multiplicity() {
    for spec in [
        GridSpec::rect_one(2, 2, ts(1, 1, Direction::S)).unwrap(),
        GridSpec::rect_one(2, 3, ts(2, 2, Direction::E)).unwrap(),
        chain(4, vec![ts(2, 1, Direction::N)]),
    ] {
        let g = build_superposition(&spec).unwrap();
        let table = impdimer::oracle::count_matchings_by_impurity(&g).unwrap();
        let by_site = table.by_primal();
        let dist = impurity_distribution(&spec).unwrap();
        for row in &dist.rows {
            let got = by_site
                .get(&vec![Label::Primal(row.site)])
                .copied()
                .unwrap_or(0);
            assert_eq!(BigInt::from(got), &row.weight * 4);
        }
        assert_eq!(BigInt::from(table.total), dist.total_matchings);
    }
}
