use impdimer::counts::{count_one_impurity, Green};
use impdimer::grove::*;
use impdimer::lattice::{build_slotted, Direction, GridSpec, Role, Site, TerminalSite};
use impdimer::linalg::{rat, RationalScalar};
use impdimer::oracle::{enumerate_groves, enumerate_groves_by_partition};
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn ts(x: usize, y: usize, dir: Direction) -> TerminalSite {
    TerminalSite {
        site: Site::new(x, y),
        dir,
    }
}

#[test]
fn resolvent_identities_up_to_six_by_six() {
    for w in 1..=6 {
        for h in 1..=6 {
            let spec = GridSpec::rect_one(w, h, ts(1, 1, Direction::S)).unwrap();
            let green = Green::new(&spec).unwrap();
            let k = green.matrix();
            let det_k = k.det().unwrap();
            let inv = k.inverse().unwrap();
            let n = spec.primal_count();
            for x in 0..n {
                let kx = perturbed_matrix(k, x).unwrap();
                let det_kx = kx.det().unwrap();
                let col = kx.inverse_column(x).unwrap();
                let gxx = inv.at(x, x).clone();
                let one_plus = rat(1) + &gxx;
                assert_eq!(col[x], &gxx / &one_plus, "(3.3) {w}x{h} x={x}");
                for t in 0..n {
                    let gxt = inv.at(x, t).clone();
                    assert_eq!(col[t], &gxt / &one_plus, "(3.4) {w}x{h} x={x} t={t}");
                    assert_eq!(
                        (&col[t] * &det_kx).abs(),
                        (&gxt * &det_k).abs(),
                        "cancellation {w}x{h} x={x} t={t}"
                    );
                }
                assert_eq!(&one_plus, &(&det_kx / &det_k), "(3.6) {w}x{h} x={x}");
                let rest: Vec<usize> = (0..n).filter(|&v| v != x).collect();
                let minor = if rest.is_empty() {
                    rat(1)
                } else {
                    k.submatrix(&rest, &rest).unwrap().det().unwrap()
                };
                assert_eq!(det_kx, &det_k + minor, "(3.5) {w}x{h} x={x}");
            }
        }
    }
}

#[test]
fn perturbation_examples() {
    let spec = GridSpec::rect_one(2, 2, ts(1, 1, Direction::S)).unwrap();
    let k = Green::new(&spec).unwrap().matrix().clone();
    let kx = perturbed_matrix(&k, 0).unwrap();
    let diag: Vec<RationalScalar> = (0..4).map(|i| kx.at(i, i).clone()).collect();
    assert_eq!(diag, vec![rat(5), rat(4), rat(4), rat(4)]);
    assert!(perturbed_matrix(&k, 9).is_err());
}

/// Non-crossing partitions of `n` circular nodes with blocks of size at most two.
fn small_block_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    fn rec(v: usize, n: usize, blocks: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if v == n {
            out.push(blocks.clone());
            return;
        }
        blocks.push(vec![v]);
        rec(v + 1, n, blocks, out);
        blocks.pop();
        for i in 0..blocks.len() {
            if blocks[i].len() == 1 {
                blocks[i].push(v);
                rec(v + 1, n, blocks, out);
                blocks[i].pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(0, n, &mut Vec::new(), &mut out);
    out
}

fn slot_graph(spec: &GridSpec, slots: &[usize]) -> CircularGraph {
    let nodes: Vec<NodeSpec> = slots.iter().map(|&s| NodeSpec::Slots(vec![s])).collect();
    slot_circular(spec, &nodes).unwrap()
}

fn test_graphs() -> Vec<(String, CircularGraph)> {
    let s22 = GridSpec::rect_one(2, 2, ts(1, 1, Direction::S)).unwrap();
    let s23 = GridSpec::rect_one(2, 3, ts(1, 1, Direction::S)).unwrap();
    let s33 = GridSpec::rect_one(3, 3, ts(1, 1, Direction::S)).unwrap();
    let wheel_edges: Vec<(usize, usize, u64)> = (0..5)
        .map(|i| (i, (i + 1) % 5, 1))
        .chain((0..5).map(|i| (i, 5, 1 + i as u64 % 2)))
        .collect();
    vec![
        (
            "2x2 six nodes".into(),
            slot_graph(&s22, &[0, 1, 2, 4, 5, 6]),
        ),
        (
            "2x2 all slots".into(),
            slot_graph(&s22, &[0, 1, 2, 3, 4, 5, 6, 7]),
        ),
        (
            "2x3 six nodes".into(),
            slot_graph(&s23, &[0, 2, 3, 5, 6, 8]),
        ),
        ("3x3 three nodes".into(), slot_graph(&s33, &[1, 5, 9])),
        (
            "weighted wheel".into(),
            CircularGraph::from_edges(6, &wheel_edges, &[0, 1, 2, 3, 4]).unwrap(),
        ),
    ]
}

#[test]
fn bipartite_grove_determinant_matches_enumeration() {
    let mut compared = 0;
    for (name, c) in test_graphs() {
        assert!(c.vertex_count() <= 12, "{name}");
        let census = enumerate_groves_by_partition(&c).unwrap();
        for blocks in small_block_partitions(c.node_count()) {
            let Ok(p) = PartitionSpec::auto(c.node_count(), blocks.clone()) else {
                continue;
            };
            let z = grove_count_bipartite(&c, &p).unwrap();
            let listed = census
                .get(&impdimer::oracle::canonical_partition(&blocks))
                .copied()
                .unwrap_or(0);
            assert_eq!(
                z,
                RationalScalar::from_integer(listed.into()),
                "{name} {blocks:?}"
            );
            compared += 1;
        }
    }
    assert!(compared >= 10, "only {compared} partitions compared");
}

#[test]
fn singleton_partition_is_det_k() {
    for (name, c) in test_graphs() {
        let z = grove_count_bipartite(&c, &PartitionSpec::singletons(c.node_count())).unwrap();
        let interior: Vec<usize> = c.interior().collect();
        let det = c
            .laplacian()
            .submatrix(&interior, &interior)
            .unwrap()
            .det()
            .unwrap()
            .abs();
        assert_eq!(z, det, "{name}");
        let singles: Vec<Vec<usize>> = c.nodes().map(|v| vec![v]).collect();
        assert_eq!(
            z,
            RationalScalar::from_integer(enumerate_groves(&c, &singles).unwrap().into()),
            "{name}"
        );
    }
}

#[test]
fn crossing_partitions_have_no_groves() {
    for (name, c) in test_graphs() {
        if c.node_count() < 4 {
            continue;
        }
        let census = enumerate_groves_by_partition(&c).unwrap();
        for blocks in census.keys() {
            assert!(
                is_noncrossing(blocks, c.node_count()),
                "{name}: crossing {blocks:?} realised"
            );
        }
        let mut crossing: Vec<Vec<usize>> = vec![vec![0, 2], vec![1, 3]];
        crossing.extend((4..c.node_count()).map(|v| vec![v]));
        assert_eq!(enumerate_groves(&c, &crossing).unwrap(), 0);
        assert!(PartitionSpec::auto(c.node_count(), crossing).is_err());
    }
}

#[test]
fn one_impurity_construction_gives_cofactor() {
    for (w, h, t) in [
        (2, 2, ts(1, 1, Direction::S)),
        (3, 2, ts(2, 2, Direction::N)),
        (3, 3, ts(3, 2, Direction::E)),
    ] {
        let spec = GridSpec::rect_one(w, h, t).unwrap();
        let term = spec.terminal_slots()[0];
        let others: Vec<usize> = (0..spec.slots().len()).filter(|&s| s != term).collect();
        for x in spec.sites() {
            let c = slot_circular(
                &spec,
                &[
                    NodeSpec::Slots(vec![term]),
                    NodeSpec::Attached(x),
                    NodeSpec::Slots(others.clone()),
                ],
            )
            .unwrap();
            let p = PartitionSpec::auto(3, vec![vec![0, 1], vec![2]]).unwrap();
            let z = grove_count_bipartite(&c, &p).unwrap();
            assert_eq!(
                z,
                RationalScalar::from_integer(count_one_impurity(&spec, x).unwrap().value),
                "{w}x{h} {x}"
            );
        }
    }
}

#[test]
fn assembled_slotted_graph_with_merged_boundary() {
    let spec = GridSpec::rect_one(2, 2, ts(1, 1, Direction::S)).unwrap();
    let g = build_slotted(&spec).unwrap();
    let boundary = g.with_role(Role::Boundary);
    let term = g.with_role(Role::Terminal)[0];
    let c = assemble_circular(&g, std::slice::from_ref(&boundary), &[term, boundary[0]]).unwrap();
    assert_eq!(c.node_count(), 2);
    let singles = grove_count_bipartite(&c, &PartitionSpec::singletons(2)).unwrap();
    assert_eq!(singles, rat(192));
    let joined =
        grove_count_bipartite(&c, &PartitionSpec::auto(2, vec![vec![0, 1]]).unwrap()).unwrap();
    assert_eq!(
        joined,
        RationalScalar::from_integer(enumerate_groves(&c, &[vec![0, 1]]).unwrap().into())
    );
    let m_tt = count_one_impurity(&spec, Site::new(1, 1)).unwrap().value;
    assert_eq!(joined, rat(192) - RationalScalar::from_integer(m_tt));
}

#[test]
fn assembly_on_a_path() {
    let spec = GridSpec::new(
        impdimer::lattice::Shape::Chain { len: 3 },
        1,
        vec![ts(1, 1, Direction::N)],
    )
    .unwrap();
    let g = impdimer::lattice::build_g1(&spec).unwrap();
    let ends = [
        g.primal(Site::new(1, 1)).unwrap(),
        g.primal(Site::new(3, 1)).unwrap(),
    ];
    let c = assemble_circular(&g, &[], &ends).unwrap();
    let interior: Vec<usize> = c.interior().collect();
    assert_eq!(interior.len(), 1);
    assert_eq!(
        c.laplacian()
            .submatrix(&interior, &interior)
            .unwrap()
            .at(0, 0),
        &rat(2)
    );
    let l = response_matrix(&c).unwrap();
    assert_eq!(l.at(0, 1).abs(), impdimer::linalg::ratio(1, 2));
    assert!(assemble_circular(&g, &[], &[]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn response_matrix_is_symmetric_with_zero_row_sums(
        weights in proptest::collection::vec(1u64..5, 11),
        node_mask in 1u8..32,
    ) {
        let spokes: Vec<(usize, usize, u64)> = (0..5).map(|i| (i, 5 + i % 3, weights[i])).collect();
        let inner = [(5usize, 6usize), (6, 7), (5, 7)];
        let mut edges = spokes;
        edges.extend(inner.iter().enumerate().map(|(i, &(u, v))| (u, v, weights[5 + i])));
        edges.extend((0..3).map(|i| (i, i + 1, weights[8 + i])));
        let nodes: Vec<usize> = (0..5).filter(|i| node_mask & (1 << i) != 0).collect();
        let c = CircularGraph::from_edges(8, &edges, &nodes).unwrap();
        let l = response_matrix(&c).unwrap();
        let p = c.node_count();
        for i in 0..p {
            let mut row = RationalScalar::zero();
            for j in 0..p {
                prop_assert_eq!(l.at(i, j), l.at(j, i));
                row += l.at(i, j);
            }
            prop_assert!(row.is_zero());
        }
    }
}
