//! Acceptance suite: fourteen criteria, each checked against an independent oracle.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::Instant;

use impdimer::asymptotics::{
    chain_asymptotics, chain_lambda, concentration_profile, decay_rates, expected_ti_length,
    tail_mass_with, Lattice, TailMethod,
};
use impdimer::counts::{
    count_k_boundary, count_one_impurity, count_two_boundary, count_two_near_boundary,
    hitting_matrix_count, impurity_distribution, k_boundary_pattern, near_boundary_pattern, Green,
    Impurity,
};
use impdimer::grove::{
    grove_count_bipartite, is_noncrossing, perturbed_matrix, slot_circular, CircularGraph,
    NodeSpec, PartitionSpec,
};
use impdimer::lattice::{
    build_g1, build_rooted, build_superposition, Direction, DualPos, GridSpec, Label,
    RootedVariant, Shape, Site, TerminalSite,
};
use impdimer::linalg::{abs_integer, dirichlet_matrix, rat, RationalScalar};
use impdimer::oracle::{
    canonical_partition, count_matchings_by_impurity, count_spanning_trees,
    enumerate_constrained_forests, enumerate_groves, enumerate_groves_by_partition,
    list_spanning_trees,
};
use impdimer::walks::{
    lerw, srw_hitting_estimate, ti_length_stats, tree_histogram, uniformity_test, wilson_samples,
    RngSeed,
};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::json;

use crate::args::Suite;
use crate::report::{Provenance, Report};
use crate::run_line;

/// Outcome of one criterion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    /// Criterion number, 1 to 14.
    pub id: u8,
    /// Short title.
    pub title: &'static str,
    /// Whether the criterion holds.
    pub passed: bool,
    /// Measured values.
    pub detail: String,
}

/// Criterion numbers and titles.
pub const CRITERIA: [(u8, &str); 14] = [
    (1, "one-impurity counts proportional to |K^-1(x,t) det K|"),
    (2, "normalization of the one-impurity distribution"),
    (
        3,
        "two boundary impurities: determinant, forests and hitting route",
    ),
    (4, "near-boundary impurities: A + B against forests"),
    (5, "three boundary impurities: determinant against forests"),
    (6, "resolvent identities and cofactor cancellation"),
    (7, "matrix-tree theorem by deletion-contraction"),
    (8, "grove determinant against grove enumeration"),
    (9, "Wilson sampler uniformity and terminal component"),
    (10, "simple random walk hitting probabilities"),
    (11, "chain decay ratio 1/(2+sqrt 3)"),
    (12, "logarithmic growth slope of E[l_T]"),
    (13, "concentration tails decrease"),
    (14, "byte-identical CLI output across runs"),
];

type Outcome = Result<(bool, String), String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn ts(x: usize, y: usize, dir: Direction) -> TerminalSite {
    TerminalSite {
        site: Site::new(x, y),
        dir,
    }
}

fn rect(w: usize, h: usize, terms: Vec<TerminalSite>) -> Result<GridSpec, String> {
    GridSpec::new(
        Shape::Rect {
            width: w,
            height: h,
        },
        terms.len().div_ceil(2),
        terms,
    )
    .map_err(err)
}

/// Every single-terminal placement on the given shapes.
fn one_terminal_instances(shapes: &[Shape]) -> Result<Vec<GridSpec>, String> {
    let mut out = Vec::new();
    for &shape in shapes {
        let probe = GridSpec {
            shape,
            k: 1,
            terminals: vec![],
        };
        for slot in probe.slots() {
            out.push(
                GridSpec::new(
                    shape,
                    1,
                    vec![TerminalSite {
                        site: slot.site,
                        dir: slot.dir,
                    }],
                )
                .map_err(err)?,
            );
        }
    }
    Ok(out)
}

fn criterion_shapes(suite: Suite) -> Vec<Shape> {
    let max_chain = if suite == Suite::Full { 5 } else { 4 };
    let mut shapes = vec![Shape::Rect {
        width: 2,
        height: 2,
    }];
    if suite == Suite::Full {
        shapes.push(Shape::Rect {
            width: 2,
            height: 3,
        });
    }
    shapes.extend((1..=max_chain).map(|len| Shape::Chain { len }));
    shapes
}

fn c1(suite: Suite) -> Outcome {
    let instances = one_terminal_instances(&criterion_shapes(suite))?;
    let mut multiplicities = BTreeSet::new();
    let mut sites = 0;
    for spec in &instances {
        let table =
            count_matchings_by_impurity(&build_superposition(spec).map_err(err)?).map_err(err)?;
        let by_site = table.by_primal();
        for s in spec.sites() {
            let m = count_one_impurity(spec, s).map_err(err)?.value;
            let got = BigInt::from(by_site.get(&vec![Label::Primal(s)]).copied().unwrap_or(0));
            if m.is_zero() || !(&got % &m).is_zero() {
                return Ok((
                    false,
                    format!(
                        "{} {:?}: {got} not a multiple of {m} at {s}",
                        spec.shape, spec.terminals
                    ),
                ));
            }
            multiplicities.insert(&got / &m);
            sites += 1;
        }
    }
    let list: Vec<String> = multiplicities.iter().map(|m| m.to_string()).collect();
    let pass = multiplicities.len() == 1;
    Ok((
        pass,
        format!(
            "{} instances, {sites} sites, multiplicity {{{}}}",
            instances.len(),
            list.join(",")
        ),
    ))
}

fn c2(suite: Suite) -> Outcome {
    let instances = one_terminal_instances(&criterion_shapes(suite))?;
    let (mut corner, mut per_site) = (0, 0);
    for spec in &instances {
        let table =
            count_matchings_by_impurity(&build_superposition(spec).map_err(err)?).map_err(err)?;
        let dist = impurity_distribution(spec).map_err(err)?;
        let sum_m: BigInt = dist.rows.iter().map(|r| &r.weight).sum();
        let total = BigInt::from(table.total);
        corner += (total == &sum_m * 4 + &dist.det_k * 2) as usize;
        per_site += (total == sum_m) as usize;
    }
    let n = instances.len();
    let reading = match (corner == n, per_site == n) {
        (true, _) => "4 sum A + 2 reading (corner form)",
        (false, true) => "per-site reading",
        _ => "neither reading",
    };
    Ok((
        corner == n || per_site == n,
        format!("{reading}: corner form {corner}/{n}, per-site {per_site}/{n}"),
    ))
}

fn four_by_five_right_terminals() -> Result<GridSpec, String> {
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

fn c3(_: Suite) -> Outcome {
    let spec = four_by_five_right_terminals()?;
    let (a, b) = (Site::new(1, 5), Site::new(1, 2));
    let det = count_two_boundary(&spec, a, b).map_err(err)?.value;
    let forests =
        enumerate_constrained_forests(&spec, &k_boundary_pattern(&spec, &[a, b]).map_err(err)?)
            .map_err(err)?;
    let hitting = hitting_matrix_count(&spec, a, b).map_err(err)?.value;
    let adjacent = count_two_boundary(&spec, Site::new(1, 1), Site::new(2, 1))
        .map_err(err)?
        .value;
    let pass = det == BigInt::from(forests) && det == hitting && adjacent.is_zero();
    Ok((
        pass,
        format!(
            "determinant {det}, forests {forests}, hitting {hitting}, adjacent pair {adjacent}"
        ),
    ))
}

fn c4(_: Suite) -> Outcome {
    let spec = rect(
        3,
        6,
        vec![
            ts(3, 1, Direction::E),
            ts(3, 3, Direction::E),
            ts(3, 6, Direction::E),
        ],
    )?;
    let a = Impurity::new(&spec, Site::new(1, 5), DualPos::new(1, 4)).map_err(err)?;
    let b = Impurity::new(&spec, Site::new(1, 1), DualPos::new(0, 0)).map_err(err)?;
    let r = count_two_near_boundary(&spec, a, b).map_err(err)?;
    let fa = enumerate_constrained_forests(
        &spec,
        &k_boundary_pattern(&spec, &[a.site, b.site]).map_err(err)?,
    )
    .map_err(err)?;
    let fb = enumerate_constrained_forests(
        &spec,
        &near_boundary_pattern(&spec, a, b.site).map_err(err)?,
    )
    .map_err(err)?;
    let (pa, pb) = (
        r.part("A").cloned().unwrap_or_default(),
        r.part("B_a").cloned().unwrap_or_default(),
    );
    let pass = pa == BigInt::from(fa) && pb == BigInt::from(fb) && r.value == BigInt::from(fa + fb);
    Ok((
        pass,
        format!("A {pa} vs {fa}, B {pb} vs {fb}, total {}", r.value),
    ))
}

fn c5(suite: Suite) -> Outcome {
    let narrow = rect(
        4,
        4,
        vec![
            ts(4, 1, Direction::E),
            ts(4, 2, Direction::E),
            ts(4, 3, Direction::E),
            ts(4, 4, Direction::E),
            ts(3, 4, Direction::N),
        ],
    )?;
    let wide = rect(
        5,
        5,
        vec![
            ts(2, 1, Direction::S),
            ts(3, 1, Direction::S),
            ts(5, 3, Direction::E),
            ts(5, 4, Direction::E),
            ts(5, 5, Direction::N),
        ],
    )?;
    let mut parts = Vec::new();
    let mut passed = true;
    let mut wide_nonzero = 0;
    for spec in [narrow, wide] {
        let (mut agree, mut total, mut nonzero, mut largest) =
            (0usize, 0usize, 0usize, BigInt::zero());
        for a in in_domain_triples(&spec) {
            if suite == Suite::Small
                && spec.primal_count() > 16
                && a != [Site::new(4, 5), Site::new(1, 3), Site::new(1, 1)]
            {
                continue;
            }
            let det = count_k_boundary(&spec, &a).map_err(err)?.value;
            let forests =
                enumerate_constrained_forests(&spec, &k_boundary_pattern(&spec, &a).map_err(err)?)
                    .map_err(err)?;
            total += 1;
            agree += usize::from(det == BigInt::from(forests));
            if !det.is_zero() {
                nonzero += 1;
                largest = largest.max(det);
            }
        }
        passed &= total > 0 && agree == total;
        wide_nonzero = nonzero;
        parts.push(format!(
            "{}: {agree}/{total} agree, {nonzero} nonzero, max {largest}",
            spec.shape
        ));
    }
    passed &= wide_nonzero > 0;
    Ok((passed, parts.join("; ")))
}

fn in_domain_triples(spec: &GridSpec) -> Vec<[Site; 3]> {
    let free: Vec<Site> = spec
        .sites()
        .into_iter()
        .filter(|&s| spec.is_boundary(s) && spec.terminals.iter().all(|t| t.site != s))
        .collect();
    let mut out = Vec::new();
    for &a in &free {
        for &b in &free {
            for &c in &free {
                let trip = [a, b, c];
                if k_boundary_pattern(spec, &trip).is_ok() {
                    out.push(trip);
                }
            }
        }
    }
    out
}

fn c6(suite: Suite) -> Outcome {
    let max = if suite == Suite::Full { 6 } else { 4 };
    let mut checked = 0usize;
    for w in 1..=max {
        for h in 1..=max {
            let spec = GridSpec::rect_one(w, h, ts(1, 1, Direction::S)).map_err(err)?;
            let green = Green::new(&spec).map_err(err)?;
            let k = green.matrix();
            let det_k = k.det().map_err(err)?;
            let inv = k.inverse().map_err(err)?;
            let n = spec.primal_count();
            for x in 0..n {
                let kx = perturbed_matrix(k, x).map_err(err)?;
                let det_kx = kx.det().map_err(err)?;
                let col = kx.inverse_column(x).map_err(err)?;
                let gxx = inv.at(x, x).clone();
                let one_plus = rat(1) + &gxx;
                let rest: Vec<usize> = (0..n).filter(|&v| v != x).collect();
                let minor = if rest.is_empty() {
                    rat(1)
                } else {
                    k.submatrix(&rest, &rest).map_err(err)?.det().map_err(err)?
                };
                let mut ok = col[x] == &gxx / &one_plus
                    && one_plus == &det_kx / &det_k
                    && det_kx == &det_k + minor;
                for t in 0..n {
                    let gxt = inv.at(x, t);
                    ok &= col[t] == gxt / &one_plus
                        && (&col[t] * &det_kx).abs() == (gxt * &det_k).abs();
                }
                if !ok {
                    return Ok((
                        false,
                        format!("identity fails on {w}x{h} at site index {x}"),
                    ));
                }
                checked += 1;
            }
        }
    }
    Ok((
        true,
        format!("grids up to {max}x{max}, {checked} perturbation sites"),
    ))
}

fn c7(_: Suite) -> Outcome {
    let mut specs = vec![GridSpec::rect_one(2, 2, ts(1, 1, Direction::S)).map_err(err)?];
    for len in 1..=4 {
        specs.push(
            GridSpec::new(Shape::Chain { len }, 1, vec![ts(1, 1, Direction::W)]).map_err(err)?,
        );
    }
    let mut parts = Vec::new();
    let mut pass = true;
    for spec in &specs {
        let trees = count_spanning_trees(
            &build_rooted(spec, RootedVariant::TerminalsIdentified).map_err(err)?,
        )
        .map_err(err)?;
        let det = abs_integer(
            &dirichlet_matrix(&build_g1(spec).map_err(err)?)
                .det()
                .map_err(err)?,
        )
        .map_err(err)?;
        pass &= BigInt::from(trees) == det;
        parts.push(format!("{} {trees}", spec.shape));
    }
    pass &= parts[0] == "rect:2x2 192";
    Ok((pass, parts.join(", ")))
}

/// Non-crossing partitions of `n` circular nodes into blocks of size at most two.
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

fn grove_graphs(suite: Suite) -> Result<Vec<CircularGraph>, String> {
    let slotted = |w: usize, h: usize, slots: &[usize]| -> Result<CircularGraph, String> {
        let spec = GridSpec::rect_one(w, h, ts(1, 1, Direction::S)).map_err(err)?;
        let nodes: Vec<NodeSpec> = slots.iter().map(|&s| NodeSpec::Slots(vec![s])).collect();
        slot_circular(&spec, &nodes).map_err(err)
    };
    let mut graphs = vec![
        slotted(2, 2, &[0, 1, 2, 4, 5, 6])?,
        slotted(3, 3, &[1, 5, 9])?,
    ];
    if suite == Suite::Full {
        graphs.push(slotted(2, 2, &[0, 1, 2, 3, 4, 5, 6, 7])?);
        graphs.push(slotted(2, 3, &[0, 2, 3, 5, 6, 8])?);
        let wheel: Vec<(usize, usize, u64)> = (0..5)
            .map(|i| (i, (i + 1) % 5, 1))
            .chain((0..5).map(|i| (i, 5, 1 + i as u64 % 2)))
            .collect();
        graphs.push(CircularGraph::from_edges(6, &wheel, &[0, 1, 2, 3, 4]).map_err(err)?);
    }
    Ok(graphs)
}

fn c8(suite: Suite) -> Outcome {
    let mut compared = 0;
    let mut max_vertices = 0;
    for c in grove_graphs(suite)? {
        max_vertices = max_vertices.max(c.vertex_count());
        let census = enumerate_groves_by_partition(&c).map_err(err)?;
        if census.keys().any(|b| !is_noncrossing(b, c.node_count())) {
            return Ok((false, "enumeration realised a crossing partition".into()));
        }
        let singles: Vec<Vec<usize>> = c.nodes().map(|v| vec![v]).collect();
        let z =
            grove_count_bipartite(&c, &PartitionSpec::singletons(c.node_count())).map_err(err)?;
        if z != RationalScalar::from_integer(enumerate_groves(&c, &singles).map_err(err)?.into()) {
            return Ok((
                false,
                format!("singleton partition: determinant {z} disagrees with enumeration"),
            ));
        }
        for blocks in small_block_partitions(c.node_count()) {
            let Ok(p) = PartitionSpec::auto(c.node_count(), blocks.clone()) else {
                continue;
            };
            let z = grove_count_bipartite(&c, &p).map_err(err)?;
            let listed = census
                .get(&canonical_partition(&blocks))
                .copied()
                .unwrap_or(0);
            if z != RationalScalar::from_integer(listed.into()) {
                return Ok((
                    false,
                    format!("partition {blocks:?}: determinant {z}, enumeration {listed}"),
                ));
            }
            compared += 1;
        }
    }
    Ok((
        compared >= 10 && max_vertices <= 12,
        format!("{compared} partitions, at most {max_vertices} vertices"),
    ))
}

fn c9(suite: Suite) -> Outcome {
    let samples = if suite == Suite::Full {
        100_000
    } else {
        50_000
    };
    let spec = GridSpec::rect_one(2, 2, ts(1, 1, Direction::S)).map_err(err)?;
    let g = build_rooted(&spec, RootedVariant::TerminalsIdentified).map_err(err)?;
    let trees = wilson_samples(&g, samples, RngSeed(9)).map_err(err)?;
    let hist = tree_histogram(&trees);
    let listed: BTreeSet<Vec<(usize, u32)>> =
        list_spanning_trees(&g).map_err(err)?.into_iter().collect();
    let same_support = hist.keys().eq(listed.iter());
    let counts: Vec<u64> = hist.values().copied().collect();
    let (_, p) = uniformity_test(&counts).map_err(err)?;
    let stats = ti_length_stats(&spec, samples, RngSeed(90)).map_err(err)?;
    let mean = stats.mean_length();
    let green = Green::new(&spec).map_err(err)?;
    let mut members_ok = true;
    for s in spec.sites() {
        let exact = green
            .entry(s, Site::new(1, 1))
            .map_err(err)?
            .to_f64()
            .unwrap_or(f64::NAN);
        members_ok &= stats
            .membership_frequency(s)
            .is_some_and(|f| f.covers(exact, 3.0));
    }
    let pass =
        hist.len() == 192 && same_support && p > 0.001 && mean.covers(0.5, 3.0) && members_ok;
    Ok((
        pass,
        format!(
            "{} trees seen, chi-square p = {p:.4}, E[l_T] = {:.5} ± {:.5}, membership within 3 sigma: {members_ok}",
            hist.len(),
            mean.mean,
            mean.stderr
        ),
    ))
}

fn c10(suite: Suite) -> Outcome {
    let walks = if suite == Suite::Full {
        100_000
    } else {
        10_000
    };
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
    .map_err(err)?;
    let green = Green::new(&spec).map_err(err)?;
    let (mut pairs, mut covered, mut worst) = (0, 0, 0.0f64);
    for (i, &x) in spec.sites().iter().enumerate() {
        let est = srw_hitting_estimate(&spec, x, walks, RngSeed(100 + i as u64)).map_err(err)?;
        for (ti, t) in terms.iter().enumerate() {
            let exact = green
                .entry(x, t.site)
                .map_err(err)?
                .to_f64()
                .unwrap_or(f64::NAN);
            let f = est.terminal_frequency(ti).ok_or("missing terminal slot")?;
            pairs += 1;
            covered += f.covers(exact, 3.0) as usize;
            worst = worst.max((f.mean - exact).abs() / f.stderr.max(1.0 / walks as f64));
        }
    }
    let root = build_rooted(&spec, RootedVariant::TerminalsIdentified).map_err(err)?;
    let path = lerw(&root, 0, &[root.vertex_count() - 1], RngSeed(10)).map_err(err)?;
    let pass = pairs >= 20 && covered == pairs && path.vertices.len() >= 2;
    Ok((pass, format!("{covered}/{pairs} pairs within 3 sigma at {walks} walks, largest deviation {worst:.2} sigma")))
}

fn c11(_: Suite) -> Outcome {
    let table = chain_asymptotics(40).map_err(err)?;
    let target = 1.0 / chain_lambda();
    let mut worst = 0.0f64;
    for j in 5..=15 {
        let r = table.rows[j - 1].ratio.ok_or("missing ratio")?;
        worst = worst.max((r - target).abs() / target);
    }
    Ok((
        worst <= 0.01,
        format!(
            "max relative deviation {worst:.2e} over 5 <= j <= 15, rate {:.6}",
            table.rate
        ),
    ))
}

fn c12(suite: Suite) -> Outcome {
    let target = 2.0 / std::f64::consts::PI;
    let slope = (expected_ti_length(512).map_err(err)? - expected_ti_length(256).map_err(err)?)
        / std::f64::consts::LN_2;
    let rel = (slope - target).abs() / target;
    let max_exact = if suite == Suite::Full { 16 } else { 8 };
    let mut worst = 0.0f64;
    for n in 2..=max_exact {
        let spec = GridSpec::rect_one(n, n, ts(1, 1, Direction::S)).map_err(err)?;
        let k = Green::new(&spec).map_err(err)?;
        let col = k.matrix().inverse_column(0).map_err(err)?;
        let exact = col
            .iter()
            .sum::<RationalScalar>()
            .to_f64()
            .unwrap_or(f64::NAN);
        worst = worst.max((expected_ti_length(n).map_err(err)? - exact).abs());
    }
    Ok((
        rel <= 0.10 && worst <= 1e-10,
        format!("slope {slope:.5} vs {target:.5} ({:.1}%), spectral vs exact {worst:.1e} for n <= {max_exact}", rel * 100.0),
    ))
}

fn c13(suite: Suite) -> Outcome {
    let method32 = if suite == Suite::Full {
        TailMethod::Exact
    } else {
        TailMethod::Spectral
    };
    let mut grid = Vec::new();
    for (n, m) in [
        (8, TailMethod::Exact),
        (16, TailMethod::Exact),
        (32, method32),
    ] {
        grid.push(tail_mass_with(Lattice::Grid, n, 0.25, m).map_err(err)?);
    }
    let decreasing = grid.windows(2).all(|w| w[1].tail < w[0].tail);
    let chain = concentration_profile(Lattice::Chain, &[8, 16, 32, 64], 0.25).map_err(err)?;
    let rates = decay_rates(&chain);
    let geometric = rates[0] > 0.0 && rates.windows(2).all(|r| r[1] >= r[0] * (1.0 - 1e-9));
    let tails: Vec<String> = grid.iter().map(|r| format!("{:.4}", r.tail)).collect();
    let rates_text: Vec<String> = rates.iter().map(|r| format!("{r:.4}")).collect();
    Ok((
        decreasing && geometric,
        format!(
            "grid tails {} at n = 8,16,32 ({method32:?} at 32), chain rates {}",
            tails.join(" "),
            rates_text.join(" ")
        ),
    ))
}

/// Invocations compared byte for byte by criterion 14.
pub fn determinism_invocations(suite: Suite) -> Vec<Vec<&'static str>> {
    let mut out: Vec<Vec<&'static str>> = vec![
        vec![
            "count",
            "--shape",
            "rect:2x2",
            "--k",
            "1",
            "--terminal",
            "1,1:N",
            "--at",
            "2,2",
        ],
        vec![
            "count",
            "--shape",
            "chain:2",
            "--k",
            "1",
            "--terminal",
            "1:N",
            "--at",
            "2",
            "--format",
            "json",
        ],
        vec![
            "count",
            "--shape",
            "rect:4x5",
            "--terminal",
            "4,1:E",
            "--terminal",
            "4,3:E",
            "--terminal",
            "4,5:E",
            "--a",
            "1,5",
            "--b",
            "1,2",
            "--route",
            "hitting",
            "--format",
            "csv",
        ],
        vec![
            "count",
            "--shape",
            "rect:3x6",
            "--terminal",
            "3,1:E",
            "--terminal",
            "3,3:E",
            "--terminal",
            "3,6:E",
            "--a",
            "1,5@1,4",
            "--b",
            "1,1@0,0",
        ],
        vec![
            "dist",
            "--shape",
            "rect:3x3",
            "--terminal",
            "2,1:N",
            "--format",
            "csv",
        ],
        vec![
            "sample", "ust", "--shape", "rect:2x2", "--n", "2000", "--seed", "7",
        ],
        vec![
            "sample", "ti", "--shape", "rect:3x3", "--n", "2000", "--seed", "7", "--format", "json",
        ],
        vec![
            "sample",
            "srw",
            "--shape",
            "rect:3x3",
            "--terminal",
            "1,2:W",
            "--from",
            "2,2",
            "--n",
            "2000",
            "--seed",
            "7",
        ],
        vec!["asym", "chain", "--n", "40", "--format", "csv"],
        vec!["asym", "grid", "--ns", "8,16"],
        vec![
            "asym",
            "continuum",
            "--x",
            "1",
            "--y",
            "1",
            "--format",
            "json",
        ],
        vec!["asym", "tail", "--lattice", "chain", "--ns", "8,16"],
        vec![
            "export",
            "--shape",
            "rect:2x2",
            "--graph",
            "superposition",
            "--format",
            "dot",
        ],
        vec![
            "export",
            "--shape",
            "rect:2x3",
            "--terminal",
            "2,3:S",
            "--graph",
            "slotted",
            "--format",
            "json",
        ],
    ];
    if suite == Suite::Full {
        out.push(vec![
            "sample", "ust", "--shape", "rect:2x2", "--n", "100000", "--seed", "7",
        ]);
        out.push(vec!["asym", "grid", "--n", "256"]);
        out.push(vec!["asym", "tail", "--lattice", "grid", "--ns", "8,16"]);
    }
    out
}

fn c14(suite: Suite) -> Outcome {
    let cases = determinism_invocations(suite);
    for argv in &cases {
        let first = run_line(argv).map_err(|e| format!("{}: {e}", argv.join(" ")))?;
        let second = run_line(argv).map_err(|e| format!("{}: {e}", argv.join(" ")))?;
        if first != second {
            return Ok((false, format!("output differs for: {}", argv.join(" "))));
        }
    }
    Ok((
        true,
        format!("{} invocations identical across two runs", cases.len()),
    ))
}

/// Runs criterion `id` and records the outcome; errors count as failures.
pub fn check(id: u8, suite: Suite) -> Check {
    let title = CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .map(|c| c.1)
        .unwrap_or("unknown criterion");
    let outcome = match id {
        1 => c1(suite),
        2 => c2(suite),
        3 => c3(suite),
        4 => c4(suite),
        5 => c5(suite),
        6 => c6(suite),
        7 => c7(suite),
        8 => c8(suite),
        9 => c9(suite),
        10 => c10(suite),
        11 => c11(suite),
        12 => c12(suite),
        13 => c13(suite),
        14 => c14(suite),
        _ => Err(format!("no criterion {id}")),
    };
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    Check {
        id,
        title,
        passed,
        detail,
    }
}

/// One report line per criterion.
pub fn line(c: &Check) -> String {
    format!(
        "criterion {:>2} {}: {}: {}",
        c.id,
        if c.passed { "PASS" } else { "FAIL" },
        c.title,
        c.detail
    )
}

/// `verify`: runs the selected criteria. Timings go to stderr when `progress` is set.
pub fn verify(suite: Suite, only: &[u8], progress: bool) -> Report {
    let ids: Vec<u8> = if only.is_empty() {
        CRITERIA.iter().map(|c| c.0).collect()
    } else {
        only.to_vec()
    };
    let mut checks = Vec::new();
    for id in ids {
        let start = Instant::now();
        let c = check(id, suite);
        if progress {
            eprintln!("criterion {id}: {:.2?}", start.elapsed());
        }
        checks.push(c);
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    let mut text = String::new();
    for c in &checks {
        let _ = writeln!(text, "{}", line(c));
    }
    let _ = writeln!(text, "{passed}/{} criteria passed", checks.len());
    let mut csv = String::from("criterion,passed,title,detail\n");
    for c in &checks {
        let _ = writeln!(
            csv,
            "{},{},\"{}\",\"{}\"",
            c.id,
            c.passed,
            c.title,
            c.detail.replace('"', "'")
        );
    }
    let data = json!({
        "suite": format!("{suite:?}").to_lowercase(),
        "passed": passed,
        "total": checks.len(),
        "criteria": checks.iter().map(|c| json!({"id": c.id, "title": c.title, "passed": c.passed, "detail": c.detail})).collect::<Vec<_>>(),
    });
    let route = format!("suite-{}", format!("{suite:?}").to_lowercase());
    let mut report = Report::new(Provenance::plain("verify", &route), data, text).with_csv(csv);
    report.passed = passed == checks.len();
    report
}
