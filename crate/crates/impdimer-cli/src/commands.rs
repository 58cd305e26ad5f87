//! Subcommand implementations. Each returns a [`Report`] and never prints.

use std::fmt::Write as _;

use impdimer::asymptotics::{
    chain_asymptotics, chain_lambda, chain_spec, continuum_entry, decay_rates, expected_ti_length,
    tail_mass, tail_mass_with, Lattice, TailMethod, TailRow,
};
use impdimer::counts::{
    count_chain, count_k_boundary, count_k_boundary_grove, count_one_impurity, count_two_boundary,
    count_two_near_boundary, hitting_matrix_count, impurity_distribution, CountResult, DualClass,
    Green, Impurity, ImpurityConfig,
};
use impdimer::lattice::{
    build_g1, build_rooted, build_slotted, build_superposition, export_dot, GridSpec, PlaneGraph,
    RootedVariant, Site, TerminalSite,
};
use impdimer::linalg::{abs_integer, RationalScalar};
use impdimer::walks::{
    srw_hitting_estimate, ti_length_stats, tree_histogram, uniformity_test, wilson_samples,
    Estimate, RngSeed, Tally,
};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use crate::args::{
    from_library_dir, parse_impurity, parse_site, parse_terminal, site_text, terminal_text,
    to_library_dir, AsymArgs, AsymKind, CountArgs, ExportArgs, GraphArg, GridArgs, ImpurityArg,
    LatticeArg, RouteArg, SampleArgs, SampleKind, TailMethodArg,
};
use crate::report::{fraction_json, fraction_parts, Provenance, Report};
use crate::CliError;

/// Two-sided 95% normal quantile used for reported intervals.
pub const Z95: f64 = 1.96;

/// Largest tree count for which `sample ust` runs the uniformity test.
pub const UNIFORMITY_TREE_LIMIT: u64 = 1_000_000;

/// Default terminal of one-impurity commands: the corner `1,1` pointing `N`.
pub fn default_terminal() -> TerminalSite {
    TerminalSite {
        site: Site::new(1, 1),
        dir: to_library_dir(impdimer::lattice::Direction::N),
    }
}

/// Builds and validates the grid of `grid` with `k` impurities.
pub fn build_spec(grid: &GridArgs, k: usize) -> Result<GridSpec, CliError> {
    let mut terminals = grid
        .terminals
        .iter()
        .map(|t| parse_terminal(grid.shape, t))
        .collect::<Result<Vec<_>, _>>()?;
    if terminals.is_empty() && k == 1 {
        terminals.push(default_terminal());
    }
    let probe = GridSpec {
        shape: grid.shape,
        k,
        terminals: Vec::new(),
    };
    for &t in &terminals {
        if !probe.contains(t.site) {
            return Err(CliError::Usage(format!(
                "terminal {} is outside {}",
                terminal_text(grid.shape, t),
                grid.shape
            )));
        }
        let outward: Vec<String> = probe
            .outward_dirs(t.site)
            .into_iter()
            .map(|d| from_library_dir(d).to_string())
            .collect();
        if !outward.contains(&from_library_dir(t.dir).to_string()) {
            let allowed = if outward.is_empty() {
                "none, the site is interior".to_string()
            } else {
                outward.join(", ")
            };
            return Err(CliError::Usage(format!(
                "terminal {} does not point out of the grid; outward directions at {}: {allowed}",
                terminal_text(grid.shape, t),
                site_text(grid.shape, t.site)
            )));
        }
    }
    Ok(GridSpec::new(grid.shape, k, terminals)?)
}

fn resolve(spec: &GridSpec, imp: ImpurityArg) -> Result<Impurity, CliError> {
    if !spec.contains(imp.site) {
        return Err(CliError::Usage(format!(
            "impurity site {} is outside {}",
            site_text(spec.shape, imp.site),
            spec.shape
        )));
    }
    Ok(match imp.dual {
        Some(d) => Impurity::new(spec, imp.site, d)?,
        None if spec.is_boundary(imp.site) => Impurity::on_boundary(spec, imp.site)?,
        None => Impurity::new(spec, imp.site, spec.corners(imp.site)[0])?,
    })
}

fn impurity_text(spec: &GridSpec, imp: &Impurity) -> String {
    format!(
        "{}@{},{}",
        site_text(spec.shape, imp.site),
        imp.dual.i,
        imp.dual.j
    )
}

fn no_route(route: RouteArg, what: &str) -> CliError {
    CliError::Usage(format!("route {route:?} is not available for {what}").to_lowercase())
}

/// `count`: exact matching count for fixed impurity positions.
pub fn count(args: &CountArgs) -> Result<Report, CliError> {
    let shape = args.grid.shape;
    let mut given = Vec::new();
    for s in args
        .at
        .iter()
        .chain(&args.a)
        .chain(&args.b)
        .chain(&args.imps)
    {
        given.push(parse_impurity(shape, s)?);
    }
    if args.at.is_some() && (args.a.is_some() || args.b.is_some()) {
        return Err(CliError::Usage(
            "--at is for k = 1; use --a and --b for k = 2".into(),
        ));
    }
    let k = args.grid.k.unwrap_or(given.len().max(1));
    if given.len() != k {
        return Err(CliError::Usage(format!(
            "k = {k} needs {k} impurity positions, got {}",
            given.len()
        )));
    }
    let spec = build_spec(&args.grid, k)?;
    let imps = given
        .into_iter()
        .map(|i| resolve(&spec, i))
        .collect::<Result<Vec<_>, _>>()?;
    let config = ImpurityConfig::new(imps.clone())?;
    let route = args.route;
    let result: CountResult = if k == 1 {
        match route {
            RouteArg::Cofactor => count_one_impurity(&spec, imps[0].site)?,
            r => return Err(no_route(r, "one impurity")),
        }
    } else if shape.is_chain() {
        match route {
            RouteArg::Cofactor | RouteArg::Grove => count_chain(&spec, &config)?,
            r => return Err(no_route(r, "chains")),
        }
    } else {
        let classes: Vec<DualClass> = imps.iter().map(|i| i.class(&spec)).collect();
        if let Some(i) = classes.iter().position(|&c| c == DualClass::Interior) {
            return Err(CliError::Usage(format!(
                "impurity {} is interior; k ≥ 2 counts need boundary impurities",
                impurity_text(&spec, &imps[i])
            )));
        }
        let sites = config.sites();
        let near = classes.contains(&DualClass::NearBoundary);
        match (k, near, route) {
            (2, true, RouteArg::Cofactor) => count_two_near_boundary(&spec, imps[0], imps[1])?,
            (_, true, r) => return Err(no_route(r, "near-boundary impurities")),
            (2, false, RouteArg::Cofactor) => count_two_boundary(&spec, sites[0], sites[1])?,
            (2, false, RouteArg::Hitting) => hitting_matrix_count(&spec, sites[0], sites[1])?,
            (_, false, RouteArg::Cofactor) => count_k_boundary(&spec, &sites)?,
            (_, false, RouteArg::Grove) => count_k_boundary_grove(&spec, &sites)?,
            (_, false, r) => return Err(no_route(r, "more than two impurities")),
        }
    };
    let imp_texts: Vec<String> = imps.iter().map(|i| impurity_text(&spec, i)).collect();
    let mut text = format!("{}\n", result.value);
    let _ = writeln!(text, "impurities: {}", imp_texts.join(" "));
    for (name, v) in &result.parts {
        let _ = writeln!(text, "part {name}: {v}");
    }
    let mut csv = String::from("name,numerator,denominator\n");
    let _ = writeln!(csv, "count,{},1", result.value);
    for (name, v) in &result.parts {
        let _ = writeln!(csv, "{name},{v},1");
    }
    let mut data = result.to_json();
    data["k"] = json!(k);
    data["impurities"] = json!(imp_texts);
    Ok(Report::new(
        Provenance::grid("count", &spec, result.route.name()),
        data,
        text,
    )
    .with_csv(csv))
}

/// `dist`: exact one-impurity distribution with both normalizations.
pub fn dist(grid: &GridArgs) -> Result<Report, CliError> {
    let spec = build_spec(grid, grid.k.unwrap_or(1))?;
    let d = impurity_distribution(&spec)?;
    let mut text = format!(
        "det_k: {}\ntotal_matchings: {}\nsite weight corner per_site\n",
        d.det_k, d.total_matchings
    );
    let mut csv = String::from("x,y,weight,corner_num,corner_den,per_site_num,per_site_den\n");
    let mut rows = Vec::new();
    for r in &d.rows {
        let (pn, pd) = fraction_parts(&r.corner);
        let (sn, sd) = fraction_parts(&r.per_site);
        let _ = writeln!(
            text,
            "{} {} {pn}/{pd} {sn}/{sd}",
            site_text(spec.shape, r.site),
            r.weight
        );
        let _ = writeln!(
            csv,
            "{},{},{},{pn},{pd},{sn},{sd}",
            r.site.x, r.site.y, r.weight
        );
        rows.push(json!({
            "x": r.site.x, "y": r.site.y, "weight": r.weight.to_string(),
            "corner": fraction_json(&r.corner), "per_site": fraction_json(&r.per_site),
        }));
    }
    let data = json!({"det_k": d.det_k.to_string(), "total_matchings": d.total_matchings.to_string(), "rows": rows});
    Ok(Report::new(Provenance::grid("dist", &spec, "cofactor"), data, text).with_csv(csv))
}

fn estimate_json(e: &Estimate) -> Value {
    let (lo, hi) = e.interval(Z95);
    json!({"mean": e.mean, "stderr": e.stderr, "samples": e.samples, "ci95": [lo, hi]})
}

fn estimate_text(e: &Estimate) -> String {
    let (lo, hi) = e.interval(Z95);
    format!(
        "{} ± {} (95% CI [{lo}, {hi}], {} samples)",
        e.mean, e.stderr, e.samples
    )
}

/// `sample`: seeded Monte Carlo estimates.
pub fn sample(args: &SampleArgs) -> Result<Report, CliError> {
    if args.n == 0 {
        return Err(CliError::Usage("--n must be positive".into()));
    }
    let spec = build_spec(&args.grid, args.grid.k.unwrap_or(1))?;
    let seed = RngSeed(args.seed);
    match args.kind {
        SampleKind::Ust => sample_ust(&spec, args.n, seed),
        SampleKind::Ti => sample_ti(&spec, args.n, seed),
        SampleKind::Srw => {
            let from = args
                .from
                .as_deref()
                .ok_or_else(|| CliError::Usage("sample srw needs --from".into()))?;
            sample_srw(&spec, parse_site(spec.shape, from)?, args.n, seed)
        }
    }
}

fn sample_ust(spec: &GridSpec, n: usize, seed: RngSeed) -> Result<Report, CliError> {
    let g = build_rooted(spec, RootedVariant::TerminalsIdentified)?;
    let trees = wilson_samples(&g, n, seed)?;
    let hist = tree_histogram(&trees);
    let tree_count = abs_integer(Green::new(spec)?.det())?;
    let uniformity = match tree_count.to_u64() {
        Some(total) if (2..=UNIFORMITY_TREE_LIMIT).contains(&total) => {
            let mut counts: Vec<u64> = hist.values().copied().collect();
            counts.resize(total as usize, 0);
            let (stat, p) = uniformity_test(&counts)?;
            Some((stat, p, total - 1))
        }
        _ => None,
    };
    let mut lengths = vec![Tally::default(); spec.terminals.len()];
    for t in &trees {
        for (ti, tally) in lengths.iter_mut().enumerate() {
            tally.push(t.terminal_component(&g, ti).len() as u64);
        }
    }
    let mut text = format!(
        "samples: {n}\nseed: {}\nspanning_trees: {tree_count}\ndistinct_trees: {}\n",
        seed.0,
        hist.len()
    );
    match uniformity {
        Some((stat, p, dof)) => {
            let _ = writeln!(text, "chi_square: {stat} ({dof} dof), p = {p}");
        }
        None => text.push_str("chi_square: not computed, tree count outside the test range\n"),
    }
    let mut comps = Vec::new();
    for (ti, tally) in lengths.iter().enumerate() {
        let e = tally.estimate();
        let _ = writeln!(text, "component T{}: {}", ti + 1, estimate_text(&e));
        comps.push(json!({"terminal": ti + 1, "size": estimate_json(&e)}));
    }
    let data = json!({
        "samples": n, "seed": seed.0, "spanning_trees": tree_count.to_string(), "distinct_trees": hist.len(),
        "uniformity": uniformity.map(|(stat, p, dof)| json!({"chi_square": stat, "dof": dof, "p": p})),
        "components": comps,
    });
    let mut csv = String::from("quantity,numerator,denominator\n");
    let _ = writeln!(csv, "distinct_trees,{},1", hist.len());
    let _ = writeln!(csv, "spanning_trees,{tree_count},1");
    for (ti, tally) in lengths.iter().enumerate() {
        let _ = writeln!(csv, "mean_component_T{},{},{}", ti + 1, tally.sum, tally.n);
    }
    Ok(Report::new(
        Provenance::grid("sample ust", spec, "wilson").with_seed(seed.0),
        data,
        text,
    )
    .with_csv(csv))
}

fn sample_ti(spec: &GridSpec, n: usize, seed: RngSeed) -> Result<Report, CliError> {
    let stats = ti_length_stats(spec, n, seed)?;
    let e = stats.mean_length();
    let mut text = format!(
        "samples: {n}\nseed: {}\nmean_length: {}\nsite frequency stderr\n",
        seed.0,
        estimate_text(&e)
    );
    let mut csv = String::from("x,y,hits,samples\n");
    let mut rows = Vec::new();
    for &(s, hits) in &stats.membership {
        let f = Estimate::proportion(hits, stats.length.n);
        let _ = writeln!(text, "{} {} {}", site_text(spec.shape, s), f.mean, f.stderr);
        let _ = writeln!(csv, "{},{},{hits},{}", s.x, s.y, stats.length.n);
        rows.push(json!({"x": s.x, "y": s.y, "hits": hits, "frequency": estimate_json(&f)}));
    }
    let _ = writeln!(csv, "length_sum,,{},{}", stats.length.sum, stats.length.n);
    let data =
        json!({"samples": n, "seed": seed.0, "mean_length": estimate_json(&e), "membership": rows});
    Ok(Report::new(
        Provenance::grid("sample ti", spec, "wilson").with_seed(seed.0),
        data,
        text,
    )
    .with_csv(csv))
}

fn sample_srw(spec: &GridSpec, from: Site, n: usize, seed: RngSeed) -> Result<Report, CliError> {
    if !spec.contains(from) {
        return Err(CliError::Usage(format!(
            "start {} is outside {}",
            site_text(spec.shape, from),
            spec.shape
        )));
    }
    let est = srw_hitting_estimate(spec, from, n, seed)?;
    let mut text = format!(
        "walks: {n}\nseed: {}\nfrom: {}\nslot site dir terminal hits frequency stderr\n",
        seed.0,
        site_text(spec.shape, from)
    );
    let mut csv = String::from("slot,x,y,dir,terminal,hits,walks\n");
    let mut rows = Vec::new();
    for s in &est.slots {
        let f = Estimate::proportion(s.hits, est.walks);
        let dir = from_library_dir(s.slot.dir);
        let term = s
            .terminal
            .map(|t| format!("T{}", t + 1))
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(
            text,
            "{} {} {dir} {term} {} {} {}",
            s.index,
            site_text(spec.shape, s.slot.site),
            s.hits,
            f.mean,
            f.stderr
        );
        let term_csv = s.terminal.map(|t| (t + 1).to_string()).unwrap_or_default();
        let _ = writeln!(
            csv,
            "{},{},{},{dir},{term_csv},{},{}",
            s.index, s.slot.site.x, s.slot.site.y, s.hits, est.walks
        );
        rows.push(json!({
            "slot": s.index, "x": s.slot.site.x, "y": s.slot.site.y, "dir": dir.to_string(),
            "terminal": s.terminal.map(|t| t + 1), "hits": s.hits, "frequency": estimate_json(&f),
        }));
    }
    let data =
        json!({"walks": n, "seed": seed.0, "from": site_text(spec.shape, from), "slots": rows});
    Ok(Report::new(
        Provenance::grid("sample srw", spec, "simple-random-walk").with_seed(seed.0),
        data,
        text,
    )
    .with_csv(csv))
}

fn sizes(args: &AsymArgs) -> Result<Vec<usize>, CliError> {
    let mut ns = args.ns.clone();
    ns.extend(args.n);
    if ns.is_empty() {
        return Err(CliError::Usage(
            format!("asym {:?} needs --n or --ns", args.kind).to_lowercase(),
        ));
    }
    Ok(ns)
}

/// `asym`: asymptotic sweeps.
pub fn asym(args: &AsymArgs) -> Result<Report, CliError> {
    match args.kind {
        AsymKind::Chain => asym_chain(
            args.n
                .ok_or_else(|| CliError::Usage("asym chain needs --n".into()))?,
        ),
        AsymKind::Grid => asym_grid(&sizes(args)?),
        AsymKind::Continuum => asym_continuum(args.x, args.y, args.resolution),
        AsymKind::Tail => asym_tail(args),
    }
}

fn asym_chain(n: usize) -> Result<Report, CliError> {
    let table = chain_asymptotics(n)?;
    let spec = chain_spec(n)?;
    let dist = impurity_distribution(&spec)?;
    let total = RationalScalar::from_integer(dist.total_matchings.clone());
    let expected = 1.0 / chain_lambda();
    let mut text = format!(
        "rate: {}\nexpected_rate: {expected}\nrelative_deviation: {}\nwindow: {}..{}\ncorner_constant: {}\nmatching_constant: {}\nj weight ratio\n",
        table.rate,
        (table.rate - expected).abs() / expected,
        table.window.0,
        table.window.1,
        table.corner_constant,
        table.matching_constant
    );
    let mut csv = String::from("j,weight,corner_num,corner_den,matching_num,matching_den\n");
    for (row, d) in table.rows.iter().zip(&dist.rows) {
        let ratio = row
            .ratio
            .map(|r| r.to_string())
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(text, "{} {} {ratio}", row.j, row.weight);
        let (pn, pd) = fraction_parts(&d.corner);
        let (mn, md) =
            fraction_parts(&(RationalScalar::from_integer(&d.weight * BigInt::from(4)) / &total));
        let _ = writeln!(csv, "{},{},{pn},{pd},{mn},{md}", row.j, row.weight);
    }
    let mut data = serde_json::to_value(&table).map_err(|e| CliError::Io(e.to_string()))?;
    data["expected_rate"] = json!(expected);
    Ok(Report::new(
        Provenance::grid("asym chain", &spec, "cofactor"),
        data,
        text,
    )
    .with_csv(csv))
}

fn asym_grid(ns: &[usize]) -> Result<Report, CliError> {
    let target = 2.0 / std::f64::consts::PI;
    let mut text = String::from("n expected expected_2n slope\n");
    let mut csv = String::from("n,expected,expected_2n,slope\n");
    let mut rows = Vec::new();
    for &n in ns {
        let (e, e2) = (expected_ti_length(n)?, expected_ti_length(2 * n)?);
        let slope = (e2 - e) / std::f64::consts::LN_2;
        let _ = writeln!(text, "{n} {e} {e2} {slope}");
        let _ = writeln!(csv, "{n},{e},{e2},{slope}");
        rows.push(json!({"n": n, "expected": e, "expected_2n": e2, "slope": slope}));
    }
    let _ = writeln!(text, "slope_target: {target}");
    let data = json!({"rows": rows, "slope_target": target});
    Ok(Report::new(Provenance::plain("asym grid", "spectral"), data, text).with_csv(csv))
}

fn asym_continuum(x: usize, y: usize, resolution: usize) -> Result<Report, CliError> {
    let est = continuum_entry(x, y, resolution)?;
    let text = format!(
        "x: {x}\ny: {y}\nvalue: {}\nerror: {}\nresolution: {}\n",
        est.value, est.error, est.resolution
    );
    let csv = format!(
        "x,y,value,error,resolution\n{x},{y},{},{},{}\n",
        est.value, est.error, est.resolution
    );
    let data = json!({"x": x, "y": y, "value": est.value, "error": est.error, "resolution": est.resolution});
    Ok(Report::new(
        Provenance::plain("asym continuum", "midpoint-quadrature"),
        data,
        text,
    )
    .with_csv(csv))
}

fn asym_tail(args: &AsymArgs) -> Result<Report, CliError> {
    let lattice = match args.lattice {
        LatticeArg::Chain => Lattice::Chain,
        LatticeArg::Grid => Lattice::Grid,
    };
    let rows: Vec<TailRow> = sizes(args)?
        .into_iter()
        .map(|n| match args.method {
            TailMethodArg::Auto => tail_mass(lattice, n, args.c),
            TailMethodArg::Exact => tail_mass_with(lattice, n, args.c, TailMethod::Exact),
            TailMethodArg::Spectral => tail_mass_with(lattice, n, args.c, TailMethod::Spectral),
        })
        .collect::<Result<_, _>>()?;
    let rates = decay_rates(&rows);
    let mut text = String::from("n c tail method\n");
    let mut csv = String::from("n,c,tail,method\n");
    for r in &rows {
        let method = format!("{:?}", r.method).to_lowercase();
        let _ = writeln!(text, "{} {} {} {method}", r.n, r.c, r.tail);
        let _ = writeln!(csv, "{},{},{},{method}", r.n, r.c, r.tail);
    }
    let _ = writeln!(
        text,
        "decay_rates: {}",
        rates
            .iter()
            .map(|r| r.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    );
    let route = format!("{:?}", args.method).to_lowercase();
    let data = json!({"lattice": format!("{lattice:?}").to_lowercase(), "rows": rows, "decay_rates": rates});
    Ok(Report::new(Provenance::plain("asym tail", &route), data, text).with_csv(csv))
}

/// Graph with row 1 drawn at the top: embedding heights are negated.
fn screen_oriented(mut g: PlaneGraph) -> PlaneGraph {
    for v in &mut g.vertices {
        v.pos.1 = -v.pos.1;
    }
    g
}

/// `export`: a graph family as DOT or JSON.
pub fn export(args: &ExportArgs) -> Result<Report, CliError> {
    let spec = build_spec(&args.grid, args.grid.k.unwrap_or(1))?;
    let g = match args.graph {
        GraphArg::G1 => build_g1(&spec)?,
        GraphArg::Superposition => build_superposition(&spec)?,
        GraphArg::Rooted => build_rooted(&spec, RootedVariant::WithTerminals)?,
        GraphArg::Identified => build_rooted(&spec, RootedVariant::TerminalsIdentified)?,
        GraphArg::Slotted => build_slotted(&spec)?,
    };
    let g = screen_oriented(g);
    let name = format!("{:?}", args.graph).to_lowercase();
    let text = format!(
        "graph: {name}\nvertices: {}\nedges: {}\n",
        g.vertex_count(),
        g.edge_count()
    );
    let mut report = Report::new(Provenance::grid("export", &spec, &name), g.to_json(), text);
    report.dot = Some(export_dot(&g));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(shape: &str, terms: &[&str]) -> GridArgs {
        GridArgs {
            shape: crate::args::parse_shape(shape).unwrap(),
            k: None,
            terminals: terms.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn default_terminal_is_outward() {
        for shape in ["rect:3x2", "chain:4", "rect:1x1"] {
            assert!(build_spec(&grid(shape, &[]), 1).is_ok(), "{shape}");
        }
        assert!(build_spec(&grid("rect:3x3", &["2,2:N"]), 1).is_err());
    }

    #[test]
    fn screen_orientation_negates_heights() {
        let spec = build_spec(&grid("rect:2x2", &[]), 1).unwrap();
        let g = build_g1(&spec).unwrap();
        let flipped = screen_oriented(g.clone());
        assert!(g
            .vertices
            .iter()
            .zip(&flipped.vertices)
            .all(|(a, b)| a.pos.1 == -b.pos.1 && a.pos.0 == b.pos.0));
    }
}
