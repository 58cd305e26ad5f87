//! Dimer counts with prescribed impurities: cofactor formulas for one impurity,
//! boundary determinants for several impurities, the near-boundary correction, the
//! hitting-matrix route, chain decompositions through grove determinants and exact
//! impurity distributions.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::grove::{grove_count_bipartite, slot_circular, NodeSpec, PartitionSpec};
use crate::lattice::{boundary_arc, build_g1, ArcSide, DualPos, GridSpec, Site, Slot};
use crate::linalg::{
    abs_integer, dirichlet_matrix, rat, ratio, transition_matrix, ExactMatrix, RationalScalar,
};
use crate::oracle::ForestPattern;

/// One impurity: a primal site matched to one of its four dual corners.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Impurity {
    /// Primal endpoint.
    pub site: Site,
    /// Dual endpoint, a corner of the face around `site`.
    pub dual: DualPos,
}

/// Position class of an impurity's endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DualClass {
    /// Primal endpoint on the boundary, dual endpoint on the dual boundary.
    Boundary,
    /// Primal endpoint on the boundary, dual endpoint in the interior.
    NearBoundary,
    /// Primal endpoint in the interior.
    Interior,
}

impl Impurity {
    /// Builds an impurity after checking that `dual` is a corner of `site`.
    pub fn new(spec: &GridSpec, site: Site, dual: DualPos) -> Result<Self> {
        if !spec.contains(site) {
            return Err(Error::InvalidConfig(format!("site {site} not in grid")));
        }
        if !spec.corners(site).contains(&dual) {
            return Err(Error::InvalidConfig(format!(
                "dual {dual} is not a corner of {site}"
            )));
        }
        Ok(Impurity { site, dual })
    }

    /// Impurity at `site` with the first boundary corner in corner order.
    pub fn on_boundary(spec: &GridSpec, site: Site) -> Result<Self> {
        let dual = spec
            .corners(site)
            .into_iter()
            .find(|&d| spec.is_dual_boundary(d))
            .ok_or_else(|| Error::NotOnBoundary(site.to_string()))?;
        Impurity::new(spec, site, dual)
    }

    /// Position class of this impurity.
    pub fn class(&self, spec: &GridSpec) -> DualClass {
        if !spec.is_boundary(self.site) {
            DualClass::Interior
        } else if spec.is_dual_boundary(self.dual) {
            DualClass::Boundary
        } else {
            DualClass::NearBoundary
        }
    }
}

/// Positions of all `k` impurities.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ImpurityConfig {
    /// Impurities in the caller's order.
    pub impurities: Vec<Impurity>,
}

impl ImpurityConfig {
    /// Validates pairwise distinct primal endpoints.
    pub fn new(impurities: Vec<Impurity>) -> Result<Self> {
        let sites: BTreeSet<Site> = impurities.iter().map(|i| i.site).collect();
        if sites.len() != impurities.len() {
            return Err(Error::InvalidConfig(
                "impurity sites must be distinct".into(),
            ));
        }
        Ok(ImpurityConfig { impurities })
    }

    /// Number of impurities.
    pub fn k(&self) -> usize {
        self.impurities.len()
    }

    /// Primal endpoints.
    pub fn sites(&self) -> Vec<Site> {
        self.impurities.iter().map(|i| i.site).collect()
    }
}

/// Formula that produced a count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Route {
    /// Entries of the inverse Dirichlet matrix.
    Cofactor,
    /// Hitting probabilities of the simple random walk.
    Hitting,
    /// Grove partition functions of circular planar graphs.
    Grove,
}

impl Route {
    /// Lower-case name.
    pub fn name(self) -> &'static str {
        match self {
            Route::Cofactor => "cofactor",
            Route::Hitting => "hitting",
            Route::Grove => "grove",
        }
    }
}

/// Exact count of perfect matchings together with its provenance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountResult {
    /// Nonnegative count.
    pub value: BigInt,
    /// Formula used.
    pub route: Route,
    /// Named summands; they add up to `value` when present.
    pub parts: Vec<(String, BigInt)>,
}

impl CountResult {
    fn single(value: BigInt, route: Route) -> Self {
        CountResult {
            value,
            route,
            parts: Vec::new(),
        }
    }

    fn from_parts(parts: Vec<(String, BigInt)>, route: Route) -> Self {
        let value = parts.iter().map(|(_, v)| v).sum();
        CountResult {
            value,
            route,
            parts,
        }
    }

    /// Part with the given name.
    pub fn part(&self, name: &str) -> Option<&BigInt> {
        self.parts.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    /// JSON rendering with integers as decimal strings.
    pub fn to_json(&self) -> Value {
        let parts: Vec<Value> = self
            .parts
            .iter()
            .map(|(n, v)| json!({ "name": n, "value": v.to_string() }))
            .collect();
        json!({ "value": self.value.to_string(), "route": self.route.name(), "parts": parts })
    }
}

/// Dirichlet matrix of a grid with its determinant and cached inverse columns.
pub struct Green {
    spec: GridSpec,
    k: ExactMatrix,
    det: RationalScalar,
    slots: Vec<Slot>,
}

impl Green {
    /// Builds `K` for the primal grid of `spec`.
    pub fn new(spec: &GridSpec) -> Result<Self> {
        spec.validate()?;
        let k = dirichlet_matrix(&build_g1(spec)?);
        let det = k.det()?.abs();
        Ok(Green {
            spec: spec.clone(),
            k,
            det,
            slots: spec.slots(),
        })
    }

    /// The Dirichlet matrix, indexed by row-major site indices.
    pub fn matrix(&self) -> &ExactMatrix {
        &self.k
    }

    /// `|det K|`.
    pub fn det(&self) -> &RationalScalar {
        &self.det
    }

    /// `K⁻¹(x, y)`.
    pub fn entry(&self, x: Site, y: Site) -> Result<RationalScalar> {
        for s in [x, y] {
            if !self.spec.contains(s) {
                return Err(Error::InvalidConfig(format!("site {s} not in grid")));
            }
        }
        self.k.inverse_entry(self.spec.index(x), self.spec.index(y))
    }

    /// Row `(K⁻¹(x, t_i))_i` over the terminals.
    pub fn site_row(&self, x: Site) -> Result<Vec<RationalScalar>> {
        self.spec
            .terminals
            .iter()
            .map(|t| self.entry(x, t.site))
            .collect()
    }

    /// Row `(Σ_s K⁻¹(owner(s), t_i))_i` summed over boundary slots.
    pub fn slot_row(&self, slots: &[usize]) -> Result<Vec<RationalScalar>> {
        let mut row = vec![rat(0); self.spec.terminals.len()];
        for &si in slots {
            let owner = self
                .slots
                .get(si)
                .ok_or_else(|| Error::OutOfRange(format!("slot {si}")))?
                .site;
            for (acc, v) in row.iter_mut().zip(self.site_row(owner)?) {
                *acc += v;
            }
        }
        Ok(row)
    }

    /// `|det(rows)| · |det K|` as an integer.
    pub fn count(&self, rows: Vec<Vec<RationalScalar>>) -> Result<BigInt> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "{n} rows against {} terminals",
                self.spec.terminals.len()
            )));
        }
        let m = ExactMatrix::from_fn(n, n, |i, j| rows[i][j].clone());
        abs_integer(&(m.det()? * &self.det))
    }
}

fn require_k(spec: &GridSpec, k: usize) -> Result<()> {
    spec.validate()?;
    if spec.k != k {
        return Err(Error::InvalidConfig(format!(
            "expected k = {k}, spec has k = {}",
            spec.k
        )));
    }
    Ok(())
}

fn require_rect(spec: &GridSpec) -> Result<()> {
    if spec.shape.is_chain() {
        return Err(Error::Unsupported(
            "boundary formulas need a rectangle; use count_chain".into(),
        ));
    }
    Ok(())
}

/// Number of matchings of `G^(1)` whose impurity has primal endpoint `x` and a fixed
/// dual endpoint: `|K⁻¹(x, t) · det K|`.
pub fn count_one_impurity(spec: &GridSpec, x: Site) -> Result<CountResult> {
    require_k(spec, 1)?;
    let g = Green::new(spec)?;
    let v = g.entry(x, spec.terminals[0].site)? * g.det();
    Ok(CountResult::single(abs_integer(&v)?, Route::Cofactor))
}

/// Boundary slots between `a` and `b` on the terminal-free side.
///
/// Errors when `a` or `b` is itself a terminal site.
pub fn terminal_free_arc(spec: &GridSpec, a: Site, b: Site) -> Result<Vec<usize>> {
    reject_terminal_sites(spec, &[a, b])?;
    Ok(boundary_arc(spec, a, b, ArcSide::Auto)?.slots)
}

fn reject_terminal_sites(spec: &GridSpec, a: &[Site]) -> Result<()> {
    match a
        .iter()
        .find(|&&s| spec.terminals.iter().any(|t| t.site == s))
    {
        Some(s) => Err(Error::InvalidConfig(format!(
            "impurity at terminal site {s}"
        ))),
        None => Ok(()),
    }
}

/// Two boundary impurities with boundary dual endpoints: `|det [a; ∂C; b] · det K|`
/// where the `∂C` row sums the Green function over the slots of the terminal-free arc.
pub fn count_two_boundary(spec: &GridSpec, a: Site, b: Site) -> Result<CountResult> {
    require_k(spec, 2)?;
    require_rect(spec)?;
    let arc = terminal_free_arc(spec, a, b)?;
    if arc.is_empty() {
        return Ok(CountResult::single(BigInt::zero(), Route::Cofactor));
    }
    let g = Green::new(spec)?;
    let v = g.count(vec![g.site_row(a)?, g.slot_row(&arc)?, g.site_row(b)?])?;
    Ok(CountResult::single(v, Route::Cofactor))
}

/// Exact hitting matrix `H(x, t_i)`: probability that the walk from `x` on the rooted
/// grid is absorbed through the terminal edge at `t_i`, computed as `(I − Q)⁻¹ / 4`.
pub fn hitting_matrix(spec: &GridSpec) -> Result<ExactMatrix> {
    spec.validate()?;
    let q = transition_matrix(&build_g1(spec)?);
    let ids = q.row_ids().to_vec();
    let iq = ExactMatrix::identity(ids.clone()).sub(&q)?;
    let cols: Vec<usize> = spec.terminals.iter().map(|t| spec.index(t.site)).collect();
    let rhs: Vec<Vec<RationalScalar>> = cols
        .iter()
        .map(|&c| {
            ids.iter()
                .map(|&i| if i == c { ratio(1, 4) } else { rat(0) })
                .collect()
        })
        .collect();
    let sol = iq.solve_many(&rhs)?;
    let mut h = ExactMatrix::zeros(ids.clone(), cols);
    for (j, col) in sol.into_iter().enumerate() {
        for (i, v) in col.into_iter().enumerate() {
            h.set(i, j, v);
        }
    }
    Ok(h)
}

/// The two-boundary count through hitting probabilities; equal to [`count_two_boundary`].
pub fn hitting_matrix_count(spec: &GridSpec, a: Site, b: Site) -> Result<CountResult> {
    require_k(spec, 2)?;
    require_rect(spec)?;
    let arc = terminal_free_arc(spec, a, b)?;
    if arc.is_empty() {
        return Ok(CountResult::single(BigInt::zero(), Route::Hitting));
    }
    let h = hitting_matrix(spec)?;
    let slots = spec.slots();
    let row = |x: Site| -> Vec<RationalScalar> {
        (0..h.ncols())
            .map(|j| h.at(spec.index(x), j).clone())
            .collect()
    };
    let mut mid = vec![rat(0); h.ncols()];
    for &si in &arc {
        for (acc, v) in mid.iter_mut().zip(row(slots[si].site)) {
            *acc += v;
        }
    }
    let rows = [row(a), mid, row(b)];
    let m = ExactMatrix::from_fn(3, 3, |i, j| rows[i][j].clone());
    let det_k = dirichlet_matrix(&build_g1(spec)?).det()?.abs();
    Ok(CountResult::single(
        abs_integer(&(m.det()? * det_k))?,
        Route::Hitting,
    ))
}

/// Boundary vertex `c` joined to `x` by a boundary edge of the face around `d`.
pub fn auxiliary_vertex(spec: &GridSpec, x: Site, d: DualPos) -> Result<Site> {
    let (w, h) = spec.dims();
    let face = [
        Site::new(d.i, d.j),
        Site::new(d.i + 1, d.j),
        Site::new(d.i, d.j + 1),
        Site::new(d.i + 1, d.j + 1),
    ];
    let on_side = |u: Site, v: Site| {
        (u.x == v.x && (u.x == 1 || u.x == w)) || (u.y == v.y && (u.y == 1 || u.y == h))
    };
    face.into_iter()
        .filter(|&c| c.x >= 1 && c.y >= 1 && spec.contains(c))
        .find(|&c| x.x.abs_diff(c.x) + x.y.abs_diff(c.y) == 1 && on_side(x, c))
        .ok_or_else(|| {
            Error::AuxiliaryUndefined(format!("no boundary neighbour of {x} on the face of {d}"))
        })
}

fn near_term(
    spec: &GridSpec,
    g: &Green,
    x: Impurity,
    other: Site,
    x_first: bool,
) -> Result<BigInt> {
    let c = auxiliary_vertex(spec, x.site, x.dual)?;
    if c == other {
        return Err(Error::InvalidConfig(format!(
            "auxiliary vertex {c} coincides with the other impurity"
        )));
    }
    let rows = if x_first {
        vec![g.site_row(x.site)?, g.site_row(c)?, g.site_row(other)?]
    } else {
        vec![g.site_row(other)?, g.site_row(c)?, g.site_row(x.site)?]
    };
    g.count(rows)
}

/// Two boundary impurities where at least one dual endpoint lies in the interior:
/// `A + B`, with `A` the boundary determinant and one `B` term `|det [x; c; y] · det K|`
/// for every near-boundary impurity `x`.
pub fn count_two_near_boundary(spec: &GridSpec, a: Impurity, b: Impurity) -> Result<CountResult> {
    require_k(spec, 2)?;
    require_rect(spec)?;
    for imp in [a, b] {
        Impurity::new(spec, imp.site, imp.dual)?;
        if imp.class(spec) == DualClass::Interior {
            return Err(Error::Unsupported(format!(
                "impurity at interior site {}",
                imp.site
            )));
        }
    }
    let g = Green::new(spec)?;
    let mut parts = vec![(
        "A".to_string(),
        count_two_boundary(spec, a.site, b.site)?.value,
    )];
    if a.class(spec) == DualClass::NearBoundary {
        parts.push(("B_a".into(), near_term(spec, &g, a, b.site, true)?));
    }
    if b.class(spec) == DualClass::NearBoundary {
        parts.push(("B_b".into(), near_term(spec, &g, b, a.site, false)?));
    }
    Ok(CountResult::from_parts(parts, Route::Cofactor))
}

/// Arcs between successive impurities, walking in the orientation in which all of them
/// are terminal-free. Returns `None` when some `a_j` repeats.
fn boundary_arcs(spec: &GridSpec, a: &[Site]) -> Result<Option<Vec<Vec<usize>>>> {
    let distinct: BTreeSet<Site> = a.iter().copied().collect();
    if distinct.len() != a.len() {
        return Ok(None);
    }
    let mut last = Error::ArcContainsTerminal("no orientation has terminal-free arcs".into());
    for side in [ArcSide::Anticlockwise, ArcSide::Clockwise] {
        let arcs: Result<Vec<Vec<usize>>> = a
            .windows(2)
            .map(|p| boundary_arc(spec, p[0], p[1], side).map(|arc| arc.slots))
            .collect();
        match arcs {
            Ok(arcs) => {
                let inner: BTreeSet<usize> = arcs.iter().flatten().copied().collect();
                let slots = spec.slots();
                if inner.iter().any(|&s| a.contains(&slots[s].site)) {
                    last = Error::InvalidConfig("impurities are not in boundary order".into());
                    continue;
                }
                return Ok(Some(arcs));
            }
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// All impurities on the boundary with boundary dual endpoints: the
/// `(2k − 1) × (2k − 1)` determinant over rows `a_1…a_k, ∂C_1…∂C_{k−1}`.
///
/// Errors when an impurity sits on a terminal site or the terminals interleave the
/// impurities along the boundary.
pub fn count_k_boundary(spec: &GridSpec, a: &[Site]) -> Result<CountResult> {
    if a.len() < 2 {
        return Err(Error::InvalidConfig(
            "count_k_boundary needs at least two impurities".into(),
        ));
    }
    require_k(spec, a.len())?;
    require_rect(spec)?;
    for &s in a {
        if !spec.is_boundary(s) {
            return Err(Error::NotOnBoundary(s.to_string()));
        }
    }
    reject_terminal_sites(spec, a)?;
    let Some(arcs) = boundary_arcs(spec, a)? else {
        return Ok(CountResult::single(BigInt::zero(), Route::Cofactor));
    };
    if arcs.iter().any(|arc| arc.is_empty()) {
        return Ok(CountResult::single(BigInt::zero(), Route::Cofactor));
    }
    boundary_layout(spec, a)?;
    let g = Green::new(spec)?;
    let mut rows = Vec::with_capacity(2 * a.len() - 1);
    for &s in a {
        rows.push(g.site_row(s)?);
    }
    for arc in &arcs {
        rows.push(g.slot_row(arc)?);
    }
    Ok(CountResult::single(g.count(rows)?, Route::Cofactor))
}

/// Builder for slot-level node lists: named nodes in circle order, with every remaining
/// slot either dropped or turned into a singleton.
struct NodeLayout {
    entries: Vec<(usize, String, NodeSpec)>,
}

impl NodeLayout {
    fn new(spec: &GridSpec, named: Vec<(String, Vec<usize>)>, dropped: &BTreeSet<usize>) -> Self {
        let n = spec.slots().len();
        let terms = spec.slot_terminals();
        let mut used: BTreeSet<usize> = dropped.clone();
        let mut entries = Vec::new();
        for (name, slots) in named {
            used.extend(slots.iter().copied());
            entries.push((slots[0], name, NodeSpec::Slots(slots)));
        }
        for (s, term) in terms.iter().enumerate().take(n) {
            if used.contains(&s) {
                continue;
            }
            let name = match term {
                Some(t) => format!("T{}", t + 1),
                None => format!("s{s}"),
            };
            entries.push((s, name, NodeSpec::Slots(vec![s])));
        }
        entries.sort_by_key(|e| e.0);
        NodeLayout { entries }
    }

    fn index(&self, name: &str) -> Result<usize> {
        self.entries
            .iter()
            .position(|e| e.1 == name)
            .ok_or_else(|| Error::InvalidConfig(format!("node {name} missing")))
    }

    fn nodes(&self) -> Vec<NodeSpec> {
        self.entries.iter().map(|e| e.2.clone()).collect()
    }

    /// Nested pairing of the named nodes with the terminals: the named nodes must be
    /// consecutive on the circle, and the `j`-th named node counted from the terminals
    /// on one side pairs with the `j`-th terminal counted from the other side.
    fn nested_pairs(&self) -> Result<Vec<(String, String)>> {
        let seq: Vec<(bool, &str)> = self
            .entries
            .iter()
            .filter(|e| !e.1.starts_with('s'))
            .map(|e| (e.1.starts_with('T'), e.1.as_str()))
            .collect();
        let m = seq.len();
        let start = (0..m)
            .find(|&i| !seq[i].0 && seq[(i + m - 1) % m].0)
            .ok_or_else(|| Error::InvalidConfig("no terminals beside the impurities".into()))?;
        let rot: Vec<(bool, &str)> = (0..m).map(|i| seq[(start + i) % m]).collect();
        let named = rot.iter().take_while(|e| !e.0).count();
        if rot[named..].iter().any(|e| !e.0) || 2 * named != m {
            return Err(Error::InvalidConfig(
                "terminals interleave the impurity nodes".into(),
            ));
        }
        Ok((0..named)
            .map(|j| {
                (
                    rot[named - 1 - j].1.to_string(),
                    rot[named + j].1.to_string(),
                )
            })
            .collect())
    }

    fn blocks(&self, pairs: &[(&str, &str)]) -> Result<Vec<Vec<usize>>> {
        let mut blocks = Vec::new();
        let mut seen = BTreeSet::new();
        for (x, y) in pairs {
            let (i, j) = (self.index(x)?, self.index(y)?);
            seen.insert(i);
            seen.insert(j);
            blocks.push(vec![i, j]);
        }
        for i in 0..self.entries.len() {
            if !seen.contains(&i) {
                blocks.push(vec![i]);
            }
        }
        Ok(blocks)
    }
}

/// Grove partition function of a node layout and pairing.
fn grove_value(spec: &GridSpec, layout: &NodeLayout, pairs: &[(&str, &str)]) -> Result<BigInt> {
    let c = slot_circular(spec, &layout.nodes())?;
    let p = PartitionSpec::auto(layout.entries.len(), layout.blocks(pairs)?)?;
    abs_integer(&grove_count_bipartite(&c, &p)?)
}

fn pattern(
    layout: &NodeLayout,
    pairs: &[(&str, &str)],
    forced: Vec<(Site, Site)>,
) -> Result<ForestPattern> {
    Ok(ForestPattern {
        nodes: layout.nodes(),
        blocks: layout.blocks(pairs)?,
        forced,
        forbidden: Vec::new(),
    })
}

fn slot_of(spec: &GridSpec, s: Site, toward_next: bool) -> Result<usize> {
    let slots = spec.slots();
    let n = slots.len();
    let own: Vec<usize> = (0..n).filter(|&i| slots[i].site == s).collect();
    if own.is_empty() {
        return Err(Error::NotOnBoundary(s.to_string()));
    }
    // last slot of the block when walking forwards, first when walking backwards
    let pick = own.iter().copied().find(|&i| {
        let j = if toward_next {
            (i + 1) % n
        } else {
            (i + n - 1) % n
        };
        slots[j].site != s
    });
    Ok(pick.unwrap_or(own[0]))
}

/// Terminal names after `from_slot` in the given direction, nearest first.
fn terminals_from(spec: &GridSpec, from_slot: usize, forward: bool) -> Vec<String> {
    let terms = spec.slot_terminals();
    let n = terms.len();
    (1..n)
        .map(|d| {
            if forward {
                (from_slot + d) % n
            } else {
                (from_slot + n - d) % n
            }
        })
        .filter_map(|s| terms[s].map(|t| format!("T{}", t + 1)))
        .collect()
}

/// Node layout and nested pairing for impurities `a_1…a_k` on the boundary: node `X_j`
/// is one slot of `a_j`, node `C_j` merges the arc after it, and the `j`-th entry of
/// `(X_1, C_1, …, X_k)` pairs with the `j`-th terminal counted back from `a_1`.
fn boundary_layout(spec: &GridSpec, a: &[Site]) -> Result<(NodeLayout, Vec<(String, String)>)> {
    reject_terminal_sites(spec, a)?;
    let arcs =
        boundary_arcs(spec, a)?.ok_or_else(|| Error::InvalidConfig("repeated impurity".into()))?;
    if arcs.iter().any(|arc| arc.is_empty()) {
        return Err(Error::InvalidConfig(
            "empty arc between successive impurities".into(),
        ));
    }
    let slots = spec.slots();
    let n = slots.len();
    let forward = {
        let first = arcs[0][0];
        slots[(first + n - 1) % n].site == a[0]
    };
    let mut named = Vec::new();
    let mut dropped = BTreeSet::new();
    for (j, &s) in a.iter().enumerate() {
        let anchor = slot_of(spec, s, forward)?;
        for (i, slot) in slots.iter().enumerate() {
            if slot.site == s && i != anchor && spec.slot_terminals()[i].is_none() {
                dropped.insert(i);
            }
        }
        named.push((format!("X{}", j + 1), vec![anchor]));
        if j < arcs.len() {
            named.push((format!("C{}", j + 1), arcs[j].clone()));
        }
    }
    let layout = NodeLayout::new(spec, named, &dropped);
    let pairs = layout.nested_pairs()?;
    Ok((layout, pairs))
}

fn as_refs(pairs: &[(String, String)]) -> Vec<(&str, &str)> {
    pairs
        .iter()
        .map(|(x, y)| (x.as_str(), y.as_str()))
        .collect()
}

/// Forest pattern counted by the boundary determinant for impurities `a_1…a_k`.
pub fn k_boundary_pattern(spec: &GridSpec, a: &[Site]) -> Result<ForestPattern> {
    require_rect(spec)?;
    let (layout, pairs) = boundary_layout(spec, a)?;
    pattern(&layout, &as_refs(&pairs), Vec::new())
}

/// The boundary determinant through the grove partition function of the slotted grid.
pub fn count_k_boundary_grove(spec: &GridSpec, a: &[Site]) -> Result<CountResult> {
    require_k(spec, a.len())?;
    require_rect(spec)?;
    let (layout, pairs) = boundary_layout(spec, a)?;
    Ok(CountResult::single(
        grove_value(spec, &layout, &as_refs(&pairs))?,
        Route::Grove,
    ))
}

/// Forest pattern of the `B` term for the near-boundary impurity `x`: `x`, its auxiliary
/// vertex `c` and `other` each join their own terminal in nested order.
pub fn near_boundary_pattern(spec: &GridSpec, x: Impurity, other: Site) -> Result<ForestPattern> {
    require_k(spec, 2)?;
    require_rect(spec)?;
    let c = auxiliary_vertex(spec, x.site, x.dual)?;
    if c == other {
        return Err(Error::InvalidConfig(format!(
            "auxiliary vertex {c} coincides with the other impurity"
        )));
    }
    let slots = spec.slots();
    let terms = spec.slot_terminals();
    let mut named = Vec::new();
    let mut dropped = BTreeSet::new();
    for (name, s) in [("X", x.site), ("Cx", c), ("Y", other)] {
        let own: Vec<usize> = (0..slots.len())
            .filter(|&i| slots[i].site == s && terms[i].is_none())
            .collect();
        let Some(&anchor) = own.first() else {
            return Err(Error::Unsupported(format!("{s} has no free boundary slot")));
        };
        dropped.extend(own[1..].iter().copied());
        named.push((name.to_string(), vec![anchor]));
    }
    let layout = NodeLayout::new(spec, named, &dropped);
    let pairs = layout.nested_pairs()?;
    pattern(&layout, &as_refs(&pairs), Vec::new())
}

fn chain_cycle_check(spec: &GridSpec, config: &ImpurityConfig) -> Result<()> {
    use crate::lattice::Direction;
    let has = |d: Direction| spec.terminals.iter().any(|t| t.dir == d);
    if has(Direction::N) && has(Direction::S) {
        return Err(Error::Unsupported(
            "chain terminals on both long sides".into(),
        ));
    }
    for imp in &config.impurities {
        Impurity::new(spec, imp.site, imp.dual)?;
        if spec.terminals.iter().any(|t| t.site == imp.site) {
            return Err(Error::Unsupported(format!(
                "impurity on terminal site {}",
                imp.site
            )));
        }
    }
    Ok(())
}

/// One summand of the chain decomposition.
struct ChainTerm {
    name: String,
    layout: NodeLayout,
    pairs: Vec<(String, String)>,
}

/// Tree types of a two-impurity chain: one `A` term per terminal-free arc joining a slot
/// of `a` to a slot of `b`, and one `C` term per impurity whose dual endpoint sits
/// between two terminals on the slot cycle.
fn chain_terms(spec: &GridSpec, config: &ImpurityConfig) -> Result<Vec<ChainTerm>> {
    let slots = spec.slots();
    let n = slots.len();
    let terms = spec.slot_terminals();
    let [a, b] = [config.impurities[0], config.impurities[1]];
    let own = |s: usize| slots[s].site == a.site || slots[s].site == b.site;
    let mut out = Vec::new();
    for s0 in 0..n {
        if !own(s0) {
            continue;
        }
        let mut arc = Vec::new();
        let mut q = (s0 + 1) % n;
        while !own(q) && terms[q].is_none() {
            arc.push(q);
            q = (q + 1) % n;
        }
        if !own(q) || slots[q].site == slots[s0].site || arc.is_empty() {
            continue;
        }
        let dropped: BTreeSet<usize> = (0..n).filter(|&s| own(s) && s != s0 && s != q).collect();
        let named = vec![
            ("P".to_string(), vec![s0]),
            ("C".to_string(), arc),
            ("Q".to_string(), vec![q]),
        ];
        let layout = NodeLayout::new(spec, named, &dropped);
        let seq = terminals_from(spec, q, true);
        let pairs = vec![
            ("Q".to_string(), seq[0].clone()),
            ("C".to_string(), seq[1].clone()),
            ("P".to_string(), seq[2].clone()),
        ];
        out.push(ChainTerm {
            name: format!("A[{}]", out.len() + 1),
            layout,
            pairs,
        });
    }
    for (label, x, y) in [("C_a", a, b), ("C_b", b, a)] {
        let p = spec
            .dual_boundary_position(x.dual)
            .ok_or_else(|| Error::InvalidConfig(format!("dual {} not on the boundary", x.dual)))?;
        let event = |s: usize| -> Option<Option<usize>> {
            match terms[s] {
                Some(t) => Some(Some(t)),
                None if slots[s].site == y.site => Some(None),
                None => None,
            }
        };
        let next = (0..n).find_map(|d| event((p + d) % n));
        let prev = (1..=n).find_map(|d| event((p + n - d) % n));
        if let (Some(Some(t1)), Some(Some(t2))) = (next, prev) {
            let rest = (0..3)
                .find(|&t| t != t1 && t != t2)
                .expect("three terminals");
            let y_slot = (0..n)
                .find(|&s| slots[s].site == y.site)
                .expect("chain site has slots");
            let dropped: BTreeSet<usize> = (0..n)
                .filter(|&s| slots[s].site == x.site || (slots[s].site == y.site && s != y_slot))
                .collect();
            let layout = NodeLayout::new(spec, vec![("Y".to_string(), vec![y_slot])], &dropped);
            let pairs = vec![
                (format!("T{}", t2 + 1), format!("T{}", t1 + 1)),
                ("Y".to_string(), format!("T{}", rest + 1)),
            ];
            out.push(ChainTerm {
                name: label.to_string(),
                layout,
                pairs,
            });
        }
    }
    Ok(out)
}

/// Counts on the chain. One impurity uses the cofactor formula; two impurities sum grove
/// partition functions over the tree types of the slotted chain.
pub fn count_chain(spec: &GridSpec, config: &ImpurityConfig) -> Result<CountResult> {
    spec.validate()?;
    if !spec.shape.is_chain() {
        return Err(Error::InvalidSpec("count_chain needs a chain".into()));
    }
    if config.k() != spec.k {
        return Err(Error::InvalidConfig(format!(
            "{} impurities for k = {}",
            config.k(),
            spec.k
        )));
    }
    match spec.k {
        1 => {
            Impurity::new(spec, config.impurities[0].site, config.impurities[0].dual)?;
            count_one_impurity(spec, config.impurities[0].site)
        }
        2 => {
            chain_cycle_check(spec, config)?;
            let mut parts = Vec::new();
            for term in chain_terms(spec, config)? {
                parts.push((
                    term.name.clone(),
                    grove_value(spec, &term.layout, &as_refs(&term.pairs))?,
                ));
            }
            Ok(CountResult::from_parts(parts, Route::Grove))
        }
        k => Err(Error::Unsupported(format!("chain counts for k = {k}"))),
    }
}

/// Forest patterns of the chain decomposition, one per named term.
pub fn chain_patterns(
    spec: &GridSpec,
    config: &ImpurityConfig,
) -> Result<Vec<(String, ForestPattern)>> {
    if spec.k != 2 || config.k() != 2 || !spec.shape.is_chain() {
        return Err(Error::Unsupported(
            "chain patterns exist for two impurities on a chain".into(),
        ));
    }
    chain_cycle_check(spec, config)?;
    chain_terms(spec, config)?
        .into_iter()
        .map(|t| {
            Ok((
                t.name.clone(),
                pattern(&t.layout, &as_refs(&t.pairs), Vec::new())?,
            ))
        })
        .collect()
}

/// Normalization applied to one-impurity weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Normalization {
    /// `A(x) / (4 Σ A + 2)` with `A = K⁻¹(·, t)`: probability of one fixed dual corner.
    Corner,
    /// `M(x) / Σ M`: share of the primal endpoint among impurity positions on `G₁`.
    PerSite,
}

/// One row of the one-impurity distribution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistributionRow {
    /// Primal endpoint.
    pub site: Site,
    /// `M(x) = |adj K(x, t)|`.
    pub weight: BigInt,
    /// `A(x) / (4 Σ A + 2)`.
    pub corner: RationalScalar,
    /// `M(x) / Σ M`.
    pub per_site: RationalScalar,
}

/// Exact one-impurity distribution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Distribution {
    /// Rows in row-major site order.
    pub rows: Vec<DistributionRow>,
    /// `|det K|`.
    pub det_k: BigInt,
    /// `4 Σ M + 2 det K`: all perfect matchings of `G^(1)`.
    pub total_matchings: BigInt,
}

impl Distribution {
    /// Probability of `x` under the chosen normalization.
    pub fn probability(&self, x: Site, norm: Normalization) -> Option<&RationalScalar> {
        self.rows.iter().find(|r| r.site == x).map(|r| match norm {
            Normalization::Corner => &r.corner,
            Normalization::PerSite => &r.per_site,
        })
    }

    /// Site with the largest weight; the first in row-major order on ties.
    pub fn argmax(&self) -> Option<Site> {
        let mut best: Option<&DistributionRow> = None;
        for r in &self.rows {
            if best.is_none_or(|b| r.weight > b.weight) {
                best = Some(r);
            }
        }
        best.map(|r| r.site)
    }
}

/// One-impurity weights `M(x)` with both normalizations.
pub fn impurity_distribution(spec: &GridSpec) -> Result<Distribution> {
    require_k(spec, 1)?;
    let g = Green::new(spec)?;
    let t = spec.terminals[0].site;
    let ids: Vec<usize> = (0..spec.primal_count()).collect();
    let col = g.matrix().inverse_column(spec.index(t))?;
    let green: Vec<RationalScalar> = ids.iter().map(|&i| col[i].abs()).collect();
    let sum_a: RationalScalar = green.iter().sum();
    let corner_denom = sum_a.clone() * rat(4) + rat(2);
    let weights: Vec<BigInt> = green
        .iter()
        .map(|a| abs_integer(&(a * g.det())))
        .collect::<Result<_>>()?;
    let sum_m: BigInt = weights.iter().sum();
    let det_k = abs_integer(g.det())?;
    let rows = ids
        .iter()
        .map(|&i| DistributionRow {
            site: spec.site(i),
            weight: weights[i].clone(),
            corner: &green[i] / &corner_denom,
            per_site: RationalScalar::new(weights[i].clone(), sum_m.clone()),
        })
        .collect();
    let total_matchings = sum_m * 4 + &det_k * 2;
    Ok(Distribution {
        rows,
        det_k,
        total_matchings,
    })
}
