//! Brute-force ground truth: perfect matchings, spanning trees, groves and
//! constrained spanning forests on small graphs.
//!
//! Every routine here is combinatorial and independent of the determinant formulas.
//! Matchings are listed by backtracking on the lowest uncovered vertex and tallied by a
//! transfer scan over the vertex order. Groves are listed exhaustively on tiny graphs
//! and counted by a connectivity-state sweep on larger ones.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grove::{slot_circular, CircularGraph, NodeSpec};
use crate::lattice::{DualPos, EdgeKind, GridSpec, Label, PlaneGraph, Site};

/// A perfect matching as a sorted list of edge ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Matching {
    /// Matched edge ids in increasing order.
    pub edges: Vec<usize>,
}

/// Placement of one impurity: the non-dual endpoint and the dual endpoint of a matched
/// diagonal edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Placement {
    /// Primal site or terminal carrying the impurity.
    pub primal: Label,
    /// Dual endpoint.
    pub dual: DualPos,
}

/// Impurity placement of a diagonal edge.
pub fn placement(g: &PlaneGraph, edge: usize) -> Option<Placement> {
    let e = &g.edges[edge];
    if e.kind != EdgeKind::DiagonalImpurity {
        return None;
    }
    let (lu, lv) = (g.vertices[e.u].label, g.vertices[e.v].label);
    match (lu, lv) {
        (Label::Dual(d), other) | (other, Label::Dual(d)) => Some(Placement {
            primal: other,
            dual: d,
        }),
        _ => None,
    }
}

impl Matching {
    /// Impurity placements of the matching, sorted.
    pub fn impurities(&self, g: &PlaneGraph) -> Vec<Placement> {
        let mut out: Vec<Placement> = self.edges.iter().filter_map(|&e| placement(g, e)).collect();
        out.sort();
        out
    }
}

/// Stream of perfect matchings in deterministic order.
pub struct MatchingIter<'a> {
    g: &'a PlaneGraph,
    covered: Vec<bool>,
    stack: Vec<(usize, usize, Option<usize>)>,
    started: bool,
    done: bool,
}

impl<'a> MatchingIter<'a> {
    fn lowest_uncovered(&self) -> Option<usize> {
        self.covered.iter().position(|c| !c)
    }

    fn release(&mut self, e: usize) {
        let ed = &self.g.edges[e];
        self.covered[ed.u] = false;
        self.covered[ed.v] = false;
    }
}

impl Iterator for MatchingIter<'_> {
    type Item = Matching;

    fn next(&mut self) -> Option<Matching> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            if self.g.vertex_count() % 2 == 1 {
                self.done = true;
                return None;
            }
            match self.lowest_uncovered() {
                None => {
                    self.done = true;
                    return Some(Matching { edges: Vec::new() });
                }
                Some(v) => self.stack.push((v, 0, None)),
            }
        }
        while let Some(&(v, idx, cur)) = self.stack.last() {
            if let Some(e) = cur {
                self.release(e);
                self.covered[v] = false;
            }
            let adj = self.g.adjacent(v);
            let next = (idx..adj.len()).find(|&j| !self.covered[adj[j].0] && adj[j].0 != v);
            match next {
                None => {
                    self.stack.pop();
                }
                Some(j) => {
                    let (u, e) = adj[j];
                    self.covered[v] = true;
                    self.covered[u] = true;
                    *self.stack.last_mut().expect("frame") = (v, j + 1, Some(e));
                    match self.lowest_uncovered() {
                        None => {
                            let mut edges: Vec<usize> =
                                self.stack.iter().filter_map(|f| f.2).collect();
                            edges.sort_unstable();
                            return Some(Matching { edges });
                        }
                        Some(w) => self.stack.push((w, 0, None)),
                    }
                }
            }
        }
        self.done = true;
        None
    }
}

/// Exhaustive, duplicate-free stream of perfect matchings.
pub fn enumerate_matchings(g: &PlaneGraph) -> MatchingIter<'_> {
    MatchingIter {
        g,
        covered: vec![false; g.vertex_count()],
        stack: Vec::new(),
        started: false,
        done: false,
    }
}

/// Matching counts keyed by the sorted list of impurity placements.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ImpurityTable {
    /// Count per placement list.
    pub entries: BTreeMap<Vec<Placement>, u128>,
    /// Total number of matchings counted.
    pub total: u128,
}

impl ImpurityTable {
    /// Counts aggregated over dual endpoints, keyed by the sorted primal endpoints.
    pub fn by_primal(&self) -> BTreeMap<Vec<Label>, u128> {
        let mut out: BTreeMap<Vec<Label>, u128> = BTreeMap::new();
        for (k, &v) in &self.entries {
            let mut key: Vec<Label> = k.iter().map(|p| p.primal).collect();
            key.sort();
            *out.entry(key).or_insert(0) += v;
        }
        out
    }

    /// Count of one placement list (order-insensitive).
    pub fn get(&self, placements: &[Placement]) -> u128 {
        let mut key = placements.to_vec();
        key.sort();
        self.entries.get(&key).copied().unwrap_or(0)
    }
}

/// Tallies all perfect matchings of a superposition graph by impurity placement.
pub fn count_matchings_by_impurity(g: &PlaneGraph) -> Result<ImpurityTable> {
    count_matchings_filtered(g, &|_| true)
}

/// Like [`count_matchings_by_impurity`] but only diagonal edges accepted by `allow` may be
/// used; every other edge kind is always available.
pub fn count_matchings_filtered(
    g: &PlaneGraph,
    allow: &dyn Fn(&Placement) -> bool,
) -> Result<ImpurityTable> {
    let n = g.vertex_count();
    let mut table = ImpurityTable::default();
    if n % 2 == 1 {
        return Ok(table);
    }
    let mut forward: Vec<Vec<(u32, usize, bool)>> = vec![Vec::new(); n];
    let mut band = 0usize;
    for e in &g.edges {
        let diag = match placement(g, e.id) {
            Some(p) => {
                if !allow(&p) {
                    continue;
                }
                true
            }
            None => false,
        };
        let off = e.v - e.u;
        if off == 0 {
            continue;
        }
        band = band.max(off);
        forward[e.u].push((off as u32, e.id, diag));
    }
    if band > 127 {
        return Err(Error::TooLarge(format!(
            "vertex-order bandwidth {band} exceeds 127"
        )));
    }
    let mut states: HashMap<(u128, Vec<usize>), u128> = HashMap::new();
    states.insert((0, Vec::new()), 1);
    for fwd in forward.iter() {
        let mut next: HashMap<(u128, Vec<usize>), u128> = HashMap::with_capacity(states.len());
        for ((mask, key), count) in states {
            if mask & 1 == 1 {
                let slot = next.entry((mask >> 1, key)).or_insert(0);
                *slot = slot.checked_add(count).ok_or(Error::Overflow)?;
                continue;
            }
            for &(off, e, diag) in fwd {
                let bit = 1u128 << off;
                if mask & bit != 0 {
                    continue;
                }
                let mut k = key.clone();
                if diag {
                    k.push(e);
                }
                let slot = next.entry(((mask | bit) >> 1, k)).or_insert(0);
                *slot = slot.checked_add(count).ok_or(Error::Overflow)?;
            }
        }
        states = next;
    }
    for ((mask, key), count) in states {
        if mask != 0 {
            continue;
        }
        let mut placements: Vec<Placement> = key.iter().filter_map(|&e| placement(g, e)).collect();
        placements.sort();
        let slot = table.entries.entry(placements).or_insert(0);
        *slot = slot.checked_add(count).ok_or(Error::Overflow)?;
        table.total = table.total.checked_add(count).ok_or(Error::Overflow)?;
    }
    Ok(table)
}

/// Multiplicity matrix of a plane graph.
fn multiplicities(g: &PlaneGraph) -> Vec<Vec<u128>> {
    let n = g.vertex_count();
    let mut m = vec![vec![0u128; n]; n];
    for e in &g.edges {
        if e.u != e.v {
            m[e.u][e.v] += e.weight as u128;
            m[e.v][e.u] += e.weight as u128;
        }
    }
    m
}

fn connected(m: &[Vec<u128>]) -> bool {
    let n = m.len();
    if n == 0 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for u in 0..n {
            if m[v][u] > 0 && !seen[u] {
                seen[u] = true;
                stack.push(u);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

fn contract(m: &[Vec<u128>], u: usize, v: usize) -> Vec<Vec<u128>> {
    let n = m.len();
    let keep: Vec<usize> = (0..n).filter(|&x| x != v).collect();
    let mut out = vec![vec![0u128; n - 1]; n - 1];
    for (i, &a) in keep.iter().enumerate() {
        for (j, &b) in keep.iter().enumerate() {
            if i == j {
                continue;
            }
            let mut w = m[a][b];
            if a == u {
                w += m[v][b];
            }
            if b == u {
                w += m[a][v];
            }
            out[i][j] = w;
        }
    }
    out
}

fn delete_vertex(m: &[Vec<u128>], v: usize) -> Vec<Vec<u128>> {
    let keep: Vec<usize> = (0..m.len()).filter(|&x| x != v).collect();
    keep.iter()
        .map(|&a| keep.iter().map(|&b| m[a][b]).collect())
        .collect()
}

fn deletion_contraction(m: Vec<Vec<u128>>) -> Result<u128> {
    let n = m.len();
    if n <= 1 {
        return Ok(1);
    }
    let v = n - 1;
    let nbrs: Vec<usize> = (0..v).filter(|&u| m[v][u] > 0).collect();
    match nbrs.len() {
        0 => Ok(0),
        1 => {
            let w = m[v][nbrs[0]];
            let rest = deletion_contraction(delete_vertex(&m, v))?;
            w.checked_mul(rest).ok_or(Error::Overflow)
        }
        _ => {
            let u = nbrs[0];
            let w = m[v][u];
            let mut del = m.clone();
            del[u][v] = 0;
            del[v][u] = 0;
            let a = deletion_contraction(del)?;
            let b = deletion_contraction(contract(&m, u, v))?;
            a.checked_add(w.checked_mul(b).ok_or(Error::Overflow)?)
                .ok_or(Error::Overflow)
        }
    }
}

/// Number of spanning trees by deletion–contraction, counting edge multiplicities.
pub fn count_spanning_trees(g: &PlaneGraph) -> Result<u128> {
    let m = multiplicities(g);
    if !connected(&m) {
        return Err(Error::Disconnected);
    }
    deletion_contraction(m)
}

/// All spanning trees, each as sorted `(edge id, parallel copy)` pairs. Refuses graphs
/// with more than a million trees.
pub fn list_spanning_trees(g: &PlaneGraph) -> Result<Vec<Vec<(usize, u32)>>> {
    let total = count_spanning_trees(g)?;
    if total > 1_000_000 {
        return Err(Error::TooLarge(format!("{total} spanning trees")));
    }
    let copies: Vec<(usize, u32, usize, usize)> = g
        .edges
        .iter()
        .filter(|e| e.u != e.v)
        .flat_map(|e| (0..e.weight).map(move |c| (e.id, c, e.u, e.v)))
        .collect();
    let n = g.vertex_count();
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    let labels: Vec<usize> = (0..n).collect();
    list_trees_rec(
        &copies,
        0,
        n.saturating_sub(1),
        &labels,
        &mut chosen,
        &mut out,
    );
    Ok(out)
}

fn list_trees_rec(
    copies: &[(usize, u32, usize, usize)],
    i: usize,
    need: usize,
    labels: &[usize],
    chosen: &mut Vec<(usize, u32)>,
    out: &mut Vec<Vec<(usize, u32)>>,
) {
    if need == 0 {
        out.push(chosen.clone());
        return;
    }
    if copies.len() - i < need {
        return;
    }
    let (e, c, u, v) = copies[i];
    let (lu, lv) = (labels[u], labels[v]);
    if lu != lv {
        let merged: Vec<usize> = labels
            .iter()
            .map(|&l| if l == lv { lu } else { l })
            .collect();
        chosen.push((e, c));
        list_trees_rec(copies, i + 1, need - 1, &merged, chosen, out);
        chosen.pop();
    }
    list_trees_rec(copies, i + 1, need, labels, chosen, out);
}

/// Canonical set partition of the nodes: blocks sorted internally and by first element.
pub fn canonical_partition(blocks: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = blocks
        .iter()
        .map(|b| {
            let mut b = b.clone();
            b.sort_unstable();
            b
        })
        .collect();
    out.sort();
    out
}

/// Largest circular graph handled by exhaustive grove listing.
pub const GROVE_LISTING_LIMIT: usize = 12;

/// Exhaustive grove census: every spanning forest whose trees each meet a node, tallied
/// by the induced partition of the nodes.
pub fn enumerate_groves_by_partition(c: &CircularGraph) -> Result<BTreeMap<Vec<Vec<usize>>, u128>> {
    let n = c.vertex_count();
    if n > GROVE_LISTING_LIMIT {
        return Err(Error::TooLarge(format!(
            "{n} vertices, limit {GROVE_LISTING_LIMIT}"
        )));
    }
    let mut out = BTreeMap::new();
    let labels: Vec<usize> = (0..n).collect();
    groves_rec(c, 0, &labels, 1, &mut out)?;
    Ok(out)
}

fn groves_rec(
    c: &CircularGraph,
    i: usize,
    labels: &[usize],
    weight: u128,
    out: &mut BTreeMap<Vec<Vec<usize>>, u128>,
) -> Result<()> {
    if i == c.edges.len() {
        let p = c.node_count();
        let node_labels: BTreeSet<usize> = (0..p).map(|v| labels[v]).collect();
        if labels.iter().any(|l| !node_labels.contains(l)) {
            return Ok(());
        }
        let mut blocks: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (v, &label) in labels.iter().enumerate().take(p) {
            blocks.entry(label).or_default().push(v);
        }
        let key = canonical_partition(&blocks.into_values().collect::<Vec<_>>());
        let slot = out.entry(key).or_insert(0);
        *slot = slot.checked_add(weight).ok_or(Error::Overflow)?;
        return Ok(());
    }
    let (u, v, w) = c.edges[i];
    let (lu, lv) = (labels[u], labels[v]);
    if lu != lv {
        let merged: Vec<usize> = labels
            .iter()
            .map(|&l| if l == lv { lu } else { l })
            .collect();
        groves_rec(
            c,
            i + 1,
            &merged,
            weight.checked_mul(w as u128).ok_or(Error::Overflow)?,
            out,
        )?;
    }
    groves_rec(c, i + 1, labels, weight, out)
}

/// Number of groves of `c` inducing exactly the node partition `blocks`, by listing.
pub fn enumerate_groves(c: &CircularGraph, blocks: &[Vec<usize>]) -> Result<u128> {
    let census = enumerate_groves_by_partition(c)?;
    Ok(census
        .get(&canonical_partition(blocks))
        .copied()
        .unwrap_or(0))
}

/// Edge constraints for the grove sweep, in assembled vertex indices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EdgeConstraints {
    /// Edges that every counted forest must contain (one of the parallel copies).
    pub forced: Vec<(usize, usize)>,
    /// Edges no counted forest may contain.
    pub forbidden: Vec<(usize, usize)>,
}

fn relabel(state: &mut [u8]) {
    let mut map = [u8::MAX; 256];
    let mut next = 0u8;
    for s in state.iter_mut() {
        if map[*s as usize] == u8::MAX {
            map[*s as usize] = next;
            next += 1;
        }
        *s = map[*s as usize];
    }
}

/// Vertex sweep order over the interior with the smaller frontier, and its width.
fn sweep_order(c: &CircularGraph) -> (Vec<usize>, usize) {
    let interior: Vec<usize> = c.interior().collect();
    let mut best: Option<(Vec<usize>, usize)> = None;
    for transpose in [false, true] {
        let mut order = interior.clone();
        order.sort_by_key(|&v| {
            let (x, y) = c.pos[v];
            if transpose {
                (x, y, v)
            } else {
                (y, x, v)
            }
        });
        let width = frontier_width(c, &order);
        if best.as_ref().is_none_or(|b| width < b.1) {
            best = Some((order, width));
        }
    }
    best.expect("two candidates")
}

fn frontier_width(c: &CircularGraph, order: &[usize]) -> usize {
    let rank = ranks(c, order);
    let mut last = vec![0usize; c.vertex_count()];
    for &(u, v, _) in &c.edges {
        let r = edge_rank(&rank, u, v);
        for x in [u, v] {
            last[x] = last[x].max(r);
        }
    }
    let mut width = 0;
    for (step, _) in order.iter().enumerate() {
        let active = order[..=step].iter().filter(|&&v| last[v] > step).count();
        width = width.max(active + 1);
    }
    width
}

fn ranks(c: &CircularGraph, order: &[usize]) -> Vec<Option<usize>> {
    let mut rank = vec![None; c.vertex_count()];
    for (i, &v) in order.iter().enumerate() {
        rank[v] = Some(i);
    }
    rank
}

fn edge_rank(rank: &[Option<usize>], u: usize, v: usize) -> usize {
    match (rank[u], rank[v]) {
        (Some(a), Some(b)) => a.max(b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => 0,
    }
}

/// Counts groves of `c` inducing exactly the partition `blocks` of its nodes, subject to
/// edge constraints, by sweeping interior vertices and tracking the connectivity of the
/// nodes and the active frontier.
pub fn count_groves_sweep(
    c: &CircularGraph,
    blocks: &[Vec<usize>],
    constraints: &EdgeConstraints,
) -> Result<u128> {
    let p = c.node_count();
    let mut block_of = vec![usize::MAX; p];
    for (i, b) in blocks.iter().enumerate() {
        for &v in b {
            if v >= p || block_of[v] != usize::MAX {
                return Err(Error::InvalidConfig(format!("bad block list {blocks:?}")));
            }
            block_of[v] = i;
        }
    }
    if block_of.contains(&usize::MAX) {
        return Err(Error::InvalidConfig("blocks do not cover the nodes".into()));
    }
    let norm = |(a, b): (usize, usize)| (a.min(b), a.max(b));
    let forced: BTreeSet<(usize, usize)> = constraints.forced.iter().map(|&e| norm(e)).collect();
    let forbidden: BTreeSet<(usize, usize)> =
        constraints.forbidden.iter().map(|&e| norm(e)).collect();
    for e in &forced {
        if c.weight(e.0, e.1) == 0 || forbidden.contains(e) {
            return Ok(0);
        }
    }
    let (order, _) = sweep_order(c);
    let rank = ranks(c, &order);
    let mut edges: Vec<(usize, usize, usize, u64)> = c
        .edges
        .iter()
        .map(|&(u, v, w)| (edge_rank(&rank, u, v), u, v, w))
        .collect();
    edges.sort();
    let mut remaining = vec![0usize; c.vertex_count()];
    for &(_, u, v, _) in &edges {
        remaining[u] += 1;
        remaining[v] += 1;
    }
    if c.interior().any(|v| remaining[v] == 0) {
        return Ok(0);
    }
    let mut slot_of: Vec<Option<usize>> = vec![None; c.vertex_count()];
    for (v, s) in slot_of.iter_mut().enumerate().take(p) {
        *s = Some(v);
    }
    let mut layout: Vec<usize> = (0..p).collect();
    let mut init: Vec<u8> = (0..p).map(|v| v as u8).collect();
    relabel(&mut init);
    let mut states: HashMap<Vec<u8>, u128> = HashMap::new();
    states.insert(init, 1);
    if p > 200 {
        return Err(Error::TooLarge(format!("{p} nodes")));
    }
    for &(_, u, v, w) in &edges {
        for x in [u, v] {
            if slot_of[x].is_none() {
                slot_of[x] = Some(layout.len());
                layout.push(x);
                let mut next = HashMap::with_capacity(states.len());
                for (mut s, cnt) in states {
                    s.push(u8::MAX - 1);
                    relabel(&mut s);
                    next.insert(s, cnt);
                }
                states = next;
            }
        }
        let (su, sv) = (slot_of[u].expect("active"), slot_of[v].expect("active"));
        let key = norm((u, v));
        let may_skip = !forced.contains(&key);
        let may_take = !forbidden.contains(&key);
        let mut next: HashMap<Vec<u8>, u128> = HashMap::with_capacity(states.len() * 2);
        for (s, cnt) in states {
            if may_skip {
                let slot = next.entry(s.clone()).or_insert(0);
                *slot = slot.checked_add(cnt).ok_or(Error::Overflow)?;
            }
            if may_take && s[su] != s[sv] {
                let (lu, lv) = (s[su], s[sv]);
                let bu = (0..p).find(|&n| s[n] == lu).map(|n| block_of[n]);
                let bv = (0..p).find(|&n| s[n] == lv).map(|n| block_of[n]);
                if let (Some(a), Some(b)) = (bu, bv) {
                    if a != b {
                        continue;
                    }
                }
                let mut t: Vec<u8> = s.iter().map(|&l| if l == lv { lu } else { l }).collect();
                relabel(&mut t);
                let add = cnt.checked_mul(w as u128).ok_or(Error::Overflow)?;
                let slot = next.entry(t).or_insert(0);
                *slot = slot.checked_add(add).ok_or(Error::Overflow)?;
            }
        }
        states = next;
        remaining[u] -= 1;
        remaining[v] -= 1;
        for x in [u, v] {
            if x < p || remaining[x] > 0 {
                continue;
            }
            let pos = slot_of[x].take().expect("active");
            layout.remove(pos);
            for s in slot_of.iter_mut().flatten() {
                if *s > pos {
                    *s -= 1;
                }
            }
            let mut next: HashMap<Vec<u8>, u128> = HashMap::with_capacity(states.len());
            for (mut s, cnt) in states {
                let l = s.remove(pos);
                if !s.contains(&l) {
                    continue;
                }
                relabel(&mut s);
                let slot = next.entry(s).or_insert(0);
                *slot = slot.checked_add(cnt).ok_or(Error::Overflow)?;
            }
            states = next;
        }
    }
    let mut total = 0u128;
    for (s, cnt) in states {
        let ok = blocks.iter().all(|b| b.iter().all(|&n| s[n] == s[b[0]]));
        if ok {
            total = total.checked_add(cnt).ok_or(Error::Overflow)?;
        }
    }
    Ok(total)
}

/// Connection pattern for spanning forests of the rooted grid, phrased on the slotted
/// grid: node groups of boundary slots, the required node partition and edge constraints.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ForestPattern {
    /// Nodes in anticlockwise order.
    pub nodes: Vec<NodeSpec>,
    /// Required partition of node indices.
    pub blocks: Vec<Vec<usize>>,
    /// Primal edges every forest must use.
    pub forced: Vec<(Site, Site)>,
    /// Primal edges no forest may use.
    pub forbidden: Vec<(Site, Site)>,
}

impl ForestPattern {
    /// Circular graph realizing the node groups on the slotted grid.
    pub fn circular(&self, spec: &GridSpec) -> Result<CircularGraph> {
        slot_circular(spec, &self.nodes)
    }

    fn constraints(&self, spec: &GridSpec) -> Result<EdgeConstraints> {
        let p = self.nodes.len();
        let map = |list: &[(Site, Site)]| -> Result<Vec<(usize, usize)>> {
            list.iter()
                .map(|&(a, b)| {
                    for s in [a, b] {
                        if !spec.contains(s) {
                            return Err(Error::InvalidSpec(format!("site {s} not in grid")));
                        }
                    }
                    Ok((p + spec.index(a), p + spec.index(b)))
                })
                .collect()
        };
        Ok(EdgeConstraints {
            forced: map(&self.forced)?,
            forbidden: map(&self.forbidden)?,
        })
    }
}

/// Number of spanning forests of the slotted grid in which every component meets exactly
/// the node groups of one block of the pattern, counted by the grove sweep.
pub fn enumerate_constrained_forests(spec: &GridSpec, pattern: &ForestPattern) -> Result<u128> {
    let c = pattern.circular(spec)?;
    count_groves_sweep(&c, &pattern.blocks, &pattern.constraints(spec)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_g1, build_rooted, Direction, RootedVariant, Shape, TerminalSite};

    fn rect(w: usize, h: usize) -> GridSpec {
        GridSpec::rect_one(
            w,
            h,
            TerminalSite {
                site: Site::new(1, 1),
                dir: Direction::S,
            },
        )
        .unwrap()
    }

    #[test]
    fn spanning_tree_counts() {
        let g = build_rooted(&rect(2, 2), RootedVariant::TerminalsIdentified).unwrap();
        assert_eq!(count_spanning_trees(&g).unwrap(), 192);
        assert_eq!(list_spanning_trees(&g).unwrap().len(), 192);
        let spec = GridSpec::new(
            Shape::Chain { len: 3 },
            1,
            vec![TerminalSite {
                site: Site::new(1, 1),
                dir: Direction::N,
            }],
        )
        .unwrap();
        let g = build_rooted(&spec, RootedVariant::TerminalsIdentified).unwrap();
        assert_eq!(count_spanning_trees(&g).unwrap(), 56);
        let g = build_g1(&rect(2, 1)).unwrap();
        assert_eq!(count_spanning_trees(&g).unwrap(), 1);
        let g = build_g1(&rect(1, 1)).unwrap();
        assert_eq!(count_spanning_trees(&g).unwrap(), 1);
    }

    #[test]
    fn groves_on_path() {
        let c = CircularGraph::from_edges(3, &[(0, 1, 1), (1, 2, 1)], &[0, 2]).unwrap();
        assert_eq!(enumerate_groves(&c, &[vec![0, 1]]).unwrap(), 1);
        assert_eq!(enumerate_groves(&c, &[vec![0], vec![1]]).unwrap(), 2);
        let swept =
            count_groves_sweep(&c, &[vec![0], vec![1]], &EdgeConstraints::default()).unwrap();
        assert_eq!(swept, 2);
    }

    #[test]
    fn crossing_partition_has_no_groves() {
        let edges = [
            (0, 4, 1),
            (1, 4, 1),
            (2, 4, 1),
            (3, 4, 1),
            (0, 5, 1),
            (5, 1, 1),
        ];
        let c = CircularGraph::from_edges(6, &edges, &[0, 1, 2, 3]).unwrap();
        assert!(enumerate_groves_by_partition(&c)
            .unwrap()
            .keys()
            .all(|k| crate::grove::is_noncrossing(k, 4) || k.is_empty()));
    }
}
