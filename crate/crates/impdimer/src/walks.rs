//! Randomized algorithms on the rooted grid graph: loop-erased random walks, Wilson's
//! uniform spanning tree sampler, simple-random-walk hitting estimators and
//! statistics of the terminal component of a uniform tree.
//!
//! Every walk steps from a vertex along one of its incident edge copies chosen
//! uniformly, so a weighted edge of multiplicity `w` is `w` distinct moves. On the
//! rooted grid graph each primal vertex has exactly four moves, one per edge slot.
//! Randomness comes from [`RngSeed`], which fixes ChaCha8 as the generator family.

use std::collections::{BTreeMap, HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::lattice::{
    build_rooted, EdgeKind, GridSpec, Label, PlaneGraph, Role, RootedVariant, Site, Slot,
};

/// A 64-bit seed for the ChaCha8 stream generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// A fresh generator positioned at the start of this seed's stream.
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

/// One step option: the target vertex, the edge id and the copy index within a
/// weighted edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Move {
    /// Vertex reached.
    pub to: usize,
    /// Edge id in the plane graph.
    pub edge: usize,
    /// Copy index, below the edge weight.
    pub copy: u32,
}

/// Move tables of a plane graph, one entry per edge copy at each vertex.
#[derive(Clone, Debug)]
pub struct WalkGraph {
    moves: Vec<Vec<Move>>,
}

impl WalkGraph {
    /// Expands every weighted edge of `g` into its copies, in edge-id order.
    pub fn new(g: &PlaneGraph) -> Self {
        let moves = (0..g.vertex_count())
            .map(|v| {
                g.adjacent(v)
                    .iter()
                    .flat_map(|&(to, edge)| {
                        (0..g.edges[edge].weight).map(move |copy| Move { to, edge, copy })
                    })
                    .collect()
            })
            .collect();
        WalkGraph { moves }
    }

    /// Number of vertices.
    pub fn len(&self) -> usize {
        self.moves.len()
    }

    /// True when the graph has no vertices.
    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    /// Moves available at `v`.
    pub fn moves(&self, v: usize) -> &[Move] {
        &self.moves[v]
    }

    fn step(&self, v: usize, rng: &mut ChaCha8Rng) -> Result<Move> {
        let opts = &self.moves[v];
        if opts.is_empty() {
            return Err(Error::Unreachable(v));
        }
        Ok(opts[rng.random_range(0..opts.len() as u32) as usize])
    }

    /// Whether some vertex with `target[v]` set is reachable from `from`.
    fn reaches(&self, from: usize, target: &[bool]) -> bool {
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([from]);
        seen[from] = true;
        while let Some(v) = queue.pop_front() {
            if target[v] {
                return true;
            }
            for m in &self.moves[v] {
                if !seen[m.to] {
                    seen[m.to] = true;
                    queue.push_back(m.to);
                }
            }
        }
        false
    }
}

/// A loop-erased walk from a start vertex to a target set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LoopErasedPath {
    /// Vertices of the erased path, starting vertex first and target vertex last.
    pub vertices: Vec<usize>,
    /// Moves between consecutive vertices of the erased path.
    pub moves: Vec<Move>,
    /// Number of steps taken by the underlying walk.
    pub raw_steps: usize,
}

/// Runs a walk from `from` until it enters `target` and erases loops chronologically.
pub fn lerw_with(
    wg: &WalkGraph,
    from: usize,
    target: &[bool],
    rng: &mut ChaCha8Rng,
) -> Result<LoopErasedPath> {
    if from >= wg.len() || target.len() != wg.len() {
        return Err(Error::UnknownVertex(from));
    }
    if !wg.reaches(from, target) {
        return Err(Error::Unreachable(from));
    }
    let mut vertices = vec![from];
    let mut moves = Vec::new();
    let mut position: HashMap<usize, usize> = HashMap::from([(from, 0)]);
    let mut raw_steps = 0;
    let mut current = from;
    while !target[current] {
        let m = wg.step(current, rng)?;
        raw_steps += 1;
        if let Some(&p) = position.get(&m.to) {
            for v in vertices.drain(p + 1..) {
                position.remove(&v);
            }
            moves.truncate(p);
        } else {
            position.insert(m.to, vertices.len());
            vertices.push(m.to);
            moves.push(m);
        }
        current = m.to;
    }
    Ok(LoopErasedPath {
        vertices,
        moves,
        raw_steps,
    })
}

/// Loop-erased random walk on `g` from `from` to the vertex set `targets`.
pub fn lerw(
    g: &PlaneGraph,
    from: usize,
    targets: &[usize],
    seed: RngSeed,
) -> Result<LoopErasedPath> {
    let wg = WalkGraph::new(g);
    let mut target = vec![false; wg.len()];
    for &t in targets {
        if t >= wg.len() {
            return Err(Error::UnknownVertex(t));
        }
        target[t] = true;
    }
    lerw_with(&wg, from, &target, &mut seed.rng())
}

/// A spanning tree given by a parent move at every non-root vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreeSample {
    /// Root vertex id.
    pub root: usize,
    /// Move towards the root from each vertex; `None` only at the root.
    pub parent: Vec<Option<Move>>,
}

impl TreeSample {
    /// Edge copies of the tree, sorted. Two samples are the same tree iff keys agree.
    pub fn key(&self) -> Vec<(usize, u32)> {
        let mut k: Vec<(usize, u32)> = self
            .parent
            .iter()
            .flatten()
            .map(|m| (m.edge, m.copy))
            .collect();
        k.sort_unstable();
        k
    }

    /// Whether every vertex reaches the root along parent moves without repetition.
    pub fn is_spanning_tree(&self) -> bool {
        let n = self.parent.len();
        if self.root >= n || self.parent[self.root].is_some() {
            return false;
        }
        (0..n).all(|v| {
            let mut cur = v;
            for _ in 0..n {
                if cur == self.root {
                    return true;
                }
                match self.parent[cur] {
                    Some(m) => cur = m.to,
                    None => return false,
                }
            }
            cur == self.root
        })
    }

    /// `(vertex, move)` pairs whose move enters the root.
    pub fn root_moves(&self) -> Vec<(usize, Move)> {
        self.parent
            .iter()
            .enumerate()
            .filter_map(|(v, m)| m.filter(|m| m.to == self.root).map(|m| (v, m)))
            .collect()
    }

    /// For each vertex, the move by which its tree path enters the root.
    pub fn exits(&self) -> Vec<Option<Move>> {
        let n = self.parent.len();
        let mut exit: Vec<Option<Move>> = vec![None; n];
        let mut done = vec![false; n];
        done[self.root] = true;
        for v in 0..n {
            let mut path = Vec::new();
            let mut cur = v;
            while !done[cur] {
                match self.parent[cur] {
                    Some(m) if m.to == self.root => {
                        exit[cur] = Some(m);
                        done[cur] = true;
                    }
                    Some(m) => {
                        path.push(cur);
                        cur = m.to;
                    }
                    None => done[cur] = true,
                }
            }
            for p in path {
                exit[p] = exit[cur];
                done[p] = true;
            }
        }
        exit
    }

    /// Vertices whose tree path to the root leaves through an edge tagged with terminal `t`.
    pub fn terminal_component(&self, g: &PlaneGraph, t: usize) -> Vec<usize> {
        self.exits()
            .iter()
            .enumerate()
            .filter(|(_, m)| m.is_some_and(|m| g.edges[m.edge].terminal == Some(t)))
            .map(|(v, _)| v)
            .collect()
    }
}

/// Wilson's algorithm with an explicit generator. Start vertices are taken in id order.
pub fn wilson_with(wg: &WalkGraph, root: usize, rng: &mut ChaCha8Rng) -> Result<TreeSample> {
    let n = wg.len();
    let mut in_tree = vec![false; n];
    in_tree[root] = true;
    let mut parent: Vec<Option<Move>> = vec![None; n];
    for v in 0..n {
        if in_tree[v] {
            continue;
        }
        let path = lerw_with(wg, v, &in_tree, rng)?;
        for (i, m) in path.moves.iter().enumerate() {
            let u = path.vertices[i];
            parent[u] = Some(*m);
            in_tree[u] = true;
        }
    }
    Ok(TreeSample { root, parent })
}

/// Uniform spanning tree of `g` rooted at its root vertex.
pub fn wilson_sample(g: &PlaneGraph, seed: RngSeed) -> Result<TreeSample> {
    let root = root_of(g)?;
    wilson_with(&WalkGraph::new(g), root, &mut seed.rng())
}

/// `count` consecutive uniform spanning trees drawn from one seeded stream.
pub fn wilson_samples(g: &PlaneGraph, count: usize, seed: RngSeed) -> Result<Vec<TreeSample>> {
    let root = root_of(g)?;
    let wg = WalkGraph::new(g);
    let mut rng = seed.rng();
    (0..count)
        .map(|_| wilson_with(&wg, root, &mut rng))
        .collect()
}

fn root_of(g: &PlaneGraph) -> Result<usize> {
    g.with_role(Role::Root)
        .first()
        .copied()
        .ok_or_else(|| Error::InvalidSpec("graph has no root vertex".into()))
}

/// Exact running tally of integer observations. Merging is associative and commutative.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    /// Number of observations.
    pub n: u64,
    /// Sum of observations.
    pub sum: u128,
    /// Sum of squared observations.
    pub sum_sq: u128,
}

impl Tally {
    /// Records one observation.
    pub fn push(&mut self, x: u64) {
        self.n += 1;
        self.sum += x as u128;
        self.sum_sq += (x as u128) * (x as u128);
    }

    /// Combines two tallies.
    pub fn merge(self, other: Tally) -> Tally {
        Tally {
            n: self.n + other.n,
            sum: self.sum + other.sum,
            sum_sq: self.sum_sq + other.sum_sq,
        }
    }

    /// Sample mean with its standard error.
    pub fn estimate(&self) -> Estimate {
        if self.n == 0 {
            return Estimate {
                mean: f64::NAN,
                stderr: f64::NAN,
                samples: 0,
            };
        }
        let n = self.n as f64;
        let mean = self.sum as f64 / n;
        let var = if self.n > 1 {
            ((self.sum_sq as f64) - n * mean * mean).max(0.0) / (n - 1.0)
        } else {
            0.0
        };
        Estimate {
            mean,
            stderr: (var / n).sqrt(),
            samples: self.n,
        }
    }
}

/// A Monte Carlo estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    /// Point estimate.
    pub mean: f64,
    /// Standard error of the estimate.
    pub stderr: f64,
    /// Number of samples.
    pub samples: u64,
}

impl Estimate {
    /// Binomial proportion estimate for `hits` successes out of `n` trials.
    pub fn proportion(hits: u64, n: u64) -> Self {
        let p = hits as f64 / n as f64;
        Estimate {
            mean: p,
            stderr: (p * (1.0 - p) / n as f64).sqrt(),
            samples: n,
        }
    }

    /// Symmetric confidence interval `mean ± z·stderr`.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        (self.mean - z * self.stderr, self.mean + z * self.stderr)
    }

    /// Whether `value` lies within `z` standard errors. A zero standard error is
    /// replaced by the resolution `1/samples`.
    pub fn covers(&self, value: f64, z: f64) -> bool {
        let se = if self.stderr > 0.0 {
            self.stderr
        } else {
            1.0 / (self.samples.max(1) as f64)
        };
        (self.mean - value).abs() <= z * se + 1e-12
    }
}

/// Pearson chi-square test of `counts` against equal expected frequencies. Returns the
/// statistic and its upper-tail p-value.
pub fn uniformity_test(counts: &[u64]) -> Result<(f64, f64)> {
    if counts.len() < 2 {
        return Err(Error::OutOfRange(
            "uniformity test needs at least two cells".into(),
        ));
    }
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let stat: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let dist =
        ChiSquared::new((counts.len() - 1) as f64).map_err(|e| Error::OutOfRange(e.to_string()))?;
    Ok((stat, 1.0 - dist.cdf(stat)))
}

/// Histogram of tree keys over a batch of samples.
pub fn tree_histogram(samples: &[TreeSample]) -> BTreeMap<Vec<(usize, u32)>, u64> {
    let mut h = BTreeMap::new();
    for s in samples {
        *h.entry(s.key()).or_insert(0) += 1;
    }
    h
}

/// Statistics of the terminal component over uniform spanning trees.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TiStats {
    /// Seed of the stream.
    pub seed: RngSeed,
    /// Component size tally.
    pub length: Tally,
    /// Membership counts per primal site, in row-major order.
    pub membership: Vec<(Site, u64)>,
}

impl TiStats {
    /// Estimate of the expected component size.
    pub fn mean_length(&self) -> Estimate {
        self.length.estimate()
    }

    /// Estimate of the probability that `s` lies in the component.
    pub fn membership_frequency(&self, s: Site) -> Option<Estimate> {
        self.membership
            .iter()
            .find(|(x, _)| *x == s)
            .map(|&(_, c)| Estimate::proportion(c, self.length.n))
    }

    /// Combines statistics of independent runs.
    pub fn merge(mut self, other: &TiStats) -> TiStats {
        self.length = self.length.merge(other.length);
        for (m, o) in self.membership.iter_mut().zip(&other.membership) {
            m.1 += o.1;
        }
        self
    }

    /// Versioned JSON report.
    pub fn to_json(&self) -> serde_json::Value {
        let e = self.mean_length();
        serde_json::json!({
            "schema": 1,
            "kind": "ti-length",
            "seed": self.seed.0,
            "samples": self.length.n,
            "mean": e.mean,
            "stderr": e.stderr,
            "membership": self.membership.iter().map(|&(s, c)| {
                let f = Estimate::proportion(c, self.length.n);
                serde_json::json!({"x": s.x, "y": s.y, "frequency": f.mean, "stderr": f.stderr})
            }).collect::<Vec<_>>(),
        })
    }
}

/// Monte Carlo statistics of the terminal component size `l_T`, counted in vertices,
/// over `samples` uniform spanning trees of the rooted grid graph.
pub fn ti_length_stats(spec: &GridSpec, samples: usize, seed: RngSeed) -> Result<TiStats> {
    if spec.terminals.len() != 1 {
        return Err(Error::InvalidConfig(
            "terminal component statistics need exactly one terminal".into(),
        ));
    }
    let g = build_rooted(spec, RootedVariant::TerminalsIdentified)?;
    let root = root_of(&g)?;
    let wg = WalkGraph::new(&g);
    let mut rng = seed.rng();
    let sites = spec.sites();
    let ids: Vec<usize> = sites.iter().map(|&s| g.primal(s)).collect::<Result<_>>()?;
    let mut membership: Vec<(Site, u64)> = sites.iter().map(|&s| (s, 0)).collect();
    let mut length = Tally::default();
    let mut in_comp = vec![false; g.vertex_count()];
    for _ in 0..samples {
        let tree = wilson_with(&wg, root, &mut rng)?;
        in_comp.iter_mut().for_each(|b| *b = false);
        let comp = tree.terminal_component(&g, 0);
        for &v in &comp {
            in_comp[v] = true;
        }
        length.push(comp.len() as u64);
        for (slot, &id) in membership.iter_mut().zip(&ids) {
            slot.1 += in_comp[id] as u64;
        }
    }
    Ok(TiStats {
        seed,
        length,
        membership,
    })
}

/// Absorption counts of one slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SlotHits {
    /// Slot-cycle index.
    pub index: usize,
    /// The slot.
    pub slot: Slot,
    /// Terminal attached at the slot, if any.
    pub terminal: Option<usize>,
    /// Walks absorbed through this slot.
    pub hits: u64,
}

/// Absorption frequencies of simple random walks from one start site.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HittingEstimate {
    /// Seed of the stream.
    pub seed: RngSeed,
    /// Start site.
    pub start: Site,
    /// Number of walks.
    pub walks: u64,
    /// Counts per boundary slot in slot-cycle order.
    pub slots: Vec<SlotHits>,
}

impl HittingEstimate {
    /// Frequency of absorption through slot `index`.
    pub fn slot_frequency(&self, index: usize) -> Option<Estimate> {
        self.slots
            .iter()
            .find(|s| s.index == index)
            .map(|s| Estimate::proportion(s.hits, self.walks))
    }

    /// Frequency of absorption through the terminal edge of terminal `t`.
    pub fn terminal_frequency(&self, t: usize) -> Option<Estimate> {
        self.slots
            .iter()
            .find(|s| s.terminal == Some(t))
            .map(|s| Estimate::proportion(s.hits, self.walks))
    }

    /// Sum of all slot frequencies. Equals one because absorption is certain.
    pub fn total_frequency(&self) -> f64 {
        self.slots.iter().map(|s| s.hits).sum::<u64>() as f64 / self.walks as f64
    }

    /// Versioned JSON report.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema": 1,
            "kind": "srw-hitting",
            "seed": self.seed.0,
            "start": {"x": self.start.x, "y": self.start.y},
            "walks": self.walks,
            "slots": self.slots.iter().map(|s| {
                let f = Estimate::proportion(s.hits, self.walks);
                serde_json::json!({
                    "index": s.index, "x": s.slot.site.x, "y": s.slot.site.y, "dir": s.slot.dir.to_string(),
                    "terminal": s.terminal, "hits": s.hits, "frequency": f.mean, "stderr": f.stderr,
                })
            }).collect::<Vec<_>>(),
        })
    }
}

/// Maps each root-entering move of the rooted grid graph to its slot-cycle index. Plain
/// root edges of weight `w` at a site cover its `w` terminal-free slots in cycle order.
pub fn root_move_slots(spec: &GridSpec, g: &PlaneGraph) -> Result<HashMap<(usize, u32), usize>> {
    let slots = spec.slots();
    let slot_terms = spec.slot_terminals();
    let mut map = HashMap::new();
    for e in &g.edges {
        if e.kind != EdgeKind::RootEdge {
            continue;
        }
        let owner = match g.vertices[e.u].label {
            Label::Primal(s) => s,
            _ => match g.vertices[e.v].label {
                Label::Primal(s) => s,
                _ => continue,
            },
        };
        let own: Vec<usize> = (0..slots.len())
            .filter(|&i| slots[i].site == owner && slot_terms[i] == e.terminal)
            .collect();
        if own.len() != e.weight as usize {
            return Err(Error::InvalidSpec(format!(
                "root edge at {owner} does not match its slots"
            )));
        }
        for (c, &i) in own.iter().enumerate() {
            map.insert((e.id, c as u32), i);
        }
    }
    Ok(map)
}

/// Runs `walks` simple random walks from `x` on the rooted grid graph, each stepping
/// uniformly over the four edge slots until it is absorbed at the root, and records
/// the slot of absorption.
pub fn srw_hitting_estimate(
    spec: &GridSpec,
    x: Site,
    walks: usize,
    seed: RngSeed,
) -> Result<HittingEstimate> {
    if !spec.contains(x) {
        return Err(Error::InvalidSpec(format!("site {x} not in grid")));
    }
    let g = build_rooted(spec, RootedVariant::TerminalsIdentified)?;
    let root = root_of(&g)?;
    let wg = WalkGraph::new(&g);
    let slot_of = root_move_slots(spec, &g)?;
    let slots = spec.slots();
    let slot_terms = spec.slot_terminals();
    let mut hits = vec![0u64; slots.len()];
    let start = g.primal(x)?;
    let mut rng = seed.rng();
    for _ in 0..walks {
        let mut cur = start;
        loop {
            let m = wg.step(cur, &mut rng)?;
            if m.to == root {
                hits[slot_of[&(m.edge, m.copy)]] += 1;
                break;
            }
            cur = m.to;
        }
    }
    let slots = slots
        .iter()
        .enumerate()
        .map(|(index, &slot)| SlotHits {
            index,
            slot,
            terminal: slot_terms[index],
            hits: hits[index],
        })
        .collect();
    Ok(HittingEstimate {
        seed,
        start: x,
        walks: walks as u64,
        slots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Direction, Shape, TerminalSite};

    fn one_by_one() -> GridSpec {
        GridSpec::rect_one(
            1,
            1,
            TerminalSite {
                site: Site::new(1, 1),
                dir: Direction::S,
            },
        )
        .unwrap()
    }

    #[test]
    fn single_vertex_trees_are_equally_likely() {
        let g = build_rooted(&one_by_one(), RootedVariant::TerminalsIdentified).unwrap();
        let samples = wilson_samples(&g, 100_000, RngSeed(1)).unwrap();
        let h = tree_histogram(&samples);
        assert_eq!(h.len(), 4);
        for &c in h.values() {
            let e = Estimate::proportion(c, 100_000);
            assert!(e.covers(0.25, 3.0), "{e:?}");
        }
    }

    #[test]
    fn fixed_seed_reproduces_tree() {
        let spec = GridSpec::rect_one(
            3,
            3,
            TerminalSite {
                site: Site::new(1, 1),
                dir: Direction::S,
            },
        )
        .unwrap();
        let g = build_rooted(&spec, RootedVariant::TerminalsIdentified).unwrap();
        assert_eq!(
            wilson_sample(&g, RngSeed(42)).unwrap(),
            wilson_sample(&g, RngSeed(42)).unwrap()
        );
        assert!(wilson_sample(&g, RngSeed(42)).unwrap().is_spanning_tree());
    }

    #[test]
    fn two_vertex_graph_gives_single_edge() {
        let spec = GridSpec::new(
            Shape::Chain { len: 1 },
            1,
            vec![TerminalSite {
                site: Site::new(1, 1),
                dir: Direction::N,
            }],
        )
        .unwrap();
        let g = build_rooted(&spec, RootedVariant::TerminalsIdentified).unwrap();
        let root = root_of(&g).unwrap();
        let p = lerw(&g, 0, &[root], RngSeed(3)).unwrap();
        assert_eq!(p.vertices, vec![0, root]);
        assert_eq!(p.moves.len(), 1);
    }

    #[test]
    fn one_by_one_hitting_is_symmetric() {
        let est = srw_hitting_estimate(&one_by_one(), Site::new(1, 1), 40_000, RngSeed(5)).unwrap();
        assert_eq!(est.total_frequency(), 1.0);
        for s in &est.slots {
            assert!(Estimate::proportion(s.hits, est.walks).covers(0.25, 3.0));
        }
    }

    #[test]
    fn tally_merge_is_exact() {
        let (mut a, mut b, mut all) = (Tally::default(), Tally::default(), Tally::default());
        for x in 0..10u64 {
            all.push(x);
            if x % 2 == 0 {
                a.push(x)
            } else {
                b.push(x)
            }
        }
        assert_eq!(a.merge(b), all);
        assert_eq!(b.merge(a), all);
    }
}
