//! Circular planar graphs, response matrices and bipartite grove determinants.
//!
//! A circular graph is a weighted graph with an anticlockwise-ordered list of nodes on
//! its outer face. Vertices are renumbered so that nodes come first, followed by the
//! interior vertices. The Laplacian splits into the node block `F`, the mixed blocks
//! `G` and `H`, and the interior block `K`; the response matrix is `L = G K⁻¹ H − F`.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{GridSpec, PlaneGraph, Site};
use crate::linalg::{rat, ExactMatrix, RationalScalar};

/// A weighted graph with nodes listed first in anticlockwise order.
#[derive(Clone, Debug)]
pub struct CircularGraph {
    node_count: usize,
    /// Source vertex ids merged into each assembled vertex.
    pub origin: Vec<Vec<usize>>,
    /// Display name of each assembled vertex.
    pub names: Vec<String>,
    /// Half-unit position of each assembled vertex, used to order sweeps.
    pub pos: Vec<(i64, i64)>,
    /// Undirected weighted edges `(u, v, multiplicity)` with `u < v`, sorted, no loops.
    pub edges: Vec<(usize, usize, u64)>,
}

impl CircularGraph {
    /// Builds a circular graph from an arbitrary vertex set `0..n`, weighted edges and an
    /// ordered node list. Parallel edges are merged by adding weights; loops are dropped.
    pub fn from_edges(n: usize, edges: &[(usize, usize, u64)], nodes: &[usize]) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::EmptyNodes);
        }
        let mut seen = BTreeSet::new();
        for &v in nodes {
            if v >= n {
                return Err(Error::UnknownVertex(v));
            }
            if !seen.insert(v) {
                return Err(Error::InvalidConfig(format!("node {v} listed twice")));
            }
        }
        let mut order: Vec<usize> = nodes.to_vec();
        order.extend((0..n).filter(|v| !seen.contains(v)));
        let mut remap = vec![0; n];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new;
        }
        let mut merged: BTreeMap<(usize, usize), u64> = BTreeMap::new();
        for &(u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::UnknownVertex(u.max(v)));
            }
            let (a, b) = (remap[u], remap[v]);
            if a == b || w == 0 {
                continue;
            }
            *merged.entry((a.min(b), a.max(b))).or_insert(0) += w;
        }
        Ok(CircularGraph {
            node_count: nodes.len(),
            origin: order.iter().map(|&o| vec![o]).collect(),
            names: order.iter().map(|o| format!("v{o}")).collect(),
            pos: order.iter().map(|&o| (0, o as i64)).collect(),
            edges: merged.into_iter().map(|((a, b), w)| (a, b, w)).collect(),
        })
    }

    /// Number of nodes.
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Total number of vertices.
    pub fn vertex_count(&self) -> usize {
        self.origin.len()
    }

    /// Node indices `0..node_count` in anticlockwise order.
    pub fn nodes(&self) -> std::ops::Range<usize> {
        0..self.node_count
    }

    /// Interior vertex indices.
    pub fn interior(&self) -> std::ops::Range<usize> {
        self.node_count..self.vertex_count()
    }

    /// Assembled vertex containing a source vertex id.
    pub fn index_of(&self, source: usize) -> Option<usize> {
        self.origin.iter().position(|o| o.contains(&source))
    }

    /// Full weighted Laplacian over all assembled vertices.
    pub fn laplacian(&self) -> ExactMatrix {
        let n = self.vertex_count();
        let mut m = vec![vec![0i64; n]; n];
        for &(u, v, w) in &self.edges {
            let w = w as i64;
            m[u][u] += w;
            m[v][v] += w;
            m[u][v] -= w;
            m[v][u] -= w;
        }
        ExactMatrix::from_rows(&m)
    }

    fn block(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> ExactMatrix {
        let full = self.laplacian();
        let r: Vec<usize> = rows.collect();
        let c: Vec<usize> = cols.collect();
        full.submatrix(&r, &c).expect("indices in range")
    }

    /// Node–node block `F`.
    pub fn f_block(&self) -> ExactMatrix {
        self.block(self.nodes(), self.nodes())
    }

    /// Node–interior block `G`.
    pub fn g_block(&self) -> ExactMatrix {
        self.block(self.nodes(), self.interior())
    }

    /// Interior–node block `H`.
    pub fn h_block(&self) -> ExactMatrix {
        self.block(self.interior(), self.nodes())
    }

    /// Interior–interior block `K`.
    pub fn k_block(&self) -> ExactMatrix {
        self.block(self.interior(), self.interior())
    }

    /// Weight between two assembled vertices.
    pub fn weight(&self, u: usize, v: usize) -> u64 {
        let key = (u.min(v), u.max(v));
        self.edges
            .binary_search_by(|&(a, b, _)| (a, b).cmp(&key))
            .map(|i| self.edges[i].2)
            .unwrap_or(0)
    }
}

/// True if two blocks interleave along a circle of `n` positions.
fn blocks_cross(x: &[usize], y: &[usize], n: usize) -> bool {
    let mut seq = Vec::new();
    for p in 0..n {
        if x.contains(&p) {
            seq.push(0u8);
        } else if y.contains(&p) {
            seq.push(1u8);
        }
    }
    cyclic_transitions(&seq) > 2
}

fn cyclic_transitions<T: PartialEq>(seq: &[T]) -> usize {
    if seq.len() < 2 {
        return 0;
    }
    (0..seq.len())
        .filter(|&i| seq[i] != seq[(i + 1) % seq.len()])
        .count()
}

/// Merges identification classes of a plane graph and extracts a circular graph whose
/// nodes are the given source vertices (each standing for its class, if any).
pub fn assemble_circular(
    g: &PlaneGraph,
    identify: &[Vec<usize>],
    nodes: &[usize],
) -> Result<CircularGraph> {
    if nodes.is_empty() {
        return Err(Error::EmptyNodes);
    }
    let n = g.vertex_count();
    let mut class = (0..n).collect::<Vec<usize>>();
    let mut claimed = BTreeSet::new();
    for cl in identify {
        for &v in cl {
            if v >= n {
                return Err(Error::UnknownVertex(v));
            }
            if !claimed.insert(v) {
                return Err(Error::InvalidConfig(format!(
                    "vertex {v} in two identification classes"
                )));
            }
        }
    }
    let boundary_pos: BTreeMap<usize, usize> = g
        .boundary
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i))
        .collect();
    let members: Vec<Vec<usize>> = identify
        .iter()
        .map(|cl| {
            cl.iter()
                .filter_map(|v| boundary_pos.get(v).copied())
                .collect()
        })
        .collect();
    let nb = g.boundary.len();
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            if blocks_cross(&members[i], &members[j], nb) {
                return Err(Error::CrossingIdentification);
            }
        }
    }
    for &v in nodes {
        if v >= n {
            return Err(Error::UnknownVertex(v));
        }
        let on_face = match identify.iter().find(|cl| cl.contains(&v)) {
            Some(cl) => cl.iter().any(|u| boundary_pos.contains_key(u)),
            None => boundary_pos.contains_key(&v),
        };
        if !on_face {
            return Err(Error::NodeNotOnBoundary(v));
        }
    }
    for cl in identify {
        if let Some(&rep) = cl.iter().min() {
            for &v in cl {
                class[v] = rep;
            }
        }
    }
    let reps: Vec<usize> = (0..n).filter(|&v| class[v] == v).collect();
    let rep_index: BTreeMap<usize, usize> = reps.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let edges: Vec<(usize, usize, u64)> = g
        .edges
        .iter()
        .map(|e| {
            (
                rep_index[&class[e.u]],
                rep_index[&class[e.v]],
                e.weight as u64,
            )
        })
        .collect();
    let node_idx: Vec<usize> = nodes.iter().map(|&v| rep_index[&class[v]]).collect();
    let mut c = CircularGraph::from_edges(reps.len(), &edges, &node_idx)?;
    for k in 0..c.vertex_count() {
        let rep = reps[c.origin[k][0]];
        let group: Vec<usize> = (0..n).filter(|&v| class[v] == rep).collect();
        c.pos[k] = g.vertices[rep].pos;
        c.names[k] = if group.len() == 1 {
            format!("{:?}", g.vertices[rep].label)
        } else {
            format!("merged{group:?}")
        };
        c.origin[k] = group;
    }
    Ok(c)
}

/// A node of a slot-based circular graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum NodeSpec {
    /// Slots of the slot cycle merged into one node; each slot edge joins its owner to it.
    Slots(Vec<usize>),
    /// A fresh node joined to a primal site by one new edge.
    Attached(Site),
}

/// Circular graph on the primal grid whose nodes are given by `nodes`. Slots that belong
/// to no node are dropped. Interior vertices are the primal sites in row-major order, so
/// site `s` has index `nodes.len() + spec.index(s)`.
pub fn slot_circular(spec: &GridSpec, nodes: &[NodeSpec]) -> Result<CircularGraph> {
    spec.validate()?;
    let slots = spec.slots();
    let terms = spec.slot_terminals();
    let np = spec.primal_count();
    let mut owner_of = vec![None; slots.len()];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (k, node) in nodes.iter().enumerate() {
        match node {
            NodeSpec::Slots(list) => {
                if list.is_empty() {
                    return Err(Error::InvalidConfig(format!("node {k} has no slots")));
                }
                for &si in list {
                    if si >= slots.len() {
                        return Err(Error::OutOfRange(format!("slot {si}")));
                    }
                    if owner_of[si].replace(k).is_some() {
                        return Err(Error::InvalidConfig(format!("slot {si} in two nodes")));
                    }
                }
                groups.push(list.clone());
            }
            NodeSpec::Attached(s) => {
                if !spec.contains(*s) {
                    return Err(Error::InvalidSpec(format!("site {s} not in grid")));
                }
            }
        }
    }
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            if blocks_cross(&groups[i], &groups[j], slots.len()) {
                return Err(Error::CrossingIdentification);
            }
        }
    }
    let mut edges: Vec<(usize, usize, u64)> = spec
        .primal_edges()
        .into_iter()
        .map(|(u, v)| (spec.index(u), spec.index(v), 1))
        .collect();
    for (k, node) in nodes.iter().enumerate() {
        match node {
            NodeSpec::Slots(list) => {
                for &si in list {
                    edges.push((spec.index(slots[si].site), np + k, 1));
                }
            }
            NodeSpec::Attached(s) => edges.push((spec.index(*s), np + k, 1)),
        }
    }
    let node_ids: Vec<usize> = (np..np + nodes.len()).collect();
    let mut c = CircularGraph::from_edges(np + nodes.len(), &edges, &node_ids)?;
    for (k, node) in nodes.iter().enumerate() {
        let (name, pos) = match node {
            NodeSpec::Slots(list) => {
                let name = match (list.len(), terms[list[0]]) {
                    (1, Some(t)) => format!("T{}", t + 1),
                    _ => format!("slots{list:?}"),
                };
                (name, GridSpec::slot_pos(slots[list[0]]))
            }
            NodeSpec::Attached(s) => (format!("X{s}"), GridSpec::primal_pos(*s)),
        };
        c.names[k] = name;
        c.pos[k] = pos;
    }
    for s in spec.sites() {
        let i = nodes.len() + spec.index(s);
        c.names[i] = format!("{s}");
        c.pos[i] = GridSpec::primal_pos(s);
    }
    Ok(c)
}

/// Response matrix `L = G K⁻¹ H − F` over the nodes.
pub fn response_matrix(c: &CircularGraph) -> Result<ExactMatrix> {
    let nodes: Vec<usize> = c.nodes().collect();
    response_submatrix(c, &nodes, &nodes)
}

/// Rows and columns of the response matrix selected by node indices.
pub fn response_submatrix(
    c: &CircularGraph,
    rows: &[usize],
    cols: &[usize],
) -> Result<ExactMatrix> {
    let p = c.node_count();
    for &v in rows.iter().chain(cols) {
        if v >= p {
            return Err(Error::UnknownVertex(v));
        }
    }
    let lap = c.laplacian();
    let interior: Vec<usize> = c.interior().collect();
    let mut out = ExactMatrix::zeros(rows.to_vec(), cols.to_vec());
    let solved = if interior.is_empty() {
        Vec::new()
    } else {
        let k = lap.submatrix(&interior, &interior)?;
        let rhs: Vec<Vec<RationalScalar>> = cols
            .iter()
            .map(|&b| interior.iter().map(|&i| lap.at(i, b).clone()).collect())
            .collect();
        k.solve_many(&rhs)?
    };
    for (ri, &r) in rows.iter().enumerate() {
        for (ci, &b) in cols.iter().enumerate() {
            let mut acc = -lap.at(r, b).clone();
            for (q, &i) in interior.iter().enumerate() {
                let gi = lap.at(r, i);
                if !gi.is_zero() {
                    acc += gi * &solved[ci][q];
                }
            }
            out.set(ri, ci, acc);
        }
    }
    Ok(out)
}

/// Copy of `k` with the diagonal entry at vertex `x` incremented by one.
pub fn perturbed_matrix(k: &ExactMatrix, x: usize) -> Result<ExactMatrix> {
    let i = k.row_index(x)?;
    let j = k.col_index(x)?;
    let mut m = k.clone();
    let v = m.at(i, j) + rat(1);
    m.set(i, j, v);
    Ok(m)
}

/// Colour of a node in a bipartite partition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NodeColor {
    /// Red side (rows of the determinant).
    Red,
    /// Blue side (columns of the determinant).
    Blue,
    /// Singleton node straddling the colour change.
    Split,
}

/// Partition of the nodes into blocks with a red/blue colouring.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PartitionSpec {
    /// Blocks of node indices.
    pub blocks: Vec<Vec<usize>>,
    /// Colour of each node.
    pub colors: Vec<NodeColor>,
}

/// True if no two blocks interleave around the circle of `n` nodes.
pub fn is_noncrossing(blocks: &[Vec<usize>], n: usize) -> bool {
    (0..blocks.len())
        .all(|i| (i + 1..blocks.len()).all(|j| !blocks_cross(&blocks[i], &blocks[j], n)))
}

fn check_cover(blocks: &[Vec<usize>], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for b in blocks {
        if b.is_empty() {
            return Err(Error::InvalidConfig("empty block".into()));
        }
        for &v in b {
            if v >= n {
                return Err(Error::UnknownVertex(v));
            }
            if seen[v] {
                return Err(Error::InvalidConfig(format!("node {v} in two blocks")));
            }
            seen[v] = true;
        }
    }
    if let Some(v) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidConfig(format!("node {v} in no block")));
    }
    Ok(())
}

impl PartitionSpec {
    /// Validates an explicit colouring.
    pub fn new(blocks: Vec<Vec<usize>>, colors: Vec<NodeColor>) -> Result<Self> {
        let n = colors.len();
        check_cover(&blocks, n)?;
        if !is_noncrossing(&blocks, n) {
            return Err(Error::CrossingPartition);
        }
        for b in &blocks {
            match b.len() {
                1 => {}
                2 => {
                    let (x, y) = (colors[b[0]], colors[b[1]]);
                    let ok = matches!(
                        (x, y),
                        (NodeColor::Red, NodeColor::Blue) | (NodeColor::Blue, NodeColor::Red)
                    );
                    if !ok {
                        return Err(Error::NonBipartite(format!("block {b:?} is not red–blue")));
                    }
                }
                _ => {
                    return Err(Error::NonBipartite(format!(
                        "block {b:?} has more than two nodes"
                    )))
                }
            }
        }
        let seq: Vec<NodeColor> = colors
            .iter()
            .copied()
            .filter(|&c| c != NodeColor::Split)
            .collect();
        if cyclic_transitions(&seq) > 2 {
            return Err(Error::NonBipartite("colours are not contiguous".into()));
        }
        Ok(PartitionSpec { blocks, colors })
    }

    /// Every node in its own block.
    pub fn singletons(n: usize) -> Self {
        PartitionSpec {
            blocks: (0..n).map(|v| vec![v]).collect(),
            colors: vec![NodeColor::Red; n],
        }
    }

    /// Finds a contiguous colouring by cutting the circle into two arcs such that every
    /// two-node block straddles the cut.
    pub fn auto(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        check_cover(&blocks, n)?;
        if !is_noncrossing(&blocks, n) {
            return Err(Error::CrossingPartition);
        }
        if let Some(b) = blocks.iter().find(|b| b.len() > 2) {
            return Err(Error::NonBipartite(format!(
                "block {b:?} has more than two nodes"
            )));
        }
        let pairs: Vec<&Vec<usize>> = blocks.iter().filter(|b| b.len() == 2).collect();
        if pairs.is_empty() {
            return Ok(PartitionSpec {
                blocks,
                colors: vec![NodeColor::Red; n],
            });
        }
        for start in 0..n {
            for len in 1..n {
                let red = |v: usize| (v + n - start) % n < len;
                if pairs.iter().all(|b| red(b[0]) != red(b[1])) {
                    let colors = (0..n)
                        .map(|v| {
                            if red(v) {
                                NodeColor::Red
                            } else {
                                NodeColor::Blue
                            }
                        })
                        .collect();
                    return PartitionSpec::new(blocks, colors);
                }
            }
        }
        Err(Error::NonBipartite(
            "no contiguous colouring separates every pair".into(),
        ))
    }

    /// Number of nodes.
    pub fn node_count(&self) -> usize {
        self.colors.len()
    }

    fn paired(&self, color: NodeColor) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .blocks
            .iter()
            .filter(|b| b.len() == 2)
            .flat_map(|b| b.iter().copied())
            .filter(|&v| self.colors[v] == color)
            .collect();
        out.sort_unstable();
        out
    }

    /// Red nodes of two-node blocks in anticlockwise order.
    pub fn red_rows(&self) -> Vec<usize> {
        self.paired(NodeColor::Red)
    }

    /// Blue nodes of two-node blocks in anticlockwise order.
    pub fn blue_cols(&self) -> Vec<usize> {
        self.paired(NodeColor::Blue)
    }

    /// Block index of each node.
    pub fn block_of(&self) -> Vec<usize> {
        let mut out = vec![0; self.node_count()];
        for (i, b) in self.blocks.iter().enumerate() {
            for &v in b {
                out[v] = i;
            }
        }
        out
    }
}

/// Grove partition function `Z(σ) = |det L_{R,B}| · |det K|` of a bipartite partition.
/// Singleton blocks, split or not, contribute no rows or columns.
pub fn grove_count_bipartite(c: &CircularGraph, p: &PartitionSpec) -> Result<RationalScalar> {
    if p.node_count() != c.node_count() {
        return Err(Error::DimensionMismatch(format!(
            "partition over {} nodes, graph has {}",
            p.node_count(),
            c.node_count()
        )));
    }
    let validated = PartitionSpec::new(p.blocks.clone(), p.colors.clone())?;
    let interior: Vec<usize> = c.interior().collect();
    let det_k = if interior.is_empty() {
        rat(1)
    } else {
        c.laplacian().submatrix(&interior, &interior)?.det()?.abs()
    };
    let (rows, cols) = (validated.red_rows(), validated.blue_cols());
    if rows.is_empty() {
        return Ok(det_k);
    }
    let l = response_submatrix(c, &rows, &cols)?;
    Ok(l.det()?.abs() * det_k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ratio;

    #[test]
    fn path_response() {
        let c = CircularGraph::from_edges(3, &[(0, 1, 1), (1, 2, 1)], &[0, 2]).unwrap();
        assert_eq!(c.k_block().det().unwrap(), rat(2));
        let l = response_matrix(&c).unwrap();
        assert_eq!(l.at(0, 1), &ratio(1, 2));
        assert_eq!(l.at(0, 0), &ratio(-1, 2));
        for i in 0..2 {
            let s: RationalScalar = (0..2).map(|j| l.at(i, j).clone()).sum();
            assert!(s.is_zero());
        }
    }

    #[test]
    fn single_node_response_is_zero() {
        let c = CircularGraph::from_edges(3, &[(0, 1, 1), (1, 2, 1), (0, 2, 1)], &[0]).unwrap();
        let l = response_matrix(&c).unwrap();
        assert!(l.at(0, 0).is_zero());
    }

    #[test]
    fn f_zero_block_identity() {
        let c =
            CircularGraph::from_edges(4, &[(0, 1, 1), (1, 2, 2), (2, 3, 1), (1, 3, 1)], &[0, 3])
                .unwrap();
        let g = c.g_block();
        let kinv = c.k_block().inverse().unwrap();
        let prod = g.mul(&kinv).unwrap().mul(&c.h_block()).unwrap();
        let l = response_matrix(&c).unwrap();
        assert_eq!(l.at(0, 1), prod.at(0, 1));
    }

    #[test]
    fn partition_validation() {
        assert_eq!(
            PartitionSpec::auto(4, vec![vec![0, 2], vec![1, 3]]),
            Err(Error::CrossingPartition)
        );
        assert!(PartitionSpec::auto(4, vec![vec![0, 1], vec![2, 3]]).is_ok());
        assert!(matches!(
            PartitionSpec::auto(3, vec![vec![0, 1, 2]]),
            Err(Error::NonBipartite(_))
        ));
        let bad = PartitionSpec::new(
            vec![vec![0, 1], vec![2, 3]],
            vec![
                NodeColor::Red,
                NodeColor::Blue,
                NodeColor::Red,
                NodeColor::Blue,
            ],
        );
        assert!(matches!(bad, Err(Error::NonBipartite(_))));
        let split = PartitionSpec::new(
            vec![vec![0, 2], vec![1]],
            vec![NodeColor::Red, NodeColor::Split, NodeColor::Blue],
        );
        assert!(split.is_ok());
    }

    #[test]
    fn perturbation() {
        let k = ExactMatrix::from_rows(&[vec![4]]);
        assert_eq!(perturbed_matrix(&k, 0).unwrap().at(0, 0), &rat(5));
        assert_eq!(perturbed_matrix(&k, 3), Err(Error::UnknownVertex(3)));
    }

    #[test]
    fn triangle_with_centre() {
        let c =
            CircularGraph::from_edges(4, &[(0, 3, 1), (1, 3, 1), (2, 3, 1)], &[0, 1, 2]).unwrap();
        let p = PartitionSpec::auto(3, vec![vec![0, 1], vec![2]]).unwrap();
        assert_eq!(grove_count_bipartite(&c, &p).unwrap(), rat(1));
        assert_eq!(
            grove_count_bipartite(&c, &PartitionSpec::singletons(3)).unwrap(),
            rat(3)
        );
    }
}
