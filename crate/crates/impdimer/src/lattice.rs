//! Graph families on the square lattice: the primal grid, its dual, terminals,
//! the superposition graph carrying impurity edges, rooted graphs and boundary arcs.
//!
//! Positions are stored in half-units: the primal vertex `(x, y)` sits at
//! `(2x, 2y)` and the dual vertex `(i, j)` at `(2i + 1, 2j + 1)`, so every
//! crossing point and slot midpoint has exact integer coordinates.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Outward direction of a boundary slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Direction {
    /// Upwards (increasing `y`).
    N,
    /// Downwards (decreasing `y`).
    S,
    /// Rightwards (increasing `x`).
    E,
    /// Leftwards (decreasing `x`).
    W,
}

impl Direction {
    /// Unit offset `(dx, dy)` of the direction.
    pub fn offset(self) -> (i64, i64) {
        match self {
            Direction::N => (0, 1),
            Direction::S => (0, -1),
            Direction::E => (1, 0),
            Direction::W => (-1, 0),
        }
    }

    /// Parses `N`, `S`, `E` or `W` (case-insensitive).
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "N" => Ok(Direction::N),
            "S" => Ok(Direction::S),
            "E" => Ok(Direction::E),
            "W" => Ok(Direction::W),
            other => Err(Error::InvalidSpec(format!("unknown direction '{other}'"))),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Direction::N => "N",
            Direction::S => "S",
            Direction::E => "E",
            Direction::W => "W",
        };
        f.write_str(c)
    }
}

/// A primal vertex, 1-indexed: `1 ≤ x ≤ width`, `1 ≤ y ≤ height`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Site {
    /// Column, starting at 1.
    pub x: usize,
    /// Row, starting at 1.
    pub y: usize,
}

impl Site {
    /// Creates a site.
    pub fn new(x: usize, y: usize) -> Self {
        Site { x, y }
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// A dual vertex, 0-indexed: `0 ≤ i ≤ width`, `0 ≤ j ≤ height`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DualPos {
    /// Column, starting at 0.
    pub i: usize,
    /// Row, starting at 0.
    pub j: usize,
}

impl DualPos {
    /// Creates a dual position.
    pub fn new(i: usize, j: usize) -> Self {
        DualPos { i, j }
    }
}

impl fmt::Display for DualPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.i, self.j)
    }
}

/// Shape of the primal grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Shape {
    /// Rectangle with `width` columns and `height` rows.
    Rect {
        /// Number of columns.
        width: usize,
        /// Number of rows.
        height: usize,
    },
    /// Path of `len` vertices, realised as a `len × 1` rectangle.
    Chain {
        /// Number of vertices.
        len: usize,
    },
}

impl Shape {
    /// `(width, height)` of the realised rectangle.
    pub fn dims(&self) -> (usize, usize) {
        match *self {
            Shape::Rect { width, height } => (width, height),
            Shape::Chain { len } => (len, 1),
        }
    }

    /// True for chains.
    pub fn is_chain(&self) -> bool {
        matches!(self, Shape::Chain { .. })
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Rect { width, height } => write!(f, "rect:{width}x{height}"),
            Shape::Chain { len } => write!(f, "chain:{len}"),
        }
    }
}

/// Attachment site of a terminal: a boundary vertex and an outward direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TerminalSite {
    /// Primal vertex the terminal hangs from.
    pub site: Site,
    /// Outward direction of the terminal edge.
    pub dir: Direction,
}

impl fmt::Display for TerminalSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}:{}", self.site.x, self.site.y, self.dir)
    }
}

/// A boundary slot: one outward edge position of a boundary primal vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Slot {
    /// Owner of the slot.
    pub site: Site,
    /// Outward direction.
    pub dir: Direction,
}

/// What a dual edge crosses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Crossing {
    /// An interior dual edge crossed by the primal edge between two sites.
    Primal(Site, Site),
    /// A boundary dual edge crossed by the outward edge of a slot (index into the slot cycle).
    Slot(usize),
}

/// A dual edge with the primal-side edge crossing it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DualEdge {
    /// First endpoint.
    pub a: DualPos,
    /// Second endpoint.
    pub b: DualPos,
    /// The crossing primal-side edge.
    pub crossing: Crossing,
}

/// Declarative description of the primal grid, impurity count and terminals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GridSpec {
    /// Grid shape.
    pub shape: Shape,
    /// Number of impurities.
    pub k: usize,
    /// The `2k − 1` terminal attachment sites.
    pub terminals: Vec<TerminalSite>,
}

impl GridSpec {
    /// Creates and validates a specification.
    pub fn new(shape: Shape, k: usize, terminals: Vec<TerminalSite>) -> Result<Self> {
        let spec = GridSpec {
            shape,
            k,
            terminals,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Rectangle with one terminal.
    pub fn rect_one(width: usize, height: usize, t: TerminalSite) -> Result<Self> {
        Self::new(Shape::Rect { width, height }, 1, vec![t])
    }

    /// Checks every invariant of the specification.
    pub fn validate(&self) -> Result<()> {
        let (w, h) = self.shape.dims();
        if w < 1 || h < 1 {
            return Err(Error::InvalidSpec(format!(
                "dimensions must be at least 1, got {w}x{h}"
            )));
        }
        if self.k < 1 {
            return Err(Error::InvalidSpec(
                "impurity count k must be at least 1".into(),
            ));
        }
        if self.terminals.len() != 2 * self.k - 1 {
            return Err(Error::InvalidSpec(format!(
                "k = {} needs exactly {} terminals, got {}",
                self.k,
                2 * self.k - 1,
                self.terminals.len()
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for t in &self.terminals {
            if !self.contains(t.site) {
                return Err(Error::InvalidSpec(format!(
                    "terminal {t} lies outside the grid"
                )));
            }
            if !self.outward_dirs(t.site).contains(&t.dir) {
                return Err(Error::InvalidSpec(format!(
                    "terminal {t} does not point into the outer face"
                )));
            }
            if !seen.insert(t.site) {
                return Err(Error::InvalidSpec(format!(
                    "more than one terminal on vertex {}",
                    t.site
                )));
            }
        }
        Ok(())
    }

    /// `(width, height)`.
    pub fn dims(&self) -> (usize, usize) {
        self.shape.dims()
    }

    /// Number of primal vertices.
    pub fn primal_count(&self) -> usize {
        let (w, h) = self.dims();
        w * h
    }

    /// True if the site lies in the grid.
    pub fn contains(&self, s: Site) -> bool {
        let (w, h) = self.dims();
        (1..=w).contains(&s.x) && (1..=h).contains(&s.y)
    }

    /// True if the site lies on the boundary of the primal grid.
    pub fn is_boundary(&self, s: Site) -> bool {
        self.contains(s) && !self.outward_dirs(s).is_empty()
    }

    /// Row-major index of a site.
    pub fn index(&self, s: Site) -> usize {
        let (w, _) = self.dims();
        (s.y - 1) * w + (s.x - 1)
    }

    /// Site with a given row-major index.
    pub fn site(&self, idx: usize) -> Site {
        let (w, _) = self.dims();
        Site::new(idx % w + 1, idx / w + 1)
    }

    /// All sites in row-major order.
    pub fn sites(&self) -> Vec<Site> {
        (0..self.primal_count()).map(|i| self.site(i)).collect()
    }

    /// Outward directions available at a site (slots), in anticlockwise slot order.
    pub fn outward_dirs(&self, s: Site) -> Vec<Direction> {
        self.slots()
            .into_iter()
            .filter(|sl| sl.site == s)
            .map(|sl| sl.dir)
            .collect()
    }

    /// Primal neighbours of a site.
    pub fn neighbors(&self, s: Site) -> Vec<Site> {
        let (w, h) = self.dims();
        let mut out = Vec::with_capacity(4);
        if s.x > 1 {
            out.push(Site::new(s.x - 1, s.y));
        }
        if s.x < w {
            out.push(Site::new(s.x + 1, s.y));
        }
        if s.y > 1 {
            out.push(Site::new(s.x, s.y - 1));
        }
        if s.y < h {
            out.push(Site::new(s.x, s.y + 1));
        }
        out
    }

    /// Primal edges `(u, v)` with `index(u) < index(v)`, sorted.
    pub fn primal_edges(&self) -> Vec<(Site, Site)> {
        let mut out = Vec::new();
        for s in self.sites() {
            for n in self.neighbors(s) {
                if self.index(n) > self.index(s) {
                    out.push((s, n));
                }
            }
        }
        out
    }

    /// The slot cycle in anticlockwise order, starting at the bottom-left corner:
    /// bottom side rightwards, right side upwards, top side leftwards, left side downwards.
    pub fn slots(&self) -> Vec<Slot> {
        let (w, h) = self.dims();
        let mut out = Vec::with_capacity(2 * (w + h));
        for x in 1..=w {
            out.push(Slot {
                site: Site::new(x, 1),
                dir: Direction::S,
            });
        }
        for y in 1..=h {
            out.push(Slot {
                site: Site::new(w, y),
                dir: Direction::E,
            });
        }
        for x in (1..=w).rev() {
            out.push(Slot {
                site: Site::new(x, h),
                dir: Direction::N,
            });
        }
        for y in (1..=h).rev() {
            out.push(Slot {
                site: Site::new(1, y),
                dir: Direction::W,
            });
        }
        out
    }

    /// Index of a slot in the slot cycle.
    pub fn slot_index(&self, s: Site, dir: Direction) -> Option<usize> {
        self.slots()
            .iter()
            .position(|sl| sl.site == s && sl.dir == dir)
    }

    /// For each slot of the cycle, the terminal occupying it, if any.
    pub fn slot_terminals(&self) -> Vec<Option<usize>> {
        self.slots()
            .iter()
            .map(|sl| {
                self.terminals
                    .iter()
                    .position(|t| t.site == sl.site && t.dir == sl.dir)
            })
            .collect()
    }

    /// Slot-cycle index of each terminal.
    pub fn terminal_slots(&self) -> Vec<usize> {
        self.terminals
            .iter()
            .map(|t| self.slot_index(t.site, t.dir).expect("validated terminal"))
            .collect()
    }

    /// Dual endpoints `(start, end)` of the boundary dual edge crossed by a slot,
    /// in anticlockwise order.
    pub fn slot_dual_ends(&self, slot: Slot) -> (DualPos, DualPos) {
        let (w, h) = self.dims();
        let Site { x, y } = slot.site;
        match slot.dir {
            Direction::S => (DualPos::new(x - 1, 0), DualPos::new(x, 0)),
            Direction::E => (DualPos::new(w, y - 1), DualPos::new(w, y)),
            Direction::N => (DualPos::new(x, h), DualPos::new(x - 1, h)),
            Direction::W => (DualPos::new(0, y), DualPos::new(0, y - 1)),
        }
    }

    /// Position of a boundary dual vertex in the boundary cycle: the index of the slot
    /// that starts at it. `None` for interior dual vertices.
    pub fn dual_boundary_position(&self, d: DualPos) -> Option<usize> {
        self.slots()
            .iter()
            .position(|&sl| self.slot_dual_ends(sl).0 == d)
    }

    /// True if the dual vertex lies in the dual grid.
    pub fn contains_dual(&self, d: DualPos) -> bool {
        let (w, h) = self.dims();
        d.i <= w && d.j <= h
    }

    /// True if the dual vertex lies on the outer boundary of the dual grid.
    pub fn is_dual_boundary(&self, d: DualPos) -> bool {
        let (w, h) = self.dims();
        self.contains_dual(d) && (d.i == 0 || d.j == 0 || d.i == w || d.j == h)
    }

    /// The four dual corners of the face around a primal site.
    pub fn corners(&self, s: Site) -> [DualPos; 4] {
        [
            DualPos::new(s.x - 1, s.y - 1),
            DualPos::new(s.x, s.y - 1),
            DualPos::new(s.x - 1, s.y),
            DualPos::new(s.x, s.y),
        ]
    }

    /// All dual edges with their crossings, horizontal edges first.
    pub fn dual_edges(&self) -> Vec<DualEdge> {
        let (w, h) = self.dims();
        let slots = self.slots();
        let slot_of = |site: Site, dir: Direction| {
            slots
                .iter()
                .position(|sl| sl.site == site && sl.dir == dir)
                .expect("slot exists")
        };
        let mut out = Vec::new();
        for j in 0..=h {
            for i in 0..w {
                let crossing = if j == 0 {
                    Crossing::Slot(slot_of(Site::new(i + 1, 1), Direction::S))
                } else if j == h {
                    Crossing::Slot(slot_of(Site::new(i + 1, h), Direction::N))
                } else {
                    Crossing::Primal(Site::new(i + 1, j), Site::new(i + 1, j + 1))
                };
                out.push(DualEdge {
                    a: DualPos::new(i, j),
                    b: DualPos::new(i + 1, j),
                    crossing,
                });
            }
        }
        for i in 0..=w {
            for j in 0..h {
                let crossing = if i == 0 {
                    Crossing::Slot(slot_of(Site::new(1, j + 1), Direction::W))
                } else if i == w {
                    Crossing::Slot(slot_of(Site::new(w, j + 1), Direction::E))
                } else {
                    Crossing::Primal(Site::new(i, j + 1), Site::new(i + 1, j + 1))
                };
                out.push(DualEdge {
                    a: DualPos::new(i, j),
                    b: DualPos::new(i, j + 1),
                    crossing,
                });
            }
        }
        out
    }

    /// Half-unit position of a primal site.
    pub fn primal_pos(s: Site) -> (i64, i64) {
        (2 * s.x as i64, 2 * s.y as i64)
    }

    /// Half-unit position of a dual vertex.
    pub fn dual_pos(d: DualPos) -> (i64, i64) {
        (2 * d.i as i64 + 1, 2 * d.j as i64 + 1)
    }

    /// Half-unit position of a slot midpoint.
    pub fn slot_pos(slot: Slot) -> (i64, i64) {
        let (px, py) = Self::primal_pos(slot.site);
        let (dx, dy) = slot.dir.offset();
        (px + dx, py + dy)
    }

    /// Half-unit position of a terminal vertex: one primal unit outward from its site.
    pub fn terminal_pos(t: TerminalSite) -> (i64, i64) {
        let (px, py) = Self::primal_pos(t.site);
        let (dx, dy) = t.dir.offset();
        (px + 2 * dx, py + 2 * dy)
    }
}

/// Role of a vertex in a plane graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Role {
    /// Vertex of the primal grid.
    Primal,
    /// Vertex of the dual grid.
    Dual,
    /// Terminal vertex.
    Terminal,
    /// Crossing point of a primal-side edge and a dual edge.
    Middle,
    /// Endpoint of an unused outward slot.
    Boundary,
    /// Auxiliary outer-face vertex.
    Root,
}

/// Kind of an edge in a plane graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum EdgeKind {
    /// Primal edge, a half of one, or an outward slot extension.
    PrimalEdge,
    /// Dual edge or a half of one.
    DualEdge,
    /// Diagonal edge joining a primal-side vertex to a dual vertex.
    DiagonalImpurity,
    /// Terminal edge or a half of one.
    TerminalEdge,
    /// Edge to the root, possibly with multiplicity.
    RootEdge,
}

/// Identifying label of a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Label {
    /// Primal site.
    Primal(Site),
    /// Dual vertex.
    Dual(DualPos),
    /// Terminal with its index in the specification.
    Terminal(usize),
    /// Crossing point at a half-unit position.
    Middle((i64, i64)),
    /// Endpoint of the slot with the given slot-cycle index.
    Boundary(usize),
    /// The root.
    Root,
}

/// A vertex record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Vertex {
    /// Vertex id, equal to its position in the vertex list.
    pub id: usize,
    /// Role of the vertex.
    pub role: Role,
    /// Position in half-units.
    pub pos: (i64, i64),
    /// Identifying label.
    pub label: Label,
}

/// An edge record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Edge {
    /// Edge id, equal to its position in the edge list.
    pub id: usize,
    /// First endpoint.
    pub u: usize,
    /// Second endpoint.
    pub v: usize,
    /// Edge kind.
    pub kind: EdgeKind,
    /// Integer multiplicity.
    pub weight: u32,
    /// Terminal whose slot this root edge occupies, if any.
    pub terminal: Option<usize>,
}

/// A plane graph with roles, kinds and half-unit embedding coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlaneGraph {
    /// Vertices in id order.
    pub vertices: Vec<Vertex>,
    /// Edges in id order.
    pub edges: Vec<Edge>,
    /// Vertex ids along the outer boundary in anticlockwise order.
    pub boundary: Vec<usize>,
    #[serde(skip)]
    adjacency: Vec<Vec<(usize, usize)>>,
    #[serde(skip)]
    labels: BTreeMap<Label, usize>,
}

impl PlaneGraph {
    /// Number of vertices.
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Number of edges.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// `(neighbour, edge id)` pairs at a vertex, in edge-id order.
    pub fn adjacent(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    /// Degree counting multiplicities.
    pub fn degree(&self, v: usize) -> u32 {
        self.adjacency[v]
            .iter()
            .map(|&(_, e)| self.edges[e].weight)
            .sum()
    }

    /// Vertex id with the given label.
    pub fn find(&self, label: Label) -> Option<usize> {
        self.labels.get(&label).copied()
    }

    /// Vertex id of a primal site.
    pub fn primal(&self, s: Site) -> Result<usize> {
        self.find(Label::Primal(s))
            .ok_or_else(|| Error::InvalidSpec(format!("site {s} not in graph")))
    }

    /// Vertex ids with a given role, in id order.
    pub fn with_role(&self, role: Role) -> Vec<usize> {
        self.vertices
            .iter()
            .filter(|v| v.role == role)
            .map(|v| v.id)
            .collect()
    }

    /// Other endpoint of an edge.
    pub fn other(&self, e: usize, v: usize) -> usize {
        let ed = &self.edges[e];
        if ed.u == v {
            ed.v
        } else {
            ed.u
        }
    }

    /// Versioned JSON document with explicit vertex and edge arrays.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema": 1,
            "format": "impurity-dimer-graph",
            "vertices": self.vertices,
            "edges": self.edges,
            "boundary": self.boundary,
        })
    }
}

struct GraphBuilder {
    vertices: Vec<(Role, (i64, i64), Label)>,
    labels: BTreeMap<Label, usize>,
    edges: Vec<(usize, usize, EdgeKind, u32, Option<usize>)>,
    boundary: Vec<Label>,
}

impl GraphBuilder {
    fn new() -> Self {
        GraphBuilder {
            vertices: Vec::new(),
            labels: BTreeMap::new(),
            edges: Vec::new(),
            boundary: Vec::new(),
        }
    }

    fn vertex(&mut self, role: Role, pos: (i64, i64), label: Label) -> usize {
        if let Some(&id) = self.labels.get(&label) {
            return id;
        }
        let id = self.vertices.len();
        self.vertices.push((role, pos, label));
        self.labels.insert(label, id);
        id
    }

    fn edge(&mut self, u: usize, v: usize, kind: EdgeKind, weight: u32, terminal: Option<usize>) {
        self.edges.push((u, v, kind, weight, terminal));
    }

    /// Finalises ids. With `spatial`, vertices are renumbered by `(y, x)` of position.
    fn finish(self, spatial: bool) -> PlaneGraph {
        let n = self.vertices.len();
        let mut order: Vec<usize> = (0..n).collect();
        if spatial {
            order.sort_by_key(|&i| {
                let (x, y) = self.vertices[i].1;
                (y, x, i)
            });
        }
        let mut remap = vec![0; n];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new;
        }
        let vertices: Vec<Vertex> = order
            .iter()
            .enumerate()
            .map(|(id, &old)| {
                let (role, pos, label) = self.vertices[old];
                Vertex {
                    id,
                    role,
                    pos,
                    label,
                }
            })
            .collect();
        let mut edges: Vec<Edge> = self
            .edges
            .iter()
            .map(|&(u, v, kind, weight, terminal)| {
                let (a, b) = (remap[u], remap[v]);
                let (u, v) = if a <= b { (a, b) } else { (b, a) };
                Edge {
                    id: 0,
                    u,
                    v,
                    kind,
                    weight,
                    terminal,
                }
            })
            .collect();
        edges.sort_by_key(|e| (e.u, e.v, e.kind, e.terminal));
        let mut adjacency = vec![Vec::new(); n];
        for (id, e) in edges.iter_mut().enumerate() {
            e.id = id;
            adjacency[e.u].push((e.v, id));
            adjacency[e.v].push((e.u, id));
        }
        let labels = vertices
            .iter()
            .map(|v| (v.label, v.id))
            .collect::<BTreeMap<_, _>>();
        let boundary = self.boundary.iter().map(|l| labels[l]).collect();
        PlaneGraph {
            vertices,
            edges,
            boundary,
            adjacency,
            labels,
        }
    }
}

/// The primal grid alone. The boundary records slot owners in slot-cycle order,
/// with consecutive repetitions collapsed.
pub fn build_g1(spec: &GridSpec) -> Result<PlaneGraph> {
    spec.validate()?;
    let mut b = GraphBuilder::new();
    for s in spec.sites() {
        b.vertex(Role::Primal, GridSpec::primal_pos(s), Label::Primal(s));
    }
    for (u, v) in spec.primal_edges() {
        let (iu, iv) = (spec.index(u), spec.index(v));
        b.edge(iu, iv, EdgeKind::PrimalEdge, 1, None);
    }
    let mut owners: Vec<Site> = Vec::new();
    for sl in spec.slots() {
        if owners.last() != Some(&sl.site) {
            owners.push(sl.site);
        }
    }
    while owners.len() > 1 && owners.first() == owners.last() {
        owners.pop();
    }
    b.boundary = owners.into_iter().map(Label::Primal).collect();
    Ok(b.finish(false))
}

/// The superposition graph carrying all dual, primal-side, middle, boundary and terminal
/// vertices plus the diagonal impurity edges. Every primal vertex receives diagonals to
/// all four corners of its face, and every terminal to the two ends of the boundary dual
/// edge its terminal edge crosses. Vertex ids follow a row-major sweep of positions.
pub fn build_superposition(spec: &GridSpec) -> Result<PlaneGraph> {
    spec.validate()?;
    let slots = spec.slots();
    let slot_terms = spec.slot_terminals();
    let mut b = GraphBuilder::new();
    for s in spec.sites() {
        b.vertex(Role::Primal, GridSpec::primal_pos(s), Label::Primal(s));
    }
    let (w, h) = spec.dims();
    for j in 0..=h {
        for i in 0..=w {
            let d = DualPos::new(i, j);
            b.vertex(Role::Dual, GridSpec::dual_pos(d), Label::Dual(d));
        }
    }
    for (ti, t) in spec.terminals.iter().enumerate() {
        b.vertex(
            Role::Terminal,
            GridSpec::terminal_pos(*t),
            Label::Terminal(ti),
        );
    }
    for de in spec.dual_edges() {
        let da = b.labels[&Label::Dual(de.a)];
        let db = b.labels[&Label::Dual(de.b)];
        match de.crossing {
            Crossing::Primal(u, v) => {
                let (pu, pv) = (GridSpec::primal_pos(u), GridSpec::primal_pos(v));
                let pos = ((pu.0 + pv.0) / 2, (pu.1 + pv.1) / 2);
                let m = b.vertex(Role::Middle, pos, Label::Middle(pos));
                let (iu, iv) = (b.labels[&Label::Primal(u)], b.labels[&Label::Primal(v)]);
                b.edge(iu, m, EdgeKind::PrimalEdge, 1, None);
                b.edge(m, iv, EdgeKind::PrimalEdge, 1, None);
                b.edge(da, m, EdgeKind::DualEdge, 1, None);
                b.edge(m, db, EdgeKind::DualEdge, 1, None);
            }
            Crossing::Slot(si) => {
                let sl = slots[si];
                let pos = GridSpec::slot_pos(sl);
                let owner = b.labels[&Label::Primal(sl.site)];
                match slot_terms[si] {
                    None => {
                        let bv = b.vertex(Role::Boundary, pos, Label::Boundary(si));
                        b.edge(owner, bv, EdgeKind::PrimalEdge, 1, None);
                        b.edge(da, bv, EdgeKind::DualEdge, 1, None);
                        b.edge(bv, db, EdgeKind::DualEdge, 1, None);
                    }
                    Some(ti) => {
                        let m = b.vertex(Role::Middle, pos, Label::Middle(pos));
                        let tv = b.labels[&Label::Terminal(ti)];
                        b.edge(owner, m, EdgeKind::TerminalEdge, 1, Some(ti));
                        b.edge(m, tv, EdgeKind::TerminalEdge, 1, Some(ti));
                        b.edge(da, m, EdgeKind::DualEdge, 1, None);
                        b.edge(m, db, EdgeKind::DualEdge, 1, None);
                        b.edge(tv, da, EdgeKind::DiagonalImpurity, 1, Some(ti));
                        b.edge(tv, db, EdgeKind::DiagonalImpurity, 1, Some(ti));
                    }
                }
            }
        }
    }
    for s in spec.sites() {
        let p = b.labels[&Label::Primal(s)];
        for c in spec.corners(s) {
            let d = b.labels[&Label::Dual(c)];
            b.edge(p, d, EdgeKind::DiagonalImpurity, 1, None);
        }
    }
    let mut boundary = Vec::new();
    for (si, sl) in slots.iter().enumerate() {
        let (start, _) = spec.slot_dual_ends(*sl);
        boundary.push(Label::Dual(start));
        boundary.push(match slot_terms[si] {
            None => Label::Boundary(si),
            Some(_) => Label::Middle(GridSpec::slot_pos(*sl)),
        });
    }
    b.boundary = boundary;
    Ok(b.finish(true))
}

/// Which rooted graph to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RootedVariant {
    /// Terminals kept as separate vertices, each joined to the root.
    WithTerminals,
    /// Terminals merged into the root; terminal slots become tagged root edges.
    TerminalsIdentified,
}

/// Rooted graphs. Every primal vertex reaches total degree 4 counting root-edge
/// multiplicities. Ids: primal vertices row-major, then terminals (first variant), then the root.
pub fn build_rooted(spec: &GridSpec, variant: RootedVariant) -> Result<PlaneGraph> {
    spec.validate()?;
    let mut b = GraphBuilder::new();
    for s in spec.sites() {
        b.vertex(Role::Primal, GridSpec::primal_pos(s), Label::Primal(s));
    }
    for (u, v) in spec.primal_edges() {
        b.edge(spec.index(u), spec.index(v), EdgeKind::PrimalEdge, 1, None);
    }
    let with_terms = variant == RootedVariant::WithTerminals;
    if with_terms {
        for (ti, t) in spec.terminals.iter().enumerate() {
            b.vertex(
                Role::Terminal,
                GridSpec::terminal_pos(*t),
                Label::Terminal(ti),
            );
        }
    }
    let (w, _) = spec.dims();
    let root = b.vertex(Role::Root, (w as i64 + 1, -4), Label::Root);
    let slot_terms = spec.slot_terminals();
    let slots = spec.slots();
    for s in spec.sites() {
        let p = spec.index(s);
        let mut plain = 0u32;
        for (si, sl) in slots.iter().enumerate() {
            if sl.site != s {
                continue;
            }
            match slot_terms[si] {
                None => plain += 1,
                Some(ti) => {
                    if with_terms {
                        let tv = b.labels[&Label::Terminal(ti)];
                        b.edge(p, tv, EdgeKind::TerminalEdge, 1, Some(ti));
                    } else {
                        b.edge(p, root, EdgeKind::RootEdge, 1, Some(ti));
                    }
                }
            }
        }
        if plain > 0 {
            b.edge(p, root, EdgeKind::RootEdge, plain, None);
        }
    }
    if with_terms {
        for ti in 0..spec.terminals.len() {
            let tv = b.labels[&Label::Terminal(ti)];
            b.edge(tv, root, EdgeKind::RootEdge, 1, None);
        }
    }
    b.boundary = vec![Label::Root];
    Ok(b.finish(false))
}

/// The primal grid with terminals and one boundary vertex per unused slot. Its outer
/// boundary lists, in slot-cycle order, the terminal or boundary vertex of each slot.
/// This is the graph from which circular planar graphs are assembled.
pub fn build_slotted(spec: &GridSpec) -> Result<PlaneGraph> {
    spec.validate()?;
    let mut b = GraphBuilder::new();
    for s in spec.sites() {
        b.vertex(Role::Primal, GridSpec::primal_pos(s), Label::Primal(s));
    }
    for (u, v) in spec.primal_edges() {
        b.edge(spec.index(u), spec.index(v), EdgeKind::PrimalEdge, 1, None);
    }
    let slot_terms = spec.slot_terminals();
    let mut boundary = Vec::new();
    for (si, sl) in spec.slots().iter().enumerate() {
        let owner = spec.index(sl.site);
        match slot_terms[si] {
            None => {
                let bv = b.vertex(Role::Boundary, GridSpec::slot_pos(*sl), Label::Boundary(si));
                b.edge(owner, bv, EdgeKind::PrimalEdge, 1, None);
                boundary.push(Label::Boundary(si));
            }
            Some(ti) => {
                let tv = b.vertex(
                    Role::Terminal,
                    GridSpec::terminal_pos(spec.terminals[ti]),
                    Label::Terminal(ti),
                );
                b.edge(owner, tv, EdgeKind::TerminalEdge, 1, Some(ti));
                boundary.push(Label::Terminal(ti));
            }
        }
    }
    b.boundary = boundary;
    Ok(b.finish(false))
}

/// Orientation used to walk from one arc endpoint to the other.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ArcSide {
    /// Follow the slot cycle forwards.
    Anticlockwise,
    /// Follow the slot cycle backwards.
    Clockwise,
    /// Pick the unique terminal-free side.
    Auto,
}

/// The boundary slots strictly between two boundary vertices on a terminal-free side.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundaryArc {
    /// First endpoint.
    pub a: Site,
    /// Second endpoint.
    pub b: Site,
    /// Side actually walked.
    pub side: ArcSide,
    /// Slot-cycle indices strictly between the endpoints, in walking order.
    pub slots: Vec<usize>,
    /// Distinct owners of those slots in walking order, with their slot counts.
    pub members: Vec<(Site, usize)>,
}

impl BoundaryArc {
    /// Member sites without multiplicities.
    pub fn sites(&self) -> Vec<Site> {
        self.members.iter().map(|&(s, _)| s).collect()
    }
}

/// Contiguous slot block `(first, len)` of a boundary vertex. Requires both grid
/// dimensions to be at least 2, so that each vertex's slots are consecutive.
pub(crate) fn slot_block(spec: &GridSpec, s: Site) -> Result<(usize, usize)> {
    let (w, h) = spec.dims();
    if w < 2 || h < 2 {
        return Err(Error::Unsupported(
            "boundary arcs need both dimensions at least 2".into(),
        ));
    }
    if !spec.contains(s) {
        return Err(Error::InvalidSpec(format!("site {s} not in grid")));
    }
    let slots = spec.slots();
    let n = slots.len();
    let own: Vec<usize> = (0..n).filter(|&i| slots[i].site == s).collect();
    if own.is_empty() {
        return Err(Error::NotOnBoundary(s.to_string()));
    }
    let first = own
        .iter()
        .copied()
        .find(|&i| slots[(i + n - 1) % n].site != s)
        .unwrap_or(own[0]);
    Ok((first, own.len()))
}

/// Slots walked from the end of `a`'s block to the start of `b`'s block.
fn walk_between(spec: &GridSpec, a: Site, b: Site, forward: bool) -> Result<Vec<usize>> {
    let n = 2 * (spec.dims().0 + spec.dims().1);
    let slots = spec.slots();
    let (fa, la) = slot_block(spec, a)?;
    slot_block(spec, b)?;
    let mut out = Vec::new();
    let mut i = if forward {
        (fa + la) % n
    } else {
        (fa + n - 1) % n
    };
    while slots[i].site != b {
        out.push(i);
        i = if forward {
            (i + 1) % n
        } else {
            (i + n - 1) % n
        };
    }
    Ok(out)
}

/// Boundary arc strictly between `a` and `b`.
pub fn boundary_arc(spec: &GridSpec, a: Site, b: Site, side: ArcSide) -> Result<BoundaryArc> {
    if a == b {
        return Err(Error::DegenerateArc(format!("endpoints coincide at {a}")));
    }
    for s in [a, b] {
        if !spec.is_boundary(s) {
            return Err(Error::NotOnBoundary(s.to_string()));
        }
    }
    let terms = spec.slot_terminals();
    let free = |slots: &[usize]| slots.iter().all(|&i| terms[i].is_none());
    let (slots, side) = match side {
        ArcSide::Anticlockwise | ArcSide::Clockwise => {
            let s = walk_between(spec, a, b, side == ArcSide::Anticlockwise)?;
            if !free(&s) {
                return Err(Error::ArcContainsTerminal(format!("{a} and {b}")));
            }
            (s, side)
        }
        ArcSide::Auto => {
            let fw = walk_between(spec, a, b, true)?;
            let bw = walk_between(spec, a, b, false)?;
            match (free(&fw), free(&bw)) {
                (true, false) => (fw, ArcSide::Anticlockwise),
                (false, true) => (bw, ArcSide::Clockwise),
                (false, false) => return Err(Error::ArcNotFound(format!("{a} and {b}"))),
                (true, true) => {
                    return Err(Error::ArcNotFound(format!(
                        "both sides of {a} and {b} are terminal-free"
                    )))
                }
            }
        }
    };
    let all = spec.slots();
    let mut members: Vec<(Site, usize)> = Vec::new();
    for &i in &slots {
        let s = all[i].site;
        match members.last_mut() {
            Some((last, c)) if *last == s => *c += 1,
            _ => members.push((s, 1)),
        }
    }
    Ok(BoundaryArc {
        a,
        b,
        side,
        slots,
        members,
    })
}

/// Deterministic plain-text export with role and kind annotations and half-unit coordinates.
pub fn export_dot(g: &PlaneGraph) -> String {
    let mut out = String::new();
    out.push_str("// impurity-dimer-graph v1\n");
    out.push_str("graph G {\n");
    for v in &g.vertices {
        out.push_str(&format!(
            "  v{} [role={:?}, label=\"{}\", pos=\"{},{}\"];\n",
            v.id,
            v.role,
            label_text(&v.label),
            v.pos.0,
            v.pos.1
        ));
    }
    for e in &g.edges {
        out.push_str(&format!(
            "  v{} -- v{} [id={}, kind={:?}, weight={}",
            e.u, e.v, e.id, e.kind, e.weight
        ));
        if let Some(t) = e.terminal {
            out.push_str(&format!(", terminal={t}"));
        }
        out.push_str("];\n");
    }
    out.push_str("}\n");
    out
}

fn label_text(l: &Label) -> String {
    match l {
        Label::Primal(s) => format!("p{s}"),
        Label::Dual(d) => format!("d{d}"),
        Label::Terminal(t) => format!("T{}", t + 1),
        Label::Middle((x, y)) => format!("m({x},{y})"),
        Label::Boundary(s) => format!("b{s}"),
        Label::Root => "R".to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(w: usize, h: usize, t: (usize, usize, Direction)) -> GridSpec {
        GridSpec::rect_one(
            w,
            h,
            TerminalSite {
                site: Site::new(t.0, t.1),
                dir: t.2,
            },
        )
        .unwrap()
    }

    #[test]
    fn g1_sizes() {
        let g = build_g1(&rect(1, 1, (1, 1, Direction::N))).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (1, 0));
        let g = build_g1(&rect(3, 3, (1, 1, Direction::S))).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (9, 12));
        let spec = GridSpec::new(
            Shape::Chain { len: 4 },
            1,
            vec![TerminalSite {
                site: Site::new(1, 1),
                dir: Direction::N,
            }],
        )
        .unwrap();
        let g = build_g1(&spec).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (4, 3));
    }

    #[test]
    fn rejects_bad_specs() {
        let t = TerminalSite {
            site: Site::new(2, 2),
            dir: Direction::N,
        };
        assert!(GridSpec::rect_one(3, 3, t).is_err());
        let t = TerminalSite {
            site: Site::new(1, 1),
            dir: Direction::E,
        };
        assert!(GridSpec::rect_one(3, 3, t).is_err());
        assert!(GridSpec::new(
            Shape::Rect {
                width: 0,
                height: 2
            },
            1,
            vec![]
        )
        .is_err());
        let ts = vec![
            TerminalSite {
                site: Site::new(1, 1),
                dir: Direction::S,
            },
            TerminalSite {
                site: Site::new(1, 1),
                dir: Direction::W,
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
            2,
            ts
        )
        .is_err());
    }

    #[test]
    fn superposition_counts() {
        let ts = vec![
            TerminalSite {
                site: Site::new(3, 3),
                dir: Direction::E,
            },
            TerminalSite {
                site: Site::new(3, 2),
                dir: Direction::E,
            },
            TerminalSite {
                site: Site::new(3, 1),
                dir: Direction::E,
            },
        ];
        let spec = GridSpec::new(
            Shape::Rect {
                width: 3,
                height: 3,
            },
            2,
            ts,
        )
        .unwrap();
        let g = build_superposition(&spec).unwrap();
        assert_eq!(g.with_role(Role::Primal).len(), 9);
        assert_eq!(g.with_role(Role::Dual).len(), 16);
        assert_eq!(g.with_role(Role::Terminal).len(), 3);
        assert_eq!(g.vertex_count(), 4 * 9 + 2 * 3 + 2 * 3 + 2 * 2);
        for v in g.with_role(Role::Middle) {
            assert_eq!(g.degree(v), 4);
        }
        for v in g.with_role(Role::Boundary) {
            assert_eq!(g.degree(v), 3);
        }
    }

    #[test]
    fn rooted_degrees() {
        let spec = rect(3, 3, (1, 1, Direction::S));
        let g = build_rooted(&spec, RootedVariant::TerminalsIdentified).unwrap();
        for v in g.with_role(Role::Primal) {
            assert_eq!(g.degree(v), 4);
        }
        let root = g.find(Label::Root).unwrap();
        let center = g.primal(Site::new(2, 2)).unwrap();
        assert!(g.adjacent(center).iter().all(|&(n, _)| n != root));
        let g = build_rooted(&spec, RootedVariant::WithTerminals).unwrap();
        for v in g.with_role(Role::Primal) {
            assert_eq!(g.degree(v), 4);
        }
    }

    #[test]
    fn arcs() {
        let ts = vec![
            TerminalSite {
                site: Site::new(4, 5),
                dir: Direction::E,
            },
            TerminalSite {
                site: Site::new(4, 3),
                dir: Direction::E,
            },
            TerminalSite {
                site: Site::new(4, 1),
                dir: Direction::E,
            },
        ];
        let spec = GridSpec::new(
            Shape::Rect {
                width: 4,
                height: 5,
            },
            2,
            ts,
        )
        .unwrap();
        let arc = boundary_arc(&spec, Site::new(1, 5), Site::new(1, 2), ArcSide::Auto).unwrap();
        assert_eq!(arc.sites(), vec![Site::new(1, 4), Site::new(1, 3)]);
        let arc = boundary_arc(&spec, Site::new(1, 3), Site::new(1, 2), ArcSide::Auto).unwrap();
        assert!(arc.members.is_empty());
        assert!(boundary_arc(&spec, Site::new(1, 3), Site::new(1, 3), ArcSide::Auto).is_err());
        assert!(boundary_arc(&spec, Site::new(2, 3), Site::new(1, 3), ArcSide::Auto).is_err());
        assert!(matches!(
            boundary_arc(&spec, Site::new(1, 5), Site::new(1, 2), ArcSide::Clockwise),
            Err(Error::ArcContainsTerminal(_))
        ));
    }

    #[test]
    fn dot_is_deterministic() {
        let spec = rect(2, 2, (1, 1, Direction::S));
        let g = build_g1(&spec).unwrap();
        let a = export_dot(&g);
        assert!(a.starts_with("// impurity-dimer-graph v1\n"));
        assert_eq!(a, export_dot(&build_g1(&spec).unwrap()));
        assert_eq!(a.lines().filter(|l| l.contains(" -- ")).count(), 4);
    }
}
