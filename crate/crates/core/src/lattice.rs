//! Hexagonal lattice geometry.
//!
//! The lattice is built from a two-vertex unit cell. Cell `(x, y)` holds a
//! White vertex `W(x, y)` and a Black vertex `B(x, y)`, and every edge is owned
//! by its White endpoint:
//!
//! ```text
//! W(x, y) ~ B(x,     y    )   kind A (horizontal)
//! W(x, y) ~ B(x,     y - 1)   kind B
//! W(x, y) ~ B(x - 1, y    )   kind C
//! ```
//!
//! Seen from either endpoint, the kinds A, B, C appear counter-clockwise in
//! that order, which is what makes the 3-bit local code of a vertex well
//! defined. Finite geometries are either an `L x L` torus or a rectangular
//! window of cells whose exterior edges ("stubs") take their values from a
//! boundary condition.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sublattice {
    White,
    Black,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeKind {
    A,
    B,
    C,
}

impl EdgeKind {
    pub const ALL: [EdgeKind; 3] = [EdgeKind::A, EdgeKind::B, EdgeKind::C];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    /// Bit of this kind inside a local code.
    #[inline]
    pub fn bit(self) -> u8 {
        1 << (self as u8)
    }

    #[inline]
    pub fn from_index(i: usize) -> EdgeKind {
        Self::ALL[i]
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            EdgeKind::A => 'a',
            EdgeKind::B => 'b',
            EdgeKind::C => 'c',
        };
        write!(f, "{c}")
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexId {
    pub sublattice: Sublattice,
    pub x: i64,
    pub y: i64,
}

impl VertexId {
    pub const fn white(x: i64, y: i64) -> Self {
        VertexId { sublattice: Sublattice::White, x, y }
    }

    pub const fn black(x: i64, y: i64) -> Self {
        VertexId { sublattice: Sublattice::Black, x, y }
    }

    /// Neighbor across the edge of the given kind, on the infinite lattice.
    pub fn neighbor(self, kind: EdgeKind) -> VertexId {
        let VertexId { x, y, .. } = self;
        match (self.sublattice, kind) {
            (Sublattice::White, EdgeKind::A) => VertexId::black(x, y),
            (Sublattice::White, EdgeKind::B) => VertexId::black(x, y - 1),
            (Sublattice::White, EdgeKind::C) => VertexId::black(x - 1, y),
            (Sublattice::Black, EdgeKind::A) => VertexId::white(x, y),
            (Sublattice::Black, EdgeKind::B) => VertexId::white(x, y + 1),
            (Sublattice::Black, EdgeKind::C) => VertexId::white(x + 1, y),
        }
    }

    /// The incident edge of the given kind, on the infinite lattice.
    pub fn edge(self, kind: EdgeKind) -> EdgeId {
        match self.sublattice {
            Sublattice::White => EdgeId { x: self.x, y: self.y, kind },
            Sublattice::Black => {
                let w = self.neighbor(kind);
                EdgeId { x: w.x, y: w.y, kind }
            }
        }
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.sublattice {
            Sublattice::White => 'W',
            Sublattice::Black => 'B',
        };
        write!(f, "{s}({},{})", self.x, self.y)
    }
}

/// An edge, named by the cell of its White endpoint and its kind.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeId {
    pub x: i64,
    pub y: i64,
    pub kind: EdgeKind,
}

impl EdgeId {
    /// `(white, black)` endpoints on the infinite lattice.
    pub fn endpoints(self) -> (VertexId, VertexId) {
        let w = VertexId::white(self.x, self.y);
        (w, w.neighbor(self.kind))
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@({},{})", self.kind, self.x, self.y)
    }
}

/// The six vertices of the hexagonal face `F(x, y)`, in cyclic order
/// starting from `W(x, y)`. Consecutive edges have kinds a, c, b, a, c, b.
pub fn face(x: i64, y: i64) -> [VertexId; 6] {
    [
        VertexId::white(x, y),
        VertexId::black(x, y),
        VertexId::white(x + 1, y),
        VertexId::black(x + 1, y - 1),
        VertexId::white(x + 1, y - 1),
        VertexId::black(x, y - 1),
    ]
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// Exterior edges count as absent.
    Free,
    /// Explicit presence of every exterior edge, in canonical stub order.
    Fixed(Vec<bool>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Mode {
    Torus { l: usize },
    Window { width: usize, height: usize, boundary: Boundary },
}

/// Where the presence bit of an incident edge lives.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    /// Dense index of an edge stored in the configuration.
    Edge(u32),
    /// Index of an exterior edge whose value comes from the boundary condition.
    Stub(u32),
}

/// One entry of [`Geometry::neighbors`].
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Neighbor {
    pub kind: EdgeKind,
    pub vertex: VertexId,
    /// Dense index of the neighbor, `None` when it lies outside a window.
    pub index: Option<usize>,
    pub edge: EdgeId,
    pub slot: Slot,
}

impl Neighbor {
    pub fn is_exterior(&self) -> bool {
        self.index.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Geometry {
    mode: Mode,
    width: usize,
    height: usize,
    incident: Vec<[Slot; 3]>,
    adjacent: Vec<[Option<u32>; 3]>,
    endpoints: Vec<[u32; 2]>,
    edge_ids: Vec<EdgeId>,
    stub_ids: Vec<EdgeId>,
    lookup: HashMap<EdgeId, Slot>,
}

impl Geometry {
    pub fn torus(l: usize) -> Result<Geometry> {
        if l < 2 {
            return Err(Error::InvalidGeometry(format!(
                "torus side must be at least 2 (got {l}); L = 1 creates multi-edges"
            )));
        }
        if l > 1 << 14 {
            return Err(Error::InvalidGeometry(format!("torus side {l} is too large")));
        }
        let n_cells = l * l;
        let mut incident = Vec::with_capacity(2 * n_cells);
        let mut adjacent = Vec::with_capacity(2 * n_cells);
        let mut endpoints = Vec::with_capacity(3 * n_cells);
        let mut edge_ids = Vec::with_capacity(3 * n_cells);
        let wrap = |v: i64| v.rem_euclid(l as i64) as usize;
        let vidx = |v: VertexId| {
            let cell = wrap(v.y) * l + wrap(v.x);
            (2 * cell + (v.sublattice == Sublattice::Black) as usize) as u32
        };
        let eidx = |e: EdgeId| ((wrap(e.y) * l + wrap(e.x)) * 3 + e.kind.index()) as u32;
        for y in 0..l as i64 {
            for x in 0..l as i64 {
                for v in [VertexId::white(x, y), VertexId::black(x, y)] {
                    let mut slots = [Slot::Edge(0); 3];
                    let mut adj = [None; 3];
                    for k in EdgeKind::ALL {
                        slots[k.index()] = Slot::Edge(eidx(v.edge(k)));
                        adj[k.index()] = Some(vidx(v.neighbor(k)));
                    }
                    incident.push(slots);
                    adjacent.push(adj);
                }
                for k in EdgeKind::ALL {
                    let e = EdgeId { x, y, kind: k };
                    let (w, b) = e.endpoints();
                    endpoints.push([vidx(w), vidx(b)]);
                    edge_ids.push(e);
                }
            }
        }
        Ok(Geometry {
            mode: Mode::Torus { l },
            width: l,
            height: l,
            incident,
            adjacent,
            endpoints,
            edge_ids,
            stub_ids: Vec::new(),
            lookup: HashMap::new(),
        })
    }

    pub fn window(width: usize, height: usize, boundary: Boundary) -> Result<Geometry> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidGeometry("window needs at least one cell".into()));
        }
        if width > 1 << 14 || height > 1 << 14 {
            return Err(Error::InvalidGeometry("window is too large".into()));
        }
        let inside =
            |v: VertexId| v.x >= 0 && v.y >= 0 && (v.x as usize) < width && (v.y as usize) < height;
        let vidx = |v: VertexId| {
            (2 * (v.y as usize * width + v.x as usize) + (v.sublattice == Sublattice::Black) as usize)
                as u32
        };

        // Canonical order: owner cell row-major, then kind. Stub owners may sit
        // one row above or one column right of the window.
        let mut interior = Vec::new();
        let mut stubs = Vec::new();
        for y in 0..=height as i64 {
            for x in 0..=width as i64 {
                for k in EdgeKind::ALL {
                    let e = EdgeId { x, y, kind: k };
                    let (w, b) = e.endpoints();
                    match (inside(w), inside(b)) {
                        (true, true) => interior.push(e),
                        (false, false) => {}
                        _ => stubs.push(e),
                    }
                }
            }
        }
        if let Boundary::Fixed(values) = &boundary {
            if values.len() != stubs.len() {
                return Err(Error::InvalidGeometry(format!(
                    "fixed boundary has {} values, window {width}x{height} has {} exterior edges",
                    values.len(),
                    stubs.len()
                )));
            }
        }
        let mut lookup = HashMap::with_capacity(interior.len() + stubs.len());
        let mut endpoints = Vec::with_capacity(interior.len());
        for (i, e) in interior.iter().enumerate() {
            lookup.insert(*e, Slot::Edge(i as u32));
            let (w, b) = e.endpoints();
            endpoints.push([vidx(w), vidx(b)]);
        }
        for (i, e) in stubs.iter().enumerate() {
            lookup.insert(*e, Slot::Stub(i as u32));
        }
        let mut incident = Vec::with_capacity(2 * width * height);
        let mut adjacent = Vec::with_capacity(2 * width * height);
        for y in 0..height as i64 {
            for x in 0..width as i64 {
                for v in [VertexId::white(x, y), VertexId::black(x, y)] {
                    let mut slots = [Slot::Edge(0); 3];
                    let mut adj = [None; 3];
                    for k in EdgeKind::ALL {
                        slots[k.index()] = lookup[&v.edge(k)];
                        let u = v.neighbor(k);
                        adj[k.index()] = inside(u).then(|| vidx(u));
                    }
                    incident.push(slots);
                    adjacent.push(adj);
                }
            }
        }
        Ok(Geometry {
            mode: Mode::Window { width, height, boundary },
            width,
            height,
            incident,
            adjacent,
            endpoints,
            edge_ids: interior,
            stub_ids: stubs,
            lookup,
        })
    }

    pub fn mode(&self) -> &Mode {
        &self.mode
    }

    pub fn is_torus(&self) -> bool {
        matches!(self.mode, Mode::Torus { .. })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn vertex_count(&self) -> usize {
        self.incident.len()
    }

    /// Number of edges stored in a configuration (stubs excluded).
    pub fn edge_count(&self) -> usize {
        self.edge_ids.len()
    }

    pub fn stub_count(&self) -> usize {
        self.stub_ids.len()
    }

    pub fn boundary(&self) -> Option<&Boundary> {
        match &self.mode {
            Mode::Torus { .. } => None,
            Mode::Window { boundary, .. } => Some(boundary),
        }
    }

    /// Value of an exterior edge under the boundary condition.
    #[inline]
    pub fn stub_value(&self, stub: u32) -> bool {
        match &self.mode {
            Mode::Window { boundary: Boundary::Fixed(values), .. } => values[stub as usize],
            _ => false,
        }
    }

    /// Same geometry with a different window boundary condition.
    pub fn with_boundary(&self, boundary: Boundary) -> Result<Geometry> {
        match self.mode {
            Mode::Torus { .. } => {
                Err(Error::InvalidGeometry("a torus has no boundary condition".into()))
            }
            Mode::Window { width, height, .. } => Geometry::window(width, height, boundary),
        }
    }

    #[inline]
    pub fn incident(&self, v: usize) -> &[Slot; 3] {
        &self.incident[v]
    }

    #[inline]
    pub fn adjacent(&self, v: usize) -> &[Option<u32>; 3] {
        &self.adjacent[v]
    }

    /// Dense `[white, black]` endpoints of a stored edge.
    #[inline]
    pub fn endpoints(&self, e: usize) -> [usize; 2] {
        let [w, b] = self.endpoints[e];
        [w as usize, b as usize]
    }

    pub fn edge_id(&self, e: usize) -> EdgeId {
        self.edge_ids[e]
    }

    pub fn stub_id(&self, s: usize) -> EdgeId {
        self.stub_ids[s]
    }

    #[inline]
    pub fn edge_kind(&self, e: usize) -> EdgeKind {
        self.edge_ids[e].kind
    }

    pub fn vertex_id(&self, v: usize) -> VertexId {
        let cell = v / 2;
        let x = (cell % self.width) as i64;
        let y = (cell / self.width) as i64;
        if v % 2 == 0 {
            VertexId::white(x, y)
        } else {
            VertexId::black(x, y)
        }
    }

    /// Dense index of a vertex given in canonical coordinates.
    pub fn vertex_index(&self, v: VertexId) -> Result<usize> {
        if v.x < 0 || v.y < 0 || v.x as usize >= self.width || v.y as usize >= self.height {
            return Err(Error::InvalidVertex(v));
        }
        Ok(2 * (v.y as usize * self.width + v.x as usize) + (v.sublattice == Sublattice::Black) as usize)
    }

    /// Dense index of a lattice vertex, wrapping coordinates on a torus.
    /// `None` for vertices outside a window.
    pub fn locate(&self, v: VertexId) -> Option<usize> {
        let (x, y) = match self.mode {
            Mode::Torus { l } => (v.x.rem_euclid(l as i64), v.y.rem_euclid(l as i64)),
            Mode::Window { .. } => (v.x, v.y),
        };
        self.vertex_index(VertexId { x, y, ..v }).ok()
    }

    /// Slot of a lattice edge, wrapping coordinates on a torus. `None` when the
    /// edge does not touch a window.
    pub fn edge_slot(&self, e: EdgeId) -> Option<Slot> {
        match self.mode {
            Mode::Torus { l } => {
                let l = l as i64;
                let cell = e.y.rem_euclid(l) * l + e.x.rem_euclid(l);
                Some(Slot::Edge((cell as usize * 3 + e.kind.index()) as u32))
            }
            Mode::Window { .. } => self.lookup.get(&e).copied(),
        }
    }

    /// The three incident edges of `v` in (a, b, c) order.
    pub fn neighbors(&self, v: VertexId) -> Result<[Neighbor; 3]> {
        let vi = self.vertex_index(v)?;
        Ok(EdgeKind::ALL.map(|kind| {
            let k = kind.index();
            let index = self.adjacent[vi][k].map(|u| u as usize);
            let vertex = match index {
                Some(u) => self.vertex_id(u),
                None => v.neighbor(kind),
            };
            let slot = self.incident[vi][k];
            let edge = match slot {
                Slot::Edge(e) => self.edge_ids[e as usize],
                Slot::Stub(s) => self.stub_ids[s as usize],
            };
            Neighbor { kind, vertex, index, edge, slot }
        }))
    }

    /// Stored edge joining two vertices, if they are adjacent.
    pub fn edge_between(&self, u: usize, v: usize) -> Option<(EdgeKind, usize)> {
        (0..3).find_map(|k| match (self.adjacent[u][k], self.incident[u][k]) {
            (Some(w), Slot::Edge(e)) if w as usize == v => Some((EdgeKind::from_index(k), e as usize)),
            _ => None,
        })
    }

    /// Vertices within graph distance `radius` of `center`, in BFS order.
    pub fn ball(&self, center: usize, radius: usize) -> Vec<usize> {
        let mut dist = HashMap::new();
        dist.insert(center, 0usize);
        let mut order = vec![center];
        let mut queue = VecDeque::from([center]);
        while let Some(v) = queue.pop_front() {
            let d = dist[&v];
            if d == radius {
                continue;
            }
            for u in self.adjacent[v].iter().flatten() {
                let u = *u as usize;
                if !dist.contains_key(&u) {
                    dist.insert(u, d + 1);
                    order.push(u);
                    queue.push_back(u);
                }
            }
        }
        order
    }

    /// Short human-readable descriptor, as used in configuration file headers.
    pub fn describe(&self) -> String {
        match &self.mode {
            Mode::Torus { l } => format!("torus L={l}"),
            Mode::Window { width, height, boundary } => {
                let b = match boundary {
                    Boundary::Free => "free".to_string(),
                    Boundary::Fixed(values) => format!("fixed:{}", crate::configuration::pack_hex(values)),
                };
                format!("window w={width} h={height} boundary={b}")
            }
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VertexType {
    /// All three neighbors inside the box.
    TypeI,
    /// Exactly one neighbor outside.
    TypeII,
    /// Two neighbors outside; only the two corners.
    TypeIII,
}

/// An `n x n` rhombus of unit cells. The origin cell is `center - n/2`
/// (integer division), so `B_n` and `B_{n+2}` with the same center are nested
/// with a one-cell ring between them.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoxSpec {
    pub n: usize,
    pub center: (i64, i64),
}

impl BoxSpec {
    pub fn new(n: usize, center: (i64, i64)) -> Self {
        BoxSpec { n, center }
    }

    pub fn origin(&self) -> (i64, i64) {
        let h = (self.n / 2) as i64;
        (self.center.0 - h, self.center.1 - h)
    }

    /// The box with the same center and side `n + k`.
    pub fn enlarged(&self, k: usize) -> BoxSpec {
        BoxSpec { n: self.n + k, center: self.center }
    }

    pub fn vertex_count(&self) -> usize {
        2 * self.n * self.n
    }

    /// Membership on the infinite lattice (unwrapped coordinates).
    pub fn contains(&self, v: VertexId) -> bool {
        let (ox, oy) = self.origin();
        let n = self.n as i64;
        (ox..ox + n).contains(&v.x) && (oy..oy + n).contains(&v.y)
    }

    /// Box vertices on the infinite lattice, cell row-major, White before Black.
    pub fn lattice_vertices(&self) -> Vec<VertexId> {
        let (ox, oy) = self.origin();
        let n = self.n as i64;
        let mut out = Vec::with_capacity(self.vertex_count());
        for y in oy..oy + n {
            for x in ox..ox + n {
                out.push(VertexId::white(x, y));
                out.push(VertexId::black(x, y));
            }
        }
        out
    }

    fn fits(&self, g: &Geometry, margin: usize) -> bool {
        if self.n == 0 {
            return false;
        }
        match g.mode() {
            Mode::Torus { l } => self.n + 2 * margin <= *l,
            Mode::Window { width, height, .. } => {
                let (ox, oy) = self.origin();
                let m = margin as i64;
                let n = self.n as i64;
                ox - m >= 0 && oy - m >= 0 && ox + n + m <= *width as i64 && oy + n + m <= *height as i64
            }
        }
    }

    pub fn check_fits(&self, g: &Geometry, margin: usize) -> Result<()> {
        if self.fits(g, margin) {
            Ok(())
        } else {
            Err(Error::BoxDoesNotFit { n: self.n, cx: self.center.0, cy: self.center.1, margin })
        }
    }
}

/// Everything the surgeries need to know about a box placed in a geometry.
#[derive(Clone, Debug)]
pub struct BoxLayout {
    pub spec: BoxSpec,
    /// Dense vertex indices, in [`BoxSpec::lattice_vertices`] order.
    pub vertices: Vec<usize>,
    /// Parallel to `vertices`.
    pub types: Vec<VertexType>,
    member: Vec<bool>,
    pub interior_edges: Vec<usize>,
    pub boundary_edges: Vec<usize>,
    /// TypeIII corner `W(origin)`.
    pub v1: usize,
    /// TypeIII corner `B(origin + (n-1, n-1))`.
    pub w1: usize,
    /// Horizontal partner of `v1`.
    pub p: usize,
    /// Horizontal partner of `w1`.
    pub q: usize,
    /// Corner face at `v1`, cyclic from `v1` (first step along its b-edge).
    pub h1: [usize; 6],
    /// Corner face at `w1`, cyclic from `w1` (first step along its b-edge).
    pub h2: [usize; 6],
    /// Boundary vertices next to `p` and `q` (`v1', v1'', w1', w1''`).
    pub auxiliary: [usize; 4],
}

/// Margin (in cells) required around a box for its corner faces.
pub const BOX_MARGIN: usize = 2;

impl BoxLayout {
    pub fn new(g: &Geometry, spec: BoxSpec) -> Result<BoxLayout> {
        spec.check_fits(g, BOX_MARGIN)?;
        let lat = spec.lattice_vertices();
        let locate = |v: VertexId| g.locate(v).ok_or(Error::InvalidVertex(v));
        let vertices = lat.iter().map(|&v| locate(v)).collect::<Result<Vec<_>>>()?;
        let mut member = vec![false; g.vertex_count()];
        for &v in &vertices {
            member[v] = true;
        }
        let mut types = Vec::with_capacity(vertices.len());
        let mut interior_edges = Vec::new();
        let mut boundary_edges = Vec::new();
        for &v in &vertices {
            let mut outside = 0;
            for k in 0..3 {
                let u = g.adjacent(v)[k].expect("margin keeps box neighbors inside") as usize;
                let Slot::Edge(e) = g.incident(v)[k] else {
                    unreachable!("margin keeps box edges stored")
                };
                if member[u] {
                    if v % 2 == 0 {
                        interior_edges.push(e as usize);
                    }
                } else {
                    outside += 1;
                    boundary_edges.push(e as usize);
                }
            }
            types.push(match outside {
                0 => VertexType::TypeI,
                1 => VertexType::TypeII,
                _ => VertexType::TypeIII,
            });
        }
        interior_edges.sort_unstable();
        boundary_edges.sort_unstable();

        let (ox, oy) = spec.origin();
        let n = spec.n as i64;
        let (xm, ym) = (ox + n - 1, oy + n - 1);
        let v1 = locate(VertexId::white(ox, oy))?;
        let w1 = locate(VertexId::black(xm, ym))?;
        let p = locate(VertexId::black(ox, oy))?;
        let q = locate(VertexId::white(xm, ym))?;
        let h1 = [
            VertexId::white(ox, oy),
            VertexId::black(ox, oy - 1),
            VertexId::white(ox, oy - 1),
            VertexId::black(ox - 1, oy - 1),
            VertexId::white(ox - 1, oy),
            VertexId::black(ox - 1, oy),
        ];
        let h2 = [
            VertexId::black(xm, ym),
            VertexId::white(xm, ym + 1),
            VertexId::black(xm, ym + 1),
            VertexId::white(xm + 1, ym + 1),
            VertexId::black(xm + 1, ym),
            VertexId::white(xm + 1, ym),
        ];
        let h1 = h1.map(|v| locate(v)).into_iter().collect::<Result<Vec<_>>>()?;
        let h2 = h2.map(|v| locate(v)).into_iter().collect::<Result<Vec<_>>>()?;
        let auxiliary = [
            locate(VertexId::white(ox, oy + 1))?,
            locate(VertexId::white(ox + 1, oy))?,
            locate(VertexId::black(xm, ym - 1))?,
            locate(VertexId::black(xm - 1, ym))?,
        ];
        Ok(BoxLayout {
            spec,
            vertices,
            types,
            member,
            interior_edges,
            boundary_edges,
            v1,
            w1,
            p,
            q,
            h1: h1.try_into().expect("six face vertices"),
            h2: h2.try_into().expect("six face vertices"),
            auxiliary,
        })
    }

    #[inline]
    pub fn contains(&self, v: usize) -> bool {
        self.member[v]
    }

    pub fn member_mask(&self) -> &[bool] {
        &self.member
    }

    /// Box vertices with at least one neighbor outside the box.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        self.vertices
            .iter()
            .zip(&self.types)
            .filter(|(_, t)| **t != VertexType::TypeI)
            .map(|(v, _)| *v)
            .collect()
    }

    /// Interior edges sharing an endpoint with a boundary edge.
    pub fn outer_contour(&self, g: &Geometry) -> Vec<usize> {
        let mut on_boundary = vec![false; g.vertex_count()];
        for &v in &self.boundary_vertices() {
            on_boundary[v] = true;
        }
        self.interior_edges
            .iter()
            .copied()
            .filter(|&e| g.endpoints(e).iter().any(|&v| on_boundary[v]))
            .collect()
    }

    /// `h̄1 ∪ h̄2 ∪ {v1', v1'', w1', w1''}`: the corner faces, every vertex
    /// adjacent to them, and the four auxiliary vertices. Sorted.
    pub fn exclusion_set(&self, g: &Geometry) -> Vec<usize> {
        let mut set = std::collections::BTreeSet::new();
        for h in [&self.h1, &self.h2] {
            for &v in h.iter() {
                set.insert(v);
                set.extend(g.adjacent(v).iter().flatten().map(|&u| u as usize));
            }
        }
        set.extend(self.auxiliary);
        set.into_iter().collect()
    }
}

/// Type of every box vertex, keyed by canonical vertex id.
pub fn classify_box_vertices(b: BoxSpec, g: &Geometry) -> Result<BTreeMap<VertexId, VertexType>> {
    let layout = BoxLayout::new(g, b)?;
    Ok(layout.vertices.iter().zip(&layout.types).map(|(&v, &t)| (g.vertex_id(v), t)).collect())
}

pub fn outer_contour(b: BoxSpec, g: &Geometry) -> Result<Vec<EdgeId>> {
    let layout = BoxLayout::new(g, b)?;
    Ok(layout.outer_contour(g).into_iter().map(|e| g.edge_id(e)).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CornerHexagons {
    pub h1: [VertexId; 6],
    pub h2: [VertexId; 6],
    pub exclusion_set: Vec<VertexId>,
}

pub fn corner_hexagons(b: BoxSpec, g: &Geometry) -> Result<CornerHexagons> {
    let layout = BoxLayout::new(g, b)?;
    Ok(CornerHexagons {
        h1: layout.h1.map(|v| g.vertex_id(v)),
        h2: layout.h2.map(|v| g.vertex_id(v)),
        exclusion_set: layout.exclusion_set(g).into_iter().map(|v| g.vertex_id(v)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(ns: &[Neighbor; 3]) -> Vec<EdgeKind> {
        ns.iter().map(|n| n.kind).collect()
    }

    #[test]
    fn torus_neighbors_white_origin() {
        let g = Geometry::torus(4).unwrap();
        let ns = g.neighbors(VertexId::white(0, 0)).unwrap();
        let got: Vec<_> = ns.iter().map(|n| n.vertex).collect();
        assert_eq!(got, vec![VertexId::black(0, 0), VertexId::black(0, 3), VertexId::black(3, 0)]);
        assert_eq!(kinds(&ns), EdgeKind::ALL.to_vec());
    }

    #[test]
    fn torus_neighbors_black_origin() {
        let g = Geometry::torus(4).unwrap();
        let ns = g.neighbors(VertexId::black(0, 0)).unwrap();
        let got: Vec<_> = ns.iter().map(|n| n.vertex).collect();
        assert_eq!(got, vec![VertexId::white(0, 0), VertexId::white(0, 1), VertexId::white(1, 0)]);
    }

    #[test]
    fn window_corner_neighbors_are_exterior() {
        let g = Geometry::window(4, 4, Boundary::Free).unwrap();
        let ns = g.neighbors(VertexId::white(0, 0)).unwrap();
        assert!(!ns[0].is_exterior());
        assert!(ns[1].is_exterior());
        assert!(ns[2].is_exterior());
        assert!(matches!(ns[1].slot, Slot::Stub(_)));
    }

    #[test]
    fn invalid_coordinates_rejected() {
        let g = Geometry::torus(3).unwrap();
        assert!(matches!(g.neighbors(VertexId::white(3, 0)), Err(Error::InvalidVertex(_))));
        assert!(Geometry::torus(1).is_err());
        let w = Geometry::window(2, 2, Boundary::Free).unwrap();
        assert!(w.neighbors(VertexId::black(-1, 0)).is_err());
    }

    #[test]
    fn torus_edge_count_and_index_bijection() {
        for l in 2..=6 {
            let g = Geometry::torus(l).unwrap();
            assert_eq!(g.edge_count(), 3 * l * l);
            for v in 0..g.vertex_count() {
                assert_eq!(g.vertex_index(g.vertex_id(v)).unwrap(), v);
            }
            for e in 0..g.edge_count() {
                assert_eq!(g.edge_slot(g.edge_id(e)), Some(Slot::Edge(e as u32)));
            }
        }
    }

    #[test]
    fn window_edge_and_stub_counts() {
        let g = Geometry::window(3, 2, Boundary::Free).unwrap();
        assert_eq!(g.edge_count(), 3 * 6 - 3 - 2);
        assert_eq!(g.stub_count(), 2 * (3 + 2));
        let bad = Geometry::window(3, 2, Boundary::Fixed(vec![false; 3]));
        assert!(bad.is_err());
    }

    #[test]
    fn regularity_involution_and_kind_consistency() {
        for l in 2..=8 {
            let g = Geometry::torus(l).unwrap();
            for v in 0..g.vertex_count() {
                let mut seen = [false; 3];
                for k in 0..3 {
                    let u = g.adjacent(v)[k].unwrap() as usize;
                    let Slot::Edge(e) = g.incident(v)[k] else { panic!() };
                    seen[g.edge_kind(e as usize).index()] = true;
                    assert_eq!(g.edge_kind(e as usize).index(), k);
                    // u sees v through the same edge and kind
                    assert_eq!(g.adjacent(u)[k], Some(v as u32));
                    assert_eq!(g.incident(u)[k], Slot::Edge(e));
                    let [a, b] = g.endpoints(e as usize);
                    assert!((a == v && b == u) || (a == u && b == v));
                }
                assert_eq!(seen, [true; 3]);
            }
        }
    }

    #[test]
    fn faces_close_after_six_steps() {
        let g = Geometry::torus(5).unwrap();
        let pattern = [EdgeKind::A, EdgeKind::C, EdgeKind::B, EdgeKind::A, EdgeKind::C, EdgeKind::B];
        for y in 0..5 {
            for x in 0..5 {
                let f = face(x, y);
                let mut cur = f[0];
                for (i, k) in pattern.iter().enumerate() {
                    cur = cur.neighbor(*k);
                    assert_eq!(cur, f[(i + 1) % 6]);
                }
                let idx: Vec<_> = f.iter().map(|&v| g.locate(v).unwrap()).collect();
                for i in 0..6 {
                    assert!(g.edge_between(idx[i], idx[(i + 1) % 6]).is_some());
                }
            }
        }
    }

    #[test]
    fn box_type_counts() {
        let g = Geometry::torus(16).unwrap();
        for n in 1..=10 {
            let types = classify_box_vertices(BoxSpec::new(n, (8, 8)), &g).unwrap();
            assert_eq!(types.len(), 2 * n * n);
            let count = |t| types.values().filter(|x| **x == t).count();
            assert_eq!(count(VertexType::TypeIII), 2, "n = {n}");
            let n = n as i64;
            let boundary = (4 * n - 2).min(2 * n * n) as usize;
            assert_eq!(count(VertexType::TypeII) + 2, boundary);
        }
    }

    #[test]
    fn box_must_fit() {
        let g = Geometry::torus(6).unwrap();
        assert!(classify_box_vertices(BoxSpec::new(2, (3, 3)), &g).is_ok());
        assert!(classify_box_vertices(BoxSpec::new(3, (3, 3)), &g).is_err());
        let w = Geometry::window(10, 10, Boundary::Free).unwrap();
        assert!(BoxLayout::new(&w, BoxSpec::new(3, (1, 5))).is_err());
        assert!(BoxLayout::new(&w, BoxSpec::new(3, (5, 5))).is_ok());
    }

    #[test]
    fn contour_small_box_takes_all_interior_edges() {
        let g = Geometry::torus(8).unwrap();
        let layout = BoxLayout::new(&g, BoxSpec::new(2, (4, 4))).unwrap();
        assert_eq!(layout.outer_contour(&g), layout.interior_edges);
    }

    #[test]
    fn corner_faces_touch_box_only_at_corners() {
        let g = Geometry::torus(12).unwrap();
        for n in 2..=6 {
            let layout = BoxLayout::new(&g, BoxSpec::new(n, (6, 6))).unwrap();
            let in_box = |h: &[usize; 6]| h.iter().filter(|&&v| layout.contains(v)).copied().collect::<Vec<_>>();
            assert_eq!(in_box(&layout.h1), vec![layout.v1]);
            assert_eq!(in_box(&layout.h2), vec![layout.w1]);
            assert_eq!(layout.exclusion_set(&g).len(), 28, "n = {n}");
        }
    }
}
