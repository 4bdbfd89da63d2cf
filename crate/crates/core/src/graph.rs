//! Locally finite weighted graphs, lazily generated families, and finite
//! regions materialized for computation.
//!
//! A graph is a triplet (G, ω, μ): a countable vertex set, a symmetric
//! nonnegative edge weight ω with no loops and finite per-vertex sums, and a
//! strictly positive vertex measure μ. Infinite families (lattices, regular
//! trees) exist as pure oracles; only finite regions are ever materialized.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::report::VerificationReport;

/// Vertex identifier. Equality, hashing and the derived ordering are total;
/// the ordering (lexicographic on tuples, words and tokens) fixes the
/// iteration and floating-point summation order everywhere in the crate.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexId {
    /// Point of the integer lattice Z^d.
    Lattice(Vec<i64>),
    /// Path from the root of a rooted regular tree, as child indices.
    TreeWord(Vec<u32>),
    /// Token from an edge-list file.
    Token(String),
}

impl VertexId {
    pub fn lattice(coords: &[i64]) -> Self {
        VertexId::Lattice(coords.to_vec())
    }

    pub fn tree_root() -> Self {
        VertexId::TreeWord(Vec::new())
    }

    pub fn token(t: impl Into<String>) -> Self {
        VertexId::Token(t.into())
    }

    /// Parse the display form back into an id for the given family.
    pub fn parse_for(graph: &Graph, token: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidParameter(format!("vertex token '{token}': {msg}"));
        match &graph.family {
            Family::Lattice { dim } => {
                let inner = token
                    .strip_prefix('(')
                    .and_then(|t| t.strip_suffix(')'))
                    .unwrap_or(token);
                let coords: Vec<i64> = inner
                    .split(',')
                    .map(|part| part.trim().parse::<i64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| bad(&format!("{e}")))?;
                if coords.len() != *dim {
                    return Err(bad(&format!("expected {dim} coordinates")));
                }
                Ok(VertexId::Lattice(coords))
            }
            Family::RegularTree { .. } => {
                let rest = token
                    .strip_prefix('T')
                    .ok_or_else(|| bad("expected 'T' prefix"))?;
                if rest.is_empty() {
                    return Ok(VertexId::tree_root());
                }
                let word: Vec<u32> = rest
                    .split('.')
                    .map(|part| part.parse::<u32>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| bad(&format!("{e}")))?;
                let id = VertexId::TreeWord(word);
                if !graph.contains(&id) {
                    return Err(bad("child index out of range for this branching"));
                }
                Ok(id)
            }
            Family::Explicit(_) => Ok(VertexId::token(token)),
        }
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexId::Lattice(v) if v.len() == 1 => write!(f, "{}", v[0]),
            VertexId::Lattice(v) => {
                write!(f, "(")?;
                for (k, c) in v.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
            VertexId::TreeWord(w) => {
                write!(f, "T")?;
                for (k, c) in w.iter().enumerate() {
                    if k > 0 {
                        write!(f, ".")?;
                    }
                    write!(f, "{c}")?;
                }
                Ok(())
            }
            VertexId::Token(t) => write!(f, "{t}"),
        }
    }
}

impl From<i64> for VertexId {
    fn from(n: i64) -> Self {
        VertexId::Lattice(vec![n])
    }
}

impl From<(i64, i64)> for VertexId {
    fn from((a, b): (i64, i64)) -> Self {
        VertexId::Lattice(vec![a, b])
    }
}

/// Descriptor used to construct a built-in or file-backed graph family.
#[derive(Clone, Debug)]
pub enum FamilyDescriptor {
    /// Z^d with unit edge weights and unit measure.
    Lattice { dim: usize },
    /// Rooted tree in which every vertex has `branching` neighbors
    /// (the root has `branching` children, every other vertex
    /// `branching - 1` children plus its parent). Unit weights and measure.
    RegularTree { branching: u32 },
    /// Finite graph read from an edge-list file, with an optional measure file.
    EdgeList {
        edges: std::path::PathBuf,
        measures: Option<std::path::PathBuf>,
    },
}

#[derive(Clone)]
pub(crate) enum Family {
    Lattice { dim: usize },
    RegularTree { branching: u32 },
    Explicit(Arc<ExplicitGraph>),
}

pub(crate) struct ExplicitGraph {
    /// Mirrored, per-vertex sorted adjacency.
    adjacency: BTreeMap<String, Vec<(String, f64)>>,
    /// Explicit measures; absent vertices default to 1.
    measure: BTreeMap<String, f64>,
}

/// A weighted graph given by pure neighbor and measure oracles. Cloning is
/// cheap; file-backed data is shared behind an `Arc`.
#[derive(Clone)]
pub struct Graph {
    pub(crate) family: Family,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Lattice { dim } => write!(f, "Graph::lattice({dim})"),
            Family::RegularTree { branching } => write!(f, "Graph::regular_tree({branching})"),
            Family::Explicit(g) => write!(f, "Graph::edge_list({} vertices)", g.adjacency.len()),
        }
    }
}

/// Build a graph family from its descriptor.
pub fn make_family(descriptor: &FamilyDescriptor) -> Result<Graph> {
    match descriptor {
        FamilyDescriptor::Lattice { dim } => Graph::lattice(*dim),
        FamilyDescriptor::RegularTree { branching } => Graph::regular_tree(*branching),
        FamilyDescriptor::EdgeList { edges, measures } => {
            Graph::from_edge_list(edges, measures.as_deref())
        }
    }
}

impl Graph {
    pub fn lattice(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "lattice dimension must be >= 1".into(),
            ));
        }
        Ok(Graph {
            family: Family::Lattice { dim },
        })
    }

    pub fn regular_tree(branching: u32) -> Result<Self> {
        if branching < 2 {
            return Err(Error::InvalidParameter(
                "tree branching must be >= 2".into(),
            ));
        }
        Ok(Graph {
            family: Family::RegularTree { branching },
        })
    }

    pub fn from_edge_list(edges: &Path, measures: Option<&Path>) -> Result<Self> {
        let explicit = ExplicitGraph::load(edges, measures)?;
        Ok(Graph {
            family: Family::Explicit(Arc::new(explicit)),
        })
    }

    /// Canonical base vertex of the family (lattice origin, tree root, or
    /// the lexicographically smallest file token).
    pub fn origin(&self) -> VertexId {
        match &self.family {
            Family::Lattice { dim } => VertexId::Lattice(vec![0; *dim]),
            Family::RegularTree { .. } => VertexId::tree_root(),
            Family::Explicit(g) => {
                let first = g
                    .adjacency
                    .keys()
                    .chain(g.measure.keys())
                    .min()
                    .cloned()
                    .unwrap_or_default();
                VertexId::Token(first)
            }
        }
    }

    /// Whether the id belongs to this graph's vertex set.
    pub fn contains(&self, x: &VertexId) -> bool {
        match (&self.family, x) {
            (Family::Lattice { dim }, VertexId::Lattice(v)) => v.len() == *dim,
            (Family::RegularTree { branching }, VertexId::TreeWord(w)) => {
                w.iter().enumerate().all(|(k, &c)| {
                    if k == 0 {
                        c < *branching
                    } else {
                        c < branching - 1
                    }
                })
            }
            (Family::Explicit(g), VertexId::Token(t)) => {
                g.adjacency.contains_key(t) || g.measure.contains_key(t)
            }
            _ => false,
        }
    }

    /// Neighbor oracle: the finite list of (y, ω(x, y)) with ω(x, y) > 0,
    /// in a deterministic order.
    pub fn neighbors(&self, x: &VertexId) -> Result<Vec<(VertexId, f64)>> {
        match (&self.family, x) {
            (Family::Lattice { dim }, VertexId::Lattice(v)) if v.len() == *dim => {
                let mut out = Vec::with_capacity(2 * dim);
                for i in 0..*dim {
                    for step in [-1i64, 1] {
                        let mut w = v.clone();
                        w[i] += step;
                        out.push((VertexId::Lattice(w), 1.0));
                    }
                }
                Ok(out)
            }
            (Family::RegularTree { branching }, VertexId::TreeWord(w)) if self.contains(x) => {
                let mut out = Vec::new();
                if !w.is_empty() {
                    out.push((VertexId::TreeWord(w[..w.len() - 1].to_vec()), 1.0));
                }
                let children = if w.is_empty() {
                    *branching
                } else {
                    *branching - 1
                };
                for c in 0..children {
                    let mut child = w.clone();
                    child.push(c);
                    out.push((VertexId::TreeWord(child), 1.0));
                }
                Ok(out)
            }
            (Family::Explicit(g), VertexId::Token(t)) if self.contains(x) => Ok(g
                .adjacency
                .get(t)
                .map(|ns| {
                    ns.iter()
                        .map(|(y, w)| (VertexId::Token(y.clone()), *w))
                        .collect()
                })
                .unwrap_or_default()),
            _ => Err(Error::UnknownVertex(x.to_string())),
        }
    }

    /// Measure oracle μ(x) > 0.
    pub fn measure(&self, x: &VertexId) -> Result<f64> {
        match (&self.family, x) {
            (Family::Lattice { .. }, VertexId::Lattice(_))
            | (Family::RegularTree { .. }, VertexId::TreeWord(_))
                if self.contains(x) =>
            {
                Ok(1.0)
            }
            (Family::Explicit(g), VertexId::Token(t)) if self.contains(x) => {
                Ok(g.measure.get(t).copied().unwrap_or(1.0))
            }
            _ => Err(Error::UnknownVertex(x.to_string())),
        }
    }

    /// deg(x) = Σ_y ω(x, y) and Deg(x) = deg(x) / μ(x).
    pub fn degree(&self, x: &VertexId) -> Result<(f64, f64)> {
        let deg: f64 = self.neighbors(x)?.iter().map(|(_, w)| w).sum();
        Ok((deg, deg / self.measure(x)?))
    }

    pub(crate) fn is_builtin(&self) -> bool {
        !matches!(self.family, Family::Explicit(_))
    }

    /// Lattice dimension, when this is a lattice family.
    pub fn lattice_dim(&self) -> Option<usize> {
        match self.family {
            Family::Lattice { dim } => Some(dim),
            _ => None,
        }
    }

    /// Branching number, when this is a regular-tree family.
    pub fn tree_branching(&self) -> Option<u32> {
        match self.family {
            Family::RegularTree { branching } => Some(branching),
            _ => None,
        }
    }
}

impl ExplicitGraph {
    fn load(edges_path: &Path, measures_path: Option<&Path>) -> Result<Self> {
        let path_str = edges_path.display().to_string();
        let text = std::fs::read_to_string(edges_path).map_err(|source| Error::Io {
            path: path_str.clone(),
            source,
        })?;

        let mut adjacency: BTreeMap<String, Vec<(String, f64)>> = BTreeMap::new();
        let mut seen: HashSet<(String, String)> = HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != 3 {
                return Err(Error::Parse {
                    path: path_str.clone(),
                    line: line_no,
                    msg: format!("expected 'X Y W', found {} tokens", tokens.len()),
                });
            }
            let (x, y) = (tokens[0].to_string(), tokens[1].to_string());
            let w: f64 = tokens[2].parse().map_err(|e| Error::Parse {
                path: path_str.clone(),
                line: line_no,
                msg: format!("bad weight '{}': {e}", tokens[2]),
            })?;
            if x == y {
                return Err(Error::LoopEdge {
                    path: path_str.clone(),
                    line: line_no,
                    vertex: x,
                });
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::NonpositiveWeight {
                    path: path_str.clone(),
                    line: line_no,
                    x,
                    y,
                    value: w,
                });
            }
            let key = if x <= y {
                (x.clone(), y.clone())
            } else {
                (y.clone(), x.clone())
            };
            if !seen.insert(key) {
                return Err(Error::DuplicateEdge {
                    path: path_str.clone(),
                    line: line_no,
                    x,
                    y,
                });
            }
            adjacency.entry(x.clone()).or_default().push((y.clone(), w));
            adjacency.entry(y).or_default().push((x, w));
        }
        for list in adjacency.values_mut() {
            list.sort_by(|a, b| a.0.cmp(&b.0));
        }

        let mut measure = BTreeMap::new();
        if let Some(mp) = measures_path {
            let mpath = mp.display().to_string();
            let mtext = std::fs::read_to_string(mp).map_err(|source| Error::Io {
                path: mpath.clone(),
                source,
            })?;
            for (idx, raw) in mtext.lines().enumerate() {
                let line_no = idx + 1;
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let tokens: Vec<&str> = line.split_whitespace().collect();
                if tokens.len() != 2 {
                    return Err(Error::Parse {
                        path: mpath.clone(),
                        line: line_no,
                        msg: format!("expected 'X M', found {} tokens", tokens.len()),
                    });
                }
                let v = tokens[0].to_string();
                let m: f64 = tokens[1].parse().map_err(|e| Error::Parse {
                    path: mpath.clone(),
                    line: line_no,
                    msg: format!("bad measure '{}': {e}", tokens[1]),
                })?;
                if !(m > 0.0) || !m.is_finite() {
                    return Err(Error::NonpositiveMeasure {
                        path: mpath.clone(),
                        line: line_no,
                        vertex: v,
                        value: m,
                    });
                }
                if measure.insert(v.clone(), m).is_some() {
                    return Err(Error::Parse {
                        path: mpath.clone(),
                        line: line_no,
                        msg: format!("vertex '{v}' listed twice in the measure file"),
                    });
                }
            }
        }

        Ok(ExplicitGraph { adjacency, measure })
    }
}

/// A finite materialized piece of a graph: the induced internal adjacency,
/// the halo edges leaving the set, and the restricted measure. Immutable
/// after construction.
#[derive(Clone, Debug)]
pub struct GraphRegion {
    vertices: Vec<VertexId>,
    index: HashMap<VertexId, usize>,
    internal: Vec<Vec<(usize, f64)>>,
    halo: Vec<Vec<(VertexId, f64)>>,
    measures: Vec<f64>,
}

impl GraphRegion {
    /// Assemble a region from raw data without consulting a graph oracle.
    /// Only shape is checked here; use [`validate_region`] to audit the
    /// graph invariants (this is the ingestion path for adversarial tests).
    pub fn from_raw_parts(
        vertices: Vec<VertexId>,
        internal: Vec<Vec<(usize, f64)>>,
        halo: Vec<Vec<(VertexId, f64)>>,
        measures: Vec<f64>,
    ) -> Result<Self> {
        let n = vertices.len();
        if internal.len() != n || halo.len() != n || measures.len() != n {
            return Err(Error::InvalidParameter(
                "region arrays must all have one entry per vertex".into(),
            ));
        }
        if internal.iter().flatten().any(|(j, _)| *j >= n) {
            return Err(Error::InvalidParameter(
                "internal neighbor index out of range".into(),
            ));
        }
        let index = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();
        Ok(GraphRegion {
            vertices,
            index,
            internal,
            halo,
            measures,
        })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &VertexId {
        &self.vertices[i]
    }

    pub fn index_of(&self, v: &VertexId) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn contains(&self, v: &VertexId) -> bool {
        self.index.contains_key(v)
    }

    pub fn measure(&self, i: usize) -> f64 {
        self.measures[i]
    }

    pub fn internal_neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.internal[i]
    }

    pub fn halo_neighbors(&self, i: usize) -> &[(VertexId, f64)] {
        &self.halo[i]
    }

    /// Full neighbor list of the i-th vertex: internal neighbors first,
    /// then halo neighbors, as (id, weight).
    pub fn all_neighbors(&self, i: usize) -> impl Iterator<Item = (&VertexId, f64)> + '_ {
        self.internal[i]
            .iter()
            .map(move |(j, w)| (&self.vertices[*j], *w))
            .chain(self.halo[i].iter().map(|(v, w)| (v, *w)))
    }

    /// Number of unordered internal edges.
    pub fn internal_edge_count(&self) -> usize {
        self.internal.iter().map(|ns| ns.len()).sum::<usize>() / 2
    }

    /// Number of halo edges (one endpoint inside, one outside).
    pub fn halo_edge_count(&self) -> usize {
        self.halo.iter().map(|ns| ns.len()).sum()
    }

    /// True when the vertex has no halo edges, so its whole neighborhood is
    /// inside the region.
    pub fn is_interior(&self, i: usize) -> bool {
        self.halo[i].is_empty()
    }

    /// Number of connected components of the internal adjacency. Ball
    /// regions are connected by construction; connectivity of lazy graphs is
    /// only ever certified through their materialized regions.
    pub fn component_count(&self) -> usize {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut components = 0;
        let mut stack = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(i) = stack.pop() {
                for &(j, w) in &self.internal[i] {
                    if w > 0.0 && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        components
    }
}

/// Materialize the finite vertex set into a region. Vertices are stored in
/// canonical order, so materializing the same set twice yields identical
/// regions.
pub fn materialize(g: &Graph, vertices: &[VertexId]) -> Result<GraphRegion> {
    let mut sorted = vertices.to_vec();
    sorted.sort();
    for pair in sorted.windows(2) {
        if pair[0] == pair[1] {
            return Err(Error::DuplicateVertex(pair[0].to_string()));
        }
    }
    let index: HashMap<VertexId, usize> = sorted
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), i))
        .collect();
    let mut internal = Vec::with_capacity(sorted.len());
    let mut halo = Vec::with_capacity(sorted.len());
    let mut measures = Vec::with_capacity(sorted.len());
    for v in &sorted {
        let mut inner = Vec::new();
        let mut outer = Vec::new();
        for (y, w) in g.neighbors(v)? {
            match index.get(&y) {
                Some(&j) => inner.push((j, w)),
                None => outer.push((y, w)),
            }
        }
        internal.push(inner);
        halo.push(outer);
        measures.push(g.measure(v)?);
    }
    Ok(GraphRegion {
        vertices: sorted,
        index,
        internal,
        halo,
        measures,
    })
}

/// Audit the graph invariants on a materialized region: no loops, symmetric
/// internal weights, nonnegative weights, positive measures, halo edges
/// pointing strictly outside, and internal connectivity (the regional proxy
/// for connectedness of the ambient graph). Violations are report content,
/// not errors.
pub fn validate_region(region: &GraphRegion) -> VerificationReport {
    let mut failures = Vec::new();
    for i in 0..region.len() {
        let x = region.vertex(i);
        if region.measures[i] <= 0.0 || !region.measures[i].is_finite() {
            failures.push(format!(
                "measure not positive at {x}: {}",
                region.measures[i]
            ));
        }
        for &(j, w) in &region.internal[i] {
            let y = region.vertex(j);
            if i == j {
                failures.push(format!("loop edge at {x}"));
                continue;
            }
            if w < 0.0 || !w.is_finite() {
                failures.push(format!("negative weight on edge ({x}, {y}): {w}"));
            }
            let mirrored = region.internal[j]
                .iter()
                .find(|(k, _)| *k == i)
                .map(|(_, wb)| *wb);
            match mirrored {
                Some(wb) if crate::numeric::relatively_close(w, wb, 1e-12) => {}
                Some(wb) => {
                    failures.push(format!("asymmetric weight on edge ({x}, {y}): {w} vs {wb}"))
                }
                None => failures.push(format!("missing reverse edge for ({x}, {y})")),
            }
        }
        for (y, _) in &region.halo[i] {
            if region.contains(y) {
                failures.push(format!("halo edge from {x} to internal vertex {y}"));
            }
        }
    }
    for pair in region.vertices.windows(2) {
        if pair[0] >= pair[1] {
            failures.push(format!("vertex ordering violated near {}", pair[0]));
        }
    }
    let components = region.component_count();
    if components > 1 {
        failures.push(format!("region not connected: {components} components"));
    }
    VerificationReport::structural("region_validation", failures, region.len())
}
