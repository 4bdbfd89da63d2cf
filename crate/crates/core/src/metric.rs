//! Pseudometrics on graphs: distance evaluation, ball enumeration, jump
//! size, q-intrinsic bounds and the distance-Laplacian bound.
//!
//! A pseudometric d satisfies d(x,x) = 0, symmetry and the triangle
//! inequality. The jump size is sup d(x,y) over edges; d is q-intrinsic with
//! bound C when (1/μ(x)) Σ_y ω(x,y) d^q(x,y) <= C at every vertex
//! ("intrinsic" meaning q = 2 with C = 1).

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphRegion, VertexId};

pub const DEFAULT_BALL_BUDGET: usize = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MetricKind {
    /// Hop-count distance.
    Combinatorial,
    /// Hop count times a fixed scale σ > 0.
    Scaled { scale: f64 },
    /// Shortest-path distance with edge length 1/sqrt(max(Deg(x), Deg(y))),
    /// which is intrinsic (q = 2, bound 1) on any locally finite graph.
    EdgeLength,
}

/// Distance oracle over a graph. Pure: repeated calls return identical
/// results and may be issued from concurrent workers.
#[derive(Clone, Debug)]
pub struct PseudoMetric {
    kind: MetricKind,
    budget: usize,
}

/// A supremum-type metric quantity computed over a region, with a flag that
/// is set when vertex-transitivity of the family makes the regional value
/// equal to the global one. Without the flag the value is only a lower bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricBound {
    pub value: f64,
    pub exact: bool,
}

impl PseudoMetric {
    pub fn combinatorial() -> Self {
        PseudoMetric {
            kind: MetricKind::Combinatorial,
            budget: DEFAULT_BALL_BUDGET,
        }
    }

    pub fn scaled(scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "metric scale must be > 0, got {scale}"
            )));
        }
        Ok(PseudoMetric {
            kind: MetricKind::Scaled { scale },
            budget: DEFAULT_BALL_BUDGET,
        })
    }

    pub fn edge_length() -> Self {
        PseudoMetric {
            kind: MetricKind::EdgeLength,
            budget: DEFAULT_BALL_BUDGET,
        }
    }

    /// Default metric for a family: the scaled hop metric with
    /// σ = 1/sqrt(2d) on lattice(d) and σ = 1/sqrt(b) on regular_tree(b),
    /// the canonical choices making the metric intrinsic with bound exactly
    /// 1; edge-length shortest path for file graphs.
    pub fn default_for(g: &Graph) -> Self {
        if let Some(d) = g.lattice_dim() {
            return PseudoMetric::scaled(1.0 / (2.0 * d as f64).sqrt()).expect("positive scale");
        }
        if let Some(b) = g.tree_branching() {
            return PseudoMetric::scaled(1.0 / (b as f64).sqrt()).expect("positive scale");
        }
        PseudoMetric::edge_length()
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    /// Hop scale for combinatorial-type kinds.
    fn hop_scale(&self) -> Option<f64> {
        match self.kind {
            MetricKind::Combinatorial => Some(1.0),
            MetricKind::Scaled { scale } => Some(scale),
            MetricKind::EdgeLength => None,
        }
    }

    pub fn distance(&self, g: &Graph, x: &VertexId, y: &VertexId) -> Result<f64> {
        if let Some(scale) = self.hop_scale() {
            return Ok(scale * self.hops(g, x, y)? as f64);
        }
        self.dijkstra_distance(g, x, y)
    }

    fn hops(&self, g: &Graph, x: &VertexId, y: &VertexId) -> Result<u64> {
        match (x, y) {
            (VertexId::Lattice(a), VertexId::Lattice(b))
                if g.contains(x) && g.contains(y) && a.len() == b.len() =>
            {
                Ok(a.iter().zip(b).map(|(p, q)| p.abs_diff(*q)).sum())
            }
            (VertexId::TreeWord(a), VertexId::TreeWord(b)) if g.contains(x) && g.contains(y) => {
                let lcp = a.iter().zip(b.iter()).take_while(|(p, q)| p == q).count();
                Ok((a.len() + b.len() - 2 * lcp) as u64)
            }
            _ if g.contains(x) && g.contains(y) => self.bfs_hops(g, x, y),
            _ => Err(Error::UnknownVertex(
                if g.contains(x) { y } else { x }.to_string(),
            )),
        }
    }

    fn bfs_hops(&self, g: &Graph, x: &VertexId, y: &VertexId) -> Result<u64> {
        if x == y {
            return Ok(0);
        }
        let mut seen: HashSet<VertexId> = HashSet::new();
        let mut queue: VecDeque<(VertexId, u64)> = VecDeque::new();
        seen.insert(x.clone());
        queue.push_back((x.clone(), 0));
        while let Some((v, h)) = queue.pop_front() {
            for (n, _) in g.neighbors(&v)? {
                if n == *y {
                    return Ok(h + 1);
                }
                if seen.insert(n.clone()) {
                    if seen.len() > self.budget {
                        return Err(Error::BallBudgetExceeded {
                            budget: self.budget,
                        });
                    }
                    queue.push_back((n, h + 1));
                }
            }
        }
        Err(Error::Unreachable(y.to_string()))
    }

    fn edge_len(&self, g: &Graph, a: &VertexId, b: &VertexId) -> Result<f64> {
        let da = g.degree(a)?.1;
        let db = g.degree(b)?.1;
        Ok(1.0 / da.max(db).sqrt())
    }

    fn dijkstra_distance(&self, g: &Graph, x: &VertexId, y: &VertexId) -> Result<f64> {
        if !g.contains(y) {
            return Err(Error::UnknownVertex(y.to_string()));
        }
        let mut settled: HashMap<VertexId, f64> = HashMap::new();
        let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::new();
        heap.push(HeapEntry {
            dist: 0.0,
            vertex: x.clone(),
        });
        while let Some(HeapEntry { dist, vertex }) = heap.pop() {
            if settled.contains_key(&vertex) {
                continue;
            }
            settled.insert(vertex.clone(), dist);
            if vertex == *y {
                return Ok(dist);
            }
            if settled.len() > self.budget {
                return Err(Error::BallBudgetExceeded {
                    budget: self.budget,
                });
            }
            for (n, _) in g.neighbors(&vertex)? {
                if !settled.contains_key(&n) {
                    let d = dist + self.edge_len(g, &vertex, &n)?;
                    heap.push(HeapEntry { dist: d, vertex: n });
                }
            }
        }
        Err(Error::Unreachable(y.to_string()))
    }
}

struct HeapEntry {
    dist: f64,
    vertex: VertexId,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    // min-heap on distance, ties broken by vertex order for determinism
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

/// The open ball B_r(x0) = { x : d(x, x0) < r }, enumerated completely.
/// One graph step changes the distance by at most the jump size, so layered
/// search cannot miss vertices. Returns the vertices in canonical order.
pub fn ball(g: &Graph, m: &PseudoMetric, x0: &VertexId, r: f64) -> Result<Vec<VertexId>> {
    if !g.contains(x0) {
        return Err(Error::UnknownVertex(x0.to_string()));
    }
    let mut out: Vec<VertexId> = Vec::new();
    if let Some(scale) = m.hop_scale() {
        if r <= 0.0 {
            return Ok(out);
        }
        let mut seen: HashSet<VertexId> = HashSet::new();
        let mut frontier = vec![x0.clone()];
        seen.insert(x0.clone());
        out.push(x0.clone());
        let mut hop = 0u64;
        loop {
            hop += 1;
            if (hop as f64) * scale >= r {
                break;
            }
            let mut next = Vec::new();
            for v in &frontier {
                for (n, _) in g.neighbors(v)? {
                    if seen.insert(n.clone()) {
                        if seen.len() > m.budget {
                            return Err(Error::BallBudgetExceeded { budget: m.budget });
                        }
                        out.push(n.clone());
                        next.push(n);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        out.sort();
        return Ok(out);
    }

    // Edge-length metric: Dijkstra, stopping once the closest unsettled
    // vertex is at distance >= r.
    let mut settled: HashSet<VertexId> = HashSet::new();
    let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::new();
    heap.push(HeapEntry {
        dist: 0.0,
        vertex: x0.clone(),
    });
    while let Some(HeapEntry { dist, vertex }) = heap.pop() {
        if dist >= r {
            break;
        }
        if !settled.insert(vertex.clone()) {
            continue;
        }
        if settled.len() > m.budget {
            return Err(Error::BallBudgetExceeded { budget: m.budget });
        }
        out.push(vertex.clone());
        for (n, _) in g.neighbors(&vertex)? {
            if !settled.contains(&n) {
                let d = dist + m.edge_len(g, &vertex, &n)?;
                if d < r {
                    heap.push(HeapEntry { dist: d, vertex: n });
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Ball materialized into a region in one step.
pub fn ball_region(g: &Graph, m: &PseudoMetric, x0: &VertexId, r: f64) -> Result<GraphRegion> {
    let verts = ball(g, m, x0, r)?;
    crate::graph::materialize(g, &verts)
}

fn is_homogeneous(g: &Graph, _m: &PseudoMetric) -> bool {
    // Lattices and regular trees are vertex-transitive for every supported
    // metric kind, so one vertex determines the supremum.
    g.is_builtin()
}

/// sup d(x, y) over internal edges of the region. Flagged exact when the
/// family is vertex-transitive, otherwise a lower bound for the global
/// jump size.
pub fn jump_size(g: &Graph, m: &PseudoMetric, region: &GraphRegion) -> Result<MetricBound> {
    let mut sup: Option<f64> = None;
    for i in 0..region.len() {
        let x = region.vertex(i);
        for &(j, w) in region.internal_neighbors(i) {
            if w > 0.0 && j > i {
                let d = m.distance(g, x, region.vertex(j))?;
                sup = Some(sup.map_or(d, |s: f64| s.max(d)));
            }
        }
    }
    match sup {
        Some(value) => Ok(MetricBound {
            value,
            exact: is_homogeneous(g, m),
        }),
        None => Err(Error::NoEdges),
    }
}

/// max over region vertices of (1/μ(x)) Σ_y ω(x,y) d^q(x,y), full neighbor
/// sets (halo included) so the bound is never truncated.
pub fn intrinsic_bound(
    g: &Graph,
    m: &PseudoMetric,
    q: f64,
    region: &GraphRegion,
) -> Result<MetricBound> {
    if !(q >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "intrinsic exponent q must be >= 1, got {q}"
        )));
    }
    let mut best = 0.0f64;
    for i in 0..region.len() {
        let x = region.vertex(i);
        let mut acc = 0.0;
        for (y, w) in region.all_neighbors(i) {
            acc += w * m.distance(g, x, y)?.powf(q);
        }
        best = best.max(acc / region.measure(i));
    }
    Ok(MetricBound {
        value: best,
        exact: is_homogeneous(g, m),
    })
}

/// max over the region of |Δ d(., x0)|(x), full neighborhoods. Bounded by
/// the q = 1 intrinsic bound.
pub fn distance_laplacian_bound(
    g: &Graph,
    m: &PseudoMetric,
    x0: &VertexId,
    region: &GraphRegion,
) -> Result<f64> {
    let mut best = 0.0f64;
    for i in 0..region.len() {
        let x = region.vertex(i);
        let dx = m.distance(g, x, x0)?;
        let mut acc = 0.0;
        for (y, w) in region.all_neighbors(i) {
            acc += w * (m.distance(g, y, x0)? - dx);
        }
        best = best.max((acc / region.measure(i)).abs());
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::materialize;

    fn lat1() -> Graph {
        Graph::lattice(1).unwrap()
    }

    #[test]
    fn combinatorial_ball_on_line() {
        let g = lat1();
        let m = PseudoMetric::combinatorial();
        let b = ball(&g, &m, &VertexId::from(0), 2.5).unwrap();
        let want: Vec<VertexId> = (-2..=2).map(VertexId::from).collect();
        assert_eq!(b, want);
    }

    #[test]
    fn scaled_ball_on_line() {
        // |n| / sqrt(2) < 1 solves to n in {-1, 0, 1}
        let g = lat1();
        let m = PseudoMetric::scaled(1.0 / 2f64.sqrt()).unwrap();
        let b = ball(&g, &m, &VertexId::from(0), 1.0).unwrap();
        let want: Vec<VertexId> = (-1..=1).map(VertexId::from).collect();
        assert_eq!(b, want);
    }

    #[test]
    fn zero_radius_ball_is_empty() {
        let g = lat1();
        for m in [PseudoMetric::combinatorial(), PseudoMetric::edge_length()] {
            assert!(ball(&g, &m, &VertexId::from(0), 0.0).unwrap().is_empty());
        }
    }

    #[test]
    fn budget_guard_fires() {
        let g = lat1();
        let m = PseudoMetric::combinatorial().with_budget(10);
        let err = ball(&g, &m, &VertexId::from(0), 100.0).unwrap_err();
        assert!(matches!(err, Error::BallBudgetExceeded { budget: 10 }));
    }

    #[test]
    fn jump_sizes() {
        let g = lat1();
        let region =
            ball_region(&g, &PseudoMetric::combinatorial(), &VertexId::from(0), 4.0).unwrap();
        let s = jump_size(&g, &PseudoMetric::combinatorial(), &region).unwrap();
        assert_eq!(s.value, 1.0);
        assert!(s.exact);
        let sigma = 1.0 / 2f64.sqrt();
        let s = jump_size(&g, &PseudoMetric::scaled(sigma).unwrap(), &region).unwrap();
        assert_eq!(s.value, sigma);
        let g2 = Graph::lattice(2).unwrap();
        let r2 = ball_region(
            &g2,
            &PseudoMetric::combinatorial(),
            &VertexId::from((0, 0)),
            2.0,
        )
        .unwrap();
        let s2 = jump_size(&g2, &PseudoMetric::scaled(0.5).unwrap(), &r2).unwrap();
        assert_eq!(s2.value, 0.5);
    }

    #[test]
    fn jump_size_needs_edges() {
        let g = lat1();
        let region = materialize(&g, &[VertexId::from(0)]).unwrap();
        assert!(matches!(
            jump_size(&g, &PseudoMetric::combinatorial(), &region),
            Err(Error::NoEdges)
        ));
    }

    #[test]
    fn intrinsic_bounds_on_line() {
        let g = lat1();
        let region =
            ball_region(&g, &PseudoMetric::combinatorial(), &VertexId::from(0), 4.0).unwrap();
        // combinatorial, q=2: both unit neighbors contribute 1 each
        let b = intrinsic_bound(&g, &PseudoMetric::combinatorial(), 2.0, &region).unwrap();
        assert_eq!(b.value, 2.0);
        // scaled by 1/sqrt(2): q=2 gives 2 * 1/2 = 1 (intrinsic)
        let m = PseudoMetric::scaled(1.0 / 2f64.sqrt()).unwrap();
        let b = intrinsic_bound(&g, &m, 2.0, &region).unwrap();
        assert!((b.value - 1.0).abs() <= 1e-14, "{}", b.value);
        // q=1 gives 2 / sqrt(2) = sqrt(2)
        let b = intrinsic_bound(&g, &m, 1.0, &region).unwrap();
        assert!((b.value - 2f64.sqrt()).abs() <= 1e-14);
    }

    #[test]
    fn distance_laplacian_on_line() {
        let g = lat1();
        let m = PseudoMetric::combinatorial();
        let x0 = VertexId::from(0);
        // away from the base point the two neighbor contributions cancel
        let far = materialize(&g, &[VertexId::from(5)]).unwrap();
        assert_eq!(distance_laplacian_bound(&g, &m, &x0, &far).unwrap(), 0.0);
        // at the base point both neighbors sit at distance 1
        let at = materialize(&g, &[VertexId::from(0)]).unwrap();
        assert_eq!(distance_laplacian_bound(&g, &m, &x0, &at).unwrap(), 2.0);
    }

    #[test]
    fn distance_laplacian_below_q1_bound() {
        for (g, m) in [
            (lat1(), PseudoMetric::scaled(1.0 / 2f64.sqrt()).unwrap()),
            (
                Graph::lattice(2).unwrap(),
                PseudoMetric::scaled(0.5).unwrap(),
            ),
            (
                Graph::regular_tree(3).unwrap(),
                PseudoMetric::scaled(1.0 / 3f64.sqrt()).unwrap(),
            ),
        ] {
            let x0 = g.origin();
            let region = ball_region(&g, &m, &x0, 5.0).unwrap();
            let c1 = intrinsic_bound(&g, &m, 1.0, &region).unwrap().value;
            let dl = distance_laplacian_bound(&g, &m, &x0, &region).unwrap();
            assert!(dl <= c1 * (1.0 + 1e-12), "{dl} vs {c1}");
        }
    }

    #[test]
    fn tree_distance_closed_form() {
        let g = Graph::regular_tree(3).unwrap();
        let m = PseudoMetric::combinatorial();
        let a = VertexId::TreeWord(vec![0, 1]);
        let b = VertexId::TreeWord(vec![0, 0, 1]);
        // common prefix [0]: 2 + 3 - 2*1 = 3 hops
        assert_eq!(m.distance(&g, &a, &b).unwrap(), 3.0);
        assert_eq!(m.distance(&g, &a, &a).unwrap(), 0.0);
    }

    #[test]
    fn edge_length_metric_is_scaled_hop_on_lattice() {
        // all weighted degrees equal 2d, so every edge has length 1/sqrt(2d)
        let g = Graph::lattice(2).unwrap();
        let m = PseudoMetric::edge_length();
        let d = m
            .distance(&g, &VertexId::from((0, 0)), &VertexId::from((2, 1)))
            .unwrap();
        assert!((d - 3.0 / 2.0).abs() <= 1e-12, "{d}");
        let region = ball_region(&g, &m, &VertexId::from((0, 0)), 1.2).unwrap();
        let q2 = intrinsic_bound(&g, &m, 2.0, &region).unwrap().value;
        assert!((q2 - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn explicit_graph_bfs_distance() {
        let dir = std::env::temp_dir().join("schrograph-metric-tests");
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("path.txt");
        std::fs::write(&p, "a b 1.0\nb c 2.0\nc d 0.5\n").unwrap();
        let g = Graph::from_edge_list(&p, None).unwrap();
        let m = PseudoMetric::combinatorial();
        assert_eq!(
            m.distance(&g, &VertexId::token("a"), &VertexId::token("d"))
                .unwrap(),
            3.0
        );
        let b = ball(&g, &m, &VertexId::token("a"), 2.5).unwrap();
        assert_eq!(b.len(), 3); // a, b, c
    }
}
