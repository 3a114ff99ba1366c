//! Finite graphs with path-metric primitives.
//!
//! A [`Graph`] is usually a ball truncation of an infinite graph. The
//! vertices on the truncation shell are recorded as the graph's boundary,
//! and a component of a vertex-deleted subgraph counts as *deep* when it
//! reaches that boundary.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};

pub type VertexId = usize;

/// A subset of the vertices of one graph, with constant-time membership.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    bits: FixedBitSet,
}

impl VertexSet {
    pub fn empty(universe: usize) -> Self {
        Self {
            bits: FixedBitSet::with_capacity(universe),
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(universe);
        bits.insert_range(..);
        Self { bits }
    }

    pub fn from_ids<I: IntoIterator<Item = VertexId>>(universe: usize, ids: I) -> Self {
        let mut set = Self::empty(universe);
        for v in ids {
            set.insert(v);
        }
        set
    }

    /// Number of vertices of the owning graph.
    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.bits.contains(v)
    }

    /// Panics if `v` lies outside the universe.
    pub fn insert(&mut self, v: VertexId) -> bool {
        !self.bits.put(v)
    }

    pub fn remove(&mut self, v: VertexId) {
        self.bits.set(v, false);
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    /// Ascending vertex ids.
    pub fn iter(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.bits.ones()
    }

    pub fn to_vec(&self) -> Vec<VertexId> {
        self.iter().collect()
    }

    pub fn first(&self) -> Option<VertexId> {
        self.bits.minimum()
    }

    pub fn union_with(&mut self, other: &VertexSet) {
        self.bits.union_with(&other.bits);
    }

    pub fn difference_with(&mut self, other: &VertexSet) {
        self.bits.difference_with(&other.bits);
    }

    pub fn intersect_with(&mut self, other: &VertexSet) {
        self.bits.intersect_with(&other.bits);
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        let mut out = self.clone();
        out.union_with(other);
        out
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        let mut out = self.clone();
        out.difference_with(other);
        out
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        let mut out = self.clone();
        out.intersect_with(other);
        out
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.bits.is_disjoint(&other.bits)
    }

    pub fn complement(&self) -> VertexSet {
        let mut bits = self.bits.clone();
        bits.toggle_range(..);
        VertexSet { bits }
    }
}

impl std::fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Undirected simple graph on dense vertex ids `0..n`.
#[derive(Clone, Debug)]
pub struct Graph {
    adjacency: Vec<Vec<VertexId>>,
    boundary: VertexSet,
    degree_bound: usize,
    labels: Vec<String>,
}

impl Graph {
    /// Builds a graph from an edge list. Self-loops and repeated edges are
    /// dropped; neighbor lists are sorted.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (VertexId, VertexId)>,
    {
        let mut adjacency = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n {
                return Err(Error::UnknownVertex(u));
            }
            if v >= n {
                return Err(Error::UnknownVertex(v));
            }
            if u == v {
                continue;
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        let degree_bound = adjacency.iter().map(Vec::len).max().unwrap_or(0);
        Ok(Self {
            adjacency,
            boundary: VertexSet::empty(n),
            degree_bound,
            labels: (0..n).map(|v| v.to_string()).collect(),
        })
    }

    /// Path `v0 - v1 - ... - v(n-1)` with both ends on the boundary.
    pub fn path(n: usize) -> Self {
        let mut g = Self::from_edges(n, (1..n).map(|v| (v - 1, v))).expect("valid path");
        if n > 0 {
            g.boundary = VertexSet::from_ids(n, [0, n - 1]);
        }
        g
    }

    /// Cycle on `n` vertices, no boundary.
    pub fn cycle(n: usize) -> Self {
        Self::from_edges(n, (0..n).map(|v| (v, (v + 1) % n))).expect("valid cycle")
    }

    pub fn with_boundary(mut self, boundary: VertexSet) -> Self {
        assert_eq!(boundary.universe(), self.len(), "boundary from another graph");
        self.boundary = boundary;
        self
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.len());
        self.labels = labels;
        self
    }

    /// Declares a degree bound larger than the realized maximum degree, e.g.
    /// the generator count of a Cayley graph.
    pub fn with_degree_bound(mut self, bound: usize) -> Self {
        assert!(bound >= self.max_degree(), "declared degree bound too small");
        self.degree_bound = bound;
        self
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adjacency[v]
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn boundary(&self) -> &VertexSet {
        &self.boundary
    }

    pub fn label(&self, v: VertexId) -> &str {
        &self.labels[v]
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn empty_set(&self) -> VertexSet {
        VertexSet::empty(self.len())
    }

    pub fn all_vertices(&self) -> VertexSet {
        VertexSet::full(self.len())
    }

    pub fn set_of<I: IntoIterator<Item = VertexId>>(&self, ids: I) -> VertexSet {
        VertexSet::from_ids(self.len(), ids)
    }

    /// BFS distances from a source set; `None` for unreachable vertices.
    pub fn distances_from(&self, sources: &VertexSet) -> Vec<Option<u32>> {
        self.distances_avoiding(sources, None, u32::MAX)
    }

    /// BFS distances from `sources`, never entering `blocked`, up to
    /// `max_depth`.
    pub(crate) fn distances_avoiding(
        &self,
        sources: &VertexSet,
        blocked: Option<&VertexSet>,
        max_depth: u32,
    ) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.len()];
        let mut queue = VecDeque::new();
        for s in sources.iter() {
            dist[s] = Some(0);
            queue.push_back(s);
        }
        while let Some(u) = queue.pop_front() {
            let du = dist[u].expect("queued vertices have a distance");
            if du >= max_depth {
                continue;
            }
            for &w in &self.adjacency[u] {
                if dist[w].is_some() || blocked.is_some_and(|b| b.contains(w)) {
                    continue;
                }
                dist[w] = Some(du + 1);
                queue.push_back(w);
            }
        }
        dist
    }

    /// Vertices at distance at most `radius` from `center`.
    pub fn ball(&self, center: &VertexSet, radius: usize) -> VertexSet {
        let mut out = center.clone();
        if radius == 0 {
            return out;
        }
        let mut frontier: Vec<VertexId> = center.to_vec();
        for _ in 0..radius {
            let mut next = Vec::new();
            for &u in &frontier {
                for &w in &self.adjacency[u] {
                    if out.insert(w) {
                        next.push(w);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        out
    }

    /// Minimum distance between two nonempty sets; `None` when no path
    /// connects them.
    pub fn set_distance(&self, x: &VertexSet, y: &VertexSet) -> Result<Option<usize>> {
        if x.is_empty() || y.is_empty() {
            return Err(Error::EmptySet);
        }
        let dist = self.distances_from(x);
        Ok(y.iter().filter_map(|v| dist[v]).min().map(|d| d as usize))
    }

    /// Largest pairwise distance within `x`.
    pub fn set_diameter(&self, x: &VertexSet) -> Result<usize> {
        if x.is_empty() {
            return Err(Error::EmptySet);
        }
        let mut diameter = 0;
        for u in x.iter() {
            let dist = self.distances_from(&self.set_of([u]));
            for v in x.iter() {
                match dist[v] {
                    Some(d) => diameter = diameter.max(d as usize),
                    None => return Err(Error::Disconnected(u, v)),
                }
            }
        }
        Ok(diameter)
    }

    /// Connected components of the subgraph induced on the complement of
    /// `removed`, ordered by smallest contained vertex.
    pub fn components_after_removal(&self, removed: &VertexSet) -> Vec<VertexSet> {
        let mut seen = removed.clone();
        let mut components = Vec::new();
        let mut stack = Vec::new();
        for start in 0..self.len() {
            if seen.contains(start) {
                continue;
            }
            let mut comp = self.empty_set();
            seen.insert(start);
            stack.push(start);
            while let Some(u) = stack.pop() {
                comp.insert(u);
                for &w in &self.adjacency[u] {
                    if seen.insert(w) {
                        stack.push(w);
                    }
                }
            }
            components.push(comp);
        }
        components
    }

    /// Components of the complement of `removed` that reach the truncation
    /// boundary. Empty when the graph has no boundary.
    pub fn deep_components(&self, removed: &VertexSet) -> Vec<VertexSet> {
        if self.boundary.is_empty() {
            return Vec::new();
        }
        self.components_after_removal(removed)
            .into_iter()
            .filter(|c| !c.is_disjoint(&self.boundary))
            .collect()
    }

    /// Parses the adjacency-list text format:
    ///
    /// ```text
    /// # comment
    /// a: b c
    /// b: a
    /// c: a
    /// boundary: b c
    /// ```
    ///
    /// Vertex tokens are opaque; dense ids follow order of first
    /// appearance.
    pub fn parse_adjacency(text: &str) -> Result<Self> {
        let mut index: HashMap<String, VertexId> = HashMap::new();
        let mut labels: Vec<String> = Vec::new();
        let mut edges = Vec::new();
        let mut boundary_tokens: Vec<String> = Vec::new();
        let mut intern = |tok: &str, labels: &mut Vec<String>| -> VertexId {
            *index.entry(tok.to_string()).or_insert_with(|| {
                labels.push(tok.to_string());
                labels.len() - 1
            })
        };
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (head, tail) = line.split_once(':').ok_or_else(|| Error::GraphParse {
                line: lineno + 1,
                msg: "expected `<id>: <neighbors>`".into(),
            })?;
            let head = head.trim();
            if head.is_empty() || head.contains(char::is_whitespace) {
                return Err(Error::GraphParse {
                    line: lineno + 1,
                    msg: format!("bad vertex id `{head}`"),
                });
            }
            if head == "boundary" {
                boundary_tokens.extend(tail.split_whitespace().map(str::to_string));
                continue;
            }
            let u = intern(head, &mut labels);
            for tok in tail.split_whitespace() {
                let v = intern(tok, &mut labels);
                edges.push((u, v));
            }
        }
        let n = labels.len();
        let mut boundary = VertexSet::empty(n);
        for tok in &boundary_tokens {
            let v = *index.get(tok).ok_or_else(|| Error::GraphParse {
                line: 0,
                msg: format!("boundary vertex `{tok}` does not appear in the graph"),
            })?;
            boundary.insert(v);
        }
        Ok(Self::from_edges(n, edges)?
            .with_labels(labels)
            .with_boundary(boundary))
    }

    /// Inverse of [`Graph::parse_adjacency`], using vertex labels.
    pub fn to_adjacency_text(&self) -> String {
        let mut out = String::new();
        for v in 0..self.len() {
            let _ = write!(out, "{}:", self.labels[v]);
            for &w in &self.adjacency[v] {
                let _ = write!(out, " {}", self.labels[w]);
            }
            out.push('\n');
        }
        if !self.boundary.is_empty() {
            out.push_str("boundary:");
            for v in self.boundary.iter() {
                let _ = write!(out, " {}", self.labels[v]);
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p5() -> Graph {
        Graph::path(5)
    }

    /// Integer interval [-k, k] as a path, vertex id = value + k.
    fn z_segment(k: usize) -> Graph {
        Graph::path(2 * k + 1)
    }

    #[test]
    fn ball_examples() {
        let g = p5();
        assert_eq!(g.ball(&g.set_of([2]), 1).to_vec(), vec![1, 2, 3]);
        assert_eq!(g.ball(&g.set_of([0, 4]), 1).to_vec(), vec![0, 1, 3, 4]);
        let c6 = Graph::cycle(6);
        assert_eq!(c6.ball(&c6.set_of([0]), 3).len(), 6);
        assert_eq!(g.ball(&g.set_of([1, 3]), 0), g.set_of([1, 3]));
        assert!(g.ball(&g.empty_set(), 4).is_empty());
    }

    #[test]
    fn set_distance_examples() {
        let g = p5();
        assert_eq!(g.set_distance(&g.set_of([0]), &g.set_of([4])), Ok(Some(4)));
        assert_eq!(g.set_distance(&g.set_of([0, 2]), &g.set_of([3])), Ok(Some(1)));
        assert_eq!(g.set_distance(&g.set_of([1]), &g.set_of([1, 4])), Ok(Some(0)));
        assert_eq!(
            g.set_distance(&g.empty_set(), &g.set_of([1])),
            Err(Error::EmptySet)
        );
        let split = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(
            split.set_distance(&split.set_of([0]), &split.set_of([3])),
            Ok(None)
        );
    }

    #[test]
    fn diameter_examples() {
        let g = p5();
        assert_eq!(g.set_diameter(&g.all_vertices()), Ok(4));
        assert_eq!(g.set_diameter(&g.set_of([3])), Ok(0));
        let c6 = Graph::cycle(6);
        assert_eq!(c6.set_diameter(&c6.all_vertices()), Ok(3));
        let split = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(
            split.set_diameter(&split.set_of([0, 2])),
            Err(Error::Disconnected(0, 2))
        );
        assert_eq!(g.set_diameter(&g.empty_set()), Err(Error::EmptySet));
    }

    #[test]
    fn components_examples() {
        let g = p5();
        let parts = g.components_after_removal(&g.set_of([2]));
        assert_eq!(parts, vec![g.set_of([0, 1]), g.set_of([3, 4])]);
        assert_eq!(
            g.components_after_removal(&g.empty_set()),
            vec![g.all_vertices()]
        );
        assert!(g.components_after_removal(&g.all_vertices()).is_empty());
    }

    #[test]
    fn deep_components_examples() {
        let z = z_segment(5);
        let zero = 5;
        assert_eq!(z.deep_components(&z.set_of([zero])).len(), 2);
        let deep = z.deep_components(&z.set_of([10]));
        assert_eq!(deep, vec![z.set_of(0..10)]);
        assert!(Graph::cycle(5).deep_components(&VertexSet::empty(5)).is_empty());
    }

    #[test]
    fn grid_cut_by_column_has_two_deep_sides() {
        // 11x11 grid truncation of Z^2; boundary is the outer square shell.
        let side = 11;
        let id = |x: usize, y: usize| y * side + x;
        let mut edges = Vec::new();
        for y in 0..side {
            for x in 0..side {
                if x + 1 < side {
                    edges.push((id(x, y), id(x + 1, y)));
                }
                if y + 1 < side {
                    edges.push((id(x, y), id(x, y + 1)));
                }
            }
        }
        let n = side * side;
        let shell = (0..n).filter(|&v| {
            let (x, y) = (v % side, v / side);
            x == 0 || y == 0 || x == side - 1 || y == side - 1
        });
        let g = Graph::from_edges(n, edges)
            .unwrap()
            .with_boundary(VertexSet::from_ids(n, shell));
        let column = g.set_of((0..side).map(|y| id(5, y)));
        let deep = g.deep_components(&column);
        assert_eq!(deep.len(), 2);
        assert_eq!(deep[0].len(), 55);
        assert_eq!(deep[1].len(), 55);
    }

    #[test]
    fn construction_normalizes_loops_and_multi_edges() {
        let g = Graph::from_edges(3, [(0, 0), (0, 1), (1, 0), (1, 2), (1, 2)]).unwrap();
        assert_eq!(g.neighbors(0), &[1]);
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert_eq!(g.degree_bound(), 2);
        assert_eq!(g.edge_count(), 2);
        assert!(Graph::from_edges(2, [(0, 5)]).is_err());
    }

    #[test]
    fn adjacency_text_parses_and_prints() {
        let text = "# a triangle with a tail\nu: v w\nv: w\nw: tail\nboundary: tail\n";
        let g = Graph::parse_adjacency(text).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g.label(3), "tail");
        assert_eq!(g.boundary().to_vec(), vec![3]);
        assert_eq!(g.neighbors(2), &[0, 1, 3]);
        let again = Graph::parse_adjacency(&g.to_adjacency_text()).unwrap();
        assert_eq!(again.to_adjacency_text(), g.to_adjacency_text());

        let err = Graph::parse_adjacency("a: b\nno colon here\n").unwrap_err();
        assert!(matches!(err, Error::GraphParse { line: 2, .. }));
        assert!(Graph::parse_adjacency("a: b\nboundary: zz\n").is_err());
    }

    fn arb_graph() -> impl Strategy<Value = Graph> {
        (2usize..40).prop_flat_map(|n| {
            proptest::collection::vec((0..n, 0..n), 0..3 * n)
                .prop_map(move |edges| Graph::from_edges(n, edges).unwrap())
        })
    }

    proptest! {
        #[test]
        fn ball_composes(g in arb_graph(), seed in 0usize..1000, a in 0usize..4, b in 0usize..4) {
            let s = g.set_of([seed % g.len()]);
            prop_assert_eq!(g.ball(&s, a + b), g.ball(&g.ball(&s, a), b));
        }

        #[test]
        fn set_distance_triangle(g in arb_graph(), x in 0usize..1000, y in 0usize..1000, z in 0usize..1000) {
            let n = g.len();
            let (xs, ys, zs) = (g.set_of([x % n, (x / 7) % n]), g.set_of([y % n]), g.set_of([z % n]));
            let xy = g.set_distance(&xs, &ys).unwrap();
            let xz = g.set_distance(&xs, &zs).unwrap();
            let zy = g.set_distance(&zs, &ys).unwrap();
            if let (Some(xz), Some(zy)) = (xz, zy) {
                prop_assert!(xy.unwrap() <= xz + zy);
            }
        }

        #[test]
        fn components_partition_complement(g in arb_graph(), mask in proptest::collection::vec(any::<bool>(), 40)) {
            let removed = g.set_of((0..g.len()).filter(|&v| mask[v]));
            let parts = g.components_after_removal(&removed);
            let mut union = g.empty_set();
            for p in &parts {
                prop_assert!(p.is_disjoint(&union));
                union.union_with(p);
            }
            prop_assert_eq!(union, removed.complement());
            let firsts: Vec<_> = parts.iter().map(|p| p.first().unwrap()).collect();
            prop_assert!(firsts.windows(2).all(|w| w[0] < w[1]));

            let bounded = g.clone().with_boundary(g.set_of([0, g.len() - 1]));
            for deep in bounded.deep_components(&removed) {
                prop_assert!(parts.contains(&deep));
            }
        }
    }
}
