//! Finite reflexive symmetric graphs, paths with an order witness, subpaths,
//! clique paths, partitions and quotients, and product edge relations.

use std::collections::VecDeque;
use std::sync::Arc;

use fixedbitset::FixedBitSet;

use crate::error::{domain, Result};
use crate::rel::Rel;

/// A finite graph on vertices `0..n` with a reflexive symmetric adjacency relation.
#[derive(Clone, Debug)]
pub struct Graph {
    adj: Vec<FixedBitSet>,
    order: Option<Vec<usize>>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.adj == other.adj
    }
}

impl Eq for Graph {}

impl Graph {
    /// Builds a graph from an edge list. Loops are implicit; `n` must be positive.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        if n == 0 {
            return domain("graph must have at least one vertex");
        }
        let mut adj = vec![FixedBitSet::with_capacity(n); n];
        for (i, row) in adj.iter_mut().enumerate() {
            row.insert(i);
        }
        for &(i, j) in edges {
            if i >= n || j >= n {
                return domain(format!("edge ({i},{j}) out of range for {n} vertices"));
            }
            adj[i].insert(j);
            adj[j].insert(i);
        }
        Ok(Graph::from_rows(adj))
    }

    /// Builds a graph from adjacency rows, checking reflexivity and symmetry.
    pub fn from_adjacency(adj: Vec<FixedBitSet>) -> Result<Graph> {
        let n = adj.len();
        if n == 0 {
            return domain("graph must have at least one vertex");
        }
        for (i, row) in adj.iter().enumerate() {
            if row.len() != n {
                return domain(format!("adjacency row {i} has wrong width"));
            }
            if !row.contains(i) {
                return domain(format!("vertex {i} is not adjacent to itself"));
            }
            for j in row.ones() {
                if !adj[j].contains(i) {
                    return domain(format!("adjacency not symmetric at ({i},{j})"));
                }
            }
        }
        Ok(Graph::from_rows(adj))
    }

    fn from_rows(adj: Vec<FixedBitSet>) -> Graph {
        let mut g = Graph { adj, order: None };
        g.order = g.compute_path_order();
        g
    }

    /// The canonical path P_n on vertices `0..=n`.
    pub fn path(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).map(|i| (i, i + 1)).collect();
        Graph::new(n + 1, &edges).expect("canonical path is valid")
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.adj[i].contains(j)
    }

    /// Closed neighbourhood of `v` (includes `v`).
    pub fn neighbours(&self, v: usize) -> &FixedBitSet {
        &self.adj[v]
    }

    /// Number of non-loop edges containing `v`.
    pub fn order_of(&self, v: usize) -> usize {
        self.adj[v].count_ones(..) - 1
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|r| r.count_ones(..) - 1).sum::<usize>() / 2
    }

    /// Non-loop edges as pairs `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.len() {
            for j in self.adj[i].ones().filter(|&j| j > i) {
                out.push((i, j));
            }
        }
        out
    }

    /// Vertices of order at most one.
    pub fn ends(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.order_of(v) <= 1).collect()
    }

    /// The linear arrangement of a path, starting from its smallest end.
    pub fn path_order(&self) -> Option<&[usize]> {
        self.order.as_deref()
    }

    pub fn is_path(&self) -> bool {
        self.order.is_some()
    }

    /// True when the graph is a path whose order witness is `0, 1, ..., n`.
    pub fn is_canonical_path(&self) -> bool {
        self.order
            .as_ref()
            .is_some_and(|o| o.iter().enumerate().all(|(i, &v)| i == v))
    }

    pub fn is_connected(&self) -> bool {
        self.component_of(0).count_ones(..) == self.len()
    }

    /// Connected component containing `v`.
    pub fn component_of(&self, v: usize) -> FixedBitSet {
        let mut seen = FixedBitSet::with_capacity(self.len());
        let mut queue = VecDeque::from([v]);
        seen.insert(v);
        while let Some(u) = queue.pop_front() {
            for w in self.adj[u].ones() {
                if !seen.put(w) {
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    pub fn is_clique(&self, set: &FixedBitSet) -> bool {
        set.ones().all(|v| set.is_subset(&self.adj[v]))
    }

    /// The induced subgraph on `verts`, relabelled `0..verts.len()` in the given order.
    pub fn induced(&self, verts: &[usize]) -> Result<Graph> {
        if verts.is_empty() {
            return domain("induced subgraph on no vertices");
        }
        let mut edges = Vec::new();
        for (a, &u) in verts.iter().enumerate() {
            if u >= self.len() {
                return domain(format!("vertex {u} out of range"));
            }
            for (b, &v) in verts.iter().enumerate().skip(a + 1) {
                if self.adjacent(u, v) {
                    edges.push((a, b));
                }
            }
        }
        Graph::new(verts.len(), &edges)
    }

    fn compute_path_order(&self) -> Option<Vec<usize>> {
        let n = self.len();
        if (0..n).any(|v| self.order_of(v) > 2) {
            return None;
        }
        let start = (0..n).find(|&v| self.order_of(v) <= 1)?;
        let mut order = Vec::with_capacity(n);
        let mut prev = usize::MAX;
        let mut cur = start;
        loop {
            order.push(cur);
            let next = self.adj[cur].ones().find(|&w| w != cur && w != prev);
            match next {
                Some(w) => {
                    prev = cur;
                    cur = w;
                }
                None => break,
            }
            if order.len() > n {
                return None;
            }
        }
        (order.len() == n).then_some(order)
    }
}

/// A validated path: a connected graph with an end in which every vertex has order at most two.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    graph: Arc<Graph>,
}

impl Path {
    pub fn new(graph: impl Into<Arc<Graph>>) -> Result<Path> {
        let graph = graph.into();
        if !graph.is_path() {
            return domain("graph is not a path");
        }
        Ok(Path { graph })
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    /// Number of edges, written e(P) elsewhere.
    pub fn length(&self) -> usize {
        self.graph.len() - 1
    }

    pub fn order_witness(&self) -> &[usize] {
        self.graph.path_order().expect("validated path")
    }

    /// Position of each vertex along the order witness.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.graph.len()];
        for (i, &v) in self.order_witness().iter().enumerate() {
            pos[v] = i;
        }
        pos
    }
}

/// The canonical path P_n.
pub fn canonical_path(n: usize) -> Path {
    Path {
        graph: Arc::new(Graph::path(n)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathStats {
    pub is_path: bool,
    pub ends: Vec<usize>,
    pub edge_count: usize,
    pub orders: Vec<usize>,
}

pub fn path_stats(g: &Graph) -> PathStats {
    PathStats {
        is_path: g.is_path(),
        ends: g.ends(),
        edge_count: g.edge_count(),
        orders: (0..g.len()).map(|v| g.order_of(v)).collect(),
    }
}

/// A subpath together with the original vertex behind each of its vertices.
#[derive(Clone, Debug)]
pub struct Subpath {
    pub path: Path,
    pub vertices: Vec<usize>,
}

/// The minimal subpath `[a, b]` containing `a` and `b`.
pub fn subpath(p: &Path, a: usize, b: usize) -> Result<Subpath> {
    let n = p.graph.len();
    if a >= n || b >= n {
        return domain(format!("subpath endpoint out of range for {n} vertices"));
    }
    let pos = p.positions();
    let (lo, hi) = (pos[a].min(pos[b]), pos[a].max(pos[b]));
    let vertices = p.order_witness()[lo..=hi].to_vec();
    let path = Path::new(p.graph.induced(&vertices)?)?;
    Ok(Subpath { path, vertices })
}

/// The path of cliques of a path, ordered by the comparability relation.
#[derive(Clone, Debug)]
pub struct CliquePath {
    pub path: Path,
    pub cliques: Vec<Vec<usize>>,
}

/// Singletons and edges of `p`, alternating along the order witness.
pub fn clique_path(p: &Path) -> CliquePath {
    let order = p.order_witness();
    let mut cliques = Vec::with_capacity(2 * order.len() - 1);
    for (i, &v) in order.iter().enumerate() {
        if i > 0 {
            let u = order[i - 1];
            cliques.push(vec![u.min(v), u.max(v)]);
        }
        cliques.push(vec![v]);
    }
    CliquePath {
        path: canonical_path(cliques.len() - 1),
        cliques,
    }
}

/// A partition of a graph's vertices into non-empty blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    base: Arc<Graph>,
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl Partition {
    pub fn new(base: Arc<Graph>, blocks: Vec<Vec<usize>>) -> Result<Partition> {
        let n = base.len();
        let mut block_of = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return domain("partition has an empty block");
            }
            for &v in block {
                if v >= n {
                    return domain(format!("partition vertex {v} out of range"));
                }
                if block_of[v] != usize::MAX {
                    return domain(format!("vertex {v} lies in two blocks"));
                }
                block_of[v] = b;
            }
        }
        if let Some(v) = block_of.iter().position(|&b| b == usize::MAX) {
            return domain(format!("vertex {v} is in no block"));
        }
        let blocks = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        Ok(Partition {
            base,
            blocks,
            block_of,
        })
    }

    pub fn base(&self) -> &Arc<Graph> {
        &self.base
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_of(&self, v: usize) -> usize {
        self.block_of[v]
    }
}

/// Quotient graph on the blocks, with the quotient map as a relation from `g` onto it.
pub fn quotient(g: &Arc<Graph>, part: &Partition) -> Result<(Arc<Graph>, Rel)> {
    if **g != *part.base {
        return domain("partition is over a different graph");
    }
    let k = part.blocks.len();
    let mut edges = Vec::new();
    for (u, v) in g.edges() {
        let (a, b) = (part.block_of[u], part.block_of[v]);
        if a != b {
            edges.push((a, b));
        }
    }
    let q = Arc::new(Graph::new(k, &edges)?);
    let map = Rel::from_function(g.clone(), q.clone(), &part.block_of)?;
    Ok((q, map))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProductMode {
    /// Adjacent in both coordinates.
    Canonical,
    /// Equal in one coordinate and adjacent in the other.
    Strict,
}

/// Product graph on `g × h`; vertex `(a, b)` is numbered `a * |h| + b`.
pub fn product_edges(g: &Graph, h: &Graph, mode: ProductMode) -> Graph {
    let (n, m) = (g.len(), h.len());
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..m {
            for a2 in g.neighbours(a).ones() {
                for b2 in h.neighbours(b).ones() {
                    let ok = match mode {
                        ProductMode::Canonical => true,
                        ProductMode::Strict => a == a2 || b == b2,
                    };
                    if ok {
                        edges.push((a * m + b, a2 * m + b2));
                    }
                }
            }
        }
    }
    Graph::new(n * m, &edges).expect("product of valid graphs")
}

/// Builds a bitset of the given width from a list of members.
pub fn vset(width: usize, members: impl IntoIterator<Item = usize>) -> FixedBitSet {
    let mut s = FixedBitSet::with_capacity(width);
    for v in members {
        s.insert(v);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_path_shapes() {
        let p0 = canonical_path(0);
        assert_eq!(p0.graph().len(), 1);
        assert_eq!(p0.graph().edge_count(), 0);
        let p3 = canonical_path(3);
        assert_eq!(p3.graph().edges(), vec![(0, 1), (1, 2), (2, 3)]);
        assert!(p3.graph().is_canonical_path());
    }

    #[test]
    fn stats_examples() {
        let s = path_stats(&Graph::path(2));
        assert_eq!(
            s,
            PathStats {
                is_path: true,
                ends: vec![0, 2],
                edge_count: 2,
                orders: vec![1, 2, 1]
            }
        );
        let tri = Graph::new(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let s = path_stats(&tri);
        assert!(!s.is_path);
        assert!(s.ends.is_empty());
        assert_eq!(s.edge_count, 3);
        let s = path_stats(&Graph::path(0));
        assert!(s.is_path);
        assert_eq!(s.ends, vec![0]);
    }

    #[test]
    fn non_canonical_path_order() {
        let g = Graph::new(4, &[(2, 0), (0, 3), (3, 1)]).unwrap();
        assert_eq!(g.path_order(), Some(&[1, 3, 0, 2][..]));
        assert!(!g.is_canonical_path());
        let cycle = Graph::new(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert!(!cycle.is_path());
        let split = Graph::new(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(!split.is_path());
    }

    #[test]
    fn subpath_examples() {
        let p = canonical_path(4);
        assert_eq!(subpath(&p, 1, 3).unwrap().vertices, vec![1, 2, 3]);
        assert_eq!(subpath(&p, 2, 2).unwrap().vertices, vec![2]);
        assert_eq!(subpath(&p, 3, 1).unwrap().vertices, vec![1, 2, 3]);
        assert!(subpath(&p, 0, 9).is_err());
    }

    #[test]
    fn clique_path_examples() {
        let c = clique_path(&canonical_path(1));
        assert_eq!(c.cliques, vec![vec![0], vec![0, 1], vec![1]]);
        assert_eq!(clique_path(&canonical_path(0)).cliques, vec![vec![0]]);
        let c3 = clique_path(&canonical_path(3));
        assert_eq!(c3.path.length(), 6);
        assert!(path_stats(c3.path.graph()).is_path);
    }

    #[test]
    fn quotient_examples() {
        let g = Arc::new(Graph::path(2));
        let part = Partition::new(g.clone(), vec![vec![0, 1], vec![2]]).unwrap();
        let (q, map) = quotient(&g, &part).unwrap();
        assert_eq!(*q, Graph::path(1));
        assert_eq!(map.as_function(), Some(vec![0, 0, 1]));
        let whole = Partition::new(g.clone(), vec![vec![0, 1, 2]]).unwrap();
        assert_eq!(quotient(&g, &whole).unwrap().0.len(), 1);
        assert!(Partition::new(g.clone(), vec![vec![0, 1]]).is_err());
        assert!(Partition::new(g, vec![vec![0, 1], vec![1, 2]]).is_err());
    }

    #[test]
    fn product_examples() {
        let p1 = Graph::path(1);
        let c = product_edges(&p1, &p1, ProductMode::Canonical);
        assert_eq!(c.edge_count(), 6);
        let s = product_edges(&p1, &p1, ProductMode::Strict);
        // (0,0)=0 (0,1)=1 (1,0)=2 (1,1)=3
        assert_eq!(s.edges(), vec![(0, 1), (0, 2), (1, 3), (2, 3)]);
        let strip = product_edges(&Graph::path(0), &Graph::path(3), ProductMode::Strict);
        assert_eq!(strip, Graph::path(3));
    }
}
