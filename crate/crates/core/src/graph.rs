//! Directed follower graph.
//!
//! An edge `(u, v)` means `v` follows `u`: content published or reshared by
//! `u` is visible to `v`, so information flows along the edge direction.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Dense node index in `0..node_count`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(u32::try_from(i).expect("node index fits in u32"))
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedGraph {
    out_adj: Vec<Vec<NodeId>>,
    in_adj: Vec<Vec<NodeId>>,
    edge_count: usize,
}

impl DirectedGraph {
    /// Builds a graph from an edge list, dropping duplicate edges.
    ///
    /// The node count is one past the largest id mentioned, or zero for an
    /// empty edge list. Self-loops are rejected.
    pub fn from_edges<I>(edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::with_node_count(0, edges)
    }

    /// Like [`from_edges`](Self::from_edges) but guarantees at least
    /// `node_count` nodes, so trailing isolated nodes are representable.
    pub fn with_node_count<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut set = BTreeSet::new();
        let mut n = node_count;
        for (u, v) in edges {
            if u == v {
                return Err(Error::Validation(format!("self-loop on node {u}")));
            }
            n = n.max(u + 1).max(v + 1);
            set.insert((u, v));
        }
        if n > u32::MAX as usize {
            return Err(Error::Validation(format!("{n} nodes exceed the u32 id space")));
        }
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        // BTreeSet iteration is sorted by (src, dst), so both lists come out sorted.
        for &(u, v) in &set {
            out_adj[u].push(NodeId::from(v));
            in_adj[v].push(NodeId::from(u));
        }
        Ok(DirectedGraph {
            out_adj,
            in_adj,
            edge_count: set.len(),
        })
    }

    /// Every ordered pair of distinct nodes is an edge.
    pub fn complete(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Validation("complete graph needs at least one node".into()));
        }
        let edges = (0..n).flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)));
        Self::with_node_count(n, edges)
    }

    /// Preferential-attachment graph with every undirected edge stored in
    /// both directions.
    ///
    /// Starts from a clique on `m` nodes; each later node attaches to `m`
    /// distinct existing nodes picked with probability proportional to degree.
    pub fn barabasi_albert(n: usize, m: usize, seed: u64) -> Result<Self> {
        if m == 0 || m >= n {
            return Err(Error::Validation(format!(
                "barabasi-albert needs 1 <= m < n, got n={n}, m={m}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut undirected: Vec<(usize, usize)> = Vec::new();
        // each endpoint appears once per incident edge
        let mut endpoints: Vec<usize> = Vec::new();
        for u in 0..m {
            for v in (u + 1)..m {
                undirected.push((u, v));
                endpoints.push(u);
                endpoints.push(v);
            }
        }
        let mut targets = BTreeSet::new();
        for new in m..n {
            targets.clear();
            while targets.len() < m {
                let t = if endpoints.is_empty() {
                    rng.random_range(0..new)
                } else {
                    endpoints[rng.random_range(0..endpoints.len())]
                };
                targets.insert(t);
            }
            for &t in &targets {
                undirected.push((t, new));
                endpoints.push(t);
                endpoints.push(new);
            }
        }
        let edges = undirected.into_iter().flat_map(|(a, b)| [(a, b), (b, a)]);
        Self::with_node_count(n, edges)
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.out_adj.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Edge density `|E| / (n (n - 1))`.
    pub fn density(&self) -> f64 {
        let n = self.node_count() as f64;
        if n < 2.0 {
            0.0
        } else {
            self.edge_count as f64 / (n * (n - 1.0))
        }
    }

    fn check(&self, u: NodeId) -> Result<()> {
        if u.index() < self.node_count() {
            Ok(())
        } else {
            Err(Error::Index {
                index: u.index(),
                len: self.node_count(),
            })
        }
    }

    /// Nodes that `u` follows, in ascending id order.
    pub fn in_neighbors(&self, u: NodeId) -> Result<&[NodeId]> {
        self.check(u)?;
        Ok(&self.in_adj[u.index()])
    }

    /// Followers of `u`, in ascending id order.
    pub fn out_neighbors(&self, u: NodeId) -> Result<&[NodeId]> {
        self.check(u)?;
        Ok(&self.out_adj[u.index()])
    }

    /// Unchecked variant for hot loops; panics on out-of-range ids.
    #[inline]
    pub(crate) fn followers(&self, u: NodeId) -> &[NodeId] {
        &self.out_adj[u.index()]
    }

    #[inline]
    pub(crate) fn predecessors(&self, u: NodeId) -> &[NodeId] {
        &self.in_adj[u.index()]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        u.index() < self.node_count() && self.out_adj[u.index()].binary_search(&v).is_ok()
    }

    /// All edges in `(src, dst)` lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.out_adj
            .iter()
            .enumerate()
            .flat_map(|(u, vs)| vs.iter().map(move |&v| (NodeId::from(u), v)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ids(xs: &[NodeId]) -> Vec<u32> {
        xs.iter().map(|n| n.0).collect()
    }

    #[test]
    fn empty_edge_list() {
        let g = DirectedGraph::from_edges([]).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.node_count(), 0);
    }

    #[test]
    fn duplicates_collapse() {
        let g = DirectedGraph::from_edges([(0, 1), (0, 1)]).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn self_loop_names_node() {
        let err = DirectedGraph::from_edges([(0, 0)]).unwrap_err();
        assert!(matches!(err, Error::Validation(ref m) if m.contains("node 0")), "{err}");
    }

    #[test]
    fn complete_counts() {
        assert_eq!(DirectedGraph::complete(2).unwrap().edge_count(), 2);
        assert_eq!(DirectedGraph::complete(100).unwrap().edge_count(), 9900);
        assert_eq!(DirectedGraph::complete(1).unwrap().edge_count(), 0);
        assert!(DirectedGraph::complete(0).is_err());
        let g = DirectedGraph::complete(7).unwrap();
        for u in 0..7 {
            assert_eq!(g.in_neighbors(NodeId(u)).unwrap().len(), 6);
            assert_eq!(g.out_neighbors(NodeId(u)).unwrap().len(), 6);
        }
    }

    #[test]
    fn in_neighbor_queries() {
        let g = DirectedGraph::complete(3).unwrap();
        assert_eq!(ids(g.in_neighbors(NodeId(0)).unwrap()), vec![1, 2]);
        let g = DirectedGraph::from_edges([(1, 0)]).unwrap();
        assert_eq!(ids(g.in_neighbors(NodeId(0)).unwrap()), vec![1]);
        assert!(g.in_neighbors(NodeId(1)).unwrap().is_empty());
        assert!(matches!(
            g.in_neighbors(NodeId(2)),
            Err(Error::Index { index: 2, len: 2 })
        ));
    }

    #[test]
    fn ba_density_and_symmetry() {
        let g = DirectedGraph::barabasi_albert(100, 10, 1).unwrap();
        assert!((g.density() - 0.18).abs() <= 0.02, "density {}", g.density());
        for (u, v) in g.edges() {
            assert!(g.has_edge(v, u));
        }
    }

    #[test]
    fn ba_small_cases() {
        let g = DirectedGraph::barabasi_albert(11, 10, 3).unwrap();
        assert_eq!(g, DirectedGraph::complete(11).unwrap());
        assert!(DirectedGraph::barabasi_albert(10, 10, 0).is_err());
        assert!(DirectedGraph::barabasi_albert(10, 0, 0).is_err());
        let star = DirectedGraph::barabasi_albert(5, 1, 0).unwrap();
        assert_eq!(star.edge_count(), 8);
    }

    #[test]
    fn ba_deterministic() {
        let a = DirectedGraph::barabasi_albert(60, 4, 99).unwrap();
        let b = DirectedGraph::barabasi_albert(60, 4, 99).unwrap();
        assert_eq!(a, b);
        let c = DirectedGraph::barabasi_albert(60, 4, 100).unwrap();
        assert_ne!(a, c);
    }

    proptest! {
        #[test]
        fn adjacency_duality(edges in prop::collection::vec((0usize..12, 0usize..12), 0..60)) {
            let edges: Vec<_> = edges.into_iter().filter(|(a, b)| a != b).collect();
            let g = DirectedGraph::from_edges(edges.clone()).unwrap();
            let mut inverted = vec![Vec::new(); g.node_count()];
            for (u, v) in g.edges() {
                inverted[v.index()].push(u);
            }
            for (v, preds) in inverted.iter().enumerate() {
                prop_assert_eq!(preds.as_slice(), g.in_neighbors(NodeId::from(v)).unwrap());
            }
            let distinct: BTreeSet<_> = edges.into_iter().collect();
            prop_assert_eq!(distinct.len(), g.edge_count());
        }
    }
}
