//! Activation logs, per-item cascades and exposure sets.

use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, NodeId};

/// Dense item index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ItemId(pub u32);

impl ItemId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for ItemId {
    fn from(i: usize) -> Self {
        ItemId(u32::try_from(i).expect("item index fits in u32"))
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Node `node` adopted `item` at round `t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Activation {
    pub t: u32,
    pub item: ItemId,
    pub node: NodeId,
}

/// All activations, sorted by `(item, t)`; ties keep insertion order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ActivationLog {
    entries: Vec<Activation>,
    // offsets[i]..offsets[i + 1] is item i's slice
    offsets: Vec<usize>,
}

impl ActivationLog {
    /// Sorts and indexes `entries`. `n_items` must cover every referenced item.
    ///
    /// Rejects duplicate `(item, node)` pairs.
    pub fn new(mut entries: Vec<Activation>, n_items: usize) -> Result<Self> {
        if let Some(a) = entries.iter().find(|a| a.item.index() >= n_items) {
            return Err(Error::Validation(format!(
                "activation references item {} but only {n_items} items exist",
                a.item
            )));
        }
        entries.sort_by_key(|a| (a.item, a.t));
        let mut offsets = vec![0usize; n_items + 1];
        for a in &entries {
            offsets[a.item.index() + 1] += 1;
        }
        for i in 0..n_items {
            offsets[i + 1] += offsets[i];
        }
        let log = ActivationLog { entries, offsets };
        for item in 0..n_items {
            let mut nodes: Vec<NodeId> = log.cascade(ItemId::from(item)).iter().map(|a| a.node).collect();
            nodes.sort_unstable();
            if let Some(w) = nodes.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::Validation(format!(
                    "duplicate activation of node {} on item {item}",
                    w[0]
                )));
            }
        }
        Ok(log)
    }

    pub fn n_items(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Activation] {
        &self.entries
    }

    /// Activations of one item in activation order. Empty for unknown items.
    pub fn cascade(&self, item: ItemId) -> &[Activation] {
        let i = item.index();
        if i + 1 >= self.offsets.len() {
            return &[];
        }
        &self.entries[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn max_node(&self) -> Option<NodeId> {
        self.entries.iter().map(|a| a.node).max()
    }
}

/// Exposure structure of one cascade.
///
/// For every node `u` with at least one active predecessor, `F(u)` lists the
/// in-neighbours that activated strictly before `u` (all active in-neighbours
/// when `u` never activated), ordered by activation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CascadeExposures {
    pub item: ItemId,
    /// Active nodes with non-empty exposure sets.
    pub active: Vec<(NodeId, Vec<NodeId>)>,
    /// Inactive nodes with non-empty exposure sets.
    pub inactive: Vec<(NodeId, Vec<NodeId>)>,
}

impl CascadeExposures {
    /// Builds exposure sets of `cascade` (activations of a single item, in
    /// activation order) over `graph`.
    pub fn build(graph: &DirectedGraph, item: ItemId, cascade: &[Activation]) -> Result<Self> {
        let n = graph.node_count();
        // activation rank + time per node, u32::MAX = inactive
        let mut rank = vec![u32::MAX; n];
        let mut time = vec![u32::MAX; n];
        for (r, a) in cascade.iter().enumerate() {
            let u = a.node.index();
            if u >= n {
                return Err(Error::Index { index: u, len: n });
            }
            rank[u] = r as u32;
            time[u] = a.t;
        }
        let mut out = CascadeExposures {
            item,
            ..Default::default()
        };
        for u in 0..n {
            let uid = NodeId::from(u);
            let mut f: Vec<NodeId> = graph
                .predecessors(uid)
                .iter()
                .copied()
                .filter(|v| time[v.index()] != u32::MAX && time[v.index()] < time[u])
                .collect();
            if f.is_empty() {
                continue;
            }
            f.sort_by_key(|v| rank[v.index()]);
            if time[u] == u32::MAX {
                out.inactive.push((uid, f));
            } else {
                out.active.push((uid, f));
            }
        }
        Ok(out)
    }
}
