//! Node arena types.

use std::fmt;

/// Stable handle of a node inside a [`HeapPool`](crate::HeapPool) arena.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub(crate) u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Debug for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// Handle of a heap record inside a pool.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HeapId(pub(crate) u32);

impl HeapId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Debug for HeapId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "h{}", self.0)
    }
}

/// Violation tag carried by every node.
///
/// `L` stands for the loss type; whether a loss node is of the single-loss
/// subtype or the multi-loss subtype is derived from its `loss` field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Tag {
    N,
    A,
    G,
    L,
}

impl Tag {
    pub(crate) fn slot(self) -> usize {
        match self {
            Tag::G => 0,
            Tag::A => 1,
            Tag::L => 2,
            Tag::N => unreachable!("tag N has no registry or cache"),
        }
    }
}

/// Structural role recorded in the node. Root status and implicit deferral
/// (owner heap retired) take precedence over this field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    RankChild,
    NonrankChild,
    Deferred,
}

#[derive(Clone, Debug)]
pub(crate) struct Node<K> {
    pub key: K,
    pub uid: u64,
    pub rank: u32,
    pub loss: u32,
    pub tag: Tag,
    pub kind: Kind,
    pub parent: Option<NodeId>,
    pub child: Option<NodeId>,
    /// Cyclic: the left sibling of the leftmost node is the rightmost one.
    pub left: NodeId,
    pub right: Option<NodeId>,
    pub owner: HeapId,
    /// Global node list links (meld variant); `prev` is cyclic like `left`.
    pub prev: NodeId,
    pub next: Option<NodeId>,
    /// Number of entries referencing this node in its owner's loss cache.
    /// Only used for potential accounting.
    pub lc_entries: u32,
    pub live: bool,
}

impl<K> Node<K> {
    pub fn new(id: NodeId, key: K, uid: u64, owner: HeapId) -> Self {
        Node {
            key,
            uid,
            rank: 0,
            loss: 0,
            tag: Tag::N,
            kind: Kind::NonrankChild,
            parent: None,
            child: None,
            left: id,
            right: None,
            owner,
            prev: id,
            next: None,
            lc_entries: 0,
            live: true,
        }
    }
}
