use thiserror::Error;

use crate::node::{HeapId, NodeId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HeapError {
    #[error("heap is empty")]
    Empty,
    #[error("heap {0:?} is retired (melded away)")]
    Retired(HeapId),
    #[error("unknown heap {0:?}")]
    UnknownHeap(HeapId),
    #[error("cannot meld heap {0:?} with itself")]
    SelfMeld(HeapId),
    #[error("meld unsupported in variant")]
    MeldUnsupported,
    #[error("node {0:?} is not live")]
    StaleHandle(NodeId),
    #[error("new key is greater than the current key of node {0:?}")]
    KeyIncrease(NodeId),
}
