//! Priority queues with constant-time decrease-key that reduce structural
//! violations through per-rank registries and LIFO violation caches.
//!
//! Two variants share one engine: [`Variant::NoMeld`] keeps a single
//! rank-root violation type, [`Variant::Meld`] adds deferred nodes, degree
//! reduction and constant-time [`HeapPool::meld`]. Every public method is
//! available in an amortized flavour (caches drained at method exit) and in
//! worst-case flavours driven by potential ledgers.
//!
//! ```
//! use vrheap::{HeapPool, Policy, Variant};
//!
//! let mut pool = HeapPool::new(Variant::NoMeld);
//! let h = pool.make_heap(Policy::Amortized);
//! let x = pool.insert(h, 7).unwrap();
//! pool.insert(h, 3).unwrap();
//! pool.decrease_key(h, x, 1).unwrap();
//! assert_eq!(pool.delete_min(h).unwrap().0, 1);
//! ```

pub mod accounting;
mod error;
mod heap;
mod node;
mod registry;
pub mod trace;
pub mod verify;
pub mod workload;

pub use accounting::{
    Instrumentation, Method, OpCounters, OpReport, PhiSnapshot, PotentialLedger, ReductionCase,
};
pub use error::HeapError;
pub use heap::{Heap, HeapPool, Policy, ReduceMode, ReductionOutcome, Variant};
pub use node::{HeapId, Kind, NodeId, Tag};
pub use registry::{RankRegistry, ViolationCache};
