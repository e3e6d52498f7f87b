//! Size-dependent bound functions.

use crate::heap::Variant;

/// Maximal admissible rank `R(n) = floor(6 + 1.2·log2 max(n, 2))`.
pub fn rank_bound(n: u64) -> u32 {
    (6.0 + 1.2 * (n.max(2) as f64).log2()).floor() as u32
}

/// Degree ceiling without meld: `2R(n) + 1`.
pub fn nomeld_degree_bound(n: u64) -> u64 {
    2 * rank_bound(n) as u64 + 1
}

/// Degree ceiling for the node at 1-based position `p` of the node list of
/// an `n`-node heap (meld variant). Solid loss-free nodes get one more.
pub fn positional_degree_bound(n: u64, p: u64, solid_loss_free: bool) -> f64 {
    let base = if solid_loss_free { 23.0 } else { 22.0 };
    base + 4.0 * ((2 * n).saturating_sub(p).max(1) as f64).log2()
}

/// Per-operation reduction-step ceilings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundFns {
    pub variant: Variant,
}

impl BoundFns {
    pub fn new(variant: Variant) -> Self {
        BoundFns { variant }
    }

    pub fn r(&self, n: u64) -> u64 {
        rank_bound(n) as u64
    }

    /// Steps allowed in one non-delete method under the ledger policy.
    pub fn method_steps(&self) -> u64 {
        match self.variant {
            Variant::NoMeld => 12,
            Variant::Meld => 48,
        }
    }

    /// Steps allowed in one delete-min on an `n`-node heap.
    pub fn delete_min_steps(&self, n: u64) -> u64 {
        match self.variant {
            Variant::NoMeld => 6 * self.r(n) + 4,
            Variant::Meld => 12 * self.r(2 * n) + 30 * self.r(n) + 62,
        }
    }

    /// Amortized potential allowance of one method (no-meld variant).
    pub fn amortized_allowance(&self, method: crate::accounting::Method, n: u64) -> u64 {
        use crate::accounting::Method::*;
        match method {
            Insert => 3,
            DecreaseKey => 8,
            DeleteMin => 2 * self.r(n),
            FindMin | Meld => 0,
        }
    }

    pub fn degree(&self, n: u64) -> u64 {
        nomeld_degree_bound(n)
    }
}
