//! Shared setup for the criterion benches.

pub use vrheap::workload::{churn, dijkstra, heapsort, random_graph, random_keys, Graph};
pub use vrheap::{Policy, Variant};

pub const VARIANTS: [Variant; 2] = [Variant::NoMeld, Variant::Meld];
pub const POLICIES: [Policy; 3] = [
    Policy::Amortized,
    Policy::WorstCaseLedger,
    Policy::WorstCaseSimple,
];
