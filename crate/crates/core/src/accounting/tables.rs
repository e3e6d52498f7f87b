//! Upper-bound rows for private blocks and public methods.
//!
//! Potential bounds are hard; write-count bounds are advisory because the
//! write-counting convention only approximates the analysis.

use super::{BlockKind, BlockRecord, Method, OpReport};
use crate::heap::Variant;
use crate::node::Tag;
use crate::verify::bounds::rank_bound;

/// Bound row for a private block: per-coordinate (G, A, L) and total ΔΦ
/// ceilings plus an advisory write ceiling.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockBound {
    pub row: &'static str,
    pub coord: [i64; 3],
    pub total: i64,
    pub writes: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MethodBound {
    pub row: &'static str,
    pub coord: [i64; 3],
    pub total: i64,
    pub writes: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundViolation {
    pub row: String,
    pub quantity: &'static str,
    pub observed: i64,
    pub bound: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WriteWarning {
    pub row: String,
    pub observed: u64,
    pub bound: u64,
}

const fn bb(row: &'static str, coord: [i64; 3], total: i64, writes: u64) -> BlockBound {
    BlockBound {
        row,
        coord,
        total,
        writes,
    }
}

/// Headline row of the private-block table for `kind`, if it has one.
pub fn block_bound(v: Variant, kind: BlockKind) -> Option<BlockBound> {
    use BlockKind::*;
    Some(match v {
        Variant::Meld => match kind {
            HeapSizeDecrement => bb("heap size decrement", [0, 24, 0], 24, 7),
            SetType(Tag::G) => bb("set violation type G", [4, 0, 0], 4, 2),
            SetType(Tag::A) => bb("set violation type A", [0, 6, 0], 6, 2),
            SetType(Tag::L) => bb("set violation type L*", [0, 0, 12], 12, 2),
            SetType(Tag::N) => bb("set violation type N", [0, 0, 0], 0, 1),
            RankDecrement => bb("rank decrement", [4, 1, 12], 12, 2),
            AddSolidChild => bb("add a solid child", [4, 6, 0], 10, 3),
            ChildRemoval => bb("child removal", [4, 1, 12], 12, 2),
            Link => bb("link of rank roots", [4, 6, 0], 10, 4),
            DegreeReduction => bb("node degree", [0, 6, 0], 6, 1),
        },
        Variant::NoMeld => match kind {
            SetType(Tag::A) => bb("set violation type A", [0, 2, 0], 2, 2),
            SetType(Tag::L) => bb("set violation type L*", [0, 0, 5], 5, 2),
            SetType(Tag::N) => bb("set violation type N", [0, 0, 0], 0, 1),
            RankDecrement => bb("rank decrement", [0, 1, 5], 5, 2),
            AddSolidChild => bb("add a solid child", [0, 1, 0], 1, 2),
            ChildRemoval => bb("child removal", [0, 1, 5], 5, 2),
            Link => bb("link of rank roots", [0, 1, 0], 1, 3),
            SetType(Tag::G) | DegreeReduction | HeapSizeDecrement => return None,
        },
    })
}

/// Public-method row: ceilings on the potential injected by the method
/// (its ΔΦ minus the ΔΦ of its reduction steps). `n` is the heap size at
/// method entry.
pub fn method_bound(v: Variant, m: Method, n: u64) -> MethodBound {
    let r = rank_bound(n) as i64;
    let r2 = rank_bound(2 * n) as i64;
    let mb = |row, coord, total, writes| MethodBound {
        row,
        coord,
        total,
        writes,
    };
    match (v, m) {
        (Variant::Meld, Method::Insert) => mb("Insert", [4, 12, 0], 16, 5),
        (Variant::Meld, Method::FindMin) => mb("FindMin", [0, 0, 0], 0, 0),
        (Variant::Meld, Method::DeleteMin) => mb(
            "DeleteMin",
            [12 * r2 + 20 + 4 * r, 24 + 12 * r, 0],
            12 * r2 + 12 * r + 44,
            (21 + 6 * r2 + 4 * r) as u64,
        ),
        (Variant::Meld, Method::DecreaseKey) => mb("DecreaseKey", [8, 13, 12], 28, 8),
        (Variant::Meld, Method::Meld) => mb("Meld", [8, 6, 0], 14, 5),
        (Variant::NoMeld, Method::Insert) => mb("Insert", [0, 3, 0], 3, 3),
        (Variant::NoMeld, Method::FindMin) => mb("FindMin", [0, 0, 0], 0, 0),
        (Variant::NoMeld, Method::DeleteMin) => {
            mb("DeleteMin", [0, 2 * r, 0], 2 * r, (1 + r) as u64)
        }
        (Variant::NoMeld, Method::DecreaseKey) => mb("DecreaseKey", [0, 3, 5], 8, 5),
        (Variant::NoMeld, Method::Meld) => mb("Meld", [0, 0, 0], 0, 0),
    }
}

const COORD: [&str; 3] = ["dphi_g", "dphi_a", "dphi_l"];

fn check(
    row: &str,
    coord: [i64; 3],
    total: i64,
    d: [i64; 3],
    out: &mut Vec<BoundViolation>,
) {
    for i in 0..3 {
        if d[i] > coord[i] {
            out.push(BoundViolation {
                row: row.to_string(),
                quantity: COORD[i],
                observed: d[i],
                bound: coord[i],
            });
        }
    }
    let t: i64 = d.iter().sum();
    if t > total {
        out.push(BoundViolation {
            row: row.to_string(),
            quantity: "dphi",
            observed: t,
            bound: total,
        });
    }
}

/// Checks one private-block record against its row.
pub fn check_block(
    v: Variant,
    rec: &BlockRecord,
) -> (Vec<BoundViolation>, Option<WriteWarning>) {
    let mut out = Vec::new();
    let Some(b) = block_bound(v, rec.kind) else {
        return (out, None);
    };
    check(b.row, b.coord, b.total, rec.d_phi, &mut out);
    let warn = (rec.writes > b.writes).then(|| WriteWarning {
        row: b.row.to_string(),
        observed: rec.writes,
        bound: b.writes,
    });
    (out, warn)
}

/// Checks a public-method report against its row. Potential bounds are
/// hard failures; the write count is only reported.
pub fn assert_table_bounds(
    v: Variant,
    report: &OpReport,
) -> (Vec<BoundViolation>, Option<WriteWarning>) {
    let b = method_bound(v, report.method, report.n_before);
    let mut out = Vec::new();
    check(b.row, b.coord, b.total, report.injected, &mut out);
    let warn = (report.injected_writes > b.writes).then(|| WriteWarning {
        row: b.row.to_string(),
        observed: report.injected_writes,
        bound: b.writes,
    });
    (out, warn)
}
