//! Published operation counts used as comparison columns in reports.

use cfft_core::PlanKind;

/// `(n, multiplications, direct additions, symmetric/inverse additions)`.
const COUNTS: [(usize, usize, usize, usize); 8] = [
    (7, 6, 24, 24),
    (15, 16, 74, 76),
    (31, 54, 299, 307),
    (63, 97, 759, 804),
    (127, 216, 2576, 3117),
    (255, 586, 6736, 6984),
    (511, 1014, 23130, 27192),
    (1023, 2827, 75360, 77276),
];

fn row(n: usize) -> Option<&'static (usize, usize, usize, usize)> {
    COUNTS.iter().find(|r| r.0 == n)
}

pub fn multiplications(n: usize) -> Option<usize> {
    row(n).map(|r| r.1)
}

pub fn additions(n: usize, kind: PlanKind) -> Option<usize> {
    row(n).map(|r| match kind {
        PlanKind::Direct => r.2,
        PlanKind::Symmetric | PlanKind::Inverse => r.3,
    })
}
