//! Reference values for `m x n x n` shapes: the largest rank at which an
//! earlier sufficient condition proves generic identifiability.

/// Columns are `n = 4..=9`.
pub const COLUMNS: std::ops::RangeInclusive<usize> = 4..=9;

const ROWS: [(usize, [usize; 6]); 32] = [
    (2, [4, 5, 6, 7, 8, 9]),
    (3, [4, 5, 6, 7, 8, 9]),
    (4, [5, 6, 7, 8, 9, 10]),
    (5, [5, 6, 7, 8, 10, 11]),
    (6, [6, 7, 8, 9, 10, 11]),
    (7, [7, 8, 9, 9, 11, 12]),
    (8, [8, 9, 9, 10, 11, 12]),
    (9, [9, 9, 10, 11, 12, 13]),
    (10, [9, 10, 11, 12, 13, 14]),
    (11, [9, 11, 12, 13, 14, 15]),
    (12, [9, 12, 13, 14, 15, 15]),
    (13, [9, 13, 14, 14, 15, 16]),
    (14, [9, 14, 14, 15, 16, 17]),
    (15, [9, 14, 15, 16, 17, 18]),
    (16, [9, 14, 16, 17, 18, 19]),
    (17, [9, 14, 17, 18, 19, 20]),
    (18, [9, 14, 18, 19, 20, 20]),
    (19, [9, 14, 19, 20, 20, 21]),
    (20, [9, 14, 20, 20, 21, 22]),
    (21, [9, 14, 21, 21, 22, 23]),
    (22, [9, 14, 21, 22, 23, 24]),
    (23, [9, 14, 21, 23, 24, 25]),
    (24, [9, 14, 21, 24, 25, 26]),
    (25, [9, 14, 21, 25, 26, 26]),
    (26, [9, 14, 21, 26, 27, 27]),
    (27, [9, 14, 21, 27, 27, 28]),
    (28, [9, 14, 21, 28, 28, 29]),
    (29, [9, 14, 21, 29, 29, 30]),
    (30, [9, 14, 21, 30, 30, 31]),
    (31, [9, 14, 21, 30, 31, 32]),
    (32, [9, 14, 21, 30, 32, 33]),
    (33, [9, 14, 21, 30, 33, 34]),
];

pub fn lookup(m: usize, n: usize) -> Option<usize> {
    if !COLUMNS.contains(&n) {
        return None;
    }
    ROWS.iter().find(|(row, _)| *row == m).map(|(_, v)| v[n - 4])
}
