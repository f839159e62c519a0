//! Published reference values: class counts before and after duplicate
//! removal, per-method selected features, the consensus table and the final
//! 11-feature set. Used for acceptance checks and diagnostics.

use std::time::Duration;

use crate::dataset::AttackClass;
use crate::featsel::{FeatureSet, Grid, GridCell, GridDataset, SearchMethod};

/// (class, before, after) for the 10% training file.
pub const TRAIN_COUNTS: [(AttackClass, usize, usize); 5] = [
    (AttackClass::Normal, 97278, 87832),
    (AttackClass::Dos, 391458, 54572),
    (AttackClass::Probe, 4107, 2131),
    (AttackClass::R2l, 1124, 997),
    (AttackClass::U2r, 54, 54),
];
pub const TRAIN_TOTAL: (usize, usize) = (494021, 145586);
pub const TRAIN_REDUCTION_PCT: f64 = 70.5;
/// Class shares of the deduplicated training set, percent.
pub const TRAIN_SHARES_PCT: [(AttackClass, f64); 5] = [
    (AttackClass::Normal, 60.33),
    (AttackClass::Dos, 37.48),
    (AttackClass::Probe, 1.46),
    (AttackClass::R2l, 0.68),
    (AttackClass::U2r, 0.04),
];

/// (class, before, after) for the corrected test file. The published total
/// row has before/after transposed; the values here follow the columns.
pub const TEST_COUNTS: [(AttackClass, usize, usize); 5] = [
    (AttackClass::Normal, 60593, 47913),
    (AttackClass::Dos, 229855, 23570),
    (AttackClass::Probe, 4166, 2682),
    (AttackClass::R2l, 16345, 3056),
    (AttackClass::U2r, 70, 70),
];
pub const TEST_TOTAL: (usize, usize) = (311029, 77291);

/// Final selected feature set.
pub const BEST_SET: [usize; 11] = [1, 3, 4, 5, 6, 10, 14, 23, 25, 30, 35];

/// PROBE row of the pooled confusion matrix with the 11-feature set.
pub const PROBE_ROW_BEST: [(AttackClass, u64); 4] = [
    (AttackClass::Probe, 2076),
    (AttackClass::Dos, 31),
    (AttackClass::U2r, 1),
    (AttackClass::Normal, 23),
];
/// PROBE row with all 41 features.
pub const PROBE_ROW_ALL: [(AttackClass, u64); 3] = [
    (AttackClass::Probe, 2094),
    (AttackClass::Dos, 10),
    (AttackClass::Normal, 27),
];

/// Features per (method, dataset) in the printed order.
pub const TABLE_IV: [(SearchMethod, [&[u8]; 5]); 7] = [
    (
        SearchMethod::RankGainRatio,
        [
            &[3, 4, 5, 6, 11, 12, 14, 22, 26, 29, 30, 38, 39, 9, 33, 35, 37, 23, 34],
            &[3, 4, 5, 6, 12, 25, 26, 29, 30, 37, 38, 39],
            &[25, 27, 29, 37, 17, 30, 4, 5, 26, 38],
            &[5, 10, 11, 18, 22, 26, 9, 39],
            &[14, 17, 1, 18, 29, 39, 9, 11, 13, 32, 33],
        ],
    ),
    (
        SearchMethod::RankInfoGain,
        [
            &[3, 4, 5, 6, 12, 14, 23, 25, 26, 29, 30, 33, 34, 35, 38, 39, 37, 9, 32],
            &[3, 4, 5, 6, 12, 23, 25, 26, 29, 30, 33, 34, 35, 37, 38, 39],
            &[3, 4, 5, 6, 12, 23, 25, 27, 29, 30, 33, 34, 35, 37, 40, 38, 36, 41],
            &[3, 5, 6, 10, 22, 33, 36, 9, 26, 16, 37],
            &[3, 14, 17, 18, 29, 39, 11],
        ],
    ),
    (
        SearchMethod::BestFirst,
        [
            &[3, 4, 8, 10, 12, 25, 29, 30, 37, 9, 32],
            &[4, 5, 12, 29, 30, 37, 26, 6, 25],
            &[25, 27, 29, 37, 5, 17, 30, 38],
            &[5, 10, 39, 9, 26, 16],
            &[1, 14, 17, 18, 29, 39, 11],
        ],
    ),
    (
        SearchMethod::Genetic,
        [
            &[3, 4, 12, 25, 29, 30, 37, 6, 38, 8, 10, 11, 5, 31, 39, 9, 14, 15, 16, 18, 32, 33, 36],
            &[5, 12, 26, 29, 30, 37, 6, 25, 3, 4, 8, 23, 32, 33, 39, 10, 18, 34, 38, 41],
            &[25, 27, 29, 37, 30, 38, 5, 4, 17, 26, 2, 6, 10, 33, 34, 39, 41],
            &[10, 5, 26, 39, 9, 16, 22, 11, 36],
            &[13, 14, 17, 18, 32, 29, 33, 39, 4, 5, 6, 23, 31, 37],
        ],
    ),
    (
        SearchMethod::Greedy,
        [
            &[5, 6, 12, 22, 25, 26, 29, 30, 35, 37, 39, 23, 4, 9, 17, 31, 18, 14, 11, 38],
            &[3, 6, 12, 29, 30, 37, 38, 4, 5, 23, 25, 26, 17, 39],
            &[25, 29, 4, 37, 27, 30, 38, 5, 6],
            &[10, 11, 22, 6, 9, 26, 16, 5, 39],
            &[13, 14, 29, 17, 18, 32, 33, 11],
        ],
    ),
    (
        SearchMethod::Pso,
        [
            &[3, 4, 8, 10, 12, 25, 29, 30, 37, 9, 32],
            &[4, 5, 12, 29, 30, 37, 26, 6, 25, 11],
            &[25, 27, 29, 37, 17, 5, 3],
            &[5, 10, 39, 9, 26, 16],
            &[1, 14, 17, 18, 29, 39, 11],
        ],
    ),
    (
        SearchMethod::Tabu,
        [
            &[3, 4, 8, 10, 12, 25, 29, 30, 37, 9, 32],
            &[5, 12, 29, 30, 37, 26, 25, 6, 11],
            &[25, 27, 29, 37, 17, 5, 3],
            &[5, 10, 39, 9, 26, 16],
            &[1, 14, 17, 18, 29, 39, 11],
        ],
    ),
];

/// Published per-method summary rows, same method order as [`TABLE_IV`].
/// Each equals the features the method picked in at least two dataset rows,
/// not the plain union.
pub const TABLE_IV_UNIONS: [&[u8]; 7] = [
    &[3, 4, 5, 6, 9, 11, 12, 14, 17, 18, 22, 25, 26, 29, 30, 33, 37, 38, 39],
    &[3, 4, 5, 6, 9, 12, 14, 23, 25, 26, 29, 30, 33, 34, 35, 36, 37, 38, 39],
    &[4, 5, 9, 10, 12, 17, 25, 26, 29, 30, 37, 39],
    &[3, 4, 5, 6, 8, 9, 10, 11, 12, 14, 16, 17, 18, 23, 25, 26, 29, 30, 31, 32, 33, 34, 36, 37, 38, 39, 41],
    &[4, 5, 6, 9, 11, 12, 14, 17, 18, 22, 23, 25, 26, 29, 30, 37, 38, 39],
    &[3, 4, 5, 9, 10, 11, 12, 17, 25, 26, 29, 30, 37, 39],
    &[3, 5, 9, 10, 11, 12, 17, 25, 26, 29, 30, 37, 39],
];

/// Common important features per dataset row.
pub const TABLE_V: [(GridDataset, &[u8]); 5] = [
    (
        GridDataset::All,
        &[3, 4, 5, 6, 10, 12, 14, 23, 25, 26, 29, 30, 32, 33, 35, 37, 38, 39],
    ),
    (
        GridDataset::Dos,
        &[3, 4, 5, 6, 12, 23, 25, 26, 29, 30, 37, 38, 39],
    ),
    (GridDataset::Probe, &[3, 4, 5, 6, 17, 25, 27, 29, 30, 37, 38]),
    (GridDataset::R2l, &[5, 9, 10, 16, 22, 26, 39]),
    (GridDataset::U2r, &[1, 13, 14, 17, 18]),
];

pub fn set_of(indices: &[u8]) -> FeatureSet {
    FeatureSet::from_indices(indices.iter().map(|&i| i as usize)).expect("indices within 1..=41")
}

pub fn best_set() -> FeatureSet {
    FeatureSet::from_indices(BEST_SET).expect("indices within 1..=41")
}

/// The published method × dataset table as a [`Grid`] (no merits).
pub fn table_iv_grid() -> Grid {
    let cells = TABLE_IV
        .iter()
        .flat_map(|(method, rows)| {
            GridDataset::ALL
                .into_iter()
                .zip(rows.iter())
                .map(move |(dataset, row)| GridCell {
                    method: *method,
                    dataset,
                    features: set_of(row),
                    merit: None,
                    elapsed: Duration::ZERO,
                })
        })
        .collect();
    Grid::new(cells)
}

pub fn table_v(dataset: GridDataset) -> FeatureSet {
    TABLE_V
        .iter()
        .find(|r| r.0 == dataset)
        .map(|r| set_of(r.1))
        .expect("every dataset row is listed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_summary_rows_are_two_row_recurrences() {
        let grid = table_iv_grid();
        assert_eq!(grid.cells.len(), 35);
        for (r, printed) in grid.recurring(2).iter().zip(TABLE_IV_UNIONS) {
            assert_eq!(r.features, set_of(printed), "{}", r.method);
        }
        for (u, printed) in grid.unions().iter().zip(TABLE_IV_UNIONS) {
            assert!(set_of(printed).is_subset(&u.features));
            assert_ne!(u.features, set_of(printed));
        }
    }

    #[test]
    fn class_totals_add_up() {
        let before: usize = TRAIN_COUNTS.iter().map(|c| c.1).sum();
        let after: usize = TRAIN_COUNTS.iter().map(|c| c.2).sum();
        assert_eq!((before, after), TRAIN_TOTAL);
        let before: usize = TEST_COUNTS.iter().map(|c| c.1).sum();
        let after: usize = TEST_COUNTS.iter().map(|c| c.2).sum();
        assert_eq!((before, after), TEST_TOTAL);
        assert_eq!(PROBE_ROW_BEST.iter().map(|r| r.1).sum::<u64>(), 2131);
        assert_eq!(PROBE_ROW_ALL.iter().map(|r| r.1).sum::<u64>(), 2131);
    }
}
