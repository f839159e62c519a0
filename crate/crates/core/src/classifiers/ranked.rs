use crate::dataset::{Column, Dataset};

/// A column re-coded for split finding: numeric values become ranks into the
/// sorted distinct values, symbolic columns keep their token codes.
#[derive(Debug)]
pub(crate) enum RankedColumn {
    Numeric { ranks: Vec<u32>, values: Vec<f64> },
    Symbolic { codes: Vec<u32>, n_tokens: usize },
}

/// Rank-coded copy of every column of a dataset plus its class indices.
#[derive(Debug)]
pub(crate) struct RankedColumns {
    pub(crate) columns: Vec<RankedColumn>,
    pub(crate) labels: Vec<u8>,
}

impl RankedColumns {
    pub(crate) fn build(d: &Dataset) -> Self {
        let columns = d
            .columns()
            .iter()
            .map(|c| match c {
                Column::Numeric(v) => {
                    let mut values: Vec<f64> = v.clone();
                    values.sort_by(f64::total_cmp);
                    values.dedup_by(|a, b| a == b);
                    let ranks = v
                        .iter()
                        .map(|x| values.partition_point(|y| y < x) as u32)
                        .collect();
                    RankedColumn::Numeric { ranks, values }
                }
                Column::Symbolic { codes, vocab } => RankedColumn::Symbolic {
                    codes: codes.clone(),
                    n_tokens: vocab.len(),
                },
            })
            .collect();
        let labels = d.classes().iter().map(|c| c.index() as u8).collect();
        Self { columns, labels }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{AttackClass, Schema};

    #[test]
    fn ranks_follow_sorted_distinct_values() {
        let mut b = Dataset::builder(Schema::numeric(1).unwrap());
        for x in [5.0, -1.0, 5.0, 0.0, -0.0] {
            b.push_numeric(&[x], AttackClass::Normal).unwrap();
        }
        let r = RankedColumns::build(&b.build());
        match &r.columns[0] {
            RankedColumn::Numeric { ranks, values } => {
                assert_eq!(values, &vec![-1.0, 0.0, 5.0]);
                assert_eq!(ranks, &vec![2, 0, 2, 1, 1]);
            }
            _ => panic!("expected numeric"),
        }
    }
}
