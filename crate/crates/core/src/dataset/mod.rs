//! Connection-record datasets: parsing, deduplication and class-based views.

mod io;
mod labels;
mod schema;

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

pub use io::{parse_kdd, parse_kdd_with, write_kdd};
pub use labels::{map_attack_label, AttackClass, LabelMap};
pub use schema::{
    FeatureGroup, FeatureId, FeatureKind, FeatureMeta, Schema, KDD_FEATURE_COUNT,
};

use crate::classifiers::RankedColumns;
use crate::error::{Error, Result};

/// A single feature value of a materialized record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Number(f64),
    Token(String),
}

/// One connection record, materialized from a [`Dataset`] row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub values: Vec<Value>,
    pub raw_label: String,
    pub class: AttackClass,
}

/// Column storage. Symbolic tokens are interned per column in first-seen order.
#[derive(Debug, Clone)]
pub enum Column {
    Numeric(Vec<f64>),
    Symbolic { codes: Vec<u32>, vocab: Vec<String> },
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Symbolic { codes, .. } => codes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn value(&self, row: usize) -> Value {
        match self {
            Column::Numeric(v) => Value::Number(v[row]),
            Column::Symbolic { codes, vocab } => Value::Token(vocab[codes[row] as usize].clone()),
        }
    }

    /// Hashable identity of a cell: float bits (with -0 folded into 0) or token code.
    fn key(&self, row: usize) -> u64 {
        match self {
            Column::Numeric(v) => {
                let x = v[row];
                if x == 0.0 {
                    0
                } else {
                    x.to_bits()
                }
            }
            Column::Symbolic { codes, .. } => codes[row] as u64,
        }
    }

    fn select(&self, rows: &[usize]) -> Column {
        match self {
            Column::Numeric(v) => Column::Numeric(rows.iter().map(|&r| v[r]).collect()),
            Column::Symbolic { codes, vocab } => Column::Symbolic {
                codes: rows.iter().map(|&r| codes[r]).collect(),
                vocab: vocab.clone(),
            },
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: Option<String>,
    pub deduplicated: bool,
    pub class_filter: Option<String>,
}

/// Immutable table of connection records in column-major layout.
#[derive(Debug, Clone)]
pub struct Dataset {
    schema: Arc<Schema>,
    columns: Vec<Column>,
    label_codes: Vec<u32>,
    label_vocab: Vec<String>,
    classes: Vec<AttackClass>,
    provenance: Provenance,
    ranked: OnceLock<Arc<RankedColumns>>,
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        if self.schema != other.schema || self.len() != other.len() {
            return false;
        }
        (0..self.len()).all(|r| {
            self.classes[r] == other.classes[r]
                && self.raw_label(r) == other.raw_label(r)
                && self
                    .columns
                    .iter()
                    .zip(&other.columns)
                    .all(|(a, b)| match (a, b) {
                        (Column::Numeric(x), Column::Numeric(y)) => {
                            x[r] == y[r] || (x[r].is_nan() && y[r].is_nan())
                        }
                        (
                            Column::Symbolic { codes: ca, vocab: va },
                            Column::Symbolic { codes: cb, vocab: vb },
                        ) => va[ca[r] as usize] == vb[cb[r] as usize],
                        _ => false,
                    })
        })
    }
}

impl Dataset {
    pub fn builder(schema: Schema) -> DatasetBuilder {
        DatasetBuilder::new(schema)
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn n_features(&self) -> usize {
        self.schema.len()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.provenance.source = Some(source.into());
        self
    }

    pub fn column(&self, id: FeatureId) -> &Column {
        &self.columns[id.column()]
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn classes(&self) -> &[AttackClass] {
        &self.classes
    }

    pub fn class(&self, row: usize) -> AttackClass {
        self.classes[row]
    }

    pub fn raw_label(&self, row: usize) -> &str {
        &self.label_vocab[self.label_codes[row] as usize]
    }

    pub fn record(&self, row: usize) -> Record {
        Record {
            values: self.columns.iter().map(|c| c.value(row)).collect(),
            raw_label: self.raw_label(row).to_string(),
            class: self.classes[row],
        }
    }

    pub fn records(&self) -> impl Iterator<Item = Record> + '_ {
        (0..self.len()).map(|r| self.record(r))
    }

    /// Per-class record counts indexed by [`AttackClass::index`].
    pub fn class_counts(&self) -> [usize; 5] {
        let mut counts = [0usize; 5];
        for c in &self.classes {
            counts[c.index()] += 1;
        }
        counts
    }

    /// Classes with at least one record, in enumeration order.
    pub fn present_classes(&self) -> Vec<AttackClass> {
        let counts = self.class_counts();
        AttackClass::ALL
            .into_iter()
            .filter(|c| counts[c.index()] > 0)
            .collect()
    }

    /// New dataset holding `rows` in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            columns: self.columns.iter().map(|c| c.select(rows)).collect(),
            label_codes: rows.iter().map(|&r| self.label_codes[r]).collect(),
            label_vocab: self.label_vocab.clone(),
            classes: rows.iter().map(|&r| self.classes[r]).collect(),
            provenance: self.provenance.clone(),
            ranked: OnceLock::new(),
        }
    }

    fn filter_classes(&self, keep: impl Fn(AttackClass) -> bool, tag: String) -> Dataset {
        let rows: Vec<usize> = (0..self.len()).filter(|&r| keep(self.classes[r])).collect();
        let mut out = self.select_rows(&rows);
        out.provenance.class_filter = Some(tag);
        out
    }

    /// Rank-coded columns used by the tree learners; computed once per dataset.
    pub(crate) fn ranked(&self) -> Arc<RankedColumns> {
        self.ranked
            .get_or_init(|| Arc::new(RankedColumns::build(self)))
            .clone()
    }

    /// Rebuilds every record's class from its raw label.
    pub fn verify_labels(&self, map: &LabelMap) -> Result<()> {
        for r in 0..self.len() {
            let class = map.map(self.raw_label(r))?;
            if class != self.classes[r] {
                return Err(Error::Parse {
                    line: r + 1,
                    message: format!(
                        "record class {} disagrees with label `{}`",
                        self.classes[r],
                        self.raw_label(r)
                    ),
                });
            }
        }
        Ok(())
    }
}

/// Incremental constructor; interns tokens and labels.
#[derive(Debug)]
pub struct DatasetBuilder {
    schema: Arc<Schema>,
    columns: Vec<Column>,
    token_index: Vec<HashMap<String, u32>>,
    label_codes: Vec<u32>,
    label_vocab: Vec<String>,
    label_index: HashMap<String, u32>,
    classes: Vec<AttackClass>,
    provenance: Provenance,
}

impl DatasetBuilder {
    pub fn new(schema: Schema) -> Self {
        let columns = schema
            .features()
            .iter()
            .map(|m| {
                if m.kind.is_symbolic() {
                    Column::Symbolic {
                        codes: Vec::new(),
                        vocab: Vec::new(),
                    }
                } else {
                    Column::Numeric(Vec::new())
                }
            })
            .collect();
        let token_index = vec![HashMap::new(); schema.len()];
        Self {
            schema: Arc::new(schema),
            columns,
            token_index,
            label_codes: Vec::new(),
            label_vocab: Vec::new(),
            label_index: HashMap::new(),
            classes: Vec::new(),
            provenance: Provenance::default(),
        }
    }

    pub fn source(mut self, source: impl Into<String>) -> Self {
        self.provenance.source = Some(source.into());
        self
    }

    pub fn n_features(&self) -> usize {
        self.schema.len()
    }

    fn intern_token(&mut self, col: usize, token: &str) -> u32 {
        let Column::Symbolic { codes, vocab } = &mut self.columns[col] else {
            unreachable!("intern on numeric column")
        };
        let index = &mut self.token_index[col];
        let code = match index.get(token) {
            Some(&c) => c,
            None => {
                let c = vocab.len() as u32;
                vocab.push(token.to_string());
                index.insert(token.to_string(), c);
                c
            }
        };
        codes.push(code);
        code
    }

    fn push_label(&mut self, raw_label: &str, class: AttackClass) {
        let code = match self.label_index.get(raw_label) {
            Some(&c) => c,
            None => {
                let c = self.label_vocab.len() as u32;
                self.label_vocab.push(raw_label.to_string());
                self.label_index.insert(raw_label.to_string(), c);
                c
            }
        };
        self.label_codes.push(code);
        self.classes.push(class);
    }

    /// Appends a row of already-typed values.
    pub fn push(&mut self, values: &[Value], raw_label: &str, class: AttackClass) -> Result<()> {
        if values.len() != self.schema.len() {
            return Err(Error::Schema(format!(
                "expected {} values, got {}",
                self.schema.len(),
                values.len()
            )));
        }
        for (col, v) in values.iter().enumerate() {
            match (&self.columns[col], v) {
                (Column::Numeric(_), Value::Number(x)) if x.is_finite() => {}
                (Column::Symbolic { .. }, Value::Token(_)) => {}
                _ => {
                    return Err(Error::Schema(format!(
                        "value {v:?} does not fit feature {}",
                        col + 1
                    )))
                }
            }
        }
        for (col, v) in values.iter().enumerate() {
            match v {
                Value::Number(x) => {
                    if let Column::Numeric(c) = &mut self.columns[col] {
                        c.push(*x);
                    }
                }
                Value::Token(t) => {
                    self.intern_token(col, t);
                }
            }
        }
        self.push_label(raw_label, class);
        Ok(())
    }

    /// Appends a numeric-only row; convenient for synthetic tables.
    pub fn push_numeric(&mut self, values: &[f64], class: AttackClass) -> Result<()> {
        let vals: Vec<Value> = values.iter().map(|&x| Value::Number(x)).collect();
        self.push(&vals, &class.name().to_ascii_lowercase(), class)
    }

    /// Appends a row from textual fields; `line` is used only for diagnostics.
    pub(crate) fn push_fields(
        &mut self,
        fields: &[&str],
        raw_label: &str,
        class: AttackClass,
        line: usize,
    ) -> Result<()> {
        debug_assert_eq!(fields.len(), self.schema.len());
        // Validate numerics before mutating so a failed row leaves no partial state.
        let mut parsed = [0f64; KDD_FEATURE_COUNT];
        for (col, field) in fields.iter().enumerate() {
            if let Column::Numeric(_) = self.columns[col] {
                let x: f64 = field.trim().parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("feature {}: cannot parse `{field}` as a number", col + 1),
                })?;
                if !x.is_finite() {
                    return Err(Error::Parse {
                        line,
                        message: format!("feature {}: non-finite value `{field}`", col + 1),
                    });
                }
                parsed[col] = x;
            }
        }
        for (col, field) in fields.iter().enumerate() {
            match &mut self.columns[col] {
                Column::Numeric(c) => c.push(parsed[col]),
                Column::Symbolic { .. } => {
                    self.intern_token(col, field.trim());
                }
            }
        }
        self.push_label(raw_label, class);
        Ok(())
    }

    pub fn build(self) -> Dataset {
        Dataset {
            schema: self.schema,
            columns: self.columns,
            label_codes: self.label_codes,
            label_vocab: self.label_vocab,
            classes: self.classes,
            provenance: self.provenance,
            ranked: OnceLock::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DedupCounts {
    pub before_count: usize,
    pub after_count: usize,
    /// `(before - after) / before` in percent; 0 when `before` is 0.
    pub reduction_pct: f64,
    /// Share of the deduplicated total, in percent.
    pub share_of_total_pct: f64,
}

impl DedupCounts {
    fn new(before: usize, after: usize, total_after: usize) -> Self {
        Self {
            before_count: before,
            after_count: after,
            reduction_pct: pct(before - after, before),
            share_of_total_pct: pct(after, total_after),
        }
    }
}

fn pct(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDedup {
    pub class: AttackClass,
    #[serde(flatten)]
    pub counts: DedupCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DedupStats {
    pub classes: Vec<ClassDedup>,
    pub total: DedupCounts,
}

impl DedupStats {
    pub fn class(&self, c: AttackClass) -> &DedupCounts {
        &self.classes[c.index()].counts
    }
}

/// Keeps the first occurrence of every distinct (41 values, raw label) row.
pub fn deduplicate(d: &Dataset) -> (Dataset, DedupStats) {
    let mut seen: HashMap<Vec<u64>, ()> = HashMap::with_capacity(d.len() / 2);
    let mut keep = Vec::new();
    let mut key = Vec::with_capacity(d.n_features() + 1);
    for r in 0..d.len() {
        key.clear();
        key.extend(d.columns.iter().map(|c| c.key(r)));
        key.push(d.label_codes[r] as u64);
        if !seen.contains_key(&key) {
            seen.insert(key.clone(), ());
            keep.push(r);
        }
    }
    let mut out = d.select_rows(&keep);
    out.provenance.deduplicated = true;

    let before = d.class_counts();
    let after = out.class_counts();
    let classes = AttackClass::ALL
        .into_iter()
        .map(|c| ClassDedup {
            class: c,
            counts: DedupCounts::new(before[c.index()], after[c.index()], out.len()),
        })
        .collect();
    let stats = DedupStats {
        classes,
        total: DedupCounts::new(d.len(), out.len(), out.len()),
    };
    (out, stats)
}

/// Records of class `c` plus all NORMAL records, order preserved.
pub fn build_class_dataset(d: &Dataset, c: AttackClass) -> Result<Dataset> {
    if c == AttackClass::Normal {
        return Err(Error::InvalidClassFilter(c));
    }
    Ok(d.filter_classes(
        |x| x == c || x == AttackClass::Normal,
        format!("{}+NORMAL", c.name()),
    ))
}

/// DOS and PROBE records only.
pub fn build_pair_dataset(d: &Dataset) -> Dataset {
    d.filter_classes(
        |x| matches!(x, AttackClass::Dos | AttackClass::Probe),
        "DOS+PROBE".to_string(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassShare {
    pub class: AttackClass,
    pub count: usize,
    pub pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDistribution {
    pub total: usize,
    pub classes: Vec<ClassShare>,
}

impl ClassDistribution {
    pub fn share(&self, c: AttackClass) -> &ClassShare {
        &self.classes[c.index()]
    }
}

pub fn class_distribution(d: &Dataset) -> ClassDistribution {
    let counts = d.class_counts();
    ClassDistribution {
        total: d.len(),
        classes: AttackClass::ALL
            .into_iter()
            .map(|c| ClassShare {
                class: c,
                count: counts[c.index()],
                pct: pct(counts[c.index()], d.len()),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(rows: &[(&[f64], AttackClass)]) -> Dataset {
        let mut b = Dataset::builder(Schema::numeric(rows[0].0.len()).unwrap());
        for (v, c) in rows {
            b.push_numeric(v, *c).unwrap();
        }
        b.build()
    }

    #[test]
    fn dedup_keeps_first_occurrence_in_order() {
        use AttackClass::*;
        let d = toy(&[
            (&[1.0, 2.0], Normal),
            (&[1.0, 2.0], Normal),
            (&[1.0, 2.0], Dos),
            (&[3.0, 4.0], Dos),
            (&[1.0, 2.0], Normal),
        ]);
        let (out, stats) = deduplicate(&d);
        assert_eq!(out.len(), 3);
        assert_eq!(out.classes(), &[Normal, Dos, Dos]);
        assert_eq!(stats.class(Normal).before_count, 3);
        assert_eq!(stats.class(Normal).after_count, 1);
        assert!((stats.class(Normal).reduction_pct - 200.0 / 3.0).abs() < 1e-12);
        assert_eq!(stats.total.after_count, 3);
        assert!(out.provenance().deduplicated);
    }

    #[test]
    fn negative_zero_counts_as_zero() {
        let d = toy(&[(&[0.0], AttackClass::Normal), (&[-0.0], AttackClass::Normal)]);
        assert_eq!(deduplicate(&d).0.len(), 1);
    }

    #[test]
    fn distinct_rows_are_untouched() {
        let d = toy(&[(&[1.0], AttackClass::Normal), (&[2.0], AttackClass::Dos)]);
        let (out, stats) = deduplicate(&d);
        assert_eq!(out, d);
        assert!(stats.classes.iter().all(|c| c.counts.reduction_pct == 0.0));
    }

    #[test]
    fn empty_dedup_has_zero_stats() {
        let d = Dataset::builder(Schema::numeric(2).unwrap()).build();
        let (out, stats) = deduplicate(&d);
        assert!(out.is_empty());
        assert_eq!(stats.total.before_count, 0);
        assert_eq!(stats.total.reduction_pct, 0.0);
    }

    #[test]
    fn class_dataset_filters() {
        use AttackClass::*;
        let d = toy(&[
            (&[1.0], Normal),
            (&[2.0], Dos),
            (&[3.0], Probe),
            (&[4.0], Normal),
        ]);
        let dos = build_class_dataset(&d, Dos).unwrap();
        assert_eq!(dos.classes(), &[Normal, Dos, Normal]);
        let u2r = build_class_dataset(&d, U2r).unwrap();
        assert_eq!(u2r.classes(), &[Normal, Normal]);
        assert!(build_class_dataset(&d, Normal).is_err());
        let pair = build_pair_dataset(&d);
        assert_eq!(pair.classes(), &[Dos, Probe]);
        assert_eq!(pair.provenance().class_filter.as_deref(), Some("DOS+PROBE"));
    }

    #[test]
    fn pair_of_normal_only_is_empty() {
        let d = toy(&[(&[1.0], AttackClass::Normal)]);
        assert!(build_pair_dataset(&d).is_empty());
    }

    #[test]
    fn distribution_single_class() {
        let d = toy(&[(&[1.0], AttackClass::R2l), (&[2.0], AttackClass::R2l)]);
        let dist = class_distribution(&d);
        assert_eq!(dist.share(AttackClass::R2l).pct, 100.0);
        let sum: f64 = dist.classes.iter().map(|c| c.pct).sum();
        assert!((sum - 100.0).abs() < 1e-9);
    }

    #[test]
    fn builder_rejects_wrong_width_and_non_finite() {
        let mut b = Dataset::builder(Schema::numeric(2).unwrap());
        assert!(b.push_numeric(&[1.0], AttackClass::Normal).is_err());
        assert!(b.push_numeric(&[1.0, f64::NAN], AttackClass::Normal).is_err());
    }
}
