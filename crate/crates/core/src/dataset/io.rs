//! KDD CSV reading and writing.
//!
//! Each line holds the feature values followed by the label, comma separated,
//! without a header. Labels in the distributed files end with a period; it is
//! stripped on input and never written back.

use std::io::{BufRead, Write};

use super::{Column, Dataset, DatasetBuilder, LabelMap, Schema};
use crate::error::{Error, Result};

/// Parses KDD CSV with the bundled label map.
pub fn parse_kdd<R: BufRead>(source: R, schema: &Schema) -> Result<Dataset> {
    parse_kdd_with(source, schema, LabelMap::bundled())
}

pub fn parse_kdd_with<R: BufRead>(
    mut source: R,
    schema: &Schema,
    labels: &LabelMap,
) -> Result<Dataset> {
    let width = schema.len() + 1;
    let mut builder = DatasetBuilder::new(schema.clone());
    let mut line = String::new();
    let mut line_no = 0;
    loop {
        line.clear();
        if source.read_line(&mut line)? == 0 {
            break;
        }
        line_no += 1;
        let text = line.trim_end_matches(['\n', '\r']);
        if text.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = text.split(',').collect();
        if fields.len() != width {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {width} fields, found {}", fields.len()),
            });
        }
        let raw = fields[width - 1].trim();
        let raw = raw.strip_suffix('.').unwrap_or(raw);
        let class = labels.map(raw).map_err(|e| match e {
            Error::UnknownLabel(l) => Error::Parse {
                line: line_no,
                message: format!("unknown label `{l}`"),
            },
            other => other,
        })?;
        builder.push_fields(&fields[..width - 1], raw, class, line_no)?;
    }
    Ok(builder.build())
}

/// Writes canonical KDD CSV: shortest round-trip numbers, labels without a
/// trailing period.
pub fn write_kdd<W: Write>(d: &Dataset, mut out: W) -> Result<()> {
    let mut line = String::new();
    for r in 0..d.len() {
        line.clear();
        for col in d.columns() {
            match col {
                Column::Numeric(v) => {
                    let x = v[r];
                    // fold -0 so the canonical form is stable
                    let x = if x == 0.0 { 0.0 } else { x };
                    line.push_str(&x.to_string());
                }
                Column::Symbolic { codes, vocab } => line.push_str(&vocab[codes[r] as usize]),
            }
            line.push(',');
        }
        line.push_str(d.raw_label(r));
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{AttackClass, Value};

    const NORMAL_LINE: &str = "0,tcp,http,SF,181,5450,0,0,0,0,0,1,0,0,0,0,0,0,0,0,0,0,8,8,0.00,0.00,0.00,0.00,1.00,0.00,0.00,9,9,1.00,0.00,0.11,0.00,0.00,0.00,0.00,0.00,normal.";

    #[test]
    fn parses_one_line() {
        let d = parse_kdd(NORMAL_LINE.as_bytes(), &Schema::kdd()).unwrap();
        assert_eq!(d.len(), 1);
        let r = d.record(0);
        assert_eq!(r.class, AttackClass::Normal);
        assert_eq!(r.raw_label, "normal");
        assert_eq!(r.values[2], Value::Token("http".into()));
        assert_eq!(r.values[4], Value::Number(181.0));
    }

    #[test]
    fn empty_input_gives_empty_dataset() {
        let d = parse_kdd(&b""[..], &Schema::kdd()).unwrap();
        assert!(d.is_empty());
    }

    #[test]
    fn wrong_field_count_reports_line() {
        let text = format!("{NORMAL_LINE}\n0,tcp,http\n");
        let err = parse_kdd(text.as_bytes(), &Schema::kdd()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn bad_number_reports_line() {
        let text = NORMAL_LINE.replacen("181", "18x", 1);
        let err = parse_kdd(text.as_bytes(), &Schema::kdd()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn unknown_label_lists_token() {
        let text = NORMAL_LINE.replace("normal.", "teleport.");
        let err = parse_kdd(text.as_bytes(), &Schema::kdd()).unwrap_err();
        assert!(err.to_string().contains("teleport"), "{err}");
    }

    #[test]
    fn canonical_write_round_trips() {
        let text = format!("{NORMAL_LINE}\n{}\n", NORMAL_LINE.replace("normal.", "smurf."));
        let d = parse_kdd(text.as_bytes(), &Schema::kdd()).unwrap();
        let mut buf = Vec::new();
        write_kdd(&d, &mut buf).unwrap();
        let s = String::from_utf8(buf.clone()).unwrap();
        assert!(s.lines().next().unwrap().ends_with(",normal"));
        assert!(s.contains(",0.11,"));
        let again = parse_kdd(&buf[..], &Schema::kdd()).unwrap();
        assert_eq!(again, d);
    }
}
