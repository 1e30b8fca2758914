//! Text formats: polyhedron and linear-map JSON documents, certificate
//! output, and comma-separated points.
//!
//! Rationals are always JSON strings in the `[+-]digits[/digits]` syntax.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;

use crate::arith::{format_rational, parse_rational, QMatrix, QVector, Rational};
use crate::polyhedron::{HPolyhedron, IneqRow};
use crate::projection::{Certified, LinMap};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub message: String,
    /// Byte offset of the offending token in the input, when known.
    pub offset: Option<usize>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.offset {
            Some(o) => write!(f, "parse error at byte offset {o}: {}", self.message),
            None => write!(f, "parse error: {}", self.message),
        }
    }
}

impl std::error::Error for ParseError {}

struct Q(Rational);

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Q;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a rational string such as \"-3\" or \"1/2\"")
            }
            fn visit_str<E: de::Error>(self, s: &str) -> Result<Q, E> {
                parse_rational(s)
                    .map(Q)
                    .map_err(|e| E::custom(format!("{e} (token \"{s}\")")))
            }
        }
        d.deserialize_str(V)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RowDoc {
    a: Vec<Q>,
    b: Q,
}

#[derive(Deserialize)]
struct PolyDoc {
    dim: usize,
    rows: Vec<RowDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MapDoc {
    rows: usize,
    cols: usize,
    data: Vec<Vec<Q>>,
}

fn byte_offset(src: &str, line: usize, column: usize) -> usize {
    let line_start: usize = src
        .split_inclusive('\n')
        .take(line.saturating_sub(1))
        .map(str::len)
        .sum();
    (line_start + column).min(src.len())
}

fn json_error(src: &str, e: serde_json::Error) -> ParseError {
    let end = byte_offset(src, e.line(), e.column());
    let message = e.to_string();
    // strip serde_json's own " at line L column C" suffix
    let message = match message.rfind(" at line ") {
        Some(i) => message[..i].to_string(),
        None => message,
    };
    // point at the start of a rejected rational token if there is one
    let offset = message
        .rfind("(token \"")
        .and_then(|i| {
            let tok = &message[i + 8..message.len() - 2];
            src[..end].rfind(&format!("\"{tok}\""))
        })
        .unwrap_or(end.saturating_sub(1));
    ParseError {
        message,
        offset: Some(offset),
    }
}

fn semantic(message: String) -> ParseError {
    ParseError {
        message,
        offset: None,
    }
}

pub fn parse_polyhedron(src: &str) -> Result<HPolyhedron, ParseError> {
    let doc: PolyDoc = serde_json::from_str(src).map_err(|e| json_error(src, e))?;
    let mut rows = Vec::with_capacity(doc.rows.len());
    for (k, r) in doc.rows.into_iter().enumerate() {
        if r.a.len() != doc.dim {
            return Err(semantic(format!(
                "row {k}: expected {} coefficients, found {}",
                doc.dim,
                r.a.len()
            )));
        }
        rows.push(IneqRow::new(
            QVector::new(r.a.into_iter().map(|q| q.0).collect()),
            r.b.0,
        ));
    }
    HPolyhedron::new(doc.dim, rows).map_err(|e| semantic(e.to_string()))
}

pub fn parse_linmap(src: &str) -> Result<LinMap, ParseError> {
    let doc: MapDoc = serde_json::from_str(src).map_err(|e| json_error(src, e))?;
    if doc.data.len() != doc.rows {
        return Err(semantic(format!(
            "expected {} matrix rows, found {}",
            doc.rows,
            doc.data.len()
        )));
    }
    let mut data = Vec::with_capacity(doc.rows * doc.cols);
    for (k, r) in doc.data.into_iter().enumerate() {
        if r.len() != doc.cols {
            return Err(semantic(format!(
                "matrix row {k}: expected {} entries, found {}",
                doc.cols,
                r.len()
            )));
        }
        data.extend(r.into_iter().map(|q| q.0));
    }
    QMatrix::new(doc.rows, doc.cols, data)
        .map(LinMap::new)
        .map_err(|e| semantic(e.to_string()))
}

/// Comma-separated rationals, no whitespace. The empty string is the point
/// of the zero-dimensional space.
pub fn parse_point(src: &str) -> Result<QVector, ParseError> {
    if src.is_empty() {
        return Ok(QVector::zeros(0));
    }
    let mut entries = Vec::new();
    let mut offset = 0;
    for tok in src.split(',') {
        let q = parse_rational(tok).map_err(|e| ParseError {
            message: format!("{e} (token \"{tok}\")"),
            offset: Some(offset),
        })?;
        entries.push(q);
        offset += tok.len() + 1;
    }
    Ok(QVector::new(entries))
}

fn quote(q: &Rational) -> String {
    format!("\"{}\"", format_rational(q))
}

fn row_json(row: &IneqRow) -> String {
    let a: Vec<String> = row.a.entries().iter().map(quote).collect();
    format!("{{\"a\": [{}], \"b\": {}}}", a.join(", "), quote(&row.b))
}

fn rows_json(rows: &[String]) -> String {
    if rows.is_empty() {
        "[]".to_string()
    } else {
        format!("[\n    {}\n  ]", rows.join(",\n    "))
    }
}

/// Canonical document for an already-normalized polyhedron. Rows are written
/// in stored order, one per line.
pub fn write_polyhedron(p: &HPolyhedron) -> String {
    let rows: Vec<String> = p.rows().iter().map(row_json).collect();
    format!("{{\n  \"dim\": {},\n  \"rows\": {}\n}}\n", p.dim(), rows_json(&rows))
}

/// The polyhedron document with an extra `certificates` array aligned with
/// `rows`. Still readable by [`parse_polyhedron`].
pub fn write_certified(c: &Certified) -> String {
    let rows: Vec<String> = c.polyhedron.rows().iter().map(row_json).collect();
    let certs: Vec<String> = c
        .polyhedron
        .rows()
        .iter()
        .zip(&c.certificates)
        .map(|(row, cert)| {
            let mults: Vec<String> = cert
                .multipliers
                .iter()
                .map(|(k, q)| format!("{{\"index\": {k}, \"coeff\": {}}}", quote(q)))
                .collect();
            format!(
                "{{\"row\": {}, \"multipliers\": [{}]}}",
                row_json(row),
                mults.join(", ")
            )
        })
        .collect();
    format!(
        "{{\n  \"dim\": {},\n  \"rows\": {},\n  \"certificates\": {}\n}}\n",
        c.polyhedron.dim(),
        rows_json(&rows),
        rows_json(&certs)
    )
}

pub fn write_linmap(t: &LinMap) -> String {
    let m = &t.matrix;
    let rows: Vec<String> = (0..m.rows())
        .map(|r| {
            let e: Vec<String> = m.row(r).entries().iter().map(quote).collect();
            format!("[{}]", e.join(", "))
        })
        .collect();
    format!(
        "{{\n  \"rows\": {},\n  \"cols\": {},\n  \"data\": {}\n}}\n",
        m.rows(),
        m.cols(),
        rows_json(&rows)
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ratio;

    #[test]
    fn polyhedron_round_trip() {
        let src = r#"{"dim": 2, "rows": [{"a": ["2", "0"], "b": "2"}, {"a": ["-1/2", "1"], "b": "0"}]}"#;
        let p = parse_polyhedron(src).unwrap();
        // order and scaling preserved on input
        assert_eq!(p.rows()[0], IneqRow::new(QVector::from_i64(&[2, 0]), crate::arith::int(2)));
        assert_eq!(p.rows()[1].a[0], ratio(-1, 2));
        let out = write_polyhedron(&p.normalize_rows());
        assert_eq!(
            out,
            "{\n  \"dim\": 2,\n  \"rows\": [\n    {\"a\": [\"-1\", \"2\"], \"b\": \"0\"},\n    {\"a\": [\"1\", \"0\"], \"b\": \"1\"}\n  ]\n}\n"
        );
        assert_eq!(parse_polyhedron(&out).unwrap(), p.normalize_rows());
    }

    #[test]
    fn whole_space_document() {
        let out = write_polyhedron(&HPolyhedron::whole_space(3));
        assert_eq!(out, "{\n  \"dim\": 3,\n  \"rows\": []\n}\n");
        assert_eq!(parse_polyhedron(&out).unwrap(), HPolyhedron::whole_space(3));
    }

    #[test]
    fn bad_rational_reports_token_and_offset() {
        let src = r#"{"dim": 1, "rows": [{"a": ["1/0"], "b": "1"}]}"#;
        let err = parse_polyhedron(src).unwrap_err();
        assert!(err.message.contains("1/0"), "{err}");
        assert_eq!(err.offset, Some(src.find("\"1/0\"").unwrap()));
    }

    #[test]
    fn numeric_literal_is_rejected() {
        let err = parse_polyhedron(r#"{"dim": 1, "rows": [{"a": [1], "b": "1"}]}"#).unwrap_err();
        assert!(err.offset.is_some());
        assert!(err.message.contains("rational string"), "{err}");
    }

    #[test]
    fn row_length_checked() {
        let err = parse_polyhedron(r#"{"dim": 2, "rows": [{"a": ["1"], "b": "1"}]}"#).unwrap_err();
        assert!(err.message.contains("row 0"));
    }

    #[test]
    fn linmap_parse_and_write() {
        let src = r#"{"rows": 1, "cols": 2, "data": [["1", "1/3"]]}"#;
        let t = parse_linmap(src).unwrap();
        assert_eq!(t.matrix.get(0, 1), &ratio(1, 3));
        assert_eq!(parse_linmap(&write_linmap(&t)).unwrap(), t);
        assert!(parse_linmap(r#"{"rows": 2, "cols": 1, "data": [["1"]]}"#).is_err());
    }

    #[test]
    fn points() {
        assert_eq!(parse_point("1/2,0").unwrap(), QVector::new(vec![ratio(1, 2), ratio(0, 1)]));
        assert_eq!(parse_point("").unwrap().dim(), 0);
        let err = parse_point("1,x,2").unwrap_err();
        assert_eq!(err.offset, Some(2));
        assert!(parse_point("1, 2").is_err());
    }
}
