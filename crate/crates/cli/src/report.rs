//! Deterministic report serialization.
//!
//! Object keys are emitted in sorted order (serde_json's default map) and every float
//! is written in scientific notation with 17 significant digits, so identical inputs
//! give byte-identical files.

use std::io::{self, Write};

use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Map, Value};

use levi_core::invariants::LeviData;
use levi_core::{CVector, ToleranceConfig, LeviSign, THETA_CONVENTION};

/// Pretty printer with fixed float formatting.
pub struct FixedFloatFormatter<'a> {
    inner: PrettyFormatter<'a>,
}

impl Default for FixedFloatFormatter<'_> {
    fn default() -> Self {
        Self {
            inner: PrettyFormatter::with_indent(b"  "),
        }
    }
}

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

impl Formatter for FixedFloatFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_float(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object_value(writer)
    }
}

pub fn to_json_bytes(value: &Value) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedFloatFormatter::default());
    serde::Serialize::serialize(value, &mut ser).expect("serializing a Value into memory cannot fail");
    out.push(b'\n');
    out
}

pub fn point_json(p: &CVector) -> Value {
    Value::Array(p.iter().map(|z| json!([z.re, z.im])).collect())
}

pub fn sign_label(sign: LeviSign) -> &'static str {
    match sign {
        LeviSign::Positive => "+",
        LeviSign::Negative => "-",
    }
}

pub fn tolerances_json(tol: &ToleranceConfig) -> Value {
    json!({
        "eig_zero_tol": tol.eig_zero_tol,
        "rank_tol": tol.rank_tol,
        "newton_tol": tol.newton_tol,
        "newton_max_iter": tol.newton_max_iter,
        "grad_min": tol.grad_min,
        "stratum_tol": tol.stratum_tol,
    })
}

pub fn convention_json(sign: LeviSign, tol: &ToleranceConfig) -> Value {
    json!({
        "theta": THETA_CONVENTION,
        "sign": sign_label(sign),
        "tolerances": tolerances_json(tol),
    })
}

/// `{point, residual, eigenvalues, A, nullity}`.
pub fn levi_record(data: &LeviData) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("point".into(), point_json(&data.point.point));
    m.insert("residual".into(), json!(data.point.residual));
    m.insert("eigenvalues".into(), json!(data.eigenvalues));
    m.insert("A".into(), json!(data.coeffs));
    m.insert("nullity".into(), json!(data.nullity));
    m
}

/// Flat table for CSV export.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("writing to memory cannot fail");
        for row in &self.rows {
            w.write_record(row).expect("writing to memory cannot fail");
        }
        w.into_inner().expect("flushing to memory cannot fail")
    }
}

pub fn coordinate_header(dim: usize) -> Vec<String> {
    (1..=dim).flat_map(|j| [format!("re_z{j}"), format!("im_z{j}")]).collect()
}

pub fn coordinate_cells(p: &CVector) -> Vec<String> {
    p.iter().flat_map(|z| [format_float(z.re), format_float(z.im)]).collect()
}

/// Per-point Levi records: coordinates, residual, eigenvalues, `A_k`, nullity.
pub fn levi_table(dim: usize, records: &[&LeviData]) -> Table {
    let n = dim - 1;
    let mut header = coordinate_header(dim);
    header.push("residual".into());
    header.extend((1..=n).map(|j| format!("eig_{j}")));
    header.extend((0..n).map(|k| format!("A_{k}")));
    header.push("nullity".into());
    let rows = records
        .iter()
        .map(|d| {
            let mut row = coordinate_cells(&d.point.point);
            row.push(format_float(d.point.residual));
            row.extend(d.eigenvalues.iter().map(|v| format_float(*v)));
            row.extend(d.coeffs.iter().map(|v| format_float(*v)));
            row.push(d.nullity.to_string());
            row
        })
        .collect();
    Table { header, rows }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_significant_digits() {
        assert_eq!(format_float(1.0), "1.0000000000000000e0");
        assert_eq!(format_float(-0.1), "-1.0000000000000001e-1");
        let v = json!({"b": 0.5, "a": [1e-300, 2]});
        let text = String::from_utf8(to_json_bytes(&v)).unwrap();
        assert_eq!(text, "{\n  \"a\": [\n    1.0000000000000000e-300,\n    2\n  ],\n  \"b\": 5.0000000000000000e-1\n}\n");
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["b"], json!(0.5));
    }

    #[test]
    fn csv_quotes_nothing_for_plain_cells() {
        let t = Table {
            header: vec!["a".into(), "b".into()],
            rows: vec![vec!["1".into(), format_float(0.25)]],
        };
        assert_eq!(String::from_utf8(t.to_csv()).unwrap(), "a,b\n1,2.5000000000000000e-1\n");
    }
}
