use std::fmt::Write as _;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::quadrature::QuadResult;

/// One scalar in a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Field {
    Num(f64),
    Count(u64),
    Flag(bool),
    Text(String),
    Missing,
}

impl Field {
    fn render(&self) -> String {
        match self {
            Field::Num(x) => format!("{x}"),
            Field::Count(k) => k.to_string(),
            Field::Flag(b) => b.to_string(),
            Field::Text(s) => s.clone(),
            Field::Missing => "-".to_string(),
        }
    }
}

impl From<f64> for Field {
    fn from(x: f64) -> Self {
        Field::Num(x)
    }
}

impl From<usize> for Field {
    fn from(k: usize) -> Self {
        Field::Count(k as u64)
    }
}

impl From<bool> for Field {
    fn from(b: bool) -> Self {
        Field::Flag(b)
    }
}

impl From<String> for Field {
    fn from(s: String) -> Self {
        Field::Text(s)
    }
}

impl<T: Into<Field>> From<Option<T>> for Field {
    fn from(x: Option<T>) -> Self {
        x.map_or(Field::Missing, Into::into)
    }
}

/// A row of the `table` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub section: String,
    pub quantity: String,
    pub closed_form: f64,
    pub numeric: f64,
    pub gap: f64,
    pub seconds: f64,
}

/// Ordered key/value output of a subcommand, rendered as aligned text or
/// as a JSON object with the same keys in the same order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    fields: Vec<(&'static str, Field)>,
    rows: Option<Vec<Row>>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &'static str, value: impl Into<Field>) -> Self {
        self.fields.push((key, value.into()));
        self
    }

    /// `value`, `abs_error`, `evaluations`, `converged` of `r`.
    pub fn quad(r: &QuadResult) -> Self {
        Self::new()
            .with("value", r.value)
            .with("abs_error", r.abs_error)
            .with("evaluations", r.evaluations)
            .with("converged", r.converged)
    }

    pub fn with_rows(mut self, rows: Vec<Row>) -> Self {
        self.rows = Some(rows);
        self
    }

    pub fn get(&self, key: &str) -> Option<&Field> {
        self.fields.iter().find(|(k, _)| *k == key).map(|(_, v)| v)
    }

    pub fn keys(&self) -> Vec<&'static str> {
        let mut keys: Vec<_> = self.fields.iter().map(|(k, _)| *k).collect();
        if self.rows.is_some() {
            keys.push("rows");
        }
        keys
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports contain only plain values")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(rows) = &self.rows {
            let header = ["section", "quantity", "closed form", "numeric", "gap", "seconds"];
            let body: Vec<[String; 6]> = rows
                .iter()
                .map(|r| {
                    [
                        r.section.clone(),
                        r.quantity.clone(),
                        format!("{:.12}", r.closed_form),
                        format!("{:.12}", r.numeric),
                        format!("{:.2e}", r.gap),
                        format!("{:.3}", r.seconds),
                    ]
                })
                .collect();
            let mut widths = header.map(str::len);
            for line in &body {
                for (w, cell) in widths.iter_mut().zip(line) {
                    *w = (*w).max(cell.chars().count());
                }
            }
            let mut push = |cells: &[String]| {
                let line: Vec<String> = cells.iter().zip(widths).map(|(c, w)| format!("{c:<w$}")).collect();
                let _ = writeln!(out, "{}", line.join("  ").trim_end());
            };
            push(&header.map(String::from));
            for line in &body {
                push(line);
            }
        }
        let width = self.fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in &self.fields {
            let _ = writeln!(out, "{k:<width$}  {}", v.render());
        }
        out
    }
}

impl Serialize for Report {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.fields.len() + usize::from(self.rows.is_some())))?;
        for (k, v) in &self.fields {
            map.serialize_entry(k, v)?;
        }
        if let Some(rows) = &self.rows {
            map.serialize_entry("rows", rows)?;
        }
        map.end()
    }
}
