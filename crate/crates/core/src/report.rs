//! CSV tables: `#` metadata lines, one header row, then data rows with
//! numbers in plain decimal notation at 12 significant digits.

use std::io::Write;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format_sig12(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// `v` with 12 significant digits and no exponent.
pub fn format_sig12(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v.is_nan() { "NaN".into() } else if v == 0.0 { "0".into() } else { format!("{v}") };
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = |m: i32| (11 - m).max(0) as usize;
    let text = format!("{:.*}", decimals(magnitude), v);
    // rounding may carry into a new leading digit, e.g. 9.9999999999996
    let reparsed: f64 = text.parse().unwrap_or(v);
    let carried = reparsed.abs().log10().floor() as i32;
    if carried > magnitude {
        format!("{:.*}", decimals(carried), v)
    } else {
        text
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub metadata: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table { metadata: Vec::new(), header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| &r[idx]).collect())
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e: std::io::Error| Error::Io(e.to_string());
        for line in &self.metadata {
            write!(out, "# {line}\r\n").map_err(io)?;
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
        let csv_err = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(&self.header).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(csv_err)?;
        }
        w.flush().map_err(io)
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_sig12(0.5), "0.500000000000");
        assert_eq!(format_sig12(0.44049328506521257), "0.440493285065");
        assert_eq!(format_sig12(123.456), "123.456000000");
        assert_eq!(format_sig12(1.5e-7), "0.000000150000000000");
        assert_eq!(format_sig12(9.99999999999996), "10.0000000000");
        assert_eq!(format_sig12(-2.0), "-2.00000000000");
        assert_eq!(format_sig12(1e14), "100000000000000");
        assert_eq!(format_sig12(0.0), "0");
    }

    #[test]
    fn metadata_precedes_header_and_fields_are_quoted() {
        let mut t = Table::new(["curve", "value"]);
        t.metadata.push("kind=demo".into());
        t.push(vec!["a,b".into(), 1.0.into()]);
        assert_eq!(t.to_csv_string(), "# kind=demo\r\ncurve,value\r\n\"a,b\",1.00000000000\r\n");
    }
}
