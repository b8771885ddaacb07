use std::io::Write;

use serde::Serialize;

use crate::error::CliError;

/// A named column with its physical unit (`1` for dimensionless).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

/// One output table; written as one CSV file named after `name`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>) -> Self {
        Table {
            name: name.into(),
            columns: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn column(mut self, name: impl Into<String>, unit: impl Into<String>) -> Self {
        self.columns.push(Column {
            name: name.into(),
            unit: unit.into(),
        });
        self
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width of table `{}`", self.name);
        self.rows.push(row);
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Values of the column called `name`.
    pub fn values(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.index(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    /// RFC-4180 CSV with a `name [unit]` header row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
        w.write_record(self.columns.iter().map(|c| format!("{} [{}]", c.name, c.unit)))?;
        for row in &self.rows {
            w.write_record(row.iter().map(|&v| format_value(v)))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(buf)
    }
}

/// Shortest round-trip representation; stable across runs and platforms.
pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_owned()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_owned()
    } else {
        format!("{v:?}")
    }
}

pub fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_carries_units() {
        let mut t = Table::new("demo").column("step", "collisions").column("p_0", "1");
        t.push(vec![0.0, 0.5]);
        t.push(vec![1.0, f64::INFINITY]);
        let text = String::from_utf8(t.to_csv_bytes().unwrap()).unwrap();
        assert_eq!(text, "step [collisions],p_0 [1]\r\n0.0,0.5\r\n1.0,inf\r\n");
    }

    #[test]
    fn values_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-17, 7.86e-5] {
            assert_eq!(format_value(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn quoting_follows_rfc4180() {
        let t = Table::new("q").column("a,b", "\"x\"");
        let text = String::from_utf8(t.to_csv_bytes().unwrap()).unwrap();
        assert_eq!(text, "\"a,b [\"\"x\"\"]\"\r\n");
    }
}
