//! CSV tables with `#`-prefixed metadata lines.

use std::io::Write;

use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(i64::from(v))
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// 17 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub metadata: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Columns whose values change from run to run (timings).
    pub nondeterministic: Vec<String>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            ..Self::default()
        }
    }

    pub fn meta(&mut self, line: impl Into<String>) -> &mut Self {
        self.metadata.push(line.into());
        self
    }

    pub fn mark_nondeterministic(&mut self, column: &str) -> &mut Self {
        self.nondeterministic.push(column.to_string());
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# version: cos-harness {}", env!("CARGO_PKG_VERSION"))?;
        for line in &self.metadata {
            writeln!(out, "# {line}")?;
        }
        if !self.nondeterministic.is_empty() {
            writeln!(out, "# nondeterministic columns: {}", self.nondeterministic.join(","))?;
        }
        let mut csv = csv::Writer::from_writer(out);
        csv.write_record(&self.header)?;
        for row in &self.rows {
            csv.write_record(row.iter().map(Cell::render))?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// The CSV with nondeterministic columns removed.
    pub fn deterministic_csv(&self) -> Result<String> {
        let keep: Vec<usize> = (0..self.header.len())
            .filter(|&i| !self.nondeterministic.contains(&self.header[i]))
            .collect();
        let stripped = Table {
            metadata: self.metadata.clone(),
            header: keep.iter().map(|&i| self.header[i].clone()).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| keep.iter().map(|&i| r[i].clone()).collect())
                .collect(),
            nondeterministic: Vec::new(),
        };
        stripped.to_csv_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let mut t = Table::new(&["N", "error", "wall_ms"]);
        t.meta("model = bs").mark_nondeterministic("wall_ms");
        t.push(vec![16usize.into(), 0.1.into(), 1.5.into()]);
        let s = t.to_csv_string().unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert!(lines[0].starts_with("# version: cos-harness"));
        assert_eq!(lines[1], "# model = bs");
        assert_eq!(lines[2], "# nondeterministic columns: wall_ms");
        assert_eq!(lines[3], "N,error,wall_ms");
        assert_eq!(lines[4], "16,1.0000000000000001e-1,1.5000000000000000e0");
        let d = t.deterministic_csv().unwrap();
        assert!(d.lines().any(|l| l == "16,1.0000000000000001e-1"));
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, 9.743370825229, 1e-300, -2.5e17] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
    }
}
