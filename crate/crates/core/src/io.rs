//! Reading and writing numeric CSV/TSV tables.

use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{DrlsError, Result};
use crate::matrix::DenseMatrix;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TableFormat {
    #[default]
    Csv,
    Tsv,
}

impl TableFormat {
    fn delimiter(self) -> u8 {
        match self {
            TableFormat::Csv => b',',
            TableFormat::Tsv => b'\t',
        }
    }
}

impl FromStr for TableFormat {
    type Err = DrlsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(TableFormat::Csv),
            "tsv" => Ok(TableFormat::Tsv),
            other => Err(DrlsError::InvalidInput(format!("unknown table format '{other}'"))),
        }
    }
}

impl fmt::Display for TableFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TableFormat::Csv => "csv",
            TableFormat::Tsv => "tsv",
        })
    }
}

/// A matrix with rows as samples and columns as features.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub matrix: DenseMatrix,
    pub feature_names: Option<Vec<String>>,
}

fn parse_error(line: u64, col: Option<usize>, message: impl Into<String>) -> DrlsError {
    DrlsError::Parse {
        line: line as usize,
        col,
        message: message.into(),
    }
}

/// Parses a table; a first row with any non-numeric cell is taken as a header.
pub fn parse_table<R: Read>(reader: R, format: TableFormat) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .delimiter(format.delimiter())
        .from_reader(reader);

    let mut feature_names = None;
    let mut entries = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(line, None, e.to_string())
        })?;
        let line = record.position().map_or(i as u64 + 1, |p| p.line());
        if i == 0 && record.iter().any(|cell| cell.parse::<f64>().is_err()) {
            feature_names = Some(record.iter().map(str::to_string).collect::<Vec<_>>());
            width = Some(record.len());
            continue;
        }
        match width {
            Some(w) if w != record.len() => {
                return Err(parse_error(
                    line,
                    None,
                    format!("expected {w} fields, found {}", record.len()),
                ));
            }
            _ => width = Some(record.len()),
        }
        for (j, cell) in record.iter().enumerate() {
            let value: f64 = cell
                .parse()
                .map_err(|_| parse_error(line, Some(j + 1), format!("'{cell}' is not a number")))?;
            if !value.is_finite() {
                return Err(parse_error(line, Some(j + 1), format!("'{cell}' is not finite")));
            }
            entries.push(value);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(parse_error(1, None, "no numeric rows"));
    }
    let cols = width.unwrap_or(0);
    Ok(Table {
        matrix: DenseMatrix::from_row_major(rows, cols, entries)?,
        feature_names,
    })
}

pub fn ingest_table(path: &Path, format: TableFormat) -> Result<Table> {
    let file = File::open(path).map_err(|e| DrlsError::Io(format!("{}: {e}", path.display())))?;
    parse_table(file, format)
}

pub fn ingest_matrix(path: &Path, format: TableFormat) -> Result<DenseMatrix> {
    Ok(ingest_table(path, format)?.matrix)
}

/// Writes every entry with round-trip precision.
pub fn write_table<W: Write>(writer: W, matrix: &DenseMatrix, format: TableFormat) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .delimiter(format.delimiter())
        .from_writer(writer);
    let io = |e: csv::Error| DrlsError::Io(e.to_string());
    for i in 0..matrix.rows() {
        wtr.write_record((0..matrix.cols()).map(|j| format!("{:?}", matrix.get(i, j))))
            .map_err(io)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_matrix(path: &Path, matrix: &DenseMatrix, format: TableFormat) -> Result<()> {
    let file = File::create(path).map_err(|e| DrlsError::Io(format!("{}: {e}", path.display())))?;
    write_table(file, matrix, format)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Table> {
        parse_table(text.as_bytes(), TableFormat::Csv)
    }

    #[test]
    fn plain_and_header() {
        let t = parse("1,2\n3,4").unwrap();
        assert_eq!(t.matrix.to_row_major(), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(t.feature_names, None);
        let t = parse("f1,f2\n1,2").unwrap();
        assert_eq!(t.matrix.shape(), (1, 2));
        assert_eq!(t.feature_names, Some(vec!["f1".into(), "f2".into()]));
    }

    #[test]
    fn crlf_and_tabs() {
        let t = parse("1,2\r\n3,4\r\n").unwrap();
        assert_eq!(t.matrix.shape(), (2, 2));
        let t = parse_table("a\tb\n1\t-2.5e1\n".as_bytes(), TableFormat::Tsv).unwrap();
        assert_eq!(t.matrix.to_row_major(), vec![1.0, -25.0]);
    }

    #[test]
    fn error_positions() {
        assert!(matches!(parse("1,2\n3"), Err(DrlsError::Parse { line: 2, col: None, .. })));
        assert!(matches!(
            parse("1,2\n3,x\n"),
            Err(DrlsError::Parse { line: 2, col: Some(2), .. })
        ));
        assert!(matches!(parse(""), Err(DrlsError::Parse { .. })));
        assert!(matches!(parse("a,b\n"), Err(DrlsError::Parse { .. })));
        assert!(matches!(parse("1,2\nNaN,1\n"), Err(DrlsError::Parse { line: 2, col: Some(1), .. })));
    }

    #[test]
    fn write_round_trips() {
        let m = DenseMatrix::from_row_major(2, 3, vec![0.1, -2.0, 1e-300, 3.0, 4.5, 1.0 / 3.0]).unwrap();
        let mut buf = Vec::new();
        write_table(&mut buf, &m, TableFormat::Tsv).unwrap();
        let back = parse_table(buf.as_slice(), TableFormat::Tsv).unwrap();
        assert_eq!(back.matrix, m);
    }
}
