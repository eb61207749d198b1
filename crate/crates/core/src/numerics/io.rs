//! Plain-text matrix format: a `rows,cols` header line followed by one
//! comma-separated line of decimal entries per row. Values are written with
//! Rust's shortest round-trip float formatting, so writing is byte-stable
//! for identical inputs and reading recovers the exact values.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

pub fn write_matrix_csv<W: Write>(m: &DenseMatrix, out: &mut W) -> Result<()> {
    writeln!(out, "{},{}", m.rows(), m.cols())?;
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|x| format!("{x}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn matrix_to_csv_string(m: &DenseMatrix) -> String {
    let mut buf = Vec::new();
    write_matrix_csv(m, &mut buf).expect("write to Vec cannot fail");
    String::from_utf8(buf).expect("csv output is ascii")
}

pub fn read_matrix_csv<R: BufRead>(input: R) -> Result<DenseMatrix> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty input".into()))??;
    let (rows, cols) = parse_header(&header)?;
    let mut data = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("expected {rows} rows, got {r}")))??;
        let mut count = 0;
        for tok in line.split(',') {
            let v: f64 = tok
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad entry {tok:?} in row {r}")))?;
            data.push(v);
            count += 1;
        }
        if count != cols {
            return Err(Error::Parse(format!("row {r} has {count} entries, expected {cols}")));
        }
    }
    DenseMatrix::from_flat(rows, cols, data)
}

pub fn matrix_from_csv_str(s: &str) -> Result<DenseMatrix> {
    read_matrix_csv(s.as_bytes())
}

fn parse_header(line: &str) -> Result<(usize, usize)> {
    let mut it = line.split(',');
    let rows = it
        .next()
        .and_then(|t| t.trim().parse().ok())
        .ok_or_else(|| Error::Parse(format!("bad header {line:?}")))?;
    let cols = it
        .next()
        .and_then(|t| t.trim().parse().ok())
        .ok_or_else(|| Error::Parse(format!("bad header {line:?}")))?;
    if it.next().is_some() {
        return Err(Error::Parse(format!("bad header {line:?}")));
    }
    Ok((rows, cols))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_is_exactly_as_documented() {
        let m = DenseMatrix::from_rows(&[vec![1.0, 2.5], vec![-0.125, 4.0]]).unwrap();
        assert_eq!(matrix_to_csv_string(&m), "2,2\n1,2.5\n-0.125,4\n");
    }

    #[test]
    fn round_trip_is_exact() {
        let m = DenseMatrix::from_rows(&[
            vec![std::f64::consts::PI, 1e-17, -3.25],
            vec![6.02e23, -0.1, 7.0],
        ])
        .unwrap();
        let s = matrix_to_csv_string(&m);
        let back = matrix_from_csv_str(&s).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(matrix_from_csv_str("").is_err());
        assert!(matrix_from_csv_str("2,2\n1,2\n3").is_err());
        assert!(matrix_from_csv_str("2\n1\n2").is_err());
        assert!(matrix_from_csv_str("1,2\n1,x").is_err());
    }
}
