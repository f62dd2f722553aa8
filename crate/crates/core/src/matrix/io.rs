//! Matrix files.
//!
//! CSV: a literal `rows,cols` line, a line with the two dimensions, then one
//! line per row. Readers also accept files that start directly at the
//! dimension line.
//!
//! Binary: the five bytes `EPSK1`, rows and cols as little-endian `u64`, then
//! `rows·cols` little-endian `f64` values in row-major order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

pub const BINARY_MAGIC: &[u8; 5] = b"EPSK1";
const CSV_HEADER: &str = "rows,cols";

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

pub fn write_csv_to<W: Write>(mut out: W, x: ArrayView2<'_, f64>) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    writeln!(out, "{},{}", x.nrows(), x.ncols())?;
    for row in x.rows() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn read_csv_from<R: BufRead>(input: R) -> Result<Array2<f64>> {
    let mut lines = input
        .lines()
        .map(|l| l.map(|s| s.trim().to_string()))
        .filter(|l| l.as_ref().map_or(true, |s| !s.is_empty()));
    let mut next = || -> Result<Option<String>> { lines.next().transpose().map_err(Error::from) };
    let mut first = next()?.ok_or_else(|| parse_err("empty matrix file"))?;
    if first.eq_ignore_ascii_case(CSV_HEADER) {
        first = next()?.ok_or_else(|| parse_err("missing dimension line"))?;
    }
    let dims: Vec<usize> = first
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| parse_err(format!("bad dimension line `{first}`: {e}")))?;
    let [rows, cols] = dims[..] else {
        return Err(parse_err(format!(
            "dimension line `{first}` needs two fields"
        )));
    };
    let mut data = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let line = next()?.ok_or_else(|| parse_err(format!("expected {rows} rows, found {r}")))?;
        let before = data.len();
        for field in line.split(',') {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|e| parse_err(format!("row {r}: bad value `{field}`: {e}")))?;
            if !v.is_finite() {
                return Err(parse_err(format!("row {r}: non-finite value `{field}`")));
            }
            data.push(v);
        }
        if data.len() - before != cols {
            return Err(parse_err(format!(
                "row {r} has {} fields, expected {cols}",
                data.len() - before
            )));
        }
    }
    if next()?.is_some() {
        return Err(parse_err(format!("more than {rows} rows")));
    }
    Array2::from_shape_vec((rows, cols), data).map_err(|e| parse_err(e.to_string()))
}

pub fn write_binary_to<W: Write>(mut out: W, x: ArrayView2<'_, f64>) -> Result<()> {
    out.write_all(BINARY_MAGIC)?;
    out.write_all(&(x.nrows() as u64).to_le_bytes())?;
    out.write_all(&(x.ncols() as u64).to_le_bytes())?;
    for v in x.iter() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary_from<R: Read>(mut input: R) -> Result<Array2<f64>> {
    let mut magic = [0u8; 5];
    input
        .read_exact(&mut magic)
        .map_err(|_| parse_err("truncated binary header"))?;
    if &magic != BINARY_MAGIC {
        return Err(parse_err("not an EPSK1 matrix file"));
    }
    let mut word = [0u8; 8];
    let mut read_u64 = |input: &mut R| -> Result<u64> {
        input
            .read_exact(&mut word)
            .map_err(|_| parse_err("truncated binary header"))?;
        Ok(u64::from_le_bytes(word))
    };
    let rows = read_u64(&mut input)? as usize;
    let cols = read_u64(&mut input)? as usize;
    let len = rows
        .checked_mul(cols)
        .ok_or_else(|| parse_err("matrix dimensions overflow"))?;
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() != len * 8 {
        return Err(parse_err(format!(
            "expected {} payload bytes, found {}",
            len * 8,
            bytes.len()
        )));
    }
    let data: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Array2::from_shape_vec((rows, cols), data).map_err(|e| parse_err(e.to_string()))
}

pub fn write_csv(path: impl AsRef<Path>, x: ArrayView2<'_, f64>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_csv_to(&mut out, x)?;
    out.flush()?;
    Ok(())
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Array2<f64>> {
    read_csv_from(BufReader::new(File::open(path)?))
}

pub fn write_binary(path: impl AsRef<Path>, x: ArrayView2<'_, f64>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_binary_to(&mut out, x)?;
    out.flush()?;
    Ok(())
}

pub fn read_binary(path: impl AsRef<Path>) -> Result<Array2<f64>> {
    read_binary_from(BufReader::new(File::open(path)?))
}

/// Picks the format from the extension: `.csv` is text, anything else binary.
pub fn write_matrix(path: impl AsRef<Path>, x: ArrayView2<'_, f64>) -> Result<()> {
    if is_csv(path.as_ref()) {
        write_csv(path, x)
    } else {
        write_binary(path, x)
    }
}

/// Sniffs the magic bytes, falling back to CSV.
pub fn read_matrix(path: impl AsRef<Path>) -> Result<Array2<f64>> {
    let mut head = [0u8; 5];
    let n = File::open(path.as_ref())?.read(&mut head)?;
    if n == 5 && &head == BINARY_MAGIC {
        read_binary(path)
    } else {
        read_csv(path)
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn csv_round_trip_is_exact() {
        let x = array![[0.1, -2.5e-17, 3.0], [1.0 / 3.0, f64::MAX, -0.0]];
        let mut buf = Vec::new();
        write_csv_to(&mut buf, x.view()).unwrap();
        assert!(buf.starts_with(b"rows,cols\n2,3\n"));
        let back = read_csv_from(&buf[..]).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn csv_without_header_line() {
        let back = read_csv_from(&b"1,2\n4,5\n"[..]).unwrap();
        assert_eq!(back, array![[4.0, 5.0]]);
    }

    #[test]
    fn csv_rejects_malformed() {
        for text in [
            "",
            "rows,cols\n",
            "2,2\n1,2\n",
            "1,2\n1\n",
            "1,1\nx\n",
            "1,1\n1\n2\n",
            "1,1\nNaN\n",
        ] {
            assert!(
                matches!(read_csv_from(text.as_bytes()), Err(Error::Parse(_))),
                "{text:?}"
            );
        }
    }

    #[test]
    fn binary_round_trip_and_errors() {
        let x = array![[1.5, -2.0], [f64::MIN_POSITIVE, 7.0], [0.0, 1e300]];
        let mut buf = Vec::new();
        write_binary_to(&mut buf, x.view()).unwrap();
        assert_eq!(buf.len(), 5 + 16 + 6 * 8);
        assert_eq!(read_binary_from(&buf[..]).unwrap(), x);
        assert!(read_binary_from(&buf[..buf.len() - 1]).is_err());
        assert!(read_binary_from(&b"EPSK2"[..]).is_err());
    }
}
