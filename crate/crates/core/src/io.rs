//! File formats: spec JSON, CSV distribution tables, little-endian f64
//! sample files and `lo:hi:n` grid strings.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::table::{linspace, DistributionTable};
use crate::weights::{GammaSumSpec, SpecFile};

/// Parses a spec JSON document.
pub fn parse_spec(json: &str) -> Result<GammaSumSpec<f64>> {
    let file: SpecFile = serde_json::from_str(json).map_err(|e| Error::Io(format!("malformed spec JSON: {e}")))?;
    file.to_spec()
}

pub fn load_spec(path: &Path) -> Result<GammaSumSpec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_spec(&text)
}

/// Parses `lo:hi:n` into n equally spaced points, endpoints included.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::Grid(format!("grid must be lo:hi:n, got {s:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !lo.is_finite() || !hi.is_finite() {
        return Err(bad());
    }
    linspace(lo, hi, n)
}

/// Writes equal-length columns under a header row. Values use the shortest
/// representation that parses back to the same f64.
pub fn write_columns_csv<W: Write>(headers: &[&str], columns: &[&[f64]], w: W) -> Result<()> {
    if headers.len() != columns.len() || columns.iter().any(|c| c.len() != columns[0].len()) {
        return Err(Error::Io("CSV columns must match the header and each other in length".into()));
    }
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    let mut out = csv::Writer::from_writer(w);
    out.write_record(headers).map_err(csv_err)?;
    let rows = columns.first().map_or(0, |c| c.len());
    for i in 0..rows {
        out.write_record(columns.iter().map(|c| c[i].to_string())).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes columns x, cdf[, pdf].
pub fn write_table_csv<W: Write>(table: &DistributionTable<f64>, w: W) -> Result<()> {
    match table.pdf() {
        Some(p) => write_columns_csv(&["x", "cdf", "pdf"], &[table.grid(), table.cdf(), p], w),
        None => write_columns_csv(&["x", "cdf"], &[table.grid(), table.cdf()], w),
    }
}

pub fn save_table_csv(table: &DistributionTable<f64>, path: &Path) -> Result<()> {
    write_table_csv(table, BufWriter::new(File::create(path)?))
}

/// Reads a table written by [`write_table_csv`]; an optional third column
/// is the density.
pub fn read_table_csv<R: Read>(r: R) -> Result<DistributionTable<f64>> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers().map_err(|e| Error::Io(e.to_string()))?.clone();
    let cols: Vec<&str> = headers.iter().map(str::trim).collect();
    let has_pdf = match cols.as_slice() {
        ["x", "cdf"] => false,
        ["x", "cdf", "pdf"] => true,
        _ => return Err(Error::Io(format!("expected header x,cdf[,pdf], got {}", cols.join(",")))),
    };
    let (mut grid, mut cdf, mut pdf) = (Vec::new(), Vec::new(), Vec::new());
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
        let field = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| Error::Io(format!("row {}: bad value in column {}", line + 2, i + 1)))
        };
        grid.push(field(0)?);
        cdf.push(field(1)?);
        if has_pdf {
            pdf.push(field(2)?);
        }
    }
    DistributionTable::new(grid, cdf, has_pdf.then_some(pdf))
}

pub fn load_table_csv(path: &Path) -> Result<DistributionTable<f64>> {
    read_table_csv(BufReader::new(File::open(path)?))
}

/// Raw little-endian f64 values, no header.
pub fn write_samples<W: Write>(values: &[f64], w: W) -> Result<()> {
    let mut w = BufWriter::new(w);
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_samples(values: &[f64], path: &Path) -> Result<()> {
    write_samples(values, File::create(path)?)
}

pub fn read_samples<R: Read>(mut r: R) -> Result<Vec<f64>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Io(format!("sample file length {} is not a multiple of 8", bytes.len())));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

pub fn load_samples(path: &Path) -> Result<Vec<f64>> {
    read_samples(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_syntax() {
        assert_eq!(parse_grid("-1:1:3").unwrap(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(parse_grid("0.5:2:1").unwrap(), vec![0.5]);
        for bad in ["1:2", "a:1:3", "0:1:0", "1:0:5", "0:inf:3", "0:1:2:3"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let grid = vec![-0.1, 1.0 / 3.0, 2.0_f64.sqrt()];
        let cdf = vec![1e-300, 0.123_456_789_012_345_67, 1.0 - f64::EPSILON];
        let pdf = vec![0.0, std::f64::consts::PI, 5e-324];
        let t = DistributionTable::new(grid, cdf, Some(pdf)).unwrap();
        let mut buf = Vec::new();
        write_table_csv(&t, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("x,cdf,pdf\n"));
        assert_eq!(read_table_csv(buf.as_slice()).unwrap(), t);

        let t2 = DistributionTable::new(vec![0.0, 1.0], vec![0.25, 0.75], None).unwrap();
        let mut buf = Vec::new();
        write_table_csv(&t2, &mut buf).unwrap();
        assert_eq!(read_table_csv(buf.as_slice()).unwrap(), t2);
    }

    #[test]
    fn csv_rejects_garbage() {
        assert!(read_table_csv("a,b\n1,2\n".as_bytes()).is_err());
        assert!(read_table_csv("x,cdf\n1,zz\n".as_bytes()).is_err());
    }

    #[test]
    fn samples_round_trip() {
        let v = vec![-1.5, 0.0, f64::MIN_POSITIVE, 1e300];
        let mut buf = Vec::new();
        write_samples(&v, &mut buf).unwrap();
        assert_eq!(buf.len(), 32);
        assert_eq!(&buf[..8], &(-1.5f64).to_le_bytes());
        assert_eq!(read_samples(buf.as_slice()).unwrap(), v);
        assert!(read_samples(&buf[..7]).is_err());
    }

    #[test]
    fn spec_json() {
        let s = parse_spec(r#"{"r": 0.5, "weights": {"kind": "power_law", "gamma": 0.75}}"#).unwrap();
        assert!(s.is_normalized());
        let s = parse_spec(r#"{"r": 1, "weights": {"kind": "explicit", "values": [0.5, 0.25]}}"#).unwrap();
        assert_eq!(s.weight(2), 0.25);
        assert!(parse_spec(r#"{"r": 1, "weights": {"kind": "other"}}"#).is_err());
        assert!(parse_spec("{").is_err());
    }
}
