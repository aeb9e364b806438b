//! Binary field files and CSV output.
//!
//! A field file holds two arrays, `u1` then `u2`. Each array is written as a
//! little-endian `u64` rank, the `u64` extents, then the `f64` values in
//! row-major order. A time-series file is a `u64` entry count, the `f64`
//! horizon, then per entry an `f64` start time followed by a field.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::diagnostics::EnergyRecord;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid, TimeSeriesField};

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn read_u64<R: Read>(r: &mut R) -> std::io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> std::io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn read_array<R: Read>(r: &mut R, g: &Grid) -> std::io::Result<Vec<f64>> {
    let bad = |msg: String| std::io::Error::new(std::io::ErrorKind::InvalidData, msg);
    let rank = read_u64(r)? as usize;
    if rank != g.dim() {
        return Err(bad(format!("array has rank {rank}, grid has dimension {}", g.dim())));
    }
    let mut extents = Vec::with_capacity(rank);
    for _ in 0..rank {
        extents.push(read_u64(r)? as usize);
    }
    if extents != g.n() {
        return Err(bad(format!("array extents {extents:?} do not match grid {:?}", g.n())));
    }
    (0..g.len()).map(|_| read_f64(r)).collect()
}

fn write_array<W: Write>(w: &mut W, values: &[f64], g: &Grid) -> std::io::Result<()> {
    w.write_all(&(g.dim() as u64).to_le_bytes())?;
    for &k in g.n() {
        w.write_all(&(k as u64).to_le_bytes())?;
    }
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn decode_field<R: Read>(r: &mut R, g: &Grid) -> std::io::Result<Field> {
    let u1 = read_array(r, g)?;
    let u2 = read_array(r, g)?;
    Field::new(u1, u2).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()))
}

fn encode_field<W: Write>(w: &mut W, u: &Field, g: &Grid) -> std::io::Result<()> {
    write_array(w, u.u1(), g)?;
    write_array(w, u.u2(), g)
}

pub fn read_field(path: &Path, g: &Grid) -> Result<Field> {
    let mut r = BufReader::new(File::open(path).map_err(|e| io_err(path, e))?);
    decode_field(&mut r, g).map_err(|e| io_err(path, e))
}

pub fn write_field(path: &Path, u: &Field, g: &Grid) -> Result<()> {
    if u.len() != g.len() {
        return Err(Error::GridMismatch {
            expected: g.len(),
            found: u.len(),
        });
    }
    let mut w = BufWriter::new(File::create(path).map_err(|e| io_err(path, e))?);
    encode_field(&mut w, u, g)
        .and_then(|_| w.flush())
        .map_err(|e| io_err(path, e))
}

pub fn read_time_series(path: &Path, g: &Grid) -> Result<TimeSeriesField> {
    let mut r = BufReader::new(File::open(path).map_err(|e| io_err(path, e))?);
    let (times, values, horizon) = (|| -> std::io::Result<_> {
        let count = read_u64(&mut r)? as usize;
        let horizon = read_f64(&mut r)?;
        let mut times = Vec::with_capacity(count.min(1 << 20));
        let mut values = Vec::with_capacity(count.min(1 << 20));
        for _ in 0..count {
            times.push(read_f64(&mut r)?);
            values.push(decode_field(&mut r, g)?);
        }
        Ok((times, values, horizon))
    })()
    .map_err(|e| io_err(path, e))?;
    TimeSeriesField::new(times, values, horizon).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn write_time_series(path: &Path, f: &TimeSeriesField, g: &Grid) -> Result<()> {
    if f.field_len() != g.len() {
        return Err(Error::GridMismatch {
            expected: g.len(),
            found: f.field_len(),
        });
    }
    let mut w = BufWriter::new(File::create(path).map_err(|e| io_err(path, e))?);
    (|| -> std::io::Result<()> {
        w.write_all(&(f.times().len() as u64).to_le_bytes())?;
        w.write_all(&f.horizon().to_le_bytes())?;
        for (t, u) in f.times().iter().zip(f.values()) {
            w.write_all(&t.to_le_bytes())?;
            encode_field(&mut w, u, g)?;
        }
        w.flush()
    })()
    .map_err(|e| io_err(path, e))
}

pub fn records_csv(records: &[EnergyRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(EnergyRecord::CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_and_series_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::rect([1.0, 2.0], [3, 4]).unwrap();
        let u = g.sample(|x| (x[0] - x[1], 0.1 / (1.0 + x[1])));
        let p = dir.path().join("u.bin");
        write_field(&p, &u, &g).unwrap();
        assert_eq!(read_field(&p, &g).unwrap(), u);
        assert_eq!(std::fs::metadata(&p).unwrap().len(), 2 * (8 + 16 + 12 * 8));
        let other = Grid::rect([1.0, 2.0], [4, 3]).unwrap();
        assert!(matches!(read_field(&p, &other), Err(Error::Io(_))));
        assert!(matches!(read_field(&dir.path().join("missing"), &g), Err(Error::Io(_))));

        let f = TimeSeriesField::new(vec![0.0, 0.5], vec![u.clone(), u.scaled(2.0)], 2.0).unwrap();
        let p = dir.path().join("f.bin");
        write_time_series(&p, &f, &g).unwrap();
        assert_eq!(read_time_series(&p, &g).unwrap(), f);
    }

    #[test]
    fn csv_layout() {
        let r = EnergyRecord::from_values([0.0, 1.0, 0.5, 0.1, 1e-20, 3.0, 0.25, 2.0]);
        let csv = records_csv(&[r]);
        assert_eq!(
            csv,
            "t,l2_sq,phi,psi_q,psi_r,dphi_l2,dpsi_q_l2,combined\n0.0,1.0,0.5,0.1,1e-20,3.0,0.25,2.0\n"
        );
    }
}
