//! PathGrid export: CSV (t,value) and a compact little-endian binary format.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::{PathGrid, PathMeta};
use crate::error::{Error, Result};

pub const MAGIC: u16 = 0x4850;
pub const VERSION: u16 = 1;

pub fn write_csv<W: Write>(path: &PathGrid, mut w: W) -> Result<()> {
    writeln!(w, "t,value")?;
    for (i, v) in path.values.iter().enumerate() {
        writeln!(w, "{},{}", path.time(i), v)?;
    }
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<PathGrid> {
    let mut lines = BufReader::new(r).lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim() != "t,value" {
        return Err(Error::Format(format!("expected header 't,value', got '{header}'")));
    }
    let mut ts = Vec::new();
    let mut vs = Vec::new();
    for (no, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split(',');
        let parse = |s: Option<&str>| -> Result<f64> {
            s.ok_or_else(|| Error::Format(format!("line {}: missing field", no + 2)))?
                .trim()
                .parse()
                .map_err(|e| Error::Format(format!("line {}: {e}", no + 2)))
        };
        ts.push(parse(it.next())?);
        vs.push(parse(it.next())?);
    }
    if ts.len() < 2 {
        return Err(Error::Format("need at least two rows".into()));
    }
    let dt = (ts[ts.len() - 1] - ts[0]) / (ts.len() - 1) as f64;
    for (i, t) in ts.iter().enumerate() {
        if (t - (ts[0] + i as f64 * dt)).abs() > 1e-9 * (1.0 + t.abs()) {
            return Err(Error::Format(format!("non-uniform time grid at row {}", i + 2)));
        }
    }
    PathGrid::new(ts[0], dt, vs, PathMeta::default())
}

/// Header: magic u16, version u16, n u32, dt f64; then t0 f64 and n values f64.
pub fn write_binary<W: Write>(path: &PathGrid, mut w: W) -> Result<()> {
    let n = u32::try_from(path.values.len())
        .map_err(|_| Error::Format("path too long for the binary format".into()))?;
    w.write_all(&MAGIC.to_le_bytes())?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&n.to_le_bytes())?;
    w.write_all(&path.dt.to_le_bytes())?;
    w.write_all(&path.t0.to_le_bytes())?;
    for v in &path.values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<PathGrid> {
    let mut head = [0u8; 16];
    r.read_exact(&mut head)?;
    let magic = u16::from_le_bytes([head[0], head[1]]);
    let version = u16::from_le_bytes([head[2], head[3]]);
    if magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:#06x}")));
    }
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let n = u32::from_le_bytes(head[4..8].try_into().unwrap()) as usize;
    let dt = f64::from_le_bytes(head[8..16].try_into().unwrap());
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    let t0 = f64::from_le_bytes(buf);
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        r.read_exact(&mut buf)?;
        values.push(f64::from_le_bytes(buf));
    }
    PathGrid::new(t0, dt, values, PathMeta::default())
}

pub fn save_csv(path: &PathGrid, file: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_csv(path, &mut buf)?;
    std::fs::write(file, buf)?;
    Ok(())
}

pub fn save_binary(path: &PathGrid, file: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_binary(path, &mut buf)?;
    std::fs::write(file, buf)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> PathGrid {
        PathGrid::new(0.5, 0.25, vec![1.0, -2.5, 3.125e-7, 0.1], PathMeta::default()).unwrap()
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let p = sample();
        let mut buf = Vec::new();
        write_binary(&p, &mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 8 + 8 * 4);
        let q = read_binary(&buf[..]).unwrap();
        assert_eq!(q.values, p.values);
        assert_eq!(q.dt, p.dt);
        assert_eq!(q.t0, p.t0);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let p = sample();
        let mut buf = Vec::new();
        write_csv(&p, &mut buf).unwrap();
        let q = read_csv(&buf[..]).unwrap();
        assert_eq!(q.values, p.values);
        assert!((q.dt - p.dt).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_magic() {
        let mut buf = Vec::new();
        write_binary(&sample(), &mut buf).unwrap();
        buf[0] ^= 0xff;
        assert!(read_binary(&buf[..]).is_err());
    }
}
