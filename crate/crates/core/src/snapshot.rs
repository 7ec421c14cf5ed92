//! Binary field snapshots.
//!
//! Little-endian layout: `u64` dimension `d`, `d × u64` points per axis,
//! `f64` box length, `f64` time, `u64` N, `f64` α, `i64` μ, `f64` a, then the
//! values as interleaved `(re, im)` `f64` pairs in row-major order.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use thiserror::Error;

use crate::model::{make_grid, Field, ModelError, Power, ProblemSpec, Sign};

/// File extension used for snapshots.
pub const EXTENSION: &str = "snap";

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("malformed snapshot: {0}")]
    Format(String),
}

fn put_u64(out: &mut Vec<u8>, x: u64) {
    out.extend_from_slice(&x.to_le_bytes());
}

fn put_f64(out: &mut Vec<u8>, x: f64) {
    out.extend_from_slice(&x.to_le_bytes());
}

pub fn encode(field: &Field, spec: &ProblemSpec) -> Vec<u8> {
    let g = field.grid();
    let mut out = Vec::with_capacity(96 + 16 * g.len());
    put_u64(&mut out, g.dim() as u64);
    for _ in 0..g.dim() {
        put_u64(&mut out, g.points() as u64);
    }
    put_f64(&mut out, g.length());
    put_f64(&mut out, field.time());
    put_u64(&mut out, spec.dimension as u64);
    put_f64(&mut out, spec.alpha());
    out.extend_from_slice(&spec.mu.as_int().to_le_bytes());
    put_f64(&mut out, spec.damping);
    for z in field.values() {
        put_f64(&mut out, z.re);
        put_f64(&mut out, z.im);
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take(&mut self) -> Result<[u8; 8], SnapshotError> {
        let chunk = self
            .bytes
            .get(self.pos..self.pos + 8)
            .ok_or_else(|| SnapshotError::Format("truncated".into()))?;
        self.pos += 8;
        Ok(chunk.try_into().expect("eight bytes"))
    }

    fn u64(&mut self) -> Result<u64, SnapshotError> {
        Ok(u64::from_le_bytes(self.take()?))
    }

    fn f64(&mut self) -> Result<f64, SnapshotError> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

pub fn decode(bytes: &[u8]) -> Result<(Field, ProblemSpec), SnapshotError> {
    let mut c = Cursor { bytes, pos: 0 };
    let dim = c.u64()? as usize;
    if !(1..=3).contains(&dim) {
        return Err(SnapshotError::Format(format!("dimension {dim}")));
    }
    let points: Vec<usize> = (0..dim).map(|_| c.u64().map(|n| n as usize)).collect::<Result<_, _>>()?;
    if points.iter().any(|&n| n != points[0]) {
        return Err(SnapshotError::Format("unequal axis sizes".into()));
    }
    let length = c.f64()?;
    let time = c.f64()?;
    let n = c.u64()? as usize;
    let alpha = Power::new(c.f64()?)?;
    let mu = Sign::from_int(i64::from_le_bytes(c.take()?))?;
    let damping = c.f64()?;
    let spec = ProblemSpec::new(n, alpha, mu, damping)?;
    let grid = make_grid(length, points[0], dim)?;
    let expected = c.pos + 16 * grid.len();
    if bytes.len() != expected {
        return Err(SnapshotError::Format(format!("expected {expected} bytes, found {}", bytes.len())));
    }
    let values = (0..grid.len())
        .map(|_| Ok(Complex64::new(c.f64()?, c.f64()?)))
        .collect::<Result<Vec<_>, SnapshotError>>()?;
    Ok((Field::new(grid, values, time)?, spec))
}

pub fn write_snapshot(path: &Path, field: &Field, spec: &ProblemSpec) -> Result<(), SnapshotError> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&encode(field, spec))?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<(Field, ProblemSpec), SnapshotError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes)
}

/// All snapshots in `dir`, sorted by time stamp.
pub fn read_dir(dir: &Path) -> Result<Vec<(Field, ProblemSpec)>, SnapshotError> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == EXTENSION))
        .collect();
    paths.sort();
    let mut out = paths.iter().map(|p| read_snapshot(p)).collect::<Result<Vec<_>, _>>()?;
    out.sort_by(|a, b| a.0.time().total_cmp(&b.0.time()));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::gaussian_data;

    #[test]
    fn round_trip() {
        let g = make_grid(6.0, 8, 2).unwrap();
        let u = gaussian_data(&g, 1.0, 1.0, 0.4).unwrap().with_time(0.25);
        let spec = ProblemSpec::new(2, Power::new(2.0).unwrap(), Sign::Defocusing, 0.3).unwrap();
        let bytes = encode(&u, &spec);
        assert_eq!(bytes.len(), 8 * 9 + 16 * 64);
        let (v, s) = decode(&bytes).unwrap();
        assert_eq!(v, u);
        assert_eq!(s, spec);
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
    }
}
