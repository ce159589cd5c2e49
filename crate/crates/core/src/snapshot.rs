//! Field snapshots in CSV and little-endian binary form.
//!
//! Both formats list every stored mode in storage order as
//! `(kx, ky, Re û₁, Im û₁, Re û₂, Im û₂)`. The binary layout is the magic bytes
//! `DPSF`, a `u32` version, a `u32` resolution `n`, then `n²` records of two
//! `i32` wavenumbers followed by four `f64` values, all little-endian.

use std::io::{BufRead, Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::SpectralField;

pub const SNAPSHOT_CSV_HEADER: &str = "kx,ky,re_u1,im_u1,re_u2,im_u2";
pub const SNAPSHOT_MAGIC: &[u8; 4] = b"DPSF";
pub const SNAPSHOT_VERSION: u32 = 1;

pub fn write_csv<W: Write>(field: &SpectralField, mut w: W) -> Result<()> {
    writeln!(w, "{SNAPSHOT_CSV_HEADER}")?;
    for (kx, ky, a, b) in field.modes() {
        writeln!(
            w,
            "{kx},{ky},{:.17e},{:.17e},{:.17e},{:.17e}",
            a.re, a.im, b.re, b.im
        )?;
    }
    Ok(())
}

pub fn read_csv<R: BufRead>(r: R) -> Result<SpectralField> {
    let mut lines = r.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim() != SNAPSHOT_CSV_HEADER {
        return Err(Error::Parse("missing snapshot header".into()));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 6 {
            return Err(Error::Parse(format!(
                "row {}: expected 6 columns, got {}",
                i + 2,
                cells.len()
            )));
        }
        let int = |s: &str| {
            s.trim()
                .parse::<i64>()
                .map_err(|e| Error::Parse(format!("row {}: {e}", i + 2)))
        };
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("row {}: {e}", i + 2)))
        };
        rows.push((
            int(cells[0])?,
            int(cells[1])?,
            Complex64::new(num(cells[2])?, num(cells[3])?),
            Complex64::new(num(cells[4])?, num(cells[5])?),
        ));
    }
    assemble(rows)
}

pub fn write_binary<W: Write>(field: &SpectralField, mut w: W) -> Result<()> {
    w.write_all(SNAPSHOT_MAGIC)?;
    w.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
    w.write_all(&(field.resolution() as u32).to_le_bytes())?;
    for (kx, ky, a, b) in field.modes() {
        w.write_all(&(kx as i32).to_le_bytes())?;
        w.write_all(&(ky as i32).to_le_bytes())?;
        for v in [a.re, a.im, b.re, b.im] {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<SpectralField> {
    let mut head = [0u8; 12];
    r.read_exact(&mut head)?;
    if &head[..4] != SNAPSHOT_MAGIC {
        return Err(Error::Parse("not a snapshot file".into()));
    }
    let version = u32::from_le_bytes(head[4..8].try_into().expect("4 bytes"));
    if version != SNAPSHOT_VERSION {
        return Err(Error::Parse(format!(
            "unsupported snapshot version {version}"
        )));
    }
    let n = u32::from_le_bytes(head[8..12].try_into().expect("4 bytes")) as usize;
    let mut rows = Vec::with_capacity(n * n);
    let mut rec = [0u8; 40];
    for _ in 0..n * n {
        r.read_exact(&mut rec)?;
        let i = |o: usize| i32::from_le_bytes(rec[o..o + 4].try_into().expect("4 bytes")) as i64;
        let f = |o: usize| f64::from_le_bytes(rec[o..o + 8].try_into().expect("8 bytes"));
        rows.push((
            i(0),
            i(4),
            Complex64::new(f(8), f(16)),
            Complex64::new(f(24), f(32)),
        ));
    }
    assemble(rows)
}

fn assemble(rows: Vec<(i64, i64, Complex64, Complex64)>) -> Result<SpectralField> {
    let n = (rows.len() as f64).sqrt().round() as usize;
    if n * n != rows.len() || n == 0 {
        return Err(Error::Structural(format!(
            "{} modes do not form a square grid",
            rows.len()
        )));
    }
    let probe = SpectralField::zeros(n)?;
    let mut u1 = vec![Complex64::new(0.0, 0.0); n * n];
    let mut u2 = u1.clone();
    let half = (n / 2) as i64;
    for (kx, ky, a, b) in rows {
        if kx <= -half || kx > half || ky <= -half || ky > half {
            return Err(Error::Structural(format!(
                "wavevector ({kx}, {ky}) outside an n = {n} grid"
            )));
        }
        let idx = probe.index(kx, ky);
        u1[idx] = a;
        u2[idx] = b;
    }
    SpectralField::from_coefficients(n, u1, u2)
}
