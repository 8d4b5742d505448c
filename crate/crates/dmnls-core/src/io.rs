//! Snapshot files and CSV output.
//!
//! Snapshot layout (bit-exact): magic `DMNLS1`, then little-endian u32 n,
//! f64 length, f64 t, then n interleaved (re, im) f64 pairs.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{ComplexField, SpatialGrid};
use crate::harness::{LipschitzRow, SweepResult};
use crate::trajectory::Trajectory;

const MAGIC: &[u8; 6] = b"DMNLS1";

pub fn write_snapshot(path: &Path, field: &ComplexField, t: f64) -> Result<()> {
    if !field.is_finite() || !t.is_finite() {
        return Err(Error::SnapshotFormat("refusing to write non-finite payload".into()));
    }
    let g = field.grid();
    let mut buf = Vec::with_capacity(6 + 4 + 16 + 16 * g.n());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(g.n() as u32).to_le_bytes());
    buf.extend_from_slice(&g.length().to_le_bytes());
    buf.extend_from_slice(&t.to_le_bytes());
    for z in field.values() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    let mut f = fs::File::create(path)?;
    f.write_all(&buf)?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<(ComplexField, f64)> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 6 + 4 + 16 {
        return Err(Error::SnapshotFormat(format!(
            "file too short: {} bytes",
            bytes.len()
        )));
    }
    if &bytes[0..6] != MAGIC {
        return Err(Error::SnapshotFormat(format!(
            "bad magic {:?}",
            &bytes[0..6.min(bytes.len())]
        )));
    }
    let n = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
    let length = f64::from_le_bytes(bytes[10..18].try_into().unwrap());
    let t = f64::from_le_bytes(bytes[18..26].try_into().unwrap());
    let expected = 26 + 16 * n;
    if bytes.len() != expected {
        return Err(Error::SnapshotFormat(format!(
            "length mismatch: {} bytes for n = {n}, expected {expected}",
            bytes.len()
        )));
    }
    let grid = SpatialGrid::new(n, length)?;
    let mut values = Vec::with_capacity(n);
    for j in 0..n {
        let off = 26 + 16 * j;
        let re = f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
        let im = f64::from_le_bytes(bytes[off + 8..off + 16].try_into().unwrap());
        if !re.is_finite() || !im.is_finite() {
            return Err(Error::SnapshotFormat(format!("non-finite payload at sample {j}")));
        }
        values.push(Complex64::new(re, im));
    }
    if !t.is_finite() {
        return Err(Error::SnapshotFormat("non-finite snapshot time".into()));
    }
    Ok((ComplexField::new(grid, values)?, t))
}

pub fn write_diagnostics_csv(path: &Path, tr: &Trajectory) -> Result<()> {
    let mut out = String::from("t,mass,h1,energy\n");
    for (t, d) in tr.times().iter().zip(tr.diagnostics()) {
        out.push_str(&format!("{t},{},{},{}\n", d.mass, d.h1, d.energy));
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn write_sweep_csv(path: &Path, result: &SweepResult) -> Result<()> {
    let mut out = String::from("eps,sup_h1_error\n");
    for (eps, err) in result.eps_values.iter().zip(&result.errors) {
        out.push_str(&format!("{eps},{err}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn write_lipschitz_csv(path: &Path, rows: &[LipschitzRow]) -> Result<()> {
    let mut out = String::from("delta,sup_h1_diff,ratio\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.delta, r.sup_h1_diff, r.ratio));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Human-readable dump of a snapshot file: header comments, then x,re,im rows.
pub fn snapshot_to_csv(field: &ComplexField, t: f64) -> String {
    let g = field.grid();
    let mut out = format!("# n = {}, length = {}, t = {t}\nx,re,im\n", g.n(), g.length());
    for (&x, z) in g.x().iter().zip(field.values()) {
        out.push_str(&format!("{x},{},{}\n", z.re, z.im));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::gaussian_profile;

    fn tmpdir() -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("dmnls-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn snapshot_round_trip_is_bitwise_exact() {
        let g = SpatialGrid::new(128, 20.0).unwrap();
        let f = gaussian_profile(&g, 1.3, 0.9, 0.5, 0.2).unwrap();
        let path = tmpdir().join("roundtrip.snap");
        write_snapshot(&path, &f, 0.625).unwrap();
        let (back, t) = read_snapshot(&path).unwrap();
        assert_eq!(t, 0.625);
        for (a, b) in f.values().iter().zip(back.values()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        // write is deterministic byte-for-byte
        let path2 = tmpdir().join("roundtrip2.snap");
        write_snapshot(&path2, &f, 0.625).unwrap();
        assert_eq!(fs::read(&path).unwrap(), fs::read(&path2).unwrap());
    }

    #[test]
    fn snapshot_error_paths() {
        let dir = tmpdir();
        let g = SpatialGrid::new(64, 10.0).unwrap();
        let f = gaussian_profile(&g, 1.0, 0.5, 0.0, 0.0).unwrap();
        let path = dir.join("good.snap");
        write_snapshot(&path, &f, 1.0).unwrap();

        let bad_magic = dir.join("bad_magic.snap");
        let mut bytes = fs::read(&path).unwrap();
        bytes[0..6].copy_from_slice(b"XXXXXX");
        fs::write(&bad_magic, &bytes).unwrap();
        assert!(matches!(read_snapshot(&bad_magic), Err(Error::SnapshotFormat(_))));

        let truncated = dir.join("truncated.snap");
        let bytes = fs::read(&path).unwrap();
        fs::write(&truncated, &bytes[..bytes.len() - 8]).unwrap();
        assert!(matches!(read_snapshot(&truncated), Err(Error::SnapshotFormat(_))));

        let poisoned = dir.join("nan.snap");
        let mut bytes = fs::read(&path).unwrap();
        bytes[26..34].copy_from_slice(&f64::NAN.to_le_bytes());
        fs::write(&poisoned, &bytes).unwrap();
        assert!(matches!(read_snapshot(&poisoned), Err(Error::SnapshotFormat(_))));
    }
}
