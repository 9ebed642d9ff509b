//! Binary field snapshots and CSV export.
//!
//! Snapshot layout: magic `NEMF`, little-endian `u32` version (currently 1),
//! `u64` nx, ny and component count, then each component as row-major
//! `(re, im)` little-endian f64 pairs. Geometry beyond the node counts is not
//! stored; consumers re-associate extents from their run configuration.

use num_complex::Complex64;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{NematicError, Result};
use crate::grid::{ComplexField, Grid2D};

const MAGIC: &[u8; 4] = b"NEMF";
const VERSION: u32 = 1;

/// Raw contents of a snapshot file.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotData {
    pub nx: usize,
    pub ny: usize,
    pub components: Vec<Vec<Complex64>>,
}

/// Write any number of same-grid fields as one snapshot.
pub fn write_snapshot(path: &Path, fields: &[&ComplexField]) -> Result<()> {
    let first = fields.first().ok_or_else(|| {
        NematicError::InvalidConfig("write_snapshot needs at least one field".into())
    })?;
    for f in fields {
        if !f.grid.same_shape(&first.grid) {
            return Err(NematicError::GridMismatch("write_snapshot: fields on different grids".into()));
        }
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(first.grid.nx as u64).to_le_bytes())?;
    w.write_all(&(first.grid.ny as u64).to_le_bytes())?;
    w.write_all(&(fields.len() as u64).to_le_bytes())?;
    for f in fields {
        for v in &f.values {
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Read a snapshot back; validates magic, version, and payload length.
pub fn read_snapshot(path: &Path) -> Result<SnapshotData> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| NematicError::BadSnapshot("file too short for header".into()))?;
    if &magic != MAGIC {
        return Err(NematicError::BadSnapshot(format!("bad magic {magic:?}")));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(NematicError::BadSnapshot(format!("unsupported version {version}")));
    }
    let nx = read_u64(&mut r)? as usize;
    let ny = read_u64(&mut r)? as usize;
    let n_components = read_u64(&mut r)? as usize;
    if nx == 0 || ny == 0 || n_components == 0 || nx.saturating_mul(ny) > (1 << 32) {
        return Err(NematicError::BadSnapshot(format!(
            "implausible dimensions {nx} x {ny} x {n_components}"
        )));
    }
    let mut components = Vec::with_capacity(n_components);
    for _ in 0..n_components {
        let mut comp = Vec::with_capacity(nx * ny);
        for _ in 0..nx * ny {
            let re = read_f64(&mut r)?;
            let im = read_f64(&mut r)?;
            comp.push(Complex64::new(re, im));
        }
        components.push(comp);
    }
    // Trailing garbage means the writer and reader disagree about the layout.
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(NematicError::BadSnapshot("trailing bytes after declared payload".into()));
    }
    Ok(SnapshotData { nx, ny, components })
}

impl SnapshotData {
    /// Re-attach grid geometry; node counts must match.
    pub fn into_fields(self, grid: &Grid2D) -> Result<Vec<ComplexField>> {
        if grid.nx != self.nx || grid.ny != self.ny {
            return Err(NematicError::GridMismatch(format!(
                "snapshot is {} x {}, grid is {} x {}",
                self.nx, self.ny, grid.nx, grid.ny
            )));
        }
        Ok(self
            .components
            .into_iter()
            .map(|values| ComplexField { grid: grid.clone(), values })
            .collect())
    }
}

/// C-style `%.12e` formatting (two-or-more exponent digits, explicit sign),
/// used by every CSV writer in the project.
pub fn fmt_e(x: f64) -> String {
    let s = format!("{x:.12e}");
    match s.split_once('e') {
        Some((mantissa, exp)) => {
            let e: i32 = exp.parse().unwrap_or(0);
            format!("{mantissa}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
        }
        None => s,
    }
}

/// Export a field as `x,y,re,im,abs,arg` rows.
pub fn write_field_csv(path: &Path, field: &ComplexField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "x,y,re,im,abs,arg")?;
    let g = &field.grid;
    for j in 0..g.ny {
        for i in 0..g.nx {
            let v = field.get(i, j);
            writeln!(
                w,
                "{},{},{},{},{},{}",
                fmt_e(g.x(i)),
                fmt_e(g.y(j)),
                fmt_e(v.re),
                fmt_e(v.im),
                fmt_e(v.norm()),
                fmt_e(v.arg())
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(|_| NematicError::BadSnapshot("truncated u32".into()))?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(|_| NematicError::BadSnapshot("truncated u64".into()))?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(|_| NematicError::BadSnapshot("truncated payload".into()))?;
    Ok(f64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn snapshot_round_trip_two_components() {
        let g = Grid2D::new(5, 7, 0.4, 0.6).unwrap();
        let a = ComplexField::from_fn(&g, |x, y| Complex64::new(x + y, x * y));
        let b = ComplexField::from_fn(&g, |x, y| Complex64::new(-y, x));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.nemf");
        write_snapshot(&path, &[&a, &b]).unwrap();
        let data = read_snapshot(&path).unwrap();
        assert_eq!(data.nx, 5);
        assert_eq!(data.ny, 7);
        let fields = data.into_fields(&g).unwrap();
        assert_eq!(fields.len(), 2);
        assert_eq!(fields[0].values, a.values);
        assert_eq!(fields[1].values, b.values);
    }

    #[test]
    fn snapshot_rejects_corruption() {
        let g = Grid2D::new(4, 4, 1.0, 1.0).unwrap();
        let f = ComplexField::constant(&g, Complex64::new(1.0, 2.0));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.nemf");
        write_snapshot(&path, &[&f]).unwrap();

        // bad magic
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[0] = b'X';
        let bad = dir.path().join("bad.nemf");
        std::fs::write(&bad, &bytes).unwrap();
        assert!(matches!(read_snapshot(&bad), Err(NematicError::BadSnapshot(_))));

        // truncated payload
        let ok_bytes = std::fs::read(&path).unwrap();
        std::fs::write(&bad, &ok_bytes[..ok_bytes.len() - 5]).unwrap();
        assert!(read_snapshot(&bad).is_err());

        // trailing garbage
        let mut appended = ok_bytes.clone();
        appended.extend_from_slice(&[0u8; 3]);
        std::fs::write(&bad, &appended).unwrap();
        assert!(read_snapshot(&bad).is_err());

        // wrong grid on reattach
        let g2 = Grid2D::new(5, 5, 1.0, 1.0).unwrap();
        assert!(read_snapshot(&path).unwrap().into_fields(&g2).is_err());
    }

    #[test]
    fn fmt_e_matches_c_printf_style() {
        assert_eq!(fmt_e(1.0), "1.000000000000e+00");
        assert_eq!(fmt_e(-0.015625), "-1.562500000000e-02");
        assert_eq!(fmt_e(3.0e120), "3.000000000000e+120");
        assert_eq!(fmt_e(0.0), "0.000000000000e+00");
    }

    #[test]
    fn field_csv_has_header_and_full_rows() {
        let g = Grid2D::new(3, 3, 1.0, 1.0).unwrap();
        let f = ComplexField::constant(&g, Complex64::new(0.5, -0.25));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.csv");
        write_field_csv(&path, &f).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "x,y,re,im,abs,arg");
        assert_eq!(lines.count(), 9);
        assert!(text.contains("5.000000000000e-01"));
    }

    proptest! {
        #[test]
        fn snapshot_payload_survives_round_trip(
            vals in proptest::collection::vec((-1e6f64..1e6, -1e6f64..1e6), 9)
        ) {
            let g = Grid2D::new(3, 3, 1.0, 1.0).unwrap();
            let f = ComplexField {
                grid: g.clone(),
                values: vals.iter().map(|&(a, b)| Complex64::new(a, b)).collect(),
            };
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("p.nemf");
            write_snapshot(&path, &[&f]).unwrap();
            let back = read_snapshot(&path).unwrap().into_fields(&g).unwrap();
            prop_assert_eq!(&back[0].values, &f.values);
        }
    }
}
