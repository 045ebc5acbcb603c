//! Binary snapshot format for fields.
//!
//! Layout (all little-endian):
//! - magic bytes `CSLF`
//! - format version, u32 (currently 1)
//! - dim, u32
//! - points per axis N, u32
//! - box half width L, f64
//! - time, f64
//! - payload: N^3 complex values, interleaved re/im f64, row-major.
//!
//! Round-trips are bit-exact.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, Space};

pub const MAGIC: &[u8; 4] = b"CSLF";
pub const FORMAT_VERSION: u32 = 1;

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Write a position-space field to `path`.
pub fn write_snapshot(field: &Field, path: &Path) -> Result<()> {
    field.require_position()?;
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    let grid = field.grid;
    let mut header = Vec::with_capacity(32);
    header.extend_from_slice(MAGIC);
    header.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    header.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    header.extend_from_slice(&(grid.points_per_axis() as u32).to_le_bytes());
    header.extend_from_slice(&grid.box_half_width().to_le_bytes());
    header.extend_from_slice(&field.time.to_le_bytes());
    w.write_all(&header).map_err(|e| io_err(path, e))?;
    let mut buf = Vec::with_capacity(field.values.len() * 16);
    for v in &field.values {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&buf).map_err(|e| io_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))?;
    Ok(())
}

/// Read a snapshot written by [`write_snapshot`].
pub fn read_snapshot(path: &Path) -> Result<Field> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut r = BufReader::new(file);
    let mut header = [0_u8; 32];
    r.read_exact(&mut header)
        .map_err(|_| Error::SnapshotFormat("truncated header".into()))?;
    if &header[0..4] != MAGIC {
        return Err(Error::SnapshotFormat(format!(
            "bad magic {:?}, expected {:?}",
            &header[0..4],
            MAGIC
        )));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(Error::SnapshotFormat(format!(
            "format version mismatch: file has {version}, reader supports {FORMAT_VERSION}"
        )));
    }
    let dim = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let n = u32::from_le_bytes(header[12..16].try_into().unwrap()) as usize;
    let l = f64::from_le_bytes(header[16..24].try_into().unwrap());
    let time = f64::from_le_bytes(header[24..32].try_into().unwrap());
    let grid = Grid::new(dim, l, n)?;

    let mut payload = Vec::new();
    r.read_to_end(&mut payload).map_err(|e| io_err(path, e))?;
    let expected = grid.len() * 16;
    if payload.len() != expected {
        return Err(Error::SnapshotFormat(format!(
            "payload length {} does not match N^3 complex values ({expected} bytes)",
            payload.len()
        )));
    }
    let values = payload
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[0..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..16].try_into().unwrap()),
            )
        })
        .collect();
    Ok(Field {
        grid,
        time,
        space: Space::Position,
        values,
    })
}

/// Write then read back, returning the reread field (bit-exact round trip).
pub fn snapshot_roundtrip(field: &Field, path: &Path) -> Result<Field> {
    write_snapshot(field, path)?;
    read_snapshot(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: Grid, seed: u64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Field {
            grid,
            time: 0.375,
            space: Space::Position,
            values: (0..grid.len())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        }
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.cslf");
        let grid = Grid::new(3, 7.5, 8).unwrap();
        let field = random_field(grid, 7);
        let back = snapshot_roundtrip(&field, &path).unwrap();
        assert_eq!(back.time.to_bits(), field.time.to_bits());
        assert_eq!(back.grid, field.grid);
        for (a, b) in back.values.iter().zip(field.values.iter()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn corrupted_magic_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.cslf");
        let grid = Grid::new(3, 5.0, 8).unwrap();
        write_snapshot(&random_field(grid, 1), &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[0] = b'X';
        std::fs::write(&path, &bytes).unwrap();
        let err = read_snapshot(&path).unwrap_err();
        assert!(err.to_string().contains("magic"));
    }

    #[test]
    fn version_mismatch_names_versions() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.cslf");
        let grid = Grid::new(3, 5.0, 8).unwrap();
        write_snapshot(&random_field(grid, 2), &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[4..8].copy_from_slice(&99_u32.to_le_bytes());
        std::fs::write(&path, &bytes).unwrap();
        let err = read_snapshot(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("99") && msg.contains("1"), "message: {msg}");
    }

    #[test]
    fn truncated_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.cslf");
        let grid = Grid::new(3, 5.0, 8).unwrap();
        write_snapshot(&random_field(grid, 3), &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 8]).unwrap();
        let err = read_snapshot(&path).unwrap_err();
        assert!(err.to_string().contains("payload length"));
    }
}
