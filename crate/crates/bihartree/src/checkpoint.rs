//! Binary state checkpoints: one JSON header line, then raw interleaved
//! binary64 samples (re, im), little-endian, axis-major, with a SHA-256 of
//! the payload enforced on read.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exponents::ModelParams;
use crate::field::ComplexField;
use crate::grid::TorusGrid;
use crate::real::Real;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct CheckpointHeader {
    pub format_version: u32,
    pub d: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "L")]
    pub l: f64,
    pub t: f64,
    pub params: ModelParams<f64>,
    pub sha256: String,
}

fn hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push_str(&format!("{:02x}", b));
    }
    s
}

fn payload_bytes<T: Real>(u: &ComplexField<T>) -> Vec<u8> {
    let mut buf = Vec::with_capacity(u.len() * 16);
    for z in &u.values {
        buf.extend_from_slice(&z.re.as_f64().to_le_bytes());
        buf.extend_from_slice(&z.im.as_f64().to_le_bytes());
    }
    buf
}

/// Write a checkpoint; the payload is always binary64 regardless of the
/// in-memory scalar type.
pub fn write_checkpoint<T: Real>(
    path: &Path,
    u: &ComplexField<T>,
    t: T,
    params: &ModelParams<f64>,
) -> Result<()> {
    let grid = u.grid();
    let payload = payload_bytes(u);
    let header = CheckpointHeader {
        format_version: FORMAT_VERSION,
        d: grid.d,
        m: grid.m,
        l: grid.l.as_f64(),
        t: t.as_f64(),
        params: *params,
        sha256: hex(&Sha256::digest(&payload)),
    };
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer(&mut w, &header)
        .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.write_all(&payload).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Read a checkpoint, verifying version and checksum; reconstructs the grid
/// from the header.
pub fn read_checkpoint<T: Real>(path: &Path) -> Result<(ComplexField<T>, T, CheckpointHeader)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let mut header_line = Vec::new();
    {
        let mut byte = [0u8; 1];
        loop {
            let n = r.read(&mut byte).map_err(|e| Error::io(path, e))?;
            if n == 0 {
                return Err(Error::MalformedCheckpoint {
                    path: path.into(),
                    message: "missing header line".into(),
                });
            }
            if byte[0] == b'\n' {
                break;
            }
            header_line.push(byte[0]);
        }
    }
    let header: CheckpointHeader =
        serde_json::from_slice(&header_line).map_err(|e| Error::MalformedCheckpoint {
            path: path.into(),
            message: format!("bad header: {}", e),
        })?;
    if header.format_version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            got: header.format_version,
            supported: FORMAT_VERSION,
        });
    }
    let expected_len = 16usize
        .checked_mul(header.m.pow(header.d as u32))
        .ok_or_else(|| Error::MalformedCheckpoint {
            path: path.into(),
            message: "payload size overflow".into(),
        })?;
    let mut payload = Vec::with_capacity(expected_len);
    r.read_to_end(&mut payload).map_err(|e| Error::io(path, e))?;
    if payload.len() != expected_len {
        return Err(Error::MalformedCheckpoint {
            path: path.into(),
            message: format!(
                "payload length {} does not match 16 M^d = {}",
                payload.len(),
                expected_len
            ),
        });
    }
    let actual = hex(&Sha256::digest(&payload));
    if actual != header.sha256 {
        return Err(Error::ChecksumMismatch {
            path: path.into(),
            expected: header.sha256,
            actual,
        });
    }
    let grid = TorusGrid::<T>::new(header.d, T::of(header.l), header.m)?;
    let values: Vec<Complex<T>> = payload
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[0..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..16].try_into().unwrap());
            Complex::new(T::of(re), T::of(im))
        })
        .collect();
    let field = ComplexField::from_values(grid, values)?;
    let t = T::of(header.t);
    Ok((field, t, header))
}

/// Dump a real array as a checkpoint-format file (zero imaginary parts).
pub fn write_real_array<T: Real>(
    path: &Path,
    grid: &Arc<TorusGrid<T>>,
    data: &[T],
    params: &ModelParams<f64>,
) -> Result<()> {
    let field = ComplexField::from_values(
        grid.clone(),
        data.iter().map(|&v| Complex::new(v, T::zero())).collect(),
    )?;
    write_checkpoint(path, &field, T::zero(), params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn params() -> ModelParams<f64> {
        ModelParams::new(3, 2.0, -1.0, 2.5).unwrap()
    }

    fn random_field(seed: u64) -> ComplexField<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let grid = TorusGrid::new(2, 10.0, 16).unwrap();
        ComplexField::from_values(
            grid.clone(),
            (0..grid.len())
                .map(|_| Complex::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn round_trip_is_bitwise() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("state.ckpt");
        let u = random_field(7);
        write_checkpoint(&path, &u, 1.25, &params()).unwrap();
        let (v, t, header) = read_checkpoint::<f64>(&path).unwrap();
        assert_eq!(t, 1.25);
        assert_eq!(header.m, 16);
        for (a, b) in u.values.iter().zip(&v.values) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        // writing the read-back state reproduces the same payload hash
        let path2 = dir.path().join("state2.ckpt");
        write_checkpoint(&path2, &v, t, &params()).unwrap();
        let (_, _, header2) = read_checkpoint::<f64>(&path2).unwrap();
        assert_eq!(header.sha256, header2.sha256);
    }

    #[test]
    fn truncation_detected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("state.ckpt");
        let u = random_field(9);
        write_checkpoint(&path, &u, 0.0, &params()).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 8]).unwrap();
        assert!(matches!(
            read_checkpoint::<f64>(&path),
            Err(Error::MalformedCheckpoint { .. })
        ));
    }

    #[test]
    fn corruption_fails_checksum() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("state.ckpt");
        let u = random_field(11);
        write_checkpoint(&path, &u, 0.0, &params()).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        let n = bytes.len();
        bytes[n - 5] ^= 0x40;
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            read_checkpoint::<f64>(&path),
            Err(Error::ChecksumMismatch { .. })
        ));
    }

    #[test]
    fn version_gate() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("state.ckpt");
        let u = random_field(13);
        write_checkpoint(&path, &u, 0.0, &params()).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let text = String::from_utf8_lossy(&bytes);
        let patched = text.replacen("\"format_version\":1", "\"format_version\":9", 1);
        std::fs::write(&path, patched.as_bytes()).unwrap();
        assert!(matches!(
            read_checkpoint::<f64>(&path),
            Err(Error::VersionMismatch { got: 9, .. })
        ));
    }
}
