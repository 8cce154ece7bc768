//! Flat binary field snapshots with a JSON sidecar.
//!
//! Layout, little-endian:
//!
//! ```text
//! magic      8 bytes  "BNSPSNAP"
//! version    u32      1
//! dims       3 × u32  N, N, N
//! box_len    f64
//! n_fields   u32
//! names      n_fields × (u32 length, UTF-8 bytes)
//! body       n_fields × N³ × (f64 re, f64 im), row-major k-order, z fastest
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::state::{SpectralState, FIELD_NAMES};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"BNSPSNAP";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub t: f64,
    pub step: u64,
    pub n: usize,
    pub box_len: f64,
    pub fields: Vec<String>,
    pub byte_order: String,
    pub layout: String,
    pub normalisation: String,
}

impl SnapshotMeta {
    pub fn for_state(state: &SpectralState, t: f64, step: u64) -> Self {
        SnapshotMeta {
            t,
            step,
            n: state.n,
            box_len: state.box_len,
            fields: FIELD_NAMES.iter().map(|s| s.to_string()).collect(),
            byte_order: "little".into(),
            layout: "row-major (kx, ky, kz), kz fastest; FFT index order".into(),
            normalisation: "f(x) = sum_k fhat(k) exp(i k.x)".into(),
        }
    }
}

/// Write `<stem>.bin` and `<stem>.json`; returns both paths.
pub fn write_snapshot(
    dir: &Path,
    stem: &str,
    state: &SpectralState,
    meta: &SnapshotMeta,
) -> Result<(PathBuf, PathBuf)> {
    let bin = dir.join(format!("{stem}.bin"));
    let json = dir.join(format!("{stem}.json"));
    let mut w = BufWriter::new(File::create(&bin)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    for _ in 0..3 {
        w.write_all(&(state.n as u32).to_le_bytes())?;
    }
    w.write_all(&state.box_len.to_le_bytes())?;
    w.write_all(&(FIELD_NAMES.len() as u32).to_le_bytes())?;
    for name in FIELD_NAMES {
        w.write_all(&(name.len() as u32).to_le_bytes())?;
        w.write_all(name.as_bytes())?;
    }
    for f in &state.fields {
        for z in f {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    w.flush()?;
    let text = serde_json::to_string_pretty(meta).map_err(|e| Error::Snapshot(e.to_string()))?;
    std::fs::write(&json, text + "\n")?;
    Ok((bin, json))
}

pub fn read_snapshot(path: &Path) -> Result<SpectralState> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let dims = [read_u32(&mut r)?, read_u32(&mut r)?, read_u32(&mut r)?];
    if dims[0] != dims[1] || dims[1] != dims[2] {
        return Err(Error::Snapshot(format!("non-cubic dims {dims:?}")));
    }
    let n = dims[0] as usize;
    let box_len = read_f64(&mut r)?;
    let nf = read_u32(&mut r)? as usize;
    if nf != FIELD_NAMES.len() {
        return Err(Error::Snapshot(format!("expected 8 fields, found {nf}")));
    }
    for expected in FIELD_NAMES {
        let len = read_u32(&mut r)? as usize;
        let mut buf = vec![0u8; len];
        r.read_exact(&mut buf)?;
        if buf != expected.as_bytes() {
            return Err(Error::Snapshot(format!(
                "field {} where {expected} was expected",
                String::from_utf8_lossy(&buf)
            )));
        }
    }
    let len = n * n * n;
    let mut fields: [Vec<Complex64>; 8] = std::array::from_fn(|_| Vec::with_capacity(len));
    for f in fields.iter_mut() {
        for _ in 0..len {
            let re = read_f64(&mut r)?;
            let im = read_f64(&mut r)?;
            f.push(Complex64::new(re, im));
        }
    }
    Ok(SpectralState { n, box_len, fields })
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::SpectralGrid;

    #[test]
    fn round_trip() {
        let g = SpectralGrid::new(4, 1.5).unwrap();
        let mut s = SpectralState::zeros(&g);
        for (k, f) in s.fields.iter_mut().enumerate() {
            for (i, z) in f.iter_mut().enumerate() {
                *z = Complex64::new(i as f64 * 0.1 + k as f64, -(i as f64) / 3.0);
            }
        }
        let dir = std::env::temp_dir().join(format!("bnsp-snap-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let meta = SnapshotMeta::for_state(&s, 0.25, 3);
        let (bin, json) = write_snapshot(&dir, "snap", &s, &meta).unwrap();
        let back = read_snapshot(&bin).unwrap();
        assert_eq!(back, s);
        let m: SnapshotMeta = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
        assert_eq!(m, meta);
        let size = std::fs::metadata(&bin).unwrap().len() as usize;
        let header = 8 + 4 + 12 + 8 + 4 + FIELD_NAMES.iter().map(|n| 4 + n.len()).sum::<usize>();
        assert_eq!(size, header + 8 * 64 * 16);
        std::fs::remove_dir_all(dir).ok();
    }
}
