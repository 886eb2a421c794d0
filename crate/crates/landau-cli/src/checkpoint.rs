//! Binary checkpoints.
//!
//! Byte layout (all integers and floats little-endian):
//!
//! | offset | size | content                               |
//! |--------|------|---------------------------------------|
//! | 0      | 8    | magic `LANDAUF1`                      |
//! | 8      | 4    | format version (u32, currently 1)     |
//! | 12     | 4    | dim_x (u32)                           |
//! | 16     | 4    | nx (u32)                              |
//! | 20     | 4    | nv (u32)                              |
//! | 24     | 8    | rv (f64)                              |
//! | 32     | 8    | time t (f64)                          |
//! | 40     | 8·N  | f as f64, x-major, v-minor            |
//!
//! N = nx^dim_x · nv³; within a velocity block the first velocity index is
//! slowest.

use anyhow::{bail, Context, Result};
use landau::phase_space::{Field, PhaseGrid};
use std::io::{Read, Write};
use std::path::Path;

pub const MAGIC: &[u8; 8] = b"LANDAUF1";
pub const VERSION: u32 = 1;
const HEADER: usize = 40;

pub fn encode(f: &Field, t: f64) -> Vec<u8> {
    let g = &f.grid;
    let mut out = Vec::with_capacity(HEADER + 8 * f.data.len());
    out.extend_from_slice(MAGIC);
    for x in [VERSION, g.dim_x as u32, g.nx as u32, g.nv as u32] {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out.extend_from_slice(&g.rv.to_le_bytes());
    out.extend_from_slice(&t.to_le_bytes());
    for x in &f.data {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<(Field, f64)> {
    if bytes.len() < HEADER || &bytes[..8] != MAGIC {
        bail!("not a landau checkpoint (bad magic)");
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let version = u32_at(8);
    if version != VERSION {
        bail!("unsupported checkpoint version {version} (expected {VERSION})");
    }
    let (dim_x, nx, nv) = (u32_at(12) as usize, u32_at(16) as usize, u32_at(20) as usize);
    let grid = PhaseGrid::new(nx, nv, f64_at(24), dim_x).context("checkpoint header")?;
    let t = f64_at(32);
    let body = &bytes[HEADER..];
    if body.len() != 8 * grid.len() {
        bail!("checkpoint body has {} bytes, header implies {}", body.len(), 8 * grid.len());
    }
    let data = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok((Field::from_data(&grid, data)?, t))
}

pub fn write(path: &Path, f: &Field, t: f64) -> Result<()> {
    let mut file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    file.write_all(&encode(f, t))?;
    Ok(())
}

pub fn read(path: &Path) -> Result<(Field, f64)> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .with_context(|| format!("opening {}", path.display()))?
        .read_to_end(&mut bytes)?;
    decode(&bytes).with_context(|| format!("reading {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use landau::random::{rng, smooth_field};

    #[test]
    fn round_trip_is_exact() {
        let g = PhaseGrid::new(4, 6, 5.5, 1).unwrap();
        let f = smooth_field(&g, &mut rng(3), 0.5, 1, 1.0);
        let (h, t) = decode(&encode(&f, 0.25)).unwrap();
        assert_eq!(t, 0.25);
        assert_eq!(h.grid, f.grid);
        assert!(h.data.iter().zip(&f.data).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn header_layout() {
        let g = PhaseGrid::new(4, 6, 5.5, 1).unwrap();
        let b = encode(&Field::zeros(&g), 1.5);
        assert_eq!(b.len(), 40 + 8 * 4 * 216);
        assert_eq!(&b[..8], MAGIC);
        assert_eq!(u32::from_le_bytes(b[20..24].try_into().unwrap()), 6);
        assert_eq!(f64::from_le_bytes(b[32..40].try_into().unwrap()), 1.5);
    }

    #[test]
    fn corrupt_input_is_rejected() {
        let g = PhaseGrid::new(4, 6, 5.5, 1).unwrap();
        let mut b = encode(&Field::zeros(&g), 0.0);
        assert!(decode(&b[..100]).is_err());
        b[0] = b'X';
        assert!(decode(&b).is_err());
    }
}
