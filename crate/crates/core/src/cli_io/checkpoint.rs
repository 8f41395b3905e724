//! Binary checkpoints for bit-exact restart.
//!
//! Layout, all integers and reals little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 8     | magic `OLDROYDB` |
//! | 1     | format version (1) |
//! | 8     | `n` (u64) |
//! | 8     | `L` (f64) |
//! | 8     | `t` (f64) |
//! | 8     | step index (u64) |
//! | 5·n²·16 | coefficients of `u₁, u₂, τ₁₁, τ₁₂, τ₂₂`, each block in row-major mode order as (re, im) f64 pairs |

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use crate::dynamics::State;
use crate::spectral::{
    FrequencyGrid, GridError, SpectralScalarField, SpectralSymTensorField, SpectralVectorField,
};

pub const MAGIC: &[u8; 8] = b"OLDROYDB";
pub const VERSION: u8 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("checkpoint I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    BadVersion(u8),
    #[error("checkpoint grid invalid: {0}")]
    Grid(#[from] GridError),
    #[error("checkpoint grid (n = {found_n}, L = {found_l}) does not match the configured grid (n = {n}, L = {l})")]
    GridMismatch {
        n: usize,
        l: f64,
        found_n: usize,
        found_l: f64,
    },
}

/// A restored state together with its step index.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub state: State,
    pub step: u64,
}

pub fn encode(state: &State, step: u64) -> Vec<u8> {
    let g = state.grid();
    let mut out = Vec::with_capacity(41 + 5 * g.len() * 16);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(g.n() as u64).to_le_bytes());
    out.extend_from_slice(&g.box_len().to_le_bytes());
    out.extend_from_slice(&state.t.to_le_bytes());
    out.extend_from_slice(&step.to_le_bytes());
    for comp in [
        &state.u.u1,
        &state.u.u2,
        &state.tau.t11,
        &state.tau.t12,
        &state.tau.t22,
    ] {
        for c in comp.coeffs() {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    out
}

fn take<const N: usize>(r: &mut impl Read) -> Result<[u8; N], CheckpointError> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

pub fn decode(mut r: impl Read) -> Result<Checkpoint, CheckpointError> {
    if &take::<8>(&mut r)? != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = take::<1>(&mut r)?[0];
    if version != VERSION {
        return Err(CheckpointError::BadVersion(version));
    }
    let n = u64::from_le_bytes(take::<8>(&mut r)?) as usize;
    let box_len = f64::from_le_bytes(take::<8>(&mut r)?);
    let t = f64::from_le_bytes(take::<8>(&mut r)?);
    let step = u64::from_le_bytes(take::<8>(&mut r)?);
    if n > 1 << 16 {
        return Err(CheckpointError::Grid(GridError::BadSize(n)));
    }
    let grid = FrequencyGrid::new(n, box_len)?;
    let mut read_comp = |grid: &Arc<FrequencyGrid>| -> Result<SpectralScalarField, CheckpointError> {
        let mut coeffs = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            let re = f64::from_le_bytes(take::<8>(&mut r)?);
            let im = f64::from_le_bytes(take::<8>(&mut r)?);
            coeffs.push(Complex64::new(re, im));
        }
        Ok(SpectralScalarField::from_coeffs(grid, coeffs))
    };
    let u1 = read_comp(&grid)?;
    let u2 = read_comp(&grid)?;
    let t11 = read_comp(&grid)?;
    let t12 = read_comp(&grid)?;
    let t22 = read_comp(&grid)?;
    Ok(Checkpoint {
        state: State {
            t,
            u: SpectralVectorField { u1, u2 },
            tau: SpectralSymTensorField { t11, t12, t22 },
        },
        step,
    })
}

/// Writes to a temporary sibling and renames it into place, so a reader
/// never sees a partial file.
pub fn write_checkpoint(path: &Path, state: &State, step: u64) -> Result<(), CheckpointError> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(&encode(state, step))?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint, CheckpointError> {
    let f = std::fs::File::open(path)?;
    decode(std::io::BufReader::new(f))
}

/// Reads a checkpoint and checks that it lives on the expected grid.
pub fn read_checkpoint_on(path: &Path, n: usize, box_len: f64) -> Result<Checkpoint, CheckpointError> {
    let c = read_checkpoint(path)?;
    let g = c.state.grid();
    if g.n() != n || g.box_len().to_bits() != box_len.to_bits() {
        return Err(CheckpointError::GridMismatch {
            n,
            l: box_len,
            found_n: g.n(),
            found_l: g.box_len(),
        });
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::init_data::random_small;

    #[test]
    fn roundtrip_is_bit_exact() {
        let g = FrequencyGrid::new(16, 3.0).unwrap();
        let mut s = random_small(&g, 11, 0.3).unwrap();
        s.t = 0.125;
        let bytes = encode(&s, 42);
        assert_eq!(bytes.len(), 41 + 5 * 256 * 16);
        assert_eq!(&bytes[..8], MAGIC);
        let back = decode(&bytes[..]).unwrap();
        assert_eq!(back.step, 42);
        assert_eq!(back.state.t, 0.125);
        assert_eq!(back.state.u.u2.coeffs(), s.u.u2.coeffs());
        assert_eq!(back.state.tau.t12.coeffs(), s.tau.t12.coeffs());
        assert_eq!(*back.state.grid().as_ref(), *g);
    }

    #[test]
    fn rejects_corrupt_input() {
        let g = FrequencyGrid::new(16, 3.0).unwrap();
        let s = State::zero(&g);
        let mut bytes = encode(&s, 0);
        assert!(matches!(decode(&bytes[..100]), Err(CheckpointError::Io(_))));
        bytes[8] = 9;
        assert!(matches!(decode(&bytes[..]), Err(CheckpointError::BadVersion(9))));
        bytes[0] = b'X';
        assert!(matches!(decode(&bytes[..]), Err(CheckpointError::BadMagic)));
    }

    #[test]
    fn file_roundtrip_and_grid_check() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.bin");
        let g = FrequencyGrid::new(16, 3.0).unwrap();
        write_checkpoint(&path, &State::zero(&g), 5).unwrap();
        assert_eq!(read_checkpoint_on(&path, 16, 3.0).unwrap().step, 5);
        assert!(matches!(
            read_checkpoint_on(&path, 32, 3.0),
            Err(CheckpointError::GridMismatch { .. })
        ));
    }
}
