//! Binary field snapshots.
//!
//! Layout (all multi-byte values little-endian):
//!
//! ```text
//! magic          4 bytes  "MHDV"
//! format_version u32      1
//! n              u32
//! alpha          f64
//! mu             f64
//! nu             f64
//! t              f64
//! step           u64
//! field_count    u8       2 (u, then B)
//! payload        2 · n³ · 48 bytes
//! ```
//!
//! Per field, coefficients run over the wavevector lattice in the order
//! k₁ = −n/2 … n/2−1 (slowest), then k₂, then k₃ (fastest); each mode stores
//! the complex 3-vector as (re, im) f64 pairs, components in order. Masked
//! modes are stored as explicit zeros for a fixed-stride layout.

use anyhow::{bail, Context, Result};
use mhdv_core::{SpectralField, WavenumberGrid};
use mhdv_core::stepper::SimState;
use num_complex::Complex64;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const MAGIC: [u8; 4] = *b"MHDV";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub n: usize,
    pub alpha: f64,
    pub mu: f64,
    pub nu: f64,
    pub t: f64,
    pub step: u64,
    pub u: SpectralField,
    pub b: SpectralField,
}

impl Snapshot {
    pub fn state(&self) -> SimState {
        let mut st = SimState::new(self.u.clone(), self.b.clone());
        st.t = self.t;
        st.step_index = self.step;
        st
    }
}

fn write_field(w: &mut impl Write, f: &SpectralField) -> std::io::Result<()> {
    let grid = f.grid();
    let half = grid.n() as i32 / 2;
    for k1 in -half..half {
        for k2 in -half..half {
            for k3 in -half..half {
                let idx = grid.index_of([k1, k2, k3]);
                for c in 0..3 {
                    let z = f.coeff(c, idx);
                    w.write_all(&z.re.to_le_bytes())?;
                    w.write_all(&z.im.to_le_bytes())?;
                }
            }
        }
    }
    Ok(())
}

pub fn save_snapshot(
    state: &SimState,
    alpha: f64,
    mu: f64,
    nu: f64,
    path: &Path,
) -> Result<()> {
    let ctx = || format!("writing snapshot {}", path.display());
    let mut w = BufWriter::new(File::create(path).with_context(ctx)?);
    let n = state.u.grid().n() as u32;
    w.write_all(&MAGIC).with_context(ctx)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes()).with_context(ctx)?;
    w.write_all(&n.to_le_bytes()).with_context(ctx)?;
    w.write_all(&alpha.to_le_bytes()).with_context(ctx)?;
    w.write_all(&mu.to_le_bytes()).with_context(ctx)?;
    w.write_all(&nu.to_le_bytes()).with_context(ctx)?;
    w.write_all(&state.t.to_le_bytes()).with_context(ctx)?;
    w.write_all(&state.step_index.to_le_bytes()).with_context(ctx)?;
    w.write_all(&[2u8]).with_context(ctx)?;
    write_field(&mut w, &state.u).with_context(ctx)?;
    write_field(&mut w, &state.b).with_context(ctx)?;
    w.flush().with_context(ctx)?;
    Ok(())
}

fn read_exact_ctx(r: &mut impl Read, buf: &mut [u8], path: &Path) -> Result<()> {
    r.read_exact(buf)
        .with_context(|| format!("snapshot {}: truncated or unreadable", path.display()))
}

fn read_u32(r: &mut impl Read, path: &Path) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact_ctx(r, &mut b, path)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read, path: &Path) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact_ctx(r, &mut b, path)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read, path: &Path) -> Result<f64> {
    let mut b = [0u8; 8];
    read_exact_ctx(r, &mut b, path)?;
    Ok(f64::from_le_bytes(b))
}

fn read_field(r: &mut impl Read, grid: &WavenumberGrid, path: &Path) -> Result<SpectralField> {
    let m = grid.modes();
    let half = grid.n() as i32 / 2;
    let mut coeffs =
        [vec![Complex64::default(); m], vec![Complex64::default(); m], vec![
            Complex64::default();
            m
        ]];
    let mut buf = vec![0u8; m * 48];
    read_exact_ctx(r, &mut buf, path)?;
    let mut pos = 0usize;
    for k1 in -half..half {
        for k2 in -half..half {
            for k3 in -half..half {
                let idx = grid.index_of([k1, k2, k3]);
                for c in 0..3 {
                    let re = f64::from_le_bytes(buf[pos..pos + 8].try_into().unwrap());
                    let im = f64::from_le_bytes(buf[pos + 8..pos + 16].try_into().unwrap());
                    pos += 16;
                    if re.is_nan() || im.is_nan() {
                        bail!(
                            "snapshot {}: NaN coefficient at mode ({k1},{k2},{k3})",
                            path.display()
                        );
                    }
                    coeffs[c][idx] = Complex64::new(re, im);
                }
            }
        }
    }
    let mut f = SpectralField::from_components(grid, coeffs)
        .map_err(|e| anyhow::anyhow!("snapshot {}: {e}", path.display()))?;
    if f.max_divergence() <= 1e-10 {
        f.mark_divfree();
    }
    Ok(f)
}

pub fn load_snapshot(path: &Path) -> Result<Snapshot> {
    let mut r = BufReader::new(
        File::open(path).with_context(|| format!("opening snapshot {}", path.display()))?,
    );
    let mut magic = [0u8; 4];
    read_exact_ctx(&mut r, &mut magic, path)?;
    if magic != MAGIC {
        bail!("snapshot {}: bad magic {magic:02x?}", path.display());
    }
    let version = read_u32(&mut r, path)?;
    if version != FORMAT_VERSION {
        bail!(
            "snapshot {}: unsupported format version {version} (expected {FORMAT_VERSION})",
            path.display()
        );
    }
    let n = read_u32(&mut r, path)? as usize;
    let grid = WavenumberGrid::new(n)
        .map_err(|e| anyhow::anyhow!("snapshot {}: {e}", path.display()))?;
    let alpha = read_f64(&mut r, path)?;
    let mu = read_f64(&mut r, path)?;
    let nu = read_f64(&mut r, path)?;
    let t = read_f64(&mut r, path)?;
    let step = read_u64(&mut r, path)?;
    let mut fc = [0u8; 1];
    read_exact_ctx(&mut r, &mut fc, path)?;
    if fc[0] != 2 {
        bail!("snapshot {}: expected 2 fields, found {}", path.display(), fc[0]);
    }
    let u = read_field(&mut r, &grid, path)?;
    let b = read_field(&mut r, &grid, path)?;
    // trailing data means the writer and reader disagree about the layout
    let mut probe = [0u8; 1];
    if r.read(&mut probe).with_context(|| path.display().to_string())? != 0 {
        bail!("snapshot {}: trailing bytes after payload", path.display());
    }
    Ok(Snapshot { n, alpha, mu, nu, t, step, u, b })
}
