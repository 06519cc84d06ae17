//! Binary snapshot container for a single spectral field.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic      4 bytes  b"SPFD"
//! version    u32      1
//! d          u32
//! L          u32
//! M_i        u32 x d
//! real flag  u8       0 or 1
//! dealias    f64      dealiasing fraction
//! payload    (re f64, im f64) per mode, row-major over axes, each axis
//!            in natural order m = -M_i/2, ..., M_i/2 - 1
//! ```

use std::io::{Read, Write};

use num_complex::Complex64;

use super::{GridSpec, SpectralField, MAX_DIM};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"SPFD";
const VERSION: u32 = 1;

/// Storage indices in natural (row-major, `m` ascending) order.
fn natural_order(grid: &GridSpec) -> Vec<usize> {
    let d = grid.dim();
    let mut out = Vec::with_capacity(grid.len());
    let mut mode = [0i64; MAX_DIM];
    let mut counter = [0usize; MAX_DIM];
    for _ in 0..grid.len() {
        for a in 0..d {
            mode[a] = counter[a] as i64 - (grid.modes()[a] / 2) as i64;
        }
        out.push(grid.index_of(&mode[..d]).expect("natural mode on lattice"));
        for a in (0..d).rev() {
            counter[a] += 1;
            if counter[a] < grid.modes()[a] {
                break;
            }
            counter[a] = 0;
        }
    }
    out
}

pub fn write_field<W: Write>(mut out: W, field: &SpectralField) -> Result<()> {
    let grid = field.grid();
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(grid.dim() as u32).to_le_bytes())?;
    out.write_all(&grid.scale().to_le_bytes())?;
    for &m in grid.modes() {
        out.write_all(&(m as u32).to_le_bytes())?;
    }
    out.write_all(&[field.is_real() as u8])?;
    out.write_all(&grid.dealias_fraction().to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * grid.len());
    for idx in natural_order(grid) {
        let c = field.coeffs()[idx];
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    input.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(input: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    input.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_field<R: Read>(mut input: R) -> Result<SpectralField> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = read_u32(&mut input)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let d = read_u32(&mut input)? as usize;
    if d == 0 || d > MAX_DIM {
        return Err(Error::Format(format!("dimension {d}")));
    }
    let scale = read_u32(&mut input)?;
    let modes = (0..d)
        .map(|_| read_u32(&mut input).map(|m| m as usize))
        .collect::<Result<Vec<_>>>()?;
    let mut flag = [0u8; 1];
    input.read_exact(&mut flag)?;
    let real = match flag[0] {
        0 => false,
        1 => true,
        other => return Err(Error::Format(format!("real flag {other}"))),
    };
    let fraction = read_f64(&mut input)?;
    let grid = GridSpec::anisotropic(scale, modes)?.with_dealias_fraction(fraction)?;
    let mut coeffs = vec![Complex64::default(); grid.len()];
    for idx in natural_order(&grid) {
        let re = read_f64(&mut input)?;
        let im = read_f64(&mut input)?;
        coeffs[idx] = Complex64::new(re, im);
    }
    SpectralField::new(grid, coeffs, real)
}
