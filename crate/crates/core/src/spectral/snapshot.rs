//! `SNSF` binary snapshots: magic, version, `n`, record count, then one
//! little-endian `(Re û1, Im û1, Re û2, Im û2)` record per retained wavevector
//! in row-major `(k1, k2)` order.

use num_complex::Complex64;
use std::io::{Read, Write};

use super::field::{SpectralVectorField, ZERO};
use super::grid::FourierGrid;
use crate::error::{Result, SnsError};

pub const MAGIC: &[u8; 4] = b"SNSF";
pub const VERSION: u32 = 1;

pub fn write_snapshot<W: Write>(mut out: W, field: &SpectralVectorField) -> Result<()> {
    let g = field.grid();
    let modes = g.retained_modes();
    let mut buf = Vec::with_capacity(16 + 32 * modes.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(g.n() as u32).to_le_bytes());
    buf.extend_from_slice(&(modes.len() as u32).to_le_bytes());
    for idx in modes {
        for c in 0..2 {
            let v = field.comp(c)[idx];
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
    }
    out.write_all(&buf)?;
    Ok(())
}

fn read_u32(bytes: &[u8], at: usize) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
        .ok_or_else(|| SnsError::Format("truncated header".into()))
}

pub fn read_snapshot<R: Read>(mut input: R) -> Result<SpectralVectorField> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() < 16 || &bytes[..4] != MAGIC {
        return Err(SnsError::Format("bad magic".into()));
    }
    let version = read_u32(&bytes, 4)?;
    if version != VERSION {
        return Err(SnsError::Format(format!("unsupported version {version}")));
    }
    let n = read_u32(&bytes, 8)? as usize;
    let count = read_u32(&bytes, 12)? as usize;
    let side = ((count + 1) as f64).sqrt().round() as usize;
    if side * side != count + 1 || side % 2 == 0 {
        return Err(SnsError::Format(format!("record count {count} is not a full square")));
    }
    let kmax = ((side - 1) / 2) as i32;
    let grid = [true, false]
        .into_iter()
        .filter_map(|d| FourierGrid::with_dealiasing(n, d).ok())
        .find(|g| g.kmax() == kmax)
        .ok_or_else(|| SnsError::Format(format!("radius {kmax} does not match n={n}")))?;
    if bytes.len() != 16 + 32 * count {
        return Err(SnsError::Format(format!(
            "payload is {} bytes, expected {}",
            bytes.len() - 16,
            32 * count
        )));
    }
    let mut comps = [vec![ZERO; grid.len()], vec![ZERO; grid.len()]];
    let f = |at: usize| f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
    for (r, idx) in grid.retained_modes().into_iter().enumerate() {
        let base = 16 + 32 * r;
        for (c, comp) in comps.iter_mut().enumerate() {
            let v = Complex64::new(f(base + 16 * c), f(base + 16 * c + 8));
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(SnsError::Format("non-finite coefficient".into()));
            }
            comp[idx] = v;
        }
    }
    let field = SpectralVectorField::from_components(&grid, comps)?;
    let scale = field.max_abs().max(f64::MIN_POSITIVE);
    let h = field.hermitian_residual();
    if h > 1e-12 * scale {
        return Err(SnsError::Format(format!("Hermitian symmetry violated ({h:e})")));
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::random_field;

    #[test]
    fn roundtrip_is_bitwise() {
        let g = FourierGrid::new(32).unwrap();
        let f = random_field(&g, 11, 2.0, true);
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &f).unwrap();
        let back = read_snapshot(&buf[..]).unwrap();
        for c in 0..2 {
            assert_eq!(f.comp(c), back.comp(c));
        }
    }

    #[test]
    fn rejects_asymmetric_payload() {
        let g = FourierGrid::new(16).unwrap();
        let f = random_field(&g, 1, 2.0, true);
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &f).unwrap();
        buf[16 + 6] ^= 0x10;
        assert!(matches!(read_snapshot(&buf[..]), Err(SnsError::Format(_))));
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        assert!(read_snapshot(&b"SNSX\x01\0\0\0"[..]).is_err());
        let g = FourierGrid::new(16).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &SpectralVectorField::zeros(&g)).unwrap();
        buf.pop();
        assert!(read_snapshot(&buf[..]).is_err());
    }
}
