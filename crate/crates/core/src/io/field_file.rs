//! Binary part-field files.
//!
//! Layout (all little-endian):
//!   bytes 0..8    magic `PBFIELD1`
//!   bytes 8..12   u32 version (1)
//!   bytes 12..16  u32 resolution R
//!   bytes 16..40  f32 x6: bbox min xyz, bbox max xyz
//!   bytes 40..44  f32 kappa
//!   then R^3 f32 sigma values (x fastest, then y, then z),
//!   then R^3 rgb triples, f32 each, same voxel order.

use crate::error::{Error, Result};
use crate::math::{vec3, Aabb};
use crate::recon::field::PartField;
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 8] = b"PBFIELD1";
const VERSION: u32 = 1;

pub fn write_field(path: &Path, field: &PartField) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(field.resolution as u32).to_le_bytes())?;
    for v in [
        field.bbox.min.x,
        field.bbox.min.y,
        field.bbox.min.z,
        field.bbox.max.x,
        field.bbox.max.y,
        field.bbox.max.z,
    ] {
        w.write_all(&(v as f32).to_le_bytes())?;
    }
    w.write_all(&(field.kappa as f32).to_le_bytes())?;
    for &s in field.sigma_data() {
        w.write_all(&s.to_le_bytes())?;
    }
    for c in field.color_data() {
        for &ch in c {
            w.write_all(&ch.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_field(path: &Path) -> Result<PartField> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .map_err(|_| Error::MissingInput {
            path: path.to_path_buf(),
        })?
        .read_to_end(&mut bytes)?;
    if bytes.len() < 44 || &bytes[0..8] != MAGIC {
        return Err(Error::BadFormat("field file: bad magic".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let f32_at = |o: usize| f32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    if u32_at(8) != VERSION {
        return Err(Error::BadFormat(format!(
            "field file: unsupported version {}",
            u32_at(8)
        )));
    }
    let resolution = u32_at(12) as usize;
    let bbox = Aabb::new(
        vec3(f32_at(16) as f64, f32_at(20) as f64, f32_at(24) as f64),
        vec3(f32_at(28) as f64, f32_at(32) as f64, f32_at(36) as f64),
    );
    let kappa = f32_at(40) as f64;
    let n = resolution * resolution * resolution;
    let expected = 44 + n * 4 + n * 12;
    if bytes.len() != expected {
        return Err(Error::BadFormat(format!(
            "field file: {} bytes, expected {expected}",
            bytes.len()
        )));
    }
    let mut field = PartField::new(resolution, bbox, kappa);
    for iz in 0..resolution {
        for iy in 0..resolution {
            for ix in 0..resolution {
                let i = field.index(ix, iy, iz);
                let sigma = f32_at(44 + i * 4);
                let base = 44 + n * 4 + i * 12;
                let color = [f32_at(base), f32_at(base + 4), f32_at(base + 8)];
                if sigma != 0.0 || color != [0.0; 3] {
                    field.set_voxel(ix, iy, iz, sigma, color);
                }
            }
        }
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let bbox = Aabb::new(vec3(-1.0, -0.5, 0.0), vec3(1.0, 0.5, 2.0));
        let mut field = PartField::new(32, bbox, 50.0);
        field.set_voxel(3, 4, 5, 50.0, [0.25, 0.5, 0.75]);
        field.set_voxel(31, 0, 17, 12.5, [1.0, 0.0, 0.5]);
        let path = dir.path().join("part.field");
        write_field(&path, &field).unwrap();
        let back = read_field(&path).unwrap();
        assert_eq!(back.resolution, 32);
        assert_eq!(back.sigma_data(), field.sigma_data());
        assert_eq!(back.color_data(), field.color_data());
        assert!((back.kappa - 50.0).abs() < 1e-6);
    }
}
