//! PFM depth maps: grayscale `Pf`, little-endian (negative scale), rows
//! bottom-to-top. Infinite depths are encoded as +1e30.

use crate::error::{Error, Result};
use crate::raster::DepthMap;
use std::io::{Read, Write};
use std::path::Path;

const INF_ENCODING: f32 = 1e30;

pub fn write_pfm(path: &Path, depth: &DepthMap) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    write!(file, "Pf\n{} {}\n-1.0\n", depth.width, depth.height)?;
    let mut buf = Vec::with_capacity(depth.width * depth.height * 4);
    for r in (0..depth.height).rev() {
        for c in 0..depth.width {
            let v = depth.get(r, c);
            let v = if v.is_finite() { v } else { INF_ENCODING };
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    file.write_all(&buf)?;
    Ok(())
}

pub fn read_pfm(path: &Path) -> Result<DepthMap> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .map_err(|_| Error::MissingInput {
            path: path.to_path_buf(),
        })?
        .read_to_end(&mut bytes)?;
    // Header: three newline-terminated tokens.
    let mut pos = 0usize;
    let mut next_line = || -> Result<String> {
        let start = pos;
        while pos < bytes.len() && bytes[pos] != b'\n' {
            pos += 1;
        }
        if pos >= bytes.len() {
            return Err(Error::BadFormat("pfm: truncated header".into()));
        }
        let line = String::from_utf8_lossy(&bytes[start..pos]).into_owned();
        pos += 1;
        Ok(line)
    };
    if next_line()? != "Pf" {
        return Err(Error::BadFormat("pfm: expected grayscale 'Pf'".into()));
    }
    let dims = next_line()?;
    let mut it = dims.split_whitespace();
    let w: usize = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::BadFormat("pfm: bad width".into()))?;
    let h: usize = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::BadFormat("pfm: bad height".into()))?;
    let scale: f32 = next_line()?
        .trim()
        .parse()
        .map_err(|_| Error::BadFormat("pfm: bad scale".into()))?;
    let data = &bytes[pos..];
    if data.len() != w * h * 4 {
        return Err(Error::BadFormat(format!(
            "pfm: payload {} bytes, expected {}",
            data.len(),
            w * h * 4
        )));
    }
    let mut out = DepthMap::new(w, h);
    for rr in 0..h {
        let r = h - 1 - rr; // bottom-up storage
        for c in 0..w {
            let i = (rr * w + c) * 4;
            let raw: [u8; 4] = data[i..i + 4].try_into().unwrap();
            let v = if scale < 0.0 {
                f32::from_le_bytes(raw)
            } else {
                f32::from_be_bytes(raw)
            };
            out.set(r, c, if v >= 1e29 { f32::INFINITY } else { v });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_with_infinities() {
        let dir = tempfile::tempdir().unwrap();
        let mut d = DepthMap::new(5, 3);
        d.set(0, 0, 1.25);
        d.set(2, 4, 7.5);
        d.set(1, 2, f32::INFINITY);
        let path = dir.path().join("depth.pfm");
        write_pfm(&path, &d).unwrap();
        let back = read_pfm(&path).unwrap();
        assert_eq!(back, d);
    }
}
