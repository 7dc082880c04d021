//! Conditioning block files: 16-byte header then channel-major float32.
//!
//! Header layout (little-endian):
//!   bytes 0..8    magic `PBCOND1\0`
//!   bytes 8..12   u32 version (1)
//!   bytes 12..14  u16 latent height
//!   bytes 14..16  u16 latent width
//! Payload: 25 * height * width f32 values in C order (channel, row, col).

use crate::completer::{ConditioningBlock, COND_CHANNELS};
use crate::error::{Error, Result};
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 8] = b"PBCOND1\0";
const VERSION: u32 = 1;

pub fn write_conditioning(path: &Path, block: &ConditioningBlock) -> Result<()> {
    if block.latent_height > u16::MAX as usize || block.latent_width > u16::MAX as usize {
        return Err(Error::BadResolution("latent dims exceed u16".into()));
    }
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(block.latent_height as u16).to_le_bytes())?;
    w.write_all(&(block.latent_width as u16).to_le_bytes())?;
    for &v in &block.data {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_conditioning(path: &Path) -> Result<ConditioningBlock> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .map_err(|_| Error::MissingInput {
            path: path.to_path_buf(),
        })?
        .read_to_end(&mut bytes)?;
    if bytes.len() < 16 || &bytes[0..8] != MAGIC {
        return Err(Error::BadFormat("conditioning file: bad magic".into()));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != VERSION {
        return Err(Error::BadFormat(format!(
            "conditioning file: unsupported version {version}"
        )));
    }
    let h = u16::from_le_bytes(bytes[12..14].try_into().unwrap()) as usize;
    let w = u16::from_le_bytes(bytes[14..16].try_into().unwrap()) as usize;
    let expected = 16 + COND_CHANNELS * h * w * 4;
    if bytes.len() != expected {
        return Err(Error::BadFormat(format!(
            "conditioning file: {} bytes, expected {expected}",
            bytes.len()
        )));
    }
    let mut data = Vec::with_capacity(COND_CHANNELS * h * w);
    for i in 0..COND_CHANNELS * h * w {
        let o = 16 + i * 4;
        data.push(f32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()));
    }
    Ok(ConditioningBlock {
        latent_height: h,
        latent_width: w,
        data,
    })
}
