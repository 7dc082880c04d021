//! PNG writers and readers: 8-bit RGB for images, 1-bit grayscale for masks.

use crate::error::{Error, Result};
use crate::raster::{ImageRgb, Mask};
use std::path::Path;

fn to_u8(x: f32) -> u8 {
    (x.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn save_rgb_png(path: &Path, image: &ImageRgb) -> Result<()> {
    let mut buf = image::RgbImage::new(image.width as u32, image.height as u32);
    for r in 0..image.height {
        for c in 0..image.width {
            let p = image.get(r, c);
            buf.put_pixel(
                c as u32,
                r as u32,
                image::Rgb([to_u8(p[0]), to_u8(p[1]), to_u8(p[2])]),
            );
        }
    }
    buf.save_with_format(path, image::ImageFormat::Png)?;
    Ok(())
}

pub fn load_rgb_png(path: &Path) -> Result<ImageRgb> {
    let img = image::ImageReader::open(path)
        .map_err(|_| Error::MissingInput {
            path: path.to_path_buf(),
        })?
        .decode()?
        .to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let mut out = ImageRgb::new(w, h);
    for r in 0..h {
        for c in 0..w {
            let p = img.get_pixel(c as u32, r as u32);
            out.set(
                r,
                c,
                [
                    p[0] as f32 / 255.0,
                    p[1] as f32 / 255.0,
                    p[2] as f32 / 255.0,
                ],
            );
        }
    }
    Ok(out)
}

/// Bilevel PNG: 1-bit grayscale, one bit per pixel.
pub fn save_bilevel_png(path: &Path, mask: &Mask) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let w = std::io::BufWriter::new(file);
    let mut encoder = png::Encoder::new(w, mask.width() as u32, mask.height() as u32);
    encoder.set_color(png::ColorType::Grayscale);
    encoder.set_depth(png::BitDepth::One);
    let mut writer = encoder.write_header()?;
    let row_bytes = mask.width().div_ceil(8);
    let mut data = vec![0u8; row_bytes * mask.height()];
    for r in 0..mask.height() {
        for c in 0..mask.width() {
            if mask.get(r, c) {
                // PNG packs the leftmost pixel into the high bit.
                data[r * row_bytes + c / 8] |= 0x80 >> (c % 8);
            }
        }
    }
    writer.write_image_data(&data)?;
    Ok(())
}

pub fn load_bilevel_png(path: &Path) -> Result<Mask> {
    let file = std::fs::File::open(path).map_err(|_| Error::MissingInput {
        path: path.to_path_buf(),
    })?;
    let decoder = png::Decoder::new(std::io::BufReader::new(file));
    let mut reader = decoder.read_info()?;
    let mut buf = vec![0u8; reader.output_buffer_size()];
    let info = reader.next_frame(&mut buf)?;
    if info.color_type != png::ColorType::Grayscale || info.bit_depth != png::BitDepth::One {
        return Err(Error::BadFormat("mask png must be 1-bit grayscale".into()));
    }
    let (w, h) = (info.width as usize, info.height as usize);
    let row_bytes = w.div_ceil(8);
    let mut mask = Mask::new(w, h);
    for r in 0..h {
        for c in 0..w {
            let bit = (buf[r * row_bytes + c / 8] >> (7 - c % 8)) & 1;
            if bit == 1 {
                mask.set(r, c, true);
            }
        }
    }
    Ok(mask)
}
