//! Colour-coded segmentation maps: palette construction, mask encoding and
//! nearest-colour decoding with small-part culling.
//!
//! Background is reserved black. Palette colours live on a 0.25-spaced RGB
//! lattice and are picked by farthest-point sampling, which guarantees a
//! pairwise L-inf separation of at least 0.25 and the same margin from
//! black — comfortably above the quantisation and noise levels the decoder
//! has to absorb.

use crate::error::{Error, Result};
use crate::raster::{ImageRgb, Mask};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_Q: usize = 16;
pub const DEFAULT_MIN_PIXELS: usize = 10;
pub const MIN_COLOR_SEPARATION: f64 = 0.25;

/// Q reference colours, none of them near-black.
#[derive(Debug, Clone, PartialEq)]
pub struct Palette {
    pub colors: Vec<[f64; 3]>,
}

impl Palette {
    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }
}

fn linf(a: [f64; 3], b: [f64; 3]) -> f64 {
    (a[0] - b[0])
        .abs()
        .max((a[1] - b[1]).abs())
        .max((a[2] - b[2]).abs())
}

fn l2_sq(a: [f64; 3], b: [f32; 3]) -> f64 {
    let d0 = a[0] - b[0] as f64;
    let d1 = a[1] - b[1] as f64;
    let d2 = a[2] - b[2] as f64;
    d0 * d0 + d1 * d1 + d2 * d2
}

/// Farthest-point palette on the RGB lattice, seeded tie-breaking.
///
/// Black is used as an anchor so all picked colours keep distance from the
/// background as well as from each other.
pub fn make_palette(q: usize, seed: u64) -> Result<Palette> {
    if !(2..=64).contains(&q) {
        return Err(Error::InvalidInput(format!(
            "palette Q={q} outside [2, 64]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let levels = [0.0, 0.25, 0.5, 0.75, 1.0];
    let mut candidates = Vec::new();
    for &r in &levels {
        for &g in &levels {
            for &b in &levels {
                let c = [r, g, b];
                // Keep a wide margin from the reserved background.
                if linf(c, [0.0, 0.0, 0.0]) >= 0.5 {
                    candidates.push(c);
                }
            }
        }
    }
    let mut chosen: Vec<[f64; 3]> = Vec::with_capacity(q);
    let anchor = [0.0, 0.0, 0.0];
    for _ in 0..q {
        let mut best_d = f64::NEG_INFINITY;
        let mut ties: Vec<usize> = Vec::new();
        for (i, &c) in candidates.iter().enumerate() {
            if chosen.contains(&c) {
                continue;
            }
            let mut d = linf(c, anchor);
            for &p in &chosen {
                d = d.min(linf(c, p));
            }
            if d > best_d + 1e-12 {
                best_d = d;
                ties = vec![i];
            } else if (d - best_d).abs() <= 1e-12 {
                ties.push(i);
            }
        }
        let pick = ties[rng.gen_range(0..ties.len())];
        chosen.push(candidates[pick]);
    }
    Ok(Palette { colors: chosen })
}

/// Colour-coded segmentation image plus the naming permutation it used.
#[derive(Debug, Clone)]
pub struct SegEncoding {
    /// Permutation over palette indices; part k is painted `palette[perm[k]]`.
    pub perm: Vec<usize>,
    pub image: ImageRgb,
}

/// Seeded random permutation of `{0, .., q-1}`.
pub fn random_permutation(q: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..q).collect();
    // Fisher-Yates.
    for i in (1..q).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    perm
}

/// Paint each mask with its permuted palette colour; background stays black.
pub fn encode(masks: &[Mask], palette: &Palette, perm: &[usize]) -> Result<SegEncoding> {
    if masks.len() > palette.len() {
        return Err(Error::TooManyParts {
            parts: masks.len(),
            colors: palette.len(),
        });
    }
    if perm.len() < palette.len() {
        return Err(Error::InvalidInput(
            "permutation shorter than palette".into(),
        ));
    }
    let (w, h) = match masks.first() {
        Some(m) => (m.width(), m.height()),
        None => {
            return Err(Error::InvalidInput("encode: no masks".into()));
        }
    };
    let mut seen = Mask::new(w, h);
    let mut image = ImageRgb::new(w, h);
    for (k, mask) in masks.iter().enumerate() {
        if !mask.same_size(&seen) {
            return Err(Error::InvalidInput("encode: mask size mismatch".into()));
        }
        if !mask.is_disjoint(&seen) {
            return Err(Error::InvalidInput("encode: masks overlap".into()));
        }
        seen.union_with(mask);
        let c = palette.colors[perm[k]];
        let rgb = [c[0] as f32, c[1] as f32, c[2] as f32];
        for (r, col) in mask.iter_set() {
            image.set(r, col, rgb);
        }
    }
    Ok(SegEncoding {
        perm: perm.to_vec(),
        image,
    })
}

/// Decoded mask together with the palette colour index it was read from.
#[derive(Debug, Clone)]
pub struct DecodedPart {
    pub palette_index: usize,
    pub mask: Mask,
}

/// Nearest-colour decoding. Every pixel is assigned to its nearest palette
/// colour, or to background when black is nearest; per-colour masks smaller
/// than `min_pixels` are discarded.
pub fn decode(image: &ImageRgb, palette: &Palette, min_pixels: usize) -> Vec<DecodedPart> {
    let (w, h) = (image.width, image.height);
    let mut masks: Vec<Mask> = (0..palette.len()).map(|_| Mask::new(w, h)).collect();
    for r in 0..h {
        for c in 0..w {
            let px = image.get(r, c);
            let mut best = l2_sq([0.0, 0.0, 0.0], px); // background candidate
            let mut arg = None;
            for (i, &col) in palette.colors.iter().enumerate() {
                let d = l2_sq(col, px);
                if d < best {
                    best = d;
                    arg = Some(i);
                }
            }
            if let Some(i) = arg {
                masks[i].set(r, c, true);
            }
        }
    }
    masks
        .into_iter()
        .enumerate()
        .filter(|(_, m)| {
            let n = m.count();
            n > 0 && n >= min_pixels
        })
        .map(|(palette_index, mask)| DecodedPart {
            palette_index,
            mask,
        })
        .collect()
}
