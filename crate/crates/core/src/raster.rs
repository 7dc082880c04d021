//! Raster buffers shared across the pipeline: RGB images, depth maps and
//! bit-packed binary masks.
//!
//! Masks are the hot type — IoU is computed all-pairs during proposal
//! scoring — so they are stored row-padded in 64-bit words and all set
//! operations run on whole words.

use crate::error::{Error, Result};

/// Interleaved RGB image, components in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageRgb {
    pub width: usize,
    pub height: usize,
    data: Vec<[f32; 3]>,
}

impl ImageRgb {
    pub fn new(width: usize, height: usize) -> ImageRgb {
        ImageRgb {
            width,
            height,
            data: vec![[0.0; 3]; width * height],
        }
    }

    pub fn from_pixels(width: usize, height: usize, data: Vec<[f32; 3]>) -> ImageRgb {
        assert_eq!(data.len(), width * height);
        ImageRgb {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> [f32; 3] {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, rgb: [f32; 3]) {
        self.data[row * self.width + col] = rgb;
    }

    pub fn pixels(&self) -> &[[f32; 3]] {
        &self.data
    }

    pub fn pixels_mut(&mut self) -> &mut [[f32; 3]] {
        &mut self.data
    }

    pub fn same_size(&self, o: &ImageRgb) -> bool {
        self.width == o.width && self.height == o.height
    }

    /// Max per-channel absolute difference over all pixels.
    pub fn max_abs_diff(&self, o: &ImageRgb) -> f32 {
        assert!(self.same_size(o));
        self.data
            .iter()
            .zip(&o.data)
            .flat_map(|(a, b)| (0..3).map(move |c| (a[c] - b[c]).abs()))
            .fold(0.0, f32::max)
    }
}

/// Per-pixel depth along the camera ray; `f32::INFINITY` marks a miss.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    pub width: usize,
    pub height: usize,
    data: Vec<f32>,
}

impl DepthMap {
    pub fn new(width: usize, height: usize) -> DepthMap {
        DepthMap {
            width,
            height,
            data: vec![f32::INFINITY; width * height],
        }
    }

    pub fn from_data(width: usize, height: usize, data: Vec<f32>) -> DepthMap {
        assert_eq!(data.len(), width * height);
        DepthMap {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, depth: f32) {
        self.data[row * self.width + col] = depth;
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }
}

const WORD_BITS: usize = 64;

/// Bit-packed binary mask; each row starts on a fresh word boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: usize,
    height: usize,
    words_per_row: usize,
    words: Vec<u64>,
}

impl Mask {
    pub fn new(width: usize, height: usize) -> Mask {
        let words_per_row = width.div_ceil(WORD_BITS);
        Mask {
            width,
            height,
            words_per_row,
            words: vec![0; words_per_row * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Mask {
        let mut m = Mask::new(width, height);
        for r in 0..height {
            for c in 0..width {
                if f(r, c) {
                    m.set(r, c, true);
                }
            }
        }
        m
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn same_size(&self, o: &Mask) -> bool {
        self.width == o.width && self.height == o.height
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        let w = self.words[row * self.words_per_row + col / WORD_BITS];
        (w >> (col % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        let idx = row * self.words_per_row + col / WORD_BITS;
        let bit = 1u64 << (col % WORD_BITS);
        if value {
            self.words[idx] |= bit;
        } else {
            self.words[idx] &= !bit;
        }
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn intersection_count(&self, o: &Mask) -> usize {
        assert!(self.same_size(o));
        self.words
            .iter()
            .zip(&o.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn union_count(&self, o: &Mask) -> usize {
        assert!(self.same_size(o));
        self.words
            .iter()
            .zip(&o.words)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    pub fn is_disjoint(&self, o: &Mask) -> bool {
        self.words.iter().zip(&o.words).all(|(a, b)| a & b == 0)
    }

    pub fn union_with(&mut self, o: &Mask) {
        assert!(self.same_size(o));
        for (a, b) in self.words.iter_mut().zip(&o.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, o: &Mask) {
        assert!(self.same_size(o));
        for (a, b) in self.words.iter_mut().zip(&o.words) {
            *a &= b;
        }
    }

    pub fn subtract(&mut self, o: &Mask) {
        assert!(self.same_size(o));
        for (a, b) in self.words.iter_mut().zip(&o.words) {
            *a &= !b;
        }
    }

    /// Pixels set in `self`, scanline order.
    pub fn iter_set(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.height).flat_map(move |r| {
            (0..self.width).filter_map(move |c| if self.get(r, c) { Some((r, c)) } else { None })
        })
    }

    fn tail_mask(&self) -> u64 {
        let rem = self.width % WORD_BITS;
        if rem == 0 {
            u64::MAX
        } else {
            (1u64 << rem) - 1
        }
    }

    fn clear_row_tails(&mut self) {
        let tail = self.tail_mask();
        if tail == u64::MAX {
            return;
        }
        for r in 0..self.height {
            self.words[r * self.words_per_row + self.words_per_row - 1] &= tail;
        }
    }

    fn shifted_row_left(&self, row: usize, out: &mut [u64]) {
        // Shift towards lower column indices.
        let base = row * self.words_per_row;
        for (i, slot) in out.iter_mut().enumerate() {
            let cur = self.words[base + i] >> 1;
            let carry = if i + 1 < self.words_per_row {
                self.words[base + i + 1] << 63
            } else {
                0
            };
            *slot = cur | carry;
        }
    }

    fn shifted_row_right(&self, row: usize, out: &mut [u64]) {
        // Shift towards higher column indices.
        let base = row * self.words_per_row;
        for (i, slot) in out.iter_mut().enumerate() {
            let cur = self.words[base + i] << 1;
            let carry = if i > 0 {
                self.words[base + i - 1] >> 63
            } else {
                0
            };
            *slot = cur | carry;
        }
    }

    /// 4-neighbour dilation by one pixel.
    pub fn dilated(&self) -> Mask {
        let mut out = self.clone();
        let wpr = self.words_per_row;
        let mut tmp = vec![0u64; wpr];
        for r in 0..self.height {
            let base = r * wpr;
            self.shifted_row_left(r, &mut tmp);
            for (o, t) in out.words[base..base + wpr].iter_mut().zip(&tmp) {
                *o |= t;
            }
            self.shifted_row_right(r, &mut tmp);
            for (o, t) in out.words[base..base + wpr].iter_mut().zip(&tmp) {
                *o |= t;
            }
            if r > 0 {
                for i in 0..wpr {
                    out.words[base + i] |= self.words[base - wpr + i];
                }
            }
            if r + 1 < self.height {
                for i in 0..wpr {
                    out.words[base + i] |= self.words[base + wpr + i];
                }
            }
        }
        out.clear_row_tails();
        out
    }

    /// 4-neighbour erosion by one pixel; image border counts as background.
    ///
    /// Row-tail padding bits are kept zero, so shifted rows naturally feed
    /// zeros to the out-of-image neighbours and border pixels erode away.
    pub fn eroded(&self) -> Mask {
        let mut out = self.clone();
        let wpr = self.words_per_row;
        let mut tmp = vec![0u64; wpr];
        for r in 0..self.height {
            let base = r * wpr;
            self.shifted_row_left(r, &mut tmp);
            for (o, t) in out.words[base..base + wpr].iter_mut().zip(&tmp) {
                *o &= t;
            }
            self.shifted_row_right(r, &mut tmp);
            for (o, t) in out.words[base..base + wpr].iter_mut().zip(&tmp) {
                *o &= t;
            }
            if r > 0 {
                for i in 0..wpr {
                    out.words[base + i] &= self.words[base - wpr + i];
                }
            } else {
                out.words[base..base + wpr].fill(0);
            }
            if r + 1 < self.height {
                for i in 0..wpr {
                    out.words[base + i] &= self.words[base + wpr + i];
                }
            } else {
                out.words[base..base + wpr].fill(0);
            }
        }
        out.clear_row_tails();
        out
    }

    /// Pixel of the mask closest to its centroid (scanline tie-break).
    pub fn centroid_pixel(&self) -> Option<(usize, usize)> {
        if self.is_empty() {
            return None;
        }
        let (mut sr, mut sc, mut n) = (0f64, 0f64, 0f64);
        for (r, c) in self.iter_set() {
            sr += r as f64;
            sc += c as f64;
            n += 1.0;
        }
        let (cr, cc) = (sr / n, sc / n);
        let mut best = None;
        let mut best_d = f64::INFINITY;
        for (r, c) in self.iter_set() {
            let d = (r as f64 - cr).powi(2) + (c as f64 - cc).powi(2);
            if d < best_d {
                best_d = d;
                best = Some((r, c));
            }
        }
        best
    }
}

/// Apply a mask to an image: keep pixels inside, zero outside.
pub fn apply_mask(image: &ImageRgb, mask: &Mask) -> ImageRgb {
    assert_eq!(image.width, mask.width());
    assert_eq!(image.height, mask.height());
    let mut out = ImageRgb::new(image.width, image.height);
    for r in 0..image.height {
        for c in 0..image.width {
            if mask.get(r, c) {
                out.set(r, c, image.get(r, c));
            }
        }
    }
    out
}

/// PSNR over masked pixels with peak 1.0, capped at 99 dB.
pub fn foreground_psnr(a: &ImageRgb, b: &ImageRgb, mask: &Mask) -> Result<f64> {
    if !a.same_size(b) || a.width != mask.width() || a.height != mask.height() {
        return Err(Error::InvalidInput(
            "foreground_psnr: mismatched resolutions".into(),
        ));
    }
    let mut sum = 0.0f64;
    let mut n = 0usize;
    for (r, c) in mask.iter_set() {
        let pa = a.get(r, c);
        let pb = b.get(r, c);
        for ch in 0..3 {
            let d = pa[ch] as f64 - pb[ch] as f64;
            sum += d * d;
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyForeground);
    }
    let mse = sum / (3 * n) as f64;
    if mse == 0.0 {
        return Ok(99.0);
    }
    Ok((10.0 * (1.0 / mse).log10()).min(99.0))
}
