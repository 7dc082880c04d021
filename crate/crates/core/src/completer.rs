//! Contextual part completion: the request/result contract, the non-learned
//! reference completers, and the 25-channel conditioning layout used to
//! hand requests to an external model.

use crate::error::{Error, Result};
use crate::raster::{apply_mask, ImageRgb, Mask};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Which completer produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompleterId {
    Oracle,
    Passthrough,
    Symmetry,
}

impl std::fmt::Display for CompleterId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CompleterId::Oracle => write!(f, "oracle"),
            CompleterId::Passthrough => write!(f, "passthrough"),
            CompleterId::Symmetry => write!(f, "symmetry"),
        }
    }
}

impl std::str::FromStr for CompleterId {
    type Err = Error;
    fn from_str(s: &str) -> Result<CompleterId> {
        match s {
            "oracle" => Ok(CompleterId::Oracle),
            "passthrough" => Ok(CompleterId::Passthrough),
            "symmetry" => Ok(CompleterId::Symmetry),
            other => Err(Error::InvalidInput(format!("unknown completer '{other}'"))),
        }
    }
}

/// Completion input: the masked part view, the full view for context, and
/// the visibility mask.
#[derive(Debug, Clone)]
pub struct CompletionRequest {
    pub masked_image: ImageRgb,
    pub context_image: ImageRgb,
    pub mask: Mask,
}

impl CompletionRequest {
    /// Build a request from a context image and a visibility mask.
    pub fn from_context(context_image: &ImageRgb, mask: &Mask) -> CompletionRequest {
        CompletionRequest {
            masked_image: apply_mask(context_image, mask),
            context_image: context_image.clone(),
            mask: mask.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.masked_image.same_size(&self.context_image)
            || self.masked_image.width != self.mask.width()
            || self.masked_image.height != self.mask.height()
        {
            return Err(Error::InvalidInput(
                "completion request buffers disagree on resolution".into(),
            ));
        }
        for r in 0..self.mask.height() {
            for c in 0..self.mask.width() {
                if !self.mask.get(r, c) {
                    let p = self.masked_image.get(r, c);
                    if p != [0.0, 0.0, 0.0] {
                        return Err(Error::InvalidInput(format!(
                            "masked image nonzero outside mask at ({r}, {c})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A completed multi-view part image.
#[derive(Debug, Clone)]
pub struct CompletionResult {
    pub part_image: ImageRgb,
    pub part_foreground: Mask,
    pub completer: CompleterId,
    pub seed: u64,
    /// Set when the request carried no visible evidence (empty mask).
    pub no_evidence: bool,
}

/// Upper-bound completer: returns the ground-truth part render verbatim.
pub fn complete_oracle(
    req: &CompletionRequest,
    gt_part_view: &ImageRgb,
    gt_part_mask: &Mask,
) -> Result<CompletionResult> {
    if !req.context_image.same_size(gt_part_view) {
        return Err(Error::InvalidInput(
            "oracle ground truth resolution mismatch".into(),
        ));
    }
    Ok(CompletionResult {
        part_image: gt_part_view.clone(),
        part_foreground: gt_part_mask.clone(),
        completer: CompleterId::Oracle,
        seed: 0,
        no_evidence: false,
    })
}

/// Lower-bound completer: no completion at all, the masked image passes
/// through unchanged.
pub fn complete_passthrough(req: &CompletionRequest) -> CompletionResult {
    CompletionResult {
        part_image: req.masked_image.clone(),
        part_foreground: req.mask.clone(),
        completer: CompleterId::Passthrough,
        seed: 0,
        no_evidence: req.mask.is_empty(),
    }
}

fn is_foreground(px: [f32; 3]) -> bool {
    px[0] > 1e-6 || px[1] > 1e-6 || px[2] > 1e-6
}

/// Deterministic heuristic completer.
///
/// Occlusion candidates are the context-foreground pixels outside the
/// visible mask (the part can only continue behind other parts). Each
/// candidate takes the colour of its mirror across the tile's vertical axis
/// when that mirror pixel is visible; leftover holes take the colour of the
/// nearest visible pixel (multi-source BFS, deterministic order). Visible
/// pixels are passed through untouched.
pub fn complete_symmetry(req: &CompletionRequest) -> CompletionResult {
    let (w, h) = (req.context_image.width, req.context_image.height);
    let (tile_w, tile_h) = (w / 2, h / 2);
    if req.mask.is_empty() {
        return CompletionResult {
            part_image: ImageRgb::new(w, h),
            part_foreground: Mask::new(w, h),
            completer: CompleterId::Symmetry,
            seed: 0,
            no_evidence: true,
        };
    }

    let mut out = req.masked_image.clone();
    let mut fg = req.mask.clone();
    let mut holes: Vec<(usize, usize)> = Vec::new();
    for r in 0..h {
        for c in 0..w {
            if req.mask.get(r, c) || !is_foreground(req.context_image.get(r, c)) {
                continue;
            }
            // Mirror across the vertical axis of this pixel's tile.
            let tile_c0 = (c / tile_w) * tile_w;
            let mc = tile_c0 + (tile_w - 1 - (c - tile_c0));
            if req.mask.get(r, mc) {
                out.set(r, c, req.masked_image.get(r, mc));
            } else {
                holes.push((r, c));
            }
            fg.set(r, c, true);
        }
    }

    if !holes.is_empty() {
        // Multi-source BFS from visible pixels, constrained to each tile so a
        // fill never crosses view boundaries.
        let mut dist = vec![u32::MAX; w * h];
        let mut color: Vec<[f32; 3]> = vec![[0.0; 3]; w * h];
        let mut queue = VecDeque::new();
        for (r, c) in req.mask.iter_set() {
            dist[r * w + c] = 0;
            color[r * w + c] = req.masked_image.get(r, c);
            queue.push_back((r, c));
        }
        while let Some((r, c)) = queue.pop_front() {
            let d = dist[r * w + c];
            let (tr0, tc0) = ((r / tile_h) * tile_h, (c / tile_w) * tile_w);
            let neighbours = [
                (r.wrapping_sub(1), c),
                (r + 1, c),
                (r, c.wrapping_sub(1)),
                (r, c + 1),
            ];
            for (nr, nc) in neighbours {
                if nr < tr0 || nr >= tr0 + tile_h || nc < tc0 || nc >= tc0 + tile_w {
                    continue;
                }
                let idx = nr * w + nc;
                if dist[idx] == u32::MAX {
                    dist[idx] = d + 1;
                    color[idx] = color[r * w + c];
                    queue.push_back((nr, nc));
                }
            }
        }
        for (r, c) in holes {
            if dist[r * w + c] != u32::MAX {
                out.set(r, c, color[r * w + c]);
            }
        }
    }

    CompletionResult {
        part_image: out,
        part_foreground: fg,
        completer: CompleterId::Symmetry,
        seed: 0,
        no_evidence: false,
    }
}

// ---------------------------------------------------------------------------
// Conditioning layout
// ---------------------------------------------------------------------------

/// Spatial downsampling factor between image and latent resolution.
pub const LATENT_FACTOR: usize = 8;
/// Channels per pseudo-latent block.
pub const LATENT_CHANNELS: usize = 8;
/// Total conditioning channels: noise slot + two pseudo-latents + mask.
pub const COND_CHANNELS: usize = 25;

/// Role of each channel range in a conditioning block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelRole {
    NoiseSlot,
    MaskedLatent,
    ContextLatent,
    Mask,
}

pub fn channel_role(channel: usize) -> ChannelRole {
    match channel {
        0..=7 => ChannelRole::NoiseSlot,
        8..=15 => ChannelRole::MaskedLatent,
        16..=23 => ChannelRole::ContextLatent,
        24 => ChannelRole::Mask,
        _ => panic!("channel {channel} out of range"),
    }
}

/// 25 x latent_h x latent_w conditioning tensor, channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditioningBlock {
    pub latent_width: usize,
    pub latent_height: usize,
    pub data: Vec<f32>,
}

impl ConditioningBlock {
    #[inline]
    pub fn get(&self, channel: usize, row: usize, col: usize) -> f32 {
        self.data[(channel * self.latent_height + row) * self.latent_width + col]
    }

    fn set(&mut self, channel: usize, row: usize, col: usize, v: f32) {
        self.data[(channel * self.latent_height + row) * self.latent_width + col] = v;
    }
}

fn pool_image(img: &ImageRgb, lr: usize, lc: usize) -> [f32; 3] {
    let mut acc = [0.0f64; 3];
    for r in 0..LATENT_FACTOR {
        for c in 0..LATENT_FACTOR {
            let p = img.get(lr * LATENT_FACTOR + r, lc * LATENT_FACTOR + c);
            for ch in 0..3 {
                acc[ch] += p[ch] as f64;
            }
        }
    }
    let n = (LATENT_FACTOR * LATENT_FACTOR) as f64;
    [
        (acc[0] / n) as f32,
        (acc[1] / n) as f32,
        (acc[2] / n) as f32,
    ]
}

/// Serialize a request into the 25-channel conditioning block: channels 0-7
/// are the empty noise slot, 8-15 the pseudo-latent of the masked image,
/// 16-23 the pseudo-latent of the context image, channel 24 the mask pooled
/// to latent resolution (kept unencoded). A pseudo-latent is the 8x
/// average-pooled RGB in its first three channels, zeros elsewhere.
pub fn pack_conditioning(req: &CompletionRequest) -> Result<ConditioningBlock> {
    let (w, h) = (req.context_image.width, req.context_image.height);
    if w % LATENT_FACTOR != 0 || h % LATENT_FACTOR != 0 {
        return Err(Error::BadResolution(format!(
            "{w}x{h} not divisible by the latent factor {LATENT_FACTOR}"
        )));
    }
    let (lw, lh) = (w / LATENT_FACTOR, h / LATENT_FACTOR);
    let mut block = ConditioningBlock {
        latent_width: lw,
        latent_height: lh,
        data: vec![0.0; COND_CHANNELS * lw * lh],
    };
    for lr in 0..lh {
        for lc in 0..lw {
            let masked = pool_image(&req.masked_image, lr, lc);
            let context = pool_image(&req.context_image, lr, lc);
            for ch in 0..3 {
                block.set(LATENT_CHANNELS + ch, lr, lc, masked[ch]);
                block.set(2 * LATENT_CHANNELS + ch, lr, lc, context[ch]);
            }
            let mut covered = 0usize;
            for r in 0..LATENT_FACTOR {
                for c in 0..LATENT_FACTOR {
                    if req.mask.get(lr * LATENT_FACTOR + r, lc * LATENT_FACTOR + c) {
                        covered += 1;
                    }
                }
            }
            block.set(
                COND_CHANNELS - 1,
                lr,
                lc,
                covered as f32 / (LATENT_FACTOR * LATENT_FACTOR) as f32,
            );
        }
    }
    Ok(block)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// One 16x16 tile world (grid 32x32): a centered symmetric square part,
    /// left half occluded.
    fn symmetric_fixture() -> (CompletionRequest, ImageRgb, Mask) {
        let (w, h) = (32, 32);
        let mut gt = ImageRgb::new(w, h);
        let mut gt_mask = Mask::new(w, h);
        let mut context = ImageRgb::new(w, h);
        let mut visible = Mask::new(w, h);
        for tile in 0..4usize {
            let (r0, c0) = ((tile / 2) * 16, (tile % 2) * 16);
            for r in 4..12 {
                for c in 4..12 {
                    // Symmetric colour pattern within the tile.
                    let shade = 0.3 + 0.05 * ((c as f32 - 7.5).abs());
                    gt.set(r0 + r, c0 + c, [shade, 0.5, 0.2]);
                    gt_mask.set(r0 + r, c0 + c, true);
                    context.set(r0 + r, c0 + c, [shade, 0.5, 0.2]);
                    visible.set(r0 + r, c0 + c, c >= 8);
                    if c < 8 {
                        // Occluder colour in the context image.
                        context.set(r0 + r, c0 + c, [0.9, 0.9, 0.1]);
                    }
                }
            }
        }
        (
            CompletionRequest::from_context(&context, &visible),
            gt,
            gt_mask,
        )
    }

    #[test]
    fn request_validation_catches_leakage() {
        let (req, _, _) = symmetric_fixture();
        req.validate().unwrap();
        let mut bad = req.clone();
        bad.masked_image.set(0, 0, [0.5, 0.0, 0.0]);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn oracle_returns_ground_truth() {
        let (req, gt, gt_mask) = symmetric_fixture();
        let res = complete_oracle(&req, &gt, &gt_mask).unwrap();
        assert_eq!(res.part_image, gt);
        assert_eq!(res.part_foreground, gt_mask);
    }

    #[test]
    fn passthrough_fully_occluded_is_black() {
        let context = ImageRgb::new(16, 16);
        let req = CompletionRequest::from_context(&context, &Mask::new(16, 16));
        let res = complete_passthrough(&req);
        assert!(res.no_evidence);
        assert!(res.part_image.pixels().iter().all(|p| *p == [0.0; 3]));
    }

    #[test]
    fn symmetry_beats_passthrough_on_symmetric_part() {
        let (req, gt, gt_mask) = symmetric_fixture();
        let sym = complete_symmetry(&req);
        let pt = complete_passthrough(&req);
        let psnr_sym = crate::raster::foreground_psnr(&sym.part_image, &gt, &gt_mask).unwrap();
        let psnr_pt = crate::raster::foreground_psnr(&pt.part_image, &gt, &gt_mask).unwrap();
        assert!(
            psnr_sym > psnr_pt,
            "symmetry {psnr_sym} dB vs passthrough {psnr_pt} dB"
        );
        // Mirror reconstruction is exact here: occluded colours mirror the
        // visible half of a symmetric pattern.
        assert_eq!(psnr_sym, 99.0);
    }

    #[test]
    fn symmetry_no_occlusion_is_identity() {
        // Single visible part covering all of the context foreground.
        let (w, h) = (32, 32);
        let mut context = ImageRgb::new(w, h);
        let mut mask = Mask::new(w, h);
        for r in 10..20 {
            for c in 3..13 {
                context.set(r, c, [0.4, 0.3, 0.2]);
                mask.set(r, c, true);
            }
        }
        let req = CompletionRequest::from_context(&context, &mask);
        let res = complete_symmetry(&req);
        assert_eq!(res.part_image, req.masked_image);
        assert_eq!(res.part_foreground, mask);
    }

    #[test]
    fn symmetry_preserves_visible_evidence_and_covers_mask() {
        let (req, _, _) = symmetric_fixture();
        let res = complete_symmetry(&req);
        for (r, c) in req.mask.iter_set() {
            assert_eq!(res.part_image.get(r, c), req.masked_image.get(r, c));
            assert!(res.part_foreground.get(r, c));
        }
    }

    #[test]
    fn completers_are_deterministic() {
        let (req, _, _) = symmetric_fixture();
        let a = complete_symmetry(&req);
        let b = complete_symmetry(&req);
        assert_eq!(a.part_image, b.part_image);
        assert_eq!(a.part_foreground, b.part_foreground);
        let a = complete_passthrough(&req);
        let b = complete_passthrough(&req);
        assert_eq!(a.part_image, b.part_image);
    }

    #[test]
    fn symmetry_empty_mask_flags_no_evidence() {
        let context = ImageRgb::new(32, 32);
        let req = CompletionRequest::from_context(&context, &Mask::new(32, 32));
        let res = complete_symmetry(&req);
        assert!(res.no_evidence);
        assert!(res.part_foreground.is_empty());
    }

    #[test]
    fn conditioning_shape_and_roles() {
        let context = ImageRgb::new(1024, 1024);
        let req = CompletionRequest::from_context(&context, &Mask::new(1024, 1024));
        let block = pack_conditioning(&req).unwrap();
        assert_eq!(block.latent_width, 128);
        assert_eq!(block.latent_height, 128);
        assert_eq!(block.data.len(), 25 * 128 * 128);
        assert_eq!(channel_role(0), ChannelRole::NoiseSlot);
        assert_eq!(channel_role(8), ChannelRole::MaskedLatent);
        assert_eq!(channel_role(16), ChannelRole::ContextLatent);
        assert_eq!(channel_role(24), ChannelRole::Mask);
    }

    #[test]
    fn conditioning_all_black_is_zero_except_mask() {
        let context = ImageRgb::new(32, 32);
        let mask = Mask::from_fn(32, 32, |r, c| r < 8 && c < 8);
        let req = CompletionRequest::from_context(&context, &mask);
        let block = pack_conditioning(&req).unwrap();
        for ch in 0..24 {
            for r in 0..4 {
                for c in 0..4 {
                    assert_eq!(block.get(ch, r, c), 0.0);
                }
            }
        }
        assert_eq!(block.get(24, 0, 0), 1.0);
        assert_eq!(block.get(24, 3, 3), 0.0);
    }

    #[test]
    fn conditioning_rejects_bad_resolution() {
        let context = ImageRgb::new(30, 30);
        let req = CompletionRequest::from_context(&context, &Mask::new(30, 30));
        assert!(matches!(
            pack_conditioning(&req),
            Err(Error::BadResolution(_))
        ));
    }
}
