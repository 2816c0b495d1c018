//! Synthetic document pages for benchmarks and load tests.
//!
//! Pages use the DIVA-HisDB registry: a background page with blocks of
//! main-text lines, marginal comments and a few decorations, some of which
//! overlap text (drop caps) and so carry two labels.

use layout_eval_core::{ClassRegistry, LabelImage, LabelSet, Rgb, RgbImage};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const BACKGROUND: usize = 0;
const COMMENT: usize = 1;
const DECORATION: usize = 2;
const MAIN_TEXT: usize = 3;

pub fn registry() -> ClassRegistry {
    ClassRegistry::diva_hisdb()
}

fn fill(img: &mut LabelImage, x0: u32, y0: u32, w: u32, h: u32, class: usize, keep_existing: bool) {
    let x1 = (x0 + w).min(img.width());
    let y1 = (y0 + h).min(img.height());
    for y in y0..y1 {
        for x in x0..x1 {
            let mut set = if keep_existing { img.get(x, y) } else { LabelSet::EMPTY };
            set.remove(BACKGROUND);
            set.insert(class);
            img.set(x, y, set);
        }
    }
}

/// Ground truth page of `width` x `height` pixels.
pub fn ground_truth(width: u32, height: u32, seed: u64) -> LabelImage {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut img = LabelImage::filled(width, height, LabelSet::single(BACKGROUND)).expect("non-empty page");
    let margin_x = width / 10;
    let text_w = width * 6 / 10;
    let line_h = (height / 60).max(1);

    let mut y = height / 12;
    while y + line_h < height * 11 / 12 {
        let len = rng.random_range(text_w / 2..=text_w.max(1));
        fill(&mut img, margin_x, y, len, line_h, MAIN_TEXT, false);
        if rng.random_bool(0.15) {
            let cw = rng.random_range(1..=(width / 6).max(1));
            fill(&mut img, margin_x + text_w + width / 40, y, cw, line_h, COMMENT, false);
        }
        y += line_h * 2;
    }
    for _ in 0..3 {
        let size = (line_h * 3).min(width).min(height);
        let x = margin_x.saturating_sub(size / 2);
        let y = rng.random_range(0..height.saturating_sub(size).max(1));
        fill(&mut img, x, y, size, size, DECORATION, true);
    }
    img
}

/// A prediction that mostly agrees with `gt`: shifted block edges, dropped
/// and spurious labels, and scattered pixel noise at rate `noise`.
pub fn prediction(gt: &LabelImage, noise: f64, seed: u64) -> LabelImage {
    let mut rng = StdRng::seed_from_u64(seed);
    let (w, h) = (gt.width(), gt.height());
    let mut pred = gt.clone();
    for _ in 0..20 {
        let (bw, bh) = (rng.random_range(1..=(w / 8).max(1)), rng.random_range(1..=(h / 30).max(1)));
        let (x, y) = (rng.random_range(0..w), rng.random_range(0..h));
        let class = rng.random_range(0..4);
        for yy in y..(y + bh).min(h) {
            for xx in x..(x + bw).min(w) {
                pred.set(xx, yy, LabelSet::single(class));
            }
        }
    }
    for set in pred.pixels_mut() {
        if rng.random_bool(noise) {
            *set = LabelSet::from_bits(rng.random_range(0..16));
        }
    }
    pred
}

/// Page scan look-alike: dark ink where the ground truth has foreground.
pub fn original(gt: &LabelImage, seed: u64) -> RgbImage {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut img = RgbImage::new(gt.width(), gt.height());
    for (px, set) in img.pixels_mut().zip(gt.pixels()) {
        let jitter: u8 = rng.random_range(0..24);
        *px = if set.contains(BACKGROUND) {
            Rgb([220 - jitter, 200 - jitter, 160 - jitter])
        } else {
            Rgb([60 + jitter, 40 + jitter, 30 + jitter])
        };
    }
    img
}
