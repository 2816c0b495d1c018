//! Five-color error maps and their blend with the original page.

use image::{Rgb, RgbImage};
use rayon::prelude::*;

use crate::codec::{check_dimensions, validate_pair, LabelImage, LabelSet};
use crate::error::{Dimensions, Error, Result};
use crate::registry::ClassRegistry;

/// Outcome of one pixel in foreground/background terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PixelOutcome {
    /// Background predicted as background.
    BgCorrect,
    /// Background predicted as foreground.
    BgAsFg,
    /// Foreground predicted as background, or not labelled at all.
    FgAsBg,
    /// Foreground with exactly the right foreground classes.
    FgCorrect,
    /// Foreground predicted as foreground, but with different classes.
    FgWrongClass,
}

impl PixelOutcome {
    pub const ALL: [PixelOutcome; 5] = [
        PixelOutcome::BgCorrect,
        PixelOutcome::BgAsFg,
        PixelOutcome::FgAsBg,
        PixelOutcome::FgCorrect,
        PixelOutcome::FgWrongClass,
    ];

    fn slot(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Palette {
    colors: [Rgb<u8>; 5],
    alpha: f64,
}

impl Palette {
    /// Colors in [`PixelOutcome::ALL`] order; `alpha` weights the error map
    /// in overlays.
    pub fn new(colors: [Rgb<u8>; 5], alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        for i in 0..colors.len() {
            if colors[i + 1..].contains(&colors[i]) {
                return Err(Error::InvalidPalette(format!("color {:?} used twice", colors[i].0)));
            }
        }
        Ok(Self { colors, alpha })
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        self.alpha = alpha;
        Ok(self)
    }

    pub fn color(&self, outcome: PixelOutcome) -> Rgb<u8> {
        self.colors[outcome.slot()]
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Outcome painted with `color`, if any.
    pub fn outcome_of(&self, color: Rgb<u8>) -> Option<PixelOutcome> {
        PixelOutcome::ALL.into_iter().find(|o| self.color(*o) == color)
    }
}

impl Default for Palette {
    /// Black, red, light blue, green, yellow; overlay alpha 0.5.
    fn default() -> Self {
        Self {
            colors: [
                Rgb([0x00, 0x00, 0x00]),
                Rgb([0xFF, 0x00, 0x00]),
                Rgb([0x00, 0xAA, 0xFF]),
                Rgb([0x00, 0xFF, 0x00]),
                Rgb([0xFF, 0xFF, 0x00]),
            ],
            alpha: 0.5,
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::InvalidPalette(format!("alpha {alpha} is outside [0, 1]")))
    }
}

#[inline]
fn outcome(gt: u32, pred: u32, fg_mask: u32) -> PixelOutcome {
    let (gt_fg, pred_fg) = (gt & fg_mask, pred & fg_mask);
    match (gt_fg == 0, pred_fg == 0) {
        (true, true) => PixelOutcome::BgCorrect,
        (true, false) => PixelOutcome::BgAsFg,
        (false, true) => PixelOutcome::FgAsBg,
        (false, false) if gt_fg == pred_fg => PixelOutcome::FgCorrect,
        (false, false) => PixelOutcome::FgWrongClass,
    }
}

/// Classifies one pixel. Background membership is ignored when comparing
/// foreground sets, and an empty prediction counts as background.
pub fn classify_pixel(gt: LabelSet, pred: LabelSet, registry: &ClassRegistry) -> Result<PixelOutcome> {
    if gt.is_empty() {
        return Err(Error::EmptyGroundTruthPixel { x: 0, y: 0 });
    }
    Ok(outcome(gt.bits(), pred.bits(), foreground_mask(registry)))
}

fn foreground_mask(registry: &ClassRegistry) -> u32 {
    !(1u32 << registry.background_index())
}

fn check_ground_truth(gt: &LabelImage) -> Result<()> {
    match gt.first_empty() {
        Some((x, y)) => Err(Error::EmptyGroundTruthPixel { x, y }),
        None => Ok(()),
    }
}

/// Number of pixels per outcome, in [`PixelOutcome::ALL`] order.
pub fn outcome_counts(gt: &LabelImage, pred: &LabelImage, registry: &ClassRegistry) -> Result<[u64; 5]> {
    validate_pair(gt, pred)?;
    check_ground_truth(gt)?;
    let fg = foreground_mask(registry);
    let mut counts = [0u64; 5];
    for (g, p) in gt.pixels().iter().zip(pred.pixels()) {
        counts[outcome(g.bits(), p.bits(), fg).slot()] += 1;
    }
    Ok(counts)
}

/// Paints every pixel with the palette color of its outcome.
pub fn render_error_map(
    gt: &LabelImage,
    pred: &LabelImage,
    registry: &ClassRegistry,
    palette: &Palette,
) -> Result<RgbImage> {
    validate_pair(gt, pred)?;
    check_ground_truth(gt)?;
    let fg = foreground_mask(registry);
    let (width, height) = (gt.width(), gt.height());
    let row_len = width as usize;
    let mut raw = vec![0u8; gt.len() * 3];
    raw.par_chunks_mut(row_len * 3)
        .zip(gt.pixels().par_chunks(row_len))
        .zip(pred.pixels().par_chunks(row_len))
        .for_each(|((out, g_row), p_row)| {
            for ((px, g), p) in out.chunks_exact_mut(3).zip(g_row).zip(p_row) {
                px.copy_from_slice(&palette.color(outcome(g.bits(), p.bits(), fg)).0);
            }
        });
    Ok(RgbImage::from_raw(width, height, raw).expect("buffer sized from image"))
}

/// Blends an error map over the original page:
/// `alpha * error + (1 - alpha) * original` per channel, rounded half up.
pub fn render_overlay(error_map: &RgbImage, original: &RgbImage, alpha: f64) -> Result<RgbImage> {
    check_alpha(alpha)?;
    let dims = |img: &RgbImage| Dimensions {
        width: img.width(),
        height: img.height(),
    };
    check_dimensions(dims(error_map), dims(original))?;
    let blend = |e: u8, o: u8| -> u8 {
        let v = alpha * f64::from(e) + (1.0 - alpha) * f64::from(o);
        (v + 0.5).floor().clamp(0.0, 255.0) as u8
    };
    let mut raw = vec![0u8; error_map.as_raw().len()];
    raw.par_chunks_mut(1 << 16)
        .zip(error_map.as_raw().par_chunks(1 << 16))
        .zip(original.as_raw().par_chunks(1 << 16))
        .for_each(|((out, e), o)| {
            for ((dst, &e), &o) in out.iter_mut().zip(e).zip(o) {
                *dst = blend(e, o);
            }
        });
    Ok(RgbImage::from_raw(error_map.width(), error_map.height(), raw).expect("same size as input"))
}

#[cfg(test)]
mod tests {
    use super::*;

    // default registry: background, comment, decoration, main-text
    const BG: usize = 0;
    const COMMENT: usize = 1;
    const DECO: usize = 2;
    const TEXT: usize = 3;

    fn set(classes: &[usize]) -> LabelSet {
        classes.iter().copied().collect()
    }

    fn classify(gt: &[usize], pred: &[usize]) -> PixelOutcome {
        classify_pixel(set(gt), set(pred), &ClassRegistry::diva_hisdb()).unwrap()
    }

    #[test]
    fn named_cases() {
        assert_eq!(classify(&[BG], &[BG]), PixelOutcome::BgCorrect);
        assert_eq!(classify(&[TEXT], &[DECO]), PixelOutcome::FgWrongClass);
        assert_eq!(classify(&[TEXT, DECO], &[TEXT]), PixelOutcome::FgWrongClass);
        assert_eq!(classify(&[BG], &[COMMENT]), PixelOutcome::BgAsFg);
        assert_eq!(classify(&[TEXT], &[BG]), PixelOutcome::FgAsBg);
        assert_eq!(classify(&[TEXT], &[]), PixelOutcome::FgAsBg);
        assert_eq!(classify(&[BG], &[]), PixelOutcome::BgCorrect);
        assert_eq!(classify(&[TEXT, DECO], &[DECO, TEXT]), PixelOutcome::FgCorrect);
        assert_eq!(classify(&[BG, TEXT], &[TEXT]), PixelOutcome::FgCorrect);
        assert_eq!(classify(&[BG], &[BG, TEXT]), PixelOutcome::BgAsFg);
    }

    #[test]
    fn empty_ground_truth_is_an_error() {
        let err = classify_pixel(LabelSet::EMPTY, set(&[BG]), &ClassRegistry::diva_hisdb());
        assert!(matches!(err, Err(Error::EmptyGroundTruthPixel { .. })));
    }

    #[test]
    fn error_map_two_by_two() {
        let reg = ClassRegistry::diva_hisdb();
        let gt = LabelImage::new(2, 2, vec![set(&[BG]), set(&[BG]), set(&[TEXT]), set(&[TEXT])]).unwrap();
        let pred = LabelImage::new(2, 2, vec![set(&[BG]), set(&[DECO]), set(&[BG]), set(&[DECO])]).unwrap();
        let palette = Palette::default();
        let map = render_error_map(&gt, &pred, &reg, &palette).unwrap();
        let got: Vec<_> = map.pixels().map(|c| palette.outcome_of(*c).unwrap()).collect();
        assert_eq!(
            got,
            [
                PixelOutcome::BgCorrect,
                PixelOutcome::BgAsFg,
                PixelOutcome::FgAsBg,
                PixelOutcome::FgWrongClass
            ]
        );
    }

    #[test]
    fn all_background_identity_is_black() {
        let gt = LabelImage::filled(5, 3, set(&[BG])).unwrap();
        let map = render_error_map(&gt, &gt, &ClassRegistry::diva_hisdb(), &Palette::default()).unwrap();
        assert!(map.pixels().all(|p| p.0 == [0, 0, 0]));
    }

    #[test]
    fn overlay_blending() {
        let red = RgbImage::from_pixel(1, 1, Rgb([255, 0, 0]));
        let black = RgbImage::from_pixel(1, 1, Rgb([0, 0, 0]));
        assert_eq!(render_overlay(&red, &black, 0.5).unwrap().get_pixel(0, 0).0, [128, 0, 0]);

        let err = RgbImage::from_fn(3, 2, |x, y| Rgb([x as u8 * 40, y as u8 * 90, 7]));
        let orig = RgbImage::from_fn(3, 2, |x, y| Rgb([200, x as u8, y as u8 * 3]));
        assert_eq!(render_overlay(&err, &orig, 1.0).unwrap(), err);
        assert_eq!(render_overlay(&err, &orig, 0.0).unwrap(), orig);
        assert!(render_overlay(&err, &orig, 1.5).is_err());
        assert!(matches!(
            render_overlay(&err, &red, 0.5),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn palette_rejects_duplicates() {
        let c = Rgb([1, 2, 3]);
        assert!(Palette::new([c, Rgb([0, 0, 0]), c, Rgb([9, 9, 9]), Rgb([8, 8, 8])], 0.5).is_err());
        assert!(Palette::default().with_alpha(-0.1).is_err());
    }
}
