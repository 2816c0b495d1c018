use layout_eval_core::*;
use proptest::prelude::*;

/// Ground truth and prediction as plain per-pixel membership vectors.
#[derive(Debug, Clone)]
struct Pair {
    width: u32,
    height: u32,
    classes: usize,
    gt: Vec<Vec<bool>>,
    pred: Vec<Vec<bool>>,
}

impl Pair {
    fn to_image(sets: &[Vec<bool>], width: u32, height: u32) -> LabelImage {
        let pixels = sets
            .iter()
            .map(|m| m.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect())
            .collect();
        LabelImage::new(width, height, pixels).unwrap()
    }

    fn gt_image(&self) -> LabelImage {
        Self::to_image(&self.gt, self.width, self.height)
    }

    fn pred_image(&self) -> LabelImage {
        Self::to_image(&self.pred, self.width, self.height)
    }

    fn registry(&self) -> ClassRegistry {
        let names: Vec<String> = (0..self.classes).map(|i| format!("class{i}")).collect();
        ClassRegistry::sequential(&names).unwrap()
    }
}

fn membership(classes: usize, non_empty: bool) -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), classes).prop_map(move |mut m| {
        if non_empty && !m.iter().any(|&b| b) {
            m[0] = true;
        }
        m
    })
}

fn pair(max_side: u32, single_label: bool) -> impl Strategy<Value = Pair> {
    (1..=max_side, 1..=max_side, 1usize..=4).prop_flat_map(move |(w, h, k)| {
        let n = (w * h) as usize;
        let one_hot = prop::sample::select((0..k).collect::<Vec<_>>())
            .prop_map(move |c| (0..k).map(|i| i == c).collect::<Vec<bool>>());
        let (gt, pred) = if single_label {
            (one_hot.clone().boxed(), one_hot.boxed())
        } else {
            (membership(k, true).boxed(), membership(k, false).boxed())
        };
        (
            prop::collection::vec(gt, n),
            prop::collection::vec(pred, n),
        )
            .prop_map(move |(gt, pred)| Pair {
                width: w,
                height: h,
                classes: k,
                gt,
                pred,
            })
    })
}

/// Counts by testing membership of every (pixel, class) pair directly.
fn naive_counts(p: &Pair) -> Vec<(u64, u64, u64, u64)> {
    (0..p.classes)
        .map(|c| {
            let mut t = (0, 0, 0, 0);
            for (g, q) in p.gt.iter().zip(&p.pred) {
                match (g[c], q[c]) {
                    (true, true) => t.0 += 1,
                    (false, true) => t.1 += 1,
                    (true, false) => t.2 += 1,
                    (false, false) => t.3 += 1,
                }
            }
            t
        })
        .collect()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tables_match_naive_counts(p in pair(16, false)) {
        let tables = build_tables(&p.gt_image(), &p.pred_image(), &p.registry()).unwrap();
        let got: Vec<_> = tables.iter().map(|t| (t.true_pos, t.false_pos, t.false_neg, t.true_neg)).collect();
        prop_assert_eq!(got, naive_counts(&p));
        for t in &tables {
            prop_assert_eq!(t.total(), (p.width * p.height) as u64);
        }
    }

    #[test]
    fn swapping_arguments_swaps_fp_and_fn(p in pair(12, false)) {
        let reg = p.registry();
        let (gt, pred) = (p.gt_image(), p.pred_image());
        let forward = build_tables(&gt, &pred, &reg).unwrap();
        let backward = build_tables(&pred, &gt, &reg).unwrap();
        for (f, b) in forward.iter().zip(&backward) {
            prop_assert_eq!(f.swapped(), *b);
        }
    }

    #[test]
    fn support_sums_to_label_count(p in pair(12, false)) {
        let gt = p.gt_image();
        let tables = build_tables(&gt, &p.pred_image(), &p.registry()).unwrap();
        let labels: u64 = gt.pixels().iter().map(|s| u64::from(s.len())).sum();
        prop_assert_eq!(tables.iter().map(|t| t.support()).sum::<u64>(), labels);
        let freqs = class_frequencies(&gt, &p.registry()).unwrap();
        prop_assert!(close(freqs.iter().map(|f| f.value).sum(), 1.0));
        prop_assert_eq!(freqs, frequencies_from_tables(&tables));
    }

    #[test]
    fn adding_a_correct_label_moves_one_count(p in pair(8, false), pick in any::<prop::sample::Index>()) {
        let reg = p.registry();
        let gt = p.gt_image();
        let mut pred = p.pred_image();
        let candidates: Vec<(usize, usize)> = (0..gt.len())
            .flat_map(|i| {
                let (g, q) = (gt.pixels()[i], pred.pixels()[i]);
                g.iter().filter(move |&c| !q.contains(c)).map(move |c| (i, c))
            })
            .collect();
        prop_assume!(!candidates.is_empty());
        let (i, c) = candidates[pick.index(candidates.len())];
        let before = build_tables(&gt, &pred, &reg).unwrap();
        pred.pixels_mut()[i].insert(c);
        let after = build_tables(&gt, &pred, &reg).unwrap();
        for (class, (b, a)) in before.iter().zip(&after).enumerate() {
            if class == c {
                prop_assert_eq!(a.true_pos, b.true_pos + 1);
                prop_assert_eq!(a.false_neg + 1, b.false_neg);
                prop_assert_eq!((a.false_pos, a.true_neg), (b.false_pos, b.true_neg));
            } else {
                prop_assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn metric_relationships(p in pair(16, false)) {
        let reg = p.registry();
        let report = evaluate(&p.gt_image(), &p.pred_image(), &reg).unwrap();
        for v in report.metric_values() {
            prop_assert!((0.0..=1.0).contains(&v), "{} out of range", v);
        }
        prop_assert!(report.exact_match <= report.hamming_score);
        for (c, t) in report.per_class.iter().zip(&report.tables) {
            let s = c.scores;
            prop_assert!(s.jaccard <= s.f1);
            prop_assert_eq!(s.jaccard == s.f1, t.true_pos == 0 || t.false_pos + t.false_neg == 0);
            if s.precision + s.recall > 0.0 {
                let harmonic = 2.0 * s.precision * s.recall / (s.precision + s.recall);
                prop_assert!(close(s.f1, harmonic));
            }
        }
        prop_assert!(close(report.exact_match, exact_match(&p.gt_image(), &p.pred_image()).unwrap()));
        prop_assert!(close(report.hamming_score, hamming_score(&p.gt_image(), &p.pred_image(), &reg).unwrap()));
    }

    #[test]
    fn swap_symmetry_of_metrics(p in pair(12, true)) {
        // single-label so that both images are valid ground truth
        let reg = p.registry();
        let (gt, pred) = (p.gt_image(), p.pred_image());
        let a = evaluate(&gt, &pred, &reg).unwrap();
        let b = evaluate(&pred, &gt, &reg).unwrap();
        prop_assert_eq!(a.exact_match, b.exact_match);
        prop_assert_eq!(a.hamming_score, b.hamming_score);
        for (x, y) in a.per_class.iter().zip(&b.per_class) {
            prop_assert_eq!(x.scores.precision, y.scores.recall);
            prop_assert_eq!(x.scores.recall, y.scores.precision);
            prop_assert_eq!(x.scores.f1, y.scores.f1);
            prop_assert_eq!(x.scores.jaccard, y.scores.jaccard);
        }
    }

    #[test]
    fn single_label_identities(p in pair(16, true)) {
        let report = evaluate(&p.gt_image(), &p.pred_image(), &p.registry()).unwrap();
        let k = p.classes as f64;
        prop_assert!(close(report.micro_avg.recall, report.exact_match));
        prop_assert!(close(report.hamming_score, 1.0 - 2.0 * (1.0 - report.exact_match) / k));
    }

    #[test]
    fn png_round_trip_and_determinism(p in pair(10, false), noise in prop::collection::vec(any::<bool>(), 100)) {
        let reg = ClassRegistry::new(
            (0..p.classes)
                .map(|i| ClassSpec::new(format!("c{i}"), 1 << (i * 5), i == 0))
                .collect(),
            0x80_0000,
        )
        .unwrap();
        let gt = p.gt_image();
        let mut raw = encode_label_image(&gt, &reg);
        for (px, flag) in raw.pixels_mut().zip(noise.iter().cycle()) {
            if *flag {
                px.0[0] |= 0x80;
            }
        }
        let bytes = encode_png(&raw).unwrap();
        let decoded = decode_label_image(&bytes, &reg, Role::GroundTruth).unwrap();
        prop_assert_eq!(&decoded, &gt);
        prop_assert_eq!(decode_label_image(&bytes, &reg, Role::GroundTruth).unwrap(), decoded);
        let back = encode_label_image(&gt, &reg);
        for (a, b) in raw.pixels().zip(back.pixels()) {
            prop_assert_eq!([a.0[0] & 0x7F, a.0[1], a.0[2]], b.0);
        }
    }

    #[test]
    fn identity_error_map_is_black_and_green(p in pair(12, false)) {
        let reg = p.registry();
        let gt = p.gt_image();
        let palette = Palette::default();
        let map = render_error_map(&gt, &gt, &reg, &palette).unwrap();
        for px in map.pixels() {
            let o = palette.outcome_of(*px);
            prop_assert!(matches!(o, Some(PixelOutcome::BgCorrect | PixelOutcome::FgCorrect)));
        }
    }

    #[test]
    fn foreground_outcomes_count_foreground_pixels(p in pair(12, false)) {
        let reg = p.registry();
        let (gt, pred) = (p.gt_image(), p.pred_image());
        let counts = outcome_counts(&gt, &pred, &reg).unwrap();
        let fg_pixels = gt.pixels().iter().filter(|s| s.iter().any(|c| c != reg.background_index())).count() as u64;
        prop_assert_eq!(counts[2] + counts[3] + counts[4], fg_pixels);
        prop_assert_eq!(counts.iter().sum::<u64>(), gt.len() as u64);

        let palette = Palette::default();
        let map = render_error_map(&gt, &pred, &reg, &palette).unwrap();
        for ((px, g), q) in map.pixels().zip(gt.pixels()).zip(pred.pixels()) {
            prop_assert_eq!(palette.outcome_of(*px), Some(classify_pixel(*g, *q, &reg).unwrap()));
        }
    }

    #[test]
    fn overlay_is_local(
        w in 1u32..8, h in 1u32..8, seed in any::<u64>(), alpha in 0.0f64..=1.0,
        x in any::<prop::sample::Index>(), y in any::<prop::sample::Index>(), value in any::<[u8; 3]>(),
    ) {
        let pick = |i: u32, j: u32, salt: u64| -> Rgb<u8> {
            let v = (u64::from(i) * 31 + u64::from(j) * 17 + salt).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            Rgb([(v >> 8) as u8, (v >> 24) as u8, (v >> 40) as u8])
        };
        let err = RgbImage::from_fn(w, h, |i, j| pick(i, j, seed));
        let orig = RgbImage::from_fn(w, h, |i, j| pick(i, j, seed ^ 1));
        let before = render_overlay(&err, &orig, alpha).unwrap();
        let (x, y) = (x.index(w as usize) as u32, y.index(h as usize) as u32);
        let mut changed = orig.clone();
        changed.put_pixel(x, y, Rgb(value));
        let after = render_overlay(&err, &changed, alpha).unwrap();
        for (i, j, px) in after.enumerate_pixels() {
            if (i, j) != (x, y) {
                prop_assert_eq!(px, before.get_pixel(i, j));
            }
        }
    }
}

#[test]
fn classify_pixel_is_total_over_all_subsets() {
    let reg = ClassRegistry::diva_hisdb();
    let mut pairs = 0;
    for gt in 1u32..16 {
        for pred in 0u32..16 {
            let outcome = classify_pixel(LabelSet::from_bits(gt), LabelSet::from_bits(pred), &reg).unwrap();
            assert!(PixelOutcome::ALL.contains(&outcome));
            pairs += 1;
        }
    }
    assert_eq!(pairs, 15 * 16);
}
