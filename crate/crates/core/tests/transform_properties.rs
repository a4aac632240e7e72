mod support;

use proptest::prelude::*;
use strongaug::imgcore::{hsv_to_rgb, rgb_to_hsv};
use strongaug::rng::stream;
use strongaug::transforms::{apply, default_eval_grid, Magnitude, MagnitudeDomain};
use strongaug::{ImageRGB8, TransformKind};

fn image_strategy() -> impl Strategy<Value = ImageRGB8> {
    (1u32..24, 1u32..24).prop_flat_map(|(w, h)| {
        proptest::collection::vec(any::<u8>(), (w * h * 3) as usize)
            .prop_map(move |data| ImageRGB8::from_raw(w, h, data).unwrap())
    })
}

fn run(img: &ImageRGB8, kind: TransformKind, v: f64) -> ImageRGB8 {
    apply(img, &Magnitude::new(kind, v).unwrap(), &mut stream(0, 0)).unwrap()
}

#[test]
fn hsv_round_trip_is_exact_for_every_colour() {
    let mut bad = 0u32;
    for r in 0..=255u8 {
        for g in 0..=255u8 {
            for b in 0..=255u8 {
                if hsv_to_rgb(rgb_to_hsv([r, g, b])) != [r, g, b] {
                    bad += 1;
                }
            }
        }
    }
    assert_eq!(bad, 0);
}

#[test]
fn out_of_domain_magnitudes_are_rejected() {
    for kind in TransformKind::ALL {
        match kind.domain() {
            MagnitudeDomain::None => {
                assert!(Magnitude::new(kind, 1.0).is_err(), "{kind}");
            }
            MagnitudeDomain::Continuous { lo, hi } => {
                assert!(Magnitude::new(kind, lo - 1e-3).is_err(), "{kind}");
                assert!(Magnitude::new(kind, hi + 1e-3).is_err(), "{kind}");
                assert!(Magnitude::new(kind, f64::NAN).is_err(), "{kind}");
            }
            MagnitudeDomain::Integer { lo, hi } => {
                assert!(Magnitude::new(kind, lo as f64 - 1.0).is_err(), "{kind}");
                assert!(Magnitude::new(kind, hi as f64 + 1.0).is_err(), "{kind}");
                assert!(Magnitude::new(kind, lo as f64 + 0.5).is_err(), "{kind}");
            }
        }
    }
}

#[test]
fn every_grid_value_applies_and_keeps_dimensions() {
    let img = support::synth::random_image(&mut stream(1, 1), 19, 13);
    for kind in TransformKind::ALL {
        let grid = default_eval_grid(kind);
        assert!(!grid.is_empty(), "{kind}");
        for m in grid {
            let out = apply(&img, &m, &mut stream(2, 2)).unwrap();
            assert_eq!(out.dimensions(), img.dimensions(), "{m}");
        }
    }
}

#[test]
fn equalize_spreads_a_narrow_histogram() {
    // large enough that the equalisation step is non-zero
    let img = ImageRGB8::from_fn(64, 64, |x, y| {
        let v = 100 + ((x + y) % 8) as u8;
        [v, v, v]
    });
    let out = run(&img, TransformKind::Equalize, 0.0);
    let (lo, hi) = out.pixels().fold((255, 0), |(lo, hi), p| (lo.min(p[0]), hi.max(p[0])));
    assert!(hi - lo > 150, "{lo}..{hi}");
}

#[test]
fn jpeg_quality_orders_error() {
    let img = support::synth::tissue_tile(&mut stream(3, 0), 1, 64);
    let err = |q: f64| {
        let out = run(&img, TransformKind::Jpeg, q);
        strongaug::stain::rmse(&img, &out)
    };
    let errs: Vec<f64> = [5.0, 25.0, 50.0, 75.0, 95.0].iter().map(|&q| err(q)).collect();
    assert!(errs.windows(2).all(|w| w[0] > w[1]), "{errs:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn posterize_bounds_distinct_values(img in image_strategy(), bits in 1u8..=8) {
        let out = run(&img, TransformKind::Posterize, bits as f64);
        for c in 0..3 {
            let mut seen = [false; 256];
            for v in out.channel(c) {
                seen[v as usize] = true;
            }
            prop_assert!(seen.iter().filter(|s| **s).count() <= 1 << bits);
        }
    }

    #[test]
    fn solarize_complements_at_or_above_threshold(img in image_strategy(), t in 0u16..=256) {
        let out = run(&img, TransformKind::Solarize, t as f64);
        for (a, b) in img.as_raw().iter().zip(out.as_raw()) {
            let expect = if *a as u16 >= t { 255 - a } else { *a };
            prop_assert_eq!(*b, expect);
        }
    }

    #[test]
    fn hue_half_turn_either_sign(img in image_strategy()) {
        prop_assert_eq!(run(&img, TransformKind::Hue, 0.5), run(&img, TransformKind::Hue, -0.5));
    }

    #[test]
    fn grayscale_channels_agree(img in image_strategy()) {
        let out = run(&img, TransformKind::Grayscale, 0.0);
        prop_assert!(out.pixels().all(|p| p[0] == p[1] && p[1] == p[2]));
    }

    #[test]
    fn autocontrast_is_idempotent(img in image_strategy()) {
        let once = run(&img, TransformKind::Autocontrast, 0.0);
        prop_assert_eq!(run(&once, TransformKind::Autocontrast, 0.0), once);
    }

    #[test]
    fn blur_zero_sigma_is_identity(img in image_strategy()) {
        prop_assert_eq!(run(&img, TransformKind::GaussianBlur, 0.0), img);
    }

    #[test]
    fn brightness_is_monotone(img in image_strategy(), a in 0.01f64..1.99, b in 0.01f64..1.99) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let x = run(&img, TransformKind::Brightness, lo);
        let y = run(&img, TransformKind::Brightness, hi);
        prop_assert!(x.as_raw().iter().zip(y.as_raw()).all(|(p, q)| p <= q));
    }

    #[test]
    fn channel_gain_touches_one_channel(img in image_strategy(), g in 0.01f64..1.99) {
        let out = run(&img, TransformKind::Green, g);
        for (p, q) in img.pixels().zip(out.pixels()) {
            prop_assert_eq!((p[0], p[2]), (q[0], q[2]));
        }
    }

    #[test]
    fn translating_by_width_leaves_fill(img in image_strategy()) {
        // shifting by at least the width leaves only fill
        let w = img.width() as f64;
        prop_assume!(w <= 72.0);
        let out = run(&img, TransformKind::TranslateX, w);
        prop_assert!(out.as_raw().iter().all(|&v| v == 0));
    }

    #[test]
    fn noise_is_reproducible_per_stream(img in image_strategy(), seed in any::<u64>()) {
        let m = Magnitude::new(TransformKind::Noise, 200.0).unwrap();
        let a = apply(&img, &m, &mut stream(seed, 0)).unwrap();
        let b = apply(&img, &m, &mut stream(seed, 0)).unwrap();
        prop_assert_eq!(a, b);
    }
}
