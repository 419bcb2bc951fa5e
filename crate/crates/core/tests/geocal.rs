use l1chain::error::Error;
use l1chain::geocal::*;
use l1chain::geom::{LookCorrection, SensorGeometry};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Band-limited analytic texture, evaluable at fractional positions.
struct Texture(Vec<(f64, f64, f64, f64)>);

impl Texture {
    fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Texture(
            (0..24)
                .map(|_| {
                    let w = rng.random_range(0.08..0.6);
                    let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    (w * a.cos(), w * a.sin(), rng.random_range(0.0..std::f64::consts::TAU), rng.random_range(0.5..1.5))
                })
                .collect(),
        )
    }

    fn at(&self, r: f64, c: f64) -> f64 {
        100.0 + self.0.iter().map(|&(wr, wc, ph, a)| a * (wr * r + wc * c + ph).sin()).sum::<f64>()
    }

    fn raster(&self, rows: usize, cols: usize, shift: (f64, f64)) -> Raster {
        Raster::from_fn(rows, cols, |i, j| self.at(i as f64 - shift.0, j as f64 - shift.1))
    }
}

#[test]
fn self_match_has_zero_offset() {
    let t = Texture::new(1);
    let a = t.raster(96, 96, (0.0, 0.0));
    let tps = dense_match(&a, &a, &MatchOptions::default()).unwrap();
    assert!(tps.len() >= 50);
    for p in &tps {
        assert!(p.d_along.abs() < 1e-5 && p.d_across.abs() < 1e-5, "{p:?}");
        assert!(p.score > 0.999);
    }
}

#[test]
fn recovers_known_subpixel_shift() {
    let t = Texture::new(2);
    let a = t.raster(96, 96, (0.0, 0.0));
    let b = t.raster(96, 96, (1.5, -0.5));
    let tps = dense_match(&a, &b, &MatchOptions::default()).unwrap();
    let along: Vec<f64> = tps.iter().map(|p| p.d_along).collect();
    let across: Vec<f64> = tps.iter().map(|p| p.d_across).collect();
    let (ma, mc) = (percentile(&along, 0.5), percentile(&across, 0.5));
    assert!((ma - 1.5).abs() < 0.02, "{ma}");
    assert!((mc + 0.5).abs() < 0.02, "{mc}");
}

#[test]
fn coarse_fine_finds_large_shift() {
    let t = Texture::new(3);
    let a = t.raster(160, 160, (0.0, 0.0));
    let b = t.raster(160, 160, (-9.3, 12.2));
    let tps = dense_match_coarse_fine(&a, &b, 16, &MatchOptions::default()).unwrap();
    let along: Vec<f64> = tps.iter().map(|p| p.d_along).collect();
    let across: Vec<f64> = tps.iter().map(|p| p.d_across).collect();
    assert!((percentile(&along, 0.5) + 9.3).abs() < 0.02);
    assert!((percentile(&across, 0.5) - 12.2).abs() < 0.02);
}

#[test]
fn uniform_raster_has_no_tie_points() {
    let a = Raster::from_fn(64, 64, |_, _| 5.0);
    assert!(matches!(
        dense_match(&a, &a, &MatchOptions::default()),
        Err(Error::InsufficientTiePoints { found: 0, .. })
    ));
}

#[test]
fn even_patch_rejected() {
    let opts = MatchOptions { patch: 10, ..Default::default() };
    assert!(opts.validate().is_err());
    let a = Raster::from_fn(64, 64, |i, j| (i * j) as f64);
    assert!(matches!(dense_match(&a, &a, &opts), Err(Error::Domain(_))));
}

#[test]
fn one_pixel_angle() {
    let s = SensorGeometry::default();
    let (roll, pitch) = offsets_to_angles(0.0, 1.0, &s, 732_500.0);
    // 10 µm / 20 mm at 732.5 km altitude is 366.25 m
    assert!((roll - (366.25f64 / 732_500.0).atan()).abs() < 1e-15);
    assert!((roll - 4.99999e-4).abs() < 1e-8);
    assert_eq!(pitch, 0.0);
}

#[test]
fn tilt_fit_exact_and_noisy() {
    let m = fit_tilt_drift(&[(-20.0, -2e-3 + 1e-4), (0.0, 1e-4), (20.0, 2e-3 + 1e-4)]).unwrap();
    assert!((m.slope - 1e-4).abs() < 1e-6 * 1e-4);
    assert!((m.intercept - 1e-4).abs() < 1e-12);
    assert!(m.residual_rms < 1e-15);
    assert!((m.correct(20.0, 2.1e-3)).abs() < 1e-15);

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let noise = Normal::new(0.0, 2e-5).unwrap();
    let samples: Vec<(f64, f64)> = (0..200)
        .map(|k| {
            let t = -20.0 + 40.0 * (k % 5) as f64 / 4.0;
            (t, 1e-4 * t + noise.sample(&mut rng))
        })
        .collect();
    let m = fit_tilt_drift(&samples).unwrap();
    assert!((m.slope - 1e-4).abs() < 0.05 * 1e-4, "{}", m.slope);

    assert!(fit_tilt_drift(&[(1.0, 0.0), (1.0, 1.0), (2.0, 0.0)]).is_err());
}

#[test]
fn ce90_nearest_rank() {
    let v: Vec<f64> = (1..=10).map(f64::from).collect();
    assert_eq!(ce90(&v).unwrap(), 9.0);
    assert!(matches!(ce90(&v[..9]), Err(Error::InsufficientData(_))));
}

#[test]
fn ce90_of_circular_gaussian() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = Normal::<f64>::new(0.0, 1.0).unwrap();
    let r: Vec<f64> = (0..20_000).map(|_| n.sample(&mut rng).hypot(n.sample(&mut rng))).collect();
    let oracle = (-2.0 * 0.1f64.ln()).sqrt();
    assert!((ce90(&r).unwrap() - oracle).abs() < 0.1);
}

#[test]
fn error_stats_bounds_bracket_median() {
    let samples: Vec<ErrorSample> = (0..200)
        .map(|k| ErrorSample { col: (k % 20) as f64, along: (k % 20) as f64 * 0.1, across: 1.0 })
        .collect();
    let s = ErrorStats::from_samples(&samples).unwrap();
    assert!(s.along.lb <= s.along.median && s.along.median <= s.along.ub);
    assert_eq!(s.across.median, 1.0);
    assert_eq!(s.across.three_sigma, 0.0);
    assert_eq!(s.count, 200);
}

fn constant_profile(band: u8, along: f64, across: f64) -> BbrProfile {
    BbrProfile {
        band,
        xi: vec![-0.5, 0.0, 0.5],
        along_fit: [along, 0.0, 0.0, 0.0],
        across_fit: [across, 0.0, 0.0, 0.0],
        ..Default::default()
    }
}

#[test]
fn bbr_stats_of_gaussian_offsets() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = Normal::new(0.05, 0.04).unwrap();
    let products: Vec<Vec<BbrProfile>> =
        (0..2000).map(|_| vec![constant_profile(3, n.sample(&mut rng), -n.sample(&mut rng))]).collect();
    let s = bbr_stats(&products).unwrap();
    assert_eq!(s.len(), 1);
    assert!((s[0].along_mean - 0.05).abs() < 0.005);
    assert!((s[0].across_mean + 0.05).abs() < 0.005);
    assert!((s[0].along_three_sigma - 0.12).abs() < 0.01);
    assert!((s[0].envelope() - 0.17).abs() < 0.015);
    assert!(bbr_stats(&products[..1]).is_err());
}

fn field(f: impl Fn(f64) -> (f64, f64), n: usize, span: f64) -> ResidualField {
    ResidualField {
        band: 10,
        points: (0..n)
            .map(|k| {
                let xi = span * (-1.0 + 2.0 * k as f64 / (n - 1) as f64);
                let (roll, pitch) = f(xi);
                Residual {
                    row: 0.0,
                    col: k as f64,
                    xi,
                    d_along: 0.0,
                    d_across: 0.0,
                    along_m: 0.0,
                    across_m: 0.0,
                    east: 0.0,
                    north: 0.0,
                    roll,
                    pitch,
                }
            })
            .collect(),
    }
}

#[test]
fn calibrate_zero_field() {
    let c = calibrate_geolocation(&field(|_| (0.0, 0.0), 200, 1.0), &CalibrationOptions::default()).unwrap();
    assert_eq!(c.look_correction(), LookCorrection::default());
}

#[test]
fn calibrate_recovers_bias() {
    let c = calibrate_geolocation(&field(|_| (1.2e-2, -3.4e-3), 200, 1.0), &CalibrationOptions::default()).unwrap();
    assert!((c.roll - 1.2e-2).abs() < 1e-15 && (c.pitch + 3.4e-3).abs() < 1e-15);
    let (r, p) = c.look_correction().angles(0.7);
    assert!((r - 1.2e-2).abs() < 1e-12 && (p + 3.4e-3).abs() < 1e-12);
}

#[test]
fn calibrate_recovers_bias_and_ramp() {
    let truth = |xi: f64| (1e-3 + 4e-4 * xi, -5e-4 + 2e-4 * xi * xi);
    let c = calibrate_geolocation(&field(truth, 400, 1.0), &CalibrationOptions::default()).unwrap();
    for xi in [-0.9, -0.3, 0.0, 0.4, 0.9] {
        let (r, p) = c.look_correction().angles(xi);
        let (tr, tp) = truth(xi);
        assert!((r - tr).abs() < 0.05 * tr.abs().max(4e-4), "{xi}: {r} vs {tr}");
        assert!((p - tp).abs() < 0.05 * tp.abs().max(2e-4), "{xi}: {p} vs {tp}");
    }
}

#[test]
fn calibrate_rejections() {
    let opts = CalibrationOptions::default();
    assert!(matches!(
        calibrate_geolocation(&field(|_| (0.0, 0.0), 50, 1.0), &opts),
        Err(Error::InsufficientTiePoints { found: 50, required: 100 })
    ));
    assert!(matches!(calibrate_geolocation(&field(|_| (0.0, 0.0), 200, 0.3), &opts), Err(Error::InsufficientData(_))));
    assert!(matches!(
        calibrate_geolocation(&field(|_| (0.05, 0.0), 200, 1.0), &opts),
        Err(Error::CalibrationRejected(_))
    ));
    let wild = |xi: f64| if (xi * 1000.0).round() as i64 % 3 == 0 { (1e-2, 0.0) } else { (1e-5, 0.0) };
    assert!(matches!(calibrate_geolocation(&field(wild, 300, 1.0), &opts), Err(Error::CalibrationRejected(_))));
}

proptest! {
    #[test]
    fn offsets_angles_round_trip(along in -50.0f64..50.0, across in -50.0f64..50.0, alt in 5e5f64..9e5) {
        let s = SensorGeometry::default();
        let (r, p) = offsets_to_angles(along, across, &s, alt);
        let (a2, c2) = angles_to_offsets(r, p, &s, alt);
        prop_assert!((a2 - along).abs() < 1e-9 && (c2 - across).abs() < 1e-9);
    }

    #[test]
    fn tilt_fit_exact_line(slope in -1e-3f64..1e-3, icpt in -1e-2f64..1e-2) {
        let s: Vec<(f64, f64)> = [-25.0, -5.0, 10.0, 30.0].iter().map(|&t| (t, slope * t + icpt)).collect();
        let m = fit_tilt_drift(&s).unwrap();
        prop_assert!((m.slope - slope).abs() < 1e-6 * slope.abs().max(1e-6));
        prop_assert!((m.intercept - icpt).abs() < 1e-12);
    }

    #[test]
    fn percentile_is_a_member(v in prop::collection::vec(-1e3f64..1e3, 1..50), p in 0.01f64..1.0) {
        let q = percentile(&v, p);
        prop_assert!(v.contains(&q));
        let below = v.iter().filter(|&&x| x <= q).count() as f64;
        prop_assert!(below >= p * v.len() as f64 - 1e-9);
    }
}
