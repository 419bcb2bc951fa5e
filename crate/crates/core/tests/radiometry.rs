use l1chain::error::Error;
use l1chain::geom::Mode;
use l1chain::radiometry::*;
use nalgebra::DMatrix;

// ---- calib
fn raw(v: u16) -> RawFrame {
    RawFrame {
        band: 4,
        mode: Mode::Lac,
        seq: 0,
        start_time: 0.0,
        rows: 2,
        cols: 2,
        counts: vec![v; 4],
        dark_row: None,
        tilt_angle: 0.0,
    }
}

#[test]
fn worked_values() {
    let c = CalibCoeffs::uniform(4, 2, 0.1, 2.0);
    let l = count_to_radiance(&raw(1000), &[100.0; 2], Some(&c)).unwrap();
    assert!(l.data.iter().all(|&v| (v - 92.0).abs() < 1e-12));
    let z = CalibCoeffs::uniform(4, 2, 0.1, 0.0);
    let l = count_to_radiance(&raw(100), &[100.0; 2], Some(&z)).unwrap();
    assert!(l.data.iter().all(|&v| v == 0.0));
}

#[test]
fn missing_coefficients() {
    assert!(matches!(count_to_radiance(&raw(1), &[0.0; 2], None), Err(Error::CalibrationMissing(_))));
    let c = CalibCoeffs::uniform(5, 2, 0.1, 0.0);
    assert!(matches!(count_to_radiance(&raw(1), &[0.0; 2], Some(&c)), Err(Error::CalibrationMissing(_))));
}

#[test]
fn lut_inverse() {
    let lut = NonlinLut::tabulate(|v| v + 1e-5 * v * v, 0.0, 4095.0, 64).unwrap();
    for v in [0.0, 17.5, 1000.0, 4000.0] {
        assert!((lut.invert(lut.eval(v)) - v).abs() < 1e-9);
    }
    assert!(NonlinLut { x: vec![0.0, 1.0], y: vec![1.0, 0.0] }.validate().is_err());
}

// ---- dark
fn reference() -> DarkReference {
    let profile: Vec<f64> = (0..40).map(|j| if j < 20 { 100.0 } else { 120.0 }).collect();
    DarkReference::new(3, profile, 4).unwrap()
}

#[test]
fn identical_rows_reproduce_reference() {
    let r = reference();
    let rows = vec![DarkRow { time: 0.0, counts: r.profile.clone() }];
    let e = model_dark(&rows, &r, 0.0, 1.0, 40).unwrap();
    assert_eq!(e.values, r.profile);
    assert!(!e.fallback);
}

#[test]
fn port_offset_shifts_only_that_port() {
    let r = reference();
    let mut counts = r.profile.clone();
    counts[10..20].iter_mut().for_each(|c| *c += 10.0);
    let e = model_dark(&[DarkRow { time: 0.0, counts }], &r, 0.0, 1.0, 40).unwrap();
    for j in 0..40 {
        let expect = r.profile[j] + if (10..20).contains(&j) { 10.0 } else { 0.0 };
        assert!((e.values[j] - expect).abs() < 1e-12);
    }
}

#[test]
fn noisy_quantized_rows_recover_port_offsets() {
    use rand::{Rng, SeedableRng};
    use rand_distr::StandardNormal;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    let cols = 400;
    let ripple: Vec<f64> = (0..cols).map(|_| 3.0 * rng.sample::<f64, _>(StandardNormal)).collect();
    let r = DarkReference::new(2, ripple.iter().map(|p| 100.0 + p).collect(), 4).unwrap();
    let bias = [3.0, -2.0, 6.0, 0.5];
    let actual: Vec<f64> = (0..cols).map(|j| 100.0 + ripple[j] + bias[j / 100]).collect();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let rows: Vec<DarkRow> = (0..2)
            .map(|k| DarkRow {
                time: k as f64 * 0.1,
                counts: actual.iter().map(|a| (a + rng.sample::<f64, _>(StandardNormal)).round()).collect(),
            })
            .collect();
        let e = model_dark(&rows, &r, 0.05, 0.1, cols).unwrap();
        for p in 0..4 {
            let mean = (p * 100..(p + 1) * 100).map(|j| e.values[j] - actual[j]).sum::<f64>() / 100.0;
            worst = worst.max(mean.abs());
        }
    }
    assert!(worst < 0.3, "port residual {worst}");
}

#[test]
fn distant_rows_fall_back_with_flag() {
    let r = reference();
    let rows = vec![DarkRow { time: 10.0, counts: r.profile.clone() }];
    assert!(model_dark(&rows, &r, 0.0, 1.0, 40).unwrap().fallback);
}

#[test]
fn zero_reference_is_degenerate() {
    let r = DarkReference::new(1, vec![0.0; 8], 2).unwrap();
    let rows = vec![DarkRow { time: 0.0, counts: vec![1.0; 8] }];
    assert!(matches!(model_dark(&rows, &r, 0.0, 1.0, 8), Err(Error::DegenerateReference(_))));
}

#[test]
fn narrow_shielded_row_extends_and_flags() {
    let r = DarkReference::new(1, vec![50.0; 30], 3).unwrap();
    let rows = vec![DarkRow { time: 0.0, counts: vec![50.0; 30] }];
    let e = model_dark(&rows, &r, 0.0, 1.0, 32).unwrap();
    assert_eq!(e.uncovered, 2);
    assert_eq!(e.values[31], 50.0);
}

#[test]
fn correct_dark_arithmetic() {
    let raw = RawFrame {
        band: 1,
        mode: l1chain::geom::Mode::Lac,
        seq: 0,
        start_time: 0.0,
        rows: 2,
        cols: 3,
        counts: vec![100; 6],
        dark_row: None,
        tilt_angle: 0.0,
    };
    assert!(correct_dark(&raw, &[0.0; 3]).unwrap().data.iter().all(|&v| v == 100.0));
    assert!(correct_dark(&raw, &[40.0; 3]).unwrap().data.iter().all(|&v| v == 60.0));
    assert!(correct_dark(&raw, &[0.0; 2]).is_err());
    assert_eq!(correct_dark(&raw, &[140.0; 3]).unwrap().data[0], -40.0);
}

// ---- smear
#[test]
fn epsilon_arithmetic() {
    let p = SmearParams::new(Mode::Lac, 64.0);
    assert!((p.epsilon() - 3.125e-5).abs() < 1e-18);
}

#[test]
fn vanishing_epsilon_is_identity() {
    let mut p = SmearParams::new(Mode::Lac, 64.0);
    p.row_transfer_time = 0.0;
    let m = build_smear_weights(&p).unwrap();
    assert_eq!(m.weights, DMatrix::identity(24, 24));
}

#[test]
fn rows_sum_to_one() {
    for mode in [Mode::Lac, Mode::Gac] {
        let m = build_smear_weights(&SmearParams::new(mode, 8.0)).unwrap();
        for i in 0..m.rows {
            assert!((m.weights.row(i).sum() - 1.0).abs() < 1e-14);
        }
    }
}

#[test]
fn invalid_timing() {
    assert!(matches!(build_smear_weights(&SmearParams::new(Mode::Lac, 0.1)), Err(Error::InvalidTiming(_))));
    let mut p = SmearParams::new(Mode::Lac, 64.0);
    p.row_transfer_time = 70_000.0;
    assert!(matches!(build_smear_weights(&p), Err(Error::InvalidTiming(_))));
}

#[test]
fn bright_row_ghosts_both_ways() {
    let p = SmearParams::new(Mode::Lac, 8.0);
    let m = build_smear_weights(&p).unwrap();
    let eps = p.epsilon();
    let (rows, cols, q) = (24, 2, 12);
    let mut data = vec![0.0; rows * cols];
    data[q * cols] = 1000.0;
    let f = Frame { band: 1, mode: Mode::Lac, seq: 0, start_time: 0.0, rows, cols, data, tilt_angle: 0.0 };
    let s = apply_smear(&f, &m).unwrap();
    for i in 0..rows {
        let v = s.at(i, 0);
        let expect = if i + 2 <= q || i >= q + 2 { 2.0 * eps * 1000.0 } else if i == q { v } else { 0.0 };
        assert!((v - expect).abs() < 1e-9, "row {i}: {v} vs {expect}");
        assert_eq!(s.at(i, 1), 0.0);
    }
    assert!(s.at(q, 0) < 1000.0);
}

// ---- prnu
fn frame(band: u8, data: Vec<f64>, cols: usize) -> Frame {
    Frame { band, mode: Mode::Lac, seq: 0, start_time: 0.0, rows: data.len() / cols, cols, data, tilt_angle: 0.0 }
}

#[test]
fn unit_and_single_column_gain() {
    let f = frame(2, (0..12).map(|v| v as f64).collect(), 6);
    assert_eq!(apply_prnu(&f, &PrnuTable::unity(2, 6)).unwrap(), f);
    let mut t = PrnuTable::unity(2, 6);
    t.gains[5] = 2.0;
    let g = apply_prnu(&f, &t).unwrap();
    for r in 0..2 {
        for c in 0..6 {
            let k = if c == 5 { 2.0 } else { 1.0 };
            assert_eq!(g.at(r, c), k * f.at(r, c));
        }
    }
    assert!(apply_prnu(&f, &PrnuTable::unity(3, 6)).is_err());
}

#[test]
fn dead_column_masked() {
    let scenes: Vec<Frame> = (0..5)
        .map(|s| {
            let mut d = vec![10.0 + s as f64; 8];
            d[3] = 0.0;
            d[7] = 0.0;
            frame(1, d, 4)
        })
        .collect();
    let t = estimate_prnu(&scenes, 1, &PrnuOptions { min_scenes: 5, trim: 0.1 }).unwrap();
    assert!(t.dead[3] && !t.dead[0]);
    assert_eq!(t.gains[3], 1.0);
    assert!((t.gains[0] - 1.0).abs() < 1e-12);
}

#[test]
fn too_few_scenes() {
    let f = frame(1, vec![1.0; 4], 4);
    assert!(matches!(estimate_prnu(&[f], 1, &PrnuOptions::default()), Err(Error::InsufficientData(_))));
}
