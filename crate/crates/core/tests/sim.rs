use l1chain::geom::LookCorrection;
use l1chain::sim::scene::power_law_noise;
use l1chain::sim::*;

// ---- scene
fn extent() -> Extent {
    Extent { lat_min: 10.0, lat_max: 10.2, lon_min: 70.0, lon_max: 70.2 }
}

#[test]
fn same_seed_same_scene() {
    let t = TextureParams { cell_size: 500.0, ..Default::default() };
    let a = generate_scene(7, extent(), &[1, 2], &t).unwrap();
    let b = generate_scene(7, extent(), &[1, 2], &t).unwrap();
    assert_eq!(a, b);
    let c = generate_scene(8, extent(), &[1, 2], &t).unwrap();
    assert_ne!(a, c);
}

#[test]
fn uniform_patch_is_exact() {
    let patch = UniformPatch { extent: Extent { lat_min: 10.05, lat_max: 10.1, lon_min: 70.05, lon_max: 70.1 }, radiance: 42.0 };
    let t = TextureParams { cell_size: 500.0, patches: vec![patch], ..Default::default() };
    let s = generate_scene(1, extent(), &[3], &t).unwrap();
    for k in 0..20 {
        let lat = 10.06 + 0.03 * k as f64 / 20.0;
        assert!((s.sample(0, lat, 70.07).unwrap() - 42.0).abs() < 1e-12);
    }
}

#[test]
fn bilinear_reproduces_cells_and_rejects_outside() {
    let t = TextureParams { cell_size: 1000.0, ..Default::default() };
    let s = generate_scene(3, extent(), &[1], &t).unwrap();
    let Field::Grid(g) = &s.fields[0] else { panic!() };
    assert!((s.sample(0, s.cell_lat(4), s.cell_lon(5)).unwrap() - g[4 * s.nlon + 5]).abs() < 1e-9);
    assert!(s.sample(0, 9.0, 70.1).is_none());
}

#[test]
fn noise_is_normalized() {
    let v = power_law_noise(64, 48, -2.0, 1.0, 5);
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let var = v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64;
    assert!(mean.abs() < 1e-12 && (var - 1.0).abs() < 1e-9);
}

// ---- effects
#[test]
fn bounds_enforced() {
    let mut e = EffectsConfig::ideal();
    assert!(inject_geolocation_bias(&mut e, 0.0123, 3.4e-3).is_ok());
    assert_eq!(e.attitude_bias, [0.0123, 3.4e-3]);
    assert!(inject_geolocation_bias(&mut e, 0.05, 0.0).is_err());
    assert!(inject_tilt_drift(&mut e, 1e-4, 0.0).is_ok());
    assert!(inject_tilt_drift(&mut e, 2e-3, 0.0).is_err());
    assert!(inject_band_misalignment(&mut e, 3, LookCorrection::constant(0.04, 0.0)).is_err());
    assert!(e.validate().is_ok());
}
