use l1chain::error::Error;
use l1chain::geom::ellipsoid::{
    ecef_to_geodetic, enu_basis, geodetic_to_ecef, implicit_residual, intersect_height, intersect_offset_ellipsoid,
    normalize_lon, WGS84_A,
};
use l1chain::geom::*;

// ---- ellipsoid
#[test]
fn geodetic_round_trip() {
    for &(lat, lon, h) in &[
        (0.0, 0.0, 0.0),
        (45.0, 120.0, 1000.0),
        (-89.9, -179.5, 50.0),
        (12.3, 77.7, 732_500.0),
    ] {
        let g = GroundPoint::new(lat, lon, h);
        let back = GroundPoint::from_ecef(&g.to_ecef());
        assert!((back.lat - lat).abs() < 1e-10, "{back:?}");
        assert!((back.lon - normalize_lon(lon)).abs() < 1e-10);
        assert!((back.height - h).abs() < 1e-6);
    }
}

#[test]
fn lon_normalization() {
    assert_eq!(normalize_lon(180.0), 180.0);
    assert_eq!(normalize_lon(-180.0), 180.0);
    assert_eq!(normalize_lon(190.0), -170.0);
    assert_eq!(normalize_lon(540.0), 180.0);
}

#[test]
fn nadir_ray_hits_equator() {
    let origin = Vec3::new(WGS84_A + 700_000.0, 0.0, 0.0);
    let p = intersect_offset_ellipsoid(&origin, &Vec3::new(-1.0, 0.0, 0.0), 0.0).unwrap();
    assert!((p.x - WGS84_A).abs() < 1e-6);
}

#[test]
fn ray_pointing_away_misses() {
    let origin = Vec3::new(WGS84_A + 700_000.0, 0.0, 0.0);
    let r = intersect_offset_ellipsoid(&origin, &Vec3::new(1.0, 0.0, 0.0), 0.0);
    assert!(matches!(r, Err(Error::NoIntersection)));
    let r = intersect_offset_ellipsoid(&origin, &Vec3::new(0.0, 1.0, 0.0), 0.0);
    assert!(matches!(r, Err(Error::NoIntersection)));
}

#[test]
fn constant_height_refinement() {
    let origin = geodetic_to_ecef(0.6, 1.2, 730_000.0);
    let dir = -origin.normalize() + Vec3::new(0.05, -0.1, 0.02);
    let p = intersect_height(&origin, &dir, 2500.0).unwrap();
    let (_, _, h) = ecef_to_geodetic(&p);
    assert!((h - 2500.0).abs() < 1e-6);
}

// ---- orbit
#[test]
fn period_follows_kepler() {
    let el = OrbitElements::default();
    let a: f64 = 6_378_137.0 + 732_500.0;
    let oracle = 2.0 * std::f64::consts::PI * (a * a * a / 3.986_004_418e14).sqrt();
    assert!((el.period() - oracle).abs() / oracle < 1e-12);
    assert!((el.period() - 5967.0).abs() < 5.0, "{}", el.period());
}

#[test]
fn epoch_state_is_on_the_node() {
    let el = OrbitElements { node_longitude: 37.0, ..Default::default() };
    let s = propagate_orbit(&el, 0.0);
    let g = GroundPoint::from_ecef(&s.position);
    assert!(g.lat.abs() < 1e-9);
    assert!((g.lon - 37.0).abs() < 1e-9);
    assert!((s.position.norm() - el.semi_major_axis()).abs() < 1e-6);
}

#[test]
fn ground_track_drifts_west_each_revolution() {
    let el = OrbitElements::default();
    let t = el.period();
    let g = GroundPoint::from_ecef(&propagate_orbit(&el, t).position);
    let oracle = -(7.292_115e-5 * t).to_degrees();
    assert!(g.lat.abs() < 1e-6);
    assert!((g.lon - oracle).abs() < 1e-6);
    assert!((g.lon + 24.93).abs() < 0.1, "{}", g.lon);
}

#[test]
fn earth_fixed_velocity_matches_finite_difference() {
    let el = OrbitElements { node_longitude: -50.0, arg_latitude: 30.0, ..Default::default() };
    let h = 1e-3;
    let fd = (el.state_at(10.0 + h).position - el.state_at(10.0 - h).position) / (2.0 * h);
    assert!((fd - el.state_at(10.0).velocity).norm() < 1e-4);
}

// ---- attitude
#[test]
fn interpolates_linearly() {
    let p = AttitudeProfile::new(vec![
        AttitudeState::new(0.0, 0.0, 1.0, 0.0),
        AttitudeState::new(2.0, 2.0, 3.0, -2.0),
    ])
    .unwrap();
    assert_eq!(p.angles_at(1.0), [1.0, 2.0, -1.0]);
    assert_eq!(p.angles_at(-5.0), [0.0, 1.0, 0.0]);
    assert_eq!(p.angles_at(9.0), [2.0, 3.0, -2.0]);
}

#[test]
fn drift_accumulates() {
    let s = AttitudeState { drift_rate: 6e-4, ..Default::default() };
    let a = s.angles_at(10.0);
    assert!((a[0] - 6e-3f64.to_radians()).abs() < 1e-15);
}

#[test]
fn rejects_unordered_samples() {
    let s = AttitudeState::default();
    assert!(AttitudeProfile::new(vec![s, s]).is_err());
    assert!(AttitudeProfile::new(vec![]).is_err());
}

// ---- sensor
fn ideal_sensor() -> SensorGeometry {
    SensorGeometry { distortion: Distortion::identity(), ..SensorGeometry::default() }
}

#[test]
fn centre_pixel_is_boresight() {
    let s = ideal_sensor();
    let v = s.look_vector(23.5, 1999.5).unwrap();
    assert!((v - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-15);
    assert_eq!(s.across_track_angle(1999.5), 0.0);
}

#[test]
fn pinhole_edge_angle_is_45_degrees() {
    let s = ideal_sensor();
    // atan(2000 * 10 µm / 20 mm)
    let oracle = (2000.0f64 * 10e-6 / 20e-3).atan().to_degrees();
    assert!((oracle - 45.0).abs() < 1e-12);
    assert!((s.across_track_angle(-0.5).abs() - oracle).abs() < 1e-12);
}

#[test]
fn default_lens_edge_angle_matches_fov() {
    let s = SensorGeometry::default();
    let left = s.across_track_angle(-0.5);
    let right = s.across_track_angle(3999.5);
    assert!((left.abs() - 43.5).abs() < 0.05, "{left}");
    assert!((right - 43.5).abs() < 0.05, "{right}");
}

#[test]
fn out_of_range_index_is_domain_error() {
    let s = SensorGeometry::default();
    assert!(s.look_vector(-0.6, 10.0).is_err());
    assert!(s.look_vector(48.0, 10.0).is_err());
    assert!(s.look_vector(10.0, 4000.0).is_err());
    assert!(s.look_vector(-0.5, -0.5).is_ok());
}

#[test]
fn distortion_inverse_round_trip() {
    let d = SensorGeometry::default().distortion;
    for i in -20..=20 {
        let u = i as f64 * 0.05;
        let (ud, vd) = d.apply(u, 0.01 * i as f64);
        let (u2, v2) = d.invert(ud, vd);
        assert!((u2 - u).abs() < 1e-13);
        assert!((v2 - 0.01 * i as f64).abs() < 1e-15);
    }
}

#[test]
fn project_inverts_look() {
    let mut s = SensorGeometry::default();
    s.tilt_angle = 12.0;
    s.alignment = [1e-3, -2e-3, 5e-4];
    let corr = LookCorrection { roll: [1e-4, 2e-4, 0.0, -1e-4], pitch: [-3e-4, 0.0, 1e-4, 0.0] };
    let cam = Camera::new(s, corr);
    for &(r, c) in &[(0.0, 0.0), (23.5, 1999.5), (47.0, 3999.0), (10.25, 3111.7)] {
        let v = cam.look_vector(r, c).unwrap();
        let (r2, c2) = cam.project(&v).unwrap();
        assert!((r2 - r).abs() < 1e-7 && (c2 - c).abs() < 1e-7, "{r2} {c2}");
    }
}

#[test]
fn binned_coordinates_round_trip() {
    for mode in [Mode::Lac, Mode::Gac] {
        for l in [0.0, 1.5, 7.0] {
            assert!((mode.binned_row(mode.physical_row(l)) - l).abs() < 1e-12);
            assert!((mode.binned_col(mode.physical_col(l)) - l).abs() < 1e-12);
        }
    }
    let s = SensorGeometry::default();
    assert_eq!(Mode::Lac.frame_rows(&s), 24);
    assert_eq!(Mode::Gac.frame_rows(&s), 8);
    assert_eq!(Mode::Gac.frame_cols(&s), 2000);
    assert_eq!(Mode::Lac.base_scans(&s), 47);
    assert_eq!(Mode::Gac.base_scans(&s), 13);
}

// ---- model
fn platform(sensor: SensorGeometry) -> Platform {
    Platform {
        camera: Camera::nominal(sensor),
        orbit: OrbitElements::default(),
        attitude: AttitudeProfile::nadir(),
        height: 0.0,
    }
}

#[test]
fn boresight_hits_sub_satellite_point() {
    let s = SensorGeometry { distortion: Distortion::identity(), ..Default::default() };
    let orbit = OrbitElements::default().state_at(0.0);
    let g = pixel_to_ground(&s, &orbit, &AttitudeState::default(), 23.5, 1999.5, 0.0).unwrap();
    let p = g.to_ecef();
    let sub = GroundPoint::new(0.0, 0.0, 0.0).to_ecef();
    assert!((p - sub).norm() < 1.0, "{}", (p - sub).norm());
}

#[test]
fn roll_moves_ground_across_track() {
    let s = SensorGeometry::default();
    let orbit = OrbitElements::default().state_at(0.0);
    let a = pixel_to_ground(&s, &orbit, &AttitudeState::default(), 23.5, 1999.5, 0.0).unwrap();
    let b = pixel_to_ground(&s, &orbit, &AttitudeState::new(0.0, 0.01, 0.0, 0.0), 23.5, 1999.5, 0.0).unwrap();
    let d = (a.to_ecef() - b.to_ecef()).norm();
    let oracle = 732_500.0 * 0.01f64.tan();
    // flat-Earth small-angle oracle; curvature adds well under 1%
    assert!((d - oracle).abs() / oracle < 0.01, "{d} vs {oracle}");
}

#[test]
fn ground_points_lie_on_requested_height() {
    let p = platform(SensorGeometry::default());
    for &(r, c, h) in &[(0.0, 0.0, 0.0), (47.0, 3999.0, 1500.0), (12.3, 777.7, -100.0)] {
        let mut q = p.clone();
        q.height = h;
        let e = q.pixel_to_ecef(3.0, r, c).unwrap();
        assert!(implicit_residual(&e, h).abs() < 1e-9);
        assert!((GroundPoint::from_ecef(&e).height - h).abs() < 1e-4);
    }
}

#[test]
fn ground_to_pixel_round_trip() {
    let p = platform(SensorGeometry::default());
    for &(t, r, c) in &[(1.0, 23.5, 1999.5), (2.0, 3.0, 10.0), (2.5, 40.0, 3990.0)] {
        let g = p.pixel_to_ground(t, r, c).unwrap();
        let (t2, _, c2) = p.ground_to_pixel(&g, (-2.0, 6.0), r).unwrap();
        assert!((c2 - c).abs() < 1e-3, "{c2} {c}");
        assert!((t2 - t).abs() < 1e-4, "{t2} {t}");
    }
}

#[test]
fn far_off_track_point_is_not_visible() {
    let p = platform(SensorGeometry::default());
    let sub = p.pixel_to_ground(0.0, 23.5, 1999.5).unwrap();
    let (_, _, up) = enu_basis(sub.lat.to_radians(), sub.lon.to_radians());
    let y = p.pose_at(0.0).body_to_ecef.column(1).into_owned();
    let off = (y - up * up.dot(&y)).normalize() * 800_000.0;
    let far = GroundPoint::from_ecef(&(sub.to_ecef() + off));
    let far = GroundPoint::new(far.lat, far.lon, 0.0);
    assert!(matches!(p.ground_to_pixel(&far, (-5.0, 5.0), 23.5), Err(Error::NotVisible(_))));
}

// ---- lcc
#[test]
fn reference_point_maps_to_false_origin() {
    let p = LccProjection { false_easting: 500.0, false_northing: -40.0, ..LccProjection::centered(20.0, 75.0, 366.0) };
    let (x, y) = p.forward(&GroundPoint::new(20.0, 75.0, 0.0)).unwrap();
    assert!((x - 500.0).abs() < 1e-6 && (y + 40.0).abs() < 1e-6);
}

#[test]
fn standard_parallels_have_unit_scale() {
    let p = LccProjection::centered(20.0, 75.0, 366.0);
    assert!((p.scale_factor(18.0) - 1.0).abs() < 1e-12);
    assert!((p.scale_factor(22.0) - 1.0).abs() < 1e-12);
    assert!(p.scale_factor(20.0) < 1.0);
}

/// Snyder's ellipsoidal LCC, written out independently.
fn snyder_lcc(p1: f64, p2: f64, p0: f64, l0: f64, lat: f64, lon: f64) -> (f64, f64) {
    let e2: f64 = 0.006_694_379_990_141_317;
    let e = e2.sqrt();
    let m = |p: f64| p.cos() / (1.0 - e2 * p.sin().powi(2)).sqrt();
    let t = |p: f64| {
        let s = e * p.sin();
        (std::f64::consts::FRAC_PI_4 - p / 2.0).tan() * ((1.0 + s) / (1.0 - s)).powf(e / 2.0)
    };
    let (p1, p2, p0, lat) = (p1.to_radians(), p2.to_radians(), p0.to_radians(), lat.to_radians());
    let n = (m(p1).ln() - m(p2).ln()) / (t(p1).ln() - t(p2).ln());
    let f = m(p1) / (n * t(p1).powf(n));
    let rho = |p: f64| 6_378_137.0 * f * t(p).powf(n);
    let theta = n * (lon - l0).to_radians();
    (rho(lat) * theta.sin(), rho(p0) - rho(lat) * theta.cos())
}

#[test]
fn forward_matches_closed_form() {
    let p = LccProjection::centered(20.0, 75.0, 366.0);
    for &(lat, lon) in &[(18.0, 75.0), (22.5, 73.0), (19.1, 77.9)] {
        let (x, y) = p.forward(&GroundPoint::new(lat, lon, 0.0)).unwrap();
        let (xo, yo) = snyder_lcc(18.0, 22.0, 20.0, 75.0, lat, lon);
        assert!((x - xo).abs() < 1e-6 && (y - yo).abs() < 1e-6, "{x} {y} vs {xo} {yo}");
    }
}

#[test]
fn pole_and_degenerate_parallels_rejected() {
    let p = LccProjection::centered(20.0, 75.0, 366.0);
    assert!(p.forward(&GroundPoint::new(90.0, 0.0, 0.0)).is_err());
    let q = LccProjection { parallels: [10.0, 10.0], ..p };
    assert!(q.validate().is_err());
}

#[test]
fn grid_round_trip() {
    let p = LccProjection::centered(-33.0, 151.0, 366.0);
    let pts = [GroundPoint::new(-34.0, 150.0, 0.0), GroundPoint::new(-32.0, 152.5, 0.0)];
    let g = LccGrid::covering(p, &pts, 2).unwrap();
    let (i, j) = {
        let (x, y) = p.forward(&pts[0]).unwrap();
        g.pixel_of(x, y)
    };
    assert!(i > 0.0 && j > 0.0 && i < g.rows as f64 && j < g.cols as f64);
    let back = g.ground(i, j).unwrap();
    assert!((back.lat + 34.0).abs() < 1e-9 && (back.lon - 150.0).abs() < 1e-9);
}

// ---- virtual_linear
#[test]
fn step_one_formula() {
    let cam = Camera::nominal(SensorGeometry::default());
    let lac = build_virtual_linear_model(&[0.0], 0.1, Mode::Lac, &cam).unwrap();
    assert_eq!((lac.num_scans, lac.num_pixels), (47, 4000));
    let gac = build_virtual_linear_model(&[0.0, 0.1], 0.1, Mode::Gac, &cam).unwrap();
    assert_eq!((gac.num_scans, gac.num_pixels), (15, 2000));
    let times: Vec<f64> = (0..100).map(|k| k as f64 * 0.1).collect();
    assert_eq!(build_virtual_linear_model(&times, 0.1, Mode::Lac, &cam).unwrap().num_scans, 245);
}

#[test]
fn rejects_bad_stacks() {
    let cam = Camera::nominal(SensorGeometry::default());
    assert!(matches!(build_virtual_linear_model(&[], 0.1, Mode::Lac, &cam), Err(Error::Domain(_))));
    assert!(matches!(build_virtual_linear_model(&[1.0, 0.5], 0.1, Mode::Lac, &cam), Err(Error::Data(_))));
}
