use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use milnorflow::dynamics::{detect_period, integrate, period_scan, FamilyMember, IntegratorConfig};
use milnorflow::export::{curve_samples, write_curve_csv, write_scan_csv};
use milnorflow::geom_core::{random_frame_point, FramePoint};
use milnorflow::{build_gamma, SullivanField};

fn tight() -> IntegratorConfig {
    IntegratorConfig {
        rtol: 1e-12,
        atol: 1e-14,
        closure_eps: 1e-6,
        ..IntegratorConfig::default()
    }
}

#[test]
fn exported_curve_round_trips_through_csv() {
    let curve = build_gamma(1.5).unwrap();
    let samples = curve_samples(&curve, 2000).unwrap();
    assert!(samples.windows(2).all(|w| w[1].s > w[0].s));
    let mut buf = Vec::new();
    write_curve_csv(&mut buf, &samples).unwrap();
    let mut reader = csv::Reader::from_reader(buf.as_slice());
    for (rec, p) in reader.records().zip(&samples) {
        let v: Vec<f64> = rec.unwrap().iter().map(|f| f.parse().unwrap()).collect();
        assert_eq!(v, vec![p.s, p.x, p.y, p.z, p.kg]);
        assert!(((p.x * p.x + p.y * p.y + p.z * p.z).sqrt() - 1.0).abs() < 1e-14);
        assert!(p.kg > 0.0);
    }
}

#[test]
fn orbits_stay_on_their_leaf() {
    let field = SullivanField::new(1.0).unwrap();
    let p0 = random_frame_point(&mut ChaCha8Rng::seed_from_u64(11));
    let leaf0 = field.leaf_through(&p0).unwrap();
    let traj = integrate(&field, &p0.to_array(), 50.0, &tight()).unwrap();
    let end = FramePoint::from_slice(traj.last().unwrap());
    let leaf1 = field.leaf_through(&end).unwrap();
    assert!((leaf1.g.matrix() - leaf0.g.matrix()).amax() < 1e-8);
    assert!(leaf1.phase != leaf0.phase);
}

#[test]
fn parallel_scan_matches_serial_runs() {
    let cfg = tight();
    let p0 = random_frame_point(&mut ChaCha8Rng::seed_from_u64(5)).to_array();
    let family = |l: f64| -> milnorflow::Result<FamilyMember> { Ok((Box::new(SullivanField::new(l)?), p0.to_vec())) };
    let grid = [1.0, 1.25, 1.5];
    let scan = period_scan(family, &grid, &cfg).unwrap();
    assert!(scan.strictly_increasing());
    for (pt, &l) in scan.points.iter().zip(&grid) {
        let o = detect_period(&SullivanField::new(l).unwrap(), &p0, &cfg).unwrap();
        assert_eq!(pt.param, l);
        assert_eq!(pt.period, o.period);
    }
    assert!(scan.growth_exponent > 0.0);
    let mut a = Vec::new();
    let mut b = Vec::new();
    write_scan_csv(&mut a, &scan).unwrap();
    write_scan_csv(&mut b, &period_scan(family, &grid, &cfg).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn scan_rejects_unordered_grids() {
    let family = |l: f64| -> milnorflow::Result<FamilyMember> { Ok((Box::new(SullivanField::new(l)?), vec![0.0; 9])) };
    assert!(period_scan(family, &[2.0, 1.0], &tight()).is_err());
    assert!(period_scan(family, &[], &tight()).is_err());
}
