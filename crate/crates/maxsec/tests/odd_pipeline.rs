mod common;

use common::{radon_calibration_error, trum_fd_error, TrigPair};
use maxsec::odd::{build_odd, OddConfig, OddContext};
use maxsec::verify::verify_body;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn boundary_form_matches_shifted_radii() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for dim in [3, 5] {
        for _ in 0..5 {
            let p = TrigPair::random(&mut rng, 0.03);
            let e = trum_fd_error(&p, dim);
            assert!(e <= 1e-6, "d={dim} {p:?}: {e:e}");
        }
    }
}

#[test]
fn radon_of_radial_power_gives_central_sections() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for dim in [3, 4, 5] {
        for _ in 0..3 {
            let p = TrigPair::random(&mut rng, 0.03);
            let e = radon_calibration_error(&TrigPair::symmetric(p.a), dim, &[0.0, 0.3, 0.8, 1.2, 1.5707963267948966]);
            assert!(e <= 1e-6, "d={dim}: {e:e}");
        }
    }
}

#[test]
fn zero_scale_builds_the_ball() {
    for dim in [3, 5] {
        let b = build_odd(&OddConfig { dim, h_scale: 0.0, ..Default::default() }).unwrap();
        assert_eq!(b.report.max_radius_difference, 0.0);
        assert!(b.radial.big_values().iter().chain(b.radial.small_values()).all(|&v| v == 1.0));
        let v = verify_body(&b.body, false, 24, 1e-5).unwrap();
        assert!(v.spread <= 1e-10, "d={dim} {}", v.spread);
        let ball = maxsec::geometry::unit_ball_volume::<f64>(dim - 1);
        assert!((v.mean - ball).abs() <= 1e-10 * ball);
    }
}

#[test]
fn negated_perturbation_reflects_the_body() {
    let cfg = OddConfig { singular_tol: f64::INFINITY, ..Default::default() };
    let mut ctx = OddContext::new(&cfg).unwrap();
    let x = [0.3, -0.5, 0.2, 0.6, -0.4, 0.3];
    let neg: Vec<f64> = x.iter().map(|v| -v).collect();
    let plus = ctx.evaluate(&x, cfg.h_scale).unwrap();
    let minus = ctx.evaluate(&neg, cfg.h_scale).unwrap();
    let scale = plus.b().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (a, b) in plus.b().iter().zip(minus.b()) {
        assert!((a + b).abs() <= 1e-9 * scale, "{a:e} {b:e}");
    }
    let psi_scale = plus.zonal.psi.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (a, b) in plus.zonal.psi.values().iter().zip(minus.zonal.psi.values()) {
        assert!((a + b).abs() <= 1e-9 * psi_scale);
    }
    let rp = ctx.radial(&plus).unwrap();
    let rm = ctx.radial(&minus).unwrap();
    let diff = rp.big.iter().zip(&rm.small).chain(rp.small.iter().zip(&rm.big)).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(diff <= 1e-8, "{diff:e}");
    let fp = maxsec::geometry::profile_from_radial(&rp.pair, 3).unwrap();
    let fm = maxsec::geometry::profile_from_radial(&rm.pair, 3).unwrap();
    for xi in [-0.95, -0.73, -0.4, 0.0, 0.4, 0.73, 0.95] {
        assert!((fp.value(xi) - fm.value(-xi)).abs() <= 1e-8, "xi={xi}");
    }
}
