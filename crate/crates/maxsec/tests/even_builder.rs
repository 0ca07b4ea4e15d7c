use std::f64::consts::FRAC_PI_2;

use maxsec::even::{build_even, build_even_with, EvenConfig};
use maxsec::geometry::{unit_ball_volume, ChordLine, Direction};
use maxsec::Bump;

fn accepted() -> (EvenConfig, Bump) {
    let cfg = EvenConfig::default();
    let b = build_even(&cfg).unwrap();
    (cfg, b.perturbation)
}

#[test]
fn zero_perturbation_is_the_ball() {
    for dim in [4, 6] {
        let b = build_even(&EvenConfig { dim, h_scale: 0.0, ..Default::default() }).unwrap();
        assert_eq!(b.report.max_deviation_from_ball, 0.0);
        for xi in [-0.99, -0.7, -0.3, 0.0, 0.5, 0.72, 0.9] {
            assert!((b.body.profile.value(xi) - (1.0 - xi * xi).sqrt()).abs() <= 1e-12);
        }
    }
}

#[test]
fn chord_sections_have_constant_maximal_volume() {
    let (cfg, h) = accepted();
    let b = build_even_with(&cfg, &h).unwrap();
    let v = unit_ball_volume::<f64>(cfg.dim - 1);
    for i in 0..60 {
        let beta = (FRAC_PI_2 - 1e-3) * i as f64 / 59.0;
        let s = beta.tan();
        let chord = ChordLine { s, hval: h.value(s) };
        let vol = b.body.section_volume(chord).unwrap();
        assert!((vol - v).abs() <= 1e-6 * v, "s={s}: {vol}");
        let (dir, t) = Direction::from_chord(chord);
        let m = b.body.max_section(dir).unwrap();
        assert!((m.t_star - t).abs() <= 1e-6, "s={s}: t*={} t={t}", m.t_star);
    }
}

#[test]
fn determinant_stays_away_from_zero() {
    let (cfg, h) = accepted();
    let r = build_even_with(&cfg, &h).unwrap().report;
    assert!(r.min_abs_det_a >= 0.5 * r.unperturbed_min_abs_det_a, "{} {}", r.min_abs_det_a, r.unperturbed_min_abs_det_a);
}

#[test]
fn profile_is_c2_across_junctions() {
    let (cfg, h) = accepted();
    let b = build_even_with(&cfg, &h).unwrap();
    let p = &b.body.profile;
    let (lo, hi) = p.domain();
    let eta = 1e-7;
    let step = 1e-4;
    let d2 = |x: f64| (p.value(x + step) - 2.0 * p.value(x) + p.value(x - step)) / (step * step);
    for c in p.breakpoints().filter(|&c| c > lo + 1e-3 && c < hi - 1e-3) {
        let (l, r) = (p.eval(c - eta), p.eval(c + eta));
        assert!((l.0 - r.0).abs() <= 1e-6 && (l.1 - r.1).abs() <= 1e-5, "value/slope jump at {c}");
        let jump = (d2(c) - 0.5 * (d2(c - 2.0 * step) + d2(c + 2.0 * step))).abs();
        assert!(jump <= 1e-5, "second-difference jump {jump:e} at {c}");
    }
}

#[test]
fn negated_perturbation_reflects_the_body() {
    let (cfg, h) = accepted();
    let plus = build_even_with(&cfg, &h).unwrap();
    let minus = build_even_with(&cfg, &h.negated()).unwrap();
    for i in 0..=400 {
        let xi = -0.999 + 1.998 * i as f64 / 400.0;
        let (a, b) = (plus.body.profile.value(xi), minus.body.profile.value(-xi));
        assert!((a - b).abs() <= 1e-9, "xi={xi}: {a} vs {b}");
    }
}

#[test]
fn perturbed_body_differs_only_near_the_diagonal_points() {
    let (cfg, h) = accepted();
    let b = build_even_with(&cfg, &h).unwrap();
    let c = std::f64::consts::FRAC_1_SQRT_2;
    let mut far = 0.0f64;
    let mut near = 0.0f64;
    for i in 0..=2000 {
        let xi = -0.999 + 1.998 * i as f64 / 2000.0;
        let d = (b.body.profile.value(xi) - (1.0 - xi * xi).sqrt()).abs();
        if (xi.abs() - c).abs() > 0.1 { far = far.max(d) } else { near = near.max(d) }
    }
    assert_eq!(far, 0.0);
    assert!(near > 0.0);
}
