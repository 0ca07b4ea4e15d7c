//! Oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

use maxsec::geometry::{BodyOfRevolution, Direction, RadialPair};
use maxsec::odd::pipeline::lemma_trum_form;
use maxsec::odd::zonal::{radon_at, ZonalFunction, ZonalGrid};
use maxsec::solve1d::brent_root;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// R(α) = 1 + a₁cos2α + a₂cos4α, r(α) = 1 + c + b₁cos2α + b₂cos4α with c
/// chosen so that R(π/2) = r(π/2). Both are smooth even functions of α.
#[derive(Clone, Copy, Debug)]
pub struct TrigPair {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub c: f64,
}

impl TrigPair {
    pub fn random(rng: &mut ChaCha8Rng, amp: f64) -> Self {
        let mut v = || rng.random_range(-amp..amp);
        let (a, b) = ([v(), v()], [v(), v()]);
        Self { a, b, c: (a[1] - a[0]) - (b[1] - b[0]) }
    }

    pub fn symmetric(a: [f64; 2]) -> Self {
        Self { a, b: a, c: 0.0 }
    }

    pub fn big(&self, al: f64) -> (f64, f64) {
        let [a1, a2] = self.a;
        (1.0 + a1 * (2.0 * al).cos() + a2 * (4.0 * al).cos(), -2.0 * a1 * (2.0 * al).sin() - 4.0 * a2 * (4.0 * al).sin())
    }

    pub fn small(&self, al: f64) -> (f64, f64) {
        let [b1, b2] = self.b;
        (1.0 + self.c + b1 * (2.0 * al).cos() + b2 * (4.0 * al).cos(), -2.0 * b1 * (2.0 * al).sin() - 4.0 * b2 * (4.0 * al).sin())
    }

    pub fn pair(&self, n: usize) -> RadialPair<f64> {
        let al: Vec<f64> = (0..n).map(|i| FRAC_PI_2 * i as f64 / (n - 1) as f64).collect();
        let big = al.iter().map(|&a| self.big(a).0).collect();
        let small = al.iter().map(|&a| self.small(a).0).collect();
        RadialPair::new(al, big, small).unwrap()
    }

    /// Radial function at polar angle φ ∈ [0, π] from +e₁.
    fn rho(&self, phi: f64) -> f64 {
        if phi <= FRAC_PI_2 { self.big(phi).0 } else { self.small(std::f64::consts::PI - phi).0 }
    }

    /// ρ_{K-te₁} in the direction (sign·cos α, sin α).
    pub fn shifted_radius(&self, alpha: f64, sign: f64, t: f64) -> f64 {
        let (s, c) = alpha.sin_cos();
        let g = |lam: f64| {
            let (x, y) = (sign * lam * c + t, lam * s);
            (x * x + y * y).sqrt() - self.rho(y.atan2(x))
        };
        brent_root(g, 0.5, 1.5, 1e-15, 200).unwrap()
    }

    /// Central difference in t of [ρ_t^{d-1}(u) + ρ_t^{d-1}(-u)]/(d-1) at t = 0.
    pub fn trum_fd(&self, dim: usize, alpha: f64, step: f64) -> f64 {
        let f = |t: f64| {
            let p = dim as i32 - 1;
            (self.shifted_radius(alpha, 1.0, t).powi(p) + self.shifted_radius(alpha, -1.0, t).powi(p)) / p as f64
        };
        (f(step) - f(-step)) / (2.0 * step)
    }
}

/// Max relative error of the boundary form against finite differences over
/// a few angles in (0, π/2).
pub fn trum_fd_error(pair: &TrigPair, dim: usize) -> f64 {
    let spline = pair.pair(4001);
    let angles = [0.15, 0.4, 0.7, 0.95, 1.2, 1.45];
    let exact: Vec<f64> = angles.iter().map(|&a| lemma_trum_form(&spline, dim, a)).collect();
    let fd: Vec<f64> = angles.iter().map(|&a| pair.trum_fd(dim, a, 1e-5)).collect();
    let scale = exact.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    exact.iter().zip(&fd).map(|(e, f)| (e - f).abs() / scale).fold(0.0, f64::max)
}

/// Max relative difference between (1/(d-1))·R[ρ^{d-1}] and central section
/// volumes of the origin-symmetric body with R = r = ρ.
pub fn radon_calibration_error(pair: &TrigPair, dim: usize, directions: &[f64]) -> f64 {
    let grid = ZonalGrid::uniform_alpha(2001).unwrap();
    let g = ZonalFunction::from_fn(&grid, |w: f64| pair.big(w.sqrt().acos()).0.powi(dim as i32 - 1)).unwrap();
    let profile = maxsec::geometry::profile_from_radial(&pair.pair(2001), dim).unwrap();
    let body = BodyOfRevolution::new(dim, profile).unwrap();
    let mut err = 0.0f64;
    for &al in directions {
        let vol = body.section_volume_by_direction(Direction::new(al, 1), 0.0).unwrap();
        let radon = radon_at(&g, dim, al.sin().powi(2)).unwrap() / (dim - 1) as f64;
        err = err.max((radon - vol).abs() / vol);
    }
    err
}

pub mod abel {
    use maxsec::abel::{consistent_xi, contraction_estimate, jacobian_fd, picard_solve, AbelOps, PicardOptions, SingularSystem};
    use maxsec::chord::chord_grid;
    use maxsec::even::EvenSystem;
    use maxsec::odd::{OddConfig, OddSystem, V4};
    use maxsec::perturbation::BumpBasis;
    use maxsec::Bump;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// 2(2k)!!/(2k+1)!! = B(k+1, 1/2).
    fn beta_half(k: usize) -> f64 {
        (1..=k).fold(2.0, |acc, j| acc * (2 * j) as f64 / (2 * j + 1) as f64)
    }

    /// Worst relative error of the forward, tilde and V-kernel operators on
    /// closed-form pairs.
    pub fn analytic_pair_error() -> f64 {
        let ops = AbelOps::default();
        let mut err = 0.0f64;
        let mut push = |got: f64, want: f64| err = err.max((got - want).abs() / want.abs().max(1e-300));
        for k in 0..5usize {
            for &(s, b) in &[(0.0, 1.0), (0.3, 0.9), (0.85, 1.0)] {
                let kf = k as f64;
                let r = b - s;
                push(ops.forward(|x: f64| (b - x).powi(k as i32), s, b, &[]), r.powf(kf + 0.5) * beta_half(k));
                push(ops.forward_jacobi(|x: f64| (b - x).powi(k as i32), s, b), r.powf(kf + 0.5) * beta_half(k));
                push(ops.forward(|x: f64| (x - s).powi(k as i32), s, b, &[(s + b) / 2.0]), 2.0 * r.powf(kf + 0.5) / (2.0 * kf + 1.0));
                let rr = |x: f64| ((b - x).powi(k as i32), if k == 0 { 0.0 } else { -kf * (b - x).powi(k as i32 - 1) });
                push(ops.tilde(rr, s, b, &[]).unwrap(), -(kf + 0.5) * r.powf(kf - 0.5) * beta_half(k));
            }
        }
        let pi = std::f64::consts::PI;
        for &(s, sig) in &[(0.2, 0.9), (0.5, 0.5), (0.9, 0.97)] {
            let d: f64 = sig - s;
            push(ops.v_kernel(|a, _| a, s, sig), pi * (s + sig) / 2.0);
            push(ops.v_kernel(|a, _| a * a, s, sig), pi * (s * s + s * d + 0.375 * d * d));
            push(ops.v_kernel(|a, c| a * c, s, sig), pi * sig * (s + sig) / 2.0);
            // ∂_s of π(s² + sd + 3d²/8) with d = σ - s
            push(ops.v_kernel_ds(|a, _| 2.0 * a, s, sig), pi * (2.0 * s + (sig - 2.0 * s) - 0.75 * d));
        }
        err
    }

    /// Worst two-form discrepancy of the equivalence transform over `n` random
    /// smooth systems.
    pub fn invert22_discrepancy(n: usize, seed: u64) -> f64 {
        let ops = AbelOps::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid: Vec<f64> = (0..25).map(|i| 0.85 + 0.15 * i as f64 / 25.0).collect();
        let mut worst = 0.0f64;
        for _ in 0..n {
            let c: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            let u = |s: f64, sig: f64| {
                let e = (c[0] * s + c[1] * sig).exp();
                let t = c[2] * s * sig;
                (e + t.sin(), c[0] * e + c[2] * sig * t.cos(), c[1] * e + c[2] * s * t.cos())
            };
            let r = |s: f64| (c[3] + c[4] * s + c[5] * (3.0 * s).cos(), c[4] - 3.0 * c[5] * (3.0 * s).sin());
            worst = worst.max(ops.invert22_check(u, r, 1.0, &grid).discrepancy);
        }
        worst
    }

    fn probes(z_o: &[V4], nodes: &[f64], amp: f64, seed: u64) -> Vec<Vec<V4>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = vec![z_o.to_vec()];
        for _ in 0..4 {
            let c: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
            out.push(
                z_o.iter()
                    .zip(nodes)
                    .map(|(z, &s)| {
                        let w = (1.0 - s) * 20.0;
                        z + V4::new(c[0] * w + c[1] * w * w, c[2] * w + c[3] * w * w, c[4] + c[5] * w, c[6] + c[7] * w) * amp
                    })
                    .collect(),
            );
        }
        out
    }

    fn estimate<S: SingularSystem<4>>(sys: &S, z_o_fn: fn(f64) -> V4, h0: &Bump, panels: usize, order: usize) -> f64 {
        let grid = chord_grid(h0, panels, order).unwrap();
        let z_o: Vec<V4> = grid.nodes.iter().map(|&s| z_o_fn(s)).collect();
        let xi = consistent_xi(sys, &grid, &z_o);
        let q = jacobian_fd(sys, 1.0, &z_o_fn(1.0));
        contraction_estimate(sys, &grid, &xi, &q, &probes(&z_o, &grid.nodes, 1e-3, 3))
    }

    /// Contraction factor of the unperturbed even (d = 4) system.
    pub fn even_khat(delta: f64) -> f64 {
        let h0 = Bump::zero(BumpBasis::new(delta, 1).unwrap());
        let sys = EvenSystem::new(4, h0.clone()).unwrap();
        estimate(&sys, EvenSystem::z_o, &h0, 4, 24)
    }

    /// Contraction factor of the unperturbed odd (d = 3) system.
    pub fn odd_khat(delta: f64) -> f64 {
        let cfg = OddConfig { delta, ..Default::default() };
        let disc = cfg.discretization();
        let h0 = Bump::zero(cfg.basis().unwrap());
        let sys = OddSystem::new(3, h0.clone(), &disc).unwrap();
        estimate(&sys, OddSystem::z_o, &h0, disc.panels_per_interval, disc.order)
    }

    pub struct BanachCheck {
        /// max over restarts of ‖Z_restart - Z*‖ / predicted radius.
        pub worst_ratio: f64,
        pub restarts: usize,
        pub locality: bool,
        pub khat: f64,
    }

    /// Solves the even system at d = 4, δ = 0.05, scale 1e-3 to several
    /// intermediate tolerances; restarting from each iterate must land within
    /// ‖TZ - Z‖/(1 - k̂) of the final answer.
    pub fn banach_restarts() -> BanachCheck {
        let h = Bump::new(BumpBasis::new(0.05, 1).unwrap(), vec![1.0], 1e-3).unwrap();
        let h0 = Bump::zero(h.basis.clone());
        let grid = chord_grid(&h, 4, 24).unwrap();
        let sys = EvenSystem::new(4, h.clone()).unwrap().with_nodes(&grid.nodes);
        let sys_o = EvenSystem::new(4, h0).unwrap();
        let z_o: Vec<V4> = grid.nodes.iter().map(|&s| EvenSystem::z_o(s)).collect();
        let xi_o = consistent_xi(&sys_o, &grid, &z_o);
        let xi: Vec<V4> = grid.nodes.iter().zip(&xi_o).map(|(&s, x)| x + (sys.xi_direct(s) - sys_o.xi_direct(s))).collect();
        let q = jacobian_fd(&sys_o, 1.0, &EvenSystem::z_o(1.0));
        let frozen = Some(0.95);
        let full = PicardOptions { frozen_from: frozen, ..Default::default() };
        let (star, diag) = picard_solve(&sys, &grid, &xi, &q, z_o.clone(), &full).unwrap();
        let mut check = BanachCheck { worst_ratio: 0.0, restarts: 0, locality: diag.locality_ok == Some(true), khat: diag.khat };
        for tol in [f64::INFINITY, 1e-4, 1e-6, 1e-8, 1e-10] {
            let opts = PicardOptions { tol, frozen_from: frozen, ..Default::default() };
            let start = if tol.is_infinite() { z_o.clone() } else { picard_solve(&sys, &grid, &xi, &q, z_o.clone(), &opts).unwrap().0.values };
            let (end, d) = picard_solve(&sys, &grid, &xi, &q, start.clone(), &full).unwrap();
            check.locality &= d.locality_ok == Some(true);
            let k = d.khat.max(diag.khat);
            let radius = d.updates[0] / (1.0 - k);
            let dist = start.iter().zip(&star.values).map(|(a, b)| (a - b).amax()).fold(0.0, f64::max);
            let drift = end.values.iter().zip(&star.values).map(|(a, b)| (a - b).amax()).fold(0.0, f64::max);
            assert!(drift <= 1e-11, "restart drift {drift:e}");
            if radius > 0.0 {
                check.worst_ratio = check.worst_ratio.max(dist / radius);
            } else {
                check.worst_ratio = check.worst_ratio.max(if dist <= 1e-12 { 0.0 } else { f64::INFINITY });
            }
            check.restarts += 1;
        }
        check
    }
}
