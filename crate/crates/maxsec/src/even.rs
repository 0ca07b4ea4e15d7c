//! Even dimensions d = 2p + 2. The constancy and maximality conditions are
//! differentiated p+1 and p times in s, turning them into a Volterra system
//! for Z = (x, y, x', y') on [1-3δ, 1] that is solved by Picard iteration.

use nalgebra::{Matrix2, Vector4};
use serde::{Deserialize, Serialize};

use crate::abel::{consistent_xi, jacobian_fd, picard_solve, ChordState, PanelGrid, PicardDiagnostics, PicardOptions, SingularSystem};
use crate::chord::{chord_grid, dx_o, x_o};
use crate::error::{Error, Result};
use crate::geometry::{chord_polar, convexity_check, unit_ball_volume, Arc, BodyOfRevolution, PolarArc, ProfileFunction, Side};
use crate::perturbation::{BumpBasis, PerturbationSpec};
use crate::quadrature::{gauss_legendre, Rule};
use crate::spline::EndCondition;
use crate::taylor::factorial;
use crate::{Bump, Jet};

/// Jet length; supports p + 1 ≤ JET - 1.
pub const JET: usize = 10;
type J = Jet<JET>;
type V4 = Vector4<f64>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvenConfig {
    pub dim: usize,
    pub delta: f64,
    pub bumps: usize,
    pub h_scale: f64,
    pub h_coeffs: Option<Vec<f64>>,
    pub panels_per_interval: usize,
    pub order: usize,
    pub box_radius: f64,
    pub profile_samples: usize,
    pub concavity_margin: f64,
    pub moment_tol: f64,
    pub chain_tol: f64,
    pub max_halvings: usize,
}

impl Default for EvenConfig {
    fn default() -> Self {
        Self {
            dim: 4,
            delta: 0.05,
            bumps: 1,
            h_scale: 1e-3,
            h_coeffs: None,
            panels_per_interval: 4,
            order: 24,
            box_radius: 0.1,
            profile_samples: 2048,
            concavity_margin: 0.1,
            moment_tol: 1e-9,
            chain_tol: 1e-8,
            max_halvings: 6,
        }
    }
}

impl EvenConfig {
    pub fn perturbation(&self) -> Result<Bump> {
        let basis = BumpBasis::new(self.delta, self.bumps)?;
        let coeffs = self.h_coeffs.clone().unwrap_or_else(|| vec![1.0; self.bumps]);
        Bump::new(basis, coeffs, self.h_scale)
    }
}

/// G, Θ and Ξ of the differentiated system for a given perturbation.
#[derive(Clone, Debug)]
pub struct EvenSystem {
    pub dim: usize,
    pub p: usize,
    /// v_{d-1}/v_{d-2}.
    pub konst: f64,
    pub h: Bump,
    pub box_radius: f64,
    cache: Vec<(f64, J)>,
    gl: Rule<f64>,
}

impl EvenSystem {
    pub fn new(dim: usize, h: Bump) -> Result<Self> {
        if dim < 4 || dim % 2 != 0 || dim / 2 > JET - 1 {
            return Err(Error::UnsupportedDimension(dim));
        }
        Ok(Self {
            dim,
            p: (dim - 2) / 2,
            konst: unit_ball_volume::<f64>(dim - 1) / unit_ball_volume::<f64>(dim - 2),
            h,
            box_radius: 0.1,
            cache: Vec::new(),
            gl: gauss_legendre(16),
        })
    }

    /// Precomputes the h-jets at the solver nodes.
    pub fn with_nodes(mut self, nodes: &[f64]) -> Self {
        let mut c: Vec<(f64, J)> = nodes.iter().map(|&s| (s, self.h.jet::<JET>(s))).collect();
        c.sort_by(|a, b| a.0.total_cmp(&b.0));
        self.cache = c;
        self
    }

    fn hjet(&self, s: f64) -> J {
        match self.cache.binary_search_by(|e| e.0.total_cmp(&s)) {
            Ok(i) => self.cache[i].1,
            Err(_) => self.h.jet::<JET>(s),
        }
    }

    /// L(s + t, ξ) as a jet in t.
    fn l_jet(&self, s: f64, xi: f64) -> J {
        let mut l = self.hjet(s);
        l.coeffs[0] += s * xi;
        l.coeffs[1] += xi;
        l
    }

    fn l_val(&self, sigma: f64, xi: f64) -> f64 {
        sigma * xi + self.hjet(sigma).coeffs[0]
    }

    /// (∂_s^{p+1}(L²(σ,ξ) - L²(s,ξ))^p, ∂_s^p((L²(σ,ξ) - L²(s,ξ))^{p-1} L(s,ξ))).
    pub fn kernel(&self, s: f64, sigma: f64, xi: f64) -> (f64, f64) {
        let a = self.l_val(sigma, xi);
        let l = self.l_jet(s, xi);
        let base = -(l * l) + a * a;
        let pm1 = base.powi(self.p as u32 - 1);
        let k1 = (pm1 * base).derivative(self.p + 1);
        let k2 = (pm1 * l).derivative(self.p);
        (k1, k2)
    }

    /// (L ∂_s L, L) at (s, ξ).
    fn ldl(&self, s: f64, xi: f64) -> (f64, f64) {
        let hj = self.hjet(s);
        let l = s * xi + hj.coeffs[0];
        (l * (xi + hj.coeffs[1]), l)
    }

    fn coefficients(&self) -> (f64, f64) {
        let p = self.p as i32;
        ((-2f64).powi(p) * factorial(self.p), (-2f64).powi(p - 1) * factorial(self.p - 1))
    }

    /// The matrix A(s, x, y) of x', y' coefficients in the last two rows of G.
    pub fn a_matrix(&self, s: f64, x: f64, y: f64) -> Matrix2<f64> {
        let (c3, c4) = self.coefficients();
        let p = self.p as i32;
        let (ax, lx) = self.ldl(s, -x);
        let (ay, ly) = self.ldl(s, y);
        Matrix2::new(
            c3 * ax.powi(p),
            c3 * ay.powi(p),
            c4 * ax.powi(p - 1) * lx,
            c4 * ay.powi(p - 1) * ly,
        )
    }

    /// (Ξ₁(s), Ξ₂(s)): the kernel derivatives integrated over [-x_o(1), y_o(1)] with f = f_o.
    pub fn xi_integrals(&self, s: f64) -> (f64, f64) {
        let e = x_o(1.0);
        let mut i1 = 0.0;
        let mut i2 = 0.0;
        for (xi, w) in self.gl.mapped(-e, e) {
            let l = self.l_jet(s, xi);
            let base = -(l * l) + (1.0 - xi * xi);
            let pm1 = base.powi(self.p as u32 - 1);
            i1 += w * (pm1 * base).derivative(self.p + 1);
            i2 += w * (pm1 * l).derivative(self.p);
        }
        (i1, i2)
    }

    /// (d/ds)^{p+1} (v_{d-1}/v_{d-2}) / √(1+s²).
    pub fn rhs(&self, s: f64) -> f64 {
        let t = J::variable(s);
        ((t * t + 1.0).powf(-0.5) * self.konst).derivative(self.p + 1)
    }

    /// Ξ(s) evaluated from its defining integrals.
    pub fn xi_direct(&self, s: f64) -> V4 {
        let (i1, i2) = self.xi_integrals(s);
        let e = x_o(1.0);
        V4::new(e, e, -i1 + self.rhs(s), -i2)
    }

    pub fn z_o(s: f64) -> V4 {
        V4::new(x_o(s), x_o(s), dx_o(s), dx_o(s))
    }
}

impl SingularSystem<4> for EvenSystem {
    fn g(&self, s: f64, z: &V4) -> V4 {
        let a = self.a_matrix(s, z[0], z[1]);
        let r = a * nalgebra::Vector2::new(z[2], z[3]);
        V4::new(z[0], z[1], r[0], r[1])
    }

    fn theta(&self, s: f64, sigma: f64, z: &V4) -> V4 {
        let (x1, x2) = self.kernel(s, sigma, -z[0]);
        let (y1, y2) = self.kernel(s, sigma, z[1]);
        V4::new(-z[2], -z[3], x1 * z[2] + y1 * z[3], x2 * z[2] + y2 * z[3])
    }

    fn in_domain(&self, s: f64, z: &V4) -> bool {
        (z - Self::z_o(s)).amax() <= self.box_radius
    }
}

#[derive(Clone, Debug, Default, Serialize, PartialEq)]
pub struct EvenReport {
    pub dim: usize,
    pub delta: f64,
    pub h_scale: f64,
    pub halvings: usize,
    pub nodes: usize,
    pub picard: PicardDiagnostics,
    /// max |Ξ_o(s) from its integrals - discretely consistent Ξ_o(s)|.
    pub xi_consistency: f64,
    pub min_abs_det_a: f64,
    pub unperturbed_min_abs_det_a: f64,
    pub max_deviation_from_ball: f64,
    /// max |x - x_o| + |y - y_o| on [1-3δ, 1-2δ].
    pub moment_deviation: f64,
    /// max |∫_{-x}^{y} ξ^{2p-1}| on [1-3δ, 1-2δ].
    pub odd_moment: f64,
    pub chain_residuals: Vec<f64>,
    pub concavity_worst: f64,
    pub concavity_pass: bool,
}

#[derive(Clone, Debug)]
pub struct EvenBuild {
    pub body: BodyOfRevolution<f64>,
    pub perturbation: Bump,
    pub state: ChordState<V4>,
    pub report: EvenReport,
}

impl EvenBuild {
    pub fn perturbation_spec(&self) -> PerturbationSpec {
        self.perturbation.spec()
    }
}

/// Solves the chord system on [1-3δ, 1] for the given perturbation.
pub fn solve_even(cfg: &EvenConfig, h: &Bump) -> Result<(ChordState<V4>, EvenSystem, EvenReport)> {
    let grid = chord_grid(h, cfg.panels_per_interval, cfg.order)?;
    let mut sys = EvenSystem::new(cfg.dim, h.clone())?.with_nodes(&grid.nodes);
    sys.box_radius = cfg.box_radius;
    let sys_o = EvenSystem::new(cfg.dim, Bump::zero(h.basis.clone()))?;
    let z_o: Vec<V4> = grid.nodes.iter().map(|&s| EvenSystem::z_o(s)).collect();
    let xi_o = consistent_xi(&sys_o, &grid, &z_o);
    let mut report = EvenReport { dim: cfg.dim, delta: cfg.delta, h_scale: h.scale, nodes: grid.len(), ..Default::default() };
    let mut xi = Vec::with_capacity(grid.len());
    for (i, &s) in grid.nodes.iter().enumerate() {
        let direct_o = sys_o.xi_direct(s);
        report.xi_consistency = report.xi_consistency.max((direct_o - xi_o[i]).amax());
        xi.push(xi_o[i] + (sys.xi_direct(s) - direct_o));
    }
    let q = jacobian_fd(&sys_o, 1.0, &EvenSystem::z_o(1.0));
    let opts = PicardOptions { frozen_from: Some(1.0 - cfg.delta), ..Default::default() };
    let (state, diag) = picard_solve(&sys, &grid, &xi, &q, z_o.clone(), &opts)?;
    report.picard = diag;
    report.min_abs_det_a = f64::INFINITY;
    report.unperturbed_min_abs_det_a = f64::INFINITY;
    for (i, &s) in grid.nodes.iter().enumerate() {
        let z = state.values[i];
        report.min_abs_det_a = report.min_abs_det_a.min(sys.a_matrix(s, z[0], z[1]).determinant().abs());
        report.unperturbed_min_abs_det_a =
            report.unperturbed_min_abs_det_a.min(sys_o.a_matrix(s, x_o(s), x_o(s)).determinant().abs());
        report.max_deviation_from_ball = report.max_deviation_from_ball.max((z - z_o[i]).amax());
    }
    Ok((state, sys, report))
}

/// max |x - x_o| + |y - y_o| and the odd moment on [1-3δ, 1-2δ].
pub fn moment_identity_check(state: &ChordState<V4>, p: usize, delta: f64) -> (f64, f64) {
    let (mut dev, mut odd) = (0.0f64, 0.0f64);
    let hi = 1.0 - 2.0 * delta;
    for (i, &s) in state.grid.nodes.iter().enumerate() {
        if s > hi {
            continue;
        }
        let z = state.values[i];
        dev = dev.max((z[0] - x_o(s)).abs() + (z[1] - x_o(s)).abs());
        let m = (z[1].powi(2 * p as i32) - z[0].powi(2 * p as i32)) / (2 * p) as f64;
        odd = odd.max(m.abs());
    }
    (dev, odd)
}

fn polar_arc(state: &ChordState<V4>, h: &Bump, side: Side, n: usize) -> Result<PolarArc<f64>> {
    let (a, b) = (state.grid.a(), state.grid.b());
    let k = if side == Side::Right { 1 } else { 0 };
    let mut alpha = Vec::with_capacity(n);
    let mut rho = Vec::with_capacity(n);
    for i in 0..n {
        let s = a + (b - a) * i as f64 / (n - 1) as f64;
        let z = state.eval(s);
        let (al, r, _, _) = chord_polar(side, s, z[k], z[k + 2], h.value(s), 0.0);
        alpha.push(al);
        rho.push(r);
    }
    if alpha.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::NonMonotone);
    }
    Ok(PolarArc::new(side, alpha, rho, EndCondition::Clamped(0.0, 0.0)))
}

/// Profile equal to the unit semicircle except on the two perturbed caps.
pub fn assemble_even_profile(state: &ChordState<V4>, h: &Bump, samples: usize) -> Result<ProfileFunction<f64>> {
    let left = polar_arc(state, h, Side::Left, samples)?;
    let right = polar_arc(state, h, Side::Right, samples)?;
    let (l0, l1) = left.xi_range();
    let (r0, r1) = right.xi_range();
    ProfileFunction::new(vec![
        Arc::Circle { lo: -1.0, hi: l0 },
        Arc::Polar(left),
        Arc::Circle { lo: l1, hi: r0 },
        Arc::Polar(right),
        Arc::Circle { lo: r1, hi: 1.0 },
    ])
}

/// ∫ (f^{2j} - f_o^{2j}) ξ^{2(p-j)} over [-x(1-3δ), y(1-3δ)] for j = 1..p.
pub fn chain_residuals(profile: &ProfileFunction<f64>, p: usize) -> Vec<f64> {
    let gl = gauss_legendre::<f64>(32);
    let pieces: Vec<(f64, f64)> = profile
        .arcs()
        .iter()
        .filter(|a| matches!(a, Arc::Polar(_)))
        .map(|a| a.xi_range())
        .collect();
    (1..=p)
        .map(|j| {
            let mut acc = 0.0;
            for &(lo, hi) in &pieces {
                let m = 16;
                for k in 0..m {
                    let a = lo + (hi - lo) * k as f64 / m as f64;
                    let b = lo + (hi - lo) * (k + 1) as f64 / m as f64;
                    acc += gl.integrate(a, b, |xi| {
                        let f2 = profile.value_sq(xi);
                        (f2.powi(j as i32) - (1.0 - xi * xi).powi(j as i32)) * xi.powi(2 * (p - j) as i32)
                    });
                }
            }
            acc.abs()
        })
        .collect()
}

/// One construction attempt with a fixed perturbation.
pub fn build_even_with(cfg: &EvenConfig, h: &Bump) -> Result<EvenBuild> {
    let (state, sys, mut report) = solve_even(cfg, h)?;
    if report.picard.locality_ok != Some(true) {
        return Err(Error::ConvergenceFailure("solution moved on [1-δ, 1]".into()));
    }
    let (dev, odd) = moment_identity_check(&state, sys.p, cfg.delta);
    report.moment_deviation = dev;
    report.odd_moment = odd;
    if dev > cfg.moment_tol {
        return Err(Error::MomentCheckFailure(dev));
    }
    let profile = assemble_even_profile(&state, h, cfg.profile_samples)?;
    report.chain_residuals = chain_residuals(&profile, sys.p);
    for (j, &r) in report.chain_residuals.iter().enumerate() {
        if r > cfg.chain_tol {
            return Err(Error::ChainCheckFailure { j: j + 1, residual: r });
        }
    }
    let conv = convexity_check(&profile, cfg.concavity_margin, 4000);
    report.concavity_worst = conv.worst;
    report.concavity_pass = conv.pass;
    if !conv.pass {
        return Err(Error::ConvexityFailure(conv.worst));
    }
    let body = BodyOfRevolution::new(cfg.dim, profile)?;
    Ok(EvenBuild { body, perturbation: h.clone(), state, report })
}

/// Builds the body, halving the perturbation scale while any acceptance check fails.
pub fn build_even(cfg: &EvenConfig) -> Result<EvenBuild> {
    let mut h = cfg.perturbation()?;
    let mut last = None;
    for halvings in 0..=cfg.max_halvings {
        match build_even_with(cfg, &h) {
            Ok(mut b) => {
                b.report.halvings = halvings;
                return Ok(b);
            }
            Err(e @ (Error::UnsupportedDimension(_) | Error::InvalidInput(_))) => return Err(e),
            Err(e) => last = Some(e),
        }
        h = h.scaled(0.5);
    }
    Err(last.expect("at least one attempt"))
}

/// Grid used by the solver for a configuration.
pub fn even_grid(cfg: &EvenConfig) -> Result<PanelGrid> {
    chord_grid(&cfg.perturbation()?, cfg.panels_per_interval, cfg.order)
}
