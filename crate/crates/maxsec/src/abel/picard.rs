//! Picard iteration (TZ)(s) = Z(s) - Q⁻¹[G(s, Z(s)) - ∫_s^b Θ(s, σ, Z(σ)) dσ - Ξ(s)]
//! on the nodes of a panel grid.

use nalgebra::{SMatrix, SVector};
use serde::Serialize;

use crate::error::{Error, Result};

use super::grid::{ChordState, PanelGrid};

pub trait SingularSystem<const M: usize> {
    fn g(&self, s: f64, z: &SVector<f64, M>) -> SVector<f64, M>;
    fn theta(&self, s: f64, sigma: f64, z: &SVector<f64, M>) -> SVector<f64, M>;
    /// Membership of Z in the admissible box at s.
    fn in_domain(&self, _s: f64, _z: &SVector<f64, M>) -> bool {
        true
    }
}

#[derive(Clone, Debug)]
pub struct PicardOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub khat_limit: f64,
    /// Nodes with s ≥ this value are expected never to move.
    pub frozen_from: Option<f64>,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 80, khat_limit: 0.9, frozen_from: None }
    }
}

#[derive(Clone, Debug, Default, Serialize, PartialEq)]
pub struct PicardDiagnostics {
    pub iterations: usize,
    pub khat: f64,
    pub final_update: f64,
    /// max over nodes of |G - ∫Θ - Ξ|.
    pub residual: f64,
    /// A-posteriori distance bound ‖TZ - Z‖/(1 - k̂).
    pub bound: f64,
    pub locality_ok: Option<bool>,
    pub updates: Vec<f64>,
}

type Vm<const M: usize> = SVector<f64, M>;

fn raw_residual<S: SingularSystem<M>, const M: usize>(sys: &S, grid: &PanelGrid, xi: &[Vm<M>], z: &[Vm<M>]) -> Vec<Vm<M>> {
    (0..grid.len())
        .map(|i| {
            let s = grid.nodes[i];
            let integral = grid.tail_integral(i, |j| sys.theta(s, grid.nodes[j], &z[j]));
            sys.g(s, &z[i]) - integral - xi[i]
        })
        .collect()
}

fn apply<S: SingularSystem<M>, const M: usize>(
    sys: &S,
    grid: &PanelGrid,
    xi: &[Vm<M>],
    qinv: &SMatrix<f64, M, M>,
    z: &[Vm<M>],
) -> Vec<Vm<M>> {
    raw_residual(sys, grid, xi, z)
        .into_iter()
        .zip(z)
        .map(|(r, zi)| zi - qinv * r)
        .collect()
}

fn sup_diff<const M: usize>(a: &[Vm<M>], b: &[Vm<M>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).amax()).fold(0.0, f64::max)
}

/// Free term making Z_o an exact discrete solution: Ξ_i = G(s_i, Z_o) - Σ_j w_ij Θ(s_i, s_j, Z_o).
pub fn consistent_xi<S: SingularSystem<M>, const M: usize>(sys: &S, grid: &PanelGrid, z_o: &[Vm<M>]) -> Vec<Vm<M>> {
    let zero = vec![Vm::<M>::zeros(); grid.len()];
    raw_residual(sys, grid, &zero, z_o)
}

/// Central-difference Jacobian D_Z G at (s, z).
pub fn jacobian_fd<S: SingularSystem<M>, const M: usize>(sys: &S, s: f64, z: &Vm<M>) -> SMatrix<f64, M, M> {
    let mut q = SMatrix::<f64, M, M>::zeros();
    for k in 0..M {
        let h = 1e-6 * (1.0 + z[k].abs());
        let mut zp = *z;
        let mut zm = *z;
        zp[k] += h;
        zm[k] -= h;
        let col = (sys.g(s, &zp) - sys.g(s, &zm)) / (2.0 * h);
        q.set_column(k, &col);
    }
    q
}

pub fn picard_solve<S: SingularSystem<M>, const M: usize>(
    sys: &S,
    grid: &PanelGrid,
    xi: &[Vm<M>],
    q: &SMatrix<f64, M, M>,
    z_init: Vec<Vm<M>>,
    opts: &PicardOptions,
) -> Result<(ChordState<Vm<M>>, PicardDiagnostics)> {
    if xi.len() != grid.len() || z_init.len() != grid.len() {
        return Err(Error::InvalidInput("grid, free term and initial state sizes differ".into()));
    }
    let qinv = q.try_inverse().ok_or_else(|| Error::InvalidInput("singular Q".into()))?;
    let frozen: Vec<usize> = match opts.frozen_from {
        Some(c) => (0..grid.len()).filter(|&i| grid.nodes[i] >= c).collect(),
        None => vec![],
    };
    let mut diag = PicardDiagnostics { locality_ok: opts.frozen_from.map(|_| true), ..Default::default() };
    let mut z = z_init.clone();
    let mut above = 0;
    for sweep in 1..=opts.max_iter {
        let next = apply(sys, grid, xi, &qinv, &z);
        for (i, zi) in next.iter().enumerate() {
            if !zi.iter().all(|v| v.is_finite()) || !sys.in_domain(grid.nodes[i], zi) {
                return Err(Error::DomainEscape { sweep, s: grid.nodes[i] });
            }
        }
        if frozen.iter().any(|&i| next[i] != z_init[i]) {
            diag.locality_ok = Some(false);
        }
        let upd = sup_diff(&next, &z);
        if let Some(&prev) = diag.updates.last() {
            if prev > 1e-10 {
                let ratio = upd / prev;
                diag.khat = diag.khat.max(ratio);
                if ratio >= opts.khat_limit {
                    above += 1;
                    if above >= 2 {
                        return Err(Error::NoContraction { khat: ratio });
                    }
                } else {
                    above = 0;
                }
            }
        }
        diag.updates.push(upd);
        z = next;
        diag.iterations = sweep;
        diag.final_update = upd;
        if upd <= opts.tol {
            break;
        }
    }
    if diag.final_update > opts.tol {
        return Err(Error::ConvergenceFailure(format!(
            "Picard update {:.3e} after {} sweeps",
            diag.final_update, diag.iterations
        )));
    }
    let tz = apply(sys, grid, xi, &qinv, &z);
    diag.bound = sup_diff(&tz, &z) / (1.0 - diag.khat.min(0.99));
    diag.residual = raw_residual(sys, grid, xi, &z).iter().map(|r| r.amax()).fold(0.0, f64::max);
    Ok((ChordState { grid: grid.clone(), values: z }, diag))
}

/// max over probe pairs of ‖TZ₁ - TZ₂‖/‖Z₁ - Z₂‖.
pub fn contraction_estimate<S: SingularSystem<M>, const M: usize>(
    sys: &S,
    grid: &PanelGrid,
    xi: &[Vm<M>],
    q: &SMatrix<f64, M, M>,
    probes: &[Vec<Vm<M>>],
) -> f64 {
    let Some(qinv) = q.try_inverse() else {
        return f64::INFINITY;
    };
    let images: Vec<Vec<Vm<M>>> = probes.iter().map(|p| apply(sys, grid, xi, &qinv, p)).collect();
    let mut k: f64 = 0.0;
    for a in 0..probes.len() {
        for b in a + 1..probes.len() {
            let d = sup_diff(&probes[a], &probes[b]);
            if d > 0.0 {
                k = k.max(sup_diff(&images[a], &images[b]) / d);
            }
        }
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix2, Vector2};

    /// z' = -λ z written as z(s) = ∫_s^1 λ z + z(1), two decoupled components.
    struct Linear {
        lam: f64,
        scale: f64,
    }

    impl SingularSystem<2> for Linear {
        fn g(&self, _s: f64, z: &Vector2<f64>) -> Vector2<f64> {
            z * self.scale
        }
        fn theta(&self, _s: f64, _sigma: f64, z: &Vector2<f64>) -> Vector2<f64> {
            z * (self.lam * self.scale)
        }
        fn in_domain(&self, _s: f64, z: &Vector2<f64>) -> bool {
            z.amax() < 10.0
        }
    }

    fn grid() -> PanelGrid {
        PanelGrid::with_cuts(&[0.85, 0.9, 0.95, 1.0], 1, 16).unwrap()
    }

    #[test]
    fn recovers_exponential() {
        let g = grid();
        let sys = Linear { lam: 2.0, scale: 1.0 };
        let xi = vec![Vector2::new(1.0, -0.5); g.len()];
        let q = jacobian_fd(&sys, 1.0, &Vector2::new(1.0, -0.5));
        let (st, d) = picard_solve(&sys, &g, &xi, &q, vec![Vector2::zeros(); g.len()], &PicardOptions::default()).unwrap();
        for s in [0.85f64, 0.9, 0.97] {
            let e = (2.0 * (1.0 - s)).exp();
            assert!((st.eval(s)[0] - e).abs() < 1e-12);
            assert!((st.eval(s)[1] + 0.5 * e).abs() < 1e-12);
        }
        assert!(d.khat < 0.5, "{d:?}");
        assert!(d.residual < 1e-12);
    }

    #[test]
    fn zero_theta_is_one_step() {
        let g = grid();
        let sys = Linear { lam: 0.0, scale: 3.0 };
        let xi = vec![Vector2::new(0.3, 0.6); g.len()];
        let q = Matrix2::identity() * 3.0;
        let probes = vec![vec![Vector2::zeros(); g.len()], vec![Vector2::new(1.0, 2.0); g.len()]];
        assert!(contraction_estimate(&sys, &g, &xi, &q, &probes) < 1e-15);
    }

    #[test]
    fn consistent_xi_freezes_reference() {
        let g = grid();
        let sys = Linear { lam: 2.0, scale: 1.0 };
        let zo: Vec<Vector2<f64>> = g.nodes.iter().map(|s| Vector2::new((2.0 * (1.0 - s)).exp(), 0.0)).collect();
        let xi = consistent_xi(&sys, &g, &zo);
        let q = Matrix2::identity();
        let opts = PicardOptions { frozen_from: Some(0.95), ..Default::default() };
        let (st, d) = picard_solve(&sys, &g, &xi, &q, zo.clone(), &opts).unwrap();
        assert_eq!(d.iterations, 1);
        assert_eq!(d.final_update, 0.0);
        assert_eq!(st.values, zo);
        assert_eq!(d.locality_ok, Some(true));
    }

    #[test]
    fn divergence_reported() {
        let g = grid();
        let sys = Linear { lam: 60.0, scale: 1.0 };
        let xi = vec![Vector2::new(1.0, 1.0); g.len()];
        let r = picard_solve(&sys, &g, &xi, &Matrix2::identity(), vec![Vector2::zeros(); g.len()], &PicardOptions::default());
        assert!(matches!(r, Err(Error::NoContraction { .. }) | Err(Error::DomainEscape { .. })));
    }
}
