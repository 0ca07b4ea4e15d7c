//! Chord-endpoint functions of the unit ball and the shared solver grid.

use crate::abel::PanelGrid;
use crate::error::Result;
use crate::Bump;

/// x_o(s) = y_o(s) = 1/√(1+s²).
pub fn x_o(s: f64) -> f64 {
    1.0 / (1.0 + s * s).sqrt()
}

/// d/ds x_o(s) = -s/(1+s²)^{3/2}.
pub fn dx_o(s: f64) -> f64 {
    -s / (1.0 + s * s).powf(1.5)
}

/// Panel grid on [1-3δ, 1] with panel edges at 1-2δ, 1-δ and every bump support end.
pub fn chord_grid(h: &Bump, panels_per_interval: usize, order: usize) -> Result<PanelGrid> {
    let delta = h.delta();
    let mut cuts = vec![1.0 - 3.0 * delta];
    cuts.extend(h.basis.breakpoints());
    cuts.push(1.0);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    PanelGrid::with_cuts(&cuts, panels_per_interval, order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perturbation::BumpBasis;

    #[test]
    fn grid_edges_align_with_bumps() {
        let h = Bump::zero(BumpBasis::new(0.05, 3).unwrap());
        let g = chord_grid(&h, 2, 8).unwrap();
        for (lo, hi) in h.basis.supports() {
            assert!(g.edges.iter().any(|e| (e - lo).abs() < 1e-15));
            assert!(g.edges.iter().any(|e| (e - hi).abs() < 1e-15));
        }
        assert!((g.a() - 0.85).abs() < 1e-15 && g.b() == 1.0);
        assert!(g.edges.iter().any(|e| (e - 0.95).abs() < 1e-15));
    }

    #[test]
    fn xo_derivative() {
        let s = 0.8;
        let fd = (x_o(s + 1e-6) - x_o(s - 1e-6)) / 2e-6;
        assert!((fd - dx_o(s)).abs() < 1e-9);
    }
}
