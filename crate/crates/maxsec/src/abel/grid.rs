//! Composite Gauss–Legendre panel grid with per-node tail-integration weights.

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

use super::Accum;

#[derive(Clone, Debug)]
pub struct PanelGrid {
    pub edges: Vec<f64>,
    pub order: usize,
    pub nodes: Vec<f64>,
    ref_nodes: Vec<f64>,
    bary: Vec<f64>,
    /// Weights for ∫_{s_i}^b: row i starts at the first node of its panel.
    rows: Vec<Vec<f64>>,
}

impl PanelGrid {
    pub fn new(edges: Vec<f64>, order: usize) -> Result<Self> {
        if edges.len() < 2 || edges.windows(2).any(|w| w[1] <= w[0]) || order < 2 {
            return Err(Error::InvalidInput("panel edges must increase and order must be ≥ 2".into()));
        }
        let rule = gauss_legendre::<f64>(order);
        let x = rule.nodes.clone();
        let bary: Vec<f64> = (0..order)
            .map(|j| {
                let p: f64 = (0..order).filter(|&k| k != j).map(|k| x[j] - x[k]).product();
                1.0 / p
            })
            .collect();
        // tail[i][j] = ∫_{x_i}^{1} ℓ_j on the reference panel
        let tail: Vec<Vec<f64>> = (0..order)
            .map(|i| {
                let mut row = vec![0.0; order];
                for (t, w) in rule.mapped(x[i], 1.0) {
                    let l = lagrange_basis(&x, &bary, t);
                    for j in 0..order {
                        row[j] += w * l[j];
                    }
                }
                row
            })
            .collect();
        let np = edges.len() - 1;
        let mut nodes = Vec::with_capacity(np * order);
        let mut rows = Vec::with_capacity(np * order);
        for k in 0..np {
            let (a, b) = (edges[k], edges[k + 1]);
            let half = 0.5 * (b - a);
            for xi in &x {
                nodes.push(a + half * (1.0 + xi));
            }
            for t in &tail {
                let mut row: Vec<f64> = t.iter().map(|w| w * half).collect();
                for kk in k + 1..np {
                    let hh = 0.5 * (edges[kk + 1] - edges[kk]);
                    row.extend(rule.weights.iter().map(|w| w * hh));
                }
                rows.push(row);
            }
        }
        Ok(Self { edges, order, nodes, ref_nodes: x, bary, rows })
    }

    /// Panels of equal width inside each interval between the given cuts.
    pub fn with_cuts(cuts: &[f64], per_interval: usize, order: usize) -> Result<Self> {
        let mut edges = vec![cuts[0]];
        for w in cuts.windows(2) {
            for j in 1..=per_interval {
                edges.push(w[0] + (w[1] - w[0]) * j as f64 / per_interval as f64);
            }
        }
        Self::new(edges, order)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn a(&self) -> f64 {
        self.edges[0]
    }

    pub fn b(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    /// Index of the first node of the panel containing node i.
    pub fn row_start(&self, i: usize) -> usize {
        (i / self.order) * self.order
    }

    /// Weights w_j (j ≥ row_start(i)) with ∫_{s_i}^b g ≈ Σ w_j g(s_j).
    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    /// ∫_{s_i}^b of node samples produced by `g(j)`.
    pub fn tail_integral<V: Accum>(&self, i: usize, mut g: impl FnMut(usize) -> V) -> V {
        let start = self.row_start(i);
        let mut acc = V::zero();
        for (k, w) in self.rows[i].iter().enumerate() {
            acc += g(start + k) * *w;
        }
        acc
    }

    /// ∫_a^b of node samples.
    pub fn integral<V: Accum>(&self, values: &[V]) -> V {
        let mut acc = V::zero();
        for (k, w) in self.rows[0].iter().enumerate() {
            acc += values[k] * *w;
        }
        // row 0 starts at the first node but integrates from it; add the head piece
        let head = self.head_weights();
        for (k, w) in head.iter().enumerate() {
            acc += values[k] * *w;
        }
        acc
    }

    fn head_weights(&self) -> Vec<f64> {
        let half = 0.5 * (self.edges[1] - self.edges[0]);
        let x0 = self.ref_nodes[0];
        let rule = gauss_legendre::<f64>(self.order);
        let mut row = vec![0.0; self.order];
        for (t, w) in rule.mapped(-1.0, x0) {
            let l = lagrange_basis(&self.ref_nodes, &self.bary, t);
            for j in 0..self.order {
                row[j] += w * l[j] * half;
            }
        }
        row
    }

    fn panel_of(&self, s: f64) -> usize {
        let np = self.edges.len() - 1;
        self.edges.partition_point(|&e| e <= s).clamp(1, np) - 1
    }

    /// Barycentric interpolation of node values inside the containing panel.
    pub fn interpolate<V: Accum>(&self, values: &[V], s: f64) -> V {
        let k = self.panel_of(s);
        let (a, b) = (self.edges[k], self.edges[k + 1]);
        let t = 2.0 * (s - a) / (b - a) - 1.0;
        let l = lagrange_basis(&self.ref_nodes, &self.bary, t);
        let mut acc = V::zero();
        for j in 0..self.order {
            acc += values[k * self.order + j] * l[j];
        }
        acc
    }

    /// Derivative of the panel interpolant.
    pub fn interpolate_derivative<V: Accum>(&self, values: &[V], s: f64) -> V {
        let k = self.panel_of(s);
        let (a, b) = (self.edges[k], self.edges[k + 1]);
        let t = 2.0 * (s - a) / (b - a) - 1.0;
        let x = &self.ref_nodes;
        let mut acc = V::zero();
        for j in 0..self.order {
            // ℓ_j'(t) = ℓ_j(t) Σ_{m≠j} 1/(t - x_m), evaluated as a product-free sum
            let mut d = 0.0;
            for m in 0..self.order {
                if m == j {
                    continue;
                }
                let mut p = self.bary[j];
                for k2 in 0..self.order {
                    if k2 != j && k2 != m {
                        p *= t - x[k2];
                    }
                }
                d += p;
            }
            acc += values[k * self.order + j] * (d * 2.0 / (b - a));
        }
        acc
    }
}

fn lagrange_basis(x: &[f64], bary: &[f64], t: f64) -> Vec<f64> {
    let n = x.len();
    if let Some(j) = x.iter().position(|&xj| xj == t) {
        let mut l = vec![0.0; n];
        l[j] = 1.0;
        return l;
    }
    let terms: Vec<f64> = (0..n).map(|j| bary[j] / (t - x[j])).collect();
    let sum: f64 = terms.iter().sum();
    terms.into_iter().map(|v| v / sum).collect()
}

/// Node values of a function on a panel grid.
#[derive(Clone, Debug)]
pub struct ChordState<V> {
    pub grid: PanelGrid,
    pub values: Vec<V>,
}

impl<V: Accum> ChordState<V> {
    pub fn from_fn(grid: PanelGrid, f: impl Fn(f64) -> V) -> Self {
        let values = grid.nodes.iter().map(|&s| f(s)).collect();
        Self { grid, values }
    }

    pub fn eval(&self, s: f64) -> V {
        self.grid.interpolate(&self.values, s)
    }

    pub fn derivative(&self, s: f64) -> V {
        self.grid.interpolate_derivative(&self.values, s)
    }
}
