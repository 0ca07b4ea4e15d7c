//! Zero search for the odd map x ↦ B(x) on the coefficient sphere.
//!
//! B is odd and, for small perturbation scales, close to linear, so a secant
//! Jacobian from the images of an orthonormal frame predicts its zero set.
//! Candidates are the projections of the antipodal frame starts onto that
//! predicted null space; each is refined by Gauss-Newton steps on the sphere
//! with Broyden updates of the Jacobian.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::{Evaluation, OddContext};
use crate::error::{Error, Result};

/// Relative singular-value cutoff for pseudo-inverses.
const RANK_CUTOFF: f64 = 1e-7;

/// Orthonormal m×m frame from the QR factorization of a seeded Gaussian matrix.
pub fn seeded_frame(m: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(m, m, |_, _| StandardNormal.sample(&mut rng));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut q = q;
    for j in 0..m {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

fn pinv(a: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    svd.pseudo_inverse(RANK_CUTOFF * smax.max(f64::MIN_POSITIVE)).expect("both factors computed")
}

fn normalized(x: &DVector<f64>) -> Option<DVector<f64>> {
    let n = x.norm();
    (n > 1e-8).then(|| x / n)
}

/// Secant model of B at one perturbation scale.
#[derive(Clone, Debug)]
pub struct SecantModel {
    pub scale: f64,
    pub jacobian: DMatrix<f64>,
    /// max ‖B(q_j)‖ over the frame.
    pub b_scale: f64,
}

impl SecantModel {
    /// The model at another scale, using B(εx) ≈ ε L x.
    pub fn rescaled(&self, scale: f64) -> Self {
        let f = if self.scale > 0.0 { scale / self.scale } else { 0.0 };
        Self { scale, jacobian: &self.jacobian * f, b_scale: self.b_scale * f }
    }

    /// Unit vectors in the predicted zero set, one per start, without repeats up to sign.
    pub fn null_candidates(&self, starts: &[DVector<f64>]) -> Vec<DVector<f64>> {
        let m = self.jacobian.ncols();
        let proj = DMatrix::identity(m, m) - pinv(&self.jacobian) * &self.jacobian;
        let mut out: Vec<DVector<f64>> = Vec::new();
        for s in starts {
            if let Some(x) = normalized(&(&proj * s)) {
                if !out.iter().any(|y| (y.dot(&x).abs() - 1.0).abs() < 1e-10) {
                    out.push(x);
                }
            }
        }
        out.sort_by(|a, b| a.amax().total_cmp(&b.amax()));
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BorsukOutcome {
    pub x: Vec<f64>,
    pub b: Vec<f64>,
    pub b_norm: f64,
    pub b_scale: f64,
    /// ‖B(x)‖ / b_scale.
    pub relative: f64,
    pub converged: bool,
    /// max ‖B(x) + B(-x)‖ / b_scale over the checked antipodal pairs.
    pub oddness_defect: f64,
    pub runs: usize,
    pub candidates: usize,
    /// Relative residual after every evaluation of the refinement.
    pub history: Vec<f64>,
    #[serde(skip)]
    pub model: Option<SecantModel>,
    #[serde(skip)]
    pub eval: Option<Evaluation>,
}

/// Builds the secant model from the images of a seeded frame; returns the
/// model, the frame columns and the oddness defect at the first column.
pub fn frame_model(ctx: &mut OddContext, scale: f64) -> Result<(SecantModel, Vec<DVector<f64>>, f64)> {
    let m = ctx.cfg.bumps();
    let q = seeded_frame(m, ctx.cfg.seed);
    let cols: Vec<DVector<f64>> = (0..m).map(|j| q.column(j).into_owned()).collect();
    let mut images = DMatrix::zeros(ctx.cfg.b_len(), m);
    let mut b_scale = 0.0f64;
    let mut first = DVector::zeros(0);
    for (j, c) in cols.iter().enumerate() {
        let b = DVector::from_column_slice(ctx.evaluate(c.as_slice(), scale)?.b());
        b_scale = b_scale.max(b.norm());
        images.set_column(j, &b);
        if j == 0 {
            first = b;
        }
    }
    let neg = DVector::from_column_slice(ctx.evaluate((-&cols[0]).as_slice(), scale)?.b());
    let defect = if b_scale > 0.0 { (&first + neg).norm() / b_scale } else { 0.0 };
    let jacobian = images * q.transpose();
    Ok((SecantModel { scale, jacobian, b_scale }, cols, defect))
}

/// Search at one scale. Never fails on a missed tolerance; the outcome
/// carries `converged` and the best residual found.
pub fn search_best(ctx: &mut OddContext, scale: f64, warm: Option<(&[f64], &SecantModel)>) -> Result<BorsukOutcome> {
    let start_runs = ctx.runs();
    if scale == 0.0 {
        return unperturbed(ctx, warm.map(|w| w.0));
    }
    let budget = ctx.cfg.max_runs;
    let tol = ctx.cfg.borsuk_tol;
    let (mut model, candidates, mut defect) = match warm {
        Some((x, model)) => (model.rescaled(scale), vec![DVector::from_column_slice(x)], 0.0),
        None => {
            let (model, cols, defect) = frame_model(ctx, scale)?;
            let starts: Vec<DVector<f64>> = match &ctx.cfg.h_coeffs {
                Some(c) => vec![DVector::from_column_slice(c)],
                None => cols.iter().flat_map(|c| [c.clone(), -c]).collect(),
            };
            let cands = model.null_candidates(&starts);
            (model, cands, defect)
        }
    };
    let mut best: Option<(f64, DVector<f64>, Evaluation)> = None;
    let mut history = Vec::new();
    let used = |ctx: &OddContext| ctx.runs() - start_runs;
    'cands: for cand in &candidates {
        let mut x = cand.clone();
        let mut prev: Option<(DVector<f64>, DVector<f64>, f64)> = None;
        while used(ctx) < budget {
            let ev = ctx.evaluate(x.as_slice(), scale)?;
            let b = DVector::from_column_slice(ev.b());
            let rel = if model.b_scale > 0.0 { b.norm() / model.b_scale } else { 0.0 };
            history.push(rel);
            if let Some((px, pb, _)) = &prev {
                let dx = &x - px;
                let dn = dx.norm_squared();
                if dn > 0.0 {
                    let corr = (&b - pb - &model.jacobian * &dx) * dx.transpose() / dn;
                    model.jacobian += corr;
                }
            }
            if best.as_ref().is_none_or(|(r, _, _)| rel < *r) {
                best = Some((rel, x.clone(), ev));
            }
            if rel <= tol {
                break 'cands;
            }
            if let Some((_, _, prel)) = prev {
                if rel > 0.5 * prel {
                    continue 'cands;
                }
            }
            let m = x.len();
            let tangent = DMatrix::identity(m, m) - &x * x.transpose();
            let step = -pinv(&(&model.jacobian * &tangent)) * &b;
            let Some(next) = normalized(&(&x + tangent * step)) else { continue 'cands };
            prev = Some((x, b, rel));
            x = next;
        }
        break;
    }
    let Some((rel, x, ev)) = best else {
        return Err(Error::SearchExhausted { best: f64::INFINITY });
    };
    let converged = rel <= tol;
    if converged && model.b_scale > 0.0 {
        let neg = ctx.evaluate((-&x).as_slice(), scale)?;
        let sum = DVector::from_column_slice(ev.b()) + DVector::from_column_slice(neg.b());
        defect = defect.max(sum.norm() / model.b_scale);
    }
    let b = ev.b().to_vec();
    Ok(BorsukOutcome {
        x: x.as_slice().to_vec(),
        b_norm: DVector::from_column_slice(&b).norm(),
        b,
        b_scale: model.b_scale,
        relative: rel,
        converged,
        oddness_defect: defect,
        runs: used(ctx),
        candidates: candidates.len(),
        history,
        model: Some(model),
        eval: Some(ev),
    })
}

/// With a zero scale every coefficient tuple is a zero of B.
fn unperturbed(ctx: &mut OddContext, x: Option<&[f64]>) -> Result<BorsukOutcome> {
    let m = ctx.cfg.bumps();
    let x = match (x, &ctx.cfg.h_coeffs) {
        (Some(x), _) => x.to_vec(),
        (None, Some(c)) => c.clone(),
        (None, None) => (0..m).map(|j| if j == 0 { 1.0 } else { 0.0 }).collect(),
    };
    let ev = ctx.evaluate(&x, 0.0)?;
    let model = SecantModel { scale: 0.0, jacobian: DMatrix::zeros(ctx.cfg.b_len(), m), b_scale: 0.0 };
    Ok(BorsukOutcome {
        x,
        b: ev.b().to_vec(),
        b_norm: 0.0,
        b_scale: 0.0,
        relative: 0.0,
        converged: true,
        oddness_defect: 0.0,
        runs: 1,
        candidates: 1,
        history: vec![0.0],
        model: Some(model),
        eval: Some(ev),
    })
}

/// Search that fails with `SearchExhausted` when the tolerance is missed.
pub fn borsuk_search(ctx: &mut OddContext, scale: f64) -> Result<BorsukOutcome> {
    let out = search_best(ctx, scale, None)?;
    if out.converged {
        Ok(out)
    } else {
        Err(Error::SearchExhausted { best: out.relative })
    }
}
