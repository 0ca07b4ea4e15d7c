//! The concave generator f of a body of revolution, stored as a chain of arcs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::solve1d::brent_root;
use crate::spline::{CubicSpline, EndCondition};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// Boundary points with ξ > 0, polar angle measured from +e₁.
    Right,
    /// Boundary points with ξ < 0, polar angle measured from -e₁.
    Left,
}

impl Side {
    pub fn sign<T: Real>(self) -> T {
        match self {
            Side::Right => T::one(),
            Side::Left => -T::one(),
        }
    }
}

/// Serializable arc description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArcSpec {
    /// f(ξ) = sqrt(1 - ξ²) on [lo, hi].
    Circle { lo: f64, hi: f64 },
    /// Boundary given in polar form ρ(α) on a spline in α.
    Polar { side: Side, alpha: Vec<f64>, rho: Vec<f64>, end: EndCondition },
    /// f given directly as a spline in ξ.
    Cartesian { xi: Vec<f64>, f: Vec<f64>, end: EndCondition },
}

#[derive(Clone, Debug)]
pub struct PolarArc<T> {
    pub side: Side,
    pub rho: CubicSpline<T>,
    end: EndCondition,
}

impl<T: Real> PolarArc<T> {
    pub fn new(side: Side, alpha: Vec<T>, rho: Vec<T>, end: EndCondition) -> Self {
        Self { side, rho: CubicSpline::new(alpha, rho, end), end }
    }

    /// Boundary point and its α-derivatives: (x, y, x', y', x'', y'').
    fn point(&self, alpha: T) -> [T; 6] {
        let (r, r1, r2) = self.rho.eval(alpha);
        let (s, c) = alpha.sin_cos();
        let sg = self.side.sign::<T>();
        let two = T::lit(2.0);
        [
            sg * r * c,
            r * s,
            sg * (r1 * c - r * s),
            r1 * s + r * c,
            sg * (r2 * c - two * r1 * s - r * c),
            r2 * s + two * r1 * c - r * s,
        ]
    }

    /// ξ-range covered by the arc as (lo, hi).
    pub fn xi_range(&self) -> (T, T) {
        let (a0, a1) = self.rho.domain();
        let x0 = self.point(a0)[0];
        let x1 = self.point(a1)[0];
        (x0.min(x1), x0.max(x1))
    }

    /// Polar angle of the boundary point with abscissa ξ.
    pub fn alpha_at(&self, xi: T) -> T {
        let (a0, a1) = self.rho.domain();
        let target = xi.abs();
        let g = |a: T| self.rho.value(a) * a.cos() - target;
        let tol = T::epsilon() * T::lit(4.0);
        let (g0, g1) = (g(a0), g(a1));
        if g0 <= T::zero() {
            return a0;
        }
        if g1 >= T::zero() {
            return a1;
        }
        // safeguarded Newton inside the bracket [a0, a1]
        let (mut lo, mut hi) = (a0, a1);
        let mut a = {
            let c = (target / self.rho.value((a0 + a1) * T::lit(0.5))).min(T::one());
            c.acos().max(a0).min(a1)
        };
        for _ in 0..60 {
            let (r, r1, _) = self.rho.eval(a);
            let (s, c) = a.sin_cos();
            let v = r * c - target;
            if v > T::zero() {
                lo = a;
            } else {
                hi = a;
            }
            let dv = r1 * c - r * s;
            let mut next = if dv != T::zero() { a - v / dv } else { a };
            if !(next > lo && next < hi) {
                next = (lo + hi) * T::lit(0.5);
            }
            if (next - a).abs() <= tol * (T::one() + a.abs()) {
                return next;
            }
            a = next;
        }
        a
    }

    pub fn eval(&self, xi: T) -> (T, T, T) {
        let a = self.alpha_at(xi);
        let [_, y, x1, y1, x2, y2] = self.point(a);
        let d1 = y1 / x1;
        let d2 = (x1 * y2 - y1 * x2) / (x1 * x1 * x1);
        (y, d1, d2)
    }

    pub fn spec(&self) -> ArcSpec {
        ArcSpec::Polar {
            side: self.side,
            alpha: self.rho.knots().iter().map(|a| a.as_f64()).collect(),
            rho: self.rho.values().iter().map(|a| a.as_f64()).collect(),
            end: self.end,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Arc<T> {
    Circle { lo: T, hi: T },
    Polar(PolarArc<T>),
    Cartesian { spline: CubicSpline<T>, end: EndCondition },
}

impl<T: Real> Arc<T> {
    pub fn xi_range(&self) -> (T, T) {
        match self {
            Arc::Circle { lo, hi } => (*lo, *hi),
            Arc::Polar(p) => p.xi_range(),
            Arc::Cartesian { spline, .. } => spline.domain(),
        }
    }

    pub fn eval(&self, xi: T) -> (T, T, T) {
        match self {
            Arc::Circle { .. } => {
                let q = (T::one() - xi * xi).max(T::zero());
                let f = q.sqrt();
                (f, -xi / f, -T::one() / (q * f))
            }
            Arc::Polar(p) => p.eval(xi),
            Arc::Cartesian { spline, .. } => spline.eval(xi),
        }
    }

    /// f² without the square-root round trip where that is exact.
    pub fn value_sq(&self, xi: T) -> T {
        match self {
            Arc::Circle { .. } => (T::one() - xi * xi).max(T::zero()),
            _ => {
                let f = self.eval(xi).0;
                f * f
            }
        }
    }

    pub fn spec(&self) -> ArcSpec {
        match self {
            Arc::Circle { lo, hi } => ArcSpec::Circle { lo: lo.as_f64(), hi: hi.as_f64() },
            Arc::Polar(p) => p.spec(),
            Arc::Cartesian { spline, end } => ArcSpec::Cartesian {
                xi: spline.knots().iter().map(|a| a.as_f64()).collect(),
                f: spline.values().iter().map(|a| a.as_f64()).collect(),
                end: *end,
            },
        }
    }

    pub fn from_spec(spec: &ArcSpec) -> Result<Self> {
        let conv = |v: &[f64]| v.iter().map(|&x| T::lit(x)).collect::<Vec<T>>();
        Ok(match spec {
            ArcSpec::Circle { lo, hi } => Arc::Circle { lo: T::lit(*lo), hi: T::lit(*hi) },
            ArcSpec::Polar { side, alpha, rho, end } => {
                check_knots(alpha, rho)?;
                Arc::Polar(PolarArc::new(*side, conv(alpha), conv(rho), *end))
            }
            ArcSpec::Cartesian { xi, f, end } => {
                check_knots(xi, f)?;
                Arc::Cartesian { spline: CubicSpline::new(conv(xi), conv(f), *end), end: *end }
            }
        })
    }
}

fn check_knots(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() < 4 || x.len() != y.len() {
        return Err(Error::InvalidInput("spline arc needs >= 4 matching knots".into()));
    }
    if !x.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::NonMonotone);
    }
    Ok(())
}

/// Concave generator f on [-λ, μ], optionally translated along the axis.
#[derive(Clone, Debug)]
pub struct ProfileFunction<T> {
    arcs: Vec<Arc<T>>,
    /// Left end of each arc, increasing.
    starts: Vec<T>,
    pub lambda: T,
    pub mu: T,
    shift: T,
}

impl<T: Real> ProfileFunction<T> {
    /// Arcs must tile [-λ, μ] in increasing ξ.
    pub fn new(mut arcs: Vec<Arc<T>>) -> Result<Self> {
        if arcs.is_empty() {
            return Err(Error::InvalidInput("profile without arcs".into()));
        }
        arcs.sort_by(|a, b| a.xi_range().0.partial_cmp(&b.xi_range().0).unwrap());
        let tol = T::lit(1e-9);
        for w in arcs.windows(2) {
            if (w[0].xi_range().1 - w[1].xi_range().0).abs() > tol {
                return Err(Error::InvalidInput("profile arcs do not tile an interval".into()));
            }
        }
        let starts = arcs.iter().map(|a| a.xi_range().0).collect();
        let lambda = -arcs[0].xi_range().0;
        let mu = arcs[arcs.len() - 1].xi_range().1;
        Ok(Self { arcs, starts, lambda, mu, shift: T::zero() })
    }

    pub fn unit_circle() -> Self {
        Self::new(vec![Arc::Circle { lo: -T::one(), hi: T::one() }]).expect("valid circle")
    }

    pub fn from_specs(specs: &[ArcSpec]) -> Result<Self> {
        Self::new(specs.iter().map(Arc::from_spec).collect::<Result<Vec<_>>>()?)
    }

    pub fn specs(&self) -> Vec<ArcSpec> {
        self.arcs.iter().map(|a| a.spec()).collect()
    }

    pub fn arcs(&self) -> &[Arc<T>] {
        &self.arcs
    }

    /// The same profile translated by `tau` along the axis: f_τ(ξ) = f(ξ - τ).
    pub fn translated(&self, tau: T) -> Self {
        let mut p = self.clone();
        p.shift += tau;
        p
    }

    /// Support interval [lo, hi] in the translated frame.
    pub fn domain(&self) -> (T, T) {
        (-self.lambda + self.shift, self.mu + self.shift)
    }

    /// Interior arc junctions in the translated frame.
    pub fn breakpoints(&self) -> impl Iterator<Item = T> + '_ {
        self.starts.iter().skip(1).map(move |&x| x + self.shift)
    }

    fn arc_index(&self, xi: T) -> usize {
        self.starts.partition_point(|&s| s <= xi).saturating_sub(1)
    }

    /// (f, f', f'') at ξ; f = 0 outside the support.
    pub fn eval(&self, xi: T) -> (T, T, T) {
        let x = xi - self.shift;
        if x <= -self.lambda || x >= self.mu {
            return (T::zero(), T::zero(), T::zero());
        }
        self.arcs[self.arc_index(x)].eval(x)
    }

    pub fn value(&self, xi: T) -> T {
        self.eval(xi).0
    }

    pub fn value_sq(&self, xi: T) -> T {
        let x = xi - self.shift;
        if x <= -self.lambda || x >= self.mu {
            return T::zero();
        }
        self.arcs[self.arc_index(x)].value_sq(x)
    }

    /// Concave extension of f used for chord endpoint searches: equal to f inside
    /// the support and negative outside.
    pub fn extended(&self, xi: T) -> T {
        let (lo, hi) = self.domain();
        if xi <= lo {
            xi - lo
        } else if xi >= hi {
            hi - xi
        } else {
            self.value(xi)
        }
    }

    /// Largest value of f (located by golden section on a concave function).
    pub fn max_value(&self) -> T {
        let (lo, hi) = self.domain();
        crate::solve1d::golden_max(|x| self.value(x), lo, hi, T::lit(1e-9)).1
    }

    /// Point where the boundary meets the ray at polar angle α on the given side.
    pub fn radial(&self, alpha: T, side: Side) -> T {
        let (s, c) = alpha.sin_cos();
        let sg = side.sign::<T>();
        let g = |r: T| self.extended(sg * r * c) - r * s;
        let rmax = self.lambda.max(self.mu).max(self.max_value()) * T::lit(2.0) + T::one();
        brent_root(g, T::zero(), rmax, T::lit(1e-15), 200).unwrap_or(T::zero())
    }
}
