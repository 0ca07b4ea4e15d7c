//! C² cubic spline interpolation on non-uniform knots.

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum EndCondition {
    Natural,
    /// Prescribed first derivatives at the two ends.
    Clamped(f64, f64),
    NotAKnot,
}

#[derive(Clone, Debug)]
pub struct CubicSpline<T> {
    x: Vec<T>,
    y: Vec<T>,
    m: Vec<T>,
}

fn thomas<T: Real>(a: &[T], b: &mut [T], c: &[T], r: &mut [T], m: &mut [T]) {
    let n = b.len();
    for i in 1..n {
        let w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        r[i] = r[i] - w * r[i - 1];
    }
    m[n - 1] = r[n - 1] / b[n - 1];
    for i in (0..n - 1).rev() {
        m[i] = (r[i] - c[i] * m[i + 1]) / b[i];
    }
}

impl<T: Real> CubicSpline<T> {
    /// Interpolates strictly increasing `x` with values `y`.
    pub fn new(x: Vec<T>, y: Vec<T>, end: EndCondition) -> Self {
        let n = x.len();
        assert!(n >= 4 && y.len() == n, "spline needs at least 4 knots");
        assert!(x.windows(2).all(|w| w[1] > w[0]), "spline knots must increase");
        let h: Vec<T> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let slope: Vec<T> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let six = T::lit(6.0);
        let two = T::lit(2.0);

        // tridiagonal rows: a[i] M[i-1] + b[i] M[i] + c[i] M[i+1] = r[i]
        let mut a = vec![T::zero(); n];
        let mut b = vec![T::zero(); n];
        let mut c = vec![T::zero(); n];
        let mut r = vec![T::zero(); n];
        for i in 1..n - 1 {
            a[i] = h[i - 1];
            b[i] = two * (h[i - 1] + h[i]);
            c[i] = h[i];
            r[i] = six * (slope[i] - slope[i - 1]);
        }
        match end {
            EndCondition::Natural => {
                b[0] = T::one();
                b[n - 1] = T::one();
            }
            EndCondition::Clamped(d0, d1) => {
                b[0] = two * h[0];
                c[0] = h[0];
                r[0] = six * (slope[0] - T::lit(d0));
                a[n - 1] = h[n - 2];
                b[n - 1] = two * h[n - 2];
                r[n - 1] = six * (T::lit(d1) - slope[n - 2]);
            }
            EndCondition::NotAKnot => {
                // M0 = ((h0+h1) M1 - h0 M2)/h1 folded into row 1, likewise at the right end
                let (h0, h1) = (h[0], h[1]);
                b[1] += a[1] * (h0 + h1) / h1;
                c[1] -= a[1] * h0 / h1;
                a[1] = T::zero();
                let (hm, hl) = (h[n - 3], h[n - 2]);
                b[n - 2] += c[n - 2] * (hm + hl) / hm;
                a[n - 2] -= c[n - 2] * hl / hm;
                c[n - 2] = T::zero();
                let mut m = vec![T::zero(); n];
                thomas(&a[1..n - 1], &mut b[1..n - 1], &c[1..n - 1], &mut r[1..n - 1], &mut m[1..n - 1]);
                m[0] = ((h0 + h1) * m[1] - h0 * m[2]) / h1;
                m[n - 1] = ((hm + hl) * m[n - 2] - hl * m[n - 3]) / hm;
                return Self { x, y, m };
            }
        }
        let mut m = vec![T::zero(); n];
        thomas(&a, &mut b, &c, &mut r, &mut m);
        Self { x, y, m }
    }

    pub fn knots(&self) -> &[T] {
        &self.x
    }

    pub fn values(&self) -> &[T] {
        &self.y
    }

    pub fn second_derivatives(&self) -> &[T] {
        &self.m
    }

    pub fn domain(&self) -> (T, T) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    /// Index i with x[i] <= t < x[i+1], clamped to the valid range.
    pub fn interval(&self, t: T) -> usize {
        let n = self.x.len();
        if t <= self.x[0] {
            return 0;
        }
        if t >= self.x[n - 1] {
            return n - 2;
        }
        self.x.partition_point(|&xi| xi <= t).saturating_sub(1).min(n - 2)
    }

    /// Value and first two derivatives on a known interval.
    pub fn eval_in(&self, i: usize, t: T) -> (T, T, T) {
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let six = T::lit(6.0);
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let v = a * self.y[i] + b * self.y[i + 1]
            + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / six;
        let d1 = (self.y[i + 1] - self.y[i]) / h
            + (-(T::lit(3.0) * a * a - T::one()) * m0 + (T::lit(3.0) * b * b - T::one()) * m1) * h / six;
        let d2 = a * m0 + b * m1;
        (v, d1, d2)
    }

    pub fn eval(&self, t: T) -> (T, T, T) {
        self.eval_in(self.interval(t), t)
    }

    pub fn value(&self, t: T) -> T {
        self.eval(t).0
    }
}
