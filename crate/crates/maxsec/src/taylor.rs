//! Truncated Taylor series ("jets") for forward-mode derivatives of any order.
//!
//! `coeffs[k]` holds `f^(k)(x0) / k!`. All arithmetic is truncated at `N`
//! coefficients, so a `Taylor<T, N>` carries derivatives through order `N - 1`.

use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Taylor<T, const N: usize> {
    pub coeffs: [T; N],
}

impl<T: Real, const N: usize> Default for Taylor<T, N> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Real, const N: usize> Taylor<T, N> {
    pub fn zero() -> Self {
        Self { coeffs: [T::zero(); N] }
    }

    pub fn constant(c: T) -> Self {
        let mut t = Self::zero();
        t.coeffs[0] = c;
        t
    }

    /// The independent variable expanded at `x0`.
    pub fn variable(x0: T) -> Self {
        let mut t = Self::constant(x0);
        if N > 1 {
            t.coeffs[1] = T::one();
        }
        t
    }

    pub fn from_coeffs(coeffs: [T; N]) -> Self {
        Self { coeffs }
    }

    /// Builds a jet from derivative values `f^(k)(x0)`, k = 0..N.
    pub fn from_derivatives(d: &[T]) -> Self {
        let mut t = Self::zero();
        let mut fact = T::one();
        for k in 0..N.min(d.len()) {
            if k > 0 {
                fact *= T::lit(k as f64);
            }
            t.coeffs[k] = d[k] / fact;
        }
        t
    }

    #[inline]
    pub fn value(&self) -> T {
        self.coeffs[0]
    }

    /// The k-th derivative, `k! * coeffs[k]`.
    pub fn derivative(&self, k: usize) -> T {
        let mut fact = T::one();
        for j in 2..=k {
            fact *= T::lit(j as f64);
        }
        self.coeffs[k] * fact
    }

    pub fn scale(mut self, c: T) -> Self {
        for a in self.coeffs.iter_mut() {
            *a *= c;
        }
        self
    }

    /// Series of `self^a` for real `a`, requiring a positive constant term.
    ///
    /// Uses the J.C.P. Miller recurrence
    /// `k c0 w_k = sum_{j=1..k} ((a+1) j - k) c_j w_{k-j}`.
    pub fn powf(&self, a: T) -> Self {
        let c0 = self.coeffs[0];
        let mut w = Self::zero();
        w.coeffs[0] = c0.powf(a);
        for k in 1..N {
            let mut acc = T::zero();
            for j in 1..=k {
                let f = (a + T::one()) * T::lit(j as f64) - T::lit(k as f64);
                acc += f * self.coeffs[j] * w.coeffs[k - j];
            }
            w.coeffs[k] = acc / (T::lit(k as f64) * c0);
        }
        w
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut out = Self::constant(T::one());
        for _ in 0..n {
            out = out * *self;
        }
        out
    }

    pub fn sqrt(&self) -> Self {
        self.powf(T::lit(0.5))
    }

    pub fn recip(&self) -> Self {
        Self::constant(T::one()) / *self
    }

    pub fn exp(&self) -> Self {
        let mut e = Self::zero();
        e.coeffs[0] = self.coeffs[0].exp();
        for k in 1..N {
            let mut acc = T::zero();
            for j in 1..=k {
                acc += T::lit(j as f64) * self.coeffs[j] * e.coeffs[k - j];
            }
            e.coeffs[k] = acc / T::lit(k as f64);
        }
        e
    }

    pub fn ln(&self) -> Self {
        let c0 = self.coeffs[0];
        let mut l = Self::zero();
        l.coeffs[0] = c0.ln();
        for k in 1..N {
            let mut acc = T::lit(k as f64) * self.coeffs[k];
            for j in 1..k {
                acc -= T::lit(j as f64) * l.coeffs[j] * self.coeffs[k - j];
            }
            l.coeffs[k] = acc / (T::lit(k as f64) * c0);
        }
        l
    }

    /// Simultaneous sine and cosine series.
    pub fn sin_cos(&self) -> (Self, Self) {
        let mut s = Self::zero();
        let mut c = Self::zero();
        s.coeffs[0] = self.coeffs[0].sin();
        c.coeffs[0] = self.coeffs[0].cos();
        for k in 1..N {
            let mut as_ = T::zero();
            let mut ac = T::zero();
            for j in 1..=k {
                let jf = T::lit(j as f64) * self.coeffs[j];
                as_ += jf * c.coeffs[k - j];
                ac -= jf * s.coeffs[k - j];
            }
            s.coeffs[k] = as_ / T::lit(k as f64);
            c.coeffs[k] = ac / T::lit(k as f64);
        }
        (s, c)
    }

    pub fn sin(&self) -> Self {
        self.sin_cos().0
    }

    pub fn cos(&self) -> Self {
        self.sin_cos().1
    }

    /// Re-expands the series about `x0 + eps`, keeping the first `M` coefficients
    /// of each shifted coefficient as a jet in `eps`.
    ///
    /// `out[j].coeffs[m] = C(j+m, m) * coeffs[j+m]`.
    pub fn shifted<const M: usize>(&self) -> [Taylor<T, M>; N] {
        let mut out = [Taylor::<T, M>::zero(); N];
        for (j, o) in out.iter_mut().enumerate() {
            for m in 0..M {
                if j + m < N {
                    o.coeffs[m] = T::lit(binomial(j + m, m)) * self.coeffs[j + m];
                }
            }
        }
        out
    }
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut b = 1.0;
    for i in 0..k {
        b = b * (n - i) as f64 / (i + 1) as f64;
    }
    b
}

pub fn factorial(n: usize) -> f64 {
    (2..=n).fold(1.0, |acc, k| acc * k as f64)
}

impl<T: Real, const N: usize> Add for Taylor<T, N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for k in 0..N {
            self.coeffs[k] += rhs.coeffs[k];
        }
        self
    }
}

impl<T: Real, const N: usize> Sub for Taylor<T, N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for k in 0..N {
            self.coeffs[k] -= rhs.coeffs[k];
        }
        self
    }
}

impl<T: Real, const N: usize> Mul for Taylor<T, N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zero();
        for i in 0..N {
            if self.coeffs[i] == T::zero() {
                continue;
            }
            for j in 0..N - i {
                out.coeffs[i + j] += self.coeffs[i] * rhs.coeffs[j];
            }
        }
        out
    }
}

impl<T: Real, const N: usize> Div for Taylor<T, N> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let b0 = rhs.coeffs[0];
        let mut q = Self::zero();
        for k in 0..N {
            let mut acc = self.coeffs[k];
            for j in 1..=k {
                acc -= rhs.coeffs[j] * q.coeffs[k - j];
            }
            q.coeffs[k] = acc / b0;
        }
        q
    }
}

impl<T: Real, const N: usize> Neg for Taylor<T, N> {
    type Output = Self;
    fn neg(mut self) -> Self {
        for a in self.coeffs.iter_mut() {
            *a = -*a;
        }
        self
    }
}

impl<T: Real, const N: usize> Add<T> for Taylor<T, N> {
    type Output = Self;
    fn add(mut self, rhs: T) -> Self {
        self.coeffs[0] += rhs;
        self
    }
}

impl<T: Real, const N: usize> Sub<T> for Taylor<T, N> {
    type Output = Self;
    fn sub(mut self, rhs: T) -> Self {
        self.coeffs[0] -= rhs;
        self
    }
}

impl<T: Real, const N: usize> Mul<T> for Taylor<T, N> {
    type Output = Self;
    fn mul(self, rhs: T) -> Self {
        self.scale(rhs)
    }
}

impl<T: Real, const N: usize> Div<T> for Taylor<T, N> {
    type Output = Self;
    fn div(self, rhs: T) -> Self {
        self.scale(T::one() / rhs)
    }
}

impl<T: Real, const N: usize> AddAssign for Taylor<T, N> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<T: Real, const N: usize> SubAssign for Taylor<T, N> {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<T: Real, const N: usize> MulAssign for Taylor<T, N> {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

/// Minimal commutative ring interface shared by scalars and jets, so that
/// coefficient recurrences can run over either.
pub trait Ring:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn scale_by(self, c: f64) -> Self;
}

impl Ring for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn scale_by(self, c: f64) -> Self {
        self * c
    }
}

impl<const N: usize> Ring for Taylor<f64, N> {
    fn zero() -> Self {
        Taylor::zero()
    }
    fn one() -> Self {
        Taylor::constant(1.0)
    }
    fn scale_by(self, c: f64) -> Self {
        self.scale(c)
    }
}
