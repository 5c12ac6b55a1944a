//! Forward-mode automatic differentiation.
//!
//! [`Jet`] carries a value together with its gradient and Hessian with respect
//! to up to [`MAX_VARS`] independent variables, so a single evaluation of a
//! model formula yields the metric and its first and second partials.
//! [`Dual`] adds one more directional derivative on top of any [`Scalar`];
//! `Dual<Jet>` is used to reach third derivatives of an immersion, which the
//! second partials of its induced metric require.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Largest number of independent variables a [`Jet`] can track.
pub const MAX_VARS: usize = 8;
const HESS_LEN: usize = MAX_VARS * (MAX_VARS + 1) / 2;

#[inline]
fn tri(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    b * (b + 1) / 2 + a
}

/// Arithmetic needed by model formulas. Implemented for `f64`, [`Jet`] and
/// [`Dual`] so that one generic formula serves values and all derivatives.
pub trait Scalar:
    Copy
    + fmt::Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    fn value(&self) -> f64;
    fn sqrt(self) -> Self;
    fn powf(self, p: f64) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;

    fn powi(self, k: i32) -> Self {
        match k {
            0 => Self::cst(1.0),
            1 => self,
            k if k < 0 => Self::cst(1.0) / self.powi(-k),
            k => {
                let half = self.powi(k / 2);
                if k % 2 == 0 {
                    half * half
                } else {
                    half * half * self
                }
            }
        }
    }

    fn recip(self) -> Self {
        Self::cst(1.0) / self
    }
}

impl Scalar for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn powi(self, k: i32) -> Self {
        f64::powi(self, k)
    }
}

/// Second-order truncated Taylor expansion in `nvars` variables.
#[derive(Clone, Copy)]
pub struct Jet {
    nvars: u8,
    val: f64,
    grad: [f64; MAX_VARS],
    hess: [f64; HESS_LEN],
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.nvars as usize;
        f.debug_struct("Jet")
            .field("val", &self.val)
            .field("grad", &&self.grad[..n])
            .finish()
    }
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        Jet {
            nvars: 0,
            val: v,
            grad: [0.0; MAX_VARS],
            hess: [0.0; HESS_LEN],
        }
    }

    /// The `index`-th coordinate function of `nvars` variables, evaluated at `v`.
    pub fn variable(v: f64, index: usize, nvars: usize) -> Self {
        assert!(nvars <= MAX_VARS && index < nvars, "jet variable out of range");
        let mut j = Jet::constant(v);
        j.nvars = nvars as u8;
        j.grad[index] = 1.0;
        j
    }

    /// Seeds a full point: one variable per coordinate.
    pub fn seed(x: &[f64]) -> Vec<Jet> {
        x.iter()
            .enumerate()
            .map(|(i, &v)| Jet::variable(v, i, x.len()))
            .collect()
    }

    pub fn val(&self) -> f64 {
        self.val
    }

    pub fn d(&self, i: usize) -> f64 {
        self.grad[i]
    }

    pub fn dd(&self, i: usize, j: usize) -> f64 {
        self.hess[tri(i, j)]
    }

    fn width(&self, other: &Jet) -> usize {
        self.nvars.max(other.nvars) as usize
    }

    /// Applies a scalar function given its value and first two derivatives at `self.val`.
    #[inline]
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Jet {
        let n = self.nvars as usize;
        let mut out = Jet::constant(f0);
        out.nvars = self.nvars;
        for i in 0..n {
            out.grad[i] = f1 * self.grad[i];
        }
        for j in 0..n {
            for i in 0..=j {
                let t = tri(i, j);
                out.hess[t] = f1 * self.hess[t] + f2 * self.grad[i] * self.grad[j];
            }
        }
        out
    }
}

impl Add for Jet {
    type Output = Jet;
    #[inline]
    fn add(self, o: Jet) -> Jet {
        let n = self.width(&o);
        let mut out = self;
        out.nvars = n as u8;
        out.val += o.val;
        for i in 0..n {
            out.grad[i] += o.grad[i];
        }
        for t in 0..n * (n + 1) / 2 {
            out.hess[t] += o.hess[t];
        }
        out
    }
}

impl Sub for Jet {
    type Output = Jet;
    #[inline]
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    #[inline]
    fn neg(self) -> Jet {
        let n = self.nvars as usize;
        let mut out = self;
        out.val = -out.val;
        for i in 0..n {
            out.grad[i] = -out.grad[i];
        }
        for t in 0..n * (n + 1) / 2 {
            out.hess[t] = -out.hess[t];
        }
        out
    }
}

impl Mul for Jet {
    type Output = Jet;
    #[inline]
    fn mul(self, o: Jet) -> Jet {
        let n = self.width(&o);
        let mut out = Jet::constant(self.val * o.val);
        out.nvars = n as u8;
        for i in 0..n {
            out.grad[i] = self.grad[i] * o.val + self.val * o.grad[i];
        }
        for j in 0..n {
            for i in 0..=j {
                let t = tri(i, j);
                out.hess[t] = self.hess[t] * o.val
                    + self.val * o.hess[t]
                    + self.grad[i] * o.grad[j]
                    + self.grad[j] * o.grad[i];
            }
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    #[inline]
    fn div(self, o: Jet) -> Jet {
        let r = 1.0 / o.val;
        self * o.chain(r, -r * r, 2.0 * r * r * r)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, c: f64) -> Jet {
        self.val += c;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, c: f64) -> Jet {
        self.val -= c;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, c: f64) -> Jet {
        self.chain(self.val * c, c, 0.0)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, c: f64) -> Jet {
        self * (1.0 / c)
    }
}

impl Scalar for Jet {
    fn cst(v: f64) -> Self {
        Jet::constant(v)
    }
    fn value(&self) -> f64 {
        self.val
    }
    fn sqrt(self) -> Self {
        let s = self.val.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.val))
    }
    fn powf(self, p: f64) -> Self {
        let v = self.val;
        let f0 = v.powf(p);
        self.chain(f0, p * v.powf(p - 1.0), p * (p - 1.0) * v.powf(p - 2.0))
    }
    fn exp(self) -> Self {
        let e = self.val.exp();
        self.chain(e, e, e)
    }
    fn ln(self) -> Self {
        let v = self.val;
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }
    fn sin(self) -> Self {
        let (s, c) = self.val.sin_cos();
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = self.val.sin_cos();
        self.chain(c, -s, -c)
    }
}

/// `re + eps·ε` with `ε² = 0`, generic over the coefficient type.
#[derive(Clone, Copy, Debug)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Scalar> Dual<T> {
    pub fn new(re: T, eps: T) -> Self {
        Dual { re, eps }
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual::new(self.re + o.re, self.eps + o.eps)
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual::new(self.re - o.re, self.eps - o.eps)
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Dual::new(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = o.re.recip();
        Dual::new(self.re * inv, (self.eps * o.re - self.re * o.eps) * inv * inv)
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual::new(-self.re, -self.eps)
    }
}

impl<T: Scalar> Add<f64> for Dual<T> {
    type Output = Self;
    fn add(self, c: f64) -> Self {
        Dual::new(self.re + c, self.eps)
    }
}

impl<T: Scalar> Sub<f64> for Dual<T> {
    type Output = Self;
    fn sub(self, c: f64) -> Self {
        Dual::new(self.re - c, self.eps)
    }
}

impl<T: Scalar> Mul<f64> for Dual<T> {
    type Output = Self;
    fn mul(self, c: f64) -> Self {
        Dual::new(self.re * c, self.eps * c)
    }
}

impl<T: Scalar> Div<f64> for Dual<T> {
    type Output = Self;
    fn div(self, c: f64) -> Self {
        Dual::new(self.re / c, self.eps / c)
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn cst(v: f64) -> Self {
        Dual::new(T::cst(v), T::cst(0.0))
    }
    fn value(&self) -> f64 {
        self.re.value()
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        Dual::new(s, self.eps / (s * 2.0))
    }
    fn powf(self, p: f64) -> Self {
        Dual::new(self.re.powf(p), self.eps * self.re.powf(p - 1.0) * p)
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        Dual::new(e, self.eps * e)
    }
    fn ln(self) -> Self {
        Dual::new(self.re.ln(), self.eps / self.re)
    }
    fn sin(self) -> Self {
        Dual::new(self.re.sin(), self.eps * self.re.cos())
    }
    fn cos(self) -> Self {
        Dual::new(self.re.cos(), -(self.eps * self.re.sin()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd2(f: impl Fn(f64, f64) -> f64, x: f64, y: f64, h: f64) -> [f64; 3] {
        let fxx = (f(x + h, y) - 2.0 * f(x, y) + f(x - h, y)) / (h * h);
        let fyy = (f(x, y + h) - 2.0 * f(x, y) + f(x, y - h)) / (h * h);
        let fxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h))
            / (4.0 * h * h);
        [fxx, fxy, fyy]
    }

    fn formula<S: Scalar>(x: S, y: S) -> S {
        (x * y + 2.0).sqrt() * (x * 0.3).exp() / (y * y + 1.0) + (x + y * 2.0).sin().powf(2.0)
            - (x * x + 3.0).ln() * y.cos()
    }

    #[test]
    fn jet_matches_finite_differences() {
        let (x, y) = (0.7, -0.4);
        let v = Jet::seed(&[x, y]);
        let j = formula(v[0], v[1]);
        let f = |a: f64, b: f64| formula(a, b);
        assert!((j.val() - f(x, y)).abs() < 1e-15);
        let h = 1e-6;
        let gx = (f(x + h, y) - f(x - h, y)) / (2.0 * h);
        let gy = (f(x, y + h) - f(x, y - h)) / (2.0 * h);
        assert!((j.d(0) - gx).abs() < 1e-8);
        assert!((j.d(1) - gy).abs() < 1e-8);
        let [fxx, fxy, fyy] = fd2(f, x, y, 1e-4);
        assert!((j.dd(0, 0) - fxx).abs() < 1e-5);
        assert!((j.dd(0, 1) - fxy).abs() < 1e-5);
        assert!((j.dd(1, 0) - fxy).abs() < 1e-5);
        assert!((j.dd(1, 1) - fyy).abs() < 1e-5);
    }

    #[test]
    fn dual_of_jet_gives_third_derivatives() {
        // f = x^3 y^2: d/dx f = 3x^2 y^2, whose Hessian has d^2/dx dy = 12 x y.
        let (x, y) = (1.3, 0.6);
        let jets = Jet::seed(&[x, y]);
        let dx = Dual::new(jets[0], Jet::cst(1.0));
        let dy = Dual::new(jets[1], Jet::cst(0.0));
        let f = dx.powi(3) * dy.powi(2);
        assert!((f.eps.val() - 3.0 * x * x * y * y).abs() < 1e-13);
        assert!((f.eps.dd(0, 1) - 12.0 * x * y).abs() < 1e-12);
        assert!((f.eps.dd(0, 0) - 6.0 * y * y).abs() < 1e-12);
        assert!((f.eps.dd(1, 1) - 6.0 * x * x).abs() < 1e-12);
    }

    #[test]
    fn constants_mix_with_variables() {
        let v = Jet::seed(&[2.0, 3.0, 5.0]);
        let c = Jet::cst(4.0);
        let p = c * v[2] + v[0] * v[1];
        assert_eq!(p.val(), 26.0);
        assert_eq!(p.d(0), 3.0);
        assert_eq!(p.d(2), 4.0);
        assert_eq!(p.dd(0, 1), 1.0);
        assert_eq!(p.dd(2, 2), 0.0);
    }
}
