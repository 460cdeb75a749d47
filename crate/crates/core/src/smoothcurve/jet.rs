//! Truncated Taylor series in one variable.
//!
//! A [`Jet`] of order `K` around `base` stores the normalized coefficients
//! `c[k] = f^(k)(base) / k!` for `k = 0..=K`. All arithmetic is exact
//! truncated-series arithmetic; combining jets of different orders yields
//! the smaller order, since coefficients above it are unknown.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::DomainError;

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    base: f64,
    coeffs: Vec<f64>,
}

impl Jet {
    /// Builds a jet from normalized coefficients. Panics on an empty slice.
    pub fn new(base: f64, coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a jet needs at least one coefficient");
        Jet { base, coeffs }
    }

    pub fn constant(base: f64, value: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        Jet { base, coeffs }
    }

    /// The identity function `x ↦ x` expanded at `base`.
    pub fn variable(base: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = base;
        if order >= 1 {
            coeffs[1] = 1.0;
        }
        Jet { base, coeffs }
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs[k]
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// `f^(k)(base) = k! c[k]`.
    pub fn derivative(&self, k: usize) -> f64 {
        self.coeffs[k] * factorial(k)
    }

    /// All derivatives `f, f', …, f^(K)` at the base point.
    pub fn derivatives(&self) -> Vec<f64> {
        (0..=self.order()).map(|k| self.derivative(k)).collect()
    }

    /// The jet of `f'`, one order lower.
    pub fn differentiate(&self) -> Jet {
        if self.order() == 0 {
            // Nothing is known about f' from a bare value.
            return Jet::new(self.base, vec![f64::NAN]);
        }
        let coeffs = (1..self.coeffs.len())
            .map(|k| k as f64 * self.coeffs[k])
            .collect();
        Jet::new(self.base, coeffs)
    }

    /// The jet of the antiderivative vanishing at `base` plus `constant`.
    pub fn integrate(&self, constant: f64) -> Jet {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(constant);
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs.push(c / (k + 1) as f64);
        }
        Jet::new(self.base, coeffs)
    }

    pub fn truncate(&self, order: usize) -> Jet {
        let n = (order + 1).min(self.coeffs.len());
        Jet::new(self.base, self.coeffs[..n].to_vec())
    }

    pub fn constant_like(&self, value: f64) -> Jet {
        Jet::constant(self.base, value, self.order())
    }

    pub fn scale(&self, factor: f64) -> Jet {
        Jet::new(self.base, self.coeffs.iter().map(|c| c * factor).collect())
    }

    /// Evaluates the truncated polynomial at `base + h`.
    pub fn eval_at(&self, h: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * h + c)
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        let n = self.coeffs.len().min(other.coeffs.len());
        let coeffs = (0..n).map(|k| f(self.coeffs[k], other.coeffs[k])).collect();
        Jet::new(self.base, coeffs)
    }

    fn mul_jet(&self, other: &Jet) -> Jet {
        let n = self.coeffs.len().min(other.coeffs.len());
        let mut out = vec![0.0; n];
        for (k, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..=k {
                acc += self.coeffs[j] * other.coeffs[k - j];
            }
            *slot = acc;
        }
        Jet::new(self.base, out)
    }

    /// Quotient, failing when the divisor's leading coefficient is zero.
    pub fn checked_div(&self, other: &Jet) -> Result<Jet, DomainError> {
        if other.coeffs[0] == 0.0 || !other.coeffs[0].is_finite() {
            return Err(DomainError::new("division by a jet with zero leading coefficient"));
        }
        Ok(self.div_unchecked(other))
    }

    fn div_unchecked(&self, other: &Jet) -> Jet {
        let n = self.coeffs.len().min(other.coeffs.len());
        let b0 = other.coeffs[0];
        let mut q = vec![0.0; n];
        for k in 0..n {
            let mut acc = self.coeffs[k];
            for j in 1..=k {
                acc -= other.coeffs[j] * q[k - j];
            }
            q[k] = acc / b0;
        }
        Jet::new(self.base, q)
    }

    pub fn recip(&self) -> Result<Jet, DomainError> {
        self.constant_like(1.0).checked_div(self)
    }

    pub fn exp(&self) -> Jet {
        let a = &self.coeffs;
        let n = a.len();
        let mut e = vec![0.0; n];
        e[0] = a[0].exp();
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * a[j] * e[k - j];
            }
            e[k] = acc / k as f64;
        }
        Jet::new(self.base, e)
    }

    pub fn ln(&self) -> Result<Jet, DomainError> {
        let a = &self.coeffs;
        if !(a[0] > 0.0) {
            return Err(DomainError::new("log of a nonpositive leading term"));
        }
        let n = a.len();
        let mut l = vec![0.0; n];
        l[0] = a[0].ln();
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..k {
                acc += j as f64 * l[j] * a[k - j];
            }
            l[k] = (a[k] - acc / k as f64) / a[0];
        }
        Ok(Jet::new(self.base, l))
    }

    /// Square root. A zero leading term is only accepted at order 0, where
    /// no derivative is requested.
    pub fn sqrt(&self) -> Result<Jet, DomainError> {
        let a = &self.coeffs;
        if a.len() == 1 {
            if a[0] < 0.0 {
                return Err(DomainError::new("sqrt of a negative value"));
            }
            return Ok(Jet::new(self.base, vec![a[0].sqrt()]));
        }
        if !(a[0] > 0.0) {
            return Err(DomainError::new("sqrt of a nonpositive leading term"));
        }
        let n = a.len();
        let mut r = vec![0.0; n];
        r[0] = a[0].sqrt();
        for k in 1..n {
            let mut acc = a[k];
            for j in 1..k {
                acc -= r[j] * r[k - j];
            }
            r[k] = acc / (2.0 * r[0]);
        }
        Ok(Jet::new(self.base, r))
    }

    pub fn sin_cos(&self) -> (Jet, Jet) {
        let a = &self.coeffs;
        let n = a.len();
        let mut s = vec![0.0; n];
        let mut c = vec![0.0; n];
        s[0] = a[0].sin();
        c[0] = a[0].cos();
        for k in 1..n {
            let (mut sk, mut ck) = (0.0, 0.0);
            for j in 1..=k {
                let ja = j as f64 * a[j];
                sk += ja * c[k - j];
                ck -= ja * s[k - j];
            }
            s[k] = sk / k as f64;
            c[k] = ck / k as f64;
        }
        (Jet::new(self.base, s), Jet::new(self.base, c))
    }

    pub fn sinh_cosh(&self) -> (Jet, Jet) {
        let a = &self.coeffs;
        let n = a.len();
        let mut s = vec![0.0; n];
        let mut c = vec![0.0; n];
        s[0] = a[0].sinh();
        c[0] = a[0].cosh();
        for k in 1..n {
            let (mut sk, mut ck) = (0.0, 0.0);
            for j in 1..=k {
                let ja = j as f64 * a[j];
                sk += ja * c[k - j];
                ck += ja * s[k - j];
            }
            s[k] = sk / k as f64;
            c[k] = ck / k as f64;
        }
        (Jet::new(self.base, s), Jet::new(self.base, c))
    }

    pub fn sin(&self) -> Jet {
        self.sin_cos().0
    }

    pub fn cos(&self) -> Jet {
        self.sin_cos().1
    }

    pub fn tan(&self) -> Result<Jet, DomainError> {
        let (s, c) = self.sin_cos();
        s.checked_div(&c)
    }

    pub fn sinh(&self) -> Jet {
        self.sinh_cosh().0
    }

    pub fn cosh(&self) -> Jet {
        self.sinh_cosh().1
    }

    pub fn tanh(&self) -> Jet {
        let (s, c) = self.sinh_cosh();
        s.div_unchecked(&c)
    }

    /// `atan` through its derivative `a' / (1 + a²)`.
    pub fn atan(&self) -> Jet {
        if self.order() == 0 {
            return Jet::new(self.base, vec![self.coeffs[0].atan()]);
        }
        let denom = &(self * self) + 1.0;
        let d = self.differentiate().div_unchecked(&denom);
        d.integrate(self.coeffs[0].atan())
    }

    /// Integer power by repeated multiplication (square-and-multiply).
    pub fn powi(&self, n: i32) -> Result<Jet, DomainError> {
        if n < 0 {
            return self.powi(-n)?.recip();
        }
        let mut result = self.constant_like(1.0);
        let mut base = self.clone();
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_jet(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_jet(&base);
            }
        }
        Ok(result)
    }

    /// `self^exponent = exp(exponent · log self)`.
    pub fn powf(&self, exponent: &Jet) -> Result<Jet, DomainError> {
        Ok((exponent * &self.ln()?).exp())
    }

    /// Composition `self ∘ inner`, where `inner` is a jet (in another
    /// variable) whose value is this jet's base point.
    pub fn compose(&self, inner: &Jet) -> Jet {
        let n = self.coeffs.len().min(inner.coeffs.len());
        let mut shift = inner.truncate(n - 1);
        shift.coeffs[0] = 0.0;
        // Horner in the shifted variable.
        let mut acc = Jet::constant(inner.base, self.coeffs[n - 1], n - 1);
        for k in (0..n - 1).rev() {
            acc = acc.mul_jet(&shift);
            acc.coeffs[0] += self.coeffs[k];
        }
        acc
    }

    /// Series reversion: the jet of the inverse function, expanded at this
    /// jet's value. Requires a nonzero first coefficient.
    pub fn invert(&self) -> Result<Jet, DomainError> {
        let a = &self.coeffs;
        if a.len() < 2 || a[1] == 0.0 || !a[1].is_finite() {
            return Err(DomainError::new("series reversion needs a nonzero first derivative"));
        }
        let n = a.len();
        let forward = Jet::new(0.0, {
            let mut c = a.clone();
            c[0] = 0.0;
            c
        });
        // b[n] is the only unknown entering coefficient n of forward(b(δ)),
        // and it enters linearly as a1 * b[n].
        let mut b = vec![0.0; n];
        b[1] = 1.0 / a[1];
        for k in 2..n {
            let trial = Jet::new(0.0, b[..=k].to_vec());
            let composed = forward.truncate(k).compose(&trial);
            b[k] = -composed.coeffs[k] / a[1];
        }
        b[0] = self.base;
        Ok(Jet::new(a[0], b))
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

macro_rules! jet_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                let f: fn(&Jet, &Jet) -> Jet = $body;
                f(self, rhs)
            }
        }
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                (&self).$method(rhs)
            }
        }
        impl $trait<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                self.$method(&rhs)
            }
        }
    };
}

jet_binop!(Add, add, |a, b| a.zip_with(b, |x, y| x + y));
jet_binop!(Sub, sub, |a, b| a.zip_with(b, |x, y| x - y));
jet_binop!(Mul, mul, |a, b| a.mul_jet(b));
jet_binop!(Div, div, |a, b| a.div_unchecked(b));

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += rhs;
        out
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.coeffs[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.coeffs[0] -= rhs;
        self
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_coefficients() {
        let s = Jet::variable(1.0, 2);
        let f = &(&s * &s) + 1.0;
        assert_eq!(f.coeffs(), &[2.0, 2.0, 1.0]);
    }

    #[test]
    fn maclaurin_sine() {
        let s = Jet::variable(0.0, 3);
        let f = s.sin();
        let expected = [0.0, 1.0, 0.0, -1.0 / 6.0];
        for (c, e) in f.coeffs().iter().zip(expected) {
            assert_relative_eq!(*c, e, epsilon = 1e-15);
        }
    }

    #[test]
    fn sqrt_at_zero_is_a_domain_error() {
        assert!(Jet::variable(0.0, 3).sqrt().is_err());
        assert!(Jet::variable(0.0, 3).ln().is_err());
        assert!(Jet::variable(1.0, 3).checked_div(&Jet::variable(0.0, 3)).is_err());
    }

    #[test]
    fn elementary_functions_match_closed_form_derivatives() {
        let x = 0.37;
        let j = Jet::variable(x, 4);
        let check = |got: &Jet, derivs: [f64; 5]| {
            for (k, d) in derivs.iter().enumerate() {
                assert_relative_eq!(got.derivative(k), *d, max_relative = 1e-12, epsilon = 1e-14);
            }
        };
        let e = x.exp();
        check(&j.exp(), [e; 5]);
        check(
            &j.ln().unwrap(),
            [x.ln(), 1.0 / x, -1.0 / (x * x), 2.0 / x.powi(3), -6.0 / x.powi(4)],
        );
        let (s, c) = (x.sin(), x.cos());
        check(&j.sin(), [s, c, -s, -c, s]);
        let (sh, ch) = (x.sinh(), x.cosh());
        check(&j.cosh(), [ch, sh, ch, sh, ch]);
        // atan' = 1/(1+x²), atan'' = -2x/(1+x²)², atan''' = (6x²-2)/(1+x²)³
        let q = 1.0 + x * x;
        let atan = j.atan();
        assert_relative_eq!(atan.derivative(1), 1.0 / q, max_relative = 1e-13);
        assert_relative_eq!(atan.derivative(2), -2.0 * x / (q * q), max_relative = 1e-13);
        assert_relative_eq!(atan.derivative(3), (6.0 * x * x - 2.0) / q.powi(3), max_relative = 1e-13);
        // tanh' = 1 - tanh²
        let th = j.tanh();
        assert_relative_eq!(th.derivative(1), 1.0 - x.tanh().powi(2), max_relative = 1e-13);
        let sq = j.sqrt().unwrap();
        assert_relative_eq!(sq.derivative(2), -0.25 * x.powf(-1.5), max_relative = 1e-13);
    }

    #[test]
    fn integer_and_real_powers_agree() {
        let j = &Jet::variable(1.3, 5) * 2.0;
        let a = j.powi(3).unwrap();
        let b = j.powf(&j.constant_like(3.0)).unwrap();
        for k in 0..=5 {
            assert_relative_eq!(a.coeff(k), b.coeff(k), max_relative = 1e-12, epsilon = 1e-13);
        }
        let inv = j.powi(-2).unwrap();
        let prod = &inv * &j.powi(2).unwrap();
        assert_relative_eq!(prod.coeff(0), 1.0, max_relative = 1e-14);
        for k in 1..=5 {
            assert!(prod.coeff(k).abs() < 1e-12);
        }
    }

    #[test]
    fn reversion_inverts_exp() {
        // y = exp(x) at x = 0.2; inverse is log, expanded at y = exp(0.2).
        let x = Jet::variable(0.2, 6);
        let inv = x.exp().invert().unwrap();
        let log = Jet::variable(0.2f64.exp(), 6).ln().unwrap();
        assert_relative_eq!(inv.base(), log.base(), max_relative = 1e-15);
        for k in 0..=6 {
            assert_relative_eq!(inv.coeff(k), log.coeff(k), max_relative = 1e-11, epsilon = 1e-13);
        }
    }

    #[test]
    fn composition_chain_rule() {
        // sin(exp(t)) at t = 0.1 via compose vs direct evaluation.
        let t = Jet::variable(0.1, 5);
        let inner = t.exp();
        let outer = Jet::variable(inner.value(), 5).sin();
        let composed = outer.compose(&inner);
        let direct = inner.sin();
        for k in 0..=5 {
            assert_relative_eq!(composed.coeff(k), direct.coeff(k), max_relative = 1e-12, epsilon = 1e-14);
        }
    }

    #[test]
    fn mixed_orders_truncate_to_the_smaller() {
        let a = Jet::variable(0.5, 6);
        let b = Jet::variable(0.5, 3);
        assert_eq!((&a * &b).order(), 3);
        assert_eq!(a.differentiate().order(), 5);
    }
}
