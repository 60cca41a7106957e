//! Scalar special-function kernels.
//!
//! Pochhammer symbols, a sign-tracked log-gamma, terminating `3F2(..;1)` sums and the
//! univariate dual-Hahn polynomials
//!
//! ```text
//! d_n(x; α, δ, γ) = (α+1)_n (γ+1)_n · 3F2(-n, -x, x+γ+δ+1; α+1, γ+1; 1)
//! ```
//!
//! together with their weight `w_x` and squared norm `h_n`. Products that can over- or
//! underflow are carried as [`SignedLog`] and exponentiated once at the end.

use std::f64::consts::PI;
use std::ops::{Div, Mul};

use crate::error::{Error, Result};
use crate::summation::CompensatedSum;

/// Arguments within this distance of a nonpositive integer are treated as poles.
pub const POLE_TOL: f64 = 1e-12;

/// True when `x` is a nonpositive integer up to [`POLE_TOL`].
pub fn is_nonpositive_integer(x: f64) -> bool {
    x <= POLE_TOL && (x - x.round()).abs() <= POLE_TOL
}

/// A real number stored as `sign · exp(log_abs)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignedLog {
    pub log_abs: f64,
    /// -1, 0 or +1. Zero means the value is exactly zero and `log_abs` is meaningless.
    pub sign: i8,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog { log_abs: f64::NEG_INFINITY, sign: 0 };
    pub const ONE: SignedLog = SignedLog { log_abs: 0.0, sign: 1 };

    pub fn new(log_abs: f64, sign: i8) -> Self {
        if sign == 0 {
            Self::ZERO
        } else {
            Self { log_abs, sign: sign.signum() }
        }
    }

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            Self { log_abs: v.abs().ln(), sign: if v > 0.0 { 1 } else { -1 } }
        }
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn value(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.log_abs.exp(),
        }
    }

    pub fn negate_if(self, flip: bool) -> Self {
        if flip {
            Self { sign: -self.sign, ..self }
        } else {
            self
        }
    }

    /// Square root of a nonnegative value.
    pub fn sqrt(self) -> Option<Self> {
        match self.sign {
            0 => Some(Self::ZERO),
            1 => Some(Self { log_abs: 0.5 * self.log_abs, sign: 1 }),
            _ => None,
        }
    }
}

impl Mul for SignedLog {
    type Output = SignedLog;

    fn mul(self, rhs: SignedLog) -> SignedLog {
        if self.sign == 0 || rhs.sign == 0 {
            SignedLog::ZERO
        } else {
            SignedLog { log_abs: self.log_abs + rhs.log_abs, sign: self.sign * rhs.sign }
        }
    }
}

impl Div for SignedLog {
    type Output = SignedLog;

    /// Division by zero yields an infinite magnitude; callers check poles first.
    fn div(self, rhs: SignedLog) -> SignedLog {
        if self.sign == 0 {
            return SignedLog::ZERO;
        }
        if rhs.sign == 0 {
            return SignedLog { log_abs: f64::INFINITY, sign: self.sign };
        }
        SignedLog { log_abs: self.log_abs - rhs.log_abs, sign: self.sign * rhs.sign }
    }
}

/// Rising factorial `(a)_n = a(a+1)…(a+n-1)`, `(a)_0 = 1`.
pub fn pochhammer(a: f64, n: u32) -> f64 {
    if is_nonpositive_integer(a) && -a.round() < f64::from(n) {
        return 0.0;
    }
    (0..n).fold(1.0, |acc, k| acc * (a + f64::from(k)))
}

/// Product `(a_1)_n (a_2)_n … (a_m)_n`.
pub fn multi_pochhammer(params: &[f64], n: u32) -> f64 {
    params.iter().map(|&a| pochhammer(a, n)).product()
}

/// `(a)_n` in sign/log form.
pub fn pochhammer_signed(a: f64, n: u32) -> SignedLog {
    if is_nonpositive_integer(a) && -a.round() < f64::from(n) {
        return SignedLog::ZERO;
    }
    let mut log_abs = 0.0;
    let mut sign = 1i8;
    for k in 0..n {
        let f = a + f64::from(k);
        if f < 0.0 {
            sign = -sign;
        }
        log_abs += f.abs().ln();
    }
    SignedLog { log_abs, sign }
}

/// `ln n!`
pub fn ln_factorial(n: u32) -> f64 {
    libm::lgamma(f64::from(n) + 1.0)
}

/// `sin(πx)` with the argument reduced modulo 2 first.
fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).floor();
    (PI * r).sin()
}

/// Γ(x) as a [`SignedLog`]; negative non-integer arguments go through the reflection
/// formula `Γ(x)Γ(1-x) = π / sin(πx)`.
pub fn log_gamma_signed(x: f64) -> Result<SignedLog> {
    if is_nonpositive_integer(x) || x.is_nan() {
        return Err(Error::GammaPole(x));
    }
    if x > 0.0 {
        return Ok(SignedLog { log_abs: libm::lgamma(x), sign: 1 });
    }
    let s = sin_pi(x);
    let log_abs = PI.ln() - s.abs().ln() - libm::lgamma(1.0 - x);
    Ok(SignedLog { log_abs, sign: if s > 0.0 { 1 } else { -1 } })
}

/// `3F2(-n, -x, top3; bot1, bot2; 1)` for nonnegative integers `n`, `x`.
///
/// The series stops at `s = min(n, x)`; a lower parameter whose Pochhammer vanishes inside
/// that range is an error.
pub fn hyp3f2_terminating(n: u32, x: u32, top3: f64, bot1: f64, bot2: f64) -> Result<f64> {
    let last = n.min(x);
    for (param, order) in [(bot1, last), (bot2, last)] {
        if is_nonpositive_integer(param) && -param.round() < f64::from(order) {
            return Err(Error::DenominatorPole { param, order });
        }
    }
    let (nf, xf) = (f64::from(n), f64::from(x));
    let mut sum = CompensatedSum::new();
    let mut term = 1.0;
    sum.add(term);
    for s in 0..last {
        let s = f64::from(s);
        term *= (s - nf) * (s - xf) * (top3 + s) / ((bot1 + s) * (bot2 + s) * (s + 1.0));
        sum.add(term);
    }
    Ok(sum.value())
}

/// Parameters `(α, δ, γ)` of a univariate dual-Hahn family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualHahnParams {
    pub alpha: f64,
    pub delta: f64,
    pub gamma: f64,
}

impl DualHahnParams {
    pub fn new(alpha: f64, delta: f64, gamma: f64) -> Self {
        Self { alpha, delta, gamma }
    }

    /// The same family with the α and γ slots exchanged. `d_n` is symmetric under this swap.
    pub fn swapped(self) -> Self {
        Self { alpha: self.gamma, delta: self.delta, gamma: self.alpha }
    }
}

pub fn dual_hahn(n: u32, x: u32, p: &DualHahnParams) -> Result<f64> {
    let DualHahnParams { alpha, delta, gamma } = *p;
    let prefactor = pochhammer(alpha + 1.0, n) * pochhammer(gamma + 1.0, n);
    let series = hyp3f2_terminating(n, x, f64::from(x) + gamma + delta + 1.0, alpha + 1.0, gamma + 1.0)?;
    Ok(prefactor * series)
}

pub fn weight_w_signed(x: u32, p: &DualHahnParams) -> Result<SignedLog> {
    let DualHahnParams { alpha, delta, gamma } = *p;
    let num = [gamma + delta + 1.0, gamma / 2.0 + delta / 2.0 + 1.5, alpha + 1.0, gamma + 1.0];
    let den = [gamma / 2.0 + delta / 2.0 + 0.5, gamma + delta - alpha + 1.0, delta + 1.0];
    let mut acc = SignedLog::ONE;
    for a in num {
        acc = acc * pochhammer_signed(a, x);
    }
    for a in den {
        let d = pochhammer_signed(a, x);
        if d.is_zero() {
            return Err(Error::DenominatorPole { param: a, order: x });
        }
        acc = acc / d;
    }
    let fact = SignedLog { log_abs: ln_factorial(x), sign: 1 };
    Ok((acc / fact).negate_if(x % 2 == 1))
}

/// The weight `w_x(α, δ, γ)`, including its `(-1)^x` factor.
pub fn weight_w(x: u32, p: &DualHahnParams) -> Result<f64> {
    weight_w_signed(x, p).map(SignedLog::value)
}

/// Squared norms `h_n(α, δ, γ)` of one family; the Γ-ratio prefactor is evaluated once.
#[derive(Clone, Copy, Debug)]
pub struct DualHahnNorms {
    params: DualHahnParams,
    gamma_ratio: SignedLog,
}

impl DualHahnNorms {
    pub fn new(p: &DualHahnParams) -> Result<Self> {
        let DualHahnParams { alpha, delta, gamma } = *p;
        let gamma_ratio = log_gamma_signed(gamma + delta - alpha + 1.0)? * log_gamma_signed(delta + 1.0)?
            / (log_gamma_signed(gamma + delta + 2.0)? * log_gamma_signed(delta - alpha)?);
        Ok(Self { params: *p, gamma_ratio })
    }

    /// `h_n / h_0 = n! (α+1, γ+1, α-δ+1)_n`.
    pub fn ratio_to_h0(&self, n: u32) -> SignedLog {
        let DualHahnParams { alpha, delta, gamma } = self.params;
        SignedLog { log_abs: ln_factorial(n), sign: 1 }
            * pochhammer_signed(alpha + 1.0, n)
            * pochhammer_signed(gamma + 1.0, n)
            * pochhammer_signed(alpha - delta + 1.0, n)
    }

    pub fn h_signed(&self, n: u32) -> SignedLog {
        self.ratio_to_h0(n) * self.gamma_ratio
    }

    pub fn h(&self, n: u32) -> f64 {
        self.h_signed(n).value()
    }
}

/// The squared norm `h_n(α, δ, γ)`.
pub fn norm_h(n: u32, p: &DualHahnParams) -> Result<f64> {
    Ok(DualHahnNorms::new(p)?.h(n))
}

/// `(-1)^n h_n^{-1/2} d_n(x)`. The alternating sign makes the three-term recurrence carry
/// positive off-diagonal coefficients when the truncation sits in the α slot.
pub fn dual_hahn_orthonormal(n: u32, x: u32, p: &DualHahnParams, norms: &DualHahnNorms) -> Result<f64> {
    let h = norms.h_signed(n);
    let sqrt_h = h.sqrt().ok_or(Error::NotPositive { what: "dual-Hahn norm h_n", value: h.value() })?;
    let v = dual_hahn(n, x, p)? * (-sqrt_h.log_abs).exp();
    Ok(if n % 2 == 1 { -v } else { v })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{One, ToPrimitive, Zero};

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn poch_exact(a: &BigRational, n: u32) -> BigRational {
        let mut acc = BigRational::one();
        for k in 0..n {
            acc *= a + BigRational::from_integer(BigInt::from(k));
        }
        acc
    }

    /// Exact term-by-term evaluation of d_n(x) for rational parameters.
    fn dual_hahn_exact(n: u32, x: u32, alpha: &BigRational, delta: &BigRational, gamma: &BigRational) -> BigRational {
        let one = BigRational::one();
        let top3 = BigRational::from_integer(BigInt::from(x)) + gamma + delta + &one;
        let mut sum = BigRational::zero();
        for s in 0..=n.min(x) {
            let num =
                poch_exact(&rat(-i64::from(n), 1), s) * poch_exact(&rat(-i64::from(x), 1), s) * poch_exact(&top3, s);
            let den = poch_exact(&(alpha + &one), s) * poch_exact(&(gamma + &one), s) * poch_exact(&one, s);
            sum += num / den;
        }
        poch_exact(&(alpha + &one), n) * poch_exact(&(gamma + &one), n) * sum
    }

    #[test]
    fn pochhammer_values() {
        assert_eq!(pochhammer(5.0, 0), 1.0);
        assert_eq!(pochhammer(3.0, 2), 12.0);
        assert_eq!(pochhammer(0.5, 3), 15.0 / 8.0);
        assert_eq!(pochhammer(-2.0, 3), 0.0);
        assert_eq!(pochhammer(-2.0, 2), 2.0);
        assert_eq!(multi_pochhammer(&[2.0, 3.0], 1), 6.0);
        assert_eq!(multi_pochhammer(&[-1.0, 5.0], 2), 0.0);
        assert_eq!(multi_pochhammer(&[2.5], 4), pochhammer(2.5, 4));
    }

    #[test]
    fn signed_pochhammer_tracks_sign() {
        let v = pochhammer_signed(-3.5, 3);
        assert_eq!(v.sign, -1);
        assert!((v.value() - pochhammer(-3.5, 3)).abs() < 1e-12);
        assert!(pochhammer_signed(-4.0, 5).is_zero());
    }

    #[test]
    fn log_gamma_known_values() {
        let g1 = log_gamma_signed(1.0).unwrap();
        assert_eq!(g1.sign, 1);
        assert!(g1.log_abs.abs() < 1e-15);
        let half = log_gamma_signed(0.5).unwrap();
        assert_eq!(half.sign, 1);
        assert!((half.log_abs - PI.sqrt().ln()).abs() < 1e-14);
        let neg = log_gamma_signed(-0.5).unwrap();
        assert_eq!(neg.sign, -1);
        assert!((neg.log_abs - (2.0 * PI.sqrt()).ln()).abs() < 1e-14);
        // Γ(-6.5) = Γ(0.5) / (-0.5)(-1.5)...(-6.5)
        let g = log_gamma_signed(-6.5).unwrap();
        let expected = PI.sqrt() / pochhammer(-6.5, 7);
        assert!((g.value() - expected).abs() < 1e-13 * expected.abs());
    }

    #[test]
    fn log_gamma_poles() {
        for x in [0.0, -1.0, -7.0, -3.0 + 1e-13] {
            assert!(matches!(log_gamma_signed(x), Err(Error::GammaPole(_))), "{x}");
        }
        assert!(log_gamma_signed(-3.0 + 1e-9).is_ok());
    }

    #[test]
    fn hyp3f2_small_cases() {
        assert_eq!(hyp3f2_terminating(0, 5, 2.3, 1.7, 0.4).unwrap(), 1.0);
        assert_eq!(hyp3f2_terminating(4, 0, 2.3, 1.7, 0.4).unwrap(), 1.0);
        let (t, b1, b2) = (2.3, 1.7, 0.4);
        let v = hyp3f2_terminating(1, 1, t, b1, b2).unwrap();
        assert!((v - (1.0 + t / (b1 * b2))).abs() < 1e-14);
    }

    #[test]
    fn hyp3f2_denominator_pole() {
        // (-1)_2 = 0 appears before the series ends at s = 2.
        let err = hyp3f2_terminating(3, 2, 1.0, -1.0, 2.0).unwrap_err();
        assert!(matches!(err, Error::DenominatorPole { .. }));
        // (-2)_2 is nonzero, so the same series is fine with bot1 = -2.
        assert!(hyp3f2_terminating(3, 2, 1.0, -2.0, 2.0).is_ok());
    }

    #[test]
    fn dual_hahn_low_degrees() {
        let p = DualHahnParams::new(0.3, 1.7, 2.2);
        for x in 0..6 {
            assert_eq!(dual_hahn(0, x, &p).unwrap(), 1.0);
            let xf = f64::from(x);
            let expected = (p.alpha + 1.0) * (p.gamma + 1.0) + xf * (xf + p.gamma + p.delta + 1.0);
            assert!((dual_hahn(1, x, &p).unwrap() - expected).abs() < 1e-12);
        }
        let zero = DualHahnParams::new(0.0, 0.0, 0.0);
        assert_eq!(dual_hahn(2, 1, &zero).unwrap(), 20.0);
    }

    #[test]
    fn dual_hahn_matches_exact_summation() {
        // Parameters of the embedded families at a = 53/3, b = 34/3, c = 1/6, N = 6.
        let (a, b, c, big_n) = (rat(53, 3), rat(34, 3), rat(1, 6), 6i64);
        let mut triples = Vec::new();
        for y in 0..=big_n {
            let yr = rat(y, 1);
            triples.push((&b + &yr - rat(1, 1), &a + &yr, -&yr - rat(1, 1), y as u32));
        }
        for m in 0..=big_n {
            let mr = rat(m, 1);
            triples.push((
                &mr + &c + rat(big_n - 1, 1),
                &mr + &b + rat(big_n, 1),
                &mr - rat(big_n + 1, 1),
                (big_n - m) as u32,
            ));
        }
        for (al, de, ga, xmax) in triples {
            let p = DualHahnParams::new(al.to_f64().unwrap(), de.to_f64().unwrap(), ga.to_f64().unwrap());
            for n in 0..=12u32 {
                for x in 0..=xmax {
                    let exact = dual_hahn_exact(n, x, &al, &de, &ga).to_f64().unwrap();
                    let got = dual_hahn(n, x, &p).unwrap();
                    assert!((got - exact).abs() <= 1e-10 * exact.abs().max(1.0), "n={n} x={x}: {got} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn weight_first_values() {
        let p = DualHahnParams::new(0.3, 1.7, 2.2);
        assert_eq!(weight_w(0, &p).unwrap(), 1.0);
        let DualHahnParams { alpha, delta, gamma } = p;
        let expected = -(gamma + delta + 1.0) * (gamma / 2.0 + delta / 2.0 + 1.5) * (alpha + 1.0) * (gamma + 1.0)
            / ((gamma / 2.0 + delta / 2.0 + 0.5) * (gamma + delta - alpha + 1.0) * (delta + 1.0));
        assert!((weight_w(1, &p).unwrap() - expected).abs() < 1e-13 * expected.abs());
    }

    #[test]
    fn norm_ratio_identity() {
        let p = DualHahnParams::new(-7.0, 17.5, 3.25);
        let norms = DualHahnNorms::new(&p).unwrap();
        let h0 = norms.h(0);
        for n in 0..6 {
            let expected = pochhammer(1.0, n)
                * pochhammer(p.alpha + 1.0, n)
                * pochhammer(p.gamma + 1.0, n)
                * pochhammer(p.alpha - p.delta + 1.0, n);
            assert!((norms.h(n) / h0 - expected).abs() <= 1e-12 * expected.abs());
        }
        assert_eq!(norm_h(0, &p).unwrap(), h0);
    }

    /// Univariate orthogonality with the truncation carried either by α or by γ.
    fn orthogonality_defect(p: &DualHahnParams, points: u32) -> f64 {
        let norms = DualHahnNorms::new(p).unwrap();
        let mut worst: f64 = 0.0;
        for n in 0..points {
            for m in 0..points {
                let s = crate::summation::compensated_sum(
                    (0..points)
                        .map(|x| weight_w(x, p).unwrap() * dual_hahn(n, x, p).unwrap() * dual_hahn(m, x, p).unwrap()),
                );
                let expected = if n == m { norms.h(n) } else { 0.0 };
                let scale = (norms.h(n) * norms.h(m)).abs().sqrt();
                worst = worst.max((s - expected).abs() / scale);
            }
        }
        worst
    }

    #[test]
    fn orthogonality_both_truncation_slots() {
        let (a, b) = (53.0 / 3.0, 34.0 / 3.0);
        for y in 0..=6u32 {
            let yf = f64::from(y);
            let p = DualHahnParams::new(b + yf - 1.0, a + yf, -yf - 1.0);
            assert!(orthogonality_defect(&p, y + 1) < 1e-10, "gamma slot, y={y}");
            assert!(orthogonality_defect(&p.swapped(), y + 1) < 1e-10, "alpha slot, y={y}");
        }
    }

    #[test]
    fn three_term_recurrence() {
        // α + 1 = -K truncation, γ, δ > -1.
        let k = 5u32;
        let kf = f64::from(k);
        let p = DualHahnParams::new(-kf - 1.0, 16.3, 5.2);
        let norms = DualHahnNorms::new(&p).unwrap();
        let dt = |n: i64, x: u32| -> f64 {
            if n < 0 || n > i64::from(k) {
                0.0
            } else {
                dual_hahn_orthonormal(n as u32, x, &p, &norms).unwrap()
            }
        };
        let (g, d) = (p.gamma, p.delta);
        for x in 0..=k {
            let xf = f64::from(x);
            for n in 0..=i64::from(k) {
                let nf = n as f64;
                let lhs = -xf * (xf + d + g + 1.0) * dt(n, x);
                let up = ((nf + 1.0) * (nf + g + 1.0) * (kf - nf) * (d + kf - nf)).max(0.0).sqrt();
                let down = (nf * (nf + g) * (kf - nf + 1.0) * (d + 1.0 + kf - nf)).max(0.0).sqrt();
                let diag = (nf + g + 1.0) * (kf - nf) + nf * (d + kf - nf + 1.0);
                let rhs = up * dt(n + 1, x) - diag * dt(n, x) + down * dt(n - 1, x);
                assert!((lhs - rhs).abs() < 1e-8 * lhs.abs().max(1.0), "x={x} n={n}: {lhs} vs {rhs}");
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn pochhammer_splits(a in -20.0f64..20.0, n in 0u32..=10, m in 0u32..=10) {
                let whole = pochhammer(a, n + m);
                let split = pochhammer(a, n) * pochhammer(a + f64::from(n), m);
                prop_assert!((whole - split).abs() <= 1e-12 * whole.abs().max(split.abs()).max(1e-300));
            }

            #[test]
            fn pochhammer_splits_exactly(p in -40i64..40, q in 1i64..12, n in 0u32..=10, m in 0u32..=10) {
                let a = rat(p, q);
                let shifted = &a + rat(i64::from(n), 1);
                prop_assert_eq!(poch_exact(&a, n + m), poch_exact(&a, n) * poch_exact(&shifted, m));
            }

            #[test]
            fn signed_log_roundtrip(v in -1e200f64..1e200) {
                let s = SignedLog::from_f64(v);
                prop_assert!((s.value() - v).abs() <= 1e-12 * v.abs());
            }
        }
    }
}
