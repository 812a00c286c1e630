//! Exact q-series of the Tate curve `y^2 + xy = x^3 + a_4(q) x + a_6(q)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Power series `c_0 + c_1 q + ... + c_N q^N` with exact integer coefficients,
/// known modulo `q^{N+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntegerPowerSeries {
    coeffs: Vec<BigInt>,
}

impl IntegerPowerSeries {
    pub fn zero(order: usize) -> Self {
        IntegerPowerSeries {
            coeffs: vec![BigInt::zero(); order + 1],
        }
    }

    pub fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = BigInt::one();
        s
    }

    /// `q^k` truncated at `order` (zero if `k > order`).
    pub fn monomial(k: usize, order: usize) -> Self {
        let mut s = Self::zero(order);
        if k <= order {
            s.coeffs[k] = BigInt::one();
        }
        s
    }

    pub fn from_coeffs<T: Into<BigInt>>(coeffs: impl IntoIterator<Item = T>) -> Self {
        let coeffs: Vec<BigInt> = coeffs.into_iter().map(Into::into).collect();
        assert!(!coeffs.is_empty(), "a series needs at least the constant term");
        IntegerPowerSeries { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> &BigInt {
        &self.coeffs[n]
    }

    pub fn truncate(&self, order: usize) -> Self {
        assert!(order <= self.order(), "cannot extend a truncated series");
        IntegerPowerSeries {
            coeffs: self.coeffs[..=order].to_vec(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        IntegerPowerSeries {
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    pub fn scale_i64(&self, k: i64) -> Self {
        self.scale(&BigInt::from(k))
    }

    /// Exact division of every coefficient by `d`.
    pub fn div_exact_int(&self, d: &BigInt) -> Result<Self> {
        if d.is_zero() {
            return Err(Error::NotDivisible("division by zero".into()));
        }
        let mut out = Vec::with_capacity(self.coeffs.len());
        for (n, c) in self.coeffs.iter().enumerate() {
            let (quo, rem) = c.div_rem(d);
            if !rem.is_zero() {
                return Err(Error::NotDivisible(format!("coefficient of q^{n} ({c}) by {d}")));
            }
            out.push(quo);
        }
        Ok(IntegerPowerSeries { coeffs: out })
    }

    /// Exact quotient `self / divisor`; the divisor's constant term must
    /// divide every intermediate coefficient.
    pub fn div_exact_series(&self, divisor: &IntegerPowerSeries) -> Result<Self> {
        let order = self.order().min(divisor.order());
        let lead = &divisor.coeffs[0];
        if lead.is_zero() {
            return Err(Error::NotDivisible("divisor has zero constant term".into()));
        }
        let mut out: Vec<BigInt> = Vec::with_capacity(order + 1);
        for n in 0..=order {
            let mut acc = self.coeffs[n].clone();
            for k in 1..=n {
                acc -= &divisor.coeffs[k] * &out[n - k];
            }
            let (quo, rem) = acc.div_rem(lead);
            if !rem.is_zero() {
                return Err(Error::NotDivisible(format!("coefficient of q^{n} by {lead}")));
            }
            out.push(quo);
        }
        Ok(IntegerPowerSeries { coeffs: out })
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.order());
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Numeric value at complex `q` (`|q| < 1`).
    pub fn eval(&self, q: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| {
            acc * q + c.to_f64().unwrap_or(f64::NAN)
        })
    }

    /// Coefficients as decimal strings (exact JSON representation).
    pub fn to_decimal_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(ToString::to_string).collect()
    }
}

impl fmt::Display for IntegerPowerSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            match n {
                0 => write!(f, "{a}")?,
                _ if a.is_one() => write!(f, "q^{n}")?,
                _ => write!(f, "{a}q^{n}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(q^{})", self.order() + 1)
    }
}

impl<'a> Add<&'a IntegerPowerSeries> for &'a IntegerPowerSeries {
    type Output = IntegerPowerSeries;
    fn add(self, rhs: &IntegerPowerSeries) -> IntegerPowerSeries {
        let order = self.order().min(rhs.order());
        IntegerPowerSeries {
            coeffs: (0..=order).map(|n| &self.coeffs[n] + &rhs.coeffs[n]).collect(),
        }
    }
}

impl<'a> Sub<&'a IntegerPowerSeries> for &'a IntegerPowerSeries {
    type Output = IntegerPowerSeries;
    fn sub(self, rhs: &IntegerPowerSeries) -> IntegerPowerSeries {
        let order = self.order().min(rhs.order());
        IntegerPowerSeries {
            coeffs: (0..=order).map(|n| &self.coeffs[n] - &rhs.coeffs[n]).collect(),
        }
    }
}

impl Neg for &IntegerPowerSeries {
    type Output = IntegerPowerSeries;
    fn neg(self) -> IntegerPowerSeries {
        IntegerPowerSeries {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl<'a> Mul<&'a IntegerPowerSeries> for &'a IntegerPowerSeries {
    type Output = IntegerPowerSeries;
    fn mul(self, rhs: &IntegerPowerSeries) -> IntegerPowerSeries {
        let order = self.order().min(rhs.order());
        let mut out = vec![BigInt::zero(); order + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(order + 1 - i) {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        IntegerPowerSeries { coeffs: out }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for IntegerPowerSeries {
            type Output = IntegerPowerSeries;
            fn $m(self, rhs: IntegerPowerSeries) -> IntegerPowerSeries {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// `s_k = sum_{n>=1} n^k q^n / (1 - q^n)`: coefficient of `q^n` is `sum_{d | n} d^k`.
pub fn s_k_series(k: u32, order: usize) -> IntegerPowerSeries {
    let mut s = IntegerPowerSeries::zero(order);
    for d in 1..=order {
        let dk = BigInt::from(d).pow(k);
        for n in (d..=order).step_by(d) {
            s.coeffs[n] += &dk;
        }
    }
    s
}

/// `a_4 = -5 s_3`.
pub fn a4_series(order: usize) -> IntegerPowerSeries {
    s_k_series(3, order).scale_i64(-5)
}

/// `a_6 = -(5 s_3 + 7 s_5) / 12`, divided exactly.
pub fn a6_series(order: usize) -> Result<IntegerPowerSeries> {
    let num = &s_k_series(3, order).scale_i64(5) + &s_k_series(5, order).scale_i64(7);
    (-&num).div_exact_int(&BigInt::from(12))
}

/// `q prod_{m>=1} (1 - q^m)^24`.
pub fn delta_series(order: usize) -> IntegerPowerSeries {
    // prod (1 - q^m) through order, then the 24th power
    let mut euler = IntegerPowerSeries::one(order);
    for m in 1..=order {
        let factor = &IntegerPowerSeries::one(order) - &IntegerPowerSeries::monomial(m, order);
        euler = &euler * &factor;
    }
    &IntegerPowerSeries::monomial(1, order) * &euler.pow(24)
}

/// Discriminant of `y^2 + xy = x^3 + a_4 x + a_6` through the standard
/// `b_2, b_4, b_6` / `c_4, c_6` invariants: `Delta = (c_4^3 - c_6^2) / 1728`.
pub fn discriminant_series(order: usize) -> Result<IntegerPowerSeries> {
    let a4 = a4_series(order);
    let a6 = a6_series(order)?;
    // a_1 = 1, a_2 = a_3 = 0
    let one = IntegerPowerSeries::one(order);
    let b2 = one.clone();
    let b4 = a4.scale_i64(2);
    let b6 = a6.scale_i64(4);
    let c4 = &(&b2 * &b2) - &b4.scale_i64(24);
    let c6 = &(&(-&b2.pow(3)) + &(&b2 * &b4).scale_i64(36)) - &b6.scale_i64(216);
    let num = &c4.pow(3) - &c6.pow(2);
    num.div_exact_int(&BigInt::from(1728))
}

/// Same discriminant via `-b_2^2 b_8 - 8 b_4^3 - 27 b_6^2 + 9 b_2 b_4 b_6`.
pub fn discriminant_series_b(order: usize) -> Result<IntegerPowerSeries> {
    let a4 = a4_series(order);
    let a6 = a6_series(order)?;
    let b2 = IntegerPowerSeries::one(order);
    let b4 = a4.scale_i64(2);
    let b6 = a6.scale_i64(4);
    let b8 = &a6 - &(&a4 * &a4);
    let t1 = -&(&(&b2 * &b2) * &b8);
    let t2 = b4.pow(3).scale_i64(8);
    let t3 = b6.pow(2).scale_i64(27);
    let t4 = (&(&b2 * &b4) * &b6).scale_i64(9);
    Ok(&(&(&t1 - &t2) - &t3) + &t4)
}

/// Distance guard for the poles `q^n` of `X` and `Y`.
pub const POLE_GUARD: f64 = 1e-6;

/// Terms needed so that `|q|^n` falls below double-precision relevance.
pub fn default_terms(q: Complex64) -> usize {
    let r = q.norm();
    ((1e-18f64).ln() / r.ln()).ceil().max(1.0) as usize + 1
}

/// Moves `z` into `|q|^{1/2} < |z| <= |q|^{-1/2}` using `z -> q z`.
fn reduce_to_annulus(mut z: Complex64, q: Complex64) -> Complex64 {
    let rq = q.norm();
    let (lo, hi) = (rq.sqrt(), rq.sqrt().recip());
    let mut guard = 0;
    while z.norm() > hi && guard < 10_000 {
        z *= q;
        guard += 1;
    }
    while z.norm() <= lo && guard < 10_000 {
        z /= q;
        guard += 1;
    }
    z
}

fn check_inputs(z: Complex64, q: Complex64) -> Result<()> {
    let rq = q.norm();
    if !(rq > 0.0 && rq < 1.0) {
        return Err(Error::InvalidSpec(format!("|q| = {rq} must lie in (0, 1)")));
    }
    if z.norm() == 0.0 || !z.is_finite() {
        return Err(Error::PoleTooClose { distance: 0.0 });
    }
    Ok(())
}

/// Distance check against `1` (after reduction, the only pole `q^n` near
/// the fundamental annulus within relative reach is `z = 1`; the other poles
/// `q^{±1}` sit on its boundary).
fn guard_poles(z: Complex64, q: Complex64) -> Result<()> {
    for p in [Complex64::new(1.0, 0.0), q, q.inv()] {
        let d = (z - p).norm();
        if d < POLE_GUARD {
            return Err(Error::PoleTooClose { distance: d });
        }
    }
    Ok(())
}

/// `X(z) = z/(1-z)^2 + sum_{n>=1} [q^n z/(1-q^n z)^2 + q^n z^{-1}/(1-q^n z^{-1})^2 - 2 q^n/(1-q^n)^2]`.
pub fn eval_x(z: Complex64, q: Complex64, terms: usize) -> Result<Complex64> {
    check_inputs(z, q)?;
    let z = reduce_to_annulus(z, q);
    guard_poles(z, q)?;
    let one = Complex64::new(1.0, 0.0);
    let zi = z.inv();
    let mut sum = z / (one - z).powu(2);
    let mut qn = one;
    for _ in 1..=terms {
        qn *= q;
        let u = qn * z;
        let v = qn * zi;
        sum += u / (one - u).powu(2) + v / (one - v).powu(2) - qn / (one - qn).powu(2) * 2.0;
    }
    Ok(sum)
}

/// `Y(z) = z^2/(1-z)^3 + sum_{n>=1} [(q^n z)^2/(1-q^n z)^3 - q^n z^{-1}/(1-q^n z^{-1})^3 + q^n/(1-q^n)^2]`.
///
/// The `z^{-1}` terms enter with a minus sign: they are the `n < 0` terms
/// of `sum_{n in Z} (q^n z)^2 / (1 - q^n z)^3`.
pub fn eval_y(z: Complex64, q: Complex64, terms: usize) -> Result<Complex64> {
    check_inputs(z, q)?;
    let z = reduce_to_annulus(z, q);
    guard_poles(z, q)?;
    let one = Complex64::new(1.0, 0.0);
    let zi = z.inv();
    let mut sum = z * z / (one - z).powu(3);
    let mut qn = one;
    for _ in 1..=terms {
        qn *= q;
        let u = qn * z;
        let v = qn * zi;
        sum += u * u / (one - u).powu(3) - v / (one - v).powu(3) + qn / (one - qn).powu(2);
    }
    Ok(sum)
}

/// `Y^2 + XY - X^3 - a_4 X - a_6` at `(X(z), Y(z))`.
pub fn weierstrass_residual(z: Complex64, q: Complex64, terms: usize) -> Result<Complex64> {
    let x = eval_x(z, q, terms)?;
    let y = eval_y(z, q, terms)?;
    let order = terms.max(8);
    let a4 = a4_series(order).eval(q);
    let a6 = a6_series(order)?.eval(q);
    Ok(y * y + x * y - x * x * x - a4 * x - a6)
}
