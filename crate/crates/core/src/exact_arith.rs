//! Exact rational and Gaussian-rational scalars, plus the floating complex type.
//!
//! The exact tower is [`Rational`] ⊂ [`GaussianRational`]. Conversion to the
//! floating type [`ComplexFloat`] is explicit and one-way; nothing in this
//! crate promotes an exact value to a float behind the caller's back.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub use num_complex::Complex64 as ComplexFloat;
pub use num_rational::BigRational as Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("{0} is not a perfect square")]
    NotAPerfectSquare(Rational),
    #[error("{value} is not a perfect {degree}-th power")]
    NotAPerfectPower { value: Rational, degree: u32 },
    #[error("value {0} does not have unit modulus")]
    NotUnimodular(String),
}

/// `n / d` as a canonical rational. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Formats a rational as `num/den`, or just `num` when the denominator is 1.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `num`, `num/den`, `-num/den` (surrounding whitespace allowed).
pub fn parse_rational(s: &str) -> Result<Rational, ArithError> {
    let s = s.trim();
    let bad = || ArithError::Domain(format!("cannot parse rational from {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(ArithError::DivisionByZero);
    }
    Ok(Rational::new(n, d))
}

/// An element of ℚ(i).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GaussianRational {
    pub re: Rational,
    pub im: Rational,
}

impl GaussianRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        Self { re, im }
    }

    pub fn real(re: Rational) -> Self {
        Self {
            re,
            im: Rational::zero(),
        }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        Self::new(int(re), int(im))
    }

    pub fn i() -> Self {
        Self::from_ints(0, 1)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    /// |w|² = re² + im².
    pub fn norm_sqr(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn inv(&self) -> Result<Self, ArithError> {
        let n = self.norm_sqr();
        if n.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        Ok(Self::new(&self.re / &n, -&self.im / &n))
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, ArithError> {
        Ok(self * &rhs.inv()?)
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Self::new(&self.re * r, &self.im * r)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn to_float(&self) -> ComplexFloat {
        ComplexFloat::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }

    /// Parses `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i` with rational `a`, `b`.
    pub fn parse(s: &str) -> Result<Self, ArithError> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || ArithError::Domain(format!("cannot parse Gaussian rational from {s:?}"));
        if t.is_empty() {
            return Err(bad());
        }
        let Some(body) = t.strip_suffix('i') else {
            return Ok(Self::real(parse_rational(&t)?));
        };
        // split at the last sign that is not at position 0
        let split = body
            .char_indices()
            .filter(|&(k, c)| k > 0 && (c == '+' || c == '-'))
            .map(|(k, _)| k)
            .last();
        let (re_part, im_part) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("", body),
        };
        let im = match im_part {
            "" | "+" => Rational::one(),
            "-" => -Rational::one(),
            other => parse_rational(other.strip_prefix('+').unwrap_or(other))?,
        };
        let re = if re_part.is_empty() {
            Rational::zero()
        } else {
            parse_rational(re_part).map_err(|_| bad())?
        };
        Ok(Self::new(re, im))
    }
}

impl fmt::Debug for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", format_rational(&self.re)),
            (true, false) => write!(f, "{}i", format_rational(&self.im)),
            (false, false) => {
                let sign = if self.im.is_negative() { '-' } else { '+' };
                write!(
                    f,
                    "{}{}{}i",
                    format_rational(&self.re),
                    sign,
                    format_rational(&self.im.abs())
                )
            }
        }
    }
}

impl From<Rational> for GaussianRational {
    fn from(r: Rational) -> Self {
        Self::real(r)
    }
}

impl From<i64> for GaussianRational {
    fn from(n: i64) -> Self {
        Self::real(int(n))
    }
}

impl Zero for GaussianRational {
    fn zero() -> Self {
        Self::default()
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for GaussianRational {
    fn one() -> Self {
        Self::from_ints(1, 0)
    }
}

impl Add<&GaussianRational> for &GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub<&GaussianRational> for &GaussianRational {
    type Output = GaussianRational;
    fn sub(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul<&GaussianRational> for &GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-&self.re, -&self.im)
    }
}

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-self.re, -self.im)
    }
}

macro_rules! forward_owned_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<GaussianRational> for GaussianRational {
            type Output = GaussianRational;
            fn $m(self, rhs: GaussianRational) -> GaussianRational {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&GaussianRational> for GaussianRational {
            type Output = GaussianRational;
            fn $m(self, rhs: &GaussianRational) -> GaussianRational {
                (&self).$m(rhs)
            }
        }
        impl $tr<GaussianRational> for &GaussianRational {
            type Output = GaussianRational;
            fn $m(self, rhs: GaussianRational) -> GaussianRational {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);

impl AddAssign<&GaussianRational> for GaussianRational {
    fn add_assign(&mut self, rhs: &GaussianRational) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl SubAssign<&GaussianRational> for GaussianRational {
    fn sub_assign(&mut self, rhs: &GaussianRational) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl MulAssign<&GaussianRational> for GaussianRational {
    fn mul_assign(&mut self, rhs: &GaussianRational) {
        *self = &*self * rhs;
    }
}

/// A Gaussian rational of modulus exactly one.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UnimodularPhase {
    value: GaussianRational,
}

impl UnimodularPhase {
    pub fn new(value: GaussianRational) -> Result<Self, ArithError> {
        if value.norm_sqr().is_one() {
            Ok(Self { value })
        } else {
            Err(ArithError::NotUnimodular(value.to_string()))
        }
    }

    pub fn identity() -> Self {
        Self {
            value: GaussianRational::one(),
        }
    }

    pub fn value(&self) -> &GaussianRational {
        &self.value
    }

    pub fn conj(&self) -> Self {
        Self {
            value: self.value.conj(),
        }
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self {
            value: &self.value * &other.value,
        }
    }
}

/// Exact point on the unit circle from the tangent-half-angle parameter:
/// `((1 − t²) + 2t·i) / (1 + t²)`.
pub fn phase_from_parameter(t: &Rational) -> UnimodularPhase {
    let t2 = t * t;
    let den = Rational::one() + &t2;
    let re = (Rational::one() - &t2) / &den;
    let im = (int(2) * t) / &den;
    UnimodularPhase {
        value: GaussianRational::new(re, im),
    }
}

fn exact_int_root(n: &BigInt, k: u32) -> Option<BigInt> {
    let r = n.nth_root(k);
    if num_traits::pow(r.clone(), k as usize) == *n {
        Some(r)
    } else {
        None
    }
}

/// Exact k-th root of a nonnegative rational, if it is a perfect k-th power.
pub fn nth_root_exact(r: &Rational, k: u32) -> Result<Rational, ArithError> {
    if k == 0 {
        return Err(ArithError::Domain("zeroth root".into()));
    }
    if r.is_negative() {
        return Err(ArithError::Domain(format!(
            "root of negative value {}",
            format_rational(r)
        )));
    }
    match (exact_int_root(r.numer(), k), exact_int_root(r.denom(), k)) {
        (Some(n), Some(d)) => Ok(Rational::new(n, d)),
        _ => Err(ArithError::NotAPerfectPower {
            value: r.clone(),
            degree: k,
        }),
    }
}

/// Exact square root, or [`ArithError::NotAPerfectSquare`] so the caller can
/// fall back to the floating path.
pub fn sqrt_exact(r: &Rational) -> Result<Rational, ArithError> {
    nth_root_exact(r, 2).map_err(|e| match e {
        ArithError::NotAPerfectPower { value, .. } => ArithError::NotAPerfectSquare(value),
        other => other,
    })
}

/// Positive real n-th root of a positive double.
pub fn nth_root_float(r: f64, n: u32) -> Result<f64, ArithError> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(ArithError::Domain(format!("nth root of nonpositive {r}")));
    }
    if n == 0 {
        return Err(ArithError::Domain("zeroth root".into()));
    }
    let mut x = r.powf(1.0 / n as f64);
    // one Newton polish step
    let nf = n as f64;
    let xn1 = x.powi(n as i32 - 1);
    if xn1 > 0.0 {
        x -= (x * xn1 - r) / (nf * xn1);
    }
    Ok(x)
}

/// Scalars the catalog formulas are written over: exact ℚ(i) or `f64` complex.
pub trait ComplexScalar:
    Clone + fmt::Debug + PartialEq + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn from_real_rational(r: &Rational) -> Self;
    fn imag_unit() -> Self;
    fn conj(&self) -> Self;
    fn norm_sqr_value(&self) -> Self;

    fn from_i64(n: i64) -> Self {
        Self::from_real_rational(&int(n))
    }
}

impl ComplexScalar for GaussianRational {
    fn from_real_rational(r: &Rational) -> Self {
        Self::real(r.clone())
    }
    fn imag_unit() -> Self {
        Self::i()
    }
    fn conj(&self) -> Self {
        GaussianRational::conj(self)
    }
    fn norm_sqr_value(&self) -> Self {
        Self::real(self.norm_sqr())
    }
}

impl ComplexScalar for ComplexFloat {
    fn from_real_rational(r: &Rational) -> Self {
        ComplexFloat::new(rational_to_f64(r), 0.0)
    }
    fn imag_unit() -> Self {
        ComplexFloat::i()
    }
    fn conj(&self) -> Self {
        ComplexFloat::conj(self)
    }
    fn norm_sqr_value(&self) -> Self {
        ComplexFloat::new(self.norm_sqr(), 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_rational() -> impl Strategy<Value = Rational> {
        (-1000i64..1000, 1i64..200).prop_map(|(n, d)| rat(n, d))
    }

    #[test]
    fn phase_examples() {
        assert_eq!(*phase_from_parameter(&int(0)).value(), GaussianRational::one());
        assert_eq!(*phase_from_parameter(&int(1)).value(), GaussianRational::i());
        let half = phase_from_parameter(&rat(1, 2));
        assert_eq!(*half.value(), GaussianRational::new(rat(3, 5), rat(4, 5)));
        assert!(half.value().norm_sqr().is_one());
    }

    #[test]
    fn sqrt_examples() {
        assert_eq!(sqrt_exact(&rat(9, 4)).unwrap(), rat(3, 2));
        assert_eq!(sqrt_exact(&int(0)).unwrap(), int(0));
        assert!(matches!(
            sqrt_exact(&int(2)),
            Err(ArithError::NotAPerfectSquare(_))
        ));
        assert!(matches!(sqrt_exact(&int(-4)), Err(ArithError::Domain(_))));
    }

    #[test]
    fn nth_root_float_examples() {
        assert!((nth_root_float(16.0, 4).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(nth_root_float(1.0, 4).unwrap(), 1.0);
        // q-value for the α = 1 target (1,0,0,2): radicand 2 − 1·0 − 0 − 0 − 1 = 1
        assert_eq!(nth_root_float(2.0 - 1.0, 4).unwrap(), 1.0);
        assert!(nth_root_float(0.0, 2).is_err());
        assert!(nth_root_float(-3.0, 3).is_err());
        let r = 7.25;
        let x = nth_root_float(r, 4).unwrap();
        assert!((x.powi(4) - r).abs() <= 1e-12 * r);
    }

    #[test]
    fn gaussian_division_by_zero_is_error() {
        let z = GaussianRational::zero();
        assert_eq!(z.inv(), Err(ArithError::DivisionByZero));
        assert!(GaussianRational::one().checked_div(&z).is_err());
    }

    #[test]
    fn gaussian_parse_display() {
        for s in ["3/5+4/5i", "-1", "2i", "-7/3-1/2i", "0"] {
            let g = GaussianRational::parse(s).unwrap();
            assert_eq!(g.to_string(), s);
        }
        assert_eq!(GaussianRational::parse("i").unwrap(), GaussianRational::i());
        assert_eq!(GaussianRational::parse("1-i").unwrap(), GaussianRational::from_ints(1, -1));
        assert_eq!(GaussianRational::parse("-i").unwrap(), GaussianRational::from_ints(0, -1));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn rational_field_laws(a in arb_rational(), b in arb_rational(), c in arb_rational()) {
            prop_assert_eq!((&a + &b) + &c, &a + (&b + &c));
            prop_assert_eq!(&a * (&b + &c), &a * &b + &a * &c);
            prop_assert!(*(&a + &b).denom() > BigInt::zero());
        }

        #[test]
        fn phases_are_unimodular_and_closed(t in arb_rational(), s in arb_rational()) {
            let p = phase_from_parameter(&t);
            prop_assert!(p.value().norm_sqr().is_one());
            let prod = p.compose(&phase_from_parameter(&s));
            prop_assert!(UnimodularPhase::new(prod.value().clone()).is_ok());
        }

        #[test]
        fn float_conversion_is_tight(n in 1i64..1_000_000_000, d in 1i64..1_000_000, sign in any::<bool>()) {
            let r = if sign { rat(n, d) } else { rat(-n, d) };
            let mag = (n as f64 / d as f64).abs();
            prop_assume!((1e-6..=1e6).contains(&mag));
            let g = GaussianRational::new(r.clone(), r.clone() * int(3));
            let f = g.to_float();
            let exact = n as f64 / d as f64 * if sign { 1.0 } else { -1.0 };
            prop_assert!((f.re - exact).abs() <= 1e-15 * exact.abs() + f64::EPSILON * exact.abs());
            prop_assert!((f.im - 3.0 * exact).abs() <= 1e-15 * (3.0 * exact).abs() + f64::EPSILON * (3.0 * exact).abs());
        }

        #[test]
        fn conj_is_involution(a in arb_rational(), b in arb_rational()) {
            let g = GaussianRational::new(a, b);
            prop_assert_eq!(g.conj().conj(), g.clone());
            prop_assert!(!g.norm_sqr().is_negative());
        }
    }
}
