//! Sparse polynomials over ℚ(i) in holomorphic variables `z1..zn` and their
//! formal conjugates `zb1..zbn`.
//!
//! All `2n` variables are treated as independent symbols. Real-valued
//! defining functions are ordinary polynomials whose coefficients are
//! conjugation-symmetric; `Re z` is stored as `(z + zb)/2`.
//!
//! # Literal format
//!
//! A polynomial prints as terms joined by ` + `, each term a parenthesised
//! Gaussian-rational coefficient followed by `*var^exp` factors, for example
//! `(3/5+4/5i)*z1^2*zb1^1 + (-1)*z4^1`. The zero polynomial prints as `0`.
//! The parser also accepts bare rational coefficients, omitted coefficients,
//! omitted exponents and `-` between terms.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::exact_arith::{ArithError, ComplexFloat, GaussianRational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("variable spaces differ: {0} vs {1} holomorphic variables")]
    SpaceMismatch(usize, usize),
    #[error("expected {expected} values, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("variable index {0} out of range")]
    VariableOutOfRange(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// `n` holomorphic variables; index `i + n` is the conjugate of index `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VariableSpace {
    n: usize,
}

impl VariableSpace {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_vars(&self) -> usize {
        2 * self.n
    }

    pub fn conj_index(&self, var: usize) -> usize {
        if var < self.n {
            var + self.n
        } else {
            var - self.n
        }
    }

    pub fn name(&self, var: usize) -> String {
        if var < self.n {
            format!("z{}", var + 1)
        } else {
            format!("zb{}", var - self.n + 1)
        }
    }

    pub fn names(&self) -> Vec<String> {
        (0..self.num_vars()).map(|v| self.name(v)).collect()
    }
}

/// Exponent vector of length `2n`; the derived order is lexicographic.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one(space: VariableSpace) -> Self {
        Self(vec![0; space.num_vars()])
    }

    pub fn from_exponents(exponents: Vec<u32>) -> Self {
        Self(exponents)
    }

    pub fn var(space: VariableSpace, var: usize) -> Self {
        let mut e = vec![0; space.num_vars()];
        e[var] = 1;
        Self(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Degree in the holomorphic variables.
    pub fn z_degree(&self) -> u32 {
        self.0[..self.0.len() / 2].iter().sum()
    }

    /// Degree in the conjugate variables.
    pub fn zbar_degree(&self) -> u32 {
        self.0[self.0.len() / 2..].iter().sum()
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Swaps the holomorphic and conjugate halves.
    pub fn conjugate(&self) -> Self {
        let n = self.0.len() / 2;
        let mut e = self.0[n..].to_vec();
        e.extend_from_slice(&self.0[..n]);
        Self(e)
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct HermitianPolynomial {
    space: VariableSpace,
    terms: BTreeMap<Monomial, GaussianRational>,
}

impl HermitianPolynomial {
    pub fn zero(space: VariableSpace) -> Self {
        Self {
            space,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(space: VariableSpace, c: GaussianRational) -> Self {
        let mut p = Self::zero(space);
        p.add_term(Monomial::one(space), c);
        p
    }

    pub fn one(space: VariableSpace) -> Self {
        Self::constant(space, GaussianRational::one())
    }

    /// The variable with index `var` (conjugates have index `i + n`).
    pub fn var(space: VariableSpace, var: usize) -> Self {
        assert!(var < space.num_vars(), "variable {var} out of range");
        let mut p = Self::zero(space);
        p.add_term(Monomial::var(space, var), GaussianRational::one());
        p
    }

    /// Holomorphic variable `z_{i+1}`.
    pub fn z(space: VariableSpace, i: usize) -> Self {
        assert!(i < space.n());
        Self::var(space, i)
    }

    /// Conjugate variable `zb_{i+1}`.
    pub fn zbar(space: VariableSpace, i: usize) -> Self {
        assert!(i < space.n());
        Self::var(space, i + space.n())
    }

    /// `Re z_{i+1} = (z + zb)/2`.
    pub fn re_z(space: VariableSpace, i: usize) -> Self {
        (&Self::z(space, i) + &Self::zbar(space, i)).scale_rational(&crate::exact_arith::rat(1, 2))
    }

    /// `|z_{i+1}|² = z·zb`.
    pub fn abs2(space: VariableSpace, i: usize) -> Self {
        &Self::z(space, i) * &Self::zbar(space, i)
    }

    pub fn from_terms(
        space: VariableSpace,
        terms: impl IntoIterator<Item = (Monomial, GaussianRational)>,
    ) -> Self {
        let mut p = Self::zero(space);
        for (m, c) in terms {
            assert_eq!(m.0.len(), space.num_vars(), "monomial arity");
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn space(&self) -> VariableSpace {
        self.space
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> GaussianRational {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn first_monomial(&self) -> Option<&Monomial> {
        self.terms.keys().next()
    }

    pub fn constant_term(&self) -> GaussianRational {
        self.coefficient(&Monomial::one(self.space))
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.total_degree() == 0)
    }

    /// Total degree; `None` stands for the degree −∞ of the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::total_degree).max()
    }

    /// True when no conjugate variable occurs.
    pub fn is_holomorphic(&self) -> bool {
        self.terms.keys().all(|m| m.zbar_degree() == 0)
    }

    /// Conjugation-symmetric coefficients: `c(z^a zb^b) = conj(c(z^b zb^a))`.
    pub fn is_real_valued(&self) -> bool {
        self.terms
            .iter()
            .all(|(m, c)| self.coefficient(&m.conjugate()) == c.conj())
    }

    fn check_space(&self, other: &Self) -> Result<(), PolyError> {
        if self.space == other.space {
            Ok(())
        } else {
            Err(PolyError::SpaceMismatch(self.space.n(), other.space.n()))
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_space(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.try_add(&-other)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_space(other)?;
        let mut out = Self::zero(self.space);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.space);
        }
        Self {
            space: self.space,
            terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        }
    }

    pub fn scale_rational(&self, r: &Rational) -> Self {
        self.scale(&GaussianRational::real(r.clone()))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.space);
        let mut base = self.clone();
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

    /// Swaps `z_i ↔ zb_i` and conjugates every coefficient.
    pub fn conjugate(&self) -> Self {
        Self {
            space: self.space,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.conjugate(), c.conj()))
                .collect(),
        }
    }

    /// Formal partial derivative in variable `var` (index in `0..2n`).
    pub fn partial(&self, var: usize) -> Result<Self, PolyError> {
        if var >= self.space.num_vars() {
            return Err(PolyError::VariableOutOfRange(var));
        }
        let mut out = Self::zero(self.space);
        for (m, c) in &self.terms {
            let e = m.0[var];
            if e == 0 {
                continue;
            }
            let mut dm = m.0.clone();
            dm[var] -= 1;
            out.add_term(Monomial(dm), c.scale(&crate::exact_arith::int(e as i64)));
        }
        Ok(out)
    }

    /// Terms of z-degree `k` and zb-degree `l`.
    pub fn bigraded_component(&self, k: u32, l: u32) -> Self {
        Self {
            space: self.space,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.z_degree() == k && m.zbar_degree() == l)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// The distinct `(z-degree, zb-degree)` pairs present.
    pub fn bidegrees(&self) -> Vec<(u32, u32)> {
        let mut v: Vec<(u32, u32)> = self
            .terms
            .keys()
            .map(|m| (m.z_degree(), m.zbar_degree()))
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Substitutes `images[v]` for variable `v` (all `2n` variables).
    pub fn substitute(&self, images: &[HermitianPolynomial]) -> Result<Self, PolyError> {
        if images.len() != self.space.num_vars() {
            return Err(PolyError::Arity {
                expected: self.space.num_vars(),
                got: images.len(),
            });
        }
        let target = match images.first() {
            Some(p) => p.space,
            None => self.space,
        };
        if let Some(bad) = images.iter().find(|p| p.space != target) {
            return Err(PolyError::SpaceMismatch(target.n(), bad.space.n()));
        }
        let mut powers: HashMap<(usize, u32), HermitianPolynomial> = HashMap::new();
        let mut out = Self::zero(target);
        for (m, c) in &self.terms {
            let mut term = Self::constant(target, c.clone());
            for (v, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let pw = powers
                    .entry((v, e))
                    .or_insert_with(|| images[v].pow(e));
                term = &term * pw;
                if term.is_zero() {
                    break;
                }
            }
            for (tm, tc) in term.terms {
                out.add_term(tm, tc);
            }
        }
        Ok(out)
    }

    /// Exact evaluation at a point of `n` holomorphic values; conjugate
    /// variables receive the conjugated values.
    pub fn evaluate(&self, point: &[GaussianRational]) -> Result<GaussianRational, PolyError> {
        let n = self.space.n();
        if point.len() != n {
            return Err(PolyError::Arity {
                expected: n,
                got: point.len(),
            });
        }
        let vals: Vec<GaussianRational> = point
            .iter()
            .cloned()
            .chain(point.iter().map(GaussianRational::conj))
            .collect();
        let mut acc = GaussianRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t = &t * &vals[v].pow(e);
                }
            }
            acc += &t;
        }
        Ok(acc)
    }

    pub fn evaluate_float(&self, point: &[ComplexFloat]) -> Result<ComplexFloat, PolyError> {
        let n = self.space.n();
        if point.len() != n {
            return Err(PolyError::Arity {
                expected: n,
                got: point.len(),
            });
        }
        let vals: Vec<ComplexFloat> = point
            .iter()
            .copied()
            .chain(point.iter().map(|z| z.conj()))
            .collect();
        let mut acc = ComplexFloat::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut t = c.to_float();
            for (v, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t *= vals[v].powu(e);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Parses the literal format described in the module docs.
    pub fn parse(s: &str, space: VariableSpace) -> Result<Self, PolyError> {
        Parser::new(s, space).parse()
    }
}

impl fmt::Debug for HermitianPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HermitianPolynomial[n={}]({})", self.space.n(), self)
    }
}

impl fmt::Display for HermitianPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // descending order reads more naturally (highest z1 powers first)
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            for (v, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    write!(f, "*{}^{}", self.space.name(v), e)?;
                }
            }
        }
        Ok(())
    }
}

impl Add for &HermitianPolynomial {
    type Output = HermitianPolynomial;
    /// Panics on a variable-space mismatch; use [`HermitianPolynomial::try_add`] to recover.
    fn add(self, rhs: &HermitianPolynomial) -> HermitianPolynomial {
        self.try_add(rhs).expect("polynomial addition")
    }
}

impl Sub for &HermitianPolynomial {
    type Output = HermitianPolynomial;
    fn sub(self, rhs: &HermitianPolynomial) -> HermitianPolynomial {
        self.try_sub(rhs).expect("polynomial subtraction")
    }
}

impl Mul for &HermitianPolynomial {
    type Output = HermitianPolynomial;
    fn mul(self, rhs: &HermitianPolynomial) -> HermitianPolynomial {
        self.try_mul(rhs).expect("polynomial multiplication")
    }
}

impl Neg for &HermitianPolynomial {
    type Output = HermitianPolynomial;
    fn neg(self) -> HermitianPolynomial {
        HermitianPolynomial {
            space: self.space,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

macro_rules! owned_poly_ops {
    ($tr:ident, $m:ident) => {
        impl $tr for HermitianPolynomial {
            type Output = HermitianPolynomial;
            fn $m(self, rhs: HermitianPolynomial) -> HermitianPolynomial {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&HermitianPolynomial> for HermitianPolynomial {
            type Output = HermitianPolynomial;
            fn $m(self, rhs: &HermitianPolynomial) -> HermitianPolynomial {
                (&self).$m(rhs)
            }
        }
    };
}

owned_poly_ops!(Add, add);
owned_poly_ops!(Sub, sub);
owned_poly_ops!(Mul, mul);

impl Neg for HermitianPolynomial {
    type Output = HermitianPolynomial;
    fn neg(self) -> HermitianPolynomial {
        -&self
    }
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    space: VariableSpace,
    src: &'a str,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, space: VariableSpace) -> Self {
        Self {
            chars: src.chars().filter(|c| !c.is_whitespace()).collect(),
            pos: 0,
            space,
            src,
        }
    }

    fn err(&self, msg: &str) -> PolyError {
        PolyError::Parse(format!("{msg} at offset {} in {:?}", self.pos, self.src))
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<HermitianPolynomial, PolyError> {
        let mut out = HermitianPolynomial::zero(self.space);
        if self.chars == ['0'] {
            return Ok(out);
        }
        if self.chars.is_empty() {
            return Err(self.err("empty polynomial literal"));
        }
        let mut first = true;
        while self.pos < self.chars.len() {
            let mut sign = GaussianRational::one();
            match self.peek() {
                Some('+') => self.pos += 1,
                Some('-') => {
                    self.pos += 1;
                    sign = -sign;
                }
                _ if first => {}
                _ => return Err(self.err("expected '+' or '-' between terms")),
            }
            first = false;
            let (m, c) = self.term()?;
            out.add_term(m, &sign * &c);
        }
        Ok(out)
    }

    fn term(&mut self) -> Result<(Monomial, GaussianRational), PolyError> {
        let mut coeff = GaussianRational::one();
        let mut mono = Monomial::one(self.space);
        let mut need_factor = true;
        match self.peek() {
            Some('(') => {
                let close = self.chars[self.pos..]
                    .iter()
                    .position(|&c| c == ')')
                    .ok_or_else(|| self.err("unclosed '('"))?;
                let inner: String = self.chars[self.pos + 1..self.pos + close].iter().collect();
                coeff = GaussianRational::parse(&inner)?;
                self.pos += close + 1;
                need_factor = false;
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == '/') {
                    self.pos += 1;
                }
                let lit: String = self.chars[start..self.pos].iter().collect();
                coeff = GaussianRational::real(crate::exact_arith::parse_rational(&lit)?);
                need_factor = false;
            }
            _ => {}
        }
        loop {
            if need_factor {
                self.factor(&mut mono)?;
                need_factor = false;
            } else if self.peek() == Some('*') {
                self.pos += 1;
                need_factor = true;
            } else {
                break;
            }
        }
        Ok((mono, coeff))
    }

    fn factor(&mut self, mono: &mut Monomial) -> Result<(), PolyError> {
        if self.peek() != Some('z') {
            return Err(self.err("expected variable"));
        }
        self.pos += 1;
        let conj = if self.peek() == Some('b') {
            self.pos += 1;
            true
        } else {
            false
        };
        let idx = self.number()?;
        if idx == 0 || idx as usize > self.space.n() {
            return Err(PolyError::VariableOutOfRange(idx as usize));
        }
        let mut var = idx as usize - 1;
        if conj {
            var += self.space.n();
        }
        let mut e = 1;
        if self.peek() == Some('^') {
            self.pos += 1;
            e = self.number()?;
        }
        mono.0[var] += e;
        Ok(())
    }

    fn number(&mut self) -> Result<u32, PolyError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().map_err(|_| self.err("expected integer"))
    }
}

/// A polynomial in real variables `x1..xn` with rational coefficients, stored
/// as a [`HermitianPolynomial`] using only the holomorphic slots.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RealPolynomial {
    poly: HermitianPolynomial,
}

impl RealPolynomial {
    pub fn new(poly: HermitianPolynomial) -> Result<Self, PolyError> {
        let ok = poly.is_holomorphic() && poly.terms().all(|(_, c)| c.is_real());
        if ok {
            Ok(Self { poly })
        } else {
            Err(PolyError::Parse(
                "real polynomial must have real coefficients and no conjugate variables".into(),
            ))
        }
    }

    /// The coordinate `x_{i+1}` on ℝⁿ.
    pub fn x(n: usize, i: usize) -> Self {
        Self {
            poly: HermitianPolynomial::z(VariableSpace::new(n), i),
        }
    }

    pub fn constant(n: usize, c: Rational) -> Self {
        Self {
            poly: HermitianPolynomial::constant(VariableSpace::new(n), GaussianRational::real(c)),
        }
    }

    pub fn n(&self) -> usize {
        self.poly.space().n()
    }

    pub fn as_poly(&self) -> &HermitianPolynomial {
        &self.poly
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Self {
            poly: self.poly.scale_rational(r),
        }
    }

    /// Substitutes `x_j = Re z_j = (z_j + zb_j)/2`, producing the defining
    /// function of the tube over the zero set.
    pub fn lift_to_tube(&self) -> HermitianPolynomial {
        let space = self.poly.space();
        let n = space.n();
        let mut images: Vec<HermitianPolynomial> =
            (0..n).map(|i| HermitianPolynomial::re_z(space, i)).collect();
        // conjugate slots never occur in a real polynomial
        images.extend((0..n).map(|_| HermitianPolynomial::zero(space)));
        self.poly.substitute(&images).expect("tube lift arity")
    }

    pub fn evaluate(&self, x: &[Rational]) -> Result<Rational, PolyError> {
        let pt: Vec<GaussianRational> = x.iter().cloned().map(GaussianRational::real).collect();
        Ok(self.poly.evaluate(&pt)?.re)
    }

    pub fn to_float(&self) -> FloatPolynomial {
        FloatPolynomial {
            n: self.n(),
            terms: self
                .poly
                .terms()
                .map(|(m, c)| (m.exponents()[..self.n()].to_vec(), crate::exact_arith::rational_to_f64(&c.re)))
                .collect(),
        }
    }
}

impl Add for &RealPolynomial {
    type Output = RealPolynomial;
    fn add(self, rhs: &RealPolynomial) -> RealPolynomial {
        RealPolynomial {
            poly: &self.poly + &rhs.poly,
        }
    }
}

impl Sub for &RealPolynomial {
    type Output = RealPolynomial;
    fn sub(self, rhs: &RealPolynomial) -> RealPolynomial {
        RealPolynomial {
            poly: &self.poly - &rhs.poly,
        }
    }
}

impl Mul for &RealPolynomial {
    type Output = RealPolynomial;
    fn mul(self, rhs: &RealPolynomial) -> RealPolynomial {
        RealPolynomial {
            poly: &self.poly * &rhs.poly,
        }
    }
}

impl fmt::Display for RealPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.poly.to_string();
        // real variables print as x_j
        write!(f, "{}", s.replace('z', "x"))
    }
}

/// Real polynomial with `f64` coefficients, for families whose coefficients
/// involve radicals.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatPolynomial {
    pub n: usize,
    pub terms: Vec<(Vec<u32>, f64)>,
}

impl FloatPolynomial {
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .zip(x)
                    .fold(*c, |acc, (&k, &xi)| acc * xi.powi(k as i32))
            })
            .sum()
    }

    pub fn coefficient(&self, exps: &[u32]) -> f64 {
        self.terms
            .iter()
            .filter(|(e, _)| e.as_slice() == exps)
            .map(|(_, c)| c)
            .sum()
    }

    /// Real Hessian `∂²f/∂x_i∂x_j` at `x`.
    pub fn hessian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let n = self.n;
        let mut h = vec![vec![0.0; n]; n];
        for (e, c) in &self.terms {
            for i in 0..n {
                for j in 0..n {
                    let mut ee = e.clone();
                    let mut coef = *c;
                    if ee[i] == 0 {
                        continue;
                    }
                    coef *= ee[i] as f64;
                    ee[i] -= 1;
                    if ee[j] == 0 {
                        continue;
                    }
                    coef *= ee[j] as f64;
                    ee[j] -= 1;
                    let v = ee
                        .iter()
                        .zip(x)
                        .fold(coef, |acc, (&k, &xi)| acc * xi.powi(k as i32));
                    h[i][j] += v;
                }
            }
        }
        h
    }

    pub fn to_literal(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut s = format!("({c})");
                for (i, &k) in e.iter().enumerate() {
                    if k > 0 {
                        s.push_str(&format!("*x{}^{}", i + 1, k));
                    }
                }
                s
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_arith::{int, rat};
    use proptest::prelude::*;

    fn s4() -> VariableSpace {
        VariableSpace::new(4)
    }

    fn z(i: usize) -> HermitianPolynomial {
        HermitianPolynomial::z(s4(), i - 1)
    }

    fn zb(i: usize) -> HermitianPolynomial {
        HermitianPolynomial::zbar(s4(), i - 1)
    }

    fn quartic_plus() -> HermitianPolynomial {
        // Re z4 − (z1 zb2 + z2 zb1 + |z3|² + |z1|⁴)
        let herm = &(&(&z(1) * &zb(2)) + &(&z(2) * &zb(1))) + &(&z(3) * &zb(3));
        let quart = (&z(1) * &zb(1)).pow(2);
        &(&HermitianPolynomial::re_z(s4(), 3) - &herm) - &quart
    }

    #[test]
    fn add_examples() {
        assert!((&z(1) + &(-&z(1))).is_zero());
        let pairing = &(&z(1) * &zb(2)) + &(&z(2) * &zb(1));
        assert_eq!(pairing.num_terms(), 2);
        assert!(pairing.is_real_valued());
        let lit = HermitianPolynomial::parse(
            "z1^2*zb1^2 + z3*zb3 + z1*zb2 + z2*zb1",
            s4(),
        )
        .unwrap();
        let built = &(&(&z(1) * &zb(1)).pow(2) + &HermitianPolynomial::abs2(s4(), 2)) + &pairing;
        assert_eq!(built, lit);
    }

    #[test]
    fn mul_examples() {
        let p = quartic_plus();
        assert_eq!(&p * &HermitianPolynomial::one(s4()), p);
        let a = &z(1) * &zb(1);
        assert_eq!(a, HermitianPolynomial::abs2(s4(), 0));
        let sq = &a * &a;
        assert_eq!(sq.num_terms(), 1);
        let m = sq.first_monomial().unwrap();
        assert_eq!(m.exponents(), &[2, 0, 0, 0, 2, 0, 0, 0]);
        assert_eq!(p.degree(), Some(4));
        assert_eq!((&p * &p).degree(), Some(8));
    }

    #[test]
    fn conjugate_examples() {
        assert_eq!(z(1).conjugate(), zb(1));
        let p = (&z(1) * &zb(2)).scale(&GaussianRational::i());
        let expect = (&z(2) * &zb(1)).scale(&GaussianRational::from_ints(0, -1));
        assert_eq!(p.conjugate(), expect);
        assert_eq!(quartic_plus().conjugate(), quartic_plus());
        assert!(quartic_plus().is_real_valued());
        assert!(!z(1).is_real_valued());
    }

    #[test]
    fn substitute_examples() {
        let id: Vec<_> = (0..8).map(|v| HermitianPolynomial::var(s4(), v)).collect();
        assert_eq!(z(1).substitute(&id).unwrap(), z(1));
        let q = GaussianRational::from_ints(3, 0);
        let mut images = id.clone();
        images[0] = z(1).scale(&q);
        let got = z(1).pow(2).substitute(&images).unwrap();
        assert_eq!(got, z(1).pow(2).scale(&q.pow(2)));
        assert!(matches!(
            z(1).substitute(&id[..3]),
            Err(PolyError::Arity { expected: 8, got: 3 })
        ));
    }

    #[test]
    fn partial_examples() {
        assert_eq!(z(1).pow(2).partial(0).unwrap(), z(1).scale_rational(&int(2)));
        let p = &z(1).pow(2) * &zb(1).pow(2);
        assert_eq!(p.partial(4).unwrap(), (&z(1).pow(2) * &zb(1)).scale_rational(&int(2)));
        // hand differentiation: ∂z∂zb (z² zb²) = 4 z zb
        let mixed = p.partial(0).unwrap().partial(4).unwrap();
        assert_eq!(mixed, (&z(1) * &zb(1)).scale_rational(&int(4)));
        assert!(p.partial(8).is_err());
    }

    #[test]
    fn bigraded_examples() {
        let p = &(&z(1) * &zb(2)) + &(&z(1).pow(2) * &zb(1).pow(2));
        assert_eq!(p.bigraded_component(1, 1), &z(1) * &zb(2));
        let rho = quartic_plus();
        let herm = &(&(&z(1) * &zb(2)) + &(&z(2) * &zb(1))) + &(&z(3) * &zb(3));
        // defining quartic minus the Hermitian part: the (2,2) piece is −|z1|⁴
        let rest = &rho + &herm;
        assert_eq!(
            rest.bigraded_component(2, 2),
            -(&z(1).pow(2) * &zb(1).pow(2))
        );
        let c = &p + &HermitianPolynomial::constant(s4(), GaussianRational::from_ints(5, 1));
        assert_eq!(
            c.bigraded_component(0, 0),
            HermitianPolynomial::constant(s4(), GaussianRational::from_ints(5, 1))
        );
    }

    #[test]
    fn evaluate_examples() {
        let a = HermitianPolynomial::abs2(VariableSpace::new(1), 0);
        let v = a.evaluate(&[GaussianRational::from_ints(3, 4)]).unwrap();
        assert_eq!(v, GaussianRational::from_ints(25, 0));
        let rho = quartic_plus();
        let pt = [0, 0, 0, 1].map(GaussianRational::from);
        assert_eq!(rho.evaluate(&pt).unwrap(), GaussianRational::from(1));
        let zero = [0, 0, 0, 0].map(GaussianRational::from);
        assert_eq!(rho.evaluate(&zero).unwrap(), rho.constant_term());
        assert!(rho.evaluate(&pt[..2]).is_err());
    }

    #[test]
    fn literal_round_trip_and_errors() {
        let p = HermitianPolynomial::parse("(3/5+4/5i)*z1^2*zb1^1 - 2*z4 + (1/2)", s4()).unwrap();
        assert_eq!(p.num_terms(), 3);
        assert_eq!(HermitianPolynomial::parse(&p.to_string(), s4()).unwrap(), p);
        assert_eq!(HermitianPolynomial::parse("0", s4()).unwrap(), HermitianPolynomial::zero(s4()));
        assert!(HermitianPolynomial::parse("z5", s4()).is_err());
        assert!(HermitianPolynomial::parse("(1+i", s4()).is_err());
        assert!(HermitianPolynomial::parse("", s4()).is_err());
        assert_eq!(HermitianPolynomial::zero(s4()).degree(), None);
    }

    #[test]
    fn tube_lift_and_float_hessian() {
        // f = x1² − x1 x2 on ℝ²
        let x1 = RealPolynomial::x(2, 0);
        let x2 = RealPolynomial::x(2, 1);
        let f = &(&x1 * &x1) - &(&x1 * &x2);
        let lifted = f.lift_to_tube();
        assert!(lifted.is_real_valued());
        let pt = [GaussianRational::from_ints(2, 7), GaussianRational::from_ints(3, -1)];
        assert_eq!(lifted.evaluate(&pt).unwrap(), GaussianRational::from(4 - 6));
        let h = f.to_float().hessian(&[0.3, -1.0]);
        assert_eq!(h, vec![vec![2.0, -1.0], vec![-1.0, 0.0]]);
        assert_eq!(f.evaluate(&[rat(1, 2), int(1)]).unwrap(), rat(-1, 4));
    }

    fn arb_poly(n: usize, max_terms: usize) -> impl Strategy<Value = HermitianPolynomial> {
        let space = VariableSpace::new(n);
        prop::collection::vec(
            (
                prop::collection::vec(0u32..3, 2 * n),
                -6i64..6,
                -6i64..6,
                1i64..4,
            ),
            0..max_terms,
        )
        .prop_map(move |ts| {
            HermitianPolynomial::from_terms(
                space,
                ts.into_iter().map(|(e, a, b, d)| {
                    (Monomial::from_exponents(e), GaussianRational::new(rat(a, d), rat(b, d)))
                }),
            )
        })
    }

    fn arb_point(n: usize) -> impl Strategy<Value = Vec<GaussianRational>> {
        prop::collection::vec((-5i64..5, -5i64..5, 1i64..4), n)
            .prop_map(|v| v.into_iter().map(|(a, b, d)| GaussianRational::new(rat(a, d), rat(b, d))).collect())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn ring_axioms(p in arb_poly(2, 5), q in arb_poly(2, 5), r in arb_poly(2, 5)) {
            prop_assert_eq!(&(&p + &q) + &r, &p + &(&q + &r));
            prop_assert_eq!(&p + &q, &q + &p);
            prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
            prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
            prop_assert_eq!(&p * &q, &q * &p);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn bigraded_components_sum_to_p(p in arb_poly(3, 8)) {
            let mut sum = HermitianPolynomial::zero(p.space());
            for (k, l) in p.bidegrees() {
                sum = &sum + &p.bigraded_component(k, l);
            }
            prop_assert_eq!(sum, p);
        }

        #[test]
        fn conjugation_is_multiplicative(p in arb_poly(2, 4), q in arb_poly(2, 4), pt in arb_point(2)) {
            prop_assert_eq!((&p * &q).conjugate(), &p.conjugate() * &q.conjugate());
            prop_assert_eq!(p.conjugate().conjugate(), p.clone());
            // conj(p(z)) = conj(p)(z) with conjugates fed automatically
            let lhs = p.evaluate(&pt).unwrap().conj();
            let rhs = p.conjugate().evaluate(&pt).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn mixed_partials_commute(p in arb_poly(3, 6), i in 0usize..3, j in 0usize..3) {
            let a = p.partial(i).unwrap().partial(j + 3).unwrap();
            let b = p.partial(j + 3).unwrap().partial(i).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn literal_round_trip(p in arb_poly(3, 6)) {
            let s = p.to_string();
            prop_assert_eq!(HermitianPolynomial::parse(&s, p.space()).unwrap(), p);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]

        #[test]
        fn substitution_composes(p in arb_poly(2, 3), f in prop::collection::vec(arb_poly(2, 2), 4), g in prop::collection::vec(arb_poly(2, 2), 4)) {
            let lhs = p.substitute(&f).unwrap().substitute(&g).unwrap();
            let fg: Vec<_> = f.iter().map(|fi| fi.substitute(&g).unwrap()).collect();
            prop_assert_eq!(lhs, p.substitute(&fg).unwrap());
        }
    }
}
