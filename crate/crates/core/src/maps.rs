//! Affine maps of ℝⁿ, holomorphic polynomial maps of ℂⁿ, pullbacks of
//! defining functions and exact invariance certificates.
//!
//! A certificate records the identity `ρ_target ∘ F = c · ρ_source` with the
//! factor `c` read off the first monomial of `ρ_source` and the full residual
//! `ρ_target ∘ F − c · ρ_source`. It is exact iff the residual is the zero
//! polynomial.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Num, One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::exact_arith::{
    format_rational, nth_root_exact, rational_to_f64, ArithError, ComplexFloat, GaussianRational,
    Rational,
};
use crate::linalg;
use crate::polynomial::{HermitianPolynomial, PolyError, VariableSpace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("space mismatch: expected {expected} variables, got {got}")]
    SpaceMismatch { expected: usize, got: usize },
    #[error("component {0} depends on a conjugate variable")]
    NotHolomorphic(usize),
    #[error("cannot certify against the zero polynomial")]
    ZeroRho,
    #[error("rescaling leaves an irrational coefficient on {0}")]
    IrrationalRescaling(String),
}

/// `x ↦ A x + t` over any numeric field (`Rational` on the exact path,
/// `f64` on the floating path).
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap<T> {
    pub matrix: Vec<Vec<T>>,
    pub translation: Vec<T>,
}

pub type AffineMapR = AffineMap<Rational>;

impl<T: Clone + Num> AffineMap<T> {
    pub fn new(matrix: Vec<Vec<T>>, translation: Vec<T>) -> Self {
        assert_eq!(matrix.len(), translation.len());
        assert!(matrix.iter().all(|r| r.len() == translation.len()));
        Self {
            matrix,
            translation,
        }
    }

    pub fn identity(n: usize) -> Self {
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect())
            .collect();
        Self::new(matrix, vec![T::zero(); n])
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        self.matrix
            .iter()
            .zip(&self.translation)
            .map(|(row, t)| {
                row.iter()
                    .zip(x)
                    .fold(t.clone(), |acc, (a, xi)| acc + a.clone() * xi.clone())
            })
            .collect()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        let n = self.dim();
        let matrix = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        (0..n).fold(T::zero(), |acc, k| {
                            acc + self.matrix[i][k].clone() * other.matrix[k][j].clone()
                        })
                    })
                    .collect()
            })
            .collect();
        let translation = self.apply(&other.translation);
        Self::new(matrix, translation)
    }
}

impl AffineMapR {
    pub fn determinant(&self) -> Rational {
        linalg::determinant(&self.matrix)
    }

    pub fn to_f64(&self) -> AffineMap<f64> {
        AffineMap::new(
            self.matrix
                .iter()
                .map(|r| r.iter().map(rational_to_f64).collect())
                .collect(),
            self.translation.iter().map(rational_to_f64).collect(),
        )
    }
}

impl fmt::Display for AffineMapR {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (row, t)) in self.matrix.iter().zip(&self.translation).enumerate() {
            let mut parts: Vec<String> = row
                .iter()
                .enumerate()
                .filter(|(_, a)| !a.is_zero())
                .map(|(j, a)| format!("({})*x{}", format_rational(a), j + 1))
                .collect();
            if !t.is_zero() || parts.is_empty() {
                parts.push(format!("({})", format_rational(t)));
            }
            writeln!(f, "x{} -> {}", i + 1, parts.join(" + "))?;
        }
        Ok(())
    }
}

/// A polynomial map whose components use only holomorphic variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HoloPolyMap {
    space_in: VariableSpace,
    space_out: VariableSpace,
    components: Vec<HermitianPolynomial>,
}

impl HoloPolyMap {
    pub fn new(space_in: VariableSpace, components: Vec<HermitianPolynomial>) -> Result<Self, MapError> {
        for (i, c) in components.iter().enumerate() {
            if c.space() != space_in {
                return Err(MapError::SpaceMismatch {
                    expected: space_in.n(),
                    got: c.space().n(),
                });
            }
            if !c.is_holomorphic() {
                return Err(MapError::NotHolomorphic(i));
            }
        }
        Ok(Self {
            space_in,
            space_out: VariableSpace::new(components.len()),
            components,
        })
    }

    pub fn identity(space: VariableSpace) -> Self {
        Self {
            space_in: space,
            space_out: space,
            components: (0..space.n()).map(|i| HermitianPolynomial::z(space, i)).collect(),
        }
    }

    pub fn space_in(&self) -> VariableSpace {
        self.space_in
    }

    pub fn space_out(&self) -> VariableSpace {
        self.space_out
    }

    pub fn components(&self) -> &[HermitianPolynomial] {
        &self.components
    }

    pub fn degree(&self) -> Option<u32> {
        self.components.iter().filter_map(HermitianPolynomial::degree).max()
    }

    /// Images for all `2n` variables of the output space: the components
    /// followed by their conjugates.
    fn images(&self) -> Vec<HermitianPolynomial> {
        self.components
            .iter()
            .cloned()
            .chain(self.components.iter().map(HermitianPolynomial::conjugate))
            .collect()
    }

    pub fn apply(&self, point: &[GaussianRational]) -> Result<Vec<GaussianRational>, MapError> {
        self.components
            .iter()
            .map(|c| c.evaluate(point).map_err(MapError::from))
            .collect()
    }

    pub fn apply_float(&self, point: &[ComplexFloat]) -> Result<Vec<ComplexFloat>, MapError> {
        self.components
            .iter()
            .map(|c| c.evaluate_float(point).map_err(MapError::from))
            .collect()
    }

    /// Matrix of first-order coefficients `∂F_i/∂z_j (0)`.
    pub fn linear_part(&self) -> Vec<Vec<GaussianRational>> {
        self.components
            .iter()
            .map(|c| {
                (0..self.space_in.n())
                    .map(|j| c.coefficient(&crate::polynomial::Monomial::var(self.space_in, j)))
                    .collect()
            })
            .collect()
    }

    pub fn linear_determinant(&self) -> Option<GaussianRational> {
        (self.space_in == self.space_out).then(|| linalg::determinant(&self.linear_part()))
    }
}

impl fmt::Display for HoloPolyMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.components.iter().enumerate() {
            writeln!(f, "z{} -> {}", i + 1, c)?;
        }
        Ok(())
    }
}

/// Lifts `x ↦ Ax + t` on ℝⁿ to `z ↦ Az + t` on ℂⁿ.
pub fn lift_affine(f: &AffineMapR) -> HoloPolyMap {
    let space = VariableSpace::new(f.dim());
    let components = f
        .matrix
        .iter()
        .zip(&f.translation)
        .map(|(row, t)| {
            let mut c = HermitianPolynomial::constant(space, GaussianRational::real(t.clone()));
            for (j, a) in row.iter().enumerate() {
                c = &c + &HermitianPolynomial::z(space, j).scale_rational(a);
            }
            c
        })
        .collect();
    HoloPolyMap {
        space_in: space,
        space_out: space,
        components,
    }
}

/// `f ∘ g`.
pub fn compose(f: &HoloPolyMap, g: &HoloPolyMap) -> Result<HoloPolyMap, MapError> {
    if g.space_out != f.space_in {
        return Err(MapError::SpaceMismatch {
            expected: f.space_in.n(),
            got: g.space_out.n(),
        });
    }
    let images = g.images();
    let components = f
        .components
        .iter()
        .map(|c| c.substitute(&images))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(HoloPolyMap {
        space_in: g.space_in,
        space_out: f.space_out,
        components,
    })
}

/// `ρ ∘ F`: substitutes `z_i ↦ F_i(z)` and `zb_i ↦ conj(F_i)(zb)`.
pub fn pullback(rho: &HermitianPolynomial, f: &HoloPolyMap) -> Result<HermitianPolynomial, MapError> {
    if rho.space() != f.space_out {
        return Err(MapError::SpaceMismatch {
            expected: f.space_out.n(),
            got: rho.space().n(),
        });
    }
    Ok(rho.substitute(&f.images())?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvarianceCertificate {
    pub map: HoloPolyMap,
    /// Defining function on the source side, compared against.
    pub rho: HermitianPolynomial,
    /// Defining function that was pulled back (equal to `rho` for an invariance check).
    pub target: HermitianPolynomial,
    pub factor: GaussianRational,
    pub exact: bool,
    pub residual: HermitianPolynomial,
}

impl InvarianceCertificate {
    /// `c > 0`: each side is mapped to itself.
    pub fn preserves_sides(&self) -> bool {
        self.exact && self.factor.is_real() && self.factor.re.is_positive()
    }

    /// `c < 0`: the sides are exchanged.
    pub fn swaps_sides(&self) -> bool {
        self.exact && self.factor.is_real() && self.factor.re.is_negative()
    }

    pub fn summary(&self) -> CertificateSummary {
        CertificateSummary {
            factor: self.factor.to_string(),
            exact: self.exact,
            residual_terms: self.residual.num_terms(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertificateSummary {
    pub factor: String,
    pub exact: bool,
    pub residual_terms: usize,
}

/// Certifies `ρ ∘ F = c · ρ`.
pub fn invariance_certificate(
    rho: &HermitianPolynomial,
    f: &HoloPolyMap,
) -> Result<InvarianceCertificate, MapError> {
    equivalence_certificate(rho, f, rho)
}

/// Certifies `ρ_target ∘ F = c · ρ_source`.
pub fn equivalence_certificate(
    target: &HermitianPolynomial,
    f: &HoloPolyMap,
    source: &HermitianPolynomial,
) -> Result<InvarianceCertificate, MapError> {
    if source.space() != f.space_in {
        return Err(MapError::SpaceMismatch {
            expected: f.space_in.n(),
            got: source.space().n(),
        });
    }
    let lead = source.first_monomial().ok_or(MapError::ZeroRho)?.clone();
    let pulled = pullback(target, f)?;
    let num = pulled.coefficient(&lead);
    let (factor, residual) = if num.is_zero() {
        (GaussianRational::zero(), pulled)
    } else {
        let c = num.checked_div(&source.coefficient(&lead))?;
        let residual = &pulled - &source.scale(&c);
        (c, residual)
    };
    Ok(InvarianceCertificate {
        map: f.clone(),
        rho: source.clone(),
        target: target.clone(),
        exact: residual.is_zero() && !factor.is_zero(),
        factor,
        residual,
    })
}

/// A positive real of the form `c · Π bᵢ^{eᵢ}` with rational `c`, bases
/// `bᵢ > 0` and rational exponents `eᵢ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Radical {
    coeff: Rational,
    factors: BTreeMap<Rational, Rational>,
}

impl Radical {
    pub fn rational(r: Rational) -> Self {
        Self {
            coeff: r,
            factors: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::rational(Rational::one())
    }

    /// `base^exponent` for a positive rational base.
    pub fn power(base: Rational, exponent: Rational) -> Result<Self, ArithError> {
        if !base.is_positive() {
            return Err(ArithError::Domain(format!(
                "radical base {} must be positive",
                format_rational(&base)
            )));
        }
        let mut r = Self::one();
        r.factors.insert(base, exponent);
        Ok(r.normalized())
    }

    fn normalized(mut self) -> Self {
        let mut factors = BTreeMap::new();
        for (b, e) in std::mem::take(&mut self.factors) {
            if e.is_zero() || b.is_one() {
                continue;
            }
            if e.is_integer() {
                let k = e.to_integer();
                let k: i32 = k.try_into().expect("small exponent");
                self.coeff *= num_traits::pow::Pow::pow(&b, k);
                continue;
            }
            // b = r^den exactly: fold into the coefficient
            let den: u32 = e.denom().try_into().expect("small root degree");
            if let Ok(root) = nth_root_exact(&b, den) {
                let k: i32 = e.numer().try_into().expect("small exponent");
                self.coeff *= num_traits::pow::Pow::pow(&root, k);
                continue;
            }
            factors.insert(b, e);
        }
        self.factors = factors;
        self
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.coeff *= &other.coeff;
        for (b, e) in &other.factors {
            *out.factors.entry(b.clone()).or_insert_with(Rational::zero) += e;
        }
        out.normalized()
    }

    pub fn pow(&self, k: i32) -> Self {
        let kk = Rational::from_integer(k.into());
        Self {
            coeff: num_traits::pow::Pow::pow(&self.coeff, k),
            factors: self
                .factors
                .iter()
                .map(|(b, e)| (b.clone(), e * &kk))
                .collect(),
        }
        .normalized()
    }

    pub fn to_rational(&self) -> Option<Rational> {
        self.factors.is_empty().then(|| self.coeff.clone())
    }

    pub fn to_f64(&self) -> f64 {
        self.factors.iter().fold(rational_to_f64(&self.coeff), |acc, (b, e)| {
            acc * rational_to_f64(b).powf(rational_to_f64(e))
        })
    }
}

impl fmt::Display for Radical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_rational(&self.coeff))?;
        for (b, e) in &self.factors {
            write!(f, "*({})^({})", format_rational(b), format_rational(e))?;
        }
        Ok(())
    }
}

/// A holomorphic map with irrational diagonal scalings: component `i` is
/// `scales[i] · core_i` with `core_i` rational.
///
/// Exact certificates use `(ρ_target ∘ D) ∘ core` where `D = diag(scales)`;
/// `ρ_target ∘ D` is rational whenever every monomial of `ρ_target` picks up
/// a rational product of scales. The original map is checked on the floating
/// path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaledHoloMap {
    pub scales: Vec<Radical>,
    pub core: HoloPolyMap,
}

impl ScaledHoloMap {
    pub fn new(scales: Vec<Radical>, core: HoloPolyMap) -> Self {
        assert_eq!(scales.len(), core.space_out().n());
        Self { scales, core }
    }

    pub fn unscaled(core: HoloPolyMap) -> Self {
        Self {
            scales: vec![Radical::one(); core.space_out().n()],
            core,
        }
    }

    /// The map itself when every scale is rational.
    pub fn to_exact(&self) -> Option<HoloPolyMap> {
        let comps = self
            .scales
            .iter()
            .zip(self.core.components())
            .map(|(s, c)| s.to_rational().map(|r| c.scale_rational(&r)))
            .collect::<Option<Vec<_>>>()?;
        HoloPolyMap::new(self.core.space_in(), comps).ok()
    }

    /// `ρ(D w)` with every coefficient required to be rational.
    pub fn rescaled_target(&self, rho: &HermitianPolynomial) -> Result<HermitianPolynomial, MapError> {
        let space = rho.space();
        if space != self.core.space_out() {
            return Err(MapError::SpaceMismatch {
                expected: self.core.space_out().n(),
                got: space.n(),
            });
        }
        let n = space.n();
        let mut out = HermitianPolynomial::zero(space);
        for (m, c) in rho.terms() {
            let e = m.exponents();
            let mut factor = Radical::one();
            for i in 0..n {
                let k = (e[i] + e[i + n]) as i32;
                if k > 0 {
                    factor = factor.mul(&self.scales[i].pow(k));
                }
            }
            let r = factor.to_rational().ok_or_else(|| {
                let mut one = HermitianPolynomial::zero(space);
                one.add_term(m.clone(), GaussianRational::one());
                MapError::IrrationalRescaling(one.to_string())
            })?;
            out.add_term(m.clone(), c.scale(&r));
        }
        Ok(out)
    }

    /// Exact certificate of `ρ_target ∘ F = c · ρ_source` via the rescaled target.
    pub fn certify(
        &self,
        target: &HermitianPolynomial,
        source: &HermitianPolynomial,
    ) -> Result<InvarianceCertificate, MapError> {
        let rescaled = self.rescaled_target(target)?;
        equivalence_certificate(&rescaled, &self.core, source)
    }

    pub fn apply_float(&self, point: &[ComplexFloat]) -> Result<Vec<ComplexFloat>, MapError> {
        Ok(self
            .core
            .apply_float(point)?
            .into_iter()
            .zip(&self.scales)
            .map(|(v, s)| v * s.to_f64())
            .collect())
    }

    /// Largest `|ρ_target(F(z)) − c·ρ_source(z)| / max(1, |c·ρ_source(z)|)`
    /// over the given points, evaluating the original (unscaled) map in
    /// floating point.
    pub fn float_residual(
        &self,
        target: &HermitianPolynomial,
        source: &HermitianPolynomial,
        factor: f64,
        points: &[Vec<ComplexFloat>],
    ) -> Result<f64, MapError> {
        let mut worst = 0.0f64;
        for p in points {
            let image = self.apply_float(p)?;
            let lhs = target.evaluate_float(&image)?;
            let rhs = source.evaluate_float(p)? * factor;
            worst = worst.max((lhs - rhs).norm() / rhs.norm().max(1.0));
        }
        Ok(worst)
    }
}

impl fmt::Display for ScaledHoloMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (s, c)) in self.scales.iter().zip(self.core.components()).enumerate() {
            if s.to_rational().is_some_and(|r| r.is_one()) {
                writeln!(f, "z{} -> {}", i + 1, c)?;
            } else {
                writeln!(f, "z{} -> {} * ({})", i + 1, s, c)?;
            }
        }
        Ok(())
    }
}
