//! Trace operator of a Hermitian form, normal-form trace conditions,
//! umbilicity at the origin and the weighted scaling identity for linear
//! isotropy maps.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::eigen::{self, Signature};
use crate::exact_arith::{ArithError, ComplexFloat, GaussianRational, Rational};
use crate::linalg::{self, Matrix};
use crate::polynomial::{HermitianPolynomial, PolyError, VariableSpace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChernMoserError {
    #[error("form is not Hermitian")]
    NotHermitian,
    #[error("form is degenerate")]
    Degenerate,
    #[error("dimension mismatch: form has {form} variables, input has {input}")]
    DimensionMismatch { form: usize, input: usize },
    #[error("component ({0},{1}) must have k, l >= 2")]
    BadIndex(u32, u32),
    #[error("component ({0},{1}) is not of pure bidegree")]
    NotPure(u32, u32),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// `⟨z, z⟩ = Σ h_{αβ} z_α zb_β` with its exact inverse matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HermitianForm {
    h: Matrix<GaussianRational>,
    g: Matrix<GaussianRational>,
}

impl HermitianForm {
    pub fn new(h: Matrix<GaussianRational>) -> Result<Self, ChernMoserError> {
        let m = h.len();
        for i in 0..m {
            if h[i].len() != m {
                return Err(ChernMoserError::NotHermitian);
            }
            for j in 0..m {
                if h[i][j] != h[j][i].conj() {
                    return Err(ChernMoserError::NotHermitian);
                }
            }
        }
        let g = linalg::inverse(&h).map_err(|_| ChernMoserError::Degenerate)?;
        Ok(Self { h, g })
    }

    pub fn diagonal(entries: &[i64]) -> Self {
        let m = entries.len();
        let h = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| if i == j { GaussianRational::from(entries[i]) } else { GaussianRational::zero() })
                    .collect()
            })
            .collect();
        Self::new(h).expect("nonzero diagonal")
    }

    /// `z1 zb2 + z2 zb1 + |z3|²`
    pub fn pairing() -> Self {
        Self::new(crate::catalog::pairing_form()).expect("nondegenerate")
    }

    pub fn dim(&self) -> usize {
        self.h.len()
    }

    pub fn matrix(&self) -> &Matrix<GaussianRational> {
        &self.h
    }

    pub fn inverse(&self) -> &Matrix<GaussianRational> {
        &self.g
    }

    pub fn space(&self) -> VariableSpace {
        VariableSpace::new(self.dim())
    }

    pub fn signature(&self) -> Signature {
        let hf: Vec<Vec<ComplexFloat>> = self.h.iter().map(|r| r.iter().map(GaussianRational::to_float).collect()).collect();
        eigen::signature_of(&eigen::hermitian_eigenvalues(&hf))
    }

    /// `⟨z, z⟩` as a polynomial in `m` variables.
    pub fn polynomial(&self) -> HermitianPolynomial {
        let sp = self.space();
        let mut p = HermitianPolynomial::zero(sp);
        for (a, row) in self.h.iter().enumerate() {
            for (b, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    p = &p + &(&HermitianPolynomial::z(sp, a) * &HermitianPolynomial::zbar(sp, b)).scale(c);
                }
            }
        }
        p
    }

    /// `⟨Uz, Uz⟩ = ⟨z, z⟩`, i.e. `Uᵗ h Ū = h`.
    pub fn preserved_by(&self, u: &Matrix<GaussianRational>) -> bool {
        crate::catalog::is_zero_matrix(&crate::catalog::pseudo_unitary_residual(u, &self.h))
    }
}

/// `tr = Σ_{α,β} g_{βα} ∂²/∂z_α∂zb_β`, summed over the form's `m` variables.
pub fn trace_op(p: &HermitianPolynomial, form: &HermitianForm) -> Result<HermitianPolynomial, ChernMoserError> {
    let m = form.dim();
    if p.space().n() != m {
        return Err(ChernMoserError::DimensionMismatch { form: m, input: p.space().n() });
    }
    let mut out = HermitianPolynomial::zero(p.space());
    for a in 0..m {
        let da = p.partial(a)?;
        if da.is_zero() {
            continue;
        }
        for b in 0..m {
            let c = &form.g[b][a];
            if c.is_zero() {
                continue;
            }
            out = &out + &da.partial(b + m)?.scale(c);
        }
    }
    Ok(out)
}

pub fn trace_power(p: &HermitianPolynomial, form: &HermitianForm, k: u32) -> Result<HermitianPolynomial, ChernMoserError> {
    (0..k).try_fold(p.clone(), |acc, _| trace_op(&acc, form))
}

/// `u = ⟨z, z⟩ + Σ_{k,l ≥ 2} F_{kl}(z, zb)` with polynomial coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalFormSurface {
    pub form: HermitianForm,
    components: BTreeMap<(u32, u32), HermitianPolynomial>,
}

impl NormalFormSurface {
    pub fn new(form: HermitianForm) -> Self {
        Self { form, components: BTreeMap::new() }
    }

    pub fn with_component(mut self, k: u32, l: u32, f: HermitianPolynomial) -> Result<Self, ChernMoserError> {
        if k < 2 || l < 2 {
            return Err(ChernMoserError::BadIndex(k, l));
        }
        if f.space() != self.form.space() {
            return Err(ChernMoserError::DimensionMismatch { form: self.form.dim(), input: f.space().n() });
        }
        if f.bigraded_component(k, l) != f {
            return Err(ChernMoserError::NotPure(k, l));
        }
        if !f.is_zero() {
            self.components.insert((k, l), f);
        }
        Ok(self)
    }

    pub fn component(&self, k: u32, l: u32) -> HermitianPolynomial {
        self.components
            .get(&(k, l))
            .cloned()
            .unwrap_or_else(|| HermitianPolynomial::zero(self.form.space()))
    }
}

/// `Re w = z1 zb2 + z2 zb1 + |z3|² ± |z1|⁴` in normal-form presentation.
pub fn m_pm_normal_form(sign: i64) -> NormalFormSurface {
    let form = HermitianForm::pairing();
    let f22 = HermitianPolynomial::abs2(form.space(), 0).pow(2).scale_rational(&Rational::from_integer(sign.into()));
    NormalFormSurface::new(form).with_component(2, 2, f22).expect("pure (2,2)")
}

/// The quadric of a form: all higher components vanish.
pub fn quadric_normal_form(form: HermitianForm) -> NormalFormSurface {
    NormalFormSurface::new(form)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceCondition {
    /// `"tr F22"`, `"tr^2 F23"` or `"tr^3 F33"`
    pub name: String,
    pub pass: bool,
    /// The nonzero result on failure.
    pub residual: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NormalFormReport {
    pub conditions: Vec<TraceCondition>,
}

impl NormalFormReport {
    pub fn all_pass(&self) -> bool {
        self.conditions.iter().all(|c| c.pass)
    }
}

pub fn normal_form_check(s: &NormalFormSurface) -> Result<NormalFormReport, ChernMoserError> {
    let mut conditions = Vec::new();
    for (k, l, power) in [(2, 2, 1), (2, 3, 2), (3, 3, 3)] {
        let r = trace_power(&s.component(k, l), &s.form, power)?;
        let prefix = if power == 1 { "tr".to_string() } else { format!("tr^{power}") };
        conditions.push(TraceCondition {
            name: format!("{prefix} F{k}{l}"),
            pass: r.is_zero(),
            residual: (!r.is_zero()).then(|| r.to_string()),
        });
    }
    Ok(NormalFormReport { conditions })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Umbilicity {
    Umbilic,
    NonUmbilic { witness: String },
}

pub fn umbilicity_at_origin(s: &NormalFormSurface) -> Umbilicity {
    let f22 = s.component(2, 2);
    if f22.is_zero() {
        Umbilicity::Umbilic
    } else {
        Umbilicity::NonUmbilic { witness: f22.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScalingReport {
    pub preserves_form: bool,
    /// `F22(Uz, Ū zb) = λ⁻² F22(z, zb)` exactly.
    pub identity_holds: bool,
    pub residual: Option<String>,
}

impl ScalingReport {
    pub fn pass(&self) -> bool {
        self.preserves_form && self.identity_holds
    }
}

/// Necessary condition on the linear part `z ↦ λUz`, `w ↦ λ²w` of an
/// isotropy map.
pub fn linear_scaling_check(
    s: &NormalFormSurface,
    u: &Matrix<GaussianRational>,
    lambda: &Rational,
) -> Result<ScalingReport, ChernMoserError> {
    let m = s.form.dim();
    if u.len() != m {
        return Err(ChernMoserError::DimensionMismatch { form: m, input: u.len() });
    }
    if lambda.is_zero() {
        return Err(ArithError::DivisionByZero.into());
    }
    let sp = s.form.space();
    let mut images: Vec<HermitianPolynomial> = u
        .iter()
        .map(|row| {
            row.iter().enumerate().fold(HermitianPolynomial::zero(sp), |acc, (j, c)| {
                &acc + &HermitianPolynomial::z(sp, j).scale(c)
            })
        })
        .collect();
    let conj: Vec<HermitianPolynomial> = images.iter().map(HermitianPolynomial::conjugate).collect();
    images.extend(conj);
    let f = s.component(2, 2);
    let lhs = f.substitute(&images)?;
    let rhs = f.scale_rational(&(lambda * lambda).recip());
    let diff = &lhs - &rhs;
    Ok(ScalingReport {
        preserves_form: s.form.preserved_by(u),
        identity_holds: diff.is_zero(),
        residual: (!diff.is_zero()).then(|| diff.to_string()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_arith::{int, parse_rational};
    use proptest::prelude::*;

    fn g(re: i64, im: i64) -> GaussianRational {
        GaussianRational::from_ints(re, im)
    }

    fn sp3() -> VariableSpace {
        VariableSpace::new(3)
    }

    #[test]
    fn trace_examples() {
        let f = HermitianForm::pairing();
        let p = |s: &str| HermitianPolynomial::parse(s, sp3()).unwrap();
        assert!(trace_op(&p("z1*zb1"), &f).unwrap().is_zero());
        assert_eq!(trace_op(&p("z1*zb2"), &f).unwrap(), p("1"));
        assert!(trace_op(&p("7/3"), &f).unwrap().is_zero());
        assert_eq!(f.signature(), Signature::new(2, 1, 0));
        assert!(matches!(
            trace_op(&HermitianPolynomial::one(VariableSpace::new(2)), &f),
            Err(ChernMoserError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn trace_of_form_square_is_eight_times_form() {
        let f = HermitianForm::pairing();
        let q = f.polynomial();
        for c in ["1", "-3/7", "5"] {
            let c = parse_rational(c).unwrap();
            let t = trace_op(&(&q * &q).scale_rational(&c), &f).unwrap();
            assert_eq!(t, q.scale_rational(&(c * int(8))));
        }
        let s = NormalFormSurface::new(f.clone()).with_component(2, 2, (&q * &q).scale_rational(&int(2))).unwrap();
        let rep = normal_form_check(&s).unwrap();
        assert!(!rep.conditions[0].pass && rep.conditions[1].pass && rep.conditions[2].pass);
    }

    #[test]
    fn m_pm_conditions_and_umbilicity() {
        for sign in [1, -1] {
            let s = m_pm_normal_form(sign);
            assert!(normal_form_check(&s).unwrap().all_pass());
            let w = HermitianPolynomial::abs2(sp3(), 0).pow(2).scale_rational(&int(sign));
            assert_eq!(umbilicity_at_origin(&s), Umbilicity::NonUmbilic { witness: w.to_string() });
        }
        let quad = quadric_normal_form(HermitianForm::diagonal(&[1, 1, -1]));
        assert_eq!(umbilicity_at_origin(&quad), Umbilicity::Umbilic);
        assert!(normal_form_check(&quad).unwrap().all_pass());
    }

    #[test]
    fn component_validation() {
        let s = NormalFormSurface::new(HermitianForm::pairing());
        let p = HermitianPolynomial::parse("z1^2*zb1^2 + z1*zb1", sp3()).unwrap();
        assert_eq!(s.clone().with_component(2, 2, p), Err(ChernMoserError::NotPure(2, 2)));
        assert!(matches!(s.with_component(1, 2, HermitianPolynomial::zero(sp3())), Err(ChernMoserError::BadIndex(1, 2))));
    }

    #[test]
    fn scaling_examples() {
        let s = m_pm_normal_form(1);
        let o = GaussianRational::zero;
        let id = linalg::identity(3);
        assert!(linear_scaling_check(&s, &id, &int(1)).unwrap().pass());
        // phase on z1 compensated on z2
        let ph = GaussianRational::new(parse_rational("3/5").unwrap(), parse_rational("4/5").unwrap());
        let u = vec![vec![ph.clone(), o(), o()], vec![o(), ph, o()], vec![o(), o(), g(0, 1)]];
        assert!(linear_scaling_check(&s, &u, &int(1)).unwrap().pass());
        // z1 ↦ 2z1, z2 ↦ z2/2 preserves the form but breaks the identity at λ = 1
        let half = GaussianRational::real(parse_rational("1/2").unwrap());
        let u = vec![vec![g(2, 0), o(), o()], vec![o(), half, o()], vec![o(), o(), g(1, 0)]];
        let r = linear_scaling_check(&s, &u, &int(1)).unwrap();
        assert!(r.preserves_form && !r.identity_holds && r.residual.is_some());
        // a non-isometry is flagged
        let u = vec![vec![g(2, 0), o(), o()], vec![o(), g(1, 0), o()], vec![o(), o(), g(1, 0)]];
        assert!(!linear_scaling_check(&s, &u, &int(1)).unwrap().preserves_form);
    }

    fn small() -> impl Strategy<Value = GaussianRational> {
        (-5i64..=5, -5i64..=5).prop_map(|(a, b)| g(a, b))
    }

    fn bigraded(k: u32, l: u32) -> impl Strategy<Value = HermitianPolynomial> {
        proptest::collection::vec((proptest::collection::vec(0usize..3, k as usize), proptest::collection::vec(0usize..3, l as usize), small()), 1..4)
            .prop_map(move |terms| {
                let sp = sp3();
                terms.into_iter().fold(HermitianPolynomial::zero(sp), |acc, (zs, zbs, c)| {
                    let mut t = HermitianPolynomial::constant(sp, c);
                    for i in zs {
                        t = &t * &HermitianPolynomial::z(sp, i);
                    }
                    for i in zbs {
                        t = &t * &HermitianPolynomial::zbar(sp, i);
                    }
                    &acc + &t
                })
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn trace_lowers_bidegree(p in bigraded(3, 2), q in bigraded(3, 2), c in small()) {
            let f = HermitianForm::pairing();
            let t = trace_op(&p, &f).unwrap();
            prop_assert_eq!(t.bigraded_component(2, 1), t.clone());
            let lin = trace_op(&(&p + &q.scale(&c)), &f).unwrap();
            prop_assert_eq!(lin, &t + &trace_op(&q, &f).unwrap().scale(&c));
        }

        #[test]
        fn identity_form_trace_is_laplacian(p in bigraded(2, 2)) {
            let f = HermitianForm::diagonal(&[1, 1, 1]);
            let mut lap = HermitianPolynomial::zero(sp3());
            for a in 0..3 {
                lap = &lap + &p.partial(a).unwrap().partial(a + 3).unwrap();
            }
            prop_assert_eq!(trace_op(&p, &f).unwrap(), lap);
        }
    }
}
