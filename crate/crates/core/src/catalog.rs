//! Constructors for the named hypersurfaces, domains, maps and groups, plus the
//! closed-form transitivity solvers.

use std::fmt;
use std::ops::Neg;

use nalgebra::DMatrix;
use num_traits::{Num, Signed, Zero};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::exact_arith::{
    format_rational, int, nth_root_exact, nth_root_float, phase_from_parameter, rat, rational_to_f64,
    ArithError, ComplexFloat, GaussianRational, Rational, UnimodularPhase,
};
use crate::geometry::{Hypersurface, Side, SidedDomain};
use crate::linalg::{self, Matrix};
use crate::maps::{self, AffineMap, AffineMapR, HoloPolyMap, MapError, Radical, ScaledHoloMap};
use crate::polynomial::{FloatPolynomial, HermitianPolynomial, RealPolynomial, VariableSpace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("constraint violated: {0}")]
    Constraint(String),
    #[error("closure violation: {0}")]
    ClosureViolation(String),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

impl From<crate::polynomial::PolyError> for CatalogError {
    fn from(e: crate::polynomial::PolyError) -> Self {
        CatalogError::Map(e.into())
    }
}

fn gr(r: Rational) -> GaussianRational {
    GaussianRational::real(r)
}

fn zvar(sp: VariableSpace, i: usize) -> HermitianPolynomial {
    HermitianPolynomial::z(sp, i)
}

fn cst(sp: VariableSpace, c: GaussianRational) -> HermitianPolynomial {
    HermitianPolynomial::constant(sp, c)
}

fn tube_rho(f: &RealPolynomial) -> Hypersurface {
    Hypersurface::new(f.lift_to_tube()).expect("tube lift is real-valued")
}

// ---------------------------------------------------------------------------
// Γ_α family

/// Scalars admitting exact small fractions; lets the generators run over ℚ
/// and over `f64`.
pub trait RealScalar: Clone + Num + Neg<Output = Self> + PartialOrd {
    fn ratio(n: i64, d: i64) -> Self;
}

impl RealScalar for Rational {
    fn ratio(n: i64, d: i64) -> Self {
        rat(n, d)
    }
}

impl RealScalar for f64 {
    fn ratio(n: i64, d: i64) -> Self {
        n as f64 / d as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaFamily {
    pub alpha: Rational,
}

impl GammaFamily {
    pub fn new(alpha: Rational) -> Self {
        Self { alpha }
    }

    /// `x4 − x1x2 − x3² − x1²x3 − αx1⁴`
    pub fn graph_polynomial(&self) -> RealPolynomial {
        let x = |i| RealPolynomial::x(4, i);
        let (x1, x2, x3, x4) = (x(0), x(1), x(2), x(3));
        let x1sq = &x1 * &x1;
        let quartic = (&x1sq * &x1sq).scale(&self.alpha);
        let r = &(&(&x4 - &(&x1 * &x2)) - &(&x3 * &x3)) - &(&x1sq * &x3);
        &r - &quartic
    }

    pub fn graph_polynomial_float(&self, x: &[f64; 4]) -> f64 {
        let a = rational_to_f64(&self.alpha);
        x[3] - x[0] * x[1] - x[2] * x[2] - x[0] * x[0] * x[2] - a * x[0].powi(4)
    }
}

/// Tube over `Γ_α` in ℂ⁴.
pub fn make_gamma(alpha: &Rational) -> Hypersurface {
    tube_rho(&GammaFamily::new(alpha.clone()).graph_polynomial())
}

pub fn make_omega(alpha: &Rational, side: Side) -> SidedDomain {
    SidedDomain::new(make_gamma(alpha), side)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum GeneratorKind {
    Phi,
    Psi,
    Mu,
    Nu,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 4] = [Self::Phi, Self::Psi, Self::Mu, Self::Nu];

    pub fn name(self) -> &'static str {
        match self {
            Self::Phi => "phi",
            Self::Psi => "psi",
            Self::Mu => "mu",
            Self::Nu => "nu",
        }
    }
}

/// The affine generators of the symmetry group of `Γ_α`.
pub fn generator<T: RealScalar>(kind: GeneratorKind, alpha: &T, p: &T) -> Result<AffineMap<T>, CatalogError> {
    let o = T::zero;
    let l = T::one;
    let c = |n, d| T::ratio(n, d);
    let p2 = p.clone() * p.clone();
    let p3 = p2.clone() * p.clone();
    let p4 = p3.clone() * p.clone();
    let a = alpha.clone();
    let m = match kind {
        GeneratorKind::Phi => {
            if p.is_zero() {
                return Err(CatalogError::Domain("phi_q needs q != 0".into()));
            }
            AffineMap::new(
                vec![
                    vec![p.clone(), o(), o(), o()],
                    vec![o(), p3, o(), o()],
                    vec![o(), o(), p2, o()],
                    vec![o(), o(), o(), p4],
                ],
                vec![o(), o(), o(), o()],
            )
        }
        GeneratorKind::Psi => {
            // k = 4α − 1
            let k = c(4, 1) * a.clone() - l();
            let ak = a.clone() * k.clone();
            AffineMap::new(
                vec![
                    vec![l(), o(), o(), o()],
                    vec![-(c(4, 1) * ak.clone() * p2.clone()), l(), c(2, 1) * k.clone() * p.clone(), o()],
                    vec![-(c(4, 1) * a.clone() * p.clone()), o(), l(), o()],
                    vec![-(c(4, 3) * ak.clone() * p3.clone()), p.clone(), k * p2.clone(), l()],
                ],
                vec![
                    p.clone(),
                    -(c(4, 3) * ak.clone() * p3),
                    -(c(2, 1) * a * p2),
                    -(c(1, 3) * ak * p4),
                ],
            )
        }
        GeneratorKind::Mu => AffineMap::new(
            vec![
                vec![l(), o(), o(), o()],
                vec![o(), l(), o(), o()],
                vec![o(), o(), l(), o()],
                vec![p.clone(), o(), o(), l()],
            ],
            vec![o(), p.clone(), o(), o()],
        ),
        GeneratorKind::Nu => AffineMap::new(
            vec![
                vec![l(), o(), o(), o()],
                vec![-p.clone(), l(), o(), o()],
                vec![o(), o(), l(), o()],
                vec![o(), o(), c(2, 1) * p.clone(), l()],
            ],
            vec![o(), o(), p.clone(), p2],
        ),
    };
    Ok(m)
}

pub fn make_generator(kind: GeneratorKind, alpha: &Rational, param: &Rational) -> Result<AffineMapR, CatalogError> {
    generator(kind, alpha, param)
}

/// `F_{q,s,t,r} = φ_q ∘ μ_s ∘ ν_t ∘ ψ_r`.
pub fn composed_generator<T: RealScalar>(alpha: &T, q: &T, r: &T, s: &T, t: &T) -> Result<AffineMap<T>, CatalogError> {
    let phi = generator(GeneratorKind::Phi, alpha, q)?;
    let mu = generator(GeneratorKind::Mu, alpha, s)?;
    let nu = generator(GeneratorKind::Nu, alpha, t)?;
    let psi = generator(GeneratorKind::Psi, alpha, r)?;
    Ok(phi.compose(&mu.compose(&nu.compose(&psi))))
}

pub fn omega_base_point<T: RealScalar>() -> Vec<T> {
    vec![T::zero(), T::zero(), T::zero(), T::one()]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaParams<T> {
    pub q: T,
    pub r: T,
    pub s: T,
    pub t: T,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TransitiveSolution {
    Exact {
        params: OmegaParams<Rational>,
        map: AffineMapR,
    },
    Float {
        params: OmegaParams<f64>,
        map: AffineMap<f64>,
        /// sup-norm distance from `F(0,0,0,1)` to the target
        error: f64,
    },
}

/// `(r, s, t)` from the target and the fourth root `q`.
fn omega_rst<T: RealScalar>(alpha: &T, x: &[T], q: &T) -> (T, T, T) {
    let c = |n, d| T::ratio(n, d);
    let x1 = x[0].clone();
    let x1sq = x1.clone() * x1.clone();
    let x1cu = x1sq.clone() * x1.clone();
    let k = c(4, 1) * alpha.clone() - T::one();
    let q2 = q.clone() * q.clone();
    let q3 = q2.clone() * q.clone();
    let r = x1.clone() / q.clone();
    let s = (x[1].clone()
        + c(4, 3) * alpha.clone() * k * x1cu.clone()
        + x1 * x[2].clone()
        + c(2, 1) * alpha.clone() * x1cu)
        / q3;
    let t = (x[2].clone() + c(2, 1) * alpha.clone() * x1sq) / q2;
    (r, s, t)
}

fn omega_radicand<T: RealScalar>(alpha: &T, x: &[T]) -> T {
    let x1sq = x[0].clone() * x[0].clone();
    x[3].clone()
        - x[0].clone() * x[1].clone()
        - x[2].clone() * x[2].clone()
        - x1sq.clone() * x[2].clone()
        - alpha.clone() * x1sq.clone() * x1sq
}

/// Solves for the element of the affine group sending `(0,0,0,1)` to a
/// rational target. Exact when the radicand is a rational fourth power.
pub fn transitive_params_omega(alpha: &Rational, target: &[Rational]) -> Result<TransitiveSolution, CatalogError> {
    let radicand = omega_radicand(alpha, target);
    if !radicand.is_positive() {
        return Err(CatalogError::Domain(format!(
            "target is not above the graph (radicand {})",
            format_rational(&radicand)
        )));
    }
    match nth_root_exact(&radicand, 4) {
        Ok(q) => {
            let (r, s, t) = omega_rst(alpha, target, &q);
            let map = composed_generator(alpha, &q, &r, &s, &t)?;
            Ok(TransitiveSolution::Exact {
                params: OmegaParams { q, r, s, t },
                map,
            })
        }
        Err(_) => {
            let x: Vec<f64> = target.iter().map(rational_to_f64).collect();
            transitive_params_omega_float(rational_to_f64(alpha), &x)
        }
    }
}

pub fn transitive_params_omega_float(alpha: f64, target: &[f64]) -> Result<TransitiveSolution, CatalogError> {
    let radicand = omega_radicand(&alpha, target);
    if radicand <= 0.0 {
        return Err(CatalogError::Domain(format!("target is not above the graph (radicand {radicand})")));
    }
    let q = nth_root_float(radicand, 4)?;
    let (r, s, t) = omega_rst(&alpha, target, &q);
    let map = composed_generator(&alpha, &q, &r, &s, &t)?;
    let image = map.apply(&omega_base_point::<f64>());
    let error = image.iter().zip(target).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(TransitiveSolution::Float {
        params: OmegaParams { q, r, s, t },
        map,
        error,
    })
}

// ---------------------------------------------------------------------------
// Model domains and normalizers

/// `Re z4 − (z1 zb2 + z2 zb1 + |z3|² ± |z1|⁴)`
pub fn m_pm_rho(sign: PSign) -> HermitianPolynomial {
    let sp = VariableSpace::new(4);
    let quart = HermitianPolynomial::abs2(sp, 0).pow(2);
    let herm = &(&(&zvar(sp, 0) * &HermitianPolynomial::zbar(sp, 1)) + &(&zvar(sp, 1) * &HermitianPolynomial::zbar(sp, 0)))
        + &HermitianPolynomial::abs2(sp, 2);
    let f = match sign {
        PSign::Plus => &herm + &quart,
        PSign::Minus => &herm - &quart,
    };
    &HermitianPolynomial::re_z(sp, 3) - &f
}

pub fn make_m_pm(sign: PSign) -> Hypersurface {
    Hypersurface::new(m_pm_rho(sign)).expect("real-valued")
}

pub fn make_d_pm(sign: PSign, side: Side) -> SidedDomain {
    SidedDomain::new(make_m_pm(sign), side)
}

/// `Re z4 − |z1|² − |z2|² + |z3|²`
pub fn d0_rho() -> HermitianPolynomial {
    QuadricFamily::new(2, 3).expect("valid").rho()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalizer {
    pub alpha: Rational,
    pub map: ScaledHoloMap,
    /// Model defining function the tube is carried to.
    pub target: HermitianPolynomial,
    pub target_name: &'static str,
}

/// The polynomial biholomorphism carrying the tube over `Γ_α` to its model.
pub fn make_normalizer(alpha: &Rational) -> Result<Normalizer, CatalogError> {
    let sp = VariableSpace::new(4);
    let z = |i| zvar(sp, i);
    let z1sq = &z(0) * &z(0);
    let z1cu = &z1sq * &z(0);
    let z4_comp = {
        let mut c = z(3).scale_rational(&int(4));
        c = &c - &(&z(0) * &z(1)).scale_rational(&int(2));
        c = &c - &(&z(2) * &z(2)).scale_rational(&int(2));
        c = &c - &(&z1sq * &z(2));
        &c - &(&z1sq * &z1sq).scale_rational(&(alpha / int(2)))
    };
    let z3_core = &z(2) + &z1sq.scale_rational(&rat(1, 4));
    let sqrt2 = Radical::power(int(2), rat(1, 2))?;
    let inv_sqrt2 = Radical::power(int(2), rat(-1, 2))?;
    let twelfth = rat(1, 12);
    if *alpha == twelfth {
        // z1 ± (z2 + z1 z3 + z1³/12)
        let tail = &(&z(1) + &(&z(0) * &z(2))) + &z1cu.scale_rational(&twelfth);
        let core = HoloPolyMap::new(sp, vec![&z(0) + &tail, z3_core, &z(0) - &tail, z4_comp])?;
        return Ok(Normalizer {
            alpha: alpha.clone(),
            map: ScaledHoloMap::new(vec![inv_sqrt2.clone(), sqrt2, inv_sqrt2, Radical::one()], core),
            target: d0_rho(),
            target_name: "D0",
        });
    }
    let kappa4 = (rat(3, 2) * (alpha - &twelfth)).abs();
    let kappa = Radical::power(kappa4.clone(), rat(1, 4))?;
    let z2_core = &(&z(1) + &(&z(0) * &z(2))) + &z1cu.scale_rational(alpha);
    let core = HoloPolyMap::new(sp, vec![z(0), z2_core, z3_core, z4_comp])?;
    let (sign, name) = if *alpha > twelfth {
        (PSign::Plus, "M_plus")
    } else {
        (PSign::Minus, "M_minus")
    };
    Ok(Normalizer {
        alpha: alpha.clone(),
        map: ScaledHoloMap::new(vec![kappa.clone(), kappa.pow(-1), sqrt2, Radical::one()], core),
        target: m_pm_rho(sign),
        target_name: name,
    })
}

// ---------------------------------------------------------------------------
// The groups P_±

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PSign {
    Plus,
    Minus,
}

impl PSign {
    pub fn value(self) -> i64 {
        match self {
            PSign::Plus => 1,
            PSign::Minus => -1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PSign::Plus => "plus",
            PSign::Minus => "minus",
        }
    }
}

/// Reading of the constant tail of the fourth component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TailReading {
    /// `|τ|² ± |ρ|⁴`
    Modulus,
    /// `τ² ± ρ⁴`, kept as a negative control
    ModulusFree,
}

/// Parameters of an element of `P_±`, exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PParams {
    pub sign: PSign,
    pub q: Rational,
    pub phi: UnimodularPhase,
    pub psi: UnimodularPhase,
    pub u: Rational,
    pub rho: GaussianRational,
    pub sigma: GaussianRational,
    pub tau: GaussianRational,
    pub b: GaussianRational,
    pub d: GaussianRational,
}

impl PParams {
    pub fn identity(sign: PSign) -> Self {
        let z = GaussianRational::zero;
        Self {
            sign,
            q: int(1),
            phi: UnimodularPhase::identity(),
            psi: UnimodularPhase::identity(),
            u: int(0),
            rho: z(),
            sigma: z(),
            tau: z(),
            b: z(),
            d: z(),
        }
    }

    /// `Re(e^{iφ} b̄)`
    pub fn phase_b(&self) -> Rational {
        (self.phi.value() * &self.b.conj()).re
    }

    /// `|d|² + 2q³ Re(e^{iφ} b̄)`; zero exactly when the constraint holds.
    pub fn constraint_defect(&self) -> Rational {
        self.d.norm_sqr() + int(2) * self.q.pow(3) * self.phase_b()
    }

    pub fn check(&self) -> Result<(), CatalogError> {
        if !self.q.is_positive() {
            return Err(CatalogError::Constraint(format!("q = {} must be positive", format_rational(&self.q))));
        }
        if self.phase_b().is_positive() {
            return Err(CatalogError::Constraint("Re(e^{i phi} conj(b)) must be <= 0".into()));
        }
        let defect = self.constraint_defect();
        if !defect.is_zero() {
            return Err(CatalogError::Constraint(format!(
                "|d|^2 + 2q^3 Re(e^(i phi) conj(b)) = {} != 0",
                format_rational(&defect)
            )));
        }
        Ok(())
    }

    /// Parameters with `b` chosen so that the constraint holds:
    /// `e^{iφ} b̄ = −|d|²/(2q³) + iβ`.
    pub fn from_chart(
        sign: PSign,
        q: Rational,
        phi: UnimodularPhase,
        psi: UnimodularPhase,
        u: Rational,
        rho: GaussianRational,
        sigma: GaussianRational,
        tau: GaussianRational,
        d: GaussianRational,
        beta: Rational,
    ) -> Self {
        let re = -(d.norm_sqr() / (int(2) * q.pow(3)));
        let b = phi.value() * &GaussianRational::new(re, -beta);
        Self {
            sign,
            q,
            phi,
            psi,
            u,
            rho,
            sigma,
            tau,
            b,
            d,
        }
    }
}

/// Random exact parameters; small numerators and denominators keep the
/// symbolic expansions cheap.
pub fn random_p_params<R: Rng + ?Sized>(rng: &mut R, sign: PSign) -> PParams {
    let small = |rng: &mut R| rat(rng.gen_range(-4..=4), rng.gen_range(1..=3));
    let gauss = |rng: &mut R| GaussianRational::new(small(rng), small(rng));
    let q = rat(rng.gen_range(1..=5), rng.gen_range(1..=3));
    let phi = phase_from_parameter(&small(rng));
    let psi = phase_from_parameter(&small(rng));
    let u = small(rng);
    let (rho, sigma, tau, d) = (gauss(rng), gauss(rng), gauss(rng), gauss(rng));
    let beta = small(rng);
    PParams::from_chart(sign, q, phi, psi, u, rho, sigma, tau, d, beta)
}

/// Coefficients of the four components, in the order
/// `f1: [z1, 1]`, `f2: [z1, z2, z3, z1², 1]`, `f3: [z1, z3, 1]`,
/// `f4: [z1, z2, z3, z4, z1², 1]`.
pub trait PScalar: Clone + fmt::Debug {
    fn real(r: f64) -> Self;
    fn re_im(re: Self, im: Self) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn conj(&self) -> Self;
}

impl PScalar for GaussianRational {
    fn real(_: f64) -> Self {
        unreachable!("exact scalars are built from rationals")
    }
    fn re_im(re: Self, im: Self) -> Self {
        &re + &(&im * &GaussianRational::i())
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn conj(&self) -> Self {
        GaussianRational::conj(self)
    }
}

impl PScalar for ComplexFloat {
    fn real(r: f64) -> Self {
        ComplexFloat::new(r, 0.0)
    }
    fn re_im(re: Self, im: Self) -> Self {
        re + im * ComplexFloat::i()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn conj(&self) -> Self {
        ComplexFloat::conj(self)
    }
}

/// Parameter values as scalars of one type.
#[derive(Debug, Clone)]
pub struct PValues<C> {
    pub sign: PSign,
    pub q: C,
    pub ph: C,
    pub ps: C,
    pub iu: C,
    pub rho: C,
    pub sigma: C,
    pub tau: C,
    pub b: C,
    pub d: C,
}

pub fn p_coefficients<C: PScalar>(v: &PValues<C>, two: &C, reading: TailReading) -> [Vec<C>; 4] {
    let s_neg = v.sign == PSign::Plus; // upper sign of ∓ is −
    let q = &v.q;
    let q2 = q.mul(q);
    let q3 = q2.mul(q);
    let q4 = q3.mul(q);
    let ph2 = v.ph.mul(&v.ph);
    let (cr, cs, ct, cd) = (v.rho.conj(), v.sigma.conj(), v.tau.conj(), v.d.conj());
    let phps = v.ph.mul(&v.ps);
    let abs_rho2 = v.rho.mul(&cr);
    // ∓ x: subtract for P_+, add for P_−
    let mp = |acc: C, x: C| if s_neg { acc.sub(&x) } else { acc.add(&x) };
    let pm = |acc: C, x: C| if s_neg { acc.add(&x) } else { acc.sub(&x) };
    let zero = v.q.sub(&v.q);

    let f1 = vec![q.mul(&v.ph), v.rho.clone()];

    let f2_z1 = mp(q2.mul(&v.b), two.mul(&abs_rho2).mul(q).mul(&v.ph));
    let f2_z1sq = mp(zero.clone(), two.mul(&cr).mul(&q2).mul(&ph2));
    let f2 = vec![f2_z1, q3.mul(&v.ph), q.mul(&v.d), f2_z1sq, v.sigma.clone()];

    let f3 = vec![zero.sub(&cd.mul(&phps)), q2.mul(&v.ps), v.tau.clone()];

    let f4_z1 = two
        .mul(&cs)
        .mul(q)
        .mul(&v.ph)
        .add(&two.mul(&cr).mul(&q2).mul(&v.b))
        .sub(&two.mul(&ct).mul(&cd).mul(&phps));
    let f4_z2 = two.mul(&cr).mul(&q3).mul(&v.ph);
    let f4_z3 = two.mul(&cr).mul(q).mul(&v.d).add(&two.mul(&ct).mul(&q2).mul(&v.ps));
    let f4_z1sq = mp(zero.clone(), two.mul(&cr).mul(&cr).mul(&q2).mul(&ph2));
    let (tail_t, tail_r) = match reading {
        TailReading::Modulus => (v.tau.mul(&ct), abs_rho2.mul(&abs_rho2)),
        TailReading::ModulusFree => {
            let r2 = v.rho.mul(&v.rho);
            (v.tau.mul(&v.tau), r2.mul(&r2))
        }
    };
    let f4_const = pm(
        v.rho.mul(&cs).add(&v.sigma.mul(&cr)).add(&tail_t),
        tail_r,
    )
    .add(&v.iu);
    let f4 = vec![f4_z1, f4_z2, f4_z3, q4, f4_z1sq, f4_const];
    [f1, f2, f3, f4]
}

impl PParams {
    pub fn values(&self) -> PValues<GaussianRational> {
        PValues {
            sign: self.sign,
            q: gr(self.q.clone()),
            ph: self.phi.value().clone(),
            ps: self.psi.value().clone(),
            iu: GaussianRational::new(int(0), self.u.clone()),
            rho: self.rho.clone(),
            sigma: self.sigma.clone(),
            tau: self.tau.clone(),
            b: self.b.clone(),
            d: self.d.clone(),
        }
    }
}

fn p_map_from_coefficients(c: &[Vec<GaussianRational>; 4]) -> HoloPolyMap {
    let sp = VariableSpace::new(4);
    let z = |i| zvar(sp, i);
    let z1sq = &z(0) * &z(0);
    let lin = |terms: &[(&HermitianPolynomial, &GaussianRational)], k: &GaussianRational| {
        terms
            .iter()
            .fold(cst(sp, k.clone()), |acc, (m, c)| &acc + &m.scale(c))
    };
    let f1 = lin(&[(&z(0), &c[0][0])], &c[0][1]);
    let f2 = lin(&[(&z(0), &c[1][0]), (&z(1), &c[1][1]), (&z(2), &c[1][2]), (&z1sq, &c[1][3])], &c[1][4]);
    let f3 = lin(&[(&z(0), &c[2][0]), (&z(2), &c[2][1])], &c[2][2]);
    let f4 = lin(
        &[(&z(0), &c[3][0]), (&z(1), &c[3][1]), (&z(2), &c[3][2]), (&z(3), &c[3][3]), (&z1sq, &c[3][4])],
        &c[3][5],
    );
    HoloPolyMap::new(sp, vec![f1, f2, f3, f4]).expect("holomorphic")
}

/// The element of `P_±` with the given parameters, without checking the
/// constraint (used for negative controls).
pub fn make_p_element_unchecked(params: &PParams, reading: TailReading) -> HoloPolyMap {
    let c = p_coefficients(&params.values(), &GaussianRational::from(2), reading);
    p_map_from_coefficients(&c)
}

pub fn make_p_element(params: &PParams) -> Result<HoloPolyMap, CatalogError> {
    params.check()?;
    Ok(make_p_element_unchecked(params, TailReading::Modulus))
}

/// Reads the parameters back from an expanded map of the form of a `P_±`
/// element, then regenerates the map and demands exact equality.
pub fn recover_p_params(map: &HoloPolyMap, sign: PSign) -> Result<PParams, CatalogError> {
    let sp = VariableSpace::new(4);
    if map.space_in() != sp || map.space_out() != sp {
        return Err(CatalogError::ClosureViolation("not a map of C^4".into()));
    }
    let comps = map.components();
    let coef = |k: usize, i: usize| comps[k].coefficient(zvar(sp, i).first_monomial().expect("monomial"));
    let q4 = coef(3, 3);
    if !q4.is_real() {
        return Err(CatalogError::ClosureViolation(format!("z4-coefficient {q4} is not real")));
    }
    let q = nth_root_exact(&q4.re, 4)
        .map_err(|_| CatalogError::ClosureViolation(format!("q^4 = {} is not a rational fourth power", q4)))?;
    let qg = gr(q.clone());
    let ph = coef(0, 0).checked_div(&qg)?;
    let rho = comps[0].constant_term();
    let ps = coef(2, 2).checked_div(&(&qg * &qg))?;
    // z1-coefficient of f3 is −conj(d)·ph·ps
    let d = (-coef(2, 0).checked_div(&(&ph * &ps))?).conj();
    // z1-coefficient of f2 is ∓2|ρ|²q·ph + q²b
    let corr = gr(int(2) * rho.norm_sqr()).scale(&q) * ph.clone();
    let f2z1 = coef(1, 0);
    let b_num = match sign {
        PSign::Plus => &f2z1 + &corr,
        PSign::Minus => &f2z1 - &corr,
    };
    let b = b_num.checked_div(&(&qg * &qg))?;
    let sigma = comps[1].constant_term();
    let tau = comps[2].constant_term();
    let u = comps[3].constant_term().im;
    let phi = UnimodularPhase::new(ph).map_err(|e| CatalogError::ClosureViolation(e.to_string()))?;
    let psi = UnimodularPhase::new(ps).map_err(|e| CatalogError::ClosureViolation(e.to_string()))?;
    let params = PParams {
        sign,
        q,
        phi,
        psi,
        u,
        rho,
        sigma,
        tau,
        b,
        d,
    };
    params.check().map_err(|e| CatalogError::ClosureViolation(e.to_string()))?;
    if make_p_element_unchecked(&params, TailReading::Modulus) != *map {
        return Err(CatalogError::ClosureViolation("regenerated map differs".into()));
    }
    Ok(params)
}

/// Parameters of `a ∘ b`.
pub fn p_compose(a: &PParams, b: &PParams) -> Result<PParams, CatalogError> {
    if a.sign != b.sign {
        return Err(CatalogError::Domain("cannot compose elements of different groups".into()));
    }
    let f = maps::compose(&make_p_element(a)?, &make_p_element(b)?)?;
    recover_p_params(&f, a.sign)
}

/// Inverse of a polynomial map that is triangular in the order
/// `z1, z3, z2, z4`: component `k` equals `c_k z_{v_k}` plus terms in
/// variables already solved.
fn triangular_inverse(map: &HoloPolyMap) -> Result<HoloPolyMap, CatalogError> {
    let sp = map.space_in();
    let n = sp.n();
    let order = [0usize, 2, 1, 3];
    let mut solved: Vec<Option<HermitianPolynomial>> = vec![None; n];
    for &k in &order {
        let comp = &map.components()[k];
        let mono = zvar(sp, k).first_monomial().expect("monomial").clone();
        let c = comp.coefficient(&mono);
        let cinv = c.inv()?;
        let mut rest = comp.clone();
        rest.add_term(mono, -c);
        // rest may only involve already solved variables
        let mut images: Vec<HermitianPolynomial> = (0..n)
            .map(|i| solved[i].clone().unwrap_or_else(|| HermitianPolynomial::zero(sp)))
            .collect();
        let conj: Vec<HermitianPolynomial> = images.iter().map(HermitianPolynomial::conjugate).collect();
        images.extend(conj);
        let rest_w = rest.substitute(&images)?;
        solved[k] = Some((&zvar(sp, k) - &rest_w).scale(&cinv));
    }
    let g = HoloPolyMap::new(sp, solved.into_iter().map(|p| p.expect("solved")).collect())?;
    if maps::compose(&g, map)? != HoloPolyMap::identity(sp) {
        return Err(CatalogError::ClosureViolation("map is not triangular".into()));
    }
    Ok(g)
}

pub fn p_inverse(a: &PParams) -> Result<PParams, CatalogError> {
    let g = triangular_inverse(&make_p_element(a)?)?;
    recover_p_params(&g, a.sign)
}

/// Number of real parameters in the chart
/// `(q, φ, ψ, u, ρ, σ, τ, d, β)` of `P_±`.
pub const P_CHART_DIM: usize = 13;

/// Map coefficients as a real vector, for chart coordinates around the
/// identity: `q = 1 + x0`, `φ = x1`, `ψ = x2`, `u = x3`, `ρ = x4 + i x5`,
/// `σ = x6 + i x7`, `τ = x8 + i x9`, `d = x10 + i x11`, `β = x12`.
pub fn p_chart_coefficients(sign: PSign, x: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), P_CHART_DIM);
    let c = |a: f64, b: f64| ComplexFloat::new(a, b);
    let q = 1.0 + x[0];
    let ph = ComplexFloat::from_polar(1.0, x[1]);
    let d = c(x[10], x[11]);
    let b = ph * c(-d.norm_sqr() / (2.0 * q.powi(3)), -x[12]);
    let v = PValues {
        sign,
        q: c(q, 0.0),
        ph,
        ps: ComplexFloat::from_polar(1.0, x[2]),
        iu: c(0.0, x[3]),
        rho: c(x[4], x[5]),
        sigma: c(x[6], x[7]),
        tau: c(x[8], x[9]),
        b,
        d,
    };
    p_coefficients(&v, &c(2.0, 0.0), TailReading::Modulus)
        .iter()
        .flatten()
        .flat_map(|z| [z.re, z.im])
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartRank {
    pub rank: usize,
    pub singular_values: Vec<f64>,
    pub cutoff: f64,
}

/// Numerical rank of the chart Jacobian at the identity by central
/// differences and an SVD.
pub fn p_chart_rank(sign: PSign, step: f64, cutoff: f64) -> ChartRank {
    let x0 = vec![0.0; P_CHART_DIM];
    let rows = p_chart_coefficients(sign, &x0).len();
    let mut jac = DMatrix::<f64>::zeros(rows, P_CHART_DIM);
    for j in 0..P_CHART_DIM {
        let mut xp = x0.clone();
        let mut xm = x0.clone();
        xp[j] += step;
        xm[j] -= step;
        let fp = p_chart_coefficients(sign, &xp);
        let fm = p_chart_coefficients(sign, &xm);
        for i in 0..rows {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * step);
        }
    }
    let mut singular_values: Vec<f64> = jac.svd(false, false).singular_values.iter().copied().collect();
    singular_values.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    ChartRank {
        rank: singular_values.iter().filter(|&&s| s > cutoff).count(),
        singular_values,
        cutoff,
    }
}

/// The Hermitian form `z1 zb2 + z2 zb1 + |z3|²` as a matrix.
pub fn pairing_form() -> Matrix<GaussianRational> {
    let o = || GaussianRational::from(0);
    let l = || GaussianRational::from(1);
    vec![vec![o(), l(), o()], vec![l(), o(), o()], vec![o(), o(), l()]]
}

/// Linear part of a translation-free element, acting on `(z1, z2, z3)`.
pub fn make_isotropy_matrix(params: &PParams) -> Result<Matrix<GaussianRational>, CatalogError> {
    params.check()?;
    let z = GaussianRational::zero;
    if !(params.rho.is_zero() && params.sigma.is_zero() && params.tau.is_zero() && params.u.is_zero()) {
        return Err(CatalogError::Domain("isotropy matrices need rho = sigma = tau = u = 0".into()));
    }
    let q = gr(params.q.clone());
    let qinv = q.inv()?;
    let ph = params.phi.value();
    let ps = params.psi.value();
    Ok(vec![
        vec![ph * &qinv, z(), z()],
        vec![params.b.clone(), &q * ph, &params.d * &qinv],
        vec![-(&(&params.d.conj() * &(&qinv * &qinv)) * &(ph * ps)), z(), ps.clone()],
    ])
}

/// `Uᵗ H Ū − H`
pub fn pseudo_unitary_residual(u: &Matrix<GaussianRational>, h: &Matrix<GaussianRational>) -> Matrix<GaussianRational> {
    let ut: Matrix<GaussianRational> = (0..u.len()).map(|i| u.iter().map(|row| row[i].clone()).collect()).collect();
    let ubar: Matrix<GaussianRational> = u.iter().map(|r| r.iter().map(GaussianRational::conj).collect()).collect();
    let m = linalg::mat_mul(&linalg::mat_mul(&ut, h), &ubar);
    m.iter()
        .zip(h)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
        .collect()
}

// ---------------------------------------------------------------------------
// Quadrics

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct QuadricFamily {
    pub p: usize,
    pub n: usize,
}

impl QuadricFamily {
    /// Requires `1 ≤ p ≤ n ≤ 2p`.
    pub fn new(p: usize, n: usize) -> Result<Self, CatalogError> {
        if p == 0 || p > n || n > 2 * p {
            return Err(CatalogError::Domain(format!("quadric needs 1 <= p <= n <= 2p, got p={p}, n={n}")));
        }
        Ok(Self { p, n })
    }

    pub fn space(&self) -> VariableSpace {
        VariableSpace::new(self.n + 1)
    }

    /// `±1` on the diagonal of `H_{p,n}`.
    pub fn eps(&self, j: usize) -> i64 {
        if j < self.p {
            1
        } else {
            -1
        }
    }

    /// `H(z, zb)` on the first `n` variables.
    pub fn hermitian(&self) -> HermitianPolynomial {
        let sp = self.space();
        (0..self.n).fold(HermitianPolynomial::zero(sp), |acc, j| {
            &acc + &HermitianPolynomial::abs2(sp, j).scale_rational(&int(self.eps(j)))
        })
    }

    /// `Re z_{n+1} − H(z, zb)`
    pub fn rho(&self) -> HermitianPolynomial {
        &HermitianPolynomial::re_z(self.space(), self.n) - &self.hermitian()
    }

    /// Tube defining function `Re z_{n+1} − H(Re z, Re z)`.
    pub fn tube_rho(&self) -> HermitianPolynomial {
        let sp = self.space();
        (0..self.n).fold(HermitianPolynomial::re_z(sp, self.n), |acc, j| {
            let x = HermitianPolynomial::re_z(sp, j);
            &acc - &(&x * &x).scale_rational(&int(self.eps(j)))
        })
    }

    pub fn h_value(&self, z: &[GaussianRational], w: &[GaussianRational]) -> GaussianRational {
        (0..self.n).fold(GaussianRational::zero(), |acc, j| {
            &acc + &(&z[j] * &w[j].conj()).scale(&int(self.eps(j)))
        })
    }
}

pub fn make_quadric_domain(p: usize, n: usize, side: Side) -> Result<SidedDomain, CatalogError> {
    let fam = QuadricFamily::new(p, n)?;
    Ok(SidedDomain::new(Hypersurface::new(fam.rho()).expect("real-valued"), side))
}

/// `z ↦ az + b`, `z_{n+1} ↦ 2aH(z, b̄) + a²z_{n+1} + H(b, b̄) + ic`.
pub fn quadric_transitive_map(
    fam: &QuadricFamily,
    a: &Rational,
    b: &[GaussianRational],
    c: &Rational,
) -> Result<HoloPolyMap, CatalogError> {
    if a.is_zero() {
        return Err(CatalogError::Domain("a must be nonzero".into()));
    }
    if b.len() != fam.n {
        return Err(CatalogError::Domain(format!("b needs {} entries", fam.n)));
    }
    let sp = fam.space();
    let mut comps: Vec<HermitianPolynomial> = (0..fam.n)
        .map(|j| &zvar(sp, j).scale_rational(a) + &cst(sp, b[j].clone()))
        .collect();
    let mut last = zvar(sp, fam.n).scale_rational(&(a * a));
    for j in 0..fam.n {
        let k = b[j].conj().scale(&(int(2 * fam.eps(j)) * a));
        last = &last + &zvar(sp, j).scale(&k);
    }
    let tail = &fam.h_value(b, b) + &GaussianRational::new(int(0), c.clone());
    last = &last + &cst(sp, tail);
    comps.push(last);
    Ok(HoloPolyMap::new(sp, comps)?)
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuadricParams {
    Exact {
        a: Rational,
        b: Vec<GaussianRational>,
        c: Rational,
    },
    /// `a² ` is not a rational square.
    Float {
        a: f64,
        a_squared: Rational,
        b: Vec<GaussianRational>,
        c: Rational,
    },
}

pub fn quadric_base_point(fam: &QuadricFamily, side: Side) -> Vec<GaussianRational> {
    let mut p = vec![GaussianRational::zero(); fam.n + 1];
    p[fam.n] = GaussianRational::from(side.sign() as i64);
    p
}

/// Parameters of the map sending the base point `(0, …, 0, ±1)` to `target`.
pub fn quadric_transitive_params(
    fam: &QuadricFamily,
    side: Side,
    target: &[GaussianRational],
) -> Result<QuadricParams, CatalogError> {
    let b = target[..fam.n].to_vec();
    let w = &target[fam.n];
    let a2 = (&w.re - &fam.h_value(&b, &b).re) * int(side.sign() as i64);
    if !a2.is_positive() {
        return Err(CatalogError::Domain("target is not strictly inside the domain".into()));
    }
    let c = w.im.clone();
    Ok(match nth_root_exact(&a2, 2) {
        Ok(a) => QuadricParams::Exact { a, b, c },
        Err(_) => QuadricParams::Float {
            a: rational_to_f64(&a2).sqrt(),
            a_squared: a2,
            b,
            c,
        },
    })
}

/// `z ↦ √2 z`, `z_{n+1} ↦ z_{n+1} + H(z, z)` with `H` bilinear on
/// holomorphic coordinates. Carries the quadric side to the tube side.
pub fn make_tube_realisation(fam: &QuadricFamily) -> Result<ScaledHoloMap, CatalogError> {
    let sp = fam.space();
    let mut comps: Vec<HermitianPolynomial> = (0..fam.n).map(|j| zvar(sp, j)).collect();
    let hzz = (0..fam.n).fold(zvar(sp, fam.n), |acc, j| {
        &acc + &(&zvar(sp, j) * &zvar(sp, j)).scale_rational(&int(fam.eps(j)))
    });
    comps.push(hzz);
    let sqrt2 = Radical::power(int(2), rat(1, 2))?;
    let mut scales = vec![sqrt2; fam.n];
    scales.push(Radical::one());
    Ok(ScaledHoloMap::new(scales, HoloPolyMap::new(sp, comps)?))
}

// ---------------------------------------------------------------------------
// Cayley surface and the σ-family

/// `x3 − x1x2 − x1³`
pub fn cayley_polynomial() -> RealPolynomial {
    let x = |i| RealPolynomial::x(3, i);
    let x1 = x(0);
    &(&x(2) - &(&x1 * &x(1))) - &(&(&x1 * &x1) * &x1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CayleyObjects {
    pub surface: Hypersurface,
    pub map: ScaledHoloMap,
    /// `Re z3 − |z1|² + |z2|²`
    pub target: HermitianPolynomial,
}

pub fn make_cayley_objects() -> Result<CayleyObjects, CatalogError> {
    let sp = VariableSpace::new(3);
    let z = |i| zvar(sp, i);
    let z1sq = &z(0) * &z(0);
    let tail = &z(1) + &z1sq.scale_rational(&rat(3, 2));
    let third = &(&z(2).scale_rational(&int(4)) - &(&z(0) * &z(1)).scale_rational(&int(2))) - &(&z1sq * &z(0));
    let core = HoloPolyMap::new(sp, vec![&z(0) + &tail, &z(0) - &tail, third])?;
    let inv_sqrt2 = Radical::power(int(2), rat(-1, 2))?;
    let map = ScaledHoloMap::new(vec![inv_sqrt2.clone(), inv_sqrt2, Radical::one()], core);
    let target = QuadricFamily::new(1, 2)?.rho();
    Ok(CayleyObjects {
        surface: tube_rho(&cayley_polynomial()),
        map,
        target,
    })
}

/// Right end of the σ interval, `17 + 12√2`.
pub fn sigma_upper() -> f64 {
    17.0 + 12.0 * 2f64.sqrt()
}

/// Graph function of the σ-family in seven variables.
pub fn make_sigma_surface(sigma: f64) -> Result<FloatPolynomial, CatalogError> {
    if !(1.0..sigma_upper()).contains(&sigma) {
        return Err(CatalogError::Domain(format!("sigma = {sigma} outside [1, 17+12*sqrt(2))")));
    }
    let e = |pairs: &[(usize, u32)]| {
        let mut v = vec![0u32; 7];
        for &(i, k) in pairs {
            v[i] += k;
        }
        v
    };
    let r3s = (3.0 * sigma).sqrt();
    let terms = vec![
        (e(&[(0, 2)]), 1.0),
        (e(&[(1, 2)]), 1.0),
        (e(&[(2, 2)]), 1.0),
        (e(&[(3, 1), (4, 1)]), 1.0),
        (e(&[(5, 1), (6, 1)]), 1.0),
        (e(&[(0, 1), (3, 1), (5, 1)]), 2.0 * (2.0 * (1.0 + sigma)).sqrt()),
        (e(&[(1, 1), (5, 2)]), 2.0 * r3s),
        (e(&[(1, 1), (3, 2)]), (1.0 + sigma) / r3s),
        (e(&[(2, 1), (3, 2)]), ((-sigma * sigma + 34.0 * sigma - 1.0) / (3.0 * sigma)).sqrt()),
        // (x4² + x6²)(x4² + σx6²)
        (e(&[(3, 4)]), 1.0),
        (e(&[(3, 2), (5, 2)]), 1.0 + sigma),
        (e(&[(5, 4)]), sigma),
    ];
    Ok(FloatPolynomial { n: 7, terms })
}

// ---------------------------------------------------------------------------

pub fn is_zero_matrix(m: &Matrix<GaussianRational>) -> bool {
    m.iter().flatten().all(Zero::is_zero)
}
