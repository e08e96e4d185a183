//! Real hypersurfaces in ℂⁿ, the domains on either side, Levi forms and
//! complex-line containment witnesses.
//!
//! Orientation: a [`SidedDomain`] with side `+1` is `{ρ > 0}`. The Levi form
//! of a side is computed from the inward-negative defining function `−side·ρ`,
//! so e.g. the ball side `Re w > |z|²` of the sphere quadric is positive
//! definite.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::eigen::{self, Signature};
use crate::exact_arith::{rat, ComplexFloat, GaussianRational, Rational};
use crate::polynomial::{FloatPolynomial, HermitianPolynomial, PolyError, VariableSpace};

/// Gradient norm below which a point is not treated as a hypersurface point.
pub const GRADIENT_TOL: f64 = 1e-9;
/// Half-width of the `on_boundary` band on the floating path.
pub const BOUNDARY_BAND: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("defining function is not real-valued")]
    NotRealValued,
    #[error("gradient vanishes at the point; not a hypersurface point")]
    NotAHypersurfacePoint,
    #[error("direction must be nonzero")]
    ZeroDirection,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypersurface {
    rho: HermitianPolynomial,
}

impl Hypersurface {
    pub fn new(rho: HermitianPolynomial) -> Result<Self, GeometryError> {
        if rho.is_real_valued() {
            Ok(Self { rho })
        } else {
            Err(GeometryError::NotRealValued)
        }
    }

    pub fn rho(&self) -> &HermitianPolynomial {
        &self.rho
    }

    pub fn space(&self) -> VariableSpace {
        self.rho.space()
    }

    /// `(∂ρ/∂z_j)(p)` for the holomorphic variables.
    pub fn holomorphic_gradient(&self, point: &[ComplexFloat]) -> Result<Vec<ComplexFloat>, GeometryError> {
        (0..self.space().n())
            .map(|j| Ok(self.rho.partial(j)?.evaluate_float(point)?))
            .collect()
    }

    /// Exact complex Hessian `∂²ρ/∂z_j∂zb_k` as polynomials.
    pub fn complex_hessian(&self) -> Vec<Vec<HermitianPolynomial>> {
        let n = self.space().n();
        (0..n)
            .map(|j| {
                let dj = self.rho.partial(j).expect("index in range");
                (0..n)
                    .map(|k| dj.partial(k + n).expect("index in range"))
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Side {
    /// `ρ > 0`
    Positive,
    /// `ρ < 0`
    Negative,
}

impl Side {
    pub fn sign(self) -> i32 {
        match self {
            Side::Positive => 1,
            Side::Negative => -1,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Side::Positive => ">",
            Side::Negative => "<",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SidedDomain {
    pub surface: Hypersurface,
    pub side: Side,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Membership {
    Inside,
    OnBoundary,
    Outside,
}

impl SidedDomain {
    pub fn new(surface: Hypersurface, side: Side) -> Self {
        Self { surface, side }
    }

    fn classify_sign(&self, s: i32) -> Membership {
        match s {
            0 => Membership::OnBoundary,
            s if s == self.side.sign() => Membership::Inside,
            _ => Membership::Outside,
        }
    }

    /// Exact classification by the sign of `ρ(p)`.
    pub fn side_of(&self, point: &[GaussianRational]) -> Result<Membership, GeometryError> {
        let v = self.surface.rho.evaluate(point)?;
        debug_assert!(v.is_real());
        let s = match v.re.cmp(&Rational::from_integer(0.into())) {
            std::cmp::Ordering::Greater => 1,
            std::cmp::Ordering::Less => -1,
            std::cmp::Ordering::Equal => 0,
        };
        Ok(self.classify_sign(s))
    }

    /// Floating classification with a `1e-12` boundary band.
    pub fn side_of_float(&self, point: &[ComplexFloat]) -> Result<Membership, GeometryError> {
        let v = self.surface.rho.evaluate_float(point)?.re;
        let s = if v > BOUNDARY_BAND {
            1
        } else if v < -BOUNDARY_BAND {
            -1
        } else {
            0
        };
        Ok(self.classify_sign(s))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeviData {
    pub point: Vec<(f64, f64)>,
    /// Levi matrix on an orthonormal basis of the complex tangent space.
    #[serde(skip)]
    pub hessian: Vec<Vec<ComplexFloat>>,
    pub eigenvalues: Vec<f64>,
    pub signature: Signature,
}

impl LeviData {
    /// `min |λ| / max |λ|`; zero for a degenerate form.
    pub fn nondegeneracy_margin(&self) -> f64 {
        let radius = eigen::spectral_radius(&self.eigenvalues);
        if radius == 0.0 {
            return 0.0;
        }
        self.eigenvalues.iter().fold(f64::INFINITY, |a, x| a.min(x.abs())) / radius
    }
}

/// Orthonormal basis of `{v : Σ g_j v_j = 0}` by modified Gram–Schmidt on
/// the standard basis projected off the direction `conj(g)`.
fn complex_tangent_basis(grad: &[ComplexFloat]) -> Vec<Vec<ComplexFloat>> {
    let n = grad.len();
    let norm = grad.iter().map(|g| g.norm_sqr()).sum::<f64>().sqrt();
    let normal: Vec<ComplexFloat> = grad.iter().map(|g| g.conj() / norm).collect();
    let dot = |a: &[ComplexFloat], b: &[ComplexFloat]| -> ComplexFloat {
        a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
    };
    let mut basis: Vec<Vec<ComplexFloat>> = vec![normal.clone()];
    let mut out = Vec::new();
    for k in 0..n {
        let mut v = vec![ComplexFloat::new(0.0, 0.0); n];
        v[k] = ComplexFloat::new(1.0, 0.0);
        for b in &basis {
            let c = dot(&v, b);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= c * bi;
            }
        }
        let len = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if len > 1e-8 {
            let u: Vec<ComplexFloat> = v.iter().map(|x| x / len).collect();
            basis.push(u.clone());
            out.push(u);
        }
        if out.len() == n - 1 {
            break;
        }
    }
    out
}

/// Levi form of the side `{side·ρ > 0}` at a boundary point.
pub fn levi_form_sided(
    surface: &Hypersurface,
    side: Side,
    point: &[ComplexFloat],
) -> Result<LeviData, GeometryError> {
    let grad = surface.holomorphic_gradient(point)?;
    let gnorm = grad.iter().map(|g| g.norm_sqr()).sum::<f64>().sqrt();
    if gnorm < GRADIENT_TOL {
        return Err(GeometryError::NotAHypersurfacePoint);
    }
    let orient = -(side.sign() as f64);
    let full: Vec<Vec<ComplexFloat>> = surface
        .complex_hessian()
        .iter()
        .map(|row| {
            row.iter()
                .map(|p| p.evaluate_float(point).map(|v| v * orient))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    let basis = complex_tangent_basis(&grad);
    let m = basis.len();
    // A_ab = Σ_jk L_jk B_a,j conj(B_b,k)
    let mut a = vec![vec![ComplexFloat::new(0.0, 0.0); m]; m];
    for (ia, ba) in basis.iter().enumerate() {
        for (ib, bb) in basis.iter().enumerate() {
            let mut s = ComplexFloat::new(0.0, 0.0);
            for (j, row) in full.iter().enumerate() {
                for (k, l) in row.iter().enumerate() {
                    s += l * ba[j] * bb[k].conj();
                }
            }
            a[ia][ib] = s;
        }
    }
    // symmetrize away rounding
    for i in 0..m {
        for j in 0..i {
            let avg = (a[i][j] + a[j][i].conj()) * 0.5;
            a[i][j] = avg;
            a[j][i] = avg.conj();
        }
        a[i][i] = ComplexFloat::new(a[i][i].re, 0.0);
    }
    let eigenvalues = eigen::hermitian_eigenvalues(&a);
    let signature = eigen::signature_of(&eigenvalues);
    Ok(LeviData {
        point: point.iter().map(|z| (z.re, z.im)).collect(),
        hessian: a,
        eigenvalues,
        signature,
    })
}

/// Levi form oriented toward `{ρ > 0}`.
pub fn levi_form(surface: &Hypersurface, point: &[ComplexFloat]) -> Result<LeviData, GeometryError> {
    levi_form_sided(surface, Side::Positive, point)
}

/// Signature of the real Hessian of `f` at `x`. For the tube over the graph
/// `x_{n+1} = f(x)` this equals the Levi signature of the side
/// `x_{n+1} > f(x)`.
pub fn tube_hessian_signature(f: &FloatPolynomial, x: &[f64]) -> (Signature, Vec<f64>) {
    let h = f.hessian(x);
    let ev = eigen::symmetric_eigenvalues(&h);
    (eigen::signature_of(&ev), ev)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineWitness {
    /// Every sampled point of the line lies in the domain.
    pub samples_inside: bool,
    /// First sample parameter whose point is not inside.
    pub first_failure: Option<(f64, f64)>,
    /// Value of `ρ` on the line when it is constant there.
    pub constant_value: Option<String>,
    /// Exact statement covering the whole line: `side·ρ` restricted to it is
    /// a positive constant plus nonnegative multiples of `|t|^{2k}`.
    pub exact_certificate: bool,
}

/// Sample parameters containing moduli `0, 1, 10³, 10⁶` and a few phases.
pub fn default_line_samples() -> Vec<GaussianRational> {
    let mut v = vec![GaussianRational::from(0)];
    for m in [1i64, 1000, 1_000_000] {
        v.push(GaussianRational::from(m));
        v.push(GaussianRational::from_ints(0, m));
        v.push(GaussianRational::from_ints(-m, 0));
    }
    v.push(GaussianRational::new(rat(3, 5), rat(4, 5)));
    v.push(GaussianRational::new(rat(-3000, 5), rat(4000, 5)));
    v
}

/// `p(t, tb) = c₀ + Σ c_k |t|^{2k}` with `c₀ > 0` and every `c_k ≥ 0`.
fn sign_certificate(p: &HermitianPolynomial) -> bool {
    let c0 = p.constant_term();
    if !(c0.is_real() && c0.re > Rational::from_integer(0.into())) {
        return false;
    }
    p.terms().all(|(m, c)| {
        let e = m.exponents();
        e[0] == e[1] && c.is_real() && c.re >= Rational::from_integer(0.into())
    })
}

/// Checks that `base + t·direction` lies in the domain for all sampled `t`,
/// and whether `ρ` restricted to the line is a constant of the right sign
/// or more generally bounded away from zero with the domain's sign (which
/// certifies the whole line).
pub fn contains_complex_line(
    domain: &SidedDomain,
    base: &[GaussianRational],
    direction: &[GaussianRational],
    samples: &[GaussianRational],
) -> Result<LineWitness, GeometryError> {
    if direction.iter().all(|d| num_traits::Zero::is_zero(d)) {
        return Err(GeometryError::ZeroDirection);
    }
    let mut first_failure = None;
    for t in samples {
        let p: Vec<GaussianRational> = base
            .iter()
            .zip(direction)
            .map(|(b, d)| b + &(t * d))
            .collect();
        if domain.side_of(&p)? != Membership::Inside {
            let f = t.to_float();
            first_failure = Some((f.re, f.im));
            break;
        }
    }
    // restrict ρ to the line: one complex variable t
    let line = VariableSpace::new(1);
    let rho = domain.surface.rho();
    let n = rho.space().n();
    let mut images = Vec::with_capacity(2 * n);
    let t = HermitianPolynomial::z(line, 0);
    for (b, d) in base.iter().zip(direction) {
        images.push(&HermitianPolynomial::constant(line, b.clone()) + &t.scale(d));
    }
    for i in 0..n {
        let c = images[i].conjugate();
        images.push(c);
    }
    let restricted = rho.substitute(&images)?;
    let constant_value = restricted.is_constant().then(|| restricted.constant_term().to_string());
    let exact_certificate = sign_certificate(&restricted.scale_rational(&Rational::from_integer(domain.side.sign().into())));
    Ok(LineWitness {
        samples_inside: first_failure.is_none(),
        first_failure,
        constant_value,
        exact_certificate,
    })
}

/// Random rational in `[lo, hi]` with denominator at most `max_den`.
pub fn random_rational<R: Rng + ?Sized>(rng: &mut R, lo: i64, hi: i64, max_den: i64) -> Rational {
    let d = rng.gen_range(1..=max_den);
    let n = rng.gen_range(lo * d..=hi * d);
    rat(n, d)
}

pub fn random_gaussian<R: Rng + ?Sized>(rng: &mut R, lo: i64, hi: i64, max_den: i64) -> GaussianRational {
    GaussianRational::new(random_rational(rng, lo, hi, max_den), random_rational(rng, lo, hi, max_den))
}

/// Exact point on `{ρ = 0}` for a defining function of the form
/// `Re z_n − G(z_1..z_{n−1})` with `G` real-valued: random rational
/// `z_1..z_{n−1}` in `[−2, 2]`, `Re z_n` solved exactly, `Im z_n` random.
pub fn sample_graph_boundary_point<R: Rng + ?Sized>(
    rho: &HermitianPolynomial,
    rng: &mut R,
) -> Result<Vec<GaussianRational>, GeometryError> {
    let n = rho.space().n();
    let mut p: Vec<GaussianRational> = (0..n - 1).map(|_| random_gaussian(rng, -2, 2, 8)).collect();
    p.push(GaussianRational::new(Rational::from_integer(0.into()), random_rational(rng, -3, 3, 8)));
    // ρ = Re z_n − G, so ρ(p with Re z_n = 0) = −G(p)
    let g = -rho.evaluate(&p)?.re;
    p[n - 1].re = g;
    Ok(p)
}
