//! Exact computations in sl(3,ℂ), u(2,1) and su(2,1): brackets, the trace
//! form, orthogonal complements, centralizer dimensions, subalgebra tests and
//! stabilizers of lines.

use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::chern_moser::HermitianForm;
use crate::exact_arith::{phase_from_parameter, rat, ArithError, GaussianRational, Rational};
use crate::linalg::{self, Matrix};

pub type Matrix3 = Matrix<GaussianRational>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LieError {
    #[error("basis is linearly dependent")]
    Dependent,
    #[error("zero vector")]
    ZeroVector,
    #[error("element is not in the ambient algebra")]
    NotInAmbient,
    #[error(transparent)]
    Arith(#[from] ArithError),
}

fn c(re: i64, im: i64) -> GaussianRational {
    GaussianRational::from_ints(re, im)
}

pub fn zero3() -> Matrix3 {
    vec![vec![GaussianRational::zero(); 3]; 3]
}

/// Elementary matrix `E_{ij}` with 1-based indices.
pub fn e(i: usize, j: usize) -> Matrix3 {
    let mut m = zero3();
    m[i - 1][j - 1] = GaussianRational::one();
    m
}

pub fn diag(d: [GaussianRational; 3]) -> Matrix3 {
    let mut m = zero3();
    for (i, x) in d.into_iter().enumerate() {
        m[i][i] = x;
    }
    m
}

pub fn diag_int(a: i64, b: i64, cc: i64) -> Matrix3 {
    diag([c(a, 0), c(b, 0), c(cc, 0)])
}

pub fn add(a: &Matrix3, b: &Matrix3) -> Matrix3 {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q).collect()).collect()
}

pub fn sub(a: &Matrix3, b: &Matrix3) -> Matrix3 {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p - q).collect()).collect()
}

pub fn scale(a: &Matrix3, s: &GaussianRational) -> Matrix3 {
    a.iter().map(|r| r.iter().map(|x| x * s).collect()).collect()
}

pub fn transpose(a: &Matrix3) -> Matrix3 {
    (0..a.len()).map(|i| a.iter().map(|r| r[i].clone()).collect()).collect()
}

pub fn conj(a: &Matrix3) -> Matrix3 {
    a.iter().map(|r| r.iter().map(GaussianRational::conj).collect()).collect()
}

pub fn trace(a: &Matrix3) -> GaussianRational {
    (0..a.len()).fold(GaussianRational::zero(), |acc, i| &acc + &a[i][i])
}

pub fn is_zero(a: &Matrix3) -> bool {
    a.iter().flatten().all(Zero::is_zero)
}

pub fn bracket(x: &Matrix3, y: &Matrix3) -> Matrix3 {
    sub(&linalg::mat_mul(x, y), &linalg::mat_mul(y, x))
}

/// `⟨X, Y⟩ = trace(XY)`
pub fn killing(x: &Matrix3, y: &Matrix3) -> GaussianRational {
    trace(&linalg::mat_mul(x, y))
}

pub fn apply(x: &Matrix3, v: &[GaussianRational]) -> Vec<GaussianRational> {
    x.iter()
        .map(|r| r.iter().zip(v).fold(GaussianRational::zero(), |acc, (a, b)| &acc + &(a * b)))
        .collect()
}

/// Standard basis `E12, E13, E21, E23, E31, E32, E11−E22, E22−E33`.
pub fn sl3_basis() -> Vec<Matrix3> {
    vec![
        e(1, 2),
        e(1, 3),
        e(2, 1),
        e(2, 3),
        e(3, 1),
        e(3, 2),
        diag_int(1, -1, 0),
        diag_int(0, 1, -1),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Ambient {
    /// complex span inside sl(3,ℂ)
    Sl3C,
    /// real span inside su(2,1)
    Su21,
    /// real span inside u(2,1)
    U21,
}

impl Ambient {
    fn is_complex(self) -> bool {
        matches!(self, Ambient::Sl3C)
    }
}

/// Coordinates of a matrix: 9 complex entries, or 18 rationals (real and
/// imaginary parts) for real spans.
fn coords_complex(x: &Matrix3) -> Vec<GaussianRational> {
    x.iter().flatten().cloned().collect()
}

fn coords_real(x: &Matrix3) -> Vec<Rational> {
    x.iter().flatten().flat_map(|z| [z.re.clone(), z.im.clone()]).collect()
}

fn columns_to_rows<F: Clone>(cols: &[Vec<F>]) -> Matrix<F> {
    let n = cols.first().map_or(0, Vec::len);
    (0..n).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect()
}

fn span_rank(mats: &[Matrix3], complex: bool) -> usize {
    if mats.is_empty() {
        return 0;
    }
    if complex {
        linalg::rank(&mats.iter().map(coords_complex).collect::<Vec<_>>())
    } else {
        linalg::rank(&mats.iter().map(coords_real).collect::<Vec<_>>())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LieSubspace {
    basis: Vec<Matrix3>,
    ambient: Ambient,
}

impl LieSubspace {
    pub fn new(basis: Vec<Matrix3>, ambient: Ambient) -> Result<Self, LieError> {
        if span_rank(&basis, ambient.is_complex()) != basis.len() {
            return Err(LieError::Dependent);
        }
        Ok(Self { basis, ambient })
    }

    /// Drops dependent spanning vectors.
    pub fn spanned_by(vectors: Vec<Matrix3>, ambient: Ambient) -> Self {
        let mut basis: Vec<Matrix3> = Vec::new();
        for v in vectors {
            basis.push(v);
            if span_rank(&basis, ambient.is_complex()) != basis.len() {
                basis.pop();
            }
        }
        Self { basis, ambient }
    }

    pub fn sl3() -> Self {
        Self::new(sl3_basis(), Ambient::Sl3C).expect("independent")
    }

    pub fn zero(ambient: Ambient) -> Self {
        Self { basis: Vec::new(), ambient }
    }

    pub fn basis(&self) -> &[Matrix3] {
        &self.basis
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn contains(&self, x: &Matrix3) -> bool {
        let mut all = self.basis.clone();
        all.push(x.clone());
        span_rank(&all, self.ambient.is_complex()) == self.dim()
    }
}

/// Complex subspace of sl(3,ℂ) given by a zero pattern: `true` marks a free
/// entry. The trace-zero condition is imposed.
pub fn pattern_subspace(pattern: [[bool; 3]; 3]) -> LieSubspace {
    let mut gens = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            if i != j && pattern[i][j] {
                gens.push(e(i + 1, j + 1));
            }
        }
    }
    let diag_free: Vec<usize> = (0..3).filter(|&i| pattern[i][i]).collect();
    for w in diag_free.windows(2) {
        gens.push(sub(&e(w[0] + 1, w[0] + 1), &e(w[1] + 1, w[1] + 1)));
    }
    LieSubspace::new(gens, Ambient::Sl3C).expect("independent")
}

/// `{[*,*,*],[0,*,*],[0,*,*]}`
pub fn first_candidate() -> LieSubspace {
    pattern_subspace([[true; 3], [false, true, true], [false, true, true]])
}

/// `{[*,*,*],[0,*,0],[*,*,*]}`
pub fn second_candidate() -> LieSubspace {
    pattern_subspace([[true; 3], [false, true, false], [true; 3]])
}

/// Gram matrix of the trace form on a basis.
pub fn killing_gram(basis: &[Matrix3]) -> Matrix<GaussianRational> {
    basis.iter().map(|x| basis.iter().map(|y| killing(x, y)).collect()).collect()
}

/// Orthogonal complement in sl(3,ℂ) with respect to the trace form.
pub fn perp(s: &LieSubspace) -> LieSubspace {
    assert!(s.ambient.is_complex(), "perp is taken inside sl(3,C)");
    let sl = sl3_basis();
    let rows: Matrix<GaussianRational> = s.basis.iter().map(|b| sl.iter().map(|x| killing(b, x)).collect()).collect();
    let ker = linalg::kernel(&rows, sl.len());
    let basis = ker
        .iter()
        .map(|coef| {
            coef.iter()
                .zip(&sl)
                .fold(zero3(), |acc, (k, x)| add(&acc, &scale(x, k)))
        })
        .collect();
    LieSubspace::new(basis, Ambient::Sl3C).expect("kernel basis is independent")
}

/// Dimension of `{X ∈ S : [P, X] = 0}`, over ℂ or ℝ according to `S`.
pub fn ad_kernel_dim(p: &Matrix3, s: &LieSubspace) -> usize {
    let images: Vec<Matrix3> = s.basis.iter().map(|b| bracket(p, b)).collect();
    if images.is_empty() {
        return 0;
    }
    let r = if s.ambient.is_complex() {
        linalg::rank(&columns_to_rows(&images.iter().map(coords_complex).collect::<Vec<_>>()))
    } else {
        linalg::rank(&columns_to_rows(&images.iter().map(coords_real).collect::<Vec<_>>()))
    };
    s.dim() - r
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum SubalgebraResult {
    Yes,
    No { witness: (usize, usize) },
}

pub fn is_subalgebra(s: &LieSubspace) -> SubalgebraResult {
    for i in 0..s.dim() {
        for j in i + 1..s.dim() {
            if !s.contains(&bracket(&s.basis[i], &s.basis[j])) {
                return SubalgebraResult::No { witness: (i, j) };
            }
        }
    }
    SubalgebraResult::Yes
}

/// Real basis of `{X : Xᵗh + h X̄ = 0}`, optionally with `trace X = 0`.
fn unitary_algebra(form: &HermitianForm, traceless: bool) -> Vec<Matrix3> {
    let h = form.matrix();
    let m = h.len();
    // unknowns: Re/Im of X_{ij}, 2m² reals
    let n = 2 * m * m;
    let unit = |k: usize| -> Matrix3 {
        let mut x = vec![vec![GaussianRational::zero(); m]; m];
        let (ij, part) = (k / 2, k % 2);
        x[ij / m][ij % m] = if part == 0 { GaussianRational::one() } else { GaussianRational::i() };
        x
    };
    let cond = |x: &Matrix3| -> Vec<Rational> {
        let mut v = coords_real(&add(&linalg::mat_mul(&transpose(x), h), &linalg::mat_mul(h, &conj(x))));
        if traceless {
            let t = trace(x);
            v.push(t.re);
            v.push(t.im);
        }
        v
    };
    let cols: Vec<Vec<Rational>> = (0..n).map(|k| cond(&unit(k))).collect();
    let rows = columns_to_rows(&cols);
    linalg::kernel(&rows, n)
        .into_iter()
        .map(|coef| {
            coef.iter()
                .enumerate()
                .fold(vec![vec![GaussianRational::zero(); m]; m], |acc, (k, a)| {
                    add(&acc, &scale(&unit(k), &GaussianRational::real(a.clone())))
                })
        })
        .collect()
}

pub fn u21(form: &HermitianForm) -> LieSubspace {
    LieSubspace::new(unitary_algebra(form, false), Ambient::U21).expect("independent")
}

pub fn su21(form: &HermitianForm) -> LieSubspace {
    LieSubspace::new(unitary_algebra(form, true), Ambient::Su21).expect("independent")
}

/// `Xᵗh + hX̄ = 0`
pub fn preserves_form_infinitesimally(x: &Matrix3, form: &HermitianForm) -> bool {
    let h = form.matrix();
    is_zero(&add(&linalg::mat_mul(&transpose(x), h), &linalg::mat_mul(h, &conj(x))))
}

/// Real dimension of `{X ∈ su(2,1) : Xv ∈ ℂv}`.
pub fn stabilizer_up_to_scale_dim(v: &[GaussianRational], form: &HermitianForm) -> Result<usize, LieError> {
    if v.iter().all(Zero::is_zero) {
        return Err(LieError::ZeroVector);
    }
    let su = su21(form);
    // Xv ∧ v = 0, real-linear in the coefficients of X
    let wedge = |x: &Matrix3| -> Vec<Rational> {
        let xv = apply(x, v);
        let mut out = Vec::new();
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                let w = &(&xv[i] * &v[j]) - &(&xv[j] * &v[i]);
                out.push(w.re);
                out.push(w.im);
            }
        }
        out
    };
    let cols: Vec<Vec<Rational>> = su.basis.iter().map(wedge).collect();
    Ok(su.dim() - linalg::rank(&columns_to_rows(&cols)))
}

/// `C` with `Cᵗ P C̄ = diag(1,1,−1)` for the pairing form `P`:
/// `z1 = y1 − y3`, `z2 = (y1 + y3)/2`, `z3 = y2`.
pub fn congruence_to_standard() -> Matrix3 {
    let h = GaussianRational::real(rat(1, 2));
    let o = GaussianRational::zero;
    vec![vec![c(1, 0), o(), c(-1, 0)], vec![h.clone(), o(), h], vec![o(), c(1, 0), o()]]
}

/// `C⁻¹ X C`: carries the algebra of the pairing form to that of
/// `diag(1,1,−1)`.
pub fn to_standard(x: &Matrix3) -> Matrix3 {
    let cm = congruence_to_standard();
    let ci = linalg::inverse(&cm).expect("invertible");
    linalg::mat_mul(&linalg::mat_mul(&ci, x), &cm)
}

/// Derivatives at the identity of the isotropy matrix family along
/// `log q`, `φ`, `ψ`, `Im b`, `Re d`, `Im d`.
pub fn isotropy_algebra() -> LieSubspace {
    let gens = vec![
        diag_int(-1, 1, 0),
        diag([c(0, 1), c(0, 1), c(0, 0)]),
        diag([c(0, 0), c(0, 0), c(0, 1)]),
        scale(&e(2, 1), &c(0, 1)),
        sub(&e(2, 3), &e(3, 1)),
        scale(&add(&e(2, 3), &e(3, 1)), &c(0, 1)),
    ];
    LieSubspace::new(gens, Ambient::U21).expect("independent")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum LineImage {
    /// Every element maps `w` into `ℂv`, `v = (0,1,0)`.
    ProportionalToV,
    /// Two basis elements whose images of `w` span more than a line (or a
    /// line other than `ℂv`).
    Not { witness: (usize, usize) },
}

pub fn v_vector() -> Vec<GaussianRational> {
    vec![c(0, 0), c(1, 0), c(0, 0)]
}

/// Decides whether `{Xw : X ∈ S}` lies in the line `ℂv`.
pub fn line_image_test(s: &LieSubspace, w: &[GaussianRational]) -> LineImage {
    let v = v_vector();
    let mut vecs: Vec<Vec<GaussianRational>> = vec![v.clone()];
    for (i, x) in s.basis.iter().enumerate() {
        let img = apply(x, w);
        vecs.push(img);
        if linalg::rank(&vecs) > 1 {
            // pair with the previous independent image, or itself when it
            // alone leaves the line ℂv
            let j = (0..i)
                .find(|&j| linalg::rank(&vec![apply(&s.basis[j], w), apply(x, w)]) == 2)
                .unwrap_or(i);
            return LineImage::Not { witness: (j, i) };
        }
    }
    // w itself must span the same line (identity-like directions scale w)
    if linalg::rank(&vec![v, w.to_vec()]) > 1 {
        return LineImage::Not { witness: (0, 0) };
    }
    LineImage::ProportionalToV
}

/// Jordan representatives for the centralizer test. The family
/// `E12 + diag(a,a,−2a)` contributes only `a = 1`; `a = 0` is `E12` itself.
pub fn jordan_test_set() -> Vec<(&'static str, Matrix3)> {
    vec![
        ("E12", e(1, 2)),
        ("E12+E23", add(&e(1, 2), &e(2, 3))),
        ("diag(1,-1,0)", diag_int(1, -1, 0)),
        ("diag(1,2,-3)", diag_int(1, 2, -3)),
        ("diag(1,1,-2)", diag_int(1, 1, -2)),
        ("E12+diag(1,1,-2)", add(&e(1, 2), &diag_int(1, 1, -2))),
    ]
}

/// `span{P}^⊥`
pub fn perp_of(p: &Matrix3) -> LieSubspace {
    perp(&LieSubspace::new(vec![p.clone()], Ambient::Sl3C).expect("nonzero"))
}

/// A random exact element of `U(2,1)` for `diag(1,1,−1)`: products of
/// diagonal phases, rotations in the `(1,2)` plane and boosts in the `(1,3)`
/// plane with rational entries.
pub fn random_pseudo_unitary<R: Rng + ?Sized>(rng: &mut R) -> Matrix3 {
    let mut g = linalg::identity(3);
    let small = |rng: &mut R| rat(rng.gen_range(-5..=5), rng.gen_range(1..=4));
    for _ in 0..3 {
        let ph: Vec<GaussianRational> = (0..3).map(|_| phase_from_parameter(&small(rng)).value().clone()).collect();
        let d = diag([ph[0].clone(), ph[1].clone(), ph[2].clone()]);
        // rotation: cos = (1−t²)/(1+t²), sin = 2t/(1+t²)
        let t = small(rng);
        let den = Rational::one() + &t * &t;
        let (co, si) = (
            GaussianRational::real((Rational::one() - &t * &t) / &den),
            GaussianRational::real(rat(2, 1) * &t / &den),
        );
        let mut rot = linalg::identity(3);
        rot[0][0] = co.clone();
        rot[0][1] = -si.clone();
        rot[1][0] = si;
        rot[1][1] = co;
        // boost: cosh = (1+s²)/(1−s²), sinh = 2s/(1−s²), |s| < 1
        let s = rat(rng.gen_range(-4..=4), 5);
        let den = Rational::one() - &s * &s;
        let (ch, sh) = (
            GaussianRational::real((Rational::one() + &s * &s) / &den),
            GaussianRational::real(rat(2, 1) * &s / &den),
        );
        let mut boost = linalg::identity(3);
        boost[0][0] = ch.clone();
        boost[0][2] = sh.clone();
        boost[2][0] = sh;
        boost[2][2] = ch;
        g = linalg::mat_mul(&g, &linalg::mat_mul(&d, &linalg::mat_mul(&rot, &boost)));
    }
    g
}
