//! Stable string identifiers for catalog objects, e.g. `gamma(alpha=1/12)`,
//! `M_plus`, `quadric(p=2,n=3,side=>)`, `cayley`, `sigma(σ=1)`.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::catalog::{self, PSign, QuadricFamily};
use crate::exact_arith::{format_rational, parse_rational, GaussianRational, Rational};
use crate::geometry::Side;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("unknown identifier `{0}`")]
    Unknown(String),
    #[error("bad identifier `{id}`: {reason}")]
    Malformed { id: String, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum RegistryId {
    Gamma { alpha: Rational },
    Omega { alpha: Rational, side: Side },
    M(PSign),
    D { sign: PSign, side: Side },
    D0 { side: Side },
    Normalizer { alpha: Rational },
    PGroup(PSign),
    Isotropy,
    Quadric { p: usize, n: usize, side: Side },
    TubeRealisation { p: usize, n: usize },
    Cayley,
    Sigma { sigma: f64 },
    Sl3,
    Su21,
}

fn split_args(id: &str) -> Result<(String, BTreeMap<String, String>), RegistryError> {
    let id = id.trim();
    let Some(open) = id.find('(') else {
        return Ok((id.to_string(), BTreeMap::new()));
    };
    if !id.ends_with(')') {
        return Err(RegistryError::Malformed { id: id.into(), reason: "missing `)`".into() });
    }
    let name = id[..open].trim().to_string();
    let mut args = BTreeMap::new();
    for part in id[open + 1..id.len() - 1].split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| RegistryError::Malformed {
            id: id.into(),
            reason: format!("argument `{part}` is not key=value"),
        })?;
        args.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok((name, args))
}

fn parse_side(id: &str, s: &str) -> Result<Side, RegistryError> {
    match s {
        ">" | "gt" => Ok(Side::Positive),
        "<" | "lt" => Ok(Side::Negative),
        _ => Err(RegistryError::Malformed { id: id.into(), reason: format!("side `{s}` is not > or <") }),
    }
}

impl RegistryId {
    pub fn parse(id: &str) -> Result<Self, RegistryError> {
        let (name, args) = split_args(id)?;
        let bad = |reason: String| RegistryError::Malformed { id: id.into(), reason };
        let get = |k: &str| args.get(k).map(String::as_str).ok_or_else(|| bad(format!("missing `{k}`")));
        let rational = |k: &str| -> Result<Rational, RegistryError> {
            parse_rational(get(k)?).map_err(|e| bad(e.to_string()))
        };
        let count = |k: &str| -> Result<usize, RegistryError> {
            get(k)?.parse().map_err(|_| bad(format!("`{k}` is not a count")))
        };
        let side = |default: Side| -> Result<Side, RegistryError> {
            args.get("side").map_or(Ok(default), |s| parse_side(id, s))
        };
        let quadric = |p: usize, n: usize| QuadricFamily::new(p, n).map_err(|e| bad(e.to_string()));
        let out = match name.as_str() {
            "gamma" => Self::Gamma { alpha: rational("alpha")? },
            "omega" => Self::Omega { alpha: rational("alpha")?, side: side(Side::Positive)? },
            "M_plus" => Self::M(PSign::Plus),
            "M_minus" => Self::M(PSign::Minus),
            "D_plus" => Self::D { sign: PSign::Plus, side: side(Side::Positive)? },
            "D_minus" => Self::D { sign: PSign::Minus, side: side(Side::Positive)? },
            "D0" => Self::D0 { side: side(Side::Positive)? },
            "normalizer" => Self::Normalizer { alpha: rational("alpha")? },
            "P_plus" => Self::PGroup(PSign::Plus),
            "P_minus" => Self::PGroup(PSign::Minus),
            "isotropy" => Self::Isotropy,
            "quadric" => {
                let (p, n) = (count("p")?, count("n")?);
                quadric(p, n)?;
                Self::Quadric { p, n, side: side(Side::Positive)? }
            }
            "tube_realisation" => {
                let (p, n) = (count("p")?, count("n")?);
                quadric(p, n)?;
                Self::TubeRealisation { p, n }
            }
            "cayley" => Self::Cayley,
            "sigma" => {
                let v = args.get("σ").or_else(|| args.get("sigma")).ok_or_else(|| bad("missing `σ`".into()))?;
                let sigma: f64 = v.parse().map_err(|_| bad(format!("`{v}` is not a number")))?;
                catalog::make_sigma_surface(sigma).map_err(|e| bad(e.to_string()))?;
                Self::Sigma { sigma }
            }
            "sl3" => Self::Sl3,
            "su21" => Self::Su21,
            _ => return Err(RegistryError::Unknown(id.to_string())),
        };
        Ok(out)
    }

    /// Affine complex lines `base + t·direction` stated to lie in the domain.
    pub fn complex_lines(&self) -> Vec<(Vec<GaussianRational>, Vec<GaussianRational>)> {
        let unit = |n: usize, k: usize| -> Vec<GaussianRational> {
            (0..n).map(|i| GaussianRational::from(i64::from(i == k))).collect()
        };
        let base = |n: usize, last: i64| -> Vec<GaussianRational> {
            (0..n).map(|i| GaussianRational::from(if i == n - 1 { last } else { 0 })).collect()
        };
        match self {
            Self::D { side, .. } => vec![(base(4, side.sign() as i64), unit(4, 1))],
            Self::Quadric { p, n, side } => match side {
                Side::Negative => vec![(base(n + 1, -1), unit(n + 1, 0))],
                Side::Positive if p < n => vec![(base(n + 1, 1), unit(n + 1, n - 1))],
                Side::Positive => Vec::new(),
            },
            _ => Vec::new(),
        }
    }

    pub fn describe(&self) -> String {
        let side_sym = |s: &Side| s.symbol();
        match self {
            Self::Gamma { alpha } => format!(
                "tube over the quartic graph with alpha = {}\nsource: affinely homogeneous quartic family\nrho = {}",
                format_rational(alpha),
                catalog::make_gamma(alpha).rho()
            ),
            Self::Omega { alpha, side } => format!(
                "tube domain on the {} side of the quartic graph, alpha = {}\nrho = {}",
                side_sym(side),
                format_rational(alpha),
                catalog::make_gamma(alpha).rho()
            ),
            Self::M(sign) => format!(
                "model quartic hypersurface, {} sign\nsource: boundary of the model domains of the quartic family\nrho = {}",
                sign.name(),
                catalog::m_pm_rho(*sign)
            ),
            Self::D { sign, side } => format!(
                "model quartic domain, {} sign, side {}\nrho = {}",
                sign.name(),
                side_sym(side),
                catalog::m_pm_rho(*sign)
            ),
            Self::D0 { side } => format!(
                "quadric domain of signature (2,1), side {}\nrho = {}",
                side_sym(side),
                catalog::d0_rho()
            ),
            Self::Normalizer { alpha } => match catalog::make_normalizer(alpha) {
                Ok(n) => format!(
                    "normalizing map for alpha = {} onto {}\n{}target rho = {}",
                    format_rational(alpha),
                    n.target_name,
                    n.map,
                    n.target
                ),
                Err(e) => format!("error: {e}"),
            },
            Self::PGroup(sign) => {
                let p = catalog::PParams::identity(*sign);
                format!(
                    "13-parameter group preserving the model quartic domains, {} sign\nconstraint: |d|^2 = -2 q^3 Re(e^(i phi) conj(b))\nidentity element:\n{}",
                    sign.name(),
                    catalog::make_p_element(&p).expect("identity")
                )
            }
            Self::Isotropy => {
                "linear isotropy matrices [[e^(i phi)/q,0,0],[b,q e^(i phi),d/q],[-conj(d) e^(i(phi+psi))/q^2,0,e^(i psi)]] preserving z1 zb2 + z2 zb1 + |z3|^2".into()
            }
            Self::Quadric { p, n, side } => {
                let fam = QuadricFamily::new(*p, *n).expect("validated");
                format!("quadric domain H_({p},{n}), side {}\nrho = {}", side_sym(side), fam.rho())
            }
            Self::TubeRealisation { p, n } => {
                let fam = QuadricFamily::new(*p, *n).expect("validated");
                format!(
                    "tube realisation of the quadric H_({p},{n})\n{}tube rho = {}",
                    catalog::make_tube_realisation(&fam).expect("valid"),
                    fam.tube_rho()
                )
            }
            Self::Cayley => {
                let c = catalog::make_cayley_objects().expect("valid");
                format!(
                    "tube over the Cayley surface x3 = x1 x2 + x1^3\nrho = {}\nequivalence map:\n{}target rho = {}",
                    c.surface.rho(),
                    c.map,
                    c.target
                )
            }
            Self::Sigma { sigma } => {
                let f = catalog::make_sigma_surface(*sigma).expect("validated");
                format!(
                    "one-parameter family of degree-4 graphs in R^8 with sigma = {sigma}\nx8 = {}",
                    f.to_literal()
                )
            }
            Self::Sl3 => "sl(3,C) with the trace form <X,Y> = trace(XY)".into(),
            Self::Su21 => "su(2,1) for diag(1,1,-1) and for z1 zb2 + z2 zb1 + |z3|^2".into(),
        }
    }
}

impl fmt::Display for RegistryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = |side: &Side| side.symbol();
        match self {
            Self::Gamma { alpha } => write!(f, "gamma(alpha={})", format_rational(alpha)),
            Self::Omega { alpha, side } => write!(f, "omega(alpha={},side={})", format_rational(alpha), s(side)),
            Self::M(PSign::Plus) => write!(f, "M_plus"),
            Self::M(PSign::Minus) => write!(f, "M_minus"),
            Self::D { sign, side } => write!(f, "D_{}(side={})", sign.name(), s(side)),
            Self::D0 { side } => write!(f, "D0(side={})", s(side)),
            Self::Normalizer { alpha } => write!(f, "normalizer(alpha={})", format_rational(alpha)),
            Self::PGroup(sign) => write!(f, "P_{}", sign.name()),
            Self::Isotropy => write!(f, "isotropy"),
            Self::Quadric { p, n, side } => write!(f, "quadric(p={p},n={n},side={})", s(side)),
            Self::TubeRealisation { p, n } => write!(f, "tube_realisation(p={p},n={n})"),
            Self::Cayley => write!(f, "cayley"),
            Self::Sigma { sigma } => write!(f, "sigma(σ={sigma})"),
            Self::Sl3 => write!(f, "sl3"),
            Self::Su21 => write!(f, "su21"),
        }
    }
}

/// One example identifier per registry entry.
pub fn list() -> Vec<&'static str> {
    vec![
        "gamma(alpha=1/12)",
        "omega(alpha=1,side=>)",
        "M_plus",
        "M_minus",
        "D_plus(side=>)",
        "D_minus(side=<)",
        "D0(side=>)",
        "normalizer(alpha=7/12)",
        "P_plus",
        "P_minus",
        "isotropy",
        "quadric(p=2,n=3,side=>)",
        "tube_realisation(p=1,n=2)",
        "cayley",
        "sigma(σ=1)",
        "sl3",
        "su21",
    ]
}

pub fn describe(id: &str) -> Result<String, RegistryError> {
    Ok(RegistryId::parse(id)?.describe())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_listed_id_parses_and_round_trips() {
        for id in list() {
            let r = RegistryId::parse(id).unwrap();
            assert_eq!(RegistryId::parse(&r.to_string()).unwrap(), r, "{id}");
            assert!(!r.describe().is_empty());
        }
    }

    #[test]
    fn describe_examples() {
        assert!(describe("M_plus").unwrap().contains("z1^2*zb1^2"));
        assert!(describe("cayley").unwrap().contains("Cayley"));
        assert!(describe("sigma(σ=1)").unwrap().contains("x1"));
        assert!(describe("sigma(sigma=2)").is_ok());
    }

    #[test]
    fn errors() {
        assert_eq!(describe("nonsense"), Err(RegistryError::Unknown("nonsense".into())));
        assert!(matches!(RegistryId::parse("quadric(p=1,n=3)"), Err(RegistryError::Malformed { .. })));
        assert!(matches!(RegistryId::parse("sigma(σ=40)"), Err(RegistryError::Malformed { .. })));
        assert!(matches!(RegistryId::parse("gamma(beta=1)"), Err(RegistryError::Malformed { .. })));
        assert!(matches!(RegistryId::parse("D_plus(side=?)"), Err(RegistryError::Malformed { .. })));
    }

    #[test]
    fn stated_lines() {
        let d = RegistryId::parse("D_minus(side=<)").unwrap();
        assert_eq!(d.complex_lines().len(), 1);
        let ball = RegistryId::parse("quadric(p=1,n=1,side=>)").unwrap();
        assert!(ball.complex_lines().is_empty());
        let q = RegistryId::parse("quadric(p=5,n=7,side=>)").unwrap();
        let (base, dir) = &q.complex_lines()[0];
        assert_eq!(base[7], GaussianRational::from(1));
        assert_eq!(dir[6], GaussianRational::from(1));
    }
}
