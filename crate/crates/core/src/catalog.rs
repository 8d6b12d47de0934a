//! Built-in geometries whose soliton, Einstein and conformal structures are
//! certified numerically every time they are loaded.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::curvature::{CurvatureBundle, Quantity};
use crate::geometry::{GeometryInstance, GeometrySpec};
use crate::identities::{certify, sample_points, Structure, CERT_TOL};
use crate::tolerance::residual;
use crate::{CtlError, Result};

/// Points used for load-time certification.
pub const CERT_POINTS: usize = 8;
pub const CERT_SEED: u64 = 0;
/// Bound on `½L_X g − Hess f` when `X − ∇f` is claimed Killing.
pub const KILLING_TOL: f64 = 1e-11;

/// Optional knobs; each entry reads the ones it understands.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CatalogParams {
    pub dim: Option<usize>,
    pub radius: Option<f64>,
    pub lambda: Option<f64>,
    pub degree: Option<usize>,
    pub eps: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Claim {
    pub structure: Structure,
    pub lambda: f64,
    /// Worst certification residual over the grid.
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub geometry: GeometryInstance,
    pub claims: Vec<Claim>,
    pub note: &'static str,
}

impl CatalogEntry {
    pub fn spec(&self) -> &GeometrySpec {
        &self.geometry.spec
    }

    pub fn export(&self) -> String {
        self.geometry.spec.to_json()
    }

    pub fn claims_text(&self) -> Vec<String> {
        self.claims.iter().map(|c| format!("{}({})", c.structure.name(), c.lambda)).collect()
    }
}

/// Name, parameters read, and a one-line description.
pub const ENTRIES: &[(&str, &str, &str)] = &[
    ("euclidean", "dim, lambda", "flat space with the Gaussian potential"),
    ("sphere", "dim, radius", "round sphere in a stereographic chart"),
    ("flat_to_sphere", "dim, radius", "flat metric with the stereographic conformal factor"),
    ("hyperbolic", "dim", "Poincare ball patch"),
    ("cigar_x_line", "", "Hamilton's cigar times a line, steady"),
    ("cigar_x_plane", "", "Hamilton's cigar times a plane, steady"),
    ("cigar_x_cigar", "", "product of two cigars, steady"),
    ("cigar_x_cigar_x_line", "", "product of two cigars and a line, steady"),
    ("cigar_killing", "", "cigar times a line with a rotation added to the gradient field"),
    ("s2xs2", "", "product of unit spheres"),
    ("s2_x_gaussian", "", "unit sphere times the Gaussian plane, shrinking"),
    ("conformal_s2xs2", "seed", "s2xs2 divided by a random conformal factor"),
    ("conformal_gaussian", "dim, lambda, seed", "flat Gaussian soliton divided by a random conformal factor"),
    ("conformal_cigar", "seed", "cigar times a plane divided by a random conformal factor"),
    ("gaussian_plus_killing", "dim, lambda", "Gaussian soliton with a rotation added to the gradient field"),
    (
        "conformal_gaussian_plus_killing",
        "dim, lambda, seed",
        "gaussian_plus_killing divided by a random conformal factor",
    ),
    ("random", "dim, degree, eps, seed", "polynomial perturbation of the flat metric with random f, X, u"),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    ENTRIES.iter().map(|e| e.0)
}

struct Draft {
    spec: GeometrySpec,
    claims: Vec<(Structure, f64)>,
    killing: bool,
    note: &'static str,
}

fn coords(m: usize) -> Vec<String> {
    ["x", "y", "z", "w", "v", "s"][..m].iter().map(|s| s.to_string()).collect()
}

fn conformal_metric(m: usize, diag: impl Fn(usize) -> String) -> Vec<Vec<String>> {
    (0..m).map(|i| (0..=i).map(|j| if i == j { diag(i) } else { "0".into() }).collect()).collect()
}

fn sq_norm(c: &[String]) -> String {
    c.iter().map(|x| format!("{x}^2")).collect::<Vec<_>>().join("+")
}

fn num(v: f64) -> String {
    if v < 0.0 {
        format!("({v})")
    } else {
        format!("{v}")
    }
}

/// Sum of `terms` random monomials of degree `1..=max_deg` with coefficients in `[-scale, scale]`.
fn random_poly(rng: &mut ChaCha8Rng, c: &[String], terms: usize, max_deg: usize, scale: f64) -> String {
    let mut out = Vec::with_capacity(terms);
    for _ in 0..terms {
        let coef: f64 = rng.gen_range(-scale..scale);
        let deg = rng.gen_range(1..=max_deg);
        let mut powers = vec![0u32; c.len()];
        for _ in 0..deg {
            powers[rng.gen_range(0..c.len())] += 1;
        }
        let mono: Vec<String> = powers
            .iter()
            .zip(c)
            .filter(|(p, _)| **p > 0)
            .map(|(p, x)| if *p == 1 { x.clone() } else { format!("{x}^{p}") })
            .collect();
        out.push(format!("{}*{}", num((coef * 1e6).round() / 1e6), mono.join("*")));
    }
    out.join("+")
}

fn fixed_dim(name: &str, p: &CatalogParams, m: usize) -> Result<usize> {
    match p.dim {
        Some(d) if d != m => Err(CtlError::Config(format!("catalog entry `{name}` has fixed dimension {m}"))),
        _ => Ok(m),
    }
}

fn dim_in(name: &str, p: &CatalogParams, default: usize, min: usize) -> Result<usize> {
    let m = p.dim.unwrap_or(default);
    if !(min..=6).contains(&m) {
        return Err(CtlError::Config(format!("catalog entry `{name}` needs dimension in {min}..=6, got {m}")));
    }
    Ok(m)
}

fn spec(name: String, c: Vec<String>, half: f64, metric: Vec<Vec<String>>) -> GeometrySpec {
    let m = c.len();
    GeometrySpec { name, dim: m, coords: c, domain: vec![[-half, half]; m], metric, u: None, f: None, x: None, lambda: None }
}

const CIGAR: &str = "1/(1+x^2+y^2)";
const CIGAR2: &str = "1/(1+z^2+w^2)";
const F_CIGAR: &str = "-log(1+x^2+y^2)";
const F_CIGAR2: &str = "-log(1+z^2+w^2)";
const S2: &str = "4/(1+x^2+y^2)^2";
const S2B: &str = "4/(1+z^2+w^2)^2";

fn cigar_product(name: &str, m: usize, two: bool) -> Draft {
    let c = coords(m);
    let metric = conformal_metric(m, |i| match i {
        0 | 1 => CIGAR.into(),
        2 | 3 if two => CIGAR2.into(),
        _ => "1".into(),
    });
    let mut s = spec(name.into(), c, 1.0, metric);
    let mut x = vec!["-2*x".to_string(), "-2*y".to_string()];
    let mut f = F_CIGAR.to_string();
    if two {
        x.extend(["-2*z".to_string(), "-2*w".to_string()]);
        f = format!("{f}{F_CIGAR2}");
    }
    x.resize(m, "0".into());
    s.f = Some(f);
    s.x = Some(x);
    s.lambda = Some(0.0);
    Draft {
        spec: s,
        claims: vec![(Structure::GradientSoliton, 0.0), (Structure::GenericSoliton, 0.0)],
        killing: true,
        note: "closed-form steady soliton; X is the gradient of f",
    }
}

fn build(name: &str, p: &CatalogParams) -> Result<Draft> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let draft = match name {
        "euclidean" => {
            let m = dim_in(name, p, 3, 2)?;
            let l = p.lambda.unwrap_or(1.0);
            let c = coords(m);
            let mut s = spec(format!("euclidean{m}"), c.clone(), 1.0, conformal_metric(m, |_| "1".into()));
            s.f = Some(format!("{}*({})", num(l / 2.0), sq_norm(&c)));
            s.lambda = Some(l);
            Draft {
                spec: s,
                claims: vec![(Structure::Einstein, 0.0), (Structure::GradientSoliton, l)],
                killing: false,
                note: "Gaussian soliton",
            }
        }
        "sphere" => {
            let m = dim_in(name, p, 3, 2)?;
            let r = p.radius.unwrap_or(1.0);
            if !(r > 0.0 && r.is_finite()) {
                return Err(CtlError::Config(format!("radius must be positive, got {r}")));
            }
            let c = coords(m);
            let r2 = r * r;
            let conf = format!("{}/({}+{})^2", 4.0 * r2 * r2, r2, sq_norm(&c));
            let mut s = spec(format!("sphere{m}"), c, r, conformal_metric(m, |_| conf.clone()));
            let l = (m as f64 - 1.0) / r2;
            s.x = Some(vec!["0".into(); m]);
            s.lambda = Some(l);
            Draft {
                spec: s,
                claims: vec![(Structure::Einstein, l), (Structure::GenericSoliton, l)],
                killing: false,
                note: "trivial soliton with X = 0",
            }
        }
        "flat_to_sphere" => {
            let m = dim_in(name, p, 3, 2)?;
            let r = p.radius.unwrap_or(1.0);
            if !(r > 0.0 && r.is_finite()) {
                return Err(CtlError::Config(format!("radius must be positive, got {r}")));
            }
            let c = coords(m);
            let r2 = r * r;
            let mut s = spec(format!("flat_to_sphere{m}"), c.clone(), r, conformal_metric(m, |_| "1".into()));
            let l = (m as f64 - 1.0) / r2;
            s.u = Some(format!("log({}/({}+{}))", 2.0 * r2, r2, sq_norm(&c)));
            s.lambda = Some(l);
            Draft {
                spec: s,
                claims: vec![(Structure::ConformallyEinstein, l)],
                killing: false,
                note: "e^{2u} times the flat metric is the round sphere",
            }
        }
        "hyperbolic" => {
            let m = dim_in(name, p, 3, 2)?;
            let c = coords(m);
            let conf = format!("4/(1-({}))^2", sq_norm(&c));
            let half = 0.9 / (m as f64).sqrt();
            let s = spec(format!("hyperbolic{m}"), c, half, conformal_metric(m, |_| conf.clone()));
            Draft {
                spec: s,
                claims: vec![(Structure::Einstein, -(m as f64 - 1.0))],
                killing: false,
                note: "constant curvature -1",
            }
        }
        "cigar_x_line" => cigar_product(name, fixed_dim(name, p, 3)?, false),
        "cigar_x_plane" => cigar_product(name, fixed_dim(name, p, 4)?, false),
        "cigar_x_cigar" => cigar_product(name, fixed_dim(name, p, 4)?, true),
        "cigar_x_cigar_x_line" => cigar_product(name, fixed_dim(name, p, 5)?, true),
        "cigar_killing" => {
            let mut d = cigar_product(name, fixed_dim(name, p, 3)?, false);
            d.spec.x = Some(vec!["-2*x-0.7*y".into(), "-2*y+0.7*x".into(), "0".into()]);
            d.note = "cigar rotation added to the gradient field";
            d
        }
        "s2xs2" => {
            let m = fixed_dim(name, p, 4)?;
            let mut s = spec(name.into(), coords(m), 1.0, conformal_metric(m, |i| if i < 2 { S2.into() } else { S2B.into() }));
            s.x = Some(vec!["0".into(); m]);
            s.lambda = Some(1.0);
            Draft {
                spec: s,
                claims: vec![(Structure::Einstein, 1.0), (Structure::GenericSoliton, 1.0)],
                killing: false,
                note: "Einstein with nonzero Weyl tensor",
            }
        }
        "s2_x_gaussian" => {
            let m = fixed_dim(name, p, 4)?;
            let mut s = spec(name.into(), coords(m), 1.0, conformal_metric(m, |i| if i < 2 { S2.into() } else { "1".into() }));
            s.f = Some("0.5*(z^2+w^2)".into());
            s.x = Some(vec!["0.3*y".into(), "-0.3*x".into(), "z".into(), "w".into()]);
            s.lambda = Some(1.0);
            Draft {
                spec: s,
                claims: vec![(Structure::GradientSoliton, 1.0), (Structure::GenericSoliton, 1.0)],
                killing: true,
                note: "shrinking product soliton; X adds a sphere rotation",
            }
        }
        "conformal_s2xs2" => {
            let m = fixed_dim(name, p, 4)?;
            let c = coords(m);
            let u = random_poly(&mut rng, &c, 4, 2, 0.25);
            let s = spec(
                format!("conformal_s2xs2_{}", p.seed),
                c,
                1.0,
                conformal_metric(m, |i| format!("exp(-2*({u}))*{}", if i < 2 { S2 } else { S2B })),
            );
            let mut s = s;
            s.u = Some(u);
            s.lambda = Some(1.0);
            Draft {
                spec: s,
                claims: vec![(Structure::ConformallyEinstein, 1.0)],
                killing: false,
                note: "e^{2u} g is s2xs2",
            }
        }
        "conformal_gaussian" | "conformal_gaussian_plus_killing" => {
            let m = dim_in(name, p, 3, 2)?;
            let l = p.lambda.unwrap_or(1.0);
            let c = coords(m);
            let u = random_poly(&mut rng, &c, 4, 2, 0.25);
            let mut s = spec(format!("{name}{m}_{}", p.seed), c.clone(), 1.0, conformal_metric(m, |_| format!("exp(-2*({u}))")));
            s.u = Some(u);
            s.f = Some(format!("{}*({})", num(l / 2.0), sq_norm(&c)));
            let mut x: Vec<String> = c.iter().map(|xi| format!("{}*{xi}", num(l))).collect();
            if name.ends_with("killing") {
                x[0] = format!("{}-0.7*{}", x[0], c[1]);
                x[1] = format!("{}+0.7*{}", x[1], c[0]);
            }
            s.x = Some(x);
            s.lambda = Some(l);
            Draft {
                spec: s,
                claims: vec![(Structure::ConformalGradientSoliton, l), (Structure::ConformalGenericSoliton, l)],
                killing: false,
                note: "e^{2u} g is the Gaussian soliton",
            }
        }
        "conformal_cigar" => {
            let m = fixed_dim(name, p, 4)?;
            let c = coords(m);
            let u = random_poly(&mut rng, &c, 4, 2, 0.25);
            let base = cigar_product(name, m, false);
            let mut s = base.spec;
            s.name = format!("conformal_cigar_{}", p.seed);
            s.metric = conformal_metric(m, |i| format!("exp(-2*({u}))*{}", if i < 2 { CIGAR } else { "1" }));
            s.u = Some(u);
            s.x = Some(vec!["-2*x-0.7*y".into(), "-2*y+0.7*x".into(), "0".into(), "0".into()]);
            Draft {
                spec: s,
                claims: vec![(Structure::ConformalGradientSoliton, 0.0), (Structure::ConformalGenericSoliton, 0.0)],
                killing: false,
                note: "e^{2u} g is the cigar times a plane; X adds the cigar rotation",
            }
        }
        "gaussian_plus_killing" => {
            let m = dim_in(name, p, 3, 2)?;
            let l = p.lambda.unwrap_or(1.0);
            let c = coords(m);
            let mut s = spec(format!("gaussian_plus_killing{m}"), c.clone(), 1.0, conformal_metric(m, |_| "1".into()));
            let mut x: Vec<String> = c.iter().map(|xi| format!("{}*{xi}", num(l))).collect();
            x[0] = format!("{}-0.7*{}", x[0], c[1]);
            x[1] = format!("{}+0.7*{}", x[1], c[0]);
            s.f = Some(format!("{}*({})", num(l / 2.0), sq_norm(&c)));
            s.x = Some(x);
            s.lambda = Some(l);
            Draft {
                spec: s,
                claims: vec![(Structure::GradientSoliton, l), (Structure::GenericSoliton, l)],
                killing: true,
                note: "X is the gradient of f plus a rotation",
            }
        }
        "random" => {
            let m = dim_in(name, p, 3, 2)?;
            let deg = p.degree.unwrap_or(2);
            let eps = p.eps.unwrap_or(0.05);
            if !(1..=4).contains(&deg) {
                return Err(CtlError::Config(format!("random metric degree must be in 1..=4, got {deg}")));
            }
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(CtlError::Config(format!("eps must be positive, got {eps}")));
            }
            let c = coords(m);
            let metric = (0..m)
                .map(|i| {
                    (0..=i)
                        .map(|j| {
                            let q = random_poly(&mut rng, &c, 4, deg, 1.0);
                            if i == j {
                                format!("1+{}*({q})", num(eps))
                            } else {
                                format!("{}*({q})", num(eps))
                            }
                        })
                        .collect()
                })
                .collect();
            let mut s = spec(format!("random{m}_{}", p.seed), c.clone(), 1.0, metric);
            s.f = Some(random_poly(&mut rng, &c, 5, 3, 1.0));
            s.x = Some((0..m).map(|_| random_poly(&mut rng, &c, 3, 3, 1.0)).collect());
            s.u = Some(random_poly(&mut rng, &c, 4, 2, 0.3));
            Draft { spec: s, claims: vec![], killing: false, note: "generic metric for unconditional identities" }
        }
        other => return Err(CtlError::Unknown { kind: "catalog entry", name: other.to_string() }),
    };
    Ok(draft)
}

/// Builds and certifies an entry; any failed claim is an error.
pub fn load(name: &str, params: &CatalogParams) -> Result<CatalogEntry> {
    let key = names()
        .find(|n| n.eq_ignore_ascii_case(name.trim()))
        .ok_or_else(|| CtlError::Unknown { kind: "catalog entry", name: name.to_string() })?;
    let draft = build(key, params)?;
    let geometry = GeometryInstance::new(draft.spec)?;
    let points = sample_points(&geometry, CERT_POINTS, CERT_SEED)?;
    check_definite(&geometry, &points)?;
    let mut claims = Vec::with_capacity(draft.claims.len());
    for (structure, lambda) in draft.claims {
        let r = certify(&geometry, structure, lambda, &points)?;
        if !(r < CERT_TOL) {
            return Err(CtlError::Certification {
                geometry: geometry.name().to_string(),
                claim: format!("{}({lambda})", structure.name()),
                residual: r,
            });
        }
        claims.push(Claim { structure, lambda, residual: r });
    }
    if draft.killing {
        let r = killing_residual(&geometry, &points)?;
        if !(r < KILLING_TOL) {
            return Err(CtlError::Certification {
                geometry: geometry.name().to_string(),
                claim: "X - grad f is Killing".into(),
                residual: r,
            });
        }
    }
    Ok(CatalogEntry { name: key, geometry, claims, note: draft.note })
}

/// Eigenvalues of the coordinate metric on the grid must be positive.
fn check_definite(geom: &GeometryInstance, points: &[Vec<f64>]) -> Result<()> {
    let m = geom.dim();
    for p in points {
        let g = DMatrix::from_row_slice(m, m, &geom.metric_values(p)?);
        let min = SymmetricEigen::new(g).eigenvalues.min();
        if !(min > 0.0) {
            return Err(CtlError::Certification {
                geometry: geom.name().to_string(),
                claim: format!("positive definite at {p:?}"),
                residual: min,
            });
        }
    }
    Ok(())
}

/// `max |½(X_ij + X_ji) − f_ij|` relative, over the grid.
pub fn killing_residual(geom: &GeometryInstance, points: &[Vec<f64>]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in points {
        let b = CurvatureBundle::new(geom, p, 2)?;
        let (x1, f2) = (b.value(Quantity::X, 1)?, b.value(Quantity::F, 2)?);
        let sym = x1.scaled(0.5);
        let sym = crate::geometry::TensorValue::build(geom.dim(), 2, |ix| sym[[ix[0], ix[1]]] + sym[[ix[1], ix[0]]]);
        worst = worst.max(residual(&sym, &f2));
    }
    Ok(worst)
}

/// Every entry at default parameters.
pub fn all_default() -> Result<Vec<CatalogEntry>> {
    names().map(|n| load(n, &CatalogParams::default())).collect()
}
