//! Registry of verifiable identities and the verification driver.
//!
//! Every record declares the curvature ingredients it reads. The tolerance
//! class and the minimum jet order follow from those declarations.

use std::collections::BTreeMap;
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conformal::{self, ConformalPair, TransformLawId};
use crate::curvature::{CurvatureBundle, Quantity};
use crate::geometry::{GeometryInstance, TensorValue};
use crate::tolerance::{residual, TolClass, Tolerances};
use crate::{CtlError, Result};

mod evals;

/// Jet order used when neither a flag nor `CTL_JET_ORDER` says otherwise.
pub const DEFAULT_JET_ORDER: usize = 6;

/// Residual below which a claimed structure counts as certified.
pub const CERT_TOL: f64 = 1e-9;

pub fn default_jet_order() -> usize {
    std::env::var("CTL_JET_ORDER").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_JET_ORDER)
}

#[allow(clippy::upper_case_acronyms)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    COMM,
    SOL,
    CE,
    CGRS,
    GRS,
    CGERS,
    HIGH,
}

impl Family {
    pub const ALL: [Family; 7] =
        [Family::COMM, Family::SOL, Family::CE, Family::CGRS, Family::GRS, Family::CGERS, Family::HIGH];

    pub fn name(self) -> &'static str {
        match self {
            Family::COMM => "COMM",
            Family::SOL => "SOL",
            Family::CE => "CE",
            Family::CGRS => "CGRS",
            Family::GRS => "GRS",
            Family::CGERS => "CGERS",
            Family::HIGH => "HIGH",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = CtlError;

    fn from_str(s: &str) -> Result<Family> {
        Family::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| CtlError::Unknown { kind: "family", name: s.to_string() })
    }
}

/// Geometric structures a geometry can claim and a record can assume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Structure {
    Einstein,
    GradientSoliton,
    GenericSoliton,
    ConformallyEinstein,
    ConformalGradientSoliton,
    ConformalGenericSoliton,
}

impl Structure {
    pub const ALL: [Structure; 6] = [
        Structure::Einstein,
        Structure::GradientSoliton,
        Structure::GenericSoliton,
        Structure::ConformallyEinstein,
        Structure::ConformalGradientSoliton,
        Structure::ConformalGenericSoliton,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Structure::Einstein => "einstein",
            Structure::GradientSoliton => "gradient_soliton",
            Structure::GenericSoliton => "generic_soliton",
            Structure::ConformallyEinstein => "conformally_einstein",
            Structure::ConformalGradientSoliton => "conformal_gradient_soliton",
            Structure::ConformalGenericSoliton => "conformal_generic_soliton",
        }
    }

    pub fn needs_u(self) -> bool {
        matches!(
            self,
            Structure::ConformallyEinstein | Structure::ConformalGradientSoliton | Structure::ConformalGenericSoliton
        )
    }

    pub fn needs_f(self) -> bool {
        matches!(self, Structure::GradientSoliton | Structure::ConformalGradientSoliton)
    }

    pub fn needs_x(self) -> bool {
        matches!(self, Structure::GenericSoliton | Structure::ConformalGenericSoliton)
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Structure {
    type Err = CtlError;

    fn from_str(s: &str) -> Result<Structure> {
        Structure::ALL
            .into_iter()
            .find(|x| x.name() == s.trim())
            .ok_or_else(|| CtlError::Unknown { kind: "structure", name: s.to_string() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Gradient,
    Generic,
}

/// Soliton constant and flavor; the fields themselves live on the geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonData {
    pub lambda: f64,
    pub flavor: Flavor,
    pub conformal: bool,
}

impl SolitonData {
    pub fn structure(&self) -> Structure {
        match (self.flavor, self.conformal) {
            (Flavor::Gradient, false) => Structure::GradientSoliton,
            (Flavor::Generic, false) => Structure::GenericSoliton,
            (Flavor::Gradient, true) => Structure::ConformalGradientSoliton,
            (Flavor::Generic, true) => Structure::ConformalGenericSoliton,
        }
    }
}

/// What a record needs from the geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Requires {
    pub u: bool,
    pub f: bool,
    #[serde(rename = "X")]
    pub x: bool,
    pub lambda: bool,
    pub min_dim: usize,
    pub min_jet_order: usize,
}

pub(crate) type Sides = (TensorValue, TensorValue);
pub(crate) type Eval = fn(&Ctx) -> Result<Sides>;

/// One registry entry.
pub struct IdentityRecord {
    pub id: &'static str,
    pub family: Family,
    pub paper_eq: &'static str,
    pub anchor: &'static str,
    pub hypothesis: Option<Structure>,
    /// Ingredients read by the evaluator, as `(quantity, covariant derivatives)`.
    pub ingredients: &'static [(Quantity, usize)],
    /// Also reads the rescaled metric `e^{2u} g`.
    pub tilde: bool,
    pub min_dim: usize,
    pub(crate) eval: Eval,
}

impl fmt::Debug for IdentityRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IdentityRecord").field("id", &self.id).field("family", &self.family).finish()
    }
}

impl IdentityRecord {
    pub fn requires(&self) -> Requires {
        let has = |p: fn(Quantity) -> bool| self.ingredients.iter().any(|&(q, _)| p(q));
        let h = self.hypothesis;
        Requires {
            u: self.tilde
                || h.is_some_and(Structure::needs_u)
                || has(|q| matches!(q, Quantity::U | Quantity::Duf(_) | Quantity::DuX)),
            f: h.is_some_and(Structure::needs_f) || has(|q| matches!(q, Quantity::F | Quantity::D(_) | Quantity::Duf(_))),
            x: h.is_some_and(Structure::needs_x) || has(|q| matches!(q, Quantity::X | Quantity::DX | Quantity::DuX)),
            lambda: h.is_some(),
            min_dim: self.ingredients.iter().map(|&(q, _)| q.min_dim()).fold(self.min_dim, usize::max),
            min_jet_order: self.ingredients.iter().map(|&(q, n)| q.order_loss() + n).max().unwrap_or(0),
        }
    }

    /// Deepest metric derivative touched by either side.
    pub fn metric_order(&self) -> usize {
        self.ingredients.iter().map(|&(q, n)| q.metric_order(n)).max().unwrap_or(0)
    }

    pub fn tol_class(&self) -> TolClass {
        TolClass::for_metric_order(self.metric_order())
    }

    pub fn evaluate(&self, ctx: &Ctx) -> Result<Sides> {
        (self.eval)(ctx)
    }

    /// Residual at one point.
    pub fn residual_at(&self, ctx: &Ctx) -> Result<f64> {
        let (l, r) = self.evaluate(ctx)?;
        Ok(residual(&l, &r))
    }

    /// Reason the record cannot run on `geom`, if any.
    pub fn unmet(&self, geom: &GeometryInstance) -> Option<String> {
        let r = self.requires();
        if r.u && geom.u().is_none() {
            return Some("no u".into());
        }
        if r.f && geom.f().is_none() {
            return Some("no f".into());
        }
        if r.x && geom.x().is_none() {
            return Some("no X".into());
        }
        if r.lambda && geom.lambda().is_none() {
            return Some("no lambda".into());
        }
        if geom.dim() < r.min_dim {
            return Some(format!("requires m >= {}", r.min_dim));
        }
        None
    }
}

/// Point data handed to evaluators.
pub struct Ctx<'a> {
    pub base: &'a CurvatureBundle,
    pub tilde: Option<&'a CurvatureBundle>,
    pub lambda: Option<f64>,
}

impl<'a> Ctx<'a> {
    pub fn new(base: &'a CurvatureBundle, tilde: Option<&'a CurvatureBundle>, lambda: Option<f64>) -> Self {
        Ctx { base, tilde, lambda }
    }

    pub(crate) fn m(&self) -> usize {
        self.base.dim()
    }

    pub(crate) fn mf(&self) -> f64 {
        self.base.dim() as f64
    }

    pub(crate) fn v(&self, q: Quantity, n: usize) -> Result<Rc<TensorValue>> {
        self.base.value(q, n)
    }

    pub(crate) fn tv(&self, q: Quantity, n: usize) -> Result<Rc<TensorValue>> {
        self.tilde.ok_or_else(|| CtlError::MissingField("rescaled metric".into()))?.value(q, n)
    }

    pub(crate) fn s(&self) -> Result<f64> {
        Ok(self.base.value(Quantity::Scalar, 0)?.value())
    }

    pub(crate) fn u(&self) -> Result<f64> {
        Ok(self.base.value(Quantity::U, 0)?.value())
    }

    pub(crate) fn lam(&self) -> Result<f64> {
        self.lambda.ok_or_else(|| CtlError::MissingField("lambda".into()))
    }

    pub(crate) fn t(&self, rank: usize, f: impl FnMut(&[usize]) -> f64) -> TensorValue {
        TensorValue::build(self.m(), rank, f)
    }

    pub(crate) fn sc(&self, x: f64) -> TensorValue {
        TensorValue::from_scalar(x, self.m())
    }

    pub(crate) fn zero(&self, rank: usize) -> TensorValue {
        TensorValue::zeros(self.m(), rank)
    }
}

/// The full registry in stable order.
pub fn registry() -> &'static [IdentityRecord] {
    evals::REGISTRY
}

pub fn find(id: &str) -> Result<&'static IdentityRecord> {
    registry()
        .iter()
        .find(|r| r.id.eq_ignore_ascii_case(id.trim()))
        .ok_or_else(|| CtlError::Unknown { kind: "identity", name: id.to_string() })
}

/// Filter for [`list_identities`].
#[derive(Debug, Clone, Default)]
pub struct Filter {
    pub families: Vec<Family>,
    pub requires_u: Option<bool>,
    pub requires_f: Option<bool>,
    pub requires_x: Option<bool>,
}

impl Filter {
    pub fn family(f: Family) -> Filter {
        Filter { families: vec![f], ..Filter::default() }
    }

    fn accepts(&self, r: &IdentityRecord) -> bool {
        let req = r.requires();
        (self.families.is_empty() || self.families.contains(&r.family))
            && self.requires_u.is_none_or(|b| req.u == b)
            && self.requires_f.is_none_or(|b| req.f == b)
            && self.requires_x.is_none_or(|b| req.x == b)
    }
}

/// Registry dump entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegistryEntry {
    pub id: String,
    pub family: Family,
    pub paper_eq: String,
    pub anchor: String,
    pub requires: Requires,
    pub tol_class: TolClass,
}

pub fn list_identities(filter: &Filter) -> Vec<RegistryEntry> {
    registry()
        .iter()
        .filter(|r| filter.accepts(r))
        .map(|r| RegistryEntry {
            id: r.id.to_string(),
            family: r.family,
            paper_eq: r.paper_eq.to_string(),
            anchor: r.anchor.to_string(),
            requires: r.requires(),
            tol_class: r.tol_class(),
        })
        .collect()
}

/// Both sides of the defining equation of `s` at the bundle's point, in the
/// orthonormal frame.
pub fn structure_sides(b: &CurvatureBundle, s: Structure, lambda: f64) -> Result<Sides> {
    let m = b.dim();
    let mf = m as f64;
    let ric = b.value(Quantity::Ricci, 0)?;
    let d = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    let conformal_part = || -> Result<(TensorValue, f64)> {
        let u1 = b.value(Quantity::U, 1)?;
        let u2 = b.value(Quantity::U, 2)?;
        let lap: f64 = (0..m).map(|t| u2[[t, t]]).sum();
        let gu: f64 = (0..m).map(|t| u1[[t]] * u1[[t]]).sum();
        let lhs = TensorValue::build(m, 2, |ix| {
            let (i, j) = (ix[0], ix[1]);
            ric[[i, j]] - (mf - 2.0) * u2[[i, j]] + (mf - 2.0) * u1[[i]] * u1[[j]]
                - (lap + (mf - 2.0) * gu) * d(i, j)
        });
        Ok((lhs, b.value(Quantity::U, 0)?.value()))
    };
    Ok(match s {
        Structure::Einstein => (ric.as_ref().clone(), TensorValue::build(m, 2, |ix| lambda * d(ix[0], ix[1]))),
        Structure::GradientSoliton => {
            let f2 = b.value(Quantity::F, 2)?;
            (
                TensorValue::build(m, 2, |ix| ric[[ix[0], ix[1]]] + f2[[ix[0], ix[1]]]),
                TensorValue::build(m, 2, |ix| lambda * d(ix[0], ix[1])),
            )
        }
        Structure::GenericSoliton => {
            let x1 = b.value(Quantity::X, 1)?;
            (
                TensorValue::build(m, 2, |ix| {
                    let (i, j) = (ix[0], ix[1]);
                    ric[[i, j]] + 0.5 * (x1[[i, j]] + x1[[j, i]])
                }),
                TensorValue::build(m, 2, |ix| lambda * d(ix[0], ix[1])),
            )
        }
        Structure::ConformallyEinstein => {
            let (lhs, u) = conformal_part()?;
            let e = (2.0 * u).exp();
            (lhs, TensorValue::build(m, 2, |ix| lambda * e * d(ix[0], ix[1])))
        }
        Structure::ConformalGradientSoliton => {
            let (mut lhs, u) = conformal_part()?;
            let e = (2.0 * u).exp();
            let u1 = b.value(Quantity::U, 1)?;
            let f1 = b.value(Quantity::F, 1)?;
            let f2 = b.value(Quantity::F, 2)?;
            let fu: f64 = (0..m).map(|t| f1[[t]] * u1[[t]]).sum();
            for i in 0..m {
                for j in 0..m {
                    lhs.data[i * m + j] += f2[[i, j]] - (f1[[i]] * u1[[j]] + f1[[j]] * u1[[i]]) + fu * d(i, j);
                }
            }
            (lhs, TensorValue::build(m, 2, |ix| lambda * e * d(ix[0], ix[1])))
        }
        Structure::ConformalGenericSoliton => {
            let (mut lhs, u) = conformal_part()?;
            let e = (2.0 * u).exp();
            let u1 = b.value(Quantity::U, 1)?;
            let x = b.value(Quantity::X, 0)?;
            let x1 = b.value(Quantity::X, 1)?;
            let xu: f64 = (0..m).map(|t| x[[t]] * u1[[t]]).sum();
            for i in 0..m {
                for j in 0..m {
                    lhs.data[i * m + j] += e * (0.5 * (x1[[i, j]] + x1[[j, i]]) + xu * d(i, j));
                }
            }
            (lhs, TensorValue::build(m, 2, |ix| lambda * e * d(ix[0], ix[1])))
        }
    })
}

fn check_structure_fields(geom: &GeometryInstance, s: Structure) -> Result<()> {
    if s.needs_u() && geom.u().is_none() {
        return Err(CtlError::MissingField("u".into()));
    }
    if s.needs_f() && geom.f().is_none() {
        return Err(CtlError::MissingField("f".into()));
    }
    if s.needs_x() && geom.x().is_none() {
        return Err(CtlError::MissingField("X".into()));
    }
    Ok(())
}

/// `LHS − RHS` of the defining equation of a (possibly conformal) soliton.
pub fn soliton_residual(geom: &GeometryInstance, soliton: &SolitonData, p: &[f64]) -> Result<TensorValue> {
    structure_residual(geom, soliton.structure(), soliton.lambda, p)
}

/// `LHS − RHS` of the defining equation of any claimable structure.
pub fn structure_residual(geom: &GeometryInstance, s: Structure, lambda: f64, p: &[f64]) -> Result<TensorValue> {
    check_structure_fields(geom, s)?;
    let b = CurvatureBundle::new(geom, p, 2)?;
    let (mut l, r) = structure_sides(&b, s, lambda)?;
    for (a, c) in l.data.iter_mut().zip(&r.data) {
        *a -= c;
    }
    Ok(l)
}

/// Largest residual of the structure equation over `points`.
pub fn certify(geom: &GeometryInstance, s: Structure, lambda: f64, points: &[Vec<f64>]) -> Result<f64> {
    check_structure_fields(geom, s)?;
    let mut worst: f64 = 0.0;
    for p in points {
        let b = CurvatureBundle::new(geom, p, 2)?;
        let (l, r) = structure_sides(&b, s, lambda)?;
        worst = worst.max(residual(&l, &r));
    }
    Ok(worst)
}

/// Uniform samples from the domain box shrunk by 10% on every side.
pub fn sample_points(geom: &GeometryInstance, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(CtlError::Config("point count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            geom.spec
                .domain
                .iter()
                .map(|&[lo, hi]| {
                    let pad = 0.1 * (hi - lo);
                    rng.gen_range(lo + pad..hi - pad)
                })
                .collect()
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub points: usize,
    pub seed: u64,
    pub jet_order: usize,
    pub tolerances: Tolerances,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { points: 8, seed: 0, jet_order: default_jet_order(), tolerances: Tolerances::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub id: String,
    pub family: String,
    pub paper_eq: String,
    pub anchor: String,
    pub tol_class: TolClass,
    pub tol: f64,
    /// `None` when skipped or when a non-finite value appeared.
    pub max_residual: Option<f64>,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certification {
    pub structure: Structure,
    pub lambda: f64,
    pub max_residual: f64,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub tool: String,
    pub version: String,
    pub geometry: String,
    pub geometry_hash: String,
    pub dim: usize,
    pub jet_order: usize,
    pub seed: u64,
    pub points: usize,
    pub tolerances: Tolerances,
    pub certifications: Vec<Certification>,
    pub rows: Vec<ReportRow>,
    pub overall: Status,
}

impl VerificationReport {
    fn new(geom: &GeometryInstance, cfg: &VerifyConfig) -> VerificationReport {
        VerificationReport {
            tool: "ctl".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            geometry: geom.name().to_string(),
            geometry_hash: geom.hash().to_string(),
            dim: geom.dim(),
            jet_order: cfg.jet_order,
            seed: cfg.seed,
            points: cfg.points,
            tolerances: cfg.tolerances,
            certifications: Vec::new(),
            rows: Vec::new(),
            overall: Status::Pass,
        }
    }

    fn finish(mut self) -> VerificationReport {
        self.overall = if self.rows.iter().any(|r| r.status == Status::Fail) { Status::Fail } else { Status::Pass };
        self
    }

    /// Appends the rows of `other`, which must concern the same geometry.
    pub fn merge(mut self, other: VerificationReport) -> VerificationReport {
        for c in other.certifications {
            if !self.certifications.contains(&c) {
                self.certifications.push(c);
            }
        }
        self.rows.extend(other.rows);
        self.finish()
    }

    pub fn row(&self, id: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.id == id)
    }

    pub fn passed(&self) -> bool {
        self.overall == Status::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<VerificationReport> {
        serde_json::from_str(text).map_err(|e| CtlError::Config(format!("bad report: {e}")))
    }

    /// Plain-text table, one line per row.
    pub fn to_table(&self) -> String {
        let mut out = format!(
            "geometry {} ({}) dim={} jet_order={} seed={} points={}\n",
            self.geometry, self.geometry_hash, self.dim, self.jet_order, self.seed, self.points
        );
        for c in &self.certifications {
            out += &format!(
                "certify {:<28} lambda={:<8} residual={:.3e} {}\n",
                c.structure.name(),
                c.lambda,
                c.max_residual,
                if c.certified { "ok" } else { "FAILED" }
            );
        }
        let w = self.rows.iter().map(|r| r.id.len()).max().unwrap_or(2).max(2);
        out += &format!("{:<w$}  {:<6} {:<5} {:>10} {:>10}  {}\n", "id", "family", "class", "residual", "tol", "status");
        for r in &self.rows {
            let res = r.max_residual.map_or_else(|| "-".to_string(), |x| format!("{x:.3e}"));
            let status = match &r.reason {
                Some(reason) => format!("{}({})", r.status, reason),
                None => r.status.to_string(),
            };
            out += &format!(
                "{:<w$}  {:<6} {:<5} {:>10} {:>10.1e}  {}\n",
                r.id, r.family, r.tol_class, res, r.tol, status
            );
        }
        out += &format!("overall: {}\n", self.overall);
        out
    }
}

/// Records selected by families and/or ids, in registry order.
pub fn select(families: &[Family], ids: &[String]) -> Result<Vec<&'static IdentityRecord>> {
    let picked = ids.iter().map(|id| find(id).map(|r| r.id)).collect::<Result<Vec<_>>>()?;
    Ok(registry()
        .iter()
        .filter(|r| families.contains(&r.family) || picked.contains(&r.id))
        .collect())
}

fn skipped_row(r: &IdentityRecord, tol: f64, reason: String) -> ReportRow {
    ReportRow {
        id: r.id.to_string(),
        family: r.family.to_string(),
        paper_eq: r.paper_eq.to_string(),
        anchor: r.anchor.to_string(),
        tol_class: r.tol_class(),
        tol,
        max_residual: None,
        status: Status::Skipped,
        reason: Some(reason),
    }
}

fn scored_row(id: &str, family: &str, paper_eq: &str, anchor: &str, class: TolClass, tol: f64, worst: f64) -> ReportRow {
    let finite = worst.is_finite();
    ReportRow {
        id: id.to_string(),
        family: family.to_string(),
        paper_eq: paper_eq.to_string(),
        anchor: anchor.to_string(),
        tol_class: class,
        tol,
        max_residual: finite.then_some(worst),
        status: if finite && worst <= tol { Status::Pass } else { Status::Fail },
        reason: (!finite).then(|| "non-finite value".to_string()),
    }
}

/// Runs `records` on `geom`. Structures assumed by conditional records are
/// certified on the sample points first; records whose hypothesis fails are
/// reported as skipped and never evaluated.
pub fn verify(geom: &GeometryInstance, records: &[&IdentityRecord], cfg: &VerifyConfig) -> Result<VerificationReport> {
    let points = sample_points(geom, cfg.points, cfg.seed)?;
    let mut report = VerificationReport::new(geom, cfg);
    let mut reasons: Vec<Option<String>> = records.iter().map(|r| r.unmet(geom)).collect();
    for (r, why) in records.iter().zip(&reasons) {
        let need = r.requires().min_jet_order;
        if why.is_none() && need > cfg.jet_order {
            return Err(CtlError::OrderTooLow { needed: need, have: cfg.jet_order });
        }
    }

    let mut certified: BTreeMap<Structure, (f64, bool)> = BTreeMap::new();
    for (r, why) in records.iter().zip(reasons.iter_mut()) {
        let (Some(h), None) = (r.hypothesis, why.as_ref()) else { continue };
        let lambda = geom.lambda().expect("checked by unmet");
        let (res, ok) = match certified.get(&h) {
            Some(&c) => c,
            None => {
                let res = certify(geom, h, lambda, &points)?;
                let c = (res, res.is_finite() && res < CERT_TOL);
                certified.insert(h, c);
                report.certifications.push(Certification { structure: h, lambda, max_residual: res, certified: c.1 });
                c
            }
        };
        if !ok {
            *why = Some(format!("hypothesis unmet: {} residual {:.2e}", h.name(), res));
        }
    }

    let active: Vec<usize> = (0..records.len()).filter(|&i| reasons[i].is_none()).collect();
    let mut worst = vec![0.0f64; records.len()];
    if !active.is_empty() {
        let order = active.iter().map(|&i| records[i].requires().min_jet_order).max().unwrap_or(0).max(2);
        let tilde_geom = if active.iter().any(|&i| records[i].tilde) {
            let u = geom.u().expect("checked by unmet");
            Some(geom.conformal_rescale(u, &format!("{}~", geom.name())))
        } else {
            None
        };
        for p in &points {
            let base = CurvatureBundle::new(geom, p, order)?;
            let tilde = tilde_geom.as_ref().map(|g| CurvatureBundle::new(g, p, order)).transpose()?;
            let ctx = Ctx::new(&base, tilde.as_ref(), geom.lambda());
            for &i in &active {
                let r = records[i].residual_at(&ctx)?;
                worst[i] = if r.is_nan() || worst[i].is_nan() { f64::NAN } else { worst[i].max(r) };
            }
        }
    }

    for (i, r) in records.iter().enumerate() {
        let class = r.tol_class();
        let tol = cfg.tolerances.get(class);
        report.rows.push(match reasons[i].take() {
            Some(why) => skipped_row(r, tol, why),
            None => scored_row(r.id, r.family.name(), r.paper_eq, r.anchor, class, tol, worst[i]),
        });
    }
    Ok(report.finish())
}

/// Runs conformal transformation laws with the geometry's own `u` as one
/// report.
pub fn verify_laws(geom: &GeometryInstance, laws: &[TransformLawId], cfg: &VerifyConfig) -> Result<VerificationReport> {
    let points = sample_points(geom, cfg.points, cfg.seed)?;
    let mut report = VerificationReport::new(geom, cfg);
    let pair = geom.u().map(|_| ConformalPair::from_geometry(geom)).transpose()?;
    let mut active = Vec::new();
    let mut reasons = Vec::new();
    for &law in laws {
        let Some(pair) = pair.as_ref() else {
            reasons.push(Some("no u".to_string()));
            continue;
        };
        let why = match conformal::check_applicable(pair, law, cfg.jet_order) {
            Ok(()) => None,
            Err(CtlError::OrderTooLow { needed, have }) => return Err(CtlError::OrderTooLow { needed, have }),
            Err(CtlError::MissingField(f)) => Some(format!("no {f}")),
            Err(CtlError::DimensionTooSmall { min, .. }) => Some(format!("requires m >= {min}")),
            Err(e) => return Err(e),
        };
        if why.is_none() {
            active.push(law);
        }
        reasons.push(why);
    }
    let mut worst: BTreeMap<&'static str, f64> = BTreeMap::new();
    if !active.is_empty() {
        let order = active.iter().map(|l| l.required_order()).max().unwrap_or(2);
        for p in &points {
            let pp = pair.as_ref().expect("active laws imply u").at(p, order)?;
            for &law in &active {
                let r = conformal::law_residual(&pp, law)?;
                let w = worst.entry(law.id()).or_insert(0.0);
                *w = if r.is_nan() || w.is_nan() { f64::NAN } else { w.max(r) };
            }
        }
    }
    for (&law, why) in laws.iter().zip(reasons) {
        let info = law.info();
        let class = law.tol_class();
        let tol = cfg.tolerances.get(class);
        report.rows.push(match why {
            Some(why) => ReportRow {
                id: info.id.to_string(),
                family: "LAW".into(),
                paper_eq: info.paper_eq.to_string(),
                anchor: info.anchor.to_string(),
                tol_class: class,
                tol,
                max_residual: None,
                status: Status::Skipped,
                reason: Some(why),
            },
            None => scored_row(info.id, "LAW", info.paper_eq, info.anchor, class, tol, worst[info.id]),
        });
    }
    Ok(report.finish())
}
