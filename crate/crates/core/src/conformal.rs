//! Conformal change `g̃ = e^{2u} g`: direct recomputation on the rescaled metric
//! against closed-form predictions from base-metric quantities.
//!
//! Both sides are orthonormal. The direct side is the tilde-frame component of
//! the tilde quantity times `e^{k u}`, `k` being the law's prefactor.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::curvature::{CurvatureBundle, DForm, Quantity};
use crate::expr::Expr;
use crate::geometry::{Frame, GeometryInstance, TensorValue};
use crate::tolerance::{residual, TolClass, Tolerances};
use crate::{CtlError, Result};

/// A base geometry carrying `u` together with its rescaling.
#[derive(Debug, Clone)]
pub struct ConformalPair {
    pub base: GeometryInstance,
    pub tilde: GeometryInstance,
}

pub fn rescale(g: &GeometryInstance, u: &Expr) -> ConformalPair {
    let base = g.with_conformal_factor(Some(u.clone()));
    let tilde = base.conformal_rescale(u, &format!("{}~", g.name()));
    ConformalPair { base, tilde }
}

impl ConformalPair {
    /// Uses the geometry's own `u`.
    pub fn from_geometry(g: &GeometryInstance) -> Result<ConformalPair> {
        let u = g.u().ok_or_else(|| CtlError::MissingField("u".into()))?.clone();
        Ok(rescale(g, &u))
    }

    pub fn at(&self, p: &[f64], order: usize) -> Result<PairPoint> {
        let base = CurvatureBundle::new(&self.base, p, order)?;
        let tilde = CurvatureBundle::new(&self.tilde, p, order)?;
        let u = self.base.u().expect("pair base carries u").eval_f64(p)?;
        Ok(PairPoint { base, tilde, u })
    }
}

/// Both bundles at one point plus `u(p)`.
pub struct PairPoint {
    pub base: CurvatureBundle,
    pub tilde: CurvatureBundle,
    pub u: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformLawId {
    Riemann04,
    Ricci,
    Scalar,
    NablaRicci,
    Nabla2Ricci,
    NablaScalar,
    HessScalar,
    LapScalar,
    HessianF,
    LaplacianF,
    ThirdF,
    ThirdFTraced,
    Schouten,
    NablaSchouten,
    Nabla2Schouten,
    Weyl13,
    Cotton,
    Bach,
    DTensor,
    DTensorReverse,
    NablaD,
    LieMetric,
    NablaX,
    SymNablaX,
    DivX,
    Nabla2X,
    Nabla2XTraced,
}

/// Static description of a law.
#[derive(Debug, Clone, Copy)]
pub struct LawInfo {
    pub id: &'static str,
    pub paper_eq: &'static str,
    pub anchor: &'static str,
    /// Power `k` in `e^{k u}` multiplying the direct side.
    pub prefactor: i32,
    /// Base-side ingredients `(quantity, derivative count)`.
    pub base: &'static [(Quantity, usize)],
    /// Tilde-side ingredient.
    pub tilde: (Quantity, usize),
    pub min_dim: usize,
}

use Quantity as Q;

impl TransformLawId {
    pub const ALL: [TransformLawId; 27] = [
        TransformLawId::Riemann04,
        TransformLawId::Ricci,
        TransformLawId::Scalar,
        TransformLawId::NablaRicci,
        TransformLawId::Nabla2Ricci,
        TransformLawId::NablaScalar,
        TransformLawId::HessScalar,
        TransformLawId::LapScalar,
        TransformLawId::HessianF,
        TransformLawId::LaplacianF,
        TransformLawId::ThirdF,
        TransformLawId::ThirdFTraced,
        TransformLawId::Schouten,
        TransformLawId::NablaSchouten,
        TransformLawId::Nabla2Schouten,
        TransformLawId::Weyl13,
        TransformLawId::Cotton,
        TransformLawId::Bach,
        TransformLawId::DTensor,
        TransformLawId::DTensorReverse,
        TransformLawId::NablaD,
        TransformLawId::LieMetric,
        TransformLawId::NablaX,
        TransformLawId::SymNablaX,
        TransformLawId::DivX,
        TransformLawId::Nabla2X,
        TransformLawId::Nabla2XTraced,
    ];

    pub fn info(self) -> LawInfo {
        use TransformLawId::*;
        let l = |id, paper_eq, anchor, prefactor, base, tilde, min_dim| LawInfo {
            id,
            paper_eq,
            anchor,
            prefactor,
            base,
            tilde,
            min_dim,
        };
        match self {
            Riemann04 => l("riemann04", "Riemannexp", "skew-symmetrizing the coefficients", 2, &[(Q::Riemann, 0), (Q::U, 2)], (Q::Riemann, 0), 3),
            Ricci => l("ricci", "RicciexpComponents", "Ricci tensor", 2, &[(Q::Ricci, 0), (Q::U, 2)], (Q::Ricci, 0), 3),
            Scalar => l("scalar", "scalarExp", "Scalar curvature", 2, &[(Q::Scalar, 0), (Q::U, 2)], (Q::Scalar, 0), 3),
            NablaRicci => l("nabla_ricci", "NablaRicciexpComponents", "Covariant derivative of the Ricci tensor", 3, &[(Q::Ricci, 1), (Q::U, 3)], (Q::Ricci, 1), 3),
            Nabla2Ricci => l("nabla2_ricci", "ExpochangenablasquaredRicci", "Second Covariant derivative of the Ricci tensor", 4, &[(Q::Ricci, 2), (Q::U, 4)], (Q::Ricci, 2), 3),
            NablaScalar => l("nabla_scalar", "NablascalarExp", "Differential of the scalar curvature", 3, &[(Q::Scalar, 1), (Q::U, 3)], (Q::Scalar, 1), 3),
            HessScalar => l("hess_scalar", "HessianscalarExp", "Hessian of the scalar curvature", 4, &[(Q::Scalar, 2), (Q::U, 4)], (Q::Scalar, 2), 3),
            LapScalar => l("lap_scalar", "LaplacianscalarExp", "Laplacian of the scalar curvature", 4, &[(Q::Scalar, 2), (Q::Ricci, 0), (Q::U, 4)], (Q::Scalar, 2), 3),
            HessianF => l("hessian_f", "HessianExpComp", "the Hessian of a function", 2, &[(Q::F, 2), (Q::U, 1)], (Q::F, 2), 3),
            LaplacianF => l("laplacian_f", "LaplacianExpComp", "the Laplacian of a function", 2, &[(Q::F, 2), (Q::U, 1)], (Q::F, 2), 3),
            ThirdF => l("third_f", "thirdDerivFunctExpComp", "the third derivative of a function", 3, &[(Q::F, 3), (Q::U, 2)], (Q::F, 3), 3),
            ThirdFTraced => l("third_f_traced", "thirdDerivFunctExpCompTraced", "the third derivative of a function", 3, &[(Q::F, 3), (Q::U, 2)], (Q::F, 3), 3),
            Schouten => l("schouten", "SchoutenexpComponents", "Schouten tensor", 2, &[(Q::Schouten, 0), (Q::U, 2)], (Q::Schouten, 0), 3),
            NablaSchouten => l("nabla_schouten", "ExpochangenablaSchouten", "Covariant derivative of the Schouten tensor", 3, &[(Q::Schouten, 1), (Q::U, 3)], (Q::Schouten, 1), 3),
            Nabla2Schouten => l("nabla2_schouten", "ExpochangenablasquaredSchouten", "Second Covariant derivative of the Schouten tensor", 4, &[(Q::Schouten, 2), (Q::U, 4)], (Q::Schouten, 2), 3),
            Weyl13 => l("weyl13", "Weylexp", "(1, 3)-version", 2, &[(Q::Weyl, 0)], (Q::Weyl, 0), 3),
            Cotton => l("cotton", "Cottonlexp", "definition of the Cotton tensor", 3, &[(Q::Cotton, 0), (Q::Weyl, 0), (Q::U, 1)], (Q::Cotton, 0), 3),
            Bach => l("bach", "BachExpComp", "definition of the Bach tensor", 4, &[(Q::Bach, 0), (Q::Cotton, 0), (Q::Weyl, 0), (Q::U, 1)], (Q::Bach, 0), 3),
            DTensor => l("d_tensor", "DExpComp", "is a soliton structure", 3, &[(Q::Ricci, 0), (Q::F, 1), (Q::U, 2)], (Q::D(DForm::One), 0), 3),
            DTensorReverse => l("d_tensor_reverse", "DExpCompStartingFrom", "is a soliton structure", 3, &[(Q::D(DForm::One), 0), (Q::F, 1), (Q::U, 2)], (Q::D(DForm::One), 0), 3),
            NablaD => l("nabla_d", "CovDerivDExpComp", "Covariant derivative of the", 4, &[(Q::Ricci, 1), (Q::Scalar, 1), (Q::F, 2), (Q::U, 3)], (Q::D(DForm::One), 1), 3),
            LieMetric => l("lie_metric", "eq_conformalchangeLieDeriv", "be a vector field on the Riemannian manifold", 0, &[(Q::X, 1), (Q::U, 1)], (Q::X, 1), 2),
            NablaX => l("nabla_X", "tildeXik", "A computation using", 0, &[(Q::X, 1), (Q::U, 1)], (Q::X, 1), 2),
            SymNablaX => l("sym_nabla_X", "tildeXiktildeXki", "which implies", 0, &[(Q::X, 1), (Q::U, 1)], (Q::X, 1), 2),
            DivX => l("div_X", "divergenzatilde", "Divergence of a vector field", 0, &[(Q::X, 1), (Q::U, 1)], (Q::X, 1), 2),
            Nabla2X => l("nabla2_X", "secondCovDerivVFExp", "second covariant derivative of a vector", 1, &[(Q::X, 2), (Q::U, 2)], (Q::X, 2), 2),
            Nabla2XTraced => l("nabla2_X_traced", "secondCovDerivVFExp", "second covariant derivative of a vector", 1, &[(Q::X, 2), (Q::U, 2)], (Q::X, 2), 2),
        }
    }

    pub fn id(self) -> &'static str {
        self.info().id
    }

    pub fn parse(id: &str) -> Option<TransformLawId> {
        TransformLawId::ALL.iter().copied().find(|l| l.id() == id)
    }

    pub fn needs_f(self) -> bool {
        let i = self.info();
        i.base.iter().chain(std::iter::once(&i.tilde)).any(|(q, _)| matches!(q, Q::F | Q::D(_)))
    }

    pub fn needs_x(self) -> bool {
        let i = self.info();
        i.base.iter().chain(std::iter::once(&i.tilde)).any(|(q, _)| matches!(q, Q::X))
    }

    pub fn required_order(self) -> usize {
        let i = self.info();
        i.base.iter().chain(std::iter::once(&i.tilde)).map(|(q, n)| q.order_loss() + n).max().unwrap_or(0)
    }

    pub fn tol_class(self) -> TolClass {
        let i = self.info();
        TolClass::for_metric_order(i.base.iter().chain(std::iter::once(&i.tilde)).map(|(q, n)| q.metric_order(*n)).max().unwrap_or(0))
    }
}

impl fmt::Display for TransformLawId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

fn kd(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

fn onb(t: TensorValue, point: &[f64]) -> TensorValue {
    TensorValue { point: point.to_vec(), frame: Frame::Orthonormal, ..t }
}

/// The direct side: `e^{k u}` times the tilde-frame tilde quantity.
pub fn direct(pp: &PairPoint, law: TransformLawId) -> Result<TensorValue> {
    use TransformLawId::*;
    let info = law.info();
    let scale = (info.prefactor as f64 * pp.u).exp();
    let t = &pp.tilde;
    let m = t.dim();
    let (q, n) = info.tilde;
    let raw: TensorValue = match law {
        LapScalar => t.value(Q::Scalar, 2)?.trace(0, 1),
        LaplacianF => t.value(Q::F, 2)?.trace(0, 1),
        ThirdFTraced => t.value(Q::F, 3)?.trace(0, 1),
        Nabla2XTraced => t.value(Q::X, 2)?.trace(0, 1),
        DivX => t.value(Q::X, 1)?.trace(0, 1),
        SymNablaX => {
            let x = t.value(Q::X, 1)?;
            TensorValue::build(m, 2, |ix| x[[ix[0], ix[1]]] + x[[ix[1], ix[0]]])
        }
        LieMetric => {
            // coordinate formula on g̃, read in the base orthonormal frame
            let xs = t.x_expr().ok_or_else(|| CtlError::MissingField("X".into()))?;
            let l = t.geometry().lie_derivative_metric_jets(xs)?;
            let coord = t.geometry().value_of(&l, 2, 0);
            pp.base.geometry().to_orthonormal(&coord)
        }
        _ => (*t.value(q, n)?).clone(),
    };
    Ok(onb(raw.scaled(scale), t.point()))
}

/// Closed-form prediction from base-metric quantities.
pub fn predict(pp: &PairPoint, law: TransformLawId) -> Result<TensorValue> {
    let b = &pp.base;
    let m = b.dim();
    if m < law.info().min_dim {
        return Err(CtlError::DimensionTooSmall { what: law.id().to_string(), min: law.info().min_dim, dim: m });
    }
    let out = laws::predict(b, pp.u, law)?;
    Ok(onb(out, b.point()))
}

/// Max residual of one law over a set of points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawOutcome {
    pub law: TransformLawId,
    pub paper_eq: String,
    pub anchor: String,
    pub tol_class: TolClass,
    pub tol: f64,
    pub max_residual: f64,
    pub passed: bool,
}

pub fn law_residual(pp: &PairPoint, law: TransformLawId) -> Result<f64> {
    let d = direct(pp, law)?;
    let p = predict(pp, law)?;
    Ok(residual(&d, &p))
}

/// Evaluates both routes at each point and reports the worst residual.
pub fn verify_transform(
    pair: &ConformalPair,
    law: TransformLawId,
    points: &[Vec<f64>],
    order: usize,
    tols: &Tolerances,
) -> Result<LawOutcome> {
    check_applicable(pair, law, order)?;
    let residuals: Vec<f64> = points
        .iter()
        .map(|p| pair.at(p, order).and_then(|pp| law_residual(&pp, law)))
        .collect::<Result<_>>()?;
    let max_residual = residuals.into_iter().fold(0.0, f64::max);
    let info = law.info();
    let class = law.tol_class();
    let tol = tols.get(class);
    Ok(LawOutcome {
        law,
        paper_eq: info.paper_eq.to_string(),
        anchor: info.anchor.to_string(),
        tol_class: class,
        tol,
        max_residual,
        passed: max_residual <= tol,
    })
}

pub fn check_applicable(pair: &ConformalPair, law: TransformLawId, order: usize) -> Result<()> {
    let info = law.info();
    let m = pair.base.dim();
    if m < info.min_dim {
        return Err(CtlError::DimensionTooSmall { what: law.id().to_string(), min: info.min_dim, dim: m });
    }
    if law.needs_f() && pair.base.f().is_none() {
        return Err(CtlError::MissingField("f".into()));
    }
    if law.needs_x() && pair.base.x().is_none() {
        return Err(CtlError::MissingField("X".into()));
    }
    let need = law.required_order();
    if need > order {
        return Err(CtlError::OrderTooLow { needed: need, have: order });
    }
    Ok(())
}

mod laws {
    use super::*;

    /// Orthonormal base data, fetched lazily.
    struct Env<'a> {
        b: &'a CurvatureBundle,
        m: usize,
        mf: f64,
    }

    impl<'a> Env<'a> {
        fn v(&self, q: Quantity, n: usize) -> Result<std::rc::Rc<TensorValue>> {
            self.b.value(q, n)
        }
    }

    fn dot(a: &TensorValue, b: &TensorValue) -> f64 {
        a.data.iter().zip(&b.data).map(|(x, y)| x * y).sum()
    }

    /// `Σ_l v_l T_{l a}`
    fn vt(v: &TensorValue, t: &TensorValue) -> Vec<f64> {
        let m = v.dim;
        (0..m).map(|a| (0..m).map(|l| v[[l]] * t[[l, a]]).sum()).collect()
    }

    /// `Σ_{l,s} v_l T_{l s} w_s`
    fn vtw(v: &TensorValue, t: &TensorValue, w: &TensorValue) -> f64 {
        let m = v.dim;
        let mut acc = 0.0;
        for l in 0..m {
            for s in 0..m {
                acc += v[[l]] * t[[l, s]] * w[[s]];
            }
        }
        acc
    }

    pub(super) fn predict(b: &CurvatureBundle, u: f64, law: TransformLawId) -> Result<TensorValue> {
        use TransformLawId::*;
        let m = b.dim();
        let e = Env { b, m, mf: m as f64 };
        let mf = e.mf;
        let d = kd;
        Ok(match law {
            Riemann04 => {
                let r = e.v(Q::Riemann, 0)?;
                let (u1, u2) = (e.v(Q::U, 1)?, e.v(Q::U, 2)?);
                let g2 = dot(&u1, &u1);
                let h = |a: usize, c: usize| u2[[a, c]] - u1[[a]] * u1[[c]];
                TensorValue::build(m, 4, |ix| {
                    let (i, j, k, t) = (ix[0], ix[1], ix[2], ix[3]);
                    r[[i, j, k, t]] + h(j, k) * d(i, t) - h(j, t) * d(i, k) - h(i, k) * d(j, t) + h(i, t) * d(j, k)
                        - g2 * (d(i, k) * d(j, t) - d(i, t) * d(j, k))
                })
            }
            Ricci => {
                let r = e.v(Q::Ricci, 0)?;
                let (u1, u2) = (e.v(Q::U, 1)?, e.v(Q::U, 2)?);
                let g2 = dot(&u1, &u1);
                let lap = u2.trace(0, 1).value();
                TensorValue::build(m, 2, |ix| {
                    let (i, j) = (ix[0], ix[1]);
                    r[[i, j]] - (mf - 2.0) * u2[[i, j]] + (mf - 2.0) * u1[[i]] * u1[[j]] - lap * d(i, j)
                        - (mf - 2.0) * g2 * d(i, j)
                })
            }
            Scalar => {
                let s = b.scalar()?;
                let (u1, u2) = (e.v(Q::U, 1)?, e.v(Q::U, 2)?);
                let g2 = dot(&u1, &u1);
                let lap = u2.trace(0, 1).value();
                TensorValue::from_scalar(s - 2.0 * (mf - 1.0) * lap - (mf - 1.0) * (mf - 2.0) * g2, m)
            }
            NablaRicci => {
                let (r, dr) = (e.v(Q::Ricci, 0)?, e.v(Q::Ricci, 1)?);
                let (u1, u2, u3) = (e.v(Q::U, 1)?, e.v(Q::U, 2)?, e.v(Q::U, 3)?);
                let g2 = dot(&u1, &u1);
                let lap = u2.trace(0, 1).value();
                let dlap = u3.trace(0, 1);
                let ur = vt(&u1, &r);
                let uu = vt(&u1, &u2);
                let mm2 = mf - 2.0;
                TensorValue::build(m, 3, |ix| {
                    let (i, j, k) = (ix[0], ix[1], ix[2]);
                    dr[[i, j, k]] - mm2 * u3[[i, j, k]] - (dlap[[k]] - 2.0 * u1[[k]] * lap) * d(i, j)
                        - (2.0 * r[[i, j]] * u1[[k]] + u1[[i]] * r[[j, k]] + u1[[j]] * r[[i, k]])
                        + (ur[i] * d(j, k) + ur[j] * d(i, k))
                        + 2.0 * mm2 * (u1[[i]] * u2[[j, k]] + u1[[j]] * u2[[i, k]] + u1[[k]] * u2[[i, j]])
                        - mm2 * (uu[i] * d(j, k) + uu[j] * d(i, k) + 2.0 * uu[k] * d(i, j))
                        - 4.0 * mm2 * u1[[i]] * u1[[j]] * u1[[k]]
                        + mm2 * g2 * (u1[[i]] * d(j, k) + u1[[j]] * d(i, k) + 2.0 * u1[[k]] * d(i, j))
                })
            }
            Nabla2Ricci => nabla2_ricci_like(&e, false)?,
            Nabla2Schouten => nabla2_ricci_like(&e, true)?,
            NablaScalar => {
                let s = b.scalar()?;
                let ds = e.v(Q::Scalar, 1)?;
                let (u1, u2, u3) = (e.v(Q::U, 1)?, e.v(Q::U, 2)?, e.v(Q::U, 3)?);
                let g2 = dot(&u1, &u1);
                let lap = u2.trace(0, 1).value();
                let dlap = u3.trace(0, 1);
                let uu = vt(&u1, &u2);
                let br = s - 2.0 * (mf - 1.0) * lap - (mf - 1.0) * (mf - 2.0) * g2;
                TensorValue::build(m, 1, |ix| {
                    let k = ix[0];
                    ds[[k]] - 2.0 * (mf - 1.0) * dlap[[k]] - 2.0 * (mf - 1.0) * (mf - 2.0) * uu[k] - 2.0 * br * u1[[k]]
                })
            }
            HessScalar => hess_scalar(&e)?,
            LapScalar => {
                let s = b.scalar()?;
                let (ds, dds) = (e.v(Q::Scalar, 1)?, e.v(Q::Scalar, 2)?);
                let r = e.v(Q::Ricci, 0)?;
                let (u1, u2, u3, u4) = (e.v(Q::U, 1)?, e.v(Q::U, 2)?, e.v(Q::U, 3)?, e.v(Q::U, 4)?);
                let g2 = dot(&u1, &u1);
                let lap = u2.trace(0, 1).value();
                let dlap = u3.trace(0, 1);
                let bilap = u4.trace(0, 1).trace(0, 1).value();
                let hess2 = u2.norm_sq();
                let ric_uu = vtw(&u1, &r, &u1);
                let hu_uu = vtw(&u1, &u2, &u1);
                let u_dlap = dot(&u1, &dlap);
                let ds_u = dot(&ds, &u1);
                let v = dds.trace(0, 1).value() - 2.0 * (mf - 1.0) * bilap - 2.0 * (mf - 1.0) * (mf - 2.0) * hess2
                    - 2.0 * (mf - 1.0) * (mf - 2.0) * ric_uu
                    - 4.0 * (mf - 1.0) * (mf - 4.0) * u_dlap
                    - 2.0 * (mf - 1.0) * (mf - 2.0) * (mf - 6.0) * hu_uu
                    + (mf - 6.0) * ds_u
                    - 2.0 * s * lap
                    + 4.0 * (mf - 1.0) * lap * lap
                    + 2.0 * (mf - 1.0) * (3.0 * mf - 10.0) * g2 * lap
                    + 2.0 * (mf - 1.0) * (mf - 2.0) * (mf - 4.0) * g2 * g2
                    - 2.0 * (mf - 4.0) * s * g2;
                TensorValue::from_scalar(v, m)
            }
            HessianF => {
                let (f1, f2, u1) = (e.v(Q::F, 1)?, e.v(Q::F, 2)?, e.v(Q::U, 1)?);
                let fu = dot(&f1, &u1);
                TensorValue::build(m, 2, |ix| {
                    let (i, j) = (ix[0], ix[1]);
                    f2[[i, j]] - (f1[[i]] * u1[[j]] + f1[[j]] * u1[[i]]) + fu * d(i, j)
                })
            }
            LaplacianF => {
                let (f1, f2, u1) = (e.v(Q::F, 1)?, e.v(Q::F, 2)?, e.v(Q::U, 1)?);
                TensorValue::from_scalar(f2.trace(0, 1).value() + (mf - 2.0) * dot(&f1, &u1), m)
            }
            ThirdF => {
                let (f1, f2, f3) = (e.v(Q::F, 1)?, e.v(Q::F, 2)?, e.v(Q::F, 3)?);
                let (u1, u2) = (e.v(Q::U, 1)?, e.v(Q::U, 2)?);
                let fu = dot(&f1, &u1);
                let g2 = dot(&u1, &u1);
                let uf = vt(&u1, &f2);
                let fuu = vt(&f1, &u2);
                TensorValue::build(m, 3, |ix| {
                    let (i, j, k) = (ix[0], ix[1], ix[2]);
                    f3[[i, j, k]] - 2.0 * (f2[[i, j]] * u1[[k]] + f2[[i, k]] * u1[[j]] + f2[[j, k]] * u1[[i]])
                        - (f1[[i]] * u2[[j, k]] + f1[[j]] * u2[[i, k]])
                        + 3.0 * (f1[[i]] * u1[[j]] + f1[[j]] * u1[[i]]) * u1[[k]]
                        + 2.0 * u1[[i]] * u1[[j]] * f1[[k]]
                        + (uf[k] * d(i, j) + uf[j] * d(i, k) + uf[i] * d(j, k))
                        + fuu[k] * d(i, j)
                        - fu * (u1[[i]] * d(j, k) + u1[[j]] * d(i, k) + 2.0 * u1[[k]] * d(i, j))
                        - g2 * (f1[[i]] * d(j, k) + f1[[j]] * d(i, k))
                })
            }
            ThirdFTraced => {
                let (f1, f2, f3) = (e.v(Q::F, 1)?, e.v(Q::F, 2)?, e.v(Q::F, 3)?);
                let (u1, u2) = (e.v(Q::U, 1)?, e.v(Q::U, 2)?);
                let fu = dot(&f1, &u1);
                let lapf = f2.trace(0, 1).value();
                let f3t = f3.trace(0, 1);
                let uf = vt(&u1, &f2);
                let fuu = vt(&f1, &u2);
                TensorValue::build(m, 1, |ix| {
                    let k = ix[0];
                    f3t[[k]] - 2.0 * lapf * u1[[k]] + (mf - 2.0) * (fuu[k] + uf[k] - 2.0 * fu * u1[[k]])
                })
            }
            Schouten => {
                let a = e.v(Q::Schouten, 0)?;
                let (u1, u2) = (e.v(Q::U, 1)?, e.v(Q::U, 2)?);
                let g2 = dot(&u1, &u1);
                TensorValue::build(m, 2, |ix| {
                    let (i, j) = (ix[0], ix[1]);
                    a[[i, j]] - (mf - 2.0) * u2[[i, j]] + (mf - 2.0) * u1[[i]] * u1[[j]]
                        - 0.5 * (mf - 2.0) * g2 * d(i, j)
                })
            }
            NablaSchouten => {
                let (a, da) = (e.v(Q::Schouten, 0)?, e.v(Q::Schouten, 1)?);
                let (u1, u2, u3) = (e.v(Q::U, 1)?, e.v(Q::U, 2)?, e.v(Q::U, 3)?);
                let g2 = dot(&u1, &u1);
                let ua = vt(&u1, &a);
                let uu = vt(&u1, &u2);
                let mm2 = mf - 2.0;
                TensorValue::build(m, 3, |ix| {
                    let (i, j, k) = (ix[0], ix[1], ix[2]);
                    da[[i, j, k]] - mm2 * u3[[i, j, k]] + ua[i] * d(j, k) + ua[j] * d(i, k)
                        - (u1[[i]] * a[[j, k]] + u1[[j]] * a[[i, k]] + 2.0 * u1[[k]] * a[[i, j]])
                        + 2.0 * mm2 * (u1[[i]] * u2[[j, k]] + u1[[j]] * u2[[i, k]] + u1[[k]] * u2[[i, j]])
                        - mm2 * (uu[k] * d(i, j) + uu[j] * d(i, k) + uu[i] * d(j, k))
                        - 4.0 * mm2 * u1[[i]] * u1[[j]] * u1[[k]]
                        + mm2 * g2 * (u1[[i]] * d(j, k) + u1[[j]] * d(i, k) + u1[[k]] * d(i, j))
                })
            }
            Weyl13 => (*e.v(Q::Weyl, 0)?).clone(),
            Cotton => {
                let (c, w, u1) = (e.v(Q::Cotton, 0)?, e.v(Q::Weyl, 0)?, e.v(Q::U, 1)?);
                TensorValue::build(m, 3, |ix| {
                    let (i, j, k) = (ix[0], ix[1], ix[2]);
                    c[[i, j, k]] - (mf - 2.0) * (0..m).map(|t| u1[[t]] * w[[t, i, j, k]]).sum::<f64>()
                })
            }
            Bach => {
                let (bb, c, w, u1) = (e.v(Q::Bach, 0)?, e.v(Q::Cotton, 0)?, e.v(Q::Weyl, 0)?, e.v(Q::U, 1)?);
                TensorValue::build(m, 2, |ix| {
                    let (i, j) = (ix[0], ix[1]);
                    let mut uuw = 0.0;
                    let mut cu = 0.0;
                    for t in 0..m {
                        for k in 0..m {
                            uuw += u1[[t]] * u1[[k]] * w[[t, i, k, j]];
                        }
                        cu += (c[[i, j, t]] + c[[j, i, t]]) * u1[[t]];
                    }
                    bb[[i, j]] + (mf - 4.0) * (uuw + cu / (mf - 2.0))
                })
            }
            DTensor | DTensorReverse => d_law(&e, law == DTensorReverse)?,
            NablaD => nabla_d(&e)?,
            LieMetric => {
                let (x1, x2, u1) = (e.v(Q::X, 0)?, e.v(Q::X, 1)?, e.v(Q::U, 1)?);
                let xu = dot(&x1, &u1);
                let s = (2.0 * u).exp();
                TensorValue::build(m, 2, |ix| {
                    let (i, j) = (ix[0], ix[1]);
                    s * (x2[[i, j]] + x2[[j, i]] + 2.0 * xu * d(i, j))
                })
            }
            NablaX => {
                let (x1, x2, u1) = (e.v(Q::X, 0)?, e.v(Q::X, 1)?, e.v(Q::U, 1)?);
                let xu = dot(&x1, &u1);
                TensorValue::build(m, 2, |ix| {
                    let (i, k) = (ix[0], ix[1]);
                    x2[[i, k]] + (x1[[i]] * u1[[k]] + xu * d(i, k) - u1[[i]] * x1[[k]])
                })
            }
            SymNablaX => {
                let (x1, x2, u1) = (e.v(Q::X, 0)?, e.v(Q::X, 1)?, e.v(Q::U, 1)?);
                let xu = dot(&x1, &u1);
                TensorValue::build(m, 2, |ix| {
                    let (i, k) = (ix[0], ix[1]);
                    x2[[i, k]] + x2[[k, i]] + 2.0 * xu * d(i, k)
                })
            }
            DivX => {
                let (x1, x2, u1) = (e.v(Q::X, 0)?, e.v(Q::X, 1)?, e.v(Q::U, 1)?);
                TensorValue::from_scalar(x2.trace(0, 1).value() + mf * dot(&x1, &u1), m)
            }
            Nabla2X => {
                let (x1, x2, x3) = (e.v(Q::X, 0)?, e.v(Q::X, 1)?, e.v(Q::X, 2)?);
                let (u1, u2) = (e.v(Q::U, 1)?, e.v(Q::U, 2)?);
                let xu = dot(&x1, &u1);
                let g2 = dot(&u1, &u1);
                let xuu = vt(&x1, &u2);
                let ux = vt(&u1, &x2);
                TensorValue::build(m, 3, |ix| {
                    let (i, j, k) = (ix[0], ix[1], ix[2]);
                    x3[[i, j, k]] + (x1[[i]] * u2[[j, k]] - x1[[j]] * u2[[i, k]])
                        - (x2[[j, k]] + x2[[k, j]]) * u1[[i]]
                        - (x1[[i]] * u1[[j]] - x1[[j]] * u1[[i]]) * u1[[k]]
                        + (xuu[k] + ux[k]) * d(i, j)
                        + (u_x_it(&u1, &x2, i) * d(j, k) + ux[j] * d(i, k))
                        + xu * (u1[[j]] * d(i, k) - u1[[i]] * d(j, k))
                        + g2 * (x1[[i]] * d(j, k) - x1[[j]] * d(i, k))
                })
            }
            Nabla2XTraced => {
                let (x1, x3) = (e.v(Q::X, 0)?, e.v(Q::X, 2)?);
                let (u1, u2, x2) = (e.v(Q::U, 1)?, e.v(Q::U, 2)?, e.v(Q::X, 1)?);
                let xuu = vt(&x1, &u2);
                let ux = vt(&u1, &x2);
                let x3t = x3.trace(0, 1);
                TensorValue::build(m, 1, |ix| {
                    let k = ix[0];
                    x3t[[k]] + mf * (xuu[k] + ux[k])
                })
            }
        })
    }

    /// `Σ_t u_t X_{it}`
    fn u_x_it(u1: &TensorValue, x2: &TensorValue, i: usize) -> f64 {
        (0..u1.dim).map(|t| u1[[t]] * x2[[i, t]]).sum()
    }

    fn hess_scalar(e: &Env) -> Result<TensorValue> {
        let (m, mf) = (e.m, e.mf);
        let s = e.b.scalar()?;
        let (ds, dds) = (e.v(Q::Scalar, 1)?, e.v(Q::Scalar, 2)?);
        let (u1, u2, u3, u4) = (e.v(Q::U, 1)?, e.v(Q::U, 2)?, e.v(Q::U, 3)?, e.v(Q::U, 4)?);
        let g2 = dot(&u1, &u1);
        let lap = u2.trace(0, 1).value();
        let dlap = u3.trace(0, 1);
        let ddlap = u4.trace(0, 1);
        let uu = vt(&u1, &u2);
        let uu3: Vec<f64> = (0..m * m)
            .map(|f| (0..m).map(|s| u1[[s]] * u3[[s, f / m, f % m]]).sum())
            .collect();
        let br = s - 2.0 * (mf - 1.0) * lap - (mf - 1.0) * (mf - 2.0) * g2;
        let last = dot(&ds, &u1) - 2.0 * (mf - 1.0) * dot(&u1, &dlap) - 2.0 * (mf - 1.0) * (mf - 2.0) * vtw(&u1, &u2, &u1);
        let uuh = u2.clone();
        Ok(TensorValue::build(m, 2, |ix| {
            let (k, t) = (ix[0], ix[1]);
            let hh: f64 = (0..m).map(|s| uuh[[k, s]] * uuh[[s, t]]).sum();
            dds[[k, t]] - 2.0 * (mf - 1.0) * ddlap[[k, t]] - 2.0 * (mf - 1.0) * (mf - 2.0) * hh
                - 2.0 * (mf - 1.0) * (mf - 2.0) * uu3[k * m + t]
                + 6.0 * (mf - 1.0) * (u1[[k]] * dlap[[t]] + u1[[t]] * dlap[[k]])
                + 6.0 * (mf - 1.0) * (mf - 2.0) * (uu[k] * u1[[t]] + uu[t] * u1[[k]])
                - 3.0 * (ds[[t]] * u1[[k]] + ds[[k]] * u1[[t]])
                - 2.0 * br * (u2[[k, t]] - 4.0 * u1[[k]] * u1[[t]] + g2 * kd(k, t))
                + last * kd(k, t)
        }))
    }

    /// The second-derivative laws for Ricci and Schouten, as printed.
    fn nabla2_ricci_like(e: &Env, schouten: bool) -> Result<TensorValue> {
        let (m, mf) = (e.m, e.mf);
        let q = if schouten { Q::Schouten } else { Q::Ricci };
        let (r, dr, ddr) = (e.v(q, 0)?, e.v(q, 1)?, e.v(q, 2)?);
        let (u1, u2, u3, u4) = (e.v(Q::U, 1)?, e.v(Q::U, 2)?, e.v(Q::U, 3)?, e.v(Q::U, 4)?);
        let mm2 = mf - 2.0;
        let g2 = dot(&u1, &u1);
        let lap = u2.trace(0, 1).value();
        let dlap = u3.trace(0, 1);
        let ddlap = u4.trace(0, 1);
        let u_dlap = dot(&u1, &dlap);
        let ruu = vtw(&u1, &r, &u1);
        let huu = vtw(&u1, &u2, &u1);
        let ru = vt(&u1, &r); // Σ_l u_l R_{l a}
        let uh = vt(&u1, &u2); // Σ_l u_l u_{l a}
        let d = kd;
        // Σ_l u_l T_{l a b} over a rank-3 tensor's first slot
        let first3 = |t: &TensorValue| -> Vec<f64> {
            (0..m * m).map(|f| (0..m).map(|l| u1[[l]] * t[[l, f / m, f % m]]).sum()).collect()
        };
        let u_dr_first = first3(&dr); // u_l R_{la,b}
        let u_u3_first = first3(&u3); // u_l u_{lab}
        let u_dr_second: Vec<f64> =
            (0..m * m).map(|f| (0..m).map(|l| u1[[l]] * dr[[f / m, l, f % m]]).sum()).collect(); // u_l R_{al,b}
        let u_dr_third: Vec<f64> =
            (0..m * m).map(|f| (0..m).map(|l| u1[[l]] * dr[[f / m, f % m, l]]).sum()).collect(); // u_l R_{ab,l}
        let u_u3_third: Vec<f64> =
            (0..m * m).map(|f| (0..m).map(|l| u1[[l]] * u3[[f / m, f % m, l]]).sum()).collect(); // u_l u_{abl}
        let rh: Vec<f64> = (0..m * m).map(|f| (0..m).map(|l| r[[f / m, l]] * u2[[l, f % m]]).sum()).collect(); // R_{al}u_{lb}
        let hh: Vec<f64> = (0..m * m).map(|f| (0..m).map(|l| u2[[f / m, l]] * u2[[l, f % m]]).sum()).collect(); // u_{al}u_{lb}
        let at = |v: &Vec<f64>, a: usize, b: usize| v[a * m + b];
        let u = |a: usize| u1[[a]];
        let h = |a: usize, b: usize| u2[[a, b]];
        let rr = |a: usize, b: usize| r[[a, b]];
        Ok(TensorValue::build(m, 4, |ix| {
            let (i, j, k, t) = (ix[0], ix[1], ix[2], ix[3]);
            let mut v = ddr[[i, j, k, t]] - mm2 * u4[[i, j, k, t]];
            if !schouten {
                v += -ddlap[[k, t]] * d(i, j) + 3.0 * (u(t) * dlap[[k]] + u(k) * dlap[[t]]) * d(i, j)
                    - u_dlap * d(i, j) * d(k, t);
                v += 2.0 * lap * (h(k, t) - 4.0 * u(k) * u(t) + g2 * d(k, t)) * d(i, j);
            }
            v += at(&u_dr_first, i, t) * d(j, k)
                + at(&u_dr_first, j, t) * d(i, k)
                + at(&u_dr_second, i, k) * d(j, t)
                + at(&u_dr_first, j, k) * d(i, t)
                + at(&u_dr_third, i, j) * d(k, t)
                + at(&rh, i, t) * d(j, k)
                + at(&rh, j, t) * d(i, k);
            v -= u(i) * dr[[j, k, t]]
                + u(j) * dr[[i, k, t]]
                + u(i) * dr[[j, t, k]]
                + u(j) * dr[[i, t, k]]
                + 3.0 * u(k) * dr[[i, j, t]]
                + 3.0 * u(t) * dr[[i, j, k]];
            v -= h(i, t) * rr(j, k) + h(j, t) * rr(i, k) + 2.0 * h(k, t) * rr(i, j);
            v += mm2
                * (2.0 * u(i) * u3[[j, k, t]]
                    + u(i) * u3[[j, t, k]]
                    + 2.0 * u(j) * u3[[i, k, t]]
                    + u(j) * u3[[i, t, k]]
                    + 3.0 * u(k) * u3[[i, j, t]]
                    + 3.0 * u(t) * u3[[i, j, k]]);
            v += 2.0 * mm2 * (h(i, j) * h(k, t) + h(i, k) * h(j, t) + h(j, k) * h(i, t));
            let c2 = if schouten { 1.0 } else { 2.0 };
            v -= mm2
                * (c2 * at(&u_u3_first, k, t) * d(i, j)
                    + at(&u_u3_first, j, t) * d(i, k)
                    + at(&u_u3_first, i, t) * d(j, k));
            v -= mm2 * (c2 * at(&hh, k, t) * d(i, j) + at(&hh, j, t) * d(i, k) + at(&hh, i, t) * d(j, k));
            v -= ru[t] * u(i) * d(j, k) + ru[t] * u(j) * d(i, k) + 3.0 * ru[i] * u(t) * d(j, k) + 3.0 * ru[j] * u(t) * d(i, k);
            v += ruu * (d(j, k) * d(i, t) + d(i, k) * d(j, t));
            v += 4.0 * (u(i) * u(t) * rr(j, k) + u(j) * u(t) * rr(i, k) + 2.0 * u(k) * u(t) * rr(i, j));
            v += 2.0 * u(i) * u(j) * rr(k, t) + 3.0 * u(i) * u(k) * rr(j, t) + 3.0 * u(j) * u(k) * rr(i, t);
            v -= 8.0
                * mm2
                * (u(i) * u(j) * h(t, k)
                    + u(i) * u(k) * h(j, t)
                    + u(j) * u(k) * h(i, t)
                    + u(i) * u(t) * h(j, k)
                    + u(j) * u(t) * h(i, k)
                    + u(k) * u(t) * h(i, j));
            v -= mm2 * (at(&u_u3_first, j, k) * d(i, t) + at(&u_u3_first, i, k) * d(j, t) + at(&u_u3_third, i, j) * d(k, t));
            v -= g2 * (rr(j, k) * d(i, t) + rr(i, k) * d(j, t) + 2.0 * rr(i, j) * d(k, t));
            v -= u(j) * ru[k] * d(i, t)
                + u(i) * ru[k] * d(j, t)
                + u(i) * ru[j] * d(k, t)
                + u(j) * ru[i] * d(k, t)
                + 2.0 * u(k) * ru[j] * d(i, t)
                + 2.0 * u(k) * ru[i] * d(j, t);
            if schouten {
                v += mm2
                    * (3.0 * u(i) * uh[t] * d(j, k)
                        + 3.0 * u(j) * uh[t] * d(i, k)
                        + 3.0 * u(k) * uh[t] * d(i, j)
                        + 2.0 * u(i) * uh[k] * d(j, t)
                        + 2.0 * u(i) * uh[j] * d(k, t)
                        + 2.0 * u(j) * uh[k] * d(i, t)
                        + 2.0 * u(k) * uh[j] * d(i, t)
                        + 2.0 * u(j) * uh[i] * d(k, t)
                        + 2.0 * u(k) * uh[i] * d(j, t)
                        + 3.0 * uh[k] * u(t) * d(i, j)
                        + 3.0 * uh[j] * u(t) * d(i, k)
                        + 3.0 * uh[i] * u(t) * d(j, k));
                v += g2 * mm2 * (h(i, t) * d(j, k) + h(j, t) * d(i, k) + h(k, t) * d(i, j) + 2.0 * h(i, j) * d(k, t) + 2.0 * h(i, k) * d(j, t) + 2.0 * h(j, k) * d(i, t));
                v -= mm2 * huu * (d(j, k) * d(i, t) + d(i, k) * d(j, t) + d(i, j) * d(k, t));
                v += 24.0 * mm2 * u(i) * u(j) * u(k) * u(t);
                v -= 4.0 * mm2 * g2 * (u(j) * u(k) * d(i, t) + u(i) * u(k) * d(j, t) + u(i) * u(j) * d(k, t) + u(i) * u(t) * d(j, k) + u(j) * u(t) * d(i, k) + u(k) * u(t) * d(i, j));
                v += mm2 * g2 * g2 * (d(j, k) * d(i, t) + d(i, k) * d(j, t) + d(i, j) * d(k, t));
            } else {
                v += 3.0
                    * mm2
                    * (u(i) * uh[t] * d(j, k)
                        + u(j) * uh[t] * d(i, k)
                        + 2.0 * u(k) * uh[t] * d(i, j)
                        + u(t) * uh[i] * d(j, k)
                        + u(t) * uh[j] * d(i, k)
                        + 2.0 * u(t) * uh[k] * d(i, j));
                v += 2.0
                    * mm2
                    * (u(i) * uh[k] * d(j, t)
                        + u(j) * uh[k] * d(i, t)
                        + u(i) * uh[j] * d(k, t)
                        + u(j) * uh[i] * d(k, t)
                        + u(k) * uh[i] * d(j, t)
                        + u(k) * uh[j] * d(i, t));
                v += mm2 * g2 * (h(i, t) * d(j, k) + h(j, t) * d(i, k) + 2.0 * h(k, t) * d(i, j) + 2.0 * h(i, j) * d(k, t) + 2.0 * h(i, k) * d(j, t) + 2.0 * h(j, k) * d(i, t));
                v -= mm2 * huu * (d(j, k) * d(i, t) + d(i, k) * d(j, t) + 2.0 * d(i, j) * d(k, t));
                v += 24.0 * mm2 * u(i) * u(j) * u(k) * u(t);
                v -= 4.0 * mm2 * g2 * (u(j) * u(k) * d(i, t) + u(i) * u(k) * d(j, t) + u(i) * u(j) * d(k, t) + u(i) * u(t) * d(j, k) + u(j) * u(t) * d(i, k) + 2.0 * u(k) * u(t) * d(i, j));
                v += mm2 * g2 * g2 * (d(j, k) * d(i, t) + d(i, k) * d(j, t) + 2.0 * d(i, j) * d(k, t));
            }
            v
        }))
    }

    fn d_law(e: &Env, reverse: bool) -> Result<TensorValue> {
        let (m, mf) = (e.m, e.mf);
        let (f1, u1, u2) = (e.v(Q::F, 1)?, e.v(Q::U, 1)?, e.v(Q::U, 2)?);
        let lap = u2.trace(0, 1).value();
        let g2 = dot(&u1, &u1);
        let fu = dot(&f1, &u1);
        let fh = vt(&f1, &u2);
        let base = if reverse {
            (*e.v(Q::D(DForm::One), 0)?).clone()
        } else {
            let r = e.v(Q::Ricci, 0)?;
            let s = e.b.scalar()?;
            let fr = vt(&f1, &r);
            TensorValue::build(m, 3, |ix| {
                let (i, j, k) = (ix[0], ix[1], ix[2]);
                (f1[[k]] * r[[i, j]] - f1[[j]] * r[[i, k]]) / (mf - 2.0)
                    + (fr[k] * kd(i, j) - fr[j] * kd(i, k)) / ((mf - 1.0) * (mf - 2.0))
                    - s * (f1[[k]] * kd(i, j) - f1[[j]] * kd(i, k)) / ((mf - 1.0) * (mf - 2.0))
            })
        };
        Ok(TensorValue::build(m, 3, |ix| {
            let (i, j, k) = (ix[0], ix[1], ix[2]);
            let d = kd;
            base[[i, j, k]] + u1[[i]] * (f1[[k]] * u1[[j]] - f1[[j]] * u1[[k]]) + f1[[j]] * u2[[i, k]]
                - f1[[k]] * u2[[i, j]]
                + (lap * (f1[[k]] * d(i, j) - f1[[j]] * d(i, k)) + (fh[j] * d(i, k) - fh[k] * d(i, j))
                    + fu * (u1[[k]] * d(i, j) - u1[[j]] * d(i, k))
                    - g2 * (f1[[k]] * d(i, j) - f1[[j]] * d(i, k)))
                    / (mf - 1.0)
        }))
    }

    fn nabla_d(e: &Env) -> Result<TensorValue> {
        let (m, mf) = (e.m, e.mf);
        let (r, dr) = (e.v(Q::Ricci, 0)?, e.v(Q::Ricci, 1)?);
        let s = e.b.scalar()?;
        let ds = e.v(Q::Scalar, 1)?;
        let (f1, f2) = (e.v(Q::F, 1)?, e.v(Q::F, 2)?);
        let (u1, u2, u3) = (e.v(Q::U, 1)?, e.v(Q::U, 2)?, e.v(Q::U, 3)?);
        let lap = u2.trace(0, 1).value();
        let dlap = u3.trace(0, 1);
        let g2 = dot(&u1, &u1);
        let fu = dot(&f1, &u1);
        let ric_uf = vtw(&u1, &r, &f1);
        let hu_uf = vtw(&u1, &u2, &f1);
        let ur = vt(&u1, &r); // u_s R_{s a}
        let fr = vt(&f1, &r); // f_s R_{s a}
        let uh = vt(&u1, &u2); // u_s u_{s a}
        let fh = vt(&f1, &u2); // f_s u_{s a}
        let uf2 = vt(&u1, &f2); // u_s f_{s a}
        let fs_dr: Vec<f64> = (0..m * m).map(|x| (0..m).map(|s| f1[[s]] * dr[[s, x / m, x % m]]).sum()).collect();
        let f2r: Vec<f64> = (0..m * m).map(|x| (0..m).map(|s| f2[[s, x % m]] * r[[s, x / m]]).sum()).collect(); // f_{st}R_{sk} at [k][t]
        let fs_u3: Vec<f64> = (0..m * m).map(|x| (0..m).map(|s| f1[[s]] * u3[[s, x / m, x % m]]).sum()).collect(); // f_s u_{s a b}
        let f2u2: Vec<f64> = (0..m * m).map(|x| (0..m).map(|s| f2[[s, x % m]] * u2[[x / m, s]]).sum()).collect(); // f_{st}u_{ks} at [k][t]
        let dd = lap - g2;
        let (a1, a2) = (1.0 / (mf - 1.0), 1.0 / (mf - 2.0));
        let a12 = a1 * a2;
        Ok(TensorValue::build(m, 4, |ix| {
            let (i, j, k, t) = (ix[0], ix[1], ix[2], ix[3]);
            let d = kd;
            let f = |a: usize| f1[[a]];
            let u = |a: usize| u1[[a]];
            let fk = |a: usize, b: usize| f2[[a, b]];
            let uk = |a: usize, b: usize| u2[[a, b]];
            let rr = |a: usize, b: usize| r[[a, b]];
            let mut v = a2 * ((fk(k, t) * rr(i, j) - fk(j, t) * rr(i, k)) + (f(k) * dr[[i, j, t]] - f(j) * dr[[i, k, t]]));
            v += a12 * ((f2r[k * m + t] * d(i, j) - f2r[j * m + t] * d(i, k)) + (fs_dr[k * m + t] * d(i, j) - fs_dr[j * m + t] * d(i, k)));
            v -= a12 * (ds[[t]] * (f(k) * d(i, j) - f(j) * d(i, k)) + s * (fk(k, t) * d(i, j) - fk(j, t) * d(i, k)));
            v += (uk(i, k) * fk(j, t) - uk(i, j) * fk(k, t)) + (u3[[i, k, t]] * f(j) - u3[[i, j, t]] * f(k))
                + (u(i) * u(j) * fk(k, t) - u(i) * u(k) * fk(j, t))
                + a1 * dlap[[t]] * (f(k) * d(i, j) - f(j) * d(i, k));
            v += -3.0 * a2 * u(t) * (f(k) * rr(i, j) - f(j) * rr(i, k)) - a1 * (fs_u3[k * m + t] * d(i, j) - fs_u3[j * m + t] * d(i, k))
                - a2 * f(t) * (u(k) * rr(i, j) - u(j) * rr(i, k));
            v += a2 * fu * (rr(i, j) * d(k, t) - rr(i, k) * d(j, t)) + a2 * ur[i] * (f(k) * d(j, t) - f(j) * d(k, t))
                + a2 * u_dot_row(&u1, &r, d(i, t), f(k), j) - a2 * u_dot_row(&u1, &r, d(i, t), f(j), k);
            v += 3.0 * u(t) * (f(k) * uk(i, j) - f(j) * uk(i, k)) + f(t) * (u(k) * uk(i, j) - u(j) * uk(i, k))
                - fu * (uk(i, j) * d(k, t) - uk(i, k) * d(j, t))
                + fu * u(i) * (u(j) * d(k, t) - u(k) * d(j, t));
            v += a1 * dd * (fk(k, t) * d(i, j) - fk(j, t) * d(i, k)) - 5.0 * u(i) * u(t) * (u(j) * f(k) - u(k) * f(j));
            v += -3.0 * a1 * dd * u(t) * (f(k) * d(i, j) - f(j) * d(i, k)) - a1 * dd * f(t) * (u(k) * d(i, j) - u(j) * d(i, k));
            v += a1 * fu * lap * (d(i, j) * d(k, t) - d(i, k) * d(j, t)) + g2 * u(i) * (f(k) * d(j, t) - f(j) * d(k, t))
                + g2 * d(i, t) * (u(j) * f(k) - u(k) * f(j));
            v += -a2 * u(i) * (f(k) * rr(j, t) - f(j) * rr(k, t)) - a2 * rr(i, t) * (u(j) * f(k) - u(k) * f(j))
                + 2.0 * u(i) * (f(k) * uk(j, t) - f(j) * uk(k, t))
                + 2.0 * uk(i, t) * (u(j) * f(k) - u(k) * f(j));
            v += -uh[i] * (f(k) * d(j, t) - f(j) * d(k, t)) - d(i, t) * (f(k) * uh[j] - f(j) * uh[k])
                - 2.0 * a1 * uh[t] * (f(k) * d(i, j) - f(j) * d(i, k));
            v += -a1 * (f2u2[k * m + t] * d(i, j) - f2u2[j * m + t] * d(i, k)) + a1 * uf2[t] * (u(k) * d(i, j) - u(j) * d(i, k))
                - 3.0 * a12 * u(t) * (fr[k] * d(i, j) - fr[j] * d(i, k));
            v += -a12 * fr[t] * (u(k) * d(i, j) - u(j) * d(i, k)) + 3.0 * a1 * u(t) * (fh[k] * d(i, j) - fh[j] * d(i, k));
            v += -4.0 * a1 * fu * u(t) * (u(k) * d(i, j) - u(j) * d(i, k)) + a1 * fu * (uk(k, t) * d(i, j) - uk(j, t) * d(i, k))
                + 2.0 * a1 * fh[t] * (u(k) * d(i, j) - u(j) * d(i, k));
            v += a12 * ric_uf * (d(k, t) * d(i, j) - d(j, t) * d(i, k)) - a1 * hu_uf * (d(k, t) * d(i, j) - d(j, t) * d(i, k));
            v += 3.0 * a12 * s * u(t) * (f(k) * d(i, j) - f(j) * d(i, k)) + a12 * s * f(t) * (u(k) * d(i, j) - u(j) * d(i, k));
            v -= a12 * fu * s * (d(k, t) * d(i, j) - d(j, t) * d(i, k));
            v
        }))
    }

    /// `δ · c · Σ_s u_s R_{s j}`
    fn u_dot_row(u1: &TensorValue, r: &TensorValue, delta: f64, c: f64, j: usize) -> f64 {
        if delta == 0.0 || c == 0.0 {
            return 0.0;
        }
        delta * c * (0..u1.dim).map(|s| u1[[s]] * r[[s, j]]).sum::<f64>()
    }
}
