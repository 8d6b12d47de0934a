//! Curvature stack and the D-family tensors at a point.
//!
//! Every quantity is first assembled as a coordinate [`JetTensor`] (with `g_ij`
//! in place of `δ_ij`), so covariant derivatives of any order come from the
//! generic machinery in [`crate::geometry`]. Values handed out are orthonormal.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::expr::Expr;
use crate::geometry::{GeometryInstance, JetTensor, PointGeometry, TensorValue};
use crate::jets::Jet;
use crate::{CtlError, Result};

/// Ways of writing `D`. Form 1 is the definition; forms 2 to 4 agree with it
/// only on gradient Ricci solitons and are evaluated as written elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DForm {
    One,
    Two,
    Three,
    Four,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DufForm {
    Best,
    Alt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CottonRoute {
    Schouten,
    WeylDivergence,
}

/// Named tensors a bundle can produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Quantity {
    Metric,
    Riemann,
    Ricci,
    Scalar,
    Schouten,
    Weyl,
    /// Cotton tensor from the Schouten tensor.
    Cotton,
    /// Cotton tensor as a divergence of Weyl.
    CottonWeyl,
    /// Bach tensor from the Cotton divergence.
    Bach,
    /// Bach tensor from the double divergence of Weyl.
    BachWeyl,
    Einstein,
    F,
    U,
    /// The vector field with its index lowered.
    X,
    D(DForm),
    DX,
    Duf(DufForm),
    DuX,
}

impl Quantity {
    pub fn base_rank(self) -> usize {
        use Quantity::*;
        match self {
            Scalar | F | U => 0,
            X => 1,
            Metric | Ricci | Schouten | Bach | BachWeyl | Einstein => 2,
            Cotton | CottonWeyl | D(_) | DX | Duf(_) | DuX => 3,
            Riemann | Weyl => 4,
        }
    }

    /// Jet orders consumed before any covariant derivative is taken.
    pub fn order_loss(self) -> usize {
        use Quantity::*;
        match self {
            Metric | F | U | X => 0,
            Riemann | Ricci | Scalar | Schouten | Weyl | Einstein => 2,
            D(_) | DX | Duf(_) | DuX => 2,
            Cotton | CottonWeyl => 3,
            Bach | BachWeyl => 4,
        }
    }

    /// Highest order of metric derivative entering `∇ⁿ` of the quantity.
    pub fn metric_order(self, n: usize) -> usize {
        use Quantity::*;
        match self {
            Metric => n.saturating_sub(1),
            F | U => n.saturating_sub(1),
            X => n,
            _ => self.order_loss() + n,
        }
    }

    pub fn min_dim(self) -> usize {
        use Quantity::*;
        match self {
            Metric | Riemann | Ricci | Scalar | Einstein | F | U | X => 2,
            CottonWeyl | BachWeyl => 4,
            _ => 3,
        }
    }

    pub fn name(self) -> &'static str {
        use Quantity::*;
        match self {
            Metric => "metric",
            Riemann => "riemann",
            Ricci => "ricci",
            Scalar => "scalar",
            Schouten => "schouten",
            Weyl => "weyl",
            Cotton => "cotton",
            CottonWeyl => "cotton_weyl",
            Bach => "bach",
            BachWeyl => "bach_weyl",
            Einstein => "einstein",
            F => "f",
            U => "u",
            X => "X",
            D(DForm::One) => "d",
            D(DForm::Two) => "d2",
            D(DForm::Three) => "d3",
            D(DForm::Four) => "d4",
            DX => "dx",
            Duf(DufForm::Best) => "duf",
            Duf(DufForm::Alt) => "duf_alt",
            DuX => "dux",
        }
    }

    pub const ALL: [Quantity; 22] = [
        Quantity::Metric,
        Quantity::Riemann,
        Quantity::Ricci,
        Quantity::Scalar,
        Quantity::Schouten,
        Quantity::Weyl,
        Quantity::Cotton,
        Quantity::CottonWeyl,
        Quantity::Bach,
        Quantity::BachWeyl,
        Quantity::Einstein,
        Quantity::F,
        Quantity::U,
        Quantity::X,
        Quantity::D(DForm::One),
        Quantity::D(DForm::Two),
        Quantity::D(DForm::Three),
        Quantity::D(DForm::Four),
        Quantity::DX,
        Quantity::Duf(DufForm::Best),
        Quantity::Duf(DufForm::Alt),
        Quantity::DuX,
    ];

    pub fn parse(name: &str) -> Option<Quantity> {
        Quantity::ALL.iter().copied().find(|q| q.name() == name)
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

type JetCache = RefCell<HashMap<(Quantity, usize), Rc<JetTensor>>>;
type ValueCache = RefCell<HashMap<(Quantity, usize), Rc<TensorValue>>>;

/// Point-local curvature data with lazily filled caches.
pub struct CurvatureBundle {
    pg: PointGeometry,
    u: Option<Expr>,
    f: Option<Expr>,
    x: Option<Vec<Expr>>,
    jets: JetCache,
    values: ValueCache,
}

impl CurvatureBundle {
    pub fn new(geom: &GeometryInstance, p: &[f64], order: usize) -> Result<CurvatureBundle> {
        let pg = geom.at(p, order)?;
        Ok(CurvatureBundle {
            pg,
            u: geom.u().cloned(),
            f: geom.f().cloned(),
            x: geom.x().map(<[Expr]>::to_vec),
            jets: RefCell::new(HashMap::new()),
            values: RefCell::new(HashMap::new()),
        })
    }

    pub fn geometry(&self) -> &PointGeometry {
        &self.pg
    }

    pub fn dim(&self) -> usize {
        self.pg.dim()
    }

    pub fn order(&self) -> usize {
        self.pg.order()
    }

    pub fn point(&self) -> &[f64] {
        self.pg.point()
    }

    pub fn has_u(&self) -> bool {
        self.u.is_some()
    }

    pub fn has_f(&self) -> bool {
        self.f.is_some()
    }

    pub fn has_x(&self) -> bool {
        self.x.is_some()
    }

    pub fn x_expr(&self) -> Option<&[Expr]> {
        self.x.as_deref()
    }

    /// Checks dimension, fields and jet order for `∇ⁿ q`.
    pub fn check(&self, q: Quantity, n: usize) -> Result<()> {
        let m = self.dim();
        if m < q.min_dim() {
            return Err(CtlError::DimensionTooSmall { what: q.name().to_string(), min: q.min_dim(), dim: m });
        }
        let needs = |present: bool, name: &str| {
            if present {
                Ok(())
            } else {
                Err(CtlError::MissingField(name.to_string()))
            }
        };
        match q {
            Quantity::F | Quantity::D(_) => needs(self.has_f(), "f")?,
            Quantity::U => needs(self.has_u(), "u")?,
            Quantity::X | Quantity::DX => needs(self.has_x(), "X")?,
            Quantity::Duf(_) => {
                needs(self.has_u(), "u")?;
                needs(self.has_f(), "f")?
            }
            Quantity::DuX => {
                needs(self.has_u(), "u")?;
                needs(self.has_x(), "X")?
            }
            _ => {}
        }
        let need = q.order_loss() + n;
        if need > self.order() {
            return Err(CtlError::OrderTooLow { needed: need, have: self.order() });
        }
        Ok(())
    }

    /// Coordinate jets of `∇ⁿ q`.
    pub fn jets(&self, q: Quantity, n: usize) -> Result<Rc<JetTensor>> {
        if let Some(t) = self.jets.borrow().get(&(q, n)) {
            return Ok(t.clone());
        }
        self.check(q, n)?;
        let t = if n == 0 {
            self.base(q)?
        } else {
            let prev = self.jets(q, n - 1)?;
            self.pg.covariant_derivative(&prev)?
        };
        let t = Rc::new(t);
        self.jets.borrow_mut().insert((q, n), t.clone());
        Ok(t)
    }

    /// Orthonormal components of `∇ⁿ q` at the point.
    pub fn value(&self, q: Quantity, n: usize) -> Result<Rc<TensorValue>> {
        if let Some(t) = self.values.borrow().get(&(q, n)) {
            return Ok(t.clone());
        }
        let j = self.jets(q, n)?;
        let v = Rc::new(self.pg.orthonormal(&j, q.base_rank(), n));
        self.values.borrow_mut().insert((q, n), v.clone());
        Ok(v)
    }

    pub fn riemann(&self) -> Result<Rc<TensorValue>> {
        self.value(Quantity::Riemann, 0)
    }

    pub fn ricci(&self) -> Result<Rc<TensorValue>> {
        self.value(Quantity::Ricci, 0)
    }

    pub fn scalar(&self) -> Result<f64> {
        Ok(self.value(Quantity::Scalar, 0)?.value())
    }

    pub fn schouten(&self) -> Result<Rc<TensorValue>> {
        self.value(Quantity::Schouten, 0)
    }

    pub fn weyl(&self) -> Result<Rc<TensorValue>> {
        self.value(Quantity::Weyl, 0)
    }

    pub fn cotton(&self, route: CottonRoute) -> Result<Rc<TensorValue>> {
        match route {
            CottonRoute::Schouten => self.value(Quantity::Cotton, 0),
            CottonRoute::WeylDivergence => self.value(Quantity::CottonWeyl, 0),
        }
    }

    pub fn bach(&self) -> Result<Rc<TensorValue>> {
        self.value(Quantity::Bach, 0)
    }

    pub fn einstein(&self) -> Result<Rc<TensorValue>> {
        self.value(Quantity::Einstein, 0)
    }

    pub fn d_tensor(&self, form: DForm) -> Result<Rc<TensorValue>> {
        self.value(Quantity::D(form), 0)
    }

    pub fn dx_tensor(&self) -> Result<Rc<TensorValue>> {
        self.value(Quantity::DX, 0)
    }

    pub fn duf_tensor(&self, form: DufForm) -> Result<Rc<TensorValue>> {
        self.value(Quantity::Duf(form), 0)
    }

    pub fn dux_tensor(&self) -> Result<Rc<TensorValue>> {
        self.value(Quantity::DuX, 0)
    }

    /// Orthonormal `(L_X g)_{ij}` from the coordinate Lie-derivative formula.
    pub fn lie_derivative_metric(&self) -> Result<TensorValue> {
        let xs = self.x.as_deref().ok_or_else(|| CtlError::MissingField("X".into()))?;
        let l = self.pg.lie_derivative_metric_jets(xs)?;
        Ok(self.pg.orthonormal(&l, 2, 0))
    }

    fn field(&self, e: &Option<Expr>, name: &str) -> Result<Jet> {
        let e = e.as_ref().ok_or_else(|| CtlError::MissingField(name.to_string()))?;
        self.pg.scalar_jet(e)
    }

    fn base(&self, q: Quantity) -> Result<JetTensor> {
        let pg = &self.pg;
        let m = self.dim();
        let mm = m as f64;
        Ok(match q {
            Quantity::Metric => pg.metric().clone(),
            Quantity::Riemann => riemann_jets(pg)?,
            Quantity::Ricci => pg.trace_jets(&*self.jets(Quantity::Riemann, 0)?, 1, 3),
            Quantity::Scalar => pg.trace_jets(&*self.jets(Quantity::Ricci, 0)?, 0, 1),
            Quantity::Schouten => {
                let ric = self.jets(Quantity::Ricci, 0)?;
                let s = self.scalar_jet()?;
                let c = -1.0 / (2.0 * (mm - 1.0));
                JetTensor::build(m, 2, |ix| {
                    let mut a = ric.get(ix).clone();
                    a.add_product(&s, &pg.metric()[[ix[0], ix[1]]], c);
                    a
                })
            }
            Quantity::Einstein => {
                let ric = self.jets(Quantity::Ricci, 0)?;
                let s = self.scalar_jet()?;
                JetTensor::build(m, 2, |ix| {
                    let mut a = ric.get(ix).clone();
                    a.add_product(&s, &pg.metric()[[ix[0], ix[1]]], -0.5);
                    a
                })
            }
            Quantity::Weyl => {
                let r = self.jets(Quantity::Riemann, 0)?;
                let a = self.jets(Quantity::Schouten, 0)?;
                let kn = kulkarni_nomizu_jets(&a, pg.metric());
                JetTensor::build(m, 4, |ix| {
                    let mut w = r.get(ix).clone();
                    w.add_scaled(kn.get(ix), -1.0 / (mm - 2.0));
                    w
                })
            }
            Quantity::Cotton => {
                let da = self.jets(Quantity::Schouten, 1)?;
                JetTensor::build(m, 3, |ix| {
                    let (i, j, k) = (ix[0], ix[1], ix[2]);
                    &da[[i, j, k]] - &da[[i, k, j]]
                })
            }
            Quantity::CottonWeyl => {
                let dw = self.jets(Quantity::Weyl, 1)?;
                let t = pg.trace_jets(&dw, 0, 4);
                let c = -(mm - 2.0) / (mm - 3.0);
                JetTensor::build(m, 3, |ix| t.get(ix).scale(c))
            }
            Quantity::Bach => {
                let dc = self.jets(Quantity::Cotton, 1)?;
                let div = pg.trace_jets(&dc, 2, 3);
                let rw = self.ricci_weyl()?;
                JetTensor::build(m, 2, |ix| {
                    let mut b = div[[ix[1], ix[0]]].clone();
                    b.add_scaled(&rw[[ix[0], ix[1]]], 1.0);
                    b.scale(1.0 / (mm - 2.0))
                })
            }
            Quantity::BachWeyl => {
                let ddw = self.jets(Quantity::Weyl, 2)?;
                let t = pg.trace_jets(&pg.trace_jets(&ddw, 3, 4), 1, 3);
                let rw = self.ricci_weyl()?;
                JetTensor::build(m, 2, |ix| {
                    let mut b = t.get(ix).scale(1.0 / (mm - 3.0));
                    b.add_scaled(rw.get(ix), 1.0 / (mm - 2.0));
                    b
                })
            }
            Quantity::F => JetTensor::scalar(self.field(&self.f, "f")?),
            Quantity::U => JetTensor::scalar(self.field(&self.u, "u")?),
            Quantity::X => {
                let xs = self.x.as_deref().ok_or_else(|| CtlError::MissingField("X".into()))?;
                pg.lower(xs)?
            }
            Quantity::D(form) => self.d_jets(form)?,
            Quantity::DX => self.dx_jets(false)?,
            Quantity::DuX => self.dx_jets(true)?,
            Quantity::Duf(DufForm::Best) => self.duf_best_jets()?,
            Quantity::Duf(DufForm::Alt) => self.duf_alt_jets()?,
        })
    }

    fn scalar_jet(&self) -> Result<Jet> {
        Ok(self.jets(Quantity::Scalar, 0)?.data()[0].clone())
    }

    /// `R_{kl} W_{ikjl}` with indices raised on Ricci.
    fn ricci_weyl(&self) -> Result<JetTensor> {
        let m = self.dim();
        let ric = self.jets(Quantity::Ricci, 0)?;
        let w = self.jets(Quantity::Weyl, 0)?;
        let up = self.raise2(&ric);
        Ok(JetTensor::build(m, 2, |ix| {
            let mut acc = Jet::zeros(m, w.order());
            for k in 0..m {
                for l in 0..m {
                    acc.add_product(&up[[k, l]], &w[[ix[0], k, ix[1], l]], 1.0);
                }
            }
            acc
        }))
    }

    fn raise2(&self, t: &JetTensor) -> JetTensor {
        let m = self.dim();
        let gi = self.pg.inverse_metric();
        let half = JetTensor::build(m, 2, |ix| {
            let mut acc = Jet::zeros(m, t.order());
            for a in 0..m {
                acc.add_product(&gi[[ix[0], a]], &t[[a, ix[1]]], 1.0);
            }
            acc
        });
        JetTensor::build(m, 2, |ix| {
            let mut acc = Jet::zeros(m, t.order());
            for b in 0..m {
                acc.add_product(&half[[ix[0], b]], &gi[[b, ix[1]]], 1.0);
            }
            acc
        })
    }

    fn vec_of(&self, q: Quantity, n: usize) -> Result<Rc<JetTensor>> {
        self.jets(q, n)
    }

    fn d_jets(&self, form: DForm) -> Result<JetTensor> {
        let c = Contractor::new(&self.pg);
        let m = self.dim();
        let mm = m as f64;
        let (a, b) = (1.0 / (mm - 2.0), 1.0 / ((mm - 1.0) * (mm - 2.0)));
        let f1 = self.vec_of(Quantity::F, 1)?;
        Ok(match form {
            DForm::One | DForm::Two => {
                let ric = self.jets(Quantity::Ricci, 0)?;
                let s = self.scalar_jet()?;
                let fr = if form == DForm::One {
                    c.vec_dot_tensor(&f1, &ric)
                } else {
                    let ds = self.jets(Quantity::Scalar, 1)?;
                    JetTensor::build(m, 1, |ix| ds.get(ix).scale(0.5))
                };
                let mut out = c.skew_tensor(&f1, &ric, a);
                c.add_skew_metric(&mut out, &fr, b, None);
                c.add_skew_metric(&mut out, &f1, -b, Some(&s));
                out
            }
            DForm::Three => {
                let sch = self.jets(Quantity::Schouten, 0)?;
                let ein = self.jets(Quantity::Einstein, 0)?;
                let fe = c.vec_dot_tensor(&f1, &ein);
                let mut out = c.skew_tensor(&f1, &sch, a);
                c.add_skew_metric(&mut out, &fe, b, None);
                out
            }
            DForm::Four => {
                let f2 = self.jets(Quantity::F, 2)?;
                let lap = c.trace2(&f2);
                let fh = c.vec_dot_tensor(&f1, &f2);
                // (1/(m-2))(f_j f_ik - f_k f_ij) = -(1/(m-2))(f_k f_ij - f_j f_ik)
                let mut out = c.skew_tensor(&f1, &f2, -a);
                c.add_skew_metric(&mut out, &fh, -b, None);
                c.add_skew_metric(&mut out, &f1, b, Some(&lap));
                out
            }
        })
    }

    fn dx_jets(&self, conformal: bool) -> Result<JetTensor> {
        let c = Contractor::new(&self.pg);
        let m = self.dim();
        let mm = m as f64;
        let (a, b) = (1.0 / (mm - 2.0), 1.0 / ((mm - 1.0) * (mm - 2.0)));
        let x1 = self.jets(Quantity::X, 0)?;
        let x2 = self.jets(Quantity::X, 1)?;
        let x3 = self.jets(Quantity::X, 2)?;
        let ric = self.jets(Quantity::Ricci, 0)?;
        let s = self.scalar_jet()?;
        let xr = c.vec_dot_tensor(&x1, &ric);
        let mut out = c.skew_tensor(&x1, &ric, a);
        c.add_skew_metric(&mut out, &xr, b, None);
        c.add_skew_metric(&mut out, &x1, -b, Some(&s));
        // ½(X_kji − X_jki), X_kji = x3[k, j, i]
        let q = out.order();
        let second = JetTensor::build(m, 3, |ix| {
            let (i, j, k) = (ix[0], ix[1], ix[2]);
            let mut acc = x3[[k, j, i]].truncate(q);
            acc.add_scaled(&x3[[j, k, i]], -1.0);
            acc.scale(0.5)
        });
        let xtkt = self.pg.trace_jets(&x3, 0, 2);
        let xktt = self.pg.trace_jets(&x3, 1, 2);
        let diff = JetTensor::build(m, 1, |ix| xtkt.get(ix) - xktt.get(ix));
        c.add_skew_metric(&mut out, &diff, 1.0 / (2.0 * (mm - 1.0)), None);
        let mut out = add_tensors(&out, &second, 1.0);
        if conformal {
            let u1 = self.jets(Quantity::U, 1)?;
            let sym = JetTensor::build(m, 2, |ix| &x2[[ix[0], ix[1]]] + &x2[[ix[1], ix[0]]]);
            // −½[(X_ij + X_ji)u_k − (X_ik + X_ki)u_j]
            let t = c.skew_tensor(&u1, &sym, -0.5);
            out = add_tensors(&out, &t, 1.0);
            let us = c.vec_dot_tensor(&u1, &sym);
            c.add_skew_metric(&mut out, &us, -1.0 / (2.0 * (mm - 1.0)), None);
            let div = c.trace2(&x2);
            c.add_skew_metric(&mut out, &u1, 1.0 / (mm - 1.0), Some(&div));
            let e2u = self.jets(Quantity::U, 0)?.data()[0].scale(2.0).exp();
            let o = out.order();
            out = JetTensor::from_vec(m, 3, out.data().iter().map(|d| {
                let mut z = Jet::zeros(m, o);
                z.add_product(d, &e2u, 1.0);
                z
            }).collect());
        }
        Ok(out)
    }

    fn duf_best_jets(&self) -> Result<JetTensor> {
        let c = Contractor::new(&self.pg);
        let m = self.dim();
        let mm = m as f64;
        let mut out = self.d_jets(DForm::One)?;
        let f1 = self.jets(Quantity::F, 1)?;
        let u1 = self.jets(Quantity::U, 1)?;
        let u2 = self.jets(Quantity::U, 2)?;
        let lap_u = c.trace2(&u2);
        let grad_u2 = c.dot(&u1, &u1);
        let fu = c.dot(&f1, &u1);
        let fhu = c.vec_dot_tensor(&f1, &u2);
        let k = 1.0 / (mm - 1.0);
        c.add_skew_metric(&mut out, &f1, k, Some(&lap_u));
        out = add_tensors(&out, &c.skew_tensor(&f1, &u2, -1.0), 1.0);
        // u_i (f_k u_j − f_j u_k)
        let q = out.order();
        let t = JetTensor::build(m, 3, |ix| {
            let (i, j, kk) = (ix[0], ix[1], ix[2]);
            let mut inner = Jet::zeros(m, q);
            inner.add_product(&f1[[kk]], &u1[[j]], 1.0);
            inner.add_product(&f1[[j]], &u1[[kk]], -1.0);
            let mut acc = Jet::zeros(m, q);
            acc.add_product(&u1[[i]], &inner, 1.0);
            acc
        });
        out = add_tensors(&out, &t, 1.0);
        c.add_skew_metric(&mut out, &fhu, -k, None);
        c.add_skew_metric(&mut out, &u1, k, Some(&fu));
        c.add_skew_metric(&mut out, &f1, -k, Some(&grad_u2));
        Ok(out)
    }

    fn duf_alt_jets(&self) -> Result<JetTensor> {
        let c = Contractor::new(&self.pg);
        let m = self.dim();
        let mm = m as f64;
        let b = 1.0 / ((mm - 1.0) * (mm - 2.0));
        let a = 1.0 / (mm - 2.0);
        let f1 = self.jets(Quantity::F, 1)?;
        let f2 = self.jets(Quantity::F, 2)?;
        let u1 = self.jets(Quantity::U, 1)?;
        let fh = c.vec_dot_tensor(&f1, &f2);
        let ff = c.dot(&f1, &f1);
        let fu = c.dot(&f1, &u1);
        let lap_f = c.trace2(&f2);
        // skew_metric(v)_{ijk} = v_k g_ij − v_j g_ik, so (v_j g_ik − v_k g_ij) carries a minus sign
        let mut out = JetTensor::build(self.dim(), 3, |_| Jet::zeros(m, f2.order()));
        c.add_skew_metric(&mut out, &fh, -b, None);
        c.add_skew_metric(&mut out, &u1, b, Some(&ff));
        c.add_skew_metric(&mut out, &f1, -b, Some(&fu));
        // −(1/(m−2))[f_ij f_k − f_ik f_j]
        out = add_tensors(&out, &c.skew_tensor(&f1, &f2, -a), 1.0);
        // −(1/(m−2)) f_i (u_k f_j − u_j f_k)
        let q = out.order();
        let t = JetTensor::build(m, 3, |ix| {
            let (i, j, k) = (ix[0], ix[1], ix[2]);
            let mut inner = Jet::zeros(m, q);
            inner.add_product(&u1[[k]], &f1[[j]], 1.0);
            inner.add_product(&u1[[j]], &f1[[k]], -1.0);
            let mut acc = Jet::zeros(m, q);
            acc.add_product(&f1[[i]], &inner, -a);
            acc
        });
        out = add_tensors(&out, &t, 1.0);
        c.add_skew_metric(&mut out, &f1, b, Some(&lap_f));
        Ok(out)
    }
}

fn add_tensors(a: &JetTensor, b: &JetTensor, s: f64) -> JetTensor {
    let data = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| {
            let mut z = x.clone();
            z.add_scaled(y, s);
            z
        })
        .collect();
    JetTensor::from_vec(a.dim(), a.rank(), data)
}

/// Small contraction kernels against the inverse metric.
struct Contractor<'a> {
    pg: &'a PointGeometry,
    m: usize,
}

impl<'a> Contractor<'a> {
    fn new(pg: &'a PointGeometry) -> Self {
        Contractor { pg, m: pg.dim() }
    }

    /// `g^{ab} v_a w_b`
    fn dot(&self, v: &JetTensor, w: &JetTensor) -> Jet {
        let gi = self.pg.inverse_metric();
        let mut acc = Jet::zeros(self.m, v.order().min(w.order()));
        for a in 0..self.m {
            let mut va = Jet::zeros(self.m, v.order());
            for b in 0..self.m {
                va.add_product(&gi[[a, b]], &w[[b]], 1.0);
            }
            acc.add_product(&v[[a]], &va, 1.0);
        }
        acc
    }

    /// `(v·T)_k = g^{ab} v_a T_{bk}`
    fn vec_dot_tensor(&self, v: &JetTensor, t: &JetTensor) -> JetTensor {
        let gi = self.pg.inverse_metric();
        let m = self.m;
        let up: Vec<Jet> = (0..m)
            .map(|b| {
                let mut acc = Jet::zeros(m, v.order());
                for a in 0..m {
                    acc.add_product(&gi[[a, b]], &v[[a]], 1.0);
                }
                acc
            })
            .collect();
        JetTensor::build(m, 1, |ix| {
            let mut acc = Jet::zeros(m, t.order());
            for (b, ub) in up.iter().enumerate() {
                acc.add_product(ub, &t[[b, ix[0]]], 1.0);
            }
            acc
        })
    }

    fn trace2(&self, t: &JetTensor) -> Jet {
        self.pg.trace_jets(t, 0, 1).data()[0].clone()
    }

    /// `s (v_k T_ij − v_j T_ik)`
    fn skew_tensor(&self, v: &JetTensor, t: &JetTensor, s: f64) -> JetTensor {
        let m = self.m;
        let q = v.order().min(t.order());
        JetTensor::build(m, 3, |ix| {
            let (i, j, k) = (ix[0], ix[1], ix[2]);
            let mut acc = Jet::zeros(m, q);
            acc.add_product(&v[[k]], &t[[i, j]], s);
            acc.add_product(&v[[j]], &t[[i, k]], -s);
            acc
        })
    }

    /// `out += s · h (v_k g_ij − v_j g_ik)`, with `h = 1` when absent.
    fn add_skew_metric(&self, out: &mut JetTensor, v: &JetTensor, s: f64, h: Option<&Jet>) {
        let m = self.m;
        let g = self.pg.metric();
        let hv: Vec<Jet> = match h {
            None => v.data().to_vec(),
            Some(h) => v.data().iter().map(|x| x * h).collect(),
        };
        let data: Vec<Jet> = out
            .data()
            .iter()
            .enumerate()
            .map(|(flat, d)| {
                let (i, j, k) = (flat / (m * m), (flat / m) % m, flat % m);
                let mut z = d.clone();
                z.add_product(&hv[k], &g[[i, j]], s);
                z.add_product(&hv[j], &g[[i, k]], -s);
                z
            })
            .collect();
        *out = JetTensor::from_vec(m, 3, data);
    }
}

/// `R_{abcd}` with `R^a_{bcd} = ∂_cΓ^a_{db} − ∂_dΓ^a_{cb} + Γ^a_{ce}Γ^e_{db} − Γ^a_{de}Γ^e_{cb}`.
fn riemann_jets(pg: &PointGeometry) -> Result<JetTensor> {
    let m = pg.dim();
    if pg.order() < 2 {
        return Err(CtlError::OrderTooLow { needed: 2, have: pg.order() });
    }
    let q = pg.order() - 2;
    let mut dgam = Vec::with_capacity(m * m * m * m);
    for l in 0..m {
        for j in 0..m {
            for k in 0..m {
                for c in 0..m {
                    dgam.push(pg.gamma(l, j, k).partial(c)?);
                }
            }
        }
    }
    let dg = |l: usize, j: usize, k: usize, c: usize| &dgam[((l * m + j) * m + k) * m + c];
    let gam: Vec<Jet> = (0..m * m * m).map(|f| pg.gamma(f / (m * m), (f / m) % m, f % m).truncate(q)).collect();
    let gm = |l: usize, j: usize, k: usize| &gam[(l * m + j) * m + k];
    let mut up = vec![Jet::zeros(m, q); m * m * m * m];
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                for d in (c + 1)..m {
                    let mut acc = dg(a, d, b, c).clone();
                    acc.add_scaled(dg(a, c, b, d), -1.0);
                    for e in 0..m {
                        acc.add_product(gm(a, c, e), gm(e, d, b), 1.0);
                        acc.add_product(gm(a, d, e), gm(e, c, b), -1.0);
                    }
                    up[((a * m + b) * m + d) * m + c] = acc.scale(-1.0);
                    up[((a * m + b) * m + c) * m + d] = acc;
                }
            }
        }
    }
    let g = pg.metric();
    Ok(JetTensor::build(m, 4, |ix| {
        let (a, b, c, d) = (ix[0], ix[1], ix[2], ix[3]);
        let mut acc = Jet::zeros(m, q);
        if c != d {
            for e in 0..m {
                acc.add_product(&g[[a, e]], &up[((e * m + b) * m + c) * m + d], 1.0);
            }
        }
        acc
    }))
}

/// `(h ⊙ k)_{ijkt} = h_ik k_jt + h_jt k_ik − h_it k_jk − h_jk k_it` on jets.
pub fn kulkarni_nomizu_jets(h: &JetTensor, k: &JetTensor) -> JetTensor {
    let m = h.dim();
    let q = h.order().min(k.order());
    JetTensor::build(m, 4, |ix| {
        let (i, j, a, t) = (ix[0], ix[1], ix[2], ix[3]);
        let mut acc = Jet::zeros(m, q);
        acc.add_product(&h[[i, a]], &k[[j, t]], 1.0);
        acc.add_product(&h[[j, t]], &k[[i, a]], 1.0);
        acc.add_product(&h[[i, t]], &k[[j, a]], -1.0);
        acc.add_product(&h[[j, a]], &k[[i, t]], -1.0);
        acc
    })
}

/// Kulkarni–Nomizu product of two symmetric 2-tensors.
pub fn kulkarni_nomizu(h: &TensorValue, k: &TensorValue) -> Result<TensorValue> {
    if h.rank() != 2 || k.rank() != 2 || h.dim != k.dim {
        return Err(CtlError::Config("kulkarni_nomizu needs two 2-tensors of equal dimension".into()));
    }
    let mut out = TensorValue::build(h.dim, 4, |ix| {
        let (i, j, a, t) = (ix[0], ix[1], ix[2], ix[3]);
        h[[i, a]] * k[[j, t]] + h[[j, t]] * k[[i, a]] - h[[i, t]] * k[[j, a]] - h[[j, a]] * k[[i, t]]
    });
    out.frame = h.frame;
    out.point = h.point.clone();
    Ok(out)
}

/// Orthonormal `δ_ij`.
pub fn delta(m: usize) -> TensorValue {
    TensorValue::build(m, 2, |ix| if ix[0] == ix[1] { 1.0 } else { 0.0 })
}

/// Weyl tensor from the Ricci/scalar decomposition, for cross-checking.
pub fn weyl_from_ricci(r: &TensorValue, ric: &TensorValue, s: f64) -> Result<TensorValue> {
    let m = r.dim;
    let mm = m as f64;
    let d = delta(m);
    let rg = kulkarni_nomizu(ric, &d)?;
    let gg = kulkarni_nomizu(&d, &d)?;
    Ok(TensorValue::build(m, 4, |ix| {
        r.get(ix) - rg.get(ix) / (mm - 2.0) + s / ((mm - 1.0) * (mm - 2.0)) * 0.5 * gg.get(ix)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GeometrySpec;

    fn geom(metric: Vec<Vec<&str>>, dim: usize, f: Option<&str>) -> GeometryInstance {
        GeometryInstance::new(GeometrySpec {
            name: "t".into(),
            dim,
            coords: (1..=dim).map(|i| format!("x{i}")).collect(),
            domain: vec![[-1.0, 1.0]; dim],
            metric: metric.into_iter().map(|r| r.into_iter().map(String::from).collect()).collect(),
            u: None,
            f: f.map(String::from),
            x: None,
            lambda: None,
        })
        .unwrap()
    }

    fn sphere3() -> GeometryInstance {
        let c = "4/(1+x1^2+x2^2+x3^2)^2";
        geom(vec![vec![c], vec!["0", c], vec!["0", "0", c]], 3, Some("x1*x2 + x3"))
    }

    #[test]
    fn sphere_scalar_curvature() {
        let b = CurvatureBundle::new(&sphere3(), &[0.2, -0.1, 0.3], 4).unwrap();
        assert!((b.scalar().unwrap() - 6.0).abs() < 1e-11);
        let ric = b.ricci().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 2.0 } else { 0.0 };
                assert!((ric[[i, j]] - want).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn commutation_sign_convention() {
        let b = CurvatureBundle::new(&sphere3(), &[0.2, -0.1, 0.3], 5).unwrap();
        let f3 = b.value(Quantity::F, 3).unwrap();
        let f1 = b.value(Quantity::F, 1).unwrap();
        let r = b.riemann().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let lhs = f3[[i, j, k]] - f3[[i, k, j]];
                    let rhs: f64 = (0..3).map(|t| f1[[t]] * r[[t, i, j, k]]).sum();
                    assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
                }
            }
        }
    }

    #[test]
    fn weyl_vanishes_in_dimension_three() {
        let g = geom(vec![vec!["1 + x2^2"], vec!["0.1*x1", "2 + x3"], vec!["0", "x1*x2", "1.5"]], 3, None);
        let b = CurvatureBundle::new(&g, &[0.1, 0.2, 0.3], 4).unwrap();
        assert!(b.weyl().unwrap().max_abs() < 1e-10);
        assert!(b.riemann().unwrap().max_abs() > 1e-3);
    }

    #[test]
    fn missing_field_and_order_errors() {
        let g = geom(vec![vec!["1"], vec!["0", "1"], vec!["0", "0", "1"]], 3, None);
        let b = CurvatureBundle::new(&g, &[0.0; 3], 3).unwrap();
        assert!(matches!(b.d_tensor(DForm::One), Err(CtlError::MissingField(_))));
        assert!(matches!(b.bach(), Err(CtlError::OrderTooLow { needed: 4, have: 3 })));
        assert!(matches!(b.value(Quantity::CottonWeyl, 0), Err(CtlError::DimensionTooSmall { .. })));
    }

    #[test]
    fn kulkarni_nomizu_of_deltas() {
        let d = delta(3);
        let kn = kulkarni_nomizu(&d, &d).unwrap();
        for ix in [[0, 1, 0, 1], [0, 1, 1, 0], [0, 0, 1, 1], [1, 2, 1, 2]] {
            let want = 2.0
                * ((ix[0] == ix[2]) as i32 as f64 * (ix[1] == ix[3]) as i32 as f64
                    - (ix[0] == ix[3]) as i32 as f64 * (ix[1] == ix[2]) as i32 as f64);
            assert_eq!(kn[ix], want);
        }
    }
}
