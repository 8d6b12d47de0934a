//! Coordinate-chart geometry: metric jets, Christoffel symbols, covariant
//! derivatives and orthonormal-frame conversion.
//!
//! All tensors handled here are covariant. Derivative slots are appended at the
//! end, so `(∇T)_{i..j k} = ∇_k T_{i..j}`.

use std::ops::Index;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::expr::{parse_expr, Expr, ExprError, Func};
use crate::jets::{Jet, JetError, MAX_DIM, MAX_ORDER};
use crate::{CtlError, Result};

/// Serialized description of a chart and the fields living on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub name: String,
    pub dim: usize,
    pub coords: Vec<String>,
    pub domain: Vec<[f64; 2]>,
    /// Lower triangle (row `i` has at least `i + 1` entries); mirrored on load.
    pub metric: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    /// Contravariant components.
    #[serde(rename = "X", default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

impl GeometrySpec {
    pub fn from_json(text: &str) -> Result<GeometrySpec> {
        serde_json::from_str(text).map_err(|e| CtlError::Spec(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serialization cannot fail")
    }

    /// Short content hash of the canonical JSON form.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("spec serialization cannot fail");
        let digest = Sha256::digest(text.as_bytes());
        hex::encode(&digest[..8])
    }
}

/// A validated geometry with parsed expressions.
#[derive(Debug, Clone)]
pub struct GeometryInstance {
    pub spec: GeometrySpec,
    dim: usize,
    metric: Vec<Expr>,
    u: Option<Expr>,
    f: Option<Expr>,
    x: Option<Vec<Expr>>,
    hash: String,
}

fn parse_field(text: &str, coords: &[String], what: &str) -> Result<Expr> {
    parse_expr(text, coords).map_err(|e| CtlError::Expr { field: what.to_string(), source: e })
}

impl GeometryInstance {
    pub fn new(spec: GeometrySpec) -> Result<GeometryInstance> {
        let m = spec.dim;
        if !(2..=MAX_DIM).contains(&m) {
            return Err(CtlError::Spec(format!("dim must be in 2..={MAX_DIM}, got {m}")));
        }
        if spec.coords.len() != m {
            return Err(CtlError::Spec(format!("expected {m} coordinate names, got {}", spec.coords.len())));
        }
        for (i, c) in spec.coords.iter().enumerate() {
            let valid = c.chars().next().is_some_and(|ch| ch.is_ascii_alphabetic() || ch == '_')
                && c.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '_');
            if !valid || Func::is_reserved(c) {
                return Err(CtlError::Spec(format!("invalid coordinate name `{c}`")));
            }
            if spec.coords[..i].contains(c) {
                return Err(CtlError::Spec(format!("duplicate coordinate name `{c}`")));
            }
        }
        if spec.domain.len() != m {
            return Err(CtlError::Spec(format!("expected {m} domain intervals, got {}", spec.domain.len())));
        }
        for [lo, hi] in &spec.domain {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(CtlError::Spec(format!("bad domain interval [{lo}, {hi}]")));
            }
        }
        if spec.metric.len() != m {
            return Err(CtlError::Spec(format!("expected {m} metric rows, got {}", spec.metric.len())));
        }
        let mut metric = vec![Expr::Num(0.0); m * m];
        for i in 0..m {
            if spec.metric[i].len() < i + 1 {
                return Err(CtlError::Spec(format!("metric row {i} needs at least {} entries", i + 1)));
            }
            for j in 0..=i {
                let e = parse_field(&spec.metric[i][j], &spec.coords, &format!("metric[{i}][{j}]"))?;
                metric[i * m + j] = e.clone();
                metric[j * m + i] = e;
            }
        }
        let u = spec.u.as_deref().map(|t| parse_field(t, &spec.coords, "u")).transpose()?;
        let f = spec.f.as_deref().map(|t| parse_field(t, &spec.coords, "f")).transpose()?;
        let x = match &spec.x {
            None => None,
            Some(v) if v.len() != m => {
                return Err(CtlError::Spec(format!("X needs {m} components, got {}", v.len())));
            }
            Some(v) => Some(
                v.iter()
                    .enumerate()
                    .map(|(i, t)| parse_field(t, &spec.coords, &format!("X[{i}]")))
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        if let Some(l) = spec.lambda {
            if !l.is_finite() {
                return Err(CtlError::Spec("lambda must be finite".into()));
            }
        }
        let hash = spec.hash();
        Ok(GeometryInstance { spec, dim: m, metric, u, f, x, hash })
    }

    pub fn from_json(text: &str) -> Result<GeometryInstance> {
        GeometryInstance::new(GeometrySpec::from_json(text)?)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn lambda(&self) -> Option<f64> {
        self.spec.lambda
    }

    pub fn u(&self) -> Option<&Expr> {
        self.u.as_ref()
    }

    pub fn f(&self) -> Option<&Expr> {
        self.f.as_ref()
    }

    pub fn x(&self) -> Option<&[Expr]> {
        self.x.as_deref()
    }

    pub fn metric_expr(&self, i: usize, j: usize) -> &Expr {
        &self.metric[i * self.dim + j]
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim && self.spec.domain.iter().zip(p).all(|([lo, hi], x)| lo <= x && x <= hi)
    }

    /// Metric `e^{2u} g` with the same coordinates, domain and fields.
    pub fn conformal_rescale(&self, u: &Expr, name: &str) -> GeometryInstance {
        let m = self.dim;
        let factor = Expr::call(Func::Exp, Expr::num(2.0).mul(u.clone()));
        let metric: Vec<Expr> = self.metric.iter().map(|e| factor.clone().mul(e.clone())).collect();
        let mut spec = self.spec.clone();
        spec.name = name.to_string();
        spec.metric = (0..m).map(|i| (0..=i).map(|j| metric[i * m + j].render(&spec.coords)).collect()).collect();
        let hash = spec.hash();
        GeometryInstance { spec, dim: m, metric, u: self.u.clone(), f: self.f.clone(), x: self.x.clone(), hash }
    }

    /// Copy carrying a replacement conformal factor.
    pub fn with_conformal_factor(&self, u: Option<Expr>) -> GeometryInstance {
        let mut g = self.clone();
        g.spec.u = u.as_ref().map(|e| e.render(&g.spec.coords));
        g.u = u;
        g.hash = g.spec.hash();
        g
    }

    /// Copy carrying a replacement contravariant vector field.
    pub fn with_vector_field(&self, x: Option<Vec<Expr>>) -> GeometryInstance {
        let mut g = self.clone();
        g.spec.x = x.as_ref().map(|v| v.iter().map(|e| e.render(&g.spec.coords)).collect());
        g.x = x;
        g.hash = g.spec.hash();
        g
    }

    /// Coordinate metric components at `p`, row-major, without any
    /// definiteness check.
    pub fn metric_values(&self, p: &[f64]) -> Result<Vec<f64>> {
        let m = self.dim;
        let mut out = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                out[i * m + j] = self.metric_expr(i, j).eval_f64(p)?;
            }
        }
        Ok(out)
    }

    /// Evaluate the metric and connection at `p`, keeping jets to `order`.
    pub fn at(&self, p: &[f64], order: usize) -> Result<PointGeometry> {
        if !self.contains(p) {
            return Err(CtlError::OutsideDomain(p.to_vec()));
        }
        let g: Vec<Jet> =
            self.metric.iter().map(|e| e.eval_jet(p, order)).collect::<std::result::Result<_, ExprError>>()?;
        PointGeometry::new(g, p.to_vec(), order)
    }
}

impl Func {
    fn is_reserved(name: &str) -> bool {
        matches!(name, "exp" | "log" | "sin" | "cos" | "sinh" | "cosh" | "sqrt" | "pi")
    }
}

/// Dense covariant tensor whose components are jets, stored row-major with
/// the first slot most significant.
#[derive(Debug, Clone)]
pub struct JetTensor {
    dim: usize,
    rank: usize,
    order: usize,
    data: Vec<Jet>,
}

impl JetTensor {
    pub fn from_vec(dim: usize, rank: usize, data: Vec<Jet>) -> JetTensor {
        assert_eq!(data.len(), dim.pow(rank as u32), "component count does not match shape");
        let order = data.iter().map(Jet::order).min().unwrap_or(0);
        let data = data.into_iter().map(|j| if j.order() > order { j.truncate(order) } else { j }).collect();
        JetTensor { dim, rank, order, data }
    }

    /// Build from a component function of the multi-index.
    pub fn build(dim: usize, rank: usize, mut f: impl FnMut(&[usize]) -> Jet) -> JetTensor {
        let n = dim.pow(rank as u32);
        let mut idx = vec![0usize; rank];
        let mut data = Vec::with_capacity(n);
        for flat in 0..n {
            unflatten(flat, dim, &mut idx);
            data.push(f(&idx));
        }
        JetTensor::from_vec(dim, rank, data)
    }

    pub fn scalar(j: Jet) -> JetTensor {
        let dim = j.dim();
        JetTensor::from_vec(dim, 0, vec![j])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn data(&self) -> &[Jet] {
        &self.data
    }

    pub fn get(&self, idx: &[usize]) -> &Jet {
        &self.data[flatten(idx, self.dim)]
    }

    /// Component values at the base point.
    pub fn values(&self) -> Vec<f64> {
        self.data.iter().map(Jet::value).collect()
    }

    pub fn truncate(&self, order: usize) -> JetTensor {
        JetTensor {
            dim: self.dim,
            rank: self.rank,
            order: order.min(self.order),
            data: self.data.iter().map(|j| j.truncate(order)).collect(),
        }
    }
}

impl<const N: usize> Index<[usize; N]> for JetTensor {
    type Output = Jet;
    fn index(&self, idx: [usize; N]) -> &Jet {
        debug_assert_eq!(N, self.rank);
        &self.data[flatten(&idx, self.dim)]
    }
}

pub(crate) fn flatten(idx: &[usize], dim: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * dim + i)
}

pub(crate) fn unflatten(mut flat: usize, dim: usize, idx: &mut [usize]) {
    for slot in idx.iter_mut().rev() {
        *slot = flat % dim;
        flat /= dim;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    Coordinate,
    Orthonormal,
}

/// Point-local dense tensor of real components.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorValue {
    pub point: Vec<f64>,
    pub frame: Frame,
    pub dim: usize,
    /// Covariant slots before any derivative slots.
    pub valence: usize,
    /// Trailing covariant-derivative slots.
    pub nderiv: usize,
    pub data: Vec<f64>,
}

impl TensorValue {
    pub fn new(point: Vec<f64>, frame: Frame, dim: usize, valence: usize, nderiv: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), dim.pow((valence + nderiv) as u32), "component count does not match shape");
        TensorValue { point, frame, dim, valence, nderiv, data }
    }

    pub fn zeros(dim: usize, rank: usize) -> TensorValue {
        TensorValue::new(Vec::new(), Frame::Orthonormal, dim, rank, 0, vec![0.0; dim.pow(rank as u32)])
    }

    pub fn from_scalar(v: f64, dim: usize) -> TensorValue {
        TensorValue::new(Vec::new(), Frame::Orthonormal, dim, 0, 0, vec![v])
    }

    /// Orthonormal tensor built from a component function.
    pub fn build(dim: usize, rank: usize, mut f: impl FnMut(&[usize]) -> f64) -> TensorValue {
        let n = dim.pow(rank as u32);
        let mut idx = vec![0usize; rank];
        let mut data = Vec::with_capacity(n);
        for flat in 0..n {
            unflatten(flat, dim, &mut idx);
            data.push(f(&idx));
        }
        TensorValue::new(Vec::new(), Frame::Orthonormal, dim, rank, 0, data)
    }

    pub fn rank(&self) -> usize {
        self.valence + self.nderiv
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[flatten(idx, self.dim)]
    }

    pub fn value(&self) -> f64 {
        assert_eq!(self.rank(), 0, "value() on a non-scalar tensor");
        self.data[0]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, b| a.max(b.abs()))
    }

    pub fn scaled(&self, s: f64) -> TensorValue {
        let mut t = self.clone();
        t.data.iter_mut().for_each(|x| *x *= s);
        t
    }

    /// Full contraction with itself (sum of squares); frame must be orthonormal.
    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    /// Largest violation of `T(σ idx) = sign · T(idx)`.
    pub fn symmetry_defect(&self, perm: &[usize], sign: f64) -> f64 {
        let r = self.rank();
        let mut idx = vec![0; r];
        let mut p = vec![0; r];
        let mut worst: f64 = 0.0;
        for flat in 0..self.data.len() {
            unflatten(flat, self.dim, &mut idx);
            for s in 0..r {
                p[s] = idx[perm[s]];
            }
            worst = worst.max((self.get(&p) - sign * self.data[flat]).abs());
        }
        worst
    }

    /// Trace over two slots (orthonormal frame).
    pub fn trace(&self, a: usize, b: usize) -> TensorValue {
        let r = self.rank();
        assert!(a < b && b < r);
        let m = self.dim;
        let mut src = vec![0; r];
        let out = TensorValue::build(m, r - 2, |idx| {
            let mut it = idx.iter();
            for (s, v) in src.iter_mut().enumerate() {
                if s != a && s != b {
                    *v = *it.next().unwrap();
                }
            }
            (0..m)
                .map(|t| {
                    let mut q = src.clone();
                    q[a] = t;
                    q[b] = t;
                    self.get(&q)
                })
                .sum()
        });
        TensorValue { point: self.point.clone(), frame: self.frame, ..out }
    }
}

impl<const N: usize> Index<[usize; N]> for TensorValue {
    type Output = f64;
    fn index(&self, idx: [usize; N]) -> &f64 {
        debug_assert_eq!(N, self.rank());
        &self.data[flatten(&idx, self.dim)]
    }
}

/// Orthonormal frame from the Cholesky factor `g = L Lᵀ`: frame vectors are the
/// columns of `E = L⁻ᵀ`, coframe `θ = Lᵀ`.
#[derive(Debug, Clone)]
pub struct Vielbein {
    pub point: Vec<f64>,
    /// `e[(i, a)]`: coordinate component `i` of frame vector `a`.
    pub e: DMatrix<f64>,
    /// `theta[(a, i)]`: component `i` of coframe form `a`.
    pub theta: DMatrix<f64>,
}

impl Vielbein {
    pub fn from_metric(point: &[f64], g: &DMatrix<f64>) -> Result<Vielbein> {
        let chol = g.clone().cholesky().ok_or_else(|| CtlError::NotPositiveDefinite(point.to_vec()))?;
        let l = chol.l();
        let theta = l.transpose();
        let e = theta.clone().try_inverse().ok_or_else(|| CtlError::NotPositiveDefinite(point.to_vec()))?;
        Ok(Vielbein { point: point.to_vec(), e, theta })
    }

    fn convert(&self, data: &[f64], rank: usize, mat: &DMatrix<f64>) -> Vec<f64> {
        let m = mat.nrows();
        let mut cur = data.to_vec();
        let mut next = vec![0.0; cur.len()];
        // contract one slot at a time: stride of slot s is m^(rank-1-s)
        for s in 0..rank {
            let stride = m.pow((rank - 1 - s) as u32);
            next.iter_mut().for_each(|x| *x = 0.0);
            for (flat, out) in next.iter_mut().enumerate() {
                let a = (flat / stride) % m;
                let base = flat - a * stride;
                let mut acc = 0.0;
                for i in 0..m {
                    acc += mat[(i, a)] * cur[base + i * stride];
                }
                *out = acc;
            }
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }

    pub fn to_orthonormal(&self, t: &TensorValue) -> TensorValue {
        assert_eq!(t.frame, Frame::Coordinate, "tensor is already orthonormal");
        let data = self.convert(&t.data, t.rank(), &self.e);
        TensorValue { data, frame: Frame::Orthonormal, point: self.point.clone(), ..t.clone() }
    }

    pub fn to_coordinate(&self, t: &TensorValue) -> TensorValue {
        assert_eq!(t.frame, Frame::Orthonormal, "tensor is already in coordinates");
        let data = self.convert(&t.data, t.rank(), &self.theta);
        TensorValue { data, frame: Frame::Coordinate, point: self.point.clone(), ..t.clone() }
    }
}

/// Metric, inverse metric and Christoffel symbols at one point, as jets.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    dim: usize,
    order: usize,
    point: Vec<f64>,
    g: JetTensor,
    ginv: JetTensor,
    /// `gamma[(l * m + j) * m + k] = Γ^l_{jk}`, order `K - 1`.
    gamma: Vec<Jet>,
    vielbein: Vielbein,
}

impl PointGeometry {
    /// `g` holds the `m × m` metric component jets at `point`.
    pub fn new(g: Vec<Jet>, point: Vec<f64>, order: usize) -> Result<PointGeometry> {
        let m = point.len();
        if order > MAX_ORDER {
            return Err(JetError::BadOrder(order).into());
        }
        let g = JetTensor::from_vec(m, 2, g);
        let g0 = DMatrix::from_fn(m, m, |i, j| g[[i, j]].value());
        let vielbein = Vielbein::from_metric(&point, &g0)?;
        let g0inv = g0.clone().try_inverse().ok_or_else(|| CtlError::NotPositiveDefinite(point.clone()))?;
        let ginv = neumann_inverse(&g, &g0, &g0inv);
        let gamma = if order == 0 { Vec::new() } else { christoffel_jets(&g, &ginv)? };
        Ok(PointGeometry { dim: m, order, point, g, ginv, gamma, vielbein })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    pub fn metric(&self) -> &JetTensor {
        &self.g
    }

    /// Inverse metric `g^{ij}` (stored with the same layout as a 2-tensor).
    pub fn inverse_metric(&self) -> &JetTensor {
        &self.ginv
    }

    pub fn vielbein(&self) -> &Vielbein {
        &self.vielbein
    }

    pub fn gamma(&self, l: usize, j: usize, k: usize) -> &Jet {
        &self.gamma[(l * self.dim + j) * self.dim + k]
    }

    /// `Γ^l_{jk}` values at the point, laid out as `[l][j][k]`.
    pub fn christoffel(&self) -> Result<TensorValue> {
        if self.order == 0 {
            return Err(JetError::OrderExhausted.into());
        }
        Ok(TensorValue::new(
            self.point.clone(),
            Frame::Coordinate,
            self.dim,
            3,
            0,
            self.gamma.iter().map(Jet::value).collect(),
        ))
    }

    /// Jet of a scalar field at this point.
    pub fn scalar_jet(&self, e: &Expr) -> Result<Jet> {
        Ok(e.eval_jet(&self.point, self.order)?)
    }

    /// Covariant components `X_i = g_{ij} X^j` of a contravariant field.
    pub fn lower(&self, xs: &[Expr]) -> Result<JetTensor> {
        let m = self.dim;
        let up: Vec<Jet> = xs.iter().map(|e| self.scalar_jet(e)).collect::<Result<_>>()?;
        Ok(JetTensor::build(m, 1, |idx| {
            let mut acc = Jet::zeros(m, self.order);
            for (j, xj) in up.iter().enumerate() {
                acc.add_product(&self.g[[idx[0], j]], xj, 1.0);
            }
            acc
        }))
    }

    /// One covariant derivative; appends a trailing slot and lowers the order by one.
    pub fn covariant_derivative(&self, t: &JetTensor) -> Result<JetTensor> {
        if t.order == 0 {
            return Err(JetError::OrderExhausted.into());
        }
        let m = self.dim;
        let r = t.rank;
        let partials: Vec<Vec<Jet>> =
            (0..m).map(|k| t.data.iter().map(|j| j.partial(k)).collect::<std::result::Result<Vec<_>, _>>()).collect::<std::result::Result<_, _>>()?;
        let n = t.data.len();
        let mut data = Vec::with_capacity(n * m);
        let mut idx = vec![0usize; r];
        for flat in 0..n {
            unflatten(flat, m, &mut idx);
            for k in 0..m {
                let mut acc = partials[k][flat].clone();
                for s in 0..r {
                    let stride = m.pow((r - 1 - s) as u32);
                    let base = flat - idx[s] * stride;
                    for l in 0..m {
                        acc.add_product(self.gamma(l, k, idx[s]), &t.data[base + l * stride], -1.0);
                    }
                }
                data.push(acc);
            }
        }
        Ok(JetTensor { dim: m, rank: r + 1, order: t.order - 1, data })
    }

    pub fn covariant_derivative_n(&self, t: &JetTensor, times: usize) -> Result<JetTensor> {
        let mut cur = t.clone();
        for _ in 0..times {
            cur = self.covariant_derivative(&cur)?;
        }
        Ok(cur)
    }

    /// `∇∇h` as a coordinate 2-tensor.
    pub fn hessian_jets(&self, h: &Jet) -> Result<JetTensor> {
        self.covariant_derivative_n(&JetTensor::scalar(h.clone()), 2)
    }

    pub fn hessian(&self, h: &Expr) -> Result<TensorValue> {
        let hess = self.hessian_jets(&self.scalar_jet(h)?)?;
        Ok(self.value_of(&hess, 0, 2))
    }

    pub fn laplacian(&self, h: &Expr) -> Result<f64> {
        let hess = self.hessian_jets(&self.scalar_jet(h)?)?;
        Ok(self.trace_values(&hess))
    }

    /// `g^{ij} T_{ij}` at the point for a 2-tensor.
    pub fn trace_values(&self, t: &JetTensor) -> f64 {
        let m = self.dim;
        let mut acc = 0.0;
        for i in 0..m {
            for j in 0..m {
                acc += self.ginv[[i, j]].value() * t[[i, j]].value();
            }
        }
        acc
    }

    /// Trace of a jet tensor over slots `a < b` with the inverse metric.
    pub fn trace_jets(&self, t: &JetTensor, a: usize, b: usize) -> JetTensor {
        let m = self.dim;
        let r = t.rank;
        assert!(a < b && b < r);
        let mut src = vec![0usize; r];
        JetTensor::build(m, r - 2, |idx| {
            let mut it = idx.iter();
            for (s, v) in src.iter_mut().enumerate() {
                if s != a && s != b {
                    *v = *it.next().unwrap();
                }
            }
            let mut acc = Jet::zeros(m, t.order.min(self.order));
            for p in 0..m {
                for q in 0..m {
                    src[a] = p;
                    src[b] = q;
                    acc.add_product(&self.ginv[[p, q]], t.get(&src), 1.0);
                }
            }
            acc
        })
    }

    /// `(L_X g)_{ij} = X^k ∂_k g_{ij} + g_{kj} ∂_i X^k + g_{ik} ∂_j X^k`, from partial
    /// derivatives only.
    pub fn lie_derivative_metric_jets(&self, xs: &[Expr]) -> Result<JetTensor> {
        if self.order == 0 {
            return Err(JetError::OrderExhausted.into());
        }
        let m = self.dim;
        let up: Vec<Jet> = xs.iter().map(|e| self.scalar_jet(e)).collect::<Result<_>>()?;
        let dx: Vec<Vec<Jet>> =
            up.iter().map(|x| (0..m).map(|i| x.partial(i)).collect::<std::result::Result<_, _>>()).collect::<std::result::Result<_, _>>()?;
        let dg: Vec<Vec<Jet>> = self
            .g
            .data
            .iter()
            .map(|gij| (0..m).map(|k| gij.partial(k)).collect::<std::result::Result<_, _>>())
            .collect::<std::result::Result<_, _>>()?;
        Ok(JetTensor::build(m, 2, |idx| {
            let (i, j) = (idx[0], idx[1]);
            let mut acc = Jet::zeros(m, self.order - 1);
            for k in 0..m {
                acc.add_product(&up[k], &dg[i * m + j][k], 1.0);
                acc.add_product(&self.g[[k, j]], &dx[k][i], 1.0);
                acc.add_product(&self.g[[i, k]], &dx[k][j], 1.0);
            }
            acc
        }))
    }

    pub fn lie_derivative_metric(&self, xs: &[Expr]) -> Result<TensorValue> {
        let l = self.lie_derivative_metric_jets(xs)?;
        Ok(self.value_of(&l, 2, 0))
    }

    /// Coordinate value of a jet tensor with the given slot annotation.
    pub fn value_of(&self, t: &JetTensor, valence: usize, nderiv: usize) -> TensorValue {
        TensorValue::new(self.point.clone(), Frame::Coordinate, self.dim, valence, nderiv, t.values())
    }

    /// Orthonormal-frame value of a jet tensor.
    pub fn orthonormal(&self, t: &JetTensor, valence: usize, nderiv: usize) -> TensorValue {
        self.vielbein.to_orthonormal(&self.value_of(t, valence, nderiv))
    }

    pub fn to_orthonormal(&self, t: &TensorValue) -> TensorValue {
        self.vielbein.to_orthonormal(t)
    }
}

/// `g⁻¹ = Σ_n (-G₀⁻¹ N)^n G₀⁻¹` with `N = g - G₀` nilpotent in the truncated algebra.
fn neumann_inverse(g: &JetTensor, g0: &DMatrix<f64>, g0inv: &DMatrix<f64>) -> JetTensor {
    let m = g.dim;
    let order = g.order;
    let n: Vec<Jet> = (0..m * m)
        .map(|f| {
            let (i, j) = (f / m, f % m);
            g.data[f].add_scalar(-g0[(i, j)])
        })
        .collect();
    // M = -G0inv · N
    let mmat: Vec<Jet> = (0..m * m)
        .map(|f| {
            let (i, j) = (f / m, f % m);
            let mut acc = Jet::zeros(m, order);
            for k in 0..m {
                acc.add_scaled(&n[k * m + j], -g0inv[(i, k)]);
            }
            acc
        })
        .collect();
    let mut term: Vec<Jet> =
        (0..m * m).map(|f| Jet::constant(g0inv[(f / m, f % m)], m, order).expect("valid shape")).collect();
    let mut sum = term.clone();
    for _ in 0..order {
        let next: Vec<Jet> = (0..m * m)
            .map(|f| {
                let (i, j) = (f / m, f % m);
                let mut acc = Jet::zeros(m, order);
                for k in 0..m {
                    acc.add_product(&mmat[i * m + k], &term[k * m + j], 1.0);
                }
                acc
            })
            .collect();
        for (s, t) in sum.iter_mut().zip(&next) {
            s.add_scaled(t, 1.0);
        }
        term = next;
    }
    JetTensor { dim: m, rank: 2, order, data: sum }
}

fn christoffel_jets(g: &JetTensor, ginv: &JetTensor) -> Result<Vec<Jet>> {
    let m = g.dim;
    let order = g.order - 1;
    // dg[(a * m + j) * m + k] = ∂_k g_{aj}
    let mut dg = Vec::with_capacity(m * m * m);
    for a in 0..m {
        for j in 0..m {
            for k in 0..m {
                dg.push(g[[a, j]].partial(k)?);
            }
        }
    }
    let d = |a: usize, j: usize, k: usize| &dg[(a * m + j) * m + k];
    // first kind Γ_{a,jk}
    let mut first = Vec::with_capacity(m * m * m);
    for a in 0..m {
        for j in 0..m {
            for k in 0..m {
                let mut acc = d(a, k, j).clone();
                acc.add_scaled(d(a, j, k), 1.0);
                acc.add_scaled(d(j, k, a), -1.0);
                first.push(acc.scale(0.5));
            }
        }
    }
    let mut gamma = Vec::with_capacity(m * m * m);
    for l in 0..m {
        for j in 0..m {
            for k in 0..m {
                let mut acc = Jet::zeros(m, order);
                for a in 0..m {
                    acc.add_product(&ginv[[l, a]], &first[(a * m + j) * m + k], 1.0);
                }
                gamma.push(acc);
            }
        }
    }
    Ok(gamma)
}
