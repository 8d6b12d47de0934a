//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] holds the Taylor coefficients `∂^α h / α!` of a scalar function at a
//! base point for every multi-index with `|α| ≤ order`. Coefficients are stored
//! densely in a graded enumeration (total degree first, colexicographic inside a
//! degree), so truncating to a lower order is a prefix slice and products only
//! touch a precomputed list of index triples.
//!
//! Elementary functions are composed with the Euler-operator recurrences
//! (`E = Σ xᵢ∂ᵢ` multiplies a degree-`d` homogeneous part by `d`), which reduce to
//! the classical univariate Taylor recurrences when `dim = 1`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use thiserror::Error;

/// Largest supported number of chart variables.
pub const MAX_DIM: usize = 6;
/// Largest supported truncation order.
pub const MAX_ORDER: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JetError {
    #[error("variable slot {slot} out of range for dimension {dim}")]
    SlotOutOfRange { slot: usize, dim: usize },
    #[error("dimension {0} outside supported range 1..={MAX_DIM}")]
    BadDimension(usize),
    #[error("order {0} exceeds the maximum jet order {MAX_ORDER}")]
    BadOrder(usize),
    #[error("jet shape mismatch: (dim {0}, order {1}) vs (dim {2}, order {3})")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("division by a jet with zero constant term")]
    DivisionByZero,
    #[error("{func} requires a positive constant term, got {value}")]
    Domain { func: &'static str, value: f64 },
    #[error("jet order exhausted: cannot differentiate an order-0 jet")]
    OrderExhausted,
}

pub type Result<T> = std::result::Result<T, JetError>;

/// Index tables shared by every jet of one dimension.
struct Layout {
    dim: usize,
    exps: Vec<[u8; MAX_DIM]>,
    degree: Vec<u8>,
    /// `count[k]` = number of multi-indices with `|α| ≤ k`.
    count: [usize; MAX_ORDER + 2],
    /// `raise[idx * dim + i]` = index of `α + eᵢ`, or `u32::MAX` past `MAX_ORDER`.
    raise: Vec<u32>,
    /// Product triples `(a, b, c)` with `α_a + α_b = α_c`, sorted by `c`.
    triples: Vec<(u32, u32, u32)>,
    /// `tri_start[c]..tri_start[c + 1]` are the triples producing `c`.
    tri_start: Vec<usize>,
}

impl Layout {
    fn build(dim: usize) -> Layout {
        let mut exps: Vec<[u8; MAX_DIM]> = Vec::new();
        let mut count = [0usize; MAX_ORDER + 2];
        for d in 0..=MAX_ORDER {
            let mut level = Vec::new();
            let mut cur = [0u8; MAX_DIM];
            gen_degree(dim, d, 0, &mut cur, &mut level);
            // colexicographic: compare from the last variable down
            level.sort_by(|a, b| {
                for i in (0..dim).rev() {
                    match a[i].cmp(&b[i]) {
                        std::cmp::Ordering::Equal => continue,
                        o => return o,
                    }
                }
                std::cmp::Ordering::Equal
            });
            exps.extend(level);
            count[d] = exps.len();
        }
        count[MAX_ORDER + 1] = exps.len();
        let degree: Vec<u8> = exps.iter().map(|e| e.iter().sum()).collect();
        let lookup: std::collections::HashMap<[u8; MAX_DIM], u32> =
            exps.iter().enumerate().map(|(i, e)| (*e, i as u32)).collect();
        let mut raise = vec![u32::MAX; exps.len() * dim];
        for (idx, e) in exps.iter().enumerate() {
            for i in 0..dim {
                let mut r = *e;
                r[i] += 1;
                if let Some(&j) = lookup.get(&r) {
                    raise[idx * dim + i] = j;
                }
            }
        }
        let mut triples = Vec::new();
        let mut tri_start = Vec::with_capacity(exps.len() + 1);
        for (c, ec) in exps.iter().enumerate() {
            tri_start.push(triples.len());
            // enumerate all a ≤ c componentwise
            let mut a = [0u8; MAX_DIM];
            loop {
                let mut b = [0u8; MAX_DIM];
                for i in 0..dim {
                    b[i] = ec[i] - a[i];
                }
                triples.push((lookup[&a], lookup[&b], c as u32));
                // odometer increment bounded by ec
                let mut i = 0;
                loop {
                    if i == dim {
                        break;
                    }
                    if a[i] < ec[i] {
                        a[i] += 1;
                        break;
                    }
                    a[i] = 0;
                    i += 1;
                }
                if i == dim {
                    break;
                }
            }
        }
        tri_start.push(triples.len());
        Layout { dim, exps, degree, count, raise, triples, tri_start }
    }

    fn len(&self, order: usize) -> usize {
        self.count[order]
    }

    fn index_of(&self, alpha: &[usize]) -> Option<usize> {
        if alpha.len() != self.dim {
            return None;
        }
        let deg: usize = alpha.iter().sum();
        if deg > MAX_ORDER {
            return None;
        }
        let start = if deg == 0 { 0 } else { self.count[deg - 1] };
        (start..self.count[deg])
            .find(|&i| alpha.iter().enumerate().all(|(k, &a)| self.exps[i][k] as usize == a))
    }
}

fn gen_degree(dim: usize, d: usize, pos: usize, cur: &mut [u8; MAX_DIM], out: &mut Vec<[u8; MAX_DIM]>) {
    if pos == dim - 1 {
        cur[pos] = d as u8;
        out.push(*cur);
        cur[pos] = 0;
        return;
    }
    for k in 0..=d {
        cur[pos] = k as u8;
        gen_degree(dim, d - k, pos + 1, cur, out);
    }
    cur[pos] = 0;
}

fn layout(dim: usize) -> &'static Layout {
    static LAYOUTS: [OnceLock<Layout>; MAX_DIM + 1] = [const { OnceLock::new() }; MAX_DIM + 1];
    LAYOUTS[dim].get_or_init(|| Layout::build(dim))
}

/// Number of stored coefficients of a jet with the given shape.
pub fn coefficient_count(dim: usize, order: usize) -> usize {
    layout(dim).len(order)
}

/// Elementary functions a jet can be composed with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JetFn {
    Exp,
    Log,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Sqrt,
    Pow(f64),
}

/// Binary operations accepted by [`jet_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithKind {
    Add,
    Sub,
    Mul,
    Div,
}

/// Truncated multivariate Taylor expansion of a scalar at a point.
#[derive(Clone, PartialEq)]
pub struct Jet {
    dim: usize,
    order: usize,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet(dim={}, order={}, value={:e})", self.dim, self.order, self.value())
    }
}

fn check_shape(dim: usize, order: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        return Err(JetError::BadDimension(dim));
    }
    if order > MAX_ORDER {
        return Err(JetError::BadOrder(order));
    }
    Ok(())
}

/// Lift a real number to a constant jet, or to the coordinate jet `value + x_slot`.
pub fn jet_lift(value: f64, slot: Option<usize>, dim: usize, order: usize) -> Result<Jet> {
    match slot {
        None => Jet::constant(value, dim, order),
        Some(s) => Jet::variable(value, s, dim, order),
    }
}

/// Checked binary arithmetic; operands must share dimension and order.
pub fn jet_arith(a: &Jet, b: &Jet, kind: ArithKind) -> Result<Jet> {
    if a.dim != b.dim || a.order != b.order {
        return Err(JetError::ShapeMismatch(a.dim, a.order, b.dim, b.order));
    }
    match kind {
        ArithKind::Add => Ok(a + b),
        ArithKind::Sub => Ok(a - b),
        ArithKind::Mul => Ok(a * b),
        ArithKind::Div => a.div(b),
    }
}

/// Compose a jet with an elementary function.
pub fn jet_func(a: &Jet, f: JetFn) -> Result<Jet> {
    a.apply(f)
}

impl Jet {
    pub fn constant(value: f64, dim: usize, order: usize) -> Result<Jet> {
        check_shape(dim, order)?;
        let mut j = Jet::zeros(dim, order);
        j.coeffs[0] = value;
        Ok(j)
    }

    pub fn variable(value: f64, slot: usize, dim: usize, order: usize) -> Result<Jet> {
        check_shape(dim, order)?;
        if slot >= dim {
            return Err(JetError::SlotOutOfRange { slot, dim });
        }
        let mut j = Jet::zeros(dim, order);
        j.coeffs[0] = value;
        if order > 0 {
            j.coeffs[layout(dim).raise[slot] as usize] = 1.0;
        }
        Ok(j)
    }

    /// Zero jet; panics on an unsupported shape.
    pub fn zeros(dim: usize, order: usize) -> Jet {
        assert!(dim >= 1 && dim <= MAX_DIM && order <= MAX_ORDER, "unsupported jet shape");
        Jet { dim, order, coeffs: vec![0.0; layout(dim).len(order)] }
    }

    /// Build a jet from coefficients given in the internal graded order.
    pub fn from_coeffs(dim: usize, order: usize, coeffs: Vec<f64>) -> Result<Jet> {
        check_shape(dim, order)?;
        if coeffs.len() != layout(dim).len(order) {
            return Err(JetError::ShapeMismatch(dim, order, dim, coeffs.len()));
        }
        Ok(Jet { dim, order, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Multi-indices in storage order.
    pub fn multi_indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let l = layout(self.dim);
        l.exps[..self.coeffs.len()]
            .iter()
            .map(move |e| e[..self.dim].iter().map(|&x| x as usize).collect())
    }

    /// Taylor coefficient `∂^α h / α!`; zero when `|α|` exceeds the order.
    pub fn coeff(&self, alpha: &[usize]) -> f64 {
        match layout(self.dim).index_of(alpha) {
            Some(i) if i < self.coeffs.len() => self.coeffs[i],
            _ => 0.0,
        }
    }

    /// Partial derivative `∂^α h` at the base point.
    pub fn derivative(&self, alpha: &[usize]) -> f64 {
        let fact: f64 = alpha.iter().map(|&a| (1..=a).product::<usize>() as f64).product();
        self.coeff(alpha) * fact
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs[1..].iter().all(|&c| c == 0.0)
    }

    /// Drop every coefficient above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        let order = order.min(self.order);
        Jet { dim: self.dim, order, coeffs: self.coeffs[..layout(self.dim).len(order)].to_vec() }
    }

    /// Jet of `∂h/∂x_slot`, one order lower.
    pub fn partial(&self, slot: usize) -> Result<Jet> {
        if slot >= self.dim {
            return Err(JetError::SlotOutOfRange { slot, dim: self.dim });
        }
        if self.order == 0 {
            return Err(JetError::OrderExhausted);
        }
        let l = layout(self.dim);
        let n = l.len(self.order - 1);
        let mut out = vec![0.0; n];
        for (idx, o) in out.iter_mut().enumerate() {
            let up = l.raise[idx * self.dim + slot] as usize;
            *o = (l.exps[idx][slot] as f64 + 1.0) * self.coeffs[up];
        }
        Ok(Jet { dim: self.dim, order: self.order - 1, coeffs: out })
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet { dim: self.dim, order: self.order, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut j = self.clone();
        j.coeffs[0] += s;
        j
    }

    /// `self += s · other`, truncated to `self`'s order.
    pub fn add_scaled(&mut self, other: &Jet, s: f64) {
        assert_eq!(self.dim, other.dim, "jet dimension mismatch");
        let n = self.coeffs.len().min(other.coeffs.len());
        if n < self.coeffs.len() {
            self.order = other.order;
            self.coeffs.truncate(n);
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
    }

    /// `self += s · a · b`, truncated to the lowest of the three orders.
    pub fn add_product(&mut self, a: &Jet, b: &Jet, s: f64) {
        assert!(self.dim == a.dim && a.dim == b.dim, "jet dimension mismatch");
        let order = self.order.min(a.order).min(b.order);
        let l = layout(self.dim);
        let n = l.len(order);
        if n < self.coeffs.len() {
            self.coeffs.truncate(n);
            self.order = order;
        }
        let (a0, b0) = (a.coeffs[0], b.coeffs[0]);
        if order == 0 {
            self.coeffs[0] += s * a0 * b0;
            return;
        }
        let end = l.tri_start[n];
        let out = &mut self.coeffs;
        for &(i, j, c) in &l.triples[..end] {
            out[c as usize] += s * a.coeffs[i as usize] * b.coeffs[j as usize];
        }
    }

    pub fn mul_jet(&self, other: &Jet) -> Jet {
        let order = self.order.min(other.order);
        let mut out = Jet::zeros(self.dim, order);
        out.add_product(self, other, 1.0);
        out
    }

    pub fn div(&self, other: &Jet) -> Result<Jet> {
        assert_eq!(self.dim, other.dim, "jet dimension mismatch");
        let b0 = other.coeffs[0];
        if b0 == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        let order = self.order.min(other.order);
        let l = layout(self.dim);
        let n = l.len(order);
        let mut q = vec![0.0; n];
        for c in 0..n {
            let mut acc = self.coeffs[c];
            for &(i, j, _) in &l.triples[l.tri_start[c]..l.tri_start[c + 1]] {
                // terms with b_j, j ≠ 0 (then i ≠ c is already final)
                if j != 0 {
                    acc -= other.coeffs[j as usize] * q[i as usize];
                }
            }
            q[c] = acc / b0;
        }
        Ok(Jet { dim: self.dim, order, coeffs: q })
    }

    pub fn recip(&self) -> Result<Jet> {
        let one = Jet::constant(1.0, self.dim, self.order)?;
        one.div(self)
    }

    pub fn apply(&self, f: JetFn) -> Result<Jet> {
        match f {
            JetFn::Exp => Ok(self.exp()),
            JetFn::Log => self.ln(),
            JetFn::Sin => Ok(self.sin_cos().0),
            JetFn::Cos => Ok(self.sin_cos().1),
            JetFn::Sinh => Ok(self.sinh_cosh().0),
            JetFn::Cosh => Ok(self.sinh_cosh().1),
            JetFn::Sqrt => {
                if self.coeffs[0] <= 0.0 {
                    return Err(JetError::Domain { func: "sqrt", value: self.coeffs[0] });
                }
                self.powf(0.5)
            }
            JetFn::Pow(r) => self.powf(r),
        }
    }

    pub fn exp(&self) -> Jet {
        let l = layout(self.dim);
        let n = self.coeffs.len();
        let mut h = vec![0.0; n];
        h[0] = self.coeffs[0].exp();
        for c in 1..n {
            let mut acc = 0.0;
            for &(i, j, _) in &l.triples[l.tri_start[c]..l.tri_start[c + 1]] {
                // E h = h · E a
                let dj = l.degree[j as usize];
                if dj != 0 {
                    acc += dj as f64 * self.coeffs[j as usize] * h[i as usize];
                }
            }
            h[c] = acc / l.degree[c] as f64;
        }
        Jet { dim: self.dim, order: self.order, coeffs: h }
    }

    pub fn ln(&self) -> Result<Jet> {
        let a0 = self.coeffs[0];
        if a0 <= 0.0 {
            return Err(JetError::Domain { func: "log", value: a0 });
        }
        let l = layout(self.dim);
        let n = self.coeffs.len();
        let mut h = vec![0.0; n];
        h[0] = a0.ln();
        for c in 1..n {
            // E a = a · E h  ⇒  |γ| a_γ = Σ_β |β| h_β a_{γ-β}
            let dc = l.degree[c] as f64;
            let mut acc = dc * self.coeffs[c];
            for &(i, j, _) in &l.triples[l.tri_start[c]..l.tri_start[c + 1]] {
                let dj = l.degree[j as usize];
                if dj != 0 && (j as usize) != c {
                    acc -= dj as f64 * h[j as usize] * self.coeffs[i as usize];
                }
            }
            h[c] = acc / (dc * a0);
        }
        Ok(Jet { dim: self.dim, order: self.order, coeffs: h })
    }

    /// `(sin a, cos a)`.
    pub fn sin_cos(&self) -> (Jet, Jet) {
        self.trig_pair(-1.0)
    }

    /// `(sinh a, cosh a)`.
    pub fn sinh_cosh(&self) -> (Jet, Jet) {
        self.trig_pair(1.0)
    }

    // E s = c·E a,  E c = sign·s·E a
    fn trig_pair(&self, sign: f64) -> (Jet, Jet) {
        let l = layout(self.dim);
        let n = self.coeffs.len();
        let a0 = self.coeffs[0];
        let mut s = vec![0.0; n];
        let mut c = vec![0.0; n];
        if sign < 0.0 {
            s[0] = a0.sin();
            c[0] = a0.cos();
        } else {
            s[0] = a0.sinh();
            c[0] = a0.cosh();
        }
        for g in 1..n {
            let (mut as_, mut ac) = (0.0, 0.0);
            for &(i, j, _) in &l.triples[l.tri_start[g]..l.tri_start[g + 1]] {
                let dj = l.degree[j as usize];
                if dj != 0 {
                    let w = dj as f64 * self.coeffs[j as usize];
                    as_ += w * c[i as usize];
                    ac += w * s[i as usize];
                }
            }
            let dg = l.degree[g] as f64;
            s[g] = as_ / dg;
            c[g] = sign * ac / dg;
        }
        (
            Jet { dim: self.dim, order: self.order, coeffs: s },
            Jet { dim: self.dim, order: self.order, coeffs: c },
        )
    }

    /// `a^r`. Non-negative integer exponents accept any base; other exponents need
    /// a nonzero (negative integer) or positive (non-integer) constant term.
    pub fn powf(&self, r: f64) -> Result<Jet> {
        let a0 = self.coeffs[0];
        let is_int = r.fract() == 0.0 && r.abs() < 1e9;
        if is_int && r >= 0.0 {
            return Ok(self.powi(r as u32));
        }
        if is_int {
            if a0 == 0.0 {
                return Err(JetError::DivisionByZero);
            }
            return self.powi((-r) as u32).recip();
        }
        if a0 <= 0.0 {
            return Err(JetError::Domain { func: "pow", value: a0 });
        }
        let l = layout(self.dim);
        let n = self.coeffs.len();
        let mut h = vec![0.0; n];
        h[0] = a0.powf(r);
        for g in 1..n {
            // a · E h = r · h · E a
            //   ⇒ a0 |γ| h_γ = Σ_{β≠0} a_β h_{γ-β} (r|β| − |γ-β|)
            let mut acc = 0.0;
            for &(i, j, _) in &l.triples[l.tri_start[g]..l.tri_start[g + 1]] {
                let dj = l.degree[j as usize];
                if dj != 0 {
                    let di = l.degree[i as usize] as f64;
                    acc += self.coeffs[j as usize] * h[i as usize] * (r * dj as f64 - di);
                }
            }
            h[g] = acc / (a0 * l.degree[g] as f64);
        }
        Ok(Jet { dim: self.dim, order: self.order, coeffs: h })
    }

    pub fn powi(&self, n: u32) -> Jet {
        let mut result = Jet::constant(1.0, self.dim, self.order).expect("shape already valid");
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_jet(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_jet(&base);
            }
        }
        result
    }

    pub fn max_abs_diff(&self, other: &Jet) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

fn binary(a: &Jet, b: &Jet, s: f64) -> Jet {
    assert_eq!(a.dim, b.dim, "jet dimension mismatch");
    let order = a.order.min(b.order);
    let n = layout(a.dim).len(order);
    let coeffs = a.coeffs[..n].iter().zip(&b.coeffs[..n]).map(|(x, y)| x + s * y).collect();
    Jet { dim: a.dim, order, coeffs }
}

// Operator impls truncate to the lower of the two orders.
impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        binary(self, rhs, 1.0)
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        binary(self, rhs, -1.0)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.mul_jet(rhs)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(v: f64, order: usize) -> Jet {
        Jet::variable(v, 0, 1, order).unwrap()
    }

    #[test]
    fn lift_constant_and_coordinate() {
        let c = jet_lift(3.0, None, 2, 2).unwrap();
        assert_eq!(c.value(), 3.0);
        assert!(c.is_constant());
        let v = jet_lift(0.5, Some(0), 2, 2).unwrap();
        assert_eq!(v.coeff(&[0, 0]), 0.5);
        assert_eq!(v.coeff(&[1, 0]), 1.0);
        assert_eq!(v.coeff(&[0, 1]), 0.0);
        assert_eq!(jet_lift(1.0, Some(3), 2, 2), Err(JetError::SlotOutOfRange { slot: 3, dim: 2 }));
    }

    #[test]
    fn graded_layout_is_prefix_closed() {
        for dim in 1..=MAX_DIM {
            let l = layout(dim);
            for k in 0..=MAX_ORDER {
                assert!(l.degree[..l.len(k)].iter().all(|&d| d as usize <= k));
            }
        }
        assert_eq!(coefficient_count(5, 6), 462);
    }

    #[test]
    fn polynomial_product() {
        let one = Jet::constant(1.0, 1, 2).unwrap();
        let p = &(&one + &x(0.0, 2)) * &(&one - &x(0.0, 2));
        assert_eq!(p.coeffs(), &[1.0, 0.0, -1.0]);
    }

    #[test]
    fn square_at_point() {
        let a = x(0.3, 2);
        let sq = &a * &a;
        assert!((sq.coeff(&[0]) - 0.09).abs() < 1e-15);
        assert!((sq.coeff(&[1]) - 0.6).abs() < 1e-15);
        assert!((sq.coeff(&[2]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn self_division_is_one() {
        let a = Jet::variable(0.7, 1, 3, 4).unwrap().exp().add_scalar(0.2);
        let q = a.div(&a).unwrap();
        assert!((q.value() - 1.0).abs() < 1e-15);
        assert!(q.coeffs()[1..].iter().all(|c| c.abs() < 1e-14));
        let z = Jet::zeros(3, 4);
        assert_eq!(a.div(&z), Err(JetError::DivisionByZero));
    }

    #[test]
    fn exp_series() {
        let e = x(0.0, 3).exp();
        let want = [1.0, 1.0, 0.5, 1.0 / 6.0];
        for (c, w) in e.coeffs().iter().zip(want) {
            assert!((c - w).abs() < 1e-15);
        }
    }

    #[test]
    fn log_inverts_exp() {
        let a = &Jet::variable(0.4, 0, 2, 6).unwrap() * &Jet::variable(-0.2, 1, 2, 6).unwrap();
        let back = a.exp().ln().unwrap();
        assert!(back.max_abs_diff(&a) < 1e-13);
    }

    #[test]
    fn domain_errors() {
        let neg = x(-1.0, 3);
        assert!(matches!(neg.ln(), Err(JetError::Domain { func: "log", .. })));
        assert!(matches!(neg.apply(JetFn::Sqrt), Err(JetError::Domain { func: "sqrt", .. })));
        assert!(neg.powf(0.5).is_err());
        // integer powers are fine for negative bases
        let c = neg.powf(3.0).unwrap();
        assert!((c.value() + 1.0).abs() < 1e-15);
        assert!((c.coeff(&[1]) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn arith_requires_matching_shape() {
        let a = Jet::constant(1.0, 2, 3).unwrap();
        let b = Jet::constant(1.0, 2, 2).unwrap();
        assert!(matches!(jet_arith(&a, &b, ArithKind::Add), Err(JetError::ShapeMismatch(..))));
        assert!(jet_arith(&a, &a, ArithKind::Mul).is_ok());
    }

    #[test]
    fn partial_lowers_order() {
        let v = Jet::variable(2.0, 0, 2, 3).unwrap();
        let w = Jet::variable(3.0, 1, 2, 3).unwrap();
        let p = &v * &w;
        let dx = p.partial(0).unwrap();
        assert_eq!(dx.order(), 2);
        assert!((dx.value() - 3.0).abs() < 1e-15);
        assert!((dx.coeff(&[0, 1]) - 1.0).abs() < 1e-15);
        let c = Jet::constant(1.0, 2, 0).unwrap();
        assert_eq!(c.partial(0), Err(JetError::OrderExhausted));
    }
}
