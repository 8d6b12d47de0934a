#![allow(dead_code)]

use ctl_core::catalog::{self, CatalogEntry, CatalogParams};
use ctl_core::geometry::{GeometryInstance, GeometrySpec};
use ctl_core::curvature::CurvatureBundle;
use ctl_core::identities::{sample_points, Ctx, Family, VerificationReport, VerifyConfig};
use ctl_core::{identities, TensorValue};

pub fn geom(
    name: &str,
    coords: &[&str],
    metric: &[&[&str]],
    u: Option<&str>,
    f: Option<&str>,
    x: Option<&[&str]>,
    lambda: Option<f64>,
) -> GeometryInstance {
    geom_on(name, coords, [-0.8, 0.8], metric, u, f, x, lambda)
}

#[allow(clippy::too_many_arguments)]
pub fn geom_on(
    name: &str,
    coords: &[&str],
    box1: [f64; 2],
    metric: &[&[&str]],
    u: Option<&str>,
    f: Option<&str>,
    x: Option<&[&str]>,
    lambda: Option<f64>,
) -> GeometryInstance {
    let spec = GeometrySpec {
        name: name.into(),
        dim: coords.len(),
        coords: coords.iter().map(|s| s.to_string()).collect(),
        domain: vec![box1; coords.len()],
        metric: metric.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect(),
        u: u.map(Into::into),
        f: f.map(Into::into),
        x: x.map(|v| v.iter().map(|s| s.to_string()).collect()),
        lambda,
    };
    GeometryInstance::new(spec).unwrap()
}

pub fn flat(m: usize) -> GeometryInstance {
    let names = ["x", "y", "z", "w", "v", "s"];
    let rows: Vec<Vec<&str>> = (0..m).map(|i| (0..=i).map(|j| if i == j { "1" } else { "0" }).collect()).collect();
    let rows: Vec<&[&str]> = rows.iter().map(|r| r.as_slice()).collect();
    geom("flat", &names[..m], &rows, None, None, None, None)
}

pub fn load(name: &str) -> CatalogEntry {
    catalog::load(name, &CatalogParams::default()).unwrap()
}

pub fn load_with(name: &str, params: CatalogParams) -> CatalogEntry {
    catalog::load(name, &params).unwrap()
}

pub fn random(dim: usize, seed: u64) -> GeometryInstance {
    load_with("random", CatalogParams { dim: Some(dim), seed, ..Default::default() }).geometry
}

pub fn points(g: &GeometryInstance, n: usize, seed: u64) -> Vec<Vec<f64>> {
    sample_points(g, n, seed).unwrap()
}

pub fn run(g: &GeometryInstance, fams: &[Family], ids: &[&str], cfg: &VerifyConfig) -> VerificationReport {
    let ids: Vec<String> = ids.iter().map(|s| s.to_string()).collect();
    let recs = identities::select(fams, &ids).unwrap();
    identities::verify(g, &recs, cfg).unwrap()
}

/// Largest absolute component difference.
pub fn max_diff(a: &TensorValue, b: &TensorValue) -> f64 {
    assert_eq!(a.data.len(), b.data.len());
    a.data.iter().zip(&b.data).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Central 5-point difference of order `k ≤ 4` with two Richardson steps.
pub fn fd1(f: &dyn Fn(f64) -> f64, x: f64, k: usize, h: f64) -> f64 {
    let raw = |h: f64| -> f64 {
        let v = |s: f64| f(x + s * h);
        match k {
            0 => v(0.0),
            1 => (v(-2.0) - 8.0 * v(-1.0) + 8.0 * v(1.0) - v(2.0)) / (12.0 * h),
            2 => (-v(-2.0) + 16.0 * v(-1.0) - 30.0 * v(0.0) + 16.0 * v(1.0) - v(2.0)) / (12.0 * h * h),
            3 => (-v(-2.0) + 2.0 * v(-1.0) - 2.0 * v(1.0) + v(2.0)) / (2.0 * h.powi(3)),
            4 => (v(-2.0) - 4.0 * v(-1.0) + 6.0 * v(0.0) - 4.0 * v(1.0) + v(2.0)) / h.powi(4),
            _ => panic!("fd order {k} unsupported"),
        }
    };
    if k == 0 {
        return f(x);
    }
    // stencils of order 1 and 2 are O(h^4), 3 and 4 are O(h^2)
    let p = if k <= 2 { 4 } else { 2 };
    let (a, b, c) = (raw(h), raw(h / 2.0), raw(h / 4.0));
    let r1 = 2f64.powi(p);
    let ab = (r1 * b - a) / (r1 - 1.0);
    let bc = (r1 * c - b) / (r1 - 1.0);
    let r2 = 2f64.powi(p + 2);
    (r2 * bc - ab) / (r2 - 1.0)
}

/// Mixed partial `∂^α f` at `p` by nested one-dimensional differences.
pub fn fd_partial(f: &dyn Fn(&[f64]) -> f64, p: &[f64], alpha: &[usize], h: f64) -> f64 {
    match alpha.iter().position(|&a| a > 0) {
        None => f(p),
        Some(i) => {
            let k = alpha[i];
            let mut rest = alpha.to_vec();
            rest[i] = 0;
            let g = |t: f64| {
                let mut q = p.to_vec();
                q[i] = t;
                fd_partial(f, &q, &rest, h)
            };
            fd1(&g, p[i], k, h)
        }
    }
}

/// `∂_k` of a function of a point, as a closure-friendly helper.
pub fn fd_grad(f: &dyn Fn(&[f64]) -> f64, p: &[f64], k: usize) -> f64 {
    let mut alpha = vec![0; p.len()];
    alpha[k] = 1;
    fd_partial(f, p, &alpha, 1e-2)
}

/// Gauss–Jordan inverse of a small dense matrix.
pub fn inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for c in 0..n {
        let piv = (c..n).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs())).unwrap();
        m.swap(c, piv);
        let d = m[c][c];
        m[c].iter_mut().for_each(|v| *v /= d);
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                let pivot_row = m[c].clone();
                m[r].iter_mut().zip(&pivot_row).for_each(|(v, p)| *v -= f * p);
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

pub fn determinant(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut m = a.to_vec();
    let mut det = 1.0;
    for c in 0..n {
        let piv = (c..n).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs())).unwrap();
        if piv != c {
            m.swap(c, piv);
            det = -det;
        }
        det *= m[c][c];
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            let pivot_row = m[c].clone();
            m[r].iter_mut().zip(&pivot_row).for_each(|(v, p)| *v -= f * p);
        }
    }
    det
}

/// Coordinate metric matrix at `p` evaluated from the expressions.
pub fn metric_at(g: &GeometryInstance, p: &[f64]) -> Vec<Vec<f64>> {
    let m = g.dim();
    (0..m).map(|i| (0..m).map(|j| g.metric_expr(i, j).eval_f64(p).unwrap()).collect()).collect()
}

/// `LHS − RHS` of a registry record at `p`, evaluated without any hypothesis check.
pub fn defect(g: &GeometryInstance, id: &str, p: &[f64], order: usize) -> TensorValue {
    let base = CurvatureBundle::new(g, p, order).unwrap();
    let tg = g.u().map(|u| g.conformal_rescale(u, "tilde"));
    let tilde = tg.as_ref().map(|t| CurvatureBundle::new(t, p, order).unwrap());
    let ctx = Ctx::new(&base, tilde.as_ref(), g.lambda());
    let (l, r) = identities::find(id).unwrap().evaluate(&ctx).unwrap();
    let mut d = l;
    d.data.iter_mut().zip(&r.data).for_each(|(a, b)| *a -= b);
    d
}
