mod common;

use common::*;
use ctl_core::catalog::{self, CatalogParams};
use ctl_core::curvature::{CurvatureBundle, Quantity};
use ctl_core::geometry::GeometryInstance;
use ctl_core::{parse_expr, Frame};

fn christoffel_fd(g: &GeometryInstance, p: &[f64]) -> Vec<f64> {
    let m = g.dim();
    let dg = |i: usize, j: usize, k: usize| {
        let f = |q: &[f64]| g.metric_expr(i, j).eval_f64(q).unwrap();
        fd_grad(&f, p, k)
    };
    let ginv = inverse(&metric_at(g, p));
    let mut out = vec![0.0; m * m * m];
    for l in 0..m {
        for j in 0..m {
            for k in 0..m {
                out[(l * m + j) * m + k] =
                    0.5 * (0..m).map(|s| ginv[l][s] * (dg(s, k, j) + dg(s, j, k) - dg(j, k, s))).sum::<f64>();
            }
        }
    }
    out
}

#[test]
fn flat_christoffel_vanishes() {
    let g = flat(4);
    let pg = g.at(&[0.1, 0.2, -0.3, 0.4], 2).unwrap();
    assert_eq!(pg.christoffel().unwrap().max_abs(), 0.0);
}

#[test]
fn sphere_christoffel_matches_difference_quotients() {
    let e = load("sphere");
    for p in points(&e.geometry, 8, 4) {
        let got = e.geometry.at(&p, 2).unwrap().christoffel().unwrap();
        let want = christoffel_fd(&e.geometry, &p);
        let err = got.data.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-7, "{err:e} at {p:?}");
    }
}

#[test]
fn polar_type_christoffel() {
    let g = geom_on("polar", &["x1", "x2"], [0.5, 3.0], &[&["1"], &["0", "x1^2"]], None, None, None, None);
    let c = g.at(&[2.0, 1.0], 2).unwrap().christoffel().unwrap();
    assert!((c[[0, 1, 1]] + 2.0).abs() < 1e-15);
    assert!((c[[1, 0, 1]] - 0.5).abs() < 1e-15);
    let fd = christoffel_fd(&g, &[2.0, 1.0]);
    assert!((fd[3] + 2.0).abs() < 1e-9 && (fd[5] - 0.5).abs() < 1e-9);
}

#[test]
fn metric_is_parallel_on_catalog_and_random_metrics() {
    let mut geoms: Vec<GeometryInstance> = catalog::all_default().unwrap().into_iter().map(|e| e.geometry).collect();
    for dim in 3..=5 {
        for seed in 0..20 {
            geoms.push(random(dim, seed));
        }
    }
    for g in &geoms {
        for p in points(g, 2, 1) {
            let pg = g.at(&p, 2).unwrap();
            let ng = pg.covariant_derivative(pg.metric()).unwrap();
            assert!(ng.values().iter().all(|v| v.abs() < 1e-11), "{}", g.name());
        }
    }
}

#[test]
fn hessian_examples_on_flat_space() {
    let g = flat(3);
    let pg = g.at(&[0.3, -0.2, 0.5], 3).unwrap();
    let c: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
    let half = parse_expr("(x^2+y^2+z^2)/2", &c).unwrap();
    let h = pg.hessian(&half).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert!((h[[i, j]] - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
        }
    }
    let x = parse_expr("x", &c).unwrap();
    assert_eq!(pg.hessian(&x).unwrap().max_abs(), 0.0);
    assert_eq!(pg.laplacian(&x).unwrap(), 0.0);
    assert!((pg.laplacian(&parse_expr("x^2+y^2+z^2", &c).unwrap()).unwrap() - 6.0).abs() < 1e-14);
}

#[test]
fn laplacian_of_log_matches_difference_quotients() {
    let g = geom_on("flat", &["x", "y", "z"], [-2.0, 2.0], &[&["1"], &["0", "1"], &["0", "0", "1"]], None, None, None, None);
    let c: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
    let h = parse_expr("log(1+x^2+y^2+z^2)", &c).unwrap();
    assert!((g.at(&[0.0; 3], 3).unwrap().laplacian(&h).unwrap() - 6.0).abs() < 1e-14);
    let p = [1.0, 0.0, 0.0];
    let got = g.at(&p, 3).unwrap().laplacian(&h).unwrap();
    let f = |q: &[f64]| h.eval_f64(q).unwrap();
    let want: f64 = (0..3)
        .map(|i| {
            let mut a = [0; 3];
            a[i] = 2;
            fd_partial(&f, &p, &a, 0.05)
        })
        .sum();
    assert!((got - want).abs() < 1e-8, "{got} vs {want}");
}

#[test]
fn sphere_hessian_matches_difference_quotients() {
    let e = load("sphere");
    let g = &e.geometry;
    let c = g.spec.coords.clone();
    let f = parse_expr("x*y + sin(z) - 0.5*x^2*z", &c).unwrap();
    let fv = |q: &[f64]| f.eval_f64(q).unwrap();
    for p in points(g, 4, 9) {
        let got = g.at(&p, 3).unwrap().hessian(&f).unwrap();
        let gamma = christoffel_fd(g, &p);
        for i in 0..3 {
            for j in 0..3 {
                let mut a = [0usize; 3];
                a[i] += 1;
                a[j] += 1;
                let want = fd_partial(&fv, &p, &a, 0.05)
                    - (0..3).map(|k| gamma[(k * 3 + i) * 3 + j] * fd_grad(&fv, &p, k)).sum::<f64>();
                assert!((got[[i, j]] - want).abs() < 1e-7, "({i},{j}) {} vs {want}", got[[i, j]]);
            }
        }
    }
}

#[test]
fn hessians_are_symmetric() {
    for dim in 3..=5 {
        let g = random(dim, 3);
        for p in points(&g, 4, 2) {
            let b = CurvatureBundle::new(&g, &p, 3).unwrap();
            let h = b.jets(Quantity::F, 2).unwrap();
            let v = h.values();
            for i in 0..dim {
                for j in 0..dim {
                    assert!((v[i * dim + j] - v[j * dim + i]).abs() < 1e-11 * (1.0 + v[i * dim + j].abs()));
                }
            }
        }
    }
}

#[test]
fn lie_derivative_examples_on_flat_space() {
    let g = flat(3).with_vector_field(Some(
        ["x", "y", "z"].iter().map(|s| parse_expr(s, &["x", "y", "z"].map(String::from)).unwrap()).collect(),
    ));
    let l = g.at(&[0.2, 0.1, -0.3], 2).unwrap().lie_derivative_metric(g.x().unwrap()).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert!((l[[i, j]] - if i == j { 2.0 } else { 0.0 }).abs() < 1e-15);
        }
    }
    let c = ["x", "y", "z"].map(String::from);
    let rot = g.with_vector_field(Some(vec![parse_expr("-y", &c).unwrap(), parse_expr("x", &c).unwrap(), parse_expr("0", &c).unwrap()]));
    let l = rot.at(&[0.2, 0.1, -0.3], 2).unwrap().lie_derivative_metric(rot.x().unwrap()).unwrap();
    assert_eq!(l.max_abs(), 0.0);
}

/// Flow of `X` for time `t` from `p` by one classical Runge–Kutta step.
fn flow(x: &dyn Fn(&[f64]) -> Vec<f64>, p: &[f64], t: f64) -> Vec<f64> {
    let add = |a: &[f64], b: &[f64], s: f64| a.iter().zip(b).map(|(u, v)| u + s * v).collect::<Vec<_>>();
    let k1 = x(p);
    let k2 = x(&add(p, &k1, t / 2.0));
    let k3 = x(&add(p, &k2, t / 2.0));
    let k4 = x(&add(p, &k3, t));
    (0..p.len()).map(|i| p[i] + t / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
}

#[test]
fn lie_derivative_matches_flow_pullback() {
    let g = random(3, 5);
    let xs = g.x().unwrap().to_vec();
    let field = |q: &[f64]| xs.iter().map(|e| e.eval_f64(q).unwrap()).collect::<Vec<f64>>();
    let m = 3;
    let pullback = |p: &[f64], t: f64| -> Vec<Vec<f64>> {
        let h = 1e-4;
        let jac: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                let mut a = p.to_vec();
                let mut b = p.to_vec();
                a[i] += h;
                b[i] -= h;
                let (fa, fb) = (flow(&field, &a, t), flow(&field, &b, t));
                (0..m).map(|k| (fa[k] - fb[k]) / (2.0 * h)).collect()
            })
            .collect();
        let gq = metric_at(&g, &flow(&field, p, t));
        (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        let mut s = 0.0;
                        for a in 0..m {
                            for b in 0..m {
                                s += gq[a][b] * jac[i][a] * jac[j][b];
                            }
                        }
                        s
                    })
                    .collect()
            })
            .collect()
    };
    for p in points(&g, 3, 6) {
        let got = g.at(&p, 2).unwrap().lie_derivative_metric(&xs).unwrap();
        let deriv = |t: f64| {
            let (a, b) = (pullback(&p, t), pullback(&p, -t));
            (0..m).map(|i| (0..m).map(|j| (a[i][j] - b[i][j]) / (2.0 * t)).collect::<Vec<f64>>()).collect::<Vec<_>>()
        };
        let (d1, d2) = (deriv(1e-2), deriv(5e-3));
        for i in 0..m {
            for j in 0..m {
                let want = (4.0 * d2[i][j] - d1[i][j]) / 3.0;
                assert!((got[[i, j]] - want).abs() < 1e-6, "({i},{j}) {} vs {want}", got[[i, j]]);
            }
        }
    }
}

#[test]
fn divergence_is_trace_of_covariant_derivative() {
    let g = random(4, 8);
    let xs = g.x().unwrap().to_vec();
    for p in points(&g, 3, 3) {
        let b = CurvatureBundle::new(&g, &p, 3).unwrap();
        let trace = b.value(Quantity::X, 1).unwrap().trace(0, 1).value();
        let sqrt_det = |q: &[f64]| determinant(&metric_at(&g, q)).sqrt();
        let want: f64 = (0..4)
            .map(|i| {
                let f = |q: &[f64]| sqrt_det(q) * xs[i].eval_f64(q).unwrap();
                fd_grad(&f, &p, i)
            })
            .sum::<f64>()
            / sqrt_det(&p);
        assert!((trace - want).abs() < 1e-7, "{trace} vs {want}");
    }
}

#[test]
fn orthonormal_frame_examples() {
    let g = flat(3);
    let pg = g.at(&[0.1, 0.2, 0.3], 2).unwrap();
    let t = ctl_core::TensorValue::new(vec![0.1, 0.2, 0.3], Frame::Coordinate, 3, 2, 0, (0..9).map(f64::from).collect());
    assert_eq!(pg.to_orthonormal(&t).data, t.data);
    let r = random(4, 2);
    for p in points(&r, 4, 0) {
        let pg = r.at(&p, 2).unwrap();
        let gm = pg.orthonormal(pg.metric(), 2, 0);
        assert_eq!(gm.frame, Frame::Orthonormal);
        for i in 0..4 {
            for j in 0..4 {
                assert!((gm[[i, j]] - if i == j { 1.0 } else { 0.0 }).abs() < 1e-13);
            }
        }
        let back = pg.vielbein().to_coordinate(&pg.to_orthonormal(&pg.value_of(pg.metric(), 2, 0)));
        assert!(max_diff(&back, &pg.value_of(pg.metric(), 2, 0)) < 1e-11);
    }
}

#[test]
fn ricci_norm_is_frame_independent() {
    for dim in 3..=5 {
        let g = random(dim, 12);
        for p in points(&g, 3, 5) {
            let b = CurvatureBundle::new(&g, &p, 2).unwrap();
            let ric = b.jets(Quantity::Ricci, 0).unwrap().values();
            let ginv = b.geometry().inverse_metric().values();
            let mut coord = 0.0;
            for i in 0..dim {
                for j in 0..dim {
                    for a in 0..dim {
                        for c in 0..dim {
                            coord += ginv[i * dim + a] * ginv[j * dim + c] * ric[i * dim + j] * ric[a * dim + c];
                        }
                    }
                }
            }
            let ortho = b.ricci().unwrap().norm_sq();
            assert!((coord - ortho).abs() < 1e-10 * (1.0 + coord.abs()), "{coord} vs {ortho}");
            let s_coord: f64 = (0..dim * dim).map(|k| ginv[k] * ric[k]).sum();
            assert!((s_coord - b.scalar().unwrap()).abs() < 1e-10 * (1.0 + s_coord.abs()));
        }
    }
}

#[test]
fn random_catalog_metric_is_in_band() {
    let e = catalog::load("random", &CatalogParams { dim: Some(5), seed: 3, ..Default::default() }).unwrap();
    for p in points(&e.geometry, 8, 0) {
        let gm = metric_at(&e.geometry, &p);
        assert!((determinant(&gm) - 1.0).abs() < 0.8);
    }
}
