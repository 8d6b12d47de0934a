mod common;

use common::*;
use ctl_core::catalog::CatalogParams;
use ctl_core::curvature::{delta, kulkarni_nomizu, CottonRoute, CurvatureBundle, DForm, DufForm, Quantity};
use ctl_core::geometry::GeometryInstance;
use ctl_core::{parse_expr, CtlError, TensorValue};

fn bundle(g: &GeometryInstance, p: &[f64]) -> CurvatureBundle {
    CurvatureBundle::new(g, p, 6).unwrap()
}

fn geoms_3_to_5(seeds: std::ops::Range<u64>) -> Vec<GeometryInstance> {
    (3..=5).flat_map(|d| seeds.clone().map(move |s| random(d, s))).collect()
}

fn assert_small(t: &TensorValue, tol: f64, what: &str) {
    assert!(t.max_abs() < tol, "{what}: {:e}", t.max_abs());
}

#[test]
fn curvature_of_polynomial_metric_matches_symbolic_values() {
    // exact values from an independent symbolic computation of Γ, R, Ric, S
    let g = geom(
        "poly3",
        &["x", "y", "z"],
        &[&["1+0.2*x*y+0.1*z^2"], &["0.1*x*z", "1+0.15*sin(y)"], &["0.05*y", "0.1*x", "1+0.2*x^2"]],
        None,
        None,
        None,
        None,
    );
    let p = [0.3, -0.2, 0.1];
    let b = bundle(&g, &p);
    assert!((b.scalar().unwrap() - (-0.58282314449191612199)).abs() < 1e-13);
    let want = [
        [-0.28821775890143631866, 0.0011065848924783234960, -0.000099074725503708111155],
        [0.0011065848924783234960, 0.0060627116835244471624, 0.054163694971924072818],
        [-0.000099074725503708111155, 0.054163694971924072818, -0.29930982016375516606],
    ];
    let ric = b.jets(Quantity::Ricci, 0).unwrap().values();
    for i in 0..3 {
        for j in 0..3 {
            assert!((ric[i * 3 + j] - want[i][j]).abs() < 1e-13, "Ric[{i}][{j}] = {}", ric[i * 3 + j]);
        }
    }
}

#[test]
fn flat_space_has_no_curvature() {
    for m in 3..=5 {
        let b = bundle(&flat(m), &vec![0.1; m]);
        for q in [Quantity::Riemann, Quantity::Ricci, Quantity::Schouten, Quantity::Weyl, Quantity::Cotton, Quantity::Bach, Quantity::Einstein] {
            assert_small(&b.value(q, 0).unwrap(), 1e-12, q.name());
        }
        assert_eq!(b.scalar().unwrap(), 0.0);
    }
}

#[test]
fn space_form_values() {
    let s3 = load("sphere");
    let h3 = load("hyperbolic");
    let s4 = load_with("sphere", CatalogParams { dim: Some(4), radius: Some(1.0), ..Default::default() });
    for p in points(&s3.geometry, 4, 1) {
        let b = bundle(&s3.geometry, &p);
        assert!((b.scalar().unwrap() - 6.0).abs() < 1e-10);
        let a = b.schouten().unwrap();
        assert!(max_diff(&a, &delta(3).scaled(0.5)) < 1e-10);
        assert_small(&b.cotton(CottonRoute::Schouten).unwrap(), 1e-9, "cotton");
        assert_small(&b.bach().unwrap(), 1e-8, "bach");
    }
    for p in points(&h3.geometry, 4, 1) {
        assert!((bundle(&h3.geometry, &p).scalar().unwrap() + 6.0).abs() < 1e-10);
    }
    for p in points(&s4.geometry, 4, 1) {
        let b = bundle(&s4.geometry, &p);
        assert!(max_diff(&b.ricci().unwrap(), &delta(4).scaled(3.0)) < 1e-10);
    }
}

#[test]
fn riemann_symmetries_and_first_bianchi() {
    for g in geoms_3_to_5(0..3) {
        let m = g.dim();
        for p in points(&g, 2, 7) {
            let r = bundle(&g, &p).riemann().unwrap();
            let tol = 1e-10 * (1.0 + r.max_abs());
            assert!(r.symmetry_defect(&[1, 0, 2, 3], -1.0) < tol);
            assert!(r.symmetry_defect(&[0, 1, 3, 2], -1.0) < tol);
            assert!(r.symmetry_defect(&[2, 3, 0, 1], 1.0) < tol);
            for i in 0..m {
                for j in 0..m {
                    for k in 0..m {
                        for t in 0..m {
                            let s = r[[i, j, k, t]] + r[[i, k, t, j]] + r[[i, t, j, k]];
                            assert!(s.abs() < tol);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn ricci_schouten_and_traces() {
    for g in geoms_3_to_5(0..3) {
        let m = g.dim() as f64;
        for p in points(&g, 2, 3) {
            let b = bundle(&g, &p);
            let s = b.scalar().unwrap();
            assert!(b.ricci().unwrap().symmetry_defect(&[1, 0], 1.0) < 1e-12);
            assert!((b.ricci().unwrap().trace(0, 1).value() - s).abs() < 1e-12);
            let a_tr = b.schouten().unwrap().trace(0, 1).value();
            assert!((a_tr - (m - 2.0) / (2.0 * (m - 1.0)) * s).abs() < 1e-10);
        }
    }
}

#[test]
fn weyl_properties() {
    for g in geoms_3_to_5(0..3) {
        let m = g.dim();
        for p in points(&g, 2, 5) {
            let b = bundle(&g, &p);
            let w = b.weyl().unwrap();
            if m == 3 {
                assert_small(&w, 1e-10, "weyl in m=3");
                continue;
            }
            for (a, c) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
                assert_small(&w.trace(a, c), 1e-10, "weyl trace");
            }
            let kn = kulkarni_nomizu(&b.schouten().unwrap(), &delta(m)).unwrap();
            let r = b.riemann().unwrap();
            let closure = TensorValue::build(m, 4, |ix| r.get(ix) - w.get(ix) - kn.get(ix) / (m as f64 - 2.0));
            assert_small(&closure, 1e-9, "decomposition");
            let via_ricci = ctl_core::curvature::weyl_from_ricci(&r, &b.ricci().unwrap(), b.scalar().unwrap()).unwrap();
            assert!(max_diff(&via_ricci, &w) < 1e-11);
        }
    }
    let s = load("s2xs2");
    for p in points(&s.geometry, 3, 0) {
        let w = bundle(&s.geometry, &p).weyl().unwrap();
        assert!(w.max_abs() > 0.1);
        assert_small(&w.trace(0, 2), 1e-10, "s2xs2 weyl trace");
    }
}

#[test]
fn conformally_flat_metric_has_no_weyl() {
    let e = "exp(2*(0.3*x*y - 0.2*sin(z) + 0.1*w^2))";
    let g = geom(
        "cflat4",
        &["x", "y", "z", "w"],
        &[&[e], &["0", e], &["0", "0", e], &["0", "0", "0", e]],
        None,
        None,
        None,
        None,
    );
    for p in points(&g, 3, 2) {
        let b = bundle(&g, &p);
        assert!(b.riemann().unwrap().max_abs() > 1e-2);
        assert_small(&b.weyl().unwrap(), 1e-10, "weyl");
    }
}

#[test]
fn kulkarni_nomizu_reproduces_riemann_minus_weyl_on_sphere() {
    let s = load("sphere");
    let p = &points(&s.geometry, 1, 0)[0];
    let b = bundle(&s.geometry, p);
    let kn = kulkarni_nomizu(&b.schouten().unwrap(), &delta(3)).unwrap();
    let r = b.riemann().unwrap();
    assert!(max_diff(&kn, &r) < 1e-10);
    assert!(kn.symmetry_defect(&[1, 0, 2, 3], -1.0) < 1e-15 && kn.symmetry_defect(&[2, 3, 0, 1], 1.0) < 1e-15);
}

#[test]
fn cotton_properties_and_routes() {
    for g in geoms_3_to_5(0..3) {
        let m = g.dim();
        for p in points(&g, 2, 11) {
            let b = bundle(&g, &p);
            let c = b.cotton(CottonRoute::Schouten).unwrap();
            assert!(c.max_abs() > 1e-4);
            assert!(c.symmetry_defect(&[0, 2, 1], -1.0) < 1e-9);
            for (a, d) in [(0, 1), (0, 2), (1, 2)] {
                assert_small(&c.trace(a, d), 1e-9, "cotton trace");
            }
            if m >= 4 {
                let cw = b.cotton(CottonRoute::WeylDivergence).unwrap();
                assert!(max_diff(&c, &cw) < 1e-8, "routes differ by {:e}", max_diff(&c, &cw));
            } else {
                assert!(matches!(b.cotton(CottonRoute::WeylDivergence), Err(CtlError::DimensionTooSmall { .. })));
            }
        }
    }
}

#[test]
fn bach_properties() {
    for g in geoms_3_to_5(0..2) {
        let m = g.dim();
        for p in points(&g, 2, 13) {
            let b = bundle(&g, &p);
            let bach = b.bach().unwrap();
            assert!(bach.symmetry_defect(&[1, 0], 1.0) < 1e-8);
            assert!(bach.trace(0, 1).value().abs() < 1e-9);
            if m >= 4 {
                assert!(max_diff(&bach, &b.value(Quantity::BachWeyl, 0).unwrap()) < 1e-7);
            }
        }
    }
}

#[test]
fn d_tensor_forms() {
    let cig = load("cigar_x_line");
    for p in points(&cig.geometry, 4, 2) {
        let b = bundle(&cig.geometry, &p);
        let d1 = b.d_tensor(DForm::One).unwrap();
        assert!(d1.max_abs() > 1e-3);
        assert!(d1.symmetry_defect(&[0, 2, 1], -1.0) < 1e-12);
        assert_small(&d1.trace(0, 1), 1e-10, "D trace");
        assert_small(&d1.trace(0, 2), 1e-10, "D trace");
        for form in [DForm::Two, DForm::Three, DForm::Four] {
            assert!(max_diff(&d1, &b.d_tensor(form).unwrap()) < 1e-8, "{form:?}");
        }
    }
    let gauss = load("euclidean");
    let b = bundle(&gauss.geometry, &[0.2, -0.1, 0.4]);
    assert_small(&b.d_tensor(DForm::One).unwrap(), 1e-14, "gaussian D");
    let r = random(4, 1);
    let konst = r.with_conformal_factor(None);
    let mut spec = konst.spec.clone();
    spec.f = Some("2.5".into());
    let konst = GeometryInstance::new(spec).unwrap();
    assert_small(&bundle(&konst, &[0.1, 0.2, 0.3, 0.1]).d_tensor(DForm::One).unwrap(), 1e-14, "constant f");
}

#[test]
fn dx_on_flat_space_matches_symbolic_values() {
    let c = ["x", "y", "z"].map(String::from);
    let xs = ["y^2*z", "sin(x)", "x*y*z"].iter().map(|s| parse_expr(s, &c).unwrap()).collect();
    let g = flat(3).with_vector_field(Some(xs));
    let dx = bundle(&g, &[0.3, -0.2, 0.1]).dx_tensor().unwrap();
    let nonzero = [
        ([0, 0, 1], 0.0011199483346651062237),
        ([0, 1, 0], -0.0011199483346651062237),
        ([0, 1, 2], 0.05),
        ([0, 2, 1], -0.05),
        ([1, 0, 2], 0.25),
        ([1, 2, 0], -0.25),
        ([2, 0, 1], 0.2),
        ([2, 1, 0], -0.2),
        ([2, 1, 2], 0.0011199483346651062237),
        ([2, 2, 1], -0.0011199483346651062237),
    ];
    let want = TensorValue::build(3, 3, |ix| nonzero.iter().find(|(k, _)| k == ix).map_or(0.0, |(_, v)| *v));
    assert!(max_diff(&dx, &want) < 1e-9, "{:e}", max_diff(&dx, &want));
    let rot = flat(3).with_vector_field(Some(["-y", "x", "0"].iter().map(|s| parse_expr(s, &c).unwrap()).collect()));
    assert_small(&bundle(&rot, &[0.3, -0.2, 0.1]).dx_tensor().unwrap(), 1e-15, "rotation");
}

fn gradient_field(g: &GeometryInstance, grad: &[&str]) -> GeometryInstance {
    let c = g.spec.coords.clone();
    g.with_vector_field(Some(grad.iter().map(|s| parse_expr(s, &c).unwrap()).collect()))
}

#[test]
fn dx_of_gradient_is_d() {
    let cig = load("cigar_x_line").geometry;
    let g = gradient_field(&cig, &["-2*x", "-2*y", "0"]);
    for p in points(&g, 3, 1) {
        let b = bundle(&g, &p);
        assert!(max_diff(&b.dx_tensor().unwrap(), &b.d_tensor(DForm::One).unwrap()) < 1e-9);
    }
    let r = random(4, 4);
    let zero = gradient_field(&r, &["0", "0", "0", "0"]);
    assert_small(&bundle(&zero, &[0.1, 0.0, -0.2, 0.3]).dx_tensor().unwrap(), 1e-15, "X = 0");
}

#[test]
fn conformal_d_tensors_degenerate() {
    let r = random(4, 6);
    let c = r.spec.coords.clone();
    let zero_u = r.with_conformal_factor(Some(parse_expr("0", &c).unwrap()));
    for p in points(&r, 3, 2) {
        let b = bundle(&zero_u, &p);
        assert!(max_diff(&b.duf_tensor(DufForm::Best).unwrap(), &b.d_tensor(DForm::One).unwrap()) < 1e-9);
        assert!(max_diff(&b.dux_tensor().unwrap(), &b.dx_tensor().unwrap()) < 1e-9);
    }
    let mut spec = r.spec.clone();
    spec.f = Some("-1.5".into());
    spec.x = Some(vec!["0".into(); 4]);
    let flat_fields = GeometryInstance::new(spec).unwrap();
    for p in points(&r, 3, 2) {
        let b = bundle(&flat_fields, &p);
        assert_small(&b.duf_tensor(DufForm::Best).unwrap(), 1e-9, "f constant");
        assert_small(&b.dux_tensor().unwrap(), 1e-9, "X = 0");
    }
}

#[test]
fn duf_is_rescaled_d_of_the_tilde_metric() {
    for name in ["conformal_gaussian", "conformal_cigar"] {
        let e = load(name);
        let g = &e.geometry;
        let tilde = g.conformal_rescale(g.u().unwrap(), "tilde");
        for p in points(g, 4, 3) {
            let duf = bundle(g, &p).duf_tensor(DufForm::Best).unwrap();
            let d = bundle(&tilde, &p).d_tensor(DForm::One).unwrap();
            let u = g.u().unwrap().eval_f64(&p).unwrap();
            assert!(max_diff(&duf, &d.scaled((3.0 * u).exp())) < 1e-7 * (1.0 + duf.max_abs()), "{name}");
            assert!(max_diff(&duf, &bundle(g, &p).duf_tensor(DufForm::Alt).unwrap()) < 1e-7, "{name} alt form");
        }
    }
}

#[test]
fn einstein_tensor_is_ricci_minus_half_scalar() {
    let g = random(4, 9);
    for p in points(&g, 2, 0) {
        let b = bundle(&g, &p);
        let s = b.scalar().unwrap();
        let want = TensorValue::build(4, 2, |ix| b.ricci().unwrap().get(ix) - 0.5 * s * delta(4).get(ix));
        assert!(max_diff(&b.einstein().unwrap(), &want) < 1e-12);
    }
}
