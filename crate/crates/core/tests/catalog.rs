mod common;

use common::*;
use ctl_core::catalog::{self, killing_residual, CatalogParams};
use ctl_core::curvature::CurvatureBundle;
use ctl_core::geometry::{GeometryInstance, GeometrySpec};
use ctl_core::identities::{certify, Structure};
use ctl_core::CtlError;

const NAMES: [&str; 17] = [
    "euclidean",
    "sphere",
    "flat_to_sphere",
    "hyperbolic",
    "cigar_x_line",
    "cigar_x_plane",
    "cigar_x_cigar",
    "cigar_x_cigar_x_line",
    "cigar_killing",
    "s2xs2",
    "s2_x_gaussian",
    "conformal_s2xs2",
    "conformal_gaussian",
    "conformal_cigar",
    "gaussian_plus_killing",
    "conformal_gaussian_plus_killing",
    "random",
];

#[test]
fn every_entry_loads_with_certified_claims() {
    assert_eq!(catalog::names().collect::<Vec<_>>(), NAMES);
    let all = catalog::all_default().unwrap();
    assert_eq!(all.len(), NAMES.len());
    for e in &all {
        for c in &e.claims {
            assert!(c.residual < 1e-9, "{} {}", e.name, c.structure);
            // re-certify on a different grid
            let r = certify(&e.geometry, c.structure, c.lambda, &points(&e.geometry, 5, 99)).unwrap();
            assert!(r < 1e-9, "{} {} on fresh points: {r:e}", e.name, c.structure);
        }
        assert!(!e.note.is_empty());
    }
}

#[test]
fn claims_text() {
    let e = load("cigar_x_line");
    assert_eq!(e.claims_text(), ["gradient_soliton(0)", "generic_soliton(0)"]);
    assert!(load("random").claims.is_empty());
    assert_eq!(load("conformal_s2xs2").claims[0].structure, Structure::ConformallyEinstein);
}

#[test]
fn cigar_products_have_closed_form_scalar_curvature() {
    // the cigar (dx²+dy²)/(1+r²) has Gauss curvature 2/(1+r²)
    let k = |a: f64, b: f64| 2.0 / (1.0 + a * a + b * b);
    for (name, two) in [("cigar_x_line", false), ("cigar_x_plane", false), ("cigar_x_cigar", true), ("cigar_x_cigar_x_line", true)] {
        let g = load(name).geometry;
        for p in points(&g, 4, 3) {
            let s = CurvatureBundle::new(&g, &p, 2).unwrap().scalar().unwrap();
            let want = 2.0 * k(p[0], p[1]) + if two { 2.0 * k(p[2], p[3]) } else { 0.0 };
            assert!((s - want).abs() < 1e-12, "{name}: {s} vs {want}");
        }
    }
}

#[test]
fn space_forms_and_products() {
    let h = load("hyperbolic").geometry;
    let s2 = load("s2xs2").geometry;
    for p in points(&h, 3, 1) {
        assert!((CurvatureBundle::new(&h, &p, 2).unwrap().scalar().unwrap() + 6.0).abs() < 1e-10);
    }
    for p in points(&s2, 3, 1) {
        let ric = CurvatureBundle::new(&s2, &p, 2).unwrap().ricci().unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((ric[[i, j]] - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }
    let big = load_with("sphere", CatalogParams { dim: Some(4), radius: Some(2.0), ..Default::default() });
    assert_eq!(big.claims[0].lambda, 0.75);
}

#[test]
fn conformal_entries_rescale_to_their_models() {
    for seed in 1..=3 {
        let e = load_with("conformal_s2xs2", CatalogParams { seed, ..Default::default() });
        let t = e.geometry.conformal_rescale(e.geometry.u().unwrap(), "t");
        for p in points(&t, 3, seed) {
            let g = t.metric_values(&p).unwrap();
            let s2 = |a: f64, b: f64| 4.0 / (1.0 + a * a + b * b).powi(2);
            let want = [s2(p[0], p[1]), s2(p[0], p[1]), s2(p[2], p[3]), s2(p[2], p[3])];
            for i in 0..4 {
                assert!((g[i * 4 + i] - want[i]).abs() < 1e-12 * want[i]);
            }
        }
    }
    let a = load_with("conformal_s2xs2", CatalogParams { seed: 1, ..Default::default() });
    let b = load_with("conformal_s2xs2", CatalogParams { seed: 2, ..Default::default() });
    assert_ne!(a.spec().u, b.spec().u);

    let fs = load("flat_to_sphere").geometry;
    let t = fs.conformal_rescale(fs.u().unwrap(), "t");
    for p in points(&t, 3, 0) {
        assert!((CurvatureBundle::new(&t, &p, 2).unwrap().scalar().unwrap() - 6.0).abs() < 1e-10);
    }
}

#[test]
fn killing_parts() {
    for name in ["gaussian_plus_killing", "cigar_killing", "s2_x_gaussian", "cigar_x_line"] {
        let g = load(name).geometry;
        let r = killing_residual(&g, &points(&g, 8, 4)).unwrap();
        assert!(r < 1e-11, "{name}: {r:e}");
    }
    // a generic X is not a gradient plus a Killing field
    let r = random(3, 1);
    assert!(killing_residual(&r, &points(&r, 4, 4)).unwrap() > 1e-3);
}

#[test]
fn export_round_trips() {
    for name in NAMES {
        let e = load(name);
        let spec = GeometrySpec::from_json(&e.export()).unwrap();
        assert_eq!(&spec, e.spec());
        let g = GeometryInstance::new(spec).unwrap();
        assert_eq!(g.hash(), e.geometry.hash());
    }
}

#[test]
fn bad_requests_fail_cleanly() {
    assert!(matches!(catalog::load("torus", &CatalogParams::default()), Err(CtlError::Unknown { .. })));
    assert_eq!(load("CIGAR_X_LINE").name, "cigar_x_line");
    let loud = CatalogParams { eps: Some(3.0), ..Default::default() };
    assert!(matches!(catalog::load("random", &loud), Err(CtlError::Certification { .. })));
    let wrong_dim = CatalogParams { dim: Some(3), ..Default::default() };
    assert!(matches!(catalog::load("s2xs2", &wrong_dim), Err(CtlError::Config(_))));
    let neg = CatalogParams { radius: Some(-1.0), ..Default::default() };
    assert!(matches!(catalog::load("sphere", &neg), Err(CtlError::Config(_))));
}

#[test]
fn random_entries_depend_on_the_seed_only() {
    let a = random(4, 11);
    assert_eq!(a.spec, random(4, 11).spec);
    assert_ne!(a.spec, random(4, 12).spec);
    assert_eq!(a.dim(), 4);
}
