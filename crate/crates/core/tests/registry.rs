mod common;

use common::*;
use ctl_core::identities::{self, find, list_identities, registry, Family, Filter, SolitonData, Status, VerifyConfig};
use ctl_core::identities::{soliton_residual, Flavor};
use std::collections::BTreeSet;

const COMM_IDS: [&str; 39] = [
    "comm.f_sym",
    "comm.f_third_sym",
    "comm.f_third_riem",
    "comm.f_third_weyl",
    "comm.f_third_schouten",
    "comm.f_fourth_riem",
    "comm.f_third_in_fourth",
    "comm.f_12_34",
    "comm.f_traced_third",
    "comm.f_traced_fourth",
    "comm.f_traced_fourth_v2",
    "comm.x_third",
    "comm.x_fourth_inner",
    "comm.x_fourth_outer",
    "comm.bianchi_first",
    "comm.bianchi_second",
    "comm.riem_second",
    "comm.riem_third",
    "comm.ricci_first",
    "comm.ricci_second",
    "comm.ricci_third",
    "comm.schur",
    "comm.ricci_div",
    "comm.schouten_first",
    "comm.schouten_second",
    "comm.schouten_third",
    "comm.weyl_bianchi_first",
    "comm.weyl_fake_bianchi",
    "comm.weyl_second",
    "comm.weyl_third",
    "comm.weyl_second_expanded",
    "comm.weyl_second_traced",
    "comm.weyl_third_expanded",
    "comm.cotton_cyclic",
    "comm.cotton_derivative",
    "comm.cotton_div",
    "comm.cotton_div_sym",
    "comm.cotton_null_div",
    "comm.bach_div",
];

fn ids(f: &Filter) -> Vec<String> {
    list_identities(f).into_iter().map(|e| e.id).collect()
}

#[test]
fn family_sizes_and_membership() {
    assert_eq!(registry().len(), 99);
    assert_eq!(ids(&Filter::family(Family::COMM)), COMM_IDS);
    let sizes: Vec<usize> = Family::ALL.iter().map(|&f| ids(&Filter::family(f)).len()).collect();
    assert_eq!(sizes, [39, 21, 11, 14, 3, 7, 4]);
    assert_eq!(ids(&Filter::family(Family::HIGH)), ["high.third_1", "high.third_2", "high.fourth_1", "high.fourth_2"]);
}

#[test]
fn ids_unique_and_labelled() {
    let mut seen = BTreeSet::new();
    for r in registry() {
        assert!(seen.insert(r.id), "duplicate {}", r.id);
        assert!(!r.anchor.trim().is_empty() && !r.paper_eq.trim().is_empty(), "{}", r.id);
        let prefix = r.family.name().to_lowercase();
        assert!(r.id.starts_with(&format!("{prefix}.")), "{}", r.id);
    }
    assert_eq!(registry()[0].anchor, r"If $f\in C^{\infty}(M)$ then");
}

#[test]
fn requirement_filters() {
    let with_f = Filter { requires_f: Some(true), ..Filter::default() };
    let listed = list_identities(&with_f);
    assert!(!listed.is_empty());
    assert!(listed.iter().all(|e| e.requires.f && e.family != Family::CE));
    let with_u = ids(&Filter { requires_u: Some(true), ..Filter::default() });
    assert!(with_u.iter().all(|id| !id.starts_with("comm.")));
    for fam in [Family::CE, Family::CGRS, Family::CGERS] {
        assert!(list_identities(&Filter::family(fam)).iter().all(|e| e.requires.u), "{fam}");
    }
    let x_only = list_identities(&Filter { requires_x: Some(true), requires_f: Some(false), ..Filter::default() });
    assert!(x_only.iter().any(|e| e.id == "comm.x_third"));
    let high = list_identities(&Filter::family(Family::HIGH));
    assert!(high.iter().all(|e| e.requires.lambda && e.requires.min_dim >= 4));
}

#[test]
fn lookup_is_case_insensitive() {
    assert_eq!(find("COMM.Schur").unwrap().id, "comm.schur");
    assert_eq!(find(" sol.eq1 ").unwrap().id, "sol.eq1");
    assert!(find("comm.nothing").is_err());
    assert!(identities::select(&[], &["comm.nothing".into()]).is_err());
}

#[test]
fn registry_dump_round_trips_through_json() {
    let all = list_identities(&Filter::default());
    let text = serde_json::to_string(&all).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let first = &v[0];
    for key in ["id", "family", "paper_eq", "anchor", "requires", "tol_class"] {
        assert!(first.get(key).is_some(), "{key}");
    }
    for key in ["u", "f", "X", "lambda", "min_dim", "min_jet_order"] {
        assert!(first["requires"].get(key).is_some(), "{key}");
    }
    let back: Vec<identities::RegistryEntry> = serde_json::from_str(&text).unwrap();
    assert_eq!(back, all);
}

#[test]
fn skip_reasons() {
    let cfg = VerifyConfig { points: 2, ..VerifyConfig::default() };
    let sphere = load("sphere").geometry;
    let rep = run(&sphere, &[Family::SOL, Family::CE, Family::GRS], &[], &cfg);
    assert_eq!(rep.row("sol.eq1g").unwrap().reason.as_deref(), Some("no f"));
    assert_eq!(rep.row("ce.first").unwrap().reason.as_deref(), Some("no u"));
    assert_eq!(rep.row("grs.first").unwrap().status, Status::Pass);
    assert_eq!(rep.row("sol.eq1").unwrap().status, Status::Pass);
    assert!(rep.passed());

    let rep = run(&random(4, 1), &[Family::HIGH], &[], &cfg);
    assert_eq!(rep.row("high.third_1").unwrap().reason.as_deref(), Some("no lambda"));
    let mut spec = random(4, 1).spec.clone();
    spec.lambda = Some(0.5);
    let rep = run(&ctl_core::GeometryInstance::new(spec).unwrap(), &[Family::HIGH], &[], &cfg);
    assert_eq!(rep.certifications.len(), 1);
    assert!(!rep.certifications[0].certified);
    let row = rep.row("high.third_1").unwrap();
    assert_eq!(row.status, Status::Skipped);
    assert!(row.reason.as_deref().unwrap().starts_with("hypothesis unmet: gradient_soliton residual"));
    assert!(row.max_residual.is_none());

    let rep = run(&random(3, 1), &[Family::HIGH], &["comm.schouten_first"], &cfg);
    assert_eq!(rep.row("high.third_1").unwrap().reason.as_deref(), Some("no lambda"));
    assert_eq!(rep.row("comm.schouten_first").unwrap().reason.as_deref(), Some("requires m >= 4"));
}

#[test]
fn hamilton_identity_on_the_gaussian() {
    let cfg = VerifyConfig::default();
    let rep = run(&load("euclidean").geometry, &[], &["sol.hamilton"], &cfg);
    let row = rep.row("sol.hamilton").unwrap();
    assert_eq!(row.status, Status::Pass);
    assert!(row.max_residual.unwrap() < 1e-9);
}

#[test]
fn soliton_residual_examples() {
    let e = load("euclidean").geometry;
    let grad = SolitonData { lambda: 1.0, flavor: Flavor::Gradient, conformal: false };
    let wrong = SolitonData { lambda: 2.0, ..grad };
    for p in points(&e, 4, 9) {
        assert!(soliton_residual(&e, &grad, &p).unwrap().max_abs() < 1e-13);
        // Hess(|x|²/2) = δ, so the wrong constant leaves exactly −δ
        let r = soliton_residual(&e, &wrong, &p).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { -1.0 } else { 0.0 };
                assert!((r[[i, j]] - want).abs() < 1e-13);
            }
        }
    }
    let s = load("sphere").geometry;
    let generic = SolitonData { lambda: 2.0, flavor: Flavor::Generic, conformal: false };
    assert!(soliton_residual(&s, &generic, &points(&s, 1, 0)[0]).unwrap().max_abs() < 1e-12);
    assert!(soliton_residual(&s, &grad, &points(&s, 1, 0)[0]).is_err());
}

#[test]
fn reports_are_deterministic() {
    let g = random(4, 5);
    let cfg = VerifyConfig { points: 3, seed: 7, ..VerifyConfig::default() };
    let a = run(&g, &[Family::COMM], &[], &cfg).to_json();
    let b = run(&random(4, 5), &[Family::COMM], &[], &cfg).to_json();
    assert_eq!(a, b);
    let other = run(&g, &[Family::COMM], &[], &VerifyConfig { seed: 8, ..cfg }).to_json();
    assert_ne!(a, other);
}

#[test]
fn third_condition_follows_from_first_and_bach_divergence() {
    // defect(third_2) = defect(bach_div) + (m−4)/(m−2)² defect(third_1) on any metric
    for (m, seed) in [(4, 2), (5, 3), (6, 4)] {
        let mut spec = random(m, seed).spec.clone();
        spec.lambda = Some(0.4);
        let g = ctl_core::geometry::GeometryInstance::new(spec).unwrap();
        let k = (m as f64 - 4.0) / ((m as f64 - 2.0) * (m as f64 - 2.0));
        for p in points(&g, 2, 1) {
            let t1 = defect(&g, "high.third_1", &p, 6);
            let t2 = defect(&g, "high.third_2", &p, 6);
            let bd = defect(&g, "comm.bach_div", &p, 6);
            assert!(t1.max_abs() > 1e-4, "m={m}: third_1 defect should be generic");
            let gap = (0..m).map(|i| (t2[[i]] - bd[[i]] - k * t1[[i]]).abs()).fold(0.0, f64::max);
            assert!(gap < 1e-8 * (1.0 + t2.max_abs()), "m={m}: {gap:e}");
        }
    }
    // on a soliton each condition holds on its own
    let cfg = VerifyConfig { points: 4, ..VerifyConfig::default() };
    let rep = run(&load("cigar_x_cigar_x_line").geometry, &[Family::HIGH], &["comm.bach_div"], &cfg);
    let r = |id: &str| rep.row(id).unwrap().max_residual.unwrap();
    assert!((r("high.third_2") - r("high.third_1").max(r("comm.bach_div"))).abs() < 1e-8);
    assert!(rep.passed(), "{}", rep.to_table());
}
