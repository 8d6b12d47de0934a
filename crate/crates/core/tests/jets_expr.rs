mod common;

use common::{fd1, fd_partial};
use ctl_core::expr::{BinOp, Func};
use ctl_core::jets::{jet_arith, jet_func, jet_lift, ArithKind, JetFn};
use ctl_core::{parse_expr, Expr, Jet};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn coords(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

fn jet_from(dim: usize, order: usize, raw: &[f64]) -> Jet {
    let n = ctl_core::jets::coefficient_count(dim, order);
    Jet::from_coeffs(dim, order, raw[..n].to_vec()).unwrap()
}

fn close(a: &Jet, b: &Jet, tol: f64) -> bool {
    a.coeffs().iter().zip(b.coeffs()).all(|(x, y)| (x - y).abs() <= tol)
}

const N2: usize = 15; // dim 2, order 4

proptest! {
    #[test]
    fn ring_axioms(a in prop::collection::vec(-1.0f64..1.0, N2),
                   b in prop::collection::vec(-1.0f64..1.0, N2),
                   c in prop::collection::vec(-1.0f64..1.0, N2)) {
        let (a, b, c) = (jet_from(2, 4, &a), jet_from(2, 4, &b), jet_from(2, 4, &c));
        let add = |x: &Jet, y: &Jet| jet_arith(x, y, ArithKind::Add).unwrap();
        let mul = |x: &Jet, y: &Jet| jet_arith(x, y, ArithKind::Mul).unwrap();
        prop_assert!(close(&add(&a, &b), &add(&b, &a), 1e-13));
        prop_assert!(close(&mul(&a, &b), &mul(&b, &a), 1e-13));
        prop_assert!(close(&add(&add(&a, &b), &c), &add(&a, &add(&b, &c)), 1e-13));
        prop_assert!(close(&mul(&mul(&a, &b), &c), &mul(&a, &mul(&b, &c)), 1e-13));
        prop_assert!(close(&mul(&a, &add(&b, &c)), &add(&mul(&a, &b), &mul(&a, &c)), 1e-13));
    }

    #[test]
    fn product_is_truncated_convolution(a in prop::collection::vec(-1.0f64..1.0, 35),
                                        b in prop::collection::vec(-1.0f64..1.0, 35)) {
        let (a, b) = (jet_from(3, 4, &a), jet_from(3, 4, &b));
        let p = jet_arith(&a, &b, ArithKind::Mul).unwrap();
        let idx: Vec<Vec<usize>> = a.multi_indices().collect();
        for alpha in &idx {
            let mut want = 0.0;
            for beta in &idx {
                if beta.iter().zip(alpha).all(|(x, y)| x <= y) {
                    let rest: Vec<usize> = alpha.iter().zip(beta).map(|(x, y)| x - y).collect();
                    want += a.coeff(beta) * b.coeff(&rest);
                }
            }
            prop_assert!((p.coeff(alpha) - want).abs() <= 1e-15 * 35.0, "{alpha:?}");
        }
    }

    #[test]
    fn division_inverts_product(a in prop::collection::vec(-1.0f64..1.0, N2),
                                b in prop::collection::vec(-1.0f64..1.0, N2)) {
        let a = jet_from(2, 4, &a);
        let mut b = b;
        b[0] = 2.0 + b[0].abs();
        let b = jet_from(2, 4, &b);
        let q = jet_arith(&jet_arith(&a, &b, ArithKind::Mul).unwrap(), &b, ArithKind::Div).unwrap();
        prop_assert!(close(&q, &a, 1e-12));
    }

    #[test]
    fn order_zero_matches_plain_evaluation(e in arb_expr(), p in prop::collection::vec(-0.9f64..0.9, 3)) {
        if let Ok(v) = e.eval_f64(&p) {
            if v.is_finite() && v.abs() < 1e12 {
                let j = e.eval_jet(&p, 0).unwrap();
                prop_assert!((j.value() - v).abs() <= 1e-15 * (1.0 + v.abs()));
            }
        }
    }
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![(-5.0f64..5.0).prop_map(|v| Expr::Num((v * 1e3).round() / 1e3)), (0usize..3).prop_map(Expr::Var)];
    leaf.prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (inner.clone(), inner.clone(), 0usize..4).prop_map(|(a, b, k)| {
                let op = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div][k];
                Expr::Bin(op, Box::new(a), Box::new(b))
            }),
            (inner.clone(), -3i32..4).prop_map(|(e, r)| Expr::Pow(Box::new(e), r as f64)),
            (inner, 0usize..7).prop_map(|(e, k)| {
                let f = [Func::Exp, Func::Log, Func::Sin, Func::Cos, Func::Sinh, Func::Cosh, Func::Sqrt][k];
                Expr::Call(f, Box::new(e))
            }),
        ]
    })
}

#[test]
fn render_then_parse_is_identity_on_random_trees() {
    let names = coords(3);
    let mut runner = proptest::test_runner::TestRunner::new(proptest::test_runner::Config {
        cases: 50,
        rng_algorithm: proptest::test_runner::RngAlgorithm::ChaCha,
        failure_persistence: None,
        ..Default::default()
    });
    runner
        .run(&arb_expr(), |e| {
            let text = e.render(&names);
            let back = parse_expr(&text, &names).unwrap();
            prop_assert_eq!(back, e, "{}", text);
            Ok(())
        })
        .unwrap();
}

#[test]
fn lift_examples() {
    let c = jet_lift(3.0, None, 2, 2).unwrap();
    assert_eq!(c.coeffs()[0], 3.0);
    assert!(c.coeffs()[1..].iter().all(|&v| v == 0.0));
    let x = jet_lift(0.5, Some(0), 2, 2).unwrap();
    assert_eq!(x.value(), 0.5);
    assert_eq!(x.coeff(&[1, 0]), 1.0);
    assert_eq!(x.coeff(&[0, 1]), 0.0);
    assert!(jet_lift(1.0, Some(3), 2, 2).is_err());
}

#[test]
fn square_matches_difference_quotients() {
    let x = jet_lift(0.3, Some(0), 1, 2).unwrap();
    let sq = jet_arith(&x, &x, ArithKind::Mul).unwrap();
    let h = |t: f64| t * t;
    assert!((sq.value() - fd1(&h, 0.3, 0, 0.1)).abs() < 1e-15);
    assert!((sq.coeff(&[1]) - fd1(&h, 0.3, 1, 0.1)).abs() < 1e-10);
    assert!((sq.coeff(&[2]) - fd1(&h, 0.3, 2, 0.1) / 2.0).abs() < 1e-8);
    assert!((sq.value() - 0.09).abs() < 1e-15 && (sq.coeff(&[1]) - 0.6).abs() < 1e-15 && sq.coeff(&[2]) == 1.0);
}

#[test]
fn sine_matches_difference_quotients() {
    let x = jet_lift(0.7, Some(0), 1, 4).unwrap();
    let s = jet_func(&x, JetFn::Sin).unwrap();
    for k in 0..=4 {
        let fd = fd1(&f64::sin, 0.7, k, 0.05);
        assert!((s.derivative(&[k]) - fd).abs() < 1e-7, "order {k}: {} vs {fd}", s.derivative(&[k]));
    }
}

#[test]
fn exp_log_pair() {
    let x = jet_lift(0.0, Some(0), 1, 3).unwrap();
    let e = jet_func(&x, JetFn::Exp).unwrap();
    let want = [1.0, 1.0, 0.5, 1.0 / 6.0];
    for (k, w) in want.iter().enumerate() {
        assert!((e.coeff(&[k]) - w).abs() < 1e-15);
    }
    let a = parse_expr("0.3 + x1*x2 - sin(x2)", &coords(2)).unwrap().eval_jet(&[0.4, -0.2], 6).unwrap();
    let back = jet_func(&jet_func(&a, JetFn::Exp).unwrap(), JetFn::Log).unwrap();
    assert!(close(&back, &a, 1e-13));
}

#[test]
fn product_of_sine_and_exp_matches_difference_quotients() {
    let names = coords(2);
    let e = parse_expr("sin(x1)*exp(x2)", &names).unwrap();
    let p = [0.3, 0.1];
    let j = e.eval_jet(&p, 4).unwrap();
    let f = |q: &[f64]| e.eval_f64(q).unwrap();
    for alpha in j.multi_indices() {
        let fd = fd_partial(&f, &p, &alpha, 0.05);
        assert!((j.derivative(&alpha) - fd).abs() < 1e-6, "{alpha:?}: {} vs {fd}", j.derivative(&alpha));
    }
}

#[test]
fn expression_jets_match_difference_quotients_on_random_points() {
    let names = coords(3);
    let corpus = [
        "x1^2*x2 - 3*x3 + 1",
        "exp(0.5*x1 - x2)*cos(x3)",
        "log(2 + x1*x2) + sqrt(1.5 + x3)",
        "1/(1 + x1^2 + x2^2 + x3^2)^2",
        "sinh(x1*x3) - cosh(x2)/(3 + x1)",
        "(1.2 + x2)^(-1.5) * x1",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for text in corpus {
        let e = parse_expr(text, &names).unwrap();
        let f = |q: &[f64]| e.eval_f64(q).unwrap();
        for _ in 0..100 {
            let p: Vec<f64> = (0..3).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let j = e.eval_jet(&p, 3).unwrap();
            for alpha in j.multi_indices() {
                let fd = fd_partial(&f, &p, &alpha, 0.05);
                let d = j.derivative(&alpha);
                assert!((d - fd).abs() < 1e-6 * (1.0 + d.abs()), "{text} {alpha:?} at {p:?}: {d} vs {fd}");
            }
        }
    }
}

#[test]
fn parse_examples() {
    let names = coords(3);
    let e = parse_expr("4/(1+x1^2+x2^2+x3^2)^2", &names).unwrap();
    assert_eq!(e.eval_f64(&[0.0; 3]).unwrap(), 4.0);
    assert!(parse_expr("exp(2*u)", &coords(1)).is_err());
    let xy = parse_expr("x1*x2", &coords(2)).unwrap().eval_jet(&[2.0, 3.0], 2).unwrap();
    assert_eq!((xy.value(), xy.coeff(&[1, 0]), xy.coeff(&[0, 1]), xy.coeff(&[1, 1])), (6.0, 3.0, 2.0, 1.0));
    assert!(parse_expr("sqrt(x1)", &coords(1)).unwrap().eval_jet(&[-1.0], 2).is_err());
    assert!(parse_expr("x1^x1", &coords(1)).is_err());
    assert!((parse_expr("pi", &coords(1)).unwrap().eval_f64(&[0.0]).unwrap() - std::f64::consts::PI).abs() < 1e-15);
}
