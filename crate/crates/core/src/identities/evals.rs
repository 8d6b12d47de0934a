//! Left and right hand sides of every registered identity, in orthonormal
//! components at one point.

use super::{Ctx, Family, IdentityRecord, Sides, Structure};
use crate::curvature::{DForm, DufForm, Quantity as Q};
use crate::geometry::TensorValue;
use crate::Result;

const D1: Q = Q::D(DForm::One);
const DUF: Q = Q::Duf(DufForm::Best);

fn kd(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

fn sum(m: usize, f: impl Fn(usize) -> f64) -> f64 {
    (0..m).map(f).sum()
}

fn sum2(m: usize, f: impl Fn(usize, usize) -> f64) -> f64 {
    let mut acc = 0.0;
    for a in 0..m {
        for b in 0..m {
            acc += f(a, b);
        }
    }
    acc
}

fn tr(t: &TensorValue) -> f64 {
    let m = t.dim;
    sum(m, |k| t[[k, k]])
}

fn dot(a: &TensorValue, b: &TensorValue) -> f64 {
    a.data.iter().zip(&b.data).map(|(x, y)| x * y).sum()
}

/// `out[ix] = t[ix[p[0]], ix[p[1]], …]`
fn perm(t: &TensorValue, p: &[usize]) -> TensorValue {
    let mut src = vec![0; p.len()];
    TensorValue::build(t.dim, p.len(), |ix| {
        for (s, &k) in src.iter_mut().zip(p) {
            *s = ix[k];
        }
        t.get(&src)
    })
}

#[allow(clippy::too_many_arguments)]
const fn rec(
    id: &'static str,
    family: Family,
    paper_eq: &'static str,
    anchor: &'static str,
    hypothesis: Option<Structure>,
    ingredients: &'static [(Q, usize)],
    min_dim: usize,
    eval: super::Eval,
) -> IdentityRecord {
    IdentityRecord { id, family, paper_eq, anchor, hypothesis, ingredients, tilde: false, min_dim, eval }
}

const fn with_tilde(mut r: IdentityRecord) -> IdentityRecord {
    r.tilde = true;
    r
}

use Family::{CE, CGERS, CGRS, COMM, GRS, HIGH, SOL};

const GS: Option<Structure> = Some(Structure::GradientSoliton);
const XS: Option<Structure> = Some(Structure::GenericSoliton);
const CES: Option<Structure> = Some(Structure::ConformallyEinstein);
const CGS: Option<Structure> = Some(Structure::ConformalGradientSoliton);
const CXS: Option<Structure> = Some(Structure::ConformalGenericSoliton);

const A_FN: &str = "If $f\\in C^{\\infty}(M)$ then";
const A_TR: &str = "at least of class $C^4(M)$";
const A_VF: &str = "Lemma 2.1 in";
const A_RIEM: &str = "For the second and third derivatives we prove";
const A_RIC: &str = "For the Ricci and the Schouten tensors we have the following";
const A_SCH: &str = "applied to the scalar curvature shows the validity of";
const A_WD: &str = "Using the definition of the Weyl tensor in equation";
const A_SOL: &str = "be a generic Ricci soliton structure";
const A_CC: &str = "the tensor $D$ satisfy the conditions";
const A_DL: &str = "summed cyclic permutation";
const A_GN: &str = "integrability conditions of conformally Einstein metrics";
const A_CGRS: &str = "is a conformal gradient Ricci soliton if and only if";
const A_CGERS: &str = "is a conformal generic Ricci soliton if and only if";
const A_GRS: &str = "natural counterpart of $D$ in the generic";
const A_HIGH: &str = "third and the fourth integrability conditions";

pub(super) static REGISTRY: &[IdentityRecord] = &[
    // functions
    rec("comm.f_sym", COMM, "SecondDerivFunction", A_FN, None, &[(Q::F, 2)], 2, f_sym),
    rec("comm.f_third_sym", COMM, "CovDerivSecondDerivFct", A_FN, None, &[(Q::F, 3)], 2, f_third_sym),
    rec("comm.f_third_riem", COMM, "ThirdDerivFunctionRiem", A_FN, None, &[(Q::F, 3), (Q::Riemann, 0)], 2, f_third_riem),
    rec("comm.f_third_weyl", COMM, "ThirdDerivFunctionWeyl", A_FN, None, &[(Q::F, 3), (Q::Weyl, 0)], 3, f_third_weyl),
    rec(
        "comm.f_third_schouten",
        COMM,
        "commutatioThirdDerFunctWeilSchouten",
        A_FN,
        None,
        &[(Q::F, 3), (Q::Weyl, 0), (Q::Schouten, 0)],
        3,
        f_third_schouten,
    ),
    rec("comm.f_fourth_riem", COMM, "FourthDerivFunctionRiem", A_FN, None, &[(Q::F, 4), (Q::Riemann, 0)], 2, f_fourth_riem),
    rec("comm.f_third_in_fourth", COMM, "ThirdDerivinfourth", A_FN, None, &[(Q::F, 4), (Q::Riemann, 1)], 2, f_third_in_fourth),
    rec("comm.f_12_34", COMM, "Function12with34", A_FN, None, &[(Q::F, 4), (Q::Riemann, 1)], 2, f_12_34),
    rec(
        "comm.f_traced_third",
        COMM,
        "TracedThirdDerivFunctionRicci",
        A_TR,
        None,
        &[(Q::F, 3), (Q::Ricci, 0)],
        2,
        f_traced_third,
    ),
    rec(
        "comm.f_traced_fourth",
        COMM,
        "TracedFourthDerivFct",
        A_TR,
        None,
        &[(Q::F, 4), (Q::Riemann, 0), (Q::Ricci, 1)],
        2,
        f_traced_fourth,
    ),
    rec(
        "comm.f_traced_fourth_v2",
        COMM,
        "TracedFourthDerivFctSecondVersion",
        A_TR,
        None,
        &[(Q::F, 4), (Q::Riemann, 1), (Q::Ricci, 1)],
        2,
        f_traced_fourth_v2,
    ),
    // vector fields
    rec("comm.x_third", COMM, "CommutationsForVectorFields", A_VF, None, &[(Q::X, 2), (Q::Riemann, 0)], 2, x_third),
    rec("comm.x_fourth_inner", COMM, "CommutationsForVectorFields", A_VF, None, &[(Q::X, 3), (Q::Riemann, 1)], 2, x_fourth_inner),
    rec("comm.x_fourth_outer", COMM, "CommutationsForVectorFields", A_VF, None, &[(Q::X, 3), (Q::Riemann, 0)], 2, x_fourth_outer),
    // Riemann
    rec("comm.bianchi_first", COMM, "FirstBianchiRiem", "the First Bianchi Identity", None, &[(Q::Riemann, 0)], 2, bianchi_first),
    rec("comm.bianchi_second", COMM, "SecondBianchiRiem", "the Second Bianchi Identity", None, &[(Q::Riemann, 1)], 2, bianchi_second),
    rec("comm.riem_second", COMM, "SecondDerivRiem", A_RIEM, None, &[(Q::Riemann, 2)], 2, riem_second),
    rec("comm.riem_third", COMM, "ThirdDerivRiem", A_RIEM, None, &[(Q::Riemann, 3)], 2, riem_third),
    // Ricci
    rec("comm.ricci_first", COMM, "LemmaFSTDerivRicci", A_RIC, None, &[(Q::Ricci, 1), (Q::Riemann, 1)], 2, ricci_first),
    rec("comm.ricci_second", COMM, "LemmaFSTDerivRicci", A_RIC, None, &[(Q::Ricci, 2), (Q::Riemann, 0)], 2, ricci_second),
    rec("comm.ricci_third", COMM, "LemmaFSTDerivRicci", A_RIC, None, &[(Q::Ricci, 3), (Q::Riemann, 0)], 2, ricci_third),
    rec("comm.schur", COMM, "unlabelled", "Schur's identity", None, &[(Q::Ricci, 1), (Q::Scalar, 1)], 2, schur),
    rec("comm.ricci_div", COMM, "unlabelled", "Schur's identity", None, &[(Q::Ricci, 2), (Q::Scalar, 2)], 2, ricci_div),
    // Schouten
    rec("comm.schouten_first", COMM, "unlabelled", A_SCH, None, &[(Q::Schouten, 1), (Q::Weyl, 1)], 4, schouten_first),
    rec("comm.schouten_second", COMM, "unlabelled", A_SCH, None, &[(Q::Schouten, 2), (Q::Riemann, 0)], 3, schouten_second),
    rec("comm.schouten_third", COMM, "unlabelled", A_SCH, None, &[(Q::Schouten, 3), (Q::Riemann, 0)], 3, schouten_third),
    // Weyl
    rec("comm.weyl_bianchi_first", COMM, "unlabelled", "the First Bianchi identity for $W$", None, &[(Q::Weyl, 0)], 3, weyl_bianchi_first),
    rec(
        "comm.weyl_fake_bianchi",
        COMM,
        "fake2ndBianchiWeyl",
        "Permuting cyclically the last three",
        None,
        &[(Q::Weyl, 1), (Q::Cotton, 0)],
        3,
        weyl_fake_bianchi,
    ),
    rec(
        "comm.weyl_second",
        COMM,
        "SecondDerivWeylusingRiem",
        "For the second and third derivatives of $W$",
        None,
        &[(Q::Weyl, 2), (Q::Riemann, 0)],
        3,
        weyl_second,
    ),
    rec(
        "comm.weyl_third",
        COMM,
        "ThirdDerivWeylusingRiem",
        "For the second and third derivatives of $W$",
        None,
        &[(Q::Weyl, 3), (Q::Riemann, 0)],
        3,
        weyl_third,
    ),
    rec("comm.weyl_second_expanded", COMM, "unlabelled", A_WD, None, &[(Q::Weyl, 2), (Q::Ricci, 0)], 3, weyl_second_expanded),
    rec(
        "comm.weyl_second_traced",
        COMM,
        "unlabelled",
        "Tracing the previous relation  we also get",
        None,
        &[(Q::Weyl, 2), (Q::Ricci, 0)],
        3,
        weyl_second_traced,
    ),
    rec("comm.weyl_third_expanded", COMM, "unlabelled", A_WD, None, &[(Q::Weyl, 3), (Q::Ricci, 0)], 3, weyl_third_expanded),
    // Cotton and Bach
    rec(
        "comm.cotton_cyclic",
        COMM,
        "PermutCiclCotton",
        "The First Bianchi Identities for the Weyl tensor immediately imply",
        None,
        &[(Q::Cotton, 0)],
        3,
        cotton_cyclic,
    ),
    rec(
        "comm.cotton_derivative",
        COMM,
        "unlabelled",
        "From the definition of the Cotton tensor we also deduce",
        None,
        &[(Q::Cotton, 1), (Q::Ricci, 2), (Q::Scalar, 2)],
        3,
        cotton_derivative,
    ),
    rec(
        "comm.cotton_div",
        COMM,
        "DiverCotton",
        "divergence of the Cotton tensor",
        None,
        &[(Q::Cotton, 1), (Q::Ricci, 2), (Q::Scalar, 2), (Q::Riemann, 0)],
        3,
        cotton_div,
    ),
    rec("comm.cotton_div_sym", COMM, "SymmDivCotton", "thus confirming the symmetry of the Bach tensor", None, &[(Q::Cotton, 1)], 3, cotton_div_sym),
    rec(
        "comm.cotton_null_div",
        COMM,
        "NullDiverCotton",
        "Taking the covariant derivative of",
        None,
        &[(Q::Cotton, 1)],
        3,
        cotton_null_div,
    ),
    rec(
        "comm.bach_div",
        COMM,
        "diverBach",
        "formula for the divergence of the Bach tensor",
        None,
        &[(Q::Bach, 1), (Q::Cotton, 0), (Q::Ricci, 0)],
        3,
        bach_div,
    ),
    // generic solitons
    rec("sol.eq1", SOL, "eq1", A_SOL, XS, &[(Q::Ricci, 0), (Q::X, 1)], 2, sol_eq1),
    rec("sol.eq2", SOL, "eq2", A_SOL, XS, &[(Q::Scalar, 0), (Q::X, 1)], 2, sol_eq2),
    rec("sol.eq3", SOL, "eq3", A_SOL, XS, &[(Q::Scalar, 1), (Q::X, 2)], 2, sol_eq3),
    rec("sol.eq4", SOL, "eq4", A_SOL, XS, &[(Q::Ricci, 0), (Q::X, 2)], 2, sol_eq4),
    rec("sol.eq5", SOL, "eq5", A_SOL, XS, &[(Q::Ricci, 1), (Q::Riemann, 0), (Q::X, 2)], 2, sol_eq5),
    rec("sol.eq6", SOL, "eq6", A_SOL, XS, &[(Q::Ricci, 1), (Q::Riemann, 0), (Q::X, 2)], 2, sol_eq6),
    rec("sol.scal_gen", SOL, "scalGen", A_SOL, XS, &[(Q::Scalar, 2), (Q::Ricci, 0), (Q::X, 0)], 2, sol_scal_gen),
    // gradient solitons
    rec("sol.eq1g", SOL, "eq1g", A_SOL, GS, &[(Q::Ricci, 0), (Q::F, 2)], 2, sol_eq1g),
    rec("sol.eq2g", SOL, "eq2g", A_SOL, GS, &[(Q::Scalar, 0), (Q::F, 2)], 2, sol_eq2g),
    rec("sol.eq3g", SOL, "eq3g", A_SOL, GS, &[(Q::Scalar, 1), (Q::Ricci, 0), (Q::F, 1)], 2, sol_eq3g),
    rec("sol.eq6g", SOL, "eq6g", A_SOL, GS, &[(Q::Ricci, 1), (Q::Riemann, 0), (Q::F, 1)], 2, sol_eq6g),
    rec("sol.hamilton", SOL, "HamiltonId", A_SOL, GS, &[(Q::Scalar, 1), (Q::F, 2)], 2, sol_hamilton),
    rec("sol.scal_grad", SOL, "scalGrad", A_SOL, GS, &[(Q::Scalar, 2), (Q::Ricci, 0), (Q::F, 1)], 2, sol_scal_grad),
    rec("sol.cao_chen_first", SOL, "firstCaoChen", A_CC, GS, &[(Q::Cotton, 0), (Q::Weyl, 0), (D1, 0)], 3, cao_chen_first),
    rec(
        "sol.cao_chen_second",
        SOL,
        "secondCaoChen",
        A_CC,
        GS,
        &[(Q::Bach, 0), (D1, 1), (Q::Cotton, 0)],
        3,
        cao_chen_second,
    ),
    rec("sol.cao_chen_remark", SOL, "unlabelled", "From \\eqref{firstCaoChen} we deduce", GS, &[(Q::Cotton, 0), (D1, 0)], 3, cao_chen_remark),
    rec("sol.d_cyclic", SOL, "unlabelled", A_DL, GS, &[(D1, 0)], 3, d_cyclic),
    rec("sol.d_cyclic_cotton", SOL, "unlabelled", A_DL, GS, &[(D1, 1), (Q::Cotton, 0)], 3, d_cyclic_cotton),
    rec("sol.d_cyclic_weyl", SOL, "unlabelled", A_DL, GS, &[(D1, 1), (Q::Weyl, 0)], 3, d_cyclic_weyl),
    rec("sol.c_cyclic", SOL, "unlabelled", A_DL, GS, &[(Q::Cotton, 1), (Q::Weyl, 0), (Q::Ricci, 0)], 3, c_cyclic),
    rec(
        "sol.d_cyclic_mixed",
        SOL,
        "unlabelled",
        A_DL,
        GS,
        &[(D1, 1), (Q::Cotton, 1), (Q::Weyl, 0), (Q::Ricci, 0)],
        4,
        d_cyclic_mixed,
    ),
    // conformally Einstein
    rec("ce.comp_ricci", CE, "CE_comp_Riccii", "if and only if there exists a solution", CES, &[(Q::Ricci, 0), (Q::U, 2)], 2, ce_comp_ricci),
    rec("ce.traced", CE, "CE_tracedlambda", "just the trace of", CES, &[(Q::Scalar, 0), (Q::U, 2)], 2, ce_traced),
    rec(
        "ce.comp_schouten",
        CE,
        "CE_comp_Schouten",
        "can be also written in terms of the Schouten tensor",
        CES,
        &[(Q::Schouten, 0), (Q::U, 2)],
        3,
        ce_comp_schouten,
    ),
    rec("ce.single", CE, "CE_singleEq", "is equivalent to the single equation", CES, &[(Q::Ricci, 0), (Q::U, 2)], 2, ce_single),
    rec("ce.first", CE, "FirstCond_GN", A_GN, CES, &[(Q::Cotton, 0), (Q::Weyl, 0), (Q::U, 1)], 3, ce_first_gn),
    rec("ce.second", CE, "SecondCond_GN", A_GN, CES, &[(Q::Bach, 0), (Q::Weyl, 0), (Q::U, 1)], 3, ce_second_gn),
    rec(
        "ce.nabla_lap_u",
        CE,
        "CE_nablaDeltau",
        "deduce the interesting relation",
        CES,
        &[(Q::Scalar, 1), (Q::Ricci, 0), (Q::U, 3)],
        2,
        ce_nabla_lap_u,
    ),
    rec(
        "ce.grad_u_nabla_lap_u",
        CE,
        "CE_gnablaunabladeltau",
        "deduce the interesting relation",
        CES,
        &[(Q::Scalar, 1), (Q::Ricci, 0), (Q::U, 3)],
        2,
        ce_grad_u_nabla_lap_u,
    ),
    rec("ce.ric_hess", CE, "CE_ricchess", "from equation \\eqref{CE_comp_Riccii},", CES, &[(Q::Ricci, 0), (Q::U, 2)], 2, ce_ric_hess),
    rec(
        "ce.lap_scalar",
        CE,
        "CE_LaplacianScalarEq",
        "a conformally Einstein manifold. Then",
        CES,
        &[(Q::Scalar, 2), (Q::U, 4)],
        2,
        ce_lap_scalar,
    ),
    rec(
        "ce.lap_scalar_lambda",
        CE,
        "CE_LaplacianScalarEqwithLambda",
        "can also be written as",
        CES,
        &[(Q::Scalar, 2), (Q::U, 4)],
        2,
        ce_lap_scalar_lambda,
    ),
    // conformal gradient solitons
    rec("cgrs.comp_ricci", CGRS, "CGRS_comp_Ricci", A_CGRS, CGS, &[(Q::Ricci, 0), (Q::U, 2), (Q::F, 2)], 2, cgrs_comp_ricci),
    rec("cgrs.traced", CGRS, "Eq_CGRSGlobalTraced", A_CGRS, CGS, &[(Q::Scalar, 0), (Q::U, 2), (Q::F, 2)], 2, cgrs_traced),
    rec(
        "cgrs.comp_schouten",
        CGRS,
        "CGRS_comp_Schouten",
        "can be written, using the Schouten tensor, as",
        CGS,
        &[(Q::Schouten, 0), (Q::U, 2), (Q::F, 2)],
        3,
        cgrs_comp_schouten,
    ),
    rec(
        "cgrs.d_uf_alt",
        CGRS,
        "tensorD_u_f",
        "can also be written as follows",
        CGS,
        &[(Q::Duf(DufForm::Best), 0), (Q::Duf(DufForm::Alt), 0)],
        3,
        cgrs_d_uf_alt,
    ),
    with_tilde(rec(
        "cgrs.d_uf_tilde",
        CGRS,
        "CGRS_D_ufvsTildeD",
        "D^{\\pa{u, f}} = e^{3u}\\tilde{D}",
        CGS,
        &[(DUF, 0), (D1, 0), (Q::U, 3)],
        3,
        cgrs_d_uf_tilde,
    )),
    rec(
        "cgrs.first",
        CGRS,
        "Eq_FirstCondition_CGRSCompNewD",
        "is a conformal gradient Ricci soliton then",
        CGS,
        &[(Q::Cotton, 0), (Q::Weyl, 0), (DUF, 0)],
        3,
        cgrs_first,
    ),
    rec(
        "cgrs.second",
        CGRS,
        "Eq_SecondConditionBach",
        "second integrability condition for a conformal",
        CGS,
        &[(Q::Bach, 0), (DUF, 1), (Q::Cotton, 0), (Q::Weyl, 0)],
        3,
        cgrs_second,
    ),
    rec(
        "cgrs.second_equivalent",
        CGRS,
        "Eq_SecondConditionBach_equivalent",
        "second integrability condition for a conformal",
        CGS,
        &[(Q::Bach, 0), (DUF, 1), (Q::Weyl, 0)],
        3,
        cgrs_second_equivalent,
    ),
    with_tilde(rec(
        "cgrs.d_uf_div",
        CGRS,
        "unlabelled",
        "Following the second proof of Theorem",
        CGS,
        &[(DUF, 1), (D1, 1), (Q::U, 4)],
        3,
        cgrs_d_uf_div,
    )),
    rec(
        "cgrs.sk_uttk_fttk",
        CGRS,
        "CGRS_SkUttkFttk",
        "which will come in handy later",
        CGS,
        &[(Q::Scalar, 1), (Q::Ricci, 0), (Q::U, 3), (Q::F, 3)],
        3,
        cgrs_sk_uttk_fttk,
    ),
    rec(
        "cgrs.sk_uttk_fttk_second",
        CGRS,
        "CGRS_SkUttkFttk_second",
        "taking the covariant derivative of equation",
        CGS,
        &[(Q::Scalar, 1), (Q::U, 3), (Q::F, 3)],
        3,
        cgrs_sk_uttk_fttk_second,
    ),
    rec(
        "cgrs.fttk_prelim",
        CGRS,
        "CGRS_Fttk_prelim",
        "Subtracting \\eqref{CGRS_SkUttkFttk_second} from",
        CGS,
        &[(Q::Scalar, 0), (Q::Ricci, 0), (Q::U, 2), (Q::F, 3)],
        3,
        cgrs_fttk_prelim,
    ),
    rec(
        "cgrs.fttk",
        CGRS,
        "CGRS_Fttk",
        "conformal gradient Ricci soliton; then we have",
        CGS,
        &[(Q::Scalar, 0), (Q::Ricci, 0), (Q::U, 2), (Q::F, 3)],
        3,
        cgrs_fttk,
    ),
    rec(
        "cgrs.uttk",
        CGRS,
        "CGRS_Uttk",
        "interesting expression for $\\nabla\\Delta u$",
        CGS,
        &[(Q::Scalar, 1), (Q::Ricci, 0), (Q::U, 3), (Q::F, 2)],
        3,
        cgrs_uttk,
    ),
    // generic solitons, integrability
    rec(
        "grs.first",
        GRS,
        "firstGenericRSIntCondition",
        A_GRS,
        XS,
        &[(Q::Cotton, 0), (Q::Weyl, 0), (Q::DX, 0)],
        3,
        grs_first,
    ),
    rec(
        "grs.second",
        GRS,
        "secondGenericRSIntCondition",
        A_GRS,
        XS,
        &[(Q::Bach, 0), (Q::DX, 1), (Q::Cotton, 0), (Q::Weyl, 0), (Q::X, 1)],
        3,
        grs_second,
    ),
    rec("grs.remark", GRS, "unlabelled", "From \\eqref{firstGenericRSIntCondition} we deduce", XS, &[(Q::Cotton, 0), (Q::DX, 0)], 3, grs_remark),
    // conformal generic solitons
    rec(
        "cgers.comp_ricci",
        CGERS,
        "CGenericRS_comp_Ricci",
        A_CGERS,
        CXS,
        &[(Q::Ricci, 0), (Q::U, 2), (Q::X, 1)],
        2,
        cgers_comp_ricci,
    ),
    rec(
        "cgers.traced",
        CGERS,
        "Eq_CGenericRSGlobalTraced",
        A_CGERS,
        CXS,
        &[(Q::Scalar, 0), (Q::U, 2), (Q::X, 1)],
        2,
        cgers_traced,
    ),
    rec(
        "cgers.comp_schouten",
        CGERS,
        "CGenericRS_comp_Schouten",
        "can be written, using the Schouten tensor, as",
        CXS,
        &[(Q::Schouten, 0), (Q::U, 2), (Q::X, 1)],
        3,
        cgers_comp_schouten,
    ),
    with_tilde(rec(
        "cgers.d_ux_tilde",
        CGERS,
        "CGeRS_EqDuXe3uDX",
        "A computation similar to the one leading to equation",
        CXS,
        &[(Q::DuX, 0), (Q::DX, 0), (Q::U, 3)],
        3,
        cgers_d_ux_tilde,
    )),
    rec(
        "cgers.first",
        CGERS,
        "Eq_FirstCondition_CGenericRSComponents",
        "first integrability condition for conformal generic",
        CXS,
        &[(Q::Cotton, 0), (Q::Weyl, 0), (Q::DuX, 0)],
        3,
        cgers_first,
    ),
    rec(
        "cgers.second",
        CGERS,
        "Eq_SecondConditionBach_GENERIC",
        "As far as the second integrability condition is concerned we have",
        CXS,
        &[(Q::Bach, 0), (Q::DuX, 1), (Q::Cotton, 0), (Q::Weyl, 0), (Q::X, 1)],
        3,
        cgers_second,
    ),
    rec(
        "cgers.sk_uttk_xttk",
        CGERS,
        "CGeRS_SkUttkXttk",
        "compare it with equation",
        CXS,
        &[(Q::Scalar, 1), (Q::Ricci, 0), (Q::U, 3), (Q::X, 2)],
        3,
        cgers_sk_uttk_xttk,
    ),
    // higher order
    rec("high.third_1", HIGH, "thirdCond1", A_HIGH, GS, &[(Q::Cotton, 0), (Q::Ricci, 0), (D1, 2)], 4, high_third_1),
    rec("high.third_2", HIGH, "thirdCond2", A_HIGH, GS, &[(Q::Bach, 1), (D1, 2)], 4, high_third_2),
    rec(
        "high.fourth_1",
        HIGH,
        "fourthCond1",
        A_HIGH,
        GS,
        &[(Q::Cotton, 0), (Q::Bach, 0), (Q::Weyl, 0), (Q::Ricci, 0), (D1, 3)],
        4,
        high_fourth_1,
    ),
    rec("high.fourth_2", HIGH, "fourthCond2", A_HIGH, GS, &[(Q::Bach, 2), (D1, 3)], 4, high_fourth_2),
];

// ---------------------------------------------------------------- functions

fn f_sym(c: &Ctx) -> Result<Sides> {
    let f2 = c.v(Q::F, 2)?;
    Ok(((*f2).clone(), perm(&f2, &[1, 0])))
}

fn f_third_sym(c: &Ctx) -> Result<Sides> {
    let f3 = c.v(Q::F, 3)?;
    Ok(((*f3).clone(), perm(&f3, &[1, 0, 2])))
}

fn f_third_riem(c: &Ctx) -> Result<Sides> {
    let m = c.m();
    let (f1, f3, r) = (c.v(Q::F, 1)?, c.v(Q::F, 3)?, c.v(Q::Riemann, 0)?);
    let rhs = c.t(3, |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        f3[[i, k, j]] + sum(m, |t| f1[[t]] * r[[t, i, j, k]])
    });
    Ok(((*f3).clone(), rhs))
}

fn f_third_weyl(c: &Ctx) -> Result<Sides> {
    let (m, mf) = (c.m(), c.mf());
    let (f1, f3, w, ric, s) = (c.v(Q::F, 1)?, c.v(Q::F, 3)?, c.v(Q::Weyl, 0)?, c.v(Q::Ricci, 0)?, c.s()?);
    let fr: Vec<f64> = (0..m).map(|j| sum(m, |t| f1[[t]] * ric[[t, j]])).collect();
    let rhs = c.t(3, |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        f3[[i, k, j]]
            + sum(m, |t| f1[[t]] * w[[t, i, j, k]])
            + (fr[j] * kd(i, k) - fr[k] * kd(i, j) + f1[[j]] * ric[[i, k]] - f1[[k]] * ric[[i, j]]) / (mf - 2.0)
            - s / ((mf - 1.0) * (mf - 2.0)) * (f1[[j]] * kd(i, k) - f1[[k]] * kd(i, j))
    });
    Ok(((*f3).clone(), rhs))
}

fn f_third_schouten(c: &Ctx) -> Result<Sides> {
    let (m, mf) = (c.m(), c.mf());
    let (f1, f3, w, a) = (c.v(Q::F, 1)?, c.v(Q::F, 3)?, c.v(Q::Weyl, 0)?, c.v(Q::Schouten, 0)?);
    let fa: Vec<f64> = (0..m).map(|j| sum(m, |t| f1[[t]] * a[[t, j]])).collect();
    let rhs = c.t(3, |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        f3[[i, k, j]]
            + sum(m, |t| f1[[t]] * w[[t, i, j, k]])
            + (fa[j] * kd(i, k) - fa[k] * kd(i, j) + f1[[j]] * a[[i, k]] - f1[[k]] * a[[i, j]]) / (mf - 2.0)
    });
    Ok(((*f3).clone(), rhs))
}

fn f_fourth_riem(c: &Ctx) -> Result<Sides> {
    let m = c.m();
    let (f2, f4, r) = (c.v(Q::F, 2)?, c.v(Q::F, 4)?, c.v(Q::Riemann, 0)?);
    let rhs = c.t(4, |ix| {
        let (i, j, k, t) = (ix[0], ix[1], ix[2], ix[3]);
        f4[[i, j, t, k]] + sum(m, |l| f2[[i, l]] * r[[l, j, k, t]] + f2[[j, l]] * r[[l, i, k, t]])
    });
    Ok(((*f4).clone(), rhs))
}

fn f_third_in_fourth(c: &Ctx) -> Result<Sides> {
    let m = c.m();
    let (f1, f2, f4, r, r1) = (c.v(Q::F, 1)?, c.v(Q::F, 2)?, c.v(Q::F, 4)?, c.v(Q::Riemann, 0)?, c.v(Q::Riemann, 1)?);
    let rhs = c.t(4, |ix| {
        let (i, j, k, t) = (ix[0], ix[1], ix[2], ix[3]);
        f4[[i, k, j, t]] + sum(m, |s| f2[[s, t]] * r[[s, i, j, k]] + f1[[s]] * r1[[s, i, j, k, t]])
    });
    Ok(((*f4).clone(), rhs))
}

fn f_12_34(c: &Ctx) -> Result<Sides> {
    let m = c.m();
    let (f1, f2, f4, r, r1) = (c.v(Q::F, 1)?, c.v(Q::F, 2)?, c.v(Q::F, 4)?, c.v(Q::Riemann, 0)?, c.v(Q::Riemann, 1)?);
    let rhs = c.t(4, |ix| {
        let (i, j, k, t) = (ix[0], ix[1], ix[2], ix[3]);
        f4[[k, t, i, j]]
            + sum(m, |s| {
                f2[[i, s]] * r[[s, k, j, t]]
                    + f2[[j, s]] * r[[s, k, i, t]]
                    + f2[[k, s]] * r[[s, i, j, t]]
                    + f2[[t, s]] * r[[s, i, j, k]]
                    + f1[[s]] * (r1[[s, i, j, k, t]] - r1[[s, k, t, i, j]])
            })
    });
    Ok(((*f4).clone(), rhs))
}

fn f_traced_third(c: &Ctx) -> Result<Sides> {
    let m = c.m();
    let (f1, f3, ric) = (c.v(Q::F, 1)?, c.v(Q::F, 3)?, c.v(Q::Ricci, 0)?);
    let lhs = c.t(1, |ix| sum(m, |t| f3[[ix[0], t, t]]));
    let rhs = c.t(1, |ix| sum(m, |t| f3[[t, t, ix[0]]] + f1[[t]] * ric[[t, ix[0]]]));
    Ok((lhs, rhs))
}

fn traced_fourth_head(c: &Ctx) -> Result<(TensorValue, TensorValue)> {
    let m = c.m();
    let (f2, f4, r, ric) = (c.v(Q::F, 2)?, c.v(Q::F, 4)?, c.v(Q::Riemann, 0)?, c.v(Q::Ricci, 0)?);
    let lhs = c.t(2, |ix| sum(m, |t| f4[[ix[0], ix[1], t, t]]));
    let head = c.t(2, |ix| {
        let (i, j) = (ix[0], ix[1]);
        sum(m, |t| f4[[t, t, i, j]] + f2[[i, t]] * ric[[t, j]] + f2[[j, t]] * ric[[t, i]])
            - 2.0 * sum2(m, |s, t| f2[[s, t]] * r[[i, s, j, t]])
    });
    Ok((lhs, head))
}

fn f_traced_fourth(c: &Ctx) -> Result<Sides> {
    let m = c.m();
    let (lhs, mut rhs) = traced_fourth_head(c)?;
    let (f1, ric1) = (c.v(Q::F, 1)?, c.v(Q::Ricci, 1)?);
    for i in 0..m {
        for j in 0..m {
            rhs.data[i * m + j] +=
                sum(m, |t| f1[[t]] * (ric1[[t, j, i]] + ric1[[t, i, j]]) - f1[[t]] * ric1[[i, j, t]]);
        }
    }
    Ok((lhs, rhs))
}

fn f_traced_fourth_v2(c: &Ctx) -> Result<Sides> {
    let m = c.m();
    let (lhs, mut rhs) = traced_fourth_head(c)?;
    let (f1, ric1, r1) = (c.v(Q::F, 1)?, c.v(Q::Ricci, 1)?, c.v(Q::Riemann, 1)?);
    for i in 0..m {
        for j in 0..m {
            rhs.data[i * m + j] += sum(m, |t| {
                f1[[t]] * ric1[[i, j, t]] - f1[[t]] * sum(m, |s| r1[[s, i, t, j, s]] + r1[[s, j, t, i, s]])
            });
        }
    }
    Ok((lhs, rhs))
}

// ------------------------------------------------------------ vector fields

fn x_third(c: &Ctx) -> Result<Sides> {
    let m = c.m();
    let (x, x2, r) = (c.v(Q::X, 0)?, c.v(Q::X, 2)?, c.v(Q::Riemann, 0)?);
    let lhs = c.t(3, |ix| x2[[ix[0], ix[1], ix[2]]] - x2[[ix[0], ix[2], ix[1]]]);
    let rhs = c.t(3, |ix| sum(m, |t| x[[t]] * r[[t, ix[0], ix[1], ix[2]]]));
    Ok((lhs, rhs))
}

fn x_fourth_inner(c: &Ctx) -> Result<Sides> {
    let m = c.m();
    let (x, x1, x3, r, r1) = (c.v(Q::X, 0)?, c.v(Q::X, 1)?, c.v(Q::X, 3)?, c.v(Q::Riemann, 0)?, c.v(Q::Riemann, 1)?);
    let lhs = c.t(4, |ix| {
        let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
        x3[[i, j, k, l]] - x3[[i, k, j, l]]
    });
    let rhs = c.t(4, |ix| {
        let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
        sum(m, |t| r[[t, i, j, k]] * x1[[t, l]] + r1[[t, i, j, k, l]] * x[[t]])
    });
    Ok((lhs, rhs))
}

fn x_fourth_outer(c: &Ctx) -> Result<Sides> {
    let m = c.m();
    let (x1, x3, r) = (c.v(Q::X, 1)?, c.v(Q::X, 3)?, c.v(Q::Riemann, 0)?);
    let lhs = c.t(4, |ix| {
        let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
        x3[[i, j, k, l]] - x3[[i, j, l, k]]
    });
    let rhs = c.t(4, |ix| {
        let (i, j, k, l) = (ix[0], ix[1], ix[2], ix[3]);
        sum(m, |t| r[[t, i, k, l]] * x1[[t, j]] + r[[t, j, k, l]] * x1[[i, t]])
    });
    Ok((lhs, rhs))
}

// ------------------------------------------------------------------ Riemann

fn bianchi_first(c: &Ctx) -> Result<Sides> {
    let r = c.v(Q::Riemann, 0)?;
    let lhs = c.t(4, |ix| {
        let (i, j, k, t) = (ix[0], ix[1], ix[2], ix[3]);
        r[[i, j, k, t]] + r[[i, t, j, k]] + r[[i, k, t, j]]
    });
    Ok((lhs, c.zero(4)))
}

fn bianchi_second(c: &Ctx) -> Result<Sides> {
    let r1 = c.v(Q::Riemann, 1)?;
    let lhs = c.t(5, |ix| {
        let (i, j, k, t, l) = (ix[0], ix[1], ix[2], ix[3], ix[4]);
        r1[[i, j, k, t, l]] + r1[[i, j, l, k, t]] + r1[[i, j, t, l, k]]
    });
    Ok((lhs, c.zero(5)))
}

/// `T_{a b c d} ↦ Σ_s (T_{s b c d} R_{s a x y} + … + T_{a b c s} R_{s d x y})`
/// for a rank-4 `T` and the curvature-like `r` indexed as `r(s, a, x, y)`.
fn act4(m: usize, t: &TensorValue, r: impl Fn(usize, usize, usize, usize) -> f64, ix: [usize; 6]) -> f64 {
    let [a, b, cc, d, x, y] = ix;
    sum(m, |s| {
        t[[s, b, cc, d]] * r(s, a, x, y)
            + t[[a, s, cc, d]] * r(s, b, x, y)
            + t[[a, b, s, d]] * r(s, cc, x, y)
            + t[[a, b, cc, s]] * r(s, d, x, y)
    })
}

fn riem_second(c: &Ctx) -> Result<Sides> {
    let m = c.m();
    let (r, r2) = (c.v(Q::Riemann, 0)?, c.v(Q::Riemann, 2)?);
    let lhs = c.t(6, |ix| r2.get(ix) - r2[[ix[0], ix[1], ix[2], ix[3], ix[5], ix[4]]]);
    let rhs = c.t(6, |ix| act4(m, &r, |s, a, x, y| r[[s, a, x, y]], [ix[0], ix[1], ix[2], ix[3], ix[4], ix[5]]));
    Ok((lhs, rhs))
}

/// `Σ_v (T_{v…,l} R_{v a r s} + …) + T_{…,v} R_{v l r s}` for a rank-4 tensor
/// with one derivative slot.
fn act4d(m: usize, t1: &TensorValue, r: impl Fn(usize, usize, usize, usize) -> f64, ix: &[usize]) -> f64 {
    let (i, j, k, tt, l, rr, s) = (ix[0], ix[1], ix[2], ix[3], ix[4], ix[5], ix[6]);
    sum(m, |v| {
        t1[[v, j, k, tt, l]] * r(v, i, rr, s)
            + t1[[i, v, k, tt, l]] * r(v, j, rr, s)
            + t1[[i, j, v, tt, l]] * r(v, k, rr, s)
            + t1[[i, j, k, v, l]] * r(v, tt, rr, s)
            + t1[[i, j, k, tt, v]] * r(v, l, rr, s)
    })
}

fn riem_third(c: &Ctx) -> Result<Sides> {
    let m = c.m();
    let (r, r1, r3) = (c.v(Q::Riemann, 0)?, c.v(Q::Riemann, 1)?, c.v(Q::Riemann, 3)?);
    let lhs = c.t(7, |ix| r3.get(ix) - r3[[ix[0], ix[1], ix[2], ix[3], ix[4], ix[6], ix[5]]]);
    let rhs = c.t(7, |ix| act4d(m, &r1, |v, a, x, y| r[[v, a, x, y]], ix));
    Ok((lhs, rhs))
}

// -------------------------------------------------------------------- Ricci

fn ricci_first(c: &Ctx) -> Result<Sides> {
    let m = c.m();
    let (ric1, r1) = (c.v(Q::Ricci, 1)?, c.v(Q::Riemann, 1)?);
    let lhs = c.t(3, |ix| ric1[[ix[0], ix[1], ix[2]]] - ric1[[ix[0], ix[2], ix[1]]]);
    let rhs = c.t(3, |ix| -sum(m, |t| r1[[t, ix[0], ix[1], ix[2], t]]));
    Ok((lhs, rhs))
}

/// `T_{ij,kt} − T_{ij,tk} = R_{likt} T_{lj} + R_{ljkt} T_{il}`
fn sym2_second(c: &Ctx, q: Q) -> Result<Sides> {
    let m = c.m();
    let (a, a2, r) = (c.v(q, 0)?, c.v(q, 2)?, c.v(Q::Riemann, 0)?);
    let lhs = c.t(4, |ix| a2.get(ix) - a2[[ix[0], ix[1], ix[3], ix[2]]]);
    let rhs = c.t(4, |ix| {
        let (i, j, k, t) = (ix[0], ix[1], ix[2], ix[3]);
        sum(m, |l| r[[l, i, k, t]] * a[[l, j]] + r[[l, j, k, t]] * a[[l, i]])
    });
    Ok((lhs, rhs))
}

/// `T_{ij,ktl} − T_{ij,klt} = T_{sj,k} R_{sitl} + T_{is,k} R_{sjtl} + T_{ij,s} R_{sktl}`
fn sym2_third(c: &Ctx, q: Q) -> Result<Sides> {
    let m = c.m();
    let (a1, a3, r) = (c.v(q, 1)?, c.v(q, 3)?, c.v(Q::Riemann, 0)?);
    let lhs = c.t(5, |ix| a3.get(ix) - a3[[ix[0], ix[1], ix[2], ix[4], ix[3]]]);
    let rhs = c.t(5, |ix| {
        let (i, j, k, t, l) = (ix[0], ix[1], ix[2], ix[3], ix[4]);
        sum(m, |s| a1[[s, j, k]] * r[[s, i, t, l]] + a1[[i, s, k]] * r[[s, j, t, l]] + a1[[i, j, s]] * r[[s, k, t, l]])
    });
    Ok((lhs, rhs))
}

fn ricci_second(c: &Ctx) -> Result<Sides> {
    sym2_second(c, Q::Ricci)
}

fn ricci_third(c: &Ctx) -> Result<Sides> {
    sym2_third(c, Q::Ricci)
}

fn schur(c: &Ctx) -> Result<Sides> {
    let m = c.m();
    let (ric1, s1) = (c.v(Q::Ricci, 1)?, c.v(Q::Scalar, 1)?);
    let lhs = c.t(1, |ix| sum(m, |k| ric1[[ix[0], k, k]]));
    Ok((lhs, s1.scaled(0.5)))
}

fn ricci_div(c: &Ctx) -> Result<Sides> {
    let m = c.m();
    let (ric, ric2, r, s2) = (c.v(Q::Ricci, 0)?, c.v(Q::Ricci, 2)?, c.v(Q::Riemann, 0)?, c.v(Q::Scalar, 2)?);
    let lhs = c.t(2, |ix| sum(m, |k| ric2[[ix[0], k, ix[1], k]]));
    let rhs = c.t(2, |ix| {
        let (i, j) = (ix[0], ix[1]);
        0.5 * s2[[i, j]] - sum2(m, |t, k| ric[[t, k]] * r[[i, t, j, k]]) + sum(m, |t| ric[[i, t]] * ric[[t, j]])
    });
    Ok((lhs, rhs))
}

// ----------------------------------------------------------------- Schouten

fn schouten_first(c: &Ctx) -> Result<Sides> {
    let (m, mf) = (c.m(), c.mf());
    let (a1, w1) = (c.v(Q::Schouten, 1)?, c.v(Q::Weyl, 1)?);
    let lhs = c.t(3, |ix| a1[[ix[0], ix[1], ix[2]]] - a1[[ix[0], ix[2], ix[1]]]);
    let rhs = c.t(3, |ix| (mf - 2.0) / (mf - 3.0) * sum(m, |t| w1[[t, ix[0], ix[2], ix[1], t]]));
    Ok((lhs, rhs))
}

fn schouten_second(c: &Ctx) -> Result<Sides> {
    sym2_second(c, Q::Schouten)
}

fn schouten_third(c: &Ctx) -> Result<Sides> {
    sym2_third(c, Q::Schouten)
}

// --------------------------------------------------------------------- Weyl

fn weyl_bianchi_first(c: &Ctx) -> Result<Sides> {
    let w = c.v(Q::Weyl, 0)?;
    let lhs = c.t(4, |ix| {
        let (i, j, k, t) = (ix[0], ix[1], ix[2], ix[3]);
        w[[i, j, k, t]] + w[[i, t, j, k]] + w[[i, k, t, j]]
    });
    Ok((lhs, c.zero(4)))
}

fn weyl_fake_bianchi(c: &Ctx) -> Result<Sides> {
    let mf = c.mf();
    let (w1, cc) = (c.v(Q::Weyl, 1)?, c.v(Q::Cotton, 0)?);
    let lhs = c.t(5, |ix| {
        let (i, j, k, t, l) = (ix[0], ix[1], ix[2], ix[3], ix[4]);
        w1[[i, j, k, t, l]] + w1[[i, j, l, k, t]] + w1[[i, j, t, l, k]]
    });
    let rhs = c.t(5, |ix| {
        let (i, j, k, t, l) = (ix[0], ix[1], ix[2], ix[3], ix[4]);
        (cc[[i, t, l]] * kd(j, k) + cc[[i, l, k]] * kd(j, t) + cc[[i, k, t]] * kd(j, l)
            - cc[[j, t, l]] * kd(i, k)
            - cc[[j, l, k]] * kd(i, t)
            - cc[[j, k, t]] * kd(i, l))
            / (mf - 2.0)
    });
    Ok((lhs, rhs))
}

fn weyl_second(c: &Ctx) -> Result<Sides> {
    let m = c.m();
    let (w, w2, r) = (c.v(Q::Weyl, 0)?, c.v(Q::Weyl, 2)?, c.v(Q::Riemann, 0)?);
    let lhs = c.t(6, |ix| w2.get(ix) - w2[[ix[0], ix[1], ix[2], ix[3], ix[5], ix[4]]]);
    let rhs = c.t(6, |ix| act4(m, &w, |s, a, x, y| r[[s, a, x, y]], [ix[0], ix[1], ix[2], ix[3], ix[4], ix[5]]));
    Ok((lhs, rhs))
}

fn weyl_third(c: &Ctx) -> Result<Sides> {
    let m = c.m();
    let (w1, w3, r) = (c.v(Q::Weyl, 1)?, c.v(Q::Weyl, 3)?, c.v(Q::Riemann, 0)?);
    let lhs = c.t(7, |ix| w3.get(ix) - w3[[ix[0], ix[1], ix[2], ix[3], ix[4], ix[6], ix[5]]]);
    let rhs = c.t(7, |ix| act4d(m, &w1, |v, a, x, y| r[[v, a, x, y]], ix));
    Ok((lhs, rhs))
}

/// Riemann written through Weyl, Ricci and scalar curvature, bracket by bracket.
fn riemann_split(c: &Ctx) -> Result<impl Fn(usize, usize, usize, usize) -> f64> {
    let mf = c.mf();
    let (w, ric, s) = (c.v(Q::Weyl, 0)?, c.v(Q::Ricci, 0)?, c.s()?);
    Ok(move |v: usize, a: usize, x: usize, y: usize| {
        w[[v, a, x, y]]
            + (ric[[v, x]] * kd(a, y) - ric[[v, y]] * kd(a, x) + ric[[a, y]] * kd(v, x) - ric[[a, x]] * kd(v, y)) / (mf - 2.0)
            - s / ((mf - 1.0) * (mf - 2.0)) * (kd(v, x) * kd(a, y) - kd(v, y) * kd(a, x))
    })
}

fn weyl_second_expanded(c: &Ctx) -> Result<Sides> {
    let m = c.m();
    let (w, w2) = (c.v(Q::Weyl, 0)?, c.v(Q::Weyl, 2)?);
    let rs = riemann_split(c)?;
    let lhs = c.t(6, |ix| w2.get(ix) - w2[[ix[0], ix[1], ix[2], ix[3], ix[5], ix[4]]]);
    let rhs = c.t(6, |ix| act4(m, &w, &rs, [ix[0], ix[1], ix[2], ix[3], ix[4], ix[5]]));
    Ok((lhs, rhs))
}

fn weyl_second_traced(c: &Ctx) -> Result<Sides> {
    let (m, mf) = (c.m(), c.mf());
    let (w, w2, ric) = (c.v(Q::Weyl, 0)?, c.v(Q::Weyl, 2)?, c.v(Q::Ricci, 0)?);
    // free indices (j, k, l, s)
    let lhs = c.t(4, |ix| {
        let (j, k, l, s) = (ix[0], ix[1], ix[2], ix[3]);
        sum(m, |t| w2[[t, j, k, l, s, t]] - w2[[t, j, k, l, t, s]])
    });
    let rhs = c.t(4, |ix| {
        let (j, k, l, s) = (ix[0], ix[1], ix[2], ix[3]);
        sum(m, |t| ric[[s, t]] * w[[t, j, k, l]])
            + sum2(m, |t, r| w[[t, r, k, l]] * w[[r, j, s, t]] + w[[t, j, r, l]] * w[[r, k, s, t]] + w[[t, j, k, r]] * w[[r, l, s, t]])
            + sum2(m, |t, r| ric[[t, r]] * w[[t, j, r, k]] * kd(l, s) - ric[[t, r]] * w[[t, j, r, l]] * kd(k, s)) / (mf - 2.0)
            + sum(m, |t| ric[[t, k]] * w[[t, j, s, l]] + ric[[t, l]] * w[[t, j, k, s]] + ric[[t, j]] * w[[t, s, k, l]])
                / (mf - 2.0)
    });
    Ok((lhs, rhs))
}

fn weyl_third_expanded(c: &Ctx) -> Result<Sides> {
    let m = c.m();
    let (w1, w3) = (c.v(Q::Weyl, 1)?, c.v(Q::Weyl, 3)?);
    let rs = riemann_split(c)?;
    let lhs = c.t(7, |ix| w3.get(ix) - w3[[ix[0], ix[1], ix[2], ix[3], ix[4], ix[6], ix[5]]]);
    let rhs = c.t(7, |ix| act4d(m, &w1, &rs, ix));
    Ok((lhs, rhs))
}

// ----------------------------------------------------------- Cotton, Bach

fn cotton_cyclic(c: &Ctx) -> Result<Sides> {
    let cc = c.v(Q::Cotton, 0)?;
    let lhs = c.t(3, |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        cc[[i, j, k]] + cc[[j, k, i]] + cc[[k, i, j]]
    });
    Ok((lhs, c.zero(3)))
}

fn cotton_derivative(c: &Ctx) -> Result<Sides> {
    let mf = c.mf();
    let (c1, ric2, s2) = (c.v(Q::Cotton, 1)?, c.v(Q::Ricci, 2)?, c.v(Q::Scalar, 2)?);
    let rhs = c.t(4, |ix| {
        let (i, j, k, t) = (ix[0], ix[1], ix[2], ix[3]);
        ric2[[i, j, k, t]] - ric2[[i, k, j, t]] - (s2[[k, t]] * kd(i, j) - s2[[j, t]] * kd(i, k)) / (2.0 * (mf - 1.0))
    });
    Ok(((*c1).clone(), rhs))
}

fn cotton_divergence(c: &Ctx) -> Result<TensorValue> {
    let m = c.m();
    let c1 = c.v(Q::Cotton, 1)?;
    Ok(c.t(2, |ix| sum(m, |k| c1[[ix[0], ix[1], k, k]])))
}

fn cotton_div(c: &Ctx) -> Result<Sides> {
    let (m, mf) = (c.m(), c.mf());
    let (ric, ric2, r, s2) = (c.v(Q::Ricci, 0)?, c.v(Q::Ricci, 2)?, c.v(Q::Riemann, 0)?, c.v(Q::Scalar, 2)?);
    let lap_s = tr(&s2);
    let rhs = c.t(2, |ix| {
        let (i, j) = (ix[0], ix[1]);
        sum(m, |k| ric2[[i, j, k, k]]) - (mf - 2.0) / (2.0 * (mf - 1.0)) * s2[[i, j]]
            + sum2(m, |t, k| ric[[t, k]] * r[[i, t, j, k]])
            - sum(m, |t| ric[[i, t]] * ric[[t, j]])
            - lap_s * kd(i, j) / (2.0 * (mf - 1.0))
    });
    Ok((cotton_divergence(c)?, rhs))
}

fn cotton_div_sym(c: &Ctx) -> Result<Sides> {
    let d = cotton_divergence(c)?;
    let t = perm(&d, &[1, 0]);
    Ok((d, t))
}

fn cotton_null_div(c: &Ctx) -> Result<Sides> {
    let m = c.m();
    let c1 = c.v(Q::Cotton, 1)?;
    let lhs = c.t(2, |ix| sum(m, |k| c1[[k, ix[0], ix[1], k]]));
    Ok((lhs, c.zero(2)))
}

/// `R_{kt} C_{kti}`
fn ric_cotton(c: &Ctx) -> Result<TensorValue> {
    let m = c.m();
    let (ric, cc) = (c.v(Q::Ricci, 0)?, c.v(Q::Cotton, 0)?);
    Ok(c.t(1, |ix| sum2(m, |k, t| ric[[k, t]] * cc[[k, t, ix[0]]])))
}

fn bach_div(c: &Ctx) -> Result<Sides> {
    let (m, mf) = (c.m(), c.mf());
    let b1 = c.v(Q::Bach, 1)?;
    let lhs = c.t(1, |ix| sum(m, |j| b1[[ix[0], j, j]]));
    Ok((lhs, ric_cotton(c)?.scaled((mf - 4.0) / ((mf - 2.0) * (mf - 2.0)))))
}

// ---------------------------------------------------------------- solitons

fn sol_eq1(c: &Ctx) -> Result<Sides> {
    let (ric, x1, l) = (c.v(Q::Ricci, 0)?, c.v(Q::X, 1)?, c.lam()?);
    let lhs = c.t(2, |ix| ric[[ix[0], ix[1]]] + 0.5 * (x1[[ix[0], ix[1]]] + x1[[ix[1], ix[0]]]));
    Ok((lhs, c.t(2, |ix| l * kd(ix[0], ix[1]))))
}

fn sol_eq2(c: &Ctx) -> Result<Sides> {
    let x1 = c.v(Q::X, 1)?;
    Ok((c.sc(c.s()? + tr(&x1)), c.sc(c.mf() * c.lam()?)))
}

fn sol_eq3(c: &Ctx) -> Result<Sides> {
    let m = c.m();
    let (s1, x2) = (c.v(Q::Scalar, 1)?, c.v(Q::X, 2)?);
    Ok(((*s1).clone(), c.t(1, |ix| -sum(m, |i| x2[[i, i, ix[0]]]))))
}

fn sol_eq4(c: &Ctx) -> Result<Sides> {
    let m = c.m();
    let (ric, x, x2) = (c.v(Q::Ricci, 0)?, c.v(Q::X, 0)?, c.v(Q::X, 2)?);
    let lhs = c.t(1, |ix| sum(m, |t| ric[[t, ix[0]]] * x[[t]]));
    let rhs = c.t(1, |ix| -sum(m, |t| x2[[ix[0], t, t]]));
    Ok((lhs, rhs))
}

fn sol_eq5(c: &Ctx) -> Result<Sides> {
    let m = c.m();
    let (ric1, r, x, x2) = (c.v(Q::Ricci, 1)?, c.v(Q::Riemann, 0)?, c.v(Q::X, 0)?, c.v(Q::X, 2)?);
    let lhs = c.t(3, |ix| ric1[[ix[0], ix[1], ix[2]]] - ric1[[ix[0], ix[2], ix[1]]]);
    let rhs = c.t(3, |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        -0.5 * sum(m, |l| r[[l, i, j, k]] * x[[l]]) + 0.5 * (x2[[k, i, j]] - x2[[j, i, k]])
    });
    Ok((lhs, rhs))
}

fn sol_eq6(c: &Ctx) -> Result<Sides> {
    let m = c.m();
    let (ric1, r, x, x2) = (c.v(Q::Ricci, 1)?, c.v(Q::Riemann, 0)?, c.v(Q::X, 0)?, c.v(Q::X, 2)?);
    let lhs = c.t(3, |ix| ric1[[ix[0], ix[1], ix[2]]] - ric1[[ix[2], ix[1], ix[0]]]);
    let rhs = c.t(3, |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        0.5 * sum(m, |l| r[[l, j, k, i]] * x[[l]]) + 0.5 * (x2[[k, j, i]] - x2[[i, j, k]])
    });
    Ok((lhs, rhs))
}

fn scal_rhs(c: &Ctx, v: &TensorValue) -> Result<f64> {
    let (s1, ric) = (c.v(Q::Scalar, 1)?, c.v(Q::Ricci, 0)?);
    Ok(0.5 * dot(v, &s1) + c.lam()? * c.s()? - ric.norm_sq())
}

fn sol_scal_gen(c: &Ctx) -> Result<Sides> {
    let (s2, x) = (c.v(Q::Scalar, 2)?, c.v(Q::X, 0)?);
    Ok((c.sc(0.5 * tr(&s2)), c.sc(scal_rhs(c, &x)?)))
}

fn sol_eq1g(c: &Ctx) -> Result<Sides> {
    let (ric, f2, l) = (c.v(Q::Ricci, 0)?, c.v(Q::F, 2)?, c.lam()?);
    let lhs = c.t(2, |ix| ric[[ix[0], ix[1]]] + f2[[ix[0], ix[1]]]);
    Ok((lhs, c.t(2, |ix| l * kd(ix[0], ix[1]))))
}

fn sol_eq2g(c: &Ctx) -> Result<Sides> {
    let f2 = c.v(Q::F, 2)?;
    Ok((c.sc(c.s()? + tr(&f2)), c.sc(c.mf() * c.lam()?)))
}

fn sol_eq3g(c: &Ctx) -> Result<Sides> {
    let m = c.m();
    let (s1, ric, f1) = (c.v(Q::Scalar, 1)?, c.v(Q::Ricci, 0)?, c.v(Q::F, 1)?);
    Ok(((*s1).clone(), c.t(1, |ix| 2.0 * sum(m, |t| f1[[t]] * ric[[t, ix[0]]]))))
}

fn sol_eq6g(c: &Ctx) -> Result<Sides> {
    let m = c.m();
    let (ric1, r, f1) = (c.v(Q::Ricci, 1)?, c.v(Q::Riemann, 0)?, c.v(Q::F, 1)?);
    let lhs = c.t(3, |ix| ric1[[ix[0], ix[1], ix[2]]] - ric1[[ix[2], ix[1], ix[0]]]);
    let rhs = c.t(3, |ix| -sum(m, |t| f1[[t]] * r[[t, ix[1], ix[0], ix[2]]]));
    Ok((lhs, rhs))
}

fn sol_hamilton(c: &Ctx) -> Result<Sides> {
    let m = c.m();
    let (s1, f1, f2, l) = (c.v(Q::Scalar, 1)?, c.v(Q::F, 1)?, c.v(Q::F, 2)?, c.lam()?);
    let lhs = c.t(1, |ix| {
        let k = ix[0];
        s1[[k]] + 2.0 * sum(m, |t| f1[[t]] * f2[[t, k]]) - 2.0 * l * f1[[k]]
    });
    Ok((lhs, c.zero(1)))
}

fn sol_scal_grad(c: &Ctx) -> Result<Sides> {
    let (s2, f1) = (c.v(Q::Scalar, 2)?, c.v(Q::F, 1)?);
    Ok((c.sc(0.5 * tr(&s2)), c.sc(scal_rhs(c, &f1)?)))
}

fn cao_chen_first(c: &Ctx) -> Result<Sides> {
    let m = c.m();
    let (cc, w, f1, d) = (c.v(Q::Cotton, 0)?, c.v(Q::Weyl, 0)?, c.v(Q::F, 1)?, c.v(D1, 0)?);
    let lhs = c.t(3, |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        cc[[i, j, k]] + sum(m, |t| f1[[t]] * w[[t, i, j, k]])
    });
    Ok((lhs, (*d).clone()))
}

/// `v_t C_{jit}` as a rank-2 tensor in `(i, j)`.
fn vec_cotton_ji(c: &Ctx, v: &[f64]) -> Result<TensorValue> {
    let m = c.m();
    let cc = c.v(Q::Cotton, 0)?;
    Ok(c.t(2, |ix| sum(m, |t| v[t] * cc[[ix[1], ix[0], t]])))
}

/// `T_{ijk,k}`
fn div3(c: &Ctx, q: Q) -> Result<TensorValue> {
    let m = c.m();
    let d1 = c.v(q, 1)?;
    Ok(c.t(2, |ix| sum(m, |k| d1[[ix[0], ix[1], k, k]])))
}

fn cao_chen_second(c: &Ctx) -> Result<Sides> {
    let mf = c.mf();
    let (b, f1) = (c.v(Q::Bach, 0)?, c.v(Q::F, 1)?);
    let dd = div3(c, D1)?;
    let fc = vec_cotton_ji(c, &f1.data)?;
    let rhs = c.t(2, |ix| {
        let (i, j) = (ix[0], ix[1]);
        (dd[[i, j]] + (mf - 3.0) / (mf - 2.0) * fc[[i, j]]) / (mf - 2.0)
    });
    Ok(((*b).clone(), rhs))
}

fn cao_chen_remark(c: &Ctx) -> Result<Sides> {
    let m = c.m();
    let (cc, d, f1) = (c.v(Q::Cotton, 0)?, c.v(D1, 0)?, c.v(Q::F, 1)?);
    let lhs = c.t(2, |ix| sum(m, |t| f1[[t]] * cc[[t, ix[0], ix[1]]]));
    let rhs = c.t(2, |ix| sum(m, |t| f1[[t]] * d[[t, ix[0], ix[1]]]));
    Ok((lhs, rhs))
}

fn d_cyclic(c: &Ctx) -> Result<Sides> {
    let d = c.v(D1, 0)?;
    let lhs = c.t(3, |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        d[[i, j, k]] + d[[j, k, i]] + d[[k, i, j]]
    });
    Ok((lhs, c.zero(3)))
}

/// `T_{ijk,t} + T_{ikt,j} + T_{itj,k}`
fn cyclic_derivative(c: &Ctx, q: Q) -> Result<TensorValue> {
    let t1 = c.v(q, 1)?;
    Ok(c.t(4, |ix| {
        let (i, j, k, t) = (ix[0], ix[1], ix[2], ix[3]);
        t1[[i, j, k, t]] + t1[[i, k, t, j]] + t1[[i, t, j, k]]
    }))
}

/// `f_l (T_{lkt} δ_ij + T_{ltj} δ_ik + T_{ljk} δ_it) − (f_j T_{ikt} + f_k T_{itj} + f_t T_{ijk})`
fn d_lemma_bracket(c: &Ctx, q: Q) -> Result<TensorValue> {
    let m = c.m();
    let (f1, tt) = (c.v(Q::F, 1)?, c.v(q, 0)?);
    Ok(c.t(4, |ix| {
        let (i, j, k, t) = (ix[0], ix[1], ix[2], ix[3]);
        sum(m, |l| f1[[l]] * (tt[[l, k, t]] * kd(i, j) + tt[[l, t, j]] * kd(i, k) + tt[[l, j, k]] * kd(i, t)))
            - (f1[[j]] * tt[[i, k, t]] + f1[[k]] * tt[[i, t, j]] + f1[[t]] * tt[[i, j, k]])
    }))
}

fn d_cyclic_cotton(c: &Ctx) -> Result<Sides> {
    let mf = c.mf();
    Ok((cyclic_derivative(c, D1)?, d_lemma_bracket(c, Q::Cotton)?.scaled(1.0 / (mf - 2.0))))
}

fn d_cyclic_weyl(c: &Ctx) -> Result<Sides> {
    let (m, mf) = (c.m(), c.mf());
    let (f1, w) = (c.v(Q::F, 1)?, c.v(Q::Weyl, 0)?);
    let mut rhs = d_lemma_bracket(c, D1)?;
    let fw = |a: usize, b: usize, cc: usize| sum(m, |s| f1[[s]] * w[[s, a, b, cc]]);
    for (flat, v) in rhs.data.iter_mut().enumerate() {
        let (i, j, k, t) = (flat / (m * m * m), flat / (m * m) % m, flat / m % m, flat % m);
        *v += f1[[j]] * fw(i, k, t) + f1[[k]] * fw(i, t, j) + f1[[t]] * fw(i, j, k);
        *v /= mf - 2.0;
    }
    Ok((cyclic_derivative(c, D1)?, rhs))
}

/// `R_{sj} W_{sikt} + R_{sk} W_{sitj} + R_{st} W_{sijk}`
fn ric_weyl_cyclic(c: &Ctx) -> Result<TensorValue> {
    let m = c.m();
    let (ric, w) = (c.v(Q::Ricci, 0)?, c.v(Q::Weyl, 0)?);
    Ok(c.t(4, |ix| {
        let (i, j, k, t) = (ix[0], ix[1], ix[2], ix[3]);
        sum(m, |s| ric[[s, j]] * w[[s, i, k, t]] + ric[[s, k]] * w[[s, i, t, j]] + ric[[s, t]] * w[[s, i, j, k]])
    }))
}

fn c_cyclic(c: &Ctx) -> Result<Sides> {
    Ok((cyclic_derivative(c, Q::Cotton)?, ric_weyl_cyclic(c)?))
}

fn d_cyclic_mixed(c: &Ctx) -> Result<Sides> {
    let mf = c.mf();
    let rw = ric_weyl_cyclic(c)?;
    let cc = cyclic_derivative(c, Q::Cotton)?;
    let br = d_lemma_bracket(c, Q::Cotton)?;
    let a = (mf - 6.0) / (2.0 * (mf - 3.0));
    let mut rhs = rw;
    for ((v, x), y) in rhs.data.iter_mut().zip(&cc.data).zip(&br.data) {
        *v = a * (*v - x) + y / (mf - 2.0);
    }
    Ok((cyclic_derivative(c, D1)?, rhs))
}

// ------------------------------------------------------ conformal helpers

struct ConfU {
    u1: std::rc::Rc<TensorValue>,
    u2: std::rc::Rc<TensorValue>,
    lap: f64,
    gu: f64,
    e2u: f64,
}

fn conf_u(c: &Ctx) -> Result<ConfU> {
    let (u1, u2) = (c.v(Q::U, 1)?, c.v(Q::U, 2)?);
    let lap = tr(&u2);
    let gu = u1.norm_sq();
    let e2u = (2.0 * c.u()?).exp();
    Ok(ConfU { u1, u2, lap, gu, e2u })
}

/// `T_ij − (m−2) u_ij + (m−2) u_i u_j` for `T` = Ricci or Schouten.
fn conf_head(c: &Ctx, q: Q, cu: &ConfU) -> Result<TensorValue> {
    let mf = c.mf();
    let a = c.v(q, 0)?;
    Ok(c.t(2, |ix| {
        let (i, j) = (ix[0], ix[1]);
        a[[i, j]] - (mf - 2.0) * cu.u2[[i, j]] + (mf - 2.0) * cu.u1[[i]] * cu.u1[[j]]
    }))
}

fn diag(c: &Ctx, v: f64) -> TensorValue {
    c.t(2, |ix| v * kd(ix[0], ix[1]))
}

// --------------------------------------------------- conformally Einstein

fn ce_comp_ricci(c: &Ctx) -> Result<Sides> {
    let mf = c.mf();
    let cu = conf_u(c)?;
    let lhs = conf_head(c, Q::Ricci, &cu)?;
    Ok((lhs, diag(c, (c.s()? - (mf - 2.0) * cu.lap + (mf - 2.0) * cu.gu) / mf)))
}

fn ce_traced(c: &Ctx) -> Result<Sides> {
    let mf = c.mf();
    let cu = conf_u(c)?;
    let lhs = c.s()? - 2.0 * (mf - 1.0) * cu.lap - (mf - 1.0) * (mf - 2.0) * cu.gu;
    Ok((c.sc(lhs), c.sc(c.lam()? * mf * cu.e2u)))
}

fn ce_comp_schouten(c: &Ctx) -> Result<Sides> {
    let mf = c.mf();
    let cu = conf_u(c)?;
    let lhs = conf_head(c, Q::Schouten, &cu)?;
    let v = ((mf - 2.0) * c.s()? / (2.0 * (mf - 1.0)) - (mf - 2.0) * cu.lap + (mf - 2.0) * cu.gu) / mf;
    Ok((lhs, diag(c, v)))
}

fn ce_single(c: &Ctx) -> Result<Sides> {
    let mf = c.mf();
    let cu = conf_u(c)?;
    let lhs = conf_head(c, Q::Ricci, &cu)?;
    Ok((lhs, diag(c, cu.lap + (mf - 2.0) * cu.gu + c.lam()? * cu.e2u)))
}

/// `C_ijk − v_t W_tijk`
fn cotton_minus_vw(c: &Ctx, v: &[f64]) -> Result<TensorValue> {
    let m = c.m();
    let (cc, w) = (c.v(Q::Cotton, 0)?, c.v(Q::Weyl, 0)?);
    Ok(c.t(3, |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        cc[[i, j, k]] - sum(m, |t| v[t] * w[[t, i, j, k]])
    }))
}

fn ce_first_gn(c: &Ctx) -> Result<Sides> {
    let mf = c.mf();
    let u1 = c.v(Q::U, 1)?;
    let v: Vec<f64> = u1.data.iter().map(|x| (mf - 2.0) * x).collect();
    Ok((cotton_minus_vw(c, &v)?, c.zero(3)))
}

/// `M_tk W_itjk`
fn mat_weyl(c: &Ctx, mm: impl Fn(usize, usize) -> f64) -> Result<TensorValue> {
    let m = c.m();
    let w = c.v(Q::Weyl, 0)?;
    let mat: Vec<f64> = (0..m * m).map(|f| mm(f / m, f % m)).collect();
    Ok(c.t(2, |ix| sum2(m, |t, k| mat[t * m + k] * w[[ix[0], t, ix[1], k]])))
}

fn ce_second_gn(c: &Ctx) -> Result<Sides> {
    let mf = c.mf();
    let (b, u1) = (c.v(Q::Bach, 0)?, c.v(Q::U, 1)?);
    let uw = mat_weyl(c, |t, k| u1[[t]] * u1[[k]])?;
    let lhs = c.t(2, |ix| b[[ix[0], ix[1]]] - (mf - 4.0) * uw[[ix[0], ix[1]]]);
    Ok((lhs, c.zero(2)))
}

fn ce_nabla_lap_u_rhs(c: &Ctx, cu: &ConfU) -> Result<TensorValue> {
    let (m, mf) = (c.m(), c.mf());
    let (s1, ric, s) = (c.v(Q::Scalar, 1)?, c.v(Q::Ricci, 0)?, c.s()?);
    Ok(c.t(1, |ix| {
        let k = ix[0];
        s1[[k]] / (2.0 * (mf - 1.0)) - sum(m, |t| cu.u1[[t]] * ric[[t, k]]) - s * cu.u1[[k]] / (mf * (mf - 1.0))
            + (mf + 2.0) / mf * cu.lap * cu.u1[[k]]
            + (mf - 2.0) / mf * cu.gu * cu.u1[[k]]
    }))
}

/// `u_ttk` or `f_ttk`
fn grad_lap(c: &Ctx, q: Q) -> Result<TensorValue> {
    let m = c.m();
    let a3 = c.v(q, 3)?;
    Ok(c.t(1, |ix| sum(m, |t| a3[[t, t, ix[0]]])))
}

fn ce_nabla_lap_u(c: &Ctx) -> Result<Sides> {
    let cu = conf_u(c)?;
    Ok((grad_lap(c, Q::U)?, ce_nabla_lap_u_rhs(c, &cu)?))
}

fn ce_grad_u_nabla_lap_u(c: &Ctx) -> Result<Sides> {
    let (m, mf) = (c.m(), c.mf());
    let cu = conf_u(c)?;
    let (s1, ric, s) = (c.v(Q::Scalar, 1)?, c.v(Q::Ricci, 0)?, c.s()?);
    let lhs = dot(&cu.u1, &grad_lap(c, Q::U)?);
    let ric_uu = sum2(m, |a, b| ric[[a, b]] * cu.u1[[a]] * cu.u1[[b]]);
    let rhs = dot(&s1, &cu.u1) / (2.0 * (mf - 1.0)) - ric_uu - s * cu.gu / (mf * (mf - 1.0))
        + (mf + 2.0) / mf * cu.lap * cu.gu
        + (mf - 2.0) / mf * cu.gu * cu.gu;
    Ok((c.sc(lhs), c.sc(rhs)))
}

fn ce_ric_hess(c: &Ctx) -> Result<Sides> {
    let (m, mf) = (c.m(), c.mf());
    let cu = conf_u(c)?;
    let ric = c.v(Q::Ricci, 0)?;
    let lhs = sum2(m, |a, b| (ric[[a, b]] - (mf - 2.0) * cu.u2[[a, b]]) * cu.u1[[a]] * cu.u1[[b]]);
    let rhs = cu.gu / mf * (c.s()? - (mf - 2.0) * cu.lap - (mf - 1.0) * (mf - 2.0) * cu.gu);
    Ok((c.sc(lhs), c.sc(rhs)))
}

/// Left side and the `λ`-free part of the right side shared by both
/// Laplacian forms.
fn ce_lap_common(c: &Ctx, cu: &ConfU) -> Result<(f64, f64)> {
    let (m, mf) = (c.m(), c.mf());
    let (s1, s2, u4, s) = (c.v(Q::Scalar, 1)?, c.v(Q::Scalar, 2)?, c.v(Q::U, 4)?, c.s()?);
    let lhs = 0.5 * (tr(&s2) - (mf - 2.0) * dot(&s1, &cu.u1));
    let bilap = sum2(m, |a, b| u4[[a, a, b, b]]);
    let rhs = (mf - 1.0) * bilap + (mf - 1.0) * (mf - 2.0) * cu.u2.norm_sq() + s * cu.lap
        - 2.0 * (mf - 1.0) * cu.lap * cu.lap;
    Ok((lhs, rhs))
}

fn ce_lap_scalar(c: &Ctx) -> Result<Sides> {
    let mf = c.mf();
    let cu = conf_u(c)?;
    let (lhs, rhs) = ce_lap_common(c, &cu)?;
    let tail = (mf + 2.0) / mf * cu.gu * (c.s()? - 2.0 * (mf - 1.0) * cu.lap - (mf - 1.0) * (mf - 2.0) * cu.gu);
    Ok((c.sc(lhs), c.sc(rhs + tail)))
}

fn ce_lap_scalar_lambda(c: &Ctx) -> Result<Sides> {
    let mf = c.mf();
    let cu = conf_u(c)?;
    let (lhs, rhs) = ce_lap_common(c, &cu)?;
    Ok((c.sc(lhs), c.sc(rhs + (mf + 2.0) * c.lam()? * cu.e2u * cu.gu)))
}

// ---------------------------------------------- conformal gradient solitons

struct ConfF {
    f1: std::rc::Rc<TensorValue>,
    f2: std::rc::Rc<TensorValue>,
    lap: f64,
    gf: f64,
    fu: f64,
}

fn conf_f(c: &Ctx, cu: &ConfU) -> Result<ConfF> {
    let (f1, f2) = (c.v(Q::F, 1)?, c.v(Q::F, 2)?);
    let lap = tr(&f2);
    let gf = f1.norm_sq();
    let fu = dot(&f1, &cu.u1);
    Ok(ConfF { f1, f2, lap, gf, fu })
}

fn cgrs_head(c: &Ctx, q: Q, cu: &ConfU, cf: &ConfF) -> Result<TensorValue> {
    let mut h = conf_head(c, q, cu)?;
    let m = c.m();
    for i in 0..m {
        for j in 0..m {
            h.data[i * m + j] += cf.f2[[i, j]] - (cf.f1[[i]] * cu.u1[[j]] + cf.f1[[j]] * cu.u1[[i]]);
        }
    }
    Ok(h)
}

fn cgrs_comp_ricci(c: &Ctx) -> Result<Sides> {
    let mf = c.mf();
    let cu = conf_u(c)?;
    let cf = conf_f(c, &cu)?;
    let lhs = cgrs_head(c, Q::Ricci, &cu, &cf)?;
    let v = (c.s()? - (mf - 2.0) * (cu.lap - cu.gu) + cf.lap - 2.0 * cf.fu) / mf;
    Ok((lhs, diag(c, v)))
}

fn cgrs_traced(c: &Ctx) -> Result<Sides> {
    let mf = c.mf();
    let cu = conf_u(c)?;
    let cf = conf_f(c, &cu)?;
    let lhs = c.s()? - 2.0 * (mf - 1.0) * cu.lap - (mf - 1.0) * (mf - 2.0) * cu.gu + cf.lap + (mf - 2.0) * cf.fu;
    Ok((c.sc(lhs), c.sc(mf * c.lam()? * cu.e2u)))
}

fn cgrs_comp_schouten(c: &Ctx) -> Result<Sides> {
    let mf = c.mf();
    let cu = conf_u(c)?;
    let cf = conf_f(c, &cu)?;
    let lhs = cgrs_head(c, Q::Schouten, &cu, &cf)?;
    let v = ((mf - 2.0) / (2.0 * (mf - 1.0)) * c.s()? - (mf - 2.0) * (cu.lap - cu.gu) + cf.lap - 2.0 * cf.fu) / mf;
    Ok((lhs, diag(c, v)))
}

fn cgrs_d_uf_alt(c: &Ctx) -> Result<Sides> {
    Ok(((*c.v(DUF, 0)?).clone(), (*c.v(Q::Duf(DufForm::Alt), 0)?).clone()))
}

fn cgrs_d_uf_tilde(c: &Ctx) -> Result<Sides> {
    let e3u = (3.0 * c.u()?).exp();
    Ok(((*c.v(DUF, 0)?).clone(), c.tv(D1, 0)?.scaled(e3u)))
}

fn cgrs_first(c: &Ctx) -> Result<Sides> {
    let mf = c.mf();
    let (u1, f1) = (c.v(Q::U, 1)?, c.v(Q::F, 1)?);
    let v: Vec<f64> = u1.data.iter().zip(&f1.data).map(|(u, f)| (mf - 2.0) * u - f).collect();
    Ok((cotton_minus_vw(c, &v)?, (*c.v(DUF, 0)?).clone()))
}

fn cgrs_second(c: &Ctx) -> Result<Sides> {
    let mf = c.mf();
    let (b, u1, f1) = (c.v(Q::Bach, 0)?, c.v(Q::U, 1)?, c.v(Q::F, 1)?);
    let v: Vec<f64> = u1.data.iter().zip(&f1.data).map(|(u, f)| (mf - 2.0) * u - f).collect();
    let dd = div3(c, DUF)?;
    let vc = vec_cotton_ji(c, &v)?;
    let ww = mat_weyl(c, |t, k| f1[[t]] * u1[[k]] + f1[[k]] * u1[[t]] - (mf - 2.0) * u1[[t]] * u1[[k]])?;
    let rhs = c.t(2, |ix| {
        let (i, j) = (ix[0], ix[1]);
        (dd[[i, j]] - (mf - 3.0) / (mf - 2.0) * vc[[i, j]] + ww[[i, j]]) / (mf - 2.0)
    });
    Ok(((*b).clone(), rhs))
}

fn cgrs_second_equivalent(c: &Ctx) -> Result<Sides> {
    let (m, mf) = (c.m(), c.mf());
    let (b, u1, f1, duf) = (c.v(Q::Bach, 0)?, c.v(Q::U, 1)?, c.v(Q::F, 1)?, c.v(DUF, 0)?);
    let v: Vec<f64> = u1.data.iter().zip(&f1.data).map(|(u, f)| (mf - 2.0) * u - f).collect();
    let dd = div3(c, DUF)?;
    let ww = mat_weyl(c, |t, k| {
        (mf - 2.0) * (mf - 4.0) * u1[[t]] * u1[[k]] - (mf - 4.0) * (u1[[k]] * f1[[t]] + f1[[k]] * u1[[t]])
            + (mf - 3.0) / (mf - 2.0) * f1[[t]] * f1[[k]]
    })?;
    let rhs = c.t(2, |ix| {
        let (i, j) = (ix[0], ix[1]);
        (ww[[i, j]] - (mf - 3.0) / (mf - 2.0) * sum(m, |t| v[t] * duf[[j, i, t]]) + dd[[i, j]]) / (mf - 2.0)
    });
    Ok(((*b).clone(), rhs))
}

fn cgrs_d_uf_div(c: &Ctx) -> Result<Sides> {
    let (m, mf) = (c.m(), c.mf());
    let (u1, duf) = (c.v(Q::U, 1)?, c.v(DUF, 0)?);
    let td = c.tv(D1, 1)?;
    let e4u = (4.0 * c.u()?).exp();
    let lhs = div3(c, DUF)?;
    let rhs = c.t(2, |ix| {
        let (i, j) = (ix[0], ix[1]);
        e4u * sum(m, |t| td[[i, j, t, t]]) - (mf - 4.0) * sum(m, |t| u1[[t]] * duf[[i, j, t]])
            + sum(m, |t| u1[[t]] * duf[[j, i, t]])
    });
    Ok((lhs, rhs))
}

/// `Σ_t a_t M_tk`
fn vec_mat(m: usize, a: &TensorValue, mm: &TensorValue) -> Vec<f64> {
    (0..m).map(|k| sum(m, |t| a[[t]] * mm[[t, k]])).collect()
}

fn cgrs_sk_uttk_fttk(c: &Ctx) -> Result<Sides> {
    let (m, mf) = (c.m(), c.mf());
    let cu = conf_u(c)?;
    let cf = conf_f(c, &cu)?;
    let (s1, ric) = (c.v(Q::Scalar, 1)?, c.v(Q::Ricci, 0)?);
    let (ut, ft) = (grad_lap(c, Q::U)?, grad_lap(c, Q::F)?);
    let (ur, fr) = (vec_mat(m, &cu.u1, &ric), vec_mat(m, &cf.f1, &ric));
    let (uu, uf, fu) = (vec_mat(m, &cu.u1, &cu.u2), vec_mat(m, &cu.u1, &cf.f2), vec_mat(m, &cf.f1, &cu.u2));
    let lhs = c.t(1, |ix| {
        let k = ix[0];
        s1[[k]] / (2.0 * (mf - 1.0)) - ut[[k]] + ft[[k]] / (mf - 2.0)
    });
    let rhs = c.t(1, |ix| {
        let k = ix[0];
        mf / (mf - 1.0) * (ur[k] - fr[k] / (mf - 2.0)) - (mf - 2.0) / (mf - 1.0) * uu[k]
            + (uf[k] + fu[k]) / (mf - 1.0)
            - mf / (mf - 1.0) * cu.lap * cu.u1[[k]]
            + mf / ((mf - 1.0) * (mf - 2.0)) * (cu.u1[[k]] * cf.lap + cf.f1[[k]] * cu.lap)
    });
    Ok((lhs, rhs))
}

fn cgrs_sk_uttk_fttk_second(c: &Ctx) -> Result<Sides> {
    let (m, mf) = (c.m(), c.mf());
    let cu = conf_u(c)?;
    let cf = conf_f(c, &cu)?;
    let (s1, s) = (c.v(Q::Scalar, 1)?, c.s()?);
    let (ut, ft) = (grad_lap(c, Q::U)?, grad_lap(c, Q::F)?);
    let (uu, uf, fu) = (vec_mat(m, &cu.u1, &cu.u2), vec_mat(m, &cu.u1, &cf.f2), vec_mat(m, &cf.f1, &cu.u2));
    let a = (mf - 2.0) / (2.0 * (mf - 1.0));
    let lhs = c.t(1, |ix| {
        let k = ix[0];
        s1[[k]] / (2.0 * (mf - 1.0)) - ut[[k]] + ft[[k]] / (2.0 * (mf - 1.0))
    });
    let rhs = c.t(1, |ix| {
        let k = ix[0];
        let uk = cu.u1[[k]];
        (mf - 2.0) * uu[k] - a * fu[k] - a * uf[k] + s / (mf - 1.0) * uk - 2.0 * cu.lap * uk - (mf - 2.0) * cu.gu * uk
            + cf.lap / (mf - 1.0) * uk
            + (mf - 2.0) / (mf - 1.0) * cf.fu * uk
    });
    Ok((lhs, rhs))
}

fn cgrs_fttk_prelim(c: &Ctx) -> Result<Sides> {
    let (m, mf) = (c.m(), c.mf());
    let cu = conf_u(c)?;
    let cf = conf_f(c, &cu)?;
    let (ric, s) = (c.v(Q::Ricci, 0)?, c.s()?);
    let (ur, fr) = (vec_mat(m, &cu.u1, &ric), vec_mat(m, &cf.f1, &ric));
    let (uu, uf, fu) = (vec_mat(m, &cu.u1, &cu.u2), vec_mat(m, &cu.u1, &cf.f2), vec_mat(m, &cf.f1, &cu.u2));
    let q = (mf - 2.0) * (mf - 2.0);
    let rhs = c.t(1, |ix| {
        let k = ix[0];
        let (uk, fk) = (cu.u1[[k]], cf.f1[[k]]);
        2.0 * (mf - 2.0) * ur[k] - 2.0 * fr[k] - 2.0 * q * uu[k] + (mf - 2.0) * uf[k] + (mf - 2.0) * fu[k]
            + 2.0 * q / mf * cu.lap * uk
            - 2.0 * (mf - 2.0) / mf * s * uk
            + 2.0 * (mf - 1.0) * q / mf * cu.gu * uk
            + 4.0 / mf * cf.lap * uk
            + 2.0 * cu.lap * fk
            - 2.0 * q / mf * cf.fu * uk
    });
    Ok((grad_lap(c, Q::F)?, rhs))
}

fn cgrs_fttk(c: &Ctx) -> Result<Sides> {
    let (m, mf) = (c.m(), c.mf());
    let cu = conf_u(c)?;
    let cf = conf_f(c, &cu)?;
    let (ric, s) = (c.v(Q::Ricci, 0)?, c.s()?);
    let fr = vec_mat(m, &cf.f1, &ric);
    let (ff, uf) = (vec_mat(m, &cf.f1, &cf.f2), vec_mat(m, &cu.u1, &cf.f2));
    let rhs = c.t(1, |ix| {
        let k = ix[0];
        let (uk, fk) = (cu.u1[[k]], cf.f1[[k]]);
        ff[k] - fr[k] - (mf - 2.0) * uf[k] + (mf - 2.0) * (2.0 * mf - 1.0) / mf * cu.gu * fk + 2.0 * cf.lap * uk
            + (3.0 * mf - 2.0) / mf * cu.lap * fk
            + (mf - 2.0) * cf.fu * uk
            - cf.gf * uk
            - (s + cf.lap) / mf * fk
            - (mf - 2.0) / mf * cf.fu * fk
    });
    Ok((grad_lap(c, Q::F)?, rhs))
}

fn cgrs_uttk(c: &Ctx) -> Result<Sides> {
    let (m, mf) = (c.m(), c.mf());
    let cu = conf_u(c)?;
    let cf = conf_f(c, &cu)?;
    let (s1, ric, s) = (c.v(Q::Scalar, 1)?, c.v(Q::Ricci, 0)?, c.s()?);
    let ur = vec_mat(m, &cu.u1, &ric);
    let (uf, ff) = (vec_mat(m, &cu.u1, &cf.f2), vec_mat(m, &cf.f1, &cf.f2));
    let rhs = c.t(1, |ix| {
        let k = ix[0];
        let (uk, fk) = (cu.u1[[k]], cf.f1[[k]]);
        s1[[k]] / (2.0 * (mf - 1.0)) - ur[k] - uf[k] + ff[k] / (mf - 1.0) + (mf - 2.0) / mf * cu.gu * uk
            + (mf - 2.0) / mf * cf.fu * uk
            - s / (mf * (mf - 1.0)) * (uk + fk)
            + (mf + 2.0) / mf * cu.lap * uk
            - cf.gf / (mf - 1.0) * uk
            + cf.lap / mf * uk
            + 2.0 * (mf - 1.0) / mf * cu.gu * fk
            - (mf - 2.0) / (mf * (mf - 1.0)) * cf.fu * fk
            + 2.0 / mf * cu.lap * fk
            - cf.lap / (mf * (mf - 1.0)) * fk
    });
    Ok((grad_lap(c, Q::U)?, rhs))
}

// ------------------------------------------------- generic solitons, D^X

fn grs_first(c: &Ctx) -> Result<Sides> {
    let x = c.v(Q::X, 0)?;
    let v: Vec<f64> = x.data.iter().map(|a| -a).collect();
    Ok((cotton_minus_vw(c, &v)?, (*c.v(Q::DX, 0)?).clone()))
}

fn grs_second(c: &Ctx) -> Result<Sides> {
    let mf = c.mf();
    let (b, x, x1) = (c.v(Q::Bach, 0)?, c.v(Q::X, 0)?, c.v(Q::X, 1)?);
    let dd = div3(c, Q::DX)?;
    let xc = vec_cotton_ji(c, &x.data)?;
    let ww = mat_weyl(c, |t, k| 0.5 * (x1[[t, k]] - x1[[k, t]]))?;
    let rhs = c.t(2, |ix| {
        let (i, j) = (ix[0], ix[1]);
        (dd[[i, j]] + (mf - 3.0) / (mf - 2.0) * xc[[i, j]] + ww[[i, j]]) / (mf - 2.0)
    });
    Ok(((*b).clone(), rhs))
}

fn grs_remark(c: &Ctx) -> Result<Sides> {
    let m = c.m();
    let (cc, d, x) = (c.v(Q::Cotton, 0)?, c.v(Q::DX, 0)?, c.v(Q::X, 0)?);
    let lhs = c.t(2, |ix| sum(m, |t| x[[t]] * cc[[t, ix[0], ix[1]]]));
    let rhs = c.t(2, |ix| sum(m, |t| x[[t]] * d[[t, ix[0], ix[1]]]));
    Ok((lhs, rhs))
}

fn cgers_head(c: &Ctx, q: Q, cu: &ConfU) -> Result<TensorValue> {
    let m = c.m();
    let x1 = c.v(Q::X, 1)?;
    let mut h = conf_head(c, q, cu)?;
    for i in 0..m {
        for j in 0..m {
            h.data[i * m + j] += 0.5 * cu.e2u * (x1[[i, j]] + x1[[j, i]]);
        }
    }
    Ok(h)
}

fn cgers_comp_ricci(c: &Ctx) -> Result<Sides> {
    let mf = c.mf();
    let cu = conf_u(c)?;
    let div = tr(&*c.v(Q::X, 1)?);
    let lhs = cgers_head(c, Q::Ricci, &cu)?;
    let v = (c.s()? - (mf - 2.0) * (cu.lap - cu.gu) + cu.e2u * div) / mf;
    Ok((lhs, diag(c, v)))
}

fn cgers_traced(c: &Ctx) -> Result<Sides> {
    let mf = c.mf();
    let cu = conf_u(c)?;
    let (x, x1) = (c.v(Q::X, 0)?, c.v(Q::X, 1)?);
    let lhs = c.s()? - 2.0 * (mf - 1.0) * cu.lap - (mf - 1.0) * (mf - 2.0) * cu.gu
        + cu.e2u * (tr(&x1) + mf * dot(&x, &cu.u1));
    Ok((c.sc(lhs), c.sc(mf * c.lam()? * cu.e2u)))
}

fn cgers_comp_schouten(c: &Ctx) -> Result<Sides> {
    let mf = c.mf();
    let cu = conf_u(c)?;
    let div = tr(&*c.v(Q::X, 1)?);
    let lhs = cgers_head(c, Q::Schouten, &cu)?;
    let v = ((mf - 2.0) / (2.0 * (mf - 1.0)) * c.s()? - (mf - 2.0) * (cu.lap - cu.gu) + cu.e2u * div) / mf;
    Ok((lhs, diag(c, v)))
}

fn cgers_d_ux_tilde(c: &Ctx) -> Result<Sides> {
    let e3u = (3.0 * c.u()?).exp();
    Ok(((*c.v(Q::DuX, 0)?).clone(), c.tv(Q::DX, 0)?.scaled(e3u)))
}

fn cgers_first(c: &Ctx) -> Result<Sides> {
    let mf = c.mf();
    let cu = conf_u(c)?;
    let x = c.v(Q::X, 0)?;
    let v: Vec<f64> = cu.u1.data.iter().zip(&x.data).map(|(u, a)| (mf - 2.0) * u - cu.e2u * a).collect();
    Ok((cotton_minus_vw(c, &v)?, (*c.v(Q::DuX, 0)?).clone()))
}

fn cgers_second(c: &Ctx) -> Result<Sides> {
    let mf = c.mf();
    let cu = conf_u(c)?;
    let (b, x, x1) = (c.v(Q::Bach, 0)?, c.v(Q::X, 0)?, c.v(Q::X, 1)?);
    let e = cu.e2u;
    let v: Vec<f64> = cu.u1.data.iter().zip(&x.data).map(|(u, a)| (mf - 2.0) * u - e * a).collect();
    let dd = div3(c, Q::DuX)?;
    let vc = vec_cotton_ji(c, &v)?;
    let ww = mat_weyl(c, |t, k| {
        0.5 * e * (x1[[t, k]] - x1[[k, t]]) + 2.0 * e * x[[t]] * cu.u1[[k]] - (mf - 2.0) * cu.u1[[t]] * cu.u1[[k]]
    })?;
    let rhs = c.t(2, |ix| {
        let (i, j) = (ix[0], ix[1]);
        (dd[[i, j]] - (mf - 3.0) / (mf - 2.0) * vc[[i, j]] + ww[[i, j]]) / (mf - 2.0)
    });
    Ok(((*b).clone(), rhs))
}

fn cgers_sk_uttk_xttk(c: &Ctx) -> Result<Sides> {
    let (m, mf) = (c.m(), c.mf());
    let cu = conf_u(c)?;
    let e = cu.e2u;
    let (s1, ric, x, x1, x2) = (c.v(Q::Scalar, 1)?, c.v(Q::Ricci, 0)?, c.v(Q::X, 0)?, c.v(Q::X, 1)?, c.v(Q::X, 2)?);
    let ut = grad_lap(c, Q::U)?;
    let div = tr(&x1);
    let uu = vec_mat(m, &cu.u1, &cu.u2);
    let lhs = c.t(1, |ix| {
        let k = ix[0];
        (mf - 2.0) / (2.0 * (mf - 1.0)) * s1[[k]] - (mf - 2.0) * ut[[k]] + e * sum(m, |t| x2[[t, t, k]])
    });
    let rhs = c.t(1, |ix| {
        let k = ix[0];
        let uk = cu.u1[[k]];
        mf / (mf - 1.0) * sum(m, |t| ((mf - 2.0) * cu.u1[[t]] - e * x[[t]]) * ric[[t, k]])
            - (mf - 2.0) * (mf - 2.0) / (mf - 1.0) * uu[k]
            + 2.0 / (mf - 1.0) * e * div * uk
            - mf * (mf - 2.0) / (mf - 1.0) * cu.lap * uk
            - mf / (mf - 1.0) * e * sum(m, |t| cu.u1[[t]] * (x1[[t, k]] + x1[[k, t]]))
            + mf / (2.0 * (mf - 1.0)) * e * sum(m, |t| x2[[t, k, t]] - x2[[k, t, t]])
    });
    Ok((lhs, rhs))
}

// ------------------------------------------------------------ higher order

/// `D_itk,tk`
fn d_div2(c: &Ctx) -> Result<TensorValue> {
    let m = c.m();
    let d2 = c.v(D1, 2)?;
    Ok(c.t(1, |ix| sum2(m, |t, k| d2[[ix[0], t, k, t, k]])))
}

/// `D_itk,tki`
fn d_div3(c: &Ctx) -> Result<f64> {
    let m = c.m();
    let d3 = c.v(D1, 3)?;
    Ok(sum(m, |i| sum2(m, |t, k| d3[[i, t, k, t, k, i]])))
}

fn high_third_1(c: &Ctx) -> Result<Sides> {
    Ok((ric_cotton(c)?, d_div2(c)?.scaled(c.mf() - 2.0)))
}

fn high_third_2(c: &Ctx) -> Result<Sides> {
    let (m, mf) = (c.m(), c.mf());
    let b1 = c.v(Q::Bach, 1)?;
    let lhs = c.t(1, |ix| sum(m, |k| b1[[ix[0], k, k]]));
    Ok((lhs, d_div2(c)?.scaled((mf - 4.0) / (mf - 2.0))))
}

fn high_fourth_1(c: &Ctx) -> Result<Sides> {
    let (m, mf) = (c.m(), c.mf());
    let (cc, b, w, ric) = (c.v(Q::Cotton, 0)?, c.v(Q::Bach, 0)?, c.v(Q::Weyl, 0)?, c.v(Q::Ricci, 0)?);
    let rrw = sum2(m, |i, j| ric[[i, j]] * sum2(m, |k, t| ric[[k, t]] * w[[i, k, j, t]]));
    let lhs = 0.5 * cc.norm_sq() + (mf - 2.0) * dot(&ric, &b) - rrw;
    Ok((c.sc(lhs), c.sc((mf - 2.0) * d_div3(c)?)))
}

fn high_fourth_2(c: &Ctx) -> Result<Sides> {
    let (m, mf) = (c.m(), c.mf());
    let b2 = c.v(Q::Bach, 2)?;
    let lhs = sum2(m, |i, k| b2[[i, k, k, i]]);
    Ok((c.sc(lhs), c.sc((mf - 4.0) / (mf - 2.0) * d_div3(c)?)))
}
