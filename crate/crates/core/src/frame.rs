//! Cartan data of the base 4-manifold: the `so(4) = sp(1)₊ ⊕ sp(1)₋`
//! splitting, the connection form, the derivation tables of the two
//! curvature models, base curvature and its contractions, and the
//! `d² = 0` / Bianchi self-consistency suite.
//!
//! Scalar curvature is fixed at 48, i.e. the round model has sectional
//! curvature 4.

use std::ops::{Add, Neg, Sub};

use crate::coefficient::Coefficient;
use crate::error::{Error, Result};
use crate::form::{Coframe, DerivationTable, Form, Generator};
use crate::matrix::{labels, CoefficientMatrix, FormMatrix};
use crate::report::VerificationReport;

/// Cyclic permutations `(μ, η, ν)` of `(1, 2, 3)`.
pub const CYCLIC: [(usize, usize, usize); 3] = [(1, 2, 3), (2, 3, 1), (3, 1, 2)];

/// `(η, ν)` completing `μ` to a cyclic triple.
pub fn cyclic_partners(mu: usize) -> (usize, usize) {
    let (_, e, n) = CYCLIC[mu - 1];
    (e, n)
}

/// The self-dual Weyl block `w` as a 3×3 coefficient array.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeylArray {
    entries: [[Coefficient; 3]; 3],
}

impl WeylArray {
    /// Symmetric traceless array of ring symbols.
    pub fn symbolic() -> Self {
        WeylArray {
            entries: std::array::from_fn(|j| std::array::from_fn(|k| Coefficient::weyl(j + 1, k + 1))),
        }
    }

    pub fn zero() -> Self {
        WeylArray {
            entries: Default::default(),
        }
    }

    /// Arbitrary entries; used for negative controls (asymmetric, traceful).
    pub fn from_entries(entries: [[Coefficient; 3]; 3]) -> Self {
        WeylArray { entries }
    }

    /// `w_{jk}`, 1-based.
    pub fn get(&self, j: usize, k: usize) -> &Coefficient {
        &self.entries[j - 1][k - 1]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CurvatureModel {
    /// Round `S⁴` of sectional curvature 4 (`w = 0`).
    Round,
    /// General self-dual Einstein base with symbolic `w`.
    FormalW,
}

impl CurvatureModel {
    pub const ALL: [CurvatureModel; 2] = [CurvatureModel::Round, CurvatureModel::FormalW];

    pub fn weyl(self) -> WeylArray {
        match self {
            CurvatureModel::Round => WeylArray::zero(),
            CurvatureModel::FormalW => WeylArray::symbolic(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CurvatureModel::Round => "round",
            CurvatureModel::FormalW => "formalw",
        }
    }
}

/// Assemble `sp₊(A) + sp₋(a)` as an antisymmetric 4×4 array.
///
/// `A` sits in the left-multiplication block and `a` in the right one;
/// entry `(1,0)` is `A₁ + a₁`.
pub fn so4_compose<T>(ap: &[T; 3], am: &[T; 3], zero: T) -> [[T; 4]; 4]
where
    T: Clone,
    for<'a> &'a T: Add<&'a T, Output = T> + Sub<&'a T, Output = T> + Neg<Output = T>,
{
    let mut m: [[T; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| zero.clone()));
    let lower = [
        (1, 0, &ap[0] + &am[0]),
        (2, 0, &ap[1] + &am[1]),
        (3, 0, &ap[2] + &am[2]),
        (2, 1, &ap[2] - &am[2]),
        (3, 1, &am[1] - &ap[1]),
        (3, 2, &ap[0] - &am[0]),
    ];
    for (i, j, v) in lower {
        m[j][i] = -&v;
        m[i][j] = v;
    }
    m
}

/// Inverse of [`so4_compose`] on antisymmetric coefficient arrays.
#[allow(clippy::needless_range_loop)]
pub fn so4_split(m: &[[Coefficient; 4]; 4]) -> Result<([Coefficient; 3], [Coefficient; 3])> {
    for i in 0..4 {
        for j in i..4 {
            if !(&m[i][j] + &m[j][i]).is_zero() {
                return Err(Error::NotAntisymmetric(i, j));
            }
        }
    }
    let half = Coefficient::ratio(1, 2);
    let pair = |x: &Coefficient, y: &Coefficient| ((x - y) * half.clone(), (x + y) * half.clone());
    // A_μ ± a_μ read off the (μ,0) and (η,ν) entries.
    let (a1p, a1m) = pair(&m[1][0], &m[2][3]);
    let (a2p, a2m) = pair(&m[2][0], &m[3][1]);
    let (a3p, a3m) = pair(&m[3][0], &m[1][2]);
    Ok(([a1p, a2p, a3p], [a1m, a2m, a3m]))
}

fn frame_labels() -> Vec<String> {
    labels(&["h0", "h1", "h2", "h3"])
}

fn array_to_matrix(m: [[Form; 4]; 4]) -> FormMatrix {
    FormMatrix::from_fn(frame_labels(), |i, j| m[i][j].clone())
}

/// The connection form `Γ` of the base: `Γ_μ` in `sp(1)₊`, `α_μ` in `sp(1)₋`.
pub fn base_connection() -> FormMatrix {
    let gammas = [Form::gamma(1), Form::gamma(2), Form::gamma(3)];
    let alphas = [Form::alpha(1), Form::alpha(2), Form::alpha(3)];
    array_to_matrix(so4_compose(&gammas, &alphas, Form::zero()))
}

/// The connection display as typeset, including its `(2,3)` entry
/// `−Γ₁ + α₃`; kept only to report the discrepancy.
pub fn printed_base_connection() -> FormMatrix {
    let mut m = base_connection();
    m.set(2, 3, &Form::alpha(3) - &Form::gamma(1));
    m
}

/// `σ_κ = ε (X_κ ∧ X_0 − X_η ∧ X_ν)`.
pub fn sigma(kappa: usize, eps: i64) -> Form {
    let (e, n) = cyclic_partners(kappa);
    let s = &(Form::x(kappa) ^ Form::x(0)) - &(Form::x(e) ^ Form::x(n));
    s.scale(&Coefficient::integer(eps))
}

/// Weyl part of `Ω^μ_0`: `Σ_κ w_{μκ} σ_κ`.
pub fn weyl_two_form(mu: usize, weyl: &WeylArray, eps: i64) -> Form {
    let mut out = Form::zero();
    for kappa in 1..=3 {
        out += &sigma(kappa, eps).scale(weyl.get(mu, kappa));
    }
    out
}

/// Derivation table for a given Weyl array and sign `ε`.
pub fn derivation_table_with(weyl: &WeylArray, eps: i64) -> DerivationTable {
    let gamma = base_connection();
    let two = Coefficient::integer(2);
    let mut images: [Form; 10] = Default::default();
    for a in 0..4 {
        let mut s = Form::zero();
        for b in 0..4 {
            s -= &gamma.get(a, b).wedge(&Form::x(b));
        }
        images[Generator::x(a).index()] = s;
    }
    for (m, e, n) in CYCLIC {
        let self_dual = &(Form::x(m) ^ Form::x(0)) + &(Form::x(e) ^ Form::x(n));
        let anti = &(Form::x(m) ^ Form::x(0)) - &(Form::x(e) ^ Form::x(n));
        let d_alpha = &(Form::alpha(e) ^ Form::alpha(n)) + &self_dual;
        images[Generator::alpha(m).index()] = d_alpha.scale(&two);
        let d_gamma = &(&anti - &(Form::gamma(e) ^ Form::gamma(n))).scale(&two) + &weyl_two_form(m, weyl, eps);
        images[Generator::gamma(m).index()] = d_gamma;
    }
    DerivationTable::new(images)
}

fn bianchi_holds(weyl: &WeylArray, eps: i64) -> bool {
    let t = derivation_table_with(weyl, eps);
    let omega = base_connection().curvature(&t);
    first_bianchi(&omega).iter().all(Form::is_zero)
}

/// Signs `ε ∈ {+1, −1}` for which first Bianchi holds symbolically.
pub fn admissible_sigma_signs(weyl: &WeylArray) -> Vec<i64> {
    [1, -1].into_iter().filter(|e| bianchi_holds(weyl, *e)).collect()
}

/// The sign `ε` used by [`derivation_table`]: the first admissible sign,
/// preferring `+1`. `None` when Bianchi fails for both.
pub fn calibrate_sigma_sign(weyl: &WeylArray) -> Option<i64> {
    admissible_sigma_signs(weyl).first().copied()
}

pub fn derivation_table(model: CurvatureModel) -> DerivationTable {
    let weyl = model.weyl();
    let eps = calibrate_sigma_sign(&weyl).unwrap_or(1);
    derivation_table_with(&weyl, eps)
}

pub fn base_curvature(model: CurvatureModel) -> FormMatrix {
    base_connection().curvature(&derivation_table(model))
}

/// `Σ_B Ω^A_B ∧ X^B` for each `A`.
pub fn first_bianchi(omega: &FormMatrix) -> Vec<Form> {
    let x: Vec<Form> = (0..4).map(Form::x).collect();
    omega.wedge_column(&x)
}

/// `R_ij = Σ_k Ω^j_k(e_i, e_k)`.
pub fn ricci_contract(omega: &FormMatrix, frame: &Coframe) -> Result<CoefficientMatrix> {
    let n = omega.size();
    CoefficientMatrix::try_from_fn(frame.labels().to_vec(), |i, j| {
        let mut acc = Coefficient::zero();
        for k in 0..n {
            acc += &frame.evaluate_pair(omega.get(j, k), i, k)?;
        }
        Ok(acc)
    })
}

/// `K(e_p, e_q) = Ω^p_q(e_p, e_q)`.
pub fn sectional_curvature(omega: &FormMatrix, frame: &Coframe, p: usize, q: usize) -> Result<Coefficient> {
    frame.evaluate_pair(omega.get(p, q), p, q)
}

/// d²-closure, first Bianchi and antisymmetry checks for a named model.
pub fn consistency_suite(model: CurvatureModel) -> VerificationReport {
    consistency_suite_with(model.name(), &model.weyl(), model == CurvatureModel::Round)
}

/// As [`consistency_suite`] for an arbitrary Weyl array. `d²Γ = 0` is only
/// checked when `check_d2_gamma` is set: for symbolic `w` it needs the
/// derivative of `w`, which the ring treats as constant.
pub fn consistency_suite_with(label: &str, weyl: &WeylArray, check_d2_gamma: bool) -> VerificationReport {
    let mut report = VerificationReport::new();
    let signs = admissible_sigma_signs(weyl);
    let eps = signs.first().copied().unwrap_or(1);
    report.check(
        format!("frame.{label}.sigma_sign"),
        !signs.is_empty(),
        format!("eps = {eps:+}"),
        format!("admissible: {signs:?}"),
        "sign of the Weyl 2-form basis calibrated by first Bianchi",
    );
    let t = derivation_table_with(weyl, eps);

    let mut d2 = |id: String, g: Generator| {
        let dd = t.d(t.of(g));
        report.check(id, dd.is_zero(), &dd, "0", "");
    };
    for a in 0..4 {
        d2(format!("frame.{label}.d2.X{a}"), Generator::x(a));
    }
    for mu in 1..=3 {
        d2(format!("frame.{label}.d2.A{mu}"), Generator::alpha(mu));
    }
    for mu in 1..=3 {
        let id = format!("frame.{label}.d2.G{mu}");
        if check_d2_gamma {
            let dd = t.d(t.of(Generator::gamma(mu)));
            report.check(id, dd.is_zero(), &dd, "0", "");
        } else {
            report.skip(id, "requires the derivative of w (second Bianchi data); not asserted");
        }
    }

    let omega = base_connection().curvature(&t);
    for (a, b) in first_bianchi(&omega).iter().enumerate() {
        report.check(format!("frame.{label}.bianchi.h{a}"), b.is_zero(), b, "0", "");
    }
    let defects = omega.skew_defects();
    report.check(
        format!("frame.{label}.curvature.antisymmetric"),
        defects.is_empty(),
        format!("{} nonzero entries of Ω + Ωᵀ", defects.len()),
        "0",
        "",
    );
    for (mu, e, n) in CYCLIC {
        let expected_mu0 = &(Form::x(mu) ^ Form::x(0)).scale(&Coefficient::integer(4)) + &weyl_two_form(mu, weyl, eps);
        let got = omega.get(mu, 0);
        report.check(
            format!("frame.{label}.curvature.h{mu}h0"),
            *got == expected_mu0,
            got,
            &expected_mu0,
            "",
        );
        let expected_en = &(Form::x(e) ^ Form::x(n)).scale(&Coefficient::integer(4)) - &weyl_two_form(mu, weyl, eps);
        let got = omega.get(e, n);
        report.check(
            format!("frame.{label}.curvature.h{e}h{n}"),
            *got == expected_en,
            got,
            &expected_en,
            "",
        );
    }

    let frame = Coframe::base();
    match ricci_contract(&omega, &frame) {
        Ok(ric) => {
            let expected = CoefficientMatrix::diagonal_of(frame.labels().to_vec(), &vec![Coefficient::integer(12); 4]);
            report.check(
                format!("frame.{label}.ricci"),
                ric == expected,
                format!("{ric:?}"),
                "12·I",
                "",
            );
            let tr = ric.trace();
            report.check(
                format!("frame.{label}.scalar"),
                tr == Coefficient::integer(48),
                &tr,
                "48",
                "",
            );
        }
        Err(e) => report.check(format!("frame.{label}.ricci"), false, e, "12·I", ""),
    }
    if check_d2_gamma {
        let mut all = true;
        for p in 0..4 {
            for q in 0..4 {
                if p != q {
                    let k = sectional_curvature(&omega, &frame, p, q);
                    all &= k.map(|k| k == Coefficient::integer(4)).unwrap_or(false);
                }
            }
        }
        report.check(
            format!("frame.{label}.sectional"),
            all,
            if all { "4" } else { "≠4" },
            "4",
            "all 12 ordered pairs",
        );
    }
    report
}

/// Compares the typeset connection display with the forced one.
pub fn connection_display_report() -> VerificationReport {
    let mut report = VerificationReport::new();
    let forced = base_connection();
    let printed = printed_base_connection();
    for i in 0..4 {
        for j in 0..4 {
            let (f, p) = (forced.get(i, j), printed.get(i, j));
            if f != p {
                report.compare(
                    format!("gamma.display.entry{i}{j}"),
                    false,
                    f,
                    p,
                    "antisymmetry forces the engine value",
                );
            }
        }
    }
    let defects = forced.skew_defects();
    report.check(
        "gamma.antisymmetric",
        defects.is_empty(),
        format!("{} defects", defects.len()),
        "0",
        "",
    );
    report
}
