//! Curvature of the Chow–Yang metrics `g_λ = λ²(α₁² + α₃²) + Σ X_i²` on the
//! twistor space, computed from the 6×6 connection matrix in the coframe
//! `{λα₁, λα₃, X0..X3}`; the `λ = 1` Kähler–Einstein chain in complex
//! notation; and the closed-form Ricci coefficients of the canonical
//! deformation family.

use num::{BigRational, Signed, Zero};

use crate::coefficient::{rational, Coefficient};
use crate::error::{Error, Result};
use crate::flow::Family;
use crate::form::{Coframe, DerivationTable, Form, Generator, Monomial};
use crate::frame::{
    base_curvature, calibrate_sigma_sign, derivation_table, derivation_table_with, CurvatureModel, WeylArray,
};
use crate::matrix::{labels, CoefficientMatrix, FormMatrix};
use crate::poly;
use crate::report::VerificationReport;
use crate::round::CurvatureArray;

pub const SLOTS: [&str; 6] = ["v1", "v2", "h0", "h1", "h2", "h3"];
pub const GAUGE: [Generator; 4] = [Generator::A2, Generator::G1, Generator::G2, Generator::G3];

const V1: usize = 0;
const V2: usize = 1;
const H0: usize = 2;

fn slot_labels() -> Vec<String> {
    labels(&SLOTS)
}

fn l() -> Coefficient {
    Coefficient::lambda()
}

fn li() -> Coefficient {
    Coefficient::lambda_pow(-1)
}

fn g(gen: Generator) -> Form {
    Form::generator(gen)
}

/// Coframe column `(λα₁, λα₃, X0, X1, X2, X3)`.
pub fn coframe_column() -> Vec<Form> {
    let cf = Coframe::twistor();
    (0..6).map(|p| cf.coframe_form(p)).collect()
}

/// The 6×6 connection matrix `M` with `dθ = −M ∧ θ`, entries as typeset.
pub fn cy_connection() -> FormMatrix {
    use Generator::*;
    let x = |a: usize| Form::x(a);
    let lx = |a: usize, s: i64| x(a).scale(&(&l() * &Coefficient::integer(s)));
    let lix = |a: usize, s: i64| x(a).scale(&(&li() * &Coefficient::integer(s)));
    let two_a2 = g(A2).scale(&Coefficient::integer(2));
    let z = Form::zero;
    let rows: [[Form; 6]; 6] = [
        [z(), -&two_a2, lx(1, -1), lx(0, 1), lx(3, 1), lx(2, -1)],
        [two_a2.clone(), z(), lx(3, -1), lx(2, 1), lx(1, -1), lx(0, 1)],
        [lix(1, 1), lix(3, 1), z(), -g(G1), -(g(G2) + g(A2)), -g(G3)],
        [lix(0, -1), lix(2, -1), g(G1), z(), -g(G3), g(G2) - g(A2)],
        [lix(3, -1), lix(1, 1), g(G2) + g(A2), g(G3), z(), -g(G1)],
        [lix(2, 1), lix(0, -1), g(G3), g(A2) - g(G2), g(G1), z()],
    ];
    FormMatrix::from_fn(slot_labels(), |i, j| rows[i][j].clone())
}

/// `dθ + M ∧ θ = 0` row by row, formal `λ` and at `λ = 1`.
pub fn verify_first_structure() -> VerificationReport {
    let t = derivation_table(CurvatureModel::FormalW);
    let m = cy_connection();
    let theta = coframe_column();
    let mw = m.wedge_column(&theta);
    let mut report = VerificationReport::new();
    let mut residuals = Vec::new();
    for (i, th) in theta.iter().enumerate() {
        let r = &t.d(th) + &mw[i];
        report.check(format!("structure.first.{}", SLOTS[i]), r.is_zero(), &r, "0", "");
        residuals.push(r);
    }
    let one = rational(1, 1);
    let at_one = residuals
        .iter()
        .all(|r| r.substitute_lambda(&one).map(|f| f.is_zero()).unwrap_or(false));
    report.check(
        "structure.first.lambda1",
        at_one,
        if at_one { "0" } else { "≠0" },
        "0",
        "all rows at λ = 1",
    );
    report
}

/// True when `c = (λ⁻¹ − λ)·k` for a nonzero `λ`-free `k`.
fn is_lambda_defect(c: &Coefficient) -> bool {
    let k = c.lambda_coefficient(-1);
    !k.is_zero() && *c == &k * &(&li() - &l())
}

/// Antisymmetry audit of the connection matrix: `M + Mᵀ` entrywise.
pub fn skewness_report() -> VerificationReport {
    let m = cy_connection();
    let mut report = VerificationReport::new();
    let defects = m.skew_defects();
    for (i, j, f) in &defects {
        report.compare(
            format!("skew.{}{}", SLOTS[*i], SLOTS[*j]),
            false,
            f,
            "0",
            "non-skew vertical–horizontal pairing of the connection matrix",
        );
    }
    let shape_ok = defects.iter().all(|(i, j, f)| {
        let vh = (*i < H0) != (*j < H0);
        vh && f.terms().all(|(mono, c)| {
            mono.generators()
                .all(|gen| matches!(gen, Generator::X0 | Generator::X1 | Generator::X2 | Generator::X3))
                && is_lambda_defect(c)
        })
    });
    report.check(
        "skew.defect_shape",
        shape_ok,
        format!("{} defective pairs", defects.len()),
        "(λ⁻¹ − λ)·X in the vertical–horizontal block only",
        "",
    );
    let gauge_ok = defects.iter().all(|(i, j, _)| (*i < H0) != (*j < H0));
    report.check(
        "skew.gauge_block",
        gauge_ok,
        "",
        "0",
        "vertical and horizontal diagonal blocks are skew",
    );
    let at_one = m
        .substitute_lambda(&rational(1, 1))
        .map(|m1| m1.skew_defects().is_empty())
        .unwrap_or(false);
    report.check(
        "skew.lambda1",
        at_one,
        if at_one { "0" } else { "≠0" },
        "0",
        "defect vanishes at λ = 1",
    );
    report
}

/// `Ω_λ = dM + M ∧ M`.
pub fn cy_curvature(model: CurvatureModel) -> FormMatrix {
    cy_connection().curvature(&derivation_table(model))
}

/// A typeset curvature entry with its matrix position.
#[derive(Clone, Debug)]
pub struct PrintedEntry {
    pub id: String,
    pub row: usize,
    pub col: usize,
    pub form: Form,
}

/// Curvature entries as typeset, with the `dα` shorthand and the base
/// curvature `Ω^A_B` expanded through the model's rules.
pub fn printed_curvature_entries(model: CurvatureModel) -> Vec<PrintedEntry> {
    use Generator::*;
    let t = derivation_table(model);
    let base = base_curvature(model);
    let a1 = g(A1);
    let a3 = g(A3);
    let x = Form::x;
    let w = |p: &Form, q: &Form| p.wedge(q);
    let sc = |f: Form, c: Coefficient| f.scale(&c);
    let i = Coefficient::integer;
    // dα_μ − 2α_η∧α_ν
    let reduced = |mu: usize| {
        let (e, n) = crate::frame::cyclic_partners(mu);
        &t.d(&Form::alpha(mu)) - &sc(w(&Form::alpha(e), &Form::alpha(n)), i(2))
    };
    let d_alpha2 = t.d(&Form::alpha(2));
    let ix = |name: &str| SLOTS.iter().position(|s| *s == name).unwrap();
    let mut out = Vec::new();
    let mut push = |tag: &str, r: &str, c: &str, f: Form| {
        out.push(PrintedEntry {
            id: format!("{tag}.{r}{c}"),
            row: ix(r),
            col: ix(c),
            form: f,
        });
    };
    push("curvature.entry", "v1", "v1", Form::zero());
    push("curvature.entry", "v2", "v2", Form::zero());
    push(
        "curvature.entry",
        "v2",
        "v1",
        &sc(w(&a3, &a1), i(4)) + &sc(&w(&x(2), &x(0)) + &w(&x(3), &x(1)), i(2)),
    );
    // λ⁻¹(X_p ∧ α + ...) rows
    let lo = |terms: &[(i64, usize, &Form)]| {
        let mut f = Form::zero();
        for (s, a, al) in terms {
            f += &sc(w(&x(*a), al), i(*s));
        }
        f.scale(&li())
    };
    push("curvature.entry", "h0", "v1", lo(&[(1, 0, &a1), (1, 2, &a3)]));
    push("curvature.entry", "h0", "v2", lo(&[(1, 0, &a3), (-1, 2, &a1)]));
    push("curvature.entry", "h1", "v1", lo(&[(1, 1, &a1), (1, 3, &a3)]));
    push("curvature.entry", "h1", "v2", lo(&[(1, 1, &a3), (-1, 3, &a1)]));
    push("curvature.entry", "h2", "v1", lo(&[(-1, 0, &a3), (1, 2, &a1)]));
    push("curvature.entry", "h2", "v2", lo(&[(1, 0, &a1), (1, 2, &a3)]));
    push("curvature.entry", "h3", "v1", lo(&[(-1, 1, &a3), (1, 3, &a1)]));
    push("curvature.entry", "h3", "v2", lo(&[(1, 1, &a1), (1, 3, &a3)]));
    // λ(α ∧ X_p + ...) rows
    let hi = |terms: &[(i64, &Form, usize)]| {
        let mut f = Form::zero();
        for (s, al, a) in terms {
            f += &sc(w(al, &x(*a)), i(*s));
        }
        f.scale(&l())
    };
    push("curvature.entry", "v1", "h0", hi(&[(1, &a1, 0), (1, &a3, 2)]));
    push("curvature.entry", "v2", "h0", hi(&[(1, &a3, 0), (-1, &a1, 2)]));
    push("curvature.entry", "v1", "h1", hi(&[(1, &a1, 1), (1, &a3, 3)]));
    push("curvature.entry", "v2", "h1", hi(&[(1, &a3, 1), (-1, &a1, 3)]));
    push("curvature.entry", "v1", "h2", hi(&[(-1, &a3, 0), (1, &a1, 2)]));
    push("curvature.entry", "v2", "h2", hi(&[(1, &a1, 0), (1, &a3, 2)]));
    push("curvature.entry", "v1", "h3", hi(&[(-1, &a3, 1), (1, &a1, 3)]));
    push("curvature.entry", "v2", "h3", hi(&[(1, &a1, 1), (1, &a3, 3)]));
    for h in ["h0", "h1", "h2", "h3"] {
        push("curvature.entry", h, h, Form::zero());
    }
    let b = |p: usize, q: usize| base.get(p, q).clone();
    let xx = |p: usize, q: usize| w(&x(p), &x(q));
    push(
        "curvature.entry",
        "h1",
        "h0",
        b(1, 0) + xx(0, 1) + xx(2, 3) - reduced(1),
    );
    push(
        "curvature.entry",
        "h2",
        "h0",
        b(2, 0) + sc(xx(3, 1), i(2)) - reduced(2) + d_alpha2.clone(),
    );
    push(
        "curvature.entry",
        "h3",
        "h0",
        b(3, 0) - xx(2, 1) + xx(0, 3) - reduced(3),
    );
    push(
        "curvature.entry",
        "h2",
        "h1",
        b(2, 1) - xx(3, 0) + xx(1, 2) + reduced(3),
    );
    push(
        "curvature.entry",
        "h3",
        "h1",
        b(3, 1) + sc(xx(2, 0), i(2)) - reduced(2) + d_alpha2.clone(),
    );
    push(
        "curvature.entry",
        "h3",
        "h2",
        b(3, 2) + xx(2, 3) + xx(0, 1) + reduced(1),
    );

    // Restatement used for the covariant-derivative argument: diagonal
    // entries "Ω⁰₀ − X_p∧X_p − X_q∧X_q" and the horizontal block again.
    let zero_base = b(0, 0);
    for (h, (p, q)) in [("h0", (1, 3)), ("h1", (0, 2)), ("h2", (1, 3)), ("h3", (0, 2))] {
        push("curvature.restated", h, h, zero_base.clone() - xx(p, p) - xx(q, q));
    }
    push(
        "curvature.restated",
        "h1",
        "h0",
        b(1, 0) + xx(0, 1) + xx(2, 3) - reduced(1),
    );
    push(
        "curvature.restated",
        "h2",
        "h0",
        b(2, 0) + xx(3, 1) - xx(1, 3) - reduced(2) + d_alpha2.clone(),
    );
    push(
        "curvature.restated",
        "h3",
        "h0",
        b(3, 0) - xx(2, 1) + xx(0, 3) - reduced(3),
    );
    push(
        "curvature.restated",
        "h2",
        "h1",
        b(2, 1) - xx(3, 0) + xx(1, 2) + reduced(3),
    );
    push(
        "curvature.restated",
        "h3",
        "h1",
        b(3, 1) + xx(2, 0) - xx(0, 2) - reduced(2) + d_alpha2,
    );
    push(
        "curvature.restated",
        "h3",
        "h2",
        b(3, 2) + xx(2, 3) + xx(0, 1) + reduced(1),
    );
    out
}

/// Engine curvature against every typeset entry, plus basicness.
pub fn curvature_report(model: CurvatureModel) -> VerificationReport {
    let omega = cy_curvature(model);
    let mut report = VerificationReport::new();
    let gauge_free = (0..6).all(|i| (0..6).all(|j| omega.get(i, j).find_generator(&GAUGE).is_none()));
    report.check(
        format!("curvature.{}.basic", model.name()),
        gauge_free,
        if gauge_free {
            "no gauge generators"
        } else {
            "gauge generator present"
        },
        "no gauge generators",
        "",
    );
    for entry in printed_curvature_entries(model) {
        let engine = omega.get(entry.row, entry.col);
        report.compare(
            format!("{}.{}", entry.id, model.name()),
            *engine == entry.form,
            engine,
            &entry.form,
            "",
        );
    }
    report
}

/// Ricci tensor of `g_λ` in the orthonormal twistor frame (formal `λ`).
pub fn cy_ricci(model: CurvatureModel) -> Result<CoefficientMatrix> {
    crate::frame::ricci_contract(&cy_curvature(model), &Coframe::twistor())
}

/// Expected diagonal: `4λ⁻² + 4` on the fiber, `2λ⁻² + 6` on the base.
pub fn cy_ricci_expected() -> [Coefficient; 6] {
    let fiber = &(&Coefficient::integer(4) * &Coefficient::lambda_pow(-2)) + &Coefficient::integer(4);
    let base = &(&Coefficient::integer(2) * &Coefficient::lambda_pow(-2)) + &Coefficient::integer(6);
    [fiber.clone(), fiber, base.clone(), base.clone(), base.clone(), base]
}

pub fn ricci_report(model: CurvatureModel) -> VerificationReport {
    let mut report = VerificationReport::new();
    let name = model.name();
    let ric = match cy_ricci(model) {
        Ok(r) => r,
        Err(e) => {
            report.check(format!("ricci.cy.{name}.contract"), false, e, "", "");
            return report;
        }
    };
    let expected = cy_ricci_expected();
    for (i, exp) in expected.iter().enumerate() {
        let got = ric.get(i, i);
        report.compare(format!("ricci.cy.{name}.diag.{}", SLOTS[i]), got == exp, got, exp, "");
    }
    report.check(format!("ricci.cy.{name}.symmetric"), ric.is_symmetric(), "", "", "");
    report.check(
        format!("ricci.cy.{name}.diagonal"),
        ric.is_diagonal(),
        format!("{ric:?}"),
        "diagonal",
        "",
    );
    report.check(format!("ricci.cy.{name}.wfree"), ric.is_w_free(), "", "", "");
    let at_one = ric.substitute_lambda(&rational(1, 1));
    let eight = CoefficientMatrix::diagonal_of(slot_labels(), &vec![Coefficient::integer(8); 6]);
    let ok = at_one.as_ref().map(|m| *m == eight).unwrap_or(false);
    report.check(
        format!("ricci.cy.{name}.lambda1"),
        ok,
        if ok { "8·I" } else { "≠8·I" },
        "8·I",
        "",
    );
    let array = CurvatureArray::from_curvature(&cy_curvature(model), &Coframe::twistor());
    if let Ok(array) = array {
        let via_array = array.ricci();
        report.check(
            format!("ricci.cy.{name}.array"),
            via_array == ric,
            "",
            "",
            "contraction of the component array",
        );
    }
    report
}

/// Coefficient matrix of a gauge generator in the connection.
pub fn gauge_matrix(gen: Generator) -> CoefficientMatrix {
    cy_connection().coefficients_of(Monomial::single(gen))
}

/// Entrywise `Σ_c (K_ac R_cbpq + K_bc R_acpq + K_pc R_abcq + K_qc R_abpc)`:
/// the action of the derivation `K` on the component array.
pub fn derivation_action(k: &CoefficientMatrix, r: &CurvatureArray) -> Vec<Coefficient> {
    let n = r.size();
    let mut out = Vec::with_capacity(n * n * n * n);
    for a in 0..n {
        for b in 0..n {
            for p in 0..n {
                for q in 0..n {
                    let mut acc = Coefficient::zero();
                    for c in 0..n {
                        acc += &(k.get(a, c) * r.get(c, b, p, q));
                        acc += &(k.get(b, c) * r.get(a, c, p, q));
                        acc += &(k.get(p, c) * r.get(a, b, c, q));
                        acc += &(k.get(q, c) * r.get(a, b, p, c));
                    }
                    out.push(acc);
                }
            }
        }
    }
    out
}

pub fn annihilates(k: &CoefficientMatrix, r: &CurvatureArray) -> bool {
    derivation_action(k, r).iter().all(Coefficient::is_zero)
}

/// Curvature of `g_λ` over a base with the given Weyl array.
pub fn cy_curvature_with(weyl: &WeylArray) -> FormMatrix {
    let eps = calibrate_sigma_sign(weyl).unwrap_or(1);
    cy_connection().curvature(&derivation_table_with(weyl, eps))
}

/// Infinitesimal rotation `2[E_μ, w]` of the Weyl array induced by the
/// gauge direction `Γ_μ`, with `(E_μ)_{jk} = ε_{μjk}`. `α₂` lies in the
/// other `sp(1)` factor and leaves `w` fixed.
pub fn weyl_rotation(gen: Generator, weyl: &WeylArray) -> Option<WeylArray> {
    let mu = (1..=3).find(|m| Generator::gamma(*m) == gen)?;
    let levi = |i: usize, j: usize, k: usize| -> i64 {
        match (i, j, k) {
            (1, 2, 3) | (2, 3, 1) | (3, 1, 2) => 1,
            (1, 3, 2) | (3, 2, 1) | (2, 1, 3) => -1,
            _ => 0,
        }
    };
    let entries = std::array::from_fn(|j| {
        std::array::from_fn(|k| {
            let mut acc = Coefficient::zero();
            for l in 1..=3 {
                acc += &(&Coefficient::integer(2 * levi(mu, j + 1, l)) * weyl.get(l, k + 1));
                acc -= &(weyl.get(j + 1, l) * &Coefficient::integer(2 * levi(mu, l, k + 1)));
            }
            acc
        })
    });
    Some(WeylArray::from_entries(entries))
}

/// The gauge directions act on the curvature components by derivations
/// whose effect is exactly the induced rotation of `w` (zero on the round
/// base), justifying evaluation in the normal gauge.
pub fn gauge_invariance_check(model: CurvatureModel) -> VerificationReport {
    let mut report = VerificationReport::new();
    let name = model.name();
    let weyl = model.weyl();
    let frame = Coframe::twistor();
    let arrays = CurvatureArray::from_curvature(&cy_curvature_with(&weyl), &frame).and_then(|r| {
        Ok((
            r,
            CurvatureArray::from_curvature(&cy_curvature_with(&WeylArray::zero()), &frame)?,
        ))
    });
    let (r, r_round) = match arrays {
        Ok(pair) => pair,
        Err(e) => {
            report.check(format!("gauge.{name}.array"), false, e, "", "");
            return report;
        }
    };
    for gen in GAUGE {
        let action = derivation_action(&gauge_matrix(gen), &r);
        let rotated = match weyl_rotation(gen, &weyl) {
            Some(dw) => match CurvatureArray::from_curvature(&cy_curvature_with(&dw), &frame) {
                Ok(a) => Some(a),
                Err(e) => {
                    report.check(format!("gauge.{name}.{gen}"), false, e, "", "");
                    continue;
                }
            },
            None => None,
        };
        // The w-linear part of the array evaluated at the rotated w.
        let ok = action.iter().enumerate().all(|(idx, v)| match &rotated {
            Some(a) => (&(v + &a.data()[idx]) - &r_round.data()[idx]).is_zero(),
            None => v.is_zero(),
        });
        report.check(
            format!("gauge.{name}.{gen}"),
            ok,
            if ok { "0" } else { "≠0" },
            "0",
            if rotated.is_some() {
                "[K, R] + R_W(δw)"
            } else {
                "[K, R]"
            },
        );
    }
    let control = CoefficientMatrix::from_fn(slot_labels(), |i, j| match (i, j) {
        (V1, H0) => Coefficient::one(),
        (H0, V1) => -Coefficient::one(),
        _ => Coefficient::zero(),
    });
    let moved = !annihilates(&control, &r);
    report.check(
        format!("gauge.{name}.control"),
        moved,
        if moved { "≠0" } else { "0" },
        "≠0",
        "negative control: v1↔h0 rotation must not annihilate",
    );
    report
}

/// `(ζ₀, Z₁, Z₂) = (α₁ + iα₃, X0 + iX2, X1 + iX3)`.
pub fn complex_frame() -> [Form; 3] {
    let i = Coefficient::i();
    [
        &Form::alpha(1) + &Form::alpha(3).scale(&i),
        &Form::x(0) + &Form::x(2).scale(&i),
        &Form::x(1) + &Form::x(3).scale(&i),
    ]
}

/// Slot matrices `P` (3×6, rows the (1,0)-forms in the real coframe) and
/// `Q` (6×3) with `θ = Q v + Q̄ v̄`.
fn complexifiers() -> ([[Coefficient; 6]; 3], [[Coefficient; 3]; 6]) {
    let one = Coefficient::one();
    let i = Coefficient::i();
    let half = Coefficient::ratio(1, 2);
    let mhi = &(-&half) * &i;
    let mut p: [[Coefficient; 6]; 3] = Default::default();
    let mut q: [[Coefficient; 3]; 6] = Default::default();
    for (row, (re, im)) in [(V1, V2), (H0, H0 + 2), (H0 + 1, H0 + 3)].into_iter().enumerate() {
        p[row][re] = one.clone();
        p[row][im] = i.clone();
        q[re][row] = half.clone();
        q[im][row] = mhi.clone();
    }
    (p, q)
}

#[allow(clippy::needless_range_loop)]
fn sandwich(p: &[[Coefficient; 6]; 3], m: &FormMatrix, q: &[[Coefficient; 3]; 6]) -> FormMatrix {
    FormMatrix::from_fn(labels(&["zeta0", "Z1", "Z2"]), |i, j| {
        let mut acc = Form::zero();
        for a in 0..6 {
            for b in 0..6 {
                let c = &p[i][a] * &q[b][j];
                if !c.is_zero() {
                    acc += &m.get(a, b).scale(&c);
                }
            }
        }
        acc
    })
}

/// Complex connection `K` at `λ = 1` with `d(ζ₀, Z₁, Z₂)ᵀ = −K ∧ (ζ₀, Z₁, Z₂)ᵀ`,
/// and the anti-linear remainder (zero when `J` is parallel).
pub fn complex_connection() -> (FormMatrix, FormMatrix) {
    let m1 = cy_connection()
        .substitute_lambda(&rational(1, 1))
        .expect("λ = 1 is nonzero");
    let (p, q) = complexifiers();
    let qbar = q.clone().map(|row| row.map(|c| c.conj()));
    (sandwich(&p, &m1, &q), sandwich(&p, &m1, &qbar))
}

/// The complex connection matrix as typeset for the Kähler–Einstein case.
pub fn printed_complex_connection() -> FormMatrix {
    use Generator::*;
    let i = Coefficient::i();
    let [_, z1, z2] = complex_frame();
    let ig = |gen: Generator| g(gen).scale(&i);
    let rows: [[Form; 3]; 3] = [
        [g(A2).scale(&(&Coefficient::integer(2) * &i)), -&z2, z1.clone()],
        [z2.conjugate(), ig(G2) + ig(A2), ig(G3) - g(G1)],
        [-z1.conjugate(), g(G1) + ig(G3), ig(A2) - ig(G2)],
    ];
    FormMatrix::from_fn(labels(&["zeta0", "Z1", "Z2"]), |r, c| rows[r][c].clone())
}

/// (0,1)-vectors dual to the conjugate frame, in real slot components.
fn antiholomorphic_vectors() -> [Vec<Coefficient>; 3] {
    let i = Coefficient::i();
    let mk = |re: usize, im: usize| {
        let mut v = vec![Coefficient::zero(); 6];
        v[re] = Coefficient::one();
        v[im] = i.clone();
        v
    };
    [mk(V1, V2), mk(H0, H0 + 2), mk(H0 + 1, H0 + 3)]
}

/// `(0,2)`-components `ω(ē_a, ē_b)` of the gauge-free part of `ω` at `λ = 1`.
pub fn zero_two_part(omega: &Form) -> Result<Vec<Coefficient>> {
    let cf = Coframe::twistor();
    let basic = cf.strip_gauge(omega);
    let v = antiholomorphic_vectors();
    let one = rational(1, 1);
    let mut out = Vec::new();
    for a in 0..3 {
        for b in (a + 1)..3 {
            out.push(cf.evaluate_vectors(&basic, &v[a], &v[b])?.substitute_lambda(&one)?);
        }
    }
    Ok(out)
}

/// Integrability, Kähler property and the complex structure equations at `λ = 1`.
pub fn complex_structure_check() -> VerificationReport {
    let mut report = VerificationReport::new();
    let t = derivation_table(CurvatureModel::FormalW);
    let frame = complex_frame();
    let names = ["zeta0", "Z1", "Z2"];
    let (k, anti) = complex_connection();

    report.check(
        "kaehler.antilinear",
        anti.is_zero(),
        if anti.is_zero() { "0" } else { "≠0" },
        "0",
        "",
    );
    let kv = k.wedge_column(&frame);
    for (idx, z) in frame.iter().enumerate() {
        let dz = t.d(z);
        let rhs = -&kv[idx];
        report.check(format!("kaehler.structure.{}", names[idx]), dz == rhs, &dz, &rhs, "");
        match zero_two_part(&dz) {
            Ok(parts) => {
                let ok = parts.iter().all(Coefficient::is_zero);
                let lhs: Vec<String> = parts.iter().map(|c| c.to_string()).collect();
                report.check(
                    format!("kaehler.zero_two.{}", names[idx]),
                    ok,
                    lhs.join(", "),
                    "0, 0, 0",
                    "",
                );
            }
            Err(e) => report.check(format!("kaehler.zero_two.{}", names[idx]), false, e, "0", ""),
        }
    }

    let kh = k.transpose().map(Form::conjugate);
    let skew = k.add(&kh).is_zero();
    report.check(
        "kaehler.skew_hermitian",
        skew,
        if skew { "K + K̄ᵀ = 0" } else { "K + K̄ᵀ ≠ 0" },
        "0",
        "",
    );

    let printed = printed_complex_connection();
    for r in 0..3 {
        for c in 0..3 {
            let (e, p) = (k.get(r, c), printed.get(r, c));
            report.compare(format!("kaehler.printed.k{r}{c}"), e == p, e, p, "");
        }
    }

    let [zeta, z1, z2] = frame;
    let i = Coefficient::i();
    let d_zeta = t.d(&zeta);
    // Terms of dζ₀ containing α₂.
    let with_a2 = &d_zeta - &d_zeta.without(&[Generator::A2]);
    let expected_a2 = g(Generator::A2).wedge(&zeta).scale(&(&Coefficient::integer(-2) * &i));
    report.check(
        "kaehler.dzeta0.alpha_part",
        with_a2 == expected_a2,
        &with_a2,
        &expected_a2,
        "",
    );
    let literal = &expected_a2 + &(&z2.wedge(&z1) - &z1.wedge(&z2));
    report.compare(
        "kaehler.dzeta0.printed",
        d_zeta == literal,
        &d_zeta,
        &literal,
        "Z₂∧Z₁ − Z₁∧Z₂ read without bars",
    );
    report
}

/// Trace of the complex curvature `dK + K ∧ K` at `λ = 1`.
pub fn ricci_form(model: CurvatureModel) -> Form {
    let t: DerivationTable = derivation_table(model);
    let (k, _) = complex_connection();
    let curv = k.curvature(&t);
    let mut tr = Form::zero();
    for a in 0..3 {
        tr += curv.get(a, a);
    }
    tr
}

pub fn ricci_form_check(model: CurvatureModel) -> VerificationReport {
    let mut report = VerificationReport::new();
    let name = model.name();
    let tr = ricci_form(model);
    let [zeta, z1, z2] = complex_frame();
    let sum = &(&zeta.wedge(&zeta.conjugate()) + &z1.wedge(&z1.conjugate())) + &z2.wedge(&z2.conjugate());
    let expected = sum.scale(&Coefficient::integer(4));
    report.check(format!("ricciform.{name}.trace"), tr == expected, &tr, &expected, "");
    report.check(format!("ricciform.{name}.wfree"), tr.is_w_free(), "", "", "");
    // ζ₀∧ζ̄₀ = −2i α₁∧α₃, so its coefficient is the α₁∧α₃ coefficient over −2i.
    let (_, a13) = Monomial::from_generators(&[Generator::A1, Generator::A3]).expect("distinct");
    let zz = zeta.wedge(&zeta.conjugate()).coefficient(a13);
    let coef = tr.coefficient(a13);
    let ratio_ok = coef == &zz * &Coefficient::integer(4);
    report.check(
        format!("ricciform.{name}.coefficient"),
        ratio_ok,
        if ratio_ok { "4" } else { "≠4" },
        "4",
        "coefficient of ζ₀∧ζ̄₀",
    );
    report
}

/// Ricci coefficients `(4(1 + μ²), 4(3 − μ))` of the canonical family on
/// `g_FS` and `g_M`.
pub fn canonical_ricci(mu: &BigRational) -> Result<(BigRational, BigRational)> {
    if !mu.is_positive() {
        return Err(Error::NonPositiveParameter {
            name: "mu",
            value: mu.to_string(),
        });
    }
    let four = rational(4, 1);
    let one = rational(1, 1);
    let three = rational(3, 1);
    Ok((&four * (&one + mu * mu), &four * (&three - mu)))
}

/// [`canonical_ricci`] with `μ = λ²` formal.
pub fn canonical_ricci_formal() -> (Coefficient, Coefficient) {
    let mu = Coefficient::lambda_pow(2);
    let four = Coefficient::integer(4);
    (
        &four * &(&Coefficient::one() + &(&mu * &mu)),
        &four * &(&Coefficient::integer(3) - &mu),
    )
}

/// Exact parameters `μ > 0` where the family is Einstein.
pub fn einstein_parameters(family: Family) -> Result<Vec<BigRational>> {
    let equation = match family {
        Family::Cy => {
            let d = cy_ricci_expected();
            &d[0] - &d[2]
        }
        Family::Canonical => {
            let (fiber, base) = canonical_ricci_formal();
            &fiber - &(&Coefficient::lambda_pow(2) * &base)
        }
    };
    let (_, coeffs) = equation.to_mu_polynomial()?;
    let roots = poly::rational_roots(&coeffs).ok_or(Error::NotUnivariate)?;
    Ok(roots.into_iter().filter(|r| r > &BigRational::zero()).collect())
}

/// Einstein parameter sets and the canonical positivity boundary.
pub fn einstein_report() -> VerificationReport {
    let mut report = VerificationReport::new();
    let render = |v: &[BigRational]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
    for family in Family::ALL {
        let expected = family.fixed_points_exact();
        match einstein_parameters(family) {
            Ok(found) => report.check(
                format!("einstein.{family}"),
                found == expected,
                render(&found),
                render(&expected),
                "positive rational roots of the Einstein condition",
            ),
            Err(e) => report.check(format!("einstein.{family}"), false, e, render(&expected), ""),
        }
    }
    let base = |mu: &BigRational| canonical_ricci(mu).map(|(_, b)| b);
    for (id, mu, positive) in [
        ("einstein.canonical.positive_below_three", rational(29, 10), true),
        ("einstein.canonical.negative_above_three", rational(31, 10), false),
    ] {
        match base(&mu) {
            Ok(b) => report.check(
                id,
                b.is_positive() == positive,
                format!("4(3 - {mu}) = {b}"),
                if positive { "> 0" } else { "< 0" },
                "",
            ),
            Err(e) => report.check(id, false, e, "", ""),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Status;

    fn entry(m: &FormMatrix, r: &str, c: &str) -> Form {
        let ix = |s: &str| SLOTS.iter().position(|x| *x == s).unwrap();
        m.get(ix(r), ix(c)).clone()
    }

    #[test]
    fn connection_entries() {
        let m = cy_connection();
        assert_eq!(entry(&m, "v1", "h0"), Form::x(1).scale(&-l()));
        assert_eq!(entry(&m, "h0", "v1"), Form::x(1).scale(&li()));
        assert_eq!(entry(&m, "v1", "v2"), Form::alpha(2).scale(&Coefficient::integer(-2)));
    }

    #[test]
    fn first_structure_equation() {
        let r = verify_first_structure();
        assert!(r.all_pass(), "{r:#?}");
        assert_eq!(r.records.len(), 7);
    }

    #[test]
    fn skewness_defects() {
        let r = skewness_report();
        let v1h0 = r.get("skew.v1h0").unwrap();
        assert_eq!(v1h0.status, Status::Mismatch);
        let expected = Form::x(1).scale(&(&li() - &l()));
        assert_eq!(v1h0.lhs_rendered, expected.to_string());
        for id in ["skew.defect_shape", "skew.gauge_block", "skew.lambda1"] {
            assert_eq!(r.get(id).unwrap().status, Status::Pass, "{id}");
        }
        assert!(r.get("skew.v1v2").is_none());
    }

    #[test]
    fn curvature_examples() {
        let om = cy_curvature(CurvatureModel::FormalW);
        let a1 = Form::alpha(1);
        let a3 = Form::alpha(3);
        let v2v1 = &(a3.wedge(&a1)).scale(&Coefficient::integer(4))
            + &(&Form::x(2).wedge(&Form::x(0)) + &Form::x(3).wedge(&Form::x(1))).scale(&Coefficient::integer(2));
        assert_eq!(entry(&om, "v2", "v1"), v2v1);
        let h0v1 = (&Form::x(0).wedge(&a1) + &Form::x(2).wedge(&a3)).scale(&li());
        assert_eq!(entry(&om, "h0", "v1"), h0v1);
        let round = cy_curvature(CurvatureModel::Round);
        let h2h0 = &(&Form::x(2).wedge(&Form::x(0)).scale(&Coefficient::integer(4))
            + &Form::x(3).wedge(&Form::x(1)).scale(&Coefficient::integer(2)))
            + &a3.wedge(&a1).scale(&Coefficient::integer(2));
        assert_eq!(entry(&round, "h2", "h0"), h2h0);
    }

    #[test]
    fn curvature_matches_every_printed_entry() {
        for model in CurvatureModel::ALL {
            let r = curvature_report(model);
            assert!(r.all_pass(), "{r:#?}");
            assert_eq!(
                r.records
                    .iter()
                    .filter(|x| x.check_id.starts_with("curvature.entry"))
                    .count(),
                29
            );
        }
    }

    #[test]
    fn ricci_diagonal() {
        for model in CurvatureModel::ALL {
            let r = ricci_report(model);
            assert!(r.all_pass(), "{r:#?}");
        }
        let ric = cy_ricci(CurvatureModel::FormalW).unwrap();
        assert_eq!(ric.get(0, 0).to_string(), "4*l^-2 + 4");
        assert_eq!(ric.get(2, 2).to_string(), "2*l^-2 + 6");
    }

    #[test]
    fn gauge_invariance() {
        for model in CurvatureModel::ALL {
            let r = gauge_invariance_check(model);
            assert!(r.all_pass(), "{r:#?}");
        }
        // On a general base Γ-rotations move w; the array alone is not fixed.
        let r = CurvatureArray::from_curvature(&cy_curvature(CurvatureModel::FormalW), &Coframe::twistor()).unwrap();
        assert!(!annihilates(&gauge_matrix(Generator::G1), &r));
        assert!(annihilates(&gauge_matrix(Generator::A2), &r));
        let k = gauge_matrix(Generator::A2);
        assert_eq!(*k.get(0, 1), Coefficient::integer(-2));
        assert_eq!(*k.get(2, 4), Coefficient::integer(-1));
    }

    #[test]
    fn kaehler_chain() {
        let r = complex_structure_check();
        assert!(r.all_pass(), "{r:#?}");
        let (k, _) = complex_connection();
        assert_eq!(
            *k.get(0, 0),
            Form::alpha(2).scale(&(&Coefficient::integer(2) * &Coefficient::i()))
        );
    }

    #[test]
    fn ricci_form_both_models() {
        for model in CurvatureModel::ALL {
            let r = ricci_form_check(model);
            assert!(r.all_pass(), "{r:#?}");
        }
    }

    #[test]
    fn canonical_values() {
        let (f, b) = canonical_ricci(&rational(1, 1)).unwrap();
        assert_eq!((f, b), (rational(8, 1), rational(8, 1)));
        let (f, b) = canonical_ricci(&rational(1, 2)).unwrap();
        assert_eq!((f.clone(), b.clone()), (rational(5, 1), rational(10, 1)));
        assert_eq!(f, rational(1, 2) * b);
        assert_eq!(
            canonical_ricci(&rational(3, 1)).unwrap(),
            (rational(40, 1), rational(0, 1))
        );
        assert!(matches!(
            canonical_ricci(&rational(0, 1)),
            Err(Error::NonPositiveParameter { .. })
        ));
    }

    #[test]
    fn einstein_report_passes() {
        let r = einstein_report();
        assert_eq!(r.records.len(), 4);
        assert!(r.all_pass(), "{r:#?}");
    }

    #[test]
    fn einstein_sets() {
        assert_eq!(einstein_parameters(Family::Cy).unwrap(), vec![rational(1, 1)]);
        assert_eq!(
            einstein_parameters(Family::Canonical).unwrap(),
            vec![rational(1, 2), rational(1, 1)]
        );
    }
}
