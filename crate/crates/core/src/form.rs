//! Exterior algebra on ten formal 1-form generators.
//!
//! A monomial is a `u16` bitmask over the generators; the canonical
//! generator tuple is the set bits in increasing order, so every stored
//! monomial is automatically strictly increasing. Wedge signs are the
//! parity of the merge permutation.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, BitXor, Neg, Sub, SubAssign};

use num::BigRational;
use serde::{Deserialize, Serialize};

use crate::coefficient::Coefficient;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Generator {
    A1,
    A2,
    A3,
    G1,
    G2,
    G3,
    X0,
    X1,
    X2,
    X3,
}

impl Generator {
    pub const ALL: [Generator; 10] = [
        Generator::A1,
        Generator::A2,
        Generator::A3,
        Generator::G1,
        Generator::G2,
        Generator::G3,
        Generator::X0,
        Generator::X1,
        Generator::X2,
        Generator::X3,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Generator {
        Self::ALL[i]
    }

    /// `α_μ` for `μ ∈ {1,2,3}`.
    pub fn alpha(mu: usize) -> Generator {
        [Generator::A1, Generator::A2, Generator::A3][mu - 1]
    }

    /// `Γ_μ` for `μ ∈ {1,2,3}`.
    pub fn gamma(mu: usize) -> Generator {
        [Generator::G1, Generator::G2, Generator::G3][mu - 1]
    }

    /// `X_a` for `a ∈ {0,1,2,3}`.
    pub fn x(a: usize) -> Generator {
        [Generator::X0, Generator::X1, Generator::X2, Generator::X3][a]
    }

    pub fn name(self) -> &'static str {
        ["A1", "A2", "A3", "G1", "G2", "G3", "X0", "X1", "X2", "X3"][self.index()]
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Set of generators, read as their wedge in increasing order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Monomial(u16);

impl Monomial {
    pub const UNIT: Monomial = Monomial(0);

    pub fn from_generators(gens: &[Generator]) -> Option<(i32, Monomial)> {
        let mut sign = 1;
        let mut m = Monomial::UNIT;
        for g in gens {
            let (s, next) = m.wedge(Monomial::single(*g))?;
            sign *= s;
            m = next;
        }
        Some((sign, m))
    }

    pub fn single(g: Generator) -> Monomial {
        Monomial(1 << g.index())
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn degree(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, g: Generator) -> bool {
        self.0 & (1 << g.index()) != 0
    }

    pub fn generators(self) -> impl Iterator<Item = Generator> {
        let bits = self.0;
        (0..10).filter(move |i| bits & (1 << i) != 0).map(Generator::from_index)
    }

    /// `self ∧ other` as `(sign, monomial)`, or `None` when a generator repeats.
    pub fn wedge(self, other: Monomial) -> Option<(i32, Monomial)> {
        if self.0 & other.0 != 0 {
            return None;
        }
        let mut swaps = 0;
        for g in other.generators() {
            let above = !((1u16 << (g.index() + 1)) - 1);
            swaps += (self.0 & above).count_ones();
        }
        let sign = if swaps % 2 == 0 { 1 } else { -1 };
        Some((sign, Monomial(self.0 | other.0)))
    }

    fn sort_key(self) -> Vec<usize> {
        self.generators().map(Generator::index).collect()
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic on the increasing generator tuple, shorter tuples first
/// when one is a prefix of the other.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0 {
            return f.write_str("1");
        }
        let names: Vec<&str> = self.generators().map(Generator::name).collect();
        f.write_str(&names.join("^"))
    }
}

/// Element of the exterior algebra with [`Coefficient`] coefficients.
/// Canonical: no zero coefficients are stored.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct Form {
    terms: BTreeMap<Monomial, Coefficient>,
}

impl Form {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn scalar(c: Coefficient) -> Self {
        Self::term(c, Monomial::UNIT)
    }

    pub fn term(c: Coefficient, m: Monomial) -> Self {
        let mut f = Form::zero();
        f.add_term(m, &c);
        f
    }

    pub fn generator(g: Generator) -> Self {
        Self::term(Coefficient::one(), Monomial::single(g))
    }

    pub fn alpha(mu: usize) -> Self {
        Self::generator(Generator::alpha(mu))
    }

    pub fn gamma(mu: usize) -> Self {
        Self::generator(Generator::gamma(mu))
    }

    pub fn x(a: usize) -> Self {
        Self::generator(Generator::x(a))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Coefficient)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: Monomial) -> Coefficient {
        self.terms.get(&m).cloned().unwrap_or_default()
    }

    /// Common degree of all terms; `None` for zero or mixed-degree forms.
    pub fn degree(&self) -> Option<usize> {
        let mut it = self.terms.keys().map(|m| m.degree());
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    fn add_term(&mut self, m: Monomial, c: &Coefficient) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_default();
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn scale(&self, c: &Coefficient) -> Form {
        let mut out = Form::zero();
        for (m, v) in &self.terms {
            out.add_term(*m, &(v * c));
        }
        out
    }

    pub fn wedge(&self, other: &Form) -> Form {
        let mut out = Form::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                if let Some((sign, m)) = m1.wedge(*m2) {
                    let c = c1 * c2;
                    if sign > 0 {
                        out.add_term(m, &c);
                    } else {
                        out.add_term(m, &-c);
                    }
                }
            }
        }
        out
    }

    /// Coefficient-wise complex conjugation.
    pub fn conjugate(&self) -> Form {
        Form {
            terms: self.terms.iter().map(|(m, c)| (*m, c.conj())).collect(),
        }
    }

    pub fn substitute_lambda(&self, value: &BigRational) -> Result<Form> {
        let mut out = Form::zero();
        for (m, c) in &self.terms {
            out.add_term(*m, &c.substitute_lambda(value)?);
        }
        Ok(out)
    }

    /// Apply `f` to every coefficient.
    pub fn map_coefficients(&self, f: impl Fn(&Coefficient) -> Coefficient) -> Form {
        let mut out = Form::zero();
        for (m, c) in &self.terms {
            out.add_term(*m, &f(c));
        }
        out
    }

    /// Drop every term containing one of `gens`.
    pub fn without(&self, gens: &[Generator]) -> Form {
        Form {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| !gens.iter().any(|g| m.contains(*g)))
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    /// First generator of `gens` occurring in some term, if any.
    pub fn find_generator(&self, gens: &[Generator]) -> Option<Generator> {
        gens.iter().copied().find(|g| self.terms.keys().any(|m| m.contains(*g)))
    }

    pub fn is_w_free(&self) -> bool {
        self.terms.values().all(Coefficient::is_w_free)
    }

    /// Extreme powers of `λ` over all coefficients.
    pub fn lambda_degree_range(&self) -> Option<(i32, i32)> {
        self.terms
            .values()
            .filter_map(Coefficient::lambda_degree_range)
            .reduce(|(h1, l1), (h2, l2)| (h1.max(h2), l1.min(l2)))
    }
}

impl From<Generator> for Form {
    fn from(g: Generator) -> Self {
        Form::generator(g)
    }
}

impl AddAssign<&Form> for Form {
    fn add_assign(&mut self, rhs: &Form) {
        for (m, c) in &rhs.terms {
            self.add_term(*m, c);
        }
    }
}

impl SubAssign<&Form> for Form {
    fn sub_assign(&mut self, rhs: &Form) {
        for (m, c) in &rhs.terms {
            self.add_term(*m, &-c);
        }
    }
}

impl Add<&Form> for &Form {
    type Output = Form;
    fn add(self, rhs: &Form) -> Form {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for Form {
    type Output = Form;
    fn add(mut self, rhs: Form) -> Form {
        self += &rhs;
        self
    }
}

impl Sub<&Form> for &Form {
    type Output = Form;
    fn sub(self, rhs: &Form) -> Form {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for Form {
    type Output = Form;
    fn sub(mut self, rhs: Form) -> Form {
        self -= &rhs;
        self
    }
}

impl Neg for &Form {
    type Output = Form;
    fn neg(self) -> Form {
        Form {
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }
}

impl Neg for Form {
    type Output = Form;
    fn neg(self) -> Form {
        -&self
    }
}

/// `a ^ b` is the wedge product.
impl BitXor<&Form> for &Form {
    type Output = Form;
    fn bitxor(self, rhs: &Form) -> Form {
        self.wedge(rhs)
    }
}

impl BitXor for Form {
    type Output = Form;
    fn bitxor(self, rhs: Form) -> Form {
        self.wedge(&rhs)
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(m, c)| format!("({c}) * {m}")).collect();
        f.write_str(&parts.join(" + "))
    }
}

impl fmt::Debug for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Form({self})")
    }
}

/// Exterior derivative of every generator. Coefficients (`λ` and the Weyl
/// symbols) are d-closed constants, so no table entry is needed for them.
#[derive(Clone, Debug)]
pub struct DerivationTable {
    images: Vec<Form>,
}

impl DerivationTable {
    pub fn new(images: [Form; 10]) -> Self {
        DerivationTable { images: images.into() }
    }

    pub fn of(&self, g: Generator) -> &Form {
        &self.images[g.index()]
    }

    /// `d` of a coefficient variable; always zero.
    pub fn of_variable(&self, _v: crate::coefficient::Var) -> Form {
        Form::zero()
    }

    /// `d` extended by the graded Leibniz rule.
    pub fn d(&self, a: &Form) -> Form {
        let mut out = Form::zero();
        for (m, c) in a.terms() {
            let gens: Vec<Generator> = m.generators().collect();
            for (j, g) in gens.iter().enumerate() {
                let prefix = Monomial(gens[..j].iter().fold(0, |acc, h| acc | (1 << h.index())));
                let suffix = Monomial(gens[j + 1..].iter().fold(0, |acc, h| acc | (1 << h.index())));
                let piece = Form::term(c.clone(), prefix)
                    .wedge(self.of(*g))
                    .wedge(&Form::term(Coefficient::one(), suffix));
                if j % 2 == 0 {
                    out += &piece;
                } else {
                    out -= &piece;
                }
            }
        }
        out
    }
}

/// Free-function form of [`DerivationTable::d`].
pub fn exterior_derivative(a: &Form, t: &DerivationTable) -> Form {
    t.d(a)
}

/// Orthonormal coframe: an ordered list of slots, each a generator `g`
/// together with the value `g(e_p)` on the dual frame vector `e_p`.
/// Generators outside the coframe are gauge directions.
#[derive(Clone, Debug)]
pub struct Coframe {
    slots: Vec<(Generator, Coefficient)>,
    labels: Vec<String>,
}

impl Coframe {
    pub fn new(slots: Vec<(Generator, Coefficient)>, labels: Vec<String>) -> Self {
        assert_eq!(slots.len(), labels.len());
        Coframe { slots, labels }
    }

    /// Horizontal frame `X0..X3` of the base.
    pub fn base() -> Self {
        Coframe::new(
            (0..4).map(|a| (Generator::x(a), Coefficient::one())).collect(),
            (0..4).map(|a| format!("h{a}")).collect(),
        )
    }

    /// `{λα₁, λα₃, X0..X3}`; `α₁, α₃` evaluate to `λ⁻¹` on their duals.
    pub fn twistor() -> Self {
        let li = Coefficient::lambda_pow(-1);
        let mut slots = vec![(Generator::A1, li.clone()), (Generator::A3, li)];
        slots.extend((0..4).map(|a| (Generator::x(a), Coefficient::one())));
        let labels = ["v1", "v2", "h0", "h1", "h2", "h3"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        Coframe::new(slots, labels)
    }

    /// Same coframe for the metric `ρ·g`: every dual vector shrinks by `1/s`
    /// where `s² = ρ`.
    pub fn rescaled(&self, inv_sqrt_rho: &Coefficient) -> Self {
        Coframe {
            slots: self.slots.iter().map(|(g, c)| (*g, c * inv_sqrt_rho)).collect(),
            labels: self.labels.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, p: usize) -> &str {
        &self.labels[p]
    }

    pub fn generator(&self, p: usize) -> Generator {
        self.slots[p].0
    }

    pub fn slot_of(&self, g: Generator) -> Option<usize> {
        self.slots.iter().position(|(h, _)| *h == g)
    }

    /// Generators not in the coframe.
    pub fn gauge_generators(&self) -> Vec<Generator> {
        Generator::ALL
            .iter()
            .copied()
            .filter(|g| self.slot_of(*g).is_none())
            .collect()
    }

    /// Normal gauge: drop all gauge-generator terms.
    pub fn strip_gauge(&self, f: &Form) -> Form {
        f.without(&self.gauge_generators())
    }

    /// The 1-form `θ_p` of slot `p` (e.g. `λα₁` for `v1`).
    pub fn coframe_form(&self, p: usize) -> Form {
        let (g, s) = &self.slots[p];
        Form::generator(*g).scale(&invert_monomial_scale(s))
    }

    /// Value of a 1-form on `e_p`. Gauge terms are rejected.
    pub fn evaluate_one(&self, omega: &Form, p: usize) -> Result<Coefficient> {
        self.check_slot(p)?;
        let mut out = Coefficient::zero();
        for (m, c) in omega.terms() {
            if m.degree() != 1 {
                return Err(Error::DegreeMismatch {
                    expected: 1,
                    found: m.degree(),
                });
            }
            let g = m.generators().next().expect("degree one");
            let slot = self.slot_of(g).ok_or(Error::NonBasicForm(g))?;
            if slot == p {
                out += &(c * &self.slots[p].1);
            }
        }
        Ok(out)
    }

    /// `ω(e_p, e_q)` for a 2-form `ω`; the convention is
    /// `(θ^a ∧ θ^b)(e_p, e_q) = δ^a_p δ^b_q − δ^a_q δ^b_p`.
    pub fn evaluate_pair(&self, omega: &Form, p: usize, q: usize) -> Result<Coefficient> {
        self.check_slot(p)?;
        self.check_slot(q)?;
        let mut out = Coefficient::zero();
        for (m, c) in omega.terms() {
            if m.degree() != 2 {
                return Err(Error::DegreeMismatch {
                    expected: 2,
                    found: m.degree(),
                });
            }
            let mut it = m.generators();
            let (ga, gb) = (it.next().expect("degree two"), it.next().expect("degree two"));
            let a = self.slot_of(ga).ok_or(Error::NonBasicForm(ga))?;
            let b = self.slot_of(gb).ok_or(Error::NonBasicForm(gb))?;
            let weight = &self.slots[a].1 * &self.slots[b].1;
            if (a, b) == (p, q) {
                out += &(c * &weight);
            } else if (a, b) == (q, p) {
                out -= &(c * &weight);
            }
        }
        Ok(out)
    }

    /// `ω(u, v)` for frame-component vectors `u, v` (complex entries allowed).
    /// Gauge terms are rejected.
    pub fn evaluate_vectors(&self, omega: &Form, u: &[Coefficient], v: &[Coefficient]) -> Result<Coefficient> {
        let mut out = Coefficient::zero();
        for p in 0..self.len() {
            for q in (p + 1)..self.len() {
                let det = &(&u[p] * &v[q]) - &(&u[q] * &v[p]);
                if det.is_zero() {
                    continue;
                }
                out += &(&self.evaluate_pair(omega, p, q)? * &det);
            }
        }
        Ok(out)
    }

    fn check_slot(&self, p: usize) -> Result<()> {
        if p < self.len() {
            Ok(())
        } else {
            Err(Error::FrameIndex(p))
        }
    }
}

/// Inverse of a scale of the form `r·λ^k` (the only scales used by coframes).
fn invert_monomial_scale(s: &Coefficient) -> Coefficient {
    let mut terms = s.terms();
    let (e, c) = terms.next().expect("nonzero scale");
    assert!(terms.next().is_none(), "coframe scale must be a monomial");
    let k = e.get(crate::coefficient::Var::Lambda);
    let inv = Coefficient::constant(c.inv());
    &inv * &Coefficient::lambda_pow(-k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient::rational;

    fn g(g: Generator) -> Form {
        Form::generator(g)
    }

    #[test]
    fn basis_wedge_and_nilpotence() {
        let f = g(Generator::X0) ^ g(Generator::X1);
        let (_, m) = Monomial::from_generators(&[Generator::X0, Generator::X1]).unwrap();
        assert_eq!(f, Form::term(Coefficient::one(), m));
        assert!((g(Generator::X0) ^ g(Generator::X0)).is_zero());
        assert_eq!(g(Generator::X1) ^ g(Generator::X0), -f);
    }

    #[test]
    fn zeta_wedge_zeta_bar() {
        let zeta = &Form::alpha(1) + &Form::alpha(3).scale(&Coefficient::i());
        let w = zeta.wedge(&zeta.conjugate());
        let expect = (Form::alpha(1) ^ Form::alpha(3)).scale(&(&Coefficient::integer(-2) * &Coefficient::i()));
        assert_eq!(w, expect);
    }

    #[test]
    fn rendering() {
        let c = &(&Coefficient::integer(2) * &Coefficient::lambda_pow(-1)) * &Coefficient::weyl(1, 2);
        let f = (Form::alpha(1) ^ Form::alpha(3)).scale(&c);
        assert_eq!(f.to_string(), "(2*l^-1*w12) * A1^A3");
        assert_eq!(Form::zero().to_string(), "0");
    }

    #[test]
    fn evaluate_pair_examples() {
        let cf = Coframe::twistor();
        let x01 = g(Generator::X0) ^ g(Generator::X1);
        assert_eq!(cf.evaluate_pair(&x01, 2, 3).unwrap(), Coefficient::one());
        assert_eq!(cf.evaluate_pair(&x01, 3, 2).unwrap(), -Coefficient::one());
        let a1x0 = g(Generator::A1) ^ g(Generator::X0);
        assert_eq!(cf.evaluate_pair(&a1x0, 0, 2).unwrap(), Coefficient::lambda_pow(-1));
        let gauge = g(Generator::A2) ^ g(Generator::X0);
        assert_eq!(cf.evaluate_pair(&gauge, 0, 2), Err(Error::NonBasicForm(Generator::A2)));
        assert_eq!(cf.coframe_form(0), Form::alpha(1).scale(&Coefficient::lambda()));
    }

    #[test]
    fn lambda_substitution() {
        let x0 = Form::x(0);
        let f = &x0.scale(&Coefficient::lambda()) - &x0.scale(&Coefficient::lambda_pow(-1));
        assert!(f.substitute_lambda(&rational(1, 1)).unwrap().is_zero());
        let h = (Form::alpha(1) ^ Form::alpha(3)).scale(&Coefficient::lambda_pow(2));
        assert_eq!(
            h.substitute_lambda(&rational(2, 1)).unwrap(),
            (Form::alpha(1) ^ Form::alpha(3)).scale(&Coefficient::integer(4))
        );
        assert_eq!(f.substitute_lambda(&rational(0, 1)), Err(Error::ZeroSubstitution));
    }

    #[test]
    fn d_of_constant_is_zero() {
        let t = DerivationTable::new(std::array::from_fn(|i| {
            Form::generator(Generator::from_index(i)) ^ Form::x(0)
        }));
        assert!(t.d(&Form::scalar(Coefficient::integer(5))).is_zero());
    }
}
