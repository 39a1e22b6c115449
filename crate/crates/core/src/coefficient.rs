//! Exact coefficients: Laurent polynomials in `λ` and polynomials in the
//! self-dual Weyl symbols `w11, w12, w13, w22, w23` over the Gaussian
//! rationals.
//!
//! The sixth Weyl symbol never appears as a variable: `w33 = -(w11 + w22)`
//! is substituted when it is requested, and `w_kj` for `k > j` is routed to
//! `w_jk`. Symmetry and tracelessness of the Weyl block are therefore
//! polynomial identities of the ring rather than side conditions.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num::{BigInt, BigRational, Complex, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Gaussian rational number `a + b i` with `a, b ∈ ℚ`.
pub type Gaussian = Complex<BigRational>;

/// Ring variables. `Lambda` may carry negative exponents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Lambda,
    W11,
    W12,
    W13,
    W22,
    W23,
}

impl Var {
    pub const ALL: [Var; 6] = [Var::Lambda, Var::W11, Var::W12, Var::W13, Var::W22, Var::W23];

    fn slot(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::Lambda => "l",
            Var::W11 => "w11",
            Var::W12 => "w12",
            Var::W13 => "w13",
            Var::W22 => "w22",
            Var::W23 => "w23",
        }
    }
}

/// Exponent vector indexed by [`Var`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Exponents([i32; 6]);

impl Exponents {
    pub fn get(&self, v: Var) -> i32 {
        self.0[v.slot()]
    }

    fn lambda_only(&self) -> bool {
        self.0[1..].iter().all(|&e| e == 0)
    }

    fn times(&self, other: &Exponents) -> Exponents {
        let mut out = [0; 6];
        for (o, (a, b)) in out.iter_mut().zip(self.0.iter().zip(other.0.iter())) {
            *o = a + b;
        }
        Exponents(out)
    }
}

pub fn gaussian(re: BigRational, im: BigRational) -> Gaussian {
    Complex::new(re, im)
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn render_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn render_gaussian(g: &Gaussian) -> String {
    match (g.re.is_zero(), g.im.is_zero()) {
        (_, true) => render_rational(&g.re),
        (true, false) => {
            if g.im.is_one() {
                "i".to_string()
            } else if (-g.im.clone()).is_one() {
                "-i".to_string()
            } else {
                format!("{}i", render_rational(&g.im))
            }
        }
        (false, false) => {
            let sign = if g.im.is_negative() { "-" } else { "+" };
            let im = g.im.abs();
            let im_text = if im.is_one() {
                String::new()
            } else {
                render_rational(&im)
            };
            format!("({}{}{}i)", render_rational(&g.re), sign, im_text)
        }
    }
}

/// Element of `ℚ(i)[λ, λ⁻¹, w11, w12, w13, w22, w23]` in canonical form:
/// no zero terms are stored.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Coefficient {
    terms: BTreeMap<Exponents, Gaussian>,
}

impl Coefficient {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Complex::new(BigRational::one(), BigRational::zero()))
    }

    pub fn constant(value: Gaussian) -> Self {
        let mut terms = BTreeMap::new();
        if !value.is_zero() {
            terms.insert(Exponents::default(), value);
        }
        Coefficient { terms }
    }

    pub fn integer(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Self::from_rational(rational(n, d))
    }

    pub fn from_rational(r: BigRational) -> Self {
        Self::constant(Complex::new(r, BigRational::zero()))
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Self::constant(Complex::new(BigRational::zero(), BigRational::one()))
    }

    pub fn var(v: Var) -> Self {
        Self::monomial(v, 1)
    }

    /// `v^power`; negative powers are only meaningful for `λ`.
    pub fn monomial(v: Var, power: i32) -> Self {
        assert!(
            v == Var::Lambda || power >= 0,
            "negative exponent on Weyl symbol {}",
            v.name()
        );
        let mut e = [0; 6];
        e[v.slot()] = power;
        let mut terms = BTreeMap::new();
        terms.insert(Exponents(e), Complex::new(BigRational::one(), BigRational::zero()));
        Coefficient { terms }
    }

    pub fn lambda() -> Self {
        Self::var(Var::Lambda)
    }

    pub fn lambda_pow(power: i32) -> Self {
        Self::monomial(Var::Lambda, power)
    }

    /// Weyl symbol `w_jk` (1-based, `j, k ∈ {1,2,3}`) with symmetry and
    /// tracelessness applied.
    pub fn weyl(j: usize, k: usize) -> Self {
        let (a, b) = if j <= k { (j, k) } else { (k, j) };
        match (a, b) {
            (1, 1) => Self::var(Var::W11),
            (1, 2) => Self::var(Var::W12),
            (1, 3) => Self::var(Var::W13),
            (2, 2) => Self::var(Var::W22),
            (2, 3) => Self::var(Var::W23),
            (3, 3) => -(Self::var(Var::W11) + Self::var(Var::W22)),
            _ => panic!("Weyl index out of range: ({j}, {k})"),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Gaussian)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn insert_term(&mut self, e: Exponents, c: Gaussian) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(Gaussian::zero);
        *entry = &*entry + c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn scale(&self, s: &Gaussian) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        Coefficient {
            terms: self.terms.iter().map(|(e, c)| (*e, c * s)).collect(),
        }
    }

    /// Complex conjugation; `λ` and the Weyl symbols are real.
    pub fn conj(&self) -> Self {
        Coefficient {
            terms: self.terms.iter().map(|(e, c)| (*e, c.conj())).collect(),
        }
    }

    /// True when no Weyl symbol occurs.
    pub fn is_w_free(&self) -> bool {
        self.terms.keys().all(Exponents::lambda_only)
    }

    /// True when every coefficient is real.
    pub fn is_real(&self) -> bool {
        self.terms.values().all(|c| c.im.is_zero())
    }

    /// Constant value, if the element has no variables.
    pub fn as_constant(&self) -> Option<Gaussian> {
        match self.terms.len() {
            0 => Some(Gaussian::zero()),
            1 => {
                let (e, c) = self.terms.iter().next()?;
                (*e == Exponents::default()).then(|| c.clone())
            }
            _ => None,
        }
    }

    /// Constant real rational value, if any.
    pub fn as_rational(&self) -> Option<BigRational> {
        self.as_constant().filter(|g| g.im.is_zero()).map(|g| g.re)
    }

    /// Highest and lowest power of `λ` present, or `None` for zero.
    pub fn lambda_degree_range(&self) -> Option<(i32, i32)> {
        let mut it = self.terms.keys().map(|e| e.get(Var::Lambda));
        let first = it.next()?;
        Some(it.fold((first, first), |(hi, lo), d| (hi.max(d), lo.min(d))))
    }

    /// Coefficient of `λ^p`, as a `λ`-free element.
    pub fn lambda_coefficient(&self, p: i32) -> Coefficient {
        let mut out = Coefficient::zero();
        for (e, c) in &self.terms {
            if e.get(Var::Lambda) == p {
                let mut rest = *e;
                rest.0[Var::Lambda.slot()] = 0;
                out.insert_term(rest, c.clone());
            }
        }
        out
    }

    /// Evaluate `λ ↦ value`.
    pub fn substitute_lambda(&self, value: &BigRational) -> Result<Self> {
        if value.is_zero() {
            return Err(Error::ZeroSubstitution);
        }
        let mut out = Coefficient::zero();
        for (e, c) in &self.terms {
            let p = e.get(Var::Lambda);
            let factor = pow_rational(value, p);
            let mut rest = *e;
            rest.0[Var::Lambda.slot()] = 0;
            out.insert_term(rest, c * Complex::new(factor, BigRational::zero()));
        }
        Ok(out)
    }

    /// Evaluate `λ² ↦ mu` on an element containing only even powers of `λ`.
    pub fn substitute_lambda_sq(&self, mu: &BigRational) -> Result<Self> {
        if mu.is_zero() {
            return Err(Error::ZeroSubstitution);
        }
        let mut out = Coefficient::zero();
        for (e, c) in &self.terms {
            let p = e.get(Var::Lambda);
            if p % 2 != 0 {
                return Err(Error::OddLambdaPower);
            }
            let mut rest = *e;
            rest.0[Var::Lambda.slot()] = 0;
            out.insert_term(rest, c * Complex::new(pow_rational(mu, p / 2), BigRational::zero()));
        }
        Ok(out)
    }

    /// Rewrite a real, `w`-free element with only even `λ` powers as a
    /// polynomial in `μ = λ²`. Returns `(shift, coeffs)` with
    /// `self = μ^shift · Σ coeffs[k] μ^k`.
    pub fn to_mu_polynomial(&self) -> Result<(i32, Vec<BigRational>)> {
        if !self.is_w_free() || !self.is_real() {
            return Err(Error::NotUnivariate);
        }
        let Some((hi, lo)) = self.lambda_degree_range() else {
            return Ok((0, Vec::new()));
        };
        if hi % 2 != 0 || lo % 2 != 0 {
            return Err(Error::OddLambdaPower);
        }
        let mut coeffs = vec![BigRational::zero(); ((hi - lo) / 2 + 1) as usize];
        for (e, c) in &self.terms {
            let p = e.get(Var::Lambda);
            if p % 2 != 0 {
                return Err(Error::OddLambdaPower);
            }
            coeffs[((p - lo) / 2) as usize] = c.re.clone();
        }
        Ok((lo / 2, coeffs))
    }

    /// Floating-point value of a real, `w`-free element at `μ = λ²`.
    pub fn eval_mu_f64(&self, mu: f64) -> Option<f64> {
        let lambda = mu.sqrt();
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            if !e.lambda_only() || !c.im.is_zero() {
                return None;
            }
            acc += c.re.to_f64()? * lambda.powi(e.get(Var::Lambda));
        }
        Some(acc)
    }
}

fn pow_rational(base: &BigRational, p: i32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..p.unsigned_abs() {
        acc *= base;
    }
    if p < 0 {
        acc.recip()
    } else {
        acc
    }
}

impl From<i64> for Coefficient {
    fn from(n: i64) -> Self {
        Coefficient::integer(n)
    }
}

impl From<BigRational> for Coefficient {
    fn from(r: BigRational) -> Self {
        Coefficient::from_rational(r)
    }
}

impl From<Gaussian> for Coefficient {
    fn from(g: Gaussian) -> Self {
        Coefficient::constant(g)
    }
}

impl AddAssign<&Coefficient> for Coefficient {
    fn add_assign(&mut self, rhs: &Coefficient) {
        for (e, c) in &rhs.terms {
            self.insert_term(*e, c.clone());
        }
    }
}

impl SubAssign<&Coefficient> for Coefficient {
    fn sub_assign(&mut self, rhs: &Coefficient) {
        for (e, c) in &rhs.terms {
            self.insert_term(*e, -c.clone());
        }
    }
}

impl Add<&Coefficient> for &Coefficient {
    type Output = Coefficient;
    fn add(self, rhs: &Coefficient) -> Coefficient {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for Coefficient {
    type Output = Coefficient;
    fn add(mut self, rhs: Coefficient) -> Coefficient {
        self += &rhs;
        self
    }
}

impl Sub<&Coefficient> for &Coefficient {
    type Output = Coefficient;
    fn sub(self, rhs: &Coefficient) -> Coefficient {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for Coefficient {
    type Output = Coefficient;
    fn sub(mut self, rhs: Coefficient) -> Coefficient {
        self -= &rhs;
        self
    }
}

impl Neg for &Coefficient {
    type Output = Coefficient;
    fn neg(self) -> Coefficient {
        Coefficient {
            terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect(),
        }
    }
}

impl Neg for Coefficient {
    type Output = Coefficient;
    fn neg(self) -> Coefficient {
        -&self
    }
}

impl Mul<&Coefficient> for &Coefficient {
    type Output = Coefficient;
    fn mul(self, rhs: &Coefficient) -> Coefficient {
        let mut out = Coefficient::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                out.insert_term(e1.times(e2), c1 * c2);
            }
        }
        out
    }
}

impl Mul for Coefficient {
    type Output = Coefficient;
    fn mul(self, rhs: Coefficient) -> Coefficient {
        &self * &rhs
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let vars: Vec<String> = Var::ALL
                .iter()
                .filter(|v| e.get(**v) != 0)
                .map(|v| match e.get(*v) {
                    1 => v.name().to_string(),
                    p => format!("{}^{}", v.name(), p),
                })
                .collect();
            let num = render_gaussian(c);
            if vars.is_empty() {
                f.write_str(&num)?;
            } else if c.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else if (-c.clone()).is_one() {
                write!(f, "-{}", vars.join("*"))?;
            } else {
                write!(f, "{}*{}", num, vars.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Coefficient({self})")
    }
}
