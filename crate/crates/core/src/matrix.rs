use std::fmt;

use num::BigRational;

use crate::coefficient::Coefficient;
use crate::error::Result;
use crate::form::{DerivationTable, Form};

/// Square matrix of forms with row/column labels.
#[derive(Clone, PartialEq, Eq)]
pub struct FormMatrix {
    n: usize,
    entries: Vec<Form>,
    labels: Vec<String>,
}

impl FormMatrix {
    pub fn zeros(labels: Vec<String>) -> Self {
        let n = labels.len();
        FormMatrix {
            n,
            entries: vec![Form::zero(); n * n],
            labels,
        }
    }

    pub fn from_fn(labels: Vec<String>, mut f: impl FnMut(usize, usize) -> Form) -> Self {
        let n = labels.len();
        let entries = (0..n * n).map(|k| f(k / n, k % n)).collect();
        FormMatrix { n, entries, labels }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, i: usize, j: usize) -> &Form {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, f: Form) {
        self.entries[i * self.n + j] = f;
    }

    pub fn transpose(&self) -> FormMatrix {
        FormMatrix::from_fn(self.labels.clone(), |i, j| self.get(j, i).clone())
    }

    pub fn map(&self, f: impl Fn(&Form) -> Form) -> FormMatrix {
        FormMatrix::from_fn(self.labels.clone(), |i, j| f(self.get(i, j)))
    }

    pub fn try_map(&self, f: impl Fn(&Form) -> Result<Form>) -> Result<FormMatrix> {
        let entries = self.entries.iter().map(f).collect::<Result<Vec<_>>>()?;
        Ok(FormMatrix {
            n: self.n,
            entries,
            labels: self.labels.clone(),
        })
    }

    pub fn add(&self, other: &FormMatrix) -> FormMatrix {
        FormMatrix::from_fn(self.labels.clone(), |i, j| self.get(i, j) + other.get(i, j))
    }

    /// Matrix product with wedge as multiplication.
    pub fn wedge(&self, other: &FormMatrix) -> FormMatrix {
        FormMatrix::from_fn(self.labels.clone(), |i, j| {
            let mut acc = Form::zero();
            for k in 0..self.n {
                acc += &self.get(i, k).wedge(other.get(k, j));
            }
            acc
        })
    }

    /// Matrix acting on a column of forms: `(M ∧ v)_i = Σ_k M_ik ∧ v_k`.
    pub fn wedge_column(&self, v: &[Form]) -> Vec<Form> {
        (0..self.n)
            .map(|i| {
                let mut acc = Form::zero();
                for (k, vk) in v.iter().enumerate() {
                    acc += &self.get(i, k).wedge(vk);
                }
                acc
            })
            .collect()
    }

    pub fn d(&self, t: &DerivationTable) -> FormMatrix {
        self.map(|f| t.d(f))
    }

    /// Second structure equation: `dM + M ∧ M`.
    pub fn curvature(&self, t: &DerivationTable) -> FormMatrix {
        self.d(t).add(&self.wedge(self))
    }

    pub fn substitute_lambda(&self, value: &BigRational) -> Result<FormMatrix> {
        self.try_map(|f| f.substitute_lambda(value))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Form::is_zero)
    }

    /// `(i, j)` positions where `M + Mᵀ` is nonzero, with the defect.
    pub fn skew_defects(&self) -> Vec<(usize, usize, Form)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i..self.n {
                let s = self.get(i, j) + self.get(j, i);
                if !s.is_zero() {
                    out.push((i, j, s));
                }
            }
        }
        out
    }

    /// Coefficient matrix of generator monomial `m` in every entry.
    pub fn coefficients_of(&self, m: crate::form::Monomial) -> CoefficientMatrix {
        CoefficientMatrix::from_fn(self.labels.clone(), |i, j| self.get(i, j).coefficient(m))
    }
}

impl fmt::Debug for FormMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            for j in 0..self.n {
                writeln!(f, "[{},{}] {}", self.labels[i], self.labels[j], self.get(i, j))?;
            }
        }
        Ok(())
    }
}

/// Square matrix of coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct CoefficientMatrix {
    n: usize,
    entries: Vec<Coefficient>,
    labels: Vec<String>,
}

impl CoefficientMatrix {
    pub fn from_fn(labels: Vec<String>, mut f: impl FnMut(usize, usize) -> Coefficient) -> Self {
        let n = labels.len();
        let entries = (0..n * n).map(|k| f(k / n, k % n)).collect();
        CoefficientMatrix { n, entries, labels }
    }

    pub fn try_from_fn(labels: Vec<String>, mut f: impl FnMut(usize, usize) -> Result<Coefficient>) -> Result<Self> {
        let n = labels.len();
        let entries = (0..n * n).map(|k| f(k / n, k % n)).collect::<Result<Vec<_>>>()?;
        Ok(CoefficientMatrix { n, entries, labels })
    }

    pub fn diagonal_of(labels: Vec<String>, diag: &[Coefficient]) -> Self {
        Self::from_fn(
            labels,
            |i, j| if i == j { diag[i].clone() } else { Coefficient::zero() },
        )
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, i: usize, j: usize) -> &Coefficient {
        &self.entries[i * self.n + j]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.labels.clone(), |i, j| self.get(j, i).clone())
    }

    pub fn is_symmetric(&self) -> bool {
        *self == self.transpose()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.get(i, j).is_zero()))
    }

    pub fn is_w_free(&self) -> bool {
        self.entries.iter().all(Coefficient::is_w_free)
    }

    pub fn trace(&self) -> Coefficient {
        let mut acc = Coefficient::zero();
        for i in 0..self.n {
            acc += self.get(i, i);
        }
        acc
    }

    pub fn substitute_lambda(&self, value: &BigRational) -> Result<Self> {
        Self::try_from_fn(self.labels.clone(), |i, j| self.get(i, j).substitute_lambda(value))
    }
}

impl fmt::Debug for CoefficientMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "{}: [{}]", self.labels[i], row.join(", "))?;
        }
        Ok(())
    }
}

pub fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}
