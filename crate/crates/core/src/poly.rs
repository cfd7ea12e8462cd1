//! Sparse multivariate polynomials over the rationals, in the variables
//! `x_1..x_n` plus one optional homogenization variable `t`, and sparse
//! matrices of such polynomials.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::graph::Divisor;

/// A monomial `x_1^{e_1} ... x_n^{e_n} * t^{e_t}`.
///
/// Ordering is graded lexicographic on the x-part, with the t-exponent as a
/// final tiebreaker; display iterates terms from largest to smallest.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub exps: Vec<u32>,
    pub t_exp: u32,
}

impl Monomial {
    pub fn one(n_vars: usize) -> Self {
        Monomial {
            exps: vec![0; n_vars],
            t_exp: 0,
        }
    }

    pub fn var(n_vars: usize, idx: usize) -> Self {
        let mut m = Self::one(n_vars);
        m.exps[idx] = 1;
        m
    }

    pub fn t(n_vars: usize, e: u32) -> Self {
        let mut m = Self::one(n_vars);
        m.t_exp = e;
        m
    }

    /// Interprets a divisor as an exponent vector; fails on negative entries.
    pub fn from_divisor(d: &Divisor) -> Result<Self> {
        let mut exps = Vec::with_capacity(d.len());
        for (i, &v) in d.values.iter().enumerate() {
            if v < 0 {
                return Err(Error::NegativeEntry(i + 1));
            }
            exps.push(v as u32);
        }
        Ok(Monomial { exps, t_exp: 0 })
    }

    pub fn total_degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial {
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| a + b)
                .collect(),
            t_exp: self.t_exp + other.t_exp,
        }
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.t_exp <= other.t_exp && self.exps.iter().zip(&other.exps).all(|(a, b)| a <= b)
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial {
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| *a.max(b))
                .collect(),
            t_exp: self.t_exp.max(other.t_exp),
        }
    }

    pub fn is_one(&self) -> bool {
        self.t_exp == 0 && self.exps.iter().all(|&e| e == 0)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.exps.cmp(&other.exps))
            .then_with(|| self.t_exp.cmp(&other.t_exp))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let mut first = true;
        for (i, &e) in self.exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "x_{}", i + 1)?;
            } else {
                write!(f, "x_{}^{}", i + 1, e)?;
            }
        }
        if self.t_exp > 0 {
            if !first {
                write!(f, "*")?;
            }
            if self.t_exp == 1 {
                write!(f, "t")?;
            } else {
                write!(f, "t^{}", self.t_exp)?;
            }
        }
        Ok(())
    }
}

/// Per-variable substitution directive.
#[derive(Debug, Clone)]
pub enum Assignment {
    Keep,
    Value(BigRational),
}

/// A polynomial as a map from monomials to nonzero rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Polynomial {
    n_vars: usize,
    terms: BTreeMap<Monomial, BigRational>,
}

impl Polynomial {
    pub fn zero(n_vars: usize) -> Self {
        Polynomial {
            n_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(n_vars: usize) -> Self {
        Self::from_term(Monomial::one(n_vars), BigRational::one())
    }

    pub fn from_term(m: Monomial, c: BigRational) -> Self {
        let n_vars = m.exps.len();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Polynomial { n_vars, terms }
    }

    pub fn monomial(m: Monomial) -> Self {
        Self::from_term(m, BigRational::one())
    }

    pub fn constant(n_vars: usize, c: BigRational) -> Self {
        Self::from_term(Monomial::one(n_vars), c)
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Polynomial {
        Polynomial {
            n_vars: self.n_vars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(self.n_vars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.n_vars);
        }
        Polynomial {
            n_vars: self.n_vars,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    /// Evaluates assigned variables exactly; `Keep` leaves them symbolic.
    pub fn substitute(&self, vars: &[Assignment], t: &Assignment) -> Polynomial {
        assert_eq!(vars.len(), self.n_vars);
        let mut out = Polynomial::zero(self.n_vars);
        'term: for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut exps = vec![0u32; self.n_vars];
            let mut t_exp = 0u32;
            for (i, &e) in m.exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                match &vars[i] {
                    Assignment::Keep => exps[i] = e,
                    Assignment::Value(v) => {
                        if v.is_zero() {
                            continue 'term;
                        }
                        coeff *= pow_rational(v, e);
                    }
                }
            }
            if m.t_exp > 0 {
                match t {
                    Assignment::Keep => t_exp = m.t_exp,
                    Assignment::Value(v) => {
                        if v.is_zero() {
                            continue 'term;
                        }
                        coeff *= pow_rational(v, m.t_exp);
                    }
                }
            }
            out.add_term(Monomial { exps, t_exp }, coeff);
        }
        out
    }

    /// The coefficient when the polynomial is constant.
    pub fn constant_value(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                if m.is_one() {
                    Some(c.clone())
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// True when every term has positive total degree (no unit part).
    pub fn lies_in_irrelevant_ideal(&self) -> bool {
        self.terms.keys().all(|m| m.total_degree() + m.t_exp > 0)
    }
}

fn pow_rational(v: &BigRational, e: u32) -> BigRational {
    let mut out = BigRational::one();
    for _ in 0..e {
        out *= v;
    }
    out
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if abs.is_one() && !m.is_one() {
                write!(f, "{m}")?;
            } else if m.is_one() {
                write!(f, "{abs}")?;
            } else {
                write!(f, "{abs}*{m}")?;
            }
        }
        Ok(())
    }
}

/// A sparse matrix of polynomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMatrix {
    pub rows: usize,
    pub cols: usize,
    entries: BTreeMap<(usize, usize), Polynomial>,
}

impl PolyMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        PolyMatrix {
            rows,
            cols,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize, n_vars: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, Polynomial::one(n_vars));
        }
        m
    }

    pub fn set(&mut self, r: usize, c: usize, p: Polynomial) {
        assert!(r < self.rows && c < self.cols);
        if p.is_zero() {
            self.entries.remove(&(r, c));
        } else {
            self.entries.insert((r, c), p);
        }
    }

    pub fn add_to(&mut self, r: usize, c: usize, p: &Polynomial) {
        let cur = self.get(r, c).cloned();
        let next = match cur {
            Some(q) => q.add(p),
            None => p.clone(),
        };
        self.set(r, c, next);
    }

    pub fn get(&self, r: usize, c: usize) -> Option<&Polynomial> {
        self.entries.get(&(r, c))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &Polynomial)> {
        self.entries.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn mul(&self, other: &PolyMatrix) -> Result<PolyMatrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(
                self.rows, self.cols, other.rows, other.cols,
            ));
        }
        let mut out = PolyMatrix::zero(self.rows, other.cols);
        for (&(i, k), p) in &self.entries {
            for j in 0..other.cols {
                if let Some(q) = other.get(k, j) {
                    let prod = p.mul(q);
                    out.add_to(i, j, &prod);
                }
            }
        }
        Ok(out)
    }

    pub fn substitute(&self, vars: &[Assignment], t: &Assignment) -> PolyMatrix {
        let mut out = PolyMatrix::zero(self.rows, self.cols);
        for (&(i, j), p) in &self.entries {
            out.set(i, j, p.substitute(vars, t));
        }
        out
    }

    /// Extracts a rational matrix after all variables have been assigned.
    /// Panics if any entry is still symbolic.
    pub fn to_rational(&self) -> Vec<Vec<BigRational>> {
        let mut out = vec![vec![BigRational::zero(); self.cols]; self.rows];
        for (&(i, j), p) in &self.entries {
            out[i][j] = p
                .constant_value()
                .expect("matrix entry is not constant after substitution");
        }
        out
    }
}

/// Convenience constructors for tests and rendering.
pub fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}
