//! Sparse multivariate polynomials in the 16 phase-space variables.
//!
//! Variables are indexed 0..16: indices 0..8 are q1..q8 (base point),
//! indices 8..16 are xi1..xi8 (covector). Terms live in a `BTreeMap` keyed
//! by the graded-lexicographic order, so canonical form is unique and the
//! leading term is the last map entry.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, ToPrimitive, Zero};

use super::Rational;

/// Number of phase-space variables: q1..q8 then xi1..xi8.
pub const NVARS: usize = 16;

/// Variable index of q_i for i in 1..=8.
pub fn q_var(i: usize) -> usize {
    assert!((1..=8).contains(&i), "q index out of range: {i}");
    i - 1
}

/// Variable index of xi_i for i in 1..=8.
pub fn xi_var(i: usize) -> usize {
    assert!((1..=8).contains(&i), "xi index out of range: {i}");
    8 + i - 1
}

/// Human name of a variable index ("q1".."q8", "xi1".."xi8").
pub fn var_name(v: usize) -> String {
    assert!(v < NVARS, "variable index out of range: {v}");
    if v < 8 {
        format!("q{}", v + 1)
    } else {
        format!("xi{}", v - 7)
    }
}

/// Exponent multi-index over (q1..q8, xi1..xi8).
///
/// Ordered graded-lexicographically: higher total degree wins, ties break
/// lexicographically with q1 heaviest and xi8 lightest. One fixed order
/// everywhere keeps division remainders deterministic across runs.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(pub [u8; NVARS]);

impl Monomial {
    pub fn one() -> Self {
        Monomial([0; NVARS])
    }

    pub fn var(v: usize) -> Self {
        assert!(v < NVARS, "variable index out of range: {v}");
        let mut e = [0u8; NVARS];
        e[v] = 1;
        Monomial(e)
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn exponent(&self, v: usize) -> u8 {
        self.0[v]
    }

    /// Product of monomials (exponent sum). Panics on exponent overflow,
    /// which no computation in this crate approaches.
    pub fn mul(&self, other: &Self) -> Self {
        let mut e = [0u8; NVARS];
        for (i, slot) in e.iter_mut().enumerate() {
            *slot = self.0[i]
                .checked_add(other.0[i])
                .expect("monomial exponent overflow");
        }
        Monomial(e)
    }

    pub fn divides(&self, other: &Self) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    /// `other / self` when `self` divides `other`.
    pub fn div_into(&self, other: &Self) -> Option<Self> {
        let mut e = [0u8; NVARS];
        for i in 0..NVARS {
            e[i] = other.0[i].checked_sub(self.0[i])?;
        }
        Some(Monomial(e))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let mut first = true;
        for (v, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "{}", var_name(v))?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// Sparse polynomial with exact rational coefficients in canonical form:
/// no zero coefficients are ever stored, so structural equality is
/// polynomial equality.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        let mut p = Poly::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    /// The variable with internal index `v` (0..16).
    pub fn var(v: usize) -> Self {
        let mut p = Poly::zero();
        p.add_term(Monomial::var(v), Rational::one());
        p
    }

    /// q_i for i in 1..=8.
    pub fn q(i: usize) -> Self {
        Poly::var(q_var(i))
    }

    /// xi_i for i in 1..=8.
    pub fn xi(i: usize) -> Self {
        Poly::var(xi_var(i))
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = Poly::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    /// The pairing <q, xi> = sum_i q_i xi_i.
    pub fn q_dot_xi() -> Self {
        Poly::from_terms((1..=8).map(|i| {
            (
                Monomial::var(q_var(i)).mul(&Monomial::var(xi_var(i))),
                Rational::one(),
            )
        }))
    }

    /// |q|^2 = sum_i q_i^2.
    pub fn norm_sq_q() -> Self {
        Poly::from_terms((1..=8).map(|i| {
            let m = Monomial::var(q_var(i));
            (m.mul(&m), Rational::one())
        }))
    }

    /// |xi|^2 = sum_i xi_i^2.
    pub fn norm_sq_xi() -> Self {
        Poly::from_terms((1..=8).map(|i| {
            let m = Monomial::var(xi_var(i));
            (m.mul(&m), Rational::one())
        }))
    }

    /// Merge one term into canonical form, dropping the entry if the
    /// coefficient cancels to zero.
    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    /// Largest term in the graded-lexicographic order.
    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.last_key_value()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (*m, v * c))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Exact formal partial derivative with respect to variable `v` (0..16).
    pub fn partial_derivative(&self, v: usize) -> Poly {
        assert!(v < NVARS, "variable index out of range: {v}");
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.0[v];
            if e == 0 {
                continue;
            }
            let mut em = *m;
            em.0[v] = e - 1;
            out.add_term(em, c * Rational::from_integer(e.into()));
        }
        out
    }

    /// Exact evaluation at a rational phase-space point.
    pub fn eval_rational(&self, point: &[Rational; NVARS]) -> Rational {
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    t *= &point[v];
                }
            }
            acc += t;
        }
        acc
    }

    /// Floating mirror of evaluation; one-way, used only by numerics.
    pub fn eval_f64(&self, point: &[f64; NVARS]) -> f64 {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = c.to_f64().expect("coefficient does not fit in f64");
            for (v, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    t *= point[v];
                }
            }
            acc += t;
        }
        acc
    }

    /// Precomputes an f64 term table so repeated evaluation skips the
    /// per-call big-rational conversions. One-way; exactness ends here.
    pub fn compile_f64(&self) -> CompiledPoly {
        CompiledPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.0, c.to_f64().expect("coefficient does not fit in f64")))
                .collect(),
        }
    }
}

/// Float-coefficient snapshot of a [`Poly`] for tight evaluation loops.
pub struct CompiledPoly {
    terms: Vec<([u8; NVARS], f64)>,
}

impl CompiledPoly {
    pub fn eval(&self, point: &[f64; NVARS]) -> f64 {
        let mut acc = 0.0;
        for (exps, coeff) in &self.terms {
            let mut t = *coeff;
            for (v, &e) in exps.iter().enumerate() {
                for _ in 0..e {
                    t *= point[v];
                }
            }
            acc += t;
        }
        acc
    }
}

impl Sum for Poly {
    fn sum<I: Iterator<Item = Poly>>(iter: I) -> Poly {
        let mut acc = Poly::zero();
        for p in iter {
            for (m, c) in p.terms {
                acc.add_term(m, c);
            }
        }
        acc
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, -c.clone());
        }
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect(),
        }
    }
}

macro_rules! forward_owned_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<Poly> for Poly {
            type Output = Poly;
            fn $method(self, rhs: Poly) -> Poly {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Poly> for Poly {
            type Output = Poly;
            fn $method(self, rhs: &Poly) -> Poly {
                (&self).$method(rhs)
            }
        }
        impl $trait<Poly> for &Poly {
            type Output = Poly;
            fn $method(self, rhs: Poly) -> Poly {
                self.$method(&rhs)
            }
        }
    };
}

forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // leading term first
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c < &Rational::zero();
            let abs = if neg { -c.clone() } else { c.clone() };
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{abs}*{m}")?;
            }
        }
        Ok(())
    }
}

/// Per-point power table for evaluating many polynomials at one rational
/// point without recomputing variable powers.
pub struct PowTable {
    pows: Vec<Vec<Rational>>,
}

impl PowTable {
    /// Precompute powers 0..=max_deg of every coordinate.
    pub fn new(point: &[Rational; NVARS], max_deg: u32) -> Self {
        let pows = point
            .iter()
            .map(|x| {
                let mut col = Vec::with_capacity(max_deg as usize + 1);
                col.push(Rational::one());
                for k in 1..=max_deg as usize {
                    let next = &col[k - 1] * x;
                    col.push(next);
                }
                col
            })
            .collect();
        PowTable { pows }
    }

    /// Exact evaluation; panics if the polynomial exceeds the table degree.
    pub fn eval(&self, p: &Poly) -> Rational {
        let mut acc = Rational::zero();
        for (m, c) in p.iter() {
            let mut t = c.clone();
            for (v, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t *= &self.pows[v][e as usize];
                }
            }
            acc += t;
        }
        acc
    }
}
