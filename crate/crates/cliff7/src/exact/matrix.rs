//! Dense exact matrices over the rationals with fraction-free rank and
//! nullspace computation.
//!
//! Elimination is Bareiss-style on an integerized copy (each row scaled by
//! the lcm of its denominators, which changes neither rank nor nullspace).
//! Every intermediate entry is a minor of the integerized matrix, so
//! coefficient growth stays polynomial and the divisions are exact.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::Rational;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(
            rows.iter().all(|row| row.len() == c),
            "ragged rows in matrix constructor"
        );
        RatMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        RatMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        RatMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = Rational::zero();
                for j in 0..self.cols {
                    if !self.get(i, j).is_zero() && !v[j].is_zero() {
                        acc += self.get(i, j) * &v[j];
                    }
                }
                acc
            })
            .collect()
    }

    /// Exact rank by fraction-free elimination.
    pub fn rank(&self) -> usize {
        let (echelon, pivots) = bareiss(self.integerize());
        let _ = echelon;
        pivots.len()
    }

    /// Exact nullspace basis; every vector satisfies M v = 0 exactly.
    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        self.rank_nullspace().1
    }

    /// Rank and nullspace in one elimination; rank + nullity = cols.
    pub fn rank_nullspace(&self) -> (usize, Vec<Vec<Rational>>) {
        let (echelon, pivot_cols) = bareiss(self.integerize());
        let rank = pivot_cols.len();
        let pivot_set: Vec<bool> = {
            let mut s = vec![false; self.cols];
            for &c in &pivot_cols {
                s[c] = true;
            }
            s
        };
        let mut basis = Vec::with_capacity(self.cols - rank);
        for f in 0..self.cols {
            if pivot_set[f] {
                continue;
            }
            let mut v = vec![Rational::zero(); self.cols];
            v[f] = Rational::one();
            // back-substitute through the echelon rows, bottom up
            for k in (0..rank).rev() {
                let c = pivot_cols[k];
                let mut s = Rational::zero();
                for j in (c + 1)..self.cols {
                    if !echelon[k][j].is_zero() && !v[j].is_zero() {
                        s += Rational::from_integer(echelon[k][j].clone()) * &v[j];
                    }
                }
                v[c] = -s / Rational::from_integer(echelon[k][c].clone());
            }
            debug_assert!(self.mul_vec(&v).iter().all(Rational::is_zero));
            basis.push(v);
        }
        (rank, basis)
    }

    /// Clear denominators row by row; positive row scaling preserves rank
    /// and nullspace.
    fn integerize(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows)
            .map(|i| {
                let mut l = BigInt::one();
                for x in self.row(i) {
                    l = l.lcm(x.denom());
                }
                self.row(i)
                    .iter()
                    .map(|x| x.numer() * (&l / x.denom()))
                    .collect()
            })
            .collect()
    }
}

/// Incremental row span over the rationals.
///
/// Rows are kept in reduced form (leading coefficient 1, pivot columns
/// back-eliminated), so membership tests and dimension queries are O(rows)
/// reductions. Useful for closure loops where vectors arrive one at a time
/// and most are already dependent.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: Vec<Vec<Rational>>,
    pivots: Vec<usize>,
}

impl Echelon {
    pub fn new() -> Self {
        Echelon::default()
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, mut v: Vec<Rational>) -> Vec<Rational> {
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if !v[p].is_zero() {
                let c = v[p].clone();
                for (x, y) in v.iter_mut().zip(row) {
                    if !y.is_zero() {
                        *x -= &c * y;
                    }
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        self.reduce(v.to_vec()).iter().all(Rational::is_zero)
    }

    /// Insert a vector; returns true if it enlarged the span.
    pub fn insert(&mut self, v: Vec<Rational>) -> bool {
        let mut v = self.reduce(v);
        let Some(p) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let lead = v[p].clone();
        for x in v.iter_mut() {
            if !x.is_zero() {
                *x /= &lead;
            }
        }
        // back-eliminate the new pivot from existing rows
        for row in self.rows.iter_mut() {
            if !row[p].is_zero() {
                let c = row[p].clone();
                for (x, y) in row.iter_mut().zip(&v) {
                    if !y.is_zero() {
                        *x -= &c * y;
                    }
                }
            }
        }
        self.rows.push(v);
        self.pivots.push(p);
        true
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }
}

/// Dimension of the span of the given vectors.
pub fn span_dim<I, V>(vectors: I) -> usize
where
    I: IntoIterator<Item = V>,
    V: Into<Vec<Rational>>,
{
    let mut e = Echelon::new();
    for v in vectors {
        e.insert(v.into());
    }
    e.dim()
}

/// Fraction-free row echelon form with partial pivoting.
///
/// Returns the echelon matrix and the pivot columns in order. The division
/// in the update rule is exact by Sylvester's determinant identity; debug
/// builds assert it.
fn bareiss(mut m: Vec<Vec<BigInt>>) -> (Vec<Vec<BigInt>>, Vec<usize>) {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivot_cols = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        // smallest-magnitude nonzero pivot keeps the minors modest
        let pivot_row = (r..rows)
            .filter(|&i| !m[i][c].is_zero())
            .min_by_key(|&i| m[i][c].magnitude().clone());
        let Some(p) = pivot_row else {
            continue;
        };
        m.swap(r, p);
        for i in (r + 1)..rows {
            for j in (c + 1)..cols {
                let num = &m[r][c] * &m[i][j] - &m[i][c] * &m[r][j];
                let (quot, rem) = num.div_rem(&prev);
                debug_assert!(rem.is_zero(), "Bareiss division must be exact");
                m[i][j] = quot;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        pivot_cols.push(c);
        r += 1;
    }
    (m, pivot_cols)
}
