//! Dense exact 8x8 matrices, the ambient arithmetic for everything built
//! from the Clifford system.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, ToPrimitive, Zero};

use crate::exact::poly::{q_var, xi_var};
use crate::exact::{Poly, Rational};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Mat8 {
    e: [[Rational; 8]; 8],
}

impl Mat8 {
    pub fn zeros() -> Self {
        Mat8 {
            e: std::array::from_fn(|_| std::array::from_fn(|_| Rational::zero())),
        }
    }

    pub fn identity() -> Self {
        let mut m = Mat8::zeros();
        for i in 0..8 {
            m.e[i][i] = Rational::one();
        }
        m
    }

    pub fn from_i64(rows: [[i64; 8]; 8]) -> Self {
        Mat8 {
            e: std::array::from_fn(|r| {
                std::array::from_fn(|c| Rational::from_integer(rows[r][c].into()))
            }),
        }
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        Mat8 {
            e: std::array::from_fn(|r| std::array::from_fn(|c| f(r, c))),
        }
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.e[r][c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        self.e[r][c] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.e.iter().flatten().all(Rational::is_zero)
    }

    pub fn is_skew(&self) -> bool {
        (0..8).all(|r| (r..8).all(|c| self.e[r][c] == -self.e[c][r].clone()))
    }

    pub fn is_symmetric(&self) -> bool {
        (0..8).all(|r| (r..8).all(|c| self.e[r][c] == self.e[c][r]))
    }

    pub fn transpose(&self) -> Self {
        Mat8::from_fn(|r, c| self.e[c][r].clone())
    }

    pub fn trace(&self) -> Rational {
        (0..8).map(|i| self.e[i][i].clone()).sum()
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Mat8::from_fn(|r, c| &self.e[r][c] * s)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    /// Frobenius pairing B(X, Y) = Tr(X^T Y), computed without forming the
    /// product.
    pub fn frobenius_pairing(&self, other: &Self) -> Rational {
        let mut acc = Rational::zero();
        for r in 0..8 {
            for c in 0..8 {
                if !self.e[r][c].is_zero() && !other.e[r][c].is_zero() {
                    acc += &self.e[r][c] * &other.e[r][c];
                }
            }
        }
        acc
    }

    pub fn apply(&self, v: &[Rational; 8]) -> [Rational; 8] {
        std::array::from_fn(|r| {
            let mut acc = Rational::zero();
            for c in 0..8 {
                if !self.e[r][c].is_zero() && !v[c].is_zero() {
                    acc += &self.e[r][c] * &v[c];
                }
            }
            acc
        })
    }

    /// Row-major 64-vector, for span computations in so(8).
    pub fn flatten(&self) -> Vec<Rational> {
        self.e.iter().flatten().cloned().collect()
    }

    /// Integer grid for export; panics if an entry is not an integer.
    pub fn to_i64_grid(&self) -> Vec<Vec<i64>> {
        self.e
            .iter()
            .map(|row| {
                row.iter()
                    .map(|x| {
                        assert!(x.is_integer(), "non-integer entry in integer export");
                        x.numer().to_i64().expect("entry does not fit in i64")
                    })
                    .collect()
            })
            .collect()
    }

    pub fn to_f64_grid(&self) -> [[f64; 8]; 8] {
        std::array::from_fn(|r| {
            std::array::from_fn(|c| self.e[r][c].to_f64().expect("entry does not fit in f64"))
        })
    }

    /// The momentum pairing polynomial <Aq, xi> in the 16 phase variables.
    pub fn pairing_poly(&self) -> Poly {
        let mut p = Poly::zero();
        for l in 0..8 {
            for k in 0..8 {
                if !self.e[l][k].is_zero() {
                    let m = crate::exact::Monomial::var(q_var(k + 1))
                        .mul(&crate::exact::Monomial::var(xi_var(l + 1)));
                    p.add_term(m, self.e[l][k].clone());
                }
            }
        }
        p
    }

    /// Coordinate l of Aq as a polynomial in q.
    pub fn row_poly_q(&self, l: usize) -> Poly {
        let mut p = Poly::zero();
        for k in 0..8 {
            if !self.e[l][k].is_zero() {
                p.add_term(
                    crate::exact::Monomial::var(q_var(k + 1)),
                    self.e[l][k].clone(),
                );
            }
        }
        p
    }
}

impl Add for &Mat8 {
    type Output = Mat8;
    fn add(self, rhs: &Mat8) -> Mat8 {
        Mat8::from_fn(|r, c| &self.e[r][c] + &rhs.e[r][c])
    }
}

impl Sub for &Mat8 {
    type Output = Mat8;
    fn sub(self, rhs: &Mat8) -> Mat8 {
        Mat8::from_fn(|r, c| &self.e[r][c] - &rhs.e[r][c])
    }
}

impl Mul for &Mat8 {
    type Output = Mat8;
    fn mul(self, rhs: &Mat8) -> Mat8 {
        Mat8::from_fn(|r, c| {
            let mut acc = Rational::zero();
            for k in 0..8 {
                if !self.e[r][k].is_zero() && !rhs.e[k][c].is_zero() {
                    acc += &self.e[r][k] * &rhs.e[k][c];
                }
            }
            acc
        })
    }
}

impl Neg for &Mat8 {
    type Output = Mat8;
    fn neg(self) -> Mat8 {
        Mat8::from_fn(|r, c| -self.e[r][c].clone())
    }
}

impl fmt::Display for Mat8 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..8 {
            write!(f, "[")?;
            for c in 0..8 {
                if c > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.e[r][c])?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}
