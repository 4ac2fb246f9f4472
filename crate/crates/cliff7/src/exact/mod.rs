//! Exact rational arithmetic, sparse multivariate polynomials over the 16
//! phase-space variables (q1..q8, xi1..xi8), and exact dense linear algebra
//! (rank, nullspace). Everything here is a pure function on immutable data;
//! floating point appears only through the one-way `to_f64` mirrors.

pub mod matrix;
pub mod poly;
pub mod reduce;

pub use matrix::{span_dim, Echelon, RatMatrix};
pub use poly::{q_var, var_name, xi_var, CompiledPoly, Monomial, Poly, PowTable, NVARS};
pub use reduce::{reduce_modulo, Reduction};

/// Arbitrary-precision rational scalar. Always in lowest terms with a
/// positive denominator; arithmetic never rounds.
pub type Rational = num_rational::BigRational;

use num_traits::ToPrimitive;

/// `n/d` as an exact rational. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// `n` as an exact rational.
pub fn rint(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// One-way mirror into binary64. Verification paths never convert back.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().expect("rational does not fit in f64")
}

/// Parse a command-line rational: either "p/q" or a plain integer "p".
pub fn parse_ratio(s: &str) -> Result<Rational, String> {
    use num_traits::Zero;
    let t = s.trim();
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n, d),
        None => (t, "1"),
    };
    let n: num_bigint::BigInt = n
        .trim()
        .parse()
        .map_err(|e| format!("invalid rational {s:?}: {e}"))?;
    let d: num_bigint::BigInt = d
        .trim()
        .parse()
        .map_err(|e| format!("invalid rational {s:?}: {e}"))?;
    if d.is_zero() {
        return Err(format!("invalid rational {s:?}: zero denominator"));
    }
    Ok(Rational::new(n, d))
}
