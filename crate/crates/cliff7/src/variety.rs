//! Certifying that a polynomial vanishes on the constraint variety
//! { |q|^2 = 1, <q, xi> = 0 } of T*S^7.
//!
//! Strategy: attempt multivariate division by the two constraint
//! polynomials. A zero remainder is a proof. The divisor pair is not a
//! Groebner basis, so a nonzero remainder is inconclusive; in that case
//! the identity is certified by exact evaluation at seeded rational points
//! of the variety, where a single nonzero value is a disproof.

use num_traits::Zero;

use crate::exact::{reduce_modulo, Poly, Rational};
use crate::sample::{phase_array, Sampler};

/// How many constrained rational points the fallback certification uses.
pub const FALLBACK_POINTS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VarietyOutcome {
    /// Remainder after division by the constraint ideal generators is zero.
    ProvedByReduction,
    /// Division was inconclusive; the value was exactly zero at this many
    /// seeded rational points of the variety.
    ZeroAtPoints(usize),
    /// Exact counterexample: a variety point where the value is nonzero.
    Nonzero {
        point: Box<([Rational; 8], [Rational; 8])>,
        value: Rational,
    },
}

impl VarietyOutcome {
    pub fn is_zero_on_variety(&self) -> bool {
        !matches!(self, VarietyOutcome::Nonzero { .. })
    }
}

/// The two generators of the constraint ideal, in the divisor order used
/// throughout: <q, xi> first, then |q|^2 - 1.
pub fn constraint_ideal() -> [Poly; 2] {
    [Poly::q_dot_xi(), &Poly::norm_sq_q() - &Poly::one()]
}

/// Decide whether `p` vanishes identically on the constraint variety.
pub fn vanishes_on_variety(p: &Poly, sampler: &mut Sampler) -> VarietyOutcome {
    vanishes_on_variety_at(p, sampler, FALLBACK_POINTS)
}

pub fn vanishes_on_variety_at(p: &Poly, sampler: &mut Sampler, points: usize) -> VarietyOutcome {
    if p.is_zero() {
        return VarietyOutcome::ProvedByReduction;
    }
    let divisors = constraint_ideal();
    let red = reduce_modulo(p, &divisors);
    if red.remainder.is_zero() {
        return VarietyOutcome::ProvedByReduction;
    }
    // Evaluate the remainder, not p: they agree on the variety and the
    // remainder is usually much smaller.
    for _ in 0..points {
        let (q, xi) = sampler.phase_point();
        let val = red.remainder.eval_rational(&phase_array(&q, &xi));
        if !val.is_zero() {
            return VarietyOutcome::Nonzero {
                point: Box::new((q, xi)),
                value: val,
            };
        }
    }
    VarietyOutcome::ZeroAtPoints(points)
}
