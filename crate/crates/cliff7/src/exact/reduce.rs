//! Multivariate polynomial division in the fixed graded-lexicographic order.
//!
//! Sequential division proves ideal membership only when the remainder is
//! zero; the divisor lists used in this crate are not Groebner bases, so a
//! nonzero remainder for several divisors means "inconclusive", never
//! "false". Callers fall back to exact evaluation on the constraint variety
//! in that case.

use super::poly::{Monomial, Poly};
use super::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub quotients: Vec<Poly>,
    /// No remainder monomial is divisible by any divisor leading monomial.
    pub remainder: Poly,
}

impl Reduction {
    /// Reassemble sum(quotient_i * divisor_i) + remainder.
    pub fn reassemble(&self, divisors: &[Poly]) -> Poly {
        let mut acc = self.remainder.clone();
        for (qt, d) in self.quotients.iter().zip(divisors) {
            acc = &acc + &(qt * d);
        }
        acc
    }
}

/// Divide `p` by the divisor list in order, always reducing the current
/// leading term. Deterministic: one monomial order, fixed divisor order.
pub fn reduce_modulo(p: &Poly, divisors: &[Poly]) -> Reduction {
    assert!(!divisors.is_empty(), "divisor list must be nonempty");
    for d in divisors {
        assert!(!d.is_zero(), "zero divisor");
    }
    let leads: Vec<(Monomial, Rational)> = divisors
        .iter()
        .map(|d| {
            let (m, c) = d.leading_term().expect("nonzero divisor");
            (*m, c.clone())
        })
        .collect();

    let mut work = p.clone();
    let mut quotients = vec![Poly::zero(); divisors.len()];
    let mut remainder = Poly::zero();

    // Each pass strictly lowers the leading monomial of `work` in the
    // well-ordered grlex order, so this terminates.
    while let Some((wm, wc)) = work.leading_term() {
        let wm = *wm;
        let wc = wc.clone();
        let mut divided = false;
        for (i, (lm, lc)) in leads.iter().enumerate() {
            if let Some(qm) = lm.div_into(&wm) {
                let qc = &wc / lc;
                let t = Poly::from_terms([(qm, qc)]);
                work = &work - &(&t * &divisors[i]);
                quotients[i] = &quotients[i] + &t;
                divided = true;
                break;
            }
        }
        if !divided {
            remainder.add_term(wm, wc.clone());
            let t = Poly::from_terms([(wm, wc)]);
            work = &work - &t;
        }
    }

    Reduction {
        quotients,
        remainder,
    }
}
