//! Seeded sampling of exact rational points on the sphere and the
//! constraint variety of T*S^7.
//!
//! Sphere points come from inverse stereographic projection of small
//! rational 7-vectors, so |q|^2 = 1 holds exactly, without radicals.
//! Covectors are projected as xi = v - <v,q> q, which makes <q, xi> = 0
//! exact as well. All randomness flows from one u64 seed through ChaCha20,
//! so every run with the same seed sees the same points.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::exact::poly::{q_var, xi_var};
use crate::exact::{rat, Rational, NVARS};

/// Mix a task label into a base seed (FNV-1a), so concurrent suites draw
/// independent, reproducible streams.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x100000001b3);
    }
    h ^ seed
}

pub struct Sampler {
    rng: ChaCha20Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    pub fn for_task(seed: u64, label: &str) -> Self {
        Sampler::new(derive_seed(seed, label))
    }

    /// Small rational, numerator in [-9, 9], denominator in [1, 4].
    pub fn ratio(&mut self) -> Rational {
        let n = self.rng.gen_range(-9i64..=9);
        let d = self.rng.gen_range(1i64..=4);
        rat(n, d)
    }

    /// Exact unit vector in Q^8: inverse stereographic projection of a
    /// random rational 7-vector u, q = ((s-1)/(s+1), 2u/(s+1)), s = |u|^2.
    pub fn sphere_point(&mut self) -> [Rational; 8] {
        let u: [Rational; 7] = std::array::from_fn(|_| self.ratio());
        let s: Rational = u.iter().map(|x| x * x).sum();
        let denom = &s + rat(1, 1);
        let mut q: [Rational; 8] = std::array::from_fn(|_| Rational::zero());
        q[0] = (&s - rat(1, 1)) / &denom;
        for k in 0..7 {
            q[k + 1] = rat(2, 1) * &u[k] / &denom;
        }
        debug_assert!(q.iter().map(|x| x * x).sum::<Rational>() == rat(1, 1));
        q
    }

    /// Plain random rational 8-vector (not normalized).
    pub fn vector8(&mut self) -> [Rational; 8] {
        std::array::from_fn(|_| self.ratio())
    }

    /// Nonzero covector with <q, xi> = 0 exactly: project a random vector
    /// onto the tangent hyperplane and retry in the measure-zero case.
    pub fn constrained_covector(&mut self, q: &[Rational; 8]) -> [Rational; 8] {
        loop {
            let v = self.vector8();
            let vq: Rational = v.iter().zip(q.iter()).map(|(a, b)| a * b).sum();
            let xi: [Rational; 8] = std::array::from_fn(|k| &v[k] - &(&vq * &q[k]));
            if xi.iter().any(|x| !x.is_zero()) {
                return xi;
            }
        }
    }

    /// Point of the constraint variety: |q|^2 = 1, <q, xi> = 0, xi != 0.
    pub fn phase_point(&mut self) -> ([Rational; 8], [Rational; 8]) {
        let q = self.sphere_point();
        let xi = self.constrained_covector(&q);
        (q, xi)
    }
}

/// Pack (q, xi) into the 16-variable layout used by `Poly` evaluation.
pub fn phase_array(q: &[Rational; 8], xi: &[Rational; 8]) -> [Rational; NVARS] {
    std::array::from_fn(|v| {
        if v < 8 {
            q[v].clone()
        } else {
            xi[v - 8].clone()
        }
    })
}

/// Floating mirror of a phase point.
pub fn phase_array_f64(q: &[f64; 8], xi: &[f64; 8]) -> [f64; NVARS] {
    std::array::from_fn(|v| if v < 8 { q[v] } else { xi[v - 8] })
}

/// Sanity accessors used in tests: the layout must agree with the Poly
/// variable indexing.
pub fn phase_coord_q(i: usize) -> usize {
    q_var(i)
}
pub fn phase_coord_xi(i: usize) -> usize {
    xi_var(i)
}
