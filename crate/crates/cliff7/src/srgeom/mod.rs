//! The four subriemannian structures on S^7: distributions, SR
//! Hamiltonians as exact polynomials, and the rank checks behind the
//! bracket-generating and fatness claims.
//!
//! The three trivializable structures use the first j Clifford fields
//! A_1 q, ..., A_j q (j = 4, 5, 6) as a global orthonormal frame of the
//! distribution. The quaternionic Hopf structure is framed the other way
//! around: its Hamiltonian subtracts the three vertical directions A_6 q,
//! A_7 q, Kq (K = A_6 A_7) from the round metric one.

use num_traits::{One, Zero};

use crate::clifford::{CliffordSystem, Mat8};
use crate::exact::{rat, span_dim, Echelon, Poly, Rational};
use crate::liealg::{BasisBrackets, BasisElem};
use crate::sample::Sampler;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StructureKind {
    /// Trivializable, rank 4: frame A_1 q .. A_4 q.
    T4,
    /// Trivializable, rank 5: frame A_1 q .. A_5 q.
    T5,
    /// Trivializable, rank 6: frame A_1 q .. A_6 q. This is the contact
    /// structure of the Hopf fibration S^7 -> CP^3; one tag, one object.
    T6H,
    /// Quaternionic Hopf, rank 4: horizontal space of S^7 -> HP^1 = S^4.
    QH,
}

impl StructureKind {
    pub const ALL: [StructureKind; 4] = [
        StructureKind::T4,
        StructureKind::T5,
        StructureKind::T6H,
        StructureKind::QH,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            StructureKind::T4 => "t4",
            StructureKind::T5 => "t5",
            StructureKind::T6H => "t6h",
            StructureKind::QH => "qh",
        }
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "t4" => Ok(StructureKind::T4),
            "t5" => Ok(StructureKind::T5),
            "t6h" | "hopf" => Ok(StructureKind::T6H),
            "qh" => Ok(StructureKind::QH),
            other => Err(format!(
                "unknown structure '{other}' (expected t4, t5, t6h, or qh)"
            )),
        }
    }

    /// Rank of the distribution.
    pub fn rank(self) -> usize {
        match self {
            StructureKind::T4 | StructureKind::QH => 4,
            StructureKind::T5 => 5,
            StructureKind::T6H => 6,
        }
    }

    /// Frame size j for the trivializable kinds; QH has no A-frame.
    pub fn frame_size(self) -> Option<usize> {
        match self {
            StructureKind::T4 => Some(4),
            StructureKind::T5 => Some(5),
            StructureKind::T6H => Some(6),
            StructureKind::QH => None,
        }
    }
}

impl std::fmt::Display for StructureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// SR Hamiltonian on T*S^7 as an exact polynomial: degree 4 overall,
/// quadratic in q and quadratic in xi (plus, for QH, the purely
/// xi-quadratic round term).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SRHamiltonian {
    kind: StructureKind,
    poly: Poly,
}

impl SRHamiltonian {
    pub fn kind(&self) -> StructureKind {
        self.kind
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn into_poly(self) -> Poly {
        self.poly
    }
}

/// Half the sum of squared momentum pairings of the given matrices.
pub fn half_sum_of_squared_pairings(mats: &[&Mat8]) -> Poly {
    let mut acc = Poly::zero();
    for m in mats {
        let p = m.pairing_poly();
        acc = &acc + &(&p * &p);
    }
    acc.scale(&rat(1, 2))
}

pub fn build_hamiltonian(kind: StructureKind, cs: &CliffordSystem) -> SRHamiltonian {
    let poly = match kind.frame_size() {
        Some(j) => {
            let mats: Vec<&Mat8> = (1..=j).map(|i| cs.a(i)).collect();
            half_sum_of_squared_pairings(&mats)
        }
        None => {
            // round kinetic term minus the three vertical pairings
            let round = Poly::norm_sq_xi().scale(&rat(1, 2));
            let vertical =
                half_sum_of_squared_pairings(&[cs.a(6), cs.a(7), cs.product(6, 7)]);
            &round - &vertical
        }
    };
    SRHamiltonian { kind, poly }
}

/// Exit status of the exact bracket-generating test for the distribution
/// spanned by A_1 q .. A_j q.
#[derive(Clone, Debug)]
pub struct BracketGeneratingReport {
    pub j: usize,
    /// Dimension of the Lie algebra generated by {A_1..A_j} in so(8).
    pub closure_dim: usize,
    /// Per sample point: dim span { M q : M in the closure }.
    pub evaluation_dims: Vec<usize>,
    /// Per sample point: dim span ({A_i q} with i <= j, plus {A_i A_k q}
    /// with i < k <= j) — the step-two growth vector entry.
    pub step2_dims: Vec<usize>,
}

impl BracketGeneratingReport {
    /// Bracket generating at every sample: the evaluated closure spans the
    /// full tangent space T_q S^7 (dimension 7).
    pub fn generating(&self) -> bool {
        !self.evaluation_dims.is_empty() && self.evaluation_dims.iter().all(|&d| d == 7)
    }

    pub fn step_two_everywhere(&self) -> bool {
        !self.step2_dims.is_empty() && self.step2_dims.iter().all(|&d| d == 7)
    }
}

/// Lie closure of the span of the given 28-basis coordinate vectors,
/// by iterated exact brackets. Dimension is monotone and bounded by 28,
/// so the loop is capped at 28 rounds.
pub fn lie_closure(br: &BasisBrackets, seeds: &[Vec<Rational>]) -> Echelon {
    let mut span = Echelon::new();
    for s in seeds {
        span.insert(s.clone());
    }
    for _round in 0..28 {
        let rows: Vec<Vec<Rational>> = span.rows().to_vec();
        let mut grew = false;
        for (i, x) in rows.iter().enumerate() {
            for y in rows.iter().skip(i + 1) {
                let b = br.bracket_of(x, y);
                if b.iter().any(|c| !c.is_zero()) && span.insert(b) {
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }
    span
}

fn basis_seed(e: BasisElem) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); 28];
    v[e.index()] = Rational::one();
    v
}

pub fn bracket_generating_report(
    j: usize,
    cs: &CliffordSystem,
    samples: &[[Rational; 8]],
) -> BracketGeneratingReport {
    assert!((1..=7).contains(&j), "frame size must be 1..=7");
    for q in samples {
        let norm: Rational = q.iter().map(|x| x * x).sum();
        assert!(norm == Rational::one(), "sample point must satisfy |q|^2 = 1");
    }

    let br = BasisBrackets::new(cs);
    let seeds: Vec<Vec<Rational>> = (1..=j).map(|i| basis_seed(BasisElem::Single(i))).collect();
    let closure = lie_closure(&br, &seeds);

    let elems = BasisElem::all();
    let mut evaluation_dims = Vec::with_capacity(samples.len());
    let mut step2_dims = Vec::with_capacity(samples.len());
    for q in samples {
        // evaluate each basis element once, then combine per closure row
        let eq: Vec<[Rational; 8]> = elems.iter().map(|e| e.matrix(cs).apply(q)).collect();
        let evaluated = closure.rows().iter().map(|row| {
            let mut v = vec![Rational::zero(); 8];
            for (c, coeff) in row.iter().enumerate() {
                if !coeff.is_zero() {
                    for (vk, ek) in v.iter_mut().zip(&eq[c]) {
                        *vk += coeff * ek;
                    }
                }
            }
            v
        });
        evaluation_dims.push(span_dim(evaluated));

        let mut step2: Vec<Vec<Rational>> = Vec::new();
        for i in 1..=j {
            step2.push(cs.a(i).apply(q).to_vec());
        }
        for i in 1..=j {
            for k in (i + 1)..=j {
                step2.push(cs.product(i, k).apply(q).to_vec());
            }
        }
        step2_dims.push(span_dim(step2));
    }

    BracketGeneratingReport {
        j,
        closure_dim: closure.dim(),
        evaluation_dims,
        step2_dims,
    }
}

/// Result of the fatness (strong bracket generating) counterexample search
/// over the reversed-frame distributions span{A_{8-j} q .. A_7 q}.
///
/// The randomized part can only fail to find a counterexample, never prove
/// fatness; the definitive content is the pair of explicit rank-5
/// counterexamples at the north pole.
#[derive(Clone, Debug)]
pub struct FatReport {
    /// Trials of the j=6 case: random unit q, random nonzero Y in the
    /// distribution; rank of D_q + [Y, D]_q recorded each time.
    pub j6_trials: usize,
    pub j6_min_rank: usize,
    /// Rank of span{A_l q (l=3..7), A_5 A_r q (r=3,4,6,7)} at q = e_1.
    pub j5_north_rank: usize,
    /// Rank of span{A_l q (l=4..7), A_5 A_r q (r=4,6,7)} at q = e_1.
    pub j4_north_rank: usize,
}

impl FatReport {
    /// Every sampled (q, Y) reached the full rank 7 for j = 6.
    pub fn j6_no_counterexample(&self) -> bool {
        self.j6_min_rank == 7
    }

    /// The two explicit non-fat witnesses both pin rank 5 < 7.
    pub fn north_pole_counterexamples_confirmed(&self) -> bool {
        self.j5_north_rank == 5 && self.j4_north_rank == 5
    }

    pub fn summary(&self) -> String {
        format!(
            "j=6: no counterexample found in {} trials (min rank {}); \
             j=5 north pole rank {}; j=4 north pole rank {}",
            self.j6_trials, self.j6_min_rank, self.j5_north_rank, self.j4_north_rank
        )
    }
}

fn north_pole() -> [Rational; 8] {
    std::array::from_fn(|k| if k == 0 { Rational::one() } else { Rational::zero() })
}

pub fn fat_counterexample_check(
    cs: &CliffordSystem,
    sampler: &mut Sampler,
    j6_trials: usize,
) -> FatReport {
    // (a) j = 6, frame A_2 .. A_7: sample q and Y = sum alpha_l A_l q and
    // measure D_q + [Y, D]_q, where [X(C), X(A_l)] evaluates along C A_l q
    // directions modulo D_q.
    let mut j6_min_rank = usize::MAX;
    for _ in 0..j6_trials {
        let q = sampler.sphere_point();
        let alpha = loop {
            let a: [Rational; 6] = std::array::from_fn(|_| sampler.ratio());
            if a.iter().any(|x| !x.is_zero()) {
                break a;
            }
        };
        let mut c = Mat8::zeros();
        for (idx, al) in alpha.iter().enumerate() {
            c = &c + &cs.a(idx + 2).scale(al);
        }
        let mut vecs: Vec<Vec<Rational>> = Vec::with_capacity(12);
        for l in 2..=7 {
            vecs.push(cs.a(l).apply(&q).to_vec());
        }
        for l in 2..=7 {
            vecs.push(c.commutator(cs.a(l)).apply(&q).to_vec());
        }
        j6_min_rank = j6_min_rank.min(span_dim(vecs));
    }

    // (b) j = 5, frame A_3 .. A_7, Y = A_5 q at the north pole. The span
    // is insensitive to signs, so A_5 A_r and A_r A_5 are interchangeable.
    let np = north_pole();
    let mut j5: Vec<Vec<Rational>> = Vec::new();
    for l in 3..=7 {
        j5.push(cs.a(l).apply(&np).to_vec());
    }
    for r in [3usize, 4, 6, 7] {
        j5.push(cs.product(r.min(5), r.max(5)).apply(&np).to_vec());
    }
    let j5_north_rank = span_dim(j5);

    // (c) j = 4, frame A_4 .. A_7, Y = A_5 q at the north pole.
    let mut j4: Vec<Vec<Rational>> = Vec::new();
    for l in 4..=7 {
        j4.push(cs.a(l).apply(&np).to_vec());
    }
    for r in [4usize, 6, 7] {
        j4.push(cs.product(r.min(5), r.max(5)).apply(&np).to_vec());
    }
    let j4_north_rank = span_dim(j4);

    FatReport {
        j6_trials,
        j6_min_rank,
        j5_north_rank,
        j4_north_rank,
    }
}
