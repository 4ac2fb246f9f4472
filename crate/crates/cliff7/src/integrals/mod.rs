//! Momentum map, chain first integrals, the canonical Poisson bracket,
//! and the exact involution / independence / decomposition proofs.
//!
//! Everything here is a statement about polynomials. The momentum map
//! P(q, xi) = q ^ xi = (xi q^T - q xi^T)/2 is a Poisson map for the whole
//! cotangent space, so the pairwise involution of the chain integrals is
//! an identity on R^16, not just on the constraint variety; only the
//! statements involving an SR Hamiltonian need the variety.

use num_traits::Zero;

use crate::clifford::{CliffordSystem, Mat8};
use crate::exact::{rat, Poly, RatMatrix, Rational};
use crate::liealg::{expand_in_basis, BasisElem, ChainKind, SubalgebraChain};
use crate::sample::{phase_array, Sampler};
use crate::srgeom::{build_hamiltonian, half_sum_of_squared_pairings, SRHamiltonian, StructureKind};
use crate::variety::{vanishes_on_variety, VarietyOutcome};

/// The momentum map of the SO(8) action on T*S^7, (q, xi) -> q ^ xi.
pub struct MomentumMap<'a> {
    cs: &'a CliffordSystem,
}

impl<'a> MomentumMap<'a> {
    pub fn new(cs: &'a CliffordSystem) -> Self {
        MomentumMap { cs }
    }

    /// q ^ xi at a rational phase point.
    pub fn matrix_at(&self, q: &[Rational; 8], xi: &[Rational; 8]) -> Mat8 {
        let half = rat(1, 2);
        Mat8::from_fn(|r, c| (&xi[r] * &q[c] - &q[r] * &xi[c]) * &half)
    }

    /// Coordinates of q ^ xi over the canonical 28-element basis.
    pub fn coords_at(&self, q: &[Rational; 8], xi: &[Rational; 8]) -> [Rational; 28] {
        expand_in_basis(self.cs, &self.matrix_at(q, xi))
    }

    /// Entry (r, c) of q ^ xi as a polynomial.
    pub fn entry_poly(r: usize, c: usize) -> Poly {
        let pos = (&Poly::xi(r + 1) * &Poly::q(c + 1)).scale(&rat(1, 2));
        let neg = (&Poly::q(r + 1) * &Poly::xi(c + 1)).scale(&rat(1, 2));
        &pos - &neg
    }

    /// B(eta, q ^ xi) - <eta q, xi> as a polynomial; the equivariance seed
    /// identity says this is zero for every skew eta.
    pub fn pairing_identity_residual(&self, eta: &Mat8) -> Poly {
        let mut b = Poly::zero();
        for r in 0..8 {
            for c in 0..8 {
                let coeff = eta.get(r, c);
                if !coeff.is_zero() {
                    b = &b + &Self::entry_poly(r, c).scale(coeff);
                }
            }
        }
        &b - &eta.pairing_poly()
    }
}

/// The seven Thimm integrals of a chain, I_l = half the sum of squared
/// pairings over the level-l generators, plus (for the G chain) the
/// shorter alternative set.
pub struct FirstIntegralSet {
    kind: ChainKind,
    integrals: [Poly; 7],
    member_indices: [Vec<usize>; 7],
    alt: Option<[Poly; 7]>,
}

impl FirstIntegralSet {
    pub fn kind(&self) -> ChainKind {
        self.kind
    }

    /// I_l, 1-based level.
    pub fn integral(&self, level: usize) -> &Poly {
        &self.integrals[level - 1]
    }

    pub fn integrals(&self) -> &[Poly; 7] {
        &self.integrals
    }

    /// F_l of the alternative set, present for the G chain only.
    pub fn alt_integrals(&self) -> Option<&[Poly; 7]> {
        self.alt.as_ref()
    }

    /// Generator positions (in the 28-basis) per level; rows of the
    /// independence matrix are the momentum coordinates masked to these.
    pub fn member_indices(&self, level: usize) -> &[usize] {
        &self.member_indices[level - 1]
    }
}

pub fn build_integrals(chain: &SubalgebraChain, cs: &CliffordSystem) -> FirstIntegralSet {
    let integrals: [Poly; 7] = std::array::from_fn(|k| {
        let mats: Vec<&Mat8> = chain
            .member(k + 1)
            .matrices()
            .iter()
            .map(|s| s.mat())
            .collect();
        half_sum_of_squared_pairings(&mats)
    });
    let member_indices: [Vec<usize>; 7] =
        std::array::from_fn(|k| chain.member(k + 1).index_set());
    let alt = (chain.kind() == ChainKind::G).then(|| build_alt_integrals(cs));
    FirstIntegralSet {
        kind: chain.kind(),
        integrals,
        member_indices,
        alt,
    }
}

/// The shorter G-chain set: F_l = sum_{i<=l} <A_i A_{l+1} q, xi>^2 for
/// l = 1..4, then F_5 = <A_6 A_7 q, xi> (linear), F_6 the two-term sum for
/// the last single generators, F_7 the rank-5 Hamiltonian.
fn build_alt_integrals(cs: &CliffordSystem) -> [Poly; 7] {
    let square = |m: &Mat8| {
        let p = m.pairing_poly();
        &p * &p
    };
    let mut out: Vec<Poly> = Vec::with_capacity(7);
    for l in 1..=4 {
        let mut f = Poly::zero();
        for i in 1..=l {
            f = &f + &square(cs.product(i, l + 1));
        }
        out.push(f);
    }
    out.push(cs.product(6, 7).pairing_poly());
    out.push(&square(cs.a(6)) + &square(cs.a(7)));
    out.push(build_hamiltonian(StructureKind::T5, cs).into_poly());
    out.try_into().expect("seven alt integrals")
}

/// Canonical Poisson bracket sum_i (df/dq_i dg/dxi_i - df/dxi_i dg/dq_i).
/// The sign convention makes {F_eta, F_eta'} = F_[eta, eta'].
pub fn poisson_bracket(f: &Poly, g: &Poly) -> Poly {
    let mut acc = Poly::zero();
    for i in 1..=8 {
        let fq = f.partial_derivative(crate::exact::q_var(i));
        let gxi = g.partial_derivative(crate::exact::xi_var(i));
        if !fq.is_zero() && !gxi.is_zero() {
            acc = &acc + &(&fq * &gxi);
        }
        let fxi = f.partial_derivative(crate::exact::xi_var(i));
        let gq = g.partial_derivative(crate::exact::q_var(i));
        if !fxi.is_zero() && !gq.is_zero() {
            acc = &acc - &(&fxi * &gq);
        }
    }
    acc
}

/// Outcome of one {f, g} = 0 claim.
#[derive(Clone, Debug)]
pub enum BracketOutcome {
    /// The bracket is the zero polynomial on all of R^16.
    ZeroPoly,
    /// Zero on the constraint variety (reduction or point certification).
    OnVariety(VarietyOutcome),
}

impl BracketOutcome {
    pub fn holds(&self) -> bool {
        match self {
            BracketOutcome::ZeroPoly => true,
            BracketOutcome::OnVariety(v) => v.is_zero_on_variety(),
        }
    }
}

/// Report of the involution checks for one chain and one Hamiltonian:
/// the 21 pairwise brackets (global zero expected) and the 7 brackets with
/// the Hamiltonian (zero on the variety expected).
pub struct InvolutionReport {
    pub kind: ChainKind,
    pub hamiltonian: StructureKind,
    /// (a, b, outcome) for 1 <= a < b <= 7.
    pub pair_outcomes: Vec<(usize, usize, BracketOutcome)>,
    /// (l, outcome) for {H, I_l}.
    pub hamiltonian_outcomes: Vec<(usize, BracketOutcome)>,
    /// Human-readable witness for each failed check.
    pub witnesses: Vec<String>,
}

impl InvolutionReport {
    pub fn all_passed(&self) -> bool {
        self.pair_outcomes.iter().all(|(_, _, o)| o.holds())
            && self.hamiltonian_outcomes.iter().all(|(_, o)| o.holds())
    }
}

/// Find a rational phase point where `p` is nonzero, for failure messages.
fn nonzero_witness(p: &Poly, sampler: &mut Sampler) -> String {
    for _ in 0..200 {
        let (q, xi) = sampler.phase_point();
        let v = p.eval_rational(&phase_array(&q, &xi));
        if !v.is_zero() {
            return format!("value {v} at q={q:?}, xi={xi:?}");
        }
    }
    "nonzero polynomial (no rational witness found in 200 draws)".to_string()
}

pub fn verify_involution(
    set: &FirstIntegralSet,
    h: &SRHamiltonian,
    sampler: &mut Sampler,
) -> InvolutionReport {
    let mut pair_outcomes = Vec::with_capacity(21);
    let mut witnesses = Vec::new();
    for a in 1..=7 {
        for b in (a + 1)..=7 {
            let br = poisson_bracket(set.integral(a), set.integral(b));
            if br.is_zero() {
                pair_outcomes.push((a, b, BracketOutcome::ZeroPoly));
            } else {
                witnesses.push(format!(
                    "{{I{a}, I{b}}} ({} chain) is not the zero polynomial: {}",
                    set.kind().letter(),
                    nonzero_witness(&br, sampler)
                ));
                pair_outcomes.push((
                    a,
                    b,
                    BracketOutcome::OnVariety(vanishes_on_variety(&br, sampler)),
                ));
            }
        }
    }
    let mut hamiltonian_outcomes = Vec::with_capacity(7);
    for l in 1..=7 {
        let br = poisson_bracket(h.poly(), set.integral(l));
        let outcome = if br.is_zero() {
            BracketOutcome::ZeroPoly
        } else {
            let v = vanishes_on_variety(&br, sampler);
            if let VarietyOutcome::Nonzero { point, value } = &v {
                witnesses.push(format!(
                    "{{H_{}, I{l}}} ({} chain) nonzero on the variety: value {} at {:?}",
                    h.kind(),
                    set.kind().letter(),
                    value,
                    point
                ));
            }
            BracketOutcome::OnVariety(v)
        };
        hamiltonian_outcomes.push((l, outcome));
    }
    InvolutionReport {
        kind: set.kind(),
        hamiltonian: h.kind(),
        pair_outcomes,
        hamiltonian_outcomes,
        witnesses,
    }
}

/// One Hamiltonian decomposition identity H = I7/4 - I6 + I_level.
///
/// For the three trivializable Hamiltonians the residual turns out to be
/// the zero polynomial on all of R^16 (a consequence of the exact frame
/// identity), so the variety is not even needed. The quaternionic case
/// keeps the inhomogeneous round term and holds only on the variety; for
/// it the off-variety control confirms the constraints do real work.
pub struct DecompositionCheck {
    pub hamiltonian: StructureKind,
    pub chain: ChainKind,
    /// Level of the third term: H = I7/4 - I6 + I_level.
    pub level: usize,
    /// Residual is identically zero as a polynomial.
    pub global_identity: bool,
    pub on_variety: VarietyOutcome,
    /// For a non-global identity: the residual was nonzero at a scaled
    /// (off-sphere) point, i.e. the identity genuinely uses |q|^2 = 1.
    pub off_variety_nonzero: bool,
}

impl DecompositionCheck {
    pub fn passed(&self) -> bool {
        if self.global_identity {
            true
        } else {
            self.on_variety.is_zero_on_variety() && self.off_variety_nonzero
        }
    }
}

fn decomposition_residual(h: &SRHamiltonian, set: &FirstIntegralSet, level: usize) -> Poly {
    let combo = &(&set.integral(7).scale(&rat(1, 4)) - set.integral(6)) + set.integral(level);
    h.poly() - &combo
}

/// The four decomposition identities: T5 and QH over the G chain
/// (levels 5 and 4), T4 over the H chain, T6H over the K chain.
pub fn verify_decompositions(
    cs: &CliffordSystem,
    g_set: &FirstIntegralSet,
    h_set: &FirstIntegralSet,
    k_set: &FirstIntegralSet,
    sampler: &mut Sampler,
) -> Vec<DecompositionCheck> {
    assert_eq!(g_set.kind(), ChainKind::G);
    assert_eq!(h_set.kind(), ChainKind::H);
    assert_eq!(k_set.kind(), ChainKind::K);
    let cases: [(StructureKind, &FirstIntegralSet, ChainKind, usize); 4] = [
        (StructureKind::T5, g_set, ChainKind::G, 5),
        (StructureKind::QH, g_set, ChainKind::G, 4),
        (StructureKind::T4, h_set, ChainKind::H, 5),
        (StructureKind::T6H, k_set, ChainKind::K, 5),
    ];
    cases
        .into_iter()
        .map(|(kind, set, chain, level)| {
            let h = build_hamiltonian(kind, cs);
            let residual = decomposition_residual(&h, set, level);
            let global_identity = residual.is_zero();
            let on_variety = vanishes_on_variety(&residual, sampler);
            // scaled sphere points: off the variety but still <q, xi> = 0
            let off_variety_nonzero = !global_identity
                && (0..10).any(|_| {
                    let (q, xi) = sampler.phase_point();
                    let q2: [Rational; 8] = std::array::from_fn(|i| &q[i] * rat(2, 1));
                    !residual.eval_rational(&phase_array(&q2, &xi)).is_zero()
                });
            DecompositionCheck {
                hamiltonian: kind,
                chain,
                level,
                global_identity,
                on_variety,
                off_variety_nonzero,
            }
        })
        .collect()
}

/// Result of the functional independence check: the 7 x 28 matrix whose
/// rows are the projections of q ^ xi onto the chain members has exact
/// rank 7 at a generic phase point.
pub struct IndependenceReport {
    pub kind: ChainKind,
    pub trials_used: usize,
    pub rank: usize,
    /// False when every trial point was degenerate (rank < 7 everywhere
    /// sampled proves nothing; a generic point settles it).
    pub conclusive: bool,
}

impl IndependenceReport {
    pub fn independent(&self) -> bool {
        self.conclusive && self.rank == 7
    }
}

pub fn verify_independence(
    set: &FirstIntegralSet,
    cs: &CliffordSystem,
    trials: usize,
    sampler: &mut Sampler,
) -> IndependenceReport {
    assert!(trials >= 1, "at least one trial");
    let mm = MomentumMap::new(cs);
    let mut best_rank = 0;
    for t in 1..=trials {
        let (q, xi) = sampler.phase_point();
        let coords = mm.coords_at(&q, &xi);
        let rows: Vec<Vec<Rational>> = (1..=7)
            .map(|l| {
                let mut row = vec![Rational::zero(); 28];
                for &idx in set.member_indices(l) {
                    row[idx] = coords[idx].clone();
                }
                row
            })
            .collect();
        let rank = RatMatrix::from_rows(rows).rank();
        best_rank = best_rank.max(rank);
        if rank == 7 {
            return IndependenceReport {
                kind: set.kind(),
                trials_used: t,
                rank,
                conclusive: true,
            };
        }
    }
    IndependenceReport {
        kind: set.kind(),
        trials_used: trials,
        rank: best_rank,
        conclusive: false,
    }
}

/// F_eta = <eta q, xi> for a basis element, used by tests and the
/// isometry module.
pub fn linear_integral(cs: &CliffordSystem, e: BasisElem) -> Poly {
    e.matrix(cs).pairing_poly()
}
