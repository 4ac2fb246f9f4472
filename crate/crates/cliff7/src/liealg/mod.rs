//! so(8) with the trace form B(X,Y) = Tr(X^T Y), the three Thimm chains of
//! subalgebras, orthogonal projections onto chain members, and exact
//! closure and non-degeneracy certification.
//!
//! The 28 Clifford basis elements {A_i} u {A_iA_j} are B-orthogonal with
//! B(E,E) = 8, so span membership, bracket closure, centers and derived
//! subalgebras all reduce to integer linear algebra on coefficient vectors
//! over that basis.

use num_traits::Zero;

use crate::clifford::{pair_index, CliffordSystem, Mat8};
use crate::exact::{rat, rint, RatMatrix, Rational};

/// Skew-symmetric 8x8 rational matrix; skewness is checked once here and
/// everything downstream relies on it.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SkewMat {
    m: Mat8,
}

impl SkewMat {
    pub fn new(m: Mat8) -> Self {
        assert!(m.is_skew(), "matrix is not skew-symmetric");
        SkewMat { m }
    }

    pub fn zero() -> Self {
        SkewMat { m: Mat8::zeros() }
    }

    pub fn mat(&self) -> &Mat8 {
        &self.m
    }

    pub fn is_zero(&self) -> bool {
        self.m.is_zero()
    }

    pub fn scale(&self, s: &Rational) -> SkewMat {
        SkewMat {
            m: self.m.scale(s),
        }
    }

    pub fn add(&self, other: &SkewMat) -> SkewMat {
        SkewMat {
            m: &self.m + &other.m,
        }
    }

    /// [X, Y] = XY - YX; skew again, no re-check needed.
    pub fn bracket(&self, other: &SkewMat) -> SkewMat {
        SkewMat {
            m: self.m.commutator(&other.m),
        }
    }

    pub fn pairing(&self, other: &SkewMat) -> Rational {
        self.m.frobenius_pairing(&other.m)
    }
}

/// Exact commutator of skew matrices.
pub fn bracket(x: &SkewMat, y: &SkewMat) -> SkewMat {
    x.bracket(y)
}

/// One of the 28 orthogonal basis elements of so(8) built from the
/// Clifford system: a generator A_i or a product A_iA_j with i < j.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum BasisElem {
    Single(usize),
    Pair(usize, usize),
}

impl BasisElem {
    /// Canonical enumeration: A1..A7 first, then A_iA_j lexicographically.
    pub fn all() -> Vec<BasisElem> {
        let mut v: Vec<BasisElem> = (1..=7).map(BasisElem::Single).collect();
        for i in 1..=7 {
            for j in (i + 1)..=7 {
                v.push(BasisElem::Pair(i, j));
            }
        }
        v
    }

    /// Position in the canonical enumeration (0..28).
    pub fn index(&self) -> usize {
        match *self {
            BasisElem::Single(i) => {
                assert!((1..=7).contains(&i));
                i - 1
            }
            BasisElem::Pair(i, j) => 7 + pair_index(i, j),
        }
    }

    pub fn name(&self) -> String {
        match *self {
            BasisElem::Single(i) => format!("A{i}"),
            BasisElem::Pair(i, j) => format!("A{i}A{j}"),
        }
    }

    pub fn matrix<'c>(&self, cs: &'c CliffordSystem) -> &'c Mat8 {
        match *self {
            BasisElem::Single(i) => cs.a(i),
            BasisElem::Pair(i, j) => cs.product(i, j),
        }
    }
}

/// Expand an so(8) element in the 28-element orthogonal basis:
/// X = sum_E B(X,E)/8 E. Panics if the residual is nonzero, which cannot
/// happen for skew input since the basis spans so(8).
pub fn expand_in_basis(cs: &CliffordSystem, x: &Mat8) -> [Rational; 28] {
    let eighth = rat(1, 8);
    let all = BasisElem::all();
    let coeffs: [Rational; 28] =
        std::array::from_fn(|k| x.frobenius_pairing(all[k].matrix(cs)) * &eighth);
    let mut recon = Mat8::zeros();
    for (k, e) in all.iter().enumerate() {
        if !coeffs[k].is_zero() {
            recon = &recon + &e.matrix(cs).scale(&coeffs[k]);
        }
    }
    assert_eq!(&recon, x, "element is not in the span of the 28-basis");
    coeffs
}

/// Structure constants of so(8) over the canonical 28-basis:
/// [E_a, E_b] = sum_c table[a][b][c] E_c with integer entries.
pub struct BasisBrackets {
    table: Vec<Vec<[i64; 28]>>,
}

impl BasisBrackets {
    pub fn new(cs: &CliffordSystem) -> Self {
        let all = BasisElem::all();
        let mats: Vec<&Mat8> = all.iter().map(|e| e.matrix(cs)).collect();
        let table = (0..28)
            .map(|a| {
                (0..28)
                    .map(|b| {
                        let br = mats[a].commutator(mats[b]);
                        let coeffs = expand_in_basis(cs, &br);
                        std::array::from_fn(|c| {
                            let v = &coeffs[c];
                            assert!(v.is_integer(), "non-integer structure constant");
                            num_traits::ToPrimitive::to_i64(v.numer())
                                .expect("structure constant does not fit in i64")
                        })
                    })
                    .collect()
            })
            .collect();
        BasisBrackets { table }
    }

    /// Coefficients of [E_a, E_b] over the canonical basis.
    pub fn coeffs(&self, a: usize, b: usize) -> &[i64; 28] {
        &self.table[a][b]
    }

    /// Indices with nonzero coefficient in [E_a, E_b].
    pub fn support(&self, a: usize, b: usize) -> impl Iterator<Item = usize> + '_ {
        self.table[a][b]
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(|(c, _)| c)
    }

    /// Bilinear extension: coefficients of [x, y] for x, y in 28-basis
    /// coordinates.
    pub fn bracket_of(&self, x: &[Rational], y: &[Rational]) -> Vec<Rational> {
        assert_eq!(x.len(), 28);
        assert_eq!(y.len(), 28);
        let mut out = vec![Rational::zero(); 28];
        for (a, xa) in x.iter().enumerate() {
            if xa.is_zero() {
                continue;
            }
            for (b, yb) in y.iter().enumerate() {
                if yb.is_zero() {
                    continue;
                }
                let scale = xa * yb;
                for c in self.support(a, b) {
                    out[c] += &scale * rint(self.table[a][b][c]);
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ChainKind {
    G,
    H,
    K,
}

impl ChainKind {
    pub fn letter(&self) -> &'static str {
        match self {
            ChainKind::G => "g",
            ChainKind::H => "h",
            ChainKind::K => "k",
        }
    }

    pub fn parse(s: &str) -> Option<ChainKind> {
        match s.to_ascii_lowercase().as_str() {
            "g" => Some(ChainKind::G),
            "h" => Some(ChainKind::H),
            "k" => Some(ChainKind::K),
            _ => None,
        }
    }

    pub fn expected_dims(&self) -> [usize; 7] {
        match self {
            ChainKind::G => [1, 3, 6, 10, 11, 13, 28],
            ChainKind::H => [1, 3, 6, 7, 9, 12, 28],
            ChainKind::K => [1, 3, 6, 10, 15, 16, 28],
        }
    }

    /// (dimension, derived-subalgebra dimension, center dimension) per
    /// member, the fingerprint of the claimed so(a) (+) so(b) types.
    pub fn expected_profiles(&self) -> [(usize, usize, usize); 7] {
        match self {
            ChainKind::G => [
                (1, 0, 1),
                (3, 3, 0),
                (6, 6, 0),
                (10, 10, 0),
                (11, 10, 1),
                (13, 13, 0),
                (28, 28, 0),
            ],
            ChainKind::H => [
                (1, 0, 1),
                (3, 3, 0),
                (6, 6, 0),
                (7, 6, 1),
                (9, 9, 0),
                (12, 12, 0),
                (28, 28, 0),
            ],
            ChainKind::K => [
                (1, 0, 1),
                (3, 3, 0),
                (6, 6, 0),
                (10, 10, 0),
                (15, 15, 0),
                (16, 15, 1),
                (28, 28, 0),
            ],
        }
    }
}

fn generator_sets(kind: ChainKind) -> [Vec<BasisElem>; 7] {
    let pairs_upto = |n: usize| -> Vec<BasisElem> {
        let mut v = Vec::new();
        for i in 1..=n {
            for j in (i + 1)..=n {
                v.push(BasisElem::Pair(i, j));
            }
        }
        v
    };
    let full: Vec<BasisElem> = BasisElem::all();
    match kind {
        ChainKind::G => {
            let mut m5 = pairs_upto(5);
            m5.push(BasisElem::Pair(6, 7));
            let mut m6 = m5.clone();
            m6.push(BasisElem::Single(6));
            m6.push(BasisElem::Single(7));
            [
                pairs_upto(2),
                pairs_upto(3),
                pairs_upto(4),
                pairs_upto(5),
                m5,
                m6,
                full,
            ]
        }
        ChainKind::H => {
            let mut m4 = pairs_upto(4);
            m4.push(BasisElem::Pair(5, 6));
            let mut m5 = pairs_upto(4);
            for i in 5..=7 {
                for j in (i + 1)..=7 {
                    m5.push(BasisElem::Pair(i, j));
                }
            }
            let mut m6 = m5.clone();
            for k in 5..=7 {
                m6.push(BasisElem::Single(k));
            }
            [
                pairs_upto(2),
                pairs_upto(3),
                pairs_upto(4),
                m4,
                m5,
                m6,
                full,
            ]
        }
        ChainKind::K => {
            let mut m6 = pairs_upto(6);
            m6.push(BasisElem::Single(7));
            [
                pairs_upto(2),
                pairs_upto(3),
                pairs_upto(4),
                pairs_upto(5),
                pairs_upto(6),
                m6,
                full,
            ]
        }
    }
}

/// One member of a chain: an explicit generator list (a subset of the
/// 28-basis, hence automatically a B-orthogonal basis of its span).
pub struct ChainMember {
    pub level: usize,
    generators: Vec<BasisElem>,
    mats: Vec<SkewMat>,
}

impl ChainMember {
    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[BasisElem] {
        &self.generators
    }

    pub fn matrices(&self) -> &[SkewMat] {
        &self.mats
    }

    pub fn contains(&self, e: &BasisElem) -> bool {
        self.generators.contains(e)
    }

    /// Positions of the generators in the canonical 28-element basis.
    pub fn index_set(&self) -> Vec<usize> {
        self.generators.iter().map(BasisElem::index).collect()
    }
}

pub struct SubalgebraChain {
    kind: ChainKind,
    members: Vec<ChainMember>,
}

impl SubalgebraChain {
    pub fn kind(&self) -> ChainKind {
        self.kind
    }

    /// Chain member by level 1..=7.
    pub fn member(&self, level: usize) -> &ChainMember {
        assert!((1..=7).contains(&level), "chain level out of range: {level}");
        &self.members[level - 1]
    }

    pub fn members(&self) -> &[ChainMember] {
        &self.members
    }
}

/// Derived-subalgebra dimension of the span of the given basis indices:
/// rank of the bracket-span in coefficient space.
pub fn derived_dim(br: &BasisBrackets, indices: &[usize]) -> usize {
    let mut rows = Vec::new();
    for (x, &a) in indices.iter().enumerate() {
        for &b in indices.iter().skip(x + 1) {
            let c = br.coeffs(a, b);
            if c.iter().any(|&v| v != 0) {
                rows.push(c.iter().map(|&v| rint(v)).collect::<Vec<_>>());
            }
        }
    }
    if rows.is_empty() {
        return 0;
    }
    RatMatrix::from_rows(rows).rank()
}

/// Center dimension of the span: nullity of the adjoint-action matrix in
/// coefficient space.
pub fn center_dim(br: &BasisBrackets, indices: &[usize]) -> usize {
    let n = indices.len();
    // equations: for x = sum_a c_a E_{indices[a]}, require [x, E_b] = 0
    // for every generator b; stack 28 rows per b.
    let mut rows = Vec::with_capacity(n * 28);
    for &b in indices {
        for comp in 0..28 {
            let mut row = Vec::with_capacity(n);
            for &a in indices {
                row.push(rint(br.coeffs(a, b)[comp]));
            }
            rows.push(row);
        }
    }
    let (_, nullspace) = RatMatrix::from_rows(rows).rank_nullspace();
    nullspace.len()
}

/// Build and certify a Thimm chain. Panics on any certification failure,
/// which would be an implementation bug, not a data condition.
pub fn build_chain(kind: ChainKind, cs: &CliffordSystem) -> SubalgebraChain {
    let br = BasisBrackets::new(cs);
    let sets = generator_sets(kind);
    let dims = kind.expected_dims();
    let profiles = kind.expected_profiles();

    let mut members = Vec::with_capacity(7);
    for (lvl, gens) in sets.into_iter().enumerate() {
        let level = lvl + 1;
        assert_eq!(
            gens.len(),
            dims[lvl],
            "chain {}: member {level} has wrong generator count",
            kind.letter()
        );
        // pairwise B-orthogonality with diagonal 8: distinct basis elements,
        // certified directly on the matrices
        let mats: Vec<SkewMat> = gens
            .iter()
            .map(|e| SkewMat::new(e.matrix(cs).clone()))
            .collect();
        for x in 0..mats.len() {
            for y in x..mats.len() {
                let p = mats[x].pairing(&mats[y]);
                let expected = if x == y { rint(8) } else { rint(0) };
                assert_eq!(
                    p, expected,
                    "chain {}: Gram matrix of member {level} is not 8*I",
                    kind.letter()
                );
            }
        }
        members.push(ChainMember {
            level,
            generators: gens,
            mats,
        });
    }

    // spans strictly increase and are nested as generator sets
    for w in members.windows(2) {
        let (lo, hi) = (&w[0], &w[1]);
        assert!(lo.dim() < hi.dim());
        for e in lo.generators() {
            assert!(
                hi.contains(e),
                "chain {}: member {} not contained in member {}",
                kind.letter(),
                lo.level,
                hi.level
            );
        }
    }

    // bracket closure of every member, exactly, on all generator pairs
    for m in &members {
        let idx = m.index_set();
        let inside = |c: usize| idx.contains(&c);
        for (x, &a) in idx.iter().enumerate() {
            for &b in idx.iter().skip(x + 1) {
                for c in br.support(a, b) {
                    assert!(
                        inside(c),
                        "chain {}: member {} is not bracket-closed",
                        kind.letter(),
                        m.level
                    );
                }
            }
        }
    }

    // Thimm condition on consecutive members: [m_l, m_{l+1}] inside m_{l+1}
    for w in members.windows(2) {
        let (lo, hi) = (&w[0], &w[1]);
        let hi_idx = hi.index_set();
        for &a in &lo.index_set() {
            for &b in &hi_idx {
                for c in br.support(a, b) {
                    assert!(
                        hi_idx.contains(&c),
                        "chain {}: Thimm condition fails at levels {}/{}",
                        kind.letter(),
                        lo.level,
                        hi.level
                    );
                }
            }
        }
    }

    // isomorphism-type fingerprints: (dim, derived dim, center dim)
    for (m, &(d, dd, cd)) in members.iter().zip(profiles.iter()) {
        let idx = m.index_set();
        assert_eq!(m.dim(), d);
        assert_eq!(
            derived_dim(&br, &idx),
            dd,
            "chain {}: derived dimension mismatch at level {}",
            kind.letter(),
            m.level
        );
        assert_eq!(
            center_dim(&br, &idx),
            cd,
            "chain {}: center dimension mismatch at level {}",
            kind.letter(),
            m.level
        );
    }

    SubalgebraChain { kind, members }
}

/// Orthogonal projection onto the span of chain member `level`:
/// sum_E B(x,E)/B(E,E) E over the member's generators.
pub fn project(chain: &SubalgebraChain, level: usize, x: &SkewMat) -> SkewMat {
    let eighth = rat(1, 8);
    let mut acc = Mat8::zeros();
    for g in chain.member(level).matrices() {
        let c = x.pairing(g) * &eighth;
        if !c.is_zero() {
            acc = &acc + &g.mat().scale(&c);
        }
    }
    SkewMat::new(acc)
}
