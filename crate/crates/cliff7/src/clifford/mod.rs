//! The seven anticommuting skew-symmetric 8x8 matrices A1..A7, their 21
//! products, and the canonical linear vector fields X(A) on R^8.
//!
//! R^8 is identified with H x H, quaternion components ordered (1, i, j, k)
//! in each factor. A5, A6, A7 are block-diagonal left multiplications by
//! i, j, k (sign-flipped in the second factor); A3 and A4 are the
//! anti-diagonal blocks B3 and the symplectic unit. A1 and A2 complete the
//! system with the anti-diagonal right multiplications by -j and -k: right
//! multiplications commute with the left-multiplication blocks and
//! anticommute with each other and with B3 = (right mult by -i), and the
//! constructor certifies every relation before returning.

pub mod mat8;

pub use mat8::Mat8;

use num_traits::Zero;

use crate::exact::{Poly, Rational};

type Block = [[i64; 4]; 4];

// left multiplication by i, j, k on H in basis (1, i, j, k)
const L_I: Block = [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]];
const L_J: Block = [[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]];
const L_K: Block = [[0, 0, 0, -1], [0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]];

// right multiplication by -i, -j, -k; R_NEG_I is the 4x4 block the system
// is anchored to
const R_NEG_I: Block = [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]];
const R_NEG_J: Block = [[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]];
const R_NEG_K: Block = [[0, 0, 0, 1], [0, 0, -1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]];

const ID4: Block = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]];
const ZERO4: Block = [[0; 4]; 4];

fn neg(b: Block) -> Block {
    let mut out = b;
    for row in &mut out {
        for x in row.iter_mut() {
            *x = -*x;
        }
    }
    out
}

fn block8(tl: Block, tr: Block, bl: Block, br: Block) -> Mat8 {
    let mut grid = [[0i64; 8]; 8];
    for r in 0..4 {
        for c in 0..4 {
            grid[r][c] = tl[r][c];
            grid[r][c + 4] = tr[r][c];
            grid[r + 4][c] = bl[r][c];
            grid[r + 4][c + 4] = br[r][c];
        }
    }
    Mat8::from_i64(grid)
}

/// The certified Clifford system. Immutable after construction; the
/// constructor has already verified every relation.
pub struct CliffordSystem {
    a: [Mat8; 7],
    /// A_i A_j for 1 <= i < j <= 7, lexicographic in (i, j).
    products: Vec<Mat8>,
}

/// Index of the pair (i, j), 1-based with i < j, into the 21-element
/// product list.
pub fn pair_index(i: usize, j: usize) -> usize {
    assert!(1 <= i && i < j && j <= 7, "bad product pair ({i},{j})");
    // pairs (1,2..7), (2,3..7), ...
    (i - 1) * 7 - (i - 1) * i / 2 + (j - i - 1)
}

impl CliffordSystem {
    /// A_i for i in 1..=7.
    pub fn a(&self, i: usize) -> &Mat8 {
        assert!((1..=7).contains(&i), "Clifford index out of range: {i}");
        &self.a[i - 1]
    }

    /// A_i A_j for 1 <= i < j <= 7.
    pub fn product(&self, i: usize, j: usize) -> &Mat8 {
        &self.products[pair_index(i, j)]
    }

    /// All 21 products in (i, j) order.
    pub fn products(&self) -> &[Mat8] {
        &self.products
    }

    fn self_check(&self) -> Result<(), String> {
        let id = Mat8::identity();
        let minus_2i = id.scale(&crate::exact::rint(-2));
        for i in 1..=7 {
            if !self.a(i).is_skew() {
                return Err(format!("A{i} is not skew-symmetric"));
            }
            for row in 0..8 {
                for col in 0..8 {
                    let v = self.a(i).get(row, col);
                    let ok = v.is_integer()
                        && (v.numer().magnitude() <= &num_bigint::BigUint::from(1u8));
                    if !ok {
                        return Err(format!("A{i} entry ({row},{col}) outside {{-1,0,1}}"));
                    }
                }
            }
        }
        for i in 1..=7 {
            for j in 1..=7 {
                let anti = self.a(i).anticommutator(self.a(j));
                let expected = if i == j { &minus_2i } else { &Mat8::zeros() };
                if &anti != expected {
                    return Err(format!("A{i}A{j} + A{j}A{i} != -2*delta*I"));
                }
            }
        }
        Ok(())
    }
}

/// Construct and certify the system. Panics if any Clifford relation fails,
/// which would be an implementation bug, not a data condition.
pub fn build_clifford_system() -> CliffordSystem {
    let a = [
        block8(ZERO4, R_NEG_J, R_NEG_J, ZERO4),
        block8(ZERO4, R_NEG_K, R_NEG_K, ZERO4),
        block8(ZERO4, R_NEG_I, R_NEG_I, ZERO4),
        block8(ZERO4, ID4, neg(ID4), ZERO4),
        block8(L_I, ZERO4, ZERO4, neg(L_I)),
        block8(L_J, ZERO4, ZERO4, neg(L_J)),
        block8(L_K, ZERO4, ZERO4, neg(L_K)),
    ];
    let mut products = Vec::with_capacity(21);
    for i in 1..=7 {
        for j in (i + 1)..=7 {
            products.push(&a[i - 1] * &a[j - 1]);
        }
    }
    let cs = CliffordSystem { a, products };
    if let Err(e) = cs.self_check() {
        panic!("Clifford system self-check failed: {e}");
    }
    cs
}

/// Outcome of the orthonormal-basis certification: the 28 elements
/// {A_i} u {A_iA_j} pair to 8 with themselves and 0 with each other under
/// B(X,Y) = Tr(X^T Y), and four-fold products of distinct generators are
/// traceless.
pub struct PairingReport {
    pub checks: usize,
    pub failures: Vec<String>,
}

impl PairingReport {
    pub fn all_passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Certify that {A_i / (2 sqrt 2)} u {A_jA_k / (2 sqrt 2)} is orthonormal
/// for the Frobenius pairing, rationally: diagonal pairings equal 8, cross
/// pairings vanish, and Tr(A_i A_j A_l A_r) = 0 for pairwise distinct
/// indices.
pub fn verify_orthonormal_basis(cs: &CliffordSystem) -> PairingReport {
    let mut checks = 0;
    let mut failures = Vec::new();

    let mut basis: Vec<(String, &Mat8)> = Vec::with_capacity(28);
    for i in 1..=7 {
        basis.push((format!("A{i}"), cs.a(i)));
    }
    for i in 1..=7 {
        for j in (i + 1)..=7 {
            basis.push((format!("A{i}A{j}"), cs.product(i, j)));
        }
    }

    let eight = crate::exact::rint(8);
    for x in 0..basis.len() {
        for y in x..basis.len() {
            checks += 1;
            let b = basis[x].1.frobenius_pairing(basis[y].1);
            let expected = if x == y {
                eight.clone()
            } else {
                Rational::from_integer(0.into())
            };
            if b != expected {
                failures.push(format!(
                    "B({}, {}) = {}, expected {}",
                    basis[x].0, basis[y].0, b, expected
                ));
            }
        }
    }

    // four distinct generators: product is symmetric and traceless
    for i in 1..=7 {
        for j in (i + 1)..=7 {
            for l in (j + 1)..=7 {
                for r in (l + 1)..=7 {
                    checks += 1;
                    let m = &(cs.product(i, j) * cs.a(l)) * cs.a(r);
                    if !m.trace().is_zero() || !m.is_symmetric() {
                        failures.push(format!("A{i}A{j}A{l}A{r} not symmetric traceless"));
                    }
                }
            }
        }
    }

    PairingReport { checks, failures }
}

/// The canonical linear vector field X(A): x -> Ax, acting on polynomials
/// in the q variables as the derivation (Aq) . grad.
pub struct LinearVectorField {
    a: Mat8,
    rows: [Poly; 8],
}

impl LinearVectorField {
    pub fn new(a: Mat8) -> Self {
        assert!(a.is_skew(), "canonical vector fields require skew matrices");
        let rows = std::array::from_fn(|l| a.row_poly_q(l));
        LinearVectorField { a, rows }
    }

    pub fn matrix(&self) -> &Mat8 {
        &self.a
    }

    /// (Aq) . grad p for p depending only on the q variables.
    pub fn apply(&self, p: &Poly) -> Poly {
        for (m, _) in p.iter() {
            for v in 8..crate::exact::NVARS {
                assert!(
                    m.exponent(v) == 0,
                    "field_apply expects a polynomial in q only"
                );
            }
        }
        let mut out = Poly::zero();
        for l in 0..8 {
            if self.rows[l].is_zero() {
                continue;
            }
            let d = p.partial_derivative(crate::exact::q_var(l + 1));
            if !d.is_zero() {
                out = &out + &(&self.rows[l] * &d);
            }
        }
        out
    }
}

/// Free-function form of `LinearVectorField::apply`.
pub fn field_apply(vf: &LinearVectorField, p: &Poly) -> Poly {
    vf.apply(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::poly::{q_var, xi_var};
    use crate::exact::{rat, rint, Monomial};
    use proptest::prelude::*;

    fn cs() -> CliffordSystem {
        build_clifford_system()
    }

    #[test]
    fn all_49_clifford_relations_hold() {
        let cs = cs();
        let minus_2i = Mat8::identity().scale(&rint(-2));
        for i in 1..=7 {
            for j in 1..=7 {
                let anti = cs.a(i).anticommutator(cs.a(j));
                if i == j {
                    assert_eq!(anti, minus_2i, "A{i}^2 != -I relation");
                } else {
                    assert!(anti.is_zero(), "A{i}, A{j} do not anticommute");
                }
            }
        }
    }

    #[test]
    fn displayed_blocks_are_reproduced_exactly() {
        let cs = cs();
        // independent transcription of the displayed block forms
        let b3 = [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]];
        let mut a3 = [[0i64; 8]; 8];
        let mut a4 = [[0i64; 8]; 8];
        for r in 0..4 {
            for c in 0..4 {
                a3[r][c + 4] = b3[r][c];
                a3[r + 4][c] = b3[r][c];
            }
            a4[r][r + 4] = 1;
            a4[r + 4][r] = -1;
        }
        assert_eq!(cs.a(3), &Mat8::from_i64(a3));
        assert_eq!(cs.a(4), &Mat8::from_i64(a4));
        // A4 entries in 1-based coordinates
        assert_eq!(cs.a(4).get(0, 4), &rint(1));
        assert_eq!(cs.a(4).get(4, 0), &rint(-1));
        // quaternion left multiplications with flipped sign in the second
        // factor: check against multiplication acting on basis vectors
        let quat_mul = |a: [i64; 4], b: [i64; 4]| -> [i64; 4] {
            // (a0 + a1 i + a2 j + a3 k)(b0 + b1 i + b2 j + b3 k)
            [
                a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
                a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
                a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
                a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
            ]
        };
        let units = [[0i64, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]; // i, j, k
        for (idx, unit) in units.iter().enumerate() {
            let a = cs.a(5 + idx);
            for c in 0..4 {
                let mut basis = [0i64; 4];
                basis[c] = 1;
                let prod = quat_mul(*unit, basis);
                for r in 0..4 {
                    assert_eq!(a.get(r, c), &rint(prod[r]), "A{} block", 5 + idx);
                    assert_eq!(a.get(r + 4, c + 4), &rint(-prod[r]), "A{} block", 5 + idx);
                }
            }
        }
    }

    #[test]
    fn products_square_to_minus_identity_and_anticommute() {
        let cs = cs();
        let minus_i = -&Mat8::identity();
        for i in 1..=7 {
            for j in (i + 1)..=7 {
                let p = cs.product(i, j);
                assert!(p.is_skew(), "A{i}A{j} not skew");
                assert_eq!(&(p * p), &minus_i, "(A{i}A{j})^2 != -I");
                assert_eq!(&-&(cs.a(j) * cs.a(i)), p, "A{i}A{j} != -A{j}A{i}");
            }
        }
    }

    #[test]
    fn basis_elements_are_signed_permutations() {
        // every one of the 28 basis elements has exactly one +-1 per row
        let cs = cs();
        let mut all: Vec<&Mat8> = (1..=7).map(|i| cs.a(i)).collect();
        all.extend(cs.products().iter());
        assert_eq!(all.len(), 28);
        for m in all {
            for r in 0..8 {
                let nonzero: Vec<_> = (0..8).filter(|&c| !m.get(r, c).is_zero()).collect();
                assert_eq!(nonzero.len(), 1);
                let v = m.get(r, nonzero[0]);
                assert!(v == &rint(1) || v == &rint(-1));
            }
        }
    }

    #[test]
    fn orthonormal_basis_report_is_clean() {
        let report = verify_orthonormal_basis(&cs());
        assert!(report.all_passed(), "failures: {:?}", report.failures);
        // 406 pairings + 35 four-index traces
        assert_eq!(report.checks, 406 + 35);
    }

    #[test]
    fn explicit_pairings_match_the_stated_values() {
        let cs = cs();
        assert_eq!(cs.a(1).frobenius_pairing(cs.a(1)), rint(8));
        assert_eq!(cs.a(1).frobenius_pairing(cs.a(2)), rint(0));
        let m = &(cs.product(1, 2) * cs.a(3)) * cs.a(4);
        assert_eq!(m.trace(), rint(0));
    }

    #[test]
    fn four_fold_products_traceless_for_all_orderings() {
        let cs = cs();
        for i in 1..=7 {
            for j in 1..=7 {
                for l in 1..=7 {
                    for r in 1..=7 {
                        let idx = [i, j, l, r];
                        let mut sorted = idx;
                        sorted.sort_unstable();
                        if sorted.windows(2).any(|w| w[0] == w[1]) {
                            continue;
                        }
                        let m = &(&(cs.a(i) * cs.a(j)) * cs.a(l)) * cs.a(r);
                        assert!(m.trace().is_zero(), "Tr(A{i}A{j}A{l}A{r}) != 0");
                    }
                }
            }
        }
    }

    #[test]
    fn pairing_poly_derivative_reads_off_matrix_rows() {
        let cs = cs();
        // d/dxi1 <A4 q, xi> = (A4 q)_1 = q5
        let p = cs.a(4).pairing_poly();
        assert_eq!(p.partial_derivative(xi_var(1)), Poly::q(5));
        // d/dq5 <A4 q, xi> = (A4^T xi)_5 = column 5 of A4 dotted with xi
        assert_eq!(p.partial_derivative(q_var(5)), Poly::xi(1));
    }

    #[test]
    fn field_application_basics() {
        let cs = cs();
        let x4 = LinearVectorField::new(cs.a(4).clone());
        assert!(x4.apply(&Poly::one()).is_zero());
        // X(A5) q1 = (A5 q)_1 = -q2
        let x5 = LinearVectorField::new(cs.a(5).clone());
        assert_eq!(x5.apply(&Poly::q(1)), -Poly::q(2));
        // |q|^2 is killed by every basis field
        let norm = Poly::norm_sq_q();
        for i in 1..=7 {
            let f = LinearVectorField::new(cs.a(i).clone());
            assert!(f.apply(&norm).is_zero(), "X(A{i})|q|^2 != 0");
        }
        for p in cs.products() {
            let f = LinearVectorField::new(p.clone());
            assert!(f.apply(&norm).is_zero());
        }
    }

    #[test]
    fn field_bracket_is_minus_field_of_commutator() {
        // [X(A), X(B)] f = -X([A,B]) f on monomials of degree <= 2,
        // for all generator pairs and a sample of product pairs
        let cs = cs();
        let mut pairs: Vec<(Mat8, Mat8)> = Vec::new();
        for i in 1..=7 {
            for j in (i + 1)..=7 {
                pairs.push((cs.a(i).clone(), cs.a(j).clone()));
            }
        }
        pairs.push((cs.a(1).clone(), cs.product(1, 2).clone()));
        pairs.push((cs.a(3).clone(), cs.product(5, 7).clone()));
        pairs.push((cs.product(1, 2).clone(), cs.product(1, 3).clone()));
        pairs.push((cs.product(2, 5).clone(), cs.product(6, 7).clone()));

        let mut monomials = vec![Poly::one()];
        for i in 1..=8 {
            monomials.push(Poly::q(i));
        }
        for i in 1..=8 {
            for j in i..=8 {
                monomials.push(&Poly::q(i) * &Poly::q(j));
            }
        }

        for (a, b) in pairs {
            let xa = LinearVectorField::new(a.clone());
            let xb = LinearVectorField::new(b.clone());
            let xc = LinearVectorField::new(a.commutator(&b));
            for f in &monomials {
                let lhs = &xa.apply(&xb.apply(f)) - &xb.apply(&xa.apply(f));
                let rhs = -&xc.apply(f);
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn pair_index_enumerates_lexicographically() {
        let mut expect = 0;
        for i in 1..=7 {
            for j in (i + 1)..=7 {
                assert_eq!(pair_index(i, j), expect);
                expect += 1;
            }
        }
        assert_eq!(expect, 21);
    }

    proptest! {
        #[test]
        fn fields_kill_the_radius_for_random_skew_matrices(
            entries in proptest::collection::vec((-5i64..=5, 1i64..=3), 28)
        ) {
            // build a random skew matrix from the strict upper triangle
            let mut m = Mat8::zeros();
            let mut k = 0;
            for r in 0..8 {
                for c in (r + 1)..8 {
                    let (n, d) = entries[k];
                    k += 1;
                    m.set(r, c, rat(n, d));
                    m.set(c, r, rat(-n, d));
                }
            }
            let f = LinearVectorField::new(m);
            prop_assert!(f.apply(&Poly::norm_sq_q()).is_zero());
        }

        #[test]
        fn field_apply_satisfies_leibniz(
            aidx in 1usize..=7,
            exps in proptest::collection::vec((1usize..=8, 1u32..=2), 1..=3),
        ) {
            let cs = build_clifford_system();
            let f = LinearVectorField::new(cs.a(aidx).clone());
            let mut p = Poly::one();
            let mut g = Poly::constant(rat(3, 2));
            for (chunk, &(v, e)) in exps.iter().enumerate() {
                let factor = Poly::q(v).pow(e);
                if chunk % 2 == 0 {
                    p = &p * &factor;
                } else {
                    g = &g * &factor;
                }
            }
            let lhs = f.apply(&(&p * &g));
            let rhs = &(&f.apply(&p) * &g) + &(&p * &f.apply(&g));
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn monomial_var_consistency() {
        // q_var/xi_var agree with Poly constructors
        let m = Monomial::var(q_var(5));
        assert_eq!(Poly::from_terms([(m, rint(1))]), Poly::q(5));
    }
}
