//! Isometry algebras of the four SR structures: the kernel of
//! A -> {H, F_A} inside so(8), computed from exact sampled linear systems
//! and then certified symbolically, plus finite-isometry spot checks with
//! actual matrix exponentials.
//!
//! The kernel computation cannot silently go wrong: sampling can only
//! overestimate the kernel (every true Killing element satisfies each
//! sampled row), and every candidate basis vector is certified to vanish
//! on the whole constraint variety afterwards. A failed certification
//! triggers a resample with more rows.

use num_traits::Zero;

use crate::clifford::{CliffordSystem, Mat8};
use crate::exact::{rat, Echelon, Poly, RatMatrix, Rational};
use crate::integrals::poisson_bracket;
use crate::liealg::{BasisBrackets, BasisElem, SkewMat};
use crate::sample::{phase_array, Sampler};
use crate::srgeom::{SRHamiltonian, StructureKind};
use crate::variety::{vanishes_on_variety, VarietyOutcome};

/// {H, F_A} as an exact polynomial, computed two independent ways: the
/// canonical bracket engine, and the frame expansion
/// sum_l F_{B_l} F_{[B_l, A]} over the defining frame (with the opposite
/// sign on the subtracted vertical frame for QH). The two must agree; a
/// mismatch is an implementation bug, so it panics.
pub fn killing_obstruction(h: &SRHamiltonian, cs: &CliffordSystem, a: &SkewMat) -> Poly {
    let f_a = a.mat().pairing_poly();
    let canonical = poisson_bracket(h.poly(), &f_a);

    let frame: Vec<&Mat8> = match h.kind().frame_size() {
        Some(j) => (1..=j).map(|i| cs.a(i)).collect(),
        None => vec![cs.a(6), cs.a(7), cs.product(6, 7)],
    };
    let mut frame_form = Poly::zero();
    for b in &frame {
        let f_b = b.pairing_poly();
        let f_comm = b.commutator(a.mat()).pairing_poly();
        frame_form = &frame_form + &(&f_b * &f_comm);
    }
    if h.kind() == StructureKind::QH {
        // H = |xi|^2/2 - sum F^2/2 and {|xi|^2, F_A} = 0, so the frame
        // part enters negated
        frame_form = frame_form.scale(&rat(-1, 1));
    }
    assert_eq!(
        canonical, frame_form,
        "bracket engine and frame expansion disagree for {}",
        h.kind()
    );
    canonical
}

/// The Lie algebra of SR isometries inside O(8), as the exact kernel of
/// the Killing condition.
pub struct KillingKernel {
    pub structure: StructureKind,
    /// Kernel basis in 28-basis coordinates, echelon-reduced.
    pub coeff_basis: Vec<Vec<Rational>>,
    /// The same basis as matrices.
    pub basis: Vec<SkewMat>,
    /// Certification outcome per basis vector.
    pub certifications: Vec<VarietyOutcome>,
    /// Rows of the sampled linear system that produced the kernel.
    pub rows_used: usize,
}

impl KillingKernel {
    pub fn dimension(&self) -> usize {
        self.coeff_basis.len()
    }

    pub fn certified(&self) -> bool {
        self.certifications
            .iter()
            .all(VarietyOutcome::is_zero_on_variety)
    }

    /// When every basis vector is a scalar multiple of a single canonical
    /// basis element, the kernel is a coordinate subalgebra; returns the
    /// sorted element indices then.
    pub fn coordinate_indices(&self) -> Option<Vec<usize>> {
        let mut idx = Vec::with_capacity(self.coeff_basis.len());
        for row in &self.coeff_basis {
            let nonzero: Vec<usize> = (0..28).filter(|&c| !row[c].is_zero()).collect();
            match nonzero.as_slice() {
                [single] => idx.push(*single),
                _ => return None,
            }
        }
        idx.sort_unstable();
        Some(idx)
    }

    /// Membership test in the kernel span, exact.
    pub fn contains_coeffs(&self, v: &[Rational]) -> bool {
        let mut e = Echelon::new();
        for row in &self.coeff_basis {
            e.insert(row.clone());
        }
        e.contains(v)
    }
}

fn coeff_to_matrix(cs: &CliffordSystem, v: &[Rational]) -> Mat8 {
    let elems = BasisElem::all();
    let mut acc = Mat8::zeros();
    for (c, coeff) in v.iter().enumerate() {
        if !coeff.is_zero() {
            acc = &acc + &elems[c].matrix(cs).scale(coeff);
        }
    }
    acc
}

/// Compute and certify the Killing kernel. `samples` is the initial number
/// of sampled rows (at least 60: the system has 28 unknowns and
/// oversampling keeps a single degenerate point harmless).
pub fn compute_kernel(
    h: &SRHamiltonian,
    cs: &CliffordSystem,
    samples: usize,
    sampler: &mut Sampler,
) -> KillingKernel {
    assert!(samples >= 60, "need at least 60 sampled rows");
    let obstructions: Vec<Poly> = BasisElem::all()
        .into_iter()
        .map(|e| killing_obstruction(h, cs, &SkewMat::new(e.matrix(cs).clone())))
        .collect();

    let mut rows_target = samples;
    for _attempt in 0..3 {
        let rows: Vec<Vec<Rational>> = (0..rows_target)
            .map(|_| {
                let (q, xi) = sampler.phase_point();
                let pt = phase_array(&q, &xi);
                obstructions.iter().map(|p| p.eval_rational(&pt)).collect()
            })
            .collect();
        let kernel = RatMatrix::from_rows(rows).nullspace();

        // certify each candidate: its obstruction must vanish on the
        // whole variety, not only at the sampled points
        let mut certs = Vec::with_capacity(kernel.len());
        let mut all_good = true;
        for v in &kernel {
            let mut obs = Poly::zero();
            for (c, coeff) in v.iter().enumerate() {
                if !coeff.is_zero() {
                    obs = &obs + &obstructions[c].scale(coeff);
                }
            }
            let outcome = vanishes_on_variety(&obs, sampler);
            all_good &= outcome.is_zero_on_variety();
            certs.push(outcome);
        }
        if all_good || rows_target >= 4 * samples {
            // echelon-reduce the basis for stable reporting
            let mut ech = Echelon::new();
            for v in &kernel {
                ech.insert(v.clone());
            }
            let coeff_basis: Vec<Vec<Rational>> = ech.rows().to_vec();
            let basis = coeff_basis
                .iter()
                .map(|v| SkewMat::new(coeff_to_matrix(cs, v)))
                .collect();
            // re-certify in the reduced basis so certifications line up
            let certifications = coeff_basis
                .iter()
                .map(|v| {
                    let mut obs = Poly::zero();
                    for (c, coeff) in v.iter().enumerate() {
                        if !coeff.is_zero() {
                            obs = &obs + &obstructions[c].scale(coeff);
                        }
                    }
                    vanishes_on_variety(&obs, sampler)
                })
                .collect();
            return KillingKernel {
                structure: h.kind(),
                coeff_basis,
                basis,
                certifications,
                rows_used: rows_target,
            };
        }
        rows_target *= 2;
    }
    unreachable!("resample loop always returns on its final attempt");
}

/// Exact check that the kernel is closed under the bracket: every
/// [b_i, b_j] lies back in the kernel span.
pub fn kernel_closed_under_bracket(kernel: &KillingKernel, br: &BasisBrackets) -> bool {
    let mut span = Echelon::new();
    for row in &kernel.coeff_basis {
        span.insert(row.clone());
    }
    for (i, x) in kernel.coeff_basis.iter().enumerate() {
        for y in kernel.coeff_basis.iter().skip(i + 1) {
            if !span.contains(&br.bracket_of(x, y)) {
                return false;
            }
        }
    }
    true
}

/// e^{t M} for a general 8x8 matrix by scaling and squaring with a Taylor
/// core. For skew M the result is orthogonal to machine precision at the
/// time scales used here.
pub fn exp_scaled(m: &[[f64; 8]; 8], t: f64) -> [[f64; 8]; 8] {
    let mut a = [[0.0f64; 8]; 8]; // a = t M / 2^k
    let norm: f64 = (0..8)
        .map(|r| (0..8).map(|c| (t * m[r][c]).abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let k = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scale = (2.0f64).powi(k as i32);
    for r in 0..8 {
        for c in 0..8 {
            a[r][c] = t * m[r][c] / scale;
        }
    }
    // Taylor core: term tracks a^n / n!
    let mut result = identity8();
    let mut term = identity8();
    for n in 1..=16 {
        term = matmul8(&term, &a);
        let inv = 1.0 / f64::from(n);
        for r in 0..8 {
            for c in 0..8 {
                term[r][c] *= inv;
                result[r][c] += term[r][c];
            }
        }
    }
    // squaring steps
    let mut g = result;
    for _ in 0..k {
        g = matmul8(&g, &g);
    }
    g
}

fn identity8() -> [[f64; 8]; 8] {
    let mut i8m = [[0.0; 8]; 8];
    for r in 0..8 {
        i8m[r][r] = 1.0;
    }
    i8m
}

fn matmul8(a: &[[f64; 8]; 8], b: &[[f64; 8]; 8]) -> [[f64; 8]; 8] {
    let mut out = [[0.0; 8]; 8];
    for r in 0..8 {
        for k in 0..8 {
            let ark = a[r][k];
            if ark != 0.0 {
                for c in 0..8 {
                    out[r][c] += ark * b[k][c];
                }
            }
        }
    }
    out
}

fn apply8(m: &[[f64; 8]; 8], v: &[f64; 8]) -> [f64; 8] {
    std::array::from_fn(|r| (0..8).map(|c| m[r][c] * v[c]).sum())
}

/// Invariance of H under the one-parameter group of A at floating sample
/// points: |H(e^{tA} q, e^{tA} xi) - H(q, xi)| per time.
pub struct SpotcheckReport {
    pub structure: StructureKind,
    pub times: Vec<f64>,
    /// Max deviation over the sample points, per time.
    pub max_deviation: Vec<f64>,
    pub tolerance: f64,
}

impl SpotcheckReport {
    pub fn passed(&self) -> bool {
        self.max_deviation.iter().all(|&d| d < self.tolerance)
    }

    pub fn worst(&self) -> f64 {
        self.max_deviation.iter().fold(0.0, |a, &b| a.max(b))
    }
}

pub const SPOTCHECK_TOLERANCE: f64 = 1e-10;
const SPOTCHECK_POINTS: usize = 50;

pub fn finite_isometry_spotcheck(
    h: &SRHamiltonian,
    a: &SkewMat,
    ts: &[f64],
    sampler: &mut Sampler,
) -> SpotcheckReport {
    let grid = a.mat().to_f64_grid();
    let points: Vec<([f64; 8], [f64; 8])> = (0..SPOTCHECK_POINTS)
        .map(|_| {
            let (q, xi) = sampler.phase_point();
            (
                std::array::from_fn(|i| crate::exact::to_f64(&q[i])),
                std::array::from_fn(|i| crate::exact::to_f64(&xi[i])),
            )
        })
        .collect();
    let mut max_deviation = Vec::with_capacity(ts.len());
    for &t in ts {
        let g = exp_scaled(&grid, t);
        let mut worst = 0.0f64;
        for (q, xi) in &points {
            let pt: [f64; 16] = std::array::from_fn(|v| if v < 8 { q[v] } else { xi[v - 8] });
            let before = h.poly().eval_f64(&pt);
            let gq = apply8(&g, q);
            let gxi = apply8(&g, xi);
            let moved: [f64; 16] =
                std::array::from_fn(|v| if v < 8 { gq[v] } else { gxi[v - 8] });
            let after = h.poly().eval_f64(&moved);
            worst = worst.max((after - before).abs());
        }
        max_deviation.push(worst);
    }
    SpotcheckReport {
        structure: h.kind(),
        times: ts.to_vec(),
        max_deviation,
        tolerance: SPOTCHECK_TOLERANCE,
    }
}
