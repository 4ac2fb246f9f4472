//! Geodesic flow of the four SR Hamiltonians: explicit Hamiltonian vector
//! fields, fixed-step fourth-order integration with optional constraint
//! projection, the closed-form solution family on the split-quaternion
//! chart, and a periodicity diagnostic for reduced initial data.
//!
//! Everything here is floating point. The exact layer supplies the frame
//! matrices, the Hamiltonians, and the seven chain integrals; this module
//! only evaluates them along trajectories and reports drift.

use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::clifford::CliffordSystem;
use crate::exact::CompiledPoly;
use crate::integrals::build_integrals;
use crate::liealg::{build_chain, ChainKind};
use crate::sample::phase_array_f64;
use crate::srgeom::{build_hamiltonian, StructureKind};

/// Constraint tolerance for initial data handed to the integrator.
pub const INITIAL_POINT_TOL: f64 = 1e-12;

/// Norm-condition tolerance for reduced initial data.
pub const NORM_CONDITION_TOL: f64 = 1e-14;

/// Continued-fraction tolerance for the period-ratio rationality test.
pub const RATIONALITY_TOL: f64 = 1e-12;

/// Largest denominator the rationality test will accept. A float ratio is
/// always rational in the literal sense; a reconstruction needing a larger
/// denominator than this is treated as numerically irrational.
const DENOMINATOR_CAP: u64 = 10_000;

#[derive(Debug, Error)]
pub enum GeodesicError {
    #[error(
        "initial point violates the phase constraints \
         (sphere defect {sphere:.3e}, tangency defect {tangency:.3e})"
    )]
    InitialPointOffVariety { sphere: f64, tangency: f64 },
    #[error("step size must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("integration span must be nonnegative and finite, got {0}")]
    BadSpan(f64),
    #[error("reduced data violates the norm condition by {0:.3e}")]
    UnnormalizedReducedData(f64),
}

/// A point of the phase space R^8 x R^8, normally on the constraint
/// variety |q| = 1, <q, xi> = 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePoint {
    pub q: [f64; 8],
    pub xi: [f64; 8],
}

impl PhasePoint {
    pub fn new(q: [f64; 8], xi: [f64; 8]) -> Self {
        PhasePoint { q, xi }
    }

    pub fn from_rational(q: &[crate::Rational; 8], xi: &[crate::Rational; 8]) -> Self {
        use num_traits::ToPrimitive;
        PhasePoint {
            q: std::array::from_fn(|i| q[i].to_f64().expect("coordinate does not fit in f64")),
            xi: std::array::from_fn(|i| xi[i].to_f64().expect("coordinate does not fit in f64")),
        }
    }

    /// | |q|^2 - 1 |.
    pub fn sphere_defect(&self) -> f64 {
        (dot(&self.q, &self.q) - 1.0).abs()
    }

    /// | <q, xi> |.
    pub fn tangency_defect(&self) -> f64 {
        dot(&self.q, &self.xi).abs()
    }

    pub fn constraint_defect(&self) -> f64 {
        self.sphere_defect().max(self.tangency_defect())
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(self.xi.iter()).all(|x| x.is_finite())
    }

    fn phase_array(&self) -> [f64; crate::exact::NVARS] {
        phase_array_f64(&self.q, &self.xi)
    }
}

fn dot(a: &[f64; 8], b: &[f64; 8]) -> f64 {
    let mut s = 0.0;
    for i in 0..8 {
        s += a[i] * b[i];
    }
    s
}

fn matvec(m: &[[f64; 8]; 8], v: &[f64; 8]) -> [f64; 8] {
    std::array::from_fn(|r| {
        let mut s = 0.0;
        for c in 0..8 {
            s += m[r][c] * v[c];
        }
        s
    })
}

/// Time-stepping scheme. Both are the classical fourth-order rule; the
/// projected variant renormalizes q to the sphere and removes the <q, xi>
/// component of xi after every step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    Rk4,
    Rk4Projected,
}

impl Scheme {
    pub fn tag(self) -> &'static str {
        match self {
            Scheme::Rk4 => "rk4",
            Scheme::Rk4Projected => "rk4_projected",
        }
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "rk4" => Ok(Scheme::Rk4),
            "rk4_projected" | "rk4-projected" => Ok(Scheme::Rk4Projected),
            other => Err(format!(
                "unknown scheme '{other}' (expected rk4 or rk4_projected)"
            )),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Explicit right-hand side of Hamilton's equations for one structure.
///
/// For the trivializable kinds the field is the frame form
/// qdot = sum_l p_l A_l q, xidot = sum_l p_l A_l xi with p_l = <A_l q, xi>
/// (the second equation is -sum_l <q, A_l xi> A_l xi with the sign folded
/// into p_l).
///
/// For QH the field is the gradient of the homogeneous representative
/// (|q|^2 |xi|^2 - <q, xi>^2)/2 - sum_V <Vq, xi>^2 / 2 over the vertical
/// fields V in {A6, A7, A6A7}. On the constraint variety this function
/// equals the QH Hamiltonian and its gradient is tangent to the variety;
/// the literal gradient of the |xi|^2/2 form is not (it moves <q, xi> at
/// rate |xi|^2), so integrating it would walk the orbit off the sphere
/// and lose the conserved integrals. The two gradients agree on the
/// variety up to the normal component (0, |xi|^2 q).
pub struct FlowField {
    kind: StructureKind,
    mats: Vec<[[f64; 8]; 8]>,
}

impl FlowField {
    pub fn new(kind: StructureKind, cs: &CliffordSystem) -> Self {
        let mats = match kind.frame_size() {
            Some(j) => (1..=j).map(|i| cs.a(i).to_f64_grid()).collect(),
            None => vec![
                cs.a(6).to_f64_grid(),
                cs.a(7).to_f64_grid(),
                cs.product(6, 7).to_f64_grid(),
            ],
        };
        FlowField { kind, mats }
    }

    pub fn kind(&self) -> StructureKind {
        self.kind
    }

    pub fn eval(&self, q: &[f64; 8], xi: &[f64; 8]) -> ([f64; 8], [f64; 8]) {
        let vertical = self.kind.frame_size().is_none();
        let mut qdot = [0.0; 8];
        let mut xidot = [0.0; 8];
        if vertical {
            // Round part of the homogeneous representative:
            // qdot += |q|^2 xi - <q, xi> q, xidot += -|xi|^2 q + <q, xi> xi.
            let qq = dot(q, q);
            let xx = dot(xi, xi);
            let qx = dot(q, xi);
            for i in 0..8 {
                qdot[i] = qq * xi[i] - qx * q[i];
                xidot[i] = qx * xi[i] - xx * q[i];
            }
        }
        for m in &self.mats {
            let mq = matvec(m, q);
            let p = dot(&mq, xi);
            let coeff = if vertical { -p } else { p };
            let mxi = matvec(m, xi);
            for i in 0..8 {
                qdot[i] += coeff * mq[i];
                xidot[i] += coeff * mxi[i];
            }
        }
        (qdot, xidot)
    }
}

/// One-shot evaluation of the Hamiltonian vector field at a point.
pub fn hamiltonian_vector_field(
    kind: StructureKind,
    cs: &CliffordSystem,
    p: &PhasePoint,
) -> ([f64; 8], [f64; 8]) {
    FlowField::new(kind, cs).eval(&p.q, &p.xi)
}

/// Chain whose seven integrals are logged along trajectories of a given
/// structure: the chain carrying that Hamiltonian's decomposition.
pub fn integral_chain(kind: StructureKind) -> ChainKind {
    match kind {
        StructureKind::T4 => ChainKind::H,
        StructureKind::T6H => ChainKind::K,
        StructureKind::T5 | StructureKind::QH => ChainKind::G,
    }
}

/// Sampled solution of one geodesic flow. `integrals_log[i]` holds H
/// followed by the seven chain integrals, evaluated at `states[i]`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub kind: StructureKind,
    pub scheme: Scheme,
    pub dt: f64,
    pub times: Vec<f64>,
    pub states: Vec<PhasePoint>,
    pub integrals_log: Vec<[f64; 8]>,
    /// False when the stepper produced a nonfinite state and stopped; the
    /// recorded samples then end at the last finite time.
    pub completed: bool,
}

impl Trajectory {
    pub fn last_time(&self) -> f64 {
        *self.times.last().expect("trajectory holds at least t = 0")
    }

    pub fn final_state(&self) -> &PhasePoint {
        self.states.last().expect("trajectory holds at least t = 0")
    }

    pub fn drift_stats(&self) -> DriftStats {
        let first = self.integrals_log[0];
        let mut energy = 0.0f64;
        let mut integrals = 0.0f64;
        for row in &self.integrals_log {
            energy = energy.max(rel_drift(row[0], first[0]));
            for k in 1..8 {
                integrals = integrals.max(rel_drift(row[k], first[k]));
            }
        }
        let mut sphere = 0.0f64;
        let mut tangency = 0.0f64;
        for s in &self.states {
            sphere = sphere.max(s.sphere_defect());
            tangency = tangency.max(s.tangency_defect());
        }
        DriftStats {
            energy,
            integrals,
            sphere,
            tangency,
        }
    }
}

/// |x - x0| / max(1, |x0|): relative for order-one conserved quantities,
/// absolute when the initial value is small.
fn rel_drift(x: f64, x0: f64) -> f64 {
    (x - x0).abs() / x0.abs().max(1.0)
}

/// Worst-case conservation and constraint drift over a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DriftStats {
    /// max_t |H(t) - H(0)| / max(1, |H(0)|).
    pub energy: f64,
    /// Same measure, maximized over the seven chain integrals.
    pub integrals: f64,
    /// max_t | |q(t)|^2 - 1 |.
    pub sphere: f64,
    /// max_t | <q(t), xi(t)> |.
    pub tangency: f64,
}

/// A structure's flow plus its compiled conserved quantities, built once
/// and reused across trajectories.
pub struct GeodesicSystem {
    field: FlowField,
    /// H first, then the seven integrals of the matching chain.
    conserved: Vec<CompiledPoly>,
}

impl GeodesicSystem {
    pub fn new(kind: StructureKind, cs: &CliffordSystem) -> Self {
        let field = FlowField::new(kind, cs);
        let hamiltonian = build_hamiltonian(kind, cs);
        let chain = build_chain(integral_chain(kind), cs);
        let set = build_integrals(&chain, cs);
        let mut conserved = vec![hamiltonian.poly().compile_f64()];
        conserved.extend(set.integrals().iter().map(|p| p.compile_f64()));
        GeodesicSystem { field, conserved }
    }

    pub fn kind(&self) -> StructureKind {
        self.field.kind()
    }

    pub fn field(&self) -> &FlowField {
        &self.field
    }

    fn log_row(&self, p: &PhasePoint) -> [f64; 8] {
        let at = p.phase_array();
        std::array::from_fn(|i| self.conserved[i].eval(&at))
    }

    /// Fixed-step integration from `p0` to `t_end`. Samples are recorded at
    /// every step boundary, t = 0 included; if `t_end` is not a multiple of
    /// `dt` a shorter final step lands on it exactly. On a nonfinite state
    /// the trajectory is returned truncated with `completed = false`.
    pub fn integrate(
        &self,
        p0: &PhasePoint,
        t_end: f64,
        dt: f64,
        scheme: Scheme,
    ) -> Result<Trajectory, GeodesicError> {
        if !dt.is_finite() || dt <= 0.0 {
            return Err(GeodesicError::BadStep(dt));
        }
        if !t_end.is_finite() || t_end < 0.0 {
            return Err(GeodesicError::BadSpan(t_end));
        }
        let sphere = p0.sphere_defect();
        let tangency = p0.tangency_defect();
        if sphere > INITIAL_POINT_TOL || tangency > INITIAL_POINT_TOL {
            return Err(GeodesicError::InitialPointOffVariety { sphere, tangency });
        }

        let full_steps = (t_end / dt + 1e-9).floor() as usize;
        let remainder = t_end - full_steps as f64 * dt;
        let partial = remainder > dt * 1e-9;
        let samples = full_steps + 1 + usize::from(partial);

        let mut times = Vec::with_capacity(samples);
        let mut states = Vec::with_capacity(samples);
        let mut integrals_log = Vec::with_capacity(samples);
        let mut state = *p0;
        times.push(0.0);
        states.push(state);
        integrals_log.push(self.log_row(&state));

        let mut completed = true;
        for i in 0..full_steps + usize::from(partial) {
            let h = if i < full_steps { dt } else { remainder };
            let mut next = rk4_step(&self.field, &state, h);
            if scheme == Scheme::Rk4Projected {
                project_to_variety(&mut next);
            }
            if !next.is_finite() {
                completed = false;
                break;
            }
            state = next;
            let t = if i < full_steps {
                (i + 1) as f64 * dt
            } else {
                t_end
            };
            times.push(t);
            states.push(state);
            integrals_log.push(self.log_row(&state));
        }

        Ok(Trajectory {
            kind: self.kind(),
            scheme,
            dt,
            times,
            states,
            integrals_log,
            completed,
        })
    }
}

/// Convenience wrapper building the system for a single run.
pub fn integrate(
    kind: StructureKind,
    cs: &CliffordSystem,
    p0: &PhasePoint,
    t_end: f64,
    dt: f64,
    scheme: Scheme,
) -> Result<Trajectory, GeodesicError> {
    GeodesicSystem::new(kind, cs).integrate(p0, t_end, dt, scheme)
}

fn rk4_step(field: &FlowField, p: &PhasePoint, h: f64) -> PhasePoint {
    let shifted = |base: &PhasePoint, k: &([f64; 8], [f64; 8]), c: f64| PhasePoint {
        q: std::array::from_fn(|i| base.q[i] + c * k.0[i]),
        xi: std::array::from_fn(|i| base.xi[i] + c * k.1[i]),
    };
    let k1 = field.eval(&p.q, &p.xi);
    let s2 = shifted(p, &k1, h / 2.0);
    let k2 = field.eval(&s2.q, &s2.xi);
    let s3 = shifted(p, &k2, h / 2.0);
    let k3 = field.eval(&s3.q, &s3.xi);
    let s4 = shifted(p, &k3, h);
    let k4 = field.eval(&s4.q, &s4.xi);
    PhasePoint {
        q: std::array::from_fn(|i| {
            p.q[i] + h / 6.0 * (k1.0[i] + 2.0 * k2.0[i] + 2.0 * k3.0[i] + k4.0[i])
        }),
        xi: std::array::from_fn(|i| {
            p.xi[i] + h / 6.0 * (k1.1[i] + 2.0 * k2.1[i] + 2.0 * k3.1[i] + k4.1[i])
        }),
    }
}

/// Pulls a state back onto the constraint variety: q is renormalized to
/// the unit sphere and the <q, xi> component is removed from xi.
fn project_to_variety(p: &mut PhasePoint) {
    let n = dot(&p.q, &p.q).sqrt();
    if n > 0.0 && n.is_finite() {
        for x in &mut p.q {
            *x /= n;
        }
    }
    let s = dot(&p.q, &p.xi);
    for i in 0..8 {
        p.xi[i] -= s * p.q[i];
    }
}

/// Hamilton product on R^4 in the coordinates (1, i, j, k).
fn quat_mul(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

const QUAT_K: [f64; 4] = [0.0, 0.0, 0.0, 1.0];

/// Initial data (q1~, q2~) for the closed-form family, as a pair of
/// quaternions subject to the norm condition |q1~|^2 + |q2~|^2 = 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReducedInitialData {
    q1: [f64; 4],
    q2: [f64; 4],
}

impl ReducedInitialData {
    pub fn new(q1: [f64; 4], q2: [f64; 4]) -> Result<Self, GeodesicError> {
        let defect = (norm_sq4(&q1) + norm_sq4(&q2) - 1.0).abs();
        if defect > NORM_CONDITION_TOL {
            return Err(GeodesicError::UnnormalizedReducedData(defect));
        }
        Ok(ReducedInitialData { q1, q2 })
    }

    /// Both components on the real axis, with |q1~|^2 = s1.
    pub fn real_axis_split(s1: f64) -> Result<Self, GeodesicError> {
        if !(0.0..=1.0).contains(&s1) {
            return Err(GeodesicError::UnnormalizedReducedData(f64::NAN));
        }
        ReducedInitialData::new([s1.sqrt(), 0.0, 0.0, 0.0], [(1.0 - s1).sqrt(), 0.0, 0.0, 0.0])
    }

    pub fn q1(&self) -> [f64; 4] {
        self.q1
    }

    pub fn q2(&self) -> [f64; 4] {
        self.q2
    }

    pub fn norms_sq(&self) -> (f64, f64) {
        (norm_sq4(&self.q1), norm_sq4(&self.q2))
    }

    /// Angular rates of the two components:
    /// w1 = 1 - |q1~|^2 + |q2~|^2 and w2 = 1 + |q1~|^2 - |q2~|^2.
    pub fn angular_rates(&self) -> (f64, f64) {
        let (s1, s2) = self.norms_sq();
        (1.0 - s1 + s2, 1.0 + s1 - s2)
    }
}

fn norm_sq4(v: &[f64; 4]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// The closed-form solution through (q1~, q2~): each component rotates by
/// the unit quaternion e^{w t k} = cos(w t) + sin(w t) k acting by left
/// multiplication, and the momentum rides along as xi = (k q1, k q2).
pub fn closed_form_reduced(data: &ReducedInitialData, t: f64) -> PhasePoint {
    let (w1, w2) = data.angular_rates();
    let q1 = quat_mul([(w1 * t).cos(), 0.0, 0.0, (w1 * t).sin()], data.q1);
    let q2 = quat_mul([(w2 * t).cos(), 0.0, 0.0, (w2 * t).sin()], data.q2);
    let xi1 = quat_mul(QUAT_K, q1);
    let xi2 = quat_mul(QUAT_K, q2);
    PhasePoint {
        q: concat4(q1, q2),
        xi: concat4(xi1, xi2),
    }
}

/// Analytic time derivative of the closed-form solution:
/// qdot_i = w_i k q_i(t) and xidot_i = -w_i q_i(t).
pub fn closed_form_velocity(data: &ReducedInitialData, t: f64) -> ([f64; 8], [f64; 8]) {
    let p = closed_form_reduced(data, t);
    let (w1, w2) = data.angular_rates();
    let q1: [f64; 4] = std::array::from_fn(|i| p.q[i]);
    let q2: [f64; 4] = std::array::from_fn(|i| p.q[4 + i]);
    let qd1 = quat_mul(QUAT_K, q1).map(|x| w1 * x);
    let qd2 = quat_mul(QUAT_K, q2).map(|x| w2 * x);
    let xd1 = q1.map(|x| -w1 * x);
    let xd2 = q2.map(|x| -w2 * x);
    (concat4(qd1, qd2), concat4(xd1, xd2))
}

fn concat4(a: [f64; 4], b: [f64; 4]) -> [f64; 8] {
    std::array::from_fn(|i| if i < 4 { a[i] } else { b[i - 4] })
}

/// Outcome of the period analysis of one closed-form orbit.
#[derive(Clone, Debug, Serialize)]
pub struct PeriodicityReport {
    /// Minimal period of the first component, 2 pi / w1.
    pub lambda1: f64,
    /// Minimal period of the second component, 2 pi / w2.
    pub lambda2: f64,
    /// lambda2 / lambda1 = w1 / w2.
    pub ratio: f64,
    /// Lowest-terms p/q reconstructing the ratio within the
    /// continued-fraction tolerance and denominator cap; None is the
    /// numerical signature of an irrational ratio.
    pub rational: Option<(u64, u64)>,
    /// q * lambda2 = p * lambda1 when the ratio is rational.
    pub common_period: Option<f64>,
    pub label: String,
}

/// Reports the component periods and whether the orbit closes. Rationality
/// of a floating ratio cannot be decided, only approximated; the label
/// says "numerically non-periodic" rather than claiming a proof.
pub fn periodicity_diagnostic(data: &ReducedInitialData) -> PeriodicityReport {
    let (w1, w2) = data.angular_rates();
    let tau = 2.0 * std::f64::consts::PI;
    // One rate vanishes only for degenerate data (a component of norm 0,
    // which the reduced flow leaves frozen); the orbit then closes with
    // the other component's period.
    if w1.abs() < 1e-15 || w2.abs() < 1e-15 {
        let (lambda1, lambda2) = (tau / w1, tau / w2);
        let period = if w1.abs() < 1e-15 { lambda2 } else { lambda1 };
        return PeriodicityReport {
            lambda1,
            lambda2,
            ratio: w1 / w2,
            rational: None,
            common_period: Some(period),
            label: format!("periodic (common period {period})"),
        };
    }
    let lambda1 = tau / w1;
    let lambda2 = tau / w2;
    let ratio = lambda2 / lambda1;
    let rational = rational_approximation(ratio, RATIONALITY_TOL, DENOMINATOR_CAP);
    match rational {
        Some((p, q)) => {
            let period = q as f64 * lambda2;
            PeriodicityReport {
                lambda1,
                lambda2,
                ratio,
                rational: Some((p, q)),
                common_period: Some(period),
                label: format!("periodic (common period {period})"),
            }
        }
        None => PeriodicityReport {
            lambda1,
            lambda2,
            ratio,
            rational: None,
            common_period: None,
            label: "numerically non-periodic".to_string(),
        },
    }
}

/// Continued-fraction reconstruction of a positive ratio as p/q with
/// q <= cap and |x - p/q| <= tol * max(1, x).
fn rational_approximation(x: f64, tol: f64, cap: u64) -> Option<(u64, u64)> {
    if !x.is_finite() || x <= 0.0 {
        return None;
    }
    let scale = x.max(1.0);
    // Convergent recurrence h_n = a_n h_{n-1} + h_{n-2} (same for k_n),
    // seeded with h_{-1} = 1, h_{-2} = 0 and k_{-1} = 0, k_{-2} = 1.
    let (mut h_prev, mut h) = (0u64, 1u64);
    let (mut k_prev, mut k) = (1u64, 0u64);
    let mut rem = x;
    for _ in 0..64 {
        let a = rem.floor();
        if a >= cap as f64 * 2.0 && k > 0 {
            break;
        }
        let a_int = a as u64;
        let h_next = a_int.checked_mul(h)?.checked_add(h_prev)?;
        let k_next = a_int.checked_mul(k)?.checked_add(k_prev)?;
        if k_next > cap && k > 0 {
            break;
        }
        h_prev = h;
        h = h_next;
        k_prev = k;
        k = k_next;
        if (x - h as f64 / k as f64).abs() <= tol * scale {
            return Some((h, k));
        }
        let frac = rem - a;
        if frac.abs() < 1e-15 {
            break;
        }
        rem = 1.0 / frac;
    }
    None
}

/// Writes a trajectory as CSV: header `t,q1..q8,xi1..xi8,H,I1..I7`, one
/// row per sample, every value printed with 17 significant digits so the
/// binary64 round-trips exactly.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, out: &mut W) -> io::Result<()> {
    write!(out, "t")?;
    for i in 1..=8 {
        write!(out, ",q{i}")?;
    }
    for i in 1..=8 {
        write!(out, ",xi{i}")?;
    }
    write!(out, ",H")?;
    for i in 1..=7 {
        write!(out, ",I{i}")?;
    }
    writeln!(out)?;
    for i in 0..traj.times.len() {
        write!(out, "{:.16e}", traj.times[i])?;
        for x in &traj.states[i].q {
            write!(out, ",{x:.16e}")?;
        }
        for x in &traj.states[i].xi {
            write!(out, ",{x:.16e}")?;
        }
        for v in &traj.integrals_log[i] {
            write!(out, ",{v:.16e}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Metadata sidecar accompanying a CSV trajectory export.
#[derive(Clone, Debug, Serialize)]
pub struct TrajectorySidecar {
    pub structure: String,
    pub dt: f64,
    pub scheme: String,
    pub t_end: f64,
    pub drift_stats: DriftStats,
}

impl TrajectorySidecar {
    pub fn from_trajectory(traj: &Trajectory) -> Self {
        TrajectorySidecar {
            structure: traj.kind.tag().to_string(),
            dt: traj.dt,
            scheme: traj.scheme.tag().to_string(),
            t_end: traj.last_time(),
            drift_stats: traj.drift_stats(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::build_clifford_system;
    use crate::exact::{q_var, xi_var, NVARS};
    use crate::sample::Sampler;
    use crate::srgeom::build_hamiltonian;

    fn sampled_phase_point(sampler: &mut Sampler) -> PhasePoint {
        let (q, xi) = sampler.phase_point();
        PhasePoint::from_rational(&q, &xi)
    }

    /// Sampled point with the momentum normalized to |xi| = 1, the natural
    /// scale for trajectory tests (and the constraints re-tightened in f64).
    fn unit_momentum_phase_point(sampler: &mut Sampler) -> PhasePoint {
        let mut p = sampled_phase_point(sampler);
        project_to_variety(&mut p);
        let n = dot(&p.xi, &p.xi).sqrt();
        assert!(n > 1e-6, "degenerate sampled momentum");
        for x in &mut p.xi {
            *x /= n;
        }
        p
    }

    /// The polynomial whose gradient the flow field implements: the stored
    /// Hamiltonian for the frame kinds, the homogeneous representative for
    /// the vertical kind.
    fn field_hamiltonian(kind: StructureKind, cs: &crate::clifford::CliffordSystem) -> crate::exact::Poly {
        use crate::exact::Poly;
        match kind.frame_size() {
            Some(_) => build_hamiltonian(kind, cs).into_poly(),
            None => {
                let qx = Poly::q_dot_xi();
                let round = &(&Poly::norm_sq_q() * &Poly::norm_sq_xi()) - &(&qx * &qx);
                let vertical = crate::srgeom::half_sum_of_squared_pairings(&[
                    cs.a(6),
                    cs.a(7),
                    cs.product(6, 7),
                ]);
                &round.scale(&crate::Rational::new(1.into(), 2.into())) - &vertical
            }
        }
    }

    fn max_abs_diff(a: &[f64; 8], b: &[f64; 8]) -> f64 {
        (0..8).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
    }

    fn state_distance(a: &PhasePoint, b: &PhasePoint) -> f64 {
        max_abs_diff(&a.q, &b.q).max(max_abs_diff(&a.xi, &b.xi))
    }

    #[test]
    fn field_vanishes_at_zero_momentum() {
        let cs = build_clifford_system();
        let mut sampler = Sampler::for_task(7, "geodesics zero momentum");
        for kind in StructureKind::ALL {
            let q = sampler.sphere_point();
            let p = PhasePoint::from_rational(&q, &std::array::from_fn(|_| crate::Rational::from_integer(0.into())));
            let (qdot, xidot) = hamiltonian_vector_field(kind, &cs, &p);
            assert_eq!(qdot, [0.0; 8], "{kind}");
            assert_eq!(xidot, [0.0; 8], "{kind}");
        }
    }

    #[test]
    fn rank5_field_at_the_standard_point() {
        let cs = build_clifford_system();
        let a1 = cs.a(1).to_f64_grid();
        let mut q = [0.0; 8];
        q[0] = 1.0;
        let xi = matvec(&a1, &q);
        let p = PhasePoint::new(q, xi);
        let (qdot, xidot) = hamiltonian_vector_field(StructureKind::T5, &cs, &p);
        // Only the l = 1 frame term survives: qdot = A1 e1 and
        // xidot = A1 A1 e1 = -e1.
        assert_eq!(qdot, xi);
        let minus_e1: [f64; 8] = std::array::from_fn(|i| if i == 0 { -1.0 } else { 0.0 });
        assert_eq!(xidot, minus_e1);
    }

    #[test]
    fn field_matches_the_symbolic_hamiltonian_gradient() {
        let cs = build_clifford_system();
        let mut sampler = Sampler::for_task(11, "geodesics gradient check");
        for kind in StructureKind::ALL {
            let h = field_hamiltonian(kind, &cs);
            let dq: Vec<_> = (1..=8)
                .map(|i| h.partial_derivative(q_var(i)).compile_f64())
                .collect();
            let dxi: Vec<_> = (1..=8)
                .map(|i| h.partial_derivative(xi_var(i)).compile_f64())
                .collect();
            let field = FlowField::new(kind, &cs);
            for _ in 0..25 {
                let p = sampled_phase_point(&mut sampler);
                let at = p.phase_array();
                let (qdot, xidot) = field.eval(&p.q, &p.xi);
                let grad_q: [f64; 8] = std::array::from_fn(|i| dxi[i].eval(&at));
                let grad_xi: [f64; 8] = std::array::from_fn(|i| -dq[i].eval(&at));
                assert!(
                    max_abs_diff(&qdot, &grad_q) < 1e-12,
                    "{kind}: qdot disagrees with dH/dxi"
                );
                assert!(
                    max_abs_diff(&xidot, &grad_xi) < 1e-12,
                    "{kind}: xidot disagrees with -dH/dq"
                );
            }
        }
    }

    #[test]
    fn vertical_field_matches_its_hamiltonian_on_the_variety() {
        // The QH flow integrates the homogeneous representative, not the
        // literal |xi|^2/2 form of the stored Hamiltonian. On the variety
        // the two gradients differ exactly by the normal component
        // (0, |xi|^2 q), so the fields define the same dynamics there.
        let cs = build_clifford_system();
        let h = build_hamiltonian(StructureKind::QH, &cs);
        let dq: Vec<_> = (1..=8)
            .map(|i| h.poly().partial_derivative(q_var(i)).compile_f64())
            .collect();
        let dxi: Vec<_> = (1..=8)
            .map(|i| h.poly().partial_derivative(xi_var(i)).compile_f64())
            .collect();
        let field = FlowField::new(StructureKind::QH, &cs);
        let mut sampler = Sampler::for_task(12, "geodesics qh representative");
        for _ in 0..25 {
            let p = sampled_phase_point(&mut sampler);
            let at = p.phase_array();
            let (qdot, xidot) = field.eval(&p.q, &p.xi);
            let raw_q: [f64; 8] = std::array::from_fn(|i| dxi[i].eval(&at));
            let raw_xi: [f64; 8] = std::array::from_fn(|i| -dq[i].eval(&at));
            let xx = dot(&p.xi, &p.xi);
            let shifted: [f64; 8] = std::array::from_fn(|i| xidot[i] + xx * p.q[i]);
            let scale = 1.0 + xx;
            assert!(max_abs_diff(&qdot, &raw_q) < 1e-12 * scale);
            assert!(max_abs_diff(&shifted, &raw_xi) < 1e-12 * scale * scale);
        }
    }

    #[test]
    fn field_is_tangent_to_the_constraints() {
        let cs = build_clifford_system();
        let mut sampler = Sampler::for_task(13, "geodesics tangency");
        for kind in StructureKind::ALL {
            let field = FlowField::new(kind, &cs);
            for _ in 0..100 {
                let p = sampled_phase_point(&mut sampler);
                let (qdot, xidot) = field.eval(&p.q, &p.xi);
                let pairing_rate = dot(&qdot, &p.xi) + dot(&p.q, &xidot);
                let norm_rate = 2.0 * dot(&p.q, &qdot);
                assert!(pairing_rate.abs() < 1e-12, "{kind}: d/dt <q, xi> = {pairing_rate:e}");
                assert!(norm_rate.abs() < 1e-12, "{kind}: d/dt |q|^2 = {norm_rate:e}");
            }
        }
    }

    #[test]
    fn zero_momentum_gives_a_constant_trajectory() {
        let cs = build_clifford_system();
        let mut q = [0.0; 8];
        q[3] = 1.0;
        let p0 = PhasePoint::new(q, [0.0; 8]);
        let system = GeodesicSystem::new(StructureKind::T4, &cs);
        let traj = system.integrate(&p0, 1.0, 0.125, Scheme::Rk4).unwrap();
        assert_eq!(traj.times.len(), 9);
        assert_eq!(traj.states.len(), traj.times.len());
        assert_eq!(traj.integrals_log.len(), traj.times.len());
        assert!(traj.completed);
        assert!(traj.times.windows(2).all(|w| w[0] < w[1]));
        for s in &traj.states {
            assert_eq!(*s, p0);
        }
    }

    #[test]
    fn closed_form_starts_at_the_initial_data() {
        let data = ReducedInitialData::new(
            [0.5, 0.1, -0.3, 0.2],
            [(1.0f64 - 0.39).sqrt(), 0.0, 0.0, 0.0],
        )
        .unwrap();
        let p = closed_form_reduced(&data, 0.0);
        let q1 = data.q1();
        let q2 = data.q2();
        for i in 0..4 {
            assert_eq!(p.q[i], q1[i]);
            assert_eq!(p.q[4 + i], q2[i]);
        }
        // xi(0) = (k q1~, k q2~): left multiplication by k permutes signs.
        assert_eq!(p.xi[0], -q1[3]);
        assert_eq!(p.xi[1], -q1[2]);
        assert_eq!(p.xi[2], q1[1]);
        assert_eq!(p.xi[3], q1[0]);
        assert_eq!(p.xi[4], -q2[3]);
        assert_eq!(p.xi[7], q2[0]);
    }

    #[test]
    fn closed_form_stays_on_the_variety() {
        let data = ReducedInitialData::new(
            [0.3, -0.4, 0.1, 0.2],
            [0.5, 0.3, -0.5, (1.0f64 - 0.89).sqrt()],
        )
        .unwrap();
        for n in 0..50 {
            let t = 0.37 * n as f64;
            let p = closed_form_reduced(&data, t);
            assert!(p.sphere_defect() < 1e-14, "t = {t}");
            assert!(p.tangency_defect() < 1e-14, "t = {t}");
            let xi_norm = dot(&p.xi, &p.xi);
            assert!((xi_norm - 1.0).abs() < 1e-14, "t = {t}");
        }
    }

    #[test]
    fn closed_form_solves_both_flows() {
        let cs = build_clifford_system();
        let generic = {
            let mut q1 = [1.0, 2.0, -1.0, 3.0];
            let mut q2 = [0.0, 1.0, 1.0, -2.0];
            let n1 = norm_sq4(&q1);
            let n2 = norm_sq4(&q2);
            // Scale the halves to norms 0.4 and 0.6.
            for x in &mut q1 {
                *x *= (0.4 / n1).sqrt();
            }
            for x in &mut q2 {
                *x *= (0.6 / n2).sqrt();
            }
            ReducedInitialData::new(q1, q2).unwrap()
        };
        let axis = ReducedInitialData::real_axis_split(1.0 / 3.0).unwrap();
        for data in [axis, generic] {
            for kind in [StructureKind::T4, StructureKind::T5] {
                let field = FlowField::new(kind, &cs);
                for n in 0..25 {
                    let t = 0.28 * n as f64;
                    let p = closed_form_reduced(&data, t);
                    let (qdot, xidot) = field.eval(&p.q, &p.xi);
                    let (qdot_cf, xidot_cf) = closed_form_velocity(&data, t);
                    let residual =
                        max_abs_diff(&qdot, &qdot_cf).max(max_abs_diff(&xidot, &xidot_cf));
                    assert!(
                        residual < 1e-11,
                        "{kind}: closed form fails the flow at t = {t}, residual {residual:e}"
                    );
                }
            }
        }
    }

    #[test]
    fn one_third_split_has_the_advertised_periods() {
        let data = ReducedInitialData::real_axis_split(1.0 / 3.0).unwrap();
        let (w1, w2) = data.angular_rates();
        let pi = std::f64::consts::PI;
        assert!((2.0 * pi / w1 - 1.5 * pi).abs() < 1e-14);
        assert!((2.0 * pi / w2 - 3.0 * pi).abs() < 1e-14);
        let start = closed_form_reduced(&data, 0.0);
        let after_common = closed_form_reduced(&data, 3.0 * pi);
        assert!(state_distance(&start, &after_common) < 1e-10);
        // At the first component's own period the second is only half way
        // around: e^{pi k} = -1 flips its sign, so the full state differs.
        let after_lambda1 = closed_form_reduced(&data, 1.5 * pi);
        let q2_flipped: [f64; 4] = std::array::from_fn(|i| -start.q[4 + i]);
        for i in 0..4 {
            assert!((after_lambda1.q[i] - start.q[i]).abs() < 1e-12);
            assert!((after_lambda1.q[4 + i] - q2_flipped[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn integration_tracks_the_closed_form() {
        let cs = build_clifford_system();
        let data = ReducedInitialData::real_axis_split(1.0 / 3.0).unwrap();
        let p0 = closed_form_reduced(&data, 0.0);
        let system = GeodesicSystem::new(StructureKind::T5, &cs);
        let traj = system.integrate(&p0, 10.0, 1e-3, Scheme::Rk4).unwrap();
        assert!(traj.completed);
        assert!((traj.last_time() - 10.0).abs() < 1e-12);
        let mut worst = 0.0f64;
        for i in (0..traj.times.len()).step_by(250) {
            let exact = closed_form_reduced(&data, traj.times[i]);
            worst = worst.max(state_distance(&traj.states[i], &exact));
        }
        let final_exact = closed_form_reduced(&data, traj.last_time());
        worst = worst.max(state_distance(traj.final_state(), &final_exact));
        assert!(worst < 1e-8, "closed-form tracking error {worst:e}");
    }

    #[test]
    fn conserved_quantities_hold_along_trajectories() {
        let cs = build_clifford_system();
        let mut sampler = Sampler::for_task(17, "geodesics conservation");
        for kind in StructureKind::ALL {
            let system = GeodesicSystem::new(kind, &cs);
            let p0 = unit_momentum_phase_point(&mut sampler);
            let traj = system.integrate(&p0, 10.0, 1e-3, Scheme::Rk4).unwrap();
            assert!(traj.completed);
            let stats = traj.drift_stats();
            assert!(stats.energy < 1e-9, "{kind}: energy drift {:e}", stats.energy);
            assert!(
                stats.integrals < 1e-9,
                "{kind}: integral drift {:e}",
                stats.integrals
            );
            assert!(stats.sphere < 1e-9, "{kind}: sphere drift {:e}", stats.sphere);
            assert!(
                stats.tangency < 1e-9,
                "{kind}: tangency drift {:e}",
                stats.tangency
            );
        }
    }

    #[test]
    fn projection_pins_the_constraints() {
        let cs = build_clifford_system();
        let mut sampler = Sampler::for_task(19, "geodesics projection");
        let p0 = unit_momentum_phase_point(&mut sampler);
        let system = GeodesicSystem::new(StructureKind::T6H, &cs);
        let projected = system
            .integrate(&p0, 10.0, 1e-3, Scheme::Rk4Projected)
            .unwrap();
        let stats = projected.drift_stats();
        assert!(stats.sphere < 1e-13, "sphere drift {:e}", stats.sphere);
        assert!(stats.tangency < 1e-13, "tangency drift {:e}", stats.tangency);
        // Projection must not spoil conservation.
        assert!(stats.energy < 1e-9);
        assert!(stats.integrals < 1e-9);
    }

    #[test]
    fn integration_is_time_reversible() {
        let cs = build_clifford_system();
        let mut sampler = Sampler::for_task(23, "geodesics reversibility");
        let p0 = unit_momentum_phase_point(&mut sampler);
        let system = GeodesicSystem::new(StructureKind::T5, &cs);
        let forward = system.integrate(&p0, 5.0, 1e-3, Scheme::Rk4).unwrap();
        let mut turn = PhasePoint {
            q: forward.final_state().q,
            xi: forward.final_state().xi.map(|x| -x),
        };
        // The forward endpoint carries O(1e-12) constraint drift; tighten it
        // so the return leg starts from admissible data. The nudge is far
        // below the reversibility tolerance.
        project_to_variety(&mut turn);
        let back = system.integrate(&turn, 5.0, 1e-3, Scheme::Rk4).unwrap();
        let recovered = PhasePoint {
            q: back.final_state().q,
            xi: back.final_state().xi.map(|x| -x),
        };
        let err = state_distance(&recovered, &p0);
        assert!(err < 1e-8, "round trip error {err:e}");
    }

    #[test]
    fn halving_the_step_shows_fourth_order() {
        let cs = build_clifford_system();
        let data = ReducedInitialData::real_axis_split(1.0 / 3.0).unwrap();
        let p0 = closed_form_reduced(&data, 0.0);
        let system = GeodesicSystem::new(StructureKind::T5, &cs);
        let t_end = 2.0;
        let exact = closed_form_reduced(&data, t_end);
        let error_at = |dt: f64| {
            let traj = system.integrate(&p0, t_end, dt, Scheme::Rk4).unwrap();
            state_distance(traj.final_state(), &exact)
        };
        let coarse = error_at(0.02);
        let fine = error_at(0.01);
        let ratio = coarse / fine;
        assert!(
            (12.0..=20.0).contains(&ratio),
            "error ratio {ratio} outside the fourth-order window (coarse {coarse:e}, fine {fine:e})"
        );
    }

    #[test]
    fn nonfinite_states_abort_with_the_last_valid_time() {
        let cs = build_clifford_system();
        let mut q = [0.0; 8];
        q[0] = 1.0;
        let a1 = cs.a(1).to_f64_grid();
        let xi = matvec(&a1, &q).map(|x| x * 1e160);
        let p0 = PhasePoint::new(q, xi);
        let system = GeodesicSystem::new(StructureKind::T5, &cs);
        let traj = system.integrate(&p0, 10.0, 1e3, Scheme::Rk4).unwrap();
        assert!(!traj.completed);
        assert!(traj.last_time() < 10.0);
        assert!(traj.states.iter().all(PhasePoint::is_finite));
        assert_eq!(traj.states.len(), traj.times.len());
    }

    #[test]
    fn integrate_rejects_bad_input() {
        let cs = build_clifford_system();
        let system = GeodesicSystem::new(StructureKind::T4, &cs);
        let mut q = [0.0; 8];
        q[0] = 1.0;
        let good = PhasePoint::new(q, [0.0; 8]);
        let off = PhasePoint::new(q.map(|x| 2.0 * x), [0.0; 8]);
        assert!(matches!(
            system.integrate(&off, 1.0, 0.1, Scheme::Rk4),
            Err(GeodesicError::InitialPointOffVariety { .. })
        ));
        assert!(matches!(
            system.integrate(&good, 1.0, 0.0, Scheme::Rk4),
            Err(GeodesicError::BadStep(_))
        ));
        assert!(matches!(
            system.integrate(&good, f64::NAN, 0.1, Scheme::Rk4),
            Err(GeodesicError::BadSpan(_))
        ));
        assert!(matches!(
            ReducedInitialData::new([1.0, 0.0, 0.0, 0.0], [0.1, 0.0, 0.0, 0.0]),
            Err(GeodesicError::UnnormalizedReducedData(_))
        ));
    }

    #[test]
    fn periodicity_diagnostic_matches_the_formulas() {
        let pi = std::f64::consts::PI;

        let symmetric = ReducedInitialData::real_axis_split(0.5).unwrap();
        let report = periodicity_diagnostic(&symmetric);
        assert!((report.ratio - 1.0).abs() < 1e-14);
        assert_eq!(report.rational, Some((1, 1)));
        assert!((report.common_period.unwrap() - 2.0 * pi).abs() < 1e-12);
        assert!(report.label.starts_with("periodic"));

        let third = ReducedInitialData::real_axis_split(1.0 / 3.0).unwrap();
        let report = periodicity_diagnostic(&third);
        assert!((report.lambda1 - 1.5 * pi).abs() < 1e-12);
        assert!((report.lambda2 - 3.0 * pi).abs() < 1e-12);
        assert_eq!(report.rational, Some((2, 1)));
        assert!((report.common_period.unwrap() - 3.0 * pi).abs() < 1e-12);
        assert!(report.label.contains("common period"));

        let irrational = ReducedInitialData::real_axis_split(1.0 / 5.0f64.sqrt()).unwrap();
        let report = periodicity_diagnostic(&irrational);
        assert_eq!(report.rational, None);
        assert_eq!(report.common_period, None);
        assert_eq!(report.label, "numerically non-periodic");
    }

    #[test]
    fn rational_approximation_recovers_simple_fractions() {
        assert_eq!(rational_approximation(2.0, 1e-12, 10_000), Some((2, 1)));
        assert_eq!(
            rational_approximation(7.0 / 3.0, 1e-12, 10_000),
            Some((7, 3))
        );
        assert_eq!(
            rational_approximation(355.0 / 113.0, 1e-12, 10_000),
            Some((355, 113))
        );
        // pi needs denominators beyond the cap at this tolerance.
        assert_eq!(
            rational_approximation(std::f64::consts::PI, 1e-12, 10_000),
            None
        );
        assert_eq!(rational_approximation(f64::NAN, 1e-12, 10_000), None);
    }

    #[test]
    fn csv_export_round_trips_binary64() {
        let cs = build_clifford_system();
        let data = ReducedInitialData::real_axis_split(1.0 / 3.0).unwrap();
        let p0 = closed_form_reduced(&data, 0.0);
        let system = GeodesicSystem::new(StructureKind::T5, &cs);
        let traj = system.integrate(&p0, 0.02, 5e-3, Scheme::Rk4).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&traj, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert_eq!(
            header,
            "t,q1,q2,q3,q4,q5,q6,q7,q8,xi1,xi2,xi3,xi4,xi5,xi6,xi7,xi8,H,I1,I2,I3,I4,I5,I6,I7"
        );
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), traj.times.len());
        for (i, row) in rows.iter().enumerate() {
            let fields: Vec<&str> = row.split(',').collect();
            assert_eq!(fields.len(), 25);
            let t: f64 = fields[0].parse().unwrap();
            assert_eq!(t, traj.times[i], "printed time must round trip exactly");
            let q3: f64 = fields[3].parse().unwrap();
            assert_eq!(q3, traj.states[i].q[2]);
            let h: f64 = fields[17].parse().unwrap();
            assert_eq!(h, traj.integrals_log[i][0]);
        }
    }

    #[test]
    fn sidecar_serializes_deterministically() {
        let cs = build_clifford_system();
        let data = ReducedInitialData::real_axis_split(0.5).unwrap();
        let p0 = closed_form_reduced(&data, 0.0);
        let system = GeodesicSystem::new(StructureKind::QH, &cs);
        let make = || {
            let traj = system.integrate(&p0, 0.1, 0.01, Scheme::Rk4).unwrap();
            serde_json::to_string(&TrajectorySidecar::from_trajectory(&traj)).unwrap()
        };
        let a = make();
        let b = make();
        assert_eq!(a, b);
        assert!(a.starts_with("{\"structure\":\"qh\",\"dt\":0.01,\"scheme\":\"rk4\""));
        assert!(a.contains("\"t_end\":"));
        assert!(a.contains("\"drift_stats\":{\"energy\":"));
    }

    #[test]
    fn partial_final_step_lands_on_t_end() {
        let cs = build_clifford_system();
        let mut sampler = Sampler::for_task(29, "geodesics partial step");
        let p0 = sampled_phase_point(&mut sampler);
        let system = GeodesicSystem::new(StructureKind::T4, &cs);
        let traj = system.integrate(&p0, 0.25, 0.1, Scheme::Rk4).unwrap();
        assert_eq!(traj.times.len(), 4);
        assert_eq!(traj.last_time(), 0.25);
        assert!(traj.times.windows(2).all(|w| w[0] < w[1]));
    }
}
