//! Exact-arithmetic toolkit for the four subriemannian structures on the
//! 7-sphere.
//!
//! The crate certifies, in exact rational arithmetic, the algebra behind the
//! trivializable SR structures on S^7 (ranks 4 and 5), the contact structure
//! of the Hopf fibration, and the quaternionic Hopf structure: Clifford
//! matrix relations, subalgebra chains and their projections, Poisson
//! involution and functional independence of the induced first integrals,
//! SR isometry algebras, and commuting families of second-order operators.
//! A small floating-point layer integrates the geodesic flows numerically
//! and checks them against closed-form solutions.

pub mod clifford;
pub mod exact;
pub mod geodesics;
pub mod integrals;
pub mod isometry;
pub mod liealg;
pub mod sample;
pub mod srgeom;
pub mod variety;

pub use exact::Rational;
