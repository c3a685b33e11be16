//! Eigenvalues of singular non-selfadjoint Sturm–Liouville problems
//! `−(p y')' + q y = λ w y` on `[a, b)` by interval truncation, with a
//! boundary-condition-swap test for spurious eigenvalues and winding-number
//! inclusion monitoring.

pub mod exactness;
pub mod expr;
pub mod locate;
pub mod mfunc;
pub mod numfmt;
pub mod ode;
pub mod problem;
pub mod resonance;
pub mod scaled;
pub mod sims;

pub use num_complex::Complex64;
