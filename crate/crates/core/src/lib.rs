//! Arithmetic on the split Kummer surface K2 = E^2/{+-1} of an Edwards
//! curve over a prime field.
//!
//! The crate builds up in layers:
//!
//! * [`field`] — prime-field elements with optional operation counting;
//! * [`edwards`] — the Edwards model in P^3 with its complete addition law
//!   (the full-group-law oracle everything else is checked against);
//! * [`kummer1`] — the Kummer line E/{+-1} and y-coordinate duplication;
//! * [`kummer2`] — the split Kummer surface in three projective models with
//!   its involutions and the endomorphisms rho, tau, phi0, phi1;
//! * [`ladder`] — the Montgomery ladder on K2 computing y(nP) from y(P);
//! * [`verify`] — identity suites, exceptional-point scans, and operation
//!   counts, machine-readable for the command-line driver.

pub mod edwards;
pub mod error;
pub mod field;
pub mod kummer1;
pub mod kummer2;
pub mod ladder;
pub mod verify;

pub use edwards::{CurveParams, EdwardsPoint};
pub use error::{Error, Result};
pub use field::{Field, FieldElement, OpCount, OpCounter};
pub use kummer1::K1Point;
pub use kummer2::{K2Point, K2PointP7, K2PointTriple};
pub use ladder::{scalar_mul_ladder, LadderState};
pub use verify::{
    count_ops, run_identity_suite, scan_exceptional, Coverage, IdentityReport, ScanReport,
    Section, SectionInput,
};
