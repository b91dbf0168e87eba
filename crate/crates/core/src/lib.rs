//! Numerical toolkit for interpolating sequences in the unit disk.
//!
//! The building blocks are disk automorphisms ([`mobius`]), finite point
//! sequences and their separation constants ([`sequences`]), point-mass
//! Carleson measures ([`carleson`]), finite Blaschke products
//! ([`blaschke`]) and Besov-type seminorms computed by adaptive quadrature
//! ([`spaces`]). [`earl`] builds bounded interpolants from perturbed
//! Blaschke products, and [`verify`] runs the equivalence checks that tie
//! all of these together.
//!
//! Infinite objects are never evaluated directly. A quantity such as a
//! Carleson constant is computed on a ladder of truncations, and
//! [`classify`] turns the ladder into a `BOUNDED`, `DIVERGENT` or
//! `INCONCLUSIVE` verdict. Verdicts are numerical evidence, not proofs.
//!
//! ```
//! use diskinterp::carleson::{box_constant, weights_from_sequence};
//! use diskinterp::classify::{Classification, Thresholds};
//! use diskinterp::sequences::gen_radial;
//!
//! let seq = gen_radial(0.5, 30).unwrap();
//! let mu = weights_from_sequence(&seq, 0.5).unwrap();
//! let report = box_constant(&mu, 0.5, 32, &Thresholds::default()).unwrap();
//! assert_eq!(report.classification, Classification::Bounded);
//! ```

pub mod earl;
pub mod error;
pub mod blaschke;
pub mod carleson;
pub mod classify;
pub mod mobius;
pub mod net;
pub mod numeric;
pub mod report;
pub mod sequences;
pub mod spaces;
pub mod verify;

pub use error::{Error, Result};
pub use mobius::{DiskPoint, Rotation};
pub use num_complex::Complex64;
