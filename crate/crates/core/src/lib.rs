//! Exact genus-0 double Hurwitz numbers and their chamber polynomials.
//!
//! Values follow the labelled convention: preimages of both branch points
//! carry labels, so counts are `|Aut mu| |Aut nu|` times the unlabelled ones.

pub mod chambers;
pub mod closed_forms;
pub mod engine;
pub mod error;
pub mod kernel;
pub mod oracle;
pub mod poly;
pub mod trees;

pub use chambers::{Chamber, ChamberSignature, ConePoint, Resonance, WallCrossing};
pub use closed_forms::ThreePartForm;
pub use engine::{ChamberPolynomial, CrossingDelta, Engine, Evaluation, Method, SweepConfig, SweepReport};
pub use error::{Error, Result};
pub use kernel::{HurwitzPair, IndexSet, Partition, Rational};
pub use oracle::Oracle;
pub use poly::MultiPoly;
pub use trees::{EssentialStar, GeometricTree};
