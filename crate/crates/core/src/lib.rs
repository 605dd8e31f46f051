//! Construction of steric-zipper amyloid fibril models.
//!
//! The crate covers the whole modelling pipeline:
//!
//! - [`structure`]: in-memory molecular model and PDB `ATOM` record I/O,
//! - [`transforms`]: the rigid transforms that generate the second β-sheet and
//!   stack strands along the fibril axis,
//! - [`mutator`]: threading an Ala/Gly sequence onto a template backbone,
//! - [`potentials`]: Lennard-Jones and 12-10 hydrogen-bond pair potentials and
//!   the reduced-unit LJ cluster objective,
//! - [`geomopt`]: sensor/anchor distance-geometry problems and strand axis fitting,
//! - [`optim`]: steepest descent, conjugate gradient, L-BFGS, simulated
//!   annealing, the SD/CG-SA-SD/CG hybrid and the SA evolutionary search,
//! - [`fibril`]: the end-to-end build, 12-chain assembly and contact reports.

// `!(x <= tol)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fibril;
pub mod geomopt;
pub mod mutator;
pub mod optim;
pub mod potentials;
pub mod structure;
pub mod transforms;

pub use error::{Error, Result};

/// Cartesian 3-vector in Å.
pub type Point = nalgebra::Vector3<f64>;
