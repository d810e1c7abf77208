//! Closed-form load distribution for rigid bodies driven through multiple
//! contacts, built around virtual-body equivalence: each chain is modelled
//! as carrying a share of a virtual rigid body, which turns wrench
//! synthesis and decomposition into small dense linear-algebra problems.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: tolerances, pseudo-inverses, null-space bases;
//! - [`model`]: wrench spaces, contacts and grasp matrices;
//! - [`equivalence`]: virtual mass/inertia assignment;
//! - [`synthesis`]: the parametrized pseudo-inverse and wrench synthesis;
//! - [`nullspaces`]: the manipulating/constraining split of the solution set;
//! - [`decomposition`]: dynamically consistent constraint-wrench recovery;
//! - [`cli`]: the JSON problem-file front end used by the `wrenchdist` binary.

pub mod cli;
pub mod decomposition;
pub mod equivalence;
pub mod error;
pub mod model;
pub mod nullspaces;
pub mod numerics;
pub mod synthesis;

pub use error::{Error, Result};
pub use model::{Contact, ContactModel, ContactSet, Wrench, WrenchSpace};
pub use numerics::{Matrix, Tolerance, Vector};
