//! Superiorized feasibility-seeking reconstruction for parallel-beam
//! tomography.
//!
//! The feasibility operator is the unrelaxed ART sweep over the hyperplanes
//! `⟨a^i, x⟩ = b_i` followed by a box clamp. Between sweeps the iterate is
//! perturbed to reduce a regularizer `φ`, either by its proximal map
//! (`argmin_y φ(y) + ‖y − x‖²/(2β)`) or by the classic normalized
//! subgradient step.

// `!(a > b)` checks deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod driver;
pub mod error;
pub mod feasibility;
pub mod image;
pub mod perturbation;
pub mod phantoms;
pub mod projector;

pub use driver::{res, superiorize, RunResult, SuperConfig, Termination};
pub use error::{Error, Result};
pub use image::{Grid, Image};
pub use perturbation::{Perturber, TvProxParams};
pub use projector::{BoxBounds, ProjectionSystem, Ray, SparseRow};
