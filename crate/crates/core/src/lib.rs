//! Certified thermodynamic formalism on full shifts `N^G` over finitely
//! generated amenable groups.
//!
//! Every countable sum is truncated with an explicit remainder bound, so the
//! quantities returned here are [`Interval`]s that contain the exact value.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod dobrushin;
pub mod enumerate;
pub mod error;
pub mod group;
pub mod interval;
pub mod oracle;
pub mod potential;
pub mod sampler;
pub mod specification;
pub mod thermo;

pub use enumerate::Budget;
pub use error::{Error, Result};
pub use group::{GroupContext, Norm, Site, SiteSet};
pub use interval::Interval;
pub use potential::{BoundaryCondition, FiniteAlphabet, Letter, Pattern, Potential};
