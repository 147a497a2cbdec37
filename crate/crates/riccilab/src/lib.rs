//! Ricci flow with surgery on symmetric 3-manifold metrics.
//!
//! Rotationally symmetric metrics `phi^2 dx^2 + psi^2 g_S2` are evolved by
//! finite differences ([`warped`]), cut along thin necks and capped when
//! the curvature reaches a threshold ([`surgery`]), audited as weak
//! solutions ([`timeline`]) and checked against the monotone quantities and
//! curvature estimates of the theory ([`monitors`]). Closed-form flows of
//! homogeneous metrics live in [`homogeneous`], and [`topology`] recognises
//! the manifolds assembled from necks and caps.

pub mod cli;
pub mod config;
pub mod error;
pub mod homogeneous;
pub mod io;
pub mod monitors;
pub mod surgery;
pub mod timeline;
pub mod topology;
pub mod warped;

pub use error::{Error, Result};
