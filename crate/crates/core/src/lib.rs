//! Exact computation of normal cones to domains and subdifferentials of
//! pointwise suprema of polyhedral convex functions, with optimality
//! certificates for convex programs built on them.
//!
//! All arithmetic is over arbitrary-precision rationals.

pub(crate) mod dd;

pub mod convexfn;
pub mod json;
pub mod lp;
pub mod optimality;
pub mod polyhedron;
pub mod rational;
pub mod suprema;

pub use convexfn::{AffinePiece, ConvexFunction, FunctionError};
pub use json::JsonError;
pub use optimality::{ConvexProgram, KktCertificate, KktError};
pub use polyhedron::{Halfspace, PolyError, Polyhedron, VRep, MAX_DIM};
pub use rational::{ExtReal, Rational};
pub use suprema::{EpsSchedule, FunctionFamily, SetResult, SupError, WeightScheme};
