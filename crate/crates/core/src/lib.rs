//! Principal inner products of real algebras and principal metrics on the
//! group of nonzero quaternions.
//!
//! The crate is `no_std` and only needs `alloc`. Modules, bottom-up:
//!
//! - [`numeric`]: dense linear algebra, quadrature, finite differences.
//! - [`algebra`]: structure tensors, products, identity, commutator algebra.
//! - [`unit_group`]: charts, proper frames and frame transforms on the quaternion group.
//! - [`products`]: admissible one-forms and their contractions.
//! - [`metric`]: principal metrics, scale-factor profiles and the FLRW check.
//! - [`curvature`]: finite-difference curvature of metric fields.

#![no_std]

extern crate alloc;

pub mod algebra;
pub mod curvature;
pub mod error;
pub mod metric;
pub mod numeric;
pub mod products;
pub mod unit_group;

pub use error::{Error, Result};
