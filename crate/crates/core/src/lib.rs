//! Exact arithmetic for rank-three Breuil modules with tame principal-series
//! descent data.
//!
//! The crate is layered bottom-up: [`coeff`] provides the scalar rings,
//! [`breuil_rings`] the truncated divided-power ring and its mod-p
//! counterpart, [`dd_matrix`] matrices whose entries carry implicit
//! descent-data twists, and [`gauge`] the Frobenius diagonalization that
//! produces gauge bases. [`monodromy`], [`comparison`] and [`deformation`]
//! work with the resulting normal forms; [`cli`] drives everything from
//! JSON input documents.

pub mod breuil_rings;
pub mod cli;
pub mod coeff;
pub mod comparison;
pub mod deformation;
pub mod dd_matrix;
pub mod error;
pub mod gauge;
pub mod linalg;
pub mod monodromy;
pub mod sampling;
pub mod selftest;

pub use error::{Error, Result};
