//! Pseudo-spectral solvers for the compressible and incompressible
//! Navier-Stokes equations on the periodic torus, together with a
//! Littlewood-Paley toolkit (dyadic blocks, Besov and Chemin-Lerner norms,
//! Bony decomposition) used to measure the incompressible limit at large
//! volume viscosity.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod diagnostics;
pub mod error;
pub mod lemmas;
pub mod littlewood_paley;
pub mod par;
pub mod solvers;
pub mod spectral;

pub use error::{Error, Result};
