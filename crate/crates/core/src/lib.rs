//! Numerical tools for converse KAM theory of twist maps.
//!
//! The crate covers Aubry–Mather minimal configurations and Peierls barriers
//! for maps generated by `h(x,x') = (x-x')^2/2 + V(x')`, explicit
//! perturbation families that destroy invariant circles, Herman's
//! total-destruction criterion on the torus, Fejér and de la Vallée Poussin
//! approximation, and pendulum/Melnikov computations.

pub mod aubry;
pub mod chain;
pub mod error;
pub mod herman;
pub mod jet;
pub mod melnikov;
pub mod perturb;
pub mod potential;
pub mod quadrature;
pub mod rotation;
pub mod torus;
pub mod tridiag;
pub mod trigapprox;
pub mod trigpoly;
pub mod twistmap;

pub use error::{Error, Result};
