//! Desk-scale perturbative algebraic quantum field theory for a scalar field
//! on a 1+1 dimensional lattice.

pub mod algebraic_qm;
pub mod config;
pub mod eg_renorm;
pub mod formal_series;
pub mod functionals;
pub mod graphs;
pub mod lattice;
pub mod microlocal;
pub mod quantization;
pub mod scalar;
pub mod suite;
