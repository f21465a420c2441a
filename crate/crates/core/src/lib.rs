//! Computable pieces of the Gluskin-polytope versus cross-polytope
//! Banach–Mazur lower bound argument.
//!
//! The crate is `no_std` (it needs `alloc`). All transcendental functions go
//! through `libm`, so every sampled matrix, Monte Carlo count and optimizer
//! value is bit-identical across platforms.
//!
//! Layout:
//!
//! * [`linalg`] – dense kernels: Gram–Schmidt with reorthogonalization,
//!   distances to spans, singular values, LU solves.
//! * [`rng`] and [`sampling`] – seeded counter-based Gaussian streams and the
//!   random objects built from them.
//! * [`lp`] – ℓ1-minimal representations (dense two-phase simplex) and
//!   Carathéodory support reduction.
//! * [`polytope`] – cross-polytopes, coefficient matrices, the α-split, the
//!   `crosspol(k, h)` predicate and containment scales.
//! * [`measure`] – Gaussian measure estimation, quadrature oracles and the
//!   closed-form bounds.
//! * [`optimizer`] – the asymptotic parameter system and exponent extraction.
//! * [`stats`] – Clopper–Pearson intervals and log-domain combinatorics.

#![no_std]

extern crate alloc;

pub mod error;
pub mod linalg;
pub mod lp;
pub mod measure;
pub mod optimizer;
pub mod polytope;
pub mod rng;
pub mod sampling;
pub mod stats;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
pub use rng::Seed;
