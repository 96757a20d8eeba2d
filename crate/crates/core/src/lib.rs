//! Combinatorial and symbolic engine for generalized Danielewski-Fieseler
//! (GDF) surfaces.
//!
//! A GDF surface over a marked affine curve is described here by its graph
//! divisor: one rooted fiber tree per marked point. The crate provides
//!
//! - [`tree`]: leveled rooted trees, types, bushes and spring bushes,
//!   canonical forms, isomorphisms and automorphism groups;
//! - [`divisors`]: the abstract base curve (a lattice of principal divisors
//!   supported on the marked points), graph divisors, Danielewski-Fieseler
//!   quotients and type divisors;
//! - [`cylinder`]: the decision procedure for `B`-isomorphism of cylinders
//!   with certificates, stretchings, bush normal forms and a complete
//!   canonical invariant;
//! - [`models`]: accompanying sequences and explicit polynomial models;
//! - [`config`]: configuration spaces, the group `G(D)`, orbit tests,
//!   stabilizers and moduli dimensions.

pub mod config;
pub mod cylinder;
pub mod divisors;
pub mod error;
pub mod lattice;
pub mod models;
pub mod poly;
pub mod rational;
pub mod tree;

pub use error::{Error, Result};
pub use rational::Rat;
