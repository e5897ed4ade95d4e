//! Symbolic construction of Cartan/Weyl connections for linear first-order
//! PDE systems on jet coordinates, together with finite-difference
//! verification of the induced evolution equations.
//!
//! The crate is organised in layers:
//!
//! * [`expr`] — a small self-contained symbolic kernel: expression trees over
//!   coordinates, jet variables and named functions, with differentiation,
//!   substitution, canonical simplification and a seeded probabilistic
//!   equivalence test.
//! * [`forms`] — exterior calculus over the kernel: scalar and matrix-valued
//!   differential forms, wedge products, exterior derivatives, Maurer–Cartan
//!   forms of the scaling group, adjoint conjugation, curvature and the
//!   covariant divergence.
//! * [`jetpde`] — second-order linear PDE specifications and their
//!   flattening to first-order equations on jet coordinates.
//! * [`cartan`] — the five-step pipeline: scaling-group transformation,
//!   connection matching with a gauge-choice policy, Weyl embedding, gauge
//!   subgroup constraints and the torsion-free reduction.
//! * [`numerics`] — 1-D finite-difference checks: the vacuum boundary value
//!   problem, Crank–Nicolson evolution in direct and split form, the
//!   discrete continuity form, and the Madelung decomposition.
//! * [`report`] — JSON-facing serialisation with stable key order.

pub mod cartan;
pub mod expr;
pub mod forms;
pub mod jetpde;
pub mod numerics;
pub mod report;


pub use expr::{Expr, ExprError, Symbol, SymbolKind, Workspace};
