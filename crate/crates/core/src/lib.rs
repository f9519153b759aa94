//! Hyperbolic geometry of the noncommutative unit ball of matrix tuples.
//!
//! A point is a tuple `X = (X_1, ..., X_n)` of `d x d` complex matrices with
//! `‖Σ X_i X_i*‖ < 1`. The crate computes the Harnack gauge `ω`, the
//! hyperbolic metric `δ = ln ω` and the kernel metric `d_H` between points,
//! tests Harnack domination, applies the free holomorphic automorphisms of the
//! ball and checks the Schwarz–Pick inequality for free polynomial maps.
//!
//! Everything is built from finite compressions of Fock-space operators.
//! Metric values come as [`metrics::Enclosure`]s: the lower end is attained on
//! a finite compression, the upper end is backed by a dissipation certificate
//! (see [`dissipation`]).

pub mod automorphisms;
pub mod dissipation;
pub mod error;
pub mod fock;
pub mod freeholo;
pub mod kernels;
pub mod linalg;
pub mod metrics;
pub mod parallel;
pub mod tuples;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::ComplexMatrix;
pub use metrics::{Enclosure, MetricOptions};

pub use parallel::Execution;
pub use tuples::OperatorTuple;
