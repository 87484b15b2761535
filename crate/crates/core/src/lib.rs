//! Exact measure theory over finite measurable spaces.
//!
//! Every σ-algebra is represented by its atom partition, and every measure,
//! step function and transition kernel is stored as one exact rational per
//! atom. On that representation the usual constructions become finite,
//! exact algorithms: integration, Jordan/Lebesgue/Radon-Nikodym
//! decompositions, product measures and Fubini, kernel convolution and the
//! Kleisli lift, disintegration, the Lévy-Prohorov and Hutchinson distances,
//! and the modal logic `⊤ | φ∧φ | ◇_q φ` together with bisimulation
//! quotients and couplings.
//!
//! The `cli` module hosts the JSON model-file format and the command
//! dispatcher used by the `finmeas` binary and the C ABI crate.

pub mod arith;
pub mod cli;
mod error;
pub mod integrate;
pub mod kernels;
pub mod logic_bisim;
pub mod measures;
pub mod metrics;
pub mod simplex;
pub mod spaces;

pub use arith::{Exponent, NormValue, Q};
pub use error::{Error, Result};
pub use integrate::StepFunction;
pub use kernels::{AtomMap, Kernel, KernelKind};
pub use logic_bisim::Formula;
pub use measures::{LinearFunctional, Measure, SignedMeasure};
pub use metrics::FiniteMetric;
pub use spaces::{FiniteMeasurableSpace, MeasurableSet, Partition, SpaceRef};
