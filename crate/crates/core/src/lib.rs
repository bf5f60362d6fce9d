//! Open-system dynamics of a finite-size two-level detector moving through the
//! Minkowski vacuum of a massless scalar field.
//!
//! The modules build on each other from the bottom up:
//!
//! 1. [`trajectory`]: inertial and uniformly accelerated worldlines.
//! 2. [`wightman`]: regularised two-point kernels for every segment pair.
//! 3. [`quadrature`]: adaptive 2D cubature plus a midpoint oracle.
//! 4. [`correlators`]: the phase-weighted double integrals `Y` and `𝒯Y`.
//! 5. [`states`]: coefficient sets and reduced density matrices.
//! 6. [`maps`]: A/B matrices, spectra, CP classification and Bloch images.
//!
//! [`scenario`] strings these together for the inertial, accelerated and
//! inertial-then-accelerated trajectories. [`verify`] checks the invariants
//! that tie the layers together.

pub mod config;
pub mod correlators;
pub mod eigen;
pub mod error;
pub mod maps;
pub mod quadrature;
pub mod scenario;
pub mod states;
pub mod trajectory;
pub mod verify;
pub mod wightman;

pub use correlators::{CorrelatorSet, SignPair};
pub use error::{Error, Result};
pub use maps::{AMatrix, BMatrix, BlochImage, CPReport, Classification};
pub use num_complex::Complex64;
pub use config::ScenarioConfig;
pub use quadrature::{QuadConfig, QuadResult, Region, Shape};
pub use scenario::{MapKind, Scenario, SweepVariable};
pub use states::{BlochAngles, CoefficientSet, DensityMatrix, ScenarioTag, TrajectoryPlan};
pub use wightman::{DetectorParams, PairKind};
