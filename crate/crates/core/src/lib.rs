//! Sequential short-time propagation (SSTP) of mixed quantum-classical
//! dynamics in the adiabatic basis, applied to the spin-boson model.
//!
//! A trajectory alternates deterministic segments on single or mean
//! adiabatic surfaces with stochastic nonadiabatic transitions. Each
//! transition rescales the bath momenta along the coupling vector and
//! multiplies the trajectory weight by an importance-sampling factor. Two
//! transition probabilities are provided: the primitive one, and an
//! energy-conserving one that only admits transitions whose energy residual
//! stays inside a window `c_energy`.
//!
//! Module map:
//!
//! * [`bath`]: Ohmic bath discretization and thermal Wigner sampling.
//! * [`adiabatic`]: closed-form adiabatic energies, forces and couplings.
//! * [`propagator`]: velocity-Verlet segments with adiabatic phase.
//! * [`hopping`]: transition proposals, probabilities and weight factors.
//! * [`engine`]: the trajectory loop and the parallel ensemble runner.
//! * [`estimator`]: `<sigma_z(t)>` with error bars and weight diagnostics.
//! * [`oracle`]: exhaustive branch enumeration and the uncoupled solution.
//! * [`config`], [`output`]: run configuration and on-disk formats.

pub mod adiabatic;
pub mod bath;
pub mod config;
pub mod engine;
pub mod error;
pub mod estimator;
pub mod hopping;
pub mod oracle;
pub mod output;
pub mod propagator;
pub mod rng;

pub use adiabatic::{AdiabaticData, SpinBoson, Surface, SurfacePair};
pub use bath::{BathSpec, ModelParams, PhasePoint};
pub use config::RunConfig;
pub use engine::{Engine, EnsembleResult, TrajectoryState};
pub use error::{Error, Result};
pub use estimator::ObservableSeries;
pub use hopping::{HopProposal, JumpRule, SamplingScheme, Side, Variant};
pub use propagator::SegmentState;
