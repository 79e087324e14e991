//! Indirect quantum control toolkit.
//!
//! A finite-level system is steered without direct drive: a coupled
//! auxiliary system (the accessor) is repeatedly re-prepared in one of its
//! energy eigenstates and the system–accessor interaction is switched on for
//! a chosen duration. When the interaction commutes with the accessor
//! Hamiltonian, each accessor eigenstate conditions a different effective
//! Hamiltonian on the system, and sequences of such cycles generate a
//! semigroup of propagators whose closure can be all of SU(N).
//!
//! The crate provides:
//! - [`spectral`]: dense complex matrix services (Hermitian
//!   eigendecomposition, exact-unitary propagators, tensor products);
//! - [`model`]: plant construction, the non-demolition check, accessor
//!   spectra with conditional Hamiltonians, effective Hamiltonians, and the
//!   two-spin preset;
//! - [`controllability`]: the Lie-algebra rank test for complete
//!   controllability;
//! - [`engine`]: cycle-by-cycle simulation, the full joint evolution used as
//!   a validation oracle, Schmidt factorization, and Bloch trajectories;
//! - [`synthesis`]: closed-form qubit steering and derivative-free schedule
//!   search for general plants.

pub mod controllability;
pub mod engine;
pub mod error;
pub mod model;
pub mod spectral;
pub mod synthesis;

pub use controllability::{
    generated_lie_algebra, is_fully_controllable, semigroup_element, ControllabilityVerdict,
    LieBasis,
};
pub use engine::{
    bloch_coordinates, check_factorization, ControlCycle, Factorization, Schedule, Simulator,
    SystemState, Trajectory, TrajectorySample,
};
pub use error::{Error, Result};
pub use model::{
    build_simplified_model, AccessorEigenstate, ControlPlant, EffectiveHamiltonian,
    SimplifiedGenerator, Tolerances, ValidationReport,
};
pub use spectral::{
    commutator, eig_hermitian, frobenius_inner, frobenius_norm, kron, propagator,
    EigenDecomposition, HermitianMatrix, UnitaryMatrix,
};
pub use synthesis::{synthesize_general, synthesize_qubit, SynthesisResult, TargetSpec};
