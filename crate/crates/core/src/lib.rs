//! Numerical laboratory for zero-energy scattering, Gross–Pitaevskii scaled
//! two-body dynamics and the correlation-window functionals built on them.

pub mod dispersive;
pub mod error;
pub mod functionals;
pub mod gp;
pub mod harness;
pub mod grid;
pub mod interp;
pub mod orbital;
pub mod potential;
pub mod propagator;
pub mod quad;
pub mod scattering;

pub use dispersive::{estimate_rhs, fit_exponent, supnorm_series, DecaySeries, ExponentFit, NormBundle};
pub use error::{Error, Result};
pub use functionals::{
    coupling_constants, fn_initial, hamiltonian_moments, micro_to_macro, triple_norm, uniform_norm_table,
    window_functional, window_series, window_split, CutoffChi,
};
pub use gp::{coupling_comparison, evolve_gp, gp_energy, CondensateField, CouplingComparison};
pub use grid::{RadialGrid, StretchedLayout};
pub use harness::{preset, run_experiment, run_persisted, ExperimentConfig, ExperimentKind, RunRecord};
pub use potential::{make_potential, potential_norms, scale_potential, PotentialKind, PotentialNorms, PotentialSpec};
pub use scattering::{
    omega_at, scattering_length, solve_zero_energy, verify_omega_bounds, BoundReport, LengthMethod,
    ScatteringSolution,
};
pub use orbital::{InitialOrbital, ProfileShape, RadialProfile};
pub use propagator::{
    evolve_cartesian, evolve_free, evolve_radial, evolve_radial_with, evolve_weighted, evolve_weighted_direct,
    moller_transform, read_checkpoint, weighted_norm, write_checkpoint, Absorber, CartesianField, Checkpoint,
    Dynamics, EvolveOptions, MollerDirection, PotentialMode, RadialField,
};
