//! Scalar quantities monitored along the two-body dynamics and at `t = 0`.

mod coupling;
mod cutoff;
mod energy;
mod initial;
pub(crate) mod norms;
mod units;
mod window;

pub use coupling::{coupling_constants, CouplingConstants};
pub use cutoff::CutoffChi;
pub use energy::{hamiltonian_moments, HamiltonianMoments};
pub use initial::{fn_initial, FnInitial};
pub use norms::{triple_norm, triple_norm_cartesian, uniform_norm_table, NormTable, TripleNormReport};
pub use units::{macro_to_micro, micro_to_macro, MacroScales, MicroScales};
pub use window::{
    default_window_grid, dilated_field, window_grid, window_grid_to, DEFAULT_WINDOW_DR, window_functional, window_series, window_split, WindowPoint, WindowSeries,
};
