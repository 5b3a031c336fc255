//! Finite-size-scaling data collapse.

mod collapse;
mod fit;
mod nelder_mead;

pub use collapse::{
    collapse, collapse_objective, rescale, rescaled_table, uncertainty_region, CollapseOptions, CollapseOutput,
    CollapseParams, DataPoint,
};
pub use fit::{polyfit_residue, DEFAULT_DEGREE};
pub use nelder_mead::{default_simplex, nelder_mead, NelderMeadOptions, NelderMeadResult};
