//! Periodic grid, Fourier transforms, differential operators and dealiased
//! products on the torus `[0, 2π)^d`.

mod field;
mod grid;
pub mod norms;
pub mod random;
pub mod snapshot;

pub use field::{
    advect, dot_dealiased, forward_transform, forward_transform_vector, inverse_transform,
    product_dealiased, Rank, SpectralField,
};
pub use grid::{make_grid, shared_grid, Grid};
pub use norms::lp_norm;
