//! Numerical laboratory for dissipative dynamics of two-dimensional nematic
//! liquid crystals, organized as three tiers of description:
//!
//! 1. **Kinetic** ([`kinetic`]): the orientation-space Smoluchowski equation,
//!    reduced to a truncated hierarchy of complex Fourier moments on a grid.
//! 2. **Order parameter** ([`closure`]): closed evolution equations for the
//!    first moment — a maximal-entropy closure and a relaxational
//!    Landau-de Gennes flow.
//! 3. **Vortex/phase asymptotics** ([`vortex`]): point-vortex dynamics driven
//!    by a renormalized interaction potential, harmonic/heat phase fields, and
//!    the logarithmic mobility diagnostics that connect the tiers.
//!
//! Shared infrastructure: modified Bessel machinery and the effective
//! order-parameter potential ([`specfun`]), uniform grids, fields, energies and
//! vortex detection ([`grid`]), binary/CSV state output ([`snapshot`]), and a
//! finite-dimensional toolkit for curves of maximal slope and constrained
//! gradient-flow reduction ([`maxslope`]).

pub mod closure;
pub mod error;
pub mod grid;
pub mod kinetic;
pub mod maxslope;
pub mod snapshot;
pub mod specfun;
pub mod vortex;

pub use error::{NematicError, Result};
pub use specfun::{make_params, NematicParams};

// re-exported so downstream crates can build the matrix arguments of the
// gradient-flow toolkit without pinning their own copy of the algebra crate
pub use nalgebra;
