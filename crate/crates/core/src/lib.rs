//! Spectral toolkit for the fractional Fokker-Planck operator on radial functions.

pub mod cli;
pub mod eigenbasis;
pub mod error;
pub mod heat;
pub mod mellin;
pub mod params;
pub mod quad;
pub mod radial;
pub mod radial_transforms;
pub mod specfun;

pub use error::{Error, Result, Warning};
pub use params::Params;
pub use radial::{PowerSeries, RadialFunction, RadialGrid, Spacing, SpectralProfile, SpectralRadialFunction};
