//! Walsh phase-plane analysis on dyadic step functions.
//!
//! The crate implements the discretized lacunary Carleson operator and the
//! machinery around it: Walsh-Paley transforms, tiles and wave packets, the
//! dense/size/energy functionals with certified decomposition algorithms, the
//! multi-frequency Calderon-Zygmund projection, Orlicz/Luxembourg norms, and
//! the end-to-end inequality experiments.  All functions on `[0,1]` are step
//! functions on the dyadic grid at a fixed resolution, so every operator here
//! is exact up to floating rounding.

pub mod algorithm;
pub mod config;
pub mod dyadic;
pub mod error;
pub mod estimates;
pub mod experiments;
pub mod io;
pub mod multifreq;
pub mod orlicz;
pub mod parallel;
pub mod phase;
pub mod report;
pub mod sampling;
pub mod tiles;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
