//! Effective resistance, random-walk hitting times and lattice spectra on
//! unit-resistance graphs, with a closed-form spectral path for
//! d-dimensional toroidal grids.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`] – adjacency lists, toroidal grids, edge-list ingestion.
//! * [`resistance`] – exact effective resistances via Laplacian solves.
//! * [`spectral`] – eigenvalue sums on `T_{M^d}` (no linear algebra).
//! * [`walk`] – simple random walk: stationary law, hitting and commute
//!   times, Monte Carlo estimation.
//! * [`hydro`] – the `M -> infinity` lattice integral and its quadratures.
//! * [`table`] / [`cli`] – sweep tables and the `gridohm` front end.

pub mod cli;
pub mod error;
pub mod graph;
pub mod hydro;
pub mod resistance;
pub mod spectral;
pub mod table;
pub mod walk;

pub use error::{Error, Result};
pub use graph::{Graph, TorusSpec};
