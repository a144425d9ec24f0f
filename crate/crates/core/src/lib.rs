//! Joint base-station association and uplink power control games.
//!
//! * [`discrete`]: finite networks, Pareto powers and per-mobile costs.
//! * [`dynamics`]: round-robin and randomized best-response dynamics.
//! * [`analysis`]: brute-force equilibrium, Pareto and optimum oracles, potentials.
//! * [`pricing`]: marginal-cost tolls for the finite game.
//! * [`nonatomic`]: the continuum model and its equilibrium solvers.
//! * [`poa`]: closed-form price of anarchy for a single class.
//! * [`harness`]: scenario files, fixtures and artifact output.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod discrete;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod nonatomic;
pub mod numeric;
pub mod poa;
pub mod pricing;

pub use discrete::{AssociationProfile, NetworkInstance, PowerVector};
pub use error::{Error, Result};
