//! Analysis of finite continuous-time Markov jump processes driven out of
//! equilibrium.
//!
//! Transition rates follow `k(x,y) = psi(x,y) exp(beta q(x,y) / 2)`, with an
//! antisymmetric heat `q` and a symmetric activation `psi` per edge. On top
//! of that the crate provides
//!
//! * stationary occupations by three independent routes ([`stationary`]),
//! * path-heat bounds on relative occupations and the heat partial order ([`heat`]),
//! * kinetics that flip the occupation order of heat-incomparable states ([`blowtorch`]),
//! * zero-temperature exponents and dominant states ([`lowtemp`]),
//! * a kinetic Monte Carlo simulator ([`sim`]).

// `!(x > 0.0)` is how NaN gets rejected alongside non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod blowtorch;
pub mod cli;
pub mod ensemble;
pub mod error;
pub mod heat;
pub mod logspace;
pub mod lowtemp;
pub mod model;
pub mod report;
pub mod sim;
pub mod stationary;
pub mod trees;

pub use error::{Error, Result};
pub use model::{parse_network, validate, Network, NetworkDocument, StateId};
pub use stationary::{RateMatrix, StationaryDist};
pub use trees::Limits;
