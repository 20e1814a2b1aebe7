//! Win and last-place probabilities for multinomial race games.
//!
//! In each round one of `m` players is chosen, player `ℓ` with probability `p_ℓ`,
//! and moves one step. Player `ℓ` finishes after `n_ℓ` steps. This crate computes
//! the probability `π_ℓ` that a player finishes first and `τ_ℓ` that it finishes
//! last, by lattice recursion, finite sums, one-dimensional quadrature and Monte
//! Carlo, together with asymptotic limits and the inverse map from winning
//! probabilities back to advancing probabilities.
//!
//! Numerical code is generic over [`Real`] (`f32`, `f64`); the lattice recursions
//! also accept exact rationals. The `*64` aliases fix the scalar to `f64`.

pub mod asym;
pub mod error;
pub mod exact;
pub mod inverse;
pub mod model;
pub mod quad;
pub mod sample;
pub mod scalar;
pub mod specfn;

pub use error::{RaceError, Result};
pub use exact::Budget;
pub use model::{
    dice_preset, game_from_goals, game_from_goals_probs, game_from_real_goals,
    game_from_real_goals_probs, GameSpec, Kind, Method, RaceProbabilities,
};
pub use scalar::{Real, Scalar};

pub type GameSpec64 = GameSpec<f64>;
pub type GameSpec32 = GameSpec<f32>;
pub type RaceProbabilities64 = RaceProbabilities<f64>;
pub type QuadConfig64 = quad::QuadConfig<f64>;
pub type McEstimate64 = sample::McEstimate<f64>;
pub type IDParams64 = sample::IDParams<f64>;
pub type ProportionVector64 = asym::ProportionVector<f64>;
pub type LimitEstimate64 = asym::LimitEstimate<f64>;
pub type SolveResult64 = inverse::SolveResult<f64>;
pub type NegMultinomialParams64 = exact::NegMultinomialParams<f64>;
/// Exact rational scalar used by the calibration recursions.
pub type Rational = num_rational::BigRational;
