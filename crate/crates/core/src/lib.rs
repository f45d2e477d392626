//! Exact absorption analysis for weighted discrete-time Markov chains.
//!
//! The distribution of accumulated capital at each state is carried as a
//! capped generating polynomial with exact rational coefficients, and pushed
//! through the chain one round at a time. The result is the joint law of
//! (rounds, capital) at absorption, plus the residual mass left after the
//! horizon. A front-end compiles "Count Your Chickens!" boards into such
//! chains, and a seeded simulator provides an independent check.
//!
//! ```
//! use umbral::{game, stats, umbra};
//!
//! let spec = game::builtin_game("simplified").unwrap();
//! let chain = game::compile_game(&spec).unwrap();
//! let record = umbra::run_absorption(&chain, "1", 60).unwrap();
//! let summary = stats::summarize(&record, spec.win_threshold).unwrap();
//! assert!(summary.win_probability > num_traits::Zero::zero());
//! ```

pub mod chain;
pub mod cli;
pub mod compare;
pub mod game;
pub mod poly;
pub mod rational;
pub mod simulate;
pub mod stats;
pub mod umbra;

pub use chain::{Edge, WeightedMarkovChain};
pub use game::{builtin_game, compile_game, parse_game_spec, GameSpec};
pub use poly::{CappedPolynomial, Support};
pub use rational::{rat, Rational};
pub use simulate::{simulate, SimConfig, SimulationReport};
pub use stats::{summarize, SummaryStats};
pub use umbra::{run_absorption, umbra_step, AbsorptionRecord, StateVector};
