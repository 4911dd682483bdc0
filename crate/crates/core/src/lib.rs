//! Solver for two-player parity games with imperfect information.
//!
//! Player 1 only sees observations, so the solver works on cells (sets of
//! locations Player 1 considers possible) and represents downward-closed
//! families of cells by antichains of their maximal elements.

pub mod antichain;
pub mod bdd;
pub mod cell;
pub mod cpre;
pub mod error;
pub mod game;
pub mod play;
pub mod solver;
pub mod strategy;
pub mod testkit;

pub use antichain::Antichain;
pub use cell::Cell;
pub use cpre::{ControllablePredecessor, CpreKind, EnumerativeCpre, SymbolicContext, VarOrder};
pub use error::{GameError, SolveError};
pub use game::{parse_game, totalize_game, GameStructure, Observation, ParseReport};
pub use play::{Choice, HistoryEntry, PlayError, Session, SessionState, Status};
pub use solver::{solve_game, transform_objective, Solution, SolveOptions, SolveResult};
pub use strategy::{verify_strategy, StrategyTable, Triple};
