//! Replaying a strategy against an adversary that picks observations.

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cell::Cell;
use crate::game::GameStructure;
use crate::strategy::StrategyTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Running,
    Won,
    Lost,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Running => "running",
            Status::Won => "won",
            Status::Lost => "lost",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HistoryEntry {
    pub action: usize,
    pub observation: usize,
    pub knowledge: Cell,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Choice {
    Observation(usize),
    Random,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PlayError {
    #[error("the session is over")]
    IllegalState,
    #[error("no strategy triple covers the knowledge")]
    NoCoveringTriple,
    #[error("observation is not compatible with the current knowledge")]
    IncompatibleObservation,
}

/// Everything a session owns, detached from the game and strategy it
/// replays.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SessionState {
    pub knowledge: Cell,
    pub history: Vec<HistoryEntry>,
    pub status: Status,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct Session<'a> {
    game: &'a GameStructure,
    strategy: &'a StrategyTable,
    knowledge: Cell,
    history: Vec<HistoryEntry>,
    status: Status,
    seed: u64,
}

impl<'a> Session<'a> {
    /// Starts from the initial cell. The `k`-th randomized step draws from
    /// stream `k` of a generator seeded with `seed`.
    pub fn new(game: &'a GameStructure, strategy: &'a StrategyTable, seed: u64) -> Self {
        let mut s = Session {
            game,
            strategy,
            knowledge: game.initial_cell(),
            history: Vec::new(),
            status: Status::Running,
            seed,
        };
        s.status = s.classify();
        s
    }

    pub fn from_state(game: &'a GameStructure, strategy: &'a StrategyTable, state: SessionState) -> Self {
        Session {
            game,
            strategy,
            knowledge: state.knowledge,
            history: state.history,
            status: state.status,
            seed: state.seed,
        }
    }

    pub fn into_state(self) -> SessionState {
        SessionState { knowledge: self.knowledge, history: self.history, status: self.status, seed: self.seed }
    }

    fn classify(&self) -> Status {
        let g = self.game;
        let k = &self.knowledge;
        if let Some(sinks) = g.sinks() {
            if k.contains(sinks.lose) {
                return Status::Lost;
            }
            if k.is_subset(g.target()) {
                return Status::Won;
            }
        } else if !k.is_empty() && k.is_subset(g.target()) {
            return Status::Won;
        }
        let unsafe_part = k.difference(g.safe()).difference(g.target());
        if !unsafe_part.is_empty() || self.strategy.lookup(k).is_err() {
            return Status::Lost;
        }
        Status::Running
    }

    pub fn knowledge(&self) -> &Cell {
        &self.knowledge
    }

    pub fn history(&self) -> &[HistoryEntry] {
        &self.history
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn game(&self) -> &GameStructure {
        self.game
    }

    /// The strategy's action and the observations the adversary may answer.
    pub fn proposed_move(&self) -> Result<(usize, Vec<usize>), PlayError> {
        if self.status != Status::Running {
            return Err(PlayError::IllegalState);
        }
        let (action, _) = self.strategy.lookup(&self.knowledge).map_err(|_| PlayError::NoCoveringTriple)?;
        Ok((action, self.game.compatible_observations(&self.knowledge, action)))
    }

    pub fn step(&mut self, choice: Choice) -> Result<&HistoryEntry, PlayError> {
        let (action, compatible) = match self.proposed_move() {
            Ok(m) => m,
            Err(PlayError::NoCoveringTriple) => {
                self.status = Status::Lost;
                return Err(PlayError::NoCoveringTriple);
            }
            Err(e) => return Err(e),
        };
        let observation = match choice {
            Choice::Observation(o) if compatible.contains(&o) => o,
            Choice::Observation(_) => return Err(PlayError::IncompatibleObservation),
            Choice::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(self.history.len() as u64);
                *compatible.choose(&mut rng).expect("total games have a successor")
            }
        };
        self.knowledge = self.game.knowledge_update(&self.knowledge, action, observation);
        self.history.push(HistoryEntry { action, observation, knowledge: self.knowledge.clone() });
        self.status = self.classify();
        Ok(self.history.last().unwrap())
    }
}
