//! Brute-force oracle, random games and the mutual-exclusion benchmark.
//!
//! The oracle builds the knowledge game explicitly (every reachable cell is
//! a Player 1 node, every `(cell, action)` pair a Player 2 node) and solves
//! it with Zielonka's recursive algorithm. It shares nothing with the
//! antichain solver apart from the game structure and its objective
//! reduction.

use std::collections::VecDeque;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;

use crate::antichain::Antichain;
use crate::cell::Cell;
use crate::error::SolveError;
use crate::game::GameStructure;
use crate::solver::transform_objective;

/// Largest game the oracle accepts, counted after objective reduction.
pub const ORACLE_LOCATION_CAP: usize = 20;

/// A two-player turn-based arena with min-parity priorities. Player 0
/// wins a play when the least priority seen infinitely often is even.
#[derive(Clone, Debug, Default)]
pub struct Arena {
    pub owner: Vec<u8>,
    pub priority: Vec<u32>,
    pub succ: Vec<Vec<usize>>,
}

impl Arena {
    pub fn add_node(&mut self, owner: u8, priority: u32) -> usize {
        self.owner.push(owner);
        self.priority.push(priority);
        self.succ.push(Vec::new());
        self.owner.len() - 1
    }

    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }

    fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut pred = vec![Vec::new(); self.len()];
        for (v, out) in self.succ.iter().enumerate() {
            for &w in out {
                pred[w].push(v);
            }
        }
        pred
    }
}

/// Nodes from which `player` can force a visit to `target` inside `alive`.
fn attractor(arena: &Arena, pred: &[Vec<usize>], alive: &[bool], target: &[usize], player: u8) -> Vec<bool> {
    let n = arena.len();
    let mut inside = vec![false; n];
    let mut remaining: Vec<usize> = (0..n)
        .map(|v| arena.succ[v].iter().filter(|&&w| alive[w]).count())
        .collect();
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &t in target {
        if alive[t] && !inside[t] {
            inside[t] = true;
            queue.push_back(t);
        }
    }
    while let Some(w) = queue.pop_front() {
        for &v in &pred[w] {
            if !alive[v] || inside[v] {
                continue;
            }
            let take = if arena.owner[v] == player {
                true
            } else {
                remaining[v] -= 1;
                remaining[v] == 0
            };
            if take {
                inside[v] = true;
                queue.push_back(v);
            }
        }
    }
    inside
}

fn zielonka_rec(arena: &Arena, pred: &[Vec<usize>], alive: &[bool]) -> [Vec<bool>; 2] {
    let n = arena.len();
    let live: Vec<usize> = (0..n).filter(|&v| alive[v]).collect();
    if live.is_empty() {
        return [vec![false; n], vec![false; n]];
    }
    let d = live.iter().map(|&v| arena.priority[v]).min().unwrap();
    let i = (d % 2) as u8;
    let top: Vec<usize> = live.iter().copied().filter(|&v| arena.priority[v] == d).collect();
    let a = attractor(arena, pred, alive, &top, i);
    let sub: Vec<bool> = (0..n).map(|v| alive[v] && !a[v]).collect();
    let w = zielonka_rec(arena, pred, &sub);
    let opp = 1 - i as usize;
    if !w[opp].iter().any(|&b| b) {
        let mut out = [vec![false; n], vec![false; n]];
        out[i as usize] = alive.to_vec();
        return out;
    }
    let opp_nodes: Vec<usize> = (0..n).filter(|&v| w[opp][v]).collect();
    let b = attractor(arena, pred, alive, &opp_nodes, opp as u8);
    let sub: Vec<bool> = (0..n).map(|v| alive[v] && !b[v]).collect();
    let mut w2 = zielonka_rec(arena, pred, &sub);
    for v in 0..n {
        if b[v] {
            w2[opp][v] = true;
        }
    }
    w2
}

/// Winning region of player 0. Every node needs a successor.
pub fn solve_zielonka(arena: &Arena) -> Vec<bool> {
    let pred = arena.predecessors();
    let alive = vec![true; arena.len()];
    let [w0, _] = zielonka_rec(arena, &pred, &alive);
    w0
}

/// The explicit knowledge game of a game structure.
#[derive(Clone, Debug)]
pub struct KnowledgeGame {
    pub arena: Arena,
    /// Cell of each Player 1 node, in node order.
    pub cells: Vec<Cell>,
    pub node_of_cell: FxHashMap<Cell, usize>,
}

pub fn knowledge_game(game: &GameStructure) -> KnowledgeGame {
    let mut kg = KnowledgeGame { arena: Arena::default(), cells: Vec::new(), node_of_cell: FxHashMap::default() };
    let mut pending: Vec<(usize, Cell)> = Vec::new();
    let init = game.initial_cell();
    let root = add_cell(game, &mut kg, init.clone());
    let mut queue = VecDeque::from([(root, init)]);
    while let Some((node, cell)) = queue.pop_front() {
        let prio = kg.arena.priority[node];
        for a in 0..game.actions().len() {
            let choice = kg.arena.add_node(1, prio);
            kg.arena.succ[node].push(choice);
            for o in game.compatible_observations(&cell, a) {
                let next = game.knowledge_update(&cell, a, o);
                pending.push((choice, next.clone()));
                if !kg.node_of_cell.contains_key(&next) {
                    let id = add_cell(game, &mut kg, next.clone());
                    queue.push_back((id, next));
                }
            }
        }
        for (choice, next) in pending.drain(..) {
            let target = kg.node_of_cell[&next];
            kg.arena.succ[choice].push(target);
        }
    }
    debug_assert!(kg.cells.len() < 1usize.checked_shl(game.num_locations() as u32).unwrap_or(usize::MAX));
    kg
}

fn add_cell(game: &GameStructure, kg: &mut KnowledgeGame, cell: Cell) -> usize {
    let prio = game.priority_of_cell(&cell).expect("knowledge stays inside one observation");
    let id = kg.arena.add_node(0, prio);
    kg.cells.push(cell.clone());
    kg.node_of_cell.insert(cell, id);
    id
}

/// Whether Player 1 surely wins from the initial cell. The objective is
/// reduced to visible parity first unless that has already been done.
pub fn oracle_solve(game: &GameStructure) -> Result<bool, SolveError> {
    let transformed;
    let game = if game.sinks().is_some() {
        game
    } else {
        transformed = transform_objective(game);
        &transformed
    };
    if game.num_locations() > ORACLE_LOCATION_CAP {
        return Err(SolveError::OracleCapacity { locations: game.num_locations(), cap: ORACLE_LOCATION_CAP });
    }
    let kg = knowledge_game(game);
    Ok(solve_zielonka(&kg.arena)[0])
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub locations: usize,
    pub actions: usize,
    pub observations: usize,
    pub max_priority: u32,
    /// Probability of each possible transition.
    pub density: f64,
    pub safe_density: f64,
    pub target_density: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: 0,
            locations: 5,
            actions: 2,
            observations: 3,
            max_priority: 3,
            density: 0.3,
            safe_density: 1.0,
            target_density: 0.0,
        }
    }
}

fn action_name(a: usize, count: usize) -> String {
    if count <= 26 {
        ((b'a' + a as u8) as char).to_string()
    } else {
        format!("a{a}")
    }
}

/// A random total game, deterministic in the configuration. The initial
/// location is `l0`.
pub fn generate_game(cfg: &GeneratorConfig) -> GameStructure {
    assert!(cfg.locations >= 1 && cfg.actions >= 1 && cfg.observations >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.locations;
    let p = cfg.observations.min(n);

    let mut obs_of: Vec<usize> = (0..n).map(|_| rng.random_range(0..p)).collect();
    for j in 0..p {
        if obs_of.contains(&j) {
            continue;
        }
        let donors: Vec<usize> = (0..n)
            .filter(|&l| obs_of.iter().filter(|&&o| o == obs_of[l]).count() > 1)
            .collect();
        let l = *donors.choose(&mut rng).expect("more locations than observations");
        obs_of[l] = j;
    }

    let mut edges = Vec::new();
    for a in 0..cfg.actions {
        for s in 0..n {
            let before = edges.len();
            for d in 0..n {
                if rng.random_bool(cfg.density.clamp(0.0, 1.0)) {
                    edges.push((s, a, d));
                }
            }
            if edges.len() == before {
                edges.push((s, a, rng.random_range(0..n)));
            }
        }
    }

    let observations = (0..p)
        .map(|j| {
            let members: Vec<usize> = (0..n).filter(|&l| obs_of[l] == j).collect();
            (format!("o{}", j + 1), members, rng.random_range(0..=cfg.max_priority))
        })
        .collect();
    let safe = (0..n).filter(|_| rng.random_bool(cfg.safe_density.clamp(0.0, 1.0))).collect();
    let target = (0..n).filter(|_| rng.random_bool(cfg.target_density.clamp(0.0, 1.0))).collect();

    GameStructure::new(
        (0..n).map(|l| format!("l{l}")).collect(),
        (0..cfg.actions).map(|a| action_name(a, cfg.actions)).collect(),
        vec![0],
        edges,
        observations,
        safe,
        target,
    )
    .expect("generated games are valid")
}

/// Game shapes used to compare the two CPre implementations: at most 8
/// locations, 3 actions and 4 observations.
pub fn cpre_corpus(seed: u64) -> GeneratorConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c0de);
    GeneratorConfig {
        seed,
        locations: rng.random_range(1..=8),
        actions: rng.random_range(1..=3),
        observations: rng.random_range(1..=4),
        max_priority: 3,
        density: rng.random_range(0.1..0.6),
        safe_density: 1.0,
        target_density: 0.0,
    }
}

/// Game shapes used to compare the solver with the oracle: at most 6
/// locations, priorities up to 3, sampled safe and target sets.
pub fn solver_corpus(seed: u64) -> GeneratorConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0a4c_1e00);
    GeneratorConfig {
        seed,
        locations: rng.random_range(2..=6),
        actions: rng.random_range(1..=3),
        observations: rng.random_range(1..=4),
        max_priority: 3,
        density: rng.random_range(0.15..0.5),
        safe_density: 0.85,
        target_density: 0.15,
    }
}

/// Up to `max_cells` uniformly random cells, reduced.
pub fn random_antichain<R: Rng>(rng: &mut R, width: usize, max_cells: usize) -> Antichain {
    let k = rng.random_range(0..=max_cells);
    let cells: Vec<Cell> = (0..k)
        .map(|_| Cell::from_indices(width, (0..width).filter(|_| rng.random_bool(0.5))))
        .collect();
    Antichain::reduce(width, cells)
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
struct MutexState {
    choice: usize,
    pc_left: u8,
    pc_right: u8,
    turn: u8,
    last_left: bool,
    switched: bool,
}

impl MutexState {
    fn flag_left(&self) -> bool {
        (2..=5).contains(&self.pc_left)
    }

    fn flag_right(&self) -> bool {
        (2..=5).contains(&self.pc_right)
    }

    fn guard(&self) -> bool {
        let (f1, f2, t) = (self.flag_left(), self.flag_right(), self.turn);
        match self.choice {
            1 => f1,
            2 => f2,
            3 => t == 1,
            4 => t == 2,
            5 => f1 && t == 2,
            6 => f1 && t == 1,
            7 => f2 && t == 1,
            _ => f2 && t == 2,
        }
    }

    fn waiting(&self) -> bool {
        (1..=3).contains(&self.pc_left)
    }

    fn name(&self) -> String {
        format!(
            "c{}_l{}_r{}_t{}_{}{}",
            self.choice,
            self.pc_left,
            self.pc_right,
            self.turn,
            if self.last_left { 'L' } else { 'R' },
            if self.switched { "s" } else { "" }
        )
    }

    fn observation_key(&self) -> (usize, u8, bool, u8, bool, bool) {
        (self.choice, self.pc_left, self.flag_right(), self.turn, self.last_left, self.switched)
    }

    /// One scheduler round: the adversary picks who moves, then the mover
    /// executes one instruction.
    fn successors(&self) -> Vec<MutexState> {
        let mut out = Vec::new();
        for left in [true, false] {
            let base = MutexState { last_left: left, switched: left != self.last_left, ..*self };
            let pc = if left { self.pc_left } else { self.pc_right };
            let next_pcs: &[u8] = match pc {
                0 => &[0, 1],
                1 => &[2],
                2 => &[3],
                3 => {
                    let blocked = if left { self.guard() } else { self.flag_left() && self.turn == 1 };
                    if blocked {
                        &[3]
                    } else {
                        &[4]
                    }
                }
                4 => &[5],
                _ => &[0],
            };
            for &next in next_pcs {
                let mut s = base;
                if left {
                    s.pc_left = next;
                    if pc == 2 {
                        s.turn = 2;
                    }
                } else {
                    s.pc_right = next;
                    if pc == 2 {
                        s.turn = 1;
                    }
                }
                out.push(s);
            }
        }
        out
    }
}

/// Two-process mutual exclusion where the left process picks its waiting
/// condition among `C1`..`C8` in its first move. Only the listed choices
/// (1 to 8) are offered as actions. The right program counter is hidden;
/// everything else is observed. Both processes in the critical section is
/// unsafe, and the left process must not wait forever under a scheduler
/// that switches infinitely often.
pub fn mutex_game(choices: &[usize]) -> GameStructure {
    assert!(!choices.is_empty() && choices.iter().all(|c| (1..=8).contains(c)));
    let actions: Vec<String> = choices.iter().map(|c| format!("C{c}")).collect();
    let mut names = vec!["init".to_string()];
    let mut index: FxHashMap<MutexState, usize> = FxHashMap::default();
    let mut states: Vec<MutexState> = Vec::new();
    let mut queue: VecDeque<usize> = VecDeque::new();
    let mut intern = |s: MutexState, states: &mut Vec<MutexState>, names: &mut Vec<String>, queue: &mut VecDeque<usize>| {
        *index.entry(s).or_insert_with(|| {
            states.push(s);
            names.push(s.name());
            queue.push_back(states.len());
            states.len()
        })
    };

    let mut edges = Vec::new();
    for (a, &c) in choices.iter().enumerate() {
        let start = MutexState { choice: c, pc_left: 0, pc_right: 0, turn: 1, last_left: true, switched: false };
        let id = intern(start, &mut states, &mut names, &mut queue);
        edges.push((0, a, id));
    }
    while let Some(id) = queue.pop_front() {
        let s = states[id - 1];
        for t in s.successors() {
            let tid = intern(t, &mut states, &mut names, &mut queue);
            for a in 0..choices.len() {
                edges.push((id, a, tid));
            }
        }
    }

    type ObservedPart = (usize, u8, bool, u8, bool, bool);
    let mut groups: FxHashMap<ObservedPart, Vec<usize>> = FxHashMap::default();
    let mut order = Vec::new();
    for (k, s) in states.iter().enumerate() {
        let key = s.observation_key();
        groups
            .entry(key)
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push(k + 1);
    }
    let mut observations = vec![("o1".to_string(), vec![0], 0)];
    for key in order {
        let members = groups.remove(&key).unwrap();
        let s = states[members[0] - 1];
        let priority = match (s.waiting(), s.switched) {
            (false, _) => 0,
            (true, true) => 1,
            (true, false) => 2,
        };
        observations.push((format!("o{}", observations.len() + 1), members, priority));
    }
    let safe: Vec<usize> = std::iter::once(0)
        .chain(
            states
                .iter()
                .enumerate()
                .filter(|(_, s)| !(s.pc_left == 4 && s.pc_right == 4))
                .map(|(k, _)| k + 1),
        )
        .collect();

    GameStructure::new(names, actions, vec![0], edges, observations, safe, Vec::new())
        .expect("mutex game is valid")
}
