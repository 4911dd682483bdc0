//! Antichain fixpoint solver for visible parity objectives.
//!
//! The general objective "reach TARGET, or stay in SAFE forever while
//! satisfying the parity condition" is first reduced to pure visible parity
//! by [`transform_objective`]. The winning cells are then the nested
//! fixpoint
//!
//! ```text
//! W = νX0 · μX1 · νX2 · ... ⊔_i (P_i ⊓ CPre(X_i))
//! ```
//!
//! with `P_i` the observations of priority `i`. Once `W` is known a last
//! evaluation records, for every cell of every approximant, the action
//! witnessing its `CPre` membership and a rank made of the iteration
//! counters of the least fixpoints.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use log::{debug, trace};

use crate::antichain::Antichain;
use crate::cell::Cell;
use crate::cpre::{make_cpre_with, ControllablePredecessor, CpreKind, VarOrder};
use crate::error::SolveError;
use crate::game::{GameStructure, ObjectiveSinks};
use crate::strategy::{StrategyTable, Triple};

/// Antichains derived from the priorities and the safe/target sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Objective {
    /// `priority_classes[i]` holds the observations of priority `i`.
    pub priority_classes: Vec<Antichain>,
    /// `{γ(o) ∩ SAFE}`.
    pub safe_cells: Antichain,
    /// `{γ(o) ∩ TARGET}`.
    pub target_cells: Antichain,
}

impl Objective {
    pub fn of(game: &GameStructure) -> Self {
        let n = game.num_locations();
        let d = game.max_priority() as usize;
        let mut classes = vec![Vec::new(); d + 1];
        for o in game.observations() {
            classes[o.priority as usize].push(o.members.clone());
        }
        let obs = game.observations().iter();
        Objective {
            priority_classes: classes.into_iter().map(|c| Antichain::reduce(n, c)).collect(),
            safe_cells: Antichain::reduce(n, obs.clone().map(|o| o.members.intersection(game.safe()))),
            target_cells: Antichain::reduce(n, obs.map(|o| o.members.intersection(game.target()))),
        }
    }
}

fn fresh_name(game: &GameStructure, base: &str) -> String {
    let taken = |s: &str| game.location_index(s).is_some() || game.observation_index(s).is_some();
    if !taken(base) {
        return base.to_string();
    }
    (1..).map(|k| format!("{base}_{k}")).find(|s| !taken(s)).unwrap()
}

/// Reduces the objective to visible parity. Two absorbing locations are
/// appended: `WIN`, alone in an observation of priority 0, and `LOSE`,
/// alone in an observation of priority 1. Transitions leaving a target
/// location go to `WIN`; transitions leaving or entering an unsafe
/// non-target location go to `LOSE`. Leaving the safe set before reaching
/// the target therefore loses. Target locations count as safe afterwards.
pub fn transform_objective(game: &GameStructure) -> GameStructure {
    let n = game.num_locations();
    let (win, lose) = (n, n + 1);
    let win_name = fresh_name(game, "WIN");
    let lose_name = fresh_name(game, "LOSE");
    let bad = |l: usize| !game.safe().contains(l) && !game.target().contains(l);
    let loops: Vec<(usize, usize, usize)> = (0..game.actions().len())
        .flat_map(|a| [(win, a, win), (lose, a, lose)])
        .collect();
    let (locations, edges, observations) = game.extend(
        &[&win_name, &lose_name],
        &loops,
        vec![(win_name.clone(), vec![win], 0), (lose_name.clone(), vec![lose], 1)],
        |s, _, d| {
            Some(if game.target().contains(s) {
                win
            } else if bad(s) || bad(d) {
                lose
            } else {
                d
            })
        },
    );
    let safe = game.safe().union(game.target()).widened(n + 2).iter().chain([win]).collect();
    let target = game.target().widened(n + 2).iter().chain([win]).collect();
    let mut out = GameStructure::new(
        locations,
        game.actions().to_vec(),
        game.initial().to_vec(),
        edges,
        observations,
        safe,
        target,
    )
    .expect("objective reduction preserves validity");
    out.set_sinks(ObjectiveSinks { win, lose });
    out
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    /// Approximants computed across all fixpoint levels.
    pub iterations: usize,
    pub cpre_calls: usize,
    pub encode_time: Duration,
    pub solve_time: Duration,
    pub simplify_time: Duration,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    /// Maximal winning cells.
    pub winning: Antichain,
    pub strategy: StrategyTable,
    pub stats: SolveStats,
}

impl SolveResult {
    pub fn initial_winning(&self, game: &GameStructure) -> bool {
        self.winning.contains(&game.initial_cell())
    }
}

/// Nested fixpoint formula: one level per entry, outermost first, with a
/// constant joined to the body.
struct Formula {
    /// `(greatest, class)` per level.
    levels: Vec<(bool, Antichain)>,
    constant: Antichain,
}

struct Evaluator<'a, 'g> {
    cpre: &'a mut (dyn ControllablePredecessor + 'g),
    formula: &'a Formula,
    width: usize,
    stats: SolveStats,
}

impl Evaluator<'_, '_> {
    fn step(&mut self, j: usize, x: &Antichain) -> Antichain {
        let class = &self.formula.levels[j].1;
        if class.is_empty() || x.is_empty() {
            return Antichain::empty(self.width);
        }
        self.stats.cpre_calls += 1;
        self.cpre.cpre_within(x, Some(class))
    }

    fn eval(&mut self, j: usize, outer: &Antichain) -> Antichain {
        if j == self.formula.levels.len() {
            return outer.clone();
        }
        let greatest = self.formula.levels[j].0;
        let mut x = if greatest { Antichain::top(self.width) } else { Antichain::empty(self.width) };
        loop {
            self.stats.iterations += 1;
            let t = self.step(j, &x);
            let next = self.eval(j + 1, &outer.union(&t));
            trace!("level {j}: {} cells", next.len());
            if next == x {
                return x;
            }
            debug_assert!(if greatest { next.leq(&x) } else { x.leq(&next) }, "non-monotone approximant");
            x = next;
        }
    }

    /// Per-action `CPre` of `x` within the class of level `j`, with each
    /// maximal cell credited to the smallest action containing it.
    fn witnesses(&mut self, j: usize, x: &Antichain, counters: &[u64], out: &mut Vec<(Vec<u64>, Triple)>) -> Antichain {
        let class = &self.formula.levels[j].1;
        if class.is_empty() || x.is_empty() {
            return Antichain::empty(self.width);
        }
        let actions = self.cpre.game().actions().len();
        let per_action: Vec<Antichain> = (0..actions)
            .map(|a| {
                self.stats.cpre_calls += 1;
                self.cpre.cpre_action(a, x, Some(class))
            })
            .collect();
        let mut t = Antichain::empty(self.width);
        for p in &per_action {
            t = t.union(p);
        }
        for cell in &t {
            let action = per_action.iter().position(|p| p.contains(cell)).unwrap();
            out.push((counters.to_vec(), Triple { cell: cell.clone(), rank: 0, action }));
        }
        t
    }

    fn record(&mut self, j: usize, outer: &Antichain, counters: &mut Vec<u64>, out: &mut Vec<(Vec<u64>, Triple)>) -> Antichain {
        if j == self.formula.levels.len() {
            return outer.clone();
        }
        if self.formula.levels[j].0 {
            let v = self.eval(j, outer);
            counters.push(0);
            let t = self.witnesses(j, &v, counters, out);
            let inner = self.record(j + 1, &outer.union(&t), counters, out);
            counters.pop();
            debug_assert_eq!(inner, v);
            v
        } else {
            let mut x = Antichain::empty(self.width);
            let mut k = 0;
            loop {
                k += 1;
                counters.push(k);
                let t = self.witnesses(j, &x, counters, out);
                let next = self.record(j + 1, &outer.union(&t), counters, out);
                counters.pop();
                if next == x {
                    return x;
                }
                x = next;
            }
        }
    }
}

fn flatten_ranks(recorded: Vec<(Vec<u64>, Triple)>) -> Result<Vec<Triple>, SolveError> {
    let depth = recorded.iter().map(|(c, _)| c.len()).max().unwrap_or(0);
    let mut bases = vec![1u64; depth];
    for (c, _) in &recorded {
        for (i, &v) in c.iter().enumerate() {
            bases[i] = bases[i].max(v.checked_add(1).ok_or(SolveError::RankOverflow)?);
        }
    }
    recorded
        .into_iter()
        .map(|(c, mut t)| {
            let mut rank: u64 = 0;
            for (i, base) in bases.iter().enumerate() {
                let v = c.get(i).copied().unwrap_or(0);
                rank = rank
                    .checked_mul(*base)
                    .and_then(|r| r.checked_add(v))
                    .ok_or(SolveError::RankOverflow)?;
            }
            t.rank = rank;
            Ok(t)
        })
        .collect()
}

fn solve_formula(cpre: &mut dyn ControllablePredecessor, formula: Formula) -> Result<SolveResult, SolveError> {
    let start = Instant::now();
    let width = cpre.game().num_locations();
    let mut ev = Evaluator { cpre, formula: &formula, width, stats: SolveStats::default() };
    let winning = ev.eval(0, &formula.constant);
    debug!("winning antichain has {} cells after {} iterations", winning.len(), ev.stats.iterations);

    let mut recorded: Vec<(Vec<u64>, Triple)> = formula
        .constant
        .iter()
        .map(|c| (Vec::new(), Triple { cell: c.clone(), rank: 0, action: 0 }))
        .collect();
    let replay = ev.record(0, &formula.constant, &mut Vec::new(), &mut recorded);
    debug_assert_eq!(replay, winning);
    let mut stats = ev.stats;
    let strategy = StrategyTable::new(flatten_ranks(recorded)?);
    stats.solve_time = start.elapsed();
    Ok(SolveResult { winning, strategy, stats })
}

/// Solves a game whose objective has been reduced to visible parity.
pub fn solve_parity(cpre: &mut dyn ControllablePredecessor) -> Result<SolveResult, SolveError> {
    let objective = Objective::of(cpre.game());
    let width = cpre.game().num_locations();
    let levels = objective
        .priority_classes
        .into_iter()
        .enumerate()
        .map(|(i, class)| (i % 2 == 0, class))
        .collect();
    solve_formula(cpre, Formula { levels, constant: Antichain::empty(width) })
}

/// `μX · targetCells ⊔ (safeCells ⊓ CPre(X))`.
pub fn solve_reach_and_safe(cpre: &mut dyn ControllablePredecessor) -> Result<SolveResult, SolveError> {
    let objective = Objective::of(cpre.game());
    solve_formula(
        cpre,
        Formula { levels: vec![(false, objective.safe_cells)], constant: objective.target_cells },
    )
}

/// `νX · targetCells ⊔ (safeCells ⊓ CPre(X))`.
pub fn solve_reach_or_safe(cpre: &mut dyn ControllablePredecessor) -> Result<SolveResult, SolveError> {
    let objective = Objective::of(cpre.game());
    solve_formula(
        cpre,
        Formula { levels: vec![(true, objective.safe_cells)], constant: objective.target_cells },
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolveOptions {
    pub cpre: CpreKind,
    pub simplify: bool,
    pub var_order: VarOrder,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { cpre: CpreKind::Symbolic, simplify: true, var_order: VarOrder::default() }
    }
}

/// A solved game: the reduced game, the result, and the displayed strategy.
#[derive(Clone, Debug)]
pub struct Solution {
    pub game: GameStructure,
    pub result: SolveResult,
    pub initial_winning: bool,
}

impl Solution {
    fn is_sink_cell(&self, cell: &Cell) -> bool {
        self.game.sinks().is_some_and(|s| cell.contains(s.win) || cell.contains(s.lose))
    }

    /// Maximal winning cells, without the cells added by objective reduction.
    pub fn reported_cells(&self) -> Vec<&Cell> {
        self.result.winning.iter().filter(|c| !self.is_sink_cell(c)).collect()
    }

    /// Strategy triples, without those on cells added by objective reduction.
    pub fn reported_triples(&self) -> Vec<&Triple> {
        self.result.strategy.triples().iter().filter(|t| !self.is_sink_cell(&t.cell)).collect()
    }

    /// Verdict, maximal winning cells and strategy as printed by the tool.
    pub fn render(&self) -> String {
        let g = &self.game;
        let mut out = String::new();
        let _ = writeln!(out, "WINNING: {}", if self.initial_winning { "yes" } else { "no" });
        let _ = writeln!(out, "MAXIMAL WINNING CELLS:");
        for c in self.reported_cells() {
            let _ = writeln!(out, "{}", g.format_cell(c));
        }
        let _ = writeln!(out, "STRATEGY:");
        for t in self.reported_triples() {
            let _ = writeln!(out, "rank {}: play {} on {}", t.rank, g.actions()[t.action], g.format_cell(&t.cell));
        }
        out
    }
}

/// Reduces the objective, solves, and simplifies the strategy on request.
pub fn solve_game(game: &GameStructure, options: SolveOptions) -> Result<Solution, SolveError> {
    let reduced = transform_objective(game);
    let encode_start = Instant::now();
    let mut cpre = make_cpre_with(&reduced, options.cpre, options.var_order)?;
    let encode_time = encode_start.elapsed();
    let mut result = solve_parity(cpre.as_mut())?;
    drop(cpre);
    result.stats.encode_time = encode_time;
    if options.simplify {
        let start = Instant::now();
        result.strategy = result.strategy.simplify();
        result.stats.simplify_time = start.elapsed();
    }
    let initial_winning = result.initial_winning(&reduced);
    Ok(Solution { game: reduced, result, initial_winning })
}
