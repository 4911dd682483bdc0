//! Ranked strategy tables.
//!
//! A strategy is a list of triples `(cell, rank, action)`. In knowledge
//! `s`, Player 1 plays the action of the covering triple (`s ⊆ cell`) of
//! minimal rank, ties broken by the canonical cell order and then by the
//! action index.

use std::collections::VecDeque;
use std::fmt::Write as _;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::cell::Cell;
use crate::game::GameStructure;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Triple {
    pub cell: Cell,
    pub rank: u64,
    pub action: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("no strategy triple covers the knowledge")]
pub struct NoCoveringTriple;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyTable {
    triples: Vec<Triple>,
    /// For each location, the positions of the triples containing it.
    by_location: Vec<Vec<u32>>,
}

fn table_order(a: &Triple, b: &Triple) -> std::cmp::Ordering {
    (a.rank, &a.cell, a.action).cmp(&(b.rank, &b.cell, b.action))
}

impl StrategyTable {
    /// Sorts the triples and keeps the lowest rank for each `(cell, action)`.
    pub fn new(mut triples: Vec<Triple>) -> Self {
        triples.retain(|t| !t.cell.is_empty());
        triples.sort_by(table_order);
        let mut seen: FxHashMap<(Cell, usize), ()> = FxHashMap::default();
        triples.retain(|t| seen.insert((t.cell.clone(), t.action), ()).is_none());
        Self::from_sorted(triples)
    }

    fn from_sorted(triples: Vec<Triple>) -> Self {
        let width = triples.first().map_or(0, |t| t.cell.width());
        let mut by_location = vec![Vec::new(); width];
        for (i, t) in triples.iter().enumerate() {
            for l in t.cell.iter() {
                by_location[l].push(i as u32);
            }
        }
        StrategyTable { triples, by_location }
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Position of the first covering triple in table order.
    fn find(&self, s: &Cell) -> Option<usize> {
        let Some(first) = s.first() else {
            return if self.triples.is_empty() { None } else { Some(0) };
        };
        let candidates = self.by_location.get(first)?;
        candidates
            .iter()
            .map(|&i| i as usize)
            .find(|&i| s.is_subset(&self.triples[i].cell))
    }

    /// `(action, rank)` of the covering triple of minimal rank.
    pub fn lookup(&self, s: &Cell) -> Result<(usize, u64), NoCoveringTriple> {
        self.find(s)
            .map(|i| (self.triples[i].action, self.triples[i].rank))
            .ok_or(NoCoveringTriple)
    }

    /// Rule 1: drops every triple whose cell is contained in the cell of a
    /// triple with smaller or equal rank.
    pub fn simplify_rule1(&self) -> StrategyTable {
        let mut kept: Vec<Triple> = Vec::new();
        for t in &self.triples {
            if !kept.iter().any(|k| t.cell.is_subset(&k.cell)) {
                kept.push(t.clone());
            }
        }
        Self::from_sorted(kept)
    }

    /// Rule 2: drops triple `i` when some other triple `j` with the same
    /// action has a larger cell and every triple `k ∉ {i, j}` with rank
    /// between those of `i` and `j` (inclusive) that meets the cell of `i`
    /// also plays that action.
    pub fn simplify_rule2(&self) -> StrategyTable {
        let mut t = self.triples.clone();
        let mut i = 0;
        while i < t.len() {
            if Self::rule2_applies(&t, i) {
                let removed = t.remove(i);
                i = (0..i)
                    .find(|&q| t[q].action != removed.action && t[q].cell.intersects(&removed.cell))
                    .unwrap_or(i);
            } else {
                i += 1;
            }
        }
        Self::from_sorted(t)
    }

    fn rule2_applies(t: &[Triple], i: usize) -> bool {
        let ti = &t[i];
        let mut pos = t.partition_point(|x| x.rank < ti.rank);
        while pos < t.len() {
            let rank = t[pos].rank;
            let end = pos + t[pos..].partition_point(|x| x.rank == rank);
            let group = pos..end;
            let conflict = group
                .clone()
                .any(|k| k != i && t[k].action != ti.action && t[k].cell.intersects(&ti.cell));
            if conflict {
                return false;
            }
            if group.clone().any(|j| j != i && t[j].action == ti.action && ti.cell.is_subset(&t[j].cell)) {
                return true;
            }
            pos = end;
        }
        false
    }

    /// Rule 1 followed by Rule 2.
    pub fn simplify(&self) -> StrategyTable {
        self.simplify_rule1().simplify_rule2()
    }

    /// One line per triple: `rank <r>: play <action> on {loc,...}`.
    pub fn render(&self, game: &GameStructure) -> String {
        let mut out = String::new();
        for t in &self.triples {
            let _ = writeln!(
                out,
                "rank {}: play {} on {}",
                t.rank,
                game.actions()[t.action],
                game.format_cell(&t.cell)
            );
        }
        out
    }
}

/// Checks that the strategy surely wins from `initial`: every knowledge
/// reachable under it is covered, the losing sink is never possible, and
/// every cycle of the induced knowledge graph has an even least priority.
pub fn verify_strategy(game: &GameStructure, table: &StrategyTable, initial: &Cell) -> bool {
    let lose = game.sinks().map(|s| s.lose);
    let mut graph: DiGraph<u32, ()> = DiGraph::new();
    let mut index: FxHashMap<Cell, petgraph::graph::NodeIndex> = FxHashMap::default();
    let mut queue = VecDeque::new();

    let mut visit = |cell: Cell, graph: &mut DiGraph<u32, ()>, queue: &mut VecDeque<(petgraph::graph::NodeIndex, Cell)>| {
        if let Some(&id) = index.get(&cell) {
            return Some(id);
        }
        let prio = game.priority_of_cell(&cell)?;
        let id = graph.add_node(prio);
        index.insert(cell.clone(), id);
        queue.push_back((id, cell));
        Some(id)
    };
    if initial.is_empty() || visit(initial.clone(), &mut graph, &mut queue).is_none() {
        return false;
    }
    while let Some((id, cell)) = queue.pop_front() {
        if lose.is_some_and(|l| cell.contains(l)) {
            return false;
        }
        let Ok((action, _)) = table.lookup(&cell) else {
            return false;
        };
        for o in game.compatible_observations(&cell, action) {
            let next = game.knowledge_update(&cell, action, o);
            let Some(nid) = visit(next, &mut graph, &mut queue) else {
                return false;
            };
            graph.add_edge(id, nid, ());
        }
    }

    let mut odd: Vec<u32> = graph.node_weights().copied().filter(|p| p % 2 == 1).collect();
    odd.sort_unstable();
    odd.dedup();
    for p in odd {
        let sub = graph.filter_map(|_, &w| (w >= p).then_some(w), |_, _| Some(()));
        for scc in tarjan_scc(&sub) {
            let cyclic = scc.len() > 1 || sub.contains_edge(scc[0], scc[0]);
            if cyclic && scc.iter().any(|&v| sub[v] == p) {
                return false;
            }
        }
    }
    true
}
