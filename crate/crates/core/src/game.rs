//! Game structures with imperfect information and their text format.
//!
//! Locations are observed through a partition into observations; priorities
//! sit on observations (visible parity). The text format is line based:
//!
//! ```text
//! ALPHABET : a
//! STATES : 1, 2,3
//! INIT : 1
//! SAFE : 1,2,3
//! TARGET : 2
//! TRANS :
//! 1, 1 , a
//! 1,2, a
//! 2, 3, a
//! 3, 3,a
//! OBS :
//! 1:1
//! 2:1
//! 3:0
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::cell::Cell;
use crate::error::GameError;

/// Name of the location added by totalization. Reserved in user input.
pub const SINK: &str = "SINK";

type Edge = (usize, usize, usize);
type ObservationDef = (String, Vec<usize>, u32);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observation {
    pub id: String,
    pub members: Cell,
    pub priority: u32,
}

/// Absorbing locations added when the objective is reduced to visible parity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ObjectiveSinks {
    pub win: usize,
    pub lose: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameStructure {
    locations: Vec<String>,
    actions: Vec<String>,
    initial: Vec<usize>,
    /// Successor cells indexed by `[action][location]`.
    succ: Vec<Vec<Cell>>,
    observations: Vec<Observation>,
    obs_of: Vec<usize>,
    safe: Cell,
    target: Cell,
    sinks: Option<ObjectiveSinks>,
}

#[derive(Clone, Debug)]
pub struct ParseReport {
    pub game: GameStructure,
    /// One entry per transition added by totalization.
    pub warnings: Vec<String>,
}

impl GameStructure {
    /// Builds and validates a game. Transitions are `(source, action, target)`
    /// index triples; observations are `(id, members, priority)`. Totality
    /// is not required here, see [`GameStructure::missing_transitions`].
    pub fn new(
        locations: Vec<String>,
        actions: Vec<String>,
        initial: Vec<usize>,
        transitions: impl IntoIterator<Item = (usize, usize, usize)>,
        observations: Vec<(String, Vec<usize>, u32)>,
        safe: Vec<usize>,
        target: Vec<usize>,
    ) -> Result<Self, GameError> {
        let n = locations.len();
        if n == 0 {
            return Err(GameError::NoStates);
        }
        if actions.is_empty() {
            return Err(GameError::EmptyAlphabet);
        }
        check_unique(&locations)?;
        check_unique(&actions)?;

        let mut succ = vec![vec![Cell::empty(n); n]; actions.len()];
        for (src, act, dst) in transitions {
            if src >= n || dst >= n || act >= actions.len() {
                return Err(GameError::Invalid(format!(
                    "transition ({src}, {act}, {dst}) out of range"
                )));
            }
            succ[act][src].insert(dst);
        }

        const UNASSIGNED: usize = usize::MAX;
        let mut obs_of = vec![UNASSIGNED; n];
        let mut obs = Vec::with_capacity(observations.len());
        for (k, (id, members, priority)) in observations.into_iter().enumerate() {
            if members.is_empty() {
                return Err(GameError::Invalid(format!("observation {id} has no members")));
            }
            for &m in &members {
                if m >= n {
                    return Err(GameError::Invalid(format!("observation {id}: location {m} out of range")));
                }
                if obs_of[m] != UNASSIGNED {
                    return Err(GameError::ObservationOverlap {
                        line: None,
                        state: locations[m].clone(),
                    });
                }
                obs_of[m] = k;
            }
            obs.push(Observation {
                id,
                members: Cell::from_indices(n, members),
                priority,
            });
        }
        if let Some(l) = obs_of.iter().position(|&o| o == UNASSIGNED) {
            return Err(GameError::Unobserved(locations[l].clone()));
        }

        if initial.is_empty() {
            return Err(GameError::Invalid("no initial location".into()));
        }
        if initial.iter().any(|&l| l >= n) {
            return Err(GameError::Invalid("initial location out of range".into()));
        }
        if initial.iter().any(|&l| obs_of[l] != obs_of[initial[0]]) {
            return Err(GameError::InitialSpansObservations);
        }
        if safe.iter().chain(target.iter()).any(|&l| l >= n) {
            return Err(GameError::Invalid("safe/target location out of range".into()));
        }

        let mut initial = initial;
        initial.sort_unstable();
        initial.dedup();

        Ok(GameStructure {
            locations,
            actions,
            initial,
            succ,
            observations: obs,
            obs_of,
            safe: Cell::from_indices(n, safe),
            target: Cell::from_indices(n, target),
            sinks: None,
        })
    }

    pub fn num_locations(&self) -> usize {
        self.locations.len()
    }

    pub fn locations(&self) -> &[String] {
        &self.locations
    }

    pub fn location_name(&self, l: usize) -> &str {
        &self.locations[l]
    }

    pub fn location_index(&self, name: &str) -> Option<usize> {
        self.locations.iter().position(|l| l == name)
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|a| a == name)
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn observation_index(&self, id: &str) -> Option<usize> {
        self.observations.iter().position(|o| o.id == id)
    }

    /// Index of the observation containing location `l`.
    pub fn observation_of(&self, l: usize) -> usize {
        self.obs_of[l]
    }

    pub fn initial(&self) -> &[usize] {
        &self.initial
    }

    pub fn initial_cell(&self) -> Cell {
        Cell::from_indices(self.num_locations(), self.initial.iter().copied())
    }

    pub fn safe(&self) -> &Cell {
        &self.safe
    }

    pub fn target(&self) -> &Cell {
        &self.target
    }

    pub fn sinks(&self) -> Option<ObjectiveSinks> {
        self.sinks
    }

    pub fn successors(&self, action: usize, l: usize) -> &Cell {
        &self.succ[action][l]
    }

    pub fn max_priority(&self) -> u32 {
        self.observations.iter().map(|o| o.priority).max().unwrap_or(0)
    }

    /// Priority of a non-empty cell lying inside a single observation.
    pub fn priority_of_cell(&self, cell: &Cell) -> Option<u32> {
        let first = cell.first()?;
        let o = &self.observations[self.obs_of[first]];
        cell.is_subset(&o.members).then_some(o.priority)
    }

    /// All transitions as `(source, action, target)`, ordered by source,
    /// then action, then target.
    pub fn transitions(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        (0..self.num_locations()).flat_map(move |l| {
            (0..self.actions.len())
                .flat_map(move |a| self.succ[a][l].iter().map(move |d| (l, a, d)))
        })
    }

    /// `(location, action)` pairs without successor.
    pub fn missing_transitions(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for l in 0..self.num_locations() {
            for a in 0..self.actions.len() {
                if self.succ[a][l].is_empty() {
                    out.push((l, a));
                }
            }
        }
        out
    }

    pub fn is_total(&self) -> bool {
        self.succ.iter().all(|row| row.iter().all(|c| !c.is_empty()))
    }

    /// `post_σ(s)`: all successors of locations in `s` under `action`.
    pub fn post(&self, s: &Cell, action: usize) -> Cell {
        let mut out = Cell::empty(self.num_locations());
        for l in s.iter() {
            out.union_with(&self.succ[action][l]);
        }
        out
    }

    /// Knowledge after playing `action` and receiving observation `obs`.
    /// Empty when `obs` cannot be received.
    pub fn knowledge_update(&self, s: &Cell, action: usize, obs: usize) -> Cell {
        let mut post = self.post(s, action);
        post.intersect_with(&self.observations[obs].members);
        post
    }

    /// Observations that may be received after playing `action` in `s`, in
    /// declaration order.
    pub fn compatible_observations(&self, s: &Cell, action: usize) -> Vec<usize> {
        let post = self.post(s, action);
        let mut seen: Vec<usize> = post.iter().map(|l| self.obs_of[l]).collect();
        seen.sort_unstable();
        seen.dedup();
        seen
    }

    /// `{id1,id2,...}` with location names in declaration order.
    pub fn format_cell(&self, cell: &Cell) -> String {
        let names: Vec<&str> = cell.iter().map(|l| self.locations[l].as_str()).collect();
        format!("{{{}}}", names.join(","))
    }

    pub fn cell_names(&self, cell: &Cell) -> Vec<String> {
        cell.iter().map(|l| self.locations[l].clone()).collect()
    }

    /// Prints the game in the input format. `parse_game` reads it back.
    pub fn render(&self) -> String {
        let names = |cell: &Cell| -> String {
            cell.iter()
                .map(|l| self.locations[l].as_str())
                .collect::<Vec<_>>()
                .join(", ")
        };
        let mut out = String::new();
        let _ = writeln!(out, "ALPHABET : {}", self.actions.join(", "));
        let _ = writeln!(out, "STATES : {}", self.locations.join(", "));
        let _ = writeln!(out, "INIT : {}", names(&self.initial_cell()));
        let _ = writeln!(out, "SAFE : {}", names(&self.safe));
        let _ = writeln!(out, "TARGET : {}", names(&self.target));
        let _ = writeln!(out, "TRANS :");
        for (s, a, d) in self.transitions() {
            let _ = writeln!(out, "{}, {}, {}", self.locations[s], self.locations[d], self.actions[a]);
        }
        let _ = writeln!(out, "OBS :");
        for o in &self.observations {
            let _ = writeln!(out, "{} : {}", names(&o.members), o.priority);
        }
        out
    }

    /// Re-embeds the game with `extra` fresh locations appended. Used by
    /// totalization and objective reduction.
    pub(crate) fn extend(
        &self,
        extra_locations: &[&str],
        extra_edges: &[(usize, usize, usize)],
        extra_observations: Vec<(String, Vec<usize>, u32)>,
        edge_filter: impl Fn(usize, usize, usize) -> Option<usize>,
    ) -> (Vec<String>, Vec<Edge>, Vec<ObservationDef>) {
        let mut locations = self.locations.clone();
        locations.extend(extra_locations.iter().map(|s| s.to_string()));
        let mut edges: Vec<(usize, usize, usize)> = self
            .transitions()
            .filter_map(|(s, a, d)| edge_filter(s, a, d).map(|d2| (s, a, d2)))
            .collect();
        edges.extend_from_slice(extra_edges);
        let mut observations: Vec<(String, Vec<usize>, u32)> = self
            .observations
            .iter()
            .map(|o| (o.id.clone(), o.members.iter().collect(), o.priority))
            .collect();
        observations.extend(extra_observations);
        (locations, edges, observations)
    }

    pub(crate) fn set_sinks(&mut self, sinks: ObjectiveSinks) {
        self.sinks = Some(sinks);
    }
}

fn check_unique(names: &[String]) -> Result<(), GameError> {
    let mut seen = HashMap::new();
    for n in names {
        if seen.insert(n.as_str(), ()).is_some() {
            return Err(GameError::DuplicateName { line: None, name: n.clone() });
        }
    }
    Ok(())
}

/// Completes the transition relation with an absorbing `SINK` location of
/// priority 1. Returns the game unchanged when it is already total.
pub fn totalize_game(game: &GameStructure) -> ParseReport {
    let missing = game.missing_transitions();
    if missing.is_empty() {
        return ParseReport { game: game.clone(), warnings: Vec::new() };
    }
    let sink = game.num_locations();
    let mut extra: Vec<(usize, usize, usize)> =
        missing.iter().map(|&(l, a)| (l, a, sink)).collect();
    extra.extend((0..game.actions.len()).map(|a| (sink, a, sink)));
    let sink_obs = (format!("o{}", game.observations.len() + 1), vec![sink], 1);
    let (locations, edges, observations) = game.extend(&[SINK], &extra, vec![sink_obs], |_, _, d| Some(d));
    let mut totalized = GameStructure::new(
        locations,
        game.actions.clone(),
        game.initial.clone(),
        edges,
        observations,
        game.safe.widened(sink + 1).iter().chain([sink]).collect(),
        game.target.iter().collect(),
    )
    .expect("totalization preserves validity");
    totalized.sinks = game.sinks;
    let warnings = missing
        .iter()
        .map(|&(l, a)| format!("added transition {}, {}, {}", game.locations[l], SINK, game.actions[a]))
        .collect();
    ParseReport { game: totalized, warnings }
}

const KEYWORDS: [&str; 7] = ["ALPHABET", "STATES", "INIT", "SAFE", "TARGET", "TRANS", "OBS"];

#[derive(Clone, Copy, PartialEq, Eq)]
enum Block {
    Header,
    Trans,
    Obs,
}

/// Parses a game file. With `totalize` the transition relation is completed
/// (see [`totalize_game`]); without it a non-total relation is an error.
pub fn parse_game(text: &str, totalize: bool) -> Result<ParseReport, GameError> {
    let mut seen: [Option<usize>; 7] = [None; 7];
    let mut last_keyword: Option<usize> = None;
    let mut block = Block::Header;

    let mut actions: Vec<String> = Vec::new();
    let mut locations: Vec<String> = Vec::new();
    let mut action_ix: HashMap<String, usize> = HashMap::new();
    let mut location_ix: HashMap<String, usize> = HashMap::new();
    let mut initial: Vec<usize> = Vec::new();
    let mut safe: Option<Vec<usize>> = None;
    let mut target: Vec<usize> = Vec::new();
    let mut edges: Vec<(usize, usize, usize)> = Vec::new();
    let mut observations: Vec<(String, Vec<usize>, u32)> = Vec::new();
    let mut observed: HashMap<usize, usize> = HashMap::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }

        if let Some((head, rest)) = content.split_once(':') {
            if let Some(k) = KEYWORDS.iter().position(|kw| *kw == head.trim()) {
                let keyword = KEYWORDS[k];
                if seen[k].is_some() {
                    return Err(GameError::DuplicateSection { line, keyword });
                }
                let states_missing = k > 1 && seen[1].is_none();
                if states_missing || last_keyword.is_some_and(|prev| prev > k) {
                    return Err(GameError::SectionOrder { line, keyword });
                }
                seen[k] = Some(line);
                last_keyword = Some(k);
                let rest = rest.trim();
                block = Block::Header;
                match keyword {
                    "ALPHABET" => {
                        actions = tokens(rest, line, false)?;
                        for (ix, a) in actions.iter().enumerate() {
                            if action_ix.insert(a.clone(), ix).is_some() {
                                return Err(GameError::DuplicateName { line: Some(line), name: a.clone() });
                            }
                        }
                    }
                    "STATES" => {
                        locations = tokens(rest, line, false)?;
                        for (ix, s) in locations.iter().enumerate() {
                            if location_ix.insert(s.clone(), ix).is_some() {
                                return Err(GameError::DuplicateName { line: Some(line), name: s.clone() });
                            }
                        }
                    }
                    "INIT" => initial = resolve(&tokens(rest, line, false)?, &location_ix, line)?,
                    "SAFE" => safe = Some(resolve(&tokens(rest, line, true)?, &location_ix, line)?),
                    "TARGET" => target = resolve(&tokens(rest, line, true)?, &location_ix, line)?,
                    "TRANS" | "OBS" => {
                        if !rest.is_empty() {
                            return Err(GameError::Syntax {
                                line,
                                message: format!("{keyword} must stand on its own line"),
                            });
                        }
                        block = if keyword == "TRANS" { Block::Trans } else { Block::Obs };
                    }
                    _ => unreachable!(),
                }
                continue;
            }
        }

        match block {
            Block::Header => {
                return Err(GameError::Syntax {
                    line,
                    message: format!("unexpected line `{content}` outside TRANS and OBS"),
                })
            }
            Block::Trans => {
                let parts = tokens(content, line, false)?;
                let [src, dst, label] = parts.as_slice() else {
                    return Err(GameError::Syntax {
                        line,
                        message: "transition must read `source, target, label`".into(),
                    });
                };
                let s = state(src, &location_ix, line)?;
                let d = state(dst, &location_ix, line)?;
                let a = *action_ix
                    .get(label)
                    .ok_or_else(|| GameError::UnknownLabel { line, name: label.clone() })?;
                edges.push((s, a, d));
            }
            Block::Obs => {
                let Some((members, priority)) = content.rsplit_once(':') else {
                    return Err(GameError::Syntax {
                        line,
                        message: "observation must read `s1,...,sk : priority`".into(),
                    });
                };
                let priority = priority.trim();
                let priority: u32 = priority
                    .parse()
                    .map_err(|_| GameError::MalformedPriority { line, text: priority.to_string() })?;
                let members = resolve(&tokens(members, line, false)?, &location_ix, line)?;
                let k = observations.len();
                for &m in &members {
                    if observed.insert(m, k).is_some() {
                        return Err(GameError::ObservationOverlap {
                            line: Some(line),
                            state: locations[m].clone(),
                        });
                    }
                }
                observations.push((format!("o{}", k + 1), members, priority));
            }
        }
    }

    for (k, kw) in KEYWORDS.iter().enumerate() {
        if seen[k].is_none() && !matches!(*kw, "SAFE" | "TARGET") {
            return Err(GameError::MissingSection(kw));
        }
    }

    let n = locations.len();
    let game = GameStructure::new(
        locations,
        actions,
        initial,
        edges,
        observations,
        safe.unwrap_or_else(|| (0..n).collect()),
        target,
    )?;

    if totalize {
        Ok(totalize_game(&game))
    } else if let Some(&(l, a)) = game.missing_transitions().first() {
        Err(GameError::NotTotal {
            state: game.locations[l].clone(),
            label: game.actions[a].clone(),
        })
    } else {
        Ok(ParseReport { game, warnings: Vec::new() })
    }
}

fn tokens(list: &str, line: usize, allow_empty: bool) -> Result<Vec<String>, GameError> {
    if list.trim().is_empty() {
        return if allow_empty {
            Ok(Vec::new())
        } else {
            Err(GameError::Syntax { line, message: "expected a comma-separated list".into() })
        };
    }
    list.split(',')
        .map(|t| {
            let t = t.trim();
            if t.is_empty() {
                Err(GameError::Syntax { line, message: "empty name in list".into() })
            } else if t.contains(char::is_whitespace) || t.contains(':') {
                Err(GameError::Syntax { line, message: format!("invalid name `{t}`") })
            } else if t == SINK {
                Err(GameError::ReservedName { line, name: t.to_string() })
            } else {
                Ok(t.to_string())
            }
        })
        .collect()
}

fn state(name: &str, ix: &HashMap<String, usize>, line: usize) -> Result<usize, GameError> {
    ix.get(name)
        .copied()
        .ok_or_else(|| GameError::UnknownState { line, name: name.to_string() })
}

fn resolve(names: &[String], ix: &HashMap<String, usize>, line: usize) -> Result<Vec<usize>, GameError> {
    names.iter().map(|n| state(n, ix, line)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const EXAMPLE: &str = "ALPHABET : a \nSTATES : 1, 2,3\nINIT : 1\nSAFE : 1,2,3\nTARGET : 2\nTRANS : \n1, 1 , a\n1,2, a\n2, 3, a\n3, 3,a\nOBS :\n1:1\n2:1\n3:0\n";

    fn example() -> GameStructure {
        parse_game(EXAMPLE, true).unwrap().game
    }

    fn cell(g: &GameStructure, names: &[&str]) -> Cell {
        Cell::from_indices(g.num_locations(), names.iter().map(|n| g.location_index(n).unwrap()))
    }

    #[test]
    fn sections_before_states_are_out_of_order() {
        let text = "ALPHABET : a\nINIT : 1\nSTATES : 1\nTRANS :\n1,1,a\nOBS :\n1 : 0\n";
        assert_eq!(parse_game(text, true).unwrap_err(), GameError::SectionOrder { line: 2, keyword: "INIT" });
    }

    #[test]
    fn parses_example() {
        let report = parse_game(EXAMPLE, true).unwrap();
        assert!(report.warnings.is_empty());
        let g = report.game;
        assert_eq!(g.num_locations(), 3);
        assert_eq!(g.actions(), &["a".to_string()]);
        let prios: Vec<u32> = g.observations().iter().map(|o| o.priority).collect();
        assert_eq!(prios, vec![1, 1, 0]);
        assert_eq!(g.target(), &cell(&g, &["2"]));
        assert_eq!(g.safe(), &cell(&g, &["1", "2", "3"]));
        assert_eq!(g.initial(), &[0]);
        assert!(g.is_total());
    }

    #[test]
    fn rejects_overlapping_observations() {
        let text = EXAMPLE.replace("2:1\n3:0", "2:1\n2,3:0");
        match parse_game(&text, true) {
            Err(GameError::ObservationOverlap { line: Some(14), state }) => assert_eq!(state, "2"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_unobserved_state() {
        let text = EXAMPLE.replace("3:0\n", "");
        assert!(matches!(parse_game(&text, true), Err(GameError::Unobserved(s)) if s == "3"));
    }

    #[test]
    fn rejects_reserved_and_unknown_names() {
        let text = EXAMPLE.replace("STATES : 1, 2,3", "STATES : 1, 2,3, SINK");
        assert!(matches!(parse_game(&text, true), Err(GameError::ReservedName { line: 2, .. })));
        let text = EXAMPLE.replace("2, 3, a", "2, 4, a");
        assert!(matches!(parse_game(&text, true), Err(GameError::UnknownState { line: 9, .. })));
        let text = EXAMPLE.replace("2, 3, a", "2, 3, b");
        assert!(matches!(parse_game(&text, true), Err(GameError::UnknownLabel { line: 9, .. })));
    }

    #[test]
    fn rejects_bad_priority_and_keywords() {
        let text = EXAMPLE.replace("3:0", "3:zero");
        assert!(matches!(parse_game(&text, true), Err(GameError::MalformedPriority { line: 14, .. })));
        let text = EXAMPLE.replace("INIT : 1\n", "");
        assert!(matches!(parse_game(&text, true), Err(GameError::MissingSection("INIT"))));
        let text = format!("{EXAMPLE}INIT : 2\n");
        assert!(matches!(parse_game(&text, true), Err(GameError::DuplicateSection { keyword: "INIT", .. })));
        let text = EXAMPLE.replace("1,2, a", "1 2, a");
        assert!(matches!(parse_game(&text, true), Err(GameError::Syntax { line: 8, .. })));
    }

    #[test]
    fn comments_blank_lines_and_defaults() {
        let text = "# header\nALPHABET : a # one action\n\nSTATES : x\nINIT : x\nTRANS :\nx, x, a\n\nOBS :\nx : 0 # even\n";
        let g = parse_game(text, false).unwrap().game;
        assert_eq!(g.safe().len(), 1);
        assert!(g.target().is_empty());
    }

    #[test]
    fn multiple_initial_states_share_an_observation() {
        let text = EXAMPLE.replace("INIT : 1", "INIT : 1, 2").replace("1:1\n2:1", "1,2:1");
        let g = parse_game(&text, true).unwrap().game;
        assert_eq!(g.initial(), &[0, 1]);
        let text = EXAMPLE.replace("INIT : 1", "INIT : 1, 3");
        assert!(matches!(parse_game(&text, true), Err(GameError::InitialSpansObservations)));
    }

    #[test]
    fn totalization_adds_sink() {
        let text = "ALPHABET : a, b\nSTATES : 1, 2\nINIT : 1\nTRANS :\n1, 2, a\n1, 1, b\n2, 2, a\nOBS :\n1 : 0\n2 : 0\n";
        let report = parse_game(text, true).unwrap();
        let g = &report.game;
        assert_eq!(report.warnings, vec!["added transition 2, SINK, b".to_string()]);
        let sink = g.location_index(SINK).unwrap();
        let b = g.action_index("b").unwrap();
        assert_eq!(g.successors(b, 1), &Cell::from_indices(3, [sink]));
        for a in 0..2 {
            assert_eq!(g.successors(a, sink), &Cell::from_indices(3, [sink]));
        }
        let o = &g.observations()[g.observation_of(sink)];
        assert_eq!(o.priority, 1);
        assert_eq!(o.members.len(), 1);
        assert!(g.is_total());

        assert!(matches!(
            parse_game(text, false),
            Err(GameError::NotTotal { ref state, ref label }) if state == "2" && label == "b"
        ));
    }

    #[test]
    fn totalizing_total_game_is_identity() {
        let g = example();
        let report = totalize_game(&g);
        assert_eq!(report.game, g);
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn empty_alphabet_rejected() {
        let text = EXAMPLE.replace("ALPHABET : a ", "ALPHABET :");
        assert!(parse_game(&text, true).is_err());
    }

    #[test]
    fn post_and_knowledge_update() {
        let g = example();
        let n = |names: &[&str]| cell(&g, names);
        assert_eq!(g.post(&n(&["1"]), 0), n(&["1", "2"]));
        assert_eq!(g.post(&n(&["3"]), 0), n(&["3"]));
        assert!(g.post(&n(&[]), 0).is_empty());
        assert_eq!(g.knowledge_update(&n(&["1"]), 0, 0), n(&["1"]));
        assert_eq!(g.knowledge_update(&n(&["1"]), 0, 1), n(&["2"]));
        assert!(g.knowledge_update(&n(&["3"]), 0, 0).is_empty());
        assert_eq!(g.compatible_observations(&n(&["1"]), 0), vec![0, 1]);
        assert_eq!(g.compatible_observations(&n(&["3"]), 0), vec![2]);
        assert!(g.compatible_observations(&n(&[]), 0).is_empty());
        assert_eq!(g.format_cell(&n(&["1", "2"])), "{1,2}");
    }

    #[test]
    fn render_round_trip() {
        let g = example();
        let again = parse_game(&g.render(), false).unwrap().game;
        assert_eq!(again, g);
    }
}
