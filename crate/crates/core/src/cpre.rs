//! Controllable predecessor on antichains.
//!
//! `CPre(q)` is the set of cells `s` from which Player 1 has an action `σ`
//! such that for every observation `o`, `post_σ(s) ∩ γ(o)` lies below some
//! element of `q`. Two implementations are provided: an enumerative one
//! working directly on bit sets, and a symbolic one building the predicate
//! as a BDD in linear encoding and extracting its maximal models.

use log::{debug, log_enabled, Level};
use rustc_hash::FxHashMap;

use crate::antichain::Antichain;
use crate::bdd::{Bdd, BddManager};
use crate::cell::Cell;
use crate::error::SolveError;
use crate::game::GameStructure;

/// Which implementation of the operator to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CpreKind {
    Enumerative,
    #[default]
    Symbolic,
}

pub trait ControllablePredecessor {
    fn game(&self) -> &GameStructure;

    /// Maximal cells below `within` (every cell when `None`) from which
    /// playing `action` forces the next knowledge below `q`.
    fn cpre_action(&mut self, action: usize, q: &Antichain, within: Option<&Antichain>) -> Antichain;

    /// `CPre(q) ⊓ within`.
    fn cpre_within(&mut self, q: &Antichain, within: Option<&Antichain>) -> Antichain {
        let width = self.game().num_locations();
        let actions = self.game().actions().len();
        let mut out = Antichain::empty(width);
        for a in 0..actions {
            let part = self.cpre_action(a, q, within);
            out = out.union(&part);
        }
        out
    }

    fn cpre(&mut self, q: &Antichain) -> Antichain {
        self.cpre_within(q, None)
    }
}

/// Direct computation on bit sets.
///
/// For each candidate cell `c` of `within` and action `σ`, the observations
/// reachable from `c` are folded one at a time: for observation `o`, the
/// options are the subsets `{ℓ ∈ c | post_σ(ℓ) ∩ γ(o) ⊆ t}` for each
/// maximal `t` of `q` restricted to `γ(o)`, and the running antichain is
/// intersected with them. Observations not reachable from `c` impose no
/// constraint.
pub struct EnumerativeCpre<'g> {
    game: &'g GameStructure,
    top: Antichain,
}

impl<'g> EnumerativeCpre<'g> {
    pub fn new(game: &'g GameStructure) -> Self {
        EnumerativeCpre { game, top: Antichain::top(game.num_locations()) }
    }

    /// Maximal non-empty traces `s' ∩ γ(o)` of `q`, per observation.
    fn restrict_to_observations(&self, q: &Antichain) -> FxHashMap<usize, Antichain> {
        let g = self.game;
        let mut parts: FxHashMap<usize, Vec<Cell>> = FxHashMap::default();
        let mut touched: Vec<usize> = Vec::new();
        for s in q {
            touched.clear();
            touched.extend(s.iter().map(|l| g.observation_of(l)));
            touched.sort_unstable();
            touched.dedup();
            for &o in &touched {
                parts
                    .entry(o)
                    .or_default()
                    .push(s.intersection(&g.observations()[o].members));
            }
        }
        parts
            .into_iter()
            .map(|(o, cells)| (o, Antichain::reduce(g.num_locations(), cells)))
            .collect()
    }

    fn cpre_action_with(
        &self,
        action: usize,
        within: &Antichain,
        parts: &FxHashMap<usize, Antichain>,
    ) -> Vec<Cell> {
        let g = self.game;
        let n = g.num_locations();
        let mut out = Vec::new();
        let mut reached: Vec<usize> = Vec::new();
        for c in within {
            reached.clear();
            for l in c.iter() {
                reached.extend(g.successors(action, l).iter().map(|d| g.observation_of(d)));
            }
            reached.sort_unstable();
            reached.dedup();

            let mut acc = Antichain::reduce(n, [c.clone()]);
            for &o in &reached {
                let members = &g.observations()[o].members;
                let option = |allowed: &Cell| -> Cell {
                    let gap = members.difference(allowed);
                    Cell::from_indices(n, c.iter().filter(|&l| !g.successors(action, l).intersects(&gap)))
                };
                let options = match parts.get(&o) {
                    Some(ts) => Antichain::reduce(n, ts.iter().map(option)),
                    None => Antichain::reduce(n, [option(&Cell::empty(n))]),
                };
                acc = acc.intersect(&options);
                if acc.is_empty() {
                    break;
                }
            }
            out.extend(acc.into_cells());
        }
        out
    }
}

impl ControllablePredecessor for EnumerativeCpre<'_> {
    fn game(&self) -> &GameStructure {
        self.game
    }

    fn cpre_action(&mut self, action: usize, q: &Antichain, within: Option<&Antichain>) -> Antichain {
        let n = self.game.num_locations();
        if q.is_empty() {
            return Antichain::empty(n);
        }
        let parts = self.restrict_to_observations(q);
        let within = within.unwrap_or(&self.top);
        Antichain::reduce(n, self.cpre_action_with(action, within, &parts))
    }

    fn cpre_within(&mut self, q: &Antichain, within: Option<&Antichain>) -> Antichain {
        let n = self.game.num_locations();
        if q.is_empty() {
            return Antichain::empty(n);
        }
        let parts = self.restrict_to_observations(q);
        let within = within.unwrap_or(&self.top);
        let mut cells = Vec::new();
        for a in 0..self.game.actions().len() {
            cells.extend(self.cpre_action_with(a, within, &parts));
        }
        Antichain::reduce(n, cells)
    }
}

/// Relative placement of the variable blocks in the BDD order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum VarOrder {
    /// Observation code `b̄`, then location code `ȳ`, then the interleaved
    /// linear-encoding blocks `x̄`/`x̄′`.
    #[default]
    CodesFirst,
    /// Interleaved `x̄`/`x̄′` first, then `b̄`, then `ȳ`.
    CellsFirst,
}

/// Default cap on the number of BDD variables of a symbolic context.
pub const DEFAULT_VAR_CAP: usize = 1 << 16;

/// Nodes after which the manager is rebuilt between two CPre calls.
const REBUILD_THRESHOLD: usize = 1 << 22;

fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// BDD encoding of a game for the symbolic CPre.
///
/// Locations are encoded either one variable per location (`x̄`, a BDD then
/// denotes a set of cells) or in binary over `ȳ` (a BDD then denotes one
/// set of locations). Observations are numbered in binary over `b̄`.
pub struct SymbolicContext<'g> {
    game: &'g GameStructure,
    order: VarOrder,
    mgr: BddManager,
    b_vars: Vec<usize>,
    y_vars: Vec<usize>,
    x_vars: Vec<usize>,
    xp_vars: Vec<usize>,
    /// Location `ℓ` in logarithmic encoding.
    loc_code: Vec<Bdd>,
    /// `T_σ(ℓ_i)` indexed `[action][location]`.
    trans: Vec<Vec<Bdd>>,
    /// `C_j`, observation members in logarithmic encoding.
    obs_code: Vec<Bdd>,
    b_gamma: Bdd,
    valid_b: Bdd,
    /// `T_σ(ℓ_i) ∧ B_Γ`, indexed like `trans`.
    trans_obs: Vec<Vec<Bdd>>,
    omega: Bdd,
}

impl<'g> SymbolicContext<'g> {
    pub fn new(game: &'g GameStructure) -> Result<Self, SolveError> {
        Self::with_options(game, VarOrder::default(), DEFAULT_VAR_CAP)
    }

    pub fn with_options(game: &'g GameStructure, order: VarOrder, cap: usize) -> Result<Self, SolveError> {
        let n = game.num_locations();
        let p = game.observations().len();
        let nb = ceil_log2(p);
        let m = ceil_log2(n);
        let needed = nb + m + 2 * n;
        if needed > cap {
            return Err(SolveError::Capacity { needed, cap });
        }
        let (code_base, cell_base) = match order {
            VarOrder::CodesFirst => (0, nb + m),
            VarOrder::CellsFirst => (2 * n, 0),
        };
        let b_vars: Vec<usize> = (code_base..code_base + nb).collect();
        let y_vars: Vec<usize> = (code_base + nb..code_base + nb + m).collect();
        let x_vars: Vec<usize> = (0..n).map(|i| cell_base + 2 * i).collect();
        let xp_vars: Vec<usize> = (0..n).map(|i| cell_base + 2 * i + 1).collect();

        let mut ctx = SymbolicContext {
            game,
            order,
            mgr: BddManager::new(needed),
            b_vars,
            y_vars,
            x_vars,
            xp_vars,
            loc_code: Vec::new(),
            trans: Vec::new(),
            obs_code: Vec::new(),
            b_gamma: Bdd::TRUE,
            valid_b: Bdd::TRUE,
            trans_obs: Vec::new(),
            omega: Bdd::TRUE,
        };
        ctx.encode();
        Ok(ctx)
    }

    fn encode(&mut self) {
        let g = self.game;
        let n = g.num_locations();
        let mgr = &mut self.mgr;

        self.loc_code = (0..n).map(|l| mgr.cube(&self.y_vars, l)).collect();
        let code_of = |mgr: &mut BddManager, codes: &[Bdd], cell: &Cell| mgr.or_all(cell.iter().map(|l| codes[l]));

        self.trans = (0..g.actions().len())
            .map(|a| (0..n).map(|l| code_of(mgr, &self.loc_code, g.successors(a, l))).collect())
            .collect();
        self.obs_code = g
            .observations()
            .iter()
            .map(|o| code_of(mgr, &self.loc_code, &o.members))
            .collect();

        let mut b_gamma = Bdd::TRUE;
        let mut valid_b = Bdd::FALSE;
        for (j, c) in self.obs_code.iter().enumerate() {
            let code = mgr.cube(&self.b_vars, j);
            let clause = mgr.implies(code, *c);
            b_gamma = mgr.and(b_gamma, clause);
            valid_b = mgr.or(valid_b, code);
        }
        self.b_gamma = b_gamma;
        self.valid_b = valid_b;

        self.trans_obs = self
            .trans
            .iter()
            .map(|row| row.iter().map(|&t| mgr.and(t, b_gamma)).collect())
            .collect();

        let all: Vec<usize> = (0..n).collect();
        self.omega = self.omega_over(&all);
    }

    /// `ω(x̄, x̄′)` over the given locations: `x̄ ⊂ x̄′` strictly. Built
    /// bottom-up along the interleaved order as a two-state automaton
    /// (strictness seen yet or not).
    fn omega_over(&mut self, locs: &[usize]) -> Bdd {
        let mgr = &mut self.mgr;
        let mut strict = Bdd::FALSE;
        let mut loose = Bdd::TRUE;
        for &i in locs.iter().rev() {
            let x = mgr.var(self.x_vars[i]).unwrap();
            let xp = mgr.var(self.xp_vars[i]).unwrap();
            let nx = mgr.not(x);
            let nxp = mgr.not(xp);
            let both = mgr.and(x, xp);
            let neither = mgr.and(nx, nxp);
            let same = mgr.or(both, neither);
            let grow = mgr.and(nx, xp);
            let s_same = mgr.and(same, strict);
            let s_grow = mgr.and(grow, loose);
            let new_strict = mgr.or(s_same, s_grow);
            let new_loose = mgr.and(same, loose);
            let new_loose = mgr.or(new_loose, s_grow);
            strict = new_strict;
            loose = new_loose;
        }
        strict
    }

    fn rebuild_if_large(&mut self) {
        if self.mgr.node_count() > REBUILD_THRESHOLD {
            debug!("rebuilding symbolic context at {} nodes", self.mgr.node_count());
            let fresh = SymbolicContext::with_options(self.game, self.order, usize::MAX)
                .expect("uncapped rebuild cannot fail");
            *self = fresh;
        } else {
            self.mgr.clear_caches();
        }
    }

    pub fn manager(&self) -> &BddManager {
        &self.mgr
    }

    pub fn b_vars(&self) -> &[usize] {
        &self.b_vars
    }

    pub fn y_vars(&self) -> &[usize] {
        &self.y_vars
    }

    pub fn x_vars(&self) -> &[usize] {
        &self.x_vars
    }

    pub fn observation_code(&self, j: usize) -> Bdd {
        self.obs_code[j]
    }

    pub fn transition_code(&self, action: usize, l: usize) -> Bdd {
        self.trans[action][l]
    }

    pub fn b_gamma(&self) -> Bdd {
        self.b_gamma
    }

    pub fn valid_b(&self) -> Bdd {
        self.valid_b
    }

    /// Graphviz rendering of `B_Γ`.
    pub fn b_gamma_dot(&self) -> String {
        let names = self.var_names();
        self.mgr.to_dot(self.b_gamma, |v| names[v].clone())
    }

    fn var_names(&self) -> Vec<String> {
        let mut names = vec![String::new(); self.mgr.num_vars()];
        for (k, &v) in self.b_vars.iter().enumerate() {
            names[v] = format!("b{k}");
        }
        for (k, &v) in self.y_vars.iter().enumerate() {
            names[v] = format!("y{}", k + 1);
        }
        for (k, &v) in self.x_vars.iter().enumerate() {
            names[v] = format!("x{}", k + 1);
        }
        for (k, &v) in self.xp_vars.iter().enumerate() {
            names[v] = format!("x{}'", k + 1);
        }
        names
    }

    /// `CP_σ` for the encoded antichain elements `S_k`, conjoining only over
    /// the locations in `locs` (the others are forced false by the caller).
    fn cp_action(&mut self, action: usize, targets: &[Bdd], locs: &[usize]) -> Bdd {
        let mgr = &mut self.mgr;
        let mut disj = Bdd::FALSE;
        for &s in targets {
            let not_s = mgr.not(s);
            let mut conj = Bdd::TRUE;
            for &i in locs.iter().rev() {
                // ∀ȳ · (T_σ(ℓ_i) ∧ B_Γ) → S_k, computed as ¬∃ȳ · (T_σ(ℓ_i) ∧ B_Γ ∧ ¬S_k).
                let bad = mgr.and_exists(self.trans_obs[action][i], not_s, &self.y_vars);
                if bad == Bdd::FALSE {
                    continue;
                }
                let ok = mgr.not(bad);
                let x = mgr.var(self.x_vars[i]).unwrap();
                let clause = mgr.implies(x, ok);
                conj = mgr.and(clause, conj);
                if conj == Bdd::FALSE {
                    break;
                }
            }
            disj = mgr.or(disj, conj);
        }
        let guarded = mgr.implies(self.valid_b, disj);
        mgr.forall(&self.b_vars, guarded)
    }

    /// `CP ∧ ¬∃x̄′ · ω(x̄, x̄′) ∧ CP(x̄′)`: the maximal cells of `CP`, which
    /// depends only on the variables of `locs`.
    fn maximal(&mut self, cp: Bdd, locs: &[usize]) -> Bdd {
        let omega = if locs.len() == self.x_vars.len() { self.omega } else { self.omega_over(locs) };
        let x_to_xp: FxHashMap<usize, usize> =
            locs.iter().map(|&i| (self.x_vars[i], self.xp_vars[i])).collect();
        let primed = self.mgr.rename(cp, |v| x_to_xp[&v]);
        let xp: Vec<usize> = locs.iter().map(|&i| self.xp_vars[i]).collect();
        let larger = self.mgr.and_exists(omega, primed, &xp);
        let not_larger = self.mgr.not(larger);
        self.mgr.and(cp, not_larger)
    }

    fn decode(&self, f: Bdd, locs: &[usize], out: &mut Vec<Cell>) {
        let n = self.game.num_locations();
        let vars: Vec<usize> = locs.iter().map(|&i| self.x_vars[i]).collect();
        self.mgr.for_each_sat(f, &vars, |assignment| {
            out.push(Cell::from_indices(n, locs.iter().zip(assignment).filter(|(_, &v)| v).map(|(&l, _)| l)));
        });
    }

    /// `CPre(q) ⊓ within` restricted to `actions`. `CP` is built once per
    /// cell of `within`, over the variables of that cell only; the other
    /// `x_i` are false in every cell below it.
    fn run(&mut self, actions: &[usize], q: &Antichain, within: Option<&Antichain>) -> Antichain {
        let n = self.game.num_locations();
        if q.is_empty() {
            return Antichain::empty(n);
        }
        let cells: Vec<Cell> = match within {
            Some(w) => w.cells().to_vec(),
            None => vec![Cell::full(n)],
        };
        let mut found = Vec::new();
        for c in &cells {
            let locs: Vec<usize> = c.iter().collect();
            let mut cp = Bdd::FALSE;
            for &a in actions {
                // A disjunct S_k only matters through S_k ∩ post_σ(c), and a
                // disjunct whose trace lies inside another's is implied by it.
                let post = self.game.post(c, a);
                let traces = Antichain::reduce(n, q.iter().map(|s| s.intersection(&post)));
                if traces.is_empty() {
                    continue;
                }
                let targets: Vec<Bdd> = traces
                    .iter()
                    .map(|s| self.mgr.or_all(s.iter().map(|l| self.loc_code[l])))
                    .collect();
                let cp_a = self.cp_action(a, &targets, &locs);
                if log_enabled!(Level::Debug) {
                    let vars: Vec<usize> = locs.iter().map(|&i| self.x_vars[i]).collect();
                    let count = self.mgr.sat_count(cp_a, &vars);
                    debug!("CP_{} has {count} models", self.game.actions()[a]);
                }
                cp = self.mgr.or(cp, cp_a);
            }
            let max = self.maximal(cp, &locs);
            self.decode(max, &locs, &mut found);
        }
        self.rebuild_if_large();
        Antichain::reduce(n, found)
    }
}

impl ControllablePredecessor for SymbolicContext<'_> {
    fn game(&self) -> &GameStructure {
        self.game
    }

    fn cpre_action(&mut self, action: usize, q: &Antichain, within: Option<&Antichain>) -> Antichain {
        self.run(&[action], q, within)
    }

    fn cpre_within(&mut self, q: &Antichain, within: Option<&Antichain>) -> Antichain {
        let actions: Vec<usize> = (0..self.game.actions().len()).collect();
        self.run(&actions, q, within)
    }
}

/// Boxed operator of the requested kind.
pub fn make_cpre<'g>(
    game: &'g GameStructure,
    kind: CpreKind,
) -> Result<Box<dyn ControllablePredecessor + 'g>, SolveError> {
    make_cpre_with(game, kind, VarOrder::default())
}

/// Like [`make_cpre`], with an explicit variable order for the symbolic kind.
pub fn make_cpre_with<'g>(
    game: &'g GameStructure,
    kind: CpreKind,
    order: VarOrder,
) -> Result<Box<dyn ControllablePredecessor + 'g>, SolveError> {
    Ok(match kind {
        CpreKind::Enumerative => Box::new(EnumerativeCpre::new(game)),
        CpreKind::Symbolic => Box::new(SymbolicContext::with_options(game, order, DEFAULT_VAR_CAP)?),
    })
}
