//! A small reduced ordered BDD kernel.
//!
//! Variables are identified with their position in a fixed global order:
//! variable `i` is tested before variable `j` whenever `i < j`. There is no
//! dynamic reordering, no complement edges and no garbage collection; a
//! manager lives for one solving task.

use std::fmt::Write as _;

use rustc_hash::FxHashMap;
use thiserror::Error;

/// Handle to a node of a [`BddManager`]. Two handles from the same manager
/// are equal iff they denote the same boolean function.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Bdd(u32);

impl Bdd {
    pub const FALSE: Bdd = Bdd(0);
    pub const TRUE: Bdd = Bdd(1);

    pub fn is_const(self) -> bool {
        self.0 < 2
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum BinOp {
    And,
    Or,
    Implies,
    Xor,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Quantifier {
    Exists,
    Forall,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("variable {index} out of range (manager has {count})")]
pub struct VarOutOfRange {
    pub index: usize,
    pub count: usize,
}

const TERMINAL_VAR: u32 = u32::MAX;

#[derive(Clone, Copy)]
struct Node {
    var: u32,
    low: Bdd,
    high: Bdd,
}

pub struct BddManager {
    num_vars: usize,
    nodes: Vec<Node>,
    unique: FxHashMap<(u32, Bdd, Bdd), Bdd>,
    apply_cache: FxHashMap<(BinOp, Bdd, Bdd), Bdd>,
}

impl BddManager {
    pub fn new(num_vars: usize) -> Self {
        assert!(num_vars < TERMINAL_VAR as usize);
        let terminal = |b| Node { var: TERMINAL_VAR, low: b, high: b };
        BddManager {
            num_vars,
            nodes: vec![terminal(Bdd::FALSE), terminal(Bdd::TRUE)],
            unique: FxHashMap::default(),
            apply_cache: FxHashMap::default(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Number of nodes allocated so far, terminals included.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn clear_caches(&mut self) {
        self.apply_cache.clear();
    }

    pub fn constant(&self, value: bool) -> Bdd {
        if value {
            Bdd::TRUE
        } else {
            Bdd::FALSE
        }
    }

    fn var_of(&self, f: Bdd) -> u32 {
        self.nodes[f.0 as usize].var
    }

    /// Variable tested at the root of `f`; `None` for constants.
    pub fn top_var(&self, f: Bdd) -> Option<usize> {
        (!f.is_const()).then(|| self.var_of(f) as usize)
    }

    pub fn low(&self, f: Bdd) -> Bdd {
        self.nodes[f.0 as usize].low
    }

    pub fn high(&self, f: Bdd) -> Bdd {
        self.nodes[f.0 as usize].high
    }

    fn mk(&mut self, var: u32, low: Bdd, high: Bdd) -> Bdd {
        if low == high {
            return low;
        }
        debug_assert!(var < self.var_of(low) && var < self.var_of(high), "order violated");
        if let Some(&b) = self.unique.get(&(var, low, high)) {
            return b;
        }
        let b = Bdd(self.nodes.len() as u32);
        self.nodes.push(Node { var, low, high });
        self.unique.insert((var, low, high), b);
        b
    }

    /// The literal `v_i`.
    pub fn var(&mut self, i: usize) -> Result<Bdd, VarOutOfRange> {
        if i >= self.num_vars {
            return Err(VarOutOfRange { index: i, count: self.num_vars });
        }
        Ok(self.mk(i as u32, Bdd::FALSE, Bdd::TRUE))
    }

    /// The literal `v_i` or its negation.
    pub fn literal(&mut self, i: usize, positive: bool) -> Result<Bdd, VarOutOfRange> {
        let v = self.var(i)?;
        Ok(if positive { v } else { self.not(v) })
    }

    pub fn apply(&mut self, op: BinOp, f: Bdd, g: Bdd) -> Bdd {
        if let Some(r) = self.apply_terminal(op, f, g) {
            return r;
        }
        let (f, g) = match op {
            BinOp::Implies => (f, g),
            _ if f > g => (g, f),
            _ => (f, g),
        };
        if let Some(&r) = self.apply_cache.get(&(op, f, g)) {
            return r;
        }
        let vf = self.var_of(f);
        let vg = self.var_of(g);
        let top = vf.min(vg);
        let (f0, f1) = if vf == top { (self.low(f), self.high(f)) } else { (f, f) };
        let (g0, g1) = if vg == top { (self.low(g), self.high(g)) } else { (g, g) };
        let lo = self.apply(op, f0, g0);
        let hi = self.apply(op, f1, g1);
        let r = self.mk(top, lo, hi);
        self.apply_cache.insert((op, f, g), r);
        r
    }

    fn apply_terminal(&mut self, op: BinOp, f: Bdd, g: Bdd) -> Option<Bdd> {
        const F: Bdd = Bdd::FALSE;
        const T: Bdd = Bdd::TRUE;
        match op {
            BinOp::And => match (f, g) {
                (F, _) | (_, F) => Some(F),
                (T, x) | (x, T) => Some(x),
                _ if f == g => Some(f),
                _ => None,
            },
            BinOp::Or => match (f, g) {
                (T, _) | (_, T) => Some(T),
                (F, x) | (x, F) => Some(x),
                _ if f == g => Some(f),
                _ => None,
            },
            BinOp::Xor => match (f, g) {
                _ if f == g => Some(F),
                (F, x) | (x, F) => Some(x),
                (T, T) => Some(F),
                _ => None,
            },
            BinOp::Implies => match (f, g) {
                (F, _) | (_, T) => Some(T),
                (T, x) => Some(x),
                _ if f == g => Some(T),
                (x, F) => Some(self.not(x)),
                _ => None,
            },
        }
    }

    pub fn and(&mut self, f: Bdd, g: Bdd) -> Bdd {
        self.apply(BinOp::And, f, g)
    }

    pub fn or(&mut self, f: Bdd, g: Bdd) -> Bdd {
        self.apply(BinOp::Or, f, g)
    }

    pub fn implies(&mut self, f: Bdd, g: Bdd) -> Bdd {
        self.apply(BinOp::Implies, f, g)
    }

    pub fn xor(&mut self, f: Bdd, g: Bdd) -> Bdd {
        self.apply(BinOp::Xor, f, g)
    }

    pub fn not(&mut self, f: Bdd) -> Bdd {
        self.apply(BinOp::Xor, f, Bdd::TRUE)
    }

    pub fn ite(&mut self, c: Bdd, t: Bdd, e: Bdd) -> Bdd {
        let a = self.and(c, t);
        let nc = self.not(c);
        let b = self.and(nc, e);
        self.or(a, b)
    }

    pub fn and_all<I: IntoIterator<Item = Bdd>>(&mut self, fs: I) -> Bdd {
        fs.into_iter().fold(Bdd::TRUE, |acc, f| self.and(acc, f))
    }

    pub fn or_all<I: IntoIterator<Item = Bdd>>(&mut self, fs: I) -> Bdd {
        fs.into_iter().fold(Bdd::FALSE, |acc, f| self.or(acc, f))
    }

    /// Conjunction of literals fixing `vars[k]` to bit `k` of `value`,
    /// most significant bit first.
    pub fn cube(&mut self, vars: &[usize], value: usize) -> Bdd {
        let m = vars.len();
        let mut r = Bdd::TRUE;
        // Build bottom-up so each `mk` sees already-reduced children.
        let mut order: Vec<(usize, bool)> =
            vars.iter().enumerate().map(|(k, &v)| (v, value >> (m - 1 - k) & 1 == 1)).collect();
        order.sort_unstable_by_key(|&(v, _)| std::cmp::Reverse(v));
        for (v, bit) in order {
            assert!(v < self.num_vars);
            r = if bit { self.mk(v as u32, Bdd::FALSE, r) } else { self.mk(v as u32, r, Bdd::FALSE) };
        }
        r
    }

    pub fn quantify(&mut self, kind: Quantifier, vars: &[usize], f: Bdd) -> Bdd {
        if vars.is_empty() || f.is_const() {
            return f;
        }
        let mut mask = vec![false; self.num_vars];
        for &v in vars {
            mask[v] = true;
        }
        let last = *vars.iter().max().unwrap() as u32;
        let mut cache = FxHashMap::default();
        self.quantify_rec(kind, &mask, last, f, &mut cache)
    }

    pub fn exists(&mut self, vars: &[usize], f: Bdd) -> Bdd {
        self.quantify(Quantifier::Exists, vars, f)
    }

    pub fn forall(&mut self, vars: &[usize], f: Bdd) -> Bdd {
        self.quantify(Quantifier::Forall, vars, f)
    }

    fn quantify_rec(
        &mut self,
        kind: Quantifier,
        mask: &[bool],
        last: u32,
        f: Bdd,
        cache: &mut FxHashMap<Bdd, Bdd>,
    ) -> Bdd {
        let var = self.var_of(f);
        if f.is_const() || var > last {
            return f;
        }
        if let Some(&r) = cache.get(&f) {
            return r;
        }
        let lo = self.quantify_rec(kind, mask, last, self.low(f), cache);
        let hi = self.quantify_rec(kind, mask, last, self.high(f), cache);
        let r = if mask[var as usize] {
            match kind {
                Quantifier::Exists => self.or(lo, hi),
                Quantifier::Forall => self.and(lo, hi),
            }
        } else {
            self.mk(var, lo, hi)
        };
        cache.insert(f, r);
        r
    }

    /// `∃vars · (f ∧ g)` without building the full conjunction.
    pub fn and_exists(&mut self, f: Bdd, g: Bdd, vars: &[usize]) -> Bdd {
        let mut mask = vec![false; self.num_vars];
        for &v in vars {
            mask[v] = true;
        }
        let mut cache = FxHashMap::default();
        self.and_exists_rec(f, g, &mask, &mut cache)
    }

    fn and_exists_rec(
        &mut self,
        f: Bdd,
        g: Bdd,
        mask: &[bool],
        cache: &mut FxHashMap<(Bdd, Bdd), Bdd>,
    ) -> Bdd {
        if f == Bdd::FALSE || g == Bdd::FALSE {
            return Bdd::FALSE;
        }
        if f == Bdd::TRUE && g == Bdd::TRUE {
            return Bdd::TRUE;
        }
        let (f, g) = if f > g { (g, f) } else { (f, g) };
        if let Some(&r) = cache.get(&(f, g)) {
            return r;
        }
        let vf = self.var_of(f);
        let vg = self.var_of(g);
        let top = vf.min(vg);
        let (f0, f1) = if vf == top { (self.low(f), self.high(f)) } else { (f, f) };
        let (g0, g1) = if vg == top { (self.low(g), self.high(g)) } else { (g, g) };
        let r = if mask[top as usize] {
            let lo = self.and_exists_rec(f0, g0, mask, cache);
            if lo == Bdd::TRUE {
                Bdd::TRUE
            } else {
                let hi = self.and_exists_rec(f1, g1, mask, cache);
                self.or(lo, hi)
            }
        } else {
            let lo = self.and_exists_rec(f0, g0, mask, cache);
            let hi = self.and_exists_rec(f1, g1, mask, cache);
            self.mk(top, lo, hi)
        };
        cache.insert((f, g), r);
        r
    }

    /// Substitutes variable `v` by `map(v)` for every variable in the
    /// support of `f`. The map must preserve the relative order of the
    /// support variables.
    pub fn rename(&mut self, f: Bdd, map: impl Fn(usize) -> usize) -> Bdd {
        let mut cache = FxHashMap::default();
        self.rename_rec(f, &map, &mut cache)
    }

    fn rename_rec(&mut self, f: Bdd, map: &impl Fn(usize) -> usize, cache: &mut FxHashMap<Bdd, Bdd>) -> Bdd {
        if f.is_const() {
            return f;
        }
        if let Some(&r) = cache.get(&f) {
            return r;
        }
        let lo = self.rename_rec(self.low(f), map, cache);
        let hi = self.rename_rec(self.high(f), map, cache);
        let v = map(self.var_of(f) as usize);
        assert!(v < self.num_vars);
        let r = self.mk(v as u32, lo, hi);
        cache.insert(f, r);
        r
    }

    /// Calls `visit` once per total assignment over `over` (sorted
    /// ascending) satisfying `f`, in lexicographic order with false before
    /// true. `f` must only depend on variables of `over`.
    pub fn for_each_sat(&self, f: Bdd, over: &[usize], mut visit: impl FnMut(&[bool])) {
        debug_assert!(over.windows(2).all(|w| w[0] < w[1]));
        let mut buf = vec![false; over.len()];
        self.sat_rec(f, over, 0, &mut buf, &mut visit);
    }

    fn sat_rec(&self, f: Bdd, over: &[usize], pos: usize, buf: &mut [bool], visit: &mut impl FnMut(&[bool])) {
        if f == Bdd::FALSE {
            return;
        }
        if pos == over.len() {
            assert!(f == Bdd::TRUE, "function depends on variables outside the enumeration set");
            visit(buf);
            return;
        }
        let v = over[pos] as u32;
        let fv = self.var_of(f);
        assert!(fv >= v, "function depends on variable {fv} outside the enumeration set");
        let (lo, hi) = if fv == v { (self.low(f), self.high(f)) } else { (f, f) };
        buf[pos] = false;
        self.sat_rec(lo, over, pos + 1, buf, visit);
        buf[pos] = true;
        self.sat_rec(hi, over, pos + 1, buf, visit);
    }

    pub fn sat_assignments(&self, f: Bdd, over: &[usize]) -> Vec<Vec<bool>> {
        let mut out = Vec::new();
        self.for_each_sat(f, over, |a| out.push(a.to_vec()));
        out
    }

    /// Model count of `f` over `over` (sorted ascending), as a float since
    /// linear encodings easily exceed 64 bits.
    pub fn sat_count(&self, f: Bdd, over: &[usize]) -> f64 {
        let mut cache = FxHashMap::default();
        self.count_rec(f, over, 0, &mut cache)
    }

    fn count_rec(&self, f: Bdd, over: &[usize], pos: usize, cache: &mut FxHashMap<(Bdd, usize), f64>) -> f64 {
        if f == Bdd::FALSE {
            return 0.0;
        }
        if pos == over.len() {
            return 1.0;
        }
        if let Some(&c) = cache.get(&(f, pos)) {
            return c;
        }
        let v = over[pos] as u32;
        let fv = self.var_of(f);
        let c = if fv == v {
            self.count_rec(self.low(f), over, pos + 1, cache) + self.count_rec(self.high(f), over, pos + 1, cache)
        } else {
            2.0 * self.count_rec(f, over, pos + 1, cache)
        };
        cache.insert((f, pos), c);
        c
    }

    /// Evaluates `f` under a full assignment indexed by variable.
    pub fn eval(&self, f: Bdd, assignment: &[bool]) -> bool {
        let mut cur = f;
        while !cur.is_const() {
            let v = self.var_of(cur) as usize;
            cur = if assignment[v] { self.high(cur) } else { self.low(cur) };
        }
        cur == Bdd::TRUE
    }

    /// Graphviz rendering of `f`, labelling variables with `name`.
    pub fn to_dot(&self, f: Bdd, name: impl Fn(usize) -> String) -> String {
        let mut out = String::from("digraph bdd {\n  node [shape=circle];\n");
        let _ = writeln!(out, "  n0 [shape=box,label=\"0\"];\n  n1 [shape=box,label=\"1\"];");
        let mut stack = vec![f];
        let mut seen = rustc_hash::FxHashSet::default();
        while let Some(g) = stack.pop() {
            if g.is_const() || !seen.insert(g) {
                continue;
            }
            let node = self.nodes[g.0 as usize];
            let _ = writeln!(out, "  n{} [label=\"{}\"];", g.0, name(node.var as usize));
            let _ = writeln!(out, "  n{} -> n{} [style=dashed];", g.0, node.low.0);
            let _ = writeln!(out, "  n{} -> n{};", g.0, node.high.0);
            stack.push(node.low);
            stack.push(node.high);
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basic_identities() {
        let mut m = BddManager::new(3);
        let x = m.var(0).unwrap();
        let y = m.var(1).unwrap();
        let nx = m.not(x);
        assert_eq!(m.and(x, nx), Bdd::FALSE);
        assert_eq!(m.or(x, Bdd::FALSE), x);
        assert_eq!(m.implies(Bdd::FALSE, y), Bdd::TRUE);
        assert!(m.var(3).is_err());

        let xy = m.and(x, y);
        assert_eq!(m.exists(&[0], xy), y);
        let x_or_y = m.or(x, y);
        assert_eq!(m.forall(&[0], x_or_y), y);
        assert_eq!(m.forall(&[], xy), xy);
    }

    #[test]
    fn enumerate_examples() {
        let mut m = BddManager::new(2);
        let x1 = m.var(0).unwrap();
        let x2 = m.var(1).unwrap();
        let nx2 = m.not(x2);
        let f = m.and(x1, nx2);
        assert_eq!(m.sat_assignments(f, &[0, 1]), vec![vec![true, false]]);
        assert_eq!(m.sat_assignments(Bdd::TRUE, &[0]), vec![vec![false], vec![true]]);
        assert!(m.sat_assignments(Bdd::FALSE, &[0, 1]).is_empty());
    }

    #[test]
    fn cube_and_rename() {
        let mut m = BddManager::new(6);
        let c = m.cube(&[0, 2, 4], 0b101);
        assert_eq!(m.sat_assignments(c, &[0, 2, 4]), vec![vec![true, false, true]]);
        let shifted = m.rename(c, |v| v + 1);
        assert_eq!(m.sat_assignments(shifted, &[1, 3, 5]), vec![vec![true, false, true]]);
    }

    /// Boolean formulas over a handful of variables, evaluated by truth table.
    #[derive(Clone, Debug)]
    enum Expr {
        Var(usize),
        Const(bool),
        Not(Box<Expr>),
        Bin(BinOp, Box<Expr>, Box<Expr>),
        Quant(Quantifier, Vec<usize>, Box<Expr>),
    }

    fn eval_expr(e: &Expr, a: &mut Vec<bool>) -> bool {
        match e {
            Expr::Var(i) => a[*i],
            Expr::Const(b) => *b,
            Expr::Not(x) => !eval_expr(x, a),
            Expr::Bin(op, x, y) => {
                let (p, q) = (eval_expr(x, a), eval_expr(y, a));
                match op {
                    BinOp::And => p && q,
                    BinOp::Or => p || q,
                    BinOp::Implies => !p || q,
                    BinOp::Xor => p ^ q,
                }
            }
            Expr::Quant(k, vars, x) => {
                let mut vars = vars.clone();
                vars.sort_unstable();
                vars.dedup();
                let saved: Vec<bool> = vars.iter().map(|&v| a[v]).collect();
                let mut results = Vec::new();
                for bits in 0..(1usize << vars.len()) {
                    for (j, &v) in vars.iter().enumerate() {
                        a[v] = bits >> j & 1 == 1;
                    }
                    results.push(eval_expr(x, a));
                }
                for (&v, s) in vars.iter().zip(saved) {
                    a[v] = s;
                }
                match k {
                    Quantifier::Exists => results.iter().any(|&r| r),
                    Quantifier::Forall => results.iter().all(|&r| r),
                }
            }
        }
    }

    fn build(m: &mut BddManager, e: &Expr) -> Bdd {
        match e {
            Expr::Var(i) => m.var(*i).unwrap(),
            Expr::Const(b) => m.constant(*b),
            Expr::Not(x) => {
                let f = build(m, x);
                m.not(f)
            }
            Expr::Bin(op, x, y) => {
                let f = build(m, x);
                let g = build(m, y);
                m.apply(*op, f, g)
            }
            Expr::Quant(k, vars, x) => {
                let f = build(m, x);
                m.quantify(*k, vars, f)
            }
        }
    }

    fn arb_expr(nvars: usize) -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0..nvars).prop_map(Expr::Var),
            any::<bool>().prop_map(Expr::Const),
        ];
        leaf.prop_recursive(4, 32, 2, move |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Not(Box::new(e))),
                (
                    prop_oneof![Just(BinOp::And), Just(BinOp::Or), Just(BinOp::Implies), Just(BinOp::Xor)],
                    inner.clone(),
                    inner.clone()
                )
                    .prop_map(|(op, a, b)| Expr::Bin(op, Box::new(a), Box::new(b))),
                (
                    prop_oneof![Just(Quantifier::Exists), Just(Quantifier::Forall)],
                    prop::collection::vec(0..nvars, 0..3),
                    inner
                )
                    .prop_map(|(k, vs, e)| Expr::Quant(k, vs, Box::new(e))),
            ]
        })
    }

    fn truth_table(e: &Expr, nvars: usize) -> Vec<bool> {
        (0..(1usize << nvars))
            .map(|bits| {
                let mut a: Vec<bool> = (0..nvars).map(|i| bits >> i & 1 == 1).collect();
                eval_expr(e, &mut a)
            })
            .collect()
    }

    proptest! {
        #[test]
        fn agrees_with_truth_tables(e in arb_expr(6)) {
            let mut m = BddManager::new(6);
            let f = build(&mut m, &e);
            let table = truth_table(&e, 6);
            for (bits, &expected) in table.iter().enumerate() {
                let a: Vec<bool> = (0..6).map(|i| bits >> i & 1 == 1).collect();
                prop_assert_eq!(m.eval(f, &a), expected);
            }
            let over: Vec<usize> = (0..6).collect();
            let count = table.iter().filter(|&&b| b).count();
            prop_assert_eq!(m.sat_assignments(f, &over).len(), count);
            prop_assert_eq!(m.sat_count(f, &over) as usize, count);
        }

        #[test]
        fn canonical_handles(a in arb_expr(10), b in arb_expr(10)) {
            let mut m = BddManager::new(10);
            let fa = build(&mut m, &a);
            let fb = build(&mut m, &b);
            prop_assert_eq!(fa == fb, truth_table(&a, 10) == truth_table(&b, 10));
        }

        #[test]
        fn and_exists_matches_two_step(a in arb_expr(6), b in arb_expr(6), vs in prop::collection::vec(0usize..6, 0..4)) {
            let mut m = BddManager::new(6);
            let fa = build(&mut m, &a);
            let fb = build(&mut m, &b);
            let conj = m.and(fa, fb);
            let two_step = m.exists(&vs, conj);
            prop_assert_eq!(m.and_exists(fa, fb, &vs), two_step);
        }
    }
}
