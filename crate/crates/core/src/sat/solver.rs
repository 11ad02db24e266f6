//! Conflict-driven clause learning with two-watched-literal propagation,
//! first-UIP learning and Luby restarts.
//!
//! Instances in this crate are small (hundreds of variables), so there is no
//! preprocessing and no learnt-clause deletion. Phase saving is off by
//! default: decisions assign `false` first, which keeps runs reproducible and
//! lets inactive selector variables fall out of the way.

use std::time::Instant;

use super::{Budget, CnfFormula, QueryStats, SatResult, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Lit(u32);

impl Lit {
    fn new(var: usize, positive: bool) -> Lit {
        Lit((var as u32) << 1 | (!positive) as u32)
    }

    fn from_dimacs(l: i32) -> Lit {
        Lit::new(l.unsigned_abs() as usize - 1, l > 0)
    }

    fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    fn is_pos(self) -> bool {
        self.0 & 1 == 0
    }

    fn code(self) -> usize {
        self.0 as usize
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LBool {
    True,
    False,
    Undef,
}

#[derive(Debug, Clone, Copy)]
struct Watch {
    cref: u32,
    blocker: Lit,
}

struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
}

const NO_REASON: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Perturbs the initial branching order deterministically.
    pub seed: u64,
    pub phase_saving: bool,
    /// Conflicts per Luby unit.
    pub restart_base: u64,
    pub var_decay: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { seed: 0, phase_saving: false, restart_base: 100, var_decay: 0.95 }
    }
}

/// Incremental CDCL solver. Clauses may be added between `solve` calls;
/// learnt clauses are kept across calls.
pub struct Solver {
    config: SolverConfig,
    clauses: Vec<Clause>,
    watches: Vec<Vec<Watch>>,
    assigns: Vec<LBool>,
    level: Vec<u32>,
    reason: Vec<u32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    order: VarOrder,
    phase: Vec<bool>,
    seen: Vec<bool>,
    /// Unit clauses, kept for model verification (they never enter the arena).
    units: Vec<Lit>,
    ok: bool,
    decisions: u64,
    propagations: u64,
    conflicts: u64,
}

impl Solver {
    pub fn new(config: SolverConfig) -> Solver {
        Solver {
            config,
            clauses: Vec::new(),
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            order: VarOrder::new(),
            phase: Vec::new(),
            seen: Vec::new(),
            units: Vec::new(),
            ok: true,
            decisions: 0,
            propagations: 0,
            conflicts: 0,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    pub fn ensure_vars(&mut self, n: usize) {
        while self.assigns.len() < n {
            let v = self.assigns.len();
            self.assigns.push(LBool::Undef);
            self.level.push(0);
            self.reason.push(NO_REASON);
            // Deterministic jitter so the seed influences tie-breaking.
            let jitter = (splitmix64(self.config.seed.wrapping_add(v as u64)) % 1024) as f64 * 1e-9;
            self.activity.push(jitter);
            self.phase.push(false);
            self.seen.push(false);
            self.watches.push(Vec::new());
            self.watches.push(Vec::new());
            self.order.insert(v, &self.activity);
        }
    }

    /// Allocates a fresh variable and returns its DIMACS index.
    pub fn new_var(&mut self) -> i32 {
        self.ensure_vars(self.assigns.len() + 1);
        self.assigns.len() as i32
    }

    pub fn load(&mut self, f: &CnfFormula) {
        self.ensure_vars(f.num_vars);
        for clause in &f.clauses {
            self.add_clause_dimacs(clause);
        }
    }

    /// Adds a clause (DIMACS literals). Returns false when the solver is
    /// already in an unsatisfiable state afterwards.
    pub fn add_clause_dimacs(&mut self, lits: &[i32]) -> bool {
        for &l in lits {
            assert!(l != 0, "literal 0 is reserved");
            self.ensure_vars(l.unsigned_abs() as usize);
        }
        let lits: Vec<Lit> = lits.iter().map(|&l| Lit::from_dimacs(l)).collect();
        self.add_clause(lits)
    }

    fn add_clause(&mut self, lits: Vec<Lit>) -> bool {
        if !self.ok {
            return false;
        }
        self.cancel_until(0);
        // Simplify against the top-level assignment.
        let mut clause: Vec<Lit> = Vec::with_capacity(lits.len());
        for l in lits {
            match self.value(l) {
                LBool::True => return true, // already satisfied
                LBool::False => continue,
                LBool::Undef => {
                    if clause.contains(&!l) {
                        return true; // tautology
                    }
                    if !clause.contains(&l) {
                        clause.push(l);
                    }
                }
            }
        }
        match clause.len() {
            0 => {
                self.ok = false;
                false
            }
            1 => {
                self.units.push(clause[0]);
                self.unchecked_enqueue(clause[0], NO_REASON);
                // Defer full propagation to the next solve; detect the
                // immediate contradiction here.
                self.ok = self.propagate().is_none();
                self.ok
            }
            _ => {
                let cref = self.clauses.len() as u32;
                self.watches[(!clause[0]).code()].push(Watch { cref, blocker: clause[1] });
                self.watches[(!clause[1]).code()].push(Watch { cref, blocker: clause[0] });
                self.clauses.push(Clause { lits: clause, learnt: false });
                true
            }
        }
    }

    fn value(&self, l: Lit) -> LBool {
        match self.assigns[l.var()] {
            LBool::Undef => LBool::Undef,
            LBool::True => {
                if l.is_pos() {
                    LBool::True
                } else {
                    LBool::False
                }
            }
            LBool::False => {
                if l.is_pos() {
                    LBool::False
                } else {
                    LBool::True
                }
            }
        }
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn new_decision_level(&mut self) {
        self.trail_lim.push(self.trail.len());
    }

    fn unchecked_enqueue(&mut self, l: Lit, reason: u32) {
        debug_assert_eq!(self.value(l), LBool::Undef);
        self.assigns[l.var()] = if l.is_pos() { LBool::True } else { LBool::False };
        self.level[l.var()] = self.decision_level() as u32;
        self.reason[l.var()] = reason;
        self.trail.push(l);
    }

    fn cancel_until(&mut self, target: usize) {
        if self.decision_level() <= target {
            return;
        }
        let bound = self.trail_lim[target];
        while self.trail.len() > bound {
            let l = self.trail.pop().unwrap();
            let v = l.var();
            if self.config.phase_saving {
                self.phase[v] = l.is_pos();
            }
            self.assigns[v] = LBool::Undef;
            self.reason[v] = NO_REASON;
            self.order.insert(v, &self.activity);
        }
        self.trail_lim.truncate(target);
        self.qhead = bound;
    }

    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[p.code()]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            'clauses: while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == LBool::True {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.cref as usize;
                {
                    let clause = &mut self.clauses[cref];
                    if clause.lits[0] == false_lit {
                        clause.lits.swap(0, 1);
                    }
                    debug_assert_eq!(clause.lits[1], false_lit);
                }
                let first = self.clauses[cref].lits[0];
                if first != w.blocker && self.value(first) == LBool::True {
                    ws[j] = Watch { cref: w.cref, blocker: first };
                    j += 1;
                    continue;
                }
                for k in 2..self.clauses[cref].lits.len() {
                    if self.value(self.clauses[cref].lits[k]) != LBool::False {
                        self.clauses[cref].lits.swap(1, k);
                        let new_watch = self.clauses[cref].lits[1];
                        self.watches[(!new_watch).code()].push(Watch { cref: w.cref, blocker: first });
                        continue 'clauses;
                    }
                }
                // Unit or conflicting.
                ws[j] = Watch { cref: w.cref, blocker: first };
                j += 1;
                if self.value(first) == LBool::False {
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                    self.qhead = self.trail.len();
                    conflict = Some(w.cref);
                    break;
                }
                self.unchecked_enqueue(first, w.cref);
            }
            ws.truncate(j);
            self.watches[p.code()] = ws;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    /// First-UIP conflict analysis. Returns the learnt clause with the
    /// asserting literal at index 0 and the backtrack level.
    fn analyze(&mut self, mut confl: u32) -> (Vec<Lit>, usize) {
        let mut learnt: Vec<Lit> = vec![Lit(0)]; // slot 0 for the asserting literal
        let mut counter = 0usize;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        let current = self.decision_level() as u32;
        loop {
            let start = usize::from(p.is_some());
            let clause_len = self.clauses[confl as usize].lits.len();
            for k in start..clause_len {
                let q = self.clauses[confl as usize].lits[k];
                let v = q.var();
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(v);
                    if self.level[v] >= current {
                        counter += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var()] {
                    break;
                }
            }
            let lit = self.trail[idx];
            self.seen[lit.var()] = false;
            counter -= 1;
            p = Some(lit);
            if counter == 0 {
                break;
            }
            confl = self.reason[lit.var()];
            debug_assert_ne!(confl, NO_REASON);
        }
        learnt[0] = !p.unwrap();
        for l in &learnt[1..] {
            self.seen[l.var()] = false;
        }
        let backtrack = if learnt.len() == 1 {
            0
        } else {
            // Move the highest-level literal to the second watch slot.
            let mut max_i = 1;
            for k in 2..learnt.len() {
                if self.level[learnt[k].var()] > self.level[learnt[max_i].var()] {
                    max_i = k;
                }
            }
            learnt.swap(1, max_i);
            self.level[learnt[1].var()] as usize
        };
        (learnt, backtrack)
    }

    fn record_learnt(&mut self, learnt: Vec<Lit>) {
        if learnt.len() == 1 {
            self.units.push(learnt[0]);
            self.unchecked_enqueue(learnt[0], NO_REASON);
            return;
        }
        let cref = self.clauses.len() as u32;
        self.watches[(!learnt[0]).code()].push(Watch { cref, blocker: learnt[1] });
        self.watches[(!learnt[1]).code()].push(Watch { cref, blocker: learnt[0] });
        let first = learnt[0];
        self.clauses.push(Clause { lits: learnt, learnt: true });
        self.unchecked_enqueue(first, cref);
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.update(v, &self.activity);
    }

    fn decay_activities(&mut self) {
        self.var_inc /= self.config.var_decay;
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.order.pop(&self.activity) {
            if self.assigns[v] == LBool::Undef {
                return Some(Lit::new(v, self.phase[v]));
            }
        }
        None
    }

    fn stats_snapshot(&self) -> (u64, u64, u64) {
        (self.decisions, self.propagations, self.conflicts)
    }

    pub fn solve(&mut self, assumptions: &[i32], budget: &Budget) -> SatResult {
        let t0 = Instant::now();
        let before = self.stats_snapshot();
        let finish = |s: &Solver, status: Status, model: Option<Vec<bool>>| {
            let (d, p, c) = s.stats_snapshot();
            SatResult {
                status,
                model,
                stats: QueryStats {
                    decisions: d - before.0,
                    propagations: p - before.1,
                    conflicts: c - before.2,
                    wall: t0.elapsed(),
                },
            }
        };
        self.cancel_until(0);
        if !self.ok {
            return finish(self, Status::Unsat, None);
        }
        for &l in assumptions {
            assert!(l != 0, "literal 0 is reserved");
            self.ensure_vars(l.unsigned_abs() as usize);
        }
        let assumps: Vec<Lit> = assumptions.iter().map(|&l| Lit::from_dimacs(l)).collect();

        let mut call_conflicts: u64 = 0;
        let mut restart_unit: u64 = 0;
        let mut since_restart: u64 = 0;
        let mut restart_limit = luby(restart_unit) * self.config.restart_base;

        loop {
            if let Some(confl) = self.propagate() {
                self.conflicts += 1;
                call_conflicts += 1;
                since_restart += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return finish(self, Status::Unsat, None);
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                self.record_learnt(learnt);
                self.decay_activities();
                if let Some(max) = budget.max_conflicts {
                    if call_conflicts >= max {
                        self.cancel_until(0);
                        return finish(self, Status::Timeout, None);
                    }
                }
                if call_conflicts.is_multiple_of(64) {
                    if let Some(deadline) = budget.deadline {
                        if Instant::now() >= deadline {
                            self.cancel_until(0);
                            return finish(self, Status::Timeout, None);
                        }
                    }
                }
            } else {
                if since_restart >= restart_limit {
                    restart_unit += 1;
                    since_restart = 0;
                    restart_limit = luby(restart_unit) * self.config.restart_base;
                    self.cancel_until(0);
                    continue;
                }
                let dl = self.decision_level();
                if dl < assumps.len() {
                    let p = assumps[dl];
                    match self.value(p) {
                        LBool::True => self.new_decision_level(),
                        LBool::False => {
                            self.cancel_until(0);
                            return finish(self, Status::Unsat, None);
                        }
                        LBool::Undef => {
                            self.new_decision_level();
                            self.unchecked_enqueue(p, NO_REASON);
                        }
                    }
                } else if let Some(next) = self.pick_branch() {
                    self.decisions += 1;
                    self.new_decision_level();
                    self.unchecked_enqueue(next, NO_REASON);
                } else {
                    let model: Vec<bool> =
                        self.assigns.iter().map(|&a| a == LBool::True).collect();
                    self.verify_model(&model, &assumps);
                    self.cancel_until(0);
                    return finish(self, Status::Sat, Some(model));
                }
            }
        }
    }

    /// Every SAT answer is re-verified clause-by-clause before return.
    fn verify_model(&self, model: &[bool], assumptions: &[Lit]) {
        let lit_ok = |l: &Lit| model[l.var()] == l.is_pos();
        for clause in &self.clauses {
            if !clause.learnt {
                assert!(
                    clause.lits.iter().any(lit_ok),
                    "solver produced a model violating a clause"
                );
            }
        }
        for unit in &self.units {
            assert!(lit_ok(unit), "solver produced a model violating a unit clause");
        }
        for a in assumptions {
            assert!(lit_ok(a), "solver produced a model violating an assumption");
        }
    }

    pub fn total_conflicts(&self) -> u64 {
        self.conflicts
    }
}

/// Luby restart sequence: 1 1 2 1 1 2 4 1 1 2 1 1 2 4 8 ...
fn luby(x: u64) -> u64 {
    let mut size: u64 = 1;
    let mut seq: u32 = 0;
    let mut x = x;
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) / 2;
        seq -= 1;
        x %= size;
    }
    1u64 << seq
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Binary max-heap over variables ordered by activity, ties broken by the
/// smaller variable index for reproducibility.
struct VarOrder {
    heap: Vec<usize>,
    pos: Vec<usize>,
}

const NOT_IN_HEAP: usize = usize::MAX;

impl VarOrder {
    fn new() -> VarOrder {
        VarOrder { heap: Vec::new(), pos: Vec::new() }
    }

    fn before(a: usize, b: usize, act: &[f64]) -> bool {
        act[a] > act[b] || (act[a] == act[b] && a < b)
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        while self.pos.len() <= v {
            self.pos.push(NOT_IN_HEAP);
        }
        if self.pos[v] != NOT_IN_HEAP {
            return;
        }
        self.pos[v] = self.heap.len();
        self.heap.push(v);
        self.up(self.heap.len() - 1, act);
    }

    fn update(&mut self, v: usize, act: &[f64]) {
        if v < self.pos.len() && self.pos[v] != NOT_IN_HEAP {
            self.up(self.pos[v], act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap[0];
        let last = self.heap.pop().unwrap();
        self.pos[top] = NOT_IN_HEAP;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last] = 0;
            self.down(0, act);
        }
        Some(top)
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if Self::before(self.heap[i], self.heap[parent], act) {
                self.swap(i, parent);
                i = parent;
            } else {
                break;
            }
        }
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        loop {
            let l = 2 * i + 1;
            let r = 2 * i + 2;
            let mut best = i;
            if l < self.heap.len() && Self::before(self.heap[l], self.heap[best], act) {
                best = l;
            }
            if r < self.heap.len() && Self::before(self.heap[r], self.heap[best], act) {
                best = r;
            }
            if best == i {
                break;
            }
            self.swap(i, best);
            i = best;
        }
    }

    fn swap(&mut self, i: usize, j: usize) {
        self.heap.swap(i, j);
        self.pos[self.heap[i]] = i;
        self.pos[self.heap[j]] = j;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn luby_prefix() {
        let want = [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8];
        let got: Vec<u64> = (0..want.len() as u64).map(luby).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn unit_propagation_chain() {
        let mut f = CnfFormula::new(3);
        f.add_clause(&[1]);
        f.add_clause(&[-1, 2]);
        f.add_clause(&[-2, 3]);
        let r = super::super::solve_formula(&f, &[], &Budget::unlimited());
        assert_eq!(r.status, Status::Sat);
        assert_eq!(r.model.unwrap(), vec![true, true, true]);
    }

    #[test]
    fn pigeonhole_two_in_one() {
        // 2 pigeons, 1 hole: p1 in h1, p2 in h1, not both.
        let mut f = CnfFormula::new(2);
        f.add_clause(&[1]);
        f.add_clause(&[2]);
        f.add_clause(&[-1, -2]);
        assert_eq!(super::super::solve_formula(&f, &[], &Budget::unlimited()).status, Status::Unsat);
    }

    #[test]
    fn incremental_assumptions_reuse() {
        let mut s = Solver::new(SolverConfig::default());
        let mut f = CnfFormula::new(3);
        f.add_clause(&[-1, 2]);
        f.add_clause(&[-2, 3]);
        s.load(&f);
        assert_eq!(s.solve(&[1, -3], &Budget::unlimited()).status, Status::Unsat);
        assert_eq!(s.solve(&[1], &Budget::unlimited()).status, Status::Sat);
        assert_eq!(s.solve(&[-3, 1], &Budget::unlimited()).status, Status::Unsat);
        // Still usable after adding a clause.
        s.add_clause_dimacs(&[-1]);
        assert_eq!(s.solve(&[1], &Budget::unlimited()).status, Status::Unsat);
        assert_eq!(s.solve(&[-1], &Budget::unlimited()).status, Status::Sat);
    }

    #[test]
    fn conflict_budget_times_out() {
        // Hard random-ish instance: pigeonhole 5 into 4.
        let pigeons = 5;
        let holes = 4;
        let var = |p: usize, h: usize| (p * holes + h + 1) as i32;
        let mut f = CnfFormula::new(pigeons * holes);
        for p in 0..pigeons {
            let clause: Vec<i32> = (0..holes).map(|h| var(p, h)).collect();
            f.add_clause(&clause);
        }
        for h in 0..holes {
            for p1 in 0..pigeons {
                for p2 in p1 + 1..pigeons {
                    f.add_clause(&[-var(p1, h), -var(p2, h)]);
                }
            }
        }
        let r = super::super::solve_formula(&f, &[], &Budget::conflicts(1));
        assert_eq!(r.status, Status::Timeout);
        // And without the budget it is decided.
        let r = super::super::solve_formula(&f, &[], &Budget::unlimited());
        assert_eq!(r.status, Status::Unsat);
    }
}
