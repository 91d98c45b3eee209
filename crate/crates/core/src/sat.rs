//! Satisfiability under assumptions, t-set validity, and randomized product
//! sampling.
//!
//! The engine is a DPLL search with two-watched-literal unit propagation and
//! chronological backtracking. Both the decision variable and its polarity
//! come from a seeded random source, so consecutive solutions do not follow
//! an enumeration order while staying reproducible for a fixed seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{FeatureModel, Product, TSet};
use crate::{Error, Result};

const UNASSIGNED: u8 = 0;
const TRUE: u8 = 1;
const FALSE: u8 = 2;

/// Internal literal code: `2 * var` for the positive literal, `2 * var + 1`
/// for the negative one, with 0-based variables.
type Lit = u32;

fn encode(lit: i32) -> Lit {
    let var = lit.unsigned_abs() - 1;
    (var << 1) | u32::from(lit < 0)
}

struct Level {
    trail_start: usize,
    decision: Lit,
    flipped: bool,
    cursor: usize,
}

/// A reusable DPLL solver over one model's clauses plus any clauses added
/// later (blocking clauses). Each `solve` call starts from scratch; nothing
/// is learned between calls.
pub struct Solver {
    num_vars: usize,
    clauses: Vec<Vec<Lit>>,
    units: Vec<Lit>,
    base_clauses: usize,
    base_units: usize,
    watches: Vec<Vec<u32>>,
    values: Vec<u8>,
    trail: Vec<Lit>,
    qhead: usize,
    levels: Vec<Level>,
    order: Vec<u32>,
}

impl Solver {
    pub fn new(fm: &FeatureModel) -> Self {
        let n = fm.num_features();
        let mut solver = Solver {
            num_vars: n,
            clauses: Vec::new(),
            units: Vec::new(),
            base_clauses: 0,
            base_units: 0,
            watches: vec![Vec::new(); 2 * n],
            values: vec![UNASSIGNED; n],
            trail: Vec::with_capacity(n),
            qhead: 0,
            levels: Vec::new(),
            order: (0..n as u32).collect(),
        };
        for clause in fm.clauses() {
            solver.add_clause(clause);
        }
        solver.base_clauses = solver.clauses.len();
        solver.base_units = solver.units.len();
        solver
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Adds a clause of signed 1-based literals. Duplicate literals are
    /// merged; a tautological clause is ignored.
    pub fn add_clause(&mut self, clause: &[i32]) {
        let mut lits: Vec<Lit> = clause.iter().map(|&l| encode(l)).collect();
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0] ^ 1 == w[1]) {
            return;
        }
        match lits.len() {
            0 => panic!("empty clause"),
            1 => self.units.push(lits[0]),
            _ => {
                let idx = self.clauses.len() as u32;
                self.watches[lits[0] as usize].push(idx);
                self.watches[lits[1] as usize].push(idx);
                self.clauses.push(lits);
            }
        }
    }

    /// Drops every clause added after construction.
    pub fn reset_added_clauses(&mut self) {
        let base = self.base_clauses as u32;
        self.clauses.truncate(self.base_clauses);
        self.units.truncate(self.base_units);
        for w in &mut self.watches {
            w.retain(|&c| c < base);
        }
    }

    pub fn added_clauses(&self) -> usize {
        self.clauses.len() - self.base_clauses + self.units.len() - self.base_units
    }

    fn lit_value(&self, lit: Lit) -> u8 {
        match self.values[(lit >> 1) as usize] {
            UNASSIGNED => UNASSIGNED,
            v if (v == TRUE) == (lit & 1 == 0) => TRUE,
            _ => FALSE,
        }
    }

    /// Returns false on an immediate conflict.
    fn enqueue(&mut self, lit: Lit) -> bool {
        match self.lit_value(lit) {
            TRUE => true,
            FALSE => false,
            _ => {
                self.values[(lit >> 1) as usize] = if lit & 1 == 0 { TRUE } else { FALSE };
                self.trail.push(lit);
                true
            }
        }
    }

    /// Unit propagation; returns false on conflict.
    fn propagate(&mut self) -> bool {
        while self.qhead < self.trail.len() {
            let false_lit = self.trail[self.qhead] ^ 1;
            self.qhead += 1;
            let mut ws = std::mem::take(&mut self.watches[false_lit as usize]);
            let mut kept = 0;
            let mut i = 0;
            let mut ok = true;
            while i < ws.len() {
                let ci = ws[i];
                i += 1;
                let clause = &mut self.clauses[ci as usize];
                if clause[0] == false_lit {
                    clause.swap(0, 1);
                }
                let first = clause[0];
                let first_value = match self.values[(first >> 1) as usize] {
                    UNASSIGNED => UNASSIGNED,
                    v if (v == TRUE) == (first & 1 == 0) => TRUE,
                    _ => FALSE,
                };
                if first_value == TRUE {
                    ws[kept] = ci;
                    kept += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..clause.len() {
                    let l = clause[k];
                    let v = self.values[(l >> 1) as usize];
                    let is_false = v != UNASSIGNED && ((v == TRUE) != (l & 1 == 0));
                    if !is_false {
                        clause.swap(1, k);
                        self.watches[l as usize].push(ci);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[kept] = ci;
                kept += 1;
                if first_value == FALSE || !self.enqueue(first) {
                    while i < ws.len() {
                        ws[kept] = ws[i];
                        kept += 1;
                        i += 1;
                    }
                    ok = false;
                }
            }
            ws.truncate(kept);
            self.watches[false_lit as usize] = ws;
            if !ok {
                return false;
            }
        }
        true
    }

    fn undo_to(&mut self, trail_len: usize) {
        for &lit in &self.trail[trail_len..] {
            self.values[(lit >> 1) as usize] = UNASSIGNED;
        }
        self.trail.truncate(trail_len);
        self.qhead = trail_len;
    }

    /// Searches for a total assignment extending `assumptions`.
    ///
    /// Assumptions must be in range and free of contradictory pairs; use
    /// [`check_assumptions`] first when they come from outside.
    pub fn solve_with<R: Rng + ?Sized>(&mut self, assumptions: &[i32], rng: &mut R) -> Option<Product> {
        self.undo_to(0);
        self.levels.clear();

        for i in 0..self.units.len() {
            if !self.enqueue(self.units[i]) {
                return None;
            }
        }
        for &a in assumptions {
            if !self.enqueue(encode(a)) {
                return None;
            }
        }
        if !self.propagate() {
            self.undo_to(0);
            return None;
        }

        self.order.shuffle(rng);
        let mut cursor = 0;
        loop {
            while cursor < self.order.len()
                && self.values[self.order[cursor] as usize] != UNASSIGNED
            {
                cursor += 1;
            }
            if cursor == self.order.len() {
                let signs: Vec<bool> = self.values.iter().map(|&v| v == TRUE).collect();
                let product = Product::from_bools(&signs);
                self.undo_to(0);
                return Some(product);
            }
            let var = self.order[cursor];
            let lit = (var << 1) | u32::from(rng.gen::<bool>());
            self.levels.push(Level {
                trail_start: self.trail.len(),
                decision: lit,
                flipped: false,
                cursor,
            });
            self.enqueue(lit);
            cursor += 1;

            while !self.propagate() {
                // Chronological backtracking: flip the most recent unflipped
                // decision.
                loop {
                    let Some(level) = self.levels.pop() else {
                        self.undo_to(0);
                        return None;
                    };
                    self.undo_to(level.trail_start);
                    if !level.flipped {
                        let flipped = level.decision ^ 1;
                        self.levels.push(Level {
                            trail_start: self.trail.len(),
                            decision: flipped,
                            flipped: true,
                            cursor: level.cursor,
                        });
                        self.enqueue(flipped);
                        cursor = level.cursor + 1;
                        break;
                    }
                }
            }
        }
    }
}

/// Rejects assumptions that are out of range or name one feature with both
/// polarities. The latter is a precondition failure, not UNSAT.
pub fn check_assumptions(num_features: usize, assumptions: &[i32]) -> Result<()> {
    let mut seen = vec![0i8; num_features + 1];
    for &a in assumptions {
        let f = a.unsigned_abs() as usize;
        if a == 0 || f > num_features {
            return Err(Error::LiteralOutOfRange {
                literal: a,
                features: num_features,
            });
        }
        let sign = if a > 0 { 1 } else { -1 };
        if seen[f] == -sign {
            return Err(Error::ContradictoryAssumptions(f));
        }
        seen[f] = sign;
    }
    Ok(())
}

/// A total assignment of `fm` extending `assumptions`, or `Ok(None)` if none
/// exists. The seed drives decision order and polarity.
pub fn solve(fm: &FeatureModel, assumptions: &[i32], seed: u64) -> Result<Option<Product>> {
    check_assumptions(fm.num_features(), assumptions)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(Solver::new(fm).solve_with(assumptions, &mut rng))
}

pub fn is_satisfiable(fm: &FeatureModel) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    Solver::new(fm).solve_with(&[], &mut rng).is_some()
}

/// True iff some valid product covers the t-set.
pub fn is_valid_tset(fm: &FeatureModel, ts: &TSet) -> Result<bool> {
    TSetValidator::new(fm).check(ts)
}

/// Reusable validity checker: one solver, many t-sets. Results do not
/// depend on the internal seed.
pub struct TSetValidator {
    solver: Solver,
    rng: ChaCha8Rng,
}

impl TSetValidator {
    pub fn new(fm: &FeatureModel) -> Self {
        TSetValidator {
            solver: Solver::new(fm),
            rng: ChaCha8Rng::seed_from_u64(0x7e57),
        }
    }

    pub fn check(&mut self, ts: &TSet) -> Result<bool> {
        check_assumptions(self.solver.num_vars(), ts.literals())?;
        Ok(self.check_literals(ts.literals()))
    }

    /// Skips the range check. Literals must be valid assumptions.
    pub(crate) fn check_literals(&mut self, literals: &[i32]) -> bool {
        self.solver.solve_with(literals, &mut self.rng).is_some()
    }

    /// A witness product covering the literals, if any.
    pub fn witness(&mut self, literals: &[i32]) -> Result<Option<Product>> {
        check_assumptions(self.solver.num_vars(), literals)?;
        Ok(self.solver.solve_with(literals, &mut self.rng))
    }
}

/// Draws valid products in a randomized order, never repeating a product
/// until the whole valid space has been emitted; then it starts over.
pub struct SamplerSession {
    solver: Solver,
    rng: ChaCha8Rng,
    seed: u64,
    emitted: u64,
    reinitializations: u64,
}

impl SamplerSession {
    /// Fails with [`Error::InconsistentModel`] if the model has no product.
    pub fn new(fm: &FeatureModel, seed: u64) -> Result<Self> {
        let mut session = SamplerSession {
            solver: Solver::new(fm),
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
            emitted: 0,
            reinitializations: 0,
        };
        let mut probe = ChaCha8Rng::seed_from_u64(seed);
        if session.solver.solve_with(&[], &mut probe).is_none() {
            return Err(Error::InconsistentModel);
        }
        Ok(session)
    }

    pub fn next_product(&mut self) -> Product {
        let product = match self.solver.solve_with(&[], &mut self.rng) {
            Some(p) => p,
            None => {
                self.solver.reset_added_clauses();
                self.reinitializations += 1;
                self.solver
                    .solve_with(&[], &mut self.rng)
                    .expect("session models are consistent")
            }
        };
        let blocking: Vec<i32> = product.literals().map(|l| -l).collect();
        self.solver.add_clause(&blocking);
        self.emitted += 1;
        product
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn emitted(&self) -> u64 {
        self.emitted
    }

    /// How many times the blocking clauses were cleared after the valid
    /// space ran out.
    pub fn reinitializations(&self) -> u64 {
        self.reinitializations
    }
}

impl Iterator for SamplerSession {
    type Item = Product;

    fn next(&mut self) -> Option<Product> {
        Some(self.next_product())
    }
}
