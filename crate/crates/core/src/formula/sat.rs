//! Satisfiability of conjunctions of literals over power variables.
//!
//! Equations are solved first: each one is handed to the Mann engine and every
//! family or isolated solution it reports becomes a set of exponent ties. What
//! remains (strict inequalities, disequalities and congruences over the
//! surviving free exponents) goes to the inequality solver with per-variable
//! exponent sets.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::{eval_with, EvalWindow, Formula, Term};
use crate::congruence::{power_residues, ExponentSet};
use crate::error::{Error, Result};
use crate::ineq::{solve_with_sets, Budget, IneqOutcome, LinearIneqSystem, PowerVar};
use crate::mann::{family_structure, Completeness, PowerEquation, UConstraint, DEFAULT_MANN_BOUND};
use crate::numerics::{pow, Int, Rat};

#[derive(Debug, Clone)]
pub struct SatBudget {
    pub mann_bound: u64,
    pub ineq: Budget,
    /// Case branches (equation solutions, disequality signs, residue phases).
    pub max_branches: usize,
}

impl Default for SatBudget {
    fn default() -> Self {
        SatBudget { mann_bound: DEFAULT_MANN_BOUND, ineq: Budget::default(), max_branches: 20_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatOutcome {
    /// Values of the variables; verified against the formula.
    Sat(BTreeMap<String, Int>),
    Unsat,
    Unknown(String),
}

/// A conjunction split by literal kind; terms are read as `t = 0`, `t > 0`,
/// `t != 0` and `D_n(t)` (or its negation).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Conjunction {
    pub vars: Vec<PowerVar>,
    pub equations: Vec<Term>,
    pub inequalities: Vec<Term>,
    pub disequalities: Vec<Term>,
    pub congruences: Vec<(u64, Term, bool)>,
}

impl Conjunction {
    pub fn from_formula(f: &Formula) -> Result<Conjunction> {
        let mut c = Conjunction::default();
        let mut bases: BTreeMap<String, u64> = BTreeMap::new();
        let literals: Vec<&Formula> = match f {
            Formula::And(fs) => fs.iter().collect(),
            other => vec![other],
        };
        let bad = |l: &Formula| Error::InvalidInput(format!("not a supported literal: {}", l.render()));
        for lit in literals {
            match lit {
                Formula::U(b, t) => {
                    let v = single_var(t).ok_or_else(|| bad(lit))?;
                    if bases.insert(v.clone(), *b).is_some_and(|old| old != *b) {
                        return Err(Error::InvalidInput(format!("variable {v} has two power constraints")));
                    }
                }
                Formula::Eq(a, b) => c.equations.push(a.sub(b)),
                Formula::Lt(a, b) => c.inequalities.push(b.sub(a)),
                Formula::D(n, t) => c.congruences.push((*n, t.clone(), true)),
                Formula::Not(inner) => match inner.as_ref() {
                    Formula::Eq(a, b) => c.disequalities.push(a.sub(b)),
                    // not (a < b) over the integers: a - b + 1 > 0
                    Formula::Lt(a, b) => c.inequalities.push(a.sub(b).add(&Term::constant(1))),
                    Formula::D(n, t) => c.congruences.push((*n, t.clone(), false)),
                    _ => return Err(bad(lit)),
                },
                Formula::And(fs) if fs.is_empty() => {}
                _ => return Err(bad(lit)),
            }
        }
        for v in f.free_vars() {
            if !bases.contains_key(&v) {
                return Err(Error::InvalidInput(format!("variable {v} has no power constraint")));
            }
        }
        c.vars = bases.into_iter().map(|(id, base)| PowerVar { id, base }).collect();
        Ok(c)
    }
}

fn single_var(t: &Term) -> Option<String> {
    if t.constant_part().is_zero() && t.coeffs().len() == 1 {
        let (v, c) = t.coeffs().iter().next()?;
        if c == &Int::from(1) {
            return Some(v.clone());
        }
    }
    None
}

/// Decides a conjunction of literals in which every variable carries one
/// `U_l` constraint.
pub fn sat_conjunction(f: &Formula, budget: &SatBudget) -> Result<SatOutcome> {
    if !f.free_vars().is_empty() || !matches!(f, Formula::Forall(..) | Formula::Exists(..)) {
        let conj = Conjunction::from_formula(f)?;
        let outcome = solve_conjunction(&conj, budget)?;
        if let SatOutcome::Sat(values) = &outcome {
            let window = EvalWindow::default();
            assert!(eval_with(f, values, &window)?, "satisfying assignment failed verification");
        }
        return Ok(outcome);
    }
    Err(Error::InvalidInput("expected a quantifier-free conjunction of literals".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Link {
    Root,
    /// `e_self = e_to + off`.
    Tied { to: usize, off: u64 },
    Fixed(u64),
}

#[derive(Debug, Clone)]
struct State {
    links: Vec<Link>,
}

impl State {
    /// `(root, offset)` or `(None, exponent)`.
    fn resolve(&self, i: usize) -> (Option<usize>, u64) {
        match self.links[i] {
            Link::Root => (Some(i), 0),
            Link::Fixed(e) => (None, e),
            Link::Tied { to, off } => {
                let (r, o) = self.resolve(to);
                (r, o + off)
            }
        }
    }

    fn fix(&mut self, i: usize, e: u64) -> bool {
        match self.resolve(i) {
            (Some(r), o) if e >= o => {
                self.links[r] = Link::Fixed(e - o);
                true
            }
            (Some(_), _) => false,
            (None, f) => f == e,
        }
    }

    /// `e_mu = e_sigma + c` (with `c` possibly negative).
    fn tie(&mut self, mu: usize, sigma: usize, c: i128) -> bool {
        let (rm, om) = self.resolve(mu);
        let (rs, os) = self.resolve(sigma);
        // e_rm + om = e_rs + os + c
        let delta = os as i128 + c - om as i128; // e_rm = e_rs + delta
        match (rm, rs) {
            (Some(a), Some(b)) if a == b => delta == 0,
            (Some(a), Some(b)) => {
                if delta >= 0 {
                    self.links[a] = Link::Tied { to: b, off: delta as u64 };
                } else {
                    self.links[b] = Link::Tied { to: a, off: (-delta) as u64 };
                }
                true
            }
            (Some(_), None) => {
                let target = os as i128 + c;
                target >= 0 && self.fix(mu, target as u64)
            }
            (None, Some(_)) => {
                let target = om as i128 - c;
                target >= 0 && self.fix(sigma, target as u64)
            }
            (None, None) => om as i128 == os as i128 + c,
        }
    }
}

/// Term over roots: coefficients per root and a constant.
fn substitute(t: &Term, vars: &[PowerVar], index: &BTreeMap<&str, usize>, state: &State) -> (BTreeMap<usize, Int>, Int) {
    let mut coeffs: BTreeMap<usize, Int> = BTreeMap::new();
    let mut constant = t.constant_part().clone();
    for (name, c) in t.coeffs() {
        let i = index[name.as_str()];
        match state.resolve(i) {
            (Some(r), off) => *coeffs.entry(r).or_insert_with(Int::zero) += c * pow(vars[i].base, off),
            (None, e) => constant += c * pow(vars[i].base, e),
        }
    }
    coeffs.retain(|_, c| !c.is_zero());
    (coeffs, constant)
}

struct Search<'a> {
    conj: &'a Conjunction,
    index: BTreeMap<&'a str, usize>,
    budget: &'a SatBudget,
    branches: usize,
    unknown: Option<String>,
}

fn solve_conjunction(conj: &Conjunction, budget: &SatBudget) -> Result<SatOutcome> {
    let index = conj.vars.iter().enumerate().map(|(i, v)| (v.id.as_str(), i)).collect();
    let mut search = Search { conj, index, budget, branches: 0, unknown: None };
    let state = State { links: vec![Link::Root; conj.vars.len()] };
    match search.equations(state, 0)? {
        Some(values) => Ok(SatOutcome::Sat(values)),
        None => Ok(search.unknown.map_or(SatOutcome::Unsat, SatOutcome::Unknown)),
    }
}

impl Search<'_> {
    fn note_unknown(&mut self, reason: String) {
        self.unknown.get_or_insert(reason);
    }

    fn charge(&mut self) -> bool {
        self.branches += 1;
        if self.branches > self.budget.max_branches {
            self.note_unknown(format!("more than {} case branches", self.budget.max_branches));
            return false;
        }
        true
    }

    fn equations(&mut self, state: State, k: usize) -> Result<Option<BTreeMap<String, Int>>> {
        if !self.charge() {
            return Ok(None);
        }
        let Some(eq) = self.conj.equations.get(k) else {
            return self.remainder(&state);
        };
        let vars = &self.conj.vars;
        let (coeffs, constant) = substitute(eq, vars, &self.index, &state);
        if coeffs.is_empty() {
            return if constant.is_zero() { self.equations(state, k + 1) } else { Ok(None) };
        }
        let roots: Vec<usize> = coeffs.keys().copied().collect();
        let a: Vec<Int> = coeffs.values().cloned().collect();
        let bases: Vec<u64> = roots.iter().map(|&r| vars[r].base).collect();
        // positions 1..=n of the Mann tuple map to `slots`; None is the constant 1
        let (equation, slots): (PowerEquation, Vec<Option<usize>>) = if !constant.is_zero() {
            let mut b = bases.clone();
            b.push(bases[0]);
            let mut s: Vec<Option<usize>> = roots.iter().map(|&r| Some(r)).collect();
            s.push(None);
            (PowerEquation::new(a, -constant, b)?, s)
        } else if roots.len() == 1 {
            return Ok(None);
        } else {
            let n = a.len() - 1;
            (
                PowerEquation::new(a[..n].to_vec(), -a[n].clone(), bases)?,
                roots.iter().map(|&r| Some(r)).collect(),
            )
        };
        let solutions = family_structure(&equation, self.budget.mann_bound)?;
        if solutions.completeness == Completeness::BoundLimited {
            self.note_unknown(format!(
                "solutions of {equation} beyond exponent {} are not excluded",
                self.budget.mann_bound
            ));
        }
        let pseudo_fixed = |st: &mut State, slot: Option<usize>, e: u64| match slot {
            Some(r) => st.fix(r, e),
            None => e == 0,
        };
        for family in &solutions.families {
            let mut st = state.clone();
            let ok = family.constraints.iter().all(|c| match *c {
                UConstraint::Fixed { xi, b } => pseudo_fixed(&mut st, slots[xi - 1], b),
                UConstraint::Coupled { mu, sigma, c } => match (slots[mu - 1], slots[sigma - 1]) {
                    (Some(m), Some(s)) => st.tie(m, s, c as i128),
                    (None, Some(s)) => c == 0 && st.fix(s, 0),
                    (Some(m), None) => st.fix(m, c),
                    (None, None) => c == 0,
                },
            });
            if ok {
                if let Some(found) = self.equations(st, k + 1)? {
                    return Ok(Some(found));
                }
            }
        }
        for tuple in &solutions.isolated {
            let mut st = state.clone();
            if tuple.iter().zip(&slots).all(|(&e, &slot)| pseudo_fixed(&mut st, slot, e)) {
                if let Some(found) = self.equations(st, k + 1)? {
                    return Ok(Some(found));
                }
            }
        }
        Ok(None)
    }

    /// Exponent alternatives for each root implied by the congruence literals,
    /// or `None` if a fixed variable violates them.
    fn root_sets(&self, state: &State) -> Result<Option<BTreeMap<usize, Vec<ExponentSet>>>> {
        let vars = &self.conj.vars;
        let mut per_var: BTreeMap<usize, Vec<(u64, Int, Int, bool)>> = BTreeMap::new();
        for (n, t, positive) in &self.conj.congruences {
            let vs: Vec<&str> = t.vars().collect();
            if vs.len() > 1 {
                return Err(Error::InvalidInput(format!("congruence literal D {n} {t} mentions several variables")));
            }
            match vs.first() {
                None => {
                    if t.constant_part().is_multiple_of(&BigInt::from(*n)) != *positive {
                        return Ok(None);
                    }
                }
                Some(v) => {
                    let i = self.index[v];
                    per_var.entry(i).or_default().push((*n, t.coeff(v), t.constant_part().clone(), *positive));
                }
            }
        }
        let mut out: BTreeMap<usize, Vec<ExponentSet>> = BTreeMap::new();
        for (i, lits) in per_var {
            let modulus = lits.iter().fold(1u64, |acc, l| num_integer::lcm(acc, l.0));
            let cycle = power_residues(vars[i].base, modulus)?;
            let admissible = |r: u64| {
                lits.iter().all(|(n, a, c, positive)| {
                    (a * Int::from(r) + c).is_multiple_of(&BigInt::from(*n)) == *positive
                })
            };
            let alternatives: Vec<ExponentSet> = (0..cycle.preperiod + cycle.period)
                .filter(|&e| admissible(cycle.residue(e)))
                .map(|e| {
                    if e < cycle.preperiod {
                        ExponentSet::Single(e)
                    } else {
                        ExponentSet::Progression { offset: e, period: cycle.period }
                    }
                })
                .collect();
            match state.resolve(i) {
                (None, e) => {
                    if !alternatives.iter().any(|s| s.contains(e)) {
                        return Ok(None);
                    }
                }
                (Some(r), off) => {
                    let shifted: Vec<ExponentSet> =
                        alternatives.iter().map(|s| s.shift_down(off)).filter(|s| !s.is_empty()).collect();
                    let current = out.remove(&r).unwrap_or_else(|| vec![ExponentSet::all()]);
                    let merged: Vec<ExponentSet> = current
                        .iter()
                        .flat_map(|a| shifted.iter().map(move |b| a.intersect(b)))
                        .filter(|s| !s.is_empty())
                        .collect();
                    if merged.is_empty() {
                        return Ok(None);
                    }
                    out.insert(r, merged);
                }
            }
        }
        Ok(Some(out))
    }

    fn remainder(&mut self, state: &State) -> Result<Option<BTreeMap<String, Int>>> {
        let vars = &self.conj.vars;
        let Some(sets) = self.root_sets(state)? else {
            return Ok(None);
        };
        let mut rows: Vec<(BTreeMap<usize, Int>, Int)> =
            self.conj.inequalities.iter().map(|t| substitute(t, vars, &self.index, state)).collect();
        let diseqs: Vec<(BTreeMap<usize, Int>, Int)> =
            self.conj.disequalities.iter().map(|t| substitute(t, vars, &self.index, state)).collect();
        // constant rows are decided now
        let mut open_diseqs = Vec::new();
        for d in diseqs {
            if d.0.is_empty() {
                if d.1.is_zero() {
                    return Ok(None);
                }
            } else {
                open_diseqs.push(d);
            }
        }
        rows.retain(|r| !r.0.is_empty() || !r.1.is_positive());
        if rows.iter().any(|r| r.0.is_empty()) {
            return Ok(None);
        }
        let roots: Vec<usize> = (0..vars.len()).filter(|&i| state.links[i] == Link::Root).collect();
        let phase_lists: Vec<Vec<ExponentSet>> =
            roots.iter().map(|r| sets.get(r).cloned().unwrap_or_else(|| vec![ExponentSet::all()])).collect();
        let mut phase = vec![0usize; roots.len()];
        loop {
            for signs in 0u64..(1u64 << open_diseqs.len()) {
                if !self.charge() {
                    return Ok(None);
                }
                let mut all_rows = rows.clone();
                for (j, (c, k)) in open_diseqs.iter().enumerate() {
                    if signs >> j & 1 == 0 {
                        all_rows.push((c.clone(), k.clone()));
                    } else {
                        all_rows.push((c.iter().map(|(r, v)| (*r, -v)).collect(), -k));
                    }
                }
                let chosen: Vec<ExponentSet> = phase.iter().zip(&phase_lists).map(|(&p, l)| l[p]).collect();
                if let Some(exps) = self.solve_rows(&roots, &chosen, &all_rows)? {
                    let mut values = BTreeMap::new();
                    for (i, v) in vars.iter().enumerate() {
                        let e = match state.resolve(i) {
                            (Some(r), off) => exps[&r] + off,
                            (None, e) => e,
                        };
                        values.insert(v.id.clone(), pow(v.base, e));
                    }
                    return Ok(Some(values));
                }
            }
            let mut pos = phase.len();
            loop {
                if pos == 0 {
                    return Ok(None);
                }
                pos -= 1;
                if phase[pos] + 1 < phase_lists[pos].len() {
                    phase[pos] += 1;
                    phase[pos + 1..].iter_mut().for_each(|p| *p = 0);
                    break;
                }
            }
        }
    }

    /// Exponents for the roots satisfying every row `Σ c_r x_r + k > 0`.
    fn solve_rows(
        &mut self,
        roots: &[usize],
        sets: &[ExponentSet],
        rows: &[(BTreeMap<usize, Int>, Int)],
    ) -> Result<Option<BTreeMap<usize, u64>>> {
        let vars = &self.conj.vars;
        let mut exps: BTreeMap<usize, u64> = BTreeMap::new();
        let used: Vec<usize> = roots.iter().copied().filter(|r| rows.iter().any(|row| row.0.contains_key(r))).collect();
        for (r, s) in roots.iter().zip(sets) {
            if !used.contains(r) {
                exps.insert(*r, s.minimum().expect("nonempty"));
            }
        }
        if used.is_empty() {
            return Ok(if rows.iter().all(|r| r.1.is_positive()) { Some(exps) } else { None });
        }
        let needs_one = rows.iter().any(|r| !r.1.is_zero());
        let mut pvars: Vec<PowerVar> = used.iter().map(|&r| vars[r].clone()).collect();
        let mut psets: Vec<ExponentSet> =
            used.iter().map(|r| sets[roots.iter().position(|x| x == r).unwrap()]).collect();
        if needs_one {
            pvars.push(PowerVar::new("1", vars[used[0]].base));
            psets.push(ExponentSet::Single(0));
        }
        let matrix: Vec<Vec<Rat>> = rows
            .iter()
            .map(|(c, k)| {
                let mut row: Vec<Rat> =
                    used.iter().map(|r| Rat::from_integer(c.get(r).cloned().unwrap_or_default())).collect();
                if needs_one {
                    row.push(Rat::from_integer(k.clone()));
                }
                row
            })
            .collect();
        let system = LinearIneqSystem::new(pvars, matrix)?;
        match solve_with_sets(&system, &psets, &self.budget.ineq)? {
            IneqOutcome::Sat(w) => {
                for (r, e) in used.iter().zip(&w.exponents) {
                    exps.insert(*r, *e);
                }
                Ok(Some(exps))
            }
            IneqOutcome::Unsat => Ok(None),
            IneqOutcome::Unknown(reason) => {
                self.note_unknown(reason);
                Ok(None)
            }
        }
    }
}
