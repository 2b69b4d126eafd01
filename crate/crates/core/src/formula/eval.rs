//! Windowed model checking in `(ℤ, +, -, 0, 1, <, (l^ℕ))`.
//!
//! Atoms are evaluated exactly. A quantifier guarded by `U_l(x)` ranges over
//! the powers of `l` up to the height bound; any other quantifier ranges over
//! `[-N, N]`, reduced to finitely many candidates. When every atom mentioning
//! the variable is univariate once outer variables are fixed, truth between
//! consecutive critical points depends only on the residue modulo the lcm of
//! the `D` moduli, so a neighbourhood of each critical point decides the whole
//! range exactly. Otherwise the candidates are a sample and the result says so.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{Formula, Term};
use crate::error::{Error, Result};
use crate::numerics::{exact_log, Int};

/// Quantifier ranges for model checking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalWindow {
    /// Unguarded quantifiers range over `[-bound, bound]`.
    pub bound: Int,
    /// Guarded quantifiers range over powers up to `height`.
    pub height: Int,
    /// Largest accepted cost estimate.
    pub cost_cap: u128,
}

impl EvalWindow {
    pub fn new(bound: impl Into<Int>, height: impl Into<Int>) -> EvalWindow {
        EvalWindow { bound: bound.into(), height: height.into(), cost_cap: DEFAULT_COST_CAP }
    }

    pub fn with_cost_cap(mut self, cap: u128) -> EvalWindow {
        self.cost_cap = cap;
        self
    }
}

pub const DEFAULT_COST_CAP: u128 = 200_000_000;

impl Default for EvalWindow {
    fn default() -> Self {
        EvalWindow::new(1_000_000u64, BigInt::one() << 40)
    }
}

/// How much of the window a pass covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Coverage {
    /// Every point of the window is decided.
    Exhaustive,
    /// Some unguarded quantifier was checked on sample points only.
    Sampled,
}

impl Coverage {
    pub fn as_str(&self) -> &'static str {
        match self {
            Coverage::Exhaustive => "exhaustive",
            Coverage::Sampled => "sampled",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalOutcome {
    Pass { coverage: Coverage, points: u64 },
    /// Values of the quantified variables at which the sentence fails.
    Counterexample(BTreeMap<String, Int>),
}

impl EvalOutcome {
    pub fn is_pass(&self) -> bool {
        matches!(self, EvalOutcome::Pass { .. })
    }
}

struct Ctx<'a> {
    window: &'a EvalWindow,
    coverage: Coverage,
    points: u64,
    trail: Vec<(String, Int)>,
}

/// Checks a sentence on the window.
pub fn eval_window(sentence: &Formula, window: &EvalWindow) -> Result<EvalOutcome> {
    if !sentence.is_sentence() {
        return Err(Error::InvalidInput(format!(
            "formula has free variables {:?}",
            sentence.free_vars()
        )));
    }
    sentence.validate()?;
    let cost = estimate_cost(sentence, window);
    if cost > window.cost_cap {
        return Err(Error::WindowTooLarge { cost, cap: window.cost_cap });
    }
    let mut ctx = Ctx { window, coverage: Coverage::Exhaustive, points: 0, trail: Vec::new() };
    let mut env = BTreeMap::new();
    if eval(sentence, &mut env, &mut ctx) {
        Ok(EvalOutcome::Pass { coverage: ctx.coverage, points: ctx.points })
    } else {
        Ok(EvalOutcome::Counterexample(ctx.trail.into_iter().collect()))
    }
}

/// Truth of a formula under an assignment of its free variables, with
/// quantifiers relativized to the window.
pub fn eval_with(formula: &Formula, env: &BTreeMap<String, Int>, window: &EvalWindow) -> Result<bool> {
    if let Some(v) = formula.free_vars().into_iter().find(|v| !env.contains_key(v)) {
        return Err(Error::InvalidInput(format!("free variable {v} is unassigned")));
    }
    let mut ctx = Ctx { window, coverage: Coverage::Exhaustive, points: 0, trail: Vec::new() };
    Ok(eval(formula, &mut env.clone(), &mut ctx))
}

fn atom_true(f: &Formula, env: &BTreeMap<String, Int>) -> bool {
    let val = |t: &Term| t.value(env).expect("assigned");
    match f {
        Formula::Eq(a, b) => val(&a.sub(b)).is_zero(),
        Formula::Lt(a, b) => val(&b.sub(a)).is_positive(),
        Formula::U(l, t) => exact_log(*l, &val(t)).is_some(),
        Formula::D(n, t) => val(t).is_multiple_of(&BigInt::from(*n)),
        _ => unreachable!("not an atom"),
    }
}

fn eval(f: &Formula, env: &mut BTreeMap<String, Int>, ctx: &mut Ctx) -> bool {
    match f {
        Formula::Eq(..) | Formula::Lt(..) | Formula::U(..) | Formula::D(..) => atom_true(f, env),
        Formula::Not(g) => !eval(g, env, ctx),
        Formula::And(fs) => fs.iter().all(|g| eval(g, env, ctx)),
        Formula::Or(fs) => fs.iter().any(|g| eval(g, env, ctx)),
        Formula::Implies(a, b) => !eval(a, env, ctx) || eval(b, env, ctx),
        Formula::Forall(v, body) => {
            let (dom, exact) = domain(v, body, true, env, ctx.window);
            if !exact {
                ctx.coverage = Coverage::Sampled;
            }
            for val in dom {
                ctx.points += 1;
                let mark = ctx.trail.len();
                env.insert(v.clone(), val.clone());
                let ok = eval(body, env, ctx);
                env.remove(v);
                if !ok {
                    ctx.trail.push((v.clone(), val));
                    return false;
                }
                ctx.trail.truncate(mark);
            }
            true
        }
        Formula::Exists(v, body) => {
            let (dom, exact) = domain(v, body, false, env, ctx.window);
            if !exact {
                ctx.coverage = Coverage::Sampled;
            }
            let mark = ctx.trail.len();
            for val in dom {
                ctx.points += 1;
                env.insert(v.clone(), val);
                let ok = eval(body, env, ctx);
                env.remove(v);
                if ok {
                    ctx.trail.truncate(mark);
                    return true;
                }
            }
            ctx.trail.truncate(mark);
            false
        }
    }
}

fn is_var(t: &Term, v: &str) -> bool {
    t.constant_part().is_zero() && t.coeffs().len() == 1 && t.coeff(v).is_one()
}

/// Base of a `U_l(v)` guard: a conjunct of the antecedent of a universal, or
/// of the body of an existential, possibly behind further quantifiers of the
/// same kind.
fn guard_base(v: &str, mut body: &Formula, universal: bool) -> Option<u64> {
    loop {
        match (universal, body) {
            (true, Formula::Forall(_, inner)) | (false, Formula::Exists(_, inner)) => body = inner,
            _ => break,
        }
    }
    let from_conj = |g: &Formula| -> Option<u64> {
        match g {
            Formula::U(l, t) if is_var(t, v) => Some(*l),
            Formula::And(fs) => fs.iter().find_map(|h| match h {
                Formula::U(l, t) if is_var(t, v) => Some(*l),
                _ => None,
            }),
            _ => None,
        }
    };
    match (universal, body) {
        (true, Formula::Implies(a, _)) => from_conj(a),
        (true, Formula::Or(fs)) => fs.iter().find_map(|h| match h {
            Formula::Not(g) => from_conj(g),
            _ => None,
        }),
        (false, b) => from_conj(b),
        _ => None,
    }
}

fn atoms<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
    match f {
        Formula::Eq(..) | Formula::Lt(..) | Formula::U(..) | Formula::D(..) => out.push(f),
        Formula::Not(g) | Formula::Forall(_, g) | Formula::Exists(_, g) => atoms(g, out),
        Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|g| atoms(g, out)),
        Formula::Implies(a, b) => {
            atoms(a, out);
            atoms(b, out);
        }
    }
}

/// `a v + b` after substituting the assigned variables; `None` when another
/// unassigned variable remains.
fn univariate(t: &Term, v: &str, env: &BTreeMap<String, Int>) -> Option<(Int, Int)> {
    let mut a = Int::zero();
    let mut b = t.constant_part().clone();
    for (name, c) in t.coeffs() {
        if name == v {
            a = c.clone();
        } else {
            b += c * env.get(name)?;
        }
    }
    Some((a, b))
}

fn atom_term(f: &Formula) -> Term {
    match f {
        Formula::Eq(a, b) | Formula::Lt(a, b) => b.sub(a),
        Formula::U(_, t) | Formula::D(_, t) => t.clone(),
        _ => unreachable!(),
    }
}

/// Points `v` where `a v + b` is a power of `l` of size at most `limit`.
fn power_points(l: u64, a: &Int, b: &Int, limit: &Int, out: &mut BTreeSet<Int>) {
    let mut p = Int::one();
    let lb = BigInt::from(l);
    while &p <= limit {
        let (q, r) = (&p - b).div_rem(a);
        if r.is_zero() {
            out.insert(q);
        }
        p *= &lb;
    }
}

/// Largest lcm of `D` moduli tracked before candidates are capped.
const MAX_PERIOD: u64 = 1 << 16;

fn domain(v: &str, body: &Formula, universal: bool, env: &BTreeMap<String, Int>, window: &EvalWindow) -> (Vec<Int>, bool) {
    let mut all = Vec::new();
    atoms(body, &mut all);
    let mut eq_points = BTreeSet::new();
    for f in &all {
        if let Formula::Eq(..) = f {
            if let Some((a, b)) = univariate(&atom_term(f), v, env) {
                if !a.is_zero() && (-&b).is_multiple_of(&a) {
                    eq_points.insert(-b / a);
                }
            }
        }
    }
    if let Some(l) = guard_base(v, body, universal) {
        let mut dom = BTreeSet::new();
        let lb = BigInt::from(l);
        let mut p = Int::one();
        while p <= window.height {
            dom.insert(p.clone());
            p *= &lb;
        }
        dom.extend(eq_points.into_iter().filter(|x| exact_log(l, x).is_some()));
        return (dom.into_iter().collect(), true);
    }

    let n = &window.bound;
    let mut exact = true;
    let mut period: u64 = 1;
    let mut critical = eq_points;
    for f in &all {
        let t = atom_term(f);
        if t.coeff(v).is_zero() {
            continue;
        }
        if let Formula::D(m, _) = f {
            period = num_integer::lcm(period, *m).min(MAX_PERIOD);
        }
        let Some((a, b)) = univariate(&t, v, env) else {
            exact = false;
            continue;
        };
        match f {
            Formula::Eq(..) | Formula::Lt(..) => {
                let (q, _) = (-&b).div_mod_floor(&a);
                critical.insert(q.clone());
                critical.insert(q + 1);
            }
            Formula::U(l, _) => {
                let limit = a.abs() * n + b.abs();
                power_points(*l, &a, &b, &limit, &mut critical);
            }
            _ => {}
        }
    }
    if period >= MAX_PERIOD {
        exact = false;
    }
    let reach = Int::from(period) + 1;
    let lo = -n.clone();
    let mut dom = BTreeSet::new();
    let span = |c: &Int, dom: &mut BTreeSet<Int>| {
        let mut x: Int = std::cmp::max(c - &reach, lo.clone());
        let end = std::cmp::min(c + &reach, n.clone());
        while x <= end {
            dom.insert(x.clone());
            x += 1;
        }
    };
    let mut anchors: Vec<Int> = critical.iter().cloned().collect();
    anchors.push(lo.clone());
    anchors.push(n.clone());
    if !exact {
        // spread sample points
        anchors.push(Int::zero());
        for d in [2u32, 3, 7] {
            anchors.push(n / d);
            anchors.push(-(n / d));
        }
    }
    for c in &anchors {
        if c >= &lo && c <= n {
            span(c, &mut dom);
        } else if c < &lo {
            span(&lo, &mut dom);
        } else {
            span(n, &mut dom);
        }
    }
    // equality solutions outside the window are still exact values
    dom.extend(critical.into_iter().filter(|c| c < &lo || c > n));
    (dom.into_iter().collect(), exact)
}

/// Rough count of atom evaluations needed to check `f` on the window.
pub fn estimate_cost(f: &Formula, window: &EvalWindow) -> u128 {
    match f {
        Formula::Eq(..) | Formula::Lt(..) | Formula::U(..) | Formula::D(..) => 1,
        Formula::Not(g) => estimate_cost(g, window),
        Formula::And(fs) | Formula::Or(fs) => fs.iter().map(|g| estimate_cost(g, window)).sum::<u128>().max(1),
        Formula::Implies(a, b) => estimate_cost(a, window) + estimate_cost(b, window),
        Formula::Forall(v, body) | Formula::Exists(v, body) => {
            let universal = matches!(f, Formula::Forall(..));
            let size = match guard_base(v, body, universal) {
                Some(l) => powers_up_to(l, &window.height) + 1,
                None => {
                    let mut all = Vec::new();
                    atoms(body, &mut all);
                    let mut period = 1u64;
                    let mut mentions = 0u128;
                    let mut power_atoms = 0u128;
                    for a in &all {
                        let t = atom_term(a);
                        if t.coeff(v).is_zero() {
                            continue;
                        }
                        mentions += 1;
                        match a {
                            Formula::D(m, _) => period = num_integer::lcm(period, *m).min(MAX_PERIOD),
                            Formula::U(l, _) => {
                                power_atoms += powers_up_to(*l, &(t.coeff(v).abs() * &window.bound * 2));
                            }
                            _ => {}
                        }
                    }
                    let width = 2 * period as u128 + 3;
                    let by_points = (2 * mentions + power_atoms + 9) * width;
                    let full = window.bound.to_u128().map_or(u128::MAX, |b| 2 * b + 1);
                    by_points.min(full)
                }
            };
            size.saturating_mul(estimate_cost(body, window))
        }
    }
}

fn powers_up_to(l: u64, h: &Int) -> u128 {
    let mut p = Int::one();
    let mut c = 0;
    while &p <= h {
        p *= l;
        c += 1;
    }
    c
}
