//! Homogeneous strict inequality systems `C x > 0` over variables that range
//! over powers of at most two independent bases, with optional congruences.

pub mod fm;
pub mod profile;
mod solver;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};
use serde_json::{json, Value};

use crate::congruence::{exponents_satisfying_all, powmod, CongruenceConstraint, CongruenceSystem, ExponentSet};
use crate::error::{Error, Result};
use crate::formula::{AxiomInstance, Formula, Schema, Term};
use crate::numerics::{format_rat, parse_rat, pow, Int, Rat, DEFAULT_PRECISION_CAP};

pub use solver::{real_feasible, solve_homogeneous, solve_with_sets, EliminationStep};

/// A variable ranging over `base^ℕ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PowerVar {
    pub id: String,
    pub base: u64,
}

impl PowerVar {
    pub fn new(id: impl Into<String>, base: u64) -> PowerVar {
        PowerVar { id: id.into(), base }
    }
}

/// Rows `Σ_j rows[i][j] x_j > 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearIneqSystem {
    pub vars: Vec<PowerVar>,
    pub rows: Vec<Vec<Rat>>,
}

impl LinearIneqSystem {
    pub fn new(vars: Vec<PowerVar>, rows: Vec<Vec<Rat>>) -> Result<LinearIneqSystem> {
        if let Some(r) = rows.iter().find(|r| r.len() != vars.len()) {
            return Err(Error::InvalidInput(format!("row of length {} over {} variables", r.len(), vars.len())));
        }
        if let Some(v) = vars.iter().find(|v| v.base < 2) {
            return Err(Error::InvalidInput(format!("variable {} has base {} < 2", v.id, v.base)));
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].iter().any(|w| w.id == v.id) {
                return Err(Error::InvalidInput(format!("duplicate variable id {}", v.id)));
            }
        }
        Ok(LinearIneqSystem { vars, rows })
    }

    /// Convenience constructor from integer rows.
    pub fn from_ints(vars: &[(&str, u64)], rows: &[&[i64]]) -> Result<LinearIneqSystem> {
        LinearIneqSystem::new(
            vars.iter().map(|&(id, b)| PowerVar::new(id, b)).collect(),
            rows.iter().map(|r| r.iter().map(|&c| Rat::from_integer(c.into())).collect()).collect(),
        )
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.id == id)
    }

    /// Distinct bases in increasing order.
    pub fn bases(&self) -> Vec<u64> {
        let mut b: Vec<u64> = self.vars.iter().map(|v| v.base).collect();
        b.sort_unstable();
        b.dedup();
        b
    }

    /// Exact check of every row at `x_j = base_j^{e_j}`.
    pub fn holds(&self, exponents: &[u64]) -> bool {
        let values: Vec<Rat> =
            self.vars.iter().zip(exponents).map(|(v, &e)| Rat::from_integer(pow(v.base, e))).collect();
        self.rows
            .iter()
            .all(|row| row.iter().zip(&values).map(|(c, x)| c * x).sum::<Rat>().is_positive())
    }

    /// Parses `{vars: [{id, base}], rows: [[q, ...]], congruences: [{id, mod, residue}]}`.
    pub fn from_json(value: &Value) -> Result<(LinearIneqSystem, CongruenceSystem)> {
        let bad = |m: &str| Error::InvalidInput(format!("system JSON: {m}"));
        let vars = value
            .get("vars")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing vars"))?
            .iter()
            .map(|v| {
                let id = match v.get("id") {
                    Some(Value::String(s)) => s.clone(),
                    Some(Value::Number(n)) => n.to_string(),
                    _ => return Err(bad("variable without id")),
                };
                let base = v.get("base").and_then(Value::as_u64).ok_or_else(|| bad("variable without base"))?;
                Ok(PowerVar { id, base })
            })
            .collect::<Result<Vec<_>>>()?;
        let rows = value
            .get("rows")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing rows"))?
            .iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(|| bad("row is not an array"))?
                    .iter()
                    .map(json_rat)
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let system = LinearIneqSystem::new(vars, rows)?;
        let congruences = match value.get("congruences") {
            None | Some(Value::Null) => CongruenceSystem::default(),
            Some(c) => congruences_from_json(&system, c)?,
        };
        Ok((system, congruences))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "vars": self.vars.iter().map(|v| json!({"id": v.id, "base": v.base})).collect::<Vec<_>>(),
            "rows": self.rows.iter().map(|r| r.iter().map(format_rat).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}

fn json_rat(v: &Value) -> Result<Rat> {
    match v {
        Value::Number(n) => parse_rat(&n.to_string()),
        Value::String(s) => parse_rat(s),
        _ => Err(Error::InvalidInput(format!("expected a rational, got {v}"))),
    }
}

/// Parses `[{id, mod, residue}]` against the variables of `system`.
pub fn congruences_from_json(system: &LinearIneqSystem, value: &Value) -> Result<CongruenceSystem> {
    let bad = |m: String| Error::InvalidInput(format!("congruence JSON: {m}"));
    let list = value.as_array().ok_or_else(|| bad("expected an array".into()))?;
    let mut out = Vec::new();
    for c in list {
        let id = match c.get("id") {
            Some(Value::String(s)) => s.clone(),
            Some(Value::Number(n)) => n.to_string(),
            _ => return Err(bad("missing id".into())),
        };
        let var = system.index_of(&id).ok_or_else(|| bad(format!("unknown variable {id}")))?;
        let modulus = c.get("mod").and_then(Value::as_u64).ok_or_else(|| bad("missing mod".into()))?;
        let residue = c.get("residue").and_then(Value::as_i64).ok_or_else(|| bad("missing residue".into()))?;
        out.push(CongruenceConstraint::new(var, modulus, residue as i128)?);
    }
    Ok(CongruenceSystem::new(out))
}

/// Exponent per variable, in the system's variable order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IneqWitness {
    pub exponents: Vec<u64>,
}

impl IneqWitness {
    pub fn to_json(&self, system: &LinearIneqSystem) -> Value {
        let map: serde_json::Map<String, Value> =
            system.vars.iter().zip(&self.exponents).map(|(v, &e)| (v.id.clone(), json!(e))).collect();
        Value::Object(map)
    }

    pub fn values(&self, system: &LinearIneqSystem) -> Vec<Int> {
        system.vars.iter().zip(&self.exponents).map(|(v, &e)| pow(v.base, e)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IneqOutcome {
    Sat(IneqWitness),
    Unsat,
    /// A budget ran out; the reason names it.
    Unknown(String),
}

impl IneqOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, IneqOutcome::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, IneqOutcome::Unsat)
    }
}

impl fmt::Display for IneqOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IneqOutcome::Sat(w) => write!(f, "sat {:?}", w.exponents),
            IneqOutcome::Unsat => write!(f, "unsat"),
            IneqOutcome::Unknown(r) => write!(f, "unknown: {r}"),
        }
    }
}

/// Search limits.
#[derive(Debug, Clone)]
pub struct Budget {
    /// Largest exact gap between same-base exponents; derived from the
    /// coefficients when `None`.
    pub nu_max: Option<u64>,
    /// Times `nu` is doubled before giving up.
    pub deepen_rounds: u32,
    pub max_profiles: usize,
    /// Exponent tuples tried by the direct box search.
    pub box_limit: u64,
    /// `t` values scanned per Kronecker query.
    pub scan_limit: u64,
    pub precision_cap: u32,
    /// Combinations of residue phases tried under congruences.
    pub max_phase_combinations: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            nu_max: None,
            deepen_rounds: 1,
            max_profiles: 100_000,
            box_limit: 100_000,
            scan_limit: 2_000_000,
            precision_cap: DEFAULT_PRECISION_CAP,
            max_phase_combinations: 4096,
        }
    }
}

/// Exponent sets allowed by the congruences, one list of alternatives per variable.
pub fn exponent_alternatives(system: &LinearIneqSystem, congruences: &CongruenceSystem) -> Result<Vec<Vec<ExponentSet>>> {
    if let Some(c) = congruences.constraints.iter().find(|c| c.var >= system.vars.len()) {
        return Err(Error::InvalidInput(format!("congruence on unknown variable index {}", c.var)));
    }
    system
        .vars
        .iter()
        .enumerate()
        .map(|(i, v)| exponents_satisfying_all(v.base, &congruences.for_var(i)))
        .collect()
}

pub fn congruences_hold(system: &LinearIneqSystem, congruences: &CongruenceSystem, exponents: &[u64]) -> bool {
    congruences.constraints.iter().all(|c| {
        let v = &system.vars[c.var];
        c.holds_mod(powmod(v.base, exponents[c.var], c.modulus))
    })
}

/// Solves `C x > 0` together with congruences on the variables.
///
/// Each variable's admissible exponents form a finite union of progressions
/// `o + p t`; every choice of one progression per variable is a rescaled
/// system over the bases `base^p`, solved independently.
pub fn solve_with_congruences(
    system: &LinearIneqSystem,
    congruences: &CongruenceSystem,
    budget: &Budget,
) -> Result<IneqOutcome> {
    let alternatives = exponent_alternatives(system, congruences)?;
    if alternatives.iter().any(Vec::is_empty) {
        return Ok(IneqOutcome::Unsat);
    }
    let total = alternatives.iter().try_fold(1usize, |acc, a| acc.checked_mul(a.len()));
    if total.is_none_or(|t| t > budget.max_phase_combinations) {
        return Ok(IneqOutcome::Unknown("too many residue phase combinations".into()));
    }
    let mut choice = vec![0usize; alternatives.len()];
    let mut unknown = None;
    loop {
        let sets: Vec<ExponentSet> = choice.iter().zip(&alternatives).map(|(&i, a)| a[i]).collect();
        match solve_with_sets(system, &sets, budget)? {
            IneqOutcome::Sat(w) => {
                assert!(system.holds(&w.exponents) && congruences_hold(system, congruences, &w.exponents));
                return Ok(IneqOutcome::Sat(w));
            }
            IneqOutcome::Unsat => {}
            IneqOutcome::Unknown(r) => {
                unknown.get_or_insert(r);
            }
        }
        let mut pos = choice.len();
        loop {
            if pos == 0 {
                return Ok(unknown.map_or(IneqOutcome::Unsat, IneqOutcome::Unknown));
            }
            pos -= 1;
            if choice[pos] + 1 < alternatives[pos].len() {
                choice[pos] += 1;
                choice[pos + 1..].iter_mut().for_each(|c| *c = 0);
                break;
            }
        }
    }
}

/// `∀x∀y [(U_l(x) ∧ U_l(y)) → (x > 0 ∧ ¬(x < y < l·x))]`.
pub fn binequ_axiom(base: u64) -> Result<AxiomInstance> {
    if base < 2 {
        return Err(Error::InvalidInput(format!("base must be at least 2, got {base}")));
    }
    let (x, y) = (Term::var("x"), Term::var("y"));
    let body = Formula::implies(
        Formula::And(vec![Formula::U(base, x.clone()), Formula::U(base, y.clone())]),
        Formula::And(vec![
            Formula::lt(Term::zero(), x.clone()),
            Formula::not(Formula::And(vec![
                Formula::lt(x.clone(), y.clone()),
                Formula::lt(y, Term::scaled_var(base, "x")),
            ])),
        ]),
    );
    Ok(AxiomInstance::new(Schema::U6, json!({"l": base}), Formula::forall_many(["x", "y"], body), "binequ"))
}

pub fn binequ_axioms(bases: &[u64]) -> Result<Vec<AxiomInstance>> {
    bases.iter().map(|&b| binequ_axiom(b)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum InequAxiomOutcome {
    Axiom(AxiomInstance),
    /// The system is solvable, so the instance would be false.
    NotAnAxiom(IneqWitness),
    Unknown(String),
}

/// Rows scaled to integers by the lcm of their denominators.
pub fn integer_rows(system: &LinearIneqSystem) -> Vec<Vec<Int>> {
    system
        .rows
        .iter()
        .map(|row| {
            let l = row.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
            row.iter().map(|c| (c * Rat::from_integer(l.clone())).to_integer()).collect()
        })
        .collect()
}

/// The inequality-axiom instance for `C`, modulus `d` and residues
/// `k_i ∈ {1..d}`; produced only when the system is certified unsolvable.
pub fn inequ_axiom(system: &LinearIneqSystem, d: u64, residues: &[u64], budget: &Budget) -> Result<InequAxiomOutcome> {
    if d < 2 {
        return Err(Error::InvalidInput(format!("modulus must be at least 2, got {d}")));
    }
    if residues.len() != system.vars.len() || residues.iter().any(|&k| k == 0 || k > d) {
        return Err(Error::InvalidInput(format!("need one residue in 1..={d} per variable")));
    }
    let congruences = CongruenceSystem::new(
        residues
            .iter()
            .enumerate()
            .map(|(i, &k)| CongruenceConstraint::new(i, d, k as i128))
            .collect::<Result<_>>()?,
    );
    match solve_with_congruences(system, &congruences, budget)? {
        IneqOutcome::Sat(w) => return Ok(InequAxiomOutcome::NotAnAxiom(w)),
        IneqOutcome::Unknown(r) => return Ok(InequAxiomOutcome::Unknown(r)),
        IneqOutcome::Unsat => {}
    }
    let names: Vec<String> = (1..=system.vars.len()).map(|i| format!("x{i}")).collect();
    let guard = Formula::and_all(
        system.vars.iter().zip(&names).map(|(v, n)| Formula::U(v.base, Term::var(n.clone()))).collect(),
    );
    let mut inner: Vec<Formula> = integer_rows(system)
        .iter()
        .map(|row| {
            let t = row
                .iter()
                .zip(&names)
                .fold(Term::zero(), |acc, (c, n)| acc.add(&Term::scaled_var(c.clone(), n.clone())));
            Formula::lt(Term::zero(), t)
        })
        .collect();
    inner.extend(
        names
            .iter()
            .zip(residues)
            .map(|(n, &k)| Formula::D(d, Term::var(n.clone()).sub(&Term::constant(k)))),
    );
    let body = Formula::implies(guard, Formula::not(Formula::And(inner)));
    let params = json!({
        "bases": system.vars.iter().map(|v| v.base).collect::<Vec<_>>(),
        "rows": integer_rows(system).iter().map(|r| r.iter().map(|c| c.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "d": d,
        "residues": residues,
    });
    Ok(InequAxiomOutcome::Axiom(AxiomInstance::new(
        Schema::U6,
        params,
        Formula::forall_many(names, body),
        "inequ",
    )))
}

/// Per-variable exponent map keyed by id.
pub fn witness_map(system: &LinearIneqSystem, w: &IneqWitness) -> BTreeMap<String, u64> {
    system.vars.iter().zip(&w.exponents).map(|(v, &e)| (v.id.clone(), e)).collect()
}
