//! Formulas of the language of ordered groups with unary power predicates
//! `U_l` and divisibility predicates `D_n`, their s-expression text format,
//! a windowed evaluator, and the axiom-schema emitters.

mod eval;
mod parse;
pub mod emit;
mod sat;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mann::Completeness;
use crate::numerics::Int;

pub use eval::{estimate_cost, eval_window, eval_with, Coverage, EvalOutcome, EvalWindow, DEFAULT_COST_CAP};
pub use parse::parse;
pub use sat::{sat_conjunction, Conjunction, SatBudget, SatOutcome};

/// Integer-linear combination of variables plus a constant, kept canonical:
/// variables sorted, no zero coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Term {
    coeffs: BTreeMap<String, Int>,
    constant: Int,
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::scaled_var(1, name)
    }

    pub fn scaled_var(coeff: impl Into<Int>, name: impl Into<String>) -> Term {
        let mut t = Term::default();
        t.add_var(coeff.into(), name.into());
        t
    }

    pub fn constant(c: impl Into<Int>) -> Term {
        Term { coeffs: BTreeMap::new(), constant: c.into() }
    }

    pub fn zero() -> Term {
        Term::default()
    }

    fn add_var(&mut self, coeff: Int, name: String) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(name).or_insert_with(Int::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.coeffs.retain(|_, c| !c.is_zero());
        }
    }

    pub fn add(&self, other: &Term) -> Term {
        let mut out = self.clone();
        for (v, c) in &other.coeffs {
            out.add_var(c.clone(), v.clone());
        }
        out.constant += &other.constant;
        out
    }

    pub fn sub(&self, other: &Term) -> Term {
        self.add(&other.scale(&-Int::one()))
    }

    pub fn neg(&self) -> Term {
        self.scale(&-Int::one())
    }

    pub fn scale(&self, factor: &Int) -> Term {
        if factor.is_zero() {
            return Term::zero();
        }
        Term {
            coeffs: self.coeffs.iter().map(|(v, c)| (v.clone(), c * factor)).collect(),
            constant: &self.constant * factor,
        }
    }

    pub fn coeffs(&self) -> &BTreeMap<String, Int> {
        &self.coeffs
    }

    pub fn constant_part(&self) -> &Int {
        &self.constant
    }

    pub fn coeff(&self, var: &str) -> Int {
        self.coeffs.get(var).cloned().unwrap_or_else(Int::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.coeffs.keys().map(String::as_str)
    }

    /// Substitutes `var := replacement`.
    pub fn substitute(&self, var: &str, replacement: &Term) -> Term {
        match self.coeffs.get(var) {
            None => self.clone(),
            Some(c) => {
                let mut rest = self.clone();
                rest.coeffs.remove(var);
                rest.add(&replacement.scale(c))
            }
        }
    }

    /// Exact value under an assignment; `None` if a variable is unassigned.
    pub fn value(&self, env: &BTreeMap<String, Int>) -> Option<Int> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            acc += c * env.get(v)?;
        }
        Some(acc)
    }

    fn render_into(&self, out: &mut String) {
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(v, c)| if c.is_one() { v.clone() } else { format!("(scale {c} {v})") })
            .collect();
        let c = &self.constant;
        let body = |parts: &[String]| {
            if parts.len() == 1 {
                parts[0].clone()
            } else {
                format!("(+ {})", parts.join(" "))
            }
        };
        let text = if parts.is_empty() {
            c.to_string()
        } else if c.is_zero() {
            body(&parts)
        } else if c.is_negative() {
            format!("(- {} {})", body(&parts), -c)
        } else {
            let mut all = parts;
            all.push(c.to_string());
            format!("(+ {})", all.join(" "))
        };
        out.push_str(&text);
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.render_into(&mut s);
        f.write_str(&s)
    }
}

/// First-order formula over `{+, -, 0, 1, <, U_l, D_n}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Eq(Term, Term),
    Lt(Term, Term),
    /// `U_base(term)`: the term is a power of `base`.
    U(u64, Term),
    /// `D_modulus(term)`: the term is divisible by `modulus`.
    D(u64, Term),
    Not(Box<Formula>),
    /// Empty conjunction is true.
    And(Vec<Formula>),
    /// Empty disjunction is false.
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

impl Formula {
    pub fn truth() -> Formula {
        Formula::And(Vec::new())
    }

    pub fn falsity() -> Formula {
        Formula::Or(Vec::new())
    }

    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    pub fn lt(a: Term, b: Term) -> Formula {
        Formula::Lt(a, b)
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::And(vec![Formula::implies(a.clone(), b.clone()), Formula::implies(b, a)])
    }

    /// Conjunction with nested conjunctions flattened and singletons unwrapped.
    pub fn and_all(parts: Vec<Formula>) -> Formula {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Formula::And(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            Formula::And(flat)
        }
    }

    /// Disjunction with nested disjunctions flattened and singletons unwrapped.
    pub fn or_any(parts: Vec<Formula>) -> Formula {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Formula::Or(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            Formula::Or(flat)
        }
    }

    pub fn forall(var: impl Into<String>, body: Formula) -> Formula {
        Formula::Forall(var.into(), Box::new(body))
    }

    pub fn exists(var: impl Into<String>, body: Formula) -> Formula {
        Formula::Exists(var.into(), Box::new(body))
    }

    pub fn forall_many<S: Into<String>>(vars: impl IntoIterator<Item = S>, body: Formula) -> Formula {
        let vars: Vec<String> = vars.into_iter().map(Into::into).collect();
        vars.into_iter().rev().fold(body, |acc, v| Formula::forall(v, acc))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut term = |t: &Term, bound: &Vec<String>| {
            for v in t.vars() {
                if !bound.iter().any(|b| b == v) {
                    out.insert(v.to_string());
                }
            }
        };
        match self {
            Formula::Eq(a, b) | Formula::Lt(a, b) => {
                term(a, bound);
                term(b, bound);
            }
            Formula::U(_, t) | Formula::D(_, t) => term(t, bound),
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_free(bound, out)),
            Formula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Forall(v, f) | Formula::Exists(v, f) => {
                bound.push(v.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Checks the structural invariants: `D` moduli and `U` bases at least 2,
    /// and no bound variable shadowing another binder or occurring free.
    pub fn validate(&self) -> Result<()> {
        let free = self.free_vars();
        let mut binders = BTreeSet::new();
        self.validate_rec(&free, &mut Vec::new(), &mut binders)
    }

    fn validate_rec(&self, free: &BTreeSet<String>, scope: &mut Vec<String>, seen: &mut BTreeSet<String>) -> Result<()> {
        match self {
            Formula::U(b, _) if *b < 2 => Err(Error::Sort(format!("U base {b} must be at least 2"))),
            Formula::D(n, _) if *n < 2 => Err(Error::Sort(format!("D modulus {n} must be at least 2"))),
            Formula::Eq(..) | Formula::Lt(..) | Formula::U(..) | Formula::D(..) => Ok(()),
            Formula::Not(f) => f.validate_rec(free, scope, seen),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().try_for_each(|f| f.validate_rec(free, scope, seen)),
            Formula::Implies(a, b) => {
                a.validate_rec(free, scope, seen)?;
                b.validate_rec(free, scope, seen)
            }
            Formula::Forall(v, f) | Formula::Exists(v, f) => {
                if scope.contains(v) || free.contains(v) {
                    return Err(Error::Sort(format!("variable {v} is bound twice or also occurs free")));
                }
                seen.insert(v.clone());
                scope.push(v.clone());
                let r = f.validate_rec(free, scope, seen);
                scope.pop();
                r
            }
        }
    }

    /// Renders in the s-expression text format.
    pub fn render(&self) -> String {
        let mut s = String::new();
        self.render_into(&mut s);
        s
    }

    fn render_into(&self, out: &mut String) {
        let list = |out: &mut String, head: &str, fs: &[Formula]| {
            out.push('(');
            out.push_str(head);
            for f in fs {
                out.push(' ');
                f.render_into(out);
            }
            out.push(')');
        };
        match self {
            Formula::Eq(a, b) | Formula::Lt(a, b) => {
                out.push_str(if matches!(self, Formula::Eq(..)) { "(= " } else { "(< " });
                a.render_into(out);
                out.push(' ');
                b.render_into(out);
                out.push(')');
            }
            Formula::U(n, t) | Formula::D(n, t) => {
                out.push_str(if matches!(self, Formula::U(..)) { "(U " } else { "(D " });
                out.push_str(&n.to_string());
                out.push(' ');
                t.render_into(out);
                out.push(')');
            }
            Formula::Not(f) => list(out, "not", std::slice::from_ref(f)),
            Formula::And(fs) => list(out, "and", fs),
            Formula::Or(fs) => list(out, "or", fs),
            Formula::Implies(a, b) => {
                out.push_str("(-> ");
                a.render_into(out);
                out.push(' ');
                b.render_into(out);
                out.push(')');
            }
            Formula::Forall(v, f) | Formula::Exists(v, f) => {
                out.push_str(if matches!(self, Formula::Forall(..)) { "(forall " } else { "(exists " });
                out.push_str(v);
                out.push(' ');
                f.render_into(out);
                out.push(')');
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Sum `Σ c_i * x_i` as a term.
pub fn linear_term<'a>(parts: impl IntoIterator<Item = (&'a Int, &'a str)>) -> Term {
    parts
        .into_iter()
        .fold(Term::zero(), |acc, (c, v)| acc.add(&Term::scaled_var(c.clone(), v)))
}

pub fn big(v: u64) -> Int {
    BigInt::from(v)
}

/// Axiom schemata of the two theories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Schema {
    A1,
    A2,
    A3,
    A4,
    A5,
    U1,
    U2,
    U3,
    U4,
    U5,
    U6,
    U7,
}

impl Schema {
    pub fn tag(&self) -> &'static str {
        match self {
            Schema::A1 => "A1",
            Schema::A2 => "A2",
            Schema::A3 => "A3",
            Schema::A4 => "A4",
            Schema::A5 => "A5",
            Schema::U1 => "∀1",
            Schema::U2 => "∀2",
            Schema::U3 => "∀3",
            Schema::U4 => "∀4",
            Schema::U5 => "∀5",
            Schema::U6 => "∀6",
            Schema::U7 => "∀7",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Schema> {
        let all = [
            Schema::A1,
            Schema::A2,
            Schema::A3,
            Schema::A4,
            Schema::A5,
            Schema::U1,
            Schema::U2,
            Schema::U3,
            Schema::U4,
            Schema::U5,
            Schema::U6,
            Schema::U7,
        ];
        all.into_iter().find(|s| s.tag() == tag)
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// A tagged, closed instance of one of the axiom schemata.
#[derive(Debug, Clone, PartialEq)]
pub struct AxiomInstance {
    pub schema: Schema,
    pub params: serde_json::Value,
    pub formula: Formula,
    pub note: String,
    pub completeness: Option<Completeness>,
}

impl AxiomInstance {
    pub fn new(schema: Schema, params: serde_json::Value, formula: Formula, note: impl Into<String>) -> Self {
        debug_assert!(formula.is_sentence(), "axiom instances are sentences");
        AxiomInstance { schema, params, formula, note: note.into(), completeness: None }
    }

    pub fn with_completeness(mut self, c: Completeness) -> Self {
        self.completeness = Some(c);
        self
    }

    pub fn retag(mut self, schema: Schema) -> Self {
        self.schema = schema;
        self
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "tag": self.schema.tag(),
            "params": self.params,
            "formula": self.formula.render(),
            "completeness_flag": self.completeness.map(|c| c.as_str()),
        })
    }

    pub fn to_json_line(&self) -> String {
        self.to_json().to_string()
    }

    pub fn from_json(value: &serde_json::Value) -> Result<AxiomInstance> {
        let bad = |m: &str| Error::InvalidInput(format!("axiom record: {m}"));
        let tag = value.get("tag").and_then(|t| t.as_str()).ok_or_else(|| bad("missing tag"))?;
        let schema = Schema::from_tag(tag).ok_or_else(|| bad("unknown tag"))?;
        let text = value.get("formula").and_then(|t| t.as_str()).ok_or_else(|| bad("missing formula"))?;
        let completeness = match value.get("completeness_flag").and_then(|c| c.as_str()) {
            None => None,
            Some(s) => Some(Completeness::parse(s).ok_or_else(|| bad("unknown completeness flag"))?),
        };
        Ok(AxiomInstance {
            schema,
            params: value.get("params").cloned().unwrap_or(serde_json::Value::Null),
            formula: parse(text)?,
            note: String::new(),
            completeness,
        })
    }
}
