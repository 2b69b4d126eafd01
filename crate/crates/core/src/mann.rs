//! Linear equations `a_1 x_1 + ... + a_n x_n = b y` with every variable
//! ranging over the powers of a fixed base.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::congruence::factorize;
use crate::error::{Error, Result};
use crate::formula::{AxiomInstance, Formula, Schema, Term};
use crate::numerics::{dependence, exact_log, ilog, pow, Dependence, Int};

pub const DEFAULT_MANN_BOUND: u64 = 64;

/// Largest box enumerated on one side of the meet-in-the-middle split.
const HALF_BOX_LIMIT: u128 = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Completeness {
    /// Every solution is represented, not only those inside the search box.
    Certified,
    /// Only solutions with all exponents at most the bound are guaranteed.
    BoundLimited,
}

impl Completeness {
    pub fn as_str(&self) -> &'static str {
        match self {
            Completeness::Certified => "certified",
            Completeness::BoundLimited => "bound_limited",
        }
    }

    pub fn parse(s: &str) -> Option<Completeness> {
        match s {
            "certified" => Some(Completeness::Certified),
            "bound_limited" => Some(Completeness::BoundLimited),
            _ => None,
        }
    }
}

impl fmt::Display for Completeness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `Σ a_i ℓ_i^{e_i} = b ℓ_{n+1}^{e_{n+1}}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerEquation {
    coeffs: Vec<Int>,
    rhs: Int,
    bases: Vec<u64>,
}

/// JSON shape of an equation file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquationSpec {
    pub coeffs: Vec<i64>,
    pub rhs: i64,
    pub bases: Vec<u64>,
}

impl PowerEquation {
    pub fn new(coeffs: Vec<Int>, rhs: Int, bases: Vec<u64>) -> Result<PowerEquation> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("equation needs at least one left-hand term".into()));
        }
        if bases.len() != coeffs.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "{} coefficients need {} bases, got {}",
                coeffs.len(),
                coeffs.len() + 1,
                bases.len()
            )));
        }
        if let Some(i) = coeffs.iter().position(Zero::is_zero) {
            return Err(Error::ZeroCoefficient(i + 1));
        }
        if rhs.is_zero() {
            return Err(Error::ZeroCoefficient(coeffs.len() + 1));
        }
        if let Some(&b) = bases.iter().find(|&&b| b < 2) {
            return Err(Error::InvalidInput(format!("base {b} must be at least 2")));
        }
        for (i, &k) in bases.iter().enumerate() {
            for &l in &bases[i + 1..] {
                if k != l {
                    if let Dependence::Dependent { m, n, .. } = dependence(k, l) {
                        return Err(Error::DependentBases { k, l, m, n });
                    }
                }
            }
        }
        Ok(PowerEquation { coeffs, rhs, bases })
    }

    pub fn from_i64(coeffs: &[i64], rhs: i64, bases: &[u64]) -> Result<PowerEquation> {
        PowerEquation::new(coeffs.iter().map(|&c| Int::from(c)).collect(), Int::from(rhs), bases.to_vec())
    }

    pub fn from_spec(spec: &EquationSpec) -> Result<PowerEquation> {
        PowerEquation::from_i64(&spec.coeffs, spec.rhs, &spec.bases)
    }

    pub fn to_spec(&self) -> Option<EquationSpec> {
        Some(EquationSpec {
            coeffs: self.coeffs.iter().map(|c| c.to_i64()).collect::<Option<_>>()?,
            rhs: self.rhs.to_i64()?,
            bases: self.bases.clone(),
        })
    }

    /// Parses `"1*3^a - 1*2^b = 1*2^c"`; coefficients default to 1 and the
    /// variable names only fix the order of the exponents.
    pub fn parse_inline(text: &str) -> Result<PowerEquation> {
        let (lhs, rhs) = text
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput("inline equation needs '='".into()))?;
        let mut terms = parse_inline_side(lhs)?;
        let right = parse_inline_side(rhs)?;
        if right.len() != 1 {
            return Err(Error::InvalidInput("right-hand side must be a single term b*BASE^var".into()));
        }
        terms.extend(right);
        let mut names: Vec<&str> = terms.iter().map(|t| t.2.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != terms.len() {
            return Err(Error::InvalidInput("each exponent variable must occur once".into()));
        }
        let (last, left) = terms.split_last().unwrap();
        PowerEquation::new(
            left.iter().map(|t| t.0.clone()).collect(),
            last.0.clone(),
            terms.iter().map(|t| t.1).collect(),
        )
    }

    /// Number of left-hand terms.
    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Int] {
        &self.coeffs
    }

    pub fn rhs(&self) -> &Int {
        &self.rhs
    }

    pub fn bases(&self) -> &[u64] {
        &self.bases
    }

    pub fn all_bases_equal(&self) -> bool {
        self.bases.iter().all(|&b| b == self.bases[0])
    }

    /// Coefficients moved to one side: `(a_1, ..., a_n, -b)`.
    fn signed_coeffs(&self) -> Vec<Int> {
        let mut c = self.coeffs.clone();
        c.push(-self.rhs.clone());
        c
    }

    pub fn holds(&self, tuple: &[u64]) -> bool {
        assert_eq!(tuple.len(), self.bases.len());
        let sum: Int = self
            .signed_coeffs()
            .iter()
            .zip(&self.bases)
            .zip(tuple)
            .map(|((c, &b), &e)| c * pow(b, e))
            .sum();
        sum.is_zero()
    }
}

impl fmt::Display for PowerEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (c, b)) in self.coeffs.iter().zip(&self.bases).enumerate() {
            if i == 0 {
                write!(f, "{c}*{b}^e{}", i + 1)?;
            } else if c.is_negative() {
                write!(f, " - {}*{b}^e{}", -c, i + 1)?;
            } else {
                write!(f, " + {c}*{b}^e{}", i + 1)?;
            }
        }
        write!(f, " = {}*{}^e{}", self.rhs, self.bases[self.n()], self.n() + 1)
    }
}

fn parse_inline_side(side: &str) -> Result<Vec<(Int, u64, String)>> {
    let bad = |m: String| Error::InvalidInput(format!("inline equation: {m}"));
    let compact: String = side.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(bad("empty side".into()));
    }
    let mut out = Vec::new();
    let mut rest = compact.as_str();
    while !rest.is_empty() {
        let (sign, body) = match rest.as_bytes()[0] {
            b'+' => (1, &rest[1..]),
            b'-' => (-1, &rest[1..]),
            _ if out.is_empty() => (1, rest),
            _ => return Err(bad(format!("expected '+' or '-' before {rest:?}"))),
        };
        let end = body[1.min(body.len())..].find(['+', '-']).map_or(body.len(), |i| i + 1);
        let term = &body[..end];
        rest = &body[end..];
        let (coeff, power) = match term.split_once('*') {
            Some((c, p)) => (c.parse::<Int>().map_err(|_| bad(format!("bad coefficient {c:?}")))?, p),
            None => (Int::one(), term),
        };
        let (base, var) = power.split_once('^').ok_or_else(|| bad(format!("expected BASE^var in {term:?}")))?;
        let base: u64 = base.parse().map_err(|_| bad(format!("bad base {base:?}")))?;
        if var.is_empty() || !var.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(bad(format!("bad exponent variable {var:?}")));
        }
        out.push((coeff * sign, base, var.to_string()));
    }
    Ok(out)
}

/// Calls `f` on every tuple in `[0, bound]^len` in lexicographic order.
fn for_each_tuple(len: usize, bound: u64, mut f: impl FnMut(&[u64])) {
    let mut cur = vec![0u64; len];
    loop {
        f(&cur);
        let mut i = len;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if cur[i] < bound {
                cur[i] += 1;
                cur[i + 1..].iter_mut().for_each(|c| *c = 0);
                break;
            }
        }
    }
}

/// All exponent tuples in `[0, bound]^{n+1}` solving the equation, in
/// lexicographic order.
///
/// The terms are split into two halves; sums of the first half are hashed and
/// matched against negated sums of the second.
pub fn enumerate_solutions(eq: &PowerEquation, bound: u64) -> Result<Vec<Vec<u64>>> {
    let coeffs = eq.signed_coeffs();
    let len = coeffs.len();
    let half = len / 2;
    let width = bound as u128 + 1;
    let side_cost = width.checked_pow((len - half) as u32).unwrap_or(u128::MAX);
    if side_cost > HALF_BOX_LIMIT {
        return Err(Error::BudgetExhausted(format!(
            "{} terms with bound {bound} needs {side_cost} half-box entries",
            len
        )));
    }
    let terms: Vec<Vec<Int>> = coeffs
        .iter()
        .zip(eq.bases())
        .map(|(c, &b)| {
            let mut p = Int::one();
            let base = Int::from(b);
            (0..=bound)
                .map(|_| {
                    let v = c * &p;
                    p *= &base;
                    v
                })
                .collect()
        })
        .collect();
    let partial = |range: std::ops::Range<usize>, tuple: &[u64]| -> Int {
        range.zip(tuple).map(|(j, &e)| terms[j][e as usize].clone()).sum()
    };
    let mut left: HashMap<Int, Vec<Vec<u64>>> = HashMap::new();
    for_each_tuple(half, bound, |t| left.entry(partial(0..half, t)).or_default().push(t.to_vec()));
    let mut out = Vec::new();
    for_each_tuple(len - half, bound, |t| {
        let key = -partial(half..len, t);
        if let Some(prefixes) = left.get(&key) {
            for p in prefixes {
                let mut full = p.clone();
                full.extend_from_slice(t);
                out.push(full);
            }
        }
    });
    out.sort_unstable();
    debug_assert!(out.iter().all(|t| eq.holds(t)));
    Ok(out)
}

/// Some nonempty set of left-hand indices has a vanishing weighted subsum.
pub fn is_degenerate(eq: &PowerEquation, tuple: &[u64]) -> bool {
    let n = eq.n();
    let values: Vec<Int> = (0..n).map(|i| &eq.coeffs[i] * pow(eq.bases[i], tuple[i])).collect();
    (1u64..(1 << n)).any(|mask| {
        (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| &values[i])
            .sum::<Int>()
            .is_zero()
    })
}

pub fn nondegenerate_solutions(eq: &PowerEquation, bound: u64) -> Result<Vec<Vec<u64>>> {
    Ok(enumerate_solutions(eq, bound)?.into_iter().filter(|t| !is_degenerate(eq, t)).collect())
}

/// Non-degenerate solutions normalized to minimal exponent 0 (single base only).
pub fn primitive_solutions(eq: &PowerEquation, bound: u64) -> Result<Vec<Vec<u64>>> {
    if !eq.all_bases_equal() {
        return Err(Error::InvalidInput("primitive solutions need all bases equal".into()));
    }
    let mut out: Vec<Vec<u64>> = nondegenerate_solutions(eq, bound)?
        .into_iter()
        .map(|t| {
            let m = *t.iter().min().unwrap();
            t.into_iter().map(|e| e - m).collect()
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Constraint on an exponent tuple; indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UConstraint {
    /// `e_mu = e_sigma + c`.
    Coupled { mu: usize, sigma: usize, c: u64 },
    /// `e_xi = b`.
    Fixed { xi: usize, b: u64 },
}

impl UConstraint {
    pub fn holds(&self, tuple: &[u64]) -> bool {
        match *self {
            UConstraint::Coupled { mu, sigma, c } => tuple[mu - 1] == tuple[sigma - 1] + c,
            UConstraint::Fixed { xi, b } => tuple[xi - 1] == b,
        }
    }
}

impl fmt::Display for UConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UConstraint::Coupled { mu, sigma, c: 0 } => write!(f, "e{mu} = e{sigma}"),
            UConstraint::Coupled { mu, sigma, c } => write!(f, "e{mu} = e{sigma} + {c}"),
            UConstraint::Fixed { xi, b } => write!(f, "e{xi} = {b}"),
        }
    }
}

/// Intersection of constraints; unconstrained coordinates are free.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Family {
    pub constraints: Vec<UConstraint>,
}

impl Family {
    pub fn contains(&self, tuple: &[u64]) -> bool {
        self.constraints.iter().all(|c| c.holds(tuple))
    }
}

/// Solution set as a finite union of families and isolated tuples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionSet {
    pub arity: usize,
    pub families: Vec<Family>,
    pub isolated: Vec<Vec<u64>>,
    pub bound: u64,
    pub completeness: Completeness,
}

impl SolutionSet {
    pub fn contains(&self, tuple: &[u64]) -> bool {
        tuple.len() == self.arity
            && (self.isolated.iter().any(|t| t == tuple) || self.families.iter().any(|f| f.contains(tuple)))
    }

    pub fn is_empty(&self) -> bool {
        self.families.is_empty() && self.isolated.is_empty()
    }

    /// One JSON record per family or isolated tuple.
    pub fn to_json_records(&self) -> Vec<serde_json::Value> {
        let tail = |mut v: serde_json::Value| {
            v["bound"] = json!(self.bound);
            v["completeness"] = json!(self.completeness.as_str());
            v
        };
        self.families
            .iter()
            .map(|f| tail(json!({"type": "family", "constraints": f.constraints})))
            .chain(self.isolated.iter().map(|t| tail(json!({"type": "isolated", "tuple": t}))))
            .collect()
    }
}

/// Largest collection of disjoint same-base zero-sum blocks among `terms`.
fn zero_blocks(values: &[Int], bases: &[u64]) -> Vec<u32> {
    let len = values.len();
    if len > 16 {
        return Vec::new();
    }
    let full = (1u32 << len) - 1;
    let zero: Vec<u32> = (1..=full)
        .filter(|&m| m.count_ones() >= 2)
        .filter(|&m| {
            let first = bases[m.trailing_zeros() as usize];
            (0..len).filter(|i| m >> i & 1 == 1).all(|i| bases[i] == first)
                && (0..len).filter(|i| m >> i & 1 == 1).map(|i| &values[i]).sum::<Int>().is_zero()
        })
        .collect();
    let mut memo: HashMap<u32, Vec<u32>> = HashMap::new();
    fn best(mask: u32, zero: &[u32], memo: &mut HashMap<u32, Vec<u32>>) -> Vec<u32> {
        if mask == 0 {
            return Vec::new();
        }
        if let Some(v) = memo.get(&mask) {
            return v.clone();
        }
        let low = mask & mask.wrapping_neg();
        let mut choice = best(mask & !low, zero, memo);
        for &z in zero {
            if z & low != 0 && z & !mask == 0 {
                let mut cand = vec![z];
                cand.extend(best(mask & !z, zero, memo));
                if cand.len() > choice.len() {
                    choice = cand;
                }
            }
        }
        memo.insert(mask, choice.clone());
        choice
    }
    best(full, &zero, &mut memo)
}

/// Family generated by one solution: each zero block shifts freely, anchored
/// at its smallest exponent; other coordinates are fixed.
fn family_of(eq: &PowerEquation, tuple: &[u64]) -> Option<Family> {
    let coeffs = eq.signed_coeffs();
    let values: Vec<Int> = coeffs.iter().zip(&eq.bases).zip(tuple).map(|((c, &b), &e)| c * pow(b, e)).collect();
    let blocks = zero_blocks(&values, &eq.bases);
    if blocks.is_empty() {
        return None;
    }
    let len = tuple.len();
    let mut constraints = Vec::new();
    let mut covered = 0u32;
    for &block in &blocks {
        covered |= block;
        let members: Vec<usize> = (0..len).filter(|i| block >> i & 1 == 1).collect();
        let anchor = *members.iter().min_by_key(|&&i| (tuple[i], i)).unwrap();
        for &i in &members {
            if i != anchor {
                constraints.push(UConstraint::Coupled { mu: i + 1, sigma: anchor + 1, c: tuple[i] - tuple[anchor] });
            }
        }
    }
    for i in (0..len).filter(|i| covered >> i & 1 == 0) {
        constraints.push(UConstraint::Fixed { xi: i + 1, b: tuple[i] });
    }
    constraints.sort_by_key(|c| match *c {
        UConstraint::Coupled { mu, .. } => mu,
        UConstraint::Fixed { xi, .. } => xi,
    });
    Some(Family { constraints })
}

/// Solutions in the bounded box, grouped into shift families.
///
/// Replaying the result over `[0, bound]^{n+1}` gives exactly
/// [`enumerate_solutions`]; the completeness flag says whether solutions
/// outside the box are also represented.
pub fn family_structure(eq: &PowerEquation, bound: u64) -> Result<SolutionSet> {
    let solutions = enumerate_solutions(eq, bound)?;
    let mut families: Vec<Family> = Vec::new();
    let mut isolated = Vec::new();
    for t in &solutions {
        if families.iter().any(|f| f.contains(t)) {
            continue;
        }
        match family_of(eq, t) {
            Some(f) => families.push(f),
            None => isolated.push(t.clone()),
        }
    }
    Ok(SolutionSet {
        arity: eq.n() + 1,
        families,
        isolated,
        bound,
        completeness: completeness(eq, bound),
    })
}

fn valuation(v: &Int, p: u64) -> u64 {
    let p = Int::from(p);
    let mut cur = v.abs();
    let mut k = 0;
    while !cur.is_zero() && (&cur % &p).is_zero() {
        cur /= &p;
        k += 1;
    }
    k
}

/// Whether every solution (not only those in the box) is represented.
pub fn completeness(eq: &PowerEquation, bound: u64) -> Completeness {
    let c = eq.signed_coeffs();
    let certified = if c.iter().all(Signed::is_positive) || c.iter().all(Signed::is_negative) {
        true
    } else if eq.n() == 1 {
        two_term_certified(eq, bound)
    } else if eq.n() == 2 && eq.all_bases_equal() {
        let m = c.iter().map(|v| v.abs()).max().unwrap();
        bound >= ilog(eq.bases[0], &(&m + &m * &m))
    } else {
        false
    };
    if certified {
        Completeness::Certified
    } else {
        Completeness::BoundLimited
    }
}

/// `a k^e1 = b l^e2` has its exponents pinned by prime valuations.
fn two_term_certified(eq: &PowerEquation, bound: u64) -> bool {
    let (a, b) = (eq.coeffs[0].abs(), eq.rhs.abs());
    let (k, l) = (eq.bases[0], eq.bases[1]);
    if k == l {
        let d = if (&b % &a).is_zero() {
            exact_log(k, &(&b / &a))
        } else if (&a % &b).is_zero() {
            exact_log(k, &(&a / &b))
        } else {
            return true;
        };
        return d.is_none_or(|d| d <= bound);
    }
    // e1 v_p(k) - e2 v_p(l) = v_p(b) - v_p(a) for every prime p of k l
    let mut primes: Vec<u64> = factorize(k).into_iter().chain(factorize(l)).map(|(p, _)| p).collect();
    primes.sort_unstable();
    primes.dedup();
    let row = |p: u64| {
        let vk = valuation(&Int::from(k), p) as i64;
        let vl = valuation(&Int::from(l), p) as i64;
        (vk, -vl, valuation(&b, p) as i64 - valuation(&a, p) as i64)
    };
    for (i, &p) in primes.iter().enumerate() {
        for &q in &primes[i + 1..] {
            let (a1, b1, c1) = row(p);
            let (a2, b2, c2) = row(q);
            let det = a1 * b2 - a2 * b1;
            if det != 0 {
                let e1 = BigRational::new(Int::from(c1 * b2 - c2 * b1), Int::from(det));
                let e2 = BigRational::new(Int::from(a1 * c2 - a2 * c1), Int::from(det));
                let fits = |e: &BigRational| !e.is_integer() || e.is_negative() || e.to_integer() <= Int::from(bound);
                return fits(&e1) && fits(&e2);
            }
        }
    }
    false
}

/// `Mann(ā, b, ℓ̄)`: the guard θ implies one of the hard-coded solutions.
pub fn mann_axiom(eq: &PowerEquation, bound: u64) -> Result<AxiomInstance> {
    let n = eq.n();
    let names: Vec<String> = (1..=n + 1).map(|i| format!("x{i}")).collect();
    let var = |i: usize| Term::var(names[i].clone());
    let weighted = |i: usize| Term::scaled_var(eq.coeffs[i].clone(), names[i].clone());
    let mut theta: Vec<Formula> = (0..=n).map(|i| Formula::U(eq.bases[i], var(i))).collect();
    let lhs = (0..n).fold(Term::zero(), |acc, i| acc.add(&weighted(i)));
    theta.push(Formula::eq(lhs, Term::scaled_var(eq.rhs.clone(), names[n].clone())));
    for mask in 1u64..(1 << n) {
        let sub = (0..n).filter(|i| mask >> i & 1 == 1).fold(Term::zero(), |acc, i| acc.add(&weighted(i)));
        theta.push(Formula::not(Formula::eq(sub, Term::zero())));
    }
    let disjuncts: Vec<Formula> = if eq.all_bases_equal() {
        let base = eq.bases[0];
        primitive_solutions(eq, bound)?
            .iter()
            .map(|sol| {
                let t = pow(base, sol[n]);
                Formula::and_all(
                    (0..n)
                        .map(|j| {
                            Formula::eq(
                                Term::scaled_var(t.clone(), names[j].clone()),
                                Term::scaled_var(pow(base, sol[j]), names[n].clone()),
                            )
                        })
                        .collect(),
                )
            })
            .collect()
    } else {
        nondegenerate_solutions(eq, bound)?
            .iter()
            .map(|sol| {
                Formula::and_all(
                    (0..=n).map(|j| Formula::eq(var(j), Term::constant(pow(eq.bases[j], sol[j])))).collect(),
                )
            })
            .collect()
    };
    let body = Formula::implies(Formula::And(theta), Formula::or_any(disjuncts));
    let params = json!({
        "a": eq.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "b": eq.rhs.to_string(),
        "bases": eq.bases,
        "bound": bound,
    });
    Ok(AxiomInstance::new(Schema::A4, params, Formula::forall_many(names.clone(), body), "mann")
        .with_completeness(completeness(eq, bound)))
}

/// Values `ℓ_i^{e_i}` of a tuple, keyed by 1-based index.
pub fn tuple_values(eq: &PowerEquation, tuple: &[u64]) -> BTreeMap<usize, Int> {
    tuple.iter().zip(&eq.bases).enumerate().map(|(i, (&e, &b))| (i + 1, pow(b, e))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalan() -> PowerEquation {
        PowerEquation::from_i64(&[1, -1], 1, &[3, 2, 2]).unwrap()
    }

    #[test]
    fn validation() {
        assert!(matches!(PowerEquation::from_i64(&[0, 1], 1, &[2, 2, 2]), Err(Error::ZeroCoefficient(1))));
        assert!(matches!(PowerEquation::from_i64(&[1], 0, &[2, 2]), Err(Error::ZeroCoefficient(2))));
        assert!(matches!(PowerEquation::from_i64(&[1], 1, &[4, 8]), Err(Error::DependentBases { .. })));
        assert!(PowerEquation::from_i64(&[1], 1, &[2]).is_err());
    }

    #[test]
    fn catalan_type_solutions() {
        let sols = enumerate_solutions(&catalan(), 64).unwrap();
        assert_eq!(sols, vec![vec![1, 0, 1], vec![1, 1, 0], vec![2, 0, 3], vec![2, 3, 0]]);
        assert_eq!(nondegenerate_solutions(&catalan(), 64).unwrap().len(), 4);
        let s = family_structure(&catalan(), 64).unwrap();
        assert!(s.families.is_empty());
        assert_eq!(s.isolated.len(), 4);
    }

    #[test]
    fn independent_two_terms() {
        let eq = PowerEquation::from_i64(&[1], 1, &[2, 3]).unwrap();
        assert_eq!(enumerate_solutions(&eq, 64).unwrap(), vec![vec![0, 0]]);
        assert_eq!(completeness(&eq, 64), Completeness::Certified);
        let eq = PowerEquation::from_i64(&[243], 32, &[2, 6]).unwrap();
        assert_eq!(enumerate_solutions(&eq, 10).unwrap(), vec![vec![10, 5]]);
        assert_eq!(completeness(&eq, 10), Completeness::Certified);
        assert_eq!(completeness(&eq, 9), Completeness::BoundLimited);
    }

    #[test]
    fn doubling_family() {
        let eq = PowerEquation::from_i64(&[1, 1], 1, &[2, 2, 2]).unwrap();
        let sols = enumerate_solutions(&eq, 5).unwrap();
        assert_eq!(sols, (0..5).map(|e| vec![e, e, e + 1]).collect::<Vec<_>>());
        assert_eq!(primitive_solutions(&eq, 64).unwrap(), vec![vec![0, 0, 1]]);
        let s = family_structure(&eq, 20).unwrap();
        assert_eq!(
            s.families,
            vec![Family {
                constraints: vec![
                    UConstraint::Coupled { mu: 2, sigma: 1, c: 0 },
                    UConstraint::Coupled { mu: 3, sigma: 1, c: 1 }
                ]
            }]
        );
        assert_eq!(s.completeness, Completeness::Certified);
    }

    #[test]
    fn degeneracy() {
        let eq = PowerEquation::from_i64(&[1, -1, 1], 1, &[2, 2, 2, 2]).unwrap();
        assert!(is_degenerate(&eq, &[2, 2, 3, 3]));
        assert!(!is_degenerate(&catalan(), &[1, 1, 0]));
        let s = family_structure(&eq, 6).unwrap();
        for_each_tuple(4, 6, |t| assert_eq!(s.contains(t), eq.holds(t), "{t:?}"));
    }

    #[test]
    fn unsatisfiable_is_empty() {
        let eq = PowerEquation::from_i64(&[1], -1, &[2, 3]).unwrap();
        let s = family_structure(&eq, 30).unwrap();
        assert!(s.is_empty());
        assert_eq!(s.completeness, Completeness::Certified);
    }

    #[test]
    fn inline_grammar() {
        let eq = PowerEquation::parse_inline("1*3^a - 1*2^b = 1*2^c").unwrap();
        assert_eq!(eq, catalan());
        let eq = PowerEquation::parse_inline("2^x + 2^y = 2^z").unwrap();
        assert_eq!(eq.coeffs(), &[Int::one(), Int::one()]);
        assert!(PowerEquation::parse_inline("2^x + 2^y").is_err());
        assert!(PowerEquation::parse_inline("2^x = 2^x").is_err());
    }

    #[test]
    fn axiom_shapes() {
        let eq = PowerEquation::from_i64(&[1, 1], 1, &[2, 2, 2]).unwrap();
        let ax = mann_axiom(&eq, 64).unwrap();
        assert!(ax.formula.render().ends_with("(and (= (scale 2 x1) x3) (= (scale 2 x2) x3))))))"));
        let ax = mann_axiom(&PowerEquation::from_i64(&[1], 1, &[2, 3]).unwrap(), 64).unwrap();
        assert!(ax.formula.render().contains("(and (= x1 1) (= x2 1))"));
    }
}
