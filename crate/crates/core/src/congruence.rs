//! Residues of powers modulo n: the Carmichael function, residue cycles,
//! excluded residues, CRT and exponent progressions.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::formula::{AxiomInstance, Formula, Schema, Term};
use crate::numerics::{gcd_u64, lcm_u64, pow};

/// Prime factorization by trial division.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n.is_multiple_of(p) {
            let mut v = 0;
            while n.is_multiple_of(p) {
                n /= p;
                v += 1;
            }
            out.push((p, v));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Carmichael's function: the least m ≥ 1 with a^m ≡ 1 (mod n) for all a coprime to n.
/// Prime-power values are combined by lcm.
pub fn carmichael_lambda(n: u64) -> u64 {
    assert!(n >= 1, "carmichael_lambda needs n >= 1");
    factorize(n).into_iter().fold(1, |acc, (p, v)| {
        let pp = p.pow(v - 1);
        let local = if p == 2 && v >= 3 { pp / 2 } else { pp * (p - 1) };
        lcm_u64(acc, local)
    })
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn powmod(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1 % m;
    let mut b = base % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, b, m);
        }
        b = mulmod(b, b, m);
        exp >>= 1;
    }
    acc
}

/// The eventually periodic sequence `base^e mod modulus`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerResidueCycle {
    pub base: u64,
    pub modulus: u64,
    pub preperiod: u64,
    pub period: u64,
    /// Residues of `base^0 .. base^(preperiod + period - 1)`.
    pub residues: Vec<u64>,
}

impl PowerResidueCycle {
    /// Residue of `base^e`.
    pub fn residue(&self, e: u64) -> u64 {
        if e < self.preperiod {
            self.residues[e as usize]
        } else {
            self.residues[(self.preperiod + (e - self.preperiod) % self.period) as usize]
        }
    }

    /// Residues reached for some exponent.
    pub fn attained(&self) -> BTreeSet<u64> {
        self.residues.iter().copied().collect()
    }
}

/// Computes the residue cycle by the ν-adic split: the preperiod is the
/// largest exponent needed for the base-sharing part to vanish, the period is
/// the order of the base modulo the coprime cofactor.
pub fn power_residues(base: u64, modulus: u64) -> Result<PowerResidueCycle> {
    if base < 2 || modulus < 1 {
        return Err(Error::InvalidInput(format!("power_residues needs base >= 2 and modulus >= 1, got ({base}, {modulus})")));
    }
    let mut shared = 1u64;
    let mut preperiod = 0u64;
    for (p, v) in factorize(modulus) {
        if base.is_multiple_of(p) {
            shared *= p.pow(v);
            let mut vb = 0u64;
            let mut b = base;
            while b.is_multiple_of(p) {
                b /= p;
                vb += 1;
            }
            preperiod = preperiod.max((v as u64).div_ceil(vb));
        }
    }
    let coprime = modulus / shared;
    let lambda = carmichael_lambda(coprime);
    let period = divisors(lambda)
        .into_iter()
        .find(|&d| powmod(base, d, coprime) == 1 % coprime)
        .expect("the order divides lambda");
    let residues = (0..preperiod + period).map(|e| powmod(base, e, modulus)).collect();
    Ok(PowerResidueCycle { base, modulus, preperiod, period, residues })
}

fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Residues `k ∈ {1..n}` (with `n` standing for 0) never attained by
/// `base^m`, `m ∈ {1..λ(n)}`.
pub fn excluded_residues(base: u64, modulus: u64) -> Result<BTreeSet<u64>> {
    if base < 2 || modulus < 1 {
        return Err(Error::InvalidInput(format!("excluded_residues needs base >= 2 and modulus >= 1, got ({base}, {modulus})")));
    }
    if gcd_u64(base, modulus) != 1 {
        return Err(Error::NotCoprime { base, modulus });
    }
    if modulus == 1 {
        return Ok(BTreeSet::new());
    }
    let hit = power_residues(base, modulus)?.attained();
    Ok((1..=modulus).filter(|k| !hit.contains(&(k % modulus))).collect())
}

/// `D_modulus(var - residue)`, with `0 <= residue < modulus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CongruenceConstraint {
    pub var: usize,
    pub modulus: u64,
    pub residue: u64,
}

impl CongruenceConstraint {
    pub fn new(var: usize, modulus: u64, residue: i128) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::InvalidInput("congruence modulus must be positive".into()));
        }
        let residue = residue.rem_euclid(modulus as i128) as u64;
        Ok(CongruenceConstraint { var, modulus, residue })
    }

    pub fn holds_mod(&self, value_mod: u64) -> bool {
        value_mod % self.modulus == self.residue
    }
}

impl fmt::Display for CongruenceConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{} ≡ {} (mod {})", self.var, self.residue, self.modulus)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CongruenceSystem {
    pub constraints: Vec<CongruenceConstraint>,
}

impl CongruenceSystem {
    pub fn new(constraints: Vec<CongruenceConstraint>) -> Self {
        CongruenceSystem { constraints }
    }

    /// Constraints on one variable.
    pub fn for_var(&self, var: usize) -> CongruenceSystem {
        CongruenceSystem::new(self.constraints.iter().filter(|c| c.var == var).copied().collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CrtResult {
    Combined(CongruenceConstraint),
    Unsatisfiable(CongruenceConstraint, CongruenceConstraint),
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// Combines single-variable congruences into one modulo the lcm of the moduli.
pub fn crt_combine(system: &CongruenceSystem) -> Result<CrtResult> {
    let var = system.constraints.first().map(|c| c.var).unwrap_or(0);
    if system.constraints.iter().any(|c| c.var != var) {
        return Err(Error::InvalidInput("crt_combine needs constraints on a single variable".into()));
    }
    let mut acc = CongruenceConstraint { var, modulus: 1, residue: 0 };
    let mut seen: Vec<CongruenceConstraint> = Vec::new();
    for &c in &system.constraints {
        let (m1, r1) = (acc.modulus as i128, acc.residue as i128);
        let (m2, r2) = (c.modulus as i128, (c.residue % c.modulus) as i128);
        let (g, p, _) = ext_gcd(m1, m2);
        if (r2 - r1) % g != 0 {
            let other = seen
                .iter()
                .copied()
                .find(|o| {
                    let g = gcd_u64(o.modulus, c.modulus);
                    o.residue % g != c.residue % g
                })
                .unwrap_or(acc);
            return Ok(CrtResult::Unsatisfiable(other, c));
        }
        let lcm = m1 / g * m2;
        if lcm > u64::MAX as i128 {
            return Err(Error::Overflow("crt modulus".into()));
        }
        let step = ((r2 - r1) / g % (m2 / g)) * (p % (m2 / g)) % (m2 / g);
        let r = (r1 + m1 * step).rem_euclid(lcm);
        acc = CongruenceConstraint { var, modulus: lcm as u64, residue: r as u64 };
        seen.push(c);
    }
    Ok(CrtResult::Combined(acc))
}

/// A set of exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExponentSet {
    Empty,
    /// Exactly one exponent.
    Single(u64),
    /// `{offset + period * t : t >= 0}`.
    Progression { offset: u64, period: u64 },
}

impl ExponentSet {
    pub fn all() -> ExponentSet {
        ExponentSet::Progression { offset: 0, period: 1 }
    }

    pub fn contains(&self, e: u64) -> bool {
        match *self {
            ExponentSet::Empty => false,
            ExponentSet::Single(s) => s == e,
            ExponentSet::Progression { offset, period } => e >= offset && (e - offset).is_multiple_of(period),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, ExponentSet::Empty)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExponentSet::Progression { .. })
    }

    /// Smallest member.
    pub fn minimum(&self) -> Option<u64> {
        match *self {
            ExponentSet::Empty => None,
            ExponentSet::Single(s) => Some(s),
            ExponentSet::Progression { offset, .. } => Some(offset),
        }
    }

    /// Members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = u64> {
        let (start, step, count) = match *self {
            ExponentSet::Empty => (0, 1, 0),
            ExponentSet::Single(s) => (s, 1, 1),
            ExponentSet::Progression { offset, period } => (offset, period, u64::MAX),
        };
        (0..count).map_while(move |i| i.checked_mul(step).and_then(|d| d.checked_add(start)))
    }

    /// `{e - by : e ∈ self, e >= by}`.
    pub fn shift_down(&self, by: u64) -> ExponentSet {
        match *self {
            ExponentSet::Empty => ExponentSet::Empty,
            ExponentSet::Single(s) if s >= by => ExponentSet::Single(s - by),
            ExponentSet::Single(_) => ExponentSet::Empty,
            ExponentSet::Progression { offset, period } => {
                let offset = if offset >= by {
                    offset - by
                } else {
                    let k = (by - offset).div_ceil(period);
                    offset + k * period - by
                };
                ExponentSet::Progression { offset, period }
            }
        }
    }

    pub fn intersect(&self, other: &ExponentSet) -> ExponentSet {
        use ExponentSet::*;
        match (*self, *other) {
            (Empty, _) | (_, Empty) => Empty,
            (Single(a), o) | (o, Single(a)) => {
                if o.contains(a) {
                    Single(a)
                } else {
                    Empty
                }
            }
            (Progression { offset: o1, period: p1 }, Progression { offset: o2, period: p2 }) => {
                let sys = CongruenceSystem::new(vec![
                    CongruenceConstraint { var: 0, modulus: p1, residue: o1 % p1 },
                    CongruenceConstraint { var: 0, modulus: p2, residue: o2 % p2 },
                ]);
                match crt_combine(&sys) {
                    Ok(CrtResult::Combined(c)) => {
                        let lo = o1.max(o2);
                        let mut first = c.residue;
                        if first < lo {
                            first += (lo - first).div_ceil(c.modulus) * c.modulus;
                        }
                        Progression { offset: first, period: c.modulus }
                    }
                    _ => Empty,
                }
            }
        }
    }
}

impl fmt::Display for ExponentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExponentSet::Empty => write!(f, "∅"),
            ExponentSet::Single(s) => write!(f, "{{{s}}}"),
            ExponentSet::Progression { offset, period } => write!(f, "{{{offset} + {period}t : t ≥ 0}}"),
        }
    }
}

/// Exponents `e` such that `base^e` satisfies every constraint of `system`.
///
/// The moduli are combined by CRT and the residue cycle of the base modulo
/// the combined modulus is scanned once, so the answer is the full set:
/// exponents inside the preperiod are returned as `Single`, periodic hits as
/// a progression whose period is the cycle length. An infinite progression
/// is preferred; when several phases hit only the first is returned (see
/// [`exponents_satisfying_all`] for the full union).
pub fn exponents_satisfying(base: u64, system: &CongruenceSystem) -> Result<ExponentSet> {
    if base < 2 {
        return Err(Error::InvalidInput(format!("base must be at least 2, got {base}")));
    }
    let target = match crt_combine(system)? {
        CrtResult::Unsatisfiable(..) => return Ok(ExponentSet::Empty),
        CrtResult::Combined(c) => c,
    };
    let cycle = power_residues(base, target.modulus)?;
    let hits = |range: std::ops::Range<u64>| range.filter(|&e| cycle.residue(e) == target.residue).collect::<Vec<_>>();
    let periodic = hits(cycle.preperiod..cycle.preperiod + cycle.period);
    if let Some(&first) = periodic.first() {
        return Ok(ExponentSet::Progression { offset: first, period: cycle.period });
    }
    Ok(hits(0..cycle.preperiod).first().map_or(ExponentSet::Empty, |&e| ExponentSet::Single(e)))
}

/// Every satisfying exponent, as a finite union of sets.
pub fn exponents_satisfying_all(base: u64, system: &CongruenceSystem) -> Result<Vec<ExponentSet>> {
    let target = match crt_combine(system)? {
        CrtResult::Unsatisfiable(..) => return Ok(Vec::new()),
        CrtResult::Combined(c) => c,
    };
    let cycle = power_residues(base, target.modulus)?;
    let mut out = Vec::new();
    for e in 0..cycle.preperiod + cycle.period {
        if cycle.residue(e) == target.residue {
            out.push(if e < cycle.preperiod {
                ExponentSet::Single(e)
            } else {
                ExponentSet::Progression { offset: e, period: cycle.period }
            });
        }
    }
    Ok(out)
}

fn power_term(base: u64, exp: u64) -> Term {
    Term::constant(pow(base, exp))
}

/// `∀x [U_l(x) → (∨_{j<m} x = l^j ∨ ∧_{k=1}^{l^m-1} ¬D_{l^m}(x − k))]`.
pub fn car1_axiom(base: u64, m: u64) -> Result<AxiomInstance> {
    if base < 2 {
        return Err(Error::InvalidInput(format!("base must be at least 2, got {base}")));
    }
    let params = json!({"l": base, "m": m});
    if m == 0 {
        return Ok(AxiomInstance::new(Schema::A5, params, Formula::truth(), "car1 with m = 0 is trivially true"));
    }
    let modulus = base
        .checked_pow(m as u32)
        .filter(|_| m <= u32::MAX as u64)
        .ok_or_else(|| Error::Overflow(format!("{base}^{m} as a D modulus")))?;
    let x = Term::var("x");
    let mut disjuncts: Vec<Formula> = (0..m).map(|j| Formula::eq(x.clone(), power_term(base, j))).collect();
    let conj: Vec<Formula> = (1..modulus)
        .map(|k| Formula::not(Formula::D(modulus, x.sub(&Term::constant(k)))))
        .collect();
    disjuncts.push(Formula::and_all(conj));
    let body = Formula::implies(Formula::U(base, x), Formula::or_any(disjuncts));
    Ok(AxiomInstance::new(Schema::A5, params, Formula::forall("x", body), "car1"))
}

/// `∀x [U_l(x) → ∧_{k∈E} ¬D_n(x − k)]` with E the excluded residues.
pub fn car2_axiom(base: u64, modulus: u64) -> Result<AxiomInstance> {
    let excluded = excluded_residues(base, modulus)?;
    let x = Term::var("x");
    let conj: Vec<Formula> = if modulus < 2 {
        Vec::new()
    } else {
        excluded.iter().map(|&k| Formula::not(Formula::D(modulus, x.sub(&Term::constant(k))))).collect()
    };
    let body = Formula::implies(Formula::U(base, x), Formula::and_all(conj));
    Ok(AxiomInstance::new(
        Schema::A5,
        json!({"l": base, "n": modulus, "excluded": excluded}),
        Formula::forall("x", body),
        "car2",
    ))
}
