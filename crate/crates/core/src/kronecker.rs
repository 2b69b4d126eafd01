//! Density of `{k^s / l^t}` in the positive reals and of `{fr(t log_k l)}` in
//! `[0, 1)`, made constructive: every witness returned here is re-checked by
//! exact integer arithmetic.

use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::numerics::{
    dependence, floor_rat, format_rat, frac_part_capped, ilog, ln_rat, log_enclosure_capped, pow,
    rat_to_f64, Dependence, Int, Rat, DEFAULT_PRECISION_CAP,
};

/// Default number of `t` values scanned before giving up.
pub const DEFAULT_SCAN_LIMIT: u64 = 20_000_000;

/// Open interval with rational endpoints; a missing endpoint is unbounded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenInterval {
    pub lo: Option<Rat>,
    pub hi: Option<Rat>,
}

impl OpenInterval {
    pub fn new(lo: Rat, hi: Rat) -> Result<OpenInterval> {
        OpenInterval::half(Some(lo), Some(hi))
    }

    pub fn half(lo: Option<Rat>, hi: Option<Rat>) -> Result<OpenInterval> {
        if let (Some(a), Some(b)) = (&lo, &hi) {
            if a >= b {
                return Err(Error::InvalidInput(format!(
                    "empty interval ({}, {})",
                    format_rat(a),
                    format_rat(b)
                )));
            }
        }
        Ok(OpenInterval { lo, hi })
    }

    pub fn contains(&self, v: &Rat) -> bool {
        self.lo.as_ref().is_none_or(|a| v > a) && self.hi.as_ref().is_none_or(|b| v < b)
    }

    /// Both endpoints present.
    pub fn bounds(&self) -> Option<(&Rat, &Rat)> {
        Some((self.lo.as_ref()?, self.hi.as_ref()?))
    }
}

impl fmt::Display for OpenInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lo = self.lo.as_ref().map_or("-inf".to_string(), format_rat);
        let hi = self.hi.as_ref().map_or("+inf".to_string(), format_rat);
        write!(f, "({lo}, {hi})")
    }
}

/// `k^s / l^t` for a pair of independent bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RatioWitness {
    pub s: u64,
    pub t: u64,
}

impl RatioWitness {
    pub fn ratio(&self, k: u64, l: u64) -> Rat {
        Rat::new(pow(k, self.s), pow(l, self.t))
    }
}

fn require_independent(k: u64, l: u64) -> Result<()> {
    if k < 2 || l < 2 {
        return Err(Error::InvalidInput(format!("bases must be at least 2, got ({k}, {l})")));
    }
    match dependence(k, l) {
        Dependence::Independent => Ok(()),
        Dependence::Dependent { m, n, .. } => Err(Error::DependentBases { k, l, m, n }),
    }
}

/// Certified membership of `fr(t log_k l)` in an interval, refining precision
/// until the answer is unambiguous.
fn frac_in(t: u64, k: u64, l: u64, lo: &Rat, hi: &Rat, cap: u32) -> Result<bool> {
    let mut bits = 64;
    loop {
        let fv = frac_part_capped(t, k, l, bits, cap)?;
        if fv.is_exact() {
            return Ok(&fv.lo > lo && &fv.lo < hi);
        }
        if &fv.lo >= lo && &fv.hi <= hi {
            return Ok(true);
        }
        if &fv.hi <= lo || &fv.lo >= hi {
            return Ok(false);
        }
        if bits >= cap {
            return Err(Error::PrecisionExhausted { bits });
        }
        bits = (bits * 2).min(cap);
    }
}

fn log_f64(k: u64, l: u64, cap: u32) -> Result<f64> {
    let enc = log_enclosure_capped(k, l, 64, cap)?;
    Ok(rat_to_f64(&enc.lo))
}

/// Smallest `t >= 0` with `fr(t log_k l) ∈ J`, `J ⊆ (0, 1)`.
///
/// Candidates are screened in floating point with an error margin that
/// covers the rounding, so no hit is skipped; survivors are decided exactly.
pub fn find_frac_hit(k: u64, l: u64, j: &OpenInterval) -> Result<u64> {
    find_frac_hit_with(k, l, j, DEFAULT_PRECISION_CAP, DEFAULT_SCAN_LIMIT)
}

pub fn find_frac_hit_with(k: u64, l: u64, j: &OpenInterval, cap: u32, limit: u64) -> Result<u64> {
    require_independent(k, l)?;
    let (lo, hi) = j.bounds().ok_or_else(|| Error::InvalidInput("fractional target must be bounded".into()))?;
    if lo.is_negative() || hi > &Rat::one() {
        return Err(Error::InvalidInput(format!("fractional target {j} must lie in (0, 1)")));
    }
    let lambda = log_f64(k, l, cap)?;
    let (lo_f, hi_f) = (rat_to_f64(lo), rat_to_f64(hi));
    for t in 0..limit {
        let x = t as f64 * lambda;
        let margin = x * 2f64.powi(-48) + 1e-12;
        let fr = x - x.floor();
        let near = |v: f64| (fr - v).abs() <= margin || (fr - v).abs() >= 1.0 - margin;
        let maybe = (fr > lo_f - margin && fr < hi_f + margin) || near(lo_f) || near(hi_f);
        if maybe && frac_in(t, k, l, lo, hi, cap)? {
            return Ok(t);
        }
    }
    Err(Error::BudgetExhausted(format!("no t < {limit} with fr(t log_{k} {l}) in {j}")))
}

/// Replaces unbounded ends by bounded ones that still contain a witness.
fn bounded_target(k: u64, i: &OpenInterval) -> Result<(Rat, Rat)> {
    match (&i.lo, &i.hi) {
        (_, Some(b)) if !b.is_positive() => Err(Error::InvalidInput(format!("interval {i} has no positive points"))),
        (Some(a), Some(b)) if a.is_positive() => Ok((a.clone(), b.clone())),
        (_, Some(b)) => Ok((b / Rat::from_integer(Int::from(2)), b.clone())),
        (Some(a), None) if a.is_positive() => {
            let hi = a * Rat::from_integer(Int::from(k)) + Rat::one();
            Ok((a.clone(), hi))
        }
        (_, None) => Ok((Rat::new(Int::one(), Int::from(2)), Rat::from_integer(Int::from(2)))),
    }
}

/// Exact test `a < k^s / l^t < b`.
pub fn ratio_in(k: u64, l: u64, w: RatioWitness, a: &Rat, b: &Rat) -> bool {
    let r = w.ratio(k, l);
    &r > a && &r < b
}

/// Successive witnesses `k^s / l^t ∈ I`, ordered by `t` then `s`.
pub struct RatioWitnesses {
    k: u64,
    l: u64,
    lo: Rat,
    hi: Rat,
    lambda: f64,
    ln_lo: f64,
    ln_hi: f64,
    next_t: u64,
    pending: Vec<RatioWitness>,
    limit: u64,
}

impl RatioWitnesses {
    pub fn new(k: u64, l: u64, i: &OpenInterval, cap: u32, limit: u64) -> Result<RatioWitnesses> {
        require_independent(k, l)?;
        let (lo, hi) = bounded_target(k, i)?;
        let lnk = (k as f64).ln();
        Ok(RatioWitnesses {
            k,
            l,
            lambda: log_f64(k, l, cap)?,
            ln_lo: ln_rat(&lo).expect("positive") / lnk,
            ln_hi: ln_rat(&hi).expect("positive") / lnk,
            lo,
            hi,
            next_t: 0,
            pending: Vec::new(),
            limit,
        })
    }

    /// The bounded interval actually searched.
    pub fn target(&self) -> (&Rat, &Rat) {
        (&self.lo, &self.hi)
    }

    fn scan_row(&mut self, t: u64) {
        // log_k of the target ratio bounds for s: t λ + log_k(lo) < s < t λ + log_k(hi)
        let base = t as f64 * self.lambda;
        let margin = base.abs() * 2f64.powi(-48) + 1e-9;
        let s_min = (base + self.ln_lo - margin).floor().max(0.0);
        let s_max = (base + self.ln_hi + margin).ceil();
        if s_max < 0.0 {
            return;
        }
        let (s_min, s_max) = (s_min as u64, s_max as u64);
        for s in s_min..=s_max {
            let w = RatioWitness { s, t };
            if ratio_in(self.k, self.l, w, &self.lo, &self.hi) {
                self.pending.push(w);
            }
        }
        self.pending.reverse();
    }
}

impl Iterator for RatioWitnesses {
    type Item = Result<RatioWitness>;

    fn next(&mut self) -> Option<Self::Item> {
        while self.pending.is_empty() {
            if self.next_t >= self.limit {
                return Some(Err(Error::BudgetExhausted(format!(
                    "no ratio witness with t < {}",
                    self.limit
                ))));
            }
            let t = self.next_t;
            self.next_t += 1;
            self.scan_row(t);
        }
        self.pending.pop().map(Ok)
    }
}

/// Some `(s, t)` with `k^s / l^t ∈ I`: the smallest `t`, then the smallest `s`.
pub fn find_ratio_in(k: u64, l: u64, i: &OpenInterval) -> Result<RatioWitness> {
    find_ratio_in_with(k, l, i, DEFAULT_PRECISION_CAP, DEFAULT_SCAN_LIMIT)
}

pub fn find_ratio_in_with(k: u64, l: u64, i: &OpenInterval, cap: u32, limit: u64) -> Result<RatioWitness> {
    RatioWitnesses::new(k, l, i, cap, limit)?.next().expect("iterator always yields")
}

/// Outer enclosure of `fr(J + w log_k l)` as one or two open pieces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftedImage {
    pub pieces: Vec<OpenInterval>,
    /// Over-approximation introduced by the logarithm enclosure.
    pub slack: Rat,
}

pub fn shifted_image(j: &OpenInterval, w: u64, k: u64, l: u64, bits: u32) -> Result<ShiftedImage> {
    let (lo, hi) = j.bounds().ok_or_else(|| Error::InvalidInput("interval must be bounded".into()))?;
    if lo.is_negative() || hi > &Rat::one() {
        return Err(Error::InvalidInput(format!("interval {j} must lie in (0, 1)")));
    }
    let enc = log_enclosure_capped(k, l, bits, DEFAULT_PRECISION_CAP)?;
    let wr = Rat::from_integer(Int::from(w));
    let a = lo + &wr * &enc.lo;
    let b = hi + &wr * &enc.hi;
    let slack = &wr * enc.width();
    let unit = Rat::one();
    if &b - &a >= unit {
        return Ok(ShiftedImage { pieces: vec![OpenInterval::new(Rat::zero(), unit)?], slack });
    }
    let n = Rat::from_integer(floor_rat(&a));
    let (a, b) = (a - &n, b - &n);
    let pieces = if b <= unit {
        vec![OpenInterval::new(a, b)?]
    } else {
        vec![OpenInterval::new(a, unit.clone())?, OpenInterval::new(Rat::zero(), b - unit)?]
    };
    Ok(ShiftedImage { pieces, slack })
}

/// Result of a two-variable homogeneous strict system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TwoVarOutcome {
    /// Feasible; `ratio` is the exact set of admissible `x / y`.
    Sat { witness: RatioWitness, ratio: OpenInterval },
    Unsat,
}

/// Exact set of ratios `r = x / y > 0` with `α r + β > 0` for every row `(α, β)`.
pub fn feasible_ratio(rows: &[(Rat, Rat)]) -> Option<OpenInterval> {
    let mut lo = Rat::zero();
    let mut hi: Option<Rat> = None;
    for (alpha, beta) in rows {
        if alpha.is_zero() {
            if !beta.is_positive() {
                return None;
            }
            continue;
        }
        let bound = -beta / alpha;
        if alpha.is_positive() {
            if bound > lo {
                lo = bound;
            }
        } else if hi.as_ref().is_none_or(|h| &bound < h) {
            hi = Some(bound);
        }
    }
    if let Some(h) = &hi {
        if h <= &lo {
            return None;
        }
    }
    Some(OpenInterval { lo: Some(lo), hi })
}

/// Decides `α_i x + β_i y > 0` over `x ∈ k^ℕ`, `y ∈ l^ℕ`. For two variables
/// real feasibility of the ratio is equivalent to a power witness.
pub fn solve_two_var(k: u64, l: u64, rows: &[(Rat, Rat)]) -> Result<TwoVarOutcome> {
    require_independent(k, l)?;
    match feasible_ratio(rows) {
        None => Ok(TwoVarOutcome::Unsat),
        Some(ratio) => {
            let witness = find_ratio_in(k, l, &ratio)?;
            Ok(TwoVarOutcome::Sat { witness, ratio })
        }
    }
}

/// Exact evaluation of the rows at `x = k^s`, `y = l^t`.
pub fn rows_hold(k: u64, l: u64, rows: &[(Rat, Rat)], w: RatioWitness) -> bool {
    let x = Rat::from_integer(pow(k, w.s));
    let y = Rat::from_integer(pow(l, w.t));
    rows.iter().all(|(a, b)| (a * &x + b * &y).is_positive())
}

/// `floor(log_k v)` for a positive rational, used to size searches.
pub fn floor_log_rat(k: u64, v: &Rat) -> Option<i64> {
    if !v.is_positive() {
        return None;
    }
    if v >= &Rat::one() {
        ilog(k, &floor_rat(v)).to_i64()
    } else {
        let inv = v.recip();
        let e = ilog(k, &floor_rat(&inv)) as i64;
        // k^e <= 1/v < k^{e+1}
        if Rat::from_integer(pow(k, e as u64)) == inv {
            Some(-e)
        } else {
            Some(-e - 1)
        }
    }
}
