//! Exact integers and rationals, certified enclosures of `log_k(l)` and of
//! fractional parts `fr(t * log_k(l))`, continued fractions, and exact
//! multiplicative-independence tests.
//!
//! Nothing in here certifies with floating point. Enclosures are produced by
//! the binary-digit squaring method on fixed-point big integers with outward
//! rounding, so every digit is backed by an exact integer comparison.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Int = BigInt;
pub type Rat = BigRational;

/// Default cap on requested enclosure precision, in bits.
pub const DEFAULT_PRECISION_CAP: u32 = 4096;

pub fn int(v: i64) -> Int {
    BigInt::from(v)
}

pub fn rat(num: i64, den: i64) -> Rat {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_from_int(v: Int) -> Rat {
    BigRational::from_integer(v)
}

pub fn pow(base: u64, exp: u64) -> Int {
    let e = u32::try_from(exp).expect("exponent exceeds u32");
    num_traits::pow(BigInt::from(base), e as usize)
}

pub fn pow_int(base: &Int, exp: u64) -> Int {
    num_traits::pow(base.clone(), exp as usize)
}

/// Parses `"p/q"`, `"-7"` or a decimal like `"0.25"` into an exact rational.
pub fn parse_rat(text: &str) -> Result<Rat> {
    let s = text.trim();
    let bad = || Error::InvalidInput(format!("not a rational: {text:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: Int = n.trim().parse().map_err(|_| bad())?;
        let d: Int = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.trim_start().starts_with('-');
        let whole_abs: Int = whole.trim_start_matches('-').parse().unwrap_or_else(|_| Int::zero());
        let frac_num: Int = frac.parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10u32), frac.len());
        let mag = BigRational::new(whole_abs * &den + frac_num, den);
        return Ok(if negative { -mag } else { mag });
    }
    let n: Int = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

pub fn format_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Floor of a rational as an integer.
pub fn floor_rat(r: &Rat) -> Int {
    r.numer().div_floor(r.denom())
}

/// Rough `f64` value of a rational. Search heuristics only.
pub fn rat_to_f64(r: &Rat) -> f64 {
    ln_int(r.numer().abs()).map_or(0.0, |ln_n| {
        let ln_d = ln_int(r.denom().clone()).unwrap_or(0.0);
        let v = (ln_n - ln_d).exp();
        if r.is_negative() {
            -v
        } else {
            v
        }
    })
}

/// Natural log of a positive big integer as `f64`, `None` for zero.
pub fn ln_int(v: Int) -> Option<f64> {
    if v.is_zero() {
        return None;
    }
    let bits = v.bits();
    if bits <= 1000 {
        return v.to_f64().map(f64::ln);
    }
    let shift = bits - 60;
    let top = (&v >> shift).to_f64()?;
    Some(top.ln() + shift as f64 * std::f64::consts::LN_2)
}

/// Natural log of a positive rational as `f64`.
pub fn ln_rat(r: &Rat) -> Option<f64> {
    if !r.is_positive() {
        return None;
    }
    Some(ln_int(r.numer().clone())? - ln_int(r.denom().clone())?)
}

/// `k^p` compared with `l^q`; the sign of `p/q - log_k(l)` for `q > 0`.
pub fn compare_powers(k: u64, p: u64, l: u64, q: u64) -> Ordering {
    pow(k, p).cmp(&pow(l, q))
}

/// Largest `e` with `base^e <= v`, for `v >= 1`.
pub fn ilog(base: u64, v: &Int) -> u64 {
    assert!(base >= 2 && v >= &Int::one());
    let b = BigInt::from(base);
    let mut acc = Int::one();
    let mut e = 0;
    loop {
        let next = &acc * &b;
        if &next > v {
            return e;
        }
        acc = next;
        e += 1;
    }
}

/// If `v = base^e` exactly, returns `e`.
pub fn exact_log(base: u64, v: &Int) -> Option<u64> {
    if !v.is_positive() {
        return None;
    }
    let b = BigInt::from(base);
    let mut cur = v.clone();
    let mut e = 0;
    while !cur.is_one() {
        let (q, r) = cur.div_rem(&b);
        if !r.is_zero() {
            return None;
        }
        cur = q;
        e += 1;
    }
    Some(e)
}

/// Certificate of multiplicative (in)dependence of two bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dependence {
    Independent,
    /// `k^m = l^n` with `m, n >= 1` minimal; both are powers of `root`.
    Dependent { root: u64, m: u64, n: u64 },
}

impl Dependence {
    pub fn verify(&self, k: u64, l: u64) -> bool {
        match *self {
            Dependence::Independent => true,
            Dependence::Dependent { m, n, .. } => pow(k, m) == pow(l, n),
        }
    }
}

fn common_root(a: u64, b: u64) -> Option<u64> {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == lo {
        return Some(hi);
    }
    if hi % lo != 0 {
        return None;
    }
    common_root(hi / lo, lo)
}

/// Decides multiplicative dependence of `k, l >= 2` exactly.
pub fn dependence(k: u64, l: u64) -> Dependence {
    assert!(k >= 2 && l >= 2, "bases must be at least 2");
    match common_root(k, l) {
        None => Dependence::Independent,
        Some(root) => {
            let a = ilog(root, &BigInt::from(k));
            let b = ilog(root, &BigInt::from(l));
            let g = a.gcd(&b);
            Dependence::Dependent { root, m: b / g, n: a / g }
        }
    }
}

pub fn mult_independent(k: u64, l: u64) -> bool {
    dependence(k, l) == Dependence::Independent
}

/// Rational enclosure of `log_base(arg)`.
///
/// For independent bases `lo < log < hi` strictly; for dependent bases the
/// logarithm is rational and the enclosure collapses to `lo = hi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogEnclosure {
    pub lo: Rat,
    pub hi: Rat,
    pub base: u64,
    pub arg: u64,
}

impl LogEnclosure {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }

    /// Re-checks both endpoints with direct power comparisons:
    /// `lo = p/q` needs `base^p < arg^q`, `hi = p/q` needs `base^p > arg^q`.
    /// Only sensible for small denominators.
    pub fn recertify(&self) -> bool {
        let check = |r: &Rat, want: Ordering| -> bool {
            let (p, q) = (r.numer().to_u64(), r.denom().to_u64());
            match (p, q) {
                (Some(p), Some(q)) => compare_powers(self.base, p, self.arg, q) == want,
                _ => false,
            }
        };
        if self.is_exact() {
            check(&self.lo, Ordering::Equal)
        } else {
            check(&self.lo, Ordering::Less) && check(&self.hi, Ordering::Greater)
        }
    }
}

/// Certified enclosure of `log_k(l)` of width at most `2^-bits`.
pub fn log_enclosure(k: u64, l: u64, bits: u32) -> Result<LogEnclosure> {
    log_enclosure_capped(k, l, bits, DEFAULT_PRECISION_CAP)
}

pub fn log_enclosure_capped(k: u64, l: u64, bits: u32, cap: u32) -> Result<LogEnclosure> {
    if k < 2 || l < 2 {
        return Err(Error::InvalidInput("logarithm bases must be at least 2".into()));
    }
    if let Dependence::Dependent { m, n, .. } = dependence(k, l) {
        // k^m = l^n, so log_k(l) = m/n.
        let v = BigRational::new(BigInt::from(m), BigInt::from(n));
        return Ok(LogEnclosure { lo: v.clone(), hi: v, base: k, arg: l });
    }
    if bits > cap {
        return Err(Error::PrecisionExhausted { bits });
    }
    let l_big = BigInt::from(l);
    let whole = ilog(k, &l_big);
    let k_pow = pow(k, whole);
    let mut working = bits + 32;
    loop {
        if let Some(digits) = binary_log_digits(k, &l_big, &k_pow, bits, working) {
            let den = Int::one() << bits;
            let base = BigInt::from(whole) * &den + digits;
            let lo = BigRational::new(base.clone(), den.clone());
            let hi = BigRational::new(base + 1, den);
            return Ok(LogEnclosure { lo, hi, base: k, arg: l });
        }
        working *= 2;
        if working > cap.saturating_mul(4).max(bits + 64) + 64 {
            return Err(Error::PrecisionExhausted { bits });
        }
    }
}

// Fractional digits of log_k(x) for x = l / k^whole in [1, k), with the
// fixed-point interval [x_lo, x_hi] / 2^working rounded outward at each step.
fn binary_log_digits(k: u64, l: &Int, k_pow: &Int, bits: u32, working: u32) -> Option<Int> {
    let kb = BigInt::from(k);
    let scaled = l << working;
    let (q, r) = scaled.div_rem(k_pow);
    let mut x_lo = q.clone();
    let mut x_hi = if r.is_zero() { q } else { q + 1 };
    let threshold = &kb << working;
    let mut digits = Int::zero();
    for _ in 0..bits {
        x_lo = (&x_lo * &x_lo) >> working;
        let sq = &x_hi * &x_hi;
        let floor = &sq >> working;
        x_hi = if (&floor << working) == sq { floor } else { floor + 1 };
        digits <<= 1;
        if x_lo >= threshold {
            digits += 1;
            x_lo = x_lo.div_floor(&kb);
            x_hi = x_hi.div_ceil(&kb);
        } else if x_hi >= threshold {
            return None;
        }
    }
    Some(digits)
}

/// Certified value of `fr(t * log_k(l))` together with the exact integer part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FracValue {
    pub int_part: Int,
    pub lo: Rat,
    pub hi: Rat,
}

impl FracValue {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }
}

pub fn frac_part(t: u64, k: u64, l: u64, bits: u32) -> Result<FracValue> {
    frac_part_capped(t, k, l, bits, DEFAULT_PRECISION_CAP)
}

pub fn frac_part_capped(t: u64, k: u64, l: u64, bits: u32, cap: u32) -> Result<FracValue> {
    if t == 0 {
        return Ok(FracValue { int_part: Int::zero(), lo: Rat::zero(), hi: Rat::zero() });
    }
    let tr = BigRational::from_integer(BigInt::from(t));
    let t_bits = 64 - t.leading_zeros();
    let mut need = bits + t_bits;
    loop {
        let enc = log_enclosure_capped(k, l, need, cap)?;
        let lo = &enc.lo * &tr;
        let hi = &enc.hi * &tr;
        let n_lo = floor_rat(&lo);
        let n_hi = floor_rat(&hi);
        if n_lo == n_hi || enc.is_exact() {
            let base = BigRational::from_integer(n_lo.clone());
            return Ok(FracValue { int_part: n_lo, lo: lo - &base, hi: hi - base });
        }
        // Enclosure straddles an integer; t*log is irrational here, so refine.
        need = need.saturating_mul(2);
        if need > cap {
            return Err(Error::PrecisionExhausted { bits: need });
        }
    }
}

/// Continued-fraction expansion of `log_k(l)` with certified partial quotients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfExpansion {
    pub quotients: Vec<Int>,
    /// Convergents `p_i / q_i`, one per partial quotient.
    pub convergents: Vec<(Int, Int)>,
    /// True when the logarithm is rational and the expansion is complete.
    pub terminated: bool,
}

fn cf_of_rational(r: &Rat) -> Vec<Int> {
    let mut out = Vec::new();
    let (mut n, mut d) = (r.numer().clone(), r.denom().clone());
    while !d.is_zero() {
        let (q, rem) = n.div_mod_floor(&d);
        out.push(q);
        n = d;
        d = rem;
    }
    out
}

pub fn convergents_of(quotients: &[Int]) -> Vec<(Int, Int)> {
    let (mut p_prev, mut p) = (Int::zero(), Int::one());
    let (mut q_prev, mut q) = (Int::one(), Int::zero());
    let mut out = Vec::with_capacity(quotients.len());
    for a in quotients {
        let p_next = a * &p + &p_prev;
        let q_next = a * &q + &q_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
        out.push((p.clone(), q.clone()));
    }
    out
}

/// Expands `log_k(l)` to at least `depth + 1` partial quotients (fewer when the
/// logarithm is rational). A quotient counts as certified only when both
/// enclosure endpoints agree on it and both continue past it.
pub fn cf_expansion(k: u64, l: u64, depth: usize, cap: u32) -> Result<CfExpansion> {
    let mut bits = 64;
    loop {
        let enc = log_enclosure_capped(k, l, bits, cap)?;
        if enc.is_exact() {
            let quotients = cf_of_rational(&enc.lo);
            let convergents = convergents_of(&quotients);
            return Ok(CfExpansion { quotients, convergents, terminated: true });
        }
        let a = cf_of_rational(&enc.lo);
        let b = cf_of_rational(&enc.hi);
        let limit = a.len().min(b.len()).saturating_sub(1);
        let common = a.iter().zip(&b).take(limit).take_while(|(x, y)| x == y).count();
        if common > depth {
            let quotients = a[..=depth].to_vec();
            let convergents = convergents_of(&quotients);
            return Ok(CfExpansion { quotients, convergents, terminated: false });
        }
        if bits >= cap {
            return Err(Error::PrecisionExhausted { bits });
        }
        bits = (bits * 2).min(cap);
    }
}

/// Best convergent `p/q` of `log_k(l)` with `q <= max_den`, plus the next
/// denominator `q'`, so that `|log_k(l) - p/q| < 1/(q q')` (or exact when
/// `q' = 0`).
pub fn bounded_convergent(k: u64, l: u64, max_den: u64, cap: u32) -> Result<(u128, u128, u128)> {
    let mut depth = 8;
    loop {
        let cf = cf_expansion(k, l, depth, cap)?;
        let pos = cf.convergents.iter().position(|(_, q)| q > &BigInt::from(max_den));
        match pos {
            Some(i) if i > 0 => {
                let (p, q) = &cf.convergents[i - 1];
                let q_next = &cf.convergents[i].1;
                return Ok((
                    p.to_u128().expect("convergent fits"),
                    q.to_u128().expect("convergent fits"),
                    q_next.to_u128().unwrap_or(u128::MAX),
                ));
            }
            Some(_) => unreachable!("first convergent has denominator 1"),
            None if cf.terminated => {
                let (p, q) = cf.convergents.last().expect("nonempty expansion");
                return Ok((p.to_u128().expect("fits"), q.to_u128().expect("fits"), 0));
            }
            None => depth *= 2,
        }
    }
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn lcm_u64(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log2_3_four_bits() {
        let enc = log_enclosure(2, 3, 4).unwrap();
        assert!(enc.width() <= rat(1, 16));
        assert!(enc.recertify());
        assert!(enc.lo < rat(1585, 1000) && rat(1585, 1000) < enc.hi);
    }

    #[test]
    fn exact_logs_collapse() {
        let e = log_enclosure(2, 2, 30).unwrap();
        assert_eq!((e.lo.clone(), e.hi.clone()), (rat(1, 1), rat(1, 1)));
        let e = log_enclosure(2, 4, 30).unwrap();
        assert_eq!(e.lo, rat(2, 1));
        assert!(e.is_exact());
        let e = log_enclosure(4, 8, 7).unwrap();
        assert_eq!(e.lo, rat(3, 2));
        assert!(e.recertify());
    }

    #[test]
    fn log_enclosure_refines_monotonically() {
        let mut prev = log_enclosure(3, 5, 2).unwrap();
        for bits in 3..40 {
            let cur = log_enclosure(3, 5, bits).unwrap();
            assert!(cur.lo >= prev.lo && cur.hi <= prev.hi, "bits {bits}");
            prev = cur;
        }
    }

    #[test]
    fn precision_cap_is_distinct() {
        assert_eq!(
            log_enclosure_capped(2, 3, 100, 64),
            Err(Error::PrecisionExhausted { bits: 100 })
        );
    }

    #[test]
    fn frac_part_examples() {
        let f = frac_part(1, 2, 3, 20).unwrap();
        assert_eq!(f.int_part, int(1));
        assert!(f.lo < rat(58497, 100000) && f.hi > rat(58496, 100000));
        assert!(&f.hi - &f.lo <= rat(1, 1 << 20));

        let f = frac_part(2, 2, 3, 20).unwrap();
        assert_eq!(f.int_part, int(3));
        assert!(f.lo < rat(16993, 100000) && f.hi > rat(16992, 100000));

        let f = frac_part(0, 2, 3, 5).unwrap();
        assert!(f.is_exact() && f.lo.is_zero());
    }

    #[test]
    fn dependence_certificates() {
        assert!(mult_independent(2, 3));
        assert!(mult_independent(6, 12));
        assert_eq!(dependence(4, 8), Dependence::Dependent { root: 2, m: 3, n: 2 });
        assert!(!mult_independent(2, 2));
        let d = dependence(8, 2);
        assert_eq!(d, Dependence::Dependent { root: 2, m: 1, n: 3 });
        assert!(d.verify(8, 2));
    }

    #[test]
    fn cf_of_log2_3() {
        // log_2 3 = [1; 1, 1, 2, 2, 3, 1, 5, 2, 23, ...]
        let cf = cf_expansion(2, 3, 9, 4096).unwrap();
        let want: Vec<Int> = [1, 1, 1, 2, 2, 3, 1, 5, 2, 23].iter().map(|&v| int(v)).collect();
        assert_eq!(cf.quotients, want);
        assert_eq!(cf.convergents[3], (int(8), int(5)));
    }

    #[test]
    fn parse_rationals() {
        assert_eq!(parse_rat("3/6").unwrap(), rat(1, 2));
        assert_eq!(parse_rat("-0.25").unwrap(), rat(-1, 4));
        assert_eq!(parse_rat("7").unwrap(), rat(7, 1));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
    }
}
