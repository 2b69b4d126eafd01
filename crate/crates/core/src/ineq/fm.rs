//! Fourier–Motzkin elimination over the rationals with strict and non-strict
//! constraints.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use crate::numerics::Rat;

/// `Σ coeffs[i] v_i + constant > 0` (or `>= 0` when not strict).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Constraint {
    pub coeffs: Vec<Rat>,
    pub constant: Rat,
    pub strict: bool,
}

impl Constraint {
    pub fn strict(coeffs: Vec<Rat>, constant: Rat) -> Constraint {
        Constraint { coeffs, constant, strict: true }
    }

    pub fn non_strict(coeffs: Vec<Rat>, constant: Rat) -> Constraint {
        Constraint { coeffs, constant, strict: false }
    }

    fn is_constant(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    fn constant_holds(&self) -> bool {
        if self.strict {
            self.constant.is_positive()
        } else {
            !self.constant.is_negative()
        }
    }

    /// Positive rescaling so that the largest magnitude is 1.
    fn normalized(mut self) -> Constraint {
        let m = self
            .coeffs
            .iter()
            .chain(std::iter::once(&self.constant))
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(Rat::zero);
        if !m.is_zero() {
            self.coeffs.iter_mut().for_each(|c| *c /= &m);
            self.constant /= &m;
        }
        self
    }

    pub fn holds_at(&self, point: &[Rat]) -> bool {
        let v: Rat = self.coeffs.iter().zip(point).map(|(c, x)| c * x).sum::<Rat>() + &self.constant;
        if self.strict {
            v.is_positive()
        } else {
            !v.is_negative()
        }
    }
}

/// Whether some real point satisfies every constraint.
pub fn feasible(constraints: &[Constraint]) -> bool {
    let n = constraints.iter().map(|c| c.coeffs.len()).max().unwrap_or(0);
    let mut current: BTreeSet<Constraint> = BTreeSet::new();
    for c in constraints {
        let mut c = c.clone();
        c.coeffs.resize(n, Rat::zero());
        if c.is_constant() {
            if !c.constant_holds() {
                return false;
            }
        } else {
            current.insert(c.normalized());
        }
    }
    for var in (0..n).rev() {
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), BTreeSet::new());
        for c in current {
            let a = &c.coeffs[var];
            if a.is_positive() {
                pos.push(c);
            } else if a.is_negative() {
                neg.push(c);
            } else {
                rest.insert(c);
            }
        }
        for p in &pos {
            for q in &neg {
                let (a, b) = (p.coeffs[var].clone(), -q.coeffs[var].clone());
                let coeffs: Vec<Rat> = p.coeffs.iter().zip(&q.coeffs).map(|(x, y)| x * &b + y * &a).collect();
                let combined = Constraint {
                    coeffs,
                    constant: &p.constant * &b + &q.constant * &a,
                    strict: p.strict || q.strict,
                };
                if combined.is_constant() {
                    if !combined.constant_holds() {
                        return false;
                    }
                } else {
                    rest.insert(combined.normalized());
                }
            }
        }
        current = rest;
    }
    current.iter().all(Constraint::constant_holds)
}
