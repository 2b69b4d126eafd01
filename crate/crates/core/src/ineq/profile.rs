//! Case split over the relative sizes of same-base variables.
//!
//! Within one base the variables are ordered by exponent and each gap between
//! neighbours is either an exact value up to `nu` or larger than `nu`. Runs of
//! exact gaps form a class whose members are fixed powers of the class anchor.

use std::fmt;

use serde::Serialize;

/// Gap between consecutive exponents in a base group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Gap {
    Exact(u64),
    /// Strictly larger than the profile's `nu`.
    Large,
}

/// Ordering and gaps for the variables of one base, smallest exponent first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BaseOrder {
    pub base: u64,
    pub order: Vec<usize>,
    pub gaps: Vec<Gap>,
}

/// One branch of the case split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VarProfile {
    pub nu: u64,
    pub groups: Vec<BaseOrder>,
}

/// Variables tied to a common anchor: `e_var = e_anchor + offset`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Class {
    pub base: u64,
    /// `(variable, offset)`, offsets ascending, first offset 0.
    pub members: Vec<(usize, u64)>,
}

impl Class {
    pub fn max_offset(&self) -> u64 {
        self.members.last().map_or(0, |m| m.1)
    }
}

impl BaseOrder {
    /// Classes in increasing size.
    pub fn classes(&self) -> Vec<Class> {
        let mut out = Vec::new();
        let mut cur = Class { base: self.base, members: vec![(self.order[0], 0)] };
        for (i, gap) in self.gaps.iter().enumerate() {
            let v = self.order[i + 1];
            match gap {
                Gap::Exact(g) => {
                    let off = cur.members.last().unwrap().1 + g;
                    cur.members.push((v, off));
                }
                Gap::Large => {
                    out.push(std::mem::replace(&mut cur, Class { base: self.base, members: vec![(v, 0)] }));
                }
            }
        }
        out.push(cur);
        out
    }

    pub fn has_large_gap(&self) -> bool {
        self.gaps.contains(&Gap::Large)
    }
}

impl VarProfile {
    pub fn has_large_gap(&self) -> bool {
        self.groups.iter().any(BaseOrder::has_large_gap)
    }
}

impl fmt::Display for VarProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (gi, g) in self.groups.iter().enumerate() {
            if gi > 0 {
                write!(f, "; ")?;
            }
            write!(f, "base {}: v{}", g.base, g.order[0])?;
            for (gap, v) in g.gaps.iter().zip(&g.order[1..]) {
                match gap {
                    Gap::Exact(d) => write!(f, " +{d} v{v}")?,
                    Gap::Large => write!(f, " >>{} v{v}", self.nu)?,
                }
            }
        }
        Ok(())
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}

/// Every ordering/gap choice for one base group; ties (gap 0) only in index
/// order, so each exponent assignment falls in exactly one branch.
pub fn base_orders(base: u64, vars: &[usize], nu: u64, limit: usize) -> Option<Vec<BaseOrder>> {
    let mut out = Vec::new();
    let choices: Vec<Gap> = (0..=nu).map(Gap::Exact).chain(std::iter::once(Gap::Large)).collect();
    for order in permutations(vars) {
        let slots = order.len().saturating_sub(1);
        let mut idx = vec![0usize; slots];
        let mut done = false;
        while !done {
            let gaps: Vec<Gap> = idx.iter().map(|&i| choices[i]).collect();
            let tie_ok = gaps
                .iter()
                .enumerate()
                .all(|(i, g)| *g != Gap::Exact(0) || order[i] < order[i + 1]);
            if tie_ok {
                out.push(BaseOrder { base, order: order.clone(), gaps });
                if out.len() > limit {
                    return None;
                }
            }
            done = true;
            for pos in (0..slots).rev() {
                if idx[pos] + 1 < choices.len() {
                    idx[pos] += 1;
                    idx[pos + 1..].iter_mut().for_each(|i| *i = 0);
                    done = false;
                    break;
                }
            }
        }
    }
    Some(out)
}

/// Cartesian product of the per-base branches; `None` past `limit`.
pub fn profiles(groups: &[(u64, Vec<usize>)], nu: u64, limit: usize) -> Option<Vec<VarProfile>> {
    let per_base: Vec<Vec<BaseOrder>> =
        groups.iter().map(|(b, vars)| base_orders(*b, vars, nu, limit)).collect::<Option<_>>()?;
    let total = per_base.iter().try_fold(1usize, |acc, v| acc.checked_mul(v.len()))?;
    if total > limit {
        return None;
    }
    let mut out = vec![VarProfile { nu, groups: Vec::new() }];
    for options in per_base {
        out = out
            .into_iter()
            .flat_map(|p| {
                options.iter().map(move |o| {
                    let mut q = p.clone();
                    q.groups.push(o.clone());
                    q
                })
            })
            .collect();
    }
    // exact profiles first: they are decided completely
    out.sort_by_key(VarProfile::has_large_gap);
    Some(out)
}
