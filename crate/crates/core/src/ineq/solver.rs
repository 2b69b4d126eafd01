//! Decision procedure for `C x > 0` over powers of at most two bases.
//!
//! A direct search over small exponents runs first. Otherwise exponents are
//! split into profiles: within a base, consecutive exponents differ by an exact
//! amount up to `nu` or by more. Profiles with only exact gaps reduce to at most
//! one free variable per base and are decided completely (two bases via the
//! Kronecker ratio search). Profiles with a large gap are refuted by
//! Fourier–Motzkin on the real relaxation, or solved by a dominance
//! construction in which larger classes swamp smaller ones.

use num_traits::{One, Signed, ToPrimitive, Zero};

use super::fm::{self, Constraint};
use super::profile::{profiles, Class, VarProfile};
use super::{Budget, IneqOutcome, IneqWitness, LinearIneqSystem};
use crate::congruence::ExponentSet;
use crate::error::{Error, Result};
use crate::kronecker::{feasible_ratio, solve_two_var, OpenInterval, RatioWitnesses, TwoVarOutcome};
use crate::numerics::{dependence, pow, pow_int, rat_to_f64, Dependence, Int, Rat};

/// Witness candidates drawn from one ratio iterator before giving up on a tier.
const PAIR_CANDIDATES: usize = 4096;
/// Tier orderings tried per profile.
const MAX_TIERINGS: usize = 512;
const MARGIN_ROUNDS: u32 = 6;

/// Split of the rows by the sign of one pivot coefficient: with `x_p` large,
/// the `lower` rows hold automatically, the `upper` rows fail, and the
/// `residual` rows do not involve `x_p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EliminationStep {
    pub pivot: usize,
    pub lower: Vec<usize>,
    pub upper: Vec<usize>,
    pub residual: Vec<usize>,
}

impl EliminationStep {
    pub fn split(rows: &[Vec<Rat>], pivot: usize) -> EliminationStep {
        let mut step = EliminationStep { pivot, lower: Vec::new(), upper: Vec::new(), residual: Vec::new() };
        for (i, row) in rows.iter().enumerate() {
            let c = &row[pivot];
            if c.is_positive() {
                step.lower.push(i);
            } else if c.is_negative() {
                step.upper.push(i);
            } else {
                step.residual.push(i);
            }
        }
        step
    }

    /// The pivot can be taken dominant.
    pub fn dominant(&self) -> bool {
        self.upper.is_empty()
    }
}

enum Branch {
    Sat(Vec<u64>),
    Infeasible,
    Unresolved(String),
}

#[derive(Debug, Clone)]
struct ClassInfo {
    class: Class,
    set: ExponentSet,
    group: usize,
    rank: usize,
}

impl ClassInfo {
    fn base(&self) -> u64 {
        self.class.base
    }

    fn fixed(&self) -> Option<u64> {
        match self.set {
            ExponentSet::Single(s) => Some(s),
            _ => None,
        }
    }

    fn progression(&self) -> Option<(u64, u64)> {
        match self.set {
            ExponentSet::Progression { offset, period } => Some((offset, period)),
            _ => None,
        }
    }
}

fn check_bases(system: &LinearIneqSystem) -> Result<()> {
    let bases = system.bases();
    if bases.len() > 2 {
        return Err(Error::OutOfScope(format!(
            "systems over more than two distinct bases ({bases:?}) are not handled"
        )));
    }
    if let [k, l] = bases[..] {
        if let Dependence::Dependent { m, n, .. } = dependence(k, l) {
            return Err(Error::DependentBases { k, l, m, n });
        }
    }
    Ok(())
}

pub fn solve_homogeneous(system: &LinearIneqSystem, budget: &Budget) -> Result<IneqOutcome> {
    solve_with_sets(system, &vec![ExponentSet::all(); system.vars.len()], budget)
}

/// Solves with each variable's exponent restricted to the given set.
pub fn solve_with_sets(system: &LinearIneqSystem, sets: &[ExponentSet], budget: &Budget) -> Result<IneqOutcome> {
    if sets.len() != system.vars.len() {
        return Err(Error::InvalidInput(format!("{} exponent sets for {} variables", sets.len(), system.vars.len())));
    }
    check_bases(system)?;
    if sets.iter().any(ExponentSet::is_empty) {
        return Ok(IneqOutcome::Unsat);
    }
    if let Some(exponents) = box_search(system, sets, budget.box_limit) {
        return Ok(IneqOutcome::Sat(IneqWitness { exponents }));
    }
    let groups = base_groups(system);
    let mut nu = budget.nu_max.unwrap_or_else(|| default_nu(system));
    let mut reason = String::new();
    for round in 0..=budget.deepen_rounds {
        let Some(list) = profiles(&groups, nu, budget.max_profiles) else {
            if round == 0 {
                return Ok(IneqOutcome::Unknown(format!(
                    "more than {} profiles at nu = {nu}",
                    budget.max_profiles
                )));
            }
            break;
        };
        let mut open = None;
        for p in &list {
            match analyze(system, sets, p, budget)? {
                Branch::Sat(exponents) => {
                    debug_assert!(system.holds(&exponents));
                    return Ok(IneqOutcome::Sat(IneqWitness { exponents }));
                }
                Branch::Infeasible => {}
                Branch::Unresolved(r) => {
                    open.get_or_insert_with(|| format!("{r} in profile [{p}]"));
                }
            }
        }
        match open {
            None => return Ok(IneqOutcome::Unsat),
            Some(r) => reason = r,
        }
        nu = nu.saturating_mul(2);
    }
    Ok(IneqOutcome::Unknown(reason))
}

/// Real feasibility of the rows with every variable positive, or, given a
/// profile, of its relaxation (class anchors at least 1, large gaps as
/// multiplicative separations).
pub fn real_feasible(system: &LinearIneqSystem, profile: Option<&VarProfile>) -> bool {
    match profile {
        None => {
            let n = system.vars.len();
            let mut cs: Vec<Constraint> =
                system.rows.iter().map(|r| Constraint::strict(r.clone(), Rat::zero())).collect();
            cs.extend((0..n).map(|i| {
                let mut e = vec![Rat::zero(); n];
                e[i] = Rat::one();
                Constraint::strict(e, Rat::zero())
            }));
            fm::feasible(&cs)
        }
        Some(p) => {
            let sets = vec![ExponentSet::all(); system.vars.len()];
            match build_classes(&sets, p) {
                None => false,
                Some(classes) => relaxation_feasible(system, &classes, p.nu),
            }
        }
    }
}

fn base_groups(system: &LinearIneqSystem) -> Vec<(u64, Vec<usize>)> {
    system
        .bases()
        .into_iter()
        .map(|b| (b, (0..system.vars.len()).filter(|&i| system.vars[i].base == b).collect()))
        .collect()
}

fn default_nu(system: &LinearIneqSystem) -> u64 {
    // ceil(log_base(r * Σ|c|)) + 8 over the smallest base
    let total: f64 = system.rows.iter().flatten().map(|c| rat_to_f64(c).abs()).sum();
    let min_base = system.vars.iter().map(|v| v.base).min().unwrap_or(2) as f64;
    let spread = total * system.rows.len() as f64;
    let nu = if spread > 1.0 { (spread.ln() / min_base.ln()).ceil() } else { 0.0 };
    if nu.is_finite() {
        (nu as u64 + 8).min(256)
    } else {
        8
    }
}

/// Exhaustive search over exponents up to a common bound chosen so that the
/// box has at most `limit` points. Candidates pass an f64 filter first and are
/// confirmed exactly.
fn box_search(system: &LinearIneqSystem, sets: &[ExponentSet], limit: u64) -> Option<Vec<u64>> {
    const MAX_EXP: u64 = 256;
    let count = |set: &ExponentSet, e: u64| set.iter().take_while(|&x| x <= e).count() as u64;
    let fits = |e: u64| sets.iter().try_fold(1u64, |acc, s| acc.checked_mul(count(s, e))).is_some_and(|p| p <= limit);
    let mut bound = 0;
    while bound < MAX_EXP && fits(bound + 1) {
        bound += 1;
    }
    let candidates: Vec<Vec<u64>> = sets.iter().map(|s| s.iter().take_while(|&x| x <= bound).collect()).collect();
    if candidates.iter().any(Vec::is_empty) {
        return None;
    }
    let approx: Vec<Vec<f64>> = candidates
        .iter()
        .zip(&system.vars)
        .map(|(c, v)| c.iter().map(|&e| (v.base as f64).powf(e as f64)).collect())
        .collect();
    let rows: Vec<Vec<f64>> = system.rows.iter().map(|r| r.iter().map(rat_to_f64).collect()).collect();
    let n = sets.len();
    let mut idx = vec![0usize; n];
    loop {
        let plausible = rows.iter().all(|row| {
            let (mut sum, mut scale) = (0.0f64, 0.0f64);
            for j in 0..n {
                let t = row[j] * approx[j][idx[j]];
                sum += t;
                scale += t.abs();
            }
            !sum.is_finite() || !scale.is_finite() || sum > -1e-9 * scale
        });
        if plausible {
            let exps: Vec<u64> = (0..n).map(|j| candidates[j][idx[j]]).collect();
            if system.holds(&exps) {
                return Some(exps);
            }
        }
        let mut pos = n;
        loop {
            if pos == 0 {
                return None;
            }
            pos -= 1;
            if idx[pos] + 1 < candidates[pos].len() {
                idx[pos] += 1;
                idx[pos + 1..].iter_mut().for_each(|i| *i = 0);
                break;
            }
        }
    }
}

fn build_classes(sets: &[ExponentSet], profile: &VarProfile) -> Option<Vec<ClassInfo>> {
    let mut out = Vec::new();
    for (group, order) in profile.groups.iter().enumerate() {
        for (rank, class) in order.classes().into_iter().enumerate() {
            let set = class
                .members
                .iter()
                .fold(ExponentSet::all(), |acc, &(v, d)| acc.intersect(&sets[v].shift_down(d)));
            if set.is_empty() {
                return None;
            }
            out.push(ClassInfo { class, set, group, rank });
        }
    }
    Some(out)
}

fn analyze(system: &LinearIneqSystem, sets: &[ExponentSet], profile: &VarProfile, budget: &Budget) -> Result<Branch> {
    match build_classes(sets, profile) {
        None => Ok(Branch::Infeasible),
        Some(classes) => decide(system, classes, profile.nu, profile.has_large_gap(), budget),
    }
}

fn assemble(system: &LinearIneqSystem, classes: &[ClassInfo], anchors: &[u64]) -> Vec<u64> {
    let mut exps = vec![0; system.vars.len()];
    for (c, &a) in classes.iter().zip(anchors) {
        for &(v, d) in &c.class.members {
            exps[v] = a + d;
        }
    }
    exps
}

/// Row restricted to classes: coefficient of each free class anchor value and
/// the constant contributed by fixed classes.
struct Reduced {
    coeffs: Vec<Rat>,
    constant: Rat,
}

fn reduce_rows(system: &LinearIneqSystem, classes: &[ClassInfo], free: &[usize]) -> Vec<Reduced> {
    system
        .rows
        .iter()
        .map(|row| {
            let per_class: Vec<Rat> = classes
                .iter()
                .map(|c| {
                    c.class
                        .members
                        .iter()
                        .map(|&(v, d)| &row[v] * Rat::from_integer(pow(c.base(), d)))
                        .sum()
                })
                .collect();
            let constant = classes
                .iter()
                .zip(&per_class)
                .filter_map(|(c, k)| c.fixed().map(|s| k * Rat::from_integer(pow(c.base(), s))))
                .sum();
            Reduced { coeffs: free.iter().map(|&i| per_class[i].clone()).collect(), constant }
        })
        .collect()
}

/// A free class sitting below a fixed class of its own base has finitely many
/// anchors; returns the class and an upper bound on its anchor.
fn pinnable(classes: &[ClassInfo]) -> Option<(usize, u64)> {
    classes.iter().enumerate().find_map(|(i, c)| {
        c.progression()?;
        classes
            .iter()
            .filter(|f| f.group == c.group && f.rank > c.rank)
            .find_map(ClassInfo::fixed)
            .map(|s| (i, s))
    })
}

fn decide(
    system: &LinearIneqSystem,
    classes: Vec<ClassInfo>,
    nu: u64,
    large: bool,
    budget: &Budget,
) -> Result<Branch> {
    if let Some((ci, bound)) = pinnable(&classes) {
        let mut open = None;
        for a in classes[ci].set.iter().take_while(|&a| a <= bound) {
            let mut pinned = classes.clone();
            pinned[ci].set = ExponentSet::Single(a);
            match decide(system, pinned, nu, large, budget)? {
                Branch::Sat(e) => return Ok(Branch::Sat(e)),
                Branch::Infeasible => {}
                Branch::Unresolved(r) => {
                    open.get_or_insert(r);
                }
            }
        }
        return Ok(open.map_or(Branch::Infeasible, Branch::Unresolved));
    }
    let free: Vec<usize> = (0..classes.len()).filter(|&i| classes[i].progression().is_some()).collect();
    let rows = reduce_rows(system, &classes, &free);
    let anchors_with = |vals: &[(usize, u64)]| -> Vec<u64> {
        let mut a: Vec<u64> = classes.iter().map(|c| c.fixed().unwrap_or(0)).collect();
        for &(i, v) in vals {
            a[i] = v;
        }
        a
    };
    if !large {
        return match free.len() {
            0 => Ok(if rows.iter().all(|r| r.constant.is_positive()) {
                Branch::Sat(assemble(system, &classes, &anchors_with(&[])))
            } else {
                Branch::Infeasible
            }),
            1 => Ok(match solve_affine(&classes[free[0]], &rows) {
                Some(a) => Branch::Sat(assemble(system, &classes, &anchors_with(&[(free[0], a)]))),
                None => Branch::Infeasible,
            }),
            2 => solve_pair(system, &classes, &free, &rows, budget),
            _ => Ok(Branch::Unresolved("exact profile with more than two free classes".into())),
        };
    }
    if !relaxation_feasible_reduced(&classes, &free, &rows, nu) {
        return Ok(Branch::Infeasible);
    }
    Ok(match dominance_witness(system, &classes, &free, &rows, budget) {
        Some(exps) => Branch::Sat(exps),
        None => Branch::Unresolved("real relaxation feasible but no dominance witness found".into()),
    })
}

/// Smallest anchor `o + p u` making `a V + c > 0` for every row, where
/// `V = base^{o + p u}`.
fn solve_affine(class: &ClassInfo, rows: &[Reduced]) -> Option<u64> {
    let (o, p) = class.progression()?;
    let mut lower: Option<Rat> = None;
    let mut upper: Option<Rat> = None;
    for r in rows {
        let a = &r.coeffs[0];
        if a.is_zero() {
            if !r.constant.is_positive() {
                return None;
            }
            continue;
        }
        let bound = -&r.constant / a;
        if a.is_positive() {
            if lower.as_ref().is_none_or(|l| &bound > l) {
                lower = Some(bound);
            }
        } else if upper.as_ref().is_none_or(|u| &bound < u) {
            upper = Some(bound);
        }
    }
    let step = pow(class.base(), p);
    let mut v = pow(class.base(), o);
    let mut u = 0u64;
    if let Some(l) = &lower {
        while &Rat::from_integer(v.clone()) <= l {
            v *= &step;
            u += 1;
        }
    }
    if upper.is_some_and(|h| Rat::from_integer(v) >= h) {
        return None;
    }
    Some(o + p * u)
}

fn rescaled_base(c: &ClassInfo) -> Option<(u64, Int, u64)> {
    let (o, p) = c.progression()?;
    let b = pow(c.base(), p).to_u64()?;
    Some((b, pow(c.base(), o), o))
}

fn solve_pair(
    system: &LinearIneqSystem,
    classes: &[ClassInfo],
    free: &[usize],
    rows: &[Reduced],
    budget: &Budget,
) -> Result<Branch> {
    let (c1, c2) = (&classes[free[0]], &classes[free[1]]);
    let (Some((b1, f1, _)), Some((b2, f2, _))) = (rescaled_base(c1), rescaled_base(c2)) else {
        return Ok(Branch::Unresolved("rescaled base exceeds 64 bits".into()));
    };
    if rows.iter().any(|r| !r.constant.is_zero()) {
        return Ok(Branch::Unresolved("inhomogeneous two-class profile".into()));
    }
    let (f1, f2) = (Rat::from_integer(f1), Rat::from_integer(f2));
    let pair: Vec<(Rat, Rat)> = rows.iter().map(|r| (&r.coeffs[0] * &f1, &r.coeffs[1] * &f2)).collect();
    let _ = budget;
    match solve_two_var(b1, b2, &pair) {
        Ok(TwoVarOutcome::Unsat) => Ok(Branch::Infeasible),
        Ok(TwoVarOutcome::Sat { witness, .. }) => {
            let (o1, p1) = c1.progression().unwrap();
            let (o2, p2) = c2.progression().unwrap();
            let mut anchors: Vec<u64> = classes.iter().map(|c| c.fixed().unwrap_or(0)).collect();
            anchors[free[0]] = o1 + p1 * witness.s;
            anchors[free[1]] = o2 + p2 * witness.t;
            Ok(Branch::Sat(assemble(system, classes, &anchors)))
        }
        Err(Error::BudgetExhausted(r)) => Ok(Branch::Unresolved(r)),
        Err(e @ Error::PrecisionExhausted { .. }) => Ok(Branch::Unresolved(e.to_string())),
        Err(e) => Err(e),
    }
}

fn relaxation_feasible(system: &LinearIneqSystem, classes: &[ClassInfo], nu: u64) -> bool {
    let free: Vec<usize> = (0..classes.len()).filter(|&i| classes[i].progression().is_some()).collect();
    let rows = reduce_rows(system, classes, &free);
    relaxation_feasible_reduced(classes, &free, &rows, nu)
}

/// Fourier–Motzkin on the real relaxation of a profile: anchors at least their
/// smallest admissible value and consecutive classes of a base separated by
/// more than `nu` beyond the lower class's top offset.
fn relaxation_feasible_reduced(classes: &[ClassInfo], free: &[usize], rows: &[Reduced], nu: u64) -> bool {
    let n = free.len();
    let slot = |i: usize| free.iter().position(|&f| f == i);
    let unit = |j: usize, c: Rat| {
        let mut v = vec![Rat::zero(); n];
        v[j] = c;
        v
    };
    let mut cs: Vec<Constraint> = rows.iter().map(|r| Constraint::strict(r.coeffs.clone(), r.constant.clone())).collect();
    for (j, &i) in free.iter().enumerate() {
        let (o, _) = classes[i].progression().unwrap();
        cs.push(Constraint::non_strict(unit(j, Rat::one()), -Rat::from_integer(pow(classes[i].base(), o))));
    }
    for prev in classes {
        let Some(next) = classes.iter().find(|c| c.group == prev.group && c.rank == prev.rank + 1) else {
            continue;
        };
        let gap = prev.class.max_offset() + nu + 1;
        let m = Rat::from_integer(pow(prev.base(), gap));
        // V_next - m V_prev >= 0
        let mut coeffs = vec![Rat::zero(); n];
        let mut constant = Rat::zero();
        match (slot(classes.iter().position(|c| std::ptr::eq(c, next)).unwrap()), next.fixed()) {
            (Some(j), _) => coeffs[j] += Rat::one(),
            (None, Some(s)) => constant += Rat::from_integer(pow(next.base(), s)),
            _ => unreachable!(),
        }
        match (slot(classes.iter().position(|c| std::ptr::eq(c, prev)).unwrap()), prev.fixed()) {
            (Some(j), _) => coeffs[j] -= &m,
            (None, Some(s)) => constant -= &m * Rat::from_integer(pow(prev.base(), s)),
            _ => unreachable!(),
        }
        cs.push(Constraint::non_strict(coeffs, constant));
    }
    fm::feasible(&cs)
}

#[derive(Debug, Clone, Copy)]
enum Tier {
    One(usize),
    Pair(usize, usize),
}

impl Tier {
    fn members(&self) -> Vec<usize> {
        match *self {
            Tier::One(a) => vec![a],
            Tier::Pair(a, b) => vec![a, b],
        }
    }
}

/// Orderings of the free classes from the top down, merging the two bases'
/// descending lists; a pair tier holds one class of each base at comparable size.
fn tierings(a: &[usize], b: &[usize], out: &mut Vec<Vec<Tier>>, prefix: &mut Vec<Tier>) {
    if out.len() >= MAX_TIERINGS {
        return;
    }
    match (a.split_first(), b.split_first()) {
        (None, None) => out.push(prefix.clone()),
        (Some((&x, ra)), None) => {
            prefix.push(Tier::One(x));
            tierings(ra, b, out, prefix);
            prefix.pop();
        }
        (None, Some((&y, rb))) => {
            prefix.push(Tier::One(y));
            tierings(a, rb, out, prefix);
            prefix.pop();
        }
        (Some((&x, ra)), Some((&y, rb))) => {
            prefix.push(Tier::Pair(x, y));
            tierings(ra, rb, out, prefix);
            prefix.pop();
            prefix.push(Tier::One(x));
            tierings(ra, b, out, prefix);
            prefix.pop();
            prefix.push(Tier::One(y));
            tierings(a, rb, out, prefix);
            prefix.pop();
        }
    }
}

/// Open subinterval well inside `i`, bounded on both sides.
fn central(i: &OpenInterval) -> OpenInterval {
    let lo = i.lo.clone().unwrap_or_else(Rat::zero);
    match &i.hi {
        Some(hi) => {
            let w = (hi - &lo) / Rat::from_integer(4.into());
            OpenInterval { lo: Some(&lo + &w), hi: Some(hi - &w) }
        }
        None if lo.is_positive() => {
            OpenInterval { lo: Some(&lo * Rat::from_integer(2.into())), hi: Some(&lo * Rat::from_integer(4.into())) }
        }
        None => OpenInterval { lo: Some(Rat::new(1.into(), 2.into())), hi: Some(Rat::from_integer(2.into())) },
    }
}

/// Builds a solution in which each tier dominates everything below it, checking
/// the result exactly.
fn dominance_witness(
    system: &LinearIneqSystem,
    classes: &[ClassInfo],
    free: &[usize],
    rows: &[Reduced],
    budget: &Budget,
) -> Option<Vec<u64>> {
    // free-slot indices per group, largest class first
    let mut per_group: Vec<Vec<usize>> = Vec::new();
    for (j, &i) in free.iter().enumerate() {
        let g = classes[i].group;
        if per_group.len() <= g {
            per_group.resize(g + 1, Vec::new());
        }
        per_group[g].push(j);
    }
    per_group.retain(|v| !v.is_empty());
    for g in &mut per_group {
        g.sort_by_key(|&j| std::cmp::Reverse(classes[free[j]].rank));
    }
    let mut all = Vec::new();
    let empty = Vec::new();
    tierings(
        per_group.first().unwrap_or(&empty),
        per_group.get(1).unwrap_or(&empty),
        &mut all,
        &mut Vec::new(),
    );

    let floor: Int = classes
        .iter()
        .filter_map(|c| c.fixed().map(|s| pow(c.base(), s + c.class.max_offset())))
        .max()
        .unwrap_or_else(Int::one);
    let size: Rat = rows
        .iter()
        .map(|r| r.coeffs.iter().map(Rat::abs).sum::<Rat>() + r.constant.abs())
        .max()
        .unwrap_or_else(Rat::one);
    let smallest: Rat = rows
        .iter()
        .flat_map(|r| r.coeffs.iter())
        .filter(|c| !c.is_zero())
        .map(Rat::abs)
        .min()
        .unwrap_or_else(Rat::one);
    let base_margin = (Rat::from_integer(2.into()) * size / smallest).ceil().to_integer().max(Int::from(2));

    for tiers in &all {
        if let Some(e) = build_tiered(system, classes, free, rows, tiers, &floor, &base_margin, budget) {
            return Some(e);
        }
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn build_tiered(
    system: &LinearIneqSystem,
    classes: &[ClassInfo],
    free: &[usize],
    rows: &[Reduced],
    tiers: &[Tier],
    floor: &Int,
    base_margin: &Int,
    budget: &Budget,
) -> Option<Vec<u64>> {
    let mut pair_rows: Vec<Vec<(Rat, Rat)>> = vec![Vec::new(); tiers.len()];
    for r in rows {
        let owner = tiers.iter().position(|t| t.members().iter().any(|&j| !r.coeffs[j].is_zero()));
        match owner {
            None if !r.constant.is_positive() => return None,
            None => {}
            Some(t) => match tiers[t] {
                Tier::One(_) => {}
                Tier::Pair(a, b) => pair_rows[t].push((r.coeffs[a].clone(), r.coeffs[b].clone())),
            },
        }
    }
    // single tiers: every row owned by the tier must grow with it
    for (t, tier) in tiers.iter().enumerate() {
        if let Tier::One(j) = *tier {
            let owned: Vec<Vec<Rat>> = rows
                .iter()
                .filter(|r| tiers[..t].iter().all(|u| u.members().iter().all(|&m| r.coeffs[m].is_zero())))
                .map(|r| r.coeffs.clone())
                .collect();
            if !EliminationStep::split(&owned, j).dominant() {
                return None;
            }
        }
    }
    let mut targets: Vec<Option<OpenInterval>> = vec![None; tiers.len()];
    for (t, tier) in tiers.iter().enumerate() {
        if let Tier::Pair(a, b) = *tier {
            let ratio = central(&feasible_ratio(&pair_rows[t])?);
            let (_, fa, _) = rescaled_base(&classes[free[a]])?;
            let (_, fb, _) = rescaled_base(&classes[free[b]])?;
            let scale = Rat::new(fb, fa);
            targets[t] = Some(OpenInterval {
                lo: ratio.lo.map(|v| v * &scale),
                hi: ratio.hi.map(|v| v * &scale),
            });
        }
    }
    let mut margin = base_margin.clone();
    for _ in 0..MARGIN_ROUNDS {
        let mut lower = floor.clone();
        let mut anchors: Vec<u64> = classes.iter().map(|c| c.fixed().unwrap_or(0)).collect();
        for (t, tier) in tiers.iter().enumerate().rev() {
            let threshold = &lower * &margin;
            match *tier {
                Tier::One(j) => {
                    let c = &classes[free[j]];
                    let (o, p) = c.progression()?;
                    let step = pow(c.base(), p);
                    let mut v = pow(c.base(), o);
                    let mut u = 0;
                    while v < threshold {
                        v *= &step;
                        u += 1;
                    }
                    anchors[free[j]] = o + p * u;
                    lower = v * pow(c.base(), c.class.max_offset());
                }
                Tier::Pair(a, b) => {
                    let (ca, cb) = (&classes[free[a]], &classes[free[b]]);
                    let (ba, fa, _) = rescaled_base(ca)?;
                    let (bb, fb, _) = rescaled_base(cb)?;
                    let target = targets[t].as_ref()?;
                    let iter = RatioWitnesses::new(ba, bb, target, budget.precision_cap, budget.scan_limit).ok()?;
                    let mut found = None;
                    for w in iter.take(PAIR_CANDIDATES) {
                        let w = w.ok()?;
                        let va = &fa * pow_int(&Int::from(ba), w.s);
                        let vb = &fb * pow_int(&Int::from(bb), w.t);
                        if va >= threshold && vb >= threshold {
                            found = Some((w, va, vb));
                            break;
                        }
                    }
                    let (w, va, vb) = found?;
                    let (oa, pa) = ca.progression()?;
                    let (ob, pb) = cb.progression()?;
                    anchors[free[a]] = oa + pa * w.s;
                    anchors[free[b]] = ob + pb * w.t;
                    lower = (va * pow(ca.base(), ca.class.max_offset())).max(vb * pow(cb.base(), cb.class.max_offset()));
                }
            }
        }
        let exps = assemble(system, classes, &anchors);
        if system.holds(&exps) {
            return Some(exps);
        }
        margin <<= 12;
    }
    None
}
