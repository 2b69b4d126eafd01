//! Axiom streams for the theory without order (`A1`–`A5`) and the universal
//! theory with order (`∀1`–`∀7`), and the rewrite defining the powers of a
//! dependent base.

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{AxiomInstance, Formula, Schema, Term};
use crate::congruence::{car1_axiom, car2_axiom};
use crate::error::{Error, Result};
use crate::ineq::binequ_axiom;
use crate::mann::{mann_axiom, PowerEquation, DEFAULT_MANN_BOUND};
use crate::numerics::{dependence, gcd_u64, pow, Dependence};

/// Bounds on the parameter grid of the infinite schemata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmitParams {
    /// Congruence and torsion axioms for `2 <= n <= cong_max`.
    pub cong_max: u64,
    /// Mann coefficients and right-hand sides range over `[-c, c] \ {0}`.
    pub mann_coeff_max: i64,
    /// Largest number of left-hand terms in a Mann instance.
    pub mann_arity_max: usize,
    /// Exponent bound for the Mann solution search.
    pub mann_bound: u64,
    /// `car1` for `1 <= m <= car_m_max`.
    pub car_m_max: u64,
    /// `car2` for moduli `2 <= n <= e_max` coprime to the base.
    pub e_max: u64,
}

impl Default for EmitParams {
    fn default() -> Self {
        EmitParams { cong_max: 6, mann_coeff_max: 1, mann_arity_max: 2, mann_bound: DEFAULT_MANN_BOUND, car_m_max: 3, e_max: 12 }
    }
}

pub type AxiomStream = Box<dyn Iterator<Item = Result<AxiomInstance>>>;

fn check_bases(bases: &[u64]) -> Result<Vec<u64>> {
    if bases.is_empty() {
        return Err(Error::InvalidInput("at least one base is required".into()));
    }
    if let Some(b) = bases.iter().find(|&&b| b < 2) {
        return Err(Error::InvalidInput(format!("base {b} is below 2")));
    }
    for (i, &k) in bases.iter().enumerate() {
        for &l in &bases[i + 1..] {
            if let Dependence::Dependent { m, n, .. } = dependence(k, l) {
                return Err(Error::DependentBases { k, l, m, n });
            }
        }
    }
    Ok(bases.to_vec())
}

fn x() -> Term {
    Term::var("x")
}

fn group_axioms(schema: Schema) -> Vec<AxiomInstance> {
    let (x, y, z) = (Term::var("x"), Term::var("y"), Term::var("z"));
    let mk = |name: &str, f: Formula| AxiomInstance::new(schema, json!({"axiom": name}), f, "group");
    vec![
        mk(
            "associativity",
            Formula::forall_many(["x", "y", "z"], Formula::eq(x.add(&y).add(&z), x.add(&y.add(&z)))),
        ),
        mk("commutativity", Formula::forall_many(["x", "y"], Formula::eq(x.add(&y), y.add(&x)))),
        mk("identity", Formula::forall("x", Formula::eq(x.add(&Term::zero()), x.clone()))),
        mk("inverse", Formula::forall("x", Formula::eq(x.add(&x.neg()), Term::zero()))),
        mk("zero_ne_one", Formula::not(Formula::eq(Term::zero(), Term::constant(1)))),
    ]
}

fn torsion_free(n: u64) -> AxiomInstance {
    let f = Formula::forall(
        "x",
        Formula::implies(Formula::eq(Term::scaled_var(n, "x"), Term::zero()), Formula::eq(x(), Term::zero())),
    );
    AxiomInstance::new(Schema::A1, json!({"axiom": "torsion_free", "n": n}), f, "torsion-free")
}

fn order_axioms() -> Vec<AxiomInstance> {
    let (x, y, z) = (Term::var("x"), Term::var("y"), Term::var("z"));
    let mk = |name: &str, f: Formula| AxiomInstance::new(Schema::U1, json!({"axiom": name}), f, "ordered group");
    vec![
        mk("irreflexive", Formula::forall("x", Formula::not(Formula::lt(x.clone(), x.clone())))),
        mk(
            "transitive",
            Formula::forall_many(
                ["x", "y", "z"],
                Formula::implies(
                    Formula::And(vec![Formula::lt(x.clone(), y.clone()), Formula::lt(y.clone(), z.clone())]),
                    Formula::lt(x.clone(), z.clone()),
                ),
            ),
        ),
        mk(
            "total",
            Formula::forall_many(
                ["x", "y"],
                Formula::Or(vec![
                    Formula::lt(x.clone(), y.clone()),
                    Formula::eq(x.clone(), y.clone()),
                    Formula::lt(y.clone(), x.clone()),
                ]),
            ),
        ),
        mk(
            "translation",
            Formula::forall_many(
                ["x", "y", "z"],
                Formula::implies(Formula::lt(x.clone(), y.clone()), Formula::lt(x.add(&z), y.add(&z))),
            ),
        ),
    ]
}

/// `∀x ∨_{j=1}^n (D_n(x+j) ∧ ∧_{k≠j} ¬D_n(x+k))`.
pub fn congruence_axiom(n: u64) -> Result<AxiomInstance> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("congruence axioms need n >= 2, got {n}")));
    }
    let shifted = |k: u64| Formula::D(n, x().add(&Term::constant(k)));
    let disjuncts = (1..=n)
        .map(|j| {
            let mut parts = vec![shifted(j)];
            parts.extend((1..=n).filter(|&k| k != j).map(|k| Formula::not(shifted(k))));
            Formula::And(parts)
        })
        .collect();
    Ok(AxiomInstance::new(Schema::A2, json!({"n": n}), Formula::forall("x", Formula::Or(disjuncts)), "congruence"))
}

/// `∀x ∨_{j=1}^n ∧_{k≠j} ¬D_n(x+k)`.
pub fn universal_congruence_axiom(n: u64) -> Result<AxiomInstance> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("congruence axioms need n >= 2, got {n}")));
    }
    let disjuncts = (1..=n)
        .map(|j| {
            Formula::And(
                (1..=n)
                    .filter(|&k| k != j)
                    .map(|k| Formula::not(Formula::D(n, x().add(&Term::constant(k)))))
                    .collect(),
            )
        })
        .collect();
    Ok(AxiomInstance::new(
        Schema::U2,
        json!({"n": n}),
        Formula::forall("x", Formula::Or(disjuncts)),
        "universal congruence",
    ))
}

/// `U_l(1) ∧ ∀x (U_l(x) ↔ U_l(l·x))`.
pub fn multiplication_axiom(base: u64, schema: Schema) -> AxiomInstance {
    let f = Formula::And(vec![
        Formula::U(base, Term::constant(1)),
        Formula::forall("x", Formula::iff(Formula::U(base, x()), Formula::U(base, Term::scaled_var(base, "x")))),
    ]);
    AxiomInstance::new(schema, json!({"l": base}), f, "multiplication")
}

/// `0 < 1 ∧ ∀x (x ≤ 0 ∨ x ≥ 1)`.
pub fn discreteness_axiom() -> AxiomInstance {
    let f = Formula::And(vec![
        Formula::lt(Term::zero(), Term::constant(1)),
        Formula::forall(
            "x",
            Formula::Or(vec![
                Formula::not(Formula::lt(Term::zero(), x())),
                Formula::not(Formula::lt(x(), Term::constant(1))),
            ]),
        ),
    ]);
    AxiomInstance::new(Schema::U4, json!({}), f, "discreteness")
}

/// Equations of the Mann grid: coefficient vectors and positive right-hand
/// sides within the bound, all base assignments, arities `1..=arity_max`.
pub fn mann_grid(bases: &[u64], params: &EmitParams) -> Vec<PowerEquation> {
    let c = params.mann_coeff_max.max(1);
    let values: Vec<i64> = (-c..=c).filter(|&v| v != 0).collect();
    let mut out = Vec::new();
    for n in 1..=params.mann_arity_max {
        let mut coeff_idx = vec![0usize; n];
        loop {
            let coeffs: Vec<i64> = coeff_idx.iter().map(|&i| values[i]).collect();
            for b in 1..=c {
                let mut base_idx = vec![0usize; n + 1];
                loop {
                    let bs: Vec<u64> = base_idx.iter().map(|&i| bases[i]).collect();
                    if let Ok(eq) = PowerEquation::from_i64(&coeffs, b, &bs) {
                        out.push(eq);
                    }
                    if !odometer(&mut base_idx, bases.len()) {
                        break;
                    }
                }
            }
            if !odometer(&mut coeff_idx, values.len()) {
                break;
            }
        }
    }
    out
}

fn odometer(idx: &mut [usize], radix: usize) -> bool {
    for pos in (0..idx.len()).rev() {
        if idx[pos] + 1 < radix {
            idx[pos] += 1;
            idx[pos + 1..].iter_mut().for_each(|i| *i = 0);
            return true;
        }
    }
    false
}

fn carmichael_stream(bases: Vec<u64>, params: &EmitParams, schema: Schema) -> AxiomStream {
    let (m_max, e_max) = (params.car_m_max, params.e_max);
    Box::new(bases.into_iter().flat_map(move |l| {
        let car1 = (1..=m_max).map(move |m| car1_axiom(l, m).map(|a| a.retag(schema)));
        let car2 = (2..=e_max)
            .filter(move |&n| gcd_u64(l, n) == 1)
            .map(move |n| car2_axiom(l, n).map(|a| a.retag(schema)));
        car1.chain(car2)
    }))
}

fn mann_stream(bases: &[u64], params: &EmitParams, schema: Schema) -> AxiomStream {
    let bound = params.mann_bound;
    Box::new(mann_grid(bases, params).into_iter().map(move |eq| mann_axiom(&eq, bound).map(|a| a.retag(schema))))
}

fn ok_all(v: Vec<AxiomInstance>) -> AxiomStream {
    Box::new(v.into_iter().map(Ok))
}

/// Instances of `A1`–`A5` for the given bases, in schema order.
pub fn emit_t(bases: &[u64], params: &EmitParams) -> Result<AxiomStream> {
    let bases = check_bases(bases)?;
    let mut a1 = group_axioms(Schema::A1);
    a1.extend((2..=params.cong_max).map(torsion_free));
    let a2: Vec<AxiomInstance> = (2..=params.cong_max).map(congruence_axiom).collect::<Result<_>>()?;
    let a3: Vec<AxiomInstance> = bases.iter().map(|&l| multiplication_axiom(l, Schema::A3)).collect();
    Ok(Box::new(
        ok_all(a1)
            .chain(ok_all(a2))
            .chain(ok_all(a3))
            .chain(mann_stream(&bases, params, Schema::A4))
            .chain(carmichael_stream(bases, params, Schema::A5)),
    ))
}

/// Instances of `∀1`–`∀7`. The inequality schema is only available through
/// the basic inequality axioms, so at most two bases are accepted.
pub fn emit_tforall(bases: &[u64], params: &EmitParams) -> Result<AxiomStream> {
    let bases = check_bases(bases)?;
    if bases.len() > 2 {
        return Err(Error::OutOfScope(format!(
            "the inequality axioms for {} bases are not generated; at most two bases are supported",
            bases.len()
        )));
    }
    let mut u1 = group_axioms(Schema::U1);
    u1.extend(order_axioms());
    let u2: Vec<AxiomInstance> = (2..=params.cong_max).map(universal_congruence_axiom).collect::<Result<_>>()?;
    let u3: Vec<AxiomInstance> = bases.iter().map(|&l| multiplication_axiom(l, Schema::U3)).collect();
    let u6: Vec<AxiomInstance> = bases.iter().map(|&l| binequ_axiom(l)).collect::<Result<_>>()?;
    Ok(Box::new(
        ok_all(u1)
            .chain(ok_all(u2))
            .chain(ok_all(u3))
            .chain(ok_all(vec![discreteness_axiom()]))
            .chain(mann_stream(&bases, params, Schema::U5))
            .chain(ok_all(u6))
            .chain(carmichael_stream(bases, params, Schema::U7)),
    ))
}

/// Formula in the free variable `x` defining `l^ℕ` over `(ℤ, +, k^ℕ)` for
/// dependent `k, l` with `k^m = l^n`.
pub fn definability_rewrite(k: u64, l: u64) -> Result<Formula> {
    if k < 2 || l < 2 {
        return Err(Error::InvalidInput(format!("bases must be at least 2, got {k} and {l}")));
    }
    let Dependence::Dependent { m, n, .. } = dependence(k, l) else {
        return Err(Error::InvalidInput(format!("{k} and {l} are multiplicatively independent")));
    };
    // (k^m)^ℕ is U_k(v) ∧ D_{k^m - 1}(v - 1)
    let power_of_km = |v: Term| -> Result<Formula> {
        let km = pow(k, m);
        let modulus = u64::try_from(km - 1u32).map_err(|_| Error::Overflow(format!("{k}^{m} - 1")))?;
        let mut parts = vec![Formula::U(k, v.clone())];
        if modulus >= 2 {
            parts.push(Formula::D(modulus, v.sub(&Term::constant(1))));
        }
        Ok(Formula::and_all(parts))
    };
    if n == 1 {
        return power_of_km(x());
    }
    let y = Term::var("y");
    let options = (0..n).map(|t| Formula::eq(Term::scaled_var(pow(l, t), "x"), y.clone())).collect();
    Ok(Formula::exists("y", Formula::and_all(vec![power_of_km(y.clone())?, Formula::or_any(options)])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{eval_window, eval_with, EvalWindow};
    use crate::numerics::Int;
    use std::collections::BTreeMap;

    #[test]
    fn stream_prefix_and_members() {
        let params = EmitParams { cong_max: 3, ..EmitParams::default() };
        let all: Vec<AxiomInstance> = emit_t(&[2, 3], &params).unwrap().collect::<Result<_>>().unwrap();
        assert_eq!(all[0].schema, Schema::A1);
        let first_a2 = all.iter().find(|a| a.schema == Schema::A2).unwrap();
        assert_eq!(first_a2.params["n"], 2);
        assert!(all.iter().any(|a| a.schema == Schema::A4
            && a.params["a"] == json!(["1", "-1"])
            && a.params["b"] == "1"
            && a.params["bases"] == json!([3, 2, 2])));
        assert!(all.iter().any(|a| a.schema == Schema::A5 && a.note == "car1" && a.params["l"] == 2 && a.params["m"] == 3));
    }

    #[test]
    fn tforall_rules() {
        let params = EmitParams { cong_max: 3, ..EmitParams::default() };
        let all: Vec<AxiomInstance> = emit_tforall(&[2, 3], &params).unwrap().collect::<Result<_>>().unwrap();
        assert!(all.iter().any(|a| a.schema == Schema::U6 && a.formula == binequ_axiom(2).unwrap().formula));
        let u4 = all.iter().find(|a| a.schema == Schema::U4).unwrap();
        assert_eq!(u4.formula.render(), "(and (< 0 1) (forall x (or (not (< 0 x)) (not (< x 1)))))");
        assert!(matches!(emit_tforall(&[2, 3, 5], &params), Err(Error::OutOfScope(_))));
        assert!(matches!(emit_t(&[2, 4], &params), Err(Error::DependentBases { .. })));
    }

    #[test]
    fn congruence_axioms_hold() {
        let w = EvalWindow::default();
        for n in 2..=5 {
            assert!(eval_window(&congruence_axiom(n).unwrap().formula, &w).unwrap().is_pass());
            assert!(eval_window(&universal_congruence_axiom(n).unwrap().formula, &w).unwrap().is_pass());
        }
    }

    #[test]
    fn rewrite_shapes() {
        assert_eq!(definability_rewrite(2, 8).unwrap().render(), "(and (U 2 x) (D 7 (- x 1)))");
        assert_eq!(definability_rewrite(2, 4).unwrap().render(), "(and (U 2 x) (D 3 (- x 1)))");
        assert_eq!(
            definability_rewrite(4, 8).unwrap().render(),
            "(exists y (and (U 4 y) (D 63 (- y 1)) (or (= x y) (= (scale 8 x) y))))"
        );
        assert!(definability_rewrite(2, 3).is_err());
        let f = definability_rewrite(4, 8).unwrap();
        let w = EvalWindow::default();
        for (v, expect) in [(1u64, true), (8, true), (64, true), (4, false), (16, false), (512, true), (7, false)] {
            let env = BTreeMap::from([("x".to_string(), Int::from(v))]);
            assert_eq!(eval_with(&f, &env, &w).unwrap(), expect, "{v}");
        }
    }
}
