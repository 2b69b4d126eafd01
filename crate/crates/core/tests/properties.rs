use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

use powerarith::congruence::{power_residues, ExponentSet};
use powerarith::formula::{parse, Formula, Term};
use powerarith::kronecker::feasible_ratio;
use powerarith::numerics::{compare_powers, log_enclosure, Rat};

fn term() -> impl Strategy<Value = Term> {
    (prop::collection::vec((-3i64..=3, prop::sample::select(vec!["x", "y", "z"])), 0..3), -5i64..=5).prop_map(
        |(parts, c)| parts.into_iter().fold(Term::constant(c), |acc, (k, v)| acc.add(&Term::scaled_var(k, v))),
    )
}

fn formula() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        (term(), term()).prop_map(|(a, b)| Formula::eq(a, b)),
        (term(), term()).prop_map(|(a, b)| Formula::lt(a, b)),
        (2u64..=6, term()).prop_map(|(l, t)| Formula::U(l, t)),
        (2u64..=9, term()).prop_map(|(n, t)| Formula::D(n, t)),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        let var = prop::sample::select(vec!["x", "y", "z"]);
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            prop::collection::vec(inner.clone(), 0..3).prop_map(Formula::And),
            prop::collection::vec(inner.clone(), 0..3).prop_map(Formula::Or),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            (var.clone(), inner.clone()).prop_map(|(v, f)| Formula::forall(v, f)),
            (var, inner).prop_map(|(v, f)| Formula::exists(v, f)),
        ]
    })
}

fn exponent_set() -> impl Strategy<Value = ExponentSet> {
    prop_oneof![
        Just(ExponentSet::Empty),
        (0u64..40).prop_map(ExponentSet::Single),
        (0u64..40, 1u64..12).prop_map(|(offset, period)| ExponentSet::Progression { offset, period }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn render_parse_round_trip(f in formula()) {
        let text = f.render();
        match f.validate() {
            Ok(()) => {
                let back = parse(&text).unwrap();
                prop_assert_eq!(&back, &f, "{}", text);
                prop_assert_eq!(back.render(), text);
            }
            // a formula rejected by the sort rules never parses either
            Err(_) => prop_assert!(parse(&text).is_err(), "{}", text),
        }
    }

    #[test]
    fn intersection_is_pointwise(a in exponent_set(), b in exponent_set()) {
        let c = a.intersect(&b);
        for e in 0..400 {
            prop_assert_eq!(c.contains(e), a.contains(e) && b.contains(e), "e = {} in {:?} & {:?} = {:?}", e, a, b, c);
        }
        prop_assert_eq!(c.is_empty(), (0..400).all(|e| !c.contains(e)));
    }

    #[test]
    fn shift_down_translates(a in exponent_set(), by in 0u64..50) {
        let s = a.shift_down(by);
        for e in 0..300 {
            prop_assert_eq!(s.contains(e), a.contains(e + by));
        }
        prop_assert_eq!(s.minimum(), (0..300).find(|&e| s.contains(e)));
    }

    #[test]
    fn residue_cycle_matches_direct_powers(base in 2u64..=30, modulus in 1u64..=400) {
        let cycle = power_residues(base, modulus).unwrap();
        let m = BigInt::from(modulus);
        for e in 0..(3 * (cycle.preperiod + cycle.period) + 5) {
            let direct = BigInt::from(base).modpow(&BigInt::from(e), &m);
            prop_assert_eq!(BigInt::from(cycle.residue(e)), direct, "e = {}", e);
        }
    }

    #[test]
    fn log_enclosure_brackets_the_logarithm(k in 2u64..=12, l in 2u64..=12, bits in 1u32..=10) {
        let enc = log_enclosure(k, l, bits).unwrap();
        let exact_pow = |r: &Rat| {
            let (p, q) = (r.numer().clone(), r.denom().clone());
            let p: u32 = p.try_into().unwrap();
            let q: u32 = q.try_into().unwrap();
            BigInt::from(k).pow(p).cmp(&BigInt::from(l).pow(q))
        };
        if enc.is_exact() {
            prop_assert_eq!(exact_pow(&enc.lo), std::cmp::Ordering::Equal);
        } else {
            prop_assert!(enc.width() <= Rat::new(1.into(), BigInt::from(1u64) << bits));
            prop_assert_eq!(exact_pow(&enc.lo), std::cmp::Ordering::Less);
            prop_assert_eq!(exact_pow(&enc.hi), std::cmp::Ordering::Greater);
        }
    }

    #[test]
    fn compare_powers_is_exact(k in 2u64..=20, p in 0u64..60, l in 2u64..=20, q in 0u64..60) {
        let want = BigInt::from(k).pow(p as u32).cmp(&BigInt::from(l).pow(q as u32));
        prop_assert_eq!(compare_powers(k, p, l, q), want);
    }

    #[test]
    fn feasible_ratio_is_the_solution_set(
        rows in prop::collection::vec((-6i64..=6, -6i64..=6), 1..4),
        probes in prop::collection::vec((1i64..200, 1i64..50), 40),
    ) {
        let rows: Vec<(Rat, Rat)> = rows.into_iter().map(|(a, b)| (Rat::from_integer(a.into()), Rat::from_integer(b.into()))).collect();
        let region = feasible_ratio(&rows);
        for (num, den) in probes {
            let r = Rat::new(num.into(), den.into());
            let holds = rows.iter().all(|(a, b)| (a * &r + b).is_positive());
            let inside = region.as_ref().is_some_and(|i| i.contains(&r));
            prop_assert_eq!(inside, holds, "r = {}", r);
        }
        if let Some(i) = &region {
            // a nonempty region has a rational midpoint that satisfies every row
            let mid = match (&i.lo, &i.hi) {
                (Some(a), Some(b)) => (a + b) / Rat::from_integer(2.into()),
                (Some(a), None) => a + Rat::from_integer(1.into()),
                (None, Some(b)) => b / Rat::from_integer(2.into()),
                (None, None) => Rat::from_integer(1.into()),
            };
            prop_assert!(!mid.is_zero() && rows.iter().all(|(a, b)| (a * &mid + b).is_positive()));
        }
    }
}
