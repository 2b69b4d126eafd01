use std::collections::BTreeMap;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use powerarith::formula::{eval_with, parse, sat_conjunction, EvalWindow, SatBudget, SatOutcome};

const NAMES: [&str; 3] = ["x", "y", "z"];

fn linear(rng: &mut ChaCha8Rng, nvars: usize) -> String {
    let mut parts = Vec::new();
    for name in &NAMES[..nvars] {
        if rng.gen_bool(0.7) {
            parts.push(format!("(scale {} {name})", [-3, -2, -1, 1, 2, 3][rng.gen_range(0..6)]));
        }
    }
    if parts.is_empty() {
        parts.push(NAMES[0].to_string());
    }
    if rng.gen_bool(0.5) {
        parts.push(rng.gen_range(-9i64..=9).to_string());
    }
    format!("(+ {})", parts.join(" "))
}

fn random_conjunction(rng: &mut ChaCha8Rng) -> (String, Vec<u64>) {
    let nvars = rng.gen_range(1..=3);
    let bases: Vec<u64> = (0..nvars).map(|_| [2u64, 3][rng.gen_range(0..2)]).collect();
    let mut lits: Vec<String> = (0..nvars).map(|i| format!("(U {} {})", bases[i], NAMES[i])).collect();
    for _ in 0..rng.gen_range(1..=3) {
        let t = linear(rng, nvars);
        lits.push(match rng.gen_range(0..6) {
            0 => format!("(= {t} 0)"),
            1 | 2 => format!("(< 0 {t})"),
            3 => format!("(not (= {t} 0))"),
            4 => format!("(not (< {t} 0))"),
            _ => {
                let v = NAMES[rng.gen_range(0..nvars)];
                let n = rng.gen_range(2..=7);
                let c = rng.gen_range(0..n);
                if rng.gen_bool(0.7) {
                    format!("(D {n} (- {v} {c}))")
                } else {
                    format!("(not (D {n} (- {v} {c})))")
                }
            }
        });
    }
    (format!("(and {})", lits.join(" ")), bases)
}

fn brute_force(text: &str, bases: &[u64], max: u32) -> Option<Vec<u32>> {
    let f = parse(text).unwrap();
    let window = EvalWindow::default();
    let n = bases.len();
    let mut e = vec![0u32; n];
    loop {
        let env: BTreeMap<String, BigInt> =
            (0..n).map(|i| (NAMES[i].to_string(), BigInt::from(bases[i]).pow(e[i]))).collect();
        if eval_with(&f, &env, &window).unwrap() {
            return Some(e);
        }
        let mut i = n;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            if e[i] < max {
                e[i] += 1;
                e[i + 1..].iter_mut().for_each(|x| *x = 0);
                break;
            }
        }
    }
}

#[test]
fn conjunctions_agree_with_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let budget = SatBudget::default();
    let (mut sat, mut unsat, mut unknown) = (0, 0, 0);
    for _ in 0..300 {
        let (text, bases) = random_conjunction(&mut rng);
        let f = parse(&text).unwrap();
        // solver Sat answers are verified inside sat_conjunction
        match sat_conjunction(&f, &budget).unwrap() {
            SatOutcome::Sat(_) => sat += 1,
            SatOutcome::Unsat => {
                let bf = brute_force(&text, &bases, 20);
                assert!(bf.is_none(), "Unsat but {bf:?} satisfies {text}");
                unsat += 1;
            }
            SatOutcome::Unknown(_) => unknown += 1,
        }
    }
    assert!(sat > 50 && unsat > 20, "sat {sat}, unsat {unsat}, unknown {unknown}");
    assert!(unknown * 10 < sat + unsat, "too many unknowns: {unknown}");
}
