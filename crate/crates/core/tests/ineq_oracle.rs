use powerarith::ineq::{solve_homogeneous, Budget, IneqOutcome, LinearIneqSystem, PowerVar};
use powerarith::numerics::Rat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_system(rng: &mut ChaCha8Rng) -> LinearIneqSystem {
    let nvars = rng.gen_range(2..=3);
    let vars = (0..nvars).map(|i| PowerVar::new(format!("v{i}"), [2, 3][rng.gen_range(0..2)])).collect();
    let nrows = rng.gen_range(1..=3);
    let rows = (0..nrows)
        .map(|_| (0..nvars).map(|_| Rat::from_integer(rng.gen_range(-4i64..=4).into())).collect())
        .collect();
    LinearIneqSystem::new(vars, rows).unwrap()
}

fn brute_force(s: &LinearIneqSystem, max: u64) -> Option<Vec<u64>> {
    let n = s.vars.len();
    let mut e = vec![0u64; n];
    loop {
        if s.holds(&e) {
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
fn solver_agrees_with_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let budget = Budget::default();
    let (mut sat, mut unsat, mut unknown) = (0, 0, 0);
    for _ in 0..200 {
        let s = random_system(&mut rng);
        let bf = brute_force(&s, 30);
        match solve_homogeneous(&s, &budget).unwrap() {
            IneqOutcome::Sat(w) => {
                assert!(s.holds(&w.exponents));
                sat += 1;
            }
            IneqOutcome::Unsat => {
                assert!(bf.is_none(), "solver Unsat but brute force found {bf:?} for {s:?}");
                unsat += 1;
            }
            IneqOutcome::Unknown(r) => {
                assert!(s.vars.len() > 2, "two-variable system returned Unknown: {r}");
                unknown += 1;
            }
        }
    }
    println!("sat {sat} unsat {unsat} unknown {unknown}");
}
