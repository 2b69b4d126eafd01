use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use powerarith::congruence::{carmichael_lambda, excluded_residues, power_residues};
use powerarith::formula::emit::{emit_t, emit_tforall, EmitParams};
use powerarith::formula::{
    eval_window, parse, sat_conjunction, AxiomInstance, EvalOutcome, EvalWindow, Formula, SatBudget, SatOutcome,
    DEFAULT_COST_CAP,
};
use powerarith::ineq::{solve_with_congruences, witness_map, Budget, IneqOutcome, LinearIneqSystem};
use powerarith::kronecker::{find_frac_hit_with, find_ratio_in_with, OpenInterval, DEFAULT_SCAN_LIMIT};
use powerarith::mann::{enumerate_solutions, family_structure, mann_axiom, tuple_values, PowerEquation, DEFAULT_MANN_BOUND};
use powerarith::numerics::{parse_rat, Int, DEFAULT_PRECISION_CAP};
use powerarith::Error;

const EXIT_OK: u8 = 0;
const EXIT_NEGATIVE: u8 = 1;
const EXIT_UNKNOWN: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "powerarith", version, about = "Exact arithmetic over powers of fixed integers")]
struct Cli {
    /// Emit line-delimited JSON records instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Carmichael function λ(N).
    Lambda { n: u64 },
    /// Preperiod, period and residues of BASE^e mod MOD.
    Residues { base: u64, modulus: u64 },
    /// Residues in 1..=MOD never attained by BASE^m, m >= 1.
    Excluded { base: u64, modulus: u64 },
    /// Solutions of Σ a_i l_i^x_i = b l^y up to an exponent bound.
    MannSolve {
        #[command(flatten)]
        eq: EquationArgs,
        #[arg(long, default_value_t = DEFAULT_MANN_BOUND)]
        bound: u64,
        /// Report solution families instead of single tuples.
        #[arg(long)]
        families: bool,
    },
    /// The Mann axiom instance for an equation.
    MannAxiom {
        #[command(flatten)]
        eq: EquationArgs,
        #[arg(long, default_value_t = DEFAULT_MANN_BOUND)]
        bound: u64,
    },
    /// Smallest t with fr(t log_K L) in (LO, HI).
    FracHit { k: u64, l: u64, lo: String, hi: String },
    /// Some K^s / L^t in (LO, HI).
    RatioIn { k: u64, l: u64, lo: String, hi: String },
    /// Inequality systems over powers.
    Ineq {
        #[command(subcommand)]
        action: IneqAction,
    },
    /// Stream instances of an axiom theory as JSON lines.
    EmitAxioms {
        #[arg(long, value_enum)]
        theory: Theory,
        #[arg(long, value_delimiter = ',', required = true)]
        bases: Vec<u64>,
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Evaluate sentences (formula text or axiom JSON lines) on a finite window.
    Check {
        file: PathBuf,
        #[arg(long, default_value = "1000000")]
        window: String,
        #[arg(long, default_value = "1099511627776")]
        height: String,
        #[arg(long, default_value_t = DEFAULT_COST_CAP)]
        cost_cap: u128,
    },
    /// Decide a conjunction of literals over power variables.
    Sat {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MANN_BOUND)]
        bound: u64,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct EquationArgs {
    /// JSON file {coeffs, rhs, bases}.
    #[arg(long)]
    eq: Option<PathBuf>,
    /// Inline form such as "1*3^a - 1*2^b = 1*2^c".
    #[arg(long)]
    inline: Option<String>,
}

#[derive(Subcommand, Debug)]
enum IneqAction {
    /// Decide a homogeneous strict system, optionally with congruences.
    Solve {
        file: PathBuf,
        #[arg(long)]
        congruences: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Theory {
    #[value(name = "T")]
    T,
    #[value(name = "Tforall")]
    Tforall,
}

enum Failure {
    Usage(String),
    Engine(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Engine(e)
    }
}

type Outcome = Result<u8, Failure>;

struct Out {
    json: bool,
    sink: io::StdoutLock<'static>,
}

impl Out {
    fn record(&mut self, value: Value, human: impl FnOnce() -> String) {
        let line = if self.json { value.to_string() } else { human() };
        // a closed pipe is not an error worth reporting
        let _ = writeln!(self.sink, "{line}");
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    let mut out = Out { json: cli.json, sink: io::stdout().lock() };
    let code = match run(cli.command, &mut out) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Engine(e)) => {
            let code = match e {
                Error::BudgetExhausted(_) | Error::PrecisionExhausted { .. } | Error::WindowTooLarge { .. } | Error::Overflow(_) => {
                    EXIT_UNKNOWN
                }
                _ => EXIT_USAGE,
            };
            if code == EXIT_UNKNOWN {
                out.record(json!({"status": "unknown", "reason": e.to_string()}), || format!("unknown: {e}"));
            } else {
                eprintln!("error: {e}");
            }
            code
        }
    };
    ExitCode::from(code)
}

fn precision_cap() -> Result<u32, Failure> {
    match std::env::var("POWERARITH_PRECISION_CAP") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("POWERARITH_PRECISION_CAP must be a positive integer, got {v:?}"))),
        Err(_) => Ok(DEFAULT_PRECISION_CAP),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn equation(args: &EquationArgs) -> Result<PowerEquation, Failure> {
    match (&args.eq, &args.inline) {
        (Some(path), _) => {
            let spec = serde_json::from_value(read_json(path)?)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            Ok(PowerEquation::from_spec(&spec)?)
        }
        (None, Some(text)) => Ok(PowerEquation::parse_inline(text)?),
        (None, None) => Err(Failure::Usage("one of --eq or --inline is required".into())),
    }
}

fn interval(lo: &str, hi: &str) -> Result<OpenInterval, Failure> {
    Ok(OpenInterval::new(parse_rat(lo)?, parse_rat(hi)?)?)
}

fn big(text: &str, flag: &str) -> Result<Int, Failure> {
    text.parse().map_err(|_| Failure::Usage(format!("--{flag} expects an integer, got {text:?}")))
}

fn values_json<'a>(values: impl IntoIterator<Item = (&'a String, &'a Int)>) -> Value {
    Value::Object(values.into_iter().map(|(k, v)| (k.clone(), json!(v.to_string()))).collect())
}

fn values_text<'a>(values: impl IntoIterator<Item = (&'a String, &'a Int)>) -> String {
    values.into_iter().map(|(k, v)| format!("{k} = {v}")).collect::<Vec<_>>().join(", ")
}

fn run(command: Command, out: &mut Out) -> Outcome {
    match command {
        Command::Lambda { n } => {
            if n == 0 {
                return Err(Failure::Usage("lambda needs N >= 1".into()));
            }
            let l = carmichael_lambda(n);
            out.record(json!({"n": n, "lambda": l}), || l.to_string());
            Ok(EXIT_OK)
        }
        Command::Residues { base, modulus } => {
            let c = power_residues(base, modulus)?;
            out.record(
                json!({"base": base, "modulus": modulus, "preperiod": c.preperiod, "period": c.period, "residues": c.residues}),
                || {
                    let rs: Vec<String> = c.residues.iter().map(u64::to_string).collect();
                    format!("preperiod {} period {}\n{}", c.preperiod, c.period, rs.join(" "))
                },
            );
            Ok(EXIT_OK)
        }
        Command::Excluded { base, modulus } => {
            let ex = excluded_residues(base, modulus)?;
            out.record(json!({"base": base, "modulus": modulus, "excluded": ex}), || {
                ex.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")
            });
            Ok(EXIT_OK)
        }
        Command::MannSolve { eq, bound, families } => {
            let eq = equation(&eq)?;
            if families {
                let set = family_structure(&eq, bound)?;
                let empty = set.is_empty();
                for rec in set.to_json_records() {
                    out.record(rec.clone(), || rec.to_string());
                }
                return Ok(if empty { EXIT_NEGATIVE } else { EXIT_OK });
            }
            let sols = enumerate_solutions(&eq, bound)?;
            for t in &sols {
                let values = tuple_values(&eq, t);
                out.record(
                    json!({
                        "tuple": t,
                        "values": values.values().map(|v| v.to_string()).collect::<Vec<_>>(),
                    }),
                    || format!("{t:?}"),
                );
            }
            if sols.is_empty() && !out.json {
                out.record(Value::Null, || format!("no solutions with exponents <= {bound}"));
            }
            Ok(if sols.is_empty() { EXIT_NEGATIVE } else { EXIT_OK })
        }
        Command::MannAxiom { eq, bound } => {
            let ax = mann_axiom(&equation(&eq)?, bound)?;
            out.record(ax.to_json(), || ax.formula.render());
            Ok(EXIT_OK)
        }
        Command::FracHit { k, l, lo, hi } => {
            let t = find_frac_hit_with(k, l, &interval(&lo, &hi)?, precision_cap()?, DEFAULT_SCAN_LIMIT)?;
            out.record(json!({"k": k, "l": l, "t": t}), || t.to_string());
            Ok(EXIT_OK)
        }
        Command::RatioIn { k, l, lo, hi } => {
            let w = find_ratio_in_with(k, l, &interval(&lo, &hi)?, precision_cap()?, DEFAULT_SCAN_LIMIT)?;
            out.record(json!({"k": k, "l": l, "s": w.s, "t": w.t}), || format!("{k}^{} / {l}^{}", w.s, w.t));
            Ok(EXIT_OK)
        }
        Command::Ineq { action: IneqAction::Solve { file, congruences } } => {
            let (system, mut cong) = LinearIneqSystem::from_json(&read_json(&file)?)?;
            if let Some(path) = congruences {
                let extra = powerarith::ineq::congruences_from_json(&system, &read_json(&path)?)?;
                cong.constraints.extend(extra.constraints);
            }
            let budget = Budget { precision_cap: precision_cap()?, ..Budget::default() };
            Ok(match solve_with_congruences(&system, &cong, &budget)? {
                IneqOutcome::Sat(w) => {
                    let values: Vec<String> = w.values(&system).iter().map(Int::to_string).collect();
                    out.record(json!({"status": "sat", "exponents": w.to_json(&system), "values": values}), || {
                        let m = witness_map(&system, &w);
                        let parts: Vec<String> = system
                            .vars
                            .iter()
                            .map(|v| format!("{} = {}^{}", v.id, v.base, m[&v.id]))
                            .collect();
                        format!("sat: {}", parts.join(", "))
                    });
                    EXIT_OK
                }
                IneqOutcome::Unsat => {
                    let reason = if cong.constraints.is_empty() {
                        "no powers satisfy the system"
                    } else {
                        "no powers satisfy the system under the congruences"
                    };
                    out.record(json!({"status": "unsat", "reason": reason}), || format!("unsat: {reason}"));
                    EXIT_NEGATIVE
                }
                IneqOutcome::Unknown(reason) => {
                    out.record(json!({"status": "unknown", "reason": reason}), || format!("unknown: {reason}"));
                    EXIT_UNKNOWN
                }
            })
        }
        Command::EmitAxioms { theory, bases, params } => {
            let params: EmitParams = match params {
                Some(p) => serde_json::from_value(read_json(&p)?)
                    .map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?,
                None => EmitParams::default(),
            };
            let stream = match theory {
                Theory::T => emit_t(&bases, &params)?,
                Theory::Tforall => emit_tforall(&bases, &params)?,
            };
            for ax in stream {
                let ax = ax?;
                // the stream format is JSON lines in both modes
                let line = ax.to_json_line();
                out.record(ax.to_json(), || line);
            }
            Ok(EXIT_OK)
        }
        Command::Check { file, window, height, cost_cap } => {
            let window = EvalWindow::new(big(&window, "window")?, big(&height, "height")?).with_cost_cap(cost_cap);
            let mut code = EXIT_OK;
            for (label, sentence) in sentences(&read(&file)?)? {
                match eval_window(&sentence, &window) {
                    Ok(EvalOutcome::Pass { coverage, points }) => out.record(
                        json!({"item": label, "status": "pass", "coverage": coverage.as_str(), "points": points.to_string()}),
                        || format!("{label}: pass ({}, {points} points)", coverage.as_str()),
                    ),
                    Ok(EvalOutcome::Counterexample(env)) => {
                        code = code.max(EXIT_NEGATIVE);
                        out.record(
                            json!({"item": label, "status": "counterexample", "assignment": values_json(&env)}),
                            || format!("{label}: counterexample {}", values_text(&env)),
                        );
                    }
                    Err(e @ Error::WindowTooLarge { .. }) => {
                        code = EXIT_UNKNOWN;
                        out.record(json!({"item": label, "status": "unknown", "reason": e.to_string()}), || {
                            format!("{label}: unknown ({e})")
                        });
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            Ok(code)
        }
        Command::Sat { file, bound } => {
            let f = parse(read(&file)?.trim())?;
            let mut budget = SatBudget { mann_bound: bound, ..SatBudget::default() };
            budget.ineq.precision_cap = precision_cap()?;
            Ok(match sat_conjunction(&f, &budget)? {
                SatOutcome::Sat(values) => {
                    out.record(json!({"status": "sat", "assignment": values_json(&values)}), || {
                        format!("sat: {}", values_text(&values))
                    });
                    EXIT_OK
                }
                SatOutcome::Unsat => {
                    out.record(json!({"status": "unsat"}), || "unsat".into());
                    EXIT_NEGATIVE
                }
                SatOutcome::Unknown(reason) => {
                    out.record(json!({"status": "unknown", "reason": reason}), || format!("unknown: {reason}"));
                    EXIT_UNKNOWN
                }
            })
        }
    }
}

/// Either JSON axiom lines or a single formula text.
fn sentences(text: &str) -> Result<Vec<(String, Formula)>, Failure> {
    let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    if lines.first().is_some_and(|l| l.starts_with('{')) {
        lines
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let v: Value = serde_json::from_str(l).map_err(|e| Failure::Usage(format!("line {}: {e}", i + 1)))?;
                let ax = AxiomInstance::from_json(&v)?;
                Ok((format!("{}#{}", ax.schema.tag(), i + 1), ax.formula))
            })
            .collect()
    } else {
        Ok(vec![("formula".into(), parse(text.trim())?)])
    }
}
