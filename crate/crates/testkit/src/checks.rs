//! Property drivers shared by the integration tests and the acceptance
//! runner. Each returns an [`Outcome`] instead of panicking so callers can
//! report counts.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use anka_core::interp::{run_pipeline, RunError, RunOptions, RuntimeErrorKind};
use anka_core::io::{table_from_csv, table_from_json, table_to_csv, table_to_json, RecordingIo};
use anka_core::syntax::{format_ast, parse};
use anka_core::value::{table_equal, Decimal, Table};
use anka_core::validate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cases::{check_case, random_case, Op};
use crate::gen::{self, TableSpec};
use crate::pipelines::random_pipeline;

/// Failures beyond this many are counted but not kept.
const KEEP_FAILURES: usize = 5;

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub total: usize,
    pub passed: usize,
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn record(&mut self, result: Result<(), String>) {
        self.total += 1;
        match result {
            Ok(()) => self.passed += 1,
            Err(msg) => {
                if self.failures.len() < KEEP_FAILURES {
                    self.failures.push(msg);
                }
            }
        }
    }

    pub fn all_passed(&self) -> bool {
        self.total > 0 && self.passed == self.total
    }

    pub fn merge(&mut self, other: Outcome) {
        self.total += other.total;
        self.passed += other.passed;
        for f in other.failures {
            if self.failures.len() < KEEP_FAILURES {
                self.failures.push(f);
            }
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Interpreter against the brute-force oracle, `cases` per operation.
pub fn oracle_equivalence(cases: usize, seed: u64) -> Vec<(Op, Outcome)> {
    Op::ALL
        .iter()
        .enumerate()
        .map(|(i, &op)| {
            let mut r = rng(seed.wrapping_add(i as u64 * 7919));
            let mut out = Outcome::default();
            for _ in 0..cases {
                out.record(check_case(&random_case(&mut r, op)));
            }
            (op, out)
        })
        .collect()
}

/// Runtime failures that a validated pipeline must never hit.
fn is_static_failure(kind: RuntimeErrorKind) -> bool {
    kind == RuntimeErrorKind::Internal
}

/// Random well-typed pipelines on conforming inputs: validation succeeds,
/// the run never fails with an error the validator should have caught,
/// and the output schema matches the inferred one.
pub fn validator_soundness(pipelines: usize, seed: u64) -> Outcome {
    let mut r = rng(seed);
    let mut out = Outcome::default();
    let spec = TableSpec { max_rows: 8, ..TableSpec::default() };
    let options = RunOptions { sandbox: true, while_cap: 16, deadline: None };
    for _ in 0..pipelines {
        let generated = random_pipeline(&mut r);
        let inputs: HashMap<String, Table> = generated
            .inputs
            .iter()
            .map(|(n, s)| (n.clone(), gen::table(&mut r, s, &spec)))
            .collect();
        out.record((|| {
            let src = &generated.source;
            let ast = parse(src).map_err(|e| format!("generated pipeline does not parse: {e}\n{src}"))?;
            let env = validate(&ast).map_err(|e| format!("validator rejected {e:?}\n{src}"))?;
            let inferred = env.output_schema().cloned().ok_or("no output schema")?;
            if inferred != generated.output_schema {
                return Err(format!(
                    "inferred {inferred} but generator expected {}\n{src}",
                    generated.output_schema
                ));
            }
            match run_pipeline(&ast, &inputs, &RecordingIo::new(), &options) {
                Ok(t) if t.schema() == &inferred => Ok(()),
                Ok(t) => Err(format!("runtime schema {} != inferred {inferred}\n{src}", t.schema())),
                Err(RunError::Runtime(e)) if is_static_failure(e.kind) => {
                    Err(format!("runtime {e}\n{src}"))
                }
                Err(RunError::Runtime(_)) => Ok(()),
                Err(RunError::Input(e)) => Err(format!("inputs rejected: {e}\n{src}")),
            }
        })());
    }
    out
}

/// Random decimals of scale <= 4: `(a + b) - b == a` exactly, and `a * 0.08` re-parses from its text to the same value.
pub fn decimal_exactness(pairs: usize, seed: u64) -> Outcome {
    let mut r = rng(seed);
    let mut out = Outcome::default();
    let rate: Decimal = "0.08".parse().unwrap();
    for _ in 0..pairs {
        let a = random_decimal(&mut r);
        let b = random_decimal(&mut r);
        out.record((|| {
            let back = a
                .checked_add(&b)
                .and_then(|s| s.checked_sub(&b))
                .map_err(|e| format!("{a} + {b} - {b}: {e}"))?;
            if back != a {
                return Err(format!("({a} + {b}) - {b} = {back}"));
            }
            let taxed = a.checked_mul(&rate).map_err(|e| format!("{a} * 0.08: {e}"))?;
            let text = taxed.to_string();
            let reparsed: Decimal = text.parse().map_err(|e| format!("{text}: {e}"))?;
            if reparsed != taxed || reparsed.to_string() != text || taxed.scale() != a.scale() + 2 {
                return Err(format!("{a} * 0.08 = {text} drifted to {reparsed}"));
            }
            // Cross-check the product against integer arithmetic.
            if taxed.mantissa() != a.mantissa() * 8 {
                return Err(format!("{a} * 0.08 mantissa {}", taxed.mantissa()));
            }
            Ok(())
        })());
    }
    out
}

fn random_decimal<R: Rng>(r: &mut R) -> Decimal {
    let scale = r.gen_range(0..=4);
    let magnitude = 10i128.pow(r.gen_range(1..=12));
    Decimal::new(r.gen_range(-magnitude..=magnitude), scale).unwrap()
}

/// JSON and CSV serialization round-trips on random tables.
pub fn io_round_trips(tables: usize, seed: u64) -> (Outcome, Outcome) {
    let mut r = rng(seed);
    let mut json = Outcome::default();
    let mut csv = Outcome::default();
    for _ in 0..tables {
        let t = gen::random_table(&mut r, &TableSpec::default());
        json.record(match table_from_json(&table_to_json(&t), t.schema()) {
            Ok(back) if table_equal(&t, &back) && same_text(&t, &back) => Ok(()),
            Ok(back) => Err(format!("JSON round-trip changed {t:?} into {back:?}")),
            Err(e) => Err(format!("JSON round-trip failed: {e} on {t:?}")),
        });
        let spec = TableSpec { null_strings: false, ..TableSpec::default() };
        let t = gen::random_table(&mut r, &spec);
        csv.record(match table_from_csv(&table_to_csv(&t), t.schema()) {
            Ok(back) if table_equal(&t, &back) && same_text(&t, &back) => Ok(()),
            Ok(back) => Err(format!("CSV round-trip changed {t:?} into {back:?}")),
            Err(e) => Err(format!("CSV round-trip failed: {e} on {t:?}")),
        });
    }
    (json, csv)
}

fn same_text(a: &Table, b: &Table) -> bool {
    let text = |t: &Table| -> Vec<String> { t.rows().iter().flatten().map(|v| format!("{v:?}")).collect() };
    text(a) == text(b)
}

/// `format_ast` then `parse` gives a structurally equal AST.
pub fn round_trip(source: &str) -> Result<(), String> {
    let ast = parse(source).map_err(|e| format!("does not parse: {e}"))?;
    let printed = format_ast(&ast);
    let again = parse(&printed).map_err(|e| format!("formatted text does not parse: {e}\n{printed}"))?;
    if !ast.structurally_eq(&again) {
        return Err(format!("formatted AST differs\n{printed}"));
    }
    if format_ast(&again) != printed {
        return Err("formatting is not idempotent".into());
    }
    Ok(())
}

const FRAGMENTS: [&str; 24] = [
    "PIPELINE", "STEP", "INPUT", "OUTPUT", "FILTER", "WHERE", "INTO", "TABLE[", "]", "(", ")",
    "\"", ",", ":", "==", "=>", "IF", "END_IF", "TRY", "ON_ERROR", "-", "1.", "#", "\n",
];

/// Mutates `seed` text: byte flips, deletions, duplications, fragment
/// insertions and truncation.
pub fn mutate<R: Rng>(r: &mut R, seed: &str) -> Vec<u8> {
    let mut bytes = seed.as_bytes().to_vec();
    for _ in 0..r.gen_range(1..=6) {
        let len = bytes.len();
        match r.gen_range(0..6) {
            0 if len > 0 => {
                let i = r.gen_range(0..len);
                bytes[i] = r.gen();
            }
            1 if len > 0 => {
                let i = r.gen_range(0..len);
                let n = r.gen_range(1..=(len - i).min(20));
                bytes.drain(i..i + n);
            }
            2 if len > 0 => {
                let i = r.gen_range(0..len);
                let j = (i + r.gen_range(1..=30)).min(len);
                let chunk = bytes[i..j].to_vec();
                let at = r.gen_range(0..=bytes.len());
                bytes.splice(at..at, chunk);
            }
            3 => {
                let f = FRAGMENTS[r.gen_range(0..FRAGMENTS.len())];
                let at = r.gen_range(0..=len);
                bytes.splice(at..at, f.bytes());
            }
            4 if len > 0 => bytes.truncate(r.gen_range(0..len)),
            _ => {
                let at = r.gen_range(0..=len);
                let n = r.gen_range(1..=8);
                let noise: Vec<u8> = (0..n).map(|_| r.gen()).collect();
                bytes.splice(at..at, noise);
            }
        }
    }
    bytes
}

/// Parses `inputs` fuzzed texts (mutated corpus entries and random bytes).
/// Each must produce an AST or a ParseError whose location lies inside
/// the text, without panicking, within `limit`.
pub fn parser_totality(corpus: &[String], inputs: usize, seed: u64, limit: Duration) -> Outcome {
    let mut r = rng(seed);
    let mut out = Outcome::default();
    for i in 0..inputs {
        let bytes = if corpus.is_empty() || i % 4 == 3 {
            let n = r.gen_range(0..200);
            (0..n).map(|_| r.gen()).collect()
        } else {
            {
            let pick = r.gen_range(0..corpus.len());
            mutate(&mut r, &corpus[pick])
        }
        };
        let text = String::from_utf8_lossy(&bytes).into_owned();
        let started = Instant::now();
        let result = std::panic::catch_unwind(|| parse(&text).map(|_| ()));
        let elapsed = started.elapsed();
        out.record(match result {
            Err(_) => Err(format!("parser panicked on {text:?}")),
            Ok(_) if elapsed > limit => Err(format!("parser took {elapsed:?} on {text:?}")),
            Ok(Ok(())) => Ok(()),
            Ok(Err(e)) => {
                let loc = e.location;
                if loc.line == 0 || loc.column == 0 || loc.offset > text.len() {
                    Err(format!("error location {loc:?} outside the text {text:?}"))
                } else {
                    Ok(())
                }
            }
        });
    }
    out
}
