use std::io::Write;
use std::time::Instant;

use qls_core::json::to_canonical_string;
use qls_core::{example_cascade_default, example_optomech_default, System};
use qls_reduce::{reduce, Method, ReduceOptions, ReductionResult};
use serde_json::json;

use crate::args::BenchArgs;
use crate::CliError;

/// Accepted excess over the reference value.
pub const BAND: f64 = 1.10;

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub name: &'static str,
    /// `"h2"` or `"h2_squared"`, whichever the reference value quotes.
    pub metric: &'static str,
    pub target: f64,
    pub achieved: Option<f64>,
    pub certified: bool,
    pub max_realizability: f64,
    pub seconds: f64,
    pub time_limit: f64,
    pub error: Option<String>,
}

impl BenchRow {
    pub fn pass(&self) -> bool {
        self.error.is_none()
            && self.certified
            && self.achieved.is_some_and(|v| v <= BAND * self.target)
            && self.seconds <= self.time_limit
    }
}

struct Case {
    name: &'static str,
    metric: &'static str,
    target: f64,
    time_limit: f64,
    system: System,
    passive: bool,
}

fn run_case(case: &Case, seed: u64) -> BenchRow {
    let opts = ReduceOptions::<f64> {
        seed,
        ..ReduceOptions::default()
    };
    let start = Instant::now();
    let res: Result<ReductionResult<f64>, _> =
        reduce(&case.system, 2, Method::QForm, case.passive, &opts);
    let seconds = start.elapsed().as_secs_f64();
    let mut row = BenchRow {
        name: case.name,
        metric: case.metric,
        target: case.target,
        achieved: None,
        certified: false,
        max_realizability: f64::NAN,
        seconds,
        time_limit: case.time_limit,
        error: None,
    };
    match res {
        Ok(r) => {
            row.achieved = if case.metric == "h2" {
                r.h2_error
            } else {
                r.h2_squared()
            };
            row.certified = r.certified;
            row.max_realizability = r.validation.residuals.realizability.max();
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Both reference examples reduced to two modes, run concurrently.
pub fn run_bench(seed: u64) -> Vec<BenchRow> {
    let cases = [
        Case {
            name: "optomech",
            metric: "h2",
            target: 528.36,
            time_limit: 60.0,
            system: example_optomech_default(),
            passive: false,
        },
        Case {
            name: "cascade",
            metric: "h2_squared",
            target: 1.02,
            time_limit: 30.0,
            system: example_cascade_default(),
            passive: true,
        },
    ];
    std::thread::scope(|s| {
        let handles: Vec<_> = cases
            .iter()
            .map(|c| s.spawn(move || run_case(c, seed)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("bench worker panicked"))
            .collect()
    })
}

pub fn bench(a: &BenchArgs, out: &mut dyn Write) -> Result<bool, CliError> {
    let rows = run_bench(a.seed);
    let ok = rows.iter().all(BenchRow::pass);
    let text = if a.json {
        let v = json!({
            "seed": a.seed,
            "pass": ok,
            "rows": rows.iter().map(|r| json!({
                "name": r.name,
                "metric": r.metric,
                "target": r.target,
                "limit": BAND * r.target,
                "achieved": r.achieved,
                "certified": r.certified,
                "max_realizability": if r.max_realizability.is_finite() { json!(r.max_realizability) } else { json!(null) },
                "seconds": r.seconds,
                "pass": r.pass(),
                "error": r.error,
            })).collect::<Vec<_>>(),
        });
        to_canonical_string(&v)
    } else {
        let mut s = format!(
            "{:<10} {:<11} {:>10} {:>12} {:>10} {:>11} {:>8}  result\n",
            "example", "metric", "target", "achieved", "certified", "realiz.", "seconds"
        );
        for r in &rows {
            s += &format!(
                "{:<10} {:<11} {:>10.4} {:>12} {:>10} {:>11.2e} {:>8.2}  {}\n",
                r.name,
                r.metric,
                r.target,
                r.achieved.map_or("-".into(), |v| format!("{v:.4}")),
                if r.certified { "yes" } else { "no" },
                r.max_realizability,
                r.seconds,
                if r.pass() { "PASS" } else { "FAIL" }
            );
            if let Some(e) = &r.error {
                s += &format!("  error: {e}\n");
            }
        }
        s
    };
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Failed(format!("stdout: {e}")))?;
    Ok(ok)
}
