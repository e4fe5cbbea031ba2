//! Acceptance checks: one `[PASS]`/`[FAIL]` line per criterion.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use absum_cli::families;
use absum_cli::report::without_timing;
use absum_cli::run::DEFAULT_SEED;
use absum_cli::verify::{self, Plan, SuiteResult, VerifyOptions};
use absum_cli::Scale;
use absum_core::summability::{self, MethodParams};
use absum_core::{make_bounded_partial_sum_series, TruncWindow};

struct Line {
    id: usize,
    name: &'static str,
    passed: bool,
    detail: String,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn suites_line(
    id: usize,
    name: &'static str,
    limit: Option<f64>,
    f: impl FnOnce() -> Result<Vec<SuiteResult>, absum_cli::CliError>,
) -> Line {
    let (res, took) = timed(f);
    let secs = took.as_secs_f64();
    let (passed, mut detail) = match res {
        Ok(suites) => {
            let passed = suites.iter().all(|s| s.passed);
            let parts: Vec<String> = suites
                .iter()
                .map(|s| {
                    let mut p = format!("{}: {} cases, {} failures, worst {:.3e}", s.name, s.cases, s.failures, s.worst);
                    if let Some(f) = &s.first_failure {
                        p.push_str(&format!(" (first: {f})"));
                    }
                    p
                })
                .collect();
            (passed, parts.join("; "))
        }
        Err(e) => (false, format!("error: {e}")),
    };
    let in_time = limit.is_none_or(|l| secs < l);
    match limit {
        Some(l) => detail.push_str(&format!("; {secs:.2} s (limit {l} s)")),
        None => detail.push_str(&format!("; {secs:.2} s")),
    }
    Line { id, name, passed: passed && in_time, detail }
}

fn one(r: Result<SuiteResult, absum_cli::CliError>) -> Result<Vec<SuiteResult>, absum_cli::CliError> {
    r.map(|s| vec![s])
}

/// Prints the membership tails of the bounded-partial-sum members and the
/// partial sums of the series condition, next to the suite verdict.
fn bs_details(window: &TruncWindow, probe: usize) -> String {
    let mut out = Vec::new();
    for (g, gen) in families::bs_generators() {
        for k in [1.5, 2.0, 3.0] {
            let ev = make_bounded_partial_sum_series(gen.clone())
                .map_err(|e| e.to_string())
                .and_then(|a| {
                    MethodParams::unit(k)
                        .and_then(|mp| summability::membership(&a, &mp, window))
                        .map_err(|e| e.to_string())
                });
            out.push(match ev {
                Ok(ev) => {
                    let t = &ev.tails;
                    let tail = t.pass_cut.and_then(|c| t.grid.iter().position(|&x| x == c)).map(|i| t.sup_tails[i]);
                    format!(
                        "    {g} k={k}: {} cut {:?} tail {:?} extrapolated {:?}",
                        ev.verdict().as_str(),
                        t.pass_cut,
                        tail,
                        t.extrapolated_tail
                    )
                }
                Err(e) => format!("    {g} k={k}: error {e}"),
            });
        }
    }
    for k in [1.0, 1.5, 2.0] {
        if let Ok(r) = MethodParams::unit(k).and_then(|mp| summability::check_series_condition(&mp, probe)) {
            out.push(format!(
                "    series condition k={k}: partial sum {:.4} to {probe}, decade increments {:.4e} {:.4e}, {:?}",
                r.partial_sum, r.decade_increments[0], r.decade_increments[1], r.trend
            ));
        }
    }
    out.join("\n")
}

fn verify_all_line() -> Line {
    let run = || {
        let start = Instant::now();
        let out = Command::new(env!("CARGO_BIN_EXE_absum"))
            .args(["verify-all", "--scale", "small", "--seed", &DEFAULT_SEED.to_string()])
            .output();
        (out, start.elapsed().as_secs_f64())
    };
    let (first, t1) = run();
    let (second, t2) = run();
    let (passed, detail) = match (first, second) {
        (Ok(a), Ok(b)) => {
            let (sa, sb) = (String::from_utf8_lossy(&a.stdout), String::from_utf8_lossy(&b.stdout));
            let same = without_timing(&sa) == without_timing(&sb);
            let ok = a.status.code() == Some(0) && b.status.code() == Some(0);
            (
                ok && same && t1 < 30.0 && t2 < 30.0,
                format!(
                    "exit {:?}/{:?}, reports identical apart from timing: {same}, {t1:.2} s and {t2:.2} s (limit 30 s)",
                    a.status.code(),
                    b.status.code()
                ),
            )
        }
        (a, b) => (false, format!("could not run: {:?} {:?}", a.err(), b.err())),
    };
    Line { id: 11, name: "verify-all --scale small", passed, detail }
}

fn main() -> ExitCode {
    let seed = DEFAULT_SEED;
    let plan = Plan::for_scale(Scale::Small);
    let opts = VerifyOptions::default();
    let lines = vec![
        suites_line(1, "difference identity", Some(5.0), || {
            one(verify::difference_identity(plan.difference.0, plan.difference.1))
        }),
        suites_line(2, "recovery identity", Some(2.0), || one(verify::recovery(plan.recovery.0, plan.recovery.1, opts))),
        suites_line(3, "unit-weight specialization", None, || one(verify::psi_specialization(&plan.specialization, seed))),
        suites_line(4, "oracle equivalence", Some(60.0), || verify::oracle_equivalence(seed, plan.oracle_cases)),
        suites_line(5, "norm axioms", None, || one(verify::norm_axioms(seed, plan.norm_cases))),
        {
            let mut l = suites_line(6, "bounded partial sums", None, || {
                one(verify::bounded_partial_sums(&plan.bs_window, plan.series_probe))
            });
            l.detail.push('\n');
            l.detail.push_str(&bs_details(&plan.bs_window, plan.series_probe));
            l
        },
        suites_line(7, "inclusion bound", None, || one(verify::inclusion_bound(&plan.inclusion))),
        suites_line(8, "column-sum sandwich", Some(30.0), || {
            one(verify::sandwich(seed, plan.sandwich_cases, plan.sandwich_rows))
        }),
        suites_line(9, "interchange identity", None, || one(verify::interchange(seed, plan.interchange_cases))),
        suites_line(10, "classifier consistency", None, || one(verify::classifier_consistency(seed, &plan.classifier))),
        verify_all_line(),
    ];
    let mut all = true;
    for l in &lines {
        all &= l.passed;
        println!("[{}] {:>2} {}: {}", if l.passed { "PASS" } else { "FAIL" }, l.id, l.name, l.detail);
    }
    println!("{} of {} criteria passed", lines.iter().filter(|l| l.passed).count(), lines.len());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
