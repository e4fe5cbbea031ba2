//! Command dispatch.

use absum_core::colsum::{self, Exponents};
use absum_core::matrixclass::{self, ClassReport, InfMatrix};
use absum_core::summability::{self, MembershipEvidence, MethodParams};
use absum_core::transform;
use absum_core::{SeriesView, TruncWindow, WeightKind, WeightSeq};
use serde_json::json;

use crate::config::{Command, ExperimentConfig};
use crate::error::CliError;
use crate::report::{evidence, Report};
use crate::verify::{self, VerifyOptions, IDENTITY_REL};

/// Seed used when neither the command line nor the config sets one.
pub const DEFAULT_SEED: u64 = 20240601;

/// Transform tables with at most this many cells are embedded in the report.
pub const INLINE_TABLE_CELLS: u128 = 4096;

/// A finished run: the report, CSV side files by name, and the reason the
/// run counts as failed, if it does.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub csv: Vec<(String, String)>,
    pub failure: Option<String>,
}

fn weights(kind: &Option<WeightKind>) -> Result<WeightSeq, CliError> {
    Ok(WeightSeq::new(kind.clone().unwrap_or(WeightKind::Unit))?)
}

fn is_unit(kind: &Option<WeightKind>) -> bool {
    matches!(kind, None | Some(WeightKind::Unit))
}

fn series(cfg: &ExperimentConfig) -> Result<SeriesView, CliError> {
    let kind = cfg.series.clone().ok_or_else(|| CliError::Config("missing `series`".into()))?;
    Ok(SeriesView::new(kind)?)
}

fn window(cfg: &ExperimentConfig) -> Result<TruncWindow, CliError> {
    cfg.window.ok_or_else(|| CliError::Config("missing `window`".into()))
}

fn method(cfg: &ExperimentConfig) -> Result<MethodParams, CliError> {
    let k = cfg.k.ok_or_else(|| CliError::Config("missing `k`".into()))?;
    Ok(MethodParams::new(weights(&cfg.p)?, weights(&cfg.u)?, k)?)
}

fn matrix(cfg: &ExperimentConfig) -> Result<InfMatrix, CliError> {
    let kind = cfg.matrix.clone().ok_or_else(|| CliError::Config("missing `matrix`".into()))?;
    Ok(InfMatrix::new(kind)?)
}

fn csv_floats(header: &str, rows: impl IntoIterator<Item = (usize, f64)>) -> String {
    let mut out = format!("{header}\n");
    for (i, v) in rows {
        out.push_str(&format!("{i},{v:.16e}\n"));
    }
    out
}

fn tail_csvs(prefix: &str, grid: &[usize], sup_tails: &[f64], totals: &[f64]) -> Vec<(String, String)> {
    vec![
        (format!("{prefix}tails.csv"), csv_floats("cut,sup_tail", grid.iter().copied().zip(sup_tails.iter().copied()))),
        (format!("{prefix}totals.csv"), csv_floats("n,total", totals.iter().copied().enumerate())),
    ]
}

fn member_csvs(ev: &MembershipEvidence) -> Vec<(String, String)> {
    tail_csvs("", &ev.tails.grid, &ev.tails.sup_tails, &ev.tails.totals)
}

fn class_csvs(report: &ClassReport) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for c in &report.conditions {
        let id = serde_json::to_value(c.id).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
        if !c.grid.is_empty() {
            out.extend(tail_csvs(&format!("{id}_"), &c.grid, &c.sup_tails, c.totals.first().map_or(&[][..], Vec::as_slice)));
        }
    }
    out
}

/// Runs one config. Errors map to exit codes 2 and 3; a failed invariant is
/// reported through [`Outcome::failure`] after the report is complete.
pub fn run(cfg: ExperimentConfig, opts: VerifyOptions) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let mut csv = Vec::new();
    let mut failure = None;
    let mut verdict = None;
    let mut suite_seconds = Vec::new();
    let result = match cfg.command {
        Command::Transform => {
            let (a, w) = (series(&cfg)?, window(&cfg)?);
            let table = transform::fill_table(&a, &weights(&cfg.p)?, &w)?;
            let mut worst = 0.0f64;
            for m in 1..=w.m_max {
                for n in 0..=w.n_max {
                    let r = transform::recover_term_scaled(&table, m, n, opts.recovery_scale)?;
                    let scale = transform::recovery_bound(&table, m, n)?;
                    let d = (r - a.term(m + n)).abs();
                    if d > 0.0 {
                        worst = worst.max(d / (IDENTITY_REL * scale.max(a.term(m + n).abs())));
                    }
                }
            }
            if !(worst <= 1.0) {
                failure = Some(format!("term recovery error ratio {worst:.3e} exceeds 1"));
            }
            let mut buf = Vec::new();
            table.write_csv(&mut buf)?;
            csv.push(("transform.csv".to_string(), String::from_utf8(buf).expect("CSV is ASCII")));
            let rows: Option<Vec<&[f64]>> = (w.cells() <= INLINE_TABLE_CELLS).then(|| (0..=w.m_max).map(|m| table.row(m)).collect());
            json!({
                "window": w,
                "table": rows,
                "recovery": { "cells": w.m_max * (w.n_max + 1), "worst_error_ratio": worst, "rel_tol": IDENTITY_REL },
            })
        }
        Command::Norm => {
            let (a, w, mp) = (series(&cfg)?, window(&cfg)?, method(&cfg)?);
            let norm = summability::truncated_norm(&a, &mp, &w)?;
            json!({ "window": w, "k": mp.k, "norm": norm })
        }
        Command::Member => {
            let (a, w, mp) = (series(&cfg)?, window(&cfg)?, method(&cfg)?);
            let ev = summability::membership(&a, &mp, &w)?;
            verdict = Some(ev.verdict().as_str().to_string());
            csv.extend(member_csvs(&ev));
            evidence(&ev)
        }
        Command::Hypotheses => {
            let mp = method(&cfg)?;
            let probe = cfg.probe.ok_or_else(|| CliError::Config("missing `probe`".into()))?;
            let u_bounded = summability::check_u_bounded(&mp, probe)?;
            let series_condition = summability::check_series_condition(&mp, probe)?;
            let inclusion = match &cfg.series {
                Some(_) if mp.k > 1.0 => {
                    let r = summability::inclusion_bound_check(&series(&cfg)?, &mp, &window(&cfg)?)?;
                    if !r.holds {
                        failure = Some(format!("inclusion bound violated at n={}, ratio {}", r.witness_n, r.max_ratio));
                    }
                    Some(r)
                }
                _ => None,
            };
            json!({ "u_bounded": u_bounded, "series_condition": series_condition, "inclusion_bound": inclusion })
        }
        Command::Almost => {
            let r = summability::almost_convergence(&series(&cfg)?, &window(&cfg)?)?;
            csv.push(("means.csv".to_string(), csv_floats("n,mean", r.means.iter().copied().enumerate())));
            evidence(&r)
        }
        Command::ClassifyL1 | Command::ClassifyC => {
            let (a, w, mp) = (matrix(&cfg)?, window(&cfg)?, method(&cfg)?);
            let r = if cfg.command == Command::ClassifyL1 {
                matrixclass::classify_l1(&a, &mp, &w)?
            } else {
                matrixclass::classify_c(&a, &mp, &w)?
            };
            verdict = Some(r.verdict.as_str().to_string());
            csv.extend(class_csvs(&r));
            evidence(&r)
        }
        Command::Sandwich => {
            let block = cfg.block.clone().ok_or_else(|| CliError::Config("missing `block`".into()))?;
            block.validate()?;
            let values = cfg.exponents.clone().ok_or_else(|| CliError::Config("missing `exponents`".into()))?;
            let exps = match values.as_slice() {
                [p] if block.cols != 1 => Exponents::constant(*p, block.cols)?,
                _ => Exponents::new(values)?,
            };
            if exps.values.len() != block.cols {
                return Err(CliError::Config(format!("{} exponents for {} columns", exps.values.len(), block.cols)));
            }
            let r = colsum::sandwich(&block, &exps)?;
            if !r.holds {
                failure = Some(format!("sandwich violated: U={} L={} U/(4C^2)={}", r.upper, r.lower, r.lower_bound));
            }
            verdict = Some(if r.holds { "OK" } else { "VIOLATED" }.to_string());
            evidence(&r)
        }
        Command::VerifyAll => {
            let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
            let r = verify::verify_all(seed, cfg.scale.unwrap_or_default(), opts)?;
            if !r.passed {
                let failed: Vec<&str> = r.suites.iter().filter(|s| !s.passed).map(|s| s.name).collect();
                failure = Some(format!("failed suites: {}", failed.join(", ")));
            }
            verdict = Some(if r.passed { "PASS" } else { "FAIL" }.to_string());
            suite_seconds = r.suite_seconds.iter().map(|(n, t)| (n.to_string(), *t)).collect();
            evidence(&r)
        }
    };
    let mut report = Report::new(cfg, verdict, result);
    report.csv_files = csv.iter().map(|(name, _)| name.clone()).collect();
    report.timing.suites = suite_seconds;
    Ok(Outcome { report, csv, failure })
}

/// For configs with unit weights, compares the weighted path with the `ψ`
/// path bit for bit. `None` when the config has no `ψ` counterpart.
pub fn specialization_check(cfg: &ExperimentConfig) -> Result<Option<bool>, CliError> {
    if !is_unit(&cfg.p) || !is_unit(&cfg.u) {
        return Ok(None);
    }
    let unit = WeightSeq::unit();
    let same = match cfg.command {
        Command::Transform => {
            let (a, w) = (series(cfg)?, window(cfg)?);
            let table = transform::fill_table(&a, &unit, &w)?;
            (0..=w.m_max).all(|m| {
                (0..=w.n_max).all(|n| table.get(m, n).map(f64::to_bits) == Some(transform::psi_kernel(&a, m, n).to_bits()))
            })
        }
        Command::Norm => {
            let (a, w, mp) = (series(cfg)?, window(cfg)?, method(cfg)?);
            summability::truncated_norm(&a, &mp, &w)?.to_bits() == summability::lhat_norm(&a, mp.k, &w)?.to_bits()
        }
        Command::Member => {
            let (a, w, mp) = (series(cfg)?, window(cfg)?, method(cfg)?);
            summability::membership(&a, &mp, &w)? == summability::lhat_membership(&a, mp.k, &w)?
        }
        Command::ClassifyL1 => {
            let (a, w, mp) = (matrix(cfg)?, window(cfg)?, method(cfg)?);
            matrixclass::classify_l1(&a, &mp, &w)? == matrixclass::classify_l1_psi(&a, mp.k, &w)?
        }
        Command::ClassifyC => {
            let (a, w, mp) = (matrix(cfg)?, window(cfg)?, method(cfg)?);
            matrixclass::classify_c(&a, &mp, &w)? == matrixclass::classify_c_psi(&a, mp.k, &w)?
        }
        _ => return Ok(None),
    };
    Ok(Some(same))
}
