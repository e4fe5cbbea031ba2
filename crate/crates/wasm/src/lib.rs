//! Browser bindings for the demo page under `www/`.
//!
//! Every exported function takes JSON or plain numbers and returns a JSON
//! string. The `*_json` functions hold the logic and run natively in tests.

use absum_core::colsum::{self, Exponents, MatrixBlock};
use absum_core::summability::{self, MethodParams};
use absum_core::transform;
use absum_core::{SeriesKind, SeriesView, TruncWindow, WeightKind, WeightSeq};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest transform table the page will draw.
pub const MAX_TABLE_SIDE: usize = 256;
/// Largest `m_max` for the tail curves; membership also evaluates 4x windows.
pub const MAX_TAIL_M: usize = 1 << 16;
/// Largest block row count; the lower functional enumerates row subsets.
pub const MAX_BLOCK_ROWS: usize = 16;

fn parse<T: serde::de::DeserializeOwned>(what: &str, text: &str) -> Result<T, String> {
    serde_json::from_str(text).map_err(|e| format!("bad {what}: {e}"))
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

fn check(what: &str, value: usize, lo: usize, hi: usize) -> Result<(), String> {
    if (lo..=hi).contains(&value) {
        Ok(())
    } else {
        Err(format!("{what} must be in {lo}..={hi}, got {value}"))
    }
}

#[derive(Serialize)]
struct Table {
    m_max: usize,
    n_max: usize,
    rows: Vec<Vec<f64>>,
    max_abs: f64,
}

/// The table `F_{m,n}` for `0 <= m <= m_max`, `0 <= n <= n_max`.
pub fn transform_table_json(series: &str, weights: &str, m_max: usize, n_max: usize) -> Result<String, String> {
    check("m_max", m_max, 1, MAX_TABLE_SIDE)?;
    check("n_max", n_max, 1, MAX_TABLE_SIDE)?;
    let a = SeriesView::new(parse::<SeriesKind>("series", series)?).map_err(|e| e.to_string())?;
    let p = WeightSeq::new(parse::<WeightKind>("weights", weights)?).map_err(|e| e.to_string())?;
    let table = transform::fill_table(&a, &p, &TruncWindow::new(m_max, n_max, 1)).map_err(|e| e.to_string())?;
    let rows: Vec<Vec<f64>> = (0..=m_max).map(|m| table.row(m).to_vec()).collect();
    let max_abs = rows.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()));
    to_json(&Table { m_max, n_max, rows, max_abs })
}

#[derive(Serialize)]
struct Tails {
    verdict: &'static str,
    grid: Vec<usize>,
    sup_tails: Vec<f64>,
    dyadic_sups: Vec<f64>,
    decay_ratios: Vec<f64>,
    growth: [f64; 2],
    pass_cut: Option<usize>,
    extrapolated_tail: Option<f64>,
    witness_n: usize,
}

/// Membership evidence in `ℓ̂_k` with unit weights: uniform tails per cut
/// and the verdict.
pub fn membership_tails_json(series: &str, k: f64, m_max: usize, n_max: usize) -> Result<String, String> {
    check("m_max", m_max, 1, MAX_TAIL_M)?;
    check("n_max", n_max, 1, 64)?;
    let a = SeriesView::new(parse::<SeriesKind>("series", series)?).map_err(|e| e.to_string())?;
    let mp = MethodParams::unit(k).map_err(|e| e.to_string())?;
    let ev = summability::membership(&a, &mp, &TruncWindow::new(m_max, n_max, 1)).map_err(|e| e.to_string())?;
    let t = ev.tails;
    to_json(&Tails {
        verdict: t.verdict.as_str(),
        grid: t.grid,
        sup_tails: t.sup_tails,
        dyadic_sups: t.dyadic_sups,
        decay_ratios: t.decay_ratios,
        growth: t.growth,
        pass_cut: t.pass_cut,
        extrapolated_tail: t.extrapolated_tail,
        witness_n: t.witness_n,
    })
}

#[derive(Serialize)]
struct Sandwich {
    upper: f64,
    lower: f64,
    lower_bound: f64,
    c: f64,
    holds: bool,
    /// Rows of the maximizing subset.
    rows: Vec<usize>,
}

/// `U/(4C²) <= L <= U` for a row-major block. A single exponent applies to
/// every column.
pub fn sandwich_json(rows: usize, cols: usize, data: &[f64], exponents: &[f64]) -> Result<String, String> {
    check("rows", rows, 0, MAX_BLOCK_ROWS)?;
    check("cols", cols, 1, 16)?;
    let block = MatrixBlock::new(rows, cols, data.to_vec()).map_err(|e| e.to_string())?;
    let exps = match exponents {
        [p] => Exponents::constant(*p, cols),
        _ if exponents.len() == cols => Exponents::new(exponents.to_vec()),
        _ => return Err(format!("{} exponents for {cols} columns", exponents.len())),
    }
    .map_err(|e| e.to_string())?;
    let r = colsum::sandwich(&block, &exps).map_err(|e| e.to_string())?;
    let subset = (0..rows).filter(|i| r.subset >> i & 1 == 1).collect();
    to_json(&Sandwich { upper: r.upper, lower: r.lower, lower_bound: r.lower_bound, c: r.c, holds: r.holds, rows: subset })
}

#[wasm_bindgen]
pub fn transform_table(series: &str, weights: &str, m_max: usize, n_max: usize) -> Result<String, JsError> {
    transform_table_json(series, weights, m_max, n_max).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn membership_tails(series: &str, k: f64, m_max: usize, n_max: usize) -> Result<String, JsError> {
    membership_tails_json(series, k, m_max, n_max).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn sandwich(rows: usize, cols: usize, data: &[f64], exponents: &[f64]) -> Result<String, JsError> {
    sandwich_json(rows, cols, data, exponents).map_err(|e| JsError::new(&e))
}
