#![allow(dead_code)]

use absum_core::matrixclass::{DiagonalSpec, InfMatrix, MatrixKind};
use absum_core::{PartialSumGenerator, SeriesKind, SeriesView, WeightKind, WeightSeq};
use proptest::prelude::*;

pub fn series_kind() -> impl Strategy<Value = SeriesKind> {
    prop_oneof![
        (0usize..12).prop_map(|index| SeriesKind::UnitBasis { index }),
        (-0.95f64..0.95).prop_map(|ratio| SeriesKind::Geometric { ratio }),
        (0.0f64..2.5).prop_map(|decay| SeriesKind::Power { decay }),
        Just(SeriesKind::Alternating),
        prop_oneof![
            Just(PartialSumGenerator::AlternatingSign),
            (0.1f64..3.0).prop_map(|frequency| PartialSumGenerator::Sine { frequency }),
            (-2.0f64..0.0).prop_map(|exponent| PartialSumGenerator::Power { exponent }),
        ]
        .prop_map(|generator| SeriesKind::BoundedPartialSums { generator }),
        prop::collection::vec(-3.0f64..3.0, 0..40).prop_map(|terms| SeriesKind::Explicit { terms }),
    ]
}

pub fn series() -> impl Strategy<Value = SeriesView> {
    series_kind().prop_map(|k| SeriesView::new(k).unwrap())
}

pub fn weight_kind() -> impl Strategy<Value = WeightKind> {
    prop_oneof![
        Just(WeightKind::Unit),
        (0.5f64..3.0, 0.0f64..2.0).prop_map(|(first, step)| WeightKind::Arithmetic { first, step }),
        (0.5f64..2.0, 0.8f64..1.3).prop_map(|(first, ratio)| WeightKind::Geometric { first, ratio }),
        (0.5f64..2.0, -0.9f64..2.0).prop_map(|(scale, exponent)| WeightKind::Power { scale, exponent }),
        (1.5f64..3.0, 0.0f64..1.0).prop_map(|(base, amplitude)| WeightKind::Oscillating { base, amplitude }),
    ]
}

pub fn weights() -> impl Strategy<Value = WeightSeq> {
    weight_kind().prop_map(|k| WeightSeq::new(k).unwrap())
}

pub fn dense(rows: usize, cols: usize) -> impl Strategy<Value = InfMatrix> {
    prop::collection::vec(-2.0f64..2.0, rows * cols).prop_map(move |data| InfMatrix::dense(rows, cols, data).unwrap())
}

pub fn matrix() -> impl Strategy<Value = InfMatrix> {
    prop_oneof![
        Just(MatrixKind::Zero),
        Just(MatrixKind::Identity),
        Just(MatrixKind::CesaroC1),
        (0.2f64..0.9).prop_map(|ratio| MatrixKind::Diagonal { diag: DiagonalSpec::Geometric { first: 1.0, ratio } }),
        (0usize..3, -2.0f64..2.0, -0.9f64..0.9).prop_map(|(width, value, decay)| MatrixKind::Banded { width, value, decay }),
        (1usize..30, 1usize..8)
            .prop_flat_map(|(r, c)| prop::collection::vec(-2.0f64..2.0, r * c).prop_map(move |data| MatrixKind::Dense {
                rows: r,
                cols: c,
                data
            })),
        (-2.0f64..2.0).prop_map(|value| MatrixKind::Constant { value }),
        (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(slope, intercept)| MatrixKind::RowLinear { slope, intercept }),
    ]
    .prop_map(|k| InfMatrix::new(k).unwrap())
}

/// `|fast - oracle| <= rel · max(|oracle|, scale)`.
pub fn close(fast: f64, oracle: f64, scale: f64, rel: f64) -> bool {
    (fast - oracle).abs() <= rel * oracle.abs().max(scale) || fast == oracle
}

/// The series of absolute values, for error scales.
pub fn abs_series(a: &SeriesView, len: usize) -> SeriesView {
    SeriesView::explicit(a.terms(len).into_iter().map(f64::abs).collect()).unwrap()
}
