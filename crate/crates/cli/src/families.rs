//! Shipped series, weight and matrix families, and seeded random instances.

use absum_core::colsum::{Exponents, MatrixBlock};
use absum_core::matrixclass::{DiagonalSpec, InfMatrix, MatrixKind};
use absum_core::{PartialSumGenerator, SeriesKind, WeightKind};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64, stream: u64) -> Rng8 {
    use rand::SeedableRng;
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// The five shipped series families.
pub fn series_families() -> Vec<(&'static str, SeriesKind)> {
    vec![
        ("unit_basis", SeriesKind::UnitBasis { index: 1 }),
        ("geometric", SeriesKind::Geometric { ratio: 0.5 }),
        ("power", SeriesKind::Power { decay: 2.0 }),
        ("alternating", SeriesKind::Alternating),
        ("bounded_partial_sums", SeriesKind::BoundedPartialSums { generator: PartialSumGenerator::Sine { frequency: 1.0 } }),
    ]
}

/// The three shipped weight families.
pub fn weight_families() -> Vec<(&'static str, WeightKind)> {
    vec![
        ("unit", WeightKind::Unit),
        ("arithmetic", WeightKind::Arithmetic { first: 1.0, step: 1.0 }),
        ("geometric", WeightKind::Geometric { first: 1.0, ratio: 1.5 }),
    ]
}

/// Generators of the shipped bounded-partial-sum members.
pub fn bs_generators() -> Vec<(&'static str, PartialSumGenerator)> {
    vec![
        ("alternating_sign", PartialSumGenerator::AlternatingSign),
        ("sine", PartialSumGenerator::Sine { frequency: 1.0 }),
        ("decaying_power", PartialSumGenerator::Power { exponent: -0.5 }),
    ]
}

/// A zoo member and the factor its `m` window is divided by. The Cesàro
/// matrix has a full lower triangle, so its absolute row sums cost
/// `O(m_max²)` per shift.
pub struct ZooMember {
    pub name: &'static str,
    pub matrix: InfMatrix,
    pub m_shrink: usize,
}

/// The matrix zoo used by the classifier suites.
pub fn matrix_zoo(seed: u64) -> Vec<ZooMember> {
    let mut r = rng(seed, 0x200);
    let dense = random_dense(&mut r, 5, 5, 1.0);
    let kinds = vec![
        ("zero", MatrixKind::Zero),
        ("identity", MatrixKind::Identity),
        ("half_diagonal", MatrixKind::Diagonal { diag: DiagonalSpec::Geometric { first: 1.0, ratio: 0.5 } }),
        ("cesaro_c1", MatrixKind::CesaroC1),
        ("banded", MatrixKind::Banded { width: 1, value: 0.5, decay: 0.5 }),
        ("dense_random", dense),
        ("constant", MatrixKind::Constant { value: 1.0 }),
        ("row_linear", MatrixKind::RowLinear { slope: 1.0, intercept: 0.0 }),
    ];
    kinds
        .into_iter()
        .map(|(name, k)| ZooMember {
            name,
            m_shrink: if matches!(k, MatrixKind::CesaroC1) { 8 } else { 1 },
            matrix: InfMatrix::new(k).expect("zoo members are valid"),
        })
        .collect()
}

pub fn random_dense(r: &mut Rng8, rows: usize, cols: usize, amp: f64) -> MatrixKind {
    let data = (0..rows * cols).map(|_| r.gen_range(-amp..amp)).collect();
    MatrixKind::Dense { rows, cols, data }
}

/// A random series: either an explicit list or a shipped family with
/// random parameters.
pub fn random_series(r: &mut Rng8) -> SeriesKind {
    match r.gen_range(0..6) {
        0 => SeriesKind::UnitBasis { index: r.gen_range(0..20) },
        1 => SeriesKind::Geometric { ratio: r.gen_range(-0.95..0.95) },
        2 => SeriesKind::Power { decay: r.gen_range(0.0..3.0) },
        3 => SeriesKind::Alternating,
        4 => SeriesKind::BoundedPartialSums {
            generator: match r.gen_range(0..3) {
                0 => PartialSumGenerator::AlternatingSign,
                1 => PartialSumGenerator::Sine { frequency: r.gen_range(0.1..3.0) },
                _ => PartialSumGenerator::Power { exponent: r.gen_range(-2.0..0.0) },
            },
        },
        _ => {
            let len = r.gen_range(1..40);
            SeriesKind::Explicit { terms: (0..len).map(|_| r.gen_range(-2.0..2.0)).collect() }
        }
    }
}

/// Random positive weights from every closed-form family.
pub fn random_weights(r: &mut Rng8) -> WeightKind {
    match r.gen_range(0..5) {
        0 => WeightKind::Unit,
        1 => WeightKind::Arithmetic { first: r.gen_range(0.5..2.0), step: r.gen_range(0.0..2.0) },
        2 => WeightKind::Geometric { first: r.gen_range(0.5..2.0), ratio: r.gen_range(0.8..1.5) },
        3 => WeightKind::Power { scale: r.gen_range(0.5..2.0), exponent: r.gen_range(-0.9..2.0) },
        _ => WeightKind::Oscillating { base: 2.0, amplitude: r.gen_range(0.0..1.5) },
    }
}

/// Random matrices with cheap entries: a dense block or a zoo-style member
/// with random parameters.
pub fn random_matrix(r: &mut Rng8) -> MatrixKind {
    match r.gen_range(0..5) {
        0 => MatrixKind::Diagonal { diag: DiagonalSpec::Geometric { first: r.gen_range(-2.0..2.0), ratio: r.gen_range(0.1..1.0) } },
        1 => MatrixKind::Banded { width: r.gen_range(0..3), value: r.gen_range(-2.0..2.0), decay: r.gen_range(0.1..1.0) },
        2 => MatrixKind::CesaroC1,
        3 => MatrixKind::Constant { value: r.gen_range(-2.0..2.0) },
        _ => {
            let rows = r.gen_range(1..12);
            let cols = r.gen_range(1..6);
            random_dense(r, rows, cols, 2.0)
        }
    }
}

/// A random block with at most `max_rows` rows and exponents in `[1, 3]`.
pub fn random_block(r: &mut Rng8, max_rows: usize, max_cols: usize) -> (MatrixBlock, Exponents) {
    let rows = r.gen_range(1..=max_rows);
    let cols = r.gen_range(1..=max_cols);
    let data = (0..rows * cols).map(|_| r.gen_range(-3.0..3.0)).collect();
    let block = MatrixBlock::new(rows, cols, data).expect("finite data");
    let exps = Exponents::new((0..cols).map(|_| r.gen_range(1.0..=3.0)).collect()).expect("exponents >= 1");
    (block, exps)
}
