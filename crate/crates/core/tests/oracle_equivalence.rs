mod common;

use absum_core::colsum::{self, Exponents, MatrixBlock};
use absum_core::matrixclass::{self, InfMatrix};
use absum_core::oracle::{self, OracleBudget};
use absum_core::summability::{self, MethodParams};
use absum_core::transform;
use absum_core::{SeriesView, TruncWindow};
use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn fill_table_matches_naive_f(a in series(), p in weights(), m_max in 1usize..40, n_max in 1usize..20) {
        let w = TruncWindow::new(m_max, n_max, 1);
        let table = transform::fill_table(&a, &p, &w).unwrap();
        let abs_a = abs_series(&a, m_max + n_max + 1);
        let budget = OracleBudget::default();
        for m in 0..=m_max {
            for n in 0..=n_max {
                let fast = table.get(m, n).unwrap();
                let slow = oracle::naive_f(&a, &p, m, n, &budget).unwrap();
                let scale = oracle::naive_f(&abs_a, &p, m, n, &budget).unwrap();
                prop_assert!(close(fast, slow, scale, 1e-12), "m={m} n={n}: {fast} vs {slow}");
            }
        }
    }

    #[test]
    fn truncated_norm_matches_naive(a in series(), p in weights(), u in weights(), k in 1.0f64..3.5, m_max in 1usize..40, n_max in 1usize..10) {
        let mp = MethodParams::new(p.clone(), u.clone(), k).unwrap();
        let w = TruncWindow::new(m_max, n_max, 1);
        let fast = summability::truncated_norm(&a, &mp, &w).unwrap();
        let slow = oracle::naive_norm(&a, &p, &u, k, m_max, n_max, &OracleBudget::default()).unwrap();
        let abs_a = abs_series(&a, m_max + n_max + 1);
        let scale = oracle::naive_norm(&abs_a, &p, &u, k, m_max, n_max, &OracleBudget::default()).unwrap();
        prop_assert!(close(fast, slow, scale, 1e-10), "{fast} vs {slow}");
    }

    #[test]
    fn lhat_norm_is_bitwise_unit_norm(a in series(), k in 1.0f64..3.0, m_max in 1usize..60) {
        let w = TruncWindow::new(m_max, 6, 1);
        let fast = summability::truncated_norm(&a, &MethodParams::unit(k).unwrap(), &w).unwrap();
        prop_assert_eq!(fast.to_bits(), summability::lhat_norm(&a, k, &w).unwrap().to_bits());
    }

    #[test]
    fn b_coeff_matches_naive(a in matrix(), p in weights(), m in 0usize..30, n in 0usize..30, j in 0usize..30) {
        let fast = matrixclass::b_coeff(&a, &p, m, n, j).unwrap();
        let slow = oracle::naive_b(&a, &p, m, n, j, &OracleBudget::default()).unwrap();
        let abs_col: Vec<f64> = a.column(j, n + m + 1).into_iter().map(f64::abs).collect();
        let abs_m = InfMatrix::dense(n + m + 1, 1, abs_col).unwrap();
        let scale = oracle::naive_b(&abs_m, &p, m, n, 0, &OracleBudget::default()).unwrap();
        prop_assert!(close(fast, slow, scale, 1e-12), "{fast} vs {slow}");
    }

    #[test]
    fn apply_matrix_matches_dot(a in dense(20, 20), x in prop::collection::vec(-3.0f64..3.0, 20)) {
        let xs = SeriesView::explicit(x.clone()).unwrap();
        let scale: f64 = (0..20).map(|v| (a.entry(3, v) * x[v]).abs()).sum();
        for n in 0..20 {
            let fast = matrixclass::apply_matrix(&a, &xs, n, 19, false).unwrap();
            let slow = oracle::naive_dot(&a, &x, n);
            prop_assert!(close(fast, slow, scale.max(1.0), 1e-12));
        }
    }

    #[test]
    fn column_checks_match_naive(a in matrix(), p in weights(), u in weights(), k in 1.0f64..3.0) {
        let mp = MethodParams::new(p.clone(), u.clone(), k).unwrap();
        let w = TruncWindow::new(12, 3, 3);
        let budget = OracleBudget::default();
        let tails = matrixclass::check_column_tails(&a, &mp, &w).unwrap();
        let sup = matrixclass::check_column_sup(&a, &mp, &w).unwrap();
        for j in 0..=w.j_max {
            for n in 0..=w.n_max {
                let slow = oracle::naive_column_total(&a, &p, &u, k, w.m_max, n, j, &budget).unwrap();
                prop_assert!(close(tails.totals[j][n], slow, 0.0, 1e-10), "{} vs {slow}", tails.totals[j][n]);
                prop_assert!(close(sup.totals[j][n], slow, 0.0, 1e-10));
            }
        }
    }

    #[test]
    fn row_checks_match_naive(a in matrix(), p in weights(), u in weights(), k in 1.0f64..3.0) {
        let mp = MethodParams::new(p.clone(), u.clone(), k).unwrap();
        let w = TruncWindow::new(10, 3, 4);
        let rows = 4 * (w.m_max + w.n_max) + 1;
        let j_end = a.column_extent(rows - 1).unwrap_or(w.j_max + 1);
        let abs = matrixclass::check_row_abs_sup(&a, &mp, &w).unwrap();
        let sum = matrixclass::check_row_sum_tails(&a, &mp, &w).unwrap();
        for n in 0..=w.n_max {
            let (slow_abs, slow_sum) = oracle::naive_row_totals(&a, &p, &u, k, w.m_max, n, j_end, &OracleBudget::default()).unwrap();
            prop_assert!(close(abs.totals[0][n], slow_abs, 0.0, 1e-10), "{} vs {slow_abs}", abs.totals[0][n]);
            prop_assert!(close(sum.totals[0][n], slow_sum, slow_abs, 1e-10), "{} vs {slow_sum}", sum.totals[0][n]);
        }
    }

    #[test]
    fn lower_matches_enumeration(rows in 0usize..12, cols in 1usize..6, seed in prop::collection::vec(-2.0f64..2.0, 72), ex in prop::collection::vec(1.0f64..3.0, 6)) {
        let data = seed[..rows * cols].to_vec();
        let block = MatrixBlock::new(rows, cols, data.clone()).unwrap();
        let exps = Exponents::new(ex[..cols].to_vec()).unwrap();
        let fast = colsum::lower(&block, &exps).unwrap();
        let slow = oracle::enumerate_l(rows, cols, &data, &exps.values, &OracleBudget::default()).unwrap();
        prop_assert!(close(fast, slow, 0.0, 1e-12), "{fast} vs {slow}");
        let up = colsum::upper(&block, &exps).unwrap();
        prop_assert!(close(up, oracle::naive_u(rows, cols, &data, &exps.values), 0.0, 1e-12));
    }
}
