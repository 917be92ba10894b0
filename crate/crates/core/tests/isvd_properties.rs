mod common;

use nonfickian_isvd::isvd::{IsvdState, UpdateKind};
use nonfickian_isvd::la::{dist2, svd_dense, DenseMatrix, SvdMode};
use proptest::prelude::*;

fn stream_into(cols: &[Vec<f64>], tol: f64) -> (IsvdState, Vec<(Vec<f64>, Vec<f64>)>) {
    let mut s = IsvdState::new(&cols[0], tol).unwrap();
    let mut growth = Vec::new();
    for u in &cols[1..] {
        let out = s.update(u).unwrap();
        if out.kind != UpdateKind::Buffered {
            growth.push((out.prior_sigma, out.bordered_sigma));
        }
    }
    (s, growth)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn q_stays_orthonormal(m in 5usize..60, n in 2usize..120, r in 1usize..8, seed in any::<u64>()) {
        let cols = common::low_rank_stream(m, n, r, 1e-9, seed);
        let (s, _) = stream_into(&cols, 1e-8);
        prop_assert!(s.q().orthogonality_defect() <= 1e-10);
        prop_assert!(s.rank() <= m.min(n));
        prop_assert_eq!(s.len(), n);
    }

    #[test]
    fn singular_values_sorted_and_above_tol(m in 5usize..60, n in 2usize..120, r in 1usize..8, seed in any::<u64>()) {
        let tol = 1e-8;
        let cols = common::low_rank_stream(m, n, r, 0.0, seed);
        let (s, _) = stream_into(&cols, tol);
        prop_assert!(s.sigma().windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(s.sigma().iter().all(|&x| x >= tol));
    }

    #[test]
    fn bordered_values_interlace(m in 5usize..40, n in 2usize..60, r in 1usize..10, seed in any::<u64>()) {
        let cols = common::low_rank_stream(m, n, r, 1e-6, seed);
        let (_, growth) = stream_into(&cols, 1e-8);
        for (prior, mu) in growth {
            let slack = 1e-12 * mu[0];
            for i in 0..prior.len() {
                prop_assert!(mu[i] + slack >= prior[i]);
                prop_assert!(prior[i] + slack >= mu[i + 1]);
            }
        }
    }

    #[test]
    fn columns_reconstruct_within_bound(m in 5usize..60, n in 2usize..150, r in 1usize..8, seed in any::<u64>()) {
        let tol = 1e-8;
        let cols = common::low_rank_stream(m, n, r, 1e-11, seed);
        let (s, _) = stream_into(&cols, tol);
        let bound = (s.stats().t_sv as f64 + 1.0) * tol;
        for (j, u) in cols.iter().enumerate() {
            prop_assert!(dist2(&s.reconstruct_column(j).unwrap(), u) <= bound);
        }
    }

    #[test]
    fn weighted_sums_match_explicit(m in 3usize..30, n in 2usize..50, seed in any::<u64>()) {
        let cols = common::low_rank_stream(m, n, 3, 0.0, seed);
        let (s, _) = stream_into(&cols, 1e-10);
        let w: Vec<f64> = (0..n).map(|j| 1.0 / (j + 1) as f64).collect();
        let y = s.combine_columns(&w).unwrap();
        let got = s.q().matvec(&y).unwrap();
        let mut want = vec![0.0; m];
        for (c, wt) in cols.iter().zip(&w) {
            for (o, v) in want.iter_mut().zip(c) {
                *o += wt * v;
            }
        }
        prop_assert!(common::max_abs_diff(&got, &want) <= 1e-9);
    }

    #[test]
    fn checkpoint_round_trip(m in 2usize..20, n in 1usize..30, seed in any::<u64>()) {
        let cols = common::low_rank_stream(m, n, 2, 0.0, seed);
        let (s, _) = stream_into(&cols, 1e-10);
        let mut buf = Vec::new();
        s.write_checkpoint(&mut buf).unwrap();
        let back = IsvdState::read_checkpoint(&buf[..], 1e-10).unwrap();
        prop_assert_eq!(back.rank(), s.rank());
        prop_assert_eq!(back.pending(), s.pending());
        for j in 0..n {
            prop_assert_eq!(back.reconstruct_column(j).unwrap(), s.reconstruct_column(j).unwrap());
        }
    }

    #[test]
    fn flushed_sigma_matches_batch(m in 5usize..50, n in 2usize..50, r in 1usize..6, seed in any::<u64>()) {
        let cols = common::low_rank_stream(m, n, r, 0.0, seed);
        let (mut s, _) = stream_into(&cols, 1e-10);
        s.flush().unwrap();
        let batch = svd_dense(&DenseMatrix::from_columns(&cols).unwrap(), SvdMode::Thin).unwrap();
        let scale = batch.s[0].max(1.0);
        for (i, &x) in s.sigma().iter().enumerate() {
            prop_assert!((x - batch.s[i]).abs() <= 1e-9 * scale);
        }
        for &x in &batch.s[s.rank()..] {
            prop_assert!(x <= 1e-9 * scale);
        }
    }
}

#[test]
fn rejects_zero_and_nonfinite_columns() {
    assert!(IsvdState::new(&[0.0, 0.0], 1e-10).is_err());
    let mut s = IsvdState::new(&[1.0, 0.0], 1e-10).unwrap();
    assert!(s.update(&[f64::NAN, 0.0]).is_err());
    assert!(s.update(&[1.0]).is_err());
}

#[test]
fn repeated_column_is_buffered() {
    let mut s = IsvdState::new(&[3.0, 4.0], 1e-12).unwrap();
    let out = s.update(&[3.0, 4.0]).unwrap();
    assert_eq!(out.kind, UpdateKind::Buffered);
    assert_eq!((s.rank(), s.pending()), (1, 1));
    s.flush().unwrap();
    assert!((s.sigma()[0] - 50f64.sqrt()).abs() < 1e-13);
}
