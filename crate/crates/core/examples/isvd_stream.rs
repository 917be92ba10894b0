//! Streams a noisy rank-5 matrix through the incremental SVD and compares
//! the result with a batch SVD of the same columns.

use nonfickian_isvd::isvd::{IsvdState, UpdateKind};
use nonfickian_isvd::la::{dist2, norm2, svd_dense, DenseMatrix, SvdMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> nonfickian_isvd::Result<()> {
    let (m, n, r, tol) = (400, 2000, 5, 1e-8);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let basis: Vec<Vec<f64>> = (0..r).map(|_| (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let column = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let mut u = vec![0.0; m];
        for (k, b) in basis.iter().enumerate() {
            let c = rng.gen_range(-1.0..1.0) / (k + 1) as f64;
            for (x, y) in u.iter_mut().zip(b) {
                *x += c * y;
            }
        }
        u.iter_mut().for_each(|x| *x += 1e-10 * rng.gen_range(-1.0..1.0));
        u
    };

    let mut cols = vec![column(&mut rng)];
    let mut state = IsvdState::new(&cols[0], tol)?;
    let mut kinds = [0usize; 3];
    for _ in 1..n {
        let u = column(&mut rng);
        let kind = state.update(&u)?.kind;
        kinds[kind as usize] += 1;
        cols.push(u);
    }
    let worst = (0..n)
        .map(|j| Ok(dist2(&state.reconstruct_column(j)?, &cols[j]) / norm2(&cols[j])))
        .collect::<nonfickian_isvd::Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    println!("columns {n}, rows {m}, tol {tol:e}");
    println!(
        "rank {}  buffered {}  (updates: buffered {}, grew {}, truncated {})",
        state.rank(),
        state.pending(),
        kinds[UpdateKind::Buffered as usize],
        kinds[UpdateKind::Grew as usize],
        kinds[UpdateKind::Truncated as usize]
    );
    println!("orthogonality defect of Q: {:.2e}", state.q().orthogonality_defect());
    println!("worst relative column reconstruction error: {worst:.2e}");
    println!("bytes: compressed {}  dense {}", state.history_bytes(), 8 * m * n);

    state.flush()?;
    let batch = svd_dense(&DenseMatrix::from_columns(&cols)?, SvdMode::Thin)?;
    println!("after flushing the buffer:");
    println!("k  sigma(isvd)              sigma(batch)");
    for (k, s) in state.sigma().iter().enumerate() {
        println!("{k}  {s:<24.16e} {:.16e}", batch.s[k]);
    }
    Ok(())
}
