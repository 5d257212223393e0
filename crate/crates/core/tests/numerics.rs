use mdi_core::numerics::{
    dot, norm_sq, sample_folded_normal, sample_normal, spd_solve, sym_eigenvalues, Matrix, RngStream,
};
use mdi_core::Error;
use proptest::prelude::*;

/// Number of eigenvalues of `a` below `x`, from the inertia of `a − xI`
/// (count of negative pivots in an unpivoted LDLᵀ).
#[allow(clippy::needless_range_loop)]
fn count_below(a: &Matrix, x: f64) -> usize {
    let n = a.rows();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| a[(i, j)] - if i == j { x } else { 0.0 }).collect())
        .collect();
    let mut negative = 0;
    for k in 0..n {
        let mut p = m[k][k];
        if p == 0.0 {
            p = -1e-300;
        }
        if p < 0.0 {
            negative += 1;
        }
        for i in k + 1..n {
            let f = m[i][k] / p;
            for j in k + 1..n {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    negative
}

/// Eigenvalues by bisection on the inertia count.
fn bisection_eigenvalues(a: &Matrix) -> Vec<f64> {
    let n = a.rows();
    let bound = (0..n)
        .map(|i| (0..n).map(|j| a[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
        + 1.0;
    (0..n)
        .map(|k| {
            let (mut lo, mut hi) = (-bound, bound);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if count_below(a, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

fn random_matrix(stream: RngStream, rows: usize, cols: usize) -> Matrix {
    Matrix::from_vec(rows, cols, sample_normal(stream, rows * cols, 0.0, 1.0)).unwrap()
}

/// Orthonormal columns by modified Gram-Schmidt on a random square matrix.
fn random_orthogonal(stream: RngStream, n: usize) -> Matrix {
    let a = random_matrix(stream, n, n);
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for j in 0..n {
        let mut v = a.column(j);
        for q in &cols {
            let c = dot(q, &v);
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= c * qi;
            }
        }
        let norm = norm_sq(&v).sqrt();
        cols.push(v.into_iter().map(|x| x / norm).collect());
    }
    Matrix::from_fn(n, n, |i, j| cols[j][i])
}

#[test]
fn eigenvalues_of_gram_match_bisection_oracle() {
    for seed in 0..50 {
        let a = random_matrix(RngStream::new(11, seed), 6, 6).gram();
        let got = sym_eigenvalues(&a).unwrap();
        let want = bisection_eigenvalues(&a);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-8, "seed {seed}: {got:?} vs {want:?}");
        }
    }
}

#[test]
fn eigenvalues_of_psd_are_nonnegative() {
    for seed in 0..20 {
        // 8×8 Gram of rank 3
        let a = random_matrix(RngStream::new(12, seed), 3, 8).gram();
        let scale = a.frobenius_norm();
        for v in sym_eigenvalues(&a).unwrap() {
            assert!(v >= -1e-9 * scale);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn eigen_recovers_constructed_spectrum(
        seed in any::<u64>(),
        diag in prop::collection::vec(-50.0f64..50.0, 1..24),
    ) {
        let n = diag.len();
        let q = random_orthogonal(RngStream::new(seed, 0), n);
        let a = q.transpose().matmul(&Matrix::from_diagonal(&diag)).matmul(&q);
        let a = Matrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
        let got = sym_eigenvalues(&a).unwrap();
        let mut want = diag.clone();
        want.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() < 1e-8, "{:?} vs {:?}", got, want);
        }
    }

    #[test]
    fn spd_solve_residual(seed in any::<u64>(), n in 1usize..=128) {
        let b = random_matrix(RngStream::new(seed, 1), n + 4, n);
        let mut a = b.gram();
        a.add_diagonal(0.1);
        let rhs = sample_normal(RngStream::new(seed, 2), n, 0.0, 1.0);
        let x = spd_solve(&a, &rhs).unwrap();
        let r: Vec<f64> = a.matvec(&x).iter().zip(&rhs).map(|(p, q)| p - q).collect();
        prop_assert!(norm_sq(&r).sqrt() <= 1e-8 * norm_sq(&rhs).sqrt());
    }

    #[test]
    fn normal_samples_replay(seed in any::<u64>(), id in any::<u64>(), n in 0usize..64) {
        let s = RngStream::new(seed, id);
        prop_assert_eq!(sample_normal(s, n, 1.0, 2.0), sample_normal(s, n, 1.0, 2.0));
        prop_assert!(sample_folded_normal(s, n, 0.5).iter().all(|&v| v >= 0.0));
    }
}

#[test]
fn spd_examples() {
    let b = vec![3.0, -1.0, 2.5];
    assert_eq!(spd_solve(&Matrix::identity(3), &b).unwrap(), b);
    let a = Matrix::from_diagonal(&[4.0, 4.0]);
    assert_eq!(spd_solve(&a, &[8.0, 4.0]).unwrap(), vec![2.0, 1.0]);
    let singular = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
    assert!(matches!(spd_solve(&singular, &[1.0, 1.0]), Err(Error::Singular { .. })));
}

#[test]
fn eigen_rejects_bad_input() {
    assert!(matches!(sym_eigenvalues(&Matrix::zeros(2, 3)), Err(Error::Dimension(_))));
    let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
    assert!(matches!(sym_eigenvalues(&a), Err(Error::Dimension(_))));
}

#[test]
fn normal_sample_moments() {
    let n = 100_000;
    let v = sample_normal(RngStream::new(5, 0), n, 0.0, 1.0);
    let mean = v.iter().sum::<f64>() / n as f64;
    let std = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    assert!(mean.abs() < 0.02, "mean {mean}");
    assert!((std - 1.0).abs() < 0.02, "std {std}");
    assert!(sample_normal(RngStream::new(5, 1), 10, 3.5, 0.0).iter().all(|&x| x == 3.5));
}

#[test]
fn disjoint_streams_are_uncorrelated() {
    let n = 100_000;
    for (a, b) in [(0, 1), (1, 2), (0, 1 << 40), (7, 8)] {
        let x = sample_normal(RngStream::new(9, a), n, 0.0, 1.0);
        let y = sample_normal(RngStream::new(9, b), n, 0.0, 1.0);
        let (mx, my) = (x.iter().sum::<f64>() / n as f64, y.iter().sum::<f64>() / n as f64);
        let cov: f64 = x.iter().zip(&y).map(|(p, q)| (p - mx) * (q - my)).sum();
        let vx: f64 = x.iter().map(|p| (p - mx).powi(2)).sum();
        let vy: f64 = y.iter().map(|q| (q - my).powi(2)).sum();
        let corr = cov / (vx * vy).sqrt();
        assert!(corr.abs() < 0.01, "streams {a},{b}: corr {corr}");
    }
    let m = RngStream::new(9, 0);
    let x = sample_normal(m.child(0), n, 0.0, 1.0);
    let y = sample_normal(m.child(1), n, 0.0, 1.0);
    assert!(dot(&x, &y).abs() / (n as f64) < 0.01);
}
