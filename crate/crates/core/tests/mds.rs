use emonet_core::mds::{classical_mds, pairwise_distances, symmetric_eigen};
use emonet_core::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn rectangle_corners_round_trip() {
    let corners = Matrix::from_rows(&[
        vec![0.0, 0.0],
        vec![3.0, 0.0],
        vec![3.0, 4.0],
        vec![0.0, 4.0],
    ])
    .unwrap();
    let d = pairwise_distances(&corners);
    assert_eq!(d[(0, 2)], 5.0);
    let layout = classical_mds(&d, 2).unwrap();
    assert!(max_abs_diff(&pairwise_distances(&layout.coords), &d) < 1e-6);
    assert!((layout.stress_note - 1.0).abs() < 1e-9);
    assert!(layout.eigenvalues[0] >= layout.eigenvalues[1]);
}

#[test]
fn permuted_input_gives_rigidly_equivalent_layout() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let points = Matrix::from_fn(12, 2, |_, _| rng.random_range(-5.0..5.0));
    let d = pairwise_distances(&points);
    let perm = [5, 2, 11, 0, 7, 1, 9, 3, 10, 4, 8, 6];
    let base = pairwise_distances(&classical_mds(&d, 2).unwrap().coords);
    let moved = pairwise_distances(&classical_mds(&d.permuted(&perm), 2).unwrap().coords);
    assert!(max_abs_diff(&moved, &base.permuted(&perm)) < 1e-9);
}

#[test]
fn planar_points_recovered() {
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(3..30);
        let points = Matrix::from_fn(n, 2, |_, _| rng.random_range(-10.0..10.0));
        let d = pairwise_distances(&points);
        let layout = classical_mds(&d, 2).unwrap();
        assert!(max_abs_diff(&pairwise_distances(&layout.coords), &d) < 1e-6);
    }
}

#[test]
fn jacobi_reconstruction_is_tight() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in [1usize, 2, 5, 17, 48] {
        let raw = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let sym = Matrix::from_fn(n, n, |i, j| raw[(i, j)] + raw[(j, i)]);
        let (vals, vecs) = symmetric_eigen(&sym).unwrap();
        let rebuilt = Matrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| vecs[(i, k)] * vals[k] * vecs[(j, k)]).sum()
        });
        let err: f64 = sym
            .as_slice()
            .iter()
            .zip(rebuilt.as_slice())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let norm: f64 = sym.as_slice().iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!(err <= 1e-9 * norm, "n = {n}: {err}");
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
    }
}

#[test]
fn sign_convention_is_deterministic() {
    let corners = Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![5.0, 1.0]]).unwrap();
    let layout = classical_mds(&pairwise_distances(&corners), 2).unwrap();
    for c in 0..2 {
        let col: Vec<f64> = (0..3).map(|r| layout.coords[(r, c)]).collect();
        let pivot = col
            .iter()
            .copied()
            .fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        assert!(pivot >= 0.0);
    }
}
