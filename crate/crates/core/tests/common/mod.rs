#![allow(dead_code)]

use emonet_core::graph::SemanticNetwork;
use emonet_core::ingest::{RatingRecord, Session, Task, REPEATS};
use emonet_core::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Brute-force sample Pearson correlation.
pub fn pearson_oracle(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

/// Complete session: 20 normal questions over fixed word pairs with
/// scores `first`, two catch trials, then repeats with scores `second`.
pub fn session(
    id: &str,
    first: &[u8],
    second: &[u8],
    catches: [(u8, u8); 2],
) -> Session {
    assert_eq!(first.len(), REPEATS);
    assert_eq!(second.len(), REPEATS);
    let mut records = Vec::new();
    let mut order = 0u32;
    for (q, &s) in first.iter().enumerate() {
        let (a, b) = (q % 48, (q + 1 + q / 48) % 48);
        records.push(RatingRecord::normal(order, a, b, s));
        order += 1;
        if q == 5 || q == 12 {
            let (target, score) = catches[usize::from(q == 12)];
            records.push(RatingRecord::catch(order, target, score));
            order += 1;
        }
    }
    let normals: Vec<_> = records
        .iter()
        .filter_map(|r| match r.kind {
            emonet_core::ingest::RecordKind::Normal { word_a, word_b } => {
                Some((r.order, word_a, word_b))
            }
            _ => None,
        })
        .collect();
    for (&(of, a, b), &s) in normals.iter().zip(second) {
        records.push(RatingRecord::repeat(order, a, b, of, s));
        order += 1;
    }
    Session::new(id, Task::Similarity, records)
}

/// Twenty first-pass scores and a second pass whose oracle correlation
/// rounds to `target` at two decimals.
pub fn passes_with_r(target: f64) -> (Vec<u8>, Vec<u8>) {
    let first: Vec<u8> = (0..REPEATS).map(|i| ((i * 3) % 8) as u8).collect();
    let fx: Vec<f64> = first.iter().map(|&v| v as f64).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1_000_000 {
        let second: Vec<u8> = first
            .iter()
            .map(|&v| {
                if rng.random_bool(0.5) {
                    v
                } else {
                    rng.random_range(0..=7)
                }
            })
            .collect();
        let fy: Vec<f64> = second.iter().map(|&v| v as f64).collect();
        let r = pearson_oracle(&fx, &fy);
        if (r * 100.0).round() == (target * 100.0).round() {
            return (first, second);
        }
    }
    panic!("no second pass found with r ≈ {target}");
}

/// Network with uniform random weights in [0, e_max].
pub fn random_network(n: usize, seed: u64) -> SemanticNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            rng.random_range(0.0..=7.0)
        }
    });
    SemanticNetwork::unlabeled(w, 7.0).unwrap()
}

/// Solves `a·x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            let (upper, lower) = a.split_at_mut(row);
            for (x, &p) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *x -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}
