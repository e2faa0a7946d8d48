mod common;

use emonet_core::graph::{MarkovModel, SemanticNetwork};
use emonet_core::mdmc::{
    alpha_sweep, decompose, decompose_best, decompose_from, initial_components, DecomposeConfig,
    EmRun,
};
use emonet_core::Matrix;

fn cliques(damping: f64) -> MarkovModel {
    let w = Matrix::from_fn(6, 6, |i, j| if i != j && i / 3 == j / 3 { 7.0 } else { 0.0 });
    MarkovModel::build(&SemanticNetwork::unlabeled(w, 7.0).unwrap(), damping).unwrap()
}

fn cfg(k_max: usize, alpha: f64, seed: u64) -> DecomposeConfig {
    DecomposeConfig {
        k_max,
        alpha,
        seed,
        ..Default::default()
    }
}

fn words(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("w{i}")).collect()
}

#[test]
fn normalized_at_every_iteration() {
    for (n, seed) in [(8usize, 1u64), (20, 2), (48, 3)] {
        let model = MarkovModel::build(&common::random_network(n, seed), 0.15).unwrap();
        for (k, alpha) in [(1usize, 0.001), (4, 0.1), (10, 0.001), (10, 1.0)] {
            let mut run = EmRun::new(&model, &cfg(k, alpha, seed)).unwrap();
            for _ in 0..300 {
                run.step();
                let pi = run.pi();
                assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                for c in (0..k).filter(|&c| pi[c] > 0.0) {
                    let row = run.components().row(c);
                    assert!(row.iter().all(|&v| v >= 0.0));
                    assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                }
            }
        }
    }
}

#[test]
fn deterministic_for_fixed_seed() {
    let model = MarkovModel::build(&common::random_network(16, 4), 0.15).unwrap();
    let a = decompose(&model, &cfg(10, 0.001, 9)).unwrap();
    let b = decompose(&model, &cfg(10, 0.001, 9)).unwrap();
    assert_eq!(a, b);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn node_permutation_permutes_components() {
    let model = cliques(0.15);
    let perm = [4, 0, 5, 2, 1, 3];
    let net = SemanticNetwork::unlabeled(
        Matrix::from_fn(6, 6, |i, j| if i != j && i / 3 == j / 3 { 7.0 } else { 0.0 }),
        7.0,
    )
    .unwrap();
    let permuted = MarkovModel::build(&net.permuted(&perm), 0.15).unwrap();
    let c = cfg(4, 0.001, 5);
    let init = initial_components(4, 6, 5);
    let init_perm = Matrix::from_fn(4, 6, |k, a| init[(k, perm[a])]);
    let base = decompose_from(&model, &c, init).unwrap();
    let moved = decompose_from(&permuted, &c, init_perm).unwrap();
    for k in 0..4 {
        assert!((base.pi[k] - moved.pi[k]).abs() < 1e-9);
        for (a, &from) in perm.iter().enumerate() {
            assert!((moved.p_given_k[(k, a)] - base.p_given_k[(k, from)]).abs() < 1e-9);
        }
    }
}

#[test]
fn disconnected_cliques_recovered_for_every_seed() {
    let model = cliques(0.15);
    for seed in 0..10 {
        let dec = decompose(&model, &cfg(4, 0.001, seed)).unwrap();
        assert_eq!(dec.active_count(1e-6), 2);
        let labels: Vec<usize> = dec.hard_assign().iter().map(|(_, l)| l).collect();
        assert!(labels[..3].iter().all(|&l| l == labels[0]));
        assert!(labels[3..].iter().all(|&l| l == labels[3]));
        assert_ne!(labels[0], labels[3]);
        // teleporting sends 7.5% of each node's flow across, so memberships stay soft
        let post = dec.posterior().unwrap();
        for i in 0..6 {
            assert!(post[(labels[i], i)] > 0.9);
        }
    }
}

#[test]
fn uniform_graph_with_large_alpha_has_one_community() {
    let net = SemanticNetwork::unlabeled(Matrix::filled(12, 12, 4.0), 7.0).unwrap();
    let model = MarkovModel::build(&net, 0.15).unwrap();
    for seed in 0..10 {
        let dec = decompose(&model, &cfg(10, 2.0, seed)).unwrap();
        assert_eq!(dec.active_count(1e-6), 1);
    }
}

#[test]
fn posterior_is_bayes_consistent() {
    let model = MarkovModel::build(&common::random_network(12, 8), 0.15).unwrap();
    let dec = decompose(&model, &cfg(5, 0.001, 1)).unwrap();
    let post = dec.posterior().unwrap();
    for i in 0..12 {
        let total: f64 = (0..5).map(|k| post[(k, i)]).sum();
        let bound = dec.residual() / dec.stationary[i] + 1e-12;
        assert!((total - 1.0).abs() <= bound);
        for k in 0..5 {
            let lhs = post[(k, i)] * dec.stationary[i];
            let rhs = dec.p_given_k[(k, i)] * dec.pi[k];
            assert!((lhs - rhs).abs() <= 1e-15 * rhs.abs().max(1e-300));
        }
    }
}

#[test]
fn posterior_rejects_zero_stationary_mass() {
    // node 2 only sends, so without teleporting nothing ever reaches it
    let w = Matrix::from_rows(&[
        vec![0.0, 7.0, 0.0],
        vec![7.0, 0.0, 0.0],
        vec![7.0, 7.0, 0.0],
    ])
    .unwrap();
    let model = MarkovModel::build(&SemanticNetwork::unlabeled(w, 7.0).unwrap(), 0.0).unwrap();
    assert_eq!(model.p[2], 0.0);
    let dec = decompose(&model, &cfg(2, 0.001, 0)).unwrap();
    assert!(dec.posterior().is_err());
}

#[test]
fn omega_single_community() {
    let model = MarkovModel::build(&common::random_network(9, 2), 0.15).unwrap();
    let dec = decompose(&model, &cfg(1, 0.001, 0)).unwrap();
    let cn = dec.omega(&model, &words(9));
    let expected = dec.pi[0].powi(2) * model.t.bilinear(dec.p_given_k.row(0), dec.p_given_k.row(0));
    assert_eq!(cn.len(), 1);
    assert!((cn.omega[(0, 0)] - expected).abs() < 1e-15);
}

#[test]
fn omega_conserves_mass() {
    for seed in 0..5 {
        let model = MarkovModel::build(&common::random_network(15, seed), 0.15).unwrap();
        let dec = decompose(&model, &cfg(6, 0.001, seed)).unwrap();
        let mix = dec.mixture();
        let cn = dec.omega(&model, &words(15));
        assert!((cn.total() - model.t.bilinear(&mix, &mix)).abs() <= 1e-9);
        assert!(cn.omega.as_slice().iter().all(|&v| v >= 0.0));
    }
}

#[test]
fn omega_separates_disconnected_cliques() {
    let model = cliques(0.0);
    let dec = decompose(&model, &cfg(4, 0.001, 3)).unwrap();
    let cn = dec.omega(&model, &words(6));
    assert_eq!(cn.len(), 2);
    assert!(cn.omega[(0, 1)].abs() < 1e-9 && cn.omega[(1, 0)].abs() < 1e-9);
    // each community holds half the mass spread evenly over its clique,
    // and the walk stays inside: Ω_kk = 3 · (1/6) · (1/6)
    for a in 0..2 {
        let k = cn.communities[a];
        let scale = 4.0 * dec.pi[k] * dec.pi[k];
        assert!((cn.omega[(a, a)] - scale / 12.0).abs() < 1e-6, "{:?}", cn.omega);
    }
    assert_eq!(cn.labels[0].len(), 2);
}

#[test]
fn sweep_rows_follow_input_order() {
    let model = cliques(0.15);
    let alphas = [0.001, 0.01, 0.1, 1.0];
    let seeds = [0, 1, 2];
    let rows = alpha_sweep(&model, &cfg(4, 0.001, 0), &alphas, &seeds).unwrap();
    assert_eq!(rows.len(), 12);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.alpha, alphas[i / 3]);
        assert_eq!(row.seed, seeds[i % 3]);
        assert!((1..=2).contains(&row.active_count));
        assert_eq!(row.labels.len(), 6);
    }
}

#[test]
fn best_of_seeds_picks_smallest_residual() {
    let model = MarkovModel::build(&common::random_network(10, 6), 0.15).unwrap();
    let (best, runs) = decompose_best(&model, &cfg(4, 0.001, 0), &[3, 1, 4, 1, 5]).unwrap();
    assert_eq!(runs.len(), 5);
    let min = runs.iter().map(|r| r.residual).fold(f64::INFINITY, f64::min);
    assert_eq!(best.residual(), min);
    let first = runs.iter().find(|r| r.residual == min).unwrap();
    assert_eq!(best.config.seed, first.seed);
}
