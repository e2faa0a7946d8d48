//! Weighted semantic networks, the PageRank transition matrix, its
//! stationary distribution and the symmetric dissimilarity matrix.
//!
//! Transition matrices are column-stochastic: `t[(i, j)]` is the
//! probability of stepping from node `j` to node `i`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const DEFAULT_DAMPING: f64 = 0.15;
pub const STATIONARY_TOL: f64 = 1e-12;
pub const STATIONARY_MAX_ITER: usize = 10_000;

/// Directed network; `weights[(i, j)]` is the mean score of the edge i → j.
/// The diagonal is never read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkJson")]
pub struct SemanticNetwork {
    words: Vec<String>,
    e_max: f64,
    weights: Matrix,
}

#[derive(Deserialize)]
struct NetworkJson {
    words: Vec<String>,
    e_max: f64,
    weights: Matrix,
}

impl TryFrom<NetworkJson> for SemanticNetwork {
    type Error = Error;

    fn try_from(j: NetworkJson) -> Result<Self> {
        Self::new(j.words, j.weights, j.e_max)
    }
}

impl SemanticNetwork {
    pub fn new(words: Vec<String>, weights: Matrix, e_max: f64) -> Result<Self> {
        if !weights.is_square() || weights.rows() != words.len() {
            return Err(Error::invalid(format!(
                "weights are {}x{} for {} words",
                weights.rows(),
                weights.cols(),
                words.len()
            )));
        }
        if !(e_max.is_finite() && e_max > 0.0) {
            return Err(Error::invalid(format!("e_max must be positive, got {e_max}")));
        }
        let n = words.len();
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i) {
                let w = weights[(i, j)];
                if !(0.0..=e_max).contains(&w) {
                    return Err(Error::invalid(format!(
                        "weight {w} on {} -> {} outside [0, {e_max}]",
                        words[i], words[j]
                    )));
                }
            }
        }
        Ok(Self {
            words,
            e_max,
            weights,
        })
    }

    /// Nodes labelled `0..n`.
    pub fn unlabeled(weights: Matrix, e_max: f64) -> Result<Self> {
        let words = (0..weights.rows()).map(|i| i.to_string()).collect();
        Self::new(words, weights, e_max)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn e_max(&self) -> f64 {
        self.e_max
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn weight(&self, from: usize, to: usize) -> f64 {
        self.weights[(from, to)]
    }

    /// Sum of outgoing weights, diagonal excluded.
    pub fn out_strength(&self, node: usize) -> f64 {
        self.weights
            .row(node)
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != node)
            .map(|(_, w)| w)
            .sum()
    }

    /// Nodes and weights reordered so that new node `a` is old node `perm[a]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            words: perm.iter().map(|&i| self.words[i].clone()).collect(),
            e_max: self.e_max,
            weights: self.weights.permuted(perm),
        }
    }
}

/// PageRank transition: `t[(i, j)] = (1 - damping)·w(j→i)/out(j) + damping/N`.
/// Columns of nodes without outgoing weight are uniform.
pub fn transition_matrix(net: &SemanticNetwork, damping: f64) -> Result<Matrix> {
    if !(0.0..=1.0).contains(&damping) {
        return Err(Error::invalid(format!("damping {damping} outside [0, 1]")));
    }
    let n = net.len();
    if n == 0 {
        return Err(Error::Empty("network has no nodes".into()));
    }
    let uniform = 1.0 / n as f64;
    let mut t = Matrix::zeros(n, n);
    for j in 0..n {
        let out = net.out_strength(j);
        for i in 0..n {
            t[(i, j)] = if out > 0.0 {
                let w = if i == j { 0.0 } else { net.weight(j, i) };
                (1.0 - damping) * w / out + damping * uniform
            } else {
                uniform
            };
        }
    }
    Ok(t)
}

/// Power iteration `p ← t·p` from the uniform distribution until the L1
/// change drops below `tol`.
pub fn stationary(t: &Matrix, tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = t.rows();
    if n == 0 || !t.is_square() {
        return Err(Error::invalid("transition matrix must be square and nonempty"));
    }
    let mut p = vec![1.0 / n as f64; n];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let mut next = t.mul_vec(&p);
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        residual = next.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum();
        p = next;
        if residual < tol {
            return Ok(p);
        }
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        residual,
    })
}

/// Transition matrix together with its stationary distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovModel {
    pub t: Matrix,
    pub p: Vec<f64>,
    pub damping: f64,
}

impl MarkovModel {
    pub fn build(net: &SemanticNetwork, damping: f64) -> Result<Self> {
        let t = transition_matrix(net, damping)?;
        let p = stationary(&t, STATIONARY_TOL, STATIONARY_MAX_ITER)?;
        Ok(Self { t, p, damping })
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

/// `d[(i, j)] = e_max − (w(i→j) + w(j→i))/2`, zero diagonal.
pub fn dissimilarity(net: &SemanticNetwork) -> Matrix {
    let n = net.len();
    Matrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            net.e_max() - (net.weight(i, j) + net.weight(j, i)) / 2.0
        }
    })
}
