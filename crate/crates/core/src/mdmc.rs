//! Modular decomposition of a Markov chain: the stationary distribution is
//! split into community components, `p(i) = Σ_k π(k)·p(i|k)`.
//!
//! The components are fit by EM to the symmetrized probability flow of the
//! walk, `S_ij = (t_ij·p_j + t_ji·p_i)/2`, modelled as the mixture
//! `S_ij ≈ Σ_k π(k)·p(i|k)·p(j|k)`: two nodes belong together when the
//! walk moves between them often. Since `Σ_j S_ij = p(i)` the row marginal
//! of the fitted mixture is exactly the decomposition of `p(i)`.
//!
//! One EM iteration, with `A_k(i) = π(k)·p(i|k)`:
//!
//! ```text
//! n_k(i) = A_k(i) · Σ_j S_ij · p(j|k) / Σ_l A_l(i)·p(j|l)
//! D_k    = Σ_i n_k(i)
//! π'(k)  ∝ max(D_k − λ, 0)        p'(i|k) = n_k(i) / D_k
//! ```
//!
//! The resolution parameter α enters as the per-community cost λ: a
//! community has to attract more than λ of the flow to survive, so smaller
//! α keeps more and smaller communities. λ ramps linearly from 0 to α over
//! the first [`RESOLUTION_WARMUP`] iterations so that components can
//! separate before the cost starts removing them. Removed components have
//! π = 0 and an all-zero row and never return. If every surviving
//! component falls below λ at once, the one with the largest `D_k` is kept.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::MarkovModel;
use crate::lexicon::Partition;
use crate::matrix::Matrix;

/// Iterations over which the community cost ramps up to α.
pub const RESOLUTION_WARMUP: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecomposeConfig {
    pub k_max: usize,
    pub alpha: f64,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
    /// Communities with π above this are active.
    pub prune_eps: f64,
}

impl Default for DecomposeConfig {
    fn default() -> Self {
        Self {
            k_max: 10,
            alpha: 0.001,
            seed: 0,
            tol: 1e-10,
            max_iter: 5000,
            prune_eps: 1e-6,
        }
    }
}

impl DecomposeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_max == 0 {
            return Err(Error::invalid("k_max must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::invalid(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.prune_eps > 0.0 && self.prune_eps < 1.0) {
            return Err(Error::invalid(format!(
                "prune_eps must be in (0, 1), got {}",
                self.prune_eps
            )));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::invalid("tol must be positive"));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self { alpha, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub pi: Vec<f64>,
    /// K×N; row k is p(·|k), all zeros for removed components.
    pub p_given_k: Matrix,
    pub stationary: Vec<f64>,
    pub config: DecomposeConfig,
    pub converged: bool,
    pub iterations: usize,
}

/// K rows drawn from the flat Dirichlet over N nodes.
pub fn initial_components(k: usize, n: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = Matrix::zeros(k, n);
    for c in 0..k {
        let row = m.row_mut(c);
        for v in row.iter_mut() {
            *v = Exp1.sample(&mut rng);
        }
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= total);
    }
    m
}

/// Stepwise EM state, for callers that inspect every iteration.
#[derive(Debug, Clone)]
pub struct EmRun {
    flow: Matrix,
    stationary: Vec<f64>,
    pi: Vec<f64>,
    comp: Matrix,
    cfg: DecomposeConfig,
    iteration: usize,
}

impl EmRun {
    pub fn new(model: &MarkovModel, cfg: &DecomposeConfig) -> Result<Self> {
        let init = initial_components(cfg.k_max, model.len(), cfg.seed);
        Self::with_components(model, cfg, init)
    }

    /// Starts from the given K×N rows (each normalized to sum 1).
    pub fn with_components(model: &MarkovModel, cfg: &DecomposeConfig, init: Matrix) -> Result<Self> {
        cfg.validate()?;
        let n = model.len();
        if n == 0 || model.t.rows() != n || !model.t.is_square() {
            return Err(Error::invalid("transition matrix and stationary vector disagree"));
        }
        if init.rows() != cfg.k_max || init.cols() != n {
            return Err(Error::invalid(format!(
                "initial components are {}x{}, expected {}x{n}",
                init.rows(),
                init.cols(),
                cfg.k_max
            )));
        }
        let flow = Matrix::from_fn(n, n, |i, j| {
            (model.t[(i, j)] * model.p[j] + model.t[(j, i)] * model.p[i]) / 2.0
        });
        Ok(Self {
            flow,
            stationary: model.p.clone(),
            pi: vec![1.0 / cfg.k_max as f64; cfg.k_max],
            comp: init,
            cfg: cfg.clone(),
            iteration: 0,
        })
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn components(&self) -> &Matrix {
        &self.comp
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    fn cost(&self) -> f64 {
        let ramp = ((self.iteration + 1) as f64 / RESOLUTION_WARMUP as f64).min(1.0);
        self.cfg.alpha * ramp
    }

    /// One EM update; returns the largest absolute parameter change.
    pub fn step(&mut self) -> f64 {
        let n = self.stationary.len();
        let alive: Vec<usize> = (0..self.pi.len()).filter(|&k| self.pi[k] > 0.0).collect();
        let weighted: Vec<Vec<f64>> = alive
            .iter()
            .map(|&k| self.comp.row(k).iter().map(|v| v * self.pi[k]).collect())
            .collect();

        let mut counts = Matrix::zeros(alive.len(), n);
        let mut ratio = vec![0.0; n];
        for i in 0..n {
            ratio.iter_mut().for_each(|r| *r = 0.0);
            for (&k, a) in alive.iter().zip(&weighted) {
                let ai = a[i];
                for (r, p) in ratio.iter_mut().zip(self.comp.row(k)) {
                    *r += ai * p;
                }
            }
            for (r, s) in ratio.iter_mut().zip(self.flow.row(i)) {
                *r = if *r > 0.0 { s / *r } else { 0.0 };
            }
            for (c, (&k, a)) in alive.iter().zip(&weighted).enumerate() {
                if a[i] == 0.0 {
                    continue;
                }
                let inner: f64 = self.comp.row(k).iter().zip(&ratio).map(|(p, r)| p * r).sum();
                counts[(c, i)] = a[i] * inner;
            }
        }

        let mass: Vec<f64> = (0..alive.len()).map(|c| counts.row(c).iter().sum()).collect();
        let cost = self.cost();
        let mut keep: Vec<f64> = mass.iter().map(|d| (d - cost).max(0.0)).collect();
        if keep.iter().all(|&w| w == 0.0) {
            let mut best = 0;
            for c in 1..mass.len() {
                if mass[c] > mass[best] {
                    best = c;
                }
            }
            keep[best] = mass[best];
        }
        let total: f64 = keep.iter().sum();

        let mut pi = vec![0.0; self.pi.len()];
        let mut comp = Matrix::zeros(self.comp.rows(), n);
        for (c, &k) in alive.iter().enumerate() {
            if keep[c] <= 0.0 {
                continue;
            }
            pi[k] = keep[c] / total;
            let row = comp.row_mut(k);
            for (v, x) in row.iter_mut().zip(counts.row(c)) {
                *v = x / mass[c];
            }
        }

        let change = self
            .pi
            .iter()
            .zip(&pi)
            .chain(self.comp.as_slice().iter().zip(comp.as_slice()))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        self.pi = pi;
        self.comp = comp;
        self.iteration += 1;
        change
    }

    /// Steps until the change falls below `tol` (after the warm-up) or the
    /// iteration cap is reached.
    pub fn run(mut self) -> Decomposition {
        let mut converged = false;
        while self.iteration < self.cfg.max_iter {
            let change = self.step();
            if change < self.cfg.tol && self.iteration >= RESOLUTION_WARMUP {
                converged = true;
                break;
            }
        }
        self.finish(converged)
    }

    pub fn finish(self, converged: bool) -> Decomposition {
        Decomposition {
            pi: self.pi,
            p_given_k: self.comp,
            stationary: self.stationary,
            config: self.cfg,
            converged,
            iterations: self.iteration,
        }
    }
}

pub fn decompose(model: &MarkovModel, cfg: &DecomposeConfig) -> Result<Decomposition> {
    Ok(EmRun::new(model, cfg)?.run())
}

/// Like [`decompose`] but starting from explicit initial components.
pub fn decompose_from(model: &MarkovModel, cfg: &DecomposeConfig, init: Matrix) -> Result<Decomposition> {
    Ok(EmRun::with_components(model, cfg, init)?.run())
}

impl Decomposition {
    pub fn k(&self) -> usize {
        self.pi.len()
    }

    /// `p̂(i) = Σ_k π(k)·p(i|k)`.
    pub fn mixture(&self) -> Vec<f64> {
        let n = self.stationary.len();
        (0..n)
            .map(|i| (0..self.k()).map(|k| self.pi[k] * self.p_given_k[(k, i)]).sum())
            .collect()
    }

    /// `max_i |p(i) − p̂(i)|`.
    pub fn residual(&self) -> f64 {
        self.mixture()
            .iter()
            .zip(&self.stationary)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Indices of components with π above `prune_eps`.
    pub fn active(&self, prune_eps: f64) -> Vec<usize> {
        (0..self.k()).filter(|&k| self.pi[k] > prune_eps).collect()
    }

    pub fn active_count(&self, prune_eps: f64) -> usize {
        self.active(prune_eps).len()
    }

    /// K×N matrix of `p(k|i) = p(i|k)·π(k)/p(i)`.
    pub fn posterior(&self) -> Result<Matrix> {
        if let Some(i) = self.stationary.iter().position(|&p| p <= 0.0) {
            return Err(Error::invalid(format!(
                "stationary probability of node {i} is zero"
            )));
        }
        Ok(Matrix::from_fn(self.k(), self.stationary.len(), |k, i| {
            self.p_given_k[(k, i)] * self.pi[k] / self.stationary[i]
        }))
    }

    /// `argmax_k p(k|i)` per node, ties toward the smaller k. Compares
    /// `π(k)·p(i|k)`, which has the same argmax and needs no division.
    pub fn hard_assign(&self) -> Partition {
        let labels: Vec<usize> = (0..self.stationary.len())
            .map(|i| {
                let mut best = 0;
                let mut best_v = f64::NEG_INFINITY;
                for k in 0..self.k() {
                    let v = self.pi[k] * self.p_given_k[(k, i)];
                    if v > best_v {
                        best = k;
                        best_v = v;
                    }
                }
                best
            })
            .collect();
        Partition::from_labels(&labels)
    }

    /// Connection strengths between active communities through the walk.
    pub fn omega(&self, model: &MarkovModel, words: &[String]) -> CommunityNetwork {
        let active = self.active(self.config.prune_eps);
        let weighted: Vec<Vec<f64>> = active
            .iter()
            .map(|&k| self.p_given_k.row(k).iter().map(|v| v * self.pi[k]).collect())
            .collect();
        let m = active.len();
        let omega = Matrix::from_fn(m, m, |to, from| model.t.bilinear(&weighted[to], &weighted[from]));
        let labels = active
            .iter()
            .map(|&k| {
                let mut order: Vec<usize> = (0..self.stationary.len()).collect();
                order.sort_by(|&a, &b| {
                    self.p_given_k[(k, b)]
                        .total_cmp(&self.p_given_k[(k, a)])
                        .then(a.cmp(&b))
                });
                order.iter().take(2).map(|&i| words[i].clone()).collect()
            })
            .collect();
        CommunityNetwork {
            communities: active,
            omega,
            labels,
        }
    }
}

/// Inter-community network: `omega[(a, b)]` is the strength of the
/// connection from community `communities[b]` to `communities[a]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityNetwork {
    pub communities: Vec<usize>,
    pub omega: Matrix,
    /// Top two words by p(i|k) per community.
    pub labels: Vec<Vec<String>>,
}

impl CommunityNetwork {
    pub fn len(&self) -> usize {
        self.communities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.communities.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.omega.as_slice().iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub residual: f64,
    pub active_count: usize,
    pub converged: bool,
    pub iterations: usize,
}

impl RunSummary {
    fn of(dec: &Decomposition) -> Self {
        Self {
            seed: dec.config.seed,
            residual: dec.residual(),
            active_count: dec.active_count(dec.config.prune_eps),
            converged: dec.converged,
            iterations: dec.iterations,
        }
    }
}

/// Runs every seed (in parallel) and keeps the smallest mixture residual,
/// ties toward the earlier seed in `seeds`.
pub fn decompose_best(
    model: &MarkovModel,
    cfg: &DecomposeConfig,
    seeds: &[u64],
) -> Result<(Decomposition, Vec<RunSummary>)> {
    if seeds.is_empty() {
        return Err(Error::invalid("at least one seed is required"));
    }
    let runs: Vec<Decomposition> = seeds
        .par_iter()
        .map(|&s| decompose(model, &cfg.with_seed(s)))
        .collect::<Result<_>>()?;
    let summaries: Vec<RunSummary> = runs.iter().map(RunSummary::of).collect();
    let mut best = 0;
    for (i, s) in summaries.iter().enumerate().skip(1) {
        if s.residual < summaries[best].residual {
            best = i;
        }
    }
    let dec = runs.into_iter().nth(best).expect("best index in range");
    Ok((dec, summaries))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub seed: u64,
    pub active_count: usize,
    pub residual: f64,
    pub converged: bool,
    pub labels: Vec<usize>,
}

/// One decomposition per (α, seed), rows in input order.
pub fn alpha_sweep(
    model: &MarkovModel,
    cfg: &DecomposeConfig,
    alphas: &[f64],
    seeds: &[u64],
) -> Result<Vec<SweepRow>> {
    if alphas.is_empty() {
        return Err(Error::invalid("alpha list is empty"));
    }
    let jobs: Vec<(f64, u64)> = alphas
        .iter()
        .flat_map(|&a| seeds.iter().map(move |&s| (a, s)))
        .collect();
    jobs.par_iter()
        .map(|&(alpha, seed)| {
            let dec = decompose(model, &cfg.with_alpha(alpha).with_seed(seed))?;
            Ok(SweepRow {
                alpha,
                seed,
                active_count: dec.active_count(cfg.prune_eps),
                residual: dec.residual(),
                converged: dec.converged,
                labels: dec.hard_assign().iter().map(|(_, l)| l).collect(),
            })
        })
        .collect()
}
