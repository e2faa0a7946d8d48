//! Synthetic rating data with planted wheel structure, and planted-partition
//! weight matrices for benchmarking the decomposition.
//!
//! Scores are `clamp(round(base + N(0, noise_sd)), 0, 7)` where `base`
//! depends on whether the pair lies inside a petal, across opposite petals
//! or elsewhere. Careless participants answer uniformly at random and,
//! on each catch trial independently, ignore the requested value with
//! probability ½.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SemanticNetwork;
use crate::ingest::{RatingRecord, Session, Task, REPEATS, SCALE_MAX};
use crate::lexicon::{wheel_partition, Lexicon, Partition};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedModel {
    pub base_within: f64,
    pub base_opposite: f64,
    pub base_other: f64,
    pub noise_sd: f64,
    /// Spread of a per-pair offset added to the base, drawn once per
    /// ordered pair and shared by every participant. With 0 every pair sits
    /// at its category base.
    pub pair_sd: f64,
    pub careless_rate: f64,
    pub seed: u64,
    /// Ordered pairs asked of each participant.
    pub block_size: usize,
}

impl Default for PlantedModel {
    fn default() -> Self {
        Self {
            base_within: 6.5,
            base_opposite: 0.0,
            base_other: 0.5,
            noise_sd: 0.5,
            pair_sd: 1.0,
            careless_rate: 0.05,
            seed: 0,
            block_size: 47,
        }
    }
}

impl PlantedModel {
    fn validate(&self) -> Result<()> {
        let e_max = SCALE_MAX as f64;
        for (name, v) in [
            ("base_within", self.base_within),
            ("base_opposite", self.base_opposite),
            ("base_other", self.base_other),
        ] {
            if !(0.0..=e_max).contains(&v) {
                return Err(Error::invalid(format!("{name} = {v} outside [0, {e_max}]")));
            }
        }
        if !(0.0..=1.0).contains(&self.careless_rate) {
            return Err(Error::invalid("careless_rate must be in [0, 1]"));
        }
        for (name, v) in [("noise_sd", self.noise_sd), ("pair_sd", self.pair_sd)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be nonnegative")));
            }
        }
        if self.block_size < REPEATS {
            return Err(Error::invalid(format!(
                "block_size must be at least {REPEATS} so repeats can be drawn"
            )));
        }
        Ok(())
    }

    /// Mean score of the ordered pair (a, b).
    pub fn base(&self, lexicon: &Lexicon, a: usize, b: usize) -> f64 {
        let wheel = lexicon.wheel();
        match (wheel.petal_of(a), wheel.petal_of(b)) {
            (Some(x), Some(y)) if x == y => self.base_within,
            (Some(x), Some(y)) if wheel.opposite(x) == Some(y) => self.base_opposite,
            _ => self.base_other,
        }
    }
}

fn score(rng: &mut ChaCha8Rng, base: f64, noise: &Normal<f64>) -> u8 {
    (base + noise.sample(rng)).round().clamp(0.0, SCALE_MAX as f64) as u8
}

/// Sessions for `participants` people. The shuffled ordered pairs are cut
/// into blocks of `block_size` and handed out round-robin; each session
/// holds its block, two catch trials at random positions and `REPEATS`
/// repeats drawn without replacement from its own questions, appended at
/// the end.
pub fn generate(
    model: &PlantedModel,
    lexicon: &Lexicon,
    participants: usize,
    task: Task,
) -> Result<Vec<Session>> {
    model.validate()?;
    if participants == 0 {
        return Err(Error::invalid("need at least one participant"));
    }
    let n = lexicon.len();
    let mut pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    pairs.shuffle(&mut rng);
    let blocks: Vec<&[(usize, usize)]> = pairs.chunks(model.block_size).collect();
    let noise = Normal::new(0.0, model.noise_sd).map_err(|e| Error::invalid(e.to_string()))?;
    let offsets: Vec<f64> = if model.pair_sd > 0.0 {
        let spread = Normal::new(0.0, model.pair_sd).map_err(|e| Error::invalid(e.to_string()))?;
        (0..n * n).map(|_| spread.sample(&mut rng)).collect()
    } else {
        vec![0.0; n * n]
    };

    let sessions = (0..participants)
        .map(|p| {
            let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
            rng.set_stream(p as u64 + 1);
            let careless = rng.random_bool(model.careless_rate);
            let answer = |rng: &mut ChaCha8Rng, a: usize, b: usize| {
                if careless {
                    rng.random_range(0..=SCALE_MAX)
                } else {
                    score(rng, model.base(lexicon, a, b) + offsets[a * n + b], &noise)
                }
            };
            let block = blocks[p % blocks.len()];
            let total = block.len() + 2;
            let mut catch_slots: Vec<usize> = (0..total).collect();
            catch_slots.shuffle(&mut rng);
            catch_slots.truncate(2);

            let mut records = Vec::with_capacity(total + REPEATS);
            let mut asked = Vec::with_capacity(block.len());
            let mut next_pair = block.iter();
            for order in 0..total as u32 {
                if catch_slots.contains(&(order as usize)) {
                    let target = rng.random_range(0..=SCALE_MAX);
                    let value = if careless && rng.random_bool(0.5) {
                        rng.random_range(0..=SCALE_MAX)
                    } else {
                        target
                    };
                    records.push(RatingRecord::catch(order, target, value));
                } else {
                    let &(a, b) = next_pair.next().expect("block sized to fill slots");
                    records.push(RatingRecord::normal(order, a, b, answer(&mut rng, a, b)));
                    asked.push((order, a, b));
                }
            }
            let repeats: Vec<_> = asked
                .choose_multiple(&mut rng, REPEATS)
                .copied()
                .collect();
            for (i, (of, a, b)) in repeats.into_iter().enumerate() {
                let order = (total + i) as u32;
                records.push(RatingRecord::repeat(order, a, b, of, answer(&mut rng, a, b)));
            }
            Session::new(format!("p{p:04}"), task, records)
        })
        .collect();
    Ok(sessions)
}

/// The petal partition the generator plants.
pub fn planted_partition(lexicon: &Lexicon) -> Partition {
    wheel_partition(lexicon.wheel())
}

/// Weighted network with `groups` planted blocks of `group_size` nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedNetwork {
    pub groups: usize,
    pub group_size: usize,
    pub within: f64,
    /// Mean weight between groups before clipping to `[0, other_max]`.
    pub other: f64,
    pub other_max: f64,
    pub noise_sd: f64,
    pub e_max: f64,
    pub seed: u64,
}

impl Default for PlantedNetwork {
    fn default() -> Self {
        Self {
            groups: 8,
            group_size: 3,
            within: 6.5,
            other: 0.5,
            other_max: 1.0,
            noise_sd: 0.5,
            e_max: 7.0,
            seed: 0,
        }
    }
}

/// Draws the weight matrix and returns it with the planted partition.
/// Node `i` belongs to group `i / group_size`.
pub fn planted_network(params: &PlantedNetwork) -> Result<(SemanticNetwork, Partition)> {
    let n = params.groups * params.group_size;
    if n == 0 {
        return Err(Error::invalid("planted network needs nodes"));
    }
    let noise = Normal::new(0.0, params.noise_sd).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let group = |i: usize| i / params.group_size;
    let weights = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else if group(i) == group(j) {
            (params.within + noise.sample(&mut rng)).clamp(0.0, params.e_max)
        } else {
            (params.other + noise.sample(&mut rng)).clamp(0.0, params.other_max.min(params.e_max))
        }
    });
    let labels: Vec<usize> = (0..n).map(group).collect();
    Ok((
        SemanticNetwork::unlabeled(weights, params.e_max)?,
        Partition::from_labels(&labels),
    ))
}
