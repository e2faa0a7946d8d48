//! Locality and globality of a network against the wheel, and normalized
//! mutual information between partitions.
//!
//! Locality is the mean over petals of the normalized symmetrized weight
//! `(w(a→b) + w(b→a)) / (2·e_max)` over the ordered pairs inside a petal;
//! globality is the same mean over the pairs between a petal and its
//! opposite. Both are 1 when every relevant weight is `e_max`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SemanticNetwork;
use crate::lexicon::{petal_pair_sets, wheel_partition, Category, Lexicon, Partition, Wheel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalityReport {
    pub per_petal_locality: Vec<f64>,
    pub per_petal_globality: Vec<f64>,
    pub locality: f64,
    pub globality: f64,
    pub e_max: f64,
}

fn check_covers(net: &SemanticNetwork, wheel: &Wheel) -> Result<()> {
    match wheel.petal_words().find(|&w| w >= net.len()) {
        Some(w) => Err(Error::invalid(format!(
            "petal word {w} is not a node of the {}-node network",
            net.len()
        ))),
        None => Ok(()),
    }
}

fn pair_mean(net: &SemanticNetwork, pairs: &[(usize, usize)]) -> f64 {
    let total: f64 = pairs
        .iter()
        .map(|&(a, b)| (net.weight(a, b) + net.weight(b, a)) / (2.0 * net.e_max()))
        .sum();
    total / pairs.len() as f64
}

pub fn locality_report(net: &SemanticNetwork, wheel: &Wheel) -> Result<LocalityReport> {
    check_covers(net, wheel)?;
    let mut per_petal_locality = Vec::with_capacity(wheel.petal_count());
    let mut per_petal_globality = Vec::with_capacity(wheel.petal_count());
    for k in 0..wheel.petal_count() {
        let pairs = petal_pair_sets(wheel, k)?;
        per_petal_locality.push(pair_mean(net, &pairs.within));
        per_petal_globality.push(pair_mean(net, &pairs.opposite));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(LocalityReport {
        locality: mean(&per_petal_locality),
        globality: mean(&per_petal_globality),
        per_petal_locality,
        per_petal_globality,
        e_max: net.e_max(),
    })
}

pub fn locality(net: &SemanticNetwork, wheel: &Wheel) -> Result<f64> {
    Ok(locality_report(net, wheel)?.locality)
}

pub fn globality(net: &SemanticNetwork, wheel: &Wheel) -> Result<f64> {
    Ok(locality_report(net, wheel)?.globality)
}

/// Directed normalized weights `w(a→b)/e_max` over every within-petal
/// ordered pair (petal order, then pair order). Their mean is the locality.
pub fn within_pair_values(net: &SemanticNetwork, wheel: &Wheel) -> Result<Vec<f64>> {
    pair_values(net, wheel, |p| p.within)
}

/// Directed normalized weights over every ordered pair between opposite
/// petals. Their mean is the globality.
pub fn opposite_pair_values(net: &SemanticNetwork, wheel: &Wheel) -> Result<Vec<f64>> {
    pair_values(net, wheel, |p| p.opposite)
}

fn pair_values(
    net: &SemanticNetwork,
    wheel: &Wheel,
    pick: impl Fn(crate::lexicon::PetalPairs) -> Vec<(usize, usize)>,
) -> Result<Vec<f64>> {
    check_covers(net, wheel)?;
    let mut out = Vec::new();
    for k in 0..wheel.petal_count() {
        for (a, b) in pick(petal_pair_sets(wheel, k)?) {
            out.push(net.weight(a, b) / net.e_max());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NmiNorm {
    /// `2·I / (H_a + H_b)`
    #[default]
    Arithmetic,
    /// `I / max(H_a, H_b)`
    Max,
}

/// Which words the wheel partition covers when scoring a detected partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NmiDomain {
    /// Only the petal words.
    #[default]
    Petal24,
    /// Every word; each secondary word is its own singleton group.
    All48,
}

pub fn reference_partition(lexicon: &Lexicon, domain: NmiDomain) -> Partition {
    let wheel = lexicon.wheel();
    let petals = wheel_partition(wheel);
    match domain {
        NmiDomain::Petal24 => petals,
        NmiDomain::All48 => {
            let mut labels: BTreeMap<usize, usize> = petals.iter().collect();
            let mut next = wheel.petal_count();
            for w in lexicon.words() {
                if w.category == Category::Secondary {
                    labels.insert(w.id, next);
                    next += 1;
                }
            }
            Partition::new(labels)
        }
    }
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information over the common domain of `a` and `b`.
/// 1 when both partitions are trivial, 0 when exactly one is.
pub fn nmi(a: &Partition, b: &Partition, norm: NmiNorm) -> Result<f64> {
    let domain = a.common_domain(b);
    if domain.is_empty() {
        return Err(Error::Empty("partitions share no items".into()));
    }
    let n = domain.len() as f64;
    let mut joint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut ca: BTreeMap<usize, usize> = BTreeMap::new();
    let mut cb: BTreeMap<usize, usize> = BTreeMap::new();
    for &id in &domain {
        let (la, lb) = (a.label(id).unwrap(), b.label(id).unwrap());
        *joint.entry((la, lb)).or_default() += 1;
        *ca.entry(la).or_default() += 1;
        *cb.entry(lb).or_default() += 1;
    }
    let ha = entropy(ca.values().copied(), n);
    let hb = entropy(cb.values().copied(), n);
    if ha == 0.0 && hb == 0.0 {
        return Ok(1.0);
    }
    if ha == 0.0 || hb == 0.0 {
        return Ok(0.0);
    }
    let mi: f64 = joint
        .iter()
        .map(|(&(la, lb), &c)| {
            let pab = c as f64 / n;
            let pa = ca[&la] as f64 / n;
            let pb = cb[&lb] as f64 / n;
            pab * (pab / (pa * pb)).ln()
        })
        .sum();
    let value = match norm {
        NmiNorm::Arithmetic => 2.0 * mi / (ha + hb),
        NmiNorm::Max => mi / ha.max(hb),
    };
    Ok(value.clamp(0.0, 1.0))
}
