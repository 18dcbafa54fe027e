use std::collections::BTreeMap;

use rand::seq::index;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::cqfb::FeatureVector;
use crate::error::{Error, Result};

/// Indices of an (anchor, same-class positive, other-class negative) triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Triplet {
    pub anchor: usize,
    pub positive: usize,
    pub negative: usize,
}

impl Triplet {
    pub fn new(anchor: usize, positive: usize, negative: usize) -> Self {
        Triplet {
            anchor,
            positive,
            negative,
        }
    }
}

pub(crate) fn labels_of(features: &[FeatureVector]) -> Result<Vec<&str>> {
    features
        .iter()
        .enumerate()
        .map(|(i, f)| {
            f.label()
                .ok_or_else(|| Error::invalid(format!("feature {i} has no class label")))
        })
        .collect()
}

/// For every ordered same-class pair `(i, j)`, `i != j`, draws
/// `impostors_per_pair` distinct negatives uniformly from the other classes.
///
/// Output order follows anchor index, then positive index, then draw order.
pub fn generate_triplets(
    features: &[FeatureVector],
    impostors_per_pair: usize,
    rng_seed: u64,
) -> Result<Vec<Triplet>> {
    let labels = labels_of(features)?;
    let mut classes: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        classes.entry(l).or_default().push(i);
    }
    if classes.len() < 2 {
        return Err(Error::invalid(format!(
            "triplets need at least 2 classes, got {}",
            classes.len()
        )));
    }
    if let Some((name, members)) = classes.iter().find(|(_, m)| m.len() < 2) {
        return Err(Error::invalid(format!(
            "class '{name}' has {} sample(s); at least 2 are needed",
            members.len()
        )));
    }

    let mut rng = Xoshiro256PlusPlus::seed_from_u64(rng_seed);
    let mut out = Vec::new();
    for (anchor, label) in labels.iter().enumerate() {
        let others: Vec<usize> = (0..features.len())
            .filter(|&k| labels[k] != *label)
            .collect();
        if impostors_per_pair > others.len() {
            return Err(Error::invalid(format!(
                "{impostors_per_pair} impostors per pair requested but class '{label}' has only {} impostors",
                others.len()
            )));
        }
        for &positive in &classes[label] {
            if positive == anchor {
                continue;
            }
            for pick in index::sample(&mut rng, others.len(), impostors_per_pair) {
                out.push(Triplet::new(anchor, positive, others[pick]));
            }
        }
    }
    Ok(out)
}
