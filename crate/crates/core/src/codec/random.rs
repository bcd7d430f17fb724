//! Random prefix codes, for testing bounds that hold for every code.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::cost_model::CostModel;
use crate::error::Result;
use crate::sources::SequenceDist;
use crate::streams::chunk_rng;

use super::{CodeEntry, PrefixCode};

/// Grows a random complete `K`-ary tree by expanding uniformly chosen leaves
/// until there are at least as many leaves as sequences, then assigns a random
/// subset of leaves to the sequences injectively.
pub fn random_prefix_code(
    dist: &SequenceDist,
    model: &CostModel,
    alpha_c: f64,
    seed: u64,
) -> Result<PrefixCode> {
    let k = model.k() as u8;
    let mut rng = chunk_rng(seed, 0);
    let mut leaves: Vec<Vec<u8>> = (0..k).map(|u| vec![u]).collect();
    while leaves.len() < dist.len() {
        let leaf = leaves.swap_remove(rng.random_range(0..leaves.len()));
        for u in 0..k {
            let mut child = leaf.clone();
            child.push(u);
            leaves.push(child);
        }
    }
    leaves.shuffle(&mut rng);
    let entries = dist
        .entries()
        .iter()
        .zip(leaves)
        .map(|(e, word)| CodeEntry {
            sequence: e.symbols.clone(),
            cost: model.word_cost(&word),
            codeword: word,
            prob: e.prob,
        })
        .collect();
    PrefixCode::from_entries(dist.n(), model.clone(), alpha_c, entries)
}
