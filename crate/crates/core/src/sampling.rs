//! Seeded random inputs for the experiment suites.  Everything is driven by
//! ChaCha8 so that a (config, seed) pair replays byte-identically.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dyadic::{DyadicFunction, LacunarySequence};
use crate::tiles::{ChoiceFunction, TileCollection};

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform cell values in `[-1, 1]`.
pub fn random_function(rng: &mut ChaCha8Rng, resolution: u8) -> DyadicFunction {
    let values = (0..1usize << resolution)
        .map(|_| rng.gen_range(-1.0..=1.0))
        .collect();
    DyadicFunction::new(resolution, values).expect("generated values are valid")
}

/// Indicator with i.i.d. cell probability `p`; re-drawn once if empty.
pub fn random_indicator(rng: &mut ChaCha8Rng, resolution: u8, p: f64) -> DyadicFunction {
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..1usize << resolution)
            .map(|_| if rng.gen_bool(p) { 1.0 } else { 0.0 })
            .collect()
    };
    let mut values = draw(rng);
    if values.iter().all(|&v| v == 0.0) {
        values = draw(rng);
        if values.iter().all(|&v| v == 0.0) {
            values[rng.gen_range(0..1usize << resolution)] = 1.0;
        }
    }
    DyadicFunction::new(resolution, values).expect("generated values are valid")
}

/// A function supported on the given indicator with values in `[-1,1]`.
pub fn random_dominated(
    rng: &mut ChaCha8Rng,
    indicator: &DyadicFunction,
) -> DyadicFunction {
    let values = indicator
        .values()
        .iter()
        .map(|&v| if v != 0.0 { rng.gen_range(-1.0..=1.0) } else { 0.0 })
        .collect();
    DyadicFunction::new(indicator.resolution(), values).expect("generated values are valid")
}

/// Independent uniform draw from the sequence terms per cell.
pub fn random_choice(
    rng: &mut ChaCha8Rng,
    resolution: u8,
    seq: &LacunarySequence,
) -> ChoiceFunction {
    let assignment = (0..1usize << resolution)
        .map(|_| seq.terms()[rng.gen_range(0..seq.len())])
        .collect();
    ChoiceFunction::new(resolution, assignment, seq).expect("terms come from the sequence")
}

/// Random subset of a collection, keeping each bi-tile with probability `p`;
/// re-drawn once if empty.
pub fn random_subcollection(
    rng: &mut ChaCha8Rng,
    collection: &TileCollection,
    p: f64,
) -> TileCollection {
    let draw = |rng: &mut ChaCha8Rng| {
        collection
            .bitiles()
            .iter()
            .filter(|_| rng.gen_bool(p))
            .copied()
            .collect::<Vec<_>>()
    };
    let mut picked = draw(rng);
    if picked.is_empty() && !collection.is_empty() {
        picked = draw(rng);
        if picked.is_empty() {
            picked = vec![collection.bitiles()[rng.gen_range(0..collection.len())]];
        }
    }
    TileCollection::new(picked)
}
