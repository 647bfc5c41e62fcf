use std::collections::BTreeMap;

use besov_core::{besov_seq_norm, LevelStructure, Result, SpaceParams, WeightedSequence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Random elements of the unit sphere of `source` drawn with ChaCha20 seeded
/// by `seed_from_u64(seed)`.
///
/// Each sample draws a decay `u ∈ [0, 2)` and keeps every index with
/// probability 1/2, valued `U(-1, 1)·2^{-j(e + u)}` with `e` the source level
/// exponent; the result is rescaled to unit source norm.
pub fn random_unit_ball(
    source: &SpaceParams,
    structure: &LevelStructure,
    count: usize,
    seed: u64,
) -> Result<Vec<WeightedSequence>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let e = source.level_exponent();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u: f64 = rng.random_range(0.0..2.0);
        let mut entries = BTreeMap::new();
        for j in structure.levels() {
            let scale = (-(j.max(0) as f64) * (e + u)).exp2();
            for idx in structure.indices(j) {
                if rng.random_bool(0.5) {
                    let v: f64 = rng.random_range(-1.0..1.0);
                    entries.insert(idx, v * scale);
                }
            }
        }
        let a = WeightedSequence::from_map(*structure, &entries)?;
        let norm = besov_seq_norm(&a, source)?;
        if norm > 0.0 {
            out.push(a.scaled(1.0 / norm));
        }
    }
    Ok(out)
}
