use std::collections::HashMap;

use super::{ComponentSegment, FunctionFingerprint};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EliminationStats {
    pub input: usize,
    pub removed: usize,
    /// Fingerprint-to-fingerprint comparisons performed.
    pub comparisons: usize,
}

/// Keep, for every digest, only the fingerprint with the earliest birth
/// (ties: smallest library name, then path). Later versions of the owning
/// library keep their reference to the survivor.
pub fn eliminate_redundancy(segment: ComponentSegment) -> ComponentSegment {
    eliminate_with_stats(segment).0
}

pub fn eliminate_with_stats(mut segment: ComponentSegment) -> (ComponentSegment, EliminationStats) {
    let mut stats = EliminationStats::default();
    let mut best: HashMap<String, FunctionFingerprint> = HashMap::new();

    for fp in segment.fingerprints() {
        stats.input += 1;
        match best.get_mut(fp.h.hex()) {
            Some(current) => {
                stats.comparisons += 1;
                if fp.precedence_key() < current.precedence_key() {
                    *current = fp.clone();
                }
            }
            None => {
                best.insert(fp.h.hex().to_string(), fp.clone());
            }
        }
    }

    for record in segment.tpls.values_mut().flatten() {
        record.fc.retain(|fp| {
            stats.comparisons += 1;
            let keep = best.get(fp.h.hex()) == Some(fp);
            stats.removed += usize::from(!keep);
            keep
        });
    }

    segment.hash_index = best.into_iter().collect();
    (segment, stats)
}
