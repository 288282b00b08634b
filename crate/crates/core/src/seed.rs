//! Substream seed derivation.
//!
//! Every randomized operation derives its RNG seed from a caller-provided
//! master seed and a purpose tag via [`substream`]. Repetition loops chain a
//! further level, e.g. `substream(substream(master, Tag::Sweep as u64), rep)`.
//! Because substream seeds are pure functions of `(master, tag)`, results do
//! not depend on evaluation order or worker count.
//!
//! The mixing function is SplitMix64 (Steele, Lea & Flood 2014):
//!
//! ```text
//! substream(master, tag) = splitmix64(master ^ splitmix64(tag ^ 0x9E3779B97F4A7C15))
//! ```

/// One SplitMix64 output step.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed of substream `tag` from `master`.
pub fn substream(master: u64, tag: u64) -> u64 {
    splitmix64(master ^ splitmix64(tag ^ 0x9E37_79B9_7F4A_7C15))
}

/// Fixed purpose tags for the crate's own substreams.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
pub enum Tag {
    Sample = 1,
    Rotation = 2,
    Permutation = 3,
    Sweep = 4,
    BeRatio = 5,
    RatioCurve = 6,
    Qq = 7,
    McIntegral = 8,
}

impl Tag {
    pub fn seed(self, master: u64) -> u64 {
        substream(master, self as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substreams_are_stable_and_distinct() {
        // Frozen values: the mixing function is part of the reproducibility
        // contract, so a change here must be deliberate.
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(substream(0, 0), substream(0, 0));
        assert_ne!(substream(0, 0), substream(0, 1));
        assert_ne!(substream(0, 0), substream(1, 0));
        let mut seen = std::collections::HashSet::new();
        for master in 0..50u64 {
            for tag in 0..50u64 {
                assert!(seen.insert(substream(master, tag)));
            }
        }
    }
}
