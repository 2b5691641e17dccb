use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finaliser.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based seed derivation.
///
/// A node is identified by the path of child indices from the master seed,
/// so the seed of "operator 2, tuple 57, component 1" never depends on how
/// many samples other operators have drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedTree(u64);

impl SeedTree {
    pub fn new(master: u64) -> Self {
        SeedTree(splitmix64(master))
    }

    pub fn child(self, k: u64) -> Self {
        SeedTree(splitmix64(self.0 ^ splitmix64(k ^ 0xA076_1D64_78BD_642F)))
    }

    pub fn seed(self) -> u64 {
        self.0
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn children_are_distinct() {
        let root = SeedTree::new(7);
        let mut seen = HashSet::new();
        for a in 0..50 {
            for b in 0..50 {
                assert!(seen.insert(root.child(a).child(b).seed()));
            }
        }
        assert_ne!(root.child(1).child(2), root.child(2).child(1));
    }
}
