//! Variation-keyed random streams.
//!
//! A variation tag hashes (FNV-1a, 64-bit) to a seed. Every statement of
//! the evaluated scene owns a stream keyed by its position in the call and
//! loop tree, so draws are independent of evaluation order and of how
//! loop iterations are spread over workers. Draws are counter-based
//! (SplitMix64 finaliser over `key + k * golden`).

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// A `-v` variation tag and the seed derived from it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VariationSeed {
    tag: String,
    seed: u64,
}

impl VariationSeed {
    pub fn new(tag: &str) -> Self {
        Self { tag: tag.to_string(), seed: fnv1a64(tag.as_bytes()) }
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl Default for VariationSeed {
    fn default() -> Self {
        Self::new("")
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Key of child `index` under `parent` in the evaluation tree.
#[inline]
pub fn child_key(parent: u64, index: u64) -> u64 {
    mix64(parent.rotate_left(23) ^ mix64(index.wrapping_add(GOLDEN)))
}

/// Stream for the node at `path` below the variation's root.
pub fn derive_stream(seed: &VariationSeed, path: &[u64]) -> RandStream {
    RandStream::new(path.iter().fold(seed.seed, |k, &i| child_key(k, i)))
}

/// Counter-based generator: draw `k` depends only on `(key, k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandStream {
    key: u64,
    counter: u64,
}

impl RandStream {
    pub fn new(key: u64) -> Self {
        Self { key, counter: 0 }
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter += 1;
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`; `lo` when the interval is empty.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = self.next_unit();
        let v = lo + (hi - lo) * u;
        if hi > lo && v >= hi {
            hi.next_down()
        } else {
            v
        }
    }
}
