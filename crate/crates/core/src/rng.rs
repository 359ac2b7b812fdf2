//! Deterministic, splittable uniform streams.
//!
//! Every stochastic quantity in this crate is driven by a [`RandomStream`]
//! identified by a `(seed, path)` pair: `path` is the sequence of child
//! indices taken from the root stream. Outputs are a pure function of
//! `(seed, path, position)`, so any single estimate can be re-derived in
//! isolation from the manifest that recorded its path.
//!
//! The generator is counter-based: output `i` is a SplitMix64-style
//! finalizer applied to `key + (i+1)*GOLDEN`, where `key` is itself a hash
//! of the seed and the path. Splitting is therefore cheap, stateless, and
//! leaves the parent untouched.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const SPLIT_SALT: u64 = 0xB542_9795_2C83_9FA6;

/// 64-bit avalanche finalizer (SplitMix64 / Stafford mix13).
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Reproducible source of i.i.d. uniform [0,1) values with splittable,
/// independent substreams.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    path: Vec<u64>,
    key: u64,
    position: u64,
}

impl RandomStream {
    /// Root stream for the given seed (empty path).
    pub fn new(seed: u64) -> Self {
        RandomStream {
            seed,
            path: Vec::new(),
            key: mix64(seed ^ GOLDEN),
            position: 0,
        }
    }

    /// Stream at an explicit path below the root; `new(seed)` then
    /// `split` along `path` yields the same stream.
    pub fn with_path(seed: u64, path: &[u64]) -> Self {
        let mut s = RandomStream::new(seed);
        for &k in path {
            s = s.split(k);
        }
        s
    }

    /// Child substream `k`. Pure in `(self.key, k)`: the parent is
    /// unaffected and repeated calls return identical substreams.
    pub fn split(&self, k: u64) -> RandomStream {
        let mut path = self.path.clone();
        path.push(k);
        RandomStream {
            seed: self.seed,
            path,
            key: mix64(self.key ^ SPLIT_SALT ^ k.wrapping_add(1).wrapping_mul(GOLDEN)),
            position: 0,
        }
    }

    /// Next uniform in [0,1), using the top 53 bits of the word.
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        let r = self.next_u64();
        (r >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.position += 1;
        mix64(self.key.wrapping_add(self.position.wrapping_mul(GOLDEN)))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    /// Number of values emitted so far.
    pub fn position(&self) -> u64 {
        self.position
    }
}
