use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// A reproducible random stream identified by `(master_seed, substream_id)`.
///
/// The master seed keys a ChaCha20 generator and the substream id selects the
/// ChaCha stream, so distinct ids give independent sequences and the same pair
/// always gives the same sequence, whichever thread draws from it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub master_seed: u64,
    pub substream_id: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, substream_id: u64) -> Self {
        Self { master_seed, substream_id }
    }

    /// A stream derived from this one; children with different `index` are
    /// distinct from each other and from the parent.
    pub fn child(&self, index: u64) -> Self {
        Self {
            master_seed: self.master_seed,
            substream_id: splitmix64(splitmix64(self.substream_id) ^ index.wrapping_add(0x9e37_79b9)),
        }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.substream_id);
        rng
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}
