use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type SimRng = ChaCha8Rng;

/// Seed for the counter-based generator. Independent streams are derived
/// from `(seed, stream)` so parallel work stays reproducible.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(self) -> SimRng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    pub fn stream(self, stream: u64) -> SimRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(stream);
        rng
    }

    /// A new seed, deterministic in `(self, salt)`.
    pub fn derive(self, salt: u64) -> RngSeed {
        use rand::RngCore;
        RngSeed(self.stream(salt.wrapping_add(1 << 40)).next_u64())
    }
}
