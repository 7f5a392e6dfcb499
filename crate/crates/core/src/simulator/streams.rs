//! Named random substreams.
//!
//! Every draw in a simulation comes from a generator derived from
//! `(seed, stream, slot)`, so one model consuming more or fewer numbers never
//! shifts the draws another model sees.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Model;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    PuActivity,
    SensingMap,
    SensingSnr,
    LocalDecisions,
    TransmissionSnr,
    Buffers,
    Backoff(Model),
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::PuActivity => 1,
            Stream::SensingMap => 2,
            Stream::SensingSnr => 3,
            Stream::LocalDecisions => 4,
            Stream::TransmissionSnr => 5,
            Stream::Buffers => 6,
            Stream::Backoff(m) => 16 + m as u64,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for one stream in one slot.
pub fn slot_rng(seed: u64, stream: Stream, slot: u64) -> ChaCha8Rng {
    let key = splitmix64(splitmix64(splitmix64(seed) ^ stream.id()) ^ slot);
    ChaCha8Rng::seed_from_u64(key)
}
