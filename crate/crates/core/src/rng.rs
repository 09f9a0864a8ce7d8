//! Counter-based random streams.
//!
//! Every trial owns three independent streams keyed by `(seed, trial index,
//! role)`. A stream is a SplitMix64 sequence started at a key obtained by
//! hashing the triple, so any trial can be regenerated in isolation and the
//! output never depends on which worker ran it or in what order.

use rand::{Error, RngCore};

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// What a stream is used for inside one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamRole {
    Settings,
    Source,
    Measurement,
}

impl StreamRole {
    fn tag(self) -> u64 {
        match self {
            StreamRole::Settings => 0x5e77_1295_a11c_e0b0,
            StreamRole::Source => 0x50c3_ce5a_a7b1_3d4f,
            StreamRole::Measurement => 0x3ea5_c0de_b0b5_1a2e,
        }
    }
}

/// A keyed SplitMix64 stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterStream {
    key: u64,
    counter: u64,
}

impl CounterStream {
    pub fn from_key(key: u64) -> Self {
        CounterStream { key, counter: 0 }
    }

    /// Stream for `role` in trial `index` of the experiment seeded with `seed`.
    pub fn for_trial(seed: u64, index: u64, role: StreamRole) -> Self {
        let k = mix64(seed ^ role.tag());
        let k = mix64(k.wrapping_add(index.wrapping_mul(GOLDEN_GAMMA)));
        CounterStream::from_key(k)
    }

    /// Number of 64-bit words drawn so far.
    pub fn position(&self) -> u64 {
        self.counter
    }
}

impl RngCore for CounterStream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN_GAMMA)))
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        for chunk in dest.chunks_mut(8) {
            let w = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&w[..chunk.len()]);
        }
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}

/// The three streams of one trial.
#[derive(Debug, Clone)]
pub struct TrialStreams {
    pub settings: CounterStream,
    pub source: CounterStream,
    pub measurement: CounterStream,
}

impl TrialStreams {
    pub fn new(seed: u64, index: u64) -> Self {
        TrialStreams {
            settings: CounterStream::for_trial(seed, index, StreamRole::Settings),
            source: CounterStream::for_trial(seed, index, StreamRole::Source),
            measurement: CounterStream::for_trial(seed, index, StreamRole::Measurement),
        }
    }
}
