//! Per-drop random streams.
//!
//! Each (seed, drop, stream, substream) tuple keys its own ChaCha generator,
//! so a drop's numbers never depend on scheduling or on how many numbers other
//! drops consumed. Streams are deliberately not keyed by frequency or band:
//! runs at different carriers see the same geometry and path draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Placement = 1,
    Satellite = 2,
    TerrestrialPaths = 3,
    SatellitePaths = 4,
    PointingError = 5,
    RobustSamples = 6,
    Blockage = 7,
    Indoor = 8,
    InterfererPlacement = 9,
    InterfererPaths = 10,
}

pub fn stream_rng(master_seed: u64, drop_index: u64, stream: Stream, substream: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[0..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&drop_index.to_le_bytes());
    seed[16..24].copy_from_slice(&(stream as u64).to_le_bytes());
    seed[24..32].copy_from_slice(&substream.to_le_bytes());
    ChaCha8Rng::from_seed(seed)
}
