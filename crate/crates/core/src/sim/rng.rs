//! Independent random streams keyed by (seed, robot, purpose).

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Placement = 1,
    Orientation = 2,
    RadiusProposal = 3,
    AnchorNoise = 4,
}

/// A ChaCha stream private to one robot and one use. Adding robots or
/// purposes never shifts another stream's sequence.
pub fn stream(seed: u64, robot: usize, purpose: Purpose) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(((robot as u64) << 8) | purpose as u64);
    rng
}
