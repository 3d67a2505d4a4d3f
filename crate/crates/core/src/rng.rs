//! Counter-based random streams.
//!
//! Every trajectory draws from its own ChaCha8 stream, addressed by
//! `(master_seed, traj_index, purpose)`. The keystream position is a pure
//! function of that address, so results do not depend on how trajectories
//! are scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for inside one trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    /// Initial bath phase point.
    Bath,
    /// Choice of the initial surface pair (random pair mode only).
    PairChoice,
    /// Hop decisions of the sub-trajectory started on pair slot `0..4`.
    Hops(u8),
}

impl Purpose {
    fn slot(self) -> u64 {
        match self {
            Purpose::Bath => 0,
            Purpose::PairChoice => 1,
            Purpose::Hops(k) => {
                debug_assert!(k < 4);
                2 + k as u64
            }
        }
    }
}

const SLOTS_PER_TRAJECTORY: u64 = 8;

/// Opens the stream for `purpose` of trajectory `traj_index`.
pub fn stream(master_seed: u64, traj_index: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(traj_index * SLOTS_PER_TRAJECTORY + purpose.slot());
    rng
}
