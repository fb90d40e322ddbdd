//! Per-stream generators. Each (seed, domain, index) triple owns an
//! independent ChaCha stream, so segments and bursts can be produced in any
//! order or in parallel with bit-identical results.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Stream domain for signal segments.
pub const DOMAIN_SIGNAL: u64 = 0x5349_474e;
/// Stream domain for the per-segment σ schedule.
pub const DOMAIN_SIGMA: u64 = 0x5349_474d;
/// Stream domain for radar bursts.
pub const DOMAIN_RADAR: u64 = 0x5241_4452;

pub fn stream(seed: u64, domain: u64, index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ domain.rotate_left(32));
    rng.set_stream(index);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stream(7, DOMAIN_SIGNAL, 3).random();
        let b: u64 = stream(7, DOMAIN_SIGNAL, 3).random();
        let c: u64 = stream(7, DOMAIN_SIGNAL, 4).random();
        let d: u64 = stream(7, DOMAIN_SIGMA, 3).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }
}
