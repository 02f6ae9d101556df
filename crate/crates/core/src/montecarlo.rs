//! Bit-level simulation of frame delivery over a binary symmetric channel.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{ModelError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameEstimate {
    pub frames: u64,
    pub successes: u64,
    pub success_rate: f64,
    /// Binomial standard error `sqrt(p (1 - p) / n)` at the estimated rate.
    pub std_error: f64,
}

impl FrameEstimate {
    /// Standard error using a reference success probability instead of
    /// the estimate.
    pub fn std_error_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.frames as f64).sqrt()
    }
}

/// Deterministic RNG for sweep point `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Sends `frames` frames of `frame_bits` iid bits, each flipped with
/// probability `pe`, and counts frames with no flipped bit.
pub fn simulate_frames<R: Rng + ?Sized>(
    pe: f64,
    frame_bits: u32,
    frames: u64,
    rng: &mut R,
) -> Result<FrameEstimate> {
    if !(0.0..=1.0).contains(&pe) {
        return Err(ModelError::domain("pe", "within [0, 1]", pe));
    }
    if frame_bits == 0 || frames == 0 {
        return Err(ModelError::invalid(
            "simulation",
            "frame_bits and frames must be >= 1",
        ));
    }
    let mut successes = 0u64;
    for _ in 0..frames {
        if (0..frame_bits).all(|_| !rng.gen_bool(pe)) {
            successes += 1;
        }
    }
    let rate = successes as f64 / frames as f64;
    Ok(FrameEstimate {
        frames,
        successes,
        success_rate: rate,
        std_error: (rate * (1.0 - rate) / frames as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_channels() {
        let mut rng = stream_rng(1, 0);
        assert_eq!(
            simulate_frames(0.0, 40, 1000, &mut rng).unwrap().successes,
            1000
        );
        assert_eq!(
            simulate_frames(1.0, 40, 1000, &mut rng).unwrap().successes,
            0
        );
        assert!(simulate_frames(1.5, 40, 10, &mut rng).is_err());
        assert!(simulate_frames(0.1, 0, 10, &mut rng).is_err());
    }

    #[test]
    fn streams_are_reproducible() {
        let a = simulate_frames(0.05, 20, 5000, &mut stream_rng(7, 3)).unwrap();
        let b = simulate_frames(0.05, 20, 5000, &mut stream_rng(7, 3)).unwrap();
        assert_eq!(a, b);
    }
}
