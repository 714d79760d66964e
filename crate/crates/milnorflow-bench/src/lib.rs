//! Benchmark fixtures shared by the criterion targets.

use milnorflow::geom_core::{random_frame_point, random_unit_quat, FramePoint};
use milnorflow::milnor_bundle::{s7_point, BundleSpec};
use milnorflow::R8;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Reproducible frame points on M.
pub fn frame_points(n: usize, seed: u64) -> Vec<FramePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_frame_point(&mut rng)).collect()
}

/// Reproducible points of S⁷ at height `u5`.
pub fn s7_points(n: usize, u5: f64, seed: u64) -> Vec<R8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            s7_point(
                BundleSpec::E01,
                u5,
                &random_unit_quat(&mut rng),
                &random_unit_quat(&mut rng),
            )
            .expect("u5 in range")
        })
        .collect()
}
