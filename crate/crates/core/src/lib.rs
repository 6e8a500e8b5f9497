//! Risk- and energy-aware global path planning for surface vehicles in
//! planar current fields.
//!
//! The pipeline: triangulate the free space with obstacle boundaries
//! constrained, enumerate topologically distinct channels over the dual
//! graph, pad each channel adaptively against worst-case hard-over turns,
//! sample and score candidate paths by a fuel integral, and pick the channel
//! with the best harmonic-mean fuel. A grid A* baseline and a contingency
//! validator support comparisons and safety checks.

pub mod baseline;
pub mod contingency;
pub mod dynamics;
pub mod env;
pub mod geom;
pub mod homotopy;
pub mod mesh;
pub mod padding;
pub mod planner;
pub mod scenarios;

pub use env::{load_environment, local_current_stats, sample_current, Environment, VehicleModel};
pub use geom::{Polygon, Rect, Segment, Vec2};
pub use mesh::{build_dual, build_navmesh, locate_triangle, DualGraph, NavMesh};

/// Default seed used by the CLI and scenario tooling when none is given.
pub const DEFAULT_SEED: u64 = 1729;

/// Derive an independent substream seed from a base seed and a tag sequence
/// (SplitMix64 chain). Stable across platforms.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    fn splitmix(x: u64) -> u64 {
        let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    let mut acc = splitmix(seed);
    for &t in tags {
        acc = splitmix(acc ^ t);
    }
    acc
}
