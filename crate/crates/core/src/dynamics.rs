//! Non-holonomic vehicle dynamics under a disturbance field.
//!
//! The model is constant thrust along the heading plus the local current:
//!
//! ```text
//! dx/dt = v_thrust cos(theta) + c_x(p)
//! dy/dt = v_thrust sin(theta) + c_y(p)
//! dtheta/dt = omega
//! ```
//!
//! integrated with fixed-step RK4. Hard-over (best-effort) turns run one full
//! heading revolution at +/- omega_max; their extreme points against a
//! constrained edge drive the adaptive padding.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::env::{FieldStats, Flow, VehicleModel};
use crate::geom::{normalize_angle, Polygon, Segment, Vec2, MERGE_EPS};

/// Default integration step for padding sampling.
pub const PADDING_DT: f64 = 0.05;
/// Finer step for contingency verification.
pub const CONTINGENCY_DT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub pos: Vec2,
    pub heading: f64,
}

impl VehicleState {
    pub fn new(pos: Vec2, heading: f64) -> Self {
        VehicleState {
            pos,
            heading: normalize_angle(heading),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<VehicleState>,
    pub dt: f64,
}

impl Trajectory {
    pub fn positions(&self) -> impl Iterator<Item = Vec2> + '_ {
        self.states.iter().map(|s| s.pos)
    }

    pub fn final_state(&self) -> VehicleState {
        *self.states.last().expect("trajectory has at least one state")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TurnDirection {
    Left,
    Right,
}

impl TurnDirection {
    pub fn omega(self, vehicle: &VehicleModel) -> f64 {
        match self {
            TurnDirection::Left => vehicle.omega_max,
            TurnDirection::Right => -vehicle.omega_max,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TurnDirection::Left => "left",
            TurnDirection::Right => "right",
        }
    }
}

#[inline]
fn deriv(pos: Vec2, heading: f64, omega: f64, flow: &impl Flow, vehicle: &VehicleModel) -> (Vec2, f64) {
    let thrust = Vec2::from_angle(heading) * vehicle.v_thrust;
    (thrust + flow.velocity(pos), omega)
}

/// Fixed-step RK4 integration of the vehicle model for `duration` seconds.
/// The step count is `ceil(duration / dt)`; all steps use exactly `dt`.
pub fn integrate(
    start: VehicleState,
    omega: f64,
    flow: &impl Flow,
    vehicle: &VehicleModel,
    dt: f64,
    duration: f64,
) -> Trajectory {
    assert!(dt > 0.0, "dt must be positive");
    let steps = ((duration / dt) - 1e-9).ceil().max(0.0) as usize;
    let mut states = Vec::with_capacity(steps + 1);
    let mut pos = start.pos;
    let mut heading = start.heading;
    states.push(VehicleState::new(pos, heading));
    for _ in 0..steps {
        let (k1p, k1h) = deriv(pos, heading, omega, flow, vehicle);
        let (k2p, k2h) = deriv(pos + k1p * (dt / 2.0), heading + k1h * (dt / 2.0), omega, flow, vehicle);
        let (k3p, k3h) = deriv(pos + k2p * (dt / 2.0), heading + k2h * (dt / 2.0), omega, flow, vehicle);
        let (k4p, k4h) = deriv(pos + k3p * dt, heading + k3h * dt, omega, flow, vehicle);
        pos += (k1p + k2p * 2.0 + k3p * 2.0 + k4p) * (dt / 6.0);
        heading += (k1h + 2.0 * k2h + 2.0 * k3h + k4h) * (dt / 6.0);
        states.push(VehicleState::new(pos, heading));
    }
    Trajectory { states, dt }
}

/// Signed distance from `p` to an oriented edge: positive on the left (free)
/// side of a->b, negative on the right.
pub fn signed_edge_distance(edge: Segment, p: Vec2) -> f64 {
    let d = edge.distance_to_point(p);
    if edge.side_of(p) >= 0.0 {
        d
    } else {
        -d
    }
}

fn min_signed_clearance(points: impl Iterator<Item = Vec2>, edge: Segment) -> f64 {
    points
        .map(|p| signed_edge_distance(edge, p))
        .fold(f64::INFINITY, f64::min)
}

/// Simulate a full 2-pi hard-over turn and return the signed minimum distance
/// from the trajectory to `edge` (negative once the turn reaches the far
/// side). The edge is oriented with its free side on the left of a->b.
pub fn hard_over_clearance(
    entry: VehicleState,
    turn: TurnDirection,
    edge: Segment,
    flow: &impl Flow,
    vehicle: &VehicleModel,
    dt: f64,
) -> f64 {
    let duration = std::f64::consts::TAU / vehicle.omega_max;
    let traj = integrate(entry, turn.omega(vehicle), flow, vehicle, dt, duration);
    min_signed_clearance(traj.positions(), edge)
}

/// Minimum signed clearance of a point sequence against a set of polygons:
/// negative when any point lies inside one (the penetration depth).
pub fn min_polygon_clearance(points: impl Iterator<Item = Vec2>, polygons: &[Polygon]) -> f64 {
    let mut best = f64::INFINITY;
    for p in points {
        for poly in polygons {
            best = best.min(poly.signed_distance(p));
        }
    }
    best
}

/// Configuration for best-effort turn sampling.
#[derive(Debug, Clone, Copy)]
pub struct BestEffortConfig {
    /// Half-width of the heading sweep around the midline direction.
    pub delta_phi: f64,
    /// Number of headings swept deterministically across the interval.
    pub heading_count: usize,
    /// Monte-Carlo current realizations.
    pub n_samples: usize,
    pub dt: f64,
}

impl Default for BestEffortConfig {
    fn default() -> Self {
        BestEffortConfig {
            delta_phi: 30f64.to_radians(),
            heading_count: 13,
            n_samples: 500,
            dt: PADDING_DT,
        }
    }
}

fn heading_sweep(phi: f64, cfg: &BestEffortConfig) -> Vec<f64> {
    if cfg.heading_count <= 1 || cfg.delta_phi == 0.0 {
        return vec![phi];
    }
    let n = cfg.heading_count;
    (0..n)
        .map(|j| phi - cfg.delta_phi + 2.0 * cfg.delta_phi * j as f64 / (n - 1) as f64)
        .collect()
}

/// Realize a disturbance vector from local statistics and Gaussian direction
/// and magnitude perturbations.
pub fn realize_current(stats: &FieldStats, eps_dir: f64, eps_mag: f64) -> Vec2 {
    let base_angle = if stats.mean.norm() < MERGE_EPS {
        0.0
    } else {
        stats.mean.angle()
    };
    let mag = (stats.mean.norm() + eps_mag).max(0.0);
    Vec2::from_angle(base_angle + eps_dir) * mag
}

/// Best-effort clearance samples against one constrained edge.
///
/// Per realization the environment picks the worst heading from a
/// deterministic sweep in `[phi - delta, phi + delta]` and the vehicle picks
/// the better of the two hard-over turns; the returned value is that
/// worst-heading best-turn clearance. Turns start at the edge midpoint, so a
/// negative value measures how far the maneuver encroaches past the edge.
///
/// Under a constant realization the RK4 trajectory decomposes exactly into
/// the zero-current turn plus linear drift, so the zero-current turns are
/// integrated once per heading and each realization only shifts them.
pub fn best_effort_samples_from_stats(
    stats: &FieldStats,
    phi: f64,
    edge: Segment,
    vehicle: &VehicleModel,
    cfg: &BestEffortConfig,
    seed: u64,
) -> Vec<f64> {
    let entry = edge.midpoint();
    let headings = heading_sweep(phi, cfg);
    let duration = std::f64::consts::TAU / vehicle.omega_max;
    let still = crate::env::UniformFlow(Vec2::ZERO);

    // (positions, times) per (heading, turn direction).
    let mut base: Vec<[Vec<Vec2>; 2]> = Vec::with_capacity(headings.len());
    for &h in &headings {
        let start = VehicleState::new(entry, h);
        let left = integrate(start, vehicle.omega_max, &still, vehicle, cfg.dt, duration);
        let right = integrate(start, -vehicle.omega_max, &still, vehicle, cfg.dt, duration);
        base.push([
            left.positions().collect(),
            right.positions().collect(),
        ]);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dir_noise = Normal::new(0.0, stats.std_dir).expect("finite sigma");
    let mag_noise = Normal::new(0.0, stats.std_mag).expect("finite sigma");

    let mut out = Vec::with_capacity(cfg.n_samples);
    for _ in 0..cfg.n_samples {
        let eps_dir = dir_noise.sample(&mut rng);
        let eps_mag = mag_noise.sample(&mut rng);
        let c = realize_current(stats, eps_dir, eps_mag);
        let mut worst = f64::INFINITY;
        for turns in &base {
            let mut best_turn = f64::NEG_INFINITY;
            for points in turns {
                let clearance = points
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| signed_edge_distance(edge, p + c * (i as f64 * cfg.dt)))
                    .fold(f64::INFINITY, f64::min);
                best_turn = best_turn.max(clearance);
            }
            worst = worst.min(best_turn);
        }
        out.push(worst);
    }
    out
}

/// [`best_effort_samples_from_stats`] with statistics taken over a region of
/// the given field (typically the channel triangle being padded).
pub fn best_effort_distance_samples(
    entry_region: &Polygon,
    phi: f64,
    field: &crate::env::CurrentField,
    vehicle: &VehicleModel,
    edge: Segment,
    cfg: &BestEffortConfig,
    seed: u64,
) -> Vec<f64> {
    let stats = field.stats_in_polygon(entry_region);
    best_effort_samples_from_stats(&stats, phi, edge, vehicle, cfg, seed)
}
