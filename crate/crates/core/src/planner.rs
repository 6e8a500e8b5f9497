//! High- and low-level planning.
//!
//! High level: sample N candidate paths per feasible padded channel, filter
//! by the effective-radius turn check, score each by the fuel integral, and
//! pick the channel minimizing the harmonic mean of its feasible-path fuels.
//! Low level: within the winning channel, pick the minimum-fuel path.

use std::collections::BTreeMap;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::dynamics::BestEffortConfig;
use crate::env::{CurrentField, Environment, Flow, VehicleModel};
use crate::geom::{polyline_length, Segment, Vec2, MERGE_EPS};
use crate::homotopy::{enumerate_channels, Channel, ChannelError};
use crate::mesh::{build_dual, build_navmesh, MeshError, NavMesh};
use crate::padding::{
    compute_adaptive_padding, fixed_padding, no_padding, PaddedChannel, PaddingReport,
    PaddingScheme,
};

#[derive(Debug, Error)]
pub enum PlanError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("fuel integrand denominator <= 0 at arc length {arc_length}: assumption violated")]
    FuelAssumption { arc_length: f64 },
    #[error("channel is infeasible after padding")]
    ChannelInfeasible,
    #[error("no feasible plan")]
    NoFeasiblePlan,
}

/// One sampled candidate: start, one waypoint per passing edge, goal.
#[derive(Debug, Clone, Serialize)]
pub struct CandidatePath {
    pub waypoints: Vec<Vec2>,
    pub channel_id: usize,
    pub fuel: f64,
    pub feasible: bool,
    pub length: f64,
}

/// Table-1-style metrics of a planned path.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Metrics {
    pub fuel: f64,
    /// Minimum distance from the path to any original obstacle polygon.
    pub safety: f64,
    pub length: f64,
    pub fuel_per_distance: f64,
    /// Triangulation vertices plus dual nodes explored during enumeration.
    pub states: usize,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct PlanDiagnostics {
    /// Channels dropped because padding blocked their passage.
    pub infeasible_channels: Vec<usize>,
    /// Per channel, how many sampled paths failed the feasibility checks.
    pub infeasible_path_counts: BTreeMap<usize, usize>,
    pub explored_dual_nodes: usize,
    pub enumeration_truncated: bool,
}

#[derive(Debug, Clone)]
pub struct PlanResult {
    pub chosen_channel: Channel,
    pub chosen_channel_id: usize,
    pub chosen_path: CandidatePath,
    pub per_channel_scores: BTreeMap<usize, f64>,
    pub all_candidates: BTreeMap<usize, Vec<CandidatePath>>,
    pub padding_reports: BTreeMap<usize, PaddingReport>,
    pub channels: Vec<Channel>,
    pub metrics: Metrics,
    pub diagnostics: PlanDiagnostics,
}

/// Pipeline configuration. Defaults follow the library's standard setup:
/// k = 16 homotopy classes, N = 500 samples per class, sigma = 0.95,
/// quadratic drag, alpha = 1.
#[derive(Debug, Clone, Serialize)]
pub struct PlanConfig {
    pub k: usize,
    pub n_paths: usize,
    pub sigma: f64,
    pub alpha: f64,
    pub k_exp: f64,
    /// Radius of the local region used for the effective-radius turn check;
    /// defaults to twice the field spacing.
    pub region_radius: Option<f64>,
    pub padding: PaddingScheme,
    /// Pad the world-boundary edges as well as obstacle edges.
    pub pad_bounds: bool,
    pub padding_samples: usize,
    pub heading_half_width: f64,
    pub heading_count: usize,
    pub seed: u64,
}

impl Default for PlanConfig {
    fn default() -> Self {
        PlanConfig {
            k: 16,
            n_paths: 500,
            sigma: 0.95,
            alpha: 1.0,
            k_exp: 2.0,
            region_radius: None,
            padding: PaddingScheme::Adaptive,
            pad_bounds: true,
            padding_samples: 500,
            heading_half_width: 30f64.to_radians(),
            heading_count: 13,
            seed: crate::DEFAULT_SEED,
        }
    }
}

impl PlanConfig {
    pub fn best_effort(&self) -> BestEffortConfig {
        BestEffortConfig {
            delta_phi: self.heading_half_width,
            heading_count: self.heading_count,
            n_samples: self.padding_samples,
            dt: crate::dynamics::PADDING_DT,
        }
    }
}

// ---------------------------------------------------------------------------
// Fuel cost
// ---------------------------------------------------------------------------

/// Fuel integral of a polyline with explicit quadrature step: composite
/// Simpson on each segment piece, segments split at the given params first
/// so the integrand stays smooth inside each piece.
pub fn fuel_cost_with_step(
    path: &[Vec2],
    flow: &impl Flow,
    vehicle: &VehicleModel,
    alpha: f64,
    k_exp: f64,
    max_step: f64,
    split_params: impl Fn(Vec2, Vec2) -> Vec<f64>,
) -> Result<f64, PlanError> {
    let v = vehicle.v_thrust;
    let scale = alpha * v.powf(k_exp);
    let mut total = 0.0;
    let mut arc = 0.0;
    for w in path.windows(2) {
        let (p, q) = (w[0], w[1]);
        let seg_len = p.dist(q);
        if seg_len < MERGE_EPS {
            continue;
        }
        let tangent = (q - p) / seg_len;
        let mut cuts = split_params(p, q);
        cuts.retain(|t| *t > 0.0 && *t < 1.0);
        cuts.push(0.0);
        cuts.push(1.0);
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

        let integrand = |t: f64| -> Result<f64, PlanError> {
            let pos = p.lerp(q, t);
            let denom = v + flow.velocity(pos).dot(tangent);
            if denom <= 0.0 {
                return Err(PlanError::FuelAssumption {
                    arc_length: arc + t * seg_len,
                });
            }
            Ok(scale / denom)
        };

        for piece in cuts.windows(2) {
            let (t0, t1) = (piece[0], piece[1]);
            let piece_len = (t1 - t0) * seg_len;
            if piece_len < 1e-15 {
                continue;
            }
            let n = (piece_len / max_step).ceil().max(1.0) as usize;
            // Composite Simpson over 2n subintervals.
            let h = (t1 - t0) / (2 * n) as f64;
            let mut acc = integrand(t0)? + integrand(t1)?;
            for j in 1..(2 * n) {
                let w = if j % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * integrand(t0 + h * j as f64)?;
            }
            total += acc * h * seg_len / 3.0;
        }
        arc += seg_len;
    }
    Ok(total)
}

fn grid_cut_params(field: &CurrentField) -> impl Fn(Vec2, Vec2) -> Vec<f64> + '_ {
    move |p: Vec2, q: Vec2| {
        let mut cuts = Vec::new();
        let spacing = field.spacing();
        let origin = field.origin();
        let (nx, ny) = field.dims();
        let mut axis_cuts = |p0: f64, q0: f64, o: f64, count: usize| {
            let d = q0 - p0;
            if d.abs() < 1e-15 {
                return;
            }
            for i in 0..count {
                let line = o + i as f64 * spacing;
                let t = (line - p0) / d;
                if t > 0.0 && t < 1.0 {
                    cuts.push(t);
                }
            }
        };
        axis_cuts(p.x, q.x, origin.x, nx);
        axis_cuts(p.y, q.y, origin.y, ny);
        cuts
    }
}

/// Fuel cost of a polyline under a sampled current field. The quadrature
/// step is `min(spacing / 4, 0.5)` and segments are split at grid lines.
pub fn fuel_cost(
    path: &[Vec2],
    field: &CurrentField,
    vehicle: &VehicleModel,
    alpha: f64,
    k_exp: f64,
) -> Result<f64, PlanError> {
    let step = (field.spacing() / 4.0).min(0.5);
    fuel_cost_with_step(path, field, vehicle, alpha, k_exp, step, grid_cut_params(field))
}

// ---------------------------------------------------------------------------
// Kinematic feasibility
// ---------------------------------------------------------------------------

/// Effective-radius fillet check at a waypoint corner.
///
/// The ground speed is taken conservatively as the larger of the incoming
/// and outgoing ground speeds under the mean current within radius `a` of
/// the corner; the corner is feasible when an arc of radius
/// `v'_world / omega_max` fits: both adjacent segments must be at least
/// `r' tan(delta / 2)` long.
pub fn check_turn_feasibility(
    prev: Vec2,
    cur: Vec2,
    next: Vec2,
    field: &CurrentField,
    vehicle: &VehicleModel,
    region_radius: f64,
) -> bool {
    let d_in = cur - prev;
    let d_out = next - cur;
    let len_in = d_in.norm();
    let len_out = d_out.norm();
    if len_in < MERGE_EPS || len_out < MERGE_EPS {
        return true;
    }
    let u_in = d_in / len_in;
    let u_out = d_out / len_out;
    let cos_delta = u_in.dot(u_out).clamp(-1.0, 1.0);
    let delta = cos_delta.acos();
    if delta < 1e-12 {
        return true;
    }
    if delta > std::f64::consts::PI - 1e-9 {
        return false;
    }
    let mean_c = field.mean_in_disc(cur, region_radius);
    let v = vehicle.v_thrust;
    let v_world = (u_in * v + mean_c).norm().max((u_out * v + mean_c).norm());
    let r_eff = v_world / vehicle.omega_max;
    let need = r_eff * (delta / 2.0).tan();
    len_in >= need - 1e-12 && len_out >= need - 1e-12
}

// ---------------------------------------------------------------------------
// Sampling and selection
// ---------------------------------------------------------------------------

/// Sample `n` candidate paths with waypoints uniform on the trimmed passing
/// edges. Paths failing the turn or offset-band checks are flagged
/// infeasible, not dropped.
#[allow(clippy::too_many_arguments)]
pub fn sample_paths(
    channel: &Channel,
    channel_id: usize,
    padded: &PaddedChannel,
    mesh: &NavMesh,
    env: &Environment,
    vehicle: &VehicleModel,
    config: &PlanConfig,
    seed: u64,
) -> Result<Vec<CandidatePath>, PlanError> {
    let region_radius = config
        .region_radius
        .unwrap_or(2.0 * env.field.spacing());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(config.n_paths);
    for _ in 0..config.n_paths {
        let mut waypoints = Vec::with_capacity(padded.passing_edges.len() + 2);
        waypoints.push(channel.start);
        for seg in &padded.passing_edges {
            let t: f64 = rng.random_range(0.0..=1.0);
            waypoints.push(seg.point_at(t));
        }
        waypoints.push(channel.goal);

        let turn_ok = (1..waypoints.len() - 1).all(|i| {
            check_turn_feasibility(
                waypoints[i - 1],
                waypoints[i],
                waypoints[i + 1],
                &env.field,
                vehicle,
                region_radius,
            )
        });
        let band_ok = offset_band_ok(&waypoints, padded, mesh);
        let fuel = fuel_cost(&waypoints, &env.field, vehicle, config.alpha, config.k_exp)?;
        let length = polyline_length(&waypoints);
        out.push(CandidatePath {
            waypoints,
            channel_id,
            fuel,
            feasible: turn_ok && band_ok,
            length,
        });
    }
    Ok(out)
}

/// Every path segment must keep at least the padded offset from every offset
/// constrained edge of the channel.
fn offset_band_ok(waypoints: &[Vec2], padded: &PaddedChannel, mesh: &NavMesh) -> bool {
    for w in waypoints.windows(2) {
        let seg = Segment::new(w[0], w[1]);
        for (&e, &off) in &padded.offsets {
            if off <= 0.0 {
                continue;
            }
            if mesh.edge_segment(e).distance_to_segment(&seg) < off - 1e-9 {
                return false;
            }
        }
    }
    true
}

/// Harmonic mean of the feasible-path fuels of each channel; `None` for
/// channels without feasible paths.
pub fn harmonic_mean_fuel(paths: &[CandidatePath]) -> Option<f64> {
    let mut count = 0usize;
    let mut inv_sum = 0.0;
    for p in paths.iter().filter(|p| p.feasible) {
        count += 1;
        inv_sum += 1.0 / p.fuel;
    }
    if count == 0 {
        None
    } else {
        Some(count as f64 / inv_sum)
    }
}

/// Channel minimizing the harmonic-mean fuel over feasible paths; ties break
/// to the smaller channel id.
pub fn select_homotopy(
    candidates: &BTreeMap<usize, Vec<CandidatePath>>,
) -> Result<(usize, BTreeMap<usize, f64>), PlanError> {
    let mut scores = BTreeMap::new();
    for (&id, paths) in candidates {
        if let Some(hm) = harmonic_mean_fuel(paths) {
            scores.insert(id, hm);
        }
    }
    let best = scores
        .iter()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(&id, _)| id)
        .ok_or(PlanError::NoFeasiblePlan)?;
    Ok((best, scores))
}

/// Feasible path of minimum fuel; ties break to shorter length, then lower
/// sample index.
pub fn select_path(paths: &[CandidatePath]) -> Option<&CandidatePath> {
    paths
        .iter()
        .filter(|p| p.feasible)
        .min_by(|a, b| {
            a.fuel
                .partial_cmp(&b.fuel)
                .unwrap()
                .then(a.length.partial_cmp(&b.length).unwrap())
        })
}

/// Minimum distance from a polyline to any original obstacle polygon.
pub fn path_safety(waypoints: &[Vec2], env: &Environment) -> f64 {
    let mut best = f64::INFINITY;
    for w in waypoints.windows(2) {
        let seg = Segment::new(w[0], w[1]);
        for obs in &env.obstacles {
            best = best.min(obs.distance_to_segment(&seg));
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Full pipeline
// ---------------------------------------------------------------------------

pub fn plan(
    env: &Environment,
    vehicle: &VehicleModel,
    start: Vec2,
    goal: Vec2,
    config: &PlanConfig,
) -> Result<PlanResult, PlanError> {
    let mesh = build_navmesh(env)?;
    let dual = build_dual(&mesh);
    let enumeration = enumerate_channels(&dual, &mesh, env, start, goal, config.k)?;
    if enumeration.channels.is_empty() {
        return Err(PlanError::NoFeasiblePlan);
    }

    let mut diagnostics = PlanDiagnostics {
        explored_dual_nodes: enumeration.explored_nodes,
        enumeration_truncated: enumeration.truncated,
        ..Default::default()
    };

    let mut padding_reports = BTreeMap::new();
    let mut all_candidates: BTreeMap<usize, Vec<CandidatePath>> = BTreeMap::new();
    for (id, channel) in enumeration.channels.iter().enumerate() {
        let report = match config.padding {
            PaddingScheme::Adaptive => compute_adaptive_padding(
                channel,
                &mesh,
                env,
                vehicle,
                config.sigma,
                &config.best_effort(),
                crate::derive_seed(config.seed, &[0x9AD, id as u64]),
                config.pad_bounds,
            ),
            PaddingScheme::Fixed(d) => fixed_padding(channel, &mesh, vehicle, d),
            PaddingScheme::None => no_padding(channel, &mesh, vehicle),
        };
        if !report.feasible {
            diagnostics.infeasible_channels.push(id);
            padding_reports.insert(id, report);
            continue;
        }
        let padded = PaddedChannel {
            passing_edges: report.padded_passing_edges.clone(),
            offsets: report.per_edge.clone(),
        };
        padding_reports.insert(id, report);
        let paths = sample_paths(
            channel,
            id,
            &padded,
            &mesh,
            env,
            vehicle,
            config,
            crate::derive_seed(config.seed, &[0x5A3, id as u64]),
        )?;
        diagnostics
            .infeasible_path_counts
            .insert(id, paths.iter().filter(|p| !p.feasible).count());
        all_candidates.insert(id, paths);
    }

    let (winner, scores) = select_homotopy(&all_candidates)?;
    let chosen_path = select_path(&all_candidates[&winner])
        .ok_or(PlanError::NoFeasiblePlan)?
        .clone();
    let chosen_channel = enumeration.channels[winner].clone();

    let metrics = Metrics {
        fuel: chosen_path.fuel,
        safety: path_safety(&chosen_path.waypoints, env),
        length: chosen_path.length,
        fuel_per_distance: chosen_path.fuel / chosen_path.length,
        states: mesh.vertices.len() + enumeration.explored_nodes,
    };

    Ok(PlanResult {
        chosen_channel,
        chosen_channel_id: winner,
        chosen_path,
        per_channel_scores: scores,
        all_candidates,
        padding_reports,
        channels: enumeration.channels,
        metrics,
        diagnostics,
    })
}
