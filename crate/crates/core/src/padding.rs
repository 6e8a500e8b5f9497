//! Adaptive non-navigability padding.
//!
//! For each constrained edge bounding a channel triangle, hard-over turns are
//! sampled from the edge under the local disturbance statistics and the
//! sigma-quantile of their encroachment depths becomes that edge's offset.
//! Offsets depend on the travel direction through the triangle, so the same
//! edge can receive different offsets in different channels. Passing edges
//! are trimmed by the offsets meeting their endpoints; a channel whose
//! trimmed passage cannot fit the vehicle is infeasible.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::dynamics::{best_effort_samples_from_stats, BestEffortConfig};
use crate::env::{Environment, VehicleModel};
use crate::geom::{Polygon, Segment, MERGE_EPS};
use crate::homotopy::Channel;
use crate::mesh::{EdgeKey, NavMesh};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PaddingScheme {
    Adaptive,
    Fixed(f64),
    None,
}

impl std::fmt::Display for PaddingScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PaddingScheme::Adaptive => write!(f, "adaptive"),
            PaddingScheme::Fixed(d) => write!(f, "fixed:{d}"),
            PaddingScheme::None => write!(f, "none"),
        }
    }
}

/// Per-channel padding offsets and the trimmed passage they induce.
#[derive(Debug, Clone)]
pub struct PaddingReport {
    pub per_edge: BTreeMap<EdgeKey, f64>,
    pub sigma: f64,
    pub scheme: PaddingScheme,
    pub feasible: bool,
    /// Passing edges after trimming, one per channel passing edge.
    pub padded_passing_edges: Vec<Segment>,
    /// Edges whose offset hit the triangle inradius clamp.
    pub clamped_edges: Vec<EdgeKey>,
}

/// Trimmed channel geometry produced by [`apply_padding`].
#[derive(Debug, Clone)]
pub struct PaddedChannel {
    pub passing_edges: Vec<Segment>,
    pub offsets: BTreeMap<EdgeKey, f64>,
}

/// Linear-interpolated order statistic of `samples` at probability `p`.
pub fn quantile(samples: &[f64], p: f64) -> f64 {
    assert!(!samples.is_empty(), "quantile of empty sample set");
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rank = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let t = rank - lo as f64;
        sorted[lo] * (1.0 - t) + sorted[hi] * t
    }
}

/// True when the edge lies along the bounds rectangle.
pub fn is_bounds_edge(mesh: &NavMesh, env: &Environment, e: EdgeKey) -> bool {
    let a = mesh.vertices[e.0];
    let b = mesh.vertices[e.1];
    let r = env.bounds;
    let tol = MERGE_EPS;
    ((a.x - r.min.x).abs() <= tol && (b.x - r.min.x).abs() <= tol)
        || ((a.x - r.max.x).abs() <= tol && (b.x - r.max.x).abs() <= tol)
        || ((a.y - r.min.y).abs() <= tol && (b.y - r.min.y).abs() <= tol)
        || ((a.y - r.max.y).abs() <= tol && (b.y - r.max.y).abs() <= tol)
}

/// Orient `e` as a segment with `free_side` on its left.
fn oriented_toward(mesh: &NavMesh, e: EdgeKey, free_side: crate::geom::Vec2) -> Segment {
    let seg = mesh.edge_segment(e);
    if seg.side_of(free_side) >= 0.0 {
        seg
    } else {
        seg.reversed()
    }
}


/// Encroachment-depth quantile from best-effort clearance samples.
fn offset_from_samples(samples: &[f64], sigma: f64) -> f64 {
    let encroachments: Vec<f64> = samples.iter().map(|c| -c).collect();
    quantile(&encroachments, sigma).max(0.0)
}

/// Compute adaptive per-edge offsets for one channel at risk bound `sigma`.
///
/// `pad_bounds` controls whether the world-boundary edges also get padded
/// (the default) or only obstacle edges.
#[allow(clippy::too_many_arguments)]
pub fn compute_adaptive_padding(
    channel: &Channel,
    mesh: &NavMesh,
    env: &Environment,
    vehicle: &VehicleModel,
    sigma: f64,
    cfg: &BestEffortConfig,
    seed: u64,
    pad_bounds: bool,
) -> PaddingReport {
    assert!(sigma > 0.0 && sigma < 1.0, "sigma must lie in (0, 1)");
    let mut per_edge: BTreeMap<EdgeKey, f64> = BTreeMap::new();
    let mut clamped_edges = Vec::new();

    for (m, &tri) in channel.triangle_seq.iter().enumerate() {
        let phi = channel.midline_direction(mesh, m);
        let region = Polygon::new(mesh.triangle_points(tri).to_vec());
        let stats = env.field.stats_in_polygon(&region);
        for e in mesh.constrained_edges_of(tri) {
            if !pad_bounds && is_bounds_edge(mesh, env, e) {
                per_edge.entry(e).or_insert(0.0);
                continue;
            }
            let edge = oriented_toward(mesh, e, mesh.centroid(tri));
            let edge_seed = crate::derive_seed(seed, &[m as u64, e.0 as u64, e.1 as u64]);
            let samples =
                best_effort_samples_from_stats(&stats, phi, edge, vehicle, cfg, edge_seed);
            let offset = offset_from_samples(&samples, sigma);
            // The raw quantile is kept even when it exceeds the triangle: the
            // passing-edge trim then blocks the passage, which is the point.
            // The clamp list flags such edges for the feasibility re-check
            // and keeps the drawn band inside the triangle.
            if offset > mesh.inradius(tri) {
                clamped_edges.push(e);
            }
            let slot = per_edge.entry(e).or_insert(0.0);
            *slot = slot.max(offset);
        }
    }

    finish_report(
        channel,
        mesh,
        vehicle,
        per_edge,
        sigma,
        PaddingScheme::Adaptive,
        clamped_edges,
    )
}

/// Uniform offset `d` on every constrained edge of the channel.
pub fn fixed_padding(
    channel: &Channel,
    mesh: &NavMesh,
    vehicle: &VehicleModel,
    d: f64,
) -> PaddingReport {
    assert!(d >= 0.0, "fixed padding distance must be >= 0");
    let mut per_edge = BTreeMap::new();
    for &tri in &channel.triangle_seq {
        for e in mesh.constrained_edges_of(tri) {
            per_edge.insert(e, d);
        }
    }
    let scheme = if d == 0.0 {
        PaddingScheme::None
    } else {
        PaddingScheme::Fixed(d)
    };
    finish_report(channel, mesh, vehicle, per_edge, 1.0, scheme, Vec::new())
}

/// Zero padding on every constrained edge of the channel.
pub fn no_padding(channel: &Channel, mesh: &NavMesh, vehicle: &VehicleModel) -> PaddingReport {
    fixed_padding(channel, mesh, vehicle, 0.0)
}

fn finish_report(
    channel: &Channel,
    mesh: &NavMesh,
    vehicle: &VehicleModel,
    per_edge: BTreeMap<EdgeKey, f64>,
    sigma: f64,
    scheme: PaddingScheme,
    clamped_edges: Vec<EdgeKey>,
) -> PaddingReport {
    let mut report = PaddingReport {
        per_edge,
        sigma,
        scheme,
        feasible: true,
        padded_passing_edges: Vec::new(),
        clamped_edges,
    };
    match apply_padding(channel, &report, mesh, vehicle) {
        Ok(padded) => {
            report.padded_passing_edges = padded.passing_edges;
        }
        Err(_) => {
            report.feasible = false;
        }
    }
    report
}

/// Channel blocked by padding: some passing edge's usable length cannot fit
/// the vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("passage blocked by padding at passing edge {passing_edge_index}")]
pub struct InfeasibleChannel {
    pub passing_edge_index: usize,
}

/// Scan resolution for the per-passing-edge offset-band restriction.
const TRIM_SCAN: usize = 256;

/// Trim each passing edge to the sub-segment that respects the offset band
/// of every padded constrained edge of the two adjacent triangles (the
/// longest contiguous feasible run); infeasible when the usable length of
/// any passing edge is at most the vehicle length.
///
/// Because a passing edge shares its endpoints with the constrained edges
/// meeting it, the band restriction automatically trims both ends by at
/// least the incident offsets, with the correct angular geometry.
pub fn apply_padding(
    channel: &Channel,
    report: &PaddingReport,
    mesh: &NavMesh,
    vehicle: &VehicleModel,
) -> Result<PaddedChannel, InfeasibleChannel> {
    let mut passing_edges = Vec::with_capacity(channel.passing_edges.len());
    for (i, &pe) in channel.passing_edges.iter().enumerate() {
        let seg = mesh.edge_segment(pe);
        let len = seg.length();
        let constraints: Vec<(Segment, f64)> = report
            .per_edge
            .iter()
            .filter(|(_, &off)| off > 0.0)
            .map(|(&e, &off)| (mesh.edge_segment(e), off))
            .collect();

        let feasible = |t: f64| {
            let p = seg.point_at(t);
            constraints
                .iter()
                .all(|(c, off)| c.distance_to_point(p) >= *off - 1e-9)
        };
        // Longest contiguous feasible run over a fixed scan.
        let mut best: Option<(usize, usize)> = None;
        let mut run_start: Option<usize> = None;
        for j in 0..=TRIM_SCAN {
            let ok = feasible(j as f64 / TRIM_SCAN as f64);
            match (ok, run_start) {
                (true, None) => run_start = Some(j),
                (false, Some(s)) => {
                    if best.map_or(true, |(bs, be)| j - 1 - s > be - bs) {
                        best = Some((s, j - 1));
                    }
                    run_start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = run_start {
            if best.map_or(true, |(bs, be)| TRIM_SCAN - s > be - bs) {
                best = Some((s, TRIM_SCAN));
            }
        }
        let usable = best.map(|(s, e)| (e - s) as f64 / TRIM_SCAN as f64 * len);
        let Some((s, e)) = best else {
            return Err(InfeasibleChannel {
                passing_edge_index: i,
            });
        };
        if usable.unwrap() <= vehicle.length {
            return Err(InfeasibleChannel {
                passing_edge_index: i,
            });
        }
        passing_edges.push(Segment::new(
            seg.point_at(s as f64 / TRIM_SCAN as f64),
            seg.point_at(e as f64 / TRIM_SCAN as f64),
        ));
    }
    Ok(PaddedChannel {
        passing_edges,
        offsets: report.per_edge.clone(),
    })
}

/// Fraction of fresh best-effort realizations whose encroachment exceeds
/// `offset`; used to validate the probabilistic bound.
pub fn encroachment_rate(
    stats: &crate::env::FieldStats,
    phi: f64,
    edge: Segment,
    vehicle: &VehicleModel,
    cfg: &BestEffortConfig,
    offset: f64,
    seed: u64,
) -> f64 {
    let samples = best_effort_samples_from_stats(stats, phi, edge, vehicle, cfg, seed);
    let n = samples.len() as f64;
    samples.iter().filter(|&&c| -c > offset).count() as f64 / n
}
