//! Topologically distinct channels over the dual graph.
//!
//! A channel is a simple sequence of adjacent free triangles from the start
//! triangle to the goal triangle. Channels are grouped into homotopy classes
//! by crossing-sequence signatures: each obstacle anchors a ray, and a path's
//! signature is its reduced word of signed ray crossings. Two paths with the
//! same endpoints are homotopic iff their words agree, which also covers
//! concave obstacles where a single left/right flag is not enough.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::env::Environment;
use crate::geom::{Polygon, Vec2, MERGE_EPS};
use crate::mesh::{DualGraph, EdgeKey, NavMesh};

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("start position is inside an obstacle or outside bounds")]
    StartBlocked,
    #[error("goal position is inside an obstacle or outside bounds")]
    GoalBlocked,
    #[error("k must be at least 1")]
    BadBudget,
}

/// One signed ray crossing; `sign` is +1 or -1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Crossing {
    pub obstacle: usize,
    pub sign: i8,
}

/// Reduced word of ray crossings. Equal words (with shared endpoints) mean
/// the same homotopy class.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct HomotopySignature {
    word: Vec<Crossing>,
}

impl HomotopySignature {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn word(&self) -> &[Crossing] {
        &self.word
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    fn push_reduced(&mut self, c: Crossing) {
        if let Some(last) = self.word.last() {
            if last.obstacle == c.obstacle && last.sign == -c.sign {
                self.word.pop();
                return;
            }
        }
        self.word.push(c);
    }

    /// Reduced concatenation of two words.
    pub fn concat(&self, other: &HomotopySignature) -> HomotopySignature {
        let mut out = self.clone();
        for &c in &other.word {
            out.push_reduced(c);
        }
        out
    }
}

impl fmt::Display for HomotopySignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        for c in &self.word {
            if !first {
                write!(f, ".")?;
            }
            first = false;
            write!(f, "r{}{}", c.obstacle, if c.sign > 0 { "" } else { "'" })?;
        }
        Ok(())
    }
}

/// Half-line anchored at a representative point of an obstacle.
#[derive(Debug, Clone, Copy)]
pub struct Ray {
    pub obstacle: usize,
    pub anchor: Vec2,
    pub dir: Vec2,
}

/// Default anchor rays: one per obstacle, from the centroid pointing down.
pub fn anchor_rays(obstacles: &[Polygon]) -> Vec<Ray> {
    obstacles
        .iter()
        .enumerate()
        .map(|(i, o)| Ray {
            obstacle: i,
            anchor: o.centroid(),
            dir: Vec2::new(0.0, -1.0),
        })
        .collect()
}

fn point_on_ray(ray: &Ray, p: Vec2, tol: f64) -> bool {
    let rel = p - ray.anchor;
    let t = rel.dot(ray.dir);
    if t < -tol {
        return false;
    }
    (rel - ray.dir * t.max(0.0)).norm() <= tol
}

/// Crossing of the segment p->q with the ray, if any. The caller guarantees
/// no segment endpoint lies on the ray. Returns (t along the segment, sign).
fn segment_ray_crossing(ray: &Ray, p: Vec2, q: Vec2) -> Option<(f64, i8)> {
    let d = q - p;
    let denom = ray.dir.cross(d);
    if denom.abs() < 1e-15 {
        return None; // Parallel; overlap excluded by the endpoint guarantee.
    }
    let rel = p - ray.anchor;
    let s = ray.dir.cross(rel) / -denom; // param along segment
    let t = d.cross(rel) / -denom; // param along ray
    if s <= 0.0 || s >= 1.0 || t <= 0.0 {
        return None;
    }
    let sign = if denom > 0.0 { 1 } else { -1 };
    Some((s, sign))
}

/// Crossing word of a polyline against explicit rays. Rays are perturbed
/// deterministically while any path vertex sits on one.
pub fn path_signature_with_rays(path: &[Vec2], rays: &[Ray]) -> HomotopySignature {
    let mut rays: Vec<Ray> = rays.to_vec();
    for ray in rays.iter_mut() {
        let mut guard = 0;
        while path.iter().any(|&v| point_on_ray(ray, v, MERGE_EPS)) && guard < 64 {
            ray.dir = ray.dir.rotated(1e-6);
            guard += 1;
        }
    }
    let mut sig = HomotopySignature::empty();
    for w in path.windows(2) {
        // Crossings within one segment, ordered along it.
        let mut hits: Vec<(f64, Crossing)> = Vec::new();
        for ray in &rays {
            if let Some((s, sign)) = segment_ray_crossing(ray, w[0], w[1]) {
                hits.push((
                    s,
                    Crossing {
                        obstacle: ray.obstacle,
                        sign,
                    },
                ));
            }
        }
        hits.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for (_, c) in hits {
            sig.push_reduced(c);
        }
    }
    sig
}

/// Crossing word of a polyline using the default per-obstacle anchor rays.
pub fn path_signature(path: &[Vec2], obstacles: &[Polygon]) -> HomotopySignature {
    path_signature_with_rays(path, &anchor_rays(obstacles))
}

/// A simple triangle sequence from start to goal.
#[derive(Debug, Clone)]
pub struct Channel {
    pub triangle_seq: Vec<usize>,
    pub passing_edges: Vec<EdgeKey>,
    pub signature: HomotopySignature,
    pub start: Vec2,
    pub goal: Vec2,
}

impl Channel {
    /// Representative polyline: start, passing-edge midpoints, goal.
    pub fn midline(&self, mesh: &NavMesh) -> Vec<Vec2> {
        let mut pts = Vec::with_capacity(self.passing_edges.len() + 2);
        pts.push(self.start);
        for &e in &self.passing_edges {
            pts.push(mesh.edge_segment(e).midpoint());
        }
        pts.push(self.goal);
        pts
    }

    /// Direction of travel through triangle `i` of the sequence: entry point
    /// (start or previous passing-edge midpoint) toward exit point (next
    /// passing-edge midpoint or goal).
    pub fn midline_direction(&self, mesh: &NavMesh, i: usize) -> f64 {
        let entry = if i == 0 {
            self.start
        } else {
            mesh.edge_segment(self.passing_edges[i - 1]).midpoint()
        };
        let exit = if i == self.passing_edges.len() {
            self.goal
        } else {
            mesh.edge_segment(self.passing_edges[i]).midpoint()
        };
        let d = exit - entry;
        if d.norm() < MERGE_EPS {
            (self.goal - self.start).angle()
        } else {
            d.angle()
        }
    }
}

/// Result of channel enumeration, with search-effort diagnostics.
#[derive(Debug, Clone)]
pub struct ChannelEnumeration {
    pub channels: Vec<Channel>,
    /// Unique dual nodes touched by the search (the States contribution).
    pub explored_nodes: usize,
    pub total_expansions: usize,
    /// True when the expansion budget cut the search short.
    pub truncated: bool,
}

/// Cap on DFS expansions; generous for the intended mesh sizes.
const MAX_EXPANSIONS: usize = 2_000_000;

struct Dfs<'a> {
    graph: &'a DualGraph,
    goal: usize,
    stack: Vec<usize>,
    edges: Vec<EdgeKey>,
    on_path: Vec<bool>,
    found: Vec<(Vec<usize>, Vec<EdgeKey>)>,
    visited: BTreeSet<usize>,
    expansions: usize,
    truncated: bool,
}

impl Dfs<'_> {
    fn run(&mut self, node: usize) {
        if self.expansions >= MAX_EXPANSIONS {
            self.truncated = true;
            return;
        }
        self.expansions += 1;
        self.visited.insert(node);
        if node == self.goal {
            self.found.push((self.stack.clone(), self.edges.clone()));
            return;
        }
        // Neighbors pre-sorted by ascending triangle id.
        let neighbors = self.graph.adj[node].clone();
        for (next, edge) in neighbors {
            if self.on_path[next] {
                continue;
            }
            self.on_path[next] = true;
            self.stack.push(next);
            self.edges.push(edge);
            self.run(next);
            self.edges.pop();
            self.stack.pop();
            self.on_path[next] = false;
        }
    }
}

/// Enumerate up to `k` channels with pairwise distinct signatures.
///
/// All simple dual paths are enumerated depth-first (neighbors in ascending
/// triangle id), then grouped by signature keeping the representative with
/// the fewest triangles (ties to the lexicographically smaller sequence), and
/// the `k` classes with the shortest representatives are retained.
pub fn enumerate_channels(
    graph: &DualGraph,
    mesh: &NavMesh,
    env: &Environment,
    start: Vec2,
    goal: Vec2,
    k: usize,
) -> Result<ChannelEnumeration, ChannelError> {
    if k == 0 {
        return Err(ChannelError::BadBudget);
    }
    let start_tri = crate::mesh::locate_triangle(mesh, start).ok_or(ChannelError::StartBlocked)?;
    let goal_tri = crate::mesh::locate_triangle(mesh, goal).ok_or(ChannelError::GoalBlocked)?;
    let start_node = graph
        .node_of_triangle(start_tri)
        .ok_or(ChannelError::StartBlocked)?;
    let goal_node = graph
        .node_of_triangle(goal_tri)
        .ok_or(ChannelError::GoalBlocked)?;

    let mut dfs = Dfs {
        graph,
        goal: goal_node,
        stack: vec![start_node],
        edges: Vec::new(),
        on_path: {
            let mut v = vec![false; graph.node_count()];
            v[start_node] = true;
            v
        },
        found: Vec::new(),
        visited: BTreeSet::new(),
        expansions: 0,
        truncated: false,
    };
    dfs.run(start_node);

    let rays = anchor_rays(&env.obstacles);
    let mut candidates: Vec<Channel> = dfs
        .found
        .iter()
        .map(|(nodes, edges)| {
            let triangle_seq: Vec<usize> = nodes.iter().map(|&n| graph.node_tris[n]).collect();
            let mut ch = Channel {
                triangle_seq,
                passing_edges: edges.clone(),
                signature: HomotopySignature::empty(),
                start,
                goal,
            };
            ch.signature = path_signature_with_rays(&ch.midline(mesh), &rays);
            ch
        })
        .collect();

    candidates.sort_by(|a, b| {
        a.triangle_seq
            .len()
            .cmp(&b.triangle_seq.len())
            .then_with(|| a.triangle_seq.cmp(&b.triangle_seq))
    });

    let mut seen = BTreeSet::new();
    let mut channels = Vec::new();
    for ch in candidates {
        if seen.insert(ch.signature.clone()) {
            channels.push(ch);
            if channels.len() == k {
                break;
            }
        }
    }

    Ok(ChannelEnumeration {
        channels,
        explored_nodes: dfs.visited.len(),
        total_expansions: dfs.expansions,
        truncated: dfs.truncated,
    })
}

/// Interval of the segment p->q inside a triangle (boundary inclusive), as
/// params along the segment, or `None` when disjoint.
fn clip_to_triangle(p: Vec2, q: Vec2, tri: [Vec2; 3]) -> Option<(f64, f64)> {
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    for i in 0..3 {
        let a = tri[i];
        let b = tri[(i + 1) % 3];
        let n = (b - a).perp(); // inward normal of a CCW triangle
        let dp = n.dot(p - a);
        let dq = n.dot(q - a);
        // Inside when n . (x - a) >= 0 (with slack).
        let (dp, dq) = (dp + MERGE_EPS, dq + MERGE_EPS);
        if dp < 0.0 && dq < 0.0 {
            return None;
        }
        if dp < 0.0 {
            t0 = t0.max(dp / (dp - dq));
        } else if dq < 0.0 {
            t1 = t1.min(dp / (dp - dq));
        }
    }
    if t0 <= t1 {
        Some((t0, t1))
    } else {
        None
    }
}

/// True iff the whole polyline lies within the union of the channel's
/// triangles (boundary inclusive).
pub fn channel_contains(channel: &Channel, mesh: &NavMesh, path: &[Vec2]) -> bool {
    if path.is_empty() {
        return true;
    }
    if path.len() == 1 {
        return channel
            .triangle_seq
            .iter()
            .any(|&t| mesh.contains_point(t, path[0]));
    }
    let tris: Vec<[Vec2; 3]> = channel
        .triangle_seq
        .iter()
        .map(|&t| mesh.triangle_points(t))
        .collect();
    for w in path.windows(2) {
        let mut intervals: Vec<(f64, f64)> = tris
            .iter()
            .filter_map(|&tri| clip_to_triangle(w[0], w[1], tri))
            .collect();
        intervals.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut covered = 0.0f64;
        let slack = 1e-9;
        for (a, b) in intervals {
            if a > covered + slack {
                return false;
            }
            covered = covered.max(b);
        }
        if covered < 1.0 - slack {
            return false;
        }
    }
    true
}

/// Sample a deterministic interior polyline of the channel: points at
/// parameter `t` along each passing edge.
pub fn channel_path_at(channel: &Channel, mesh: &NavMesh, t: f64) -> Vec<Vec2> {
    let mut pts = vec![channel.start];
    for &e in &channel.passing_edges {
        pts.push(mesh.edge_segment(e).point_at(t));
    }
    pts.push(channel.goal);
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{CurrentField, VehicleModel};
    use crate::geom::Rect;
    use crate::mesh::{build_dual, build_navmesh};

    fn env_with(obstacles: Vec<Polygon>) -> Environment {
        let bounds = Rect::new(Vec2::ZERO, Vec2::new(100.0, 100.0));
        Environment::new(
            "t",
            bounds,
            obstacles,
            CurrentField::uniform(bounds, Vec2::ZERO, 10.0),
            VehicleModel {
                v_thrust: 1.0,
                omega_max: 0.611,
                length: 2.0,
            },
        )
        .unwrap()
    }

    fn enumerate(env: &Environment, start: Vec2, goal: Vec2, k: usize) -> ChannelEnumeration {
        let mesh = build_navmesh(env).unwrap();
        let dual = build_dual(&mesh);
        enumerate_channels(&dual, &mesh, env, start, goal, k).unwrap()
    }

    #[test]
    fn empty_map_single_channel() {
        let env = env_with(vec![]);
        let e = enumerate(&env, Vec2::new(10.0, 10.0), Vec2::new(90.0, 90.0), 8);
        assert_eq!(e.channels.len(), 1);
        assert!(e.channels[0].signature.is_empty());
    }

    #[test]
    fn one_obstacle_two_channels() {
        let env = env_with(vec![Polygon::rectangle(
            Vec2::new(40.0, 30.0),
            Vec2::new(60.0, 70.0),
        )]);
        let e = enumerate(&env, Vec2::new(10.0, 50.0), Vec2::new(90.0, 50.0), 4);
        assert_eq!(e.channels.len(), 2);
        assert_ne!(e.channels[0].signature, e.channels[1].signature);
    }

    #[test]
    fn channel_count_bounded_by_2_pow_n() {
        let obstacles = vec![
            Polygon::rectangle(Vec2::new(20.0, 20.0), Vec2::new(32.0, 40.0)),
            Polygon::rectangle(Vec2::new(45.0, 55.0), Vec2::new(60.0, 72.0)),
            Polygon::rectangle(Vec2::new(70.0, 25.0), Vec2::new(82.0, 45.0)),
        ];
        let n = obstacles.len() as u32;
        let env = env_with(obstacles);
        let e = enumerate(&env, Vec2::new(5.0, 50.0), Vec2::new(95.0, 50.0), 64);
        assert!(e.channels.len() <= 2usize.pow(n));
        // Signatures pairwise distinct.
        let sigs: BTreeSet<_> = e.channels.iter().map(|c| c.signature.clone()).collect();
        assert_eq!(sigs.len(), e.channels.len());
    }

    #[test]
    fn start_in_obstacle_is_error() {
        let env = env_with(vec![Polygon::rectangle(
            Vec2::new(40.0, 30.0),
            Vec2::new(60.0, 70.0),
        )]);
        let mesh = build_navmesh(&env).unwrap();
        let dual = build_dual(&mesh);
        let err = enumerate_channels(&dual, &mesh, &env, Vec2::new(50.0, 50.0), Vec2::new(90.0, 50.0), 4)
            .unwrap_err();
        assert!(matches!(err, ChannelError::StartBlocked));
    }

    #[test]
    fn straight_path_empty_word() {
        // Path passes above the obstacle, so the downward anchor ray is never
        // crossed.
        let obstacles = vec![Polygon::rectangle(Vec2::new(40.0, 60.0), Vec2::new(60.0, 80.0))];
        let path = [Vec2::new(10.0, 90.0), Vec2::new(90.0, 90.0)];
        let sig = path_signature(&path, &obstacles);
        assert!(sig.is_empty());
        // Passing under the obstacle crosses it exactly once.
        let below = [Vec2::new(10.0, 20.0), Vec2::new(90.0, 20.0)];
        assert_eq!(path_signature(&below, &obstacles).word().len(), 1);
    }

    #[test]
    fn opposite_sides_differ() {
        let obstacles = vec![Polygon::rectangle(Vec2::new(40.0, 40.0), Vec2::new(60.0, 60.0))];
        let above = [Vec2::new(10.0, 50.0), Vec2::new(10.0, 90.0), Vec2::new(90.0, 90.0), Vec2::new(90.0, 50.0)];
        let below = [Vec2::new(10.0, 50.0), Vec2::new(10.0, 10.0), Vec2::new(90.0, 10.0), Vec2::new(90.0, 50.0)];
        let sa = path_signature(&above, &obstacles);
        let sb = path_signature(&below, &obstacles);
        assert_ne!(sa, sb);
        // The below path crosses the downward ray exactly once.
        assert_eq!(sb.word().len(), 1);
        assert!(sa.is_empty());
    }

    #[test]
    fn back_and_forth_cancels() {
        let obstacles = vec![Polygon::rectangle(Vec2::new(40.0, 40.0), Vec2::new(60.0, 60.0))];
        // Dip below the ray anchor and come back on the same side.
        let path = [
            Vec2::new(30.0, 20.0),
            Vec2::new(60.0, 20.0),
            Vec2::new(30.0, 19.0),
        ];
        let sig = path_signature(&path, &obstacles);
        assert!(sig.is_empty(), "got {sig}");
    }

    #[test]
    fn concat_is_reduced_concatenation() {
        let obstacles = vec![
            Polygon::rectangle(Vec2::new(20.0, 40.0), Vec2::new(30.0, 60.0)),
            Polygon::rectangle(Vec2::new(60.0, 40.0), Vec2::new(70.0, 60.0)),
        ];
        let mid = Vec2::new(50.0, 10.0);
        let p1 = [Vec2::new(10.0, 10.0), mid];
        let p2 = [mid, Vec2::new(90.0, 10.0)];
        let whole = [Vec2::new(10.0, 10.0), mid, Vec2::new(90.0, 10.0)];
        let s = path_signature(&whole, &obstacles);
        let c = path_signature(&p1, &obstacles).concat(&path_signature(&p2, &obstacles));
        assert_eq!(s, c);
    }

    #[test]
    fn contains_midline_and_rejects_outside() {
        let env = env_with(vec![Polygon::rectangle(
            Vec2::new(40.0, 30.0),
            Vec2::new(60.0, 70.0),
        )]);
        let mesh = build_navmesh(&env).unwrap();
        let dual = build_dual(&mesh);
        let e = enumerate_channels(
            &dual,
            &mesh,
            &env,
            Vec2::new(10.0, 50.0),
            Vec2::new(90.0, 50.0),
            4,
        )
        .unwrap();
        for ch in &e.channels {
            assert!(channel_contains(ch, &mesh, &ch.midline(&mesh)));
        }
        // A path through the obstacle is not inside any channel.
        let through = [Vec2::new(10.0, 50.0), Vec2::new(90.0, 50.0)];
        assert!(!channel_contains(&e.channels[0], &mesh, &through));
    }

    #[test]
    fn contains_is_boundary_inclusive() {
        let env = env_with(vec![]);
        let mesh = build_navmesh(&env).unwrap();
        let dual = build_dual(&mesh);
        let e = enumerate_channels(
            &dual,
            &mesh,
            &env,
            Vec2::new(10.0, 20.0),
            Vec2::new(90.0, 80.0),
            2,
        )
        .unwrap();
        let ch = &e.channels[0];
        assert_eq!(ch.passing_edges.len(), 1, "start and goal straddle the diagonal");
        // Touch a passing edge endpoint.
        let edge = mesh.edge_segment(ch.passing_edges[0]);
        let path = [ch.start, edge.a, ch.goal];
        assert!(channel_contains(ch, &mesh, &path));
    }

    #[test]
    fn within_channel_paths_share_signature() {
        let env = env_with(vec![
            Polygon::rectangle(Vec2::new(30.0, 30.0), Vec2::new(45.0, 70.0)),
            Polygon::rectangle(Vec2::new(60.0, 20.0), Vec2::new(75.0, 55.0)),
        ]);
        let mesh = build_navmesh(&env).unwrap();
        let dual = build_dual(&mesh);
        let e = enumerate_channels(
            &dual,
            &mesh,
            &env,
            Vec2::new(10.0, 50.0),
            Vec2::new(90.0, 60.0),
            16,
        )
        .unwrap();
        assert!(e.channels.len() >= 2);
        for ch in &e.channels {
            for &t in &[0.2, 0.5, 0.8] {
                let path = channel_path_at(ch, &mesh, t);
                assert_eq!(
                    path_signature(&path, &env.obstacles),
                    ch.signature,
                    "channel {:?} sample t={t}",
                    ch.triangle_seq
                );
            }
        }
    }
}
