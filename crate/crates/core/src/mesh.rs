//! Navigation mesh: constrained Delaunay triangulation of the world with
//! obstacle and bounds edges preserved, plus the dual adjacency graph used
//! for channel search.
//!
//! Triangulation is delegated to `spade` (robust predicates, deterministic
//! for a fixed insertion order); this module owns vertex de-duplication,
//! constraint splitting at collinear vertices, triangle labeling, and the
//! canonical ordering that the rest of the pipeline relies on.

use std::collections::{BTreeMap, BTreeSet};

use spade::{ConstrainedDelaunayTriangulation, Point2, Triangulation};
use thiserror::Error;

use crate::env::Environment;
use crate::geom::{
    point_in_triangle, triangle_area, triangle_inradius, Segment, Vec2, MERGE_EPS,
};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("obstacle {index} is degenerate: {reason}")]
    DegenerateObstacle { index: usize, reason: String },
    #[error("triangulation failed: {0}")]
    Triangulation(String),
}

/// Undirected edge key: vertex indices with the smaller first.
pub type EdgeKey = (usize, usize);

pub fn edge_key(a: usize, b: usize) -> EdgeKey {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriLabel {
    Free,
    Hole,
}

/// Constrained triangulation of the world rectangle.
#[derive(Debug, Clone)]
pub struct NavMesh {
    pub vertices: Vec<Vec2>,
    /// Vertex-index triples in CCW order, sorted canonically.
    pub triangles: Vec<[usize; 3]>,
    pub constrained_edges: BTreeSet<EdgeKey>,
    pub labels: Vec<TriLabel>,
}

impl NavMesh {
    pub fn triangle_points(&self, tri: usize) -> [Vec2; 3] {
        let [a, b, c] = self.triangles[tri];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn centroid(&self, tri: usize) -> Vec2 {
        let [a, b, c] = self.triangle_points(tri);
        (a + b + c) / 3.0
    }

    pub fn triangle_area(&self, tri: usize) -> f64 {
        let [a, b, c] = self.triangle_points(tri);
        triangle_area(a, b, c)
    }

    pub fn inradius(&self, tri: usize) -> f64 {
        let [a, b, c] = self.triangle_points(tri);
        triangle_inradius(a, b, c)
    }

    pub fn is_free(&self, tri: usize) -> bool {
        self.labels[tri] == TriLabel::Free
    }

    pub fn free_triangles(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.triangles.len()).filter(|&t| self.is_free(t))
    }

    /// Edge keys of a triangle.
    pub fn triangle_edges(&self, tri: usize) -> [EdgeKey; 3] {
        let [a, b, c] = self.triangles[tri];
        [edge_key(a, b), edge_key(b, c), edge_key(c, a)]
    }

    /// Constrained edges bounding a triangle.
    pub fn constrained_edges_of(&self, tri: usize) -> Vec<EdgeKey> {
        self.triangle_edges(tri)
            .into_iter()
            .filter(|e| self.constrained_edges.contains(e))
            .collect()
    }

    pub fn edge_segment(&self, e: EdgeKey) -> Segment {
        Segment::new(self.vertices[e.0], self.vertices[e.1])
    }

    pub fn contains_point(&self, tri: usize, p: Vec2) -> bool {
        let [a, b, c] = self.triangle_points(tri);
        point_in_triangle(p, a, b, c)
    }
}

/// Dual adjacency graph over free triangles. Node ids index `node_tris`.
#[derive(Debug, Clone)]
pub struct DualGraph {
    /// Mesh triangle id per node.
    pub node_tris: Vec<usize>,
    /// For each node, (neighbor node, shared passing edge) sorted by
    /// neighboring triangle id.
    pub adj: Vec<Vec<(usize, EdgeKey)>>,
    node_of_tri: BTreeMap<usize, usize>,
}

impl DualGraph {
    pub fn node_count(&self) -> usize {
        self.node_tris.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn node_of_triangle(&self, tri: usize) -> Option<usize> {
        self.node_of_tri.get(&tri).copied()
    }
}

struct VertexPool {
    points: Vec<Vec2>,
}

impl VertexPool {
    fn new() -> Self {
        VertexPool { points: Vec::new() }
    }

    /// Index of `p`, merging points closer than [`MERGE_EPS`].
    fn intern(&mut self, p: Vec2) -> usize {
        for (i, &q) in self.points.iter().enumerate() {
            if p.dist(q) <= MERGE_EPS {
                return i;
            }
        }
        self.points.push(p);
        self.points.len() - 1
    }
}

/// Build the navigation mesh for an environment: bounds rectangle and every
/// obstacle boundary inserted as constraints, triangles labeled free or hole.
pub fn build_navmesh(env: &Environment) -> Result<NavMesh, MeshError> {
    let mut pool = VertexPool::new();
    let mut constraint_segments: Vec<(usize, usize)> = Vec::new();

    let corner_ids: Vec<usize> = env
        .bounds
        .corners()
        .iter()
        .map(|&c| pool.intern(c))
        .collect();

    let mut obstacle_vertex_ids: Vec<Vec<usize>> = Vec::new();
    for (index, obs) in env.obstacles.iter().enumerate() {
        if obs.len() < 3 {
            return Err(MeshError::DegenerateObstacle {
                index,
                reason: "fewer than 3 vertices".into(),
            });
        }
        if obs.area() < 1e-12 {
            return Err(MeshError::DegenerateObstacle {
                index,
                reason: "zero area".into(),
            });
        }
        let ids: Vec<usize> = obs.vertices().iter().map(|&v| pool.intern(v)).collect();
        let mut seen = BTreeSet::new();
        for &id in &ids {
            if !seen.insert(id) {
                return Err(MeshError::DegenerateObstacle {
                    index,
                    reason: "duplicate vertices".into(),
                });
            }
        }
        obstacle_vertex_ids.push(ids);
    }

    for i in 0..4 {
        constraint_segments.push((corner_ids[i], corner_ids[(i + 1) % 4]));
    }
    for ids in &obstacle_vertex_ids {
        let n = ids.len();
        for i in 0..n {
            constraint_segments.push((ids[i], ids[(i + 1) % n]));
        }
    }

    // Split constraints at any pooled vertex lying on their interior, so no
    // constraint passes through a vertex (spade rejects that).
    let split_segments = split_constraints(&pool.points, &constraint_segments);

    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> =
        ConstrainedDelaunayTriangulation::new();
    let mut handles = Vec::with_capacity(pool.points.len());
    for &p in &pool.points {
        let h = cdt
            .insert(Point2::new(p.x, p.y))
            .map_err(|e| MeshError::Triangulation(format!("{e:?}")))?;
        handles.push(h);
    }
    for &(a, b) in &split_segments {
        if a == b {
            continue;
        }
        if !cdt.can_add_constraint(handles[a], handles[b]) {
            return Err(MeshError::Triangulation(format!(
                "constraint ({a}, {b}) conflicts with an existing constraint"
            )));
        }
        cdt.add_constraint(handles[a], handles[b]);
    }

    // Extract vertices in spade index order (insertion order; no removals).
    let vertices: Vec<Vec2> = cdt
        .vertices()
        .map(|v| Vec2::new(v.position().x, v.position().y))
        .collect();

    let mut triangles: Vec<[usize; 3]> = cdt
        .inner_faces()
        .map(|f| {
            let [a, b, c] = f.vertices();
            canonical_tri([a.index(), b.index(), c.index()], &vertices)
        })
        .collect();
    triangles.sort();

    let constrained_edges: BTreeSet<EdgeKey> = cdt
        .undirected_edges()
        .filter(|e| e.is_constraint_edge())
        .map(|e| {
            let [p, q] = e.vertices();
            edge_key(p.index(), q.index())
        })
        .collect();

    let labels = triangles
        .iter()
        .map(|t| {
            let centroid = (vertices[t[0]] + vertices[t[1]] + vertices[t[2]]) / 3.0;
            if env.obstacles.iter().any(|o| o.contains_strict(centroid)) {
                TriLabel::Hole
            } else {
                TriLabel::Free
            }
        })
        .collect();

    Ok(NavMesh {
        vertices,
        triangles,
        constrained_edges,
        labels,
    })
}

/// Rotate the triple so the smallest vertex index comes first, preserving CCW
/// orientation.
fn canonical_tri(t: [usize; 3], vertices: &[Vec2]) -> [usize; 3] {
    let mut t = t;
    let ccw = (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]) > 0.0;
    if !ccw {
        t.swap(1, 2);
    }
    let min_pos = (0..3).min_by_key(|&i| t[i]).unwrap();
    [t[min_pos], t[(min_pos + 1) % 3], t[(min_pos + 2) % 3]]
}

fn split_constraints(points: &[Vec2], segments: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for &(a, b) in segments {
        let seg = Segment::new(points[a], points[b]);
        let mut on_line: Vec<(f64, usize)> = vec![(0.0, a), (1.0, b)];
        for (i, &p) in points.iter().enumerate() {
            if i == a || i == b {
                continue;
            }
            if seg.distance_to_point(p) <= MERGE_EPS {
                on_line.push((seg.closest_param(p), i));
            }
        }
        on_line.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        for w in on_line.windows(2) {
            out.push((w[0].1, w[1].1));
        }
    }
    out
}

/// Dual graph: one node per free triangle, edges between free triangles
/// sharing an unconstrained edge.
pub fn build_dual(mesh: &NavMesh) -> DualGraph {
    let node_tris: Vec<usize> = mesh.free_triangles().collect();
    let node_of_tri: BTreeMap<usize, usize> = node_tris
        .iter()
        .enumerate()
        .map(|(n, &t)| (t, n))
        .collect();

    let mut edge_to_tris: BTreeMap<EdgeKey, Vec<usize>> = BTreeMap::new();
    for &tri in &node_tris {
        for e in mesh.triangle_edges(tri) {
            edge_to_tris.entry(e).or_default().push(tri);
        }
    }

    let mut adj: Vec<Vec<(usize, EdgeKey)>> = vec![Vec::new(); node_tris.len()];
    for (e, tris) in &edge_to_tris {
        if tris.len() == 2 && !mesh.constrained_edges.contains(e) {
            let (n0, n1) = (node_of_tri[&tris[0]], node_of_tri[&tris[1]]);
            adj[n0].push((n1, *e));
            adj[n1].push((n0, *e));
        }
    }
    for (n, list) in adj.iter_mut().enumerate() {
        let _ = n;
        list.sort_by_key(|&(m, _)| node_tris[m]);
    }

    DualGraph {
        node_tris,
        adj,
        node_of_tri,
    }
}

/// Free triangle containing `x` (boundary inclusive, lowest id wins); `None`
/// inside holes or outside bounds.
pub fn locate_triangle(mesh: &NavMesh, x: Vec2) -> Option<usize> {
    (0..mesh.triangles.len()).find(|&t| mesh.is_free(t) && mesh.contains_point(t, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{CurrentField, VehicleModel};
    use crate::geom::{Polygon, Rect};

    fn make_env(bounds: Rect, obstacles: Vec<Polygon>) -> Environment {
        let field = CurrentField::uniform(bounds, Vec2::ZERO, 10.0);
        Environment::new(
            "test",
            bounds,
            obstacles,
            field,
            VehicleModel {
                v_thrust: 1.0,
                omega_max: 0.611,
                length: 2.0,
            },
        )
        .unwrap()
    }

    fn square_env() -> Environment {
        make_env(Rect::new(Vec2::ZERO, Vec2::new(100.0, 100.0)), vec![])
    }

    fn square_with_hole() -> Environment {
        make_env(
            Rect::new(Vec2::ZERO, Vec2::new(100.0, 100.0)),
            vec![Polygon::rectangle(
                Vec2::new(40.0, 40.0),
                Vec2::new(60.0, 60.0),
            )],
        )
    }

    #[test]
    fn empty_square_two_triangles() {
        let mesh = build_navmesh(&square_env()).unwrap();
        assert_eq!(mesh.triangles.len(), 2);
        assert_eq!(mesh.free_triangles().count(), 2);
        assert_eq!(mesh.constrained_edges.len(), 4);
    }

    #[test]
    fn square_hole_euler_count() {
        // n + 2h - 2 free triangles for n = 8 vertices, h = 1 hole.
        let mesh = build_navmesh(&square_with_hole()).unwrap();
        assert_eq!(mesh.free_triangles().count(), 8);
        // The hole interior is meshed too (2 triangles, labeled holes).
        assert_eq!(mesh.triangles.len(), 10);
    }

    #[test]
    fn obstacle_segments_preserved() {
        let env = square_with_hole();
        let mesh = build_navmesh(&env).unwrap();
        for obs in &env.obstacles {
            for e in obs.edges() {
                let covered = mesh.constrained_edges.iter().any(|&(a, b)| {
                    let sa = mesh.vertices[a];
                    let sb = mesh.vertices[b];
                    e.distance_to_point(sa) <= 1e-9
                        && e.distance_to_point(sb) <= 1e-9
                        && (sa.dist(e.a) <= 1e-9 || sa.dist(e.b) <= 1e-9 || true)
                });
                assert!(covered, "obstacle edge {e:?} not constrained");
            }
        }
    }

    #[test]
    fn area_partition() {
        let env = square_with_hole();
        let mesh = build_navmesh(&env).unwrap();
        let free_area: f64 = mesh
            .free_triangles()
            .map(|t| mesh.triangle_area(t))
            .sum();
        let obstacle_area: f64 = env.obstacles.iter().map(|o| o.area()).sum();
        let total = env.bounds.area();
        assert!(((free_area + obstacle_area) - total).abs() / total < 1e-6);
    }

    #[test]
    fn degenerate_obstacle_rejected() {
        let bounds = Rect::new(Vec2::ZERO, Vec2::new(100.0, 100.0));
        let field = CurrentField::uniform(bounds, Vec2::ZERO, 10.0);
        let collinear = Polygon::new(vec![
            Vec2::new(10.0, 10.0),
            Vec2::new(20.0, 10.0),
            Vec2::new(30.0, 10.0),
        ]);
        let env = Environment {
            name: "deg".into(),
            bounds,
            obstacles: vec![collinear],
            field,
            vehicle: VehicleModel {
                v_thrust: 1.0,
                omega_max: 0.611,
                length: 2.0,
            },
            route: None,
        };
        let err = build_navmesh(&env).unwrap_err();
        assert!(matches!(err, MeshError::DegenerateObstacle { index: 0, .. }));
    }

    #[test]
    fn dual_of_empty_square() {
        let mesh = build_navmesh(&square_env()).unwrap();
        let dual = build_dual(&mesh);
        assert_eq!(dual.node_count(), 2);
        assert_eq!(dual.edge_count(), 1);
    }

    #[test]
    fn dual_edges_never_cross_constraints() {
        let mesh = build_navmesh(&square_with_hole()).unwrap();
        let dual = build_dual(&mesh);
        for (n, list) in dual.adj.iter().enumerate() {
            for &(m, e) in list {
                assert!(!mesh.constrained_edges.contains(&e));
                assert_ne!(n, m);
            }
        }
        assert_eq!(dual.node_count(), 8);
    }

    #[test]
    fn locate_centroid_and_hole() {
        let env = square_with_hole();
        let mesh = build_navmesh(&env).unwrap();
        for t in mesh.free_triangles() {
            assert_eq!(locate_triangle(&mesh, mesh.centroid(t)), Some(t));
        }
        assert_eq!(locate_triangle(&mesh, Vec2::new(50.0, 50.0)), None);
        assert_eq!(locate_triangle(&mesh, Vec2::new(150.0, 50.0)), None);
    }

    #[test]
    fn locate_tie_breaks_to_lowest_id() {
        let mesh = build_navmesh(&square_env()).unwrap();
        let dual = build_dual(&mesh);
        // The single passing edge between the two triangles.
        let (_, e) = dual.adj[0][0];
        let mid = mesh.edge_segment(e).midpoint();
        assert_eq!(locate_triangle(&mesh, mid), Some(0));
    }

    #[test]
    fn deterministic_rebuild() {
        let env = square_with_hole();
        let m1 = build_navmesh(&env).unwrap();
        let m2 = build_navmesh(&env).unwrap();
        assert_eq!(m1.triangles, m2.triangles);
        assert_eq!(m1.constrained_edges, m2.constrained_edges);
    }
}
