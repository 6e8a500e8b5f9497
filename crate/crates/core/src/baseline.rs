//! Grid A* comparison planner.
//!
//! Rasterizes the environment to an occupancy grid (with the same padding
//! scheme the main planner uses, for fair ablations), searches it with A*
//! in either 8-connected or Dubins-style 16-heading mode, and optionally
//! smooths the result with randomized shortcutting. A* optimizes path
//! length; fuel is evaluated afterwards with the planner's cost integral.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::env::Environment;
use crate::geom::Vec2;
use crate::mesh::{EdgeKey, NavMesh};

#[derive(Debug, Error)]
pub enum GridError {
    #[error("start cell is blocked")]
    BlockedStart,
    #[error("goal cell is blocked")]
    BlockedGoal,
    #[error("position outside the grid")]
    OutOfGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Free,
    Obstacle,
    Padded,
}

/// Occupancy grid over the environment bounds. Cell `(ix, iy)` covers a
/// `resolution`-sized square; its center is the reference point.
#[derive(Debug, Clone)]
pub struct Grid {
    pub resolution: f64,
    pub nx: usize,
    pub ny: usize,
    origin: Vec2,
    cells: Vec<Cell>,
}

/// Padding scheme applied during rasterization.
pub enum GridPadding<'a> {
    None,
    Fixed(f64),
    /// Per-edge offsets imported from the padding module (max over
    /// channels), measured from the mesh's constrained edges.
    AdaptiveBand {
        mesh: &'a NavMesh,
        offsets: &'a BTreeMap<EdgeKey, f64>,
    },
}

impl Grid {
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn cell(&self, ix: usize, iy: usize) -> Cell {
        self.cells[self.index(ix, iy)]
    }

    pub fn is_traversable(&self, ix: i64, iy: i64) -> bool {
        if ix < 0 || iy < 0 || ix >= self.nx as i64 || iy >= self.ny as i64 {
            return false;
        }
        self.cell(ix as usize, iy as usize) == Cell::Free
    }

    pub fn center(&self, ix: usize, iy: usize) -> Vec2 {
        self.origin + Vec2::new((ix as f64 + 0.5) * self.resolution, (iy as f64 + 0.5) * self.resolution)
    }

    pub fn cell_of(&self, p: Vec2) -> Option<(usize, usize)> {
        let fx = (p.x - self.origin.x) / self.resolution;
        let fy = (p.y - self.origin.y) / self.resolution;
        if fx < 0.0 || fy < 0.0 {
            return None;
        }
        let ix = fx.floor() as usize;
        let iy = fy.floor() as usize;
        if ix >= self.nx || iy >= self.ny {
            return None;
        }
        Some((ix, iy))
    }

    pub fn count(&self, kind: Cell) -> usize {
        self.cells.iter().filter(|&&c| c == kind).count()
    }

    /// All cells a segment between two cell centers passes through
    /// (supercover; corner contacts include both side cells) are traversable.
    pub fn line_of_sight(&self, a: (usize, usize), b: (usize, usize)) -> bool {
        supercover_cells(
            (a.0 as i64, a.1 as i64),
            (b.0 as i64, b.1 as i64),
        )
        .into_iter()
        .all(|(x, y)| self.is_traversable(x, y))
    }
}

/// Rasterize the environment: a cell is obstacle when its center lies in a
/// hard no-go polygon, padded when within the padding band, free otherwise.
pub fn rasterize(env: &Environment, resolution: f64, padding: &GridPadding) -> Grid {
    assert!(resolution > 0.0);
    let nx = (env.bounds.width() / resolution).round().max(1.0) as usize;
    let ny = (env.bounds.height() / resolution).round().max(1.0) as usize;
    let mut cells = vec![Cell::Free; nx * ny];
    for iy in 0..ny {
        for ix in 0..nx {
            let c = env.bounds.min
                + Vec2::new((ix as f64 + 0.5) * resolution, (iy as f64 + 0.5) * resolution);
            let cell = if env.obstacles.iter().any(|o| o.contains_inclusive(c)) {
                Cell::Obstacle
            } else {
                match padding {
                    GridPadding::None => Cell::Free,
                    GridPadding::Fixed(d) => {
                        if env.obstacles.iter().any(|o| o.boundary_distance(c) <= *d) {
                            Cell::Padded
                        } else {
                            Cell::Free
                        }
                    }
                    GridPadding::AdaptiveBand { mesh, offsets } => {
                        let banded = offsets.iter().any(|(&e, &off)| {
                            off > 0.0 && mesh.edge_segment(e).distance_to_point(c) <= off
                        });
                        if banded {
                            Cell::Padded
                        } else {
                            Cell::Free
                        }
                    }
                }
            };
            cells[iy * nx + ix] = cell;
        }
    }
    Grid {
        resolution,
        nx,
        ny,
        origin: env.bounds.min,
        cells,
    }
}

/// Supercover of the segment between two cell coordinates: every cell the
/// line passes through, including both neighbors at exact corner crossings.
pub fn supercover_cells(a: (i64, i64), b: (i64, i64)) -> Vec<(i64, i64)> {
    let (mut x, mut y) = a;
    let dx = b.0 - a.0;
    let dy = b.1 - a.1;
    let nx = dx.abs();
    let ny = dy.abs();
    let sx = dx.signum();
    let sy = dy.signum();
    let mut cells = vec![(x, y)];
    let (mut ix, mut iy) = (0i64, 0i64);
    while ix < nx || iy < ny {
        let decision = (1 + 2 * ix) * ny - (1 + 2 * iy) * nx;
        match decision.cmp(&0) {
            Ordering::Equal => {
                cells.push((x + sx, y));
                cells.push((x, y + sy));
                x += sx;
                y += sy;
                ix += 1;
                iy += 1;
            }
            Ordering::Less => {
                x += sx;
                ix += 1;
            }
            Ordering::Greater => {
                y += sy;
                iy += 1;
            }
        }
        cells.push((x, y));
    }
    cells
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Motion {
    EightConnected,
    /// (cell, discretized heading) states with turn-rate-limited successors
    /// on a 16-direction lattice.
    Dubins,
}

#[derive(Debug, Clone)]
pub struct AStarResult {
    /// Cell-center polyline from start to goal.
    pub path: Vec<Vec2>,
    pub cost: f64,
    /// States popped from the open list.
    pub explored: usize,
}

// 16-direction lattice: even indices are the 8-connected moves, odd indices
// the knight moves approximating 22.5-degree headings.
const DIRS16: [(i64, i64); 16] = [
    (1, 0),
    (2, 1),
    (1, 1),
    (1, 2),
    (0, 1),
    (-1, 2),
    (-1, 1),
    (-2, 1),
    (-1, 0),
    (-2, -1),
    (-1, -1),
    (-1, -2),
    (0, -1),
    (1, -2),
    (1, -1),
    (2, -1),
];

#[derive(PartialEq)]
struct OpenItem {
    f: f64,
    order: usize,
    state: usize,
}

impl Eq for OpenItem {}

impl PartialOrd for OpenItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OpenItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap by f, then FIFO for determinism.
        other
            .f
            .partial_cmp(&self.f)
            .unwrap()
            .then(other.order.cmp(&self.order))
    }
}

/// A* over the grid. Octile heuristic in 8-connected mode, Euclidean in
/// Dubins mode; both admissible for the length cost. Returns `None` when the
/// goal is unreachable.
pub fn astar(
    grid: &Grid,
    start: Vec2,
    goal: Vec2,
    motion: Motion,
) -> Result<Option<AStarResult>, GridError> {
    let s = grid.cell_of(start).ok_or(GridError::OutOfGrid)?;
    let g = grid.cell_of(goal).ok_or(GridError::OutOfGrid)?;
    if !grid.is_traversable(s.0 as i64, s.1 as i64) {
        return Err(GridError::BlockedStart);
    }
    if !grid.is_traversable(g.0 as i64, g.1 as i64) {
        return Err(GridError::BlockedGoal);
    }
    match motion {
        Motion::EightConnected => Ok(astar_8(grid, s, g)),
        Motion::Dubins => Ok(astar_dubins(grid, s, g)),
    }
}

fn octile(res: f64, a: (usize, usize), b: (usize, usize)) -> f64 {
    let dx = (a.0 as f64 - b.0 as f64).abs();
    let dy = (a.1 as f64 - b.1 as f64).abs();
    res * (dx.max(dy) + (std::f64::consts::SQRT_2 - 1.0) * dx.min(dy))
}

fn astar_8(grid: &Grid, s: (usize, usize), g: (usize, usize)) -> Option<AStarResult> {
    let n = grid.nx * grid.ny;
    let idx = |c: (usize, usize)| c.1 * grid.nx + c.0;
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut heap = BinaryHeap::new();
    let mut order = 0usize;
    dist[idx(s)] = 0.0;
    heap.push(OpenItem {
        f: octile(grid.resolution, s, g),
        order,
        state: idx(s),
    });
    let mut explored = 0usize;
    while let Some(item) = heap.pop() {
        let u = item.state;
        if closed[u] {
            continue;
        }
        closed[u] = true;
        explored += 1;
        let (ux, uy) = (u % grid.nx, u / grid.nx);
        if (ux, uy) == g {
            let mut cells = vec![(ux, uy)];
            let mut cur = u;
            while prev[cur] != usize::MAX {
                cur = prev[cur];
                cells.push((cur % grid.nx, cur / grid.nx));
            }
            cells.reverse();
            let path: Vec<Vec2> = cells.iter().map(|&(x, y)| grid.center(x, y)).collect();
            return Some(AStarResult {
                path,
                cost: dist[u],
                explored,
            });
        }
        for (dx, dy) in [
            (1i64, 0i64),
            (1, 1),
            (0, 1),
            (-1, 1),
            (-1, 0),
            (-1, -1),
            (0, -1),
            (1, -1),
        ] {
            let vx = ux as i64 + dx;
            let vy = uy as i64 + dy;
            if !grid.is_traversable(vx, vy) {
                continue;
            }
            // No corner cutting on diagonal moves.
            if dx != 0 && dy != 0 {
                if !grid.is_traversable(ux as i64 + dx, uy as i64)
                    || !grid.is_traversable(ux as i64, uy as i64 + dy)
                {
                    continue;
                }
            }
            let v = vy as usize * grid.nx + vx as usize;
            let step = grid.resolution
                * if dx != 0 && dy != 0 {
                    std::f64::consts::SQRT_2
                } else {
                    1.0
                };
            let nd = dist[u] + step;
            if nd < dist[v] {
                dist[v] = nd;
                prev[v] = u;
                order += 1;
                heap.push(OpenItem {
                    f: nd + octile(grid.resolution, (vx as usize, vy as usize), g),
                    order,
                    state: v,
                });
            }
        }
    }
    None
}

fn astar_dubins(grid: &Grid, s: (usize, usize), g: (usize, usize)) -> Option<AStarResult> {
    let cells = grid.nx * grid.ny;
    let n = cells * 16;
    let idx = |x: usize, y: usize, h: usize| (y * grid.nx + x) * 16 + h;
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut heap = BinaryHeap::new();
    let mut order = 0usize;
    let heur = |x: usize, y: usize| {
        grid.resolution
            * (((x as f64 - g.0 as f64).powi(2) + (y as f64 - g.1 as f64).powi(2)).sqrt())
    };
    for h in 0..16 {
        let u = idx(s.0, s.1, h);
        dist[u] = 0.0;
        order += 1;
        heap.push(OpenItem {
            f: heur(s.0, s.1),
            order,
            state: u,
        });
    }
    let mut explored = 0usize;
    while let Some(item) = heap.pop() {
        let u = item.state;
        if closed[u] {
            continue;
        }
        closed[u] = true;
        explored += 1;
        let h = u % 16;
        let cell = u / 16;
        let (ux, uy) = (cell % grid.nx, cell / grid.nx);
        if (ux, uy) == g {
            let mut cells_path = vec![(ux, uy)];
            let mut cur = u;
            while prev[cur] != usize::MAX {
                cur = prev[cur];
                let c = cur / 16;
                let xy = (c % grid.nx, c / grid.nx);
                if *cells_path.last().unwrap() != xy {
                    cells_path.push(xy);
                }
            }
            cells_path.reverse();
            let path: Vec<Vec2> = cells_path.iter().map(|&(x, y)| grid.center(x, y)).collect();
            return Some(AStarResult {
                path,
                cost: dist[u],
                explored,
            });
        }
        // Turn-rate-limited: heading may change by one 22.5-degree notch per
        // lattice step.
        for turn in [-1i64, 0, 1] {
            let nh = ((h as i64 + turn).rem_euclid(16)) as usize;
            let (dx, dy) = DIRS16[nh];
            let vx = ux as i64 + dx;
            let vy = uy as i64 + dy;
            if !grid.is_traversable(vx, vy) {
                continue;
            }
            let blocked = supercover_cells((ux as i64, uy as i64), (vx, vy))
                .into_iter()
                .any(|(cx, cy)| !grid.is_traversable(cx, cy));
            if blocked {
                continue;
            }
            let v = idx(vx as usize, vy as usize, nh);
            let step = grid.resolution * ((dx * dx + dy * dy) as f64).sqrt();
            let nd = dist[u] + step;
            if nd < dist[v] {
                dist[v] = nd;
                prev[v] = u;
                order += 1;
                heap.push(OpenItem {
                    f: nd + heur(vx as usize, vy as usize),
                    order,
                    state: v,
                });
            }
        }
    }
    None
}

/// Randomized shortcutting: repeatedly replace a random sub-polyline with a
/// straight segment when the grid line of sight allows it, then drop
/// collinear interior vertices. Deterministic under `seed`; output never
/// longer than the input.
pub fn shortcut_smooth(path: &[Vec2], grid: &Grid, seed: u64, iterations: usize) -> Vec<Vec2> {
    let mut pts: Vec<Vec2> = path.to_vec();
    if pts.len() <= 2 {
        return pts;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..iterations {
        if pts.len() <= 2 {
            break;
        }
        let i = rng.random_range(0..pts.len() - 1);
        let j = rng.random_range(0..pts.len());
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        if j <= i + 1 {
            continue;
        }
        let (Some(a), Some(b)) = (grid.cell_of(pts[i]), grid.cell_of(pts[j])) else {
            continue;
        };
        if grid.line_of_sight(a, b) {
            pts.drain(i + 1..j);
        }
    }
    // Remove collinear interior points.
    let mut cleaned: Vec<Vec2> = Vec::with_capacity(pts.len());
    for p in pts {
        if cleaned.len() >= 2 {
            let a = cleaned[cleaned.len() - 2];
            let b = cleaned[cleaned.len() - 1];
            if (b - a).cross(p - b).abs() < 1e-9 && (b - a).dot(p - b) >= 0.0 {
                *cleaned.last_mut().unwrap() = p;
                continue;
            }
        }
        cleaned.push(p);
    }
    cleaned
}
