//! World model: bounds, hard no-go polygons, the sampled current field, and
//! the vehicle parameters, loaded from a TOML environment file.
//!
//! The file schema is documented in the repository README. Analytic field
//! generators are rasterized onto a regular grid at load time, so every
//! loaded environment carries a concrete lattice of velocity samples.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Polygon, Rect, Vec2, MERGE_EPS};

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to parse environment file: {0}")]
    Parse(String),
    #[error("obstacle {index}: simple polygon violated")]
    NotSimple { index: usize },
    #[error("obstacle {index}: fewer than 3 vertices")]
    TooFewVertices { index: usize },
    #[error("obstacle {index}: vertex outside bounds")]
    OutOfBounds { index: usize },
    #[error("obstacles {a} and {b} overlap")]
    Overlap { a: usize, b: usize },
    #[error("field grid invalid: {0}")]
    BadGrid(String),
    #[error("vehicle parameters invalid: {0}")]
    BadVehicle(String),
    #[error(
        "underactuated assumption violated: v_thrust {v_thrust} <= max current magnitude {max_current}"
    )]
    Underactuated { v_thrust: f64, max_current: f64 },
    #[error("unknown field generator '{0}'")]
    UnknownGenerator(String),
}

/// Anything that maps a position to a flow velocity. The planner integrates
/// against this trait so tests can use analytic fields directly.
pub trait Flow {
    fn velocity(&self, p: Vec2) -> Vec2;
}

/// Spatially constant flow.
#[derive(Debug, Clone, Copy)]
pub struct UniformFlow(pub Vec2);

impl Flow for UniformFlow {
    fn velocity(&self, _p: Vec2) -> Vec2 {
        self.0
    }
}

impl<F: Fn(Vec2) -> Vec2> Flow for F {
    fn velocity(&self, p: Vec2) -> Vec2 {
        self(p)
    }
}

/// Regular lattice of current velocity samples with bilinear interpolation.
///
/// Node `(ix, iy)` sits at `origin + (ix, iy) * spacing`; queries outside the
/// lattice clamp to the nearest cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurrentField {
    nx: usize,
    ny: usize,
    spacing: f64,
    origin: Vec2,
    velocities: Vec<Vec2>,
    pub noise_sigma_dir: f64,
    pub noise_sigma_mag: f64,
}

/// Local disturbance statistics over a region: mean vector plus circular
/// direction spread and magnitude spread, with configured sensor noise folded
/// in by root-sum-square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldStats {
    pub mean: Vec2,
    pub std_dir: f64,
    pub std_mag: f64,
}

impl CurrentField {
    pub fn from_grid(
        nx: usize,
        ny: usize,
        spacing: f64,
        origin: Vec2,
        velocities: Vec<Vec2>,
        noise_sigma_dir: f64,
        noise_sigma_mag: f64,
    ) -> Result<Self, EnvError> {
        if nx < 2 || ny < 2 {
            return Err(EnvError::BadGrid(format!(
                "grid must be at least 2x2, got {nx}x{ny}"
            )));
        }
        if spacing <= 0.0 {
            return Err(EnvError::BadGrid(format!("spacing must be > 0, got {spacing}")));
        }
        if velocities.len() != nx * ny {
            return Err(EnvError::BadGrid(format!(
                "expected {} velocity samples, got {}",
                nx * ny,
                velocities.len()
            )));
        }
        if let Some(i) = velocities.iter().position(|v| !v.is_finite()) {
            return Err(EnvError::BadGrid(format!("non-finite velocity at cell {i}")));
        }
        if noise_sigma_dir < 0.0 || noise_sigma_mag < 0.0 {
            return Err(EnvError::BadGrid("noise sigmas must be >= 0".into()));
        }
        Ok(CurrentField {
            nx,
            ny,
            spacing,
            origin,
            velocities,
            noise_sigma_dir,
            noise_sigma_mag,
        })
    }

    /// Uniform field covering `bounds` with the given velocity everywhere.
    pub fn uniform(bounds: Rect, velocity: Vec2, spacing: f64) -> Self {
        Self::rasterize(bounds, spacing, 0.0, 0.0, |_| velocity)
    }

    /// Sample an analytic flow onto a lattice covering `bounds`.
    pub fn rasterize(
        bounds: Rect,
        spacing: f64,
        noise_sigma_dir: f64,
        noise_sigma_mag: f64,
        f: impl Fn(Vec2) -> Vec2,
    ) -> Self {
        let nx = (bounds.width() / spacing).ceil() as usize + 1;
        let ny = (bounds.height() / spacing).ceil() as usize + 1;
        let nx = nx.max(2);
        let ny = ny.max(2);
        let mut velocities = Vec::with_capacity(nx * ny);
        for iy in 0..ny {
            for ix in 0..nx {
                let p = bounds.min + Vec2::new(ix as f64, iy as f64) * spacing;
                velocities.push(f(p));
            }
        }
        CurrentField {
            nx,
            ny,
            spacing,
            origin: bounds.min,
            velocities,
            noise_sigma_dir,
            noise_sigma_mag,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn origin(&self) -> Vec2 {
        self.origin
    }

    pub fn node(&self, ix: usize, iy: usize) -> Vec2 {
        self.velocities[iy * self.nx + ix]
    }

    pub fn node_position(&self, ix: usize, iy: usize) -> Vec2 {
        self.origin + Vec2::new(ix as f64, iy as f64) * self.spacing
    }

    /// Bilinearly interpolated velocity; queries outside the lattice support
    /// clamp to the nearest cell.
    pub fn sample(&self, p: Vec2) -> Vec2 {
        let fx = ((p.x - self.origin.x) / self.spacing).clamp(0.0, (self.nx - 1) as f64);
        let fy = ((p.y - self.origin.y) / self.spacing).clamp(0.0, (self.ny - 1) as f64);
        let ix = (fx.floor() as usize).min(self.nx - 2);
        let iy = (fy.floor() as usize).min(self.ny - 2);
        let tx = fx - ix as f64;
        let ty = fy - iy as f64;
        let v00 = self.node(ix, iy);
        let v10 = self.node(ix + 1, iy);
        let v01 = self.node(ix, iy + 1);
        let v11 = self.node(ix + 1, iy + 1);
        let bottom = v00.lerp(v10, tx);
        let top = v01.lerp(v11, tx);
        bottom.lerp(top, ty)
    }

    pub fn max_speed(&self) -> f64 {
        self.velocities
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    fn stats_of_samples(&self, samples: &[Vec2]) -> FieldStats {
        let n = samples.len() as f64;
        let mean = samples.iter().fold(Vec2::ZERO, |acc, &v| acc + v) / n;
        let mean_angle = mean.angle();
        let mut var_dir = 0.0;
        let mut mags = Vec::with_capacity(samples.len());
        for v in samples {
            mags.push(v.norm());
            if v.norm() > MERGE_EPS {
                let d = crate::geom::normalize_angle(v.angle() - mean_angle);
                var_dir += d * d;
            }
        }
        var_dir /= n;
        let mean_mag = mags.iter().sum::<f64>() / n;
        let var_mag = mags.iter().map(|m| (m - mean_mag).powi(2)).sum::<f64>() / n;
        let std_dir = (var_dir + self.noise_sigma_dir * self.noise_sigma_dir).sqrt();
        let std_mag = (var_mag + self.noise_sigma_mag * self.noise_sigma_mag).sqrt();
        FieldStats {
            mean,
            std_dir,
            std_mag,
        }
    }

    /// Statistics over all grid nodes inside `region`. Falls back to the
    /// node nearest the region centroid when none lie inside.
    pub fn stats_in_polygon(&self, region: &Polygon) -> FieldStats {
        let mut samples = Vec::new();
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                if region.contains_inclusive(self.node_position(ix, iy)) {
                    samples.push(self.node(ix, iy));
                }
            }
        }
        if samples.is_empty() {
            samples.push(self.sample(region.centroid()));
        }
        self.stats_of_samples(&samples)
    }

    /// Mean velocity over grid nodes within `radius` of `center`; the
    /// interpolated value at `center` when no node qualifies.
    pub fn mean_in_disc(&self, center: Vec2, radius: f64) -> Vec2 {
        let mut sum = Vec2::ZERO;
        let mut count = 0usize;
        let r_sq = radius * radius;
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                let p = self.node_position(ix, iy);
                if (p - center).norm_sq() <= r_sq {
                    sum += self.node(ix, iy);
                    count += 1;
                }
            }
        }
        if count == 0 {
            self.sample(center)
        } else {
            sum / count as f64
        }
    }
}

impl Flow for CurrentField {
    fn velocity(&self, p: Vec2) -> Vec2 {
        self.sample(p)
    }
}

/// Non-holonomic vehicle: constant thrust speed through the water, bounded
/// turn rate, hull length.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct VehicleModel {
    pub v_thrust: f64,
    pub omega_max: f64,
    pub length: f64,
}

impl VehicleModel {
    pub fn validate(&self) -> Result<(), EnvError> {
        if !(self.v_thrust > 0.0) {
            return Err(EnvError::BadVehicle(format!(
                "v_thrust must be > 0, got {}",
                self.v_thrust
            )));
        }
        if !(self.omega_max > 0.0) {
            return Err(EnvError::BadVehicle(format!(
                "omega_max must be > 0, got {}",
                self.omega_max
            )));
        }
        if !(self.length > 0.0) {
            return Err(EnvError::BadVehicle(format!(
                "length must be > 0, got {}",
                self.length
            )));
        }
        Ok(())
    }

    /// Still-water turning radius v_thrust / omega_max.
    pub fn turn_radius(&self) -> f64 {
        self.v_thrust / self.omega_max
    }
}

/// The planner's static world model.
#[derive(Debug, Clone)]
pub struct Environment {
    pub name: String,
    pub bounds: Rect,
    pub obstacles: Vec<Polygon>,
    pub field: CurrentField,
    pub vehicle: VehicleModel,
    /// Suggested start/goal carried by the environment file, if any.
    pub route: Option<(Vec2, Vec2)>,
}

impl Environment {
    /// Assemble and validate an environment from parts.
    pub fn new(
        name: impl Into<String>,
        bounds: Rect,
        obstacles: Vec<Polygon>,
        field: CurrentField,
        vehicle: VehicleModel,
    ) -> Result<Self, EnvError> {
        let env = Environment {
            name: name.into(),
            bounds,
            obstacles,
            field,
            vehicle,
            route: None,
        };
        env.validate()?;
        Ok(env)
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        self.vehicle.validate()?;
        for (i, obs) in self.obstacles.iter().enumerate() {
            if obs.len() < 3 {
                return Err(EnvError::TooFewVertices { index: i });
            }
            if !obs.is_simple() {
                return Err(EnvError::NotSimple { index: i });
            }
            if obs.vertices().iter().any(|&v| !self.bounds.contains(v)) {
                return Err(EnvError::OutOfBounds { index: i });
            }
        }
        // Pairwise non-overlap (touching allowed): no edge of one polygon may
        // properly cross an edge of another, and no vertex may sit strictly
        // inside another polygon.
        for a in 0..self.obstacles.len() {
            for b in (a + 1)..self.obstacles.len() {
                let pa = &self.obstacles[a];
                let pb = &self.obstacles[b];
                let cross = pa.edges().any(|ea| {
                    pb.edges()
                        .any(|eb| crate::geom::segments_cross_properly(ea.a, ea.b, eb.a, eb.b))
                });
                let nested = pa.vertices().iter().any(|&v| pb.contains_strict(v))
                    || pb.vertices().iter().any(|&v| pa.contains_strict(v));
                if cross || nested {
                    return Err(EnvError::Overlap { a, b });
                }
            }
        }
        let max_current = self.field.max_speed();
        if self.vehicle.v_thrust <= max_current {
            return Err(EnvError::Underactuated {
                v_thrust: self.vehicle.v_thrust,
                max_current,
            });
        }
        Ok(())
    }

    /// Maximum ground speed anywhere: thrust plus the strongest current.
    pub fn max_ground_speed(&self) -> f64 {
        self.vehicle.v_thrust + self.field.max_speed()
    }
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
pub struct EnvironmentFile {
    pub name: String,
    pub bounds: BoundsSpec,
    pub vehicle: VehicleModel,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub obstacles: Vec<ObstacleSpec>,
    pub field: FieldSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub route: Option<RouteSpec>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BoundsSpec {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

#[derive(Debug, Default, Serialize, Deserialize)]
pub struct NoiseSpec {
    #[serde(default)]
    pub sigma_dir: f64,
    #[serde(default)]
    pub sigma_mag: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ObstacleSpec {
    pub vertices: Vec<[f64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RouteSpec {
    pub start: [f64; 2],
    pub goal: [f64; 2],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FieldSpec {
    /// Built-in analytic generator rasterized at load time.
    Analytic {
        generator: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        peak_speed: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        direction_deg: Option<f64>,
        /// For `coastal-band`: x-range of the full-strength current band.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        band_x: Option<[f64; 2]>,
        /// For `coastal-band`: speed fraction outside the band.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ambient: Option<f64>,
        spacing: f64,
    },
    /// Inline grid, row-major from the origin, y rows outermost.
    Grid {
        origin: [f64; 2],
        spacing: f64,
        nx: usize,
        ny: usize,
        rows: Vec<[f64; 2]>,
    },
    /// Grid stored in a CSV next to the environment file with columns
    /// x_index, y_index, vx, vy.
    GridCsv {
        path: String,
        origin: [f64; 2],
        spacing: f64,
        nx: usize,
        ny: usize,
    },
}

/// Analytic gyre lattice: `cells x cells` counter-rotating circulation cells
/// over `bounds`, scaled so the peak speed equals `peak_speed`.
///
/// The stream function is A sin(pi x / L) sin(pi y / L) with L the cell
/// size, giving zero normal flow on all cell boundaries and stagnation
/// points at cell centers.
pub fn gyre_velocity(bounds: Rect, cells: usize, peak_speed: f64, p: Vec2) -> Vec2 {
    let lx = bounds.width() / cells as f64;
    let ly = bounds.height() / cells as f64;
    let sx = std::f64::consts::PI / lx;
    let sy = std::f64::consts::PI / ly;
    let x = p.x - bounds.min.x;
    let y = p.y - bounds.min.y;
    // u = dpsi/dy, v = -dpsi/dx with psi = (A/s) sin(sx x) sin(sy y).
    let u = (sx * x).sin() * (sy * y).cos();
    let v = -((sx * x).cos() * (sy * y).sin());
    Vec2::new(u, v) * peak_speed
}

fn build_field(
    spec: &FieldSpec,
    bounds: Rect,
    noise: &NoiseSpec,
    base_dir: &Path,
) -> Result<CurrentField, EnvError> {
    match spec {
        FieldSpec::Analytic {
            generator,
            peak_speed,
            direction_deg,
            band_x,
            ambient,
            spacing,
        } => {
            let peak = peak_speed.unwrap_or(0.0);
            let f: Box<dyn Fn(Vec2) -> Vec2> = match generator.as_str() {
                "zero" => Box::new(|_| Vec2::ZERO),
                "uniform" => {
                    let dir = direction_deg.unwrap_or(0.0).to_radians();
                    let v = Vec2::from_angle(dir) * peak;
                    Box::new(move |_| v)
                }
                "single-gyre" => Box::new(move |p| gyre_velocity(bounds, 1, peak, p)),
                "four-gyre" => Box::new(move |p| gyre_velocity(bounds, 2, peak, p)),
                "coastal-band" => {
                    let dir = direction_deg.unwrap_or(0.0).to_radians();
                    let unit = Vec2::from_angle(dir);
                    let [x0, x1] = band_x.unwrap_or([bounds.min.x, bounds.max.x]);
                    let ambient = ambient.unwrap_or(0.0);
                    Box::new(move |p| {
                        let scale = if p.x >= x0 && p.x <= x1 { 1.0 } else { ambient };
                        unit * (peak * scale)
                    })
                }
                other => return Err(EnvError::UnknownGenerator(other.to_string())),
            };
            Ok(CurrentField::rasterize(
                bounds,
                *spacing,
                noise.sigma_dir,
                noise.sigma_mag,
                f,
            ))
        }
        FieldSpec::Grid {
            origin,
            spacing,
            nx,
            ny,
            rows,
        } => {
            let velocities = rows.iter().map(|r| Vec2::new(r[0], r[1])).collect();
            CurrentField::from_grid(
                *nx,
                *ny,
                *spacing,
                Vec2::new(origin[0], origin[1]),
                velocities,
                noise.sigma_dir,
                noise.sigma_mag,
            )
        }
        FieldSpec::GridCsv {
            path,
            origin,
            spacing,
            nx,
            ny,
        } => {
            let csv_path = base_dir.join(path);
            let text = std::fs::read_to_string(&csv_path).map_err(|e| EnvError::Io {
                path: csv_path.display().to_string(),
                source: e,
            })?;
            let mut velocities = vec![None; nx * ny];
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                if lineno == 0 && line.starts_with("x_index") {
                    continue;
                }
                let cols: Vec<&str> = line.split(',').map(str::trim).collect();
                if cols.len() != 4 {
                    return Err(EnvError::BadGrid(format!(
                        "csv line {}: expected 4 columns",
                        lineno + 1
                    )));
                }
                let parse = |s: &str| -> Result<f64, EnvError> {
                    s.parse()
                        .map_err(|_| EnvError::BadGrid(format!("csv line {}: bad number", lineno + 1)))
                };
                let ix = parse(cols[0])? as usize;
                let iy = parse(cols[1])? as usize;
                if ix >= *nx || iy >= *ny {
                    return Err(EnvError::BadGrid(format!(
                        "csv line {}: index ({ix},{iy}) outside {nx}x{ny}",
                        lineno + 1
                    )));
                }
                velocities[iy * nx + ix] = Some(Vec2::new(parse(cols[2])?, parse(cols[3])?));
            }
            let velocities: Option<Vec<Vec2>> = velocities.into_iter().collect();
            let velocities =
                velocities.ok_or_else(|| EnvError::BadGrid("csv grid has missing cells".into()))?;
            CurrentField::from_grid(
                *nx,
                *ny,
                *spacing,
                Vec2::new(origin[0], origin[1]),
                velocities,
                noise.sigma_dir,
                noise.sigma_mag,
            )
        }
    }
}

/// Build a validated [`Environment`] from a parsed file. `base_dir` resolves
/// relative CSV grid paths.
pub fn environment_from_file(
    file: &EnvironmentFile,
    base_dir: &Path,
) -> Result<Environment, EnvError> {
    let bounds = Rect::new(
        Vec2::new(file.bounds.min[0], file.bounds.min[1]),
        Vec2::new(file.bounds.max[0], file.bounds.max[1]),
    );
    if bounds.width() <= 0.0 || bounds.height() <= 0.0 {
        return Err(EnvError::Parse("bounds must have positive extent".into()));
    }
    let obstacles = file
        .obstacles
        .iter()
        .map(|o| Polygon::new(o.vertices.iter().map(|v| Vec2::new(v[0], v[1])).collect()))
        .collect();
    let field = build_field(&file.field, bounds, &file.noise, base_dir)?;
    let mut env = Environment::new(file.name.clone(), bounds, obstacles, field, file.vehicle)?;
    env.route = file
        .route
        .as_ref()
        .map(|r| (Vec2::new(r.start[0], r.start[1]), Vec2::new(r.goal[0], r.goal[1])));
    Ok(env)
}

/// Load and validate an environment from a TOML file.
pub fn load_environment(path: impl AsRef<Path>) -> Result<Environment, EnvError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| EnvError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let file: EnvironmentFile =
        toml::from_str(&text).map_err(|e| EnvError::Parse(e.to_string()))?;
    let base_dir = path.parent().unwrap_or_else(|| Path::new("."));
    environment_from_file(&file, base_dir)
}

/// Serialize an environment file spec to TOML text.
pub fn environment_file_to_toml(file: &EnvironmentFile) -> String {
    toml::to_string_pretty(file).expect("environment file serializes")
}

/// Bilinearly interpolated current at `x`; thin alias matching the library's
/// public vocabulary.
pub fn sample_current(field: &CurrentField, x: Vec2) -> Vec2 {
    field.sample(x)
}

/// Local statistics of the current over a polygonal region.
pub fn local_current_stats(field: &CurrentField, region: &Polygon) -> FieldStats {
    field.stats_in_polygon(region)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bounds100() -> Rect {
        Rect::new(Vec2::ZERO, Vec2::new(100.0, 100.0))
    }

    fn vehicle() -> VehicleModel {
        VehicleModel {
            v_thrust: 1.0,
            omega_max: 0.611,
            length: 2.0,
        }
    }

    #[test]
    fn uniform_field_samples_everywhere() {
        let f = CurrentField::uniform(bounds100(), Vec2::new(0.3, 0.0), 10.0);
        for &p in &[
            Vec2::new(0.0, 0.0),
            Vec2::new(13.7, 42.1),
            Vec2::new(100.0, 100.0),
            Vec2::new(-5.0, 120.0), // clamped
        ] {
            assert!(f.sample(p).dist(Vec2::new(0.3, 0.0)) < 1e-12);
        }
    }

    #[test]
    fn bilinear_midpoint_average() {
        // Cell corners (1,0),(0,1),(1,0),(0,1): midpoint interpolates to (0.5, 0.5).
        let f = CurrentField::from_grid(
            2,
            2,
            1.0,
            Vec2::ZERO,
            vec![
                Vec2::new(1.0, 0.0),
                Vec2::new(0.0, 1.0),
                Vec2::new(1.0, 0.0),
                Vec2::new(0.0, 1.0),
            ],
            0.0,
            0.0,
        )
        .unwrap();
        let mid = f.sample(Vec2::new(0.5, 0.5));
        assert!(mid.dist(Vec2::new(0.5, 0.5)) < 1e-12);
    }

    #[test]
    fn sample_exact_at_nodes() {
        let f = CurrentField::rasterize(bounds100(), 10.0, 0.0, 0.0, |p| {
            Vec2::new((p.x * 0.01).sin(), (p.y * 0.02).cos())
        });
        let (nx, ny) = f.dims();
        for iy in 0..ny {
            for ix in 0..nx {
                let p = f.node_position(ix, iy);
                assert!(f.sample(p).dist(f.node(ix, iy)) < 1e-12);
            }
        }
    }

    #[test]
    fn gyre_center_is_stagnant() {
        let b = Rect::new(Vec2::ZERO, Vec2::new(200.0, 200.0));
        // Four-gyre centers.
        for &c in &[
            Vec2::new(50.0, 50.0),
            Vec2::new(150.0, 50.0),
            Vec2::new(50.0, 150.0),
            Vec2::new(150.0, 150.0),
        ] {
            assert!(gyre_velocity(b, 2, 0.5, c).norm() < 1e-12);
        }
        // Single gyre center.
        assert!(gyre_velocity(b, 1, 0.5, Vec2::new(100.0, 100.0)).norm() < 1e-12);
    }

    #[test]
    fn gyre_peak_speed_is_scaled() {
        let b = Rect::new(Vec2::ZERO, Vec2::new(200.0, 200.0));
        let mut max = 0.0f64;
        for iy in 0..=200 {
            for ix in 0..=200 {
                let p = Vec2::new(ix as f64, iy as f64);
                max = max.max(gyre_velocity(b, 2, 0.5, p).norm());
            }
        }
        assert!((max - 0.5).abs() < 1e-3);
    }

    #[test]
    fn stats_uniform_zero_spread() {
        let f = CurrentField::uniform(bounds100(), Vec2::new(0.3, 0.0), 10.0);
        let region = Polygon::rectangle(Vec2::new(10.0, 10.0), Vec2::new(60.0, 40.0));
        let s = f.stats_in_polygon(&region);
        assert!(s.mean.dist(Vec2::new(0.3, 0.0)) < 1e-12);
        assert!(s.std_dir < 1e-12);
        assert!(s.std_mag < 1e-12);
    }

    #[test]
    fn stats_two_sample_direction_spread() {
        // 2x1 region holding exactly two nodes: (1,0) and (0,1).
        let f = CurrentField::from_grid(
            2,
            2,
            10.0,
            Vec2::ZERO,
            vec![
                Vec2::new(1.0, 0.0),
                Vec2::new(0.0, 1.0),
                Vec2::new(1.0, 0.0),
                Vec2::new(0.0, 1.0),
            ],
            0.0,
            0.0,
        )
        .unwrap();
        let region = Polygon::rectangle(Vec2::new(-1.0, -1.0), Vec2::new(11.0, 1.0));
        let s = f.stats_in_polygon(&region);
        assert!(s.mean.dist(Vec2::new(0.5, 0.5)) < 1e-12);
        // Angular spread between 0 and 90 degrees: population std = 45 degrees.
        assert!((s.std_dir - std::f64::consts::FRAC_PI_4).abs() < 1e-9);
    }

    #[test]
    fn stats_noise_passthrough() {
        let f = CurrentField::rasterize(bounds100(), 10.0, 0.0, 0.1, |_| Vec2::new(0.3, 0.0));
        let region = Polygon::rectangle(Vec2::new(10.0, 10.0), Vec2::new(60.0, 40.0));
        let s = f.stats_in_polygon(&region);
        assert!((s.std_mag - 0.1).abs() < 1e-12);
    }

    #[test]
    fn stats_empty_region_falls_back() {
        let f = CurrentField::uniform(bounds100(), Vec2::new(0.3, 0.0), 10.0);
        // Tiny region between nodes.
        let region = Polygon::rectangle(Vec2::new(4.0, 4.0), Vec2::new(4.5, 4.5));
        let s = f.stats_in_polygon(&region);
        assert!(s.mean.dist(Vec2::new(0.3, 0.0)) < 1e-12);
    }

    #[test]
    fn validation_rejects_bowtie() {
        let field = CurrentField::uniform(bounds100(), Vec2::ZERO, 10.0);
        let bowtie = Polygon::new(vec![
            Vec2::new(10.0, 10.0),
            Vec2::new(20.0, 20.0),
            Vec2::new(20.0, 10.0),
            Vec2::new(10.0, 20.0),
        ]);
        let err = Environment::new("t", bounds100(), vec![bowtie], field, vehicle()).unwrap_err();
        assert!(matches!(err, EnvError::NotSimple { index: 0 }));
    }

    #[test]
    fn validation_rejects_underactuated() {
        let field = CurrentField::uniform(bounds100(), Vec2::new(1.5, 0.0), 10.0);
        let err = Environment::new("t", bounds100(), vec![], field, vehicle()).unwrap_err();
        assert!(matches!(err, EnvError::Underactuated { .. }));
    }

    #[test]
    fn validation_rejects_overlap() {
        let field = CurrentField::uniform(bounds100(), Vec2::ZERO, 10.0);
        let a = Polygon::rectangle(Vec2::new(10.0, 10.0), Vec2::new(30.0, 30.0));
        let b = Polygon::rectangle(Vec2::new(20.0, 20.0), Vec2::new(40.0, 40.0));
        let err = Environment::new("t", bounds100(), vec![a, b], field, vehicle()).unwrap_err();
        assert!(matches!(err, EnvError::Overlap { a: 0, b: 1 }));
    }

    #[test]
    fn touching_obstacles_allowed() {
        let field = CurrentField::uniform(bounds100(), Vec2::ZERO, 10.0);
        let a = Polygon::rectangle(Vec2::new(10.0, 10.0), Vec2::new(30.0, 30.0));
        let b = Polygon::rectangle(Vec2::new(30.0, 10.0), Vec2::new(50.0, 30.0));
        assert!(Environment::new("t", bounds100(), vec![a, b], field, vehicle()).is_ok());
    }

    #[test]
    fn load_roundtrip_minimal() {
        let dir = std::env::temp_dir().join("fairway-env-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("minimal.toml");
        std::fs::write(
            &path,
            r#"
name = "minimal"

[bounds]
min = [0.0, 0.0]
max = [100.0, 100.0]

[vehicle]
v_thrust = 1.0
omega_max = 0.611
length = 2.0

[noise]
sigma_dir = 0.0
sigma_mag = 0.0

[[obstacles]]
vertices = [[40.0, 40.0], [60.0, 40.0], [50.0, 60.0]]

[field]
kind = "analytic"
generator = "uniform"
peak_speed = 0.3
direction_deg = 0.0
spacing = 10.0
"#,
        )
        .unwrap();
        let env = load_environment(&path).unwrap();
        assert_eq!(env.obstacles.len(), 1);
        assert!(env.field.sample(Vec2::new(33.0, 71.0)).dist(Vec2::new(0.3, 0.0)) < 1e-12);
    }

    #[test]
    fn load_missing_file_reports_path() {
        let err = load_environment("/nonexistent/env.toml").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("/nonexistent/env.toml"), "{msg}");
    }

    #[test]
    fn lipschitz_between_nodes() {
        // Interpolated values change no faster than the neighboring node
        // differences allow.
        let f = CurrentField::rasterize(bounds100(), 10.0, 0.0, 0.0, |p| {
            Vec2::new((p.x * 0.05).sin(), (p.y * 0.03).cos())
        });
        let mut k = 0.0f64;
        let (nx, ny) = f.dims();
        for iy in 0..ny {
            for ix in 0..nx {
                if ix + 1 < nx {
                    k = k.max(f.node(ix, iy).dist(f.node(ix + 1, iy)) / f.spacing());
                }
                if iy + 1 < ny {
                    k = k.max(f.node(ix, iy).dist(f.node(ix, iy + 1)) / f.spacing());
                }
            }
        }
        // Bilinear interpolation along any direction is bounded by the sum of
        // the per-axis Lipschitz constants.
        let k = 2.0 * k + 1e-9;
        let mut p = Vec2::new(5.0, 5.0);
        let q = Vec2::new(95.0, 88.0);
        let steps = 400;
        for i in 0..steps {
            let next = p.lerp(q, (i + 1) as f64 / steps as f64);
            let dv = f.sample(next).dist(f.sample(p));
            assert!(dv <= k * next.dist(p) + 1e-12);
            p = next;
        }
    }
}
