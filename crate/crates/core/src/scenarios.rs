//! Built-in scenario generators and packaged environments.
//!
//! The synthetic scenarios (`four-gyre`, `ablation`, `strait`, `empty`) are
//! constructed programmatically; the coastal scenarios load simplified
//! polygon stand-ins packaged with the crate. Everything is deterministic
//! for a given name and parameter set, and every generated environment
//! passes the full load-time validation.

use std::path::Path;

use thiserror::Error;

use crate::env::{
    environment_from_file, BoundsSpec, EnvError, Environment, EnvironmentFile, FieldSpec,
    NoiseSpec, ObstacleSpec, RouteSpec, VehicleModel,
};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("unknown scenario '{0}' (known: four-gyre, ablation, strait, empty, hansando, far-east, palawan)")]
    Unknown(String),
    #[error(transparent)]
    Env(#[from] EnvError),
}

pub const KNOWN_SCENARIOS: &[&str] = &[
    "four-gyre",
    "ablation",
    "strait",
    "empty",
    "hansando",
    "far-east",
    "palawan",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Season {
    Summer,
    Winter,
}

impl std::str::FromStr for Season {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "summer" => Ok(Season::Summer),
            "winter" => Ok(Season::Winter),
            other => Err(format!("unknown season '{other}'")),
        }
    }
}

/// Generator knobs; each scenario reads the ones that apply to it.
#[derive(Debug, Clone, Copy)]
pub struct ScenarioParams {
    /// Uniform-current direction for `ablation`, degrees.
    pub beta_deg: f64,
    /// Current strength override (scenario-specific default when `None`).
    pub current_speed: Option<f64>,
    /// Seasonal field for `palawan`.
    pub season: Season,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            beta_deg: 45.0,
            current_speed: None,
            season: Season::Summer,
        }
    }
}

fn standard_vehicle() -> VehicleModel {
    VehicleModel {
        v_thrust: 1.0,
        omega_max: 0.611,
        length: 2.0,
    }
}

fn rect_obstacle(min: [f64; 2], max: [f64; 2]) -> ObstacleSpec {
    ObstacleSpec {
        vertices: vec![
            [min[0], min[1]],
            [max[0], min[1]],
            [max[0], max[1]],
            [min[0], max[1]],
        ],
    }
}

fn four_gyre_file(params: &ScenarioParams) -> EnvironmentFile {
    let peak = params.current_speed.unwrap_or(0.7);
    // One block over each gyre center; the free corridors align with the
    // inter-gyre jets, so topologically distinct channels see very
    // different currents.
    EnvironmentFile {
        name: "four-gyre".into(),
        bounds: BoundsSpec {
            min: [0.0, 0.0],
            max: [200.0, 200.0],
        },
        vehicle: standard_vehicle(),
        noise: NoiseSpec {
            sigma_dir: 0.08,
            sigma_mag: 0.04,
        },
        obstacles: vec![
            rect_obstacle([18.0, 18.0], [82.0, 82.0]),
            rect_obstacle([118.0, 18.0], [182.0, 82.0]),
            rect_obstacle([18.0, 118.0], [82.0, 182.0]),
            rect_obstacle([118.0, 118.0], [182.0, 182.0]),
            // Bar sealing the upper mid corridor: the direct route dead-ends
            // and the side slivers get padded shut.
            rect_obstacle([84.0, 150.0], [116.0, 154.0]),
        ],
        field: FieldSpec::Analytic {
            generator: "four-gyre".into(),
            peak_speed: Some(peak),
            direction_deg: None,
            band_x: None,
            ambient: None,
            spacing: 5.0,
        },
        route: Some(RouteSpec {
            start: [100.0, 10.0],
            goal: [100.0, 190.0],
        }),
    }
}

fn ablation_file(params: &ScenarioParams) -> EnvironmentFile {
    let speed = params.current_speed.unwrap_or(0.7);
    EnvironmentFile {
        name: format!("ablation-{:.0}", params.beta_deg),
        bounds: BoundsSpec {
            min: [0.0, 0.0],
            max: [100.0, 100.0],
        },
        vehicle: standard_vehicle(),
        noise: NoiseSpec {
            sigma_dir: 0.1,
            sigma_mag: 0.05,
        },
        obstacles: vec![rect_obstacle([30.0, 40.0], [60.0, 60.0])],
        field: FieldSpec::Analytic {
            generator: "uniform".into(),
            peak_speed: Some(speed),
            direction_deg: Some(params.beta_deg),
            band_x: None,
            ambient: None,
            spacing: 5.0,
        },
        route: Some(RouteSpec {
            start: [55.0, 12.0],
            goal: [55.0, 88.0],
        }),
    }
}

fn strait_file(params: &ScenarioParams) -> EnvironmentFile {
    let speed = params.current_speed.unwrap_or(0.75);
    EnvironmentFile {
        name: "strait".into(),
        bounds: BoundsSpec {
            min: [0.0, 0.0],
            max: [100.0, 100.0],
        },
        vehicle: standard_vehicle(),
        noise: NoiseSpec {
            sigma_dir: 0.08,
            sigma_mag: 0.04,
        },
        obstacles: vec![
            rect_obstacle([20.0, 40.0], [45.0, 60.0]),
            rect_obstacle([55.0, 40.0], [80.0, 60.0]),
        ],
        field: FieldSpec::Analytic {
            generator: "uniform".into(),
            peak_speed: Some(speed),
            direction_deg: Some(0.0),
            band_x: None,
            ambient: None,
            spacing: 5.0,
        },
        route: Some(RouteSpec {
            start: [50.0, 12.0],
            goal: [50.0, 88.0],
        }),
    }
}

fn empty_file(params: &ScenarioParams) -> EnvironmentFile {
    let speed = params.current_speed.unwrap_or(0.0);
    EnvironmentFile {
        name: "empty".into(),
        bounds: BoundsSpec {
            min: [0.0, 0.0],
            max: [100.0, 100.0],
        },
        vehicle: standard_vehicle(),
        noise: NoiseSpec::default(),
        obstacles: vec![],
        field: FieldSpec::Analytic {
            generator: if speed == 0.0 { "zero" } else { "uniform" }.into(),
            peak_speed: Some(speed),
            direction_deg: Some(params.beta_deg),
            band_x: None,
            ambient: None,
            spacing: 5.0,
        },
        route: Some(RouteSpec {
            start: [15.0, 50.0],
            goal: [85.0, 50.0],
        }),
    }
}

fn packaged(text: &str) -> EnvironmentFile {
    toml::from_str(text).expect("packaged scenario parses")
}

fn palawan_file(params: &ScenarioParams) -> EnvironmentFile {
    let mut file = packaged(include_str!("../assets/palawan.toml"));
    let speed = params.current_speed.unwrap_or(0.55);
    let direction = match params.season {
        Season::Summer => 45.0,
        Season::Winter => 225.0,
    };
    file.name = format!(
        "palawan-{}",
        match params.season {
            Season::Summer => "summer",
            Season::Winter => "winter",
        }
    );
    file.field = FieldSpec::Analytic {
        generator: "coastal-band".into(),
        peak_speed: Some(speed),
        direction_deg: Some(direction),
        band_x: Some([185.0, 300.0]),
        ambient: Some(0.2),
        spacing: 10.0,
    };
    file
}

/// The environment file for a named scenario; what `scenario export` writes.
pub fn scenario_file(name: &str, params: &ScenarioParams) -> Result<EnvironmentFile, ScenarioError> {
    match name {
        "four-gyre" => Ok(four_gyre_file(params)),
        "ablation" => Ok(ablation_file(params)),
        "strait" => Ok(strait_file(params)),
        "empty" => Ok(empty_file(params)),
        "hansando" => Ok(packaged(include_str!("../assets/hansando.toml"))),
        "far-east" => Ok(packaged(include_str!("../assets/far-east.toml"))),
        "palawan" => Ok(palawan_file(params)),
        other => Err(ScenarioError::Unknown(other.to_string())),
    }
}

/// Build a validated environment for a named scenario.
pub fn generate(name: &str, params: &ScenarioParams) -> Result<Environment, ScenarioError> {
    let file = scenario_file(name, params)?;
    Ok(environment_from_file(&file, Path::new("."))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec2;

    #[test]
    fn all_scenarios_validate() {
        for &name in KNOWN_SCENARIOS {
            let env = generate(name, &ScenarioParams::default())
                .unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(env.vehicle.v_thrust > env.field.max_speed(), "{name}");
            assert!(env.route.is_some(), "{name} ships a default route");
        }
    }

    #[test]
    fn unknown_scenario_rejected() {
        assert!(matches!(
            generate("atlantis", &ScenarioParams::default()),
            Err(ScenarioError::Unknown(_))
        ));
    }

    #[test]
    fn ablation_direction_follows_beta() {
        let params = ScenarioParams {
            beta_deg: 45.0,
            ..Default::default()
        };
        let env = generate("ablation", &params).unwrap();
        let c = env.field.sample(Vec2::new(80.0, 20.0));
        let expected = Vec2::from_angle(45f64.to_radians()) * 0.7;
        assert!(c.dist(expected) < 1e-9);

        let south = ScenarioParams {
            beta_deg: 270.0,
            ..Default::default()
        };
        let env = generate("ablation", &south).unwrap();
        let c = env.field.sample(Vec2::new(80.0, 20.0));
        assert!(c.dist(Vec2::new(0.0, -0.7)) < 1e-9);
    }

    #[test]
    fn four_gyre_has_stagnant_centers() {
        let env = generate("four-gyre", &ScenarioParams::default()).unwrap();
        for &c in &[
            Vec2::new(50.0, 50.0),
            Vec2::new(150.0, 50.0),
            Vec2::new(50.0, 150.0),
            Vec2::new(150.0, 150.0),
        ] {
            assert!(env.field.sample(c).norm() < 1e-9);
        }
        assert_eq!(env.obstacles.len(), 5);
    }

    #[test]
    fn palawan_seasons_reverse_the_band() {
        let summer = generate(
            "palawan",
            &ScenarioParams {
                season: Season::Summer,
                ..Default::default()
            },
        )
        .unwrap();
        let winter = generate(
            "palawan",
            &ScenarioParams {
                season: Season::Winter,
                ..Default::default()
            },
        )
        .unwrap();
        let probe = Vec2::new(240.0, 150.0);
        let s = summer.field.sample(probe);
        let w = winter.field.sample(probe);
        assert!((s + w).norm() < 1e-9, "seasonal currents are opposite");
        assert!(s.norm() > 0.3);
        // West of the island the current is weak in both seasons.
        let west = Vec2::new(60.0, 150.0);
        assert!(summer.field.sample(west).norm() < 0.2);
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate("four-gyre", &ScenarioParams::default()).unwrap();
        let b = generate("four-gyre", &ScenarioParams::default()).unwrap();
        let (nx, ny) = a.field.dims();
        for iy in 0..ny {
            for ix in 0..nx {
                assert_eq!(a.field.node(ix, iy), b.field.node(ix, iy));
            }
        }
        assert_eq!(a.obstacles.len(), b.obstacles.len());
    }
}
