//! Contingency-maneuver validation.
//!
//! Walks a planned path and, at fixed arc-length stations, injects an abort:
//! the vehicle must escape with a hard-over turn under a perturbed current.
//! A trial counts as a collision only when both turn directions enter the
//! hard no-go zone; the vehicle is assumed to pick its better turn.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::dynamics::{integrate, min_polygon_clearance, TurnDirection, VehicleState, CONTINGENCY_DT};
use crate::env::{Environment, Flow, VehicleModel};
use crate::geom::{point_at_arclength, polyline_length, Vec2, MERGE_EPS};

/// Whole-field perturbation: every velocity rotated by `eps_dir` with its
/// magnitude shifted by `eps_mag`.
pub struct PerturbedFlow<'a, F: Flow> {
    pub base: &'a F,
    pub eps_dir: f64,
    pub eps_mag: f64,
}

impl<F: Flow> Flow for PerturbedFlow<'_, F> {
    fn velocity(&self, p: Vec2) -> Vec2 {
        let v = self.base.velocity(p);
        let mag = v.norm();
        if mag < MERGE_EPS {
            return Vec2::ZERO;
        }
        Vec2::from_angle(v.angle() + self.eps_dir) * (mag + self.eps_mag).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrialRecord {
    pub arc_length: f64,
    /// The better of the two hard-over turns.
    pub best_turn: &'static str,
    pub best_clearance: f64,
    pub collided: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContingencyReport {
    pub trials: usize,
    pub collisions: usize,
    pub records: Vec<TrialRecord>,
}

impl ContingencyReport {
    pub fn collision_sites(&self) -> impl Iterator<Item = &TrialRecord> {
        self.records.iter().filter(|r| r.collided)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ContingencyOptions {
    pub spacing: f64,
    /// Draw per-trial current noise from the environment's configured
    /// sigmas; turn off to abort under the mean field.
    pub use_noise: bool,
    pub dt: f64,
}

impl Default for ContingencyOptions {
    fn default() -> Self {
        ContingencyOptions {
            spacing: 1.0,
            use_noise: true,
            dt: CONTINGENCY_DT,
        }
    }
}

fn run_trial(
    path: &[Vec2],
    env: &Environment,
    vehicle: &VehicleModel,
    opts: &ContingencyOptions,
    seed: u64,
    station: usize,
) -> TrialRecord {
    let s = station as f64 * opts.spacing;
    let (pos, tangent) = point_at_arclength(path, s);
    let state = VehicleState::new(pos, tangent.angle());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(station as u64);
    let (eps_dir, eps_mag) = if opts.use_noise {
        let nd = Normal::new(0.0, env.field.noise_sigma_dir).expect("finite sigma");
        let nm = Normal::new(0.0, env.field.noise_sigma_mag).expect("finite sigma");
        (nd.sample(&mut rng), nm.sample(&mut rng))
    } else {
        (0.0, 0.0)
    };
    let flow = PerturbedFlow {
        base: &env.field,
        eps_dir,
        eps_mag,
    };

    let duration = std::f64::consts::TAU / vehicle.omega_max;
    let mut best_turn = TurnDirection::Left;
    let mut best_clearance = f64::NEG_INFINITY;
    for turn in [TurnDirection::Left, TurnDirection::Right] {
        let traj = integrate(state, turn.omega(vehicle), &flow, vehicle, opts.dt, duration);
        let clearance = min_polygon_clearance(traj.positions(), &env.obstacles);
        if clearance > best_clearance {
            best_clearance = clearance;
            best_turn = turn;
        }
    }
    TrialRecord {
        arc_length: s,
        best_turn: best_turn.label(),
        best_clearance,
        collided: best_clearance < 0.0,
    }
}

/// Simulate aborts every `spacing` meters along the path. Deterministic for
/// a fixed seed; station `i` uses random substream `i`, so any station can
/// be replayed in isolation with [`replay_station`].
pub fn simulate_contingency(
    path: &[Vec2],
    env: &Environment,
    vehicle: &VehicleModel,
    opts: &ContingencyOptions,
    seed: u64,
) -> ContingencyReport {
    assert!(opts.spacing > 0.0, "spacing must be positive");
    let length = polyline_length(path);
    let trials = (length / opts.spacing).floor() as usize + 1;
    let mut records = Vec::with_capacity(trials);
    for station in 0..trials {
        records.push(run_trial(path, env, vehicle, opts, seed, station));
    }
    let collisions = records.iter().filter(|r| r.collided).count();
    ContingencyReport {
        trials,
        collisions,
        records,
    }
}

/// Re-run a single station with the exact substream used by
/// [`simulate_contingency`].
pub fn replay_station(
    path: &[Vec2],
    env: &Environment,
    vehicle: &VehicleModel,
    opts: &ContingencyOptions,
    seed: u64,
    station: usize,
) -> TrialRecord {
    run_trial(path, env, vehicle, opts, seed, station)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::CurrentField;
    use crate::geom::{Polygon, Rect};

    fn vehicle() -> VehicleModel {
        VehicleModel {
            v_thrust: 1.0,
            omega_max: 0.611,
            length: 2.0,
        }
    }

    fn bounds() -> Rect {
        Rect::new(Vec2::ZERO, Vec2::new(100.0, 100.0))
    }

    fn empty_env() -> Environment {
        Environment::new(
            "empty",
            bounds(),
            vec![],
            CurrentField::uniform(bounds(), Vec2::new(0.2, 0.1), 10.0),
            vehicle(),
        )
        .unwrap()
    }

    fn hugging_env() -> Environment {
        // Obstacle north of the path with an onshore (northward) current.
        Environment::new(
            "hug",
            bounds(),
            vec![Polygon::rectangle(Vec2::new(20.0, 50.0), Vec2::new(80.0, 70.0))],
            CurrentField::rasterize(bounds(), 10.0, 0.05, 0.03, |_| Vec2::new(0.0, 0.8)),
            vehicle(),
        )
        .unwrap()
    }

    #[test]
    fn empty_environment_never_collides() {
        let env = empty_env();
        let path = vec![Vec2::new(10.0, 10.0), Vec2::new(90.0, 60.0)];
        let report =
            simulate_contingency(&path, &env, &vehicle(), &ContingencyOptions::default(), 1);
        assert_eq!(report.collisions, 0);
        let length = polyline_length(&path);
        assert_eq!(report.trials, length.floor() as usize + 1);
    }

    #[test]
    fn hugging_path_collides() {
        let env = hugging_env();
        // One meter south of the obstacle face, well within the onshore
        // drift of a full hard-over revolution.
        let path = vec![Vec2::new(25.0, 49.0), Vec2::new(75.0, 49.0)];
        let report =
            simulate_contingency(&path, &env, &vehicle(), &ContingencyOptions::default(), 1);
        assert!(report.collisions >= 1, "expected collisions, got 0");
        assert!(report.collisions <= report.trials);
    }

    #[test]
    fn standoff_path_is_safe_where_hugging_is_not() {
        let env = hugging_env();
        let hugging = vec![Vec2::new(25.0, 49.0), Vec2::new(75.0, 49.0)];
        let standoff = vec![Vec2::new(25.0, 35.0), Vec2::new(75.0, 35.0)];
        let mut hug_total = 0;
        let mut far_total = 0;
        for seed in 0..10 {
            let opts = ContingencyOptions::default();
            hug_total += simulate_contingency(&hugging, &env, &vehicle(), &opts, seed).collisions;
            far_total += simulate_contingency(&standoff, &env, &vehicle(), &opts, seed).collisions;
        }
        assert!(hug_total > 0);
        // Drift over a full revolution is ~8.4 m; a 15 m standoff clears it.
        assert_eq!(far_total, 0);
    }

    #[test]
    fn deterministic_and_replayable() {
        let env = hugging_env();
        let path = vec![Vec2::new(25.0, 48.5), Vec2::new(75.0, 48.5)];
        let opts = ContingencyOptions::default();
        let a = simulate_contingency(&path, &env, &vehicle(), &opts, 42);
        let b = simulate_contingency(&path, &env, &vehicle(), &opts, 42);
        assert_eq!(a.collisions, b.collisions);
        for (ra, rb) in a.records.iter().zip(&b.records) {
            assert_eq!(ra.best_clearance, rb.best_clearance);
        }
        // Every collision site replays to a collision in isolation.
        for (i, r) in a.records.iter().enumerate() {
            if r.collided {
                let replay = replay_station(&path, &env, &vehicle(), &opts, 42, i);
                assert!(replay.collided);
                assert_eq!(replay.best_clearance, r.best_clearance);
            }
        }
    }

    #[test]
    fn spacing_halves_trials() {
        let env = empty_env();
        let path = vec![Vec2::new(10.0, 10.0), Vec2::new(90.0, 10.0)];
        let one = simulate_contingency(
            &path,
            &env,
            &vehicle(),
            &ContingencyOptions {
                spacing: 1.0,
                ..Default::default()
            },
            1,
        );
        let two = simulate_contingency(
            &path,
            &env,
            &vehicle(),
            &ContingencyOptions {
                spacing: 2.0,
                ..Default::default()
            },
            1,
        );
        let half = one.trials / 2;
        assert!((two.trials as i64 - half as i64).abs() <= 1);
    }
}
