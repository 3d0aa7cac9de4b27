//! Behaviors of the bundled wander/avoid controller.
//!
//! Message payloads: `Ranges` is a [`Value::List`] with one range per
//! sensor, `Force` a [`Value::Vec2`] in the robot frame, `Heading` an
//! absolute [`Value::Float`] in radians, `Halt` and `Go` are [`Value::Unit`].

use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::world::{Pose, World};
use crate::example::example_model;
use crate::metamodel::SystemModel;
use crate::runtime::{Behaviors, StepContext, Value};

/// Gains and thresholds of the built-in behaviors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControllerParams {
    /// Sonar period.
    pub sonar_period_ms: u64,
    /// Halt when a forward reading is closer than this (m).
    pub d_halt: f64,
    /// Runaway reacts to forces stronger than this.
    pub f_thresh: f64,
    /// Floor on ranges in the force law (m).
    pub r_min: f64,
    /// Weight of the wander heading in avoid.
    pub w_g: f64,
    /// Weight of the obstacle force in avoid.
    pub w_f: f64,
    /// Proportional turn gain (1/s).
    pub k_omega: f64,
    pub omega_max: f64,
    /// Turn hands over to forward once within this angle (rad).
    pub align_tol: f64,
    /// Turn re-evaluates its error this often while tracking.
    pub turn_period_ms: u64,
    /// Forward speed (m/s).
    pub v_cruise: f64,
    /// How long forward drives after each `go`.
    pub forward_ms: u64,
    /// Wander period.
    pub t_wander_ms: u64,
}

impl Default for ControllerParams {
    fn default() -> Self {
        Self {
            sonar_period_ms: 100,
            d_halt: 0.45,
            f_thresh: 2.0,
            r_min: 0.1,
            w_g: 1.0,
            w_f: 1.0,
            k_omega: 2.5,
            omega_max: 1.5,
            align_tol: 0.15,
            turn_period_ms: 20,
            v_cruise: 0.3,
            forward_ms: 1500,
            t_wander_ms: 3000,
        }
    }
}

/// Range finder layout and noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorConfig {
    /// Offsets from the robot heading (rad).
    pub angles: Vec<f64>,
    pub max_range: f64,
    pub noise_std: f64,
    pub seed: u64,
}

impl Default for SensorConfig {
    /// Three finders at -45, 0 and +45 degrees.
    fn default() -> Self {
        Self {
            angles: vec![-PI / 4.0, 0.0, PI / 4.0],
            max_range: 3.0,
            noise_std: 0.01,
            seed: 0,
        }
    }
}

impl SensorConfig {
    /// `count` finders evenly spaced around the robot, starting ahead.
    pub fn ring(count: usize) -> Self {
        Self {
            angles: (0..count)
                .map(|i| wrap_angle(2.0 * PI * i as f64 / count as f64))
                .collect(),
            ..Self::default()
        }
    }

    pub fn count(&self) -> usize {
        self.angles.len()
    }
}

/// Kinematic state shared between the physics loop and the behaviors.
#[derive(Debug, Clone)]
pub struct RobotIo {
    pub world: Arc<World>,
    pub sensors: SensorConfig,
    pub pose: Pose,
    /// Commanded linear velocity (m/s).
    pub v: f64,
    /// Commanded angular velocity (rad/s).
    pub omega: f64,
    pub(crate) sensor_rng: ChaCha8Rng,
}

pub type RobotHandle = Arc<Mutex<RobotIo>>;

impl RobotIo {
    pub fn new(world: Arc<World>, sensors: SensorConfig) -> Self {
        use rand::SeedableRng;
        let pose = world.robot_start;
        let sensor_rng = ChaCha8Rng::seed_from_u64(sensors.seed);
        Self {
            world,
            sensors,
            pose,
            v: 0.0,
            omega: 0.0,
            sensor_rng,
        }
    }

    pub fn handle(self) -> RobotHandle {
        Arc::new(Mutex::new(self))
    }

    /// One reading per sensor from the current pose.
    pub fn scan(&mut self) -> Vec<f64> {
        let Self {
            world,
            sensors,
            pose,
            sensor_rng,
            ..
        } = self;
        sensors
            .angles
            .iter()
            .map(|a| world.raycast(*pose, pose.theta + a, sensors.max_range, sensors.noise_std, sensor_rng))
            .collect()
    }
}

/// Maps an angle into `[-pi, pi)`.
pub fn wrap_angle(a: f64) -> f64 {
    (a + PI).rem_euclid(2.0 * PI) - PI
}

/// Inverse-square repulsion of the readings in the robot frame. Readings at
/// `max_range` saw nothing and do not contribute.
pub fn repulsive_force(ranges: &[f64], angles: &[f64], max_range: f64, r_min: f64) -> [f64; 2] {
    let mut f = [0.0, 0.0];
    for (&r, &a) in ranges.iter().zip(angles) {
        if r >= max_range {
            continue;
        }
        let m = 1.0 / r.max(r_min).powi(2);
        f[0] -= a.cos() * m;
        f[1] -= a.sin() * m;
    }
    f
}

/// Heading of `unit(goal) * w_g + force * w_f`, with `force` already in the
/// world frame.
pub fn avoid_heading(goal: f64, force_world: [f64; 2], w_g: f64, w_f: f64) -> f64 {
    let x = goal.cos() * w_g + force_world[0] * w_f;
    let y = goal.sin() * w_g + force_world[1] * w_f;
    y.atan2(x)
}

fn rotate([x, y]: [f64; 2], theta: f64) -> [f64; 2] {
    let (s, c) = theta.sin_cos();
    [c * x - s * y, s * x + c * y]
}

fn lock(io: &RobotHandle) -> std::sync::MutexGuard<'_, RobotIo> {
    io.lock().unwrap_or_else(|e| e.into_inner())
}

/// The example model with behaviors bound to `io`.
pub fn example_controller(io: &RobotHandle, params: &ControllerParams) -> (SystemModel, Behaviors) {
    (example_model(), example_behaviors(io, params))
}

/// Behaviors of all eight example modules.
pub fn example_behaviors(io: &RobotHandle, params: &ControllerParams) -> Behaviors {
    let mut b = Behaviors::new();
    let p = params.clone();
    let (angles, max_range) = {
        let g = lock(io);
        (g.sensors.angles.clone(), g.sensors.max_range)
    };

    let sonar_io = io.clone();
    let period = p.sonar_period_ms;
    b.insert(
        "sonar".into(),
        Box::new(move |ctx: &mut StepContext<'_>| {
            let ranges = lock(&sonar_io).scan();
            ctx.emit("map", Value::List(ranges));
            ctx.request_wakeup(period);
        }),
    );

    let forward_sector: Vec<bool> = angles.iter().map(|a| a.abs() <= PI / 4.0 + 1e-9).collect();
    let d_halt = p.d_halt;
    b.insert(
        "collide".into(),
        Box::new(move |ctx: &mut StepContext<'_>| {
            let Some(map) = ctx.take_fresh("map") else { return };
            let ranges = map.as_list().unwrap_or_default();
            let danger = ranges
                .iter()
                .zip(&forward_sector)
                .any(|(&r, &ahead)| ahead && r < d_halt);
            if danger {
                ctx.emit("halt", Value::Unit);
            }
        }),
    );

    let (ff_angles, r_min) = (angles.clone(), p.r_min);
    b.insert(
        "feelforce".into(),
        Box::new(move |ctx: &mut StepContext<'_>| {
            let Some(map) = ctx.take_fresh("map") else { return };
            let ranges = map.as_list().unwrap_or_default();
            let f = repulsive_force(ranges, &ff_angles, max_range, r_min);
            ctx.emit("force", Value::Vec2(f));
        }),
    );

    let runaway_io = io.clone();
    let f_thresh = p.f_thresh;
    b.insert(
        "runaway".into(),
        Box::new(move |ctx: &mut StepContext<'_>| {
            let Some(f) = ctx.take_fresh("force").and_then(|v| v.as_vec2()) else {
                return;
            };
            if f[0].hypot(f[1]) > f_thresh {
                let theta = lock(&runaway_io).pose.theta;
                ctx.emit("heading", Value::Float(wrap_angle(theta + f[1].atan2(f[0]))));
            }
        }),
    );

    let turn_io = io.clone();
    let (k, omega_max, tol, turn_period) = (p.k_omega, p.omega_max, p.align_tol, p.turn_period_ms);
    b.insert(
        "turn".into(),
        Box::new(move |ctx: &mut StepContext<'_>| {
            if let Some(h) = ctx.take_fresh("heading").and_then(|v| v.as_f64()) {
                ctx.set_var("target", Value::Float(h));
                ctx.set_var("handed_over", Value::Bool(false));
            }
            let Some(target) = ctx.var("target").and_then(Value::as_f64) else {
                return;
            };
            let mut io = lock(&turn_io);
            let error = wrap_angle(target - io.pose.theta);
            io.omega = (k * error).clamp(-omega_max, omega_max);
            drop(io);
            let handed_over = ctx.var("handed_over").and_then(Value::as_bool).unwrap_or(false);
            if error.abs() < tol && !handed_over {
                ctx.set_var("handed_over", Value::Bool(true));
                ctx.emit("go", Value::Unit);
            }
            ctx.request_wakeup(turn_period);
        }),
    );

    let forward_io = io.clone();
    let (v_cruise, forward_ms) = (p.v_cruise, p.forward_ms);
    b.insert(
        "forward".into(),
        Box::new(move |ctx: &mut StepContext<'_>| {
            let now = ctx.now();
            let halt = ctx.take_fresh("halt").is_some();
            let go = ctx.take_fresh("go").is_some();
            let mut until = ctx.var("until").and_then(Value::as_f64).unwrap_or(0.0) as u64;
            if halt {
                until = 0;
            } else if go {
                until = now + forward_ms;
            }
            // pending wakeups keep only the earliest, so re-arm every time
            if now < until {
                ctx.request_wakeup(until - now);
            }
            ctx.set_var("until", Value::Float(until as f64));
            lock(&forward_io).v = if now < until { v_cruise } else { 0.0 };
        }),
    );

    let t_wander = p.t_wander_ms;
    b.insert(
        "wander".into(),
        Box::new(move |ctx: &mut StepContext<'_>| {
            let h = ctx.rng().random_range(-PI..PI);
            ctx.emit("heading", Value::Float(h));
            ctx.request_wakeup(t_wander);
        }),
    );

    let avoid_io = io.clone();
    let (w_g, w_f) = (p.w_g, p.w_f);
    b.insert(
        "avoid".into(),
        Box::new(move |ctx: &mut StepContext<'_>| {
            let goal = ctx.read("goal").and_then(|r| r.payload.as_f64());
            let force = ctx.take_fresh("force").and_then(|v| v.as_vec2());
            let (Some(goal), Some(force)) = (goal, force) else {
                return;
            };
            let theta = lock(&avoid_io).pose.theta;
            let h = avoid_heading(goal, rotate(force, theta), w_g, w_f);
            ctx.emit("heading", Value::Float(h));
        }),
    );

    b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_reading_dead_ahead() {
        let f = repulsive_force(&[1.0], &[0.0], 3.0, 0.1);
        assert!((f[0] + 1.0).abs() < 1e-12 && f[1].abs() < 1e-12);
    }

    #[test]
    fn readings_at_max_range_are_ignored() {
        assert_eq!(repulsive_force(&[3.0, 3.0], &[0.0, 1.0], 3.0, 0.1), [0.0, 0.0]);
    }

    #[test]
    fn r_min_caps_the_force() {
        let f = repulsive_force(&[0.01], &[0.0], 3.0, 0.5);
        assert!((f[0] + 4.0).abs() < 1e-12);
    }

    #[test]
    fn wrap_is_half_open() {
        assert!((wrap_angle(PI) + PI).abs() < 1e-12);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert_eq!(wrap_angle(0.5), 0.5);
    }

    #[test]
    fn avoid_without_force_follows_goal() {
        assert!((avoid_heading(1.0, [0.0, 0.0], 1.0, 1.0) - 1.0).abs() < 1e-12);
        // a strong push from the east dominates a goal to the east
        let h = avoid_heading(0.0, [-5.0, 0.0], 1.0, 1.0);
        assert!((h.abs() - PI).abs() < 1e-12);
    }

    #[test]
    fn ring_of_twelve() {
        let s = SensorConfig::ring(12);
        assert_eq!(s.count(), 12);
        assert_eq!(s.angles[0], 0.0);
        assert!((s.angles[3] - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn behaviors_cover_the_model() {
        let world = Arc::new(World::empty(
            4.0,
            4.0,
            Pose {
                x: 2.0,
                y: 2.0,
                theta: 0.0,
            },
            0.1,
        ));
        let io = RobotIo::new(world, SensorConfig::default()).handle();
        let (model, behaviors) = example_controller(&io, &ControllerParams::default());
        let names: Vec<&String> = behaviors.keys().collect();
        let mut modules: Vec<&String> = model.modules.iter().map(|m| &m.name).collect();
        modules.sort();
        assert_eq!(names, modules);
        assert!(crate::validate::validate(&model).is_empty());
    }
}
