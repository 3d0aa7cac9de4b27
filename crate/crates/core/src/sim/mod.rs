//! Headless 2D simulator for the bundled wander/avoid controller.
//!
//! The physics loop alternates unicycle integration steps of `dt_ms` with
//! runtime execution up to the same instant. Behaviors read the pose and set
//! velocity commands through a shared [`RobotHandle`].

mod controller;
mod svg;
mod world;

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metamodel::SystemModel;
use crate::runtime::{Event, Runtime, RuntimeConfig, RuntimeError};

pub use controller::{
    avoid_heading, example_behaviors, example_controller, repulsive_force, wrap_angle,
    ControllerParams, RobotHandle, RobotIo, SensorConfig,
};
pub use svg::render_svg;
pub use world::{load_world, Obstacle, Pose, World, WorldError};

/// Fixture arena with four rectangular obstacles.
pub const ROOMS_JSON: &str = include_str!("../../fixtures/rooms.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub runtime: RuntimeConfig,
    /// Simulated duration in runtime ticks.
    pub duration_ticks: u64,
    /// Physics step.
    pub dt_ms: u64,
    /// Edge of a coverage grid cell (m).
    pub grid_cell: f64,
    pub params: ControllerParams,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            runtime: RuntimeConfig::default(),
            duration_ticks: 10_000,
            dt_ms: 50,
            grid_cell: 0.25,
            params: ControllerParams::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathPoint {
    pub t_ms: u64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub path: Vec<PathPoint>,
    pub coverage_cells: u64,
    /// Physics steps in which motion was blocked by a wall or obstacle.
    pub collisions: u64,
    pub final_pose: Pose,
    pub trace: Vec<Event>,
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error("invalid simulation configuration: {0}")]
    Config(String),
}

/// Distinct grid cells touched by the path points.
pub fn coverage(path: &[PathPoint], cell: f64) -> u64 {
    path.iter()
        .map(|p| ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64))
        .collect::<BTreeSet<_>>()
        .len() as u64
}

/// `t_ms,x,y` rows.
pub fn path_to_csv(path: &[PathPoint]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t_ms", "x", "y"]).expect("write to memory");
    for p in path {
        w.write_record([p.t_ms.to_string(), p.x.to_string(), p.y.to_string()])
            .expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is UTF-8")
}

/// One unicycle step of `dt` seconds. Translation that would make the robot
/// touch a wall or obstacle is cancelled and reported; rotation always
/// happens.
pub fn step_pose(world: &World, pose: Pose, v: f64, omega: f64, dt: f64) -> (Pose, bool) {
    let nx = pose.x + v * pose.theta.cos() * dt;
    let ny = pose.y + v * pose.theta.sin() * dt;
    let blocked = !world.is_free(nx, ny);
    let (x, y) = if blocked { (pose.x, pose.y) } else { (nx, ny) };
    let theta = wrap_angle(pose.theta + omega * dt);
    (Pose { x, y, theta }, blocked)
}

/// Runs `model` (the example model or a subset of its modules) with the
/// built-in behaviors in `world`.
pub fn run_sim(
    world: &World,
    model: SystemModel,
    sensors: SensorConfig,
    config: &SimConfig,
) -> Result<SimResult, SimError> {
    if config.dt_ms == 0 {
        return Err(SimError::Config("dt_ms must be at least 1".into()));
    }
    if !(config.grid_cell > 0.0) {
        return Err(SimError::Config("grid_cell must be positive".into()));
    }
    if sensors.angles.is_empty() || !(sensors.max_range > 0.0) || !(sensors.noise_std >= 0.0) {
        return Err(SimError::Config(
            "sensors need at least one angle, a positive range and non-negative noise".into(),
        ));
    }

    let io = RobotIo::new(Arc::new(world.clone()), sensors).handle();
    let mut behaviors = example_behaviors(&io, &config.params);
    behaviors.retain(|name, _| model.module(name).is_some());
    let mut rt = Runtime::instantiate(model, behaviors, config.runtime.clone())?;

    let end_ms = config.duration_ticks * config.runtime.tick_ms;
    let mut pose = world.robot_start;
    let mut path = vec![PathPoint {
        t_ms: 0,
        x: pose.x,
        y: pose.y,
    }];
    let mut collisions = 0;
    rt.run_until(0)?;
    let mut t = 0;
    while t + config.dt_ms <= end_ms {
        let (v, omega) = {
            let g = io.lock().unwrap_or_else(|e| e.into_inner());
            (g.v, g.omega)
        };
        let blocked;
        (pose, blocked) = step_pose(world, pose, v, omega, config.dt_ms as f64 / 1000.0);
        collisions += u64::from(blocked);
        t += config.dt_ms;
        io.lock().unwrap_or_else(|e| e.into_inner()).pose = pose;
        path.push(PathPoint {
            t_ms: t,
            x: pose.x,
            y: pose.y,
        });
        rt.run_until(t)?;
    }
    if end_ms > t {
        rt.run_until(end_ms)?;
    }

    Ok(SimResult {
        coverage_cells: coverage(&path, config.grid_cell),
        path,
        collisions,
        final_pose: pose,
        trace: rt.trace().to_vec(),
    })
}
