//! The two-layer wander/avoid controller used throughout the toolchain.

use crate::metamodel::{SystemBuilder, SystemModel};

/// Textual form of [`example_model`].
pub const EXAMPLE_SOURCE: &str = include_str!("../fixtures/example.sub");

/// Suppression window of `avoid.heading` over `turn.heading`.
pub const SUPPRESS_MS: i64 = 250;

/// Layer 0 keeps the robot away from obstacles, layer 1 makes it wander.
///
/// Topology: sonar feeds collide and feelforce; feelforce feeds runaway and
/// avoid; runaway drives turn, which hands over to forward; collide halts
/// forward; wander feeds avoid, whose heading suppresses turn's input.
pub fn example_model() -> SystemModel {
    SystemBuilder::new("brooks")
        .description("Obstacle avoidance with aimless wandering")
        .data_type("Ranges", Some("Robot-centered range readings, one per range finder"))
        .data_type("Force", Some("Repulsive force in the robot frame"))
        .data_type("Heading", Some("Absolute heading command in radians"))
        .data_type("Halt", Some("Stop request"))
        .data_type("Go", Some("Permission to drive after a turn"))
        .module("sonar", 0, |m| {
            m.description("Filters range data into a robot-centered obstacle map")
                .output("map", "Ranges")
        })
        .module("collide", 0, |m| {
            m.description("Detects imminent collisions ahead")
                .input("map", "Ranges")
                .output("halt", "Halt")
        })
        .module("feelforce", 0, |m| {
            m.description("Computes the repulsive force of nearby obstacles")
                .input("map", "Ranges")
                .output("force", "Force")
        })
        .module("runaway", 0, |m| {
            m.description("Monitors the summed force and heads away from it")
                .input("force", "Force")
                .output("heading", "Heading")
        })
        .module("turn", 0, |m| {
            m.description("Rotates the robot toward the commanded heading")
                .input("heading", "Heading")
                .output("go", "Go")
        })
        .module("forward", 0, |m| {
            m.description("Drives forward after each turn unless halted")
                .input("go", "Go")
                .input("halt", "Halt")
        })
        .module("wander", 1, |m| {
            m.description("Generates a new random heading periodically")
                .output("heading", "Heading")
        })
        .module("avoid", 1, |m| {
            m.description("Combines the wander heading with the obstacle force")
                .input("goal", "Heading")
                .input("force", "Force")
                .output("heading", "Heading")
        })
        .wire("sonar.map", "collide.map")
        .wire("sonar.map", "feelforce.map")
        .wire("feelforce.force", "runaway.force")
        .wire("runaway.heading", "turn.heading")
        .wire("turn.go", "forward.go")
        .wire("collide.halt", "forward.halt")
        .wire("wander.heading", "avoid.goal")
        .wire("feelforce.force", "avoid.force")
        .suppress("turn.heading", "avoid.heading", SUPPRESS_MS)
        .build()
}
