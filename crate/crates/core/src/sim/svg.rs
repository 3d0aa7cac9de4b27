use std::fmt::Write;

use super::world::{Obstacle, World};
use super::PathPoint;

const SCALE: f64 = 50.0;

/// Plots obstacles and one polyline per `(path, color)`. The y axis points up.
pub fn render_svg(world: &World, paths: &[(&[PathPoint], &str)]) -> String {
    let (w, h) = (world.width * SCALE, world.height * SCALE);
    let y = |v: f64| (world.height - v) * SCALE;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(out, r##"  <rect x="0" y="0" width="{w}" height="{h}" fill="white" stroke="black" stroke-width="2"/>"##);
    for o in &world.obstacles {
        match *o {
            Obstacle::Rect { x, y: oy, w: ow, h: oh } => {
                let _ = writeln!(
                    out,
                    r##"  <rect x="{}" y="{}" width="{}" height="{}" fill="#888"/>"##,
                    x * SCALE,
                    y(oy + oh),
                    ow * SCALE,
                    oh * SCALE
                );
            }
            Obstacle::Circle { x, y: oy, r } => {
                let _ = writeln!(
                    out,
                    r##"  <circle cx="{}" cy="{}" r="{}" fill="#888"/>"##,
                    x * SCALE,
                    y(oy),
                    r * SCALE
                );
            }
        }
    }
    for (path, color) in paths {
        let points: Vec<String> = path
            .iter()
            .map(|p| format!("{:.3},{:.3}", p.x * SCALE, y(p.y)))
            .collect();
        let _ = writeln!(
            out,
            r#"  <polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            points.join(" ")
        );
    }
    let start = world.robot_start;
    let _ = writeln!(
        out,
        r#"  <circle cx="{}" cy="{}" r="{}" fill="none" stroke="red"/>"#,
        start.x * SCALE,
        y(start.y),
        world.robot_radius * SCALE
    );
    out.push_str("</svg>\n");
    out
}
