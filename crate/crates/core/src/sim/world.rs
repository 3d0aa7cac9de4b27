//! Arena geometry, JSON loading and range sensing.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use serde_json::Value as Json;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    /// Radians, counter-clockwise from +x.
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Obstacle {
    /// Lower-left corner, width and height.
    Rect { x: f64, y: f64, w: f64, h: f64 },
    Circle { x: f64, y: f64, r: f64 },
}

impl Obstacle {
    /// Distance from `(px, py)` to the obstacle surface, 0 inside.
    pub fn distance(&self, px: f64, py: f64) -> f64 {
        match *self {
            Obstacle::Rect { x, y, w, h } => {
                let dx = (x - px).max(0.0).max(px - (x + w));
                let dy = (y - py).max(0.0).max(py - (y + h));
                dx.hypot(dy)
            }
            Obstacle::Circle { x, y, r } => ((px - x).hypot(py - y) - r).max(0.0),
        }
    }

    /// Ray parameter of the first hit at or after the origin.
    fn ray_hit(&self, ox: f64, oy: f64, dx: f64, dy: f64) -> Option<f64> {
        match *self {
            Obstacle::Rect { x, y, w, h } => {
                let mut t_min = f64::NEG_INFINITY;
                let mut t_max = f64::INFINITY;
                for (o, d, lo, hi) in [(ox, dx, x, x + w), (oy, dy, y, y + h)] {
                    if d == 0.0 {
                        if o < lo || o > hi {
                            return None;
                        }
                    } else {
                        let a = (lo - o) / d;
                        let b = (hi - o) / d;
                        t_min = t_min.max(a.min(b));
                        t_max = t_max.min(a.max(b));
                    }
                }
                if t_max < t_min || t_max < 0.0 {
                    None
                } else {
                    Some(t_min.max(0.0))
                }
            }
            Obstacle::Circle { x, y, r } => {
                let (fx, fy) = (ox - x, oy - y);
                let b = fx * dx + fy * dy;
                let c = fx * fx + fy * fy - r * r;
                if c <= 0.0 {
                    return Some(0.0);
                }
                let disc = b * b - c;
                if disc < 0.0 {
                    return None;
                }
                let t = -b - disc.sqrt();
                (t >= 0.0).then_some(t)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct World {
    pub width: f64,
    pub height: f64,
    pub obstacles: Vec<Obstacle>,
    pub robot_start: Pose,
    pub robot_radius: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum WorldError {
    #[error("invalid world JSON at `{pointer}`: {message}")]
    Schema { pointer: String, message: String },
    #[error("invalid world geometry: {0}")]
    Geometry(String),
}

fn schema(pointer: &str, message: impl Into<String>) -> WorldError {
    WorldError::Schema {
        pointer: pointer.to_owned(),
        message: message.into(),
    }
}

fn numbers<const N: usize>(v: Option<&Json>, pointer: &str) -> Result<[f64; N], WorldError> {
    let arr = v
        .ok_or_else(|| schema(pointer, "missing"))?
        .as_array()
        .ok_or_else(|| schema(pointer, format!("expected an array of {N} numbers")))?;
    if arr.len() != N {
        return Err(schema(pointer, format!("expected {N} numbers, found {}", arr.len())));
    }
    let mut out = [0.0; N];
    for (i, x) in arr.iter().enumerate() {
        out[i] = x
            .as_f64()
            .ok_or_else(|| schema(&format!("{pointer}/{i}"), "expected a number"))?;
    }
    Ok(out)
}

fn positive(x: f64, pointer: &str) -> Result<f64, WorldError> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(schema(pointer, format!("expected a positive number, found {x}")))
    }
}

impl World {
    /// Arena of the given size without obstacles.
    pub fn empty(width: f64, height: f64, robot_start: Pose, robot_radius: f64) -> Self {
        Self {
            width,
            height,
            obstacles: Vec::new(),
            robot_start,
            robot_radius,
        }
    }

    /// Parses
    /// `{"size":[w,h], "start":[x,y,theta], "robot_radius":r, "obstacles":[{"rect":[x,y,w,h]} | {"circle":[x,y,r]}]}`.
    pub fn from_json(text: &str) -> Result<Self, WorldError> {
        let doc: Json = serde_json::from_str(text).map_err(|e| schema("", e.to_string()))?;
        let obj = doc
            .as_object()
            .ok_or_else(|| schema("", "expected an object"))?;
        if let Some(key) = obj
            .keys()
            .find(|k| !matches!(k.as_str(), "size" | "start" | "robot_radius" | "obstacles"))
        {
            return Err(schema(&format!("/{key}"), "unknown field"));
        }
        let [w, h] = numbers::<2>(obj.get("size"), "/size")?;
        let width = positive(w, "/size/0")?;
        let height = positive(h, "/size/1")?;
        let [x, y, theta] = numbers::<3>(obj.get("start"), "/start")?;
        let robot_radius = positive(
            obj.get("robot_radius")
                .ok_or_else(|| schema("/robot_radius", "missing"))?
                .as_f64()
                .ok_or_else(|| schema("/robot_radius", "expected a number"))?,
            "/robot_radius",
        )?;

        let mut obstacles = Vec::new();
        if let Some(list) = obj.get("obstacles") {
            let list = list
                .as_array()
                .ok_or_else(|| schema("/obstacles", "expected an array"))?;
            for (i, item) in list.iter().enumerate() {
                let at = format!("/obstacles/{i}");
                let o = item
                    .as_object()
                    .filter(|o| o.len() == 1)
                    .ok_or_else(|| schema(&at, "expected {\"rect\": [...]} or {\"circle\": [...]}"))?;
                let obstacle = if let Some(v) = o.get("rect") {
                    let p = format!("{at}/rect");
                    let [x, y, w, h] = numbers::<4>(Some(v), &p)?;
                    Obstacle::Rect {
                        x,
                        y,
                        w: positive(w, &format!("{p}/2"))?,
                        h: positive(h, &format!("{p}/3"))?,
                    }
                } else if let Some(v) = o.get("circle") {
                    let p = format!("{at}/circle");
                    let [x, y, r] = numbers::<3>(Some(v), &p)?;
                    Obstacle::Circle {
                        x,
                        y,
                        r: positive(r, &format!("{p}/2"))?,
                    }
                } else {
                    return Err(schema(&at, "expected {\"rect\": [...]} or {\"circle\": [...]}"));
                };
                obstacles.push(obstacle);
            }
        }

        let world = World {
            width,
            height,
            obstacles,
            robot_start: Pose { x, y, theta },
            robot_radius,
        };
        world.check_start()?;
        Ok(world)
    }

    fn check_start(&self) -> Result<(), WorldError> {
        let Pose { x, y, .. } = self.robot_start;
        if !self.is_free(x, y) {
            return Err(WorldError::Geometry(format!(
                "robot of radius {} at ({x}, {y}) overlaps a wall or obstacle",
                self.robot_radius
            )));
        }
        Ok(())
    }

    /// True if a robot disc centred at `(x, y)` touches nothing.
    pub fn is_free(&self, x: f64, y: f64) -> bool {
        let r = self.robot_radius;
        x - r >= 0.0
            && y - r >= 0.0
            && x + r <= self.width
            && y + r <= self.height
            && self.obstacles.iter().all(|o| o.distance(x, y) > r)
    }

    /// Exact distance from `(x, y)` along `angle` to the first wall or
    /// obstacle, clamped to `max_range`.
    pub fn true_range(&self, x: f64, y: f64, angle: f64, max_range: f64) -> f64 {
        let (dy, dx) = angle.sin_cos();
        let mut best = max_range;
        // arena walls, seen from inside
        if dx > 0.0 {
            best = best.min((self.width - x) / dx);
        } else if dx < 0.0 {
            best = best.min(-x / dx);
        }
        if dy > 0.0 {
            best = best.min((self.height - y) / dy);
        } else if dy < 0.0 {
            best = best.min(-y / dy);
        }
        for o in &self.obstacles {
            if let Some(t) = o.ray_hit(x, y, dx, dy) {
                best = best.min(t);
            }
        }
        best.clamp(0.0, max_range)
    }

    /// Simulated range finder: [`true_range`](Self::true_range) plus
    /// Gaussian noise, clamped to `[0, max_range]`.
    pub fn raycast<R: Rng + ?Sized>(
        &self,
        from: Pose,
        angle: f64,
        max_range: f64,
        noise_std: f64,
        rng: &mut R,
    ) -> f64 {
        let exact = self.true_range(from.x, from.y, angle, max_range);
        if noise_std > 0.0 {
            let noise = Normal::new(0.0, noise_std).expect("finite noise").sample(rng);
            (exact + noise).clamp(0.0, max_range)
        } else {
            exact
        }
    }

    /// Number of cells of a `cell`-sized grid over the arena.
    pub fn grid_cells(&self, cell: f64) -> u64 {
        ((self.width / cell).ceil() * (self.height / cell).ceil()) as u64
    }
}

pub fn load_world(text: &str) -> Result<World, WorldError> {
    World::from_json(text)
}
