//! Execution of validated models.
//!
//! Every module owns one latest-value buffer per input line and a
//! [`Behavior`] that is stepped when new input arrives or a requested wakeup
//! falls due. Emitted messages travel along wires; suppressors replace the
//! data arriving at an input and inhibitors discard the data leaving an
//! output for a fixed window after each control message.
//!
//! [`Runtime`] is the deterministic single-threaded scheduler driven by a
//! virtual millisecond clock. [`ConcurrentRuntime`] runs the same semantics
//! with one thread per module against the wall clock.

mod behaviors;
mod concurrent;
mod context;
mod scheduler;
mod topology;
mod trace;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metamodel::QualifiedName;
use crate::validate::Diagnostic;

pub use behaviors::{idle_behaviors, Idle, Scripted};
pub use concurrent::ConcurrentRuntime;
pub use context::{Reading, StepContext};
pub use scheduler::{ModifierState, ProbeId, Runtime};
pub use trace::{trace_to_csv, Event, EventKind};

/// Payload carried by a message. Data types of the model are opaque names;
/// behaviors agree among themselves on which variant a type uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Value {
    Unit,
    Bool(bool),
    Int(i64),
    Float(f64),
    Vec2([f64; 2]),
    List(Vec<f64>),
    Text(String),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Value::Float(x) => Some(x),
            Value::Int(i) => Some(i as f64),
            _ => None,
        }
    }

    pub fn as_vec2(&self) -> Option<[f64; 2]> {
        match *self {
            Value::Vec2(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[f64]> {
        match self {
            Value::List(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match *self {
            Value::Bool(b) => Some(b),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Unit => f.write_str("()"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Float(x) => write!(f, "{x}"),
            Value::Vec2([x, y]) => write!(f, "({x}, {y})"),
            Value::List(items) => {
                f.write_str("[")?;
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str("]")
            }
            Value::Text(s) => write!(f, "{s:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    /// Declared type of `origin`.
    pub data_type: String,
    pub payload: Value,
    pub origin: QualifiedName,
    pub timestamp_ms: u64,
}

/// One-slot store of the latest message written to an input line.
#[derive(Debug, Clone, PartialEq)]
pub struct InputBuffer {
    pub line: QualifiedName,
    pub latest: Option<Message>,
    /// Set on every write, cleared when the owning behavior reads the line.
    pub fresh: bool,
}

impl InputBuffer {
    pub(crate) fn new(line: QualifiedName) -> Self {
        Self {
            line,
            latest: None,
            fresh: false,
        }
    }

    pub(crate) fn write(&mut self, msg: Message) {
        self.latest = Some(msg);
        self.fresh = true;
    }
}

/// A module's program. `step` runs once per dispatch and must return.
pub trait Behavior: Send {
    fn step(&mut self, ctx: &mut StepContext<'_>);
}

impl<F> Behavior for F
where
    F: FnMut(&mut StepContext<'_>) + Send,
{
    fn step(&mut self, ctx: &mut StepContext<'_>) {
        self(ctx)
    }
}

/// Behaviors keyed by module name.
pub type Behaviors = BTreeMap<String, Box<dyn Behavior>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuntimeConfig {
    /// Layers whose modules are dispatched. `None` enables every layer.
    pub enabled_layers: Option<BTreeSet<u32>>,
    pub tick_ms: u64,
    /// Seed for the per-module random generators.
    pub seed: u64,
    /// Upper bound on the clock, in ticks.
    pub max_ticks: Option<u64>,
}

impl Default for RuntimeConfig {
    fn default() -> Self {
        Self {
            enabled_layers: None,
            tick_ms: 1,
            seed: 0,
            max_ticks: None,
        }
    }
}

impl RuntimeConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_layers(mut self, layers: impl IntoIterator<Item = u32>) -> Self {
        self.enabled_layers = Some(layers.into_iter().collect());
        self
    }

    pub fn with_max_ticks(mut self, ticks: u64) -> Self {
        self.max_ticks = Some(ticks);
        self
    }
}

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error("model is invalid ({} diagnostics)", .0.len())]
    InvalidModel(Vec<Diagnostic>),
    #[error("no behavior for module `{0}`")]
    MissingBehavior(String),
    #[error("behavior given for unknown module `{0}`")]
    ExtraBehavior(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown layer {0}")]
    UnknownLayer(u32),
    #[error("unknown line `{0}`")]
    UnknownLine(String),
    #[error("type mismatch on `{line}`: expected `{expected}`, got `{found}`")]
    TypeMismatch {
        line: String,
        expected: String,
        found: String,
    },
    #[error("cannot run back to t={requested} ms, clock is at {now} ms")]
    TimeInPast { requested: u64, now: u64 },
    #[error("behavior of module `{module}` panicked: {message}")]
    BehaviorPanic { module: String, message: String },
}

/// 64-bit FNV-1a, used to derive per-module seeds from module names.
pub(crate) fn fnv1a(text: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

pub(crate) fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_owned()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "non-string panic payload".to_owned()
    }
}
