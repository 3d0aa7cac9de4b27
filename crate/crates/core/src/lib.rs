//! Toolchain for subsumption-architecture robot controllers: a textual
//! modeling language, a constraint checker, a code-skeleton generator, a
//! deterministic message-passing runtime and a small 2D robot simulator.

pub mod codegen;
pub mod dot;
pub mod dsl;
pub mod example;
pub mod metamodel;
pub mod runtime;
pub mod sim;
pub mod validate;

pub use metamodel::{QualifiedName, SystemBuilder, SystemModel};
pub use runtime::{Behavior, Runtime, RuntimeConfig, StepContext, Value};

pub use rand;
