use super::{Behavior, Behaviors, StepContext, Value};
use crate::metamodel::SystemModel;

/// Does nothing when dispatched.
#[derive(Debug, Clone, Copy, Default)]
pub struct Idle;

impl Behavior for Idle {
    fn step(&mut self, _ctx: &mut StepContext<'_>) {}
}

/// An [`Idle`] behavior for every module of `model`.
pub fn idle_behaviors(model: &SystemModel) -> Behaviors {
    model
        .modules
        .iter()
        .map(|m| (m.name.clone(), Box::new(Idle) as Box<dyn Behavior>))
        .collect()
}

/// Emits a fixed schedule of `(t_ms, output, payload)` entries, using
/// wakeups to reach each time.
#[derive(Debug, Clone, Default)]
pub struct Scripted {
    schedule: Vec<(u64, String, Value)>,
    next: usize,
}

impl Scripted {
    pub fn new(mut schedule: Vec<(u64, String, Value)>) -> Self {
        schedule.sort_by_key(|(t, _, _)| *t);
        Self { schedule, next: 0 }
    }
}

impl Behavior for Scripted {
    fn step(&mut self, ctx: &mut StepContext<'_>) {
        let now = ctx.now();
        while let Some((t, out, payload)) = self.schedule.get(self.next) {
            if *t > now {
                break;
            }
            ctx.emit(out, payload.clone());
            self.next += 1;
        }
        if let Some((t, _, _)) = self.schedule.get(self.next) {
            ctx.request_wakeup(t - now);
        }
    }
}
