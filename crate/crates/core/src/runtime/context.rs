use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;

use super::topology::ModuleInfo;
use super::{InputBuffer, Value};

/// What a behavior sees of one input line.
#[derive(Debug, Clone, Copy)]
pub struct Reading<'a> {
    pub payload: &'a Value,
    /// True if the value was written since the line was last read.
    pub fresh: bool,
    pub timestamp_ms: u64,
}

/// Handle passed to [`Behavior::step`](super::Behavior::step).
///
/// Naming an input or output the module does not declare panics; the
/// scheduler reports the panic as an error naming the module.
pub struct StepContext<'a> {
    pub(crate) info: &'a ModuleInfo,
    pub(crate) inputs: &'a mut [InputBuffer],
    pub(crate) vars: &'a mut BTreeMap<String, Value>,
    pub(crate) rng: &'a mut ChaCha8Rng,
    pub(crate) now: u64,
    pub(crate) seed: u64,
    pub(crate) outbox: Vec<(usize, Value)>,
    pub(crate) wakeup: Option<u64>,
    pub(crate) acked: Vec<bool>,
}

impl<'a> StepContext<'a> {
    pub(crate) fn new(
        info: &'a ModuleInfo,
        inputs: &'a mut [InputBuffer],
        vars: &'a mut BTreeMap<String, Value>,
        rng: &'a mut ChaCha8Rng,
        now: u64,
        seed: u64,
    ) -> Self {
        let n = inputs.len();
        Self {
            info,
            inputs,
            vars,
            rng,
            now,
            seed,
            outbox: Vec::new(),
            wakeup: None,
            acked: vec![false; n],
        }
    }

    fn input_index(&self, name: &str) -> usize {
        self.info.input_index(name).unwrap_or_else(|| {
            panic!(
                "module `{}` has no input line `{name}`",
                self.info.name
            )
        })
    }

    pub fn module_name(&self) -> &str {
        &self.info.name
    }

    /// Current virtual time in milliseconds.
    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Per-module generator, seeded from the runtime seed and the module name.
    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        self.rng
    }

    /// Latest value of an input and whether it is new. Reading acknowledges
    /// the value, so a second read in the same step reports it as not fresh.
    pub fn read(&mut self, input: &str) -> Option<Reading<'_>> {
        let i = self.input_index(input);
        self.acked[i] = true;
        let buf = &mut self.inputs[i];
        let fresh = std::mem::replace(&mut buf.fresh, false);
        buf.latest.as_ref().map(|m| Reading {
            payload: &m.payload,
            fresh,
            timestamp_ms: m.timestamp_ms,
        })
    }

    /// Freshness of an input without acknowledging it.
    pub fn is_fresh(&self, input: &str) -> bool {
        self.inputs[self.input_index(input)].fresh
    }

    /// Latest payload of an input if it is fresh; acknowledges it.
    pub fn take_fresh(&mut self, input: &str) -> Option<Value> {
        match self.read(input) {
            Some(r) if r.fresh => Some(r.payload.clone()),
            _ => None,
        }
    }

    pub fn var(&self, name: &str) -> Option<&Value> {
        self.vars.get(name)
    }

    pub fn set_var(&mut self, name: &str, value: Value) {
        self.vars.insert(name.to_owned(), value);
    }

    /// Sends `payload` on an output line. Routing happens when the step
    /// returns, in emission order, at the current instant.
    pub fn emit(&mut self, output: &str, payload: Value) {
        let o = self.info.output_index(output).unwrap_or_else(|| {
            panic!(
                "module `{}` has no output line `{output}`",
                self.info.name
            )
        });
        self.outbox.push((o, payload));
    }

    /// Asks to be dispatched again `delay_ms` from now (at least one tick).
    /// Several requests keep the earliest.
    pub fn request_wakeup(&mut self, delay_ms: u64) {
        let at = self.now + delay_ms;
        self.wakeup = Some(self.wakeup.map_or(at, |w| w.min(at)));
    }
}
