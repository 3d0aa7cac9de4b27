use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::context::StepContext;
use super::topology::{Port, Topology};
use super::trace::{Event, EventKind};
use super::{
    fnv1a, panic_message, Behavior, Behaviors, InputBuffer, Message, RuntimeConfig, RuntimeError,
    Value,
};
use crate::metamodel::{ModifierKind, QualifiedName, SystemModel};
use crate::validate::validate;

struct Slot {
    behavior: Box<dyn Behavior>,
    inputs: Vec<InputBuffer>,
    vars: BTreeMap<String, Value>,
    rng: ChaCha8Rng,
    started: bool,
    /// Earliest instant at which new input makes the module due.
    input_due: Option<u64>,
    wakeup_at: Option<u64>,
}

/// Interception window of one modifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModifierState {
    pub modifier: usize,
    /// The window is open while `now < window_until_ms`.
    pub window_until_ms: u64,
}

impl ModifierState {
    pub fn is_open(&self, now: u64) -> bool {
        now < self.window_until_ms
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProbeId(usize);

/// Deterministic virtual-clock executor.
///
/// Instants are multiples of `tick_ms`, starting at 0. At an instant the due
/// modules (never dispatched yet, new input, or an expired wakeup) are stepped
/// once each, ordered by layer and then declaration order. Messages are routed
/// as soon as a step returns; the receivers become due at the next instant.
pub struct Runtime {
    model: SystemModel,
    topo: Topology,
    config: RuntimeConfig,
    slots: Vec<Slot>,
    windows: Vec<ModifierState>,
    open_reported: Vec<bool>,
    enabled: BTreeSet<u32>,
    now: u64,
    processed_now: bool,
    trace: Vec<Event>,
    probes: Vec<(Port, Vec<Message>)>,
}

impl std::fmt::Debug for Runtime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Runtime")
            .field("system", &self.model.name)
            .field("now", &self.now)
            .field("events", &self.trace.len())
            .finish()
    }
}

impl Runtime {
    pub fn instantiate(
        model: SystemModel,
        mut behaviors: Behaviors,
        config: RuntimeConfig,
    ) -> Result<Self, RuntimeError> {
        let diagnostics = validate(&model);
        if !diagnostics.is_empty() {
            return Err(RuntimeError::InvalidModel(diagnostics));
        }
        if config.tick_ms == 0 {
            return Err(RuntimeError::InvalidConfig("tick_ms must be at least 1".into()));
        }
        if let Some(extra) = behaviors.keys().find(|k| model.module(k).is_none()) {
            return Err(RuntimeError::ExtraBehavior(extra.clone()));
        }
        let layers = model.layers();
        let enabled = match &config.enabled_layers {
            None => layers.clone(),
            Some(set) => {
                if let Some(&bad) = set.iter().find(|l| !layers.contains(l)) {
                    return Err(RuntimeError::UnknownLayer(bad));
                }
                set.clone()
            }
        };

        let mut slots = Vec::with_capacity(model.modules.len());
        for m in &model.modules {
            let behavior = behaviors
                .remove(&m.name)
                .ok_or_else(|| RuntimeError::MissingBehavior(m.name.clone()))?;
            slots.push(Slot {
                behavior,
                inputs: m
                    .inputs
                    .iter()
                    .map(|l| InputBuffer::new(QualifiedName::new(m.name.clone(), l.name.clone())))
                    .collect(),
                vars: BTreeMap::new(),
                rng: ChaCha8Rng::seed_from_u64(config.seed ^ fnv1a(&m.name)),
                started: false,
                input_due: None,
                wakeup_at: None,
            });
        }

        let topo = Topology::new(&model);
        let windows = (0..topo.modifiers.len())
            .map(|modifier| ModifierState {
                modifier,
                window_until_ms: 0,
            })
            .collect();
        Ok(Self {
            open_reported: vec![false; topo.modifiers.len()],
            model,
            topo,
            config,
            slots,
            windows,
            enabled,
            now: 0,
            processed_now: false,
            trace: Vec::new(),
            probes: Vec::new(),
        })
    }

    pub fn model(&self) -> &SystemModel {
        &self.model
    }

    pub fn config(&self) -> &RuntimeConfig {
        &self.config
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn trace(&self) -> &[Event] {
        &self.trace
    }

    pub fn behavior_count(&self) -> usize {
        self.slots.len()
    }

    pub fn modifier_states(&self) -> &[ModifierState] {
        &self.windows
    }

    pub fn enabled_layers(&self) -> &BTreeSet<u32> {
        &self.enabled
    }

    pub fn is_layer_enabled(&self, layer: u32) -> bool {
        self.enabled.contains(&layer)
    }

    /// Input buffer of `module.line`.
    pub fn buffer(&self, line: &str) -> Option<&InputBuffer> {
        let (m, i) = self.topo.find_input(&QualifiedName::parse(line)?)?;
        Some(&self.slots[m].inputs[i])
    }

    /// Internal variable of a module's behavior.
    pub fn var(&self, module: &str, name: &str) -> Option<&Value> {
        let m = self.model.module_index(module)?;
        self.slots[m].vars.get(name)
    }

    /// Last instant the clock may reach, if `max_ticks` is set.
    pub fn horizon(&self) -> Option<u64> {
        self.config.max_ticks.map(|t| t.saturating_mul(self.config.tick_ms))
    }

    /// Processes every instant up to and including `t_ms` (bounded by
    /// `max_ticks`) and returns the events recorded meanwhile.
    pub fn run_until(&mut self, t_ms: u64) -> Result<&[Event], RuntimeError> {
        if t_ms < self.now {
            return Err(RuntimeError::TimeInPast {
                requested: t_ms,
                now: self.now,
            });
        }
        let target = self.horizon().map_or(t_ms, |h| t_ms.min(h));
        let start = self.trace.len();
        if !self.processed_now && self.now <= target {
            self.processed_now = true;
            self.process(self.now)?;
        }
        while self.now + self.config.tick_ms <= target {
            self.now += self.config.tick_ms;
            self.process(self.now)?;
        }
        Ok(&self.trace[start..])
    }

    /// Runs to the `max_ticks` horizon.
    pub fn run(&mut self) -> Result<&[Event], RuntimeError> {
        let h = self.horizon().ok_or_else(|| {
            RuntimeError::InvalidConfig("run() needs max_ticks".into())
        })?;
        self.run_until(h)
    }

    pub fn set_layer_enabled(&mut self, layer: u32, enabled: bool) -> Result<(), RuntimeError> {
        if !self.model.modules.iter().any(|m| m.layer == layer) {
            return Err(RuntimeError::UnknownLayer(layer));
        }
        if enabled {
            self.enabled.insert(layer);
        } else {
            self.enabled.remove(&layer);
        }
        self.trace.push(Event::new(
            self.now,
            EventKind::LayerToggle,
            format!("layer {layer}"),
            if enabled { "enabled" } else { "disabled" },
        ));
        Ok(())
    }

    /// Writes `payload` into an input buffer as if it had arrived on a wire.
    pub fn inject(&mut self, line: &str, data_type: &str, payload: Value) -> Result<(), RuntimeError> {
        let q = QualifiedName::parse(line).ok_or_else(|| RuntimeError::UnknownLine(line.into()))?;
        let port = self
            .topo
            .find_input(&q)
            .ok_or_else(|| RuntimeError::UnknownLine(line.into()))?;
        let expected = &self.topo.modules[port.0].inputs[port.1].1;
        if expected != data_type {
            return Err(RuntimeError::TypeMismatch {
                line: line.into(),
                expected: expected.clone(),
                found: data_type.into(),
            });
        }
        let msg = Message {
            data_type: data_type.into(),
            payload,
            origin: q,
            timestamp_ms: self.now,
        };
        self.trace.push(Event::new(
            self.now,
            EventKind::Deliver,
            line,
            format!("injected: {}", msg.payload),
        ));
        self.write_input(port, msg);
        Ok(())
    }

    /// Starts recording every message that leaves `module.output`.
    pub fn probe(&mut self, line: &str) -> Result<ProbeId, RuntimeError> {
        let port = QualifiedName::parse(line)
            .and_then(|q| self.topo.find_output(&q))
            .ok_or_else(|| RuntimeError::UnknownLine(line.into()))?;
        self.probes.push((port, Vec::new()));
        Ok(ProbeId(self.probes.len() - 1))
    }

    pub fn probed(&self, id: ProbeId) -> &[Message] {
        &self.probes[id.0].1
    }

    fn process(&mut self, t: u64) -> Result<(), RuntimeError> {
        for i in 0..self.windows.len() {
            if self.open_reported[i] && !self.windows[i].is_open(t) {
                self.open_reported[i] = false;
                let until = self.windows[i].window_until_ms;
                self.trace.push(Event::new(
                    t,
                    EventKind::WindowClose,
                    self.topo.modifiers[i].label.clone(),
                    format!("closed at {until}"),
                ));
            }
        }

        for k in 0..self.topo.dispatch_order.len() {
            let m = self.topo.dispatch_order[k];
            if !self.enabled.contains(&self.topo.modules[m].layer) {
                continue;
            }
            let slot = &mut self.slots[m];
            let mut reasons = Vec::new();
            if !slot.started {
                slot.started = true;
                reasons.push("start");
            }
            if slot.input_due.is_some_and(|d| d <= t) {
                slot.input_due = None;
                reasons.push("input");
            }
            if slot.wakeup_at.is_some_and(|w| w <= t) {
                slot.wakeup_at = None;
                reasons.push("wakeup");
                self.trace.push(Event::new(
                    t,
                    EventKind::Wakeup,
                    self.topo.modules[m].name.clone(),
                    "",
                ));
            }
            if !reasons.is_empty() {
                self.dispatch(m, t, &reasons.join("+"))?;
            }
        }
        Ok(())
    }

    fn dispatch(&mut self, m: usize, t: u64, reason: &str) -> Result<(), RuntimeError> {
        let info = &self.topo.modules[m];
        self.trace
            .push(Event::new(t, EventKind::Dispatch, info.name.clone(), reason));

        let slot = &mut self.slots[m];
        let Slot {
            behavior,
            inputs,
            vars,
            rng,
            ..
        } = slot;
        let mut ctx = StepContext::new(info, inputs, vars, rng, t, self.config.seed);
        let result = catch_unwind(AssertUnwindSafe(|| behavior.step(&mut ctx)));
        let outbox = std::mem::take(&mut ctx.outbox);
        let wakeup = ctx.wakeup;
        drop(ctx);
        if let Err(payload) = result {
            return Err(RuntimeError::BehaviorPanic {
                module: info.name.clone(),
                message: panic_message(payload),
            });
        }

        if let Some(at) = wakeup {
            let at = at.max(t + self.config.tick_ms);
            slot.wakeup_at = Some(slot.wakeup_at.map_or(at, |w| w.min(at)));
        }
        for (o, payload) in outbox {
            self.route((m, o), payload, t);
        }
        Ok(())
    }

    fn write_input(&mut self, (m, i): Port, msg: Message) {
        let due = self.now_for_scheduling(msg.timestamp_ms);
        let layer_on = self.enabled.contains(&self.topo.modules[m].layer);
        let slot = &mut self.slots[m];
        debug_assert_eq!(self.topo.modules[m].inputs[i].1, msg.data_type);
        slot.inputs[i].write(msg);
        if layer_on {
            slot.input_due = Some(slot.input_due.map_or(due, |d| d.min(due)));
        }
    }

    fn now_for_scheduling(&self, t: u64) -> u64 {
        t + self.config.tick_ms
    }

    fn route(&mut self, out: Port, payload: Value, t: u64) {
        let origin = self.topo.output_qname(out);
        let origin_name = origin.to_string();
        let data_type = self.topo.modules[out.0].outputs[out.1].1.clone();
        self.trace.push(Event::new(
            t,
            EventKind::Emit,
            origin_name.clone(),
            payload.to_string(),
        ));

        if let Some(inh) = self.topo.inhibitor[out.0][out.1] {
            if self.windows[inh].is_open(t) {
                self.trace.push(Event::new(
                    t,
                    EventKind::InhibitedDrop,
                    origin_name,
                    format!("{payload} (until {})", self.windows[inh].window_until_ms),
                ));
                return;
            }
        }

        let msg = Message {
            data_type,
            payload,
            origin,
            timestamp_ms: t,
        };
        for (port, log) in &mut self.probes {
            if *port == out {
                log.push(msg.clone());
            }
        }

        for k in 0..self.topo.controls[out.0][out.1].len() {
            let i = self.topo.controls[out.0][out.1][k];
            let until = t + self.topo.modifiers[i].time_ms;
            let w = &mut self.windows[i];
            w.window_until_ms = w.window_until_ms.max(until);
            self.open_reported[i] = true;
            self.trace.push(Event::new(
                t,
                EventKind::WindowOpen,
                self.topo.modifiers[i].label.clone(),
                format!("until {}", w.window_until_ms),
            ));
        }

        for k in 0..self.topo.wires[out.0][out.1].len() {
            let sink = self.topo.wires[out.0][out.1][k];
            let sink_name = self.topo.input_name(sink);
            if let Some(s) = self.topo.suppressor[sink.0][sink.1] {
                let from_controller = self.topo.modifiers[s].control == out;
                if self.windows[s].is_open(t) && !from_controller {
                    self.trace.push(Event::new(
                        t,
                        EventKind::SuppressedDrop,
                        sink_name,
                        format!("from {origin_name}: {}", msg.payload),
                    ));
                    continue;
                }
            }
            self.trace.push(Event::new(
                t,
                EventKind::Deliver,
                sink_name,
                format!("from {origin_name}: {}", msg.payload),
            ));
            self.write_input(sink, msg.clone());
        }

        let injected: Vec<usize> = self.topo.suppressors_controlled_by(out).collect();
        for s in injected {
            let target = self.topo.modifiers[s].target;
            debug_assert_eq!(self.topo.modifiers[s].kind, ModifierKind::Suppressor);
            if self.topo.wires[out.0][out.1].contains(&target) {
                continue;
            }
            self.trace.push(Event::new(
                t,
                EventKind::SuppressorInject,
                self.topo.input_name(target),
                format!("from {origin_name}: {}", msg.payload),
            ));
            self.write_input(target, msg.clone());
        }
    }
}
