use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex, RwLock};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::context::StepContext;
use super::topology::{Port, Topology};
use super::trace::{Event, EventKind};
use super::{
    fnv1a, panic_message, Behavior, Behaviors, InputBuffer, Message, RuntimeConfig, RuntimeError,
    Value,
};
use crate::metamodel::{QualifiedName, SystemModel};
use crate::validate::validate;

const IDLE_POLL: Duration = Duration::from_millis(20);

struct Cell {
    buf: InputBuffer,
    /// Number of writes so far; lets a reader acknowledge only what it saw.
    seq: u64,
}

struct Shared {
    topo: Topology,
    seed: u64,
    tick_ms: u64,
    buffers: Vec<Vec<Mutex<Cell>>>,
    windows: Vec<AtomicU64>,
    enabled: RwLock<BTreeSet<u32>>,
    trace: Mutex<Vec<Event>>,
    pending: Vec<(Mutex<bool>, Condvar)>,
    stop: AtomicBool,
    epoch: Instant,
    failure: Mutex<Option<RuntimeError>>,
}

impl Shared {
    fn now(&self) -> u64 {
        self.epoch.elapsed().as_millis() as u64
    }

    fn record(&self, e: Event) {
        self.trace.lock().unwrap().push(e);
    }

    fn layer_on(&self, m: usize) -> bool {
        self.enabled
            .read()
            .unwrap()
            .contains(&self.topo.modules[m].layer)
    }

    fn notify(&self, m: usize) {
        let (lock, cv) = &self.pending[m];
        *lock.lock().unwrap() = true;
        cv.notify_one();
    }

    fn write_input(&self, (m, i): Port, msg: Message) {
        {
            let mut cell = self.buffers[m][i].lock().unwrap();
            cell.buf.write(msg);
            cell.seq += 1;
        }
        if self.layer_on(m) {
            self.notify(m);
        }
    }

    fn route(&self, out: Port, payload: Value) {
        let t = self.now();
        let origin = self.topo.output_qname(out);
        let origin_name = origin.to_string();
        self.record(Event::new(t, EventKind::Emit, origin_name.clone(), payload.to_string()));

        if let Some(inh) = self.topo.inhibitor[out.0][out.1] {
            if t < self.windows[inh].load(Ordering::SeqCst) {
                self.record(Event::new(t, EventKind::InhibitedDrop, origin_name, payload.to_string()));
                return;
            }
        }
        let msg = Message {
            data_type: self.topo.modules[out.0].outputs[out.1].1.clone(),
            payload,
            origin,
            timestamp_ms: t,
        };
        for &i in &self.topo.controls[out.0][out.1] {
            let until = t + self.topo.modifiers[i].time_ms;
            let prev = self.windows[i].fetch_max(until, Ordering::SeqCst);
            self.record(Event::new(
                t,
                EventKind::WindowOpen,
                self.topo.modifiers[i].label.clone(),
                format!("until {}", prev.max(until)),
            ));
        }
        for &sink in &self.topo.wires[out.0][out.1] {
            let sink_name = self.topo.input_name(sink);
            if let Some(s) = self.topo.suppressor[sink.0][sink.1] {
                if self.topo.modifiers[s].control != out
                    && t < self.windows[s].load(Ordering::SeqCst)
                {
                    self.record(Event::new(
                        t,
                        EventKind::SuppressedDrop,
                        sink_name,
                        format!("from {origin_name}: {}", msg.payload),
                    ));
                    continue;
                }
            }
            self.record(Event::new(
                t,
                EventKind::Deliver,
                sink_name,
                format!("from {origin_name}: {}", msg.payload),
            ));
            self.write_input(sink, msg.clone());
        }
        for s in self.topo.suppressors_controlled_by(out) {
            let target = self.topo.modifiers[s].target;
            if self.topo.wires[out.0][out.1].contains(&target) {
                continue;
            }
            self.record(Event::new(
                t,
                EventKind::SuppressorInject,
                self.topo.input_name(target),
                format!("from {origin_name}: {}", msg.payload),
            ));
            self.write_input(target, msg.clone());
        }
    }
}

/// Runs every module on its own thread against the wall clock (one virtual
/// millisecond per real millisecond).
///
/// Buffers are overwrite cells guarded per line and windows are atomics, so
/// each write and each window check is atomic; there is no global order
/// between modules. Use [`Runtime`](super::Runtime) when reproducibility
/// matters.
pub struct ConcurrentRuntime {
    shared: Arc<Shared>,
    threads: Vec<JoinHandle<()>>,
}

impl ConcurrentRuntime {
    pub fn start(
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
            None => layers,
            Some(set) => {
                if let Some(&bad) = set.iter().find(|l| !layers.contains(l)) {
                    return Err(RuntimeError::UnknownLayer(bad));
                }
                set.clone()
            }
        };
        let mut ordered = Vec::new();
        for m in &model.modules {
            let b = behaviors
                .remove(&m.name)
                .ok_or_else(|| RuntimeError::MissingBehavior(m.name.clone()))?;
            ordered.push(b);
        }

        let topo = Topology::new(&model);
        let buffers = model
            .modules
            .iter()
            .map(|m| {
                m.inputs
                    .iter()
                    .map(|l| {
                        Mutex::new(Cell {
                            buf: InputBuffer::new(QualifiedName::new(m.name.clone(), l.name.clone())),
                            seq: 0,
                        })
                    })
                    .collect()
            })
            .collect();
        let shared = Arc::new(Shared {
            windows: (0..topo.modifiers.len()).map(|_| AtomicU64::new(0)).collect(),
            pending: (0..topo.modules.len())
                .map(|_| (Mutex::new(false), Condvar::new()))
                .collect(),
            topo,
            seed: config.seed,
            tick_ms: config.tick_ms,
            buffers,
            enabled: RwLock::new(enabled),
            trace: Mutex::new(Vec::new()),
            stop: AtomicBool::new(false),
            epoch: Instant::now(),
            failure: Mutex::new(None),
        });

        let threads = ordered
            .into_iter()
            .enumerate()
            .map(|(m, behavior)| {
                let shared = Arc::clone(&shared);
                std::thread::Builder::new()
                    .name(format!("module-{}", shared.topo.modules[m].name))
                    .spawn(move || module_loop(&shared, m, behavior))
                    .expect("spawn module thread")
            })
            .collect();
        Ok(Self { shared, threads })
    }

    pub fn now(&self) -> u64 {
        self.shared.now()
    }

    pub fn set_layer_enabled(&self, layer: u32, enabled: bool) -> Result<(), RuntimeError> {
        if !self.shared.topo.modules.iter().any(|m| m.layer == layer) {
            return Err(RuntimeError::UnknownLayer(layer));
        }
        {
            let mut set = self.shared.enabled.write().unwrap();
            if enabled {
                set.insert(layer);
            } else {
                set.remove(&layer);
            }
        }
        self.shared.record(Event::new(
            self.shared.now(),
            EventKind::LayerToggle,
            format!("layer {layer}"),
            if enabled { "enabled" } else { "disabled" },
        ));
        for (_, cv) in &self.shared.pending {
            cv.notify_all();
        }
        Ok(())
    }

    pub fn inject(&self, line: &str, data_type: &str, payload: Value) -> Result<(), RuntimeError> {
        let q = QualifiedName::parse(line).ok_or_else(|| RuntimeError::UnknownLine(line.into()))?;
        let port = self
            .shared
            .topo
            .find_input(&q)
            .ok_or_else(|| RuntimeError::UnknownLine(line.into()))?;
        let expected = &self.shared.topo.modules[port.0].inputs[port.1].1;
        if expected != data_type {
            return Err(RuntimeError::TypeMismatch {
                line: line.into(),
                expected: expected.clone(),
                found: data_type.into(),
            });
        }
        let t = self.shared.now();
        self.shared.write_input(
            port,
            Message {
                data_type: data_type.into(),
                payload,
                origin: q,
                timestamp_ms: t,
            },
        );
        Ok(())
    }

    /// Latest content of an input buffer.
    pub fn buffer(&self, line: &str) -> Option<InputBuffer> {
        let (m, i) = self.shared.topo.find_input(&QualifiedName::parse(line)?)?;
        Some(self.shared.buffers[m][i].lock().unwrap().buf.clone())
    }

    pub fn trace_snapshot(&self) -> Vec<Event> {
        self.shared.trace.lock().unwrap().clone()
    }

    /// Stops all module threads and returns the trace, or the first behavior
    /// failure.
    pub fn stop(mut self) -> Result<Vec<Event>, RuntimeError> {
        self.halt();
        if let Some(err) = self.shared.failure.lock().unwrap().take() {
            return Err(err);
        }
        Ok(std::mem::take(&mut *self.shared.trace.lock().unwrap()))
    }

    fn halt(&mut self) {
        self.shared.stop.store(true, Ordering::SeqCst);
        for (lock, cv) in &self.shared.pending {
            let _guard = lock.lock().unwrap();
            cv.notify_all();
        }
        for t in self.threads.drain(..) {
            let _ = t.join();
        }
    }
}

impl Drop for ConcurrentRuntime {
    fn drop(&mut self) {
        self.halt();
    }
}

fn module_loop(shared: &Shared, m: usize, mut behavior: Box<dyn Behavior>) {
    let info = &shared.topo.modules[m];
    let mut vars: BTreeMap<String, Value> = BTreeMap::new();
    let mut rng = ChaCha8Rng::seed_from_u64(shared.seed ^ fnv1a(&info.name));
    let mut started = false;
    let mut wakeup_at: Option<u64> = None;

    loop {
        let mut reasons = Vec::new();
        {
            let (lock, cv) = &shared.pending[m];
            let mut pending = lock.lock().unwrap();
            loop {
                if shared.stop.load(Ordering::SeqCst) {
                    return;
                }
                let now = shared.now();
                if shared.layer_on(m) {
                    if !started {
                        reasons.push("start");
                    }
                    if *pending {
                        reasons.push("input");
                    }
                    if wakeup_at.is_some_and(|w| w <= now) {
                        reasons.push("wakeup");
                    }
                    if !reasons.is_empty() {
                        break;
                    }
                }
                let timeout = match wakeup_at {
                    Some(w) if w > now => Duration::from_millis(w - now).min(IDLE_POLL),
                    _ => IDLE_POLL,
                };
                pending = cv.wait_timeout(pending, timeout).unwrap().0;
            }
            *pending = false;
        }
        started = true;
        let t = shared.now();
        if reasons.contains(&"wakeup") {
            wakeup_at = None;
            shared.record(Event::new(t, EventKind::Wakeup, info.name.clone(), ""));
        }
        shared.record(Event::new(t, EventKind::Dispatch, info.name.clone(), reasons.join("+")));

        let mut seqs = Vec::with_capacity(info.inputs.len());
        let mut local: Vec<InputBuffer> = shared.buffers[m]
            .iter()
            .map(|c| {
                let cell = c.lock().unwrap();
                seqs.push(cell.seq);
                cell.buf.clone()
            })
            .collect();
        let mut ctx = StepContext::new(info, &mut local, &mut vars, &mut rng, t, shared.seed);
        let result = catch_unwind(AssertUnwindSafe(|| behavior.step(&mut ctx)));
        let outbox = std::mem::take(&mut ctx.outbox);
        let acked = std::mem::take(&mut ctx.acked);
        let wakeup = ctx.wakeup;
        drop(ctx);
        if let Err(payload) = result {
            let mut failure = shared.failure.lock().unwrap();
            if failure.is_none() {
                *failure = Some(RuntimeError::BehaviorPanic {
                    module: info.name.clone(),
                    message: panic_message(payload),
                });
            }
            shared.stop.store(true, Ordering::SeqCst);
            return;
        }

        for (i, seen) in seqs.into_iter().enumerate() {
            if acked[i] {
                let mut cell = shared.buffers[m][i].lock().unwrap();
                if cell.seq == seen {
                    cell.buf.fresh = false;
                }
            }
        }
        if let Some(at) = wakeup {
            let at = at.max(t + shared.tick_ms);
            wakeup_at = Some(wakeup_at.map_or(at, |w| w.min(at)));
        }
        for (o, payload) in outbox {
            shared.route((m, o), payload);
        }
    }
}
