use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Emit,
    Deliver,
    SuppressedDrop,
    SuppressorInject,
    InhibitedDrop,
    Dispatch,
    Wakeup,
    LayerToggle,
    WindowOpen,
    WindowClose,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Emit => "emit",
            EventKind::Deliver => "deliver",
            EventKind::SuppressedDrop => "suppressed_drop",
            EventKind::SuppressorInject => "suppressor_inject",
            EventKind::InhibitedDrop => "inhibited_drop",
            EventKind::Dispatch => "dispatch",
            EventKind::Wakeup => "wakeup",
            EventKind::LayerToggle => "layer_toggle",
            EventKind::WindowOpen => "window_open",
            EventKind::WindowClose => "window_close",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub t_ms: u64,
    pub kind: EventKind,
    /// Module name, `module.line`, `layer N`, or `suppressor module.line`.
    pub subject: String,
    pub detail: String,
}

impl Event {
    pub(crate) fn new(t_ms: u64, kind: EventKind, subject: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            t_ms,
            kind,
            subject: subject.into(),
            detail: detail.into(),
        }
    }

    /// Module the event is about, if any: the part before the `.` of the
    /// subject's last word.
    pub fn module(&self) -> Option<&str> {
        if self.kind == EventKind::LayerToggle {
            return None;
        }
        let word = self.subject.rsplit(' ').next()?;
        Some(word.split('.').next().unwrap_or(word))
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}", self.t_ms, self.kind, self.subject, self.detail)
    }
}

/// CSV with header `t_ms,kind,subject,detail`.
pub fn trace_to_csv(events: &[Event]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t_ms", "kind", "subject", "detail"])
        .expect("write to memory");
    for e in events {
        w.write_record([
            e.t_ms.to_string().as_str(),
            e.kind.as_str(),
            &e.subject,
            &e.detail,
        ])
        .expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 input")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_details() {
        let events = vec![
            Event::new(0, EventKind::Dispatch, "sonar", "start"),
            Event::new(5, EventKind::Emit, "feelforce.force", "(1, 2)"),
        ];
        assert_eq!(
            trace_to_csv(&events),
            "t_ms,kind,subject,detail\n0,dispatch,sonar,start\n5,emit,feelforce.force,\"(1, 2)\"\n"
        );
    }

    #[test]
    fn event_module() {
        assert_eq!(Event::new(0, EventKind::Emit, "a.b", "").module(), Some("a"));
        assert_eq!(Event::new(0, EventKind::Dispatch, "a", "").module(), Some("a"));
        assert_eq!(
            Event::new(0, EventKind::WindowOpen, "suppressor t.h", "").module(),
            Some("t")
        );
        assert_eq!(Event::new(0, EventKind::LayerToggle, "layer 1", "").module(), None);
    }
}
