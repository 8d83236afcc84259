//! The verified move script a trace produces.
//!
//! Between events the diagram is constant up to planar isotopy, so the
//! script stores one diagram per inter-event interval plus, per event, a
//! verification record: the crossing-count delta must match the move kind
//! and replaying the classified move combinatorially must reproduce the
//! next interval's diagram.

use super::classify::{ClassifyError, EventKind, SingularEvent};
use crate::diagram::Diagram;

#[derive(Debug, Clone)]
pub struct Interval {
    pub t_start: f64,
    pub t_end: f64,
    /// Diagram extracted at the interval midpoint; None when validation
    /// failed there (recorded as a failed check).
    pub diagram: Option<Diagram>,
    /// Diagrams sampled at 1/4, 1/2, 3/4 of the interval are isomorphic.
    pub samples_isomorphic: bool,
}

#[derive(Debug, Clone)]
pub struct EventVerification {
    /// Crossing-count change from the previous interval to the next.
    pub delta_crossings: Option<i64>,
    pub delta_matches_kind: bool,
    /// Replaying the move combinatorially reproduces the far diagram.
    pub replay_isomorphic: Option<bool>,
    pub notes: Vec<String>,
}

impl EventVerification {
    pub fn ok(&self) -> bool {
        self.delta_matches_kind && self.replay_isomorphic != Some(false)
    }
}

#[derive(Debug, Clone)]
pub struct TracedEvent {
    pub t: f64,
    pub outcome: Result<SingularEvent, ClassifyError>,
    pub verification: EventVerification,
}

impl TracedEvent {
    pub fn kind(&self) -> Option<EventKind> {
        self.outcome.as_ref().ok().map(|e| e.kind)
    }
}

/// Full trace output: intervals, events, endpoint invariants, verdict.
#[derive(Debug, Clone)]
pub struct MoveScript {
    pub intervals: Vec<Interval>,
    pub events: Vec<TracedEvent>,
    /// Fox coloring counts at t=0 and t=1 for the audited moduli.
    pub colorings_start: Vec<(u64, u128)>,
    pub colorings_end: Vec<(u64, u128)>,
    pub notes: Vec<String>,
}

impl MoveScript {
    /// Every verification passed and every event classified cleanly.
    pub fn passed(&self) -> bool {
        self.events
            .iter()
            .all(|e| e.outcome.is_ok() && e.verification.ok())
            && self.intervals.iter().all(|i| {
                i.diagram.is_some() && i.samples_isomorphic
            })
            && self.colorings_start == self.colorings_end
            && self.notes.is_empty()
    }

    /// Smallest separation between consecutive event times.
    pub fn min_event_separation(&self) -> f64 {
        let mut times: Vec<f64> = self.events.iter().map(|e| e.t).collect();
        times.sort_by(f64::total_cmp);
        times
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Line-oriented, diffable serialization.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, interval) in self.intervals.iter().enumerate() {
            out.push_str(&format!(
                "interval [{:.6}, {:.6}] gauss: {}\n",
                interval.t_start,
                interval.t_end,
                match &interval.diagram {
                    Some(d) => d.gauss_code(),
                    None => "(not a diagram)".to_string(),
                }
            ));
            if !interval.samples_isomorphic {
                out.push_str(&format!(
                    "  warning: interval {k} samples are not isomorphic\n"
                ));
            }
            if k < self.events.len() {
                let ev = &self.events[k];
                match &ev.outcome {
                    Ok(e) => {
                        out.push_str(&format!(
                            "event t={:.6} kind={} variant={} {}delta_crossings={} locations={} verified={}\n",
                            e.t,
                            e.kind,
                            e.variant,
                            match e.direction {
                                Some(d) => format!("direction={d} "),
                                None => String::new(),
                            },
                            match ev.verification.delta_crossings {
                                Some(d) => format!("{d:+}"),
                                None => "?".to_string(),
                            },
                            e.locations
                                .iter()
                                .map(|u| format!("{u:.6}"))
                                .collect::<Vec<_>>()
                                .join(","),
                            if ev.verification.ok() { "yes" } else { "NO" }
                        ));
                    }
                    Err(err) => {
                        out.push_str(&format!("event t={:.6} UNCLASSIFIED: {err}\n", ev.t));
                    }
                }
                for note in &ev.verification.notes {
                    out.push_str(&format!("  note: {note}\n"));
                }
            }
        }
        let fmt_col = |cols: &[(u64, u128)]| {
            cols.iter()
                .map(|(n, c)| format!("{n}={c}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        out.push_str(&format!("colorings_t0 {}\n", fmt_col(&self.colorings_start)));
        out.push_str(&format!("colorings_t1 {}\n", fmt_col(&self.colorings_end)));
        for note in &self.notes {
            out.push_str(&format!("note: {note}\n"));
        }
        out.push_str(&format!(
            "verdict {}\n",
            if self.passed() { "PASS" } else { "FAIL" }
        ));
        out
    }
}
