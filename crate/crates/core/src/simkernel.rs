//! Deterministic discrete-event clock.
//!
//! Every timestamped action in a simulation goes through one [`EventQueue`]:
//! events are dispatched in strict `(time, sequence)` order, where the
//! sequence number is assigned at scheduling time. Two runs that schedule
//! the same events observe identical dispatch order, independent of any
//! container iteration order, which is what makes round reports replayable
//! bit for bit.
//!
//! The kernel is single-threaded and is the sole owner of simulated time;
//! scheduling an event in the past is a programming error and panics.

use std::collections::BTreeMap;

/// Opaque handle to a scheduled event, usable for cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventHandle {
    t: f64,
    seq: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct EventKey {
    t: f64,
    seq: u64,
}

impl Eq for EventKey {}

impl Ord for EventKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // t is asserted non-NaN at scheduling time.
        self.t
            .total_cmp(&other.t)
            .then(self.seq.cmp(&other.seq))
    }
}

impl PartialOrd for EventKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Pending-event queue plus the simulated clock.
#[derive(Debug)]
pub struct EventQueue<P> {
    clock: f64,
    next_seq: u64,
    pending: BTreeMap<EventKey, P>,
}

impl<P> Default for EventQueue<P> {
    fn default() -> Self {
        Self::new()
    }
}

impl<P> EventQueue<P> {
    /// New queue with the clock at 0.
    pub fn new() -> Self {
        Self {
            clock: 0.0,
            next_seq: 0,
            pending: BTreeMap::new(),
        }
    }

    /// Current simulated time in seconds.
    pub fn now(&self) -> f64 {
        self.clock
    }

    pub fn is_idle(&self) -> bool {
        self.pending.is_empty()
    }

    /// Enqueues `payload` for dispatch at time `t`.
    ///
    /// Panics if `t` is NaN or earlier than the current clock.
    pub fn schedule(&mut self, t: f64, payload: P) -> EventHandle {
        assert!(!t.is_nan(), "event time must not be NaN");
        assert!(
            t >= self.clock,
            "cannot schedule in the past: t={} < clock={}",
            t,
            self.clock
        );
        let key = EventKey {
            t,
            seq: self.next_seq,
        };
        self.next_seq += 1;
        self.pending.insert(key, payload);
        EventHandle { t: key.t, seq: key.seq }
    }

    /// Removes a pending event; returns its payload, or `None` if it was
    /// already dispatched or cancelled.
    pub fn cancel(&mut self, handle: EventHandle) -> Option<P> {
        self.pending.remove(&EventKey {
            t: handle.t,
            seq: handle.seq,
        })
    }

    /// Pops the next event in `(t, seq)` order and advances the clock to it.
    pub fn pop(&mut self) -> Option<(f64, P)> {
        let (&key, _) = self.pending.iter().next()?;
        let payload = self.pending.remove(&key).expect("key just observed");
        debug_assert!(key.t >= self.clock, "clock would move backward");
        self.clock = key.t;
        Some((key.t, payload))
    }

    /// Dispatches all events in order through `on_event`, which may schedule
    /// or cancel further events. Returns the final clock value; on an empty
    /// queue the clock is returned unchanged.
    pub fn run_until_idle<F>(&mut self, mut on_event: F) -> f64
    where
        F: FnMut(&mut Self, f64, P),
    {
        while let Some((t, payload)) = self.pop() {
            on_event(self, t, payload);
        }
        self.clock
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_time_dispatches_in_scheduling_order() {
        let mut q = EventQueue::new();
        q.schedule(5.0, "x");
        q.schedule(5.0, "y");
        let mut log = Vec::new();
        q.run_until_idle(|_, _, p| log.push(p));
        assert_eq!(log, vec!["x", "y"]);
    }

    #[test]
    fn earlier_time_dispatches_first_regardless_of_insertion() {
        let mut q = EventQueue::new();
        q.schedule(3.0, "a");
        q.schedule(1.0, "b");
        let mut log = Vec::new();
        q.run_until_idle(|_, t, p| log.push((t, p)));
        assert_eq!(log, vec![(1.0, "b"), (3.0, "a")]);
    }

    #[test]
    #[should_panic(expected = "cannot schedule in the past")]
    fn scheduling_in_the_past_is_a_fault() {
        let mut q = EventQueue::new();
        q.schedule(10.0, "later");
        q.pop();
        q.schedule(9.0, "too late");
    }

    #[test]
    fn run_until_idle_on_empty_queue_returns_clock_unchanged() {
        let mut q: EventQueue<()> = EventQueue::new();
        assert_eq!(q.run_until_idle(|_, _, _| ()), 0.0);
    }

    #[test]
    fn run_until_idle_returns_time_of_last_event() {
        let mut q = EventQueue::new();
        for t in [1.0, 2.0, 3.0] {
            q.schedule(t, ());
        }
        assert_eq!(q.run_until_idle(|_, _, _| ()), 3.0);
    }

    #[test]
    fn handlers_can_schedule_follow_ups() {
        // Cascade: each event schedules the next one second later until t=5.
        let mut q = EventQueue::new();
        q.schedule(1.0, ());
        let end = q.run_until_idle(|q, t, _| {
            if t < 5.0 {
                q.schedule(t + 1.0, ());
            }
        });
        assert_eq!(end, 5.0);
    }

    #[test]
    fn cancelled_events_do_not_dispatch() {
        let mut q = EventQueue::new();
        let keep = q.schedule(1.0, "keep");
        let drop = q.schedule(2.0, "drop");
        assert_eq!(q.cancel(drop), Some("drop"));
        assert_eq!(q.cancel(drop), None);
        let mut log = Vec::new();
        q.run_until_idle(|_, _, p| log.push(p));
        assert_eq!(log, vec!["keep"]);
        // Dispatched events cannot be cancelled either.
        assert_eq!(q.cancel(keep), None);
    }

    #[test]
    fn identical_insertions_produce_identical_dispatch_logs() {
        let run = || {
            let mut q = EventQueue::new();
            for i in 0..100u64 {
                q.schedule((i % 7) as f64, i);
            }
            let mut log = Vec::new();
            q.run_until_idle(|_, t, p| log.push((t.to_bits(), p)));
            log
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn dispatch_timestamps_are_non_decreasing() {
        let mut q = EventQueue::new();
        for i in (0..50u64).rev() {
            q.schedule(i as f64 * 0.5, i);
        }
        let mut last = f64::NEG_INFINITY;
        q.run_until_idle(|_, t, _| {
            assert!(t >= last);
            last = t;
        });
    }
}
