//! Discrete-event core: virtual clock and priority event queue.
//!
//! Events are totally ordered by `(fire_time, sequence)` where the sequence
//! is a monotone insertion counter, so simultaneous events dispatch in FIFO
//! order regardless of container internals.

use alloc::collections::{BTreeSet, BinaryHeap};
use core::cmp::{Ordering, Reverse};
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EventHandle(u64);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleError {
    /// Scheduling in the past is a contract violation; the run must abort.
    PastEvent { now: f64, requested: f64 },
    NonFiniteTime,
}

impl fmt::Display for ScheduleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleError::PastEvent { now, requested } => {
                write!(f, "event scheduled at t={requested} but clock is already at t={now}")
            }
            ScheduleError::NonFiniteTime => write!(f, "event fire time must be finite"),
        }
    }
}

struct Entry<T> {
    time: f64,
    seq: u64,
    payload: T,
}

impl<T> PartialEq for Entry<T> {
    fn eq(&self, other: &Self) -> bool {
        self.time == other.time && self.seq == other.seq
    }
}
impl<T> Eq for Entry<T> {}

impl<T> Ord for Entry<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        // Times are validated finite on insert, so partial_cmp cannot fail.
        self.time
            .partial_cmp(&other.time)
            .unwrap()
            .then(self.seq.cmp(&other.seq))
    }
}
impl<T> PartialOrd for Entry<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Priority event queue with a virtual clock.
pub struct EventQueue<T> {
    heap: BinaryHeap<Reverse<Entry<T>>>,
    cancelled: BTreeSet<u64>,
    now: f64,
    next_seq: u64,
    dispatched: u64,
}

impl<T> Default for EventQueue<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T> EventQueue<T> {
    pub fn new() -> Self {
        EventQueue {
            heap: BinaryHeap::new(),
            cancelled: BTreeSet::new(),
            now: 0.0,
            next_seq: 0,
            dispatched: 0,
        }
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn dispatched(&self) -> u64 {
        self.dispatched
    }

    pub fn is_empty(&self) -> bool {
        self.heap.len() == self.cancelled.len()
    }

    pub fn schedule(&mut self, at: f64, payload: T) -> Result<EventHandle, ScheduleError> {
        if !at.is_finite() {
            return Err(ScheduleError::NonFiniteTime);
        }
        if at < self.now {
            return Err(ScheduleError::PastEvent { now: self.now, requested: at });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse(Entry { time: at, seq, payload }));
        Ok(EventHandle(seq))
    }

    /// Cancelled events never fire. Returns false if the handle was already
    /// cancelled (double cancellation is a no-op).
    pub fn cancel(&mut self, handle: EventHandle) -> bool {
        self.cancelled.insert(handle.0)
    }

    /// Pops the next event with fire_time <= t_end, advancing the clock to
    /// its fire time. Returns None once no such event remains; the clock is
    /// then left where it was (callers finish with `advance_to`).
    pub fn pop_until(&mut self, t_end: f64) -> Option<(f64, T)> {
        loop {
            let head_time = self.heap.peek()?.0.time;
            if head_time > t_end {
                return None;
            }
            let Reverse(entry) = self.heap.pop().unwrap();
            if self.cancelled.remove(&entry.seq) {
                continue;
            }
            self.now = entry.time;
            self.dispatched += 1;
            return Some((entry.time, entry.payload));
        }
    }

    /// Moves the clock forward without dispatching (end of run).
    pub fn advance_to(&mut self, t: f64) {
        if t > self.now {
            self.now = t;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn drain(q: &mut EventQueue<u32>, t_end: f64) -> alloc::vec::Vec<(f64, u32)> {
        let mut out = alloc::vec::Vec::new();
        while let Some(ev) = q.pop_until(t_end) {
            out.push(ev);
        }
        q.advance_to(t_end);
        out
    }

    #[test]
    fn dispatch_orders_by_time() {
        let mut q = EventQueue::new();
        q.schedule(5.0, 5).unwrap();
        q.schedule(3.0, 3).unwrap();
        let got = drain(&mut q, 10.0);
        assert_eq!(got, alloc::vec![(3.0, 3), (5.0, 5)]);
    }

    #[test]
    fn simultaneous_events_fifo() {
        let mut q = EventQueue::new();
        q.schedule(7.0, 1).unwrap(); // A
        q.schedule(7.0, 2).unwrap(); // B
        let got = drain(&mut q, 10.0);
        assert_eq!(got, alloc::vec![(7.0, 1), (7.0, 2)]);
    }

    #[test]
    fn scheduling_in_the_past_is_an_error() {
        let mut q = EventQueue::new();
        q.schedule(4.0, 0).unwrap();
        q.pop_until(10.0);
        assert_eq!(q.now(), 4.0);
        assert!(matches!(
            q.schedule(2.0, 1),
            Err(ScheduleError::PastEvent { .. })
        ));
    }

    #[test]
    fn run_until_empty_queue() {
        let mut q: EventQueue<u32> = EventQueue::new();
        assert!(q.pop_until(10.0).is_none());
        q.advance_to(10.0);
        assert_eq!(q.now(), 10.0);
        assert_eq!(q.dispatched(), 0);
    }

    #[test]
    fn run_until_respects_horizon() {
        let mut q = EventQueue::new();
        for t in [1.0, 2.0, 3.0] {
            q.schedule(t, 0).unwrap();
        }
        let got = drain(&mut q, 2.0);
        assert_eq!(got.len(), 2);
        assert_eq!(q.now(), 2.0);
    }

    #[test]
    fn cancelled_events_never_fire() {
        let mut q = EventQueue::new();
        let _a = q.schedule(1.0, 1).unwrap();
        let b = q.schedule(2.0, 2).unwrap();
        let _c = q.schedule(3.0, 3).unwrap();
        assert!(q.cancel(b));
        let got = drain(&mut q, 10.0);
        assert_eq!(got, alloc::vec![(1.0, 1), (3.0, 3)]);
        assert_eq!(q.dispatched(), 2);
    }

    #[test]
    fn dispatch_order_is_total() {
        // Interleave scheduling and popping; the dispatched list must be
        // sorted by (time, seq).
        let mut q = EventQueue::new();
        let mut seq = 0u32;
        for t in [9.0, 1.0, 4.0, 4.0, 2.5] {
            q.schedule(t, seq).unwrap();
            seq += 1;
        }
        let mut dispatched = alloc::vec::Vec::new();
        while let Some((t, s)) = q.pop_until(5.0) {
            if t < 2.0 {
                q.schedule(t + 3.0, seq).unwrap();
                seq += 1;
            }
            dispatched.push((t, s));
        }
        let mut sorted = dispatched.clone();
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        assert_eq!(dispatched, sorted);
    }
}
