//! Piecewise-constant resource availability.
//!
//! A [`ResourceProfile`] is a capacity minus an ordered list of disjoint
//! reservations. Transmission and computation delays are found by inverting the
//! running integral of the available amount segment by segment, so zero
//! availability (another subtask holding the resource) shows up as waiting time
//! inside the returned delay.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reservation {
    pub start: f64,
    pub end: f64,
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceProfile {
    capacity: f64,
    reservations: Vec<Reservation>,
}

impl ResourceProfile {
    pub fn new(capacity: f64) -> Result<Self> {
        if !(capacity >= 0.0) || capacity.is_nan() {
            return Err(Error::domain(format!("capacity must be >= 0, got {capacity}")));
        }
        Ok(Self {
            capacity,
            reservations: Vec::new(),
        })
    }

    /// Profile whose availability steps through `pieces` of `(end, available)`
    /// starting at `start`, returning to full capacity after the last piece.
    pub fn from_pieces(capacity: f64, start: f64, pieces: &[(f64, f64)]) -> Result<Self> {
        let mut profile = Self::new(capacity)?;
        let mut from = start;
        for &(end, available) in pieces {
            if !(available >= 0.0 && available <= capacity) {
                return Err(Error::domain(format!(
                    "piece availability {available} outside [0, {capacity}]"
                )));
            }
            if available < capacity {
                profile.reserve(from, end, capacity - available)?;
            }
            from = end;
        }
        Ok(profile)
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn reservations(&self) -> &[Reservation] {
        &self.reservations
    }

    /// Index of the first reservation ending after `t`.
    fn first_ending_after(&self, t: f64) -> usize {
        self.reservations.partition_point(|r| r.end <= t)
    }

    pub fn available(&self, t: f64) -> f64 {
        let i = self.first_ending_after(t);
        match self.reservations.get(i) {
            Some(r) if r.start <= t => self.capacity - r.amount,
            _ => self.capacity,
        }
    }

    /// Constant-availability segments `(start, end, available)` covering `[from, to)`.
    pub fn segments(&self, from: f64, to: f64) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        let mut cur = from;
        let mut i = self.first_ending_after(from);
        while cur < to {
            let (end, avail) = match self.reservations.get(i) {
                Some(r) if r.start <= cur => {
                    i += 1;
                    (r.end, self.capacity - r.amount)
                }
                Some(r) => (r.start, self.capacity),
                None => (f64::INFINITY, self.capacity),
            };
            let end = end.min(to);
            if end > cur {
                out.push((cur, end, avail));
            }
            cur = end;
        }
        out
    }

    /// `∫_{from}^{to} available(s) ds`.
    pub fn integrate(&self, from: f64, to: f64) -> f64 {
        if to <= from {
            return 0.0;
        }
        self.segments(from, to)
            .into_iter()
            .map(|(a, b, avail)| avail * (b - a))
            .sum()
    }

    /// Smallest `T >= 0` with `∫_t^{t+T} available = work`, or `+∞` when the
    /// profile never accumulates that much.
    pub fn time_to_accumulate(&self, t: f64, work: f64) -> f64 {
        if work <= 0.0 {
            return 0.0;
        }
        let mut cur = t;
        let mut remaining = work;
        let mut i = self.first_ending_after(t);
        loop {
            let (seg_end, avail) = match self.reservations.get(i) {
                Some(r) if r.start <= cur => {
                    i += 1;
                    (r.end, self.capacity - r.amount)
                }
                Some(r) => (r.start, self.capacity),
                None => (f64::INFINITY, self.capacity),
            };
            if avail > 0.0 {
                let need = remaining / avail;
                if cur + need <= seg_end {
                    return cur + need - t;
                }
                remaining -= avail * (seg_end - cur);
            } else if seg_end == f64::INFINITY {
                return f64::INFINITY;
            }
            cur = seg_end;
        }
    }

    /// Adds a reservation of `amount` over `[start, end)`. Fails when it would
    /// overlap an existing reservation or exceed capacity. Empty intervals are
    /// a no-op.
    pub fn reserve(&mut self, start: f64, end: f64, amount: f64) -> Result<()> {
        check_interval(start, end)?;
        if end == start || amount == 0.0 {
            return Ok(());
        }
        if !(amount > 0.0 && amount <= self.capacity) {
            return Err(Error::Conflict {
                start,
                end,
                reason: "amount exceeds capacity",
            });
        }
        let i = self.first_ending_after(start);
        if let Some(r) = self.reservations.get(i) {
            if r.start < end {
                return Err(Error::Conflict {
                    start,
                    end,
                    reason: "overlaps an existing reservation",
                });
            }
        }
        self.reservations.insert(i, Reservation { start, end, amount });
        Ok(())
    }

    /// Drives availability to zero over `[start, end)`, claiming whatever is
    /// still free there. Fails when the interval holds no free capacity at all.
    pub fn occupy(&mut self, start: f64, end: f64) -> Result<()> {
        check_interval(start, end)?;
        if end == start {
            return Ok(());
        }
        let free: Vec<(f64, f64, f64)> = self
            .segments(start, end)
            .into_iter()
            .filter(|&(_, _, avail)| avail > 0.0)
            .collect();
        if free.is_empty() {
            return Err(Error::Conflict {
                start,
                end,
                reason: "interval already fully reserved",
            });
        }
        // Split any partial reservations at the interval edges, then replace
        // everything inside with full-capacity holds.
        self.split_at(start);
        self.split_at(end);
        let lo = self.first_ending_after(start);
        let hi = self.reservations.partition_point(|r| r.start < end);
        self.reservations.splice(
            lo..hi,
            std::iter::once(Reservation {
                start,
                end,
                amount: self.capacity,
            }),
        );
        self.merge_neighbors();
        Ok(())
    }

    /// Removes and returns the reservation at `index`.
    pub fn release(&mut self, index: usize) -> Option<Reservation> {
        (index < self.reservations.len()).then(|| self.reservations.remove(index))
    }

    fn split_at(&mut self, t: f64) {
        let i = self.first_ending_after(t);
        if let Some(r) = self.reservations.get(i).copied() {
            if r.start < t && t < r.end {
                self.reservations[i].end = t;
                self.reservations.insert(i + 1, Reservation { start: t, ..r });
            }
        }
    }

    fn merge_neighbors(&mut self) {
        self.reservations.dedup_by(|next, prev| {
            if prev.end == next.start && prev.amount == next.amount {
                prev.end = next.end;
                true
            } else {
                false
            }
        });
    }
}

fn check_interval(start: f64, end: f64) -> Result<()> {
    if start.is_nan() || end.is_nan() || end < start {
        return Err(Error::domain(format!("invalid interval [{start}, {end}]")));
    }
    Ok(())
}
