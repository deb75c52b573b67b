//! Live/peak accounting of working-vector storage, in complex elements.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};

/// Shared counter of live complex elements and the high-water mark reached.
///
/// Engines register every working buffer they create with [`AllocationMeter::track`]
/// and hold the returned [`Allocation`] for as long as the buffer lives. An optional
/// limit turns registrations that would exceed it into [`Error::Resource`].
#[derive(Debug, Default)]
pub struct AllocationMeter {
    current: AtomicUsize,
    peak: AtomicUsize,
    limit: Option<usize>,
}

impl AllocationMeter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_limit(limit: usize) -> Self {
        Self {
            limit: Some(limit),
            ..Self::default()
        }
    }

    pub fn allocate(&self, elems: usize) -> Result<()> {
        let now = self.current.fetch_add(elems, Ordering::SeqCst) + elems;
        if let Some(limit) = self.limit {
            if now > limit {
                self.current.fetch_sub(elems, Ordering::SeqCst);
                return Err(Error::Resource(format!(
                    "working set of {now} complex elements exceeds limit {limit}"
                )));
            }
        }
        self.peak.fetch_max(now, Ordering::SeqCst);
        Ok(())
    }

    pub fn release(&self, elems: usize) {
        let prev = self.current.fetch_sub(elems, Ordering::SeqCst);
        debug_assert!(prev >= elems, "released more than allocated");
    }

    /// Registers `elems` live elements until the returned guard is dropped.
    pub fn track(&self, elems: usize) -> Result<Allocation<'_>> {
        self.allocate(elems)?;
        Ok(Allocation { meter: self, elems })
    }

    pub fn current(&self) -> usize {
        self.current.load(Ordering::SeqCst)
    }

    pub fn peak(&self) -> usize {
        self.peak.load(Ordering::SeqCst)
    }

    /// Resets the high-water mark to the current live count.
    pub fn reset_peak(&self) {
        self.peak.store(self.current(), Ordering::SeqCst);
    }
}

/// Guard for a tracked allocation; releases its elements on drop.
#[derive(Debug)]
pub struct Allocation<'m> {
    meter: &'m AllocationMeter,
    elems: usize,
}

impl Allocation<'_> {
    pub fn elems(&self) -> usize {
        self.elems
    }
}

impl Drop for Allocation<'_> {
    fn drop(&mut self) {
        self.meter.release(self.elems);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_is_max_over_scripted_events() {
        let meter = AllocationMeter::new();
        // (+alloc / -free, elems)
        let script: [(bool, usize); 9] = [
            (true, 4),
            (true, 4),
            (false, 4),
            (true, 10),
            (false, 4),
            (true, 3),
            (false, 10),
            (true, 1),
            (false, 3),
        ];
        let mut live = 0usize;
        let mut expected_peak = 0usize;
        for (alloc, n) in script {
            if alloc {
                meter.allocate(n).unwrap();
                live += n;
            } else {
                meter.release(n);
                live -= n;
            }
            expected_peak = expected_peak.max(live);
            assert_eq!(meter.current(), live);
            assert!(meter.peak() >= meter.current());
        }
        assert_eq!(meter.peak(), expected_peak);
        assert_eq!(expected_peak, 14);
    }

    #[test]
    fn guards_release_on_drop() {
        let meter = AllocationMeter::new();
        {
            let _a = meter.track(5).unwrap();
            let _b = meter.track(7).unwrap();
            assert_eq!(meter.current(), 12);
        }
        assert_eq!(meter.current(), 0);
        assert_eq!(meter.peak(), 12);
    }

    #[test]
    fn limit_rejects_and_rolls_back() {
        let meter = AllocationMeter::with_limit(10);
        let _a = meter.track(8).unwrap();
        assert!(matches!(meter.track(3), Err(Error::Resource(_))));
        assert_eq!(meter.current(), 8);
        assert_eq!(meter.peak(), 8);
    }

    #[test]
    fn peak_monotone_under_threads() {
        let meter = AllocationMeter::new();
        std::thread::scope(|s| {
            for _ in 0..4 {
                s.spawn(|| {
                    for _ in 0..1000 {
                        let _g = meter.track(2).unwrap();
                    }
                });
            }
        });
        assert_eq!(meter.current(), 0);
        assert!(meter.peak() >= 2 && meter.peak() <= 8);
    }
}
