//! Wall-clock abstraction so the solver can report timings without tying the
//! core to an operating system clock.

/// Monotonic time source; readings are seconds from an arbitrary origin.
pub trait Clock {
    fn now_secs(&self) -> f64;
}

/// Clock that always reads zero, for deterministic output and `no_std` use.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullClock;

impl Clock for NullClock {
    fn now_secs(&self) -> f64 {
        0.0
    }
}

/// Monotonic wall clock backed by `std::time::Instant`.
#[cfg(feature = "std")]
#[derive(Debug, Clone)]
pub struct WallClock {
    origin: std::time::Instant,
}

#[cfg(feature = "std")]
impl WallClock {
    pub fn new() -> Self {
        Self {
            origin: std::time::Instant::now(),
        }
    }
}

#[cfg(feature = "std")]
impl Default for WallClock {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(feature = "std")]
impl Clock for WallClock {
    fn now_secs(&self) -> f64 {
        self.origin.elapsed().as_secs_f64()
    }
}
