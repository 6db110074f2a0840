//! Time budgets without depending on a system clock.

use core::time::Duration;

/// Monotonic time source. The std companion crate provides one backed by
/// `std::time::Instant`.
pub trait Clock {
    /// Time elapsed since an arbitrary fixed origin.
    fn now(&self) -> Duration;
}

/// A clock that never advances; useful for deterministic tests.
#[derive(Clone, Copy, Debug, Default)]
pub struct FrozenClock;

impl Clock for FrozenClock {
    fn now(&self) -> Duration {
        Duration::ZERO
    }
}

pub struct Budget<'c> {
    clock: &'c dyn Clock,
    start: Duration,
    limit: Option<Duration>,
}

impl<'c> Budget<'c> {
    pub fn new(clock: &'c dyn Clock, limit: Option<Duration>) -> Self {
        Self {
            clock,
            start: clock.now(),
            limit,
        }
    }

    pub fn unlimited(clock: &'c dyn Clock) -> Self {
        Self::new(clock, None)
    }

    pub fn elapsed(&self) -> Duration {
        self.clock.now().saturating_sub(self.start)
    }

    pub fn limit(&self) -> Option<Duration> {
        self.limit
    }

    pub fn expired(&self) -> bool {
        self.limit.is_some_and(|l| self.elapsed() >= l)
    }
}

/// Polls a budget every `every` calls so hot loops don't hit the clock on
/// each iteration.
pub(crate) struct Ticker {
    count: u32,
    every: u32,
}

impl Ticker {
    pub fn new(every: u32) -> Self {
        Self { count: 0, every }
    }

    pub fn expired(&mut self, budget: &Budget<'_>) -> bool {
        self.count += 1;
        if self.count >= self.every {
            self.count = 0;
            budget.expired()
        } else {
            false
        }
    }
}
