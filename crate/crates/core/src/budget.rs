use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

/// Default cap on elementary evaluations per command.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Hard cap on the number of elementary evaluations (structures visited,
/// pair evaluations, bijections tried). Exceeding it is an error.
#[derive(Debug)]
pub struct Budget {
    limit: u64,
    used: AtomicU64,
}

impl Budget {
    pub fn new(limit: u64) -> Self {
        Budget {
            limit,
            used: AtomicU64::new(0),
        }
    }

    pub fn unlimited() -> Self {
        Budget::new(u64::MAX)
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn used(&self) -> u64 {
        self.used.load(Ordering::Relaxed)
    }

    pub fn charge(&self, units: u64) -> Result<()> {
        let before = self.used.fetch_add(units, Ordering::Relaxed);
        if before.saturating_add(units) > self.limit {
            Err(Error::ResourceCeiling { limit: self.limit })
        } else {
            Ok(())
        }
    }

    /// Fails up front when `units` alone would exceed the remaining budget.
    pub fn reserve(&self, units: u128) -> Result<()> {
        if units > u128::from(self.limit.saturating_sub(self.used())) {
            Err(Error::ResourceCeiling { limit: self.limit })
        } else {
            Ok(())
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(DEFAULT_BUDGET)
    }
}
