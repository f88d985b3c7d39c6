//! Per-thread counters recording how many states of composite systems were
//! enumerated. Matrix pipelines never touch them.

use std::cell::Cell;

thread_local! {
    static COMPOSITE_STATES: Cell<u64> = const { Cell::new(0) };
}

pub fn record_composite_states(n: u64) {
    COMPOSITE_STATES.with(|c| c.set(c.get().saturating_add(n)));
}

pub fn composite_states() -> u64 {
    COMPOSITE_STATES.with(|c| c.get())
}

pub fn reset() {
    COMPOSITE_STATES.with(|c| c.set(0));
}

/// Run `f` and return its result with the number of composite states it enumerated.
pub fn counting<T>(f: impl FnOnce() -> T) -> (T, u64) {
    let before = composite_states();
    let out = f();
    (out, composite_states() - before)
}
