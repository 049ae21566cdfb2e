//! Fixtures shared by the benchmarks.

use gtqc_core::graph::{cycle, Graph};
use gtqc_core::lift::{random_lift, LiftSpec};

/// Connected 3-lift of a cycle with `n` nodes (`n` divisible by 3).
pub fn lifted_cycle(n: usize, seed: u64) -> Graph {
    random_lift(&LiftSpec {
        base: cycle(n / 3),
        degree: 3,
        seed,
    })
    .expect("valid lift")
}
