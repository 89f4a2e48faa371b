//! Threaded driver for the partitioned word search. Workers claim partition
//! indices from a shared counter; results land in their partition's slot,
//! and the merge consumes them in partition order, so the report is
//! byte-identical for any worker count.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use psearch_core::search::{PartitionOutcome, SearchPlan, SearchReport};

/// Thread count from the explicit flag, the `PSEARCH_THREADS` environment
/// variable, or the machine's available parallelism, in that order.
pub fn resolve_thread_count(requested: Option<usize>) -> usize {
    requested
        .or_else(|| std::env::var("PSEARCH_THREADS").ok().and_then(|v| v.parse().ok()))
        .filter(|&t| t >= 1)
        .unwrap_or_else(|| thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

pub fn run_plan(plan: &SearchPlan, threads: usize) -> SearchReport {
    let count = plan.partition_count();
    if count == 0 || threads <= 1 {
        let outcomes: Vec<PartitionOutcome> = (0..count).map(|i| plan.run_partition(i)).collect();
        return plan.finish(outcomes);
    }

    let slots: Vec<Mutex<Option<PartitionOutcome>>> =
        (0..count).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    thread::scope(|scope| {
        for _ in 0..threads.min(count) {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::Relaxed);
                if index >= count {
                    break;
                }
                let outcome = plan.run_partition(index);
                *slots[index].lock().expect("partition slot poisoned") = Some(outcome);
            });
        }
    });
    let outcomes: Vec<PartitionOutcome> = slots
        .into_iter()
        .map(|slot| slot.into_inner().expect("slot poisoned").expect("all partitions ran"))
        .collect();
    plan.finish(outcomes)
}
