//! Scheduling of independent jobs.

use alloc::vec::Vec;

/// Runs `count` independent jobs and returns their results in index order.
///
/// Implementations may run jobs concurrently, but the output order is always
/// `0..count`, so any reduction performed by the caller over the returned
/// vector is deterministic.
pub trait Executor: Sync {
    fn map<T, F>(&self, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs jobs one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..count).map(job).collect()
    }
}
