//! Job execution strategy.
//!
//! Replications and pairwise S-CLOP evaluations are independent jobs. The
//! algorithms in this crate hand them to an [`Executor`]; results always come
//! back in job order, so the outcome does not depend on the schedule.

use alloc::vec::Vec;

pub trait Executor: Sync {
    /// Evaluates `job(0..jobs)` and returns the results in index order.
    fn map<T, F>(&self, jobs: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs every job on the calling thread.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, jobs: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..jobs).map(job).collect()
    }
}
