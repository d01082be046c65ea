use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};
use sclop_core::exec::Executor;

/// Executor backed by a dedicated rayon pool of a fixed size.
#[derive(Debug)]
pub struct Rayon {
    pool: ThreadPool,
}

impl Rayon {
    /// `threads == 0` lets rayon pick the number of threads.
    pub fn new(threads: usize) -> Self {
        let pool = ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("failed to start the worker pool");
        Rayon { pool }
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Rayon {
    fn map<T, F>(&self, jobs: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..jobs).into_par_iter().map(job).collect())
    }
}
