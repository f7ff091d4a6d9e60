use std::sync::Arc;

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};
use rbe_core::stream::{batch_count, run_batch, Sequential, Tally, TrialRng, TrialRunner};

/// Runs batches on a dedicated rayon pool. Batch tallies are collected in
/// batch order before merging, so results match [`Sequential`] exactly.
#[derive(Clone)]
pub struct Parallel {
    pool: Arc<ThreadPool>,
}

impl Parallel {
    pub fn new(threads: usize) -> anyhow::Result<Self> {
        let pool = ThreadPoolBuilder::new().num_threads(threads).thread_name(|i| format!("rbe-lab-{i}")).build()?;
        Ok(Self { pool: Arc::new(pool) })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl std::fmt::Debug for Parallel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Parallel").field("threads", &self.threads()).finish()
    }
}

impl TrialRunner for Parallel {
    fn run<T, F>(&self, seed: u64, domain: u64, trials: u64, trial: F) -> T
    where
        T: Tally + Send,
        F: Fn(&mut TrialRng, &mut T) + Sync,
    {
        let tallies: Vec<T> = self.pool.install(|| {
            (0..batch_count(trials)).into_par_iter().map(|b| run_batch(seed, domain, trials, b, &trial)).collect()
        });
        let mut total = T::default();
        for t in tallies {
            total.merge(t);
        }
        total
    }
}

/// Runner picked from a thread count: one thread runs inline.
#[derive(Debug, Clone)]
pub enum Runner {
    Sequential,
    Parallel(Parallel),
}

impl Runner {
    pub fn with_threads(threads: usize) -> anyhow::Result<Self> {
        anyhow::ensure!(threads >= 1, "thread count must be at least 1");
        Ok(if threads == 1 { Runner::Sequential } else { Runner::Parallel(Parallel::new(threads)?) })
    }

    /// One worker per available core.
    pub fn available() -> anyhow::Result<Self> {
        Self::with_threads(std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

impl TrialRunner for Runner {
    fn run<T, F>(&self, seed: u64, domain: u64, trials: u64, trial: F) -> T
    where
        T: Tally + Send,
        F: Fn(&mut TrialRng, &mut T) + Sync,
    {
        match self {
            Runner::Sequential => Sequential.run(seed, domain, trials, trial),
            Runner::Parallel(p) => p.run(seed, domain, trials, trial),
        }
    }
}
