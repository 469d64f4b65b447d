use std::ops::Range;

use assocbias_core::assoc::Parallelism;
use rayon::prelude::*;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "ASSOC_BIAS_THREADS";

/// Work units per chunk. Chunk boundaries depend only on the job size.
const CHUNK: u64 = 4096;

/// A rayon pool of a fixed size.
pub struct Workers {
    pool: rayon::ThreadPool,
}

impl Workers {
    pub fn new(threads: usize) -> Self {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .expect("failed to start worker threads");
        Workers { pool }
    }

    /// All available cores, or `ASSOC_BIAS_THREADS` workers when set.
    pub fn from_env() -> Self {
        let available = std::thread::available_parallelism().map_or(1, |n| n.get());
        let cap = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&n| n > 0);
        Self::new(cap.unwrap_or(available))
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }

    pub fn install<T: Send>(&self, f: impl FnOnce() -> T + Send) -> T {
        self.pool.install(f)
    }
}

impl Parallelism for Workers {
    fn sum_counts(&self, total: u64, count: &(dyn Fn(Range<u64>) -> u64 + Sync)) -> u64 {
        let chunks = total.div_ceil(CHUNK);
        self.pool.install(|| {
            (0..chunks)
                .into_par_iter()
                .map(|c| count(c * CHUNK..((c + 1) * CHUNK).min(total)))
                .sum()
        })
    }
}
