//! Worker pools. Every parallel computation in this crate reduces its results
//! in a fixed order, so the thread count never changes an output.

use hypercirc_core::inference::{PreparedTest, TestReport};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "HYPERCIRC_THREADS";

/// The worker cap from [`THREADS_ENV`]; `None` when unset or empty.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
    }
}

/// Runs `f` inside a pool of `threads` workers (rayon's default when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Usage(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Draws the replicates of a prepared test on the current pool.
pub fn run_prepared(test: PreparedTest) -> TestReport {
    let b = test.config().resamples as u64;
    let stats: Vec<f64> = (0..b).into_par_iter().map(|i| test.replicate(i)).collect();
    test.finish(stats)
}
