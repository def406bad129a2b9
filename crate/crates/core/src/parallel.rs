//! Worker pool plumbing shared by the engines.

use rayon::ThreadPoolBuilder;

/// Runs `f` inside a dedicated pool of `workers` threads (at least one).
///
/// Engine code uses rayon's ambient pool, so everything `f` calls, including
/// nested branch or subgraph tasks, is confined to these workers.
pub fn with_workers<R, F>(workers: usize, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    let pool = ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .thread_name(|i| format!("qcsim-worker-{i}"))
        .build()
        .expect("failed to spawn worker threads");
    pool.install(f)
}

/// Number of worker threads available to the current task.
pub fn current_workers() -> usize {
    rayon::current_num_threads()
}
