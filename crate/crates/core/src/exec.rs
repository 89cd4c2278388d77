//! Index-parallel map with a sequential fallback.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Whether work fans out over the rayon pool.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// `f(0), ..., f(n-1)` in index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }
}

/// Run `f` with at most `jobs` worker threads.
pub fn with_jobs<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    if let Some(j) = jobs {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build() {
            return pool.install(f);
        }
    }
    let _ = jobs;
    f()
}

/// Independent generator for `(seed, stream, index)`.
pub fn task_rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ index);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn modes_agree() {
        let f = |i: usize| task_rng(7, 1, i as u64).random::<u64>();
        assert_eq!(Exec::Sequential.map(64, f), Exec::Parallel.map(64, f));
    }

    #[test]
    fn streams_differ() {
        let a: u64 = task_rng(1, 0, 0).random();
        let b: u64 = task_rng(1, 0, 1).random();
        let c: u64 = task_rng(1, 1, 0).random();
        assert!(a != b && a != c && b != c);
    }
}
