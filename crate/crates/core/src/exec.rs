//! Data-parallel sample sweeps.
//!
//! Results are always collected in index order, and each index is computed
//! independently, so output does not depend on scheduling. Without the
//! `parallel` feature, [`Parallelism::Parallel`] runs sequentially.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parallelism {
    Sequential,
    #[default]
    Parallel,
}

impl Parallelism {
    /// Whether `Parallel` actually uses worker threads in this build.
    pub fn available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// `(0..count).map(f).collect()`, in parallel when requested and available.
pub fn map_indexed<T, F>(parallelism: Parallelism, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match parallelism {
        #[cfg(feature = "parallel")]
        Parallelism::Parallel => {
            use rayon::prelude::*;
            (0..count).into_par_iter().map(f).collect()
        }
        _ => (0..count).map(f).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_order() {
        let seq = map_indexed(Parallelism::Sequential, 1000, |i| i * i);
        let par = map_indexed(Parallelism::Parallel, 1000, |i| i * i);
        assert_eq!(seq, par);
        assert_eq!(seq[999], 999 * 999);
    }
}
