//! Data-parallel helpers. With the `parallel` feature the work is spread over
//! the rayon pool; without it everything runs on the calling thread. Results
//! come back in index order either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

/// `[f(0), f(1), .., f(n-1)]`.
pub fn map_indices<R, F>(exec: Execution, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match exec {
        Execution::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let seq = map_indices(Execution::Sequential, 1000, |i| i * i);
        let def = map_indices(Execution::default(), 1000, |i| i * i);
        assert_eq!(seq, def);
        assert_eq!(seq[999], 998_001);
    }
}
