//! Data-parallel helpers with a sequential fallback.
//!
//! Every helper produces its output in index order, so results are
//! identical whichever strategy runs them.

/// Execution strategy for the data-parallel inner loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise
    /// degrades to [`Exec::Sequential`].
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// Evaluates `f(0..n)` and collects the results in order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            _ => (0..n).map(f).collect(),
        }
    }

    /// Runs `f(chunk_index, chunk)` over consecutive `chunk_len` slices of `data`.
    pub fn for_each_chunk_mut<T, F>(self, data: &mut [T], chunk_len: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        if chunk_len == 0 {
            return;
        }
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                data.par_chunks_mut(chunk_len)
                    .enumerate()
                    .for_each(|(i, c)| f(i, c));
            }
            _ => data
                .chunks_mut(chunk_len)
                .enumerate()
                .for_each(|(i, c)| f(i, c)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategies_agree() {
        let f = |i: usize| (i as f64).sqrt() * 3.0;
        assert_eq!(Exec::Sequential.map(100, f), Exec::Parallel.map(100, f));

        let mut a = vec![1.0f64; 37];
        let mut b = a.clone();
        let g = |i: usize, c: &mut [f64]| c.iter_mut().for_each(|x| *x += i as f64);
        Exec::Sequential.for_each_chunk_mut(&mut a, 5, g);
        Exec::Parallel.for_each_chunk_mut(&mut b, 5, g);
        assert_eq!(a, b);
        assert_eq!(a[36], 8.0);
    }
}
