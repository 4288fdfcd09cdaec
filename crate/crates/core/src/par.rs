//! Index-parallel map with a sequential fallback.
//!
//! Results are always returned in index order, so reductions over them are
//! independent of scheduling.

/// How a fan-out loop is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
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

pub fn map_indexed<T, F>(n: usize, exec: Exec, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Pairwise (tree) reduction in a fixed order.
pub fn pairwise_reduce<T, F>(mut items: Vec<T>, combine: F) -> Option<T>
where
    F: Fn(T, T) -> T,
{
    if items.is_empty() {
        return None;
    }
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(combine(a, b)),
                None => next.push(a),
            }
        }
        items = next;
    }
    items.pop()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordered_and_equal_across_modes() {
        let a = map_indexed(100, Exec::Sequential, |i| i * i);
        let b = map_indexed(100, Exec::Parallel, |i| i * i);
        assert_eq!(a, b);
    }

    #[test]
    fn pairwise_sum() {
        let s = pairwise_reduce((1..=10).collect::<Vec<u32>>(), |a, b| a + b);
        assert_eq!(s, Some(55));
        assert_eq!(pairwise_reduce(Vec::<u32>::new(), |a, b| a + b), None);
    }
}
