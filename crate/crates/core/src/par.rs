//! Data-parallel execution helpers.
//!
//! With the `parallel` feature (enabled by default) the `map*`/`argmin*`
//! functions distribute work via rayon; without it they fall back to the
//! sequential implementations. The `*_seq` variants are always available so
//! benchmarks can compare both paths in a single build. Every helper is
//! deterministic: results are identical regardless of thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_seq(items, f)
    }
}

pub fn map_seq<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Applies `f` to `0..n` and collects the results in index order.
pub fn map_indexed<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_indexed_seq(n, f)
    }
}

pub fn map_indexed_seq<U, F>(n: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..n).map(f).collect()
}

/// Index of the minimal key over `0..n`, ties broken toward the smaller
/// index. Returns `None` for `n == 0`. NaN keys lose against every non-NaN
/// key. The (key, index) ordering makes the reduction associative, so the
/// result does not depend on how rayon splits the range.
pub fn argmin_indexed<F>(n: usize, key: F) -> Option<usize>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n)
            .into_par_iter()
            .map(|i| (key(i), i))
            .reduce_with(better)
            .map(|(_, i)| i)
    }
    #[cfg(not(feature = "parallel"))]
    {
        argmin_indexed_seq(n, key)
    }
}

pub fn argmin_indexed_seq<F>(n: usize, key: F) -> Option<usize>
where
    F: Fn(usize) -> f64,
{
    (0..n)
        .map(|i| (key(i), i))
        .reduce(better)
        .map(|(_, i)| i)
}

fn better(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
    match (a.0.is_nan(), b.0.is_nan()) {
        (true, true) => {
            if a.1 <= b.1 {
                a
            } else {
                b
            }
        }
        (true, false) => b,
        (false, true) => a,
        (false, false) => {
            if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
                b
            } else {
                a
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_matches_seq() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        let f = |x: &f64| x * x + 1.0;
        assert_eq!(map(&xs, f), map_seq(&xs, f));
    }

    #[test]
    fn argmin_deterministic_tie_break() {
        // all equal keys: smallest index wins
        assert_eq!(argmin_indexed(100, |_| 1.0), Some(0));
        assert_eq!(argmin_indexed_seq(100, |_| 1.0), Some(0));
        // v-shaped
        let key = |i: usize| ((i as f64) - 37.0).abs();
        assert_eq!(argmin_indexed(100, key), Some(37));
        assert_eq!(argmin_indexed(0, |_| 0.0), None);
    }

    #[test]
    fn argmin_ignores_nan() {
        let keys = [f64::NAN, 2.0, 1.0, f64::NAN];
        assert_eq!(argmin_indexed(4, |i| keys[i]), Some(2));
    }
}
