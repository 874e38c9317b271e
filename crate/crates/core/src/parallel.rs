//! Process-wide cap on internal parallelism.
//!
//! `0` and `1` both mean sequential execution. Every parallel code path in
//! this crate produces output bitwise identical to its sequential
//! counterpart: work is split into disjoint index ranges and each output
//! entry is computed by exactly one worker in a fixed order.

use std::sync::atomic::{AtomicUsize, Ordering};

static THREADS: AtomicUsize = AtomicUsize::new(0);

pub fn set_threads(n: usize) {
    THREADS.store(n, Ordering::Relaxed);
}

pub fn threads() -> usize {
    THREADS.load(Ordering::Relaxed)
}

/// Fills `out` by calling `f(index, slot)` for every index, splitting the
/// slice into contiguous chunks across at most `threads()` workers.
pub(crate) fn fill_indexed<T, F>(out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync,
{
    let workers = threads().max(1).min(out.len().max(1));
    if workers <= 1 {
        for (i, slot) in out.iter_mut().enumerate() {
            f(i, slot);
        }
        return;
    }
    let chunk = out.len().div_ceil(workers);
    std::thread::scope(|scope| {
        for (c, part) in out.chunks_mut(chunk).enumerate() {
            let f = &f;
            scope.spawn(move || {
                for (off, slot) in part.iter_mut().enumerate() {
                    f(c * chunk + off, slot);
                }
            });
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_fill_matches_sequential() {
        let mut seq = vec![0u64; 97];
        fill_indexed(&mut seq, |i, s| *s = (i as u64).pow(3) % 13);
        set_threads(4);
        let mut par = vec![0u64; 97];
        fill_indexed(&mut par, |i, s| *s = (i as u64).pow(3) % 13);
        set_threads(0);
        assert_eq!(seq, par);
    }
}
