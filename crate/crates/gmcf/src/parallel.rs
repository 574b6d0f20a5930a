//! Deterministic data-parallel helpers.
//!
//! Work is split into contiguous chunks over disjoint output slices, so the
//! result is independent of the worker count; reductions elsewhere fold
//! fixed-size blocks in index order for the same reason.

/// Number of workers: `requested`, or all available cores when 0.
pub fn worker_count(requested: usize) -> usize {
    if requested == 0 {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    } else {
        requested
    }
}

/// Fill `out[i] = f(base + i)` in parallel over contiguous chunks.
pub fn par_fill<F>(threads: usize, out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64 + Sync,
{
    let workers = worker_count(threads).min(out.len().max(1));
    if workers <= 1 || out.len() < 1024 {
        for (i, o) in out.iter_mut().enumerate() {
            *o = f(i);
        }
        return;
    }
    let chunk = out.len().div_ceil(workers);
    std::thread::scope(|scope| {
        for (c, slice) in out.chunks_mut(chunk).enumerate() {
            let f = &f;
            scope.spawn(move || {
                let base = c * chunk;
                for (i, o) in slice.iter_mut().enumerate() {
                    *o = f(base + i);
                }
            });
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn par_fill_matches_serial() {
        let n = 10_000;
        let f = |i: usize| (i as f64 * 0.37).sin();
        let mut serial = vec![0.0; n];
        for (i, o) in serial.iter_mut().enumerate() {
            *o = f(i);
        }
        for threads in [1, 2, 3, 8] {
            let mut out = vec![0.0; n];
            par_fill(threads, &mut out, f);
            assert_eq!(out, serial, "threads={threads}");
        }
    }
}
