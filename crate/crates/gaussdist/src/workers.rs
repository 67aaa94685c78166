//! Deterministic work partitioning across threads. The worker count is capped
//! by the `GAUSSDIST_THREADS` environment variable; results are merged with
//! order-independent reductions so output never depends on the thread count.

/// Worker count: `min(GAUSSDIST_THREADS, available parallelism)`, at least 1.
pub fn worker_count() -> usize {
    let available = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    match std::env::var("GAUSSDIST_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        Some(cap) if cap >= 1 => available.min(cap),
        _ => available,
    }
}

/// Maps `f` over `0..n` on up to `worker_count()` threads and folds the
/// per-item results with `reduce`, which must be associative and commutative.
pub fn map_reduce<T, F, R>(n: usize, f: F, reduce: R) -> Option<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
    R: Fn(T, T) -> T + Sync + Send,
{
    if n == 0 {
        return None;
    }
    let workers = worker_count().min(n);
    if workers == 1 {
        return (1..n)
            .map(&f)
            .fold(Some(f(0)), |acc, x| Some(reduce(acc.expect("nonempty"), x)));
    }
    let chunk = n.div_ceil(workers);
    let locals: Vec<Option<T>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let f = &f;
                let reduce = &reduce;
                scope.spawn(move || {
                    let lo = w * chunk;
                    let hi = ((w + 1) * chunk).min(n);
                    let mut acc: Option<T> = None;
                    for i in lo..hi {
                        let v = f(i);
                        acc = Some(match acc {
                            None => v,
                            Some(a) => reduce(a, v),
                        });
                    }
                    acc
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    locals.into_iter().flatten().fold(None, |acc, x| match acc {
        None => Some(x),
        Some(a) => Some(reduce(a, x)),
    })
}
