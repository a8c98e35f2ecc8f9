//! Multi-threaded sampling and the tail-curve CSV.
//!
//! Work is cut into fixed-size chunks, each seeded by its own index, so the
//! merged histogram never depends on the thread count: running with one
//! worker or sixteen produces byte-identical output.

use qpart_core::concentration::{
    dist_from_histogram, sample_chunk_into, tail_bound_qpart_median, tail_bound_schechtman,
    ConcentrationError, EmpiricalDist, ItemMarginals, SAMPLE_CHUNK,
};
use qpart_core::setfn::Valuation;
use qpart_core::to_f64;

/// Draws `n` samples of `v` under independent item marginals `pi`, spread
/// over `threads` workers. The result equals the single-threaded run.
pub fn parallel_mc(
    v: &Valuation,
    pi: &ItemMarginals,
    seed: u64,
    n: u64,
    threads: u32,
) -> Result<EmpiricalDist, ConcentrationError> {
    if pi.len() != v.m() as usize {
        return Err(ConcentrationError::MarginalsLength { expected: v.m(), found: pi.len() });
    }
    if n == 0 {
        return Err(ConcentrationError::EmptySample);
    }
    let slots = 1usize << v.m();
    let chunks = n.div_ceil(SAMPLE_CHUNK);
    let workers = u64::from(threads.max(1)).min(chunks);
    let mut hist = vec![0u64; slots];
    if workers <= 1 {
        for chunk in 0..chunks {
            sample_chunk_into(v, pi, seed, chunk, n, &mut hist);
        }
    } else {
        let partials = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|worker| {
                    scope.spawn(move || {
                        let mut local = vec![0u64; slots];
                        let mut chunk = worker;
                        while chunk < chunks {
                            sample_chunk_into(v, pi, seed, chunk, n, &mut local);
                            chunk += workers;
                        }
                        local
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sampler thread panicked"))
                .collect::<Vec<_>>()
        });
        for local in partials {
            for (total, part) in hist.iter_mut().zip(local) {
                *total += part;
            }
        }
    }
    dist_from_histogram(v, &hist, n)
}

/// One sample point of the tail curve: the observed value, its exact
/// empirical survival probability, and the two tail bounds at that point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveRow {
    /// Observed value.
    pub x: f64,
    /// `P[sample >= x]` over the run, exact count divided by `n`.
    pub empirical_survival: f64,
    /// `(r/s)^(-k) 2^(r/s)` at `k = max(0, x - (r/s) median)`.
    pub bound_qpart: f64,
    /// `2^(-k) 4` at `k = max(0, x - 2 median)`.
    pub bound_schechtman: f64,
}

/// Evaluates both tail bounds against the empirical survival function at
/// every observed value. Offsets below the bound thresholds clamp to zero,
/// where both bounds exceed one and hold vacuously.
pub fn tail_curve(
    dist: &EmpiricalDist,
    r: u32,
    s: u32,
    q: u64,
) -> Result<Vec<CurveRow>, ConcentrationError> {
    let med = to_f64(dist.median());
    let ratio = f64::from(r) / f64::from(s);
    let mut rows = Vec::with_capacity(dist.values().len());
    for value in dist.values() {
        let x = to_f64(value);
        let k_qpart = (x - ratio * med).max(0.0);
        let k_sch = (x - 2.0 * med).max(0.0);
        rows.push(CurveRow {
            x,
            empirical_survival: to_f64(&dist.survival(value)),
            bound_qpart: tail_bound_qpart_median(k_qpart, r, s, q)?,
            bound_schechtman: tail_bound_schechtman(k_sch, 2)?,
        });
    }
    Ok(rows)
}

/// Renders curve rows as CSV with a fixed header.
pub fn curve_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from("x,empirical_survival,bound_qpart,bound_schechtman\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.x, row.empirical_survival, row.bound_qpart, row.bound_schechtman
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use qpart_core::setfn::gen_threshold;
    use qpart_core::{rat, rat_int};

    #[test]
    fn thread_count_does_not_change_the_histogram() {
        let v = gen_threshold(6, &rat(4, 3)).unwrap();
        let pi = ItemMarginals::uniform(6, 0.5).unwrap();
        let lone = parallel_mc(&v, &pi, 11, 20_000, 1).unwrap();
        for threads in [2, 3, 8] {
            let multi = parallel_mc(&v, &pi, 11, 20_000, threads).unwrap();
            assert_eq!(multi.values(), lone.values());
            assert_eq!(multi.counts(), lone.counts());
        }
    }

    #[test]
    fn curve_covers_every_observed_value() {
        let v = gen_threshold(5, &rat(4, 3)).unwrap();
        let pi = ItemMarginals::uniform(5, 0.5).unwrap();
        let dist = parallel_mc(&v, &pi, 7, 8_192, 2).unwrap();
        let rows = tail_curve(&dist, 2, 1, 4).unwrap();
        assert_eq!(rows.len(), dist.values().len());
        let csv = curve_csv(&rows);
        assert!(csv.starts_with("x,empirical_survival,bound_qpart,bound_schechtman\n"));
        assert_eq!(csv.lines().count(), rows.len() + 1);
        for row in &rows {
            assert!(row.empirical_survival <= 1.0);
            assert!(row.bound_qpart.is_finite() && row.bound_qpart > 0.0);
            assert!(row.bound_schechtman.is_finite() && row.bound_schechtman > 0.0);
        }
        assert_eq!(rows[0].empirical_survival, 1.0);
    }

    #[test]
    fn survival_matches_direct_count() {
        let v = gen_threshold(4, &rat(3, 2)).unwrap();
        let pi = ItemMarginals::uniform(4, 0.5).unwrap();
        let dist = parallel_mc(&v, &pi, 3, 4_096, 4).unwrap();
        let total: u64 = dist.counts().iter().sum();
        assert_eq!(total, 4_096);
        assert_eq!(dist.survival(&rat_int(0)), rat_int(1));
    }
}
