//! Parallel generation of run outcomes, consumed strictly in run-index order.
//!
//! Item `k` is always produced from its own random substream, so results do
//! not depend on the number of worker threads.

use std::collections::VecDeque;
use std::sync::Arc;

use rayon::prelude::*;
use rayon::ThreadPool;

use crate::engine::{random_run_with, Diagnostics, RunOptions};
use crate::error::{Error, Result};
use crate::model::NetworkModel;
use crate::monitor::{check, Outcome};
use crate::rng::substream;
use crate::text::PwctlQuery;

const FIRST_BATCH: usize = 64;
const MAX_BATCH: usize = 4096;

/// Worker pool; `None` uses rayon's global pool.
#[derive(Clone, Default)]
pub struct Jobs(Option<Arc<ThreadPool>>);

impl Jobs {
    pub fn new(threads: Option<usize>) -> Result<Jobs> {
        match threads {
            None => Ok(Jobs(None)),
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map(|p| Jobs(Some(Arc::new(p))))
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}"))),
        }
    }

    fn run<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        match &self.0 {
            Some(p) => p.install(f),
            None => f(),
        }
    }
}

/// Iterator over `f(0), f(1), ...`, evaluated in growing parallel batches.
pub struct Batched<T, F> {
    f: F,
    next: u64,
    buf: VecDeque<T>,
    batch: usize,
    jobs: Jobs,
}

impl<T: Send, F: Fn(u64) -> T + Sync> Batched<T, F> {
    pub fn new(f: F, jobs: Jobs) -> Self {
        Batched { f, next: 0, buf: VecDeque::new(), batch: FIRST_BATCH, jobs }
    }
}

impl<T: Send, F: Fn(u64) -> T + Sync> Iterator for Batched<T, F> {
    type Item = T;

    fn next(&mut self) -> Option<T> {
        if self.buf.is_empty() {
            let (start, n, f) = (self.next, self.batch as u64, &self.f);
            let items: Vec<T> = self.jobs.run(|| (start..start + n).into_par_iter().map(f).collect());
            self.buf.extend(items);
            self.next += n;
            self.batch = (self.batch * 2).min(MAX_BATCH);
        }
        self.buf.pop_front()
    }
}

/// Outcome of `query` on one fresh run drawn from stream `(seed, index)`.
pub fn run_outcome(
    model: &NetworkModel,
    query: &PwctlQuery,
    seed: u64,
    index: u64,
    opts: RunOptions,
) -> Result<(Outcome, Diagnostics)> {
    let mut diag = Diagnostics::default();
    let mut rng = substream(seed, index);
    let run = random_run_with(model, query.observer, query.bound, &mut rng, opts, &mut diag, |_, _| {})?;
    Ok((check(model, &run, query)?, diag))
}

/// Ordered stream of outcomes of one query, accumulating diagnostics of the
/// runs actually consumed.
pub struct OutcomeSource<I> {
    inner: I,
    pub diagnostics: Diagnostics,
}

impl<I: Iterator<Item = Result<(Outcome, Diagnostics)>>> Iterator for OutcomeSource<I> {
    type Item = Result<Outcome>;

    fn next(&mut self) -> Option<Result<Outcome>> {
        Some(self.inner.next()?.map(|(o, d)| {
            self.diagnostics.merge(&d);
            o
        }))
    }
}

/// Run `k` uses substream `(seed, k)`.
pub fn outcomes<'a>(
    model: &'a NetworkModel,
    query: &'a PwctlQuery,
    seed: u64,
    jobs: Jobs,
    opts: RunOptions,
) -> OutcomeSource<impl Iterator<Item = Result<(Outcome, Diagnostics)>> + 'a> {
    OutcomeSource {
        inner: Batched::new(move |k| run_outcome(model, query, seed, k, opts), jobs),
        diagnostics: Diagnostics::default(),
    }
}

/// Pair `k` runs process 1 on substream `2k` and process 2 on `2k + 1`.
pub fn outcome_pairs<'a>(
    p1: (&'a NetworkModel, &'a PwctlQuery),
    p2: (&'a NetworkModel, &'a PwctlQuery),
    seed: u64,
    jobs: Jobs,
    opts: RunOptions,
) -> impl Iterator<Item = Result<(Outcome, Outcome)>> + 'a {
    Batched::new(
        move |k| {
            let (a, _) = run_outcome(p1.0, p1.1, seed, 2 * k, opts)?;
            let (b, _) = run_outcome(p2.0, p2.1, seed, 2 * k + 1, opts)?;
            Ok((a, b))
        },
        jobs,
    )
}

/// Satisfaction flags of an outcome stream.
pub fn satisfied<I: Iterator<Item = Result<Outcome>>>(it: I) -> impl Iterator<Item = Result<bool>> {
    it.map(|r| r.map(|o| o.satisfied))
}

pub fn satisfied_pairs<I: Iterator<Item = Result<(Outcome, Outcome)>>>(
    it: I,
) -> impl Iterator<Item = Result<(bool, bool)>> {
    it.map(|r| r.map(|(a, b)| (a.satisfied, b.satisfied)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{gen_abt, AbtVariant, ABT_TIME_QUERY};
    use crate::model::validate;
    use crate::text::parse_query;

    #[test]
    fn order_is_preserved() {
        let v: Vec<u64> = Batched::new(|k| k * k, Jobs::new(Some(3)).unwrap()).take(300).collect();
        assert_eq!(v, (0..300u64).map(|k| k * k).collect::<Vec<_>>());
    }

    #[test]
    fn thread_count_does_not_matter() {
        let m = validate(&gen_abt(AbtVariant::AbrT)).unwrap();
        let q = parse_query(ABT_TIME_QUERY, &m).unwrap();
        let take = |jobs| -> Vec<Outcome> {
            outcomes(&m, &q, 5, Jobs::new(Some(jobs)).unwrap(), RunOptions::default())
                .take(1000)
                .map(|r| r.unwrap())
                .collect()
        };
        assert_eq!(take(1), take(4));
    }

    #[test]
    fn out_of_order_generation_matches() {
        let m = validate(&gen_abt(AbtVariant::Abt)).unwrap();
        let q = parse_query(ABT_TIME_QUERY, &m).unwrap();
        let forward: Vec<Outcome> =
            (0..200).map(|k| run_outcome(&m, &q, 9, k, RunOptions::default()).unwrap().0).collect();
        let mut backward: Vec<Outcome> =
            (0..200).rev().map(|k| run_outcome(&m, &q, 9, k, RunOptions::default()).unwrap().0).collect();
        backward.reverse();
        assert_eq!(forward, backward);
    }
}
