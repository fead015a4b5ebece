use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;

use rayon::prelude::*;
use rayon::ThreadPool;

use crate::numeric::quantile;
use crate::{Error, Result};

/// CSV file flushed after every row, so an interrupted run keeps what it wrote.
pub(crate) struct CsvSink {
    inner: csv::Writer<File>,
}

impl CsvSink {
    pub(crate) fn create(path: &Path, header: &[&str]) -> Result<Self> {
        let mut inner = csv::Writer::from_path(path)?;
        inner.write_record(header)?;
        inner.flush()?;
        Ok(Self { inner })
    }

    pub(crate) fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.inner.write_record(fields)?;
        self.inner.flush()?;
        Ok(())
    }
}

/// Shortest round-trip decimal form.
pub(crate) fn num(x: f64) -> String {
    format!("{x:?}")
}

pub(crate) fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub(crate) fn pool(workers: usize) -> Result<ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))
}

/// Evaluates `work` on every task in `pool` and feeds the results to `sink`
/// strictly in task order, whatever order the workers finish in. After the
/// first error no new tasks start and that error is returned.
pub(crate) fn run_ordered<T, R, W, S>(pool: &ThreadPool, tasks: &[T], work: W, mut sink: S) -> Result<()>
where
    T: Sync,
    R: Send,
    W: Fn(&T) -> Result<R> + Sync,
    S: FnMut(usize, R) -> Result<()>,
{
    let stop = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<(usize, Result<R>)>();
    std::thread::scope(|scope| {
        let stop = &stop;
        let work = &work;
        scope.spawn(move || {
            pool.install(|| {
                tasks.par_iter().enumerate().for_each_with(tx, |tx, (i, task)| {
                    if stop.load(Ordering::Relaxed) {
                        return;
                    }
                    let out = work(task);
                    if out.is_err() {
                        stop.store(true, Ordering::Relaxed);
                    }
                    let _ = tx.send((i, out));
                });
            });
        });
        let mut pending: BTreeMap<usize, Result<R>> = BTreeMap::new();
        let mut next = 0;
        let mut failure: Option<Error> = None;
        for (i, out) in rx {
            pending.insert(i, out);
            while let Some(out) = pending.remove(&next) {
                if failure.is_none() {
                    if let Err(e) = out.and_then(|r| sink(next, r)) {
                        stop.store(true, Ordering::Relaxed);
                        failure = Some(e);
                    }
                }
                next += 1;
            }
        }
        match failure {
            Some(e) => Err(e),
            None if next < tasks.len() => Err(Error::Config("run stopped before all tasks finished".into())),
            None => Ok(()),
        }
    })
}

/// Count, median and quartiles of the finite entries.
pub(crate) fn summarize(values: &[f64]) -> (usize, Option<[f64; 3]>) {
    let v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return (0, None);
    }
    (
        v.len(),
        Some([quantile(&v, 0.25), quantile(&v, 0.5), quantile(&v, 0.75)]),
    )
}
