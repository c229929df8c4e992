//! Row-partitioned Gram product with a deterministic reduction.
//!
//! `A` is split into contiguous row blocks. Workers compute the local Gram
//! matrix of each block into its own slot, the workers are joined once, and
//! the slots are combined by a fixed binary tree over block indices. The
//! result depends on the block layout only, never on the worker count.

use std::ops::Range;
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};
use crate::kernels::gram_rows;
use crate::matrix::Matrix;
use crate::precision::Real;

/// Contiguous row blocks covering `[0, m)`, sizes differing by at most one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionPlan {
    row_ranges: Vec<Range<usize>>,
}

impl PartitionPlan {
    /// Splits `m` rows into `blocks` balanced ranges (`1 ≤ blocks ≤ m`).
    pub fn new(m: usize, blocks: usize) -> Result<Self> {
        if blocks == 0 || blocks > m {
            return Err(Error::InvalidArgument(format!(
                "block count must lie in 1..={m}, got {blocks}"
            )));
        }
        let base = m / blocks;
        let extra = m % blocks;
        let mut row_ranges = Vec::with_capacity(blocks);
        let mut start = 0;
        for k in 0..blocks {
            let len = base + usize::from(k < extra);
            row_ranges.push(start..start + len);
            start += len;
        }
        Ok(PartitionPlan { row_ranges })
    }

    /// Plan with the default granularity for `workers` threads: `2·workers`
    /// rounded up to a power of two, capped at `m`.
    pub fn for_workers(m: usize, workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::InvalidArgument(
                "worker count must be positive".into(),
            ));
        }
        Self::new(m, (2 * workers).next_power_of_two().min(m))
    }

    pub fn blocks(&self) -> usize {
        self.row_ranges.len()
    }

    pub fn row_ranges(&self) -> &[Range<usize>] {
        &self.row_ranges
    }

    pub fn rows(&self) -> usize {
        self.row_ranges.last().map_or(0, |r| r.end)
    }
}

/// Instrumentation of one partitioned Gram execution.
#[derive(Debug, Default)]
pub struct GramCounters {
    syncs: AtomicUsize,
}

impl GramCounters {
    pub fn syncs(&self) -> usize {
        self.syncs.load(Ordering::Relaxed)
    }
}

/// `AᵀA` from `workers` threads over the blocks of `plan`.
pub fn partitioned_gram<T: Real>(
    a: &Matrix<T>,
    workers: usize,
    plan: &PartitionPlan,
) -> Result<Matrix<T>> {
    partitioned_gram_counted(a, workers, plan, &GramCounters::default())
}

/// [`partitioned_gram`] that also records synchronization events.
pub fn partitioned_gram_counted<T: Real>(
    a: &Matrix<T>,
    workers: usize,
    plan: &PartitionPlan,
    counters: &GramCounters,
) -> Result<Matrix<T>> {
    let m = a.rows();
    if workers == 0 || workers > m {
        return Err(Error::InvalidArgument(format!(
            "worker count must lie in 1..={m}, got {workers}"
        )));
    }
    if plan.rows() != m {
        return Err(Error::Shape(format!(
            "plan covers {} rows, matrix has {m}",
            plan.rows()
        )));
    }
    let blocks = plan.blocks();
    let mut slots: Vec<Option<Matrix<T>>> = vec![None; blocks];

    if workers == 1 {
        for (k, r) in plan.row_ranges().iter().enumerate() {
            slots[k] = Some(gram_rows(a, r.clone()));
        }
    } else {
        // worker w owns blocks w, w + workers, ...
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers.min(blocks))
                .map(|w| {
                    scope.spawn(move || {
                        plan.row_ranges()
                            .iter()
                            .enumerate()
                            .skip(w)
                            .step_by(workers)
                            .map(|(k, r)| (k, gram_rows(a, r.clone())))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                for (k, g) in h.join().expect("gram worker panicked") {
                    slots[k] = Some(g);
                }
            }
        });
    }
    // the join above is the single global synchronization point
    counters.syncs.fetch_add(1, Ordering::Relaxed);

    let mut level: Vec<Matrix<T>> = slots
        .into_iter()
        .map(|s| s.expect("every block computed"))
        .collect();
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        let mut it = level.into_iter();
        while let Some(mut left) = it.next() {
            if let Some(right) = it.next() {
                for (x, &y) in left.as_mut_slice().iter_mut().zip(right.as_slice()) {
                    *x = *x + y;
                }
            }
            next.push(left);
        }
        level = next;
    }
    Ok(level.pop().expect("at least one block"))
}

/// Number of global synchronization events a partitioned Gram product with
/// `workers` threads performs, measured by running one.
pub fn sync_count(workers: usize) -> Result<usize> {
    if workers == 0 {
        return Err(Error::InvalidArgument(
            "worker count must be positive".into(),
        ));
    }
    let a = Matrix::<f64>::from_fn(workers, 2, |i, j| (i + j) as f64);
    let plan = PartitionPlan::for_workers(workers, workers)?;
    let counters = GramCounters::default();
    partitioned_gram_counted(&a, workers, &plan, &counters)?;
    Ok(counters.syncs())
}
