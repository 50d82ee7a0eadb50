// SPDX-License-Identifier: MIT OR Apache-2.0

//! Synthetic inputs with exactly `s` active features per row.

use std::io::Write;

use ndarray::Array2;
use rand::Rng;

use crate::config::ProblemConfig;
use crate::error::{Error, Result};
use crate::rng::{self, Domain};

/// `n` rows of `m` boolean inputs stored as sorted active-index lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleBatch {
    m: usize,
    s: usize,
    n: usize,
    active: Vec<usize>,
}

impl SampleBatch {
    /// Builds a batch from explicit active sets, which must all have the same size.
    pub fn from_active_sets(m: usize, rows: &[Vec<usize>]) -> Result<Self> {
        let s = rows.first().map_or(0, Vec::len);
        let mut active = Vec::with_capacity(rows.len() * s);
        for row in rows {
            if row.len() != s {
                return Err(Error::shape("active sets of different sizes in one batch"));
            }
            let mut sorted = row.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != s || sorted.last().is_some_and(|&k| k >= m) {
                return Err(Error::shape(format!("invalid active set {row:?} for m={m}")));
            }
            active.extend(sorted);
        }
        if rows.is_empty() {
            return Err(Error::shape("empty batch"));
        }
        Ok(Self {
            m,
            s,
            n: rows.len(),
            active,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn row(&self, n: usize) -> &[usize] {
        &self.active[n * self.s..(n + 1) * self.s]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[usize]> + '_ {
        (0..self.len()).map(move |n| self.row(n))
    }

    /// Row `n` as a dense 0/1 vector.
    pub fn dense_row(&self, n: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.m];
        for &k in self.row(n) {
            v[k] = 1.0;
        }
        v
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.len(), self.m));
        for (n, row) in self.rows().enumerate() {
            for &k in row {
                out[[n, k]] = 1.0;
            }
        }
        out
    }

    /// CSV dump, one sample per line listing its active indices separated by `;`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "sample,active")?;
        for (n, row) in self.rows().enumerate() {
            let joined: Vec<String> = row.iter().map(usize::to_string).collect();
            writeln!(out, "{n},{}", joined.join(";"))?;
        }
        Ok(())
    }
}

/// Draws a uniformly random `k`-subset of `pool` by partial Fisher-Yates.
///
/// `pool` is permuted in place; any prior permutation state is fine, so one
/// buffer can be reused across rows.
pub fn partial_shuffle<R: Rng + ?Sized>(pool: &mut [usize], k: usize, rng: &mut R) {
    let len = pool.len();
    for t in 0..k {
        let j = rng.gen_range(t..len);
        pool.swap(t, j);
    }
}

/// Active set with the distinguished pair fixed to `case` and `others`
/// additional features drawn uniformly from the remaining `m - 2`.
///
/// `pool` must hold exactly the indices other than the pair.
pub fn sample_conditioned<R: Rng + ?Sized>(
    pool: &mut [usize],
    pair: (usize, usize),
    case: (bool, bool),
    others: usize,
    rng: &mut R,
) -> Vec<usize> {
    partial_shuffle(pool, others, rng);
    let mut active = Vec::with_capacity(others + 2);
    active.extend_from_slice(&pool[..others]);
    if case.0 {
        active.push(pair.0);
    }
    if case.1 {
        active.push(pair.1);
    }
    active
}

/// Every index in `0..m` except the two members of `pair`.
pub fn pool_without(m: usize, pair: (usize, usize)) -> Vec<usize> {
    (0..m).filter(|&k| k != pair.0 && k != pair.1).collect()
}

/// Samples `n` rows with exactly `config.s` active features.
///
/// Reproducible from `(config.seed, batch_index)`; different batch indices
/// use independent ChaCha streams.
pub fn sample_batch(config: &ProblemConfig, batch_index: u64, n: usize) -> Result<SampleBatch> {
    sample_batch_in(config, Domain::TrainData, batch_index, n)
}

pub(crate) fn sample_batch_in(
    config: &ProblemConfig,
    domain: Domain,
    batch_index: u64,
    n: usize,
) -> Result<SampleBatch> {
    let (m, s) = (config.m, config.s);
    if s > m {
        return Err(Error::config(format!("s={s} exceeds m={m}")));
    }
    if n == 0 {
        return Err(Error::config("batch size must be at least 1"));
    }
    if s == 0 {
        // diagnostics only: all rows empty
        return Ok(SampleBatch {
            m,
            s,
            n,
            active: Vec::new(),
        });
    }
    let mut rng = rng::stream(config.seed, domain, batch_index);
    let mut pool: Vec<usize> = (0..m).collect();
    let mut active = Vec::with_capacity(n * s);
    for _ in 0..n {
        partial_shuffle(&mut pool, s, &mut rng);
        let start = active.len();
        active.extend_from_slice(&pool[..s]);
        active[start..].sort_unstable();
    }
    Ok(SampleBatch { m, s, n, active })
}
