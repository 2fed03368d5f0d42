//! Deterministic parallel enumeration of `A^F`.
//!
//! The index range is cut into fixed-size chunks that are reduced in order, so
//! results do not depend on the number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::potential::{decode_pattern, pattern_count, Letter};

/// Default cap on the number of patterns enumerated by one call.
pub const DEFAULT_BUDGET: u64 = 1 << 22;

const CHUNK: u64 = 1024;

/// Largest number of patterns a single enumeration may visit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget(pub u64);

impl Default for Budget {
    fn default() -> Self {
        Budget(DEFAULT_BUDGET)
    }
}

impl Budget {
    /// Number of patterns in `A^n`, or a budget error.
    pub fn check(&self, alphabet_len: usize, n: usize) -> Result<u64> {
        let required = pattern_count(alphabet_len, n);
        if required > self.0 as u128 {
            return Err(Error::Budget {
                required,
                budget: self.0,
            });
        }
        Ok(required as u64)
    }
}

/// Advances `idx` (digits into `alphabet`) to the next pattern in canonical
/// order, writing the letters into `out`.
fn advance(idx: &mut [usize], alphabet: &[Letter], out: &mut [Letter]) {
    for i in (0..idx.len()).rev() {
        idx[i] += 1;
        if idx[i] < alphabet.len() {
            out[i] = alphabet[idx[i]];
            return;
        }
        idx[i] = 0;
        out[i] = alphabet[0];
    }
}

fn chunk_start(start: u64, alphabet: &[Letter], n: usize) -> (Vec<usize>, Vec<Letter>) {
    let mut letters = vec![0; n];
    decode_pattern(start, alphabet, &mut letters);
    let idx = letters
        .iter()
        .map(|a| alphabet.binary_search(a).expect("letter from alphabet"))
        .collect();
    (idx, letters)
}

/// Maps every pattern of `alphabet^n` in canonical order.
pub fn map_patterns<T, F>(alphabet: &[Letter], n: usize, budget: Budget, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&[Letter]) -> Result<T> + Sync,
{
    debug_assert!(alphabet.windows(2).all(|w| w[0] < w[1]));
    let total = budget.check(alphabet.len(), n)?;
    let chunks = total.div_ceil(CHUNK);
    let parts: Vec<Result<Vec<T>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(total);
            let (mut idx, mut letters) = chunk_start(start, alphabet, n);
            let mut out = Vec::with_capacity((end - start) as usize);
            for i in start..end {
                if i > start {
                    advance(&mut idx, alphabet, &mut letters);
                }
                out.push(f(&letters)?);
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::with_capacity(total as usize);
    for p in parts {
        all.extend(p?);
    }
    Ok(all)
}

/// Sums `f` over every pattern of `alphabet^n`, reducing chunk sums in order.
pub fn sum_patterns<F>(alphabet: &[Letter], n: usize, budget: Budget, f: F) -> Result<Interval>
where
    F: Fn(&[Letter]) -> Result<Interval> + Sync,
{
    let total = budget.check(alphabet.len(), n)?;
    let chunks = total.div_ceil(CHUNK);
    let parts: Vec<Result<Interval>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(total);
            let (mut idx, mut letters) = chunk_start(start, alphabet, n);
            let mut acc = Interval::ZERO;
            for i in start..end {
                if i > start {
                    advance(&mut idx, alphabet, &mut letters);
                }
                acc = acc + f(&letters)?;
            }
            Ok(acc)
        })
        .collect();
    let mut acc = Interval::ZERO;
    for p in parts {
        acc = acc + p?;
    }
    Ok(acc)
}
