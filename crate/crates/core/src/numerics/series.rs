//! Convergence acceleration for infinite sums.

use crate::error::{Error, Result};

/// Wynn epsilon extrapolation of a sequence of partial sums.
#[derive(Debug, Default, Clone)]
pub struct WynnEpsilon {
    sums: Vec<f64>,
}

const WYNN_WINDOW: usize = 40;

impl WynnEpsilon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add the next partial sum and return the current extrapolated limit.
    pub fn push(&mut self, partial: f64) -> f64 {
        self.sums.push(partial);
        let start = self.sums.len().saturating_sub(WYNN_WINDOW);
        let window = &self.sums[start..];
        let mut best = partial;
        let mut prev = vec![0.0; window.len() + 1];
        let mut cur = window.to_vec();
        let mut k = 0;
        while cur.len() > 1 {
            k += 1;
            let mut next = Vec::with_capacity(cur.len() - 1);
            for i in 0..cur.len() - 1 {
                let diff = cur[i + 1] - cur[i];
                if diff == 0.0 || !diff.is_finite() {
                    return if k % 2 == 1 { cur[i + 1] } else { best };
                }
                next.push(prev[i + 1] + 1.0 / diff);
            }
            if k % 2 == 0 {
                let candidate = *next.last().expect("non-empty column");
                if candidate.is_finite() {
                    best = candidate;
                }
            }
            prev = cur;
            cur = next;
        }
        best
    }
}

/// Sum `term(n)` over all integers `n` by symmetric partial sums
/// `S_N = Σ_{|n| ≤ N}` with `N` doubling, Richardson-extrapolated assuming
/// a tail `c₁/N^p + c₂/N^(p+1) + ...` with `p = tail_order`.
pub fn sum_matsubara<F>(term: F, tail_order: u32, tol: f64) -> Result<f64>
where
    F: Fn(i64) -> f64,
{
    sum_matsubara_from(term, tail_order, tol, 8)
}

/// As [`sum_matsubara`], starting the doubling at `min_terms`.
pub fn sum_matsubara_from<F>(term: F, tail_order: u32, tol: f64, min_terms: i64) -> Result<f64>
where
    F: Fn(i64) -> f64,
{
    if !(tol > 0.0) || tail_order == 0 {
        return Err(Error::validation("sum_matsubara", "need tol > 0 and tail_order >= 1"));
    }
    const MAX_LEVELS: usize = 22;
    let mut n_hi = min_terms.max(1);
    let mut partial = term(0);
    let mut block_abs = 0.0;
    for n in 1..=n_hi {
        let (a, b) = (term(n), term(-n));
        partial += a + b;
        block_abs += a.abs() + b.abs();
    }
    let mut table: Vec<Vec<f64>> = vec![vec![partial]];
    let mut prev_block = block_abs;
    let mut last_estimate = partial;
    let mut growth_streak = 0;
    for level in 1..MAX_LEVELS {
        let mut block = 0.0;
        let mut block_abs = 0.0;
        for n in n_hi + 1..=2 * n_hi {
            let (a, b) = (term(n), term(-n));
            block += a + b;
            block_abs += a.abs() + b.abs();
        }
        n_hi *= 2;
        partial += block;
        if !partial.is_finite() {
            return Err(Error::Numerical("Matsubara sum produced a non-finite partial sum".into()));
        }
        // a shallow table: deep Richardson columns only amplify rounding and
        // the pre-asymptotic rows
        let depth = level.min(4);
        let mut row = vec![partial];
        for j in 1..=depth {
            let factor = 2f64.powi((tail_order as usize + j - 1) as i32);
            let prev = &table[level - 1][j - 1];
            row.push(row[j - 1] + (row[j - 1] - prev) / (factor - 1.0));
        }
        let estimate = row[depth];
        table.push(row);
        if block_abs == 0.0 && prev_block == 0.0 {
            return Ok(partial);
        }
        if (estimate - last_estimate).abs() < tol.max(16.0 * f64::EPSILON * estimate.abs()) && level >= 2 {
            return Ok(estimate);
        }
        if level >= 4 && block_abs >= prev_block {
            growth_streak += 1;
            if growth_streak >= 2 {
                return Err(Error::Convergence {
                    what: "Matsubara sum (terms are not decreasing)".into(),
                    estimate,
                    error: (estimate - last_estimate).abs(),
                });
            }
        } else {
            growth_streak = 0;
        }
        prev_block = block_abs;
        last_estimate = estimate;
    }
    Err(Error::Convergence {
        what: "Matsubara sum".into(),
        estimate: last_estimate,
        error: f64::NAN,
    })
}
