//! Lower-bound search for the SQGT capacity.
//!
//! Every contiguous partition of `0..=m(q-1)` into `Q` regions is evaluated on
//! a simplex grid over `P_T`; the best grid point of each partition is then
//! polished by pairwise coordinate ascent with a halving step. Any point found
//! is a valid lower bound on the capacity.

use itertools::Itertools;
use rayon::prelude::*;

use super::{alpha, alpha_value, sum_pmfs, CapacityPoint, SourceDistribution};
use crate::error::{Result, SqgtError};
use crate::model::Quantizer;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOptions {
    /// Simplex grid resolution over `P_T`, in `(0, 1)`.
    pub grid_step: f64,
    /// Polish each partition's best grid point by coordinate ascent.
    pub refine: bool,
    /// Smallest step of the coordinate ascent.
    pub min_step: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            grid_step: 0.01,
            refine: true,
            min_step: 1e-4,
        }
    }
}

/// Best `α(m, P_T, η)` over quantizers with `levels` regions (or only over
/// `P_T` when `restrict` fixes the quantizer).
///
/// Ties are broken toward the earlier partition in lexicographic threshold
/// order, then toward the earlier grid point; parallel evaluation does not
/// change the result.
pub fn capacity_search(
    m: usize,
    q: u32,
    levels: u32,
    options: &SearchOptions,
    restrict: Option<&Quantizer>,
) -> Result<CapacityPoint> {
    if m == 0 {
        return Err(SqgtError::InvalidParameter("m must be at least 1".into()));
    }
    if q < 2 {
        return Err(SqgtError::InvalidParameter(format!(
            "q must be at least 2, got {q}"
        )));
    }
    if !(options.grid_step > 0.0 && options.grid_step < 1.0) {
        return Err(SqgtError::InvalidParameter(format!(
            "grid step {} must lie in (0, 1)",
            options.grid_step
        )));
    }
    let max_sum = m as u64 * (q as u64 - 1);
    let quantizers: Vec<Quantizer> = match restrict {
        Some(quant) => {
            if quant.levels() != levels {
                return Err(SqgtError::InvalidQuantizer(format!(
                    "fixed quantizer has {} levels, search asked for Q = {levels}",
                    quant.levels()
                )));
            }
            vec![quant.clone()]
        }
        None => {
            if levels < 2 || levels as u64 > max_sum + 1 {
                return Err(SqgtError::Infeasible(format!(
                    "Q = {levels} regions cannot partition the {} sums of m = {m}, q = {q}",
                    max_sum + 1
                )));
            }
            (1..=max_sum)
                .combinations(levels as usize - 1)
                .map(Quantizer::new)
                .collect::<Result<_>>()?
        }
    };

    let resolution = (1.0 / options.grid_step).round().max(1.0) as usize;
    let grid = simplex_grid(q as usize, resolution);

    // (value, grid index) of the best grid point for every quantizer
    let best_per_quantizer = grid
        .par_iter()
        .enumerate()
        .fold(
            || vec![(f64::NEG_INFINITY, usize::MAX); quantizers.len()],
            |mut acc, (g, probs)| {
                let powers = sum_pmfs(probs, m);
                for (slot, quant) in acc.iter_mut().zip(&quantizers) {
                    let v = alpha_value(&powers, m, quant);
                    if better(v, g, *slot) {
                        *slot = (v, g);
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![(f64::NEG_INFINITY, usize::MAX); quantizers.len()],
            |a, b| {
                a.into_iter()
                    .zip(b)
                    .map(|(x, y)| if better(y.0, y.1, x) { y } else { x })
                    .collect()
            },
        );

    let candidates: Vec<(f64, Vec<f64>)> = quantizers
        .par_iter()
        .zip(best_per_quantizer.par_iter())
        .map(|(quant, &(value, g))| {
            let start = grid[g].clone();
            if options.refine {
                coordinate_ascent(start, value, m, quant, options)
            } else {
                (value, start)
            }
        })
        .collect();

    let (winner, (_, probs)) = candidates
        .iter()
        .enumerate()
        .fold(
            None::<(usize, &(f64, Vec<f64>))>,
            |best, (k, cand)| match best {
                Some((_, b)) if b.0 >= cand.0 => best,
                _ => Some((k, cand)),
            },
        )
        .expect("at least one quantizer");
    let source = SourceDistribution::normalized(probs.clone())?;
    alpha(&source, m, &quantizers[winner])
}

fn better(value: f64, index: usize, current: (f64, usize)) -> bool {
    value > current.0 || (value == current.0 && index < current.1)
}

/// All `P_T` with entries `k_i / resolution`, in lexicographic order of `k`.
fn simplex_grid(q: usize, resolution: usize) -> Vec<Vec<f64>> {
    fn fill(prefix: &mut Vec<usize>, left: usize, q: usize, res: usize, out: &mut Vec<Vec<f64>>) {
        if prefix.len() == q - 1 {
            prefix.push(left);
            out.push(prefix.iter().map(|&k| k as f64 / res as f64).collect());
            prefix.pop();
            return;
        }
        for k in 0..=left {
            prefix.push(k);
            fill(prefix, left - k, q, res, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    fill(
        &mut Vec::with_capacity(q),
        resolution,
        q,
        resolution,
        &mut out,
    );
    out
}

/// Moves probability mass between pairs of symbols while it improves `α`,
/// halving the move size down to `min_step`.
fn coordinate_ascent(
    mut probs: Vec<f64>,
    mut value: f64,
    m: usize,
    quant: &Quantizer,
    options: &SearchOptions,
) -> (f64, Vec<f64>) {
    const MAX_SWEEPS: usize = 10_000;
    let q = probs.len();
    let mut step = options.grid_step;
    while step >= options.min_step {
        for _ in 0..MAX_SWEEPS {
            let mut improved = false;
            for from in 0..q {
                for to in 0..q {
                    let delta = step.min(probs[from]);
                    if from == to || delta <= 0.0 {
                        continue;
                    }
                    let mut trial = probs.clone();
                    trial[from] -= delta;
                    trial[to] += delta;
                    let v = alpha_value(&sum_pmfs(&trial, m), m, quant);
                    if v > value + 1e-15 {
                        probs = trial;
                        value = v;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        step /= 2.0;
    }
    (value, probs)
}
