//! Random q-ary designs: acceptable-row counting, the critical rate below
//! which a uniformly random code is SQ-disjunct with high probability, and a
//! seeded Monte Carlo check of that claim.
//!
//! A row `x ∈ [q]^{u+1}` certifies its first column when
//! `floor(x_1/η) > floor((x_2 + … + x_{u+1})/η)`; the remaining rows are
//! *acceptable*. With `I = floor((q-1)/η)`, a first entry in the block
//! `[iη, (i+1)η)` is certified by every tail sum `<= iη - 1`, and those tails
//! never hit the per-entry cap `q - 1`, so
//!
//! ```text
//! A = q^{u+1} - η·Σ_{i=1}^{I-1} C(iη+u-1, u) - (q - Iη)·C(Iη+u-1, u).
//! ```
//!
//! The union bound over the `C(N, u+1)` column sets then gives
//! `R_critical = log2(γ)/(u+1) + log2(ε·u!)/(n(u+1))` with `γ = q^{u+1}/A`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::disjunct::{is_sq_disjunct, Witness};
use crate::error::{Result, SqgtError};
use crate::model::{minimal_levels, CodeMatrix, DesignParams, Quantizer};

/// Default cap on `N·C(N-1, u)` for a single disjunctness check.
pub const DEFAULT_WORK_CAP: u128 = 2_000_000_000;

fn binomial(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 1..=k {
        // acc * (n - k + j) is divisible by j
        acc = acc.checked_mul(n - k + j)? / j;
    }
    Some(acc)
}

/// Number of rows of `[q]^{u+1}` that do not certify their first column.
pub fn acceptable_row_count(q: u32, eta: u64, u: usize) -> Result<u128> {
    if q < 2 || eta == 0 || u == 0 {
        return Err(SqgtError::InvalidParameter(format!(
            "need q >= 2, eta >= 1, u >= 1 (got q={q}, eta={eta}, u={u})"
        )));
    }
    let (q, eta, u) = (q as u128, eta as u128, u as u128);
    let overflow = || SqgtError::Overflow("acceptable row count");
    let total = q.checked_pow(u as u32 + 1).ok_or_else(overflow)?;
    let blocks = (q - 1) / eta;
    let mut certifying: u128 = 0;
    for i in 1..blocks {
        let c = binomial(i * eta + u - 1, u).ok_or_else(overflow)?;
        certifying = certifying
            .checked_add(eta.checked_mul(c).ok_or_else(overflow)?)
            .ok_or_else(overflow)?;
    }
    if blocks >= 1 {
        let c = binomial(blocks * eta + u - 1, u).ok_or_else(overflow)?;
        certifying = certifying
            .checked_add((q - blocks * eta).checked_mul(c).ok_or_else(overflow)?)
            .ok_or_else(overflow)?;
    }
    Ok(total - certifying)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalRateReport {
    /// Acceptable rows `A`.
    pub acceptable_rows: u128,
    /// `γ = q^{u+1} / A`.
    pub gamma: f64,
    /// Critical rate at the given `n` and `ε`, bits per test.
    pub critical_rate: f64,
    /// `log2(γ)/(u+1)`, the `n → ∞` limit.
    pub asymptotic_rate: f64,
    pub n: usize,
    pub epsilon: f64,
}

/// Critical rate for length-`n` random codes to be SQ-disjunct with
/// probability at least `1 - ε`.
pub fn critical_rate(
    q: u32,
    eta: u64,
    u: usize,
    n: usize,
    epsilon: f64,
) -> Result<CriticalRateReport> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(SqgtError::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if n == 0 {
        return Err(SqgtError::InvalidParameter("n must be at least 1".into()));
    }
    let a = acceptable_row_count(q, eta, u)?;
    let rows = (u + 1) as f64;
    let log_total = rows * (q as f64).log2();
    let log_gamma = log_total - (a as f64).log2();
    let log_u_factorial: f64 = (2..=u).map(|k| (k as f64).log2()).sum();
    let asymptotic_rate = log_gamma / rows;
    Ok(CriticalRateReport {
        acceptable_rows: a,
        gamma: log_gamma.exp2(),
        critical_rate: asymptotic_rate + (epsilon.log2() + log_u_factorial) / (n as f64 * rows),
        asymptotic_rate,
        n,
        epsilon,
    })
}

/// `n × N` code with i.i.d. uniform entries from `[q]`; equal seeds give
/// equal matrices.
pub fn random_code(n: usize, subjects: usize, q: u32, seed: u64) -> Result<CodeMatrix> {
    random_code_from(&mut ChaCha8Rng::seed_from_u64(seed), n, subjects, q)
}

fn random_code_from(rng: &mut ChaCha8Rng, n: usize, subjects: usize, q: u32) -> Result<CodeMatrix> {
    if n == 0 || subjects == 0 {
        return Err(SqgtError::InvalidParameter(
            "n and N must be positive".into(),
        ));
    }
    if q < 2 {
        return Err(SqgtError::InvalidParameter(format!(
            "q must be at least 2, got {q}"
        )));
    }
    let data = (0..n * subjects).map(|_| rng.gen_range(0..q)).collect();
    CodeMatrix::from_column_major(q, n, subjects, data)
}

/// Generator for trial `trial` of a run seeded with `seed`.
fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialOutcome {
    pub trial: usize,
    pub disjunct: bool,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloReport {
    pub trials: Vec<TrialOutcome>,
    /// Fraction of trials whose random code was SQ-disjunct.
    pub fraction: f64,
}

/// Parameters of a Monte Carlo disjunctness experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloConfig {
    pub n: usize,
    pub subjects: usize,
    pub q: u32,
    pub eta: u64,
    pub u: usize,
    pub trials: usize,
    pub seed: u64,
    /// Cap on `N·C(N-1, u)` per trial.
    pub work_cap: u128,
}

/// Draws `trials` random codes and checks each for the SQ-disjunct property
/// under the equidistant quantizer with step `η` and the smallest
/// unsaturated `Q`.
pub fn estimate_disjunct_probability(config: &MonteCarloConfig) -> Result<MonteCarloReport> {
    let MonteCarloConfig {
        n,
        subjects,
        q,
        eta,
        u,
        trials,
        seed,
        work_cap,
    } = *config;
    if trials == 0 {
        return Err(SqgtError::InvalidParameter(
            "at least one trial is required".into(),
        ));
    }
    if u == 0 {
        return Err(SqgtError::InvalidParameter("u must be at least 1".into()));
    }
    let others = subjects.saturating_sub(1);
    let work = (subjects as u128)
        .saturating_mul(binomial(others as u128, u.min(others) as u128).unwrap_or(u128::MAX));
    if work > work_cap {
        return Err(SqgtError::WorkLimit {
            work,
            cap: work_cap,
        });
    }
    // a step above q - 1 leaves nothing to resolve; keep two levels so every
    // syndrome is zero and the check reports the failure
    let levels = minimal_levels(q, eta, u).unwrap_or(2);
    let quantizer = Quantizer::equidistant(eta, levels)?;
    let params = DesignParams::new(q, levels, u)?;

    let outcomes = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let code = random_code_from(&mut trial_rng(seed, trial), n, subjects, q)?;
            let report = is_sq_disjunct(&code, &params, &quantizer)?;
            Ok(TrialOutcome {
                trial,
                disjunct: report.is_disjunct,
                witness: report.witness,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = outcomes.iter().filter(|o| o.disjunct).count();
    Ok(MonteCarloReport {
        fraction: passed as f64 / trials as f64,
        trials: outcomes,
    })
}
