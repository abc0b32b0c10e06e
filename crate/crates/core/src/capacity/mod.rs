//! Information-theoretic quantities of the SQGT channel, in bits.
//!
//! Sample amounts are drawn i.i.d. from `P_T` over `[q]`. Splitting the `m`
//! positives into a group of `i` and a group of `m - i`, the outcome depends
//! on the second group only through its pooled sum `W2`, and is a
//! deterministic function of all samples, so
//!
//! ```text
//! I_i = I(t_1; t_2, y) = H(y | t_2) = Σ_{w2} P(W2 = w2) · H(Q(W1' + w2))
//! ```
//!
//! where `W1'` is the pooled sum of the first group. For `i = m` this is `H(y)`.
//! The design figure of merit is `α = min_i I_i / i`.

mod search;

pub use search::{capacity_search, SearchOptions};

use crate::error::{Result, SqgtError};
use crate::model::Quantizer;

/// Mutual informations below this count as zero when converted to a test count.
const INFO_FLOOR: f64 = 1e-12;

/// Sample-amount distribution `P_T` over `[q]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceDistribution {
    probs: Vec<f64>,
}

impl SourceDistribution {
    /// Accepts non-negative probabilities summing to 1 within `1e-12`.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(SqgtError::InvalidParameter(
                "a source distribution needs q >= 2 entries".into(),
            ));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(SqgtError::InvalidParameter(format!(
                "probabilities must be finite and non-negative: {probs:?}"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(SqgtError::InvalidParameter(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { probs })
    }

    /// Rescales non-negative weights to a distribution.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !total.is_finite() || total <= 0.0 {
            return Err(SqgtError::InvalidParameter(
                "weights must have positive finite sum".into(),
            ));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    /// `P(T = 1) = p`, `P(T = 0) = 1 - p`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(SqgtError::InvalidParameter(format!(
                "p = {p} is not a probability"
            )));
        }
        Self::new(vec![1.0 - p, p])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Alphabet size `q`.
    pub fn q(&self) -> u32 {
        self.probs.len() as u32
    }
}

/// PMF of the sum of `count` i.i.d. samples, over `0..=count·(q-1)`.
pub fn pmf_sum(source: &SourceDistribution, count: usize) -> Vec<f64> {
    let mut pmf = vec![1.0];
    for _ in 0..count {
        pmf = convolve(&pmf, source.probs());
    }
    pmf
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Shannon entropy in bits; zero-mass entries contribute nothing.
pub fn entropy(pmf: &[f64]) -> f64 {
    pmf.iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Distribution of the outcome when `m` positives are pooled.
pub fn outcome_pmf(source: &SourceDistribution, m: usize, quantizer: &Quantizer) -> Vec<f64> {
    quantize_pmf(&pmf_sum(source, m), 0, quantizer)
}

/// Pushes the PMF of `W + shift` through the quantizer.
fn quantize_pmf(pmf: &[f64], shift: u64, quantizer: &Quantizer) -> Vec<f64> {
    let mut out = vec![0.0; quantizer.levels() as usize];
    for (w, &p) in pmf.iter().enumerate() {
        out[quantizer.quantize(w as u64 + shift) as usize] += p;
    }
    out
}

/// `I(t_1; t_2, y)` for a split of `m` positives into `i` and `m - i`.
pub fn mutual_info_i(
    source: &SourceDistribution,
    m: usize,
    i: usize,
    quantizer: &Quantizer,
) -> Result<f64> {
    if i == 0 || i > m {
        return Err(SqgtError::InvalidParameter(format!(
            "split size i = {i} must lie in 1..={m}"
        )));
    }
    let powers = sum_pmfs(source.probs(), m);
    Ok(conditional_entropy(&powers, m, i, quantizer))
}

/// PMFs of the sum of `0, 1, …, m` samples.
pub(crate) fn sum_pmfs(probs: &[f64], m: usize) -> Vec<Vec<f64>> {
    let mut powers = Vec::with_capacity(m + 1);
    powers.push(vec![1.0]);
    for c in 0..m {
        let next = convolve(&powers[c], probs);
        powers.push(next);
    }
    powers
}

fn conditional_entropy(powers: &[Vec<f64>], m: usize, i: usize, quantizer: &Quantizer) -> f64 {
    let own = &powers[i];
    powers[m - i]
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(w2, &p)| p * entropy(&quantize_pmf(own, w2 as u64, quantizer)))
        .sum()
}

/// `α(m, P_T, η)` with the per-split informations that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityPoint {
    pub m: usize,
    pub source: SourceDistribution,
    pub quantizer: Quantizer,
    /// `min_i I_i / i`, bits.
    pub alpha: f64,
    /// `I_1, …, I_m`, bits (index 0 holds `I_1`).
    pub per_i: Vec<f64>,
}

impl CapacityPoint {
    /// The quantizer rendered as a partition of `0..=m(q-1)`.
    pub fn partition(&self) -> String {
        self.quantizer
            .partition_string(self.m as u64 * (self.source.q() as u64 - 1))
    }
}

/// Evaluates every `I_i` and the resulting `α`.
pub fn alpha(
    source: &SourceDistribution,
    m: usize,
    quantizer: &Quantizer,
) -> Result<CapacityPoint> {
    if m == 0 {
        return Err(SqgtError::InvalidParameter("m must be at least 1".into()));
    }
    let powers = sum_pmfs(source.probs(), m);
    Ok(alpha_from_powers(&powers, source, m, quantizer))
}

pub(crate) fn alpha_value(powers: &[Vec<f64>], m: usize, quantizer: &Quantizer) -> f64 {
    (1..=m)
        .map(|i| conditional_entropy(powers, m, i, quantizer) / i as f64)
        .fold(f64::INFINITY, f64::min)
}

fn alpha_from_powers(
    powers: &[Vec<f64>],
    source: &SourceDistribution,
    m: usize,
    quantizer: &Quantizer,
) -> CapacityPoint {
    let per_i: Vec<f64> = (1..=m)
        .map(|i| conditional_entropy(powers, m, i, quantizer))
        .collect();
    let alpha = per_i
        .iter()
        .enumerate()
        .map(|(k, &v)| v / (k + 1) as f64)
        .fold(f64::INFINITY, f64::min);
    CapacityPoint {
        m,
        source: source.clone(),
        quantizer: quantizer.clone(),
        alpha,
        per_i,
    }
}

/// `log2 C(n, k)`, or `-∞` when `k > n`.
pub fn log2_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (1..=k)
        .map(|j| ((n - k + j) as f64 / j as f64).log2())
        .sum()
}

fn bound_over_splits(
    subjects: u64,
    source: &SourceDistribution,
    m: usize,
    quantizer: &Quantizer,
    log_count: impl Fn(u64, u64, u64) -> f64,
) -> Result<f64> {
    if m == 0 || subjects < m as u64 {
        return Err(SqgtError::InvalidParameter(format!(
            "need 1 <= m <= N, got m = {m}, N = {subjects}"
        )));
    }
    let point = alpha(source, m, quantizer)?;
    let mut worst = f64::NEG_INFINITY;
    for (k, &info) in point.per_i.iter().enumerate() {
        let i = k as u64 + 1;
        let numerator = log_count(subjects, m as u64, i);
        if numerator == f64::NEG_INFINITY || numerator <= 0.0 {
            worst = worst.max(0.0);
            continue;
        }
        if info < INFO_FLOOR {
            return Ok(f64::INFINITY);
        }
        worst = worst.max(numerator / info);
    }
    Ok(worst)
}

/// Test count beyond which the average error probability vanishes:
/// `max_i log2(C(N-m, i)·C(m, i)) / I_i`. Returns `+∞` when a contributing
/// `I_i` is zero.
pub fn sufficient_tests(
    subjects: u64,
    m: usize,
    source: &SourceDistribution,
    quantizer: &Quantizer,
) -> Result<f64> {
    bound_over_splits(subjects, source, m, quantizer, |n, m, i| {
        log2_binomial(n - m, i) + log2_binomial(m, i)
    })
}

/// Test count required for vanishing error: `max_i log2 C(N-m+i, i) / I_i`.
pub fn necessary_tests(
    subjects: u64,
    m: usize,
    source: &SourceDistribution,
    quantizer: &Quantizer,
) -> Result<f64> {
    bound_over_splits(subjects, source, m, quantizer, |n, m, i| {
        log2_binomial(n - m + i, i)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conventional() -> Quantizer {
        Quantizer::new(vec![1]).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn pmf_sum_examples() {
        let half = SourceDistribution::bernoulli(0.5).unwrap();
        assert_eq!(pmf_sum(&half, 2), vec![0.25, 0.5, 0.25]);
        assert_eq!(pmf_sum(&half, 0), vec![1.0]);
        let t = SourceDistribution::new(vec![0.33, 0.34, 0.33]).unwrap();
        let p = pmf_sum(&t, 2);
        assert_eq!(p.len(), 5);
        assert!(close(p[2], 0.34 * 0.34 + 2.0 * 0.33 * 0.33, 1e-15));
        assert!(close(p.iter().sum(), 1.0, 1e-12));
    }

    #[test]
    fn outcome_pmf_examples() {
        let half = SourceDistribution::bernoulli(0.5).unwrap();
        let p = outcome_pmf(&half, 2, &conventional());
        assert!(close(p[0], 0.25, 1e-15) && close(p[1], 0.75, 1e-15));

        let point = SourceDistribution::new(vec![1.0, 0.0, 0.0]).unwrap();
        let q = Quantizer::parse_partition("{0,1}{2}{3,4}").unwrap();
        assert_eq!(outcome_pmf(&point, 2, &q), vec![1.0, 0.0, 0.0]);

        // P(W in {0,1}) = 0.33^2 + 2*0.33*0.34, P(W = 2) = 0.34^2 + 2*0.33^2,
        // P(W in {3,4}) = 2*0.34*0.33 + 0.33^2
        let t = SourceDistribution::new(vec![0.33, 0.34, 0.33]).unwrap();
        let p = outcome_pmf(&t, 2, &q);
        assert!(close(p[0], 0.3333, 1e-12));
        assert!(close(p[1], 0.3334, 1e-12));
        assert!(close(p[2], 0.3333, 1e-12));
    }

    #[test]
    fn mutual_info_examples() {
        let half = SourceDistribution::bernoulli(0.5).unwrap();
        assert!(close(
            mutual_info_i(&half, 1, 1, &conventional()).unwrap(),
            1.0,
            1e-12
        ));
        assert!(close(
            mutual_info_i(&half, 2, 1, &conventional()).unwrap(),
            0.5,
            1e-12
        ));
        let h = -(0.25f64 * 0.25f64.log2() + 0.75 * 0.75f64.log2());
        assert!(close(
            mutual_info_i(&half, 2, 2, &conventional()).unwrap(),
            h,
            1e-12
        ));
        assert!(close(h, 0.8113, 1e-4));
        assert!(mutual_info_i(&half, 2, 0, &conventional()).is_err());
        assert!(mutual_info_i(&half, 2, 3, &conventional()).is_err());
    }

    #[test]
    fn alpha_examples() {
        let half = SourceDistribution::bernoulli(0.5).unwrap();
        let single = alpha(&half, 1, &conventional()).unwrap();
        assert!(close(single.alpha, 1.0, 1e-12));
        let pair = alpha(&half, 2, &conventional()).unwrap();
        assert!(close(pair.alpha, 0.811_278_124_459_132_8 / 2.0, 1e-12));
        assert!(close(pair.alpha, 0.4056, 1e-4));
        assert_eq!(pair.per_i.len(), 2);
    }

    #[test]
    fn binary_outcome_matches_binomial_formula() {
        // P(y = l) = Σ_{j=η_l}^{η_{l+1}-1} C(m, j) p^j (1-p)^{m-j}
        for &p in &[0.1, 0.37, 0.5, 0.9] {
            let src = SourceDistribution::bernoulli(p).unwrap();
            for m in 1..7usize {
                let quant = Quantizer::new((1..=m as u64).step_by(2).collect()).unwrap();
                let got = outcome_pmf(&src, m, &quant);
                let mut expected = vec![0.0; quant.levels() as usize];
                for j in 0..=m {
                    let c = 2f64.powf(log2_binomial(m as u64, j as u64));
                    expected[quant.quantize(j as u64) as usize] +=
                        c * p.powi(j as i32) * (1.0 - p).powi((m - j) as i32);
                }
                for (a, b) in got.iter().zip(&expected) {
                    assert!(close(*a, *b, 1e-12), "p={p} m={m}");
                }
            }
        }
    }

    #[test]
    fn full_split_equals_outcome_entropy() {
        let t = SourceDistribution::new(vec![0.2, 0.5, 0.3]).unwrap();
        let q = Quantizer::new(vec![2, 5]).unwrap();
        for m in 1..6 {
            let point = alpha(&t, m, &q).unwrap();
            assert!(close(
                point.per_i[m - 1],
                entropy(&outcome_pmf(&t, m, &q)),
                1e-9
            ));
        }
    }

    #[test]
    fn sufficient_tests_examples() {
        let half = SourceDistribution::bernoulli(0.5).unwrap();
        let s = sufficient_tests(1024, 1, &half, &conventional()).unwrap();
        assert!(close(s, 1023f64.log2(), 1e-12));
        assert!(close(s, 9.9986, 1e-4));
        let n = necessary_tests(1024, 1, &half, &conventional()).unwrap();
        assert!(close(n, 10.0, 1e-12));
        let n = necessary_tests(2, 1, &half, &conventional()).unwrap();
        assert!(close(n, 1.0, 1e-12));

        let dead = SourceDistribution::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(
            sufficient_tests(10, 2, &dead, &conventional()).unwrap(),
            f64::INFINITY
        );
        assert_eq!(
            necessary_tests(10, 2, &dead, &conventional()).unwrap(),
            f64::INFINITY
        );
        assert!(sufficient_tests(1, 2, &half, &conventional()).is_err());
    }

    #[test]
    fn log2_binomial_small_values() {
        assert_eq!(log2_binomial(5, 0), 0.0);
        assert!(close(log2_binomial(5, 2), 10f64.log2(), 1e-12));
        assert!(close(
            log2_binomial(60, 30),
            (118_264_581_564_861_424u64 as f64).log2(),
            1e-9
        ));
        assert_eq!(log2_binomial(2, 3), f64::NEG_INFINITY);
    }

    #[test]
    fn distribution_validation() {
        assert!(SourceDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(SourceDistribution::new(vec![1.0]).is_err());
        assert!(SourceDistribution::new(vec![-0.1, 1.1]).is_err());
        assert!(SourceDistribution::new(vec![0.33, 0.34, 0.33]).is_ok());
        assert_eq!(
            SourceDistribution::normalized(vec![1.0, 3.0])
                .unwrap()
                .probs(),
            &[0.25, 0.75]
        );
    }
}
