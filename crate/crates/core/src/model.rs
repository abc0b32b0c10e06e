//! Channel model: design parameters, quantizers, test matrices, syndromes.
//!
//! A test pools the sample amounts of every positive subject and reports the
//! pooled sum through a quantizer with thresholds `0 = η_0 < η_1 < … < η_{Q-1}`.
//! Sums at or above `η_{Q-1}` report the top level `Q - 1`; the implicit
//! `η_Q` is treated as `+∞`. All arithmetic is exact integer arithmetic.

use std::fmt;

use crate::error::{Result, SqgtError};

/// The tuple `(q, Q, u)`: sample alphabet size, number of outcome levels and
/// an upper bound on the number of positives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DesignParams {
    q: u32,
    levels: u32,
    u: usize,
}

impl DesignParams {
    pub fn new(q: u32, levels: u32, u: usize) -> Result<Self> {
        if q < 2 {
            return Err(SqgtError::InvalidParameter(format!(
                "q must be at least 2, got {q}"
            )));
        }
        if levels < 2 {
            return Err(SqgtError::InvalidParameter(format!(
                "Q must be at least 2, got {levels}"
            )));
        }
        if u < 1 {
            return Err(SqgtError::InvalidParameter("u must be at least 1".into()));
        }
        Ok(Self { q, levels, u })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Number of outcome levels `Q`.
    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn u(&self) -> usize {
        self.u
    }

    /// Largest pooled sum `u` positives can produce.
    pub fn max_sum(&self) -> u64 {
        (self.q as u64 - 1) * self.u as u64
    }
}

/// Smallest `Q` for which an equidistant quantizer with step `eta` never
/// saturates on `u` positives over alphabet `[q]`: `floor(u(q-1)/eta) + 1`.
pub fn minimal_levels(q: u32, eta: u64, u: usize) -> Result<u32> {
    if eta == 0 {
        return Err(SqgtError::InvalidParameter("eta must be positive".into()));
    }
    let top = (q.saturating_sub(1) as u64) * u as u64 / eta;
    u32::try_from(top + 1)
        .ok()
        .filter(|&l| l >= 2)
        .ok_or_else(|| {
            SqgtError::Infeasible(format!(
                "no equidistant quantizer with step {eta} resolves any sum for q={q}, u={u}"
            ))
        })
}

/// Threshold quantizer mapping a pooled sum to one of `Q` outcome levels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Quantizer {
    thresholds: Vec<u64>,
}

impl Quantizer {
    /// Builds a quantizer from `(η_1, …, η_{Q-1})`, which must be positive and
    /// strictly increasing.
    pub fn new(thresholds: Vec<u64>) -> Result<Self> {
        if thresholds.is_empty() {
            return Err(SqgtError::InvalidQuantizer(
                "at least one threshold is required (Q >= 2)".into(),
            ));
        }
        if thresholds[0] == 0 {
            return Err(SqgtError::InvalidQuantizer(
                "thresholds must be positive".into(),
            ));
        }
        if let Some(w) = thresholds.windows(2).find(|w| w[0] >= w[1]) {
            return Err(SqgtError::InvalidQuantizer(format!(
                "thresholds must be strictly increasing ({} followed by {})",
                w[0], w[1]
            )));
        }
        u32::try_from(thresholds.len() + 1)
            .map_err(|_| SqgtError::InvalidQuantizer("too many thresholds".into()))?;
        Ok(Self { thresholds })
    }

    /// Uniform quantizer `η_r = r·step` with `levels` outcome levels.
    pub fn equidistant(step: u64, levels: u32) -> Result<Self> {
        if step == 0 {
            return Err(SqgtError::InvalidQuantizer("step must be positive".into()));
        }
        if levels < 2 {
            return Err(SqgtError::InvalidQuantizer(format!(
                "Q must be at least 2, got {levels}"
            )));
        }
        let thresholds = (1..levels as u64)
            .map(|r| r.checked_mul(step))
            .collect::<Option<Vec<_>>>()
            .ok_or(SqgtError::Overflow("equidistant thresholds"))?;
        Ok(Self { thresholds })
    }

    /// Builds the quantizer whose regions have the given sizes, starting at 0.
    /// The last region is open-ended, so its size is not needed and is ignored
    /// beyond being at least 1.
    pub fn from_region_sizes(sizes: &[u64]) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(SqgtError::InvalidQuantizer(
                "a partition needs at least two regions".into(),
            ));
        }
        if sizes.contains(&0) {
            return Err(SqgtError::InvalidQuantizer(
                "regions must be nonempty".into(),
            ));
        }
        let mut acc = 0u64;
        let mut thresholds = Vec::with_capacity(sizes.len() - 1);
        for &s in &sizes[..sizes.len() - 1] {
            acc += s;
            thresholds.push(acc);
        }
        Self::new(thresholds)
    }

    /// Parses a partition written as contiguous sets, e.g. `{0,1}{2}{3,4}`.
    /// Elements may be listed explicitly or with `…`/`...` ellipses; only
    /// the first and last element of each region are significant, and the
    /// regions must tile `0..=max` without gaps.
    pub fn parse_partition(text: &str) -> Result<Self> {
        let mut regions = Vec::new();
        let mut rest = text.trim();
        while !rest.is_empty() {
            let body_start = rest
                .strip_prefix('{')
                .ok_or_else(|| SqgtError::Format(format!("expected '{{' in partition '{text}'")))?;
            let close = body_start
                .find('}')
                .ok_or_else(|| SqgtError::Format(format!("unterminated region in '{text}'")))?;
            let body = &body_start[..close];
            let values = body
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty() && *t != "..." && *t != "…" && *t != "\\cdots")
                .map(|t| {
                    t.parse::<u64>()
                        .map_err(|_| SqgtError::Format(format!("bad element '{t}' in '{text}'")))
                })
                .collect::<Result<Vec<_>>>()?;
            let (first, last) = match (values.first(), values.last()) {
                (Some(&f), Some(&l)) => (f, l),
                _ => return Err(SqgtError::Format(format!("empty region in '{text}'"))),
            };
            if values.windows(2).any(|w| w[0] >= w[1]) {
                return Err(SqgtError::Format(format!(
                    "region elements must increase in '{text}'"
                )));
            }
            regions.push((first, last));
            rest = body_start[close + 1..].trim_start();
        }
        let mut expected = 0;
        for &(first, last) in &regions {
            if first != expected {
                return Err(SqgtError::Format(format!(
                    "regions of '{text}' are not contiguous from 0 (expected {expected}, found {first})"
                )));
            }
            expected = last + 1;
        }
        let sizes: Vec<u64> = regions.iter().map(|&(f, l)| l - f + 1).collect();
        Self::from_region_sizes(&sizes)
    }

    /// Number of outcome levels `Q`.
    pub fn levels(&self) -> u32 {
        self.thresholds.len() as u32 + 1
    }

    /// `(η_1, …, η_{Q-1})`.
    pub fn thresholds(&self) -> &[u64] {
        &self.thresholds
    }

    /// The common step `η` if the thresholds are `η_r = r·η`.
    pub fn step(&self) -> Option<u64> {
        let step = self.thresholds[0];
        self.thresholds
            .iter()
            .enumerate()
            .all(|(r, &t)| Some(t) == step.checked_mul(r as u64 + 1))
            .then_some(step)
    }

    pub fn is_equidistant(&self) -> bool {
        self.step().is_some()
    }

    /// Returns `r` with `η_r <= sum < η_{r+1}`.
    #[inline]
    pub fn quantize(&self, sum: u64) -> u32 {
        self.thresholds.partition_point(|&t| t <= sum) as u32
    }

    /// Checks the quantizer against a design: every level must be reachable by
    /// some sum of at most `u` entries from `[q]`, i.e. `η_{Q-1} <= (q-1)·u`.
    pub fn validate_for(&self, q: u32, u: usize) -> Result<()> {
        let max_sum = (q.saturating_sub(1) as u64) * u as u64;
        let top = *self.thresholds.last().expect("nonempty thresholds");
        if top > max_sum {
            return Err(SqgtError::InvalidQuantizer(format!(
                "top threshold {top} exceeds the largest attainable sum {max_sum} (q={q}, u={u})"
            )));
        }
        Ok(())
    }

    /// Regions `[η_r, η_{r+1} - 1]` over `0..=max_sum`; the last region is
    /// clipped at `max_sum`. Regions lying entirely above `max_sum` are empty
    /// and reported as `None`.
    pub fn regions(&self, max_sum: u64) -> Vec<Option<(u64, u64)>> {
        let mut out = Vec::with_capacity(self.thresholds.len() + 1);
        let mut lo = 0u64;
        for &t in self.thresholds.iter().chain(std::iter::once(&u64::MAX)) {
            let hi = t.saturating_sub(1).min(max_sum);
            out.push((lo <= hi && lo <= max_sum).then_some((lo, hi)));
            lo = t;
        }
        out
    }

    /// Renders the partition of `0..=max_sum` as `{0,1}{2}{3,4}`.
    pub fn partition_string(&self, max_sum: u64) -> String {
        self.regions(max_sum)
            .into_iter()
            .map(|r| match r {
                None => "{}".to_string(),
                Some((lo, hi)) => {
                    let elems: Vec<String> = (lo..=hi).map(|v| v.to_string()).collect();
                    format!("{{{}}}", elems.join(","))
                }
            })
            .collect()
    }
}

/// Returns `r` such that `η_r <= sum < η_{r+1}` (with `η_0 = 0`, `η_Q = ∞`).
pub fn quantize(sum: u64, quantizer: &Quantizer) -> u32 {
    quantizer.quantize(sum)
}

/// `n × N` test matrix over `[q]`; column `j` is the signature of subject `j`.
///
/// Stored column-major, since every channel operation walks signatures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeMatrix {
    q: u32,
    tests: usize,
    subjects: usize,
    data: Vec<u32>,
}

impl CodeMatrix {
    /// Builds a matrix from its rows (one row per test).
    pub fn from_rows(q: u32, rows: &[Vec<u32>]) -> Result<Self> {
        let tests = rows.len();
        let subjects = rows.first().map_or(0, Vec::len);
        if tests == 0 || subjects == 0 {
            return Err(SqgtError::InvalidParameter(
                "a code matrix needs at least one test and one subject".into(),
            ));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != subjects) {
            return Err(SqgtError::LengthMismatch {
                expected: subjects,
                actual: bad.len(),
            });
        }
        let mut data = Vec::with_capacity(tests * subjects);
        for j in 0..subjects {
            data.extend(rows.iter().map(|r| r[j]));
        }
        Self::from_column_major(q, tests, subjects, data)
    }

    /// Builds a matrix from its columns (one signature per subject).
    pub fn from_columns(q: u32, columns: &[Vec<u32>]) -> Result<Self> {
        let subjects = columns.len();
        let tests = columns.first().map_or(0, Vec::len);
        if tests == 0 || subjects == 0 {
            return Err(SqgtError::InvalidParameter(
                "a code matrix needs at least one test and one subject".into(),
            ));
        }
        if let Some(bad) = columns.iter().find(|c| c.len() != tests) {
            return Err(SqgtError::LengthMismatch {
                expected: tests,
                actual: bad.len(),
            });
        }
        Self::from_column_major(q, tests, subjects, columns.concat())
    }

    pub(crate) fn from_column_major(
        q: u32,
        tests: usize,
        subjects: usize,
        data: Vec<u32>,
    ) -> Result<Self> {
        if q < 2 {
            return Err(SqgtError::InvalidParameter(format!(
                "q must be at least 2, got {q}"
            )));
        }
        debug_assert_eq!(data.len(), tests * subjects);
        if let Some(pos) = data.iter().position(|&v| v >= q) {
            return Err(SqgtError::EntryOutOfAlphabet {
                value: data[pos],
                test: pos % tests,
                subject: pos / tests,
                q,
            });
        }
        Ok(Self {
            q,
            tests,
            subjects,
            data,
        })
    }

    /// Binary identity matrix `I_size`, a `u`-disjunct code for every `u < size`.
    pub fn identity(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(SqgtError::InvalidParameter(
                "identity size must be positive".into(),
            ));
        }
        let mut data = vec![0; size * size];
        for i in 0..size {
            data[i * size + i] = 1;
        }
        Self::from_column_major(2, size, size, data)
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Number of tests `n` (rows).
    pub fn num_tests(&self) -> usize {
        self.tests
    }

    /// Number of subjects `N` (columns).
    pub fn num_subjects(&self) -> usize {
        self.subjects
    }

    pub fn column(&self, j: usize) -> &[u32] {
        &self.data[j * self.tests..(j + 1) * self.tests]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[u32]> + '_ {
        self.data.chunks_exact(self.tests)
    }

    pub fn entry(&self, test: usize, subject: usize) -> u32 {
        self.data[subject * self.tests + test]
    }

    pub fn rows(&self) -> Vec<Vec<u32>> {
        (0..self.tests)
            .map(|k| (0..self.subjects).map(|j| self.entry(k, j)).collect())
            .collect()
    }

    pub fn max_entry(&self) -> u32 {
        self.data.iter().copied().max().unwrap_or(0)
    }

    pub fn is_binary(&self) -> bool {
        self.data.iter().all(|&v| v <= 1)
    }

    /// Reinterprets the matrix over a different alphabet size.
    pub fn with_alphabet(&self, q: u32) -> Result<Self> {
        Self::from_column_major(q, self.tests, self.subjects, self.data.clone())
    }

    /// Horizontal concatenation `[A_1 | A_2 | …]` over alphabet `q`.
    pub fn hconcat(q: u32, blocks: &[CodeMatrix]) -> Result<Self> {
        let tests = blocks
            .first()
            .ok_or_else(|| SqgtError::InvalidParameter("nothing to concatenate".into()))?
            .tests;
        if let Some(b) = blocks.iter().find(|b| b.tests != tests) {
            return Err(SqgtError::LengthMismatch {
                expected: tests,
                actual: b.tests,
            });
        }
        let subjects = blocks.iter().map(|b| b.subjects).sum();
        let data = blocks.iter().flat_map(|b| b.data.iter().copied()).collect();
        Self::from_column_major(q, tests, subjects, data)
    }

    /// Sum of the given columns in every test.
    pub fn pooled_sums(&self, set: &PositiveSet) -> Result<Vec<u64>> {
        set.check_bounds(self.subjects)?;
        let mut sums = vec![0u64; self.tests];
        for &j in set.indices() {
            for (s, &x) in sums.iter_mut().zip(self.column(j)) {
                *s += x as u64;
            }
        }
        Ok(sums)
    }
}

/// Vector of quantized test outcomes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Syndrome(Vec<u32>);

impl Syndrome {
    pub fn new(outcomes: Vec<u32>) -> Self {
        Self(outcomes)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<u32> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Checks `0 <= y_k < Q` for every entry.
    pub fn check_levels(&self, levels: u32) -> Result<()> {
        match self.0.iter().position(|&v| v >= levels) {
            Some(test) => Err(SqgtError::OutcomeOutOfRange {
                value: self.0[test],
                test,
                levels,
            }),
            None => Ok(()),
        }
    }

    /// Coordinate-wise `self <= other`.
    pub fn is_included_in(&self, other: &Syndrome) -> Result<bool> {
        is_included(self, other)
    }
}

impl From<Vec<u32>> for Syndrome {
    fn from(v: Vec<u32>) -> Self {
        Self(v)
    }
}

impl fmt::Display for Syndrome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Sorted set of distinct, zero-based subject indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PositiveSet(Vec<usize>);

impl PositiveSet {
    /// Builds a set, rejecting repeated indices.
    pub fn new(indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        if let Some(w) = v.windows(2).find(|w| w[0] == w[1]) {
            return Err(SqgtError::DuplicateIndex(w[0]));
        }
        Ok(Self(v))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub(crate) fn from_sorted_unchecked(v: Vec<usize>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        Self(v)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.0.binary_search(&j).is_ok()
    }

    pub fn check_bounds(&self, subjects: usize) -> Result<()> {
        match self.0.last() {
            Some(&index) if index >= subjects => Err(SqgtError::IndexOutOfRange {
                index,
                len: subjects,
            }),
            _ => Ok(()),
        }
    }
}

/// SQ-sum: coordinate `i` is `floor((Σ_j x_{i,j}) / step)`.
pub fn sq_sum<V: AsRef<[u32]>>(codewords: &[V], step: u64) -> Result<Syndrome> {
    if step == 0 {
        return Err(SqgtError::InvalidParameter("step must be positive".into()));
    }
    let len = codewords.first().map_or(0, |c| c.as_ref().len());
    let mut sums = vec![0u64; len];
    for c in codewords {
        let c = c.as_ref();
        if c.len() != len {
            return Err(SqgtError::LengthMismatch {
                expected: len,
                actual: c.len(),
            });
        }
        for (s, &x) in sums.iter_mut().zip(c) {
            *s += x as u64;
        }
    }
    sums.into_iter()
        .map(|s| u32::try_from(s / step).map_err(|_| SqgtError::Overflow("SQ-sum")))
        .collect::<Result<Vec<_>>>()
        .map(Syndrome)
}

/// Quantized outcomes of testing `set` with `code`. The empty set yields the
/// all-zero syndrome.
pub fn syndrome(code: &CodeMatrix, set: &PositiveSet, quantizer: &Quantizer) -> Result<Syndrome> {
    let sums = code.pooled_sums(set)?;
    Ok(Syndrome(
        sums.into_iter().map(|s| quantizer.quantize(s)).collect(),
    ))
}

/// `ya ◁ yb`: every outcome of `ya` is at most the matching outcome of `yb`.
pub fn is_included(ya: &Syndrome, yb: &Syndrome) -> Result<bool> {
    if ya.len() != yb.len() {
        return Err(SqgtError::LengthMismatch {
            expected: ya.len(),
            actual: yb.len(),
        });
    }
    Ok(ya.0.iter().zip(&yb.0).all(|(a, b)| a <= b))
}
