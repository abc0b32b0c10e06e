//! SQ-disjunct codes.
//!
//! A code is SQ-disjunct for `u` positives when no signature's syndrome is
//! included in the syndrome of `u` other signatures. Such codes decode with a
//! single pass over the columns: a subject is positive iff its own syndrome is
//! included in the observed one.

use crate::error::{Result, SqgtError};
use crate::model::{syndrome, CodeMatrix, DesignParams, PositiveSet, Quantizer, Syndrome};

/// A codeword together with a set of other codewords whose syndrome covers it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub codeword: usize,
    pub covering: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisjunctReport {
    pub is_disjunct: bool,
    /// Lexicographically smallest `(codeword, covering)` pair, present iff
    /// the code is not disjunct.
    pub witness: Option<Witness>,
}

impl DisjunctReport {
    fn disjunct() -> Self {
        Self {
            is_disjunct: true,
            witness: None,
        }
    }
}

/// Checks the SQ-disjunct property by testing every codeword against every
/// set of `min(u, N-1)` other codewords.
///
/// Inclusion is monotone in the covering set, so sets smaller than `u` never
/// need to be examined separately. A single-column code is vacuously disjunct.
pub fn is_sq_disjunct(
    code: &CodeMatrix,
    params: &DesignParams,
    quantizer: &Quantizer,
) -> Result<DisjunctReport> {
    check_design(code, params, quantizer)?;
    let subjects = code.num_subjects();
    let cover_size = params.u().min(subjects - 1);
    if cover_size == 0 {
        return Ok(DisjunctReport::disjunct());
    }
    let singles: Vec<Syndrome> = (0..subjects)
        .map(|j| single_syndrome(code, j, quantizer))
        .collect();
    let mut search = CoverSearch::new(code, quantizer, cover_size);
    for (x, target) in singles.iter().enumerate() {
        if let Some(covering) = search.find(x, target.as_slice()) {
            return Ok(DisjunctReport {
                is_disjunct: false,
                witness: Some(Witness {
                    codeword: x,
                    covering,
                }),
            });
        }
    }
    Ok(DisjunctReport::disjunct())
}

fn check_design(code: &CodeMatrix, params: &DesignParams, quantizer: &Quantizer) -> Result<()> {
    if code.max_entry() >= params.q() {
        return Err(SqgtError::InvalidParameter(format!(
            "code entry {} does not fit alphabet q={}",
            code.max_entry(),
            params.q()
        )));
    }
    if quantizer.levels() != params.levels() {
        return Err(SqgtError::InvalidQuantizer(format!(
            "quantizer has {} levels, design expects Q={}",
            quantizer.levels(),
            params.levels()
        )));
    }
    Ok(())
}

fn single_syndrome(code: &CodeMatrix, j: usize, quantizer: &Quantizer) -> Syndrome {
    Syndrome::new(
        code.column(j)
            .iter()
            .map(|&v| quantizer.quantize(v as u64))
            .collect(),
    )
}

/// Depth-first enumeration of covering sets in lexicographic order with
/// running column sums. A prefix whose syndrome already covers the target is
/// accepted immediately and completed with the smallest remaining indices,
/// which is the lexicographically first full covering set.
struct CoverSearch<'a> {
    code: &'a CodeMatrix,
    quantizer: &'a Quantizer,
    size: usize,
    chosen: Vec<usize>,
    // partial[d] holds the column sums of chosen[..d]
    partial: Vec<Vec<u64>>,
}

impl<'a> CoverSearch<'a> {
    fn new(code: &'a CodeMatrix, quantizer: &'a Quantizer, size: usize) -> Self {
        Self {
            code,
            quantizer,
            size,
            chosen: Vec::with_capacity(size),
            partial: vec![vec![0; code.num_tests()]; size],
        }
    }

    fn find(&mut self, excluded: usize, target: &[u32]) -> Option<Vec<usize>> {
        self.chosen.clear();
        if self.descend(excluded, target, 0) {
            self.complete(excluded);
            Some(self.chosen.clone())
        } else {
            None
        }
    }

    fn covers(&self, depth: usize, column: &[u32], target: &[u32]) -> bool {
        self.partial[depth]
            .iter()
            .zip(column)
            .zip(target)
            .all(|((&s, &x), &t)| self.quantizer.quantize(s + x as u64) >= t)
    }

    fn descend(&mut self, excluded: usize, target: &[u32], start: usize) -> bool {
        let depth = self.chosen.len();
        let subjects = self.code.num_subjects();
        let remaining = self.size - depth;
        // leave room for the rest of the set, skipping the excluded index
        let mut j = start;
        while j < subjects {
            if j == excluded {
                j += 1;
                continue;
            }
            let after = subjects - j - 1 - usize::from(excluded > j);
            if after + 1 < remaining {
                break;
            }
            let column = self.code.column(j);
            if self.covers(depth, column, target) {
                self.chosen.push(j);
                return true;
            }
            if remaining > 1 {
                let (head, tail) = self.partial.split_at_mut(depth + 1);
                for ((dst, &s), &x) in tail[0].iter_mut().zip(&head[depth]).zip(column) {
                    *dst = s + x as u64;
                }
                self.chosen.push(j);
                if self.descend(excluded, target, j + 1) {
                    return true;
                }
                self.chosen.pop();
            }
            j += 1;
        }
        false
    }

    fn complete(&mut self, excluded: usize) {
        let mut j = self.chosen.last().map_or(0, |&l| l + 1);
        while self.chosen.len() < self.size {
            if j != excluded {
                self.chosen.push(j);
            }
            j += 1;
        }
    }
}

/// Unique-coordinate certificate for `u + 1` codewords under an equidistant
/// quantizer with step `eta`.
///
/// Returns true iff every codeword `i` has a row `k` with
/// `floor(x_{k,i}/η) > floor((Σ_{j≠i} x_{k,j})/η)`. A row can certify at most
/// one codeword, so such rows are automatically distinct.
pub fn unique_coordinate_check<V: AsRef<[u32]>>(
    codewords: &[V],
    u: usize,
    eta: u64,
) -> Result<bool> {
    if codewords.len() != u + 1 {
        return Err(SqgtError::InvalidParameter(format!(
            "expected u + 1 = {} codewords, got {}",
            u + 1,
            codewords.len()
        )));
    }
    if eta == 0 {
        return Err(SqgtError::InvalidParameter("eta must be positive".into()));
    }
    let len = codewords[0].as_ref().len();
    if let Some(c) = codewords.iter().find(|c| c.as_ref().len() != len) {
        return Err(SqgtError::LengthMismatch {
            expected: len,
            actual: c.as_ref().len(),
        });
    }
    let mut certified = vec![false; codewords.len()];
    for k in 0..len {
        let total: u64 = codewords.iter().map(|c| c.as_ref()[k] as u64).sum();
        for (i, c) in codewords.iter().enumerate() {
            let own = c.as_ref()[k] as u64;
            if own / eta > (total - own) / eta {
                certified[i] = true;
            }
        }
    }
    Ok(certified.into_iter().all(|c| c))
}

/// Multiplies a binary code entrywise by `factor`, producing a code over `[q]`.
pub fn scale_code(binary_code: &CodeMatrix, factor: u32, q: u32) -> Result<CodeMatrix> {
    if factor == 0 {
        return Err(SqgtError::InvalidParameter(
            "scaling factor must be positive".into(),
        ));
    }
    if q < 2 || factor > q - 1 {
        return Err(SqgtError::InvalidParameter(format!(
            "scaling factor {factor} exceeds q - 1 = {}",
            q.saturating_sub(1)
        )));
    }
    let tests = binary_code.num_tests();
    let mut data = Vec::with_capacity(tests * binary_code.num_subjects());
    for (j, column) in binary_code.columns().enumerate() {
        for (k, &v) in column.iter().enumerate() {
            if v > 1 {
                return Err(SqgtError::NonBinary {
                    value: v,
                    test: k,
                    subject: j,
                });
            }
            data.push(v * factor);
        }
    }
    CodeMatrix::from_column_major(q, tests, binary_code.num_subjects(), data)
}

/// A decoded positive set and whether it reproduces the observed syndrome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub positives: PositiveSet,
    pub consistent: bool,
}

/// Declares positive every subject whose own syndrome is included in
/// `observed`. Exact for SQ-disjunct codes and at most `u` positives;
/// otherwise the returned set is flagged inconsistent when its syndrome
/// differs from `observed`.
pub fn naive_decode(
    code: &CodeMatrix,
    observed: &Syndrome,
    params: &DesignParams,
    quantizer: &Quantizer,
) -> Result<Decoded> {
    check_design(code, params, quantizer)?;
    quantizer.validate_for(params.q(), params.u())?;
    if observed.len() != code.num_tests() {
        return Err(SqgtError::LengthMismatch {
            expected: code.num_tests(),
            actual: observed.len(),
        });
    }
    observed.check_levels(quantizer.levels())?;
    let y = observed.as_slice();
    let found: Vec<usize> = code
        .columns()
        .enumerate()
        .filter(|(_, column)| {
            column
                .iter()
                .zip(y)
                .all(|(&x, &obs)| quantizer.quantize(x as u64) <= obs)
        })
        .map(|(j, _)| j)
        .collect();
    let positives = PositiveSet::from_sorted_unchecked(found);
    let consistent =
        positives.len() <= params.u() && syndrome(code, &positives, quantizer)? == *observed;
    Ok(Decoded {
        positives,
        consistent,
    })
}
