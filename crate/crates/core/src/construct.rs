//! Concatenated SQGT codes built from a binary `u`-disjunct base code.
//!
//! Block `j` (1-based) is the base code scaled by `η·D_j` with
//! `D_j = 1 + u + … + u^{j-1}`. The number of blocks `K` is the largest value
//! with `η·D_K <= q - 1`, which is `floor(log_u((q-1)/η·(u-1) + 1))` for
//! `u >= 2` and `floor((q-1)/η)` for `u = 1`.
//!
//! Since `u·D_{j-1} < D_j`, the contribution of up to `u` positives from
//! blocks `1..j` never reaches a nonzero entry of block `j`, so the observed
//! outcomes split block by block with integer division:
//! `y_j = D_j·(y'_j div D_j)` and `y'_{j-1} = y'_j mod D_j`.

use crate::disjunct::Decoded;
use crate::error::{Result, SqgtError};
use crate::model::{
    minimal_levels, syndrome, CodeMatrix, DesignParams, PositiveSet, Quantizer, Syndrome,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcatCode {
    code: CodeMatrix,
    base: CodeMatrix,
    blocks: usize,
    eta: u64,
    u: usize,
}

impl ConcatCode {
    pub fn code(&self) -> &CodeMatrix {
        &self.code
    }

    pub fn base(&self) -> &CodeMatrix {
        &self.base
    }

    /// Number of blocks `K`.
    pub fn blocks(&self) -> usize {
        self.blocks
    }

    /// Columns per block `N_b`.
    pub fn block_size(&self) -> usize {
        self.base.num_subjects()
    }

    pub fn eta(&self) -> u64 {
        self.eta
    }

    pub fn u(&self) -> usize {
        self.u
    }

    /// `D_j = Σ_{i<j} u^i`; block `j` is `η·D_j` times the base code.
    pub fn block_multiplier(&self, j: usize) -> u64 {
        block_multiplier(self.u as u64, j).expect("validated at construction")
    }

    /// Equidistant quantizer with step `η` and the smallest `Q` that keeps
    /// every sum of `u` columns unsaturated.
    pub fn quantizer(&self) -> Quantizer {
        let levels =
            minimal_levels(self.code.q(), self.eta, self.u).expect("validated at construction");
        Quantizer::equidistant(self.eta, levels).expect("validated at construction")
    }

    /// Reassembles a concatenated code from its matrix and parameters,
    /// checking that the matrix is exactly the concatenation they describe.
    pub fn from_parts(
        code: CodeMatrix,
        blocks: usize,
        block_size: usize,
        eta: u64,
        u: usize,
    ) -> Result<Self> {
        if blocks == 0 || block_size == 0 || blocks * block_size != code.num_subjects() {
            return Err(SqgtError::Format(format!(
                "{blocks} blocks of {block_size} columns do not match {} subjects",
                code.num_subjects()
            )));
        }
        if eta == 0 {
            return Err(SqgtError::Format("eta must be positive".into()));
        }
        let first: Vec<Vec<u32>> = (0..block_size)
            .map(|j| {
                code.column(j)
                    .iter()
                    .map(|&v| (v as u64 / eta) as u32)
                    .collect()
            })
            .collect();
        let base = CodeMatrix::from_columns(2, &first).map_err(|e| {
            SqgtError::Format(format!("first block is not η times a binary code: {e}"))
        })?;
        let params = DesignParams::new(code.q(), minimal_levels(code.q(), eta, u)?, u)?;
        let rebuilt = concat_construct(&base, &params, eta)?;
        if rebuilt.blocks != blocks || rebuilt.code != code {
            return Err(SqgtError::Format(
                "matrix is not the concatenated code of its first block".into(),
            ));
        }
        Ok(rebuilt)
    }
}

fn block_multiplier(u: u64, j: usize) -> Option<u64> {
    let mut d = 0u64;
    for _ in 0..j {
        d = d.checked_mul(u)?.checked_add(1)?;
    }
    Some(d)
}

/// Concatenates `K` scaled copies of a binary `u`-disjunct base code.
///
/// The base code's disjunctness is the caller's responsibility. `params.levels()`
/// must keep the equidistant quantizer unsaturated, i.e. `Q·η > (q-1)·u`.
pub fn concat_construct(base: &CodeMatrix, params: &DesignParams, eta: u64) -> Result<ConcatCode> {
    if !base.is_binary() {
        let (test, subject, value) = (0..base.num_tests())
            .flat_map(|k| (0..base.num_subjects()).map(move |j| (k, j)))
            .map(|(k, j)| (k, j, base.entry(k, j)))
            .find(|&(_, _, v)| v > 1)
            .expect("non-binary entry exists");
        return Err(SqgtError::NonBinary {
            value,
            test,
            subject,
        });
    }
    if eta == 0 {
        return Err(SqgtError::InvalidParameter("eta must be positive".into()));
    }
    let q = params.q();
    let u = params.u() as u64;
    let top = (q - 1) as u64;
    if top < eta {
        return Err(SqgtError::Infeasible(format!(
            "q - 1 = {top} < eta = {eta}: no scaled block fits the alphabet"
        )));
    }
    let needed = minimal_levels(q, eta, params.u())?;
    if params.levels() < needed {
        return Err(SqgtError::InvalidParameter(format!(
            "Q = {} saturates the quantizer; need Q >= {needed}",
            params.levels()
        )));
    }

    let mut blocks = Vec::new();
    let mut d = 1u64;
    let mut previous = 0u64;
    loop {
        let scale = match eta.checked_mul(d) {
            Some(s) if s <= top => s,
            _ => break,
        };
        // u positives from earlier blocks stay below this block's smallest nonzero entry
        assert!(u * eta * previous < scale, "block separation violated");
        blocks.push(scale_binary(base, scale as u32, q)?);
        previous = d;
        d = match d.checked_mul(u).and_then(|v| v.checked_add(1)) {
            Some(v) => v,
            None => break,
        };
    }
    let code = CodeMatrix::hconcat(q, &blocks)?;
    Ok(ConcatCode {
        code,
        base: base.clone(),
        blocks: blocks.len(),
        eta,
        u: params.u(),
    })
}

fn scale_binary(base: &CodeMatrix, scale: u32, q: u32) -> Result<CodeMatrix> {
    let cols: Vec<Vec<u32>> = base
        .columns()
        .map(|c| c.iter().map(|&v| v * scale).collect())
        .collect();
    CodeMatrix::from_columns(q, &cols)
}

/// Recovers up to `u` positives from the outcomes of a concatenated code.
///
/// The returned set is flagged inconsistent when it does not reproduce
/// `observed` (for example when more than `u` subjects were positive).
pub fn concat_decode(observed: &Syndrome, code: &ConcatCode) -> Result<Decoded> {
    let matrix = code.code();
    if observed.len() != matrix.num_tests() {
        return Err(SqgtError::LengthMismatch {
            expected: matrix.num_tests(),
            actual: observed.len(),
        });
    }
    let quantizer = code.quantizer();
    observed.check_levels(quantizer.levels())?;

    let found = if code.u() == 1 {
        decode_single(observed, code)
    } else {
        decode_blocks(observed, code, &quantizer)
    };
    let positives = PositiveSet::from_sorted_unchecked(found);
    let consistent =
        positives.len() <= code.u() && syndrome(matrix, &positives, &quantizer)? == *observed;
    Ok(Decoded {
        positives,
        consistent,
    })
}

// u = 1: the single positive's column equals η·y.
fn decode_single(observed: &Syndrome, code: &ConcatCode) -> Vec<usize> {
    let y = observed.as_slice();
    if y.iter().all(|&v| v == 0) {
        return Vec::new();
    }
    let eta = code.eta();
    code.code()
        .columns()
        .enumerate()
        .filter(|(_, c)| c.iter().zip(y).all(|(&x, &v)| x as u64 == eta * v as u64))
        .map(|(j, _)| j)
        .collect()
}

fn decode_blocks(observed: &Syndrome, code: &ConcatCode, quantizer: &Quantizer) -> Vec<usize> {
    let matrix = code.code();
    let block_size = code.block_size();
    let mut residual: Vec<u64> = observed.as_slice().iter().map(|&v| v as u64).collect();
    let mut found = Vec::new();
    for j in (1..=code.blocks()).rev() {
        let d = code.block_multiplier(j);
        let block_outcome: Vec<u64> = residual.iter().map(|&r| d * (r / d)).collect();
        for r in residual.iter_mut() {
            *r %= d;
        }
        let start = (j - 1) * block_size;
        for col in start..start + block_size {
            let included = matrix
                .column(col)
                .iter()
                .zip(&block_outcome)
                .all(|(&x, &y)| quantizer.quantize(x as u64) as u64 <= y);
            if included {
                found.push(col);
            }
        }
    }
    found.sort_unstable();
    found
}
