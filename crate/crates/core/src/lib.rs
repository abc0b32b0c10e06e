//! Semi-quantitative group testing.
//!
//! Each test pools sample amounts from `[q] = {0, …, q-1}` of the subjects it
//! contains and reports the pooled sum through a `Q`-level threshold
//! quantizer. This crate provides:
//!
//! * [`model`]: the channel (quantizers, test matrices, syndromes, inclusion);
//! * [`disjunct`]: SQ-disjunct verification, scaling and the one-pass decoder;
//! * [`construct`]: concatenated codes from binary disjunct codes and their
//!   block-by-block decoder;
//! * [`capacity`]: mutual informations, `α` and the capacity lower-bound search;
//! * [`random_design`]: critical rates of random codes with Monte Carlo checks;
//! * [`io`]: JSON and CSV file formats.
//!
//! ```
//! use sqgt_core::{concat_construct, concat_decode, syndrome, CodeMatrix, DesignParams, PositiveSet};
//!
//! let params = DesignParams::new(4, 7, 2).unwrap();
//! let code = concat_construct(&CodeMatrix::identity(5).unwrap(), &params, 1).unwrap();
//! let positives = PositiveSet::new([1, 7]).unwrap();
//! let y = syndrome(code.code(), &positives, &code.quantizer()).unwrap();
//! assert_eq!(concat_decode(&y, &code).unwrap().positives, positives);
//! ```

pub mod capacity;
pub mod construct;
pub mod disjunct;
pub mod error;
pub mod io;
pub mod model;
pub mod random_design;

pub use capacity::{
    alpha, capacity_search, entropy, mutual_info_i, necessary_tests, outcome_pmf, pmf_sum,
    sufficient_tests, CapacityPoint, SearchOptions, SourceDistribution,
};
pub use construct::{concat_construct, concat_decode, ConcatCode};
pub use disjunct::{
    is_sq_disjunct, naive_decode, scale_code, unique_coordinate_check, Decoded, DisjunctReport,
    Witness,
};
pub use error::{Result, SqgtError};
pub use model::{
    is_included, minimal_levels, quantize, sq_sum, syndrome, CodeMatrix, DesignParams, PositiveSet,
    Quantizer, Syndrome,
};
pub use random_design::{
    acceptable_row_count, critical_rate, estimate_disjunct_probability, random_code,
    CriticalRateReport, MonteCarloConfig, MonteCarloReport, TrialOutcome,
};
