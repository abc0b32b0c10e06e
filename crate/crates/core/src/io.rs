//! File formats.
//!
//! * Code matrix: `{"q", "n", "N", "layout": "tests-by-subjects", "matrix"}`,
//!   or a headerless CSV with one row per test.
//! * Quantizer: `{"Q", "thresholds"}`, or `{"Q", "eta"}` when equidistant.
//! * Syndrome: `{"Q", "outcomes"}`.
//! * Concatenated code: the code-matrix object plus `"K"`, `"block_size"`,
//!   `"eta"` and `"u"`.
//! * Disjunctness report: `{"disjunct", "witness": {"codeword", "covering"} | null}`.
//! * Capacity tables and Monte Carlo runs: CSV for plotting, JSON mirror.
//!
//! Subject indices are zero-based everywhere.

use serde::{Deserialize, Serialize};

use crate::capacity::CapacityPoint;
use crate::construct::ConcatCode;
use crate::disjunct::{DisjunctReport, Witness};
use crate::error::{Result, SqgtError};
use crate::model::{CodeMatrix, Quantizer, Syndrome};
use crate::random_design::{CriticalRateReport, MonteCarloReport};

const LAYOUT: &str = "tests-by-subjects";

#[derive(Debug, Serialize, Deserialize)]
struct CodeWire {
    q: u32,
    n: usize,
    #[serde(rename = "N")]
    subjects: usize,
    layout: String,
    matrix: Vec<Vec<u32>>,
}

impl From<&CodeMatrix> for CodeWire {
    fn from(code: &CodeMatrix) -> Self {
        Self {
            q: code.q(),
            n: code.num_tests(),
            subjects: code.num_subjects(),
            layout: LAYOUT.to_string(),
            matrix: code.rows(),
        }
    }
}

impl TryFrom<CodeWire> for CodeMatrix {
    type Error = SqgtError;

    fn try_from(w: CodeWire) -> Result<Self> {
        if w.layout != LAYOUT {
            return Err(SqgtError::Format(format!(
                "unsupported layout '{}', expected '{LAYOUT}'",
                w.layout
            )));
        }
        let code = CodeMatrix::from_rows(w.q, &w.matrix)?;
        if code.num_tests() != w.n || code.num_subjects() != w.subjects {
            return Err(SqgtError::Format(format!(
                "header says {}x{}, matrix is {}x{}",
                w.n,
                w.subjects,
                code.num_tests(),
                code.num_subjects()
            )));
        }
        Ok(code)
    }
}

impl Serialize for CodeMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CodeWire::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for CodeMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = CodeWire::deserialize(d)?;
        CodeMatrix::try_from(wire).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct QuantizerWire {
    #[serde(rename = "Q")]
    levels: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    thresholds: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    eta: Option<u64>,
}

impl Serialize for Quantizer {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let wire = match self.step() {
            Some(eta) => QuantizerWire {
                levels: self.levels(),
                thresholds: None,
                eta: Some(eta),
            },
            None => QuantizerWire {
                levels: self.levels(),
                thresholds: Some(self.thresholds().to_vec()),
                eta: None,
            },
        };
        wire.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Quantizer {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let w = QuantizerWire::deserialize(d)?;
        let quant = match (w.thresholds, w.eta) {
            (Some(t), None) => Quantizer::new(t),
            (None, Some(eta)) => Quantizer::equidistant(eta, w.levels),
            _ => {
                return Err(D::Error::custom(
                    "quantizer needs exactly one of \"thresholds\" or \"eta\"",
                ))
            }
        }
        .map_err(D::Error::custom)?;
        if quant.levels() != w.levels {
            return Err(D::Error::custom(format!(
                "Q = {} but {} thresholds given",
                w.levels,
                quant.thresholds().len()
            )));
        }
        Ok(quant)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct SyndromeWire {
    #[serde(rename = "Q", skip_serializing_if = "Option::is_none", default)]
    levels: Option<u32>,
    outcomes: Vec<u32>,
}

/// Syndrome file contents: the outcomes and, optionally, the level count.
pub fn syndrome_to_json(y: &Syndrome, levels: Option<u32>) -> Result<String> {
    to_json(&SyndromeWire {
        levels,
        outcomes: y.as_slice().to_vec(),
    })
}

pub fn syndrome_from_json(text: &str) -> Result<(Syndrome, Option<u32>)> {
    let w: SyndromeWire = from_json(text)?;
    let y = Syndrome::new(w.outcomes);
    if let Some(levels) = w.levels {
        y.check_levels(levels)?;
    }
    Ok((y, w.levels))
}

#[derive(Debug, Serialize, Deserialize)]
struct ConcatWire {
    #[serde(flatten)]
    code: CodeWire,
    #[serde(rename = "K")]
    blocks: usize,
    block_size: usize,
    eta: u64,
    u: usize,
}

impl Serialize for ConcatCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ConcatWire {
            code: CodeWire::from(self.code()),
            blocks: self.blocks(),
            block_size: self.block_size(),
            eta: self.eta(),
            u: self.u(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ConcatCode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let w = ConcatWire::deserialize(d)?;
        let code = CodeMatrix::try_from(w.code).map_err(D::Error::custom)?;
        ConcatCode::from_parts(code, w.blocks, w.block_size, w.eta, w.u).map_err(D::Error::custom)
    }
}

/// A code file may hold either a plain matrix or a concatenated code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodeFile {
    Plain(CodeMatrix),
    Concat(ConcatCode),
}

impl CodeFile {
    pub fn matrix(&self) -> &CodeMatrix {
        match self {
            CodeFile::Plain(c) => c,
            CodeFile::Concat(c) => c.code(),
        }
    }
}

/// Reads a code file, telling plain and concatenated codes apart by the
/// presence of `"K"`.
pub fn code_file_from_json(text: &str) -> Result<CodeFile> {
    let value: serde_json::Value = from_json(text)?;
    if value.get("K").is_some() {
        serde_json::from_value(value)
            .map(CodeFile::Concat)
            .map_err(|e| SqgtError::Format(e.to_string()))
    } else {
        serde_json::from_value(value)
            .map(CodeFile::Plain)
            .map_err(|e| SqgtError::Format(e.to_string()))
    }
}

/// Headerless CSV, one row per test.
pub fn code_to_csv(code: &CodeMatrix) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    for row in code.rows() {
        w.serialize(row)
            .map_err(|e| SqgtError::Format(e.to_string()))?;
    }
    into_string(w)
}

/// Parses a headerless CSV matrix. Without an explicit alphabet size the
/// smallest one holding every entry (and at least 2) is used.
pub fn code_from_csv(text: &str, q: Option<u32>) -> Result<CodeMatrix> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let rows = r
        .deserialize::<Vec<u32>>()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| SqgtError::Format(e.to_string()))?;
    let q = match q {
        Some(q) => q,
        None => rows
            .iter()
            .flatten()
            .copied()
            .max()
            .map_or(2, |m| (m + 1).max(2)),
    };
    CodeMatrix::from_rows(q, &rows)
}

#[derive(Serialize, Deserialize)]
struct ReportWire {
    disjunct: bool,
    witness: Option<WitnessWire>,
}

#[derive(Serialize, Deserialize)]
struct WitnessWire {
    codeword: usize,
    covering: Vec<usize>,
}

impl Serialize for DisjunctReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ReportWire {
            disjunct: self.is_disjunct,
            witness: self.witness.as_ref().map(|w| WitnessWire {
                codeword: w.codeword,
                covering: w.covering.clone(),
            }),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DisjunctReport {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = ReportWire::deserialize(d)?;
        if w.disjunct == w.witness.is_some() {
            return Err(serde::de::Error::custom(
                "a witness must be present exactly when the code is not disjunct",
            ));
        }
        Ok(DisjunctReport {
            is_disjunct: w.disjunct,
            witness: w.witness.map(|w| Witness {
                codeword: w.codeword,
                covering: w.covering,
            }),
        })
    }
}

#[derive(Serialize)]
struct CriticalRateWire {
    #[serde(rename = "A")]
    acceptable_rows: u128,
    gamma: f64,
    #[serde(rename = "R_critical")]
    critical_rate: f64,
    asymptotic_rate: f64,
    n: usize,
    epsilon: f64,
}

impl Serialize for CriticalRateReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CriticalRateWire {
            acceptable_rows: self.acceptable_rows,
            gamma: self.gamma,
            critical_rate: self.critical_rate,
            asymptotic_rate: self.asymptotic_rate,
            n: self.n,
            epsilon: self.epsilon,
        }
        .serialize(s)
    }
}

#[derive(Serialize)]
struct CapacityWire<'a> {
    m: usize,
    alpha_bits: f64,
    #[serde(rename = "P_T")]
    source: &'a [f64],
    thresholds: &'a [u64],
    partition: String,
    per_i: &'a [f64],
}

impl Serialize for CapacityPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CapacityWire {
            m: self.m,
            alpha_bits: self.alpha,
            source: self.source.probs(),
            thresholds: self.quantizer.thresholds(),
            partition: self.partition(),
            per_i: &self.per_i,
        }
        .serialize(s)
    }
}

/// `m, alpha_bits, p0, …, p{q-1}, partition`; all points must share `q`.
pub fn capacity_csv(points: &[CapacityPoint]) -> Result<String> {
    let q = points.first().map_or(0, |p| p.source.q() as usize);
    if points.iter().any(|p| p.source.q() as usize != q) {
        return Err(SqgtError::Format(
            "capacity rows must share the alphabet size".into(),
        ));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["m".to_string(), "alpha_bits".to_string()];
    header.extend((0..q).map(|k| format!("p{k}")));
    header.push("partition".to_string());
    w.write_record(&header)
        .map_err(|e| SqgtError::Format(e.to_string()))?;
    for p in points {
        let mut record = vec![p.m.to_string(), p.alpha.to_string()];
        record.extend(p.source.probs().iter().map(f64::to_string));
        record.push(p.partition());
        w.write_record(&record)
            .map_err(|e| SqgtError::Format(e.to_string()))?;
    }
    into_string(w)
}

/// `trial, disjunct, witness` with the witness written as
/// `codeword:covering covering …` (empty when disjunct).
pub fn monte_carlo_csv(report: &MonteCarloReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["trial", "disjunct", "witness"])
        .map_err(|e| SqgtError::Format(e.to_string()))?;
    for t in &report.trials {
        let witness = t.witness.as_ref().map_or(String::new(), |w| {
            let cover: Vec<String> = w.covering.iter().map(usize::to_string).collect();
            format!("{}:{}", w.codeword, cover.join(" "))
        });
        w.write_record([t.trial.to_string(), t.disjunct.to_string(), witness])
            .map_err(|e| SqgtError::Format(e.to_string()))?;
    }
    into_string(w)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| SqgtError::Format(e.to_string()))
}

pub fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| SqgtError::Format(e.to_string()))
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| SqgtError::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| SqgtError::Format(e.to_string()))
}
