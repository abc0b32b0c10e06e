use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::{debug, info};
use sqgt_core::io::{self, CodeFile};
use sqgt_core::{
    alpha, capacity_search, concat_construct, concat_decode, estimate_disjunct_probability,
    is_sq_disjunct, minimal_levels, naive_decode, scale_code, syndrome, CodeMatrix, DesignParams,
    MonteCarloConfig, PositiveSet, Quantizer, SearchOptions, SourceDistribution, SqgtError,
};

use crate::{CodeFormat, ConstructMode, DecodeMode, QuantizerArgs, TableFormat};

/// Maps an error to the process exit code.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<SqgtError>() {
        Some(SqgtError::WorkLimit { .. }) => 3,
        Some(_) => 2,
        None => 1,
    }
}

fn write_output(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            info!("wrote {}", path.display());
        }
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn load_code(path: &Path) -> Result<CodeFile> {
    let text = read(path)?;
    let file = if is_csv(path) {
        CodeFile::Plain(io::code_from_csv(&text, None)?)
    } else {
        io::code_file_from_json(&text)?
    };
    let m = file.matrix();
    debug!(
        "loaded {}: q={} n={} N={}",
        path.display(),
        m.q(),
        m.num_tests(),
        m.num_subjects()
    );
    Ok(file)
}

/// Quantizer from `--quantizer`, from `--eta [--levels]`, or from the code
/// file itself when it is a concatenated code.
fn resolve_quantizer(args: &QuantizerArgs, file: &CodeFile, u: Option<usize>) -> Result<Quantizer> {
    if let Some(path) = &args.quantizer {
        return Ok(io::from_json(&read(path)?)?);
    }
    if let Some(eta) = args.eta {
        let levels = match (args.levels, u) {
            (Some(levels), _) => levels,
            (None, Some(u)) => minimal_levels(file.matrix().q(), eta, u)?,
            (None, None) => bail!(SqgtError::InvalidParameter(
                "--eta needs --levels or --u to fix the number of levels".into()
            )),
        };
        return Ok(Quantizer::equidistant(eta, levels)?);
    }
    if args.levels.is_some() {
        bail!(SqgtError::InvalidParameter(
            "--levels requires --eta".into()
        ));
    }
    match file {
        CodeFile::Concat(c) => Ok(c.quantizer()),
        CodeFile::Plain(_) => bail!(SqgtError::InvalidParameter(
            "a plain code needs --quantizer or --eta".into()
        )),
    }
}

fn resolve_u(u: Option<usize>, file: &CodeFile) -> Result<usize> {
    match (u, file) {
        (Some(u), _) => Ok(u),
        (None, CodeFile::Concat(c)) => Ok(c.u()),
        (None, CodeFile::Plain(_)) => bail!(SqgtError::InvalidParameter("--u is required".into())),
    }
}

pub struct ConstructArgs {
    pub mode: ConstructMode,
    pub base: String,
    pub q: Option<u32>,
    pub eta: u64,
    pub u: Option<usize>,
    pub levels: Option<u32>,
    pub factor: Option<u32>,
    pub format: CodeFormat,
    pub output: Option<PathBuf>,
}

fn load_base(spec: &str) -> Result<CodeMatrix> {
    if let Some(size) = spec.strip_prefix("id:") {
        let size: usize = size
            .parse()
            .map_err(|_| SqgtError::InvalidParameter(format!("bad identity size in {spec:?}")))?;
        return Ok(CodeMatrix::identity(size)?);
    }
    Ok(load_code(Path::new(spec))?.matrix().clone())
}

pub fn construct(args: ConstructArgs) -> Result<()> {
    let base = load_base(&args.base)?;
    let (text, summary) = match args.mode {
        ConstructMode::Concat => {
            let q = args
                .q
                .ok_or_else(|| SqgtError::InvalidParameter("concat mode needs --q".into()))?;
            let u = args
                .u
                .ok_or_else(|| SqgtError::InvalidParameter("concat mode needs --u".into()))?;
            let levels = match args.levels {
                Some(levels) => levels,
                None => minimal_levels(q, args.eta, u)?,
            };
            let params = DesignParams::new(q, levels, u)?;
            let code = concat_construct(&base, &params, args.eta)?;
            let m = code.code();
            let summary = format!(
                "n={} N={} K={} max_entry={}",
                m.num_tests(),
                m.num_subjects(),
                code.blocks(),
                m.max_entry()
            );
            let text = match args.format {
                CodeFormat::Json => io::to_json(&code)?,
                CodeFormat::Csv => io::code_to_csv(m)?,
            };
            (text, summary)
        }
        ConstructMode::Scale => {
            let factor = args
                .factor
                .ok_or_else(|| SqgtError::InvalidParameter("scale mode needs --factor".into()))?;
            let q = args.q.unwrap_or(factor.saturating_add(1));
            let code = scale_code(&base, factor, q)?;
            let summary = format!(
                "n={} N={} max_entry={}",
                code.num_tests(),
                code.num_subjects(),
                code.max_entry()
            );
            let text = match args.format {
                CodeFormat::Json => io::to_json(&code)?,
                CodeFormat::Csv => io::code_to_csv(&code)?,
            };
            (text, summary)
        }
    };
    eprintln!("{summary}");
    write_output(args.output.as_deref(), &text)
}

fn parse_positives(text: &str) -> Result<PositiveSet> {
    let indices = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| SqgtError::InvalidParameter(format!("bad subject index {s:?}")))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(PositiveSet::new(indices)?)
}

pub fn simulate(
    code: &Path,
    positives: &str,
    quantizer: &QuantizerArgs,
    u: Option<usize>,
    output: Option<&Path>,
) -> Result<()> {
    let file = load_code(code)?;
    let quant = resolve_quantizer(
        quantizer,
        &file,
        u.or(match &file {
            CodeFile::Concat(c) => Some(c.u()),
            CodeFile::Plain(_) => None,
        }),
    )?;
    let set = parse_positives(positives)?;
    let y = syndrome(file.matrix(), &set, &quant)?;
    info!("syndrome {y}");
    write_output(output, &io::syndrome_to_json(&y, Some(quant.levels()))?)
}

pub fn decode(
    code: &Path,
    outcome: &Path,
    mode: DecodeMode,
    quantizer: &QuantizerArgs,
    u: Option<usize>,
    output: Option<&Path>,
) -> Result<()> {
    let file = load_code(code)?;
    let (y, _) = io::syndrome_from_json(&read(outcome)?)?;
    let decoded = match mode {
        DecodeMode::Concat => {
            let CodeFile::Concat(concat) = &file else {
                bail!(SqgtError::InvalidParameter(
                    "concat decoding needs a concatenated code file".into()
                ));
            };
            concat_decode(&y, concat)?
        }
        DecodeMode::Naive => {
            let u = resolve_u(u, &file)?;
            let quant = resolve_quantizer(quantizer, &file, Some(u))?;
            let params = DesignParams::new(file.matrix().q(), quant.levels(), u)?;
            naive_decode(file.matrix(), &y, &params, &quant)?
        }
    };
    if !decoded.consistent {
        log::warn!("decoded set does not reproduce the observed syndrome");
    }
    let value = serde_json::json!({
        "positives": decoded.positives.indices(),
        "consistent": decoded.consistent,
    });
    write_output(output, &io::to_json(&value)?)
}

pub fn check(
    code: &Path,
    u: usize,
    quantizer: &QuantizerArgs,
    output: Option<&Path>,
) -> Result<()> {
    let file = load_code(code)?;
    let quant = resolve_quantizer(quantizer, &file, Some(u))?;
    let params = DesignParams::new(file.matrix().q(), quant.levels(), u)?;
    let report = is_sq_disjunct(file.matrix(), &params, &quant)?;
    info!("disjunct: {}", report.is_disjunct);
    write_output(output, &io::to_json(&report)?)
}

pub struct CapacityArgs {
    pub m: usize,
    pub m_max: usize,
    pub q: Option<u32>,
    pub levels: Option<u32>,
    pub grid_step: f64,
    pub refine: bool,
    pub eval_only: bool,
    pub pt: Option<String>,
    pub partition: Option<String>,
    pub thresholds: Option<String>,
    pub format: TableFormat,
    pub output: Option<PathBuf>,
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| SqgtError::InvalidParameter(format!("bad {what} entry {s:?}")).into())
        })
        .collect()
}

pub fn capacity(args: CapacityArgs) -> Result<()> {
    if args.m == 0 || args.m_max < args.m {
        bail!(SqgtError::InvalidParameter(format!(
            "need 1 <= m <= m-max, got m = {}, m-max = {}",
            args.m, args.m_max
        )));
    }
    let fixed = match (&args.partition, &args.thresholds) {
        (Some(p), _) => Some(Quantizer::parse_partition(p)?),
        (None, Some(t)) => Some(Quantizer::new(parse_list(t, "threshold")?)?),
        (None, None) => None,
    };
    let source = args
        .pt
        .as_deref()
        .map(|pt| {
            SourceDistribution::new(parse_list(pt, "probability")?).map_err(anyhow::Error::from)
        })
        .transpose()?;
    let q = match (args.q, &source) {
        (Some(q), Some(s)) if q != s.q() => bail!(SqgtError::InvalidParameter(format!(
            "--q {q} disagrees with the {} entries of --pt",
            s.q()
        ))),
        (Some(q), _) => q,
        (None, Some(s)) => s.q(),
        (None, None) => bail!(SqgtError::InvalidParameter("--q is required".into())),
    };
    let levels = match (args.levels, &fixed) {
        (Some(l), _) => l,
        (None, Some(quant)) => quant.levels(),
        (None, None) => bail!(SqgtError::InvalidParameter("--levels is required".into())),
    };

    let mut points = Vec::new();
    for m in args.m..=args.m_max {
        let point = if args.eval_only {
            let (Some(source), Some(quant)) = (&source, &fixed) else {
                bail!(SqgtError::InvalidParameter(
                    "--eval-only needs --pt and --partition or --thresholds".into()
                ));
            };
            alpha(source, m, quant)?
        } else {
            let options = SearchOptions {
                grid_step: args.grid_step,
                refine: args.refine,
                ..SearchOptions::default()
            };
            capacity_search(m, q, levels, &options, fixed.as_ref())?
        };
        info!(
            "m={m} alpha={} partition={}",
            point.alpha,
            point.partition()
        );
        points.push(point);
    }
    let text = match args.format {
        TableFormat::Csv => io::capacity_csv(&points)?,
        TableFormat::Json => io::to_json(&points)?,
    };
    write_output(args.output.as_deref(), &text)
}

pub fn critical_rate(
    q: u32,
    eta: u64,
    u: usize,
    n: usize,
    eps: f64,
    output: Option<&Path>,
) -> Result<()> {
    let report = sqgt_core::critical_rate(q, eta, u, n, eps)?;
    write_output(output, &io::to_json(&report)?)
}

pub fn monte_carlo(config: MonteCarloConfig, output: Option<&Path>) -> Result<()> {
    let report = estimate_disjunct_probability(&config)?;
    eprintln!(
        "disjunct fraction {:.4} over {} trials (n={} N={} q={} eta={} u={} seed={})",
        report.fraction,
        report.trials.len(),
        config.n,
        config.subjects,
        config.q,
        config.eta,
        config.u,
        config.seed
    );
    write_output(output, &io::monte_carlo_csv(&report)?)
}
