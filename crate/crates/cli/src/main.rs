// SPDX-License-Identifier: MIT OR Apache-2.0

//! `covseg segment|spectrum|synth`.
//!
//! Failures print a single line `covseg: error[<kind>]: <message>` to stderr
//! and exit non-zero.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use covseg::ingest::{load_rates, to_log_returns, Alignment, LoadOptions, ReturnKind};
use covseg::report::{rates_csv, spectrum_csv, tree_json, RunMetadata, SegmentReport};
use covseg::segment::{delta_spectrum, segment_recursive, SplitConfig};
use covseg::synth::{load_scenario, sample_scenario};
use covseg::{CovsegError, ReturnMatrix, Span};

#[derive(Parser)]
#[command(
    name = "covseg",
    version,
    about = "Segment multivariate return series into covariance regimes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReturnsArg {
    Log,
    Diff,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlignArg {
    Intersect,
    Error,
}

#[derive(clap::Args)]
struct InputArgs {
    /// Delimited rate file with a header row and a timestamp column.
    input: PathBuf,
    /// `log` (default) or arithmetic `diff` of consecutive rates.
    #[arg(long, value_enum, default_value = "log")]
    returns: ReturnsArg,
    /// How to treat timestamps missing from some series.
    #[arg(long, value_enum, default_value = "intersect")]
    alignment: AlignArg,
    /// Force the field delimiter (single character, `\t` for tab).
    #[arg(long)]
    delimiter: Option<String>,
    /// Timestamp column name; defaults to the first column.
    #[arg(long)]
    time_column: Option<String>,
    /// Threshold Δ₀; defaults to 10·M.
    #[arg(long)]
    delta0: Option<f64>,
    /// Margin factor k: each side of a split keeps at least k·M + 1 columns.
    #[arg(long, default_value_t = covseg::segment::DEFAULT_MARGIN_FACTOR)]
    margin_factor: usize,
    /// Diagonal jitter ε·trace/M for near-singular windows.
    #[arg(long, default_value_t = 0.0)]
    jitter: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Recursively split the input and write the segment report.
    Segment {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = covseg::segment::DEFAULT_MAX_DEPTH)]
        max_depth: usize,
        /// Re-optimize each boundary between its neighbours after bisection.
        #[arg(long)]
        refine: bool,
        /// Accepted and ignored: segmentation draws no random numbers.
        #[arg(long, hide = true)]
        seed_unused: Option<u64>,
        #[arg(long, default_value = "covseg-out")]
        out_dir: PathBuf,
    },
    /// Dump Δ(t) and Δ(t)/n over one range.
    Spectrum {
        #[command(flatten)]
        input: InputArgs,
        /// Half-open column range `start:end`; the whole series by default.
        #[arg(long)]
        range: Option<String>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample a scenario file into an ingestible rate file plus `<out>.truth`.
    Synth {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

type CliResult<T> = Result<T, CovsegError>;

fn load_input(args: &InputArgs) -> CliResult<(ReturnMatrix, ReturnKind, Alignment)> {
    let delimiter = match args.delimiter.as_deref() {
        None => None,
        Some("\\t") | Some("tab") => Some(b'\t'),
        Some(d) if d.len() == 1 => Some(d.as_bytes()[0]),
        Some(d) => {
            return Err(CovsegError::InvalidConfig(format!(
                "delimiter must be one byte, got '{d}'"
            )))
        }
    };
    let options = LoadOptions {
        delimiter,
        time_column: args.time_column.clone(),
    };
    let kind = match args.returns {
        ReturnsArg::Log => ReturnKind::Log,
        ReturnsArg::Diff => ReturnKind::Diff,
    };
    let alignment = match args.alignment {
        AlignArg::Intersect => Alignment::Intersect,
        AlignArg::Error => Alignment::ErrorOnGap,
    };
    let table = load_rates(&args.input, &options)?;
    Ok((to_log_returns(&table, alignment, kind)?, kind, alignment))
}

fn split_config(args: &InputArgs, dim: usize) -> SplitConfig {
    let mut config = SplitConfig::for_dim(dim);
    if let Some(d) = args.delta0 {
        config.delta0 = d;
    }
    config.min_margin_factor = args.margin_factor;
    config.jitter_epsilon = args.jitter;
    config
}

/// Writes every file or none: anything already written is removed on failure.
fn write_all(files: &[(PathBuf, String)]) -> CliResult<()> {
    let mut written = Vec::new();
    for (path, body) in files {
        if let Err(source) = fs::write(path, body) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            return Err(CovsegError::Io {
                path: path.clone(),
                source,
            });
        }
        written.push(path.clone());
    }
    Ok(())
}

fn parse_range(text: &str) -> CliResult<Span> {
    let bad = || CovsegError::InvalidConfig(format!("range must be start:end, got '{text}'"));
    let (a, b) = text.split_once(':').ok_or_else(bad)?;
    let start = a.trim().parse().map_err(|_| bad())?;
    let end = b.trim().parse().map_err(|_| bad())?;
    Ok(Span::new(start, end))
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Segment {
            input,
            max_depth,
            refine,
            seed_unused: _,
            out_dir,
        } => {
            let (data, kind, alignment) = load_input(&input)?;
            let mut config = split_config(&input, data.dim());
            config.max_depth = max_depth;
            config.refine = refine;
            let result = segment_recursive(&data, &config)?;
            let metadata = RunMetadata::new(&data, &config, Some(kind), Some(alignment));
            let report = SegmentReport::new(&data, &result, metadata);
            let tree = tree_json(&result, &data, &report.metadata);

            fs::create_dir_all(&out_dir).map_err(|source| CovsegError::Io {
                path: out_dir.clone(),
                source,
            })?;
            write_all(&[
                (out_dir.join("segments.csv"), report.segments_csv()),
                (out_dir.join("segments.json"), report.segments_json()),
                (out_dir.join("entropy.csv"), report.entropy_csv()),
                (out_dir.join("eigenvalues.csv"), report.eigenvalues_csv()),
                (out_dir.join("tree.json"), tree),
            ])?;
            eprintln!(
                "covseg: {} segments from {} series × {} observations → {}",
                report.segments.len(),
                data.dim(),
                data.len(),
                out_dir.display()
            );
            Ok(())
        }
        Command::Spectrum { input, range, out } => {
            let (data, _, _) = load_input(&input)?;
            let config = split_config(&input, data.dim());
            let span = match range {
                Some(r) => parse_range(&r)?,
                None => data.full_span(),
            };
            let spectrum = delta_spectrum(&data, span, &config)?;
            let text = spectrum_csv(&spectrum, &data);
            match out {
                Some(path) => write_all(&[(path, text)]),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
        Command::Synth {
            scenario,
            out,
            seed,
        } => {
            let mut file = load_scenario(&scenario)?;
            if let Some(s) = seed {
                file.scenario.seed = s;
            }
            let (mut data, truth) = sample_scenario(&file.scenario)?;
            if let Some(labels) = file.labels {
                data = ReturnMatrix::from_column_major(
                    data.dim(),
                    data.values().to_vec(),
                    labels,
                    data.timestamps().to_vec(),
                )?;
            }
            write_all(&[
                (out.clone(), rates_csv(&data)),
                (truth_path(&out), truth_text(&file.scenario, &truth)),
            ])
        }
    }
}

fn truth_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".truth");
    PathBuf::from(name)
}

/// One boundary per line: the return-column index where each new regime
/// starts. After ingestion that return carries timestamp `index + 1`.
fn truth_text(scenario: &covseg::synth::MixtureScenario, truth: &[usize]) -> String {
    let mut out = format!(
        "# seed={} observations={} regimes={}\nboundary_index\n",
        scenario.seed,
        scenario.total_len(),
        scenario.regimes.len()
    );
    for b in truth {
        out.push_str(&format!("{b}\n"));
    }
    out
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("COVSEG_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        CovsegError::InvalidConfig(format!("COVSEG_THREADS must be a count, got '{raw}'"))
    })?;
    // 0 lets rayon pick.
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CovsegError::InvalidConfig(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = e.to_string().replace(['\n', '\r'], " ");
            eprintln!("covseg: error[{}]: {message}", e.kind());
            ExitCode::FAILURE
        }
    }
}
