//! `prk` — compress, decompress, train dictionaries, inspect containers,
//! and run the comparative benchmark. All logic lives in the `patternrank`
//! library; this binary only wires files and flags to it.
//!
//! Exit codes: 0 success, 2 usage error, 3 input/output error,
//! 4 corruption or integrity error.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use patternrank::bench::{self, BenchInput, Mode};
use patternrank::codecs;
use patternrank::container::{read_container, Payload, PredefinedDictionary};
use patternrank::dict_builder;
use patternrank::{EngineConfig, Error};

#[derive(Parser)]
#[command(name = "prk", version, about = "Pattern-ranking compression toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AlgoArg {
    V1,
    V2,
    V1h,
    V2h,
}

impl AlgoArg {
    fn uses_predefined(self) -> bool {
        matches!(self, AlgoArg::V2 | AlgoArg::V2h)
    }
}

#[derive(Args)]
struct ConfigArgs {
    /// Minimum pattern length considered during extraction
    #[arg(long, default_value_t = EngineConfig::DEFAULT_MIN_LEN)]
    min_len: usize,
    /// Maximum pattern length considered during extraction
    #[arg(long, default_value_t = EngineConfig::DEFAULT_MAX_LEN)]
    max_len: usize,
    /// Number of top-ranked patterns to keep
    #[arg(long, default_value_t = EngineConfig::DEFAULT_TOP_K)]
    top_k: usize,
}

impl ConfigArgs {
    fn build(&self) -> patternrank::Result<EngineConfig> {
        EngineConfig::new(self.min_len, self.max_len, self.top_k)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compress a file into a self-contained .prk container
    Compress {
        /// Compression pipeline
        #[arg(long, value_enum)]
        algo: AlgoArg,
        /// Predefined dictionary (.prd), required for v2/v2h
        #[arg(long)]
        dict: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
        /// Output path (defaults to IN.prk, '-' for stdout)
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Overwrite the output if it exists
        #[arg(long)]
        force: bool,
        /// Input file ('-' for stdin)
        input: PathBuf,
    },
    /// Decompress a .prk container (self-contained; no flags needed)
    Decompress {
        /// Output path (defaults to IN without .prk, '-' for stdout)
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Overwrite the output if it exists
        #[arg(long)]
        force: bool,
        /// Input container ('-' for stdin)
        input: PathBuf,
    },
    /// Analyze a corpus and emit a predefined dictionary (.prd)
    BuildDict {
        /// Output dictionary path
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        /// Overwrite the output if it exists
        #[arg(long)]
        force: bool,
        /// Corpus files or directories (walked recursively)
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Print a container's header, dictionaries, and payload layout
    Inspect {
        /// Container file
        file: PathBuf,
    },
    /// Compare DEFLATE and the pattern-ranking pipelines over a corpus
    Bench {
        /// Comma-separated modes (deflate,v1,v2,v1h,v2h); default all
        #[arg(long, value_delimiter = ',')]
        modes: Option<Vec<String>>,
        /// Predefined dictionary for v2/v2h (trained from the corpus if omitted)
        #[arg(long)]
        dict: Option<PathBuf>,
        /// Seed for the synthetic corpus
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Generate a synthetic corpus, e.g. 8x65536 (COUNTxSIZE; SIZE takes k/m suffixes)
        #[arg(long)]
        synth: Option<String>,
        /// Write the JSON report here
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write a CSV with the same columns here
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Input files to benchmark (defaults to a synthetic 8x65536 corpus)
        inputs: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("prk: {err}");
            let code = match &err {
                Error::Usage(_) | Error::Config(_) => 2,
                Error::Io(_) => 3,
                _ => 4,
            };
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> patternrank::Result<()> {
    match cli.command {
        Command::Compress {
            algo,
            dict,
            config,
            output,
            force,
            input,
        } => compress(algo, dict, config, output, force, input),
        Command::Decompress {
            output,
            force,
            input,
        } => decompress(output, force, input),
        Command::BuildDict {
            out,
            config,
            force,
            paths,
        } => build_dict(out, config, force, paths),
        Command::Inspect { file } => inspect(&file),
        Command::Bench {
            modes,
            dict,
            seed,
            synth,
            report,
            csv,
            inputs,
        } => run_bench_command(modes, dict, seed, synth, report, csv, inputs),
    }
}

fn is_stdio(path: &Path) -> bool {
    path.as_os_str() == "-"
}

fn read_input(path: &Path) -> patternrank::Result<Vec<u8>> {
    if is_stdio(path) {
        let mut buf = Vec::new();
        std::io::stdin().lock().read_to_end(&mut buf)?;
        Ok(buf)
    } else {
        Ok(fs::read(path)?)
    }
}

fn write_output(path: &Path, bytes: &[u8], force: bool) -> patternrank::Result<()> {
    if is_stdio(path) {
        std::io::stdout().lock().write_all(bytes)?;
        return Ok(());
    }
    if path.exists() && !force {
        return Err(Error::Usage(format!(
            "refusing to overwrite {} (pass --force)",
            path.display()
        )));
    }
    fs::write(path, bytes)?;
    Ok(())
}

fn load_dictionary(path: &Path) -> patternrank::Result<PredefinedDictionary> {
    PredefinedDictionary::from_bytes(&fs::read(path)?)
}

fn compress(
    algo: AlgoArg,
    dict: Option<PathBuf>,
    config: ConfigArgs,
    output: Option<PathBuf>,
    force: bool,
    input: PathBuf,
) -> patternrank::Result<()> {
    if algo.uses_predefined() && dict.is_none() {
        return Err(Error::Usage(
            "--algo v2/v2h requires --dict FILE.prd".into(),
        ));
    }
    let cfg = config.build()?;
    let predefined = dict.as_deref().map(load_dictionary).transpose()?;
    let data = read_input(&input)?;
    let compressed = match (algo, predefined.as_ref()) {
        (AlgoArg::V1, _) => codecs::compress_v1(&data, &cfg)?,
        (AlgoArg::V2, Some(pd)) => codecs::compress_v2(&data, &cfg, pd)?,
        (AlgoArg::V1h, _) => codecs::compress_hybrid(&data, &cfg, None)?,
        (AlgoArg::V2h, pd) => codecs::compress_hybrid(&data, &cfg, pd)?,
        (AlgoArg::V2, None) => unreachable!("checked above"),
    };
    let out_path = match output {
        Some(path) => path,
        None if is_stdio(&input) => {
            return Err(Error::Usage(
                "cannot derive an output name from stdin; pass -o".into(),
            ))
        }
        None => {
            let mut name = input.into_os_string();
            name.push(".prk");
            PathBuf::from(name)
        }
    };
    write_output(&out_path, &compressed, force)
}

fn decompress(
    output: Option<PathBuf>,
    force: bool,
    input: PathBuf,
) -> patternrank::Result<()> {
    let bytes = read_input(&input)?;
    let restored = codecs::decompress(&bytes)?;
    let out_path = match output {
        Some(path) => path,
        None if is_stdio(&input) => {
            return Err(Error::Usage(
                "cannot derive an output name from stdin; pass -o".into(),
            ))
        }
        None => match input.to_string_lossy().strip_suffix(".prk") {
            Some(stripped) if !stripped.is_empty() => PathBuf::from(stripped),
            _ => {
                return Err(Error::Usage(format!(
                    "{} has no .prk suffix to strip; pass -o",
                    input.display()
                )))
            }
        },
    };
    write_output(&out_path, &restored, force)
}

fn build_dict(
    out: PathBuf,
    config: ConfigArgs,
    force: bool,
    paths: Vec<PathBuf>,
) -> patternrank::Result<()> {
    let cfg = config.build()?;
    let files = dict_builder::collect_corpus_files(&paths)?;
    let mut corpus = Vec::with_capacity(files.len());
    for file in &files {
        corpus.push(fs::read(file)?);
    }
    let stats = dict_builder::analyze_corpus(&corpus, &cfg);
    let pd = dict_builder::build_predefined(&stats, cfg.top_k(), &cfg)?;
    write_output(&out, &pd.to_bytes(), force)?;
    println!(
        "built dictionary: {} entries from {} files ({} bytes), hash {:016x}",
        pd.dictionary().len(),
        stats.files_seen(),
        stats.bytes_seen(),
        pd.content_hash()
    );
    Ok(())
}

fn preview(entries: &patternrank::Dictionary, label: &str) {
    println!("{label}:");
    for (i, entry) in entries.iter().take(8).enumerate() {
        println!("  [{i}] \"{}\"", entry.escape_ascii());
    }
    if entries.len() > 8 {
        println!("  ... {} more", entries.len() - 8);
    }
}

fn inspect(file: &Path) -> patternrank::Result<()> {
    let bytes = fs::read(file)?;
    let container = read_container(&bytes)?;
    println!("algorithm: {}", container.header.algorithm);
    println!("original_length: {}", container.header.original_length);
    println!("original_crc32: 0x{:08X}", container.header.original_crc32);
    println!("predefined_entries: {}", container.predefined_len());
    println!("dynamic_entries: {}", container.dynamic.len());
    match &container.payload {
        Payload::Escape(_) => println!("payload_kind: escape"),
        Payload::Huffman(section) => {
            println!("payload_kind: huffman");
            println!("token_count: {}", section.token_count);
        }
    }
    println!("payload_size: {}", container.payload.stored_size());
    if let Some(pd) = &container.predefined {
        println!("predefined_hash: 0x{:016x}", pd.content_hash());
        preview(pd.dictionary(), "predefined_top_entries");
    }
    if !container.dynamic.is_empty() {
        preview(&container.dynamic, "dynamic_top_entries");
    }
    Ok(())
}

/// Parse a COUNTxSIZE synthetic-corpus spec; SIZE accepts k/m suffixes.
fn parse_synth(spec: &str) -> patternrank::Result<(usize, usize)> {
    let err = || Error::Usage(format!("invalid --synth spec '{spec}', expected COUNTxSIZE"));
    let (count, size) = spec.split_once(['x', 'X']).ok_or_else(err)?;
    let count: usize = count.parse().map_err(|_| err())?;
    let size = match size.to_ascii_lowercase() {
        s if s.ends_with('k') => s[..s.len() - 1].parse::<usize>().map(|v| v * 1024),
        s if s.ends_with('m') => s[..s.len() - 1].parse::<usize>().map(|v| v * 1024 * 1024),
        s => s.parse::<usize>(),
    }
    .map_err(|_| err())?;
    if count == 0 || size < 1024 {
        return Err(Error::Usage(
            "--synth needs at least 1 file of at least 1024 bytes".into(),
        ));
    }
    Ok((count, size))
}

#[allow(clippy::too_many_arguments)]
fn run_bench_command(
    modes: Option<Vec<String>>,
    dict: Option<PathBuf>,
    seed: u64,
    synth: Option<String>,
    report_path: Option<PathBuf>,
    csv_path: Option<PathBuf>,
    input_paths: Vec<PathBuf>,
) -> patternrank::Result<()> {
    let modes: Vec<Mode> = match modes {
        None => Mode::ALL.to_vec(),
        Some(names) => names
            .iter()
            .map(|name| {
                Mode::from_name(name)
                    .ok_or_else(|| Error::Usage(format!("unknown bench mode '{name}'")))
            })
            .collect::<patternrank::Result<_>>()?,
    };

    let mut inputs = Vec::new();
    for path in &input_paths {
        inputs.push(BenchInput::new(
            path.to_string_lossy().into_owned(),
            fs::read(path)?,
        ));
    }
    let synth_spec = match (&synth, inputs.is_empty()) {
        (Some(spec), _) => Some(parse_synth(spec)?),
        (None, true) => Some((8, 65_536)), // default corpus
        (None, false) => None,
    };
    if let Some((count, size)) = synth_spec {
        for (i, data) in bench::synth_corpus(seed, count, size).into_iter().enumerate() {
            inputs.push(BenchInput::new(format!("synth-{seed}-{i}"), data));
        }
    }

    let cfg = EngineConfig::default();
    let mut notes = Vec::new();
    let predefined = match (&dict, modes.iter().any(|m| m.requires_predefined())) {
        (Some(path), _) => Some(load_dictionary(path)?),
        (None, true) => {
            // Train on the benchmark corpus itself so the default invocation
            // exercises every mode.
            let corpus: Vec<&[u8]> = inputs.iter().map(|i| i.data.as_slice()).collect();
            let stats = dict_builder::analyze_corpus(&corpus, &cfg);
            let pd = dict_builder::build_predefined(&stats, cfg.top_k(), &cfg)?;
            notes.push(format!(
                "predefined dictionary trained on the bench corpus ({} entries)",
                pd.dictionary().len()
            ));
            Some(pd)
        }
        (None, false) => None,
    };

    let mut report = bench::run_bench(&inputs, &modes, &cfg, predefined.as_ref())?;
    report.environment.notes.extend(notes);

    println!(
        "{:<16} {:<8} {:>10} {:>12} {:>8} {:>14} {:>14}",
        "input", "mode", "original", "compressed", "ratio", "compress_ns", "decompress_ns"
    );
    for row in &report.rows {
        println!(
            "{:<16} {:<8} {:>10} {:>12} {:>8} {:>14} {:>14}",
            row.input,
            row.mode.name(),
            row.original_size,
            row.compressed_size,
            row.ratio.map_or("-".into(), |r| format!("{r:.3}")),
            row.compress_time_ns,
            row.decompress_time_ns,
        );
    }

    if let Some(path) = report_path {
        fs::write(&path, report.to_json())?;
        println!("report written to {}", path.display());
    }
    if let Some(path) = csv_path {
        fs::write(&path, report.to_csv())?;
        println!("csv written to {}", path.display());
    }
    Ok(())
}
