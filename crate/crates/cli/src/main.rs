use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mehist::datagen::{self, StreamKind};
use mehist::harness::{self, Comparison, EstimatorSpec, RunConfig, Summary, DEFAULT_ALPHAS};
use mehist::{Error, Quantile, Result, StreamSpec};

#[derive(Parser)]
#[command(
    name = "mehist",
    version,
    about = "Streaming quantile estimation with maximum-entropy histograms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic stream to a file, one value per line.
    Generate(GenerateArgs),
    /// Run one estimator over a stream and write its per-step series.
    Run(RunArgs),
    /// Run several estimators over the same stream and tabulate them.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Synthetic {
    /// N(5, 1)
    Normal,
    /// Fair-coin mixture of N(5, 1) and N(10, 4)
    Mixture,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algorithm {
    Interpolated,
    DataAligned,
    P2,
    Reservoir,
    Uniform,
}

impl Algorithm {
    fn spec(self, bins: usize, buffer: usize, seed: u64) -> EstimatorSpec {
        match self {
            Algorithm::Interpolated => EstimatorSpec::Interpolated { bins },
            Algorithm::DataAligned => EstimatorSpec::DataAligned { bins },
            Algorithm::P2 => EstimatorSpec::P2,
            Algorithm::Reservoir => EstimatorSpec::Reservoir { size: buffer, seed },
            Algorithm::Uniform => EstimatorSpec::Uniform { bins },
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    kind: Synthetic,
    #[arg(long, default_value_t = 1_000_000)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Stream file, one value per line ('#' starts a comment line).
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    synthetic: Option<Synthetic>,
}

#[derive(Args)]
struct StreamArgs {
    #[command(flatten)]
    source: Source,
    /// Length of a synthetic stream.
    #[arg(long, default_value_t = 1_000_000)]
    count: usize,
    /// Seed for the synthetic stream and the reservoir sampler.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Quantile to track; repeat for several.
    #[arg(long = "quantile", default_values_t = [0.95])]
    quantiles: Vec<f64>,
    /// Accuracy level for time-until-accuracy; repeat for several.
    #[arg(long = "alpha", default_values_t = DEFAULT_ALPHAS)]
    alphas: Vec<f64>,
    /// Record every N-th step. Defaults to 1 for streams of up to 10^6 values.
    #[arg(long)]
    stride: Option<usize>,
    /// Skip the exact ground truth.
    #[arg(long)]
    no_truth: bool,
}

impl StreamArgs {
    fn stream(&self) -> StreamSpec {
        match (&self.source.input, self.source.synthetic) {
            (Some(path), _) => StreamSpec::file(path),
            (None, Some(Synthetic::Normal)) => StreamSpec::stationary(self.count, self.seed),
            (None, Some(Synthetic::Mixture)) => StreamSpec::mixture(self.count, self.seed),
            (None, None) => unreachable!("clap requires a stream source"),
        }
    }

    fn quantiles(&self) -> Result<Vec<Quantile>> {
        self.quantiles.iter().map(|&q| Quantile::new(q)).collect()
    }

    /// Loads the stream once and builds the run configuration for `spec`.
    fn config(&self, spec: EstimatorSpec) -> Result<(RunConfig, Vec<f64>)> {
        let stream = self.stream();
        let values = stream.values()?;
        let stride = self
            .stride
            .unwrap_or_else(|| values.len().div_ceil(1_000_000).max(1));
        let config = RunConfig {
            estimator: spec,
            quantiles: self.quantiles()?,
            stream,
            truth: !self.no_truth,
            stride,
            alphas: self.alphas.clone(),
        };
        config.validate()?;
        Ok((config, values))
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    algorithm: Algorithm,
    /// Bin budget of the histogram estimators.
    #[arg(long, default_value_t = 100)]
    bins: usize,
    /// Buffer size of the reservoir sampler.
    #[arg(long, default_value_t = 100)]
    buffer: usize,
    #[command(flatten)]
    stream: StreamArgs,
    /// Per-step CSV. With several quantiles, `_q<q>` is added to the file stem.
    #[arg(long)]
    out: PathBuf,
    /// Summary CSV; defaults to `<out stem>_summary.csv`.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Also write the data-aligned bins every stride steps to this CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Estimator to include, optionally with its memory budget as
    /// `name:size`. Repeat for several; defaults to all five.
    #[arg(long = "algorithm", value_parser = parse_entry)]
    algorithms: Vec<(Algorithm, Option<usize>)>,
    #[arg(long, default_value_t = 100)]
    bins: usize,
    #[arg(long, default_value_t = 100)]
    buffer: usize,
    #[command(flatten)]
    stream: StreamArgs,
    /// Comparison table as CSV.
    #[arg(long)]
    out: PathBuf,
    /// Directory for one per-step CSV per estimator and quantile.
    #[arg(long)]
    series_dir: Option<PathBuf>,
}

fn parse_entry(s: &str) -> std::result::Result<(Algorithm, Option<usize>), String> {
    let (name, size) = match s.split_once(':') {
        Some((n, k)) => {
            let k: usize = k.parse().map_err(|e| format!("bad size {k:?}: {e}"))?;
            (n, Some(k))
        }
        None => (s, None),
    };
    let alg = Algorithm::from_str(name, true)?;
    Ok((alg, size))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    let name = match path.extension() {
        Some(ext) => format!("{stem}{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}{suffix}"),
    };
    path.with_file_name(name)
}

fn file_label(name: &str) -> String {
    name.chars()
        .filter_map(|c| match c {
            '(' => Some('-'),
            ')' => None,
            c => Some(c),
        })
        .collect()
}

fn generate(args: &GenerateArgs) -> Result<()> {
    let spec = match args.kind {
        Synthetic::Normal => StreamSpec::stationary(args.count, args.seed),
        Synthetic::Mixture => StreamSpec::mixture(args.count, args.seed),
    };
    let values = spec.values()?;
    let kind = match spec.kind {
        StreamKind::Stationary(_) => "normal",
        StreamKind::CoinMixture { .. } => "mixture",
        StreamKind::File(_) => unreachable!(),
    };
    let header = format!("kind={kind} count={} seed={}", args.count, args.seed);
    datagen::write_stream(&args.out, Some(&header), &values)?;
    eprintln!("wrote {} values to {}", values.len(), args.out.display());
    Ok(())
}

fn run(args: &RunArgs) -> Result<()> {
    let spec = args
        .algorithm
        .spec(args.bins, args.buffer, args.stream.seed);
    let (config, values) = args.stream.config(spec)?;
    let series = harness::evaluate(
        &values,
        &[config.estimator],
        &config.quantiles,
        config.truth,
        config.stride,
    )?;

    for s in &series {
        let path = if series.len() == 1 {
            args.out.clone()
        } else {
            with_suffix(&args.out, &format!("_q{}", s.quantile))
        };
        let mut w = create(&path)?;
        harness::write_series_csv(&mut w, s)?;
        w.flush()?;
    }
    let rows = series
        .iter()
        .map(|s| Summary::of(s, &config.alphas))
        .collect::<Result<Vec<_>>>()?;
    let summary_path = args
        .summary
        .clone()
        .unwrap_or_else(|| with_suffix(&args.out, "_summary"));
    let mut w = create(&summary_path)?;
    harness::write_summary_csv(&mut w, &config.alphas, &rows)?;
    w.flush()?;

    if let Some(trace) = &args.trace {
        if args.algorithm != Algorithm::DataAligned {
            return Err(Error::Config(
                "--trace is only available for the data-aligned estimator".into(),
            ));
        }
        let mut w = create(trace)?;
        harness::trace_bins(&values, args.bins, config.stride, &mut w)?;
        w.flush()?;
    }

    let table = Comparison {
        alphas: config.alphas.clone(),
        rows,
        series: Vec::new(),
    };
    print!("{table}");
    Ok(())
}

fn compare(args: &CompareArgs) -> Result<()> {
    let entries = if args.algorithms.is_empty() {
        vec![
            (Algorithm::DataAligned, None),
            (Algorithm::Interpolated, None),
            (Algorithm::P2, None),
            (Algorithm::Reservoir, None),
            (Algorithm::Uniform, None),
        ]
    } else {
        args.algorithms.clone()
    };
    let specs: Vec<EstimatorSpec> = entries
        .iter()
        .map(|&(alg, size)| {
            alg.spec(
                size.unwrap_or(args.bins),
                size.unwrap_or(args.buffer),
                args.stream.seed,
            )
        })
        .collect();
    let (base, values) = args.stream.config(specs[0])?;
    let configs: Vec<RunConfig> = specs
        .iter()
        .map(|&estimator| RunConfig {
            estimator,
            ..base.clone()
        })
        .collect();
    let table = harness::compare_values(&configs, &values)?;

    let mut w = create(&args.out)?;
    harness::write_summary_csv(&mut w, &table.alphas, &table.rows)?;
    w.flush()?;
    if let Some(dir) = &args.series_dir {
        fs::create_dir_all(dir)?;
        for s in &table.series {
            let name = format!("{}_q{}.csv", file_label(&s.estimator), s.quantile);
            let mut w = create(&dir.join(name))?;
            harness::write_series_csv(&mut w, s)?;
            w.flush()?;
        }
    }
    print!("{table}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(args) => generate(args),
        Command::Run(args) => run(args),
        Command::Compare(args) => compare(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
