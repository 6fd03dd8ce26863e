use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use topicsim_core::{Algorithm, Preset, TopicShape};

#[derive(Debug, Parser)]
#[command(
    name = "topicsim",
    about = "Synthetic LDA corpora, Gibbs and VB inference, and KLD / C_v evaluation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate one corpus and write docs.txt.gz, dictionary.json and ground_truth.json
    Generate(GenerateArgs),
    /// Fit a corpus directory with Gibbs sampling or variational Bayes
    Fit(FitArgs),
    /// Align a fit to its ground truth and report the average KLD
    Eval(EvalArgs),
    /// Run corpus groups for every M and summarize average KLD per algorithm
    Experiment(ExperimentArgs),
    /// Sweep K and summarize C_v coherence per algorithm
    Coherence(CoherenceArgs),
    /// Serve the corpus generation API
    Serve(ServeArgs),
    /// Recompute an experiment tree from its stored settings and compare hashes
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Estimator {
    ThinnedMean,
    FinalState,
}

#[derive(Debug, Default, Args)]
pub struct GeneratorArgs {
    /// Named data set supplying every default
    #[arg(long)]
    pub preset: Option<Preset>,
    /// Documents per corpus
    #[arg(short = 'M', long = "docs")]
    pub m: Option<usize>,
    /// Vocabulary size
    #[arg(short = 'V', long = "vocab")]
    pub v: Option<usize>,
    /// Tokens per document
    #[arg(short = 'N', long = "doc-len")]
    pub n: Option<usize>,
    /// Topics, including the function topic
    #[arg(short = 'K', long = "topics")]
    pub k: Option<usize>,
    /// Content topics per document
    #[arg(long = "km")]
    pub k_m: Option<usize>,
    #[arg(long)]
    pub shape: Option<TopicShape>,
    #[arg(long)]
    pub overlap: Option<f64>,
    #[arg(long)]
    pub function_fraction: Option<f64>,
    #[arg(long)]
    pub function_block_fraction: Option<f64>,
    /// Generate without the function-word topic
    #[arg(long)]
    pub no_function_topic: bool,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub generator: GeneratorArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory
    #[arg(short = 'o', long = "out")]
    pub out: PathBuf,
    /// TOML or JSON config file
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Default, Args)]
pub struct HyperArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long = "algo")]
    pub algorithm: Algorithm,
    /// Corpus directory written by `generate`
    #[arg(long)]
    pub corpus: PathBuf,
    /// Topics to fit (default: the ground-truth K)
    #[arg(short = 'K', long = "topics")]
    pub k: Option<usize>,
    /// Preset whose hyperparameters to use
    #[arg(long)]
    pub preset: Option<Preset>,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Gibbs sweeps
    #[arg(long)]
    pub iters: Option<usize>,
    /// Gibbs burn-in as a fraction of the sweeps
    #[arg(long)]
    pub burn_in: Option<f64>,
    #[arg(long)]
    pub thin: Option<usize>,
    #[arg(long, value_enum)]
    pub estimator: Option<Estimator>,
    /// VB epochs
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Fit seed (default: derived from the corpus seed)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file (default: <corpus>/fit_<algo>.json)
    #[arg(short = 'o', long = "out")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Fit file written by `fit`
    #[arg(long)]
    pub fit: PathBuf,
    /// ground_truth.json of the fitted corpus
    #[arg(long)]
    pub truth: PathBuf,
    /// Output file (default: eval.json next to the fit)
    #[arg(short = 'o', long = "out")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub preset: Option<Preset>,
    /// Desk-scale profile: 2,500 Gibbs sweeps and groups of 10
    #[arg(long)]
    pub fast: bool,
    /// Comma-separated corpus sizes, one group each
    #[arg(long = "m-values", value_delimiter = ',')]
    pub m_values: Option<Vec<usize>>,
    #[arg(long)]
    pub group_size: Option<usize>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[command(flatten)]
    pub hyper: HyperArgs,
    /// Master seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Name of the data set directory (default: the preset name)
    #[arg(long)]
    pub dataset: Option<String>,
    /// Output root
    #[arg(short = 'o', long = "out", default_value = "out")]
    pub out: PathBuf,
    /// Worker threads (default: number of processors)
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Print the summaries to standard output
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CoherenceArgs {
    #[command(flatten)]
    pub common: ExperimentArgs,
    /// K values: `4..10` (inclusive) or a comma list
    #[arg(long = "k-values")]
    pub k_values: Option<String>,
    /// Top words per topic
    #[arg(long)]
    pub top_n: Option<usize>,
    /// Sliding window width in tokens
    #[arg(long)]
    pub window: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub listen: SocketAddr,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Data set directory, e.g. out/smaller
    pub dir: PathBuf,
    #[arg(long)]
    pub jobs: Option<usize>,
}

/// Parses `4..10`, `4..=10` or `4,5,7`.
pub fn parse_k_values(s: &str) -> Result<Vec<usize>, String> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let lo: usize = a.trim().parse().map_err(|_| format!("bad K range {s:?}"))?;
        let hi: usize = b.trim().parse().map_err(|_| format!("bad K range {s:?}"))?;
        if lo > hi {
            return Err(format!("empty K range {s:?}"));
        }
        return Ok((lo..=hi).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| format!("bad K value {t:?}")))
        .collect()
}
