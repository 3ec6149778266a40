use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "gdn", about = "Graph deconvolutional networks: imputation, generation and spectral diagnostics")]
#[command(disable_version_flag = true)]
pub struct Cli {
    /// Worker threads; 1 forces fully sequential execution.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Increase log verbosity (stderr). Repeat for more detail.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    /// Print the version and checkpoint format version.
    #[arg(long)]
    pub version: bool,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Feature imputation benchmark.
    Impute(ImputeArgs),
    /// RMSE against missing rate.
    Sweep(SweepArgs),
    /// Variational graph generation with and without the feature decoder.
    Generate(GenerateArgs),
    /// Noise amplification of inverse kernels.
    Noise(NoiseArgs),
    /// Graph spectra, kernel curves and high-frequency retention.
    Spectra(SpectraArgs),
    /// Finite-difference check of every analytic gradient.
    Gradcheck(GradcheckArgs),
    /// Polynomial filters against exact eigendecomposition.
    OracleCheck(OracleCheckArgs),
}

/// Data and training flags shared by `impute` and `sweep`.
#[derive(Debug, Args)]
pub struct BenchmarkFlags {
    /// Edge list (`u v` per line).
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Feature CSV, `nan` for undefined cells.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Dataset defaults: ciao, douban, cora, citeseer, amaphoto, amacomp, synthetic.
    #[arg(long)]
    pub profile: Option<String>,
    /// JSON config overriding the profile.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma-separated methods: mean, knn, svd, gdn, inverse_only, gcn_decoder, gala.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    /// Seeds as a list (`0,1,2`) or inclusive range (`0-4`).
    #[arg(long, value_parser = parse_seeds)]
    pub seeds: Option<Seeds>,
    #[arg(long)]
    pub hidden1: Option<usize>,
    #[arg(long)]
    pub hidden2: Option<usize>,
    /// Wavelet-stage width (defaults to the decoder input width).
    #[arg(long)]
    pub wavelet: Option<usize>,
    /// Truncation order of the decoder filters.
    #[arg(long)]
    pub order: Option<usize>,
    /// Wavelet scale.
    #[arg(long)]
    pub scale: Option<f64>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// DropEdge keep probability for the encoder graph.
    #[arg(long)]
    pub keep_prob: Option<f64>,
    #[arg(long)]
    pub knn_k: Option<usize>,
    #[arg(long)]
    pub svd_rank: Option<usize>,
    /// Seed of the synthetic dataset (synthetic profile without data files).
    #[arg(long, default_value_t = 0)]
    pub data_seed: u64,
}

#[derive(Debug, Args)]
pub struct ImputeArgs {
    #[command(flatten)]
    pub common: BenchmarkFlags,
    /// Held-out mask CSV (1 = test entry); overrides the random mask.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    #[arg(long)]
    pub missing_rate: Option<f64>,
    /// JSON report path.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-seed CSV path (`method,seed,rmse`).
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Trains the first neural method on the first seed's mask and saves a checkpoint.
    #[arg(long)]
    pub save_model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: BenchmarkFlags,
    /// Comma-separated missing rates.
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.3,0.5,0.7")]
    pub rates: Vec<f64>,
    /// CSV path (`missing_rate,method,rmse`).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OnOff {
    On,
    Off,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Block-format file, a directory of TU-format files, or `synthetic`.
    #[arg(long, default_value = "synthetic")]
    pub dataset: String,
    /// Dataset name inside a TU-format directory.
    #[arg(long, default_value = "MUTAG")]
    pub tu_name: String,
    /// Number of surrogate graphs when `--dataset synthetic`.
    #[arg(long, default_value_t = 188)]
    pub graphs: usize,
    #[arg(long, default_value_t = 0)]
    pub data_seed: u64,
    #[arg(long, value_enum, default_value = "on")]
    pub feature_term: OnOff,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub latent: Option<usize>,
    /// Single seed (shorthand for `--seeds k`).
    #[arg(long, conflicts_with = "seeds")]
    pub seed: Option<u64>,
    #[arg(long, value_parser = parse_seeds)]
    pub seeds: Option<Seeds>,
    #[arg(long)]
    pub out: PathBuf,
    /// Writes the loaded dataset in block format.
    #[arg(long)]
    pub export: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    /// Edge list; mutually exclusive with `--preset`.
    #[arg(long, conflicts_with = "preset")]
    pub graph: Option<PathBuf>,
    /// Built-in graph: k2 (single edge) or p3 (3-node path).
    #[arg(long)]
    pub preset: Option<String>,
    /// Comma-separated kernels: exact-inverse, truncated-inverse:K, identity.
    #[arg(long, value_delimiter = ',', default_value = "exact-inverse")]
    pub kernel: Vec<String>,
    /// Comma-separated activations: identity, leaky_relu[:a], tanh, sigmoid.
    #[arg(long, value_delimiter = ',', default_value = "identity")]
    pub activation: Vec<String>,
    #[arg(long, default_value_t = 0.1)]
    pub sigma: f64,
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectraArgs {
    /// Edge list of the graph whose spectrum is used.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Feature CSV holding the signal; defaults to a unit impulse on node 0.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Feature column used as the signal.
    #[arg(long, default_value_t = 0)]
    pub column: usize,
    /// Writes kernel responses on a λ grid instead of a signal spectrum.
    #[arg(long, conflicts_with_all = ["graph", "features", "retention"])]
    pub kernel_curves: bool,
    /// Grid step for `--kernel-curves`.
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    /// Trains GDN and GCN decoders on a mixed-frequency signal and reports
    /// the spectral energy they keep above λ = 1.
    #[arg(long, conflicts_with_all = ["graph", "features"])]
    pub retention: bool,
    #[arg(long, value_parser = parse_seeds, default_value = "0-4")]
    pub seeds: Seeds,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[arg(long, default_value_t = 16)]
    pub nodes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleCheckArgs {
    /// Largest graph size.
    #[arg(long, default_value_t = 64)]
    pub nodes: usize,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Seeds(pub Vec<u64>);

pub fn parse_seeds(s: &str) -> Result<Seeds, String> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('-') {
        let a: u64 = a.trim().parse().map_err(|_| format!("bad seed range '{s}'"))?;
        let b: u64 = b.trim().parse().map_err(|_| format!("bad seed range '{s}'"))?;
        if a > b {
            return Err(format!("empty seed range '{s}'"));
        }
        return Ok(Seeds((a..=b).collect()));
    }
    let seeds = s
        .split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|_| format!("bad seed '{t}'")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Seeds(seeds))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists_and_ranges() {
        assert_eq!(parse_seeds("0-4").unwrap().0, vec![0, 1, 2, 3, 4]);
        assert_eq!(parse_seeds("3,1").unwrap().0, vec![3, 1]);
        assert_eq!(parse_seeds("7").unwrap().0, vec![7]);
        assert!(parse_seeds("4-1").is_err());
        assert!(parse_seeds("a").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
