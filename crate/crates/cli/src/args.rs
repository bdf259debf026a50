//! Command-line surface. Every flag can also be set through an `LSIS_*`
//! environment variable; explicit flags win.

use std::net::SocketAddr;
use std::path::PathBuf;

use bigdecimal::BigDecimal;
use clap::{Args, Parser, Subcommand, ValueEnum};

use lsis_core::swap_math::{Averaging, ImpactModel};
use lsis_core::Address;

pub const ZERO_POOL: &str = "0x0000000000000000000000000000000000000000";

#[derive(Debug, Parser)]
#[command(name = "lsis", version = crate::BUILD_ID, about = "Rank concentrated-liquidity LPs by systemic importance")]
pub struct Cli {
    /// Worker threads for scoring (default: available parallelism).
    #[arg(long, global = true, env = "LSIS_THREADS")]
    pub threads: Option<usize>,

    /// Log filter, e.g. `info` or `lsis_core=debug`.
    #[arg(long, global = true, env = "LSIS_LOG", default_value = "warn")]
    pub log: String,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate and normalize an event JSONL file.
    Ingest {
        #[command(flatten)]
        input: InputArgs,
        /// Output directory for the normalized events and profile.
        #[arg(long, env = "LSIS_OUT_DIR", default_value = ".")]
        out_dir: PathBuf,
    },
    /// Rank owners by time-weighted liquidity.
    Rank {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        etwl: EtwlArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Counterfactual impact scoring for the top-k owners.
    Analyze {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        etwl: EtwlArgs,
        #[command(flatten)]
        swaps: SwapArgs,
        #[command(flatten)]
        classifier: ClassifierArgs,
        #[command(flatten)]
        baselines: BaselineArgs,
        /// Read the swap set from JSONL instead of generating it.
        #[arg(long, env = "LSIS_SWAPS")]
        swaps_file: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Relabel an existing report CSV under new classifier thresholds.
    Classify {
        /// Report CSV written by `analyze`.
        #[arg(long, env = "LSIS_REPORTS")]
        reports: PathBuf,
        #[command(flatten)]
        classifier: ClassifierArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Ranking stability across decay rates.
    SweepLambda {
        #[command(flatten)]
        input: InputArgs,
        /// First decay rate.
        #[arg(long, env = "LSIS_SWEEP_FROM", default_value = "-0.5", allow_hyphen_values = true)]
        from: BigDecimal,
        /// Last decay rate (inclusive when reached exactly).
        #[arg(long, env = "LSIS_SWEEP_TO", default_value = "-5.0", allow_hyphen_values = true)]
        to: BigDecimal,
        /// Positive spacing between rates.
        #[arg(long, env = "LSIS_SWEEP_STEP", default_value = "0.5")]
        step: BigDecimal,
        /// Top-k compared against the default-rate ranking.
        #[arg(long, env = "LSIS_K", default_value_t = 100)]
        k: usize,
        /// Count open positions up to the last block.
        #[arg(long, env = "LSIS_CLOSE_AT_MAX_BLOCK")]
        close_at_max_block: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the burn gate over HTTP.
    Serve {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        etwl: EtwlArgs,
        #[command(flatten)]
        swaps: SwapArgs,
        #[command(flatten)]
        classifier: ClassifierArgs,
        #[command(flatten)]
        baselines: BaselineArgs,
        #[command(flatten)]
        gate: GateArgs,
        /// Serve rankings from this report CSV instead of computing them.
        #[arg(long, env = "LSIS_REPORTS")]
        reports: Option<PathBuf>,
        #[arg(long, env = "LSIS_BIND", default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
        /// Directory for the run manifest.
        #[arg(long, env = "LSIS_OUT_DIR", default_value = ".")]
        out_dir: PathBuf,
    },
    /// Write the synthetic swap set as JSONL.
    ExportSwaps {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        swaps: SwapArgs,
        /// Output directory.
        #[arg(long, env = "LSIS_OUT_DIR", default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Event JSONL file.
    #[arg(long, env = "LSIS_INPUT")]
    pub input: PathBuf,
    /// Pool address recorded with the dataset.
    #[arg(long, env = "LSIS_POOL", default_value = ZERO_POOL)]
    pub pool: Address,
    /// Fail on the first invalid line instead of skipping it.
    #[arg(long, env = "LSIS_STRICT")]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output directory (created if missing).
    #[arg(long, env = "LSIS_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, env = "LSIS_FORMAT", value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct EtwlArgs {
    /// Number of top owners to keep.
    #[arg(long, env = "LSIS_K", default_value_t = 100)]
    pub k: usize,
    /// Decay rate; negative favors recent liquidity.
    #[arg(long, env = "LSIS_LAMBDA", default_value = "-1.5", allow_hyphen_values = true)]
    pub lambda: BigDecimal,
    /// Count open positions up to the last block.
    #[arg(long, env = "LSIS_CLOSE_AT_MAX_BLOCK")]
    pub close_at_max_block: bool,
}

#[derive(Debug, Args)]
pub struct SwapArgs {
    /// Swap sizes as `start,end,step` fractions of tick capacity.
    #[arg(long, env = "LSIS_GRID", default_value = "0.0001,0.01,0.001")]
    pub grid: String,
    #[arg(long, env = "LSIS_SEED", default_value_t = 42)]
    pub seed: u64,
    #[arg(long, env = "LSIS_MODEL", value_enum, default_value_t = ModelArg::Symmetric)]
    pub model: ModelArg,
    #[arg(long, env = "LSIS_AVERAGING", value_enum, default_value_t = AveragingArg::Magnitude)]
    pub averaging: AveragingArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    /// Price moves down for token0 in and token1 in alike.
    Symmetric,
    /// Protocol-direction price updates.
    Canonical,
}

impl From<ModelArg> for ImpactModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Symmetric => ImpactModel::Symmetric,
            ModelArg::Canonical => ImpactModel::Canonical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AveragingArg {
    Magnitude,
    Signed,
}

impl From<AveragingArg> for Averaging {
    fn from(a: AveragingArg) -> Self {
        match a {
            AveragingArg::Magnitude => Averaging::Magnitude,
            AveragingArg::Signed => Averaging::Signed,
        }
    }
}

#[derive(Debug, Args)]
pub struct ClassifierArgs {
    /// Scores below this count as no impact.
    #[arg(long, env = "LSIS_LSIS_EPSILON", default_value = "0.001")]
    pub lsis_epsilon: BigDecimal,
    /// Scores at or above this are significant.
    #[arg(long, env = "LSIS_LSIS_SIGNIFICANT", default_value = "0.01")]
    pub lsis_significant: BigDecimal,
    /// Scores at or above this mark a linchpin.
    #[arg(long, env = "LSIS_LSIS_LINCHPIN", default_value = "4")]
    pub lsis_linchpin: BigDecimal,
    /// Ranks at or below this count as active.
    #[arg(long, env = "LSIS_ACTIVE_RANK_MAX", default_value_t = 500)]
    pub active_rank_max: usize,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    /// Peak-share cutoff for the share baseline, as a fraction.
    #[arg(long, env = "LSIS_B2_SHARE", default_value = "0.01")]
    pub b2_share: BigDecimal,
    /// Keep only this top percentage of reports by score, in (0, 100].
    #[arg(long, env = "LSIS_TOP_PERCENTILE")]
    pub top_percentile: Option<BigDecimal>,
}

#[derive(Debug, Args)]
pub struct GateArgs {
    /// Degradation at or below this is allowed.
    #[arg(long, env = "LSIS_GATE_ALLOW", default_value = "0.005")]
    pub allow: BigDecimal,
    /// Degradation above this is denied; between allow and this, suspended.
    #[arg(long, env = "LSIS_GATE_DENY", default_value = "0.05")]
    pub deny: BigDecimal,
    /// Minimum post-burn depth for an Allow.
    #[arg(long, env = "LSIS_GATE_MIN_DEPTH", default_value = "0")]
    pub min_depth: String,
    /// Half-width of the depth window in ticks.
    #[arg(long, env = "LSIS_GATE_DEPTH_WINDOW", default_value_t = 100)]
    pub depth_window: i32,
}
