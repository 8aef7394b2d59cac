use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "twistor",
    version,
    about = "Exact intersection theory and instanton moduli on twistor spaces over #n(-CP2)"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a `.tws` script.
    #[command(allow_negative_numbers = true)]
    Eval(EvalArgs),
    /// Moduli dimension -chi(End(V)(-S)) of a pulled-back bundle.
    #[command(allow_negative_numbers = true)]
    Dim(DimArgs),
    /// chi(End(V)(-S)) and chi(End(V)(-Sbar)) through either route.
    #[command(allow_negative_numbers = true)]
    Chi(ChiArgs),
    /// Check the S/Sbar equality over a grid, or an identity set.
    #[command(allow_negative_numbers = true)]
    Verify(VerifyArgs),
    /// Evaluate every grid point and list the cases.
    #[command(allow_negative_numbers = true)]
    Sweep(SweepArgs),
    /// Dimensions over a range of one parameter.
    #[command(allow_negative_numbers = true)]
    Table(TableArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Paper,
    Normalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Modes {
    Paper,
    Normalized,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Routes {
    Standard,
    Paper,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Divisors {
    S,
    Sbar,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum APolicyArg {
    /// every a in {0,1}^n
    All,
    /// a = (1, .., 1)
    Ones,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BPolicyArg {
    Zero,
    All,
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Identity {
    Canonical,
    Intersections,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Vary {
    K,
    R,
    N,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Machine-readable output.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SpaceArgs {
    /// Number of -CP2 summands.
    #[arg(long, default_value_t = 0)]
    pub n: usize,
    /// Comma-separated 0/1 entries; defaults to all ones.
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub a: Option<IntList>,
    #[arg(long, value_enum, default_value_t = Mode::Paper)]
    pub c2_mode: Mode,
    /// Override e(M) in the paper-mode c2(P).
    #[arg(long)]
    pub euler: Option<i64>,
    /// Override sgn(M) in the paper-mode c2(P).
    #[arg(long)]
    pub signature: Option<i64>,
    /// Use relations with a wrong point value (negative control).
    #[arg(long)]
    pub corrupt_relation: bool,
}

#[derive(Debug, Args)]
pub struct BundleArgs {
    #[arg(long, default_value_t = 2)]
    pub rank: u32,
    /// c1(V) = sum b_i e_i, comma-separated; defaults to zero.
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub c1: Option<IntList>,
    /// c2(V) = k F.
    #[arg(long, default_value_t = 1)]
    pub k: i64,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub script: PathBuf,
    #[arg(long)]
    pub corrupt_relation: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DimArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    #[command(flatten)]
    pub bundle: BundleArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ChiArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    #[command(flatten)]
    pub bundle: BundleArgs,
    #[arg(long, value_enum, default_value_t = Routes::Both)]
    pub route: Routes,
    #[arg(long, value_enum, default_value_t = Divisors::Both)]
    pub divisor: Divisors,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 0)]
    pub n_min: usize,
    /// Defaults to 5 for sweeps and 8 for identities.
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub r_min: u32,
    #[arg(long, default_value_t = 3)]
    pub r_max: u32,
    #[arg(long, default_value_t = 0)]
    pub k_min: i64,
    #[arg(long, default_value_t = 6)]
    pub k_max: i64,
    #[arg(long, value_enum, default_value_t = Routes::Both)]
    pub route: Routes,
    #[arg(long, value_enum, default_value_t = Modes::Both)]
    pub c2_mode: Modes,
    #[arg(long, value_enum, default_value_t = APolicyArg::All)]
    pub a_policy: APolicyArg,
    /// c1 vectors b in {-1,0,1}^n.
    #[arg(long, value_enum, default_value_t = BPolicyArg::Zero)]
    pub b: BPolicyArg,
    /// Number of sampled b-vectors per space with `--b sample`.
    #[arg(long, default_value_t = 16)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use relations with a wrong point value (negative control).
    #[arg(long)]
    pub corrupt_relation: bool,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("check").required(true).args(["lemma", "identity"])))]
pub struct VerifyArgs {
    /// The S/Sbar equality; the only accepted value is `2.5`.
    #[arg(long)]
    pub lemma: Option<String>,
    #[arg(long, value_enum)]
    pub identity: Option<Identity>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// The parameter to vary; give it once.
    #[arg(long, value_enum, required = true, action = clap::ArgAction::Append)]
    pub vary: Vec<Vary>,
    #[arg(long)]
    pub from: i64,
    #[arg(long)]
    pub to: i64,
    #[command(flatten)]
    pub space: SpaceArgs,
    #[command(flatten)]
    pub bundle: BundleArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntList(pub Vec<i64>);

fn parse_list(text: &str) -> Result<IntList, String> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(IntList(Vec::new()));
    }
    text.split(',')
        .map(|item| {
            item.trim()
                .parse::<i64>()
                .map_err(|_| format!("`{}` is not an integer", item.trim()))
        })
        .collect::<Result<_, _>>()
        .map(IntList)
}
