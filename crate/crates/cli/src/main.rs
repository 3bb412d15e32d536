mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or flag combinations. Exit code 2.
    Usage(String),
    /// Bad input data or I/O failure. Exit code 1.
    Data(scramblekit::Error),
}

impl From<scramblekit::Error> for CliError {
    fn from(e: scramblekit::Error) -> Self {
        match e {
            scramblekit::Error::Contract(msg) => CliError::Usage(msg),
            other => CliError::Data(other),
        }
    }
}

/// Block-scrambling image encryption, dataset export and jigsaw attack evaluation.
#[derive(Debug, Parser)]
#[command(name = "scramblekit", version)]
pub struct Cli {
    /// Config file of key=value lines (default: ./scramblekit.conf when present).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Augment and scramble a CIFAR-10 batch for one epoch and export it.
    EncryptDataset(EncryptDatasetArgs),
    /// Scramble a single PNG image with a key seed.
    EncryptImage(EncryptImageArgs),
    /// Descramble a single PNG image with a key seed.
    DecryptImage(DecryptImageArgs),
    /// Run the greedy jigsaw attack over several block sizes.
    Attack(AttackArgs),
    /// Write an original | encrypted montage.
    Preview(PreviewArgs),
}

#[derive(Debug, Args)]
pub struct BlockArgs {
    /// Block width in pixels [default: 8].
    #[arg(long)]
    bx: Option<usize>,
    /// Block height in pixels [default: 8].
    #[arg(long)]
    by: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SeedArg {
    /// Master seed for all key derivation.
    #[arg(long, env = "SCRAMBLEKIT_SEED", value_name = "U64")]
    master_seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct EncryptDatasetArgs {
    /// CIFAR-10 binary batch file(s), concatenated in order.
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Epoch index used for slot selection and augmentation [default: 0].
    #[arg(long)]
    epoch: Option<u64>,
    /// select: one key per image per epoch; expand: every image under all N keys [default: select].
    #[arg(long, value_parser = ["select", "expand"])]
    mode: Option<String>,
    /// train: training pipeline with GridMask; test: test pipeline with per-image test keys [default: train].
    #[arg(long, value_parser = ["train", "test"])]
    split: Option<String>,
    #[command(flatten)]
    block: BlockArgs,
    /// Keys per training image [default: 4].
    #[arg(long)]
    n_keys: Option<usize>,
    /// Export format [default: bin].
    #[arg(long, value_parser = ["bin", "png"])]
    format: Option<String>,
    #[command(flatten)]
    seed: SeedArg,
    /// Scramble only, no augmentation.
    #[arg(long)]
    no_augment: bool,
    /// Test split only: center crop and no flip.
    #[arg(long)]
    deterministic_test_crop: bool,
    /// Write the master seed and per-record keys into the manifest (testing only).
    #[arg(long)]
    include_keys: bool,
}

#[derive(Debug, Args)]
pub struct EncryptImageArgs {
    /// Lossless input image (PNG, 8-bit gray or RGB).
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Scramble key seed.
    #[arg(long, value_name = "U64")]
    seed: u64,
    #[command(flatten)]
    block: BlockArgs,
    /// Apply test-time augmentation (random crop with padding 4, random flip) first.
    #[arg(long)]
    augment: bool,
    /// With --augment: center crop and no flip.
    #[arg(long, requires = "augment")]
    deterministic_test_crop: bool,
}

#[derive(Debug, Args)]
pub struct DecryptImageArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Scramble key seed.
    #[arg(long, value_name = "U64")]
    seed: u64,
    #[command(flatten)]
    block: BlockArgs,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    /// Plain images to scramble and attack: CIFAR-10 batch files or PNGs.
    #[arg(long, num_args = 1.., conflicts_with = "export_dir")]
    input: Vec<PathBuf>,
    /// Attack an export whose manifest carries keys (written with --include-keys).
    #[arg(long)]
    export_dir: Option<PathBuf>,
    /// Comma-separated square block sizes [default: 4,8,16].
    #[arg(long, value_delimiter = ',')]
    block_sizes: Option<Vec<usize>>,
    /// Number of images to attack [default: 100].
    #[arg(long)]
    n_images: Option<usize>,
    #[command(flatten)]
    seed: SeedArg,
    /// Hand the attacker the key (sanity row, all metrics 1).
    #[arg(long)]
    with_key: bool,
    /// Apply training augmentation before scrambling.
    #[arg(long)]
    augment: bool,
    /// Also write the table to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PreviewArgs {
    /// CIFAR-10 batch files or PNG images.
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Montage output (PNG).
    #[arg(long)]
    out: PathBuf,
    /// Number of images in the montage [default: 4].
    #[arg(long)]
    n_images: Option<usize>,
    #[command(flatten)]
    block: BlockArgs,
    #[command(flatten)]
    seed: SeedArg,
    /// Apply test augmentation before scrambling.
    #[arg(long)]
    augment: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result =
        config::ConfigFile::load(cli.config.as_deref()).and_then(|conf| match &cli.command {
            Command::EncryptDataset(a) => commands::encrypt_dataset(a, &conf),
            Command::EncryptImage(a) => commands::encrypt_image(a, &conf),
            Command::DecryptImage(a) => commands::decrypt_image(a, &conf),
            Command::Attack(a) => commands::attack(a, &conf),
            Command::Preview(a) => commands::preview(a, &conf),
        });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Data(err)) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
