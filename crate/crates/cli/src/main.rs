use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use ppdcsk::experiment::{self, ExperimentConfig};
use ppdcsk::pipeline::EncryptionMode;

/// Chaos-keyed DCSK encryption of power packets: experiments and tools.
#[derive(Debug, Parser)]
#[command(name = "ppdcsk", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dump a chaotic sequence to chaos.csv.
    Chaos,
    /// DCSK-modulate a list of bipolar bits into modulated.csv/.bin.
    Modulate {
        /// Comma separated symbols, e.g. `+1,-1,1,0`.
        #[arg(long)]
        bits: String,
    },
    /// Demodulate a CSV or binary signal file into demodulated.json.
    Demodulate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Encrypt the configured packet into encrypted.json/.csv/.bin.
    Encrypt,
    /// Decrypt an encrypted.json file into decrypted.json.
    Decrypt {
        #[arg(long)]
        input: PathBuf,
    },
    /// Encrypt, pass through the channel and decrypt; writes roundtrip.json.
    Roundtrip,
    /// Eavesdrop with the guessed key; writes attack.json.
    Attack,
    /// Payload power against amplitude; writes table1.csv.
    Table1,
    /// Chip mean square and payload power against spreading factor; writes table23.csv.
    Table23,
    /// Data series for the chaos and spectrum figures.
    Figures,
}

/// Every flag overrides the matching field of the loaded (or default) config.
#[derive(Debug, Args)]
struct Overrides {
    /// JSON config file; missing fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Initial chaos value x1.
    #[arg(long, global = true, allow_hyphen_values = true)]
    x1: Option<f64>,
    /// Chip period in seconds.
    #[arg(long, global = true)]
    sample_period: Option<f64>,
    /// Spreading factor 2β (the key).
    #[arg(long, global = true)]
    spreading_factor: Option<usize>,
    #[arg(long, global = true)]
    preamble_bits: Option<usize>,
    #[arg(long, global = true)]
    source_bits: Option<usize>,
    #[arg(long, global = true)]
    dest_bits: Option<usize>,
    #[arg(long, global = true)]
    payload_bits: Option<usize>,
    #[arg(long, global = true)]
    footer_bits: Option<usize>,
    /// Source id written into the header.
    #[arg(long = "src", global = true)]
    source_id: Option<u64>,
    /// Destination address written into the header.
    #[arg(long = "dst", global = true)]
    dest_addr: Option<u64>,
    /// Packet voltage amplitude a.
    #[arg(long, global = true)]
    amplitude: Option<f64>,
    /// Noise spectral density N0.
    #[arg(long = "n0", global = true)]
    noise_spectral: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// `partial` or `whole`.
    #[arg(long, global = true)]
    mode: Option<EncryptionMode>,
    /// Bit periods of chaos consumed before the packet starts.
    #[arg(long, global = true)]
    lead_bits: Option<usize>,
    /// Amplitude sweep, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    a_values: Option<Vec<f64>>,
    /// Spreading factor sweep, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    spreading_values: Option<Vec<usize>>,
    /// Eavesdropper's guessed spreading factor.
    #[arg(long = "guess", global = true)]
    guessed_spreading_factor: Option<usize>,
    #[arg(long, global = true)]
    packets: Option<usize>,
    #[arg(long, global = true)]
    chaos_samples: Option<usize>,
    /// Second initial value for the divergence trace.
    #[arg(long = "divergence-x1", global = true, allow_hyphen_values = true)]
    divergence_initial_value: Option<f64>,
    #[arg(long, global = true)]
    divergence_samples: Option<usize>,
}

macro_rules! apply {
    ($src:expr, $($field:ident => $target:expr),* $(,)?) => {
        $(if let Some(v) = $src.$field.clone() { $target = v; })*
    };
}

impl Overrides {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path).map_err(at_flag("--config", path))?,
            None => ExperimentConfig::default(),
        };
        apply!(self,
            x1 => cfg.chaos.initial_value,
            sample_period => cfg.chaos.sample_period,
            spreading_factor => cfg.spreading_factor,
            preamble_bits => cfg.layout.preamble_bits,
            source_bits => cfg.layout.source_bits,
            dest_bits => cfg.layout.dest_bits,
            payload_bits => cfg.layout.payload_bits,
            footer_bits => cfg.layout.footer_bits,
            source_id => cfg.source_id,
            dest_addr => cfg.dest_addr,
            amplitude => cfg.amplitude,
            noise_spectral => cfg.channel.noise_spectral,
            seed => cfg.channel.seed,
            mode => cfg.mode,
            lead_bits => cfg.lead_bits,
            a_values => cfg.a_values,
            spreading_values => cfg.spreading_values,
            guessed_spreading_factor => cfg.guessed_spreading_factor,
            packets => cfg.packets,
            chaos_samples => cfg.chaos_samples,
            divergence_initial_value => cfg.divergence_initial_value,
            divergence_samples => cfg.divergence_samples,
        );
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Core errors already name their module and parameter; file errors get the
/// flag that supplied the path.
fn at_flag<'a>(flag: &'static str, path: &'a Path) -> impl FnOnce(ppdcsk::Error) -> anyhow::Error + 'a {
    move |err| match err {
        ppdcsk::Error::Io(_) | ppdcsk::Error::Json(_) => {
            anyhow::Error::new(err).context(format!("cli: {flag} {}", path.display()))
        }
        other => other.into(),
    }
}

fn run(cli: Cli) -> Result<Vec<PathBuf>> {
    let cfg = cli.overrides.resolve()?;
    let out: &Path = &cli.overrides.out;
    std::fs::create_dir_all(out).map_err(|e| at_flag("--out", out)(e.into()))?;
    let written = match &cli.command {
        Command::Chaos => experiment::write_chaos(&cfg, out),
        Command::Modulate { bits } => {
            let bits = experiment::parse_symbols(bits)?;
            experiment::write_modulate(&cfg, &bits, out)
        }
        Command::Demodulate { input } => {
            return experiment::write_demodulate(&cfg, input, out).map_err(at_flag("--input", input));
        }
        Command::Encrypt => experiment::write_encrypt(&cfg, out),
        Command::Decrypt { input } => {
            return experiment::write_decrypt(&cfg, input, out).map_err(at_flag("--input", input));
        }
        Command::Roundtrip => experiment::write_roundtrip(&cfg, out),
        Command::Attack => experiment::write_attack(&cfg, out),
        Command::Table1 => experiment::write_table1(&cfg, out),
        Command::Table23 => experiment::write_table23(&cfg, out),
        Command::Figures => experiment::write_figures(&cfg, out),
    };
    written.map_err(at_flag("--out", out))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
