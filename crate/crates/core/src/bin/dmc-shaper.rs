use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dmc_shaper_core::commands::{
    self, BsaReport, CapacityReport, ExhaustiveReport, MaskChoice, SdpReport, SweepMethod,
    SweepSpec,
};
use dmc_shaper_core::{
    blahut_arimoto, bsa_select, build_quantized_mimo, exhaustive_select, paper_channel_matrix,
    sdp_select, BsaConfig, ComplexChannelMatrix, Criterion, DmcChannel, Error, LinkConfig, Result,
    RoundingConfig, RoundingMethod, SdpConfig, SdpMethod, SnrPoint,
};

#[derive(Parser)]
#[command(
    name = "dmc-shaper",
    version,
    about = "Input subset selection for discrete memoryless channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Channel construction.
    #[command(subcommand)]
    Channel(ChannelCmd),
    /// Channel capacity.
    #[command(subcommand)]
    Capacity(CapacityCmd),
    /// Subset selection.
    #[command(subcommand)]
    Select(SelectCmd),
    /// Rates of selected subsets over an SNR grid, as CSV.
    Sweep(SweepArgs),
    /// Monte-Carlo BER of the LDPC-coded link, as CSV.
    CodedBer(CodedBerArgs),
    /// Check a channel file; exits with 1 when it has problems.
    Validate { file: PathBuf },
}

#[derive(Subcommand)]
enum ChannelCmd {
    /// Build the one-bit quantized MIMO channel and write it as channel JSON.
    BuildMimo {
        #[command(flatten)]
        h: MatrixSource,
        /// SNR list in dB: values and start:stop:step ranges, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        snr_db: String,
        /// Output file for a single SNR (stdout when absent).
        #[arg(long, conflicts_with = "out_dir")]
        out: Option<PathBuf>,
        /// Output directory, one `channel_<snr>dB.json` per SNR.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CapacityCmd {
    /// Blahut-Arimoto capacity.
    Ba {
        #[command(flatten)]
        src: ChannelSource,
        /// Stop when the upper and lower capacity bounds are this close (bits).
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = commands::BA_MAX_ITER)]
        max_iter: usize,
    },
}

#[derive(Subcommand)]
enum SelectCmd {
    /// Cutoff-rate selection by semidefinite relaxation and rounding.
    Sdp {
        #[command(flatten)]
        src: ChannelSource,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 5000)]
        max_iter: usize,
        #[arg(long, default_value_t = 100)]
        nrand: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Rounding: randomized or eigen.
        #[arg(long, default_value = "randomized")]
        method: RoundingMethod,
        /// SDP solver: ipm or admm.
        #[arg(long, default_value = "ipm")]
        solver: SdpMethod,
    },
    /// SER selection by binary switching.
    Bsa {
        #[command(flatten)]
        src: ChannelSource,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Exact optimum by enumerating all subsets.
    Exhaustive {
        #[command(flatten)]
        src: ChannelSource,
        #[arg(long)]
        k: usize,
        /// rate, ser or cutoff.
        #[arg(long, default_value = "cutoff")]
        criterion: Criterion,
    },
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    h: OptionalMatrixSource,
    /// Sweep a fixed channel file (one row) instead of a MIMO matrix.
    #[arg(long, conflicts_with_all = ["h_matrix", "paper"])]
    channel: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<String>,
    /// Subset sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    k: Vec<usize>,
    /// Methods among sdp, bsa, exhaustive, full; comma separated.
    #[arg(long, value_delimiter = ',', default_value = "sdp")]
    methods: Vec<SweepMethod>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    #[arg(long, default_value_t = 100)]
    nrand: usize,
    #[arg(long, default_value = "ipm")]
    solver: SdpMethod,
    /// Blahut-Arimoto bound gap (bits).
    #[arg(long, default_value_t = 1e-6)]
    ba_tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CodedBerArgs {
    #[command(flatten)]
    h: MatrixSource,
    /// Subset file (JSON index list or select output) or `full`.
    #[arg(long, conflicts_with = "select_k")]
    mask: Option<String>,
    /// Select a K-subset by SDP at every SNR point instead of a fixed mask.
    #[arg(long)]
    select_k: Option<usize>,
    #[arg(long, default_value_t = 100)]
    nrand: usize,
    #[arg(long, allow_hyphen_values = true)]
    snr_db: String,
    #[arg(long, default_value_t = 250)]
    n: usize,
    #[arg(long, default_value_t = 2.5)]
    total_rate: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Further code seeds; each draws its own code and a pooled row is added.
    #[arg(long, value_delimiter = ',')]
    extra_seeds: Vec<u64>,
    #[arg(long, default_value_t = 50)]
    min_frame_errors: usize,
    #[arg(long, default_value_t = 1_000_000)]
    max_frames: usize,
    #[arg(long, default_value_t = 100)]
    bp_max_iter: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct MatrixSource {
    /// Channel matrix JSON `{"re": [[..]], "im": [[..]]}`.
    #[arg(long)]
    h_matrix: Option<PathBuf>,
    /// Use the bundled 4x4 example matrix.
    #[arg(long)]
    paper: bool,
}

#[derive(Args)]
#[group(multiple = false)]
struct OptionalMatrixSource {
    #[arg(long)]
    h_matrix: Option<PathBuf>,
    #[arg(long)]
    paper: bool,
}

#[derive(Args)]
struct ChannelSource {
    /// Channel JSON `{"M", "L", "P"}`.
    #[arg(long, conflicts_with_all = ["h_matrix", "paper"])]
    channel: Option<PathBuf>,
    #[arg(long)]
    h_matrix: Option<PathBuf>,
    #[arg(long, conflicts_with = "h_matrix")]
    paper: bool,
    /// Single SNR in dB, with --h-matrix or --paper.
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<f64>,
}

fn load_matrix(path: Option<&Path>, paper: bool) -> Result<Option<ComplexChannelMatrix>> {
    match (path, paper) {
        (Some(p), _) => Ok(Some(
            ComplexChannelMatrix::load(p).map_err(|e| with_path(p, e))?,
        )),
        (None, true) => Ok(Some(paper_channel_matrix())),
        (None, false) => Ok(None),
    }
}

fn with_path(path: &Path, e: Error) -> Error {
    match e {
        Error::Json(j) => Error::InvalidParameter(format!("{}: {j}", path.display())),
        Error::Io(io) => Error::InvalidParameter(format!("{}: {io}", path.display())),
        other => other,
    }
}

impl MatrixSource {
    fn load(&self) -> Result<ComplexChannelMatrix> {
        Ok(load_matrix(self.h_matrix.as_deref(), self.paper)?.expect("clap requires a source"))
    }
}

impl ChannelSource {
    fn load(&self) -> Result<DmcChannel> {
        if let Some(p) = &self.channel {
            return DmcChannel::load(p).map_err(|e| with_path(p, e));
        }
        let h = load_matrix(self.h_matrix.as_deref(), self.paper)?.ok_or_else(|| {
            Error::InvalidParameter("one of --channel, --h-matrix or --paper is required".into())
        })?;
        let db = self
            .snr_db
            .ok_or_else(|| Error::InvalidParameter("--snr-db is required with a matrix".into()))?;
        build_quantized_mimo(&h, SnrPoint::from_db(db)?)
    }
}

/// Writes to stdout; a closed pipe on the reading side is not an error.
fn stdout(text: &str) -> Result<()> {
    let mut lock = std::io::stdout().lock();
    match lock.write_all(text.as_bytes()).and_then(|()| lock.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => stdout(text),
    }
}

fn json<T: serde::Serialize>(value: &T) -> Result<()> {
    stdout(&(serde_json::to_string_pretty(value)? + "\n"))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Channel(ChannelCmd::BuildMimo {
            h,
            snr_db,
            out,
            out_dir,
        }) => {
            let h = h.load()?;
            let snrs = commands::parse_snr_list(&snr_db)?;
            match (&out_dir, snrs.as_slice()) {
                (Some(dir), _) => {
                    std::fs::create_dir_all(dir)?;
                    for &db in &snrs {
                        let ch = build_quantized_mimo(&h, SnrPoint::from_db(db)?)?;
                        ch.save(dir.join(format!("channel_{db}dB.json")))?;
                    }
                }
                (None, [db]) => {
                    let ch = build_quantized_mimo(&h, SnrPoint::from_db(*db)?)?;
                    emit(out.as_deref(), &(ch.to_json()? + "\n"))?;
                }
                (None, _) => {
                    return Err(Error::InvalidParameter(
                        "several SNR values need --out-dir".into(),
                    ))
                }
            }
        }
        Command::Capacity(CapacityCmd::Ba { src, tol, max_iter }) => {
            let cap = blahut_arimoto(&src.load()?, tol, max_iter)?;
            json(&CapacityReport {
                capacity_bits: cap.bits,
                upper_bits: cap.upper_bits,
                iterations: cap.iterations,
                distribution: cap.distribution.probs().to_vec(),
            })?;
        }
        Command::Select(SelectCmd::Sdp {
            src,
            k,
            tol,
            max_iter,
            nrand,
            seed,
            method,
            solver,
        }) => {
            let cfg = SdpConfig {
                tol,
                max_iter,
                method: solver,
                ..SdpConfig::default()
            };
            let rounding = RoundingConfig {
                n_rand: nrand,
                seed,
                method,
            };
            let sel = sdp_select(&src.load()?, k, &cfg, &rounding)?;
            json(&SdpReport::new(&sel, &cfg))?;
        }
        Command::Select(SelectCmd::Bsa {
            src,
            k,
            restarts,
            seed,
        }) => {
            let cfg = BsaConfig::new(k).with_restarts(restarts).with_seed(seed);
            let out = bsa_select(&src.load()?, &cfg)?;
            json(&BsaReport {
                mask: out.mask.indices(),
                ser: out.ser,
                truncated: out.truncated,
                best_restart: out.best_restart,
            })?;
        }
        Command::Select(SelectCmd::Exhaustive { src, k, criterion }) => {
            let (mask, value) = exhaustive_select(&src.load()?, k, criterion)?;
            json(&ExhaustiveReport {
                mask: mask.indices(),
                criterion: criterion.to_string(),
                value,
            })?;
        }
        Command::Sweep(a) => {
            let snrs = a
                .snr_db
                .as_deref()
                .map(commands::parse_snr_list)
                .transpose()?;
            let mut spec = SweepSpec::new(snrs.unwrap_or_default(), a.k, a.methods, a.seed);
            spec.restarts = a.restarts;
            spec.n_rand = a.nrand;
            spec.sdp.method = a.solver;
            spec.ba_tol = a.ba_tol;
            let rows = match (&a.channel, load_matrix(a.h.h_matrix.as_deref(), a.h.paper)?) {
                (Some(p), _) => {
                    let ch = DmcChannel::load(p).map_err(|e| with_path(p, e))?;
                    commands::run_sweep_channel(&ch, &spec)?
                }
                (None, Some(h)) => commands::run_sweep_mimo(&h, &spec)?,
                (None, None) => {
                    return Err(Error::InvalidParameter(
                        "one of --channel, --h-matrix or --paper is required".into(),
                    ))
                }
            };
            emit(a.out.as_deref(), &commands::sweep_csv(&rows, &spec))?;
        }
        Command::CodedBer(a) => {
            let h = a.h.load()?;
            let m = 1usize << (2 * h.n_tx());
            let choice = match (&a.mask, a.select_k) {
                (_, Some(k)) => MaskChoice::SelectSdp {
                    k,
                    n_rand: a.nrand,
                    seed: a.seed,
                },
                (Some(s), None) if s == "full" => MaskChoice::Full,
                (Some(s), None) => MaskChoice::Fixed(
                    commands::load_mask(s, m).map_err(|e| with_path(Path::new(s), e))?,
                ),
                (None, None) => {
                    return Err(Error::InvalidParameter(
                        "--mask or --select-k is required".into(),
                    ))
                }
            };
            let cfg = LinkConfig {
                n: a.n,
                total_rate: a.total_rate,
                bp_max_iter: a.bp_max_iter,
                min_frame_errors: a.min_frame_errors,
                max_frames: a.max_frames,
                ..LinkConfig::default()
            };
            let mut seeds = vec![a.seed];
            seeds.extend(&a.extra_seeds);
            let snrs = commands::parse_snr_list(&a.snr_db)?;
            let records = commands::coded_ber(&h, &choice, &snrs, &cfg, &seeds)?;
            emit(
                a.out.as_deref(),
                &commands::coded_ber_csv(&records, &choice),
            )?;
        }
        Command::Validate { file } => {
            let issues = commands::validate_channel_file(&file).map_err(|e| with_path(&file, e))?;
            if issues.is_empty() {
                stdout(&format!("{}: ok\n", file.display()))?;
            } else {
                for issue in &issues {
                    eprintln!("{}: {issue}", file.display());
                }
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn configure_threads() {
    let Ok(value) = std::env::var("DMC_SHAPER_THREADS") else {
        return;
    };
    match value.parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
            {
                log::warn!("could not size the thread pool: {e}");
            }
        }
        _ => log::warn!("ignoring DMC_SHAPER_THREADS={value}"),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    configure_threads();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
