//! Command-line entry point: construct codes, analyze Tanner graphs, build
//! CN clusterings, train the learned scheduler, decode, and run Monte Carlo
//! benches. Every invocation is deterministic given its arguments and
//! seeds; file-producing subcommands drop a `<out>.meta.json` sidecar with
//! the effective configuration.
//!
//! Exit codes: 0 success, 1 invalid input, 2 runtime failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ldpc_sched::analysis::{ccs, enumerate_cycles, girth};
use ldpc_sched::bp::LlrVector;
use ldpc_sched::clustering::{
    cluster_contiguous, cluster_cycle_optimized, cluster_exhaustive, cluster_random, Clustering,
};
use ldpc_sched::rl::{
    calibrate_theta, load_qtable, save_qtable, train, QTable, Quantizer, TrainConfig,
};
use ldpc_sched::sim::{
    run_bench, sample_training_set, BenchConfig, BenchResult, ChannelConfig, DecoderSpec,
};
use ldpc_sched::tanner::{
    build_ab_code, build_regular_code, lift_code, parse_alist, syndrome, write_alist,
    ParityCheckMatrix,
};

#[derive(Parser)]
#[command(name = "ldpc-sched", version, about = "LDPC decoding with learned CN scheduling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a parity-check matrix and emit it as alist text.
    Construct(ConstructArgs),
    /// Print girth, short-cycle counts, and optional CCS reports.
    Analyze(AnalyzeArgs),
    /// Partition the check nodes into clusters and emit them as JSON.
    Cluster(ClusterArgs),
    /// Train the clustered Q-learning scheduler and save the Q-table.
    Train(TrainArgs),
    /// Decode channel observations (or an LLR file) with one decoder.
    Decode(DecodeArgs),
    /// Monte Carlo BER / message-count comparison across decoders.
    Bench(BenchArgs),
}

#[derive(Args)]
struct ConstructArgs {
    /// Array-based code H(gamma, p): two values GAMMA P (p prime).
    #[arg(long, num_args = 2, value_names = ["GAMMA", "P"], conflicts_with = "regular")]
    ab: Option<Vec<usize>>,
    /// Random (j,k)-regular code: two values J K (requires --n).
    #[arg(long, num_args = 2, value_names = ["J", "K"], requires = "n")]
    regular: Option<Vec<usize>>,
    /// Block length for --regular.
    #[arg(long)]
    n: Option<usize>,
    /// Minimum girth for --regular (4, 6 or 8).
    #[arg(long, default_value_t = 6)]
    min_girth: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Lift the constructed base by this factor with random circulants.
    #[arg(long)]
    lift: Option<usize>,
    #[arg(long, default_value_t = 0)]
    lift_seed: u64,
    /// Output alist path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    alist: PathBuf,
    /// JSON file with a list of CN-index lists; prints one CCS report each.
    #[arg(long)]
    clusters: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    Contiguous,
    Random,
    Cycle,
    Exhaustive,
}

#[derive(Args)]
struct ClusterArgs {
    #[arg(long)]
    alist: PathBuf,
    #[arg(long, value_enum)]
    strategy: Strategy,
    #[arg(long)]
    z: usize,
    /// Cycle length for --strategy cycle.
    #[arg(long, default_value_t = 6)]
    kappa: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Subset-enumeration budget for --strategy exhaustive.
    #[arg(long, default_value_t = 2_000_000)]
    budget: u128,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    alist: PathBuf,
    /// Clustering JSON produced by `cluster`.
    #[arg(long)]
    clusters: PathBuf,
    /// Training SNR (Eb/N0, dB).
    #[arg(long)]
    snr_db: f64,
    /// Code rate for the SNR conversion; defaults to 1 - m/n.
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 0.9)]
    beta: f64,
    #[arg(long, default_value_t = 0.6)]
    epsilon: f64,
    #[arg(long, default_value_t = 25)]
    ell_max: usize,
    /// Quantizer levels M.
    #[arg(long, default_value_t = 4)]
    m_levels: usize,
    /// Quantizer step; calibrated from the channel when omitted.
    #[arg(long)]
    theta: Option<f64>,
    /// Calibration sample count for the default theta.
    #[arg(long, default_value_t = 1000)]
    calib_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum DecoderKind {
    Flooding,
    Ns,
    Mabns,
}

impl DecoderKind {
    fn label(self) -> &'static str {
        match self {
            DecoderKind::Flooding => "flooding",
            DecoderKind::Ns => "ns",
            DecoderKind::Mabns => "mabns",
        }
    }
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    alist: PathBuf,
    #[arg(long, value_enum)]
    decoder: DecoderKind,
    /// Q-table path (required for --decoder mabns).
    #[arg(long)]
    qtable: Option<PathBuf>,
    /// Whitespace-separated channel LLRs, exactly n values.
    #[arg(long, conflicts_with_all = ["snr_db", "trials"])]
    llr_file: Option<PathBuf>,
    /// Simulate all-zero-codeword transmissions at this SNR instead.
    #[arg(long)]
    snr_db: Option<f64>,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Flooding iteration budget.
    #[arg(long, default_value_t = 25)]
    flood_iters: u64,
    /// Scheduling budget for sequential decoders; defaults to flood_iters * m.
    #[arg(long)]
    budget: Option<u64>,
    /// JSON report path; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    alist: PathBuf,
    /// Comma-separated decoder list, e.g. flooding,ns,mabns.
    #[arg(long, value_delimiter = ',', value_enum, required = true)]
    decoders: Vec<DecoderKind>,
    #[arg(long)]
    qtable: Option<PathBuf>,
    /// Comma-separated SNR grid in dB.
    #[arg(long, value_delimiter = ',', required = true)]
    snrs: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 25)]
    flood_iters: u64,
    /// Scheduling budget for sequential decoders; defaults to flood_iters * m.
    #[arg(long)]
    budget: Option<u64>,
    /// Transmit without noise (smoke runs).
    #[arg(long, default_value_t = false)]
    noiseless: bool,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

enum CliError {
    Core(ldpc_sched::Error),
    Usage(String),
    Io(PathBuf, std::io::Error),
    Json(PathBuf, serde_json::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Io(path, e) => write!(f, "{}: {e}", path.display()),
            CliError::Json(path, e) => write!(f, "{}: {e}", path.display()),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_validation() => 1,
            CliError::Core(_) => 2,
            CliError::Usage(_) => 1,
            CliError::Io(..) => 2,
            CliError::Json(..) => 1,
        }
    }
}

impl From<ldpc_sched::Error> for CliError {
    fn from(e: ldpc_sched::Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn write_file(path: &Path, data: &[u8]) -> CliResult<()> {
    fs::write(path, data).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn load_matrix(path: &Path) -> CliResult<ParityCheckMatrix> {
    Ok(parse_alist(&read_file(path)?)?)
}

fn nominal_rate(h: &ParityCheckMatrix) -> f64 {
    1.0 - h.cn_count() as f64 / h.vn_count() as f64
}

/// Writes `<out>.meta.json` next to an output file.
fn write_sidecar(out: &Path, meta: &serde_json::Value) -> CliResult<()> {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    let path = out.with_file_name(name);
    let text = serde_json::to_string_pretty(meta).expect("serializable metadata");
    write_file(&path, text.as_bytes())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Construct(args) => cmd_construct(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Cluster(args) => cmd_cluster(args),
        Command::Train(args) => cmd_train(args),
        Command::Decode(args) => cmd_decode(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn cmd_construct(args: ConstructArgs) -> CliResult<()> {
    let base = match (&args.ab, &args.regular) {
        (Some(ab), None) => build_ab_code(ab[0], ab[1])?,
        (None, Some(jk)) => {
            let n = args.n.expect("clap enforces --n");
            build_regular_code(jk[0], jk[1], n, args.seed, args.min_girth)?
        }
        _ => return Err(usage("exactly one of --ab or --regular is required")),
    };
    let h = match args.lift {
        Some(factor) => lift_code(&base, factor, args.lift_seed)?,
        None => base,
    };
    let text = write_alist(&h);
    match &args.out {
        Some(path) => {
            write_file(path, text.as_bytes())?;
            eprintln!(
                "wrote {} ({} x {}, fingerprint {:#018x})",
                path.display(),
                h.cn_count(),
                h.vn_count(),
                h.fingerprint()
            );
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_analyze(args: AnalyzeArgs) -> CliResult<()> {
    let h = load_matrix(&args.alist)?;
    let g = h.graph();
    println!(
        "code: {} CNs, {} VNs, {} edges, fingerprint {:#018x}",
        h.cn_count(),
        h.vn_count(),
        h.edge_count(),
        h.fingerprint()
    );
    match girth(&g) {
        Some(len) => println!("girth: {len}"),
        None => println!("girth: none (forest)"),
    }
    for kappa in [4usize, 6, 8] {
        let count = enumerate_cycles(&g, kappa)?.len();
        println!("cycles[{kappa}]: {count}");
    }
    if let Some(path) = &args.clusters {
        let clusters: Vec<Vec<usize>> = serde_json::from_str(&read_file(path)?)
            .map_err(|e| CliError::Json(path.clone(), e))?;
        for (u, cluster) in clusters.iter().enumerate() {
            let report = ccs(&g, cluster)?;
            println!(
                "cluster {u}: z={} A={} B={} edges_in={} edges_out={} zeta={}",
                cluster.len(),
                report.a,
                report.b,
                report.edges_in,
                report.edges_out,
                report.zeta
            );
        }
    }
    Ok(())
}

fn cmd_cluster(args: ClusterArgs) -> CliResult<()> {
    let h = load_matrix(&args.alist)?;
    let g = h.graph();
    let mut fell_back = false;
    let clustering = match args.strategy {
        Strategy::Contiguous => cluster_contiguous(h.cn_count(), args.z)?,
        Strategy::Random => cluster_random(h.cn_count(), args.z, args.seed)?,
        Strategy::Cycle => {
            let out = cluster_cycle_optimized(&g, args.z, args.kappa, args.seed)?;
            fell_back = out.fell_back_to_random;
            if fell_back {
                eprintln!("no {}-cycles found; fell back to random clustering", args.kappa);
            }
            out.clustering
        }
        Strategy::Exhaustive => cluster_exhaustive(&g, args.z, args.budget)?,
    };
    let json = serde_json::to_string_pretty(&clustering).expect("serializable clustering");
    write_file(&args.out, json.as_bytes())?;
    write_sidecar(
        &args.out,
        &json!({
            "command": "cluster",
            "alist": args.alist.display().to_string(),
            "strategy": match args.strategy {
                Strategy::Contiguous => "contiguous",
                Strategy::Random => "random",
                Strategy::Cycle => "cycle",
                Strategy::Exhaustive => "exhaustive",
            },
            "z": args.z,
            "kappa": args.kappa,
            "seed": args.seed,
            "budget": args.budget.to_string(),
            "fell_back_to_random": fell_back,
            "code_fingerprint": format!("{:#018x}", h.fingerprint()),
            "output": args.out.display().to_string(),
        }),
    )?;
    eprintln!(
        "wrote {} ({} clusters of nominal size {})",
        args.out.display(),
        clustering.cluster_count(),
        clustering.z()
    );
    Ok(())
}

fn load_clustering(path: &Path) -> CliResult<Clustering> {
    serde_json::from_str::<Clustering>(&read_file(path)?)
        .map_err(|e| CliError::Json(path.to_path_buf(), e))
}

fn cmd_train(args: TrainArgs) -> CliResult<()> {
    let h = load_matrix(&args.alist)?;
    let clustering = load_clustering(&args.clusters)?;
    let rate = args.rate.unwrap_or_else(|| nominal_rate(&h));
    let channel = ChannelConfig::new(args.snr_db, rate, args.seed)?;

    let theta = match args.theta {
        Some(theta) => theta,
        None => {
            // Calibrate on a dedicated substream block so training samples
            // stay untouched.
            let calib = ChannelConfig::new(args.snr_db, rate, args.seed ^ 0x5EED_CA11B)?;
            calibrate_theta(&h, sample_training_set(&h, &calib, args.calib_samples))?
        }
    };
    let quantizer = Quantizer::symmetric_uniform(args.m_levels, theta)?;
    let config = TrainConfig {
        alpha: args.alpha,
        beta: args.beta,
        epsilon: args.epsilon,
        ell_max: args.ell_max,
        sample_count: args.samples,
        seed: args.seed,
    };
    let samples = sample_training_set(&h, &channel, args.samples);
    let qtable = train(&h, &clustering, samples, &quantizer, &config)?;
    write_file(&args.out, &save_qtable(&qtable))?;
    write_sidecar(
        &args.out,
        &json!({
            "command": "train",
            "alist": args.alist.display().to_string(),
            "clusters": args.clusters.display().to_string(),
            "snr_db": args.snr_db,
            "rate": rate,
            "theta": theta,
            "m_levels": args.m_levels,
            "train_config": config,
            "code_fingerprint": format!("{:#018x}", h.fingerprint()),
            "output": args.out.display().to_string(),
        }),
    )?;
    eprintln!(
        "wrote {} ({} clusters, {} action values, theta {theta:.4})",
        args.out.display(),
        qtable.cluster_count(),
        qtable.entry_count()
    );
    Ok(())
}

fn load_qtable_file(path: &Path) -> CliResult<QTable> {
    let bytes = fs::read(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    Ok(load_qtable(&bytes)?)
}

fn parse_llr_file(path: &Path, n: usize) -> CliResult<LlrVector> {
    let text = read_file(path)?;
    let mut llrs = Vec::new();
    for tok in text.split_whitespace() {
        let v: f64 = tok
            .parse()
            .map_err(|_| usage(format!("{}: invalid LLR value {tok:?}", path.display())))?;
        llrs.push(v);
    }
    if llrs.len() != n {
        return Err(usage(format!(
            "{}: expected {n} LLRs, found {}",
            path.display(),
            llrs.len()
        )));
    }
    Ok(llrs)
}

fn cmd_decode(args: DecodeArgs) -> CliResult<()> {
    if matches!(args.decoder, DecoderKind::Mabns) && args.qtable.is_none() {
        return Err(usage("--decoder mabns requires --qtable"));
    }
    if args.llr_file.is_none() && args.snr_db.is_none() {
        return Err(usage("one of --llr-file or --snr-db is required"));
    }
    let h = load_matrix(&args.alist)?;
    let budget = args.budget.unwrap_or(args.flood_iters * h.cn_count() as u64);
    let qtable = match (args.decoder, &args.qtable) {
        (DecoderKind::Mabns, Some(path)) => Some(load_qtable_file(path)?),
        _ => None,
    };
    let spec = match args.decoder {
        DecoderKind::Flooding => DecoderSpec::Flooding {
            max_iters: args.flood_iters,
        },
        DecoderKind::Ns => DecoderSpec::NodeWise { budget },
        DecoderKind::Mabns => DecoderSpec::MabNs {
            qtable: qtable.as_ref().expect("checked above"),
            budget,
        },
    };
    let rate = args.rate.unwrap_or_else(|| nominal_rate(&h));

    let trials = if let Some(path) = &args.llr_file {
        let llr = parse_llr_file(path, h.vn_count())?;
        vec![decode_one(&h, &spec, &llr)?]
    } else if let Some(snr_db) = args.snr_db {
        let channel = ChannelConfig::new(snr_db, rate, args.seed)?;
        let zeros = vec![0u8; h.vn_count()];
        let mut out = Vec::with_capacity(args.trials as usize);
        for trial in 0..args.trials {
            let (_, llr) = ldpc_sched::sim::transmit(&zeros, &channel, trial)?;
            let mut report = decode_one(&h, &spec, &llr)?;
            report["bit_errors"] =
                json!(report["xhat_weight"].as_u64().expect("set by decode_one"));
            out.push(report);
        }
        out
    } else {
        return Err(usage("one of --llr-file or --snr-db is required"));
    };

    let report = json!({
        "command": "decode",
        "alist": args.alist.display().to_string(),
        "decoder": args.decoder.label(),
        "qtable": args.qtable.as_ref().map(|p| p.display().to_string()),
        "snr_db": args.snr_db,
        "rate": rate,
        "seed": args.seed,
        "flood_iters": args.flood_iters,
        "budget": budget,
        "code_fingerprint": format!("{:#018x}", h.fingerprint()),
        "trials": trials,
    });
    let text = serde_json::to_string_pretty(&report).expect("serializable report");
    match &args.out {
        Some(path) => {
            write_file(path, text.as_bytes())?;
            write_sidecar(path, &report)?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn decode_one(
    h: &ParityCheckMatrix,
    spec: &DecoderSpec<'_>,
    llr: &[f64],
) -> CliResult<serde_json::Value> {
    let res = match spec {
        DecoderSpec::Flooding { max_iters } => ldpc_sched::bp::decode_flooding(h, llr, *max_iters)?,
        DecoderSpec::NodeWise { budget } => ldpc_sched::bp::decode_ns(h, llr, *budget)?,
        DecoderSpec::MabNs { qtable, budget } => {
            ldpc_sched::rl::decode_mabns(h, llr, qtable, *budget)?
        }
    };
    debug_assert!(!res.converged || syndrome(h, &res.xhat)?.iter().all(|&s| s == 0));
    Ok(json!({
        "converged": res.converged,
        "xhat_weight": res.xhat.iter().filter(|&&b| b != 0).count(),
        "cn2vn_messages": res.cn2vn_messages,
        "vn2cn_messages": res.vn2cn_messages,
        "schedulings": res.schedulings,
    }))
}

fn cmd_bench(args: BenchArgs) -> CliResult<()> {
    let needs_qtable = args.decoders.iter().any(|d| matches!(d, DecoderKind::Mabns));
    if needs_qtable && args.qtable.is_none() {
        return Err(usage("--decoders mabns requires --qtable"));
    }
    let h = load_matrix(&args.alist)?;
    let budget = args.budget.unwrap_or(args.flood_iters * h.cn_count() as u64);
    let rate = args.rate.unwrap_or_else(|| nominal_rate(&h));
    let qtable = match (&args.qtable, needs_qtable) {
        (Some(path), true) => Some(load_qtable_file(path)?),
        _ => None,
    };
    let cfg = BenchConfig {
        snrs_db: args.snrs.clone(),
        trials: args.trials,
        rate,
        seed: args.seed,
        noiseless: args.noiseless,
    };
    let mut results = Vec::new();
    for kind in &args.decoders {
        let spec = match kind {
            DecoderKind::Flooding => DecoderSpec::Flooding {
                max_iters: args.flood_iters,
            },
            DecoderKind::Ns => DecoderSpec::NodeWise { budget },
            DecoderKind::Mabns => DecoderSpec::MabNs {
                qtable: qtable.as_ref().expect("checked above"),
                budget,
            },
        };
        results.push(run_bench(&h, &spec, kind.label(), &cfg)?);
    }
    let merged = BenchResult::merged(results);
    write_file(&args.out, merged.to_csv().as_bytes())?;
    write_sidecar(
        &args.out,
        &json!({
            "command": "bench",
            "alist": args.alist.display().to_string(),
            "decoders": args.decoders.iter().map(|d| d.label()).collect::<Vec<_>>(),
            "qtable": args.qtable.as_ref().map(|p| p.display().to_string()),
            "bench_config": cfg,
            "flood_iters": args.flood_iters,
            "sequential_budget": budget,
            "rate_convention": "nominal design rate 1 - m/n unless --rate given",
            "code_fingerprint": format!("{:#018x}", h.fingerprint()),
            "output": args.out.display().to_string(),
        }),
    )?;
    eprintln!("wrote {} ({} rows)", args.out.display(), merged.rows.len());
    Ok(())
}
