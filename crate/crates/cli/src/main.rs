use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use toric_nbm::config::RunConfig;
use toric_nbm::decoder::{Pipeline, Variant};
use toric_nbm::nbp::{self, WeightKind, WeightSet};
use toric_nbm::sim::{self, PointConfig};
use toric_nbm::toric::{build_edge_classes, MatrixKind, ToricCode};
use toric_nbm::{DepolarizingChannel, Error, Result, Syndrome};

/// Toric-code decoding with neural belief-matching.
#[derive(Parser)]
#[command(name = "toric-nbm", version)]
struct Cli {
    /// TOML run configuration; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Monte Carlo / training worker threads (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write the check matrices, logicals and edge-class map of a code.
    Codegen {
        #[arg(long)]
        d: usize,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Decode one standard-matrix syndrome given as hex.
    Decode(DecodeArgs),
    /// Train message weights.
    Train(TrainArgs),
    /// Expand convolutional weights onto another lattice size.
    Transfer {
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        target_d: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate the logical error rate at one grid point.
    Simulate(SimulateArgs),
    /// Run a (d, epsilon, variant) grid into a CSV file.
    Sweep(SweepArgs),
    /// Merge sweep CSVs into plot-data files.
    Report {
        /// Sweep CSV files.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SecondStage {
    Matching,
    None,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightsSource {
    Posterior,
    Prior,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    d: usize,
    /// Syndrome of the standard matrix, hex, four bits per digit, MSB first.
    #[arg(long)]
    syndrome: String,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// Decoder variant; derived from the other flags when omitted.
    #[arg(long)]
    variant: Option<Variant>,
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SecondStage::Matching)]
    second_stage: SecondStage,
    /// `prior` skips BP and matches with channel-prior weights.
    #[arg(long, value_enum, default_value_t = WeightsSource::Posterior)]
    weights_source: WeightsSource,
    #[arg(long)]
    bp_iterations: Option<usize>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, value_enum)]
    matrix: Option<MatrixArg>,
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    /// Unrolled BP iterations T.
    #[arg(long)]
    iterations: Option<usize>,
    /// Share one weight set across all iterations.
    #[arg(long)]
    shared: bool,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Training error rate(s); several values train on a mixture.
    #[arg(long, num_args = 1..)]
    epsilon: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
    /// `cross-entropy`, `commutation` or `combined`.
    #[arg(long)]
    loss: Option<nbp::LossKind>,
    /// Weight of the commutation term in the combined loss.
    #[arg(long)]
    commutation_weight: Option<f64>,
    #[arg(long)]
    out: PathBuf,
    /// Loss trace and config echo (JSON).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MatrixArg {
    Standard,
    Overcomplete,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Dense,
    Conv,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    variant: Option<Variant>,
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    target_failures: Option<u64>,
    #[arg(long)]
    max_shots: Option<u64>,
    #[arg(long)]
    bp_iterations: Option<usize>,
    /// CSV output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, num_args = 1..)]
    d: Option<Vec<usize>>,
    #[arg(long, num_args = 1..)]
    epsilon: Option<Vec<f64>>,
    #[arg(long, num_args = 1..)]
    variant: Option<Vec<Variant>>,
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    target_failures: Option<u64>,
    #[arg(long)]
    max_shots: Option<u64>,
    #[arg(long)]
    bp_iterations: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p).map_err(|e| match e {
            Error::Io(io) => Error::Config(format!("{}: {io}", p.display())),
            e => e,
        })?,
        None => RunConfig::default(),
    };
    if cli.workers.is_some() {
        cfg.workers = cli.workers;
    }
    match cli.cmd {
        Cmd::Codegen { d, out } => codegen(d, &out),
        Cmd::Decode(a) => decode(a),
        Cmd::Train(a) => train(a, cfg),
        Cmd::Transfer { weights, target_d, out } => {
            let w = WeightSet::<f64>::load(&weights)?;
            let target = ToricCode::new(target_d)?;
            w.transfer(&target)?.save(&out)
        }
        Cmd::Simulate(a) => simulate(a, cfg),
        Cmd::Sweep(a) => sweep(a, cfg),
        Cmd::Report { inputs, out_dir } => {
            let mut rows = Vec::new();
            for p in &inputs {
                rows.extend(sim::read_csv(p)?);
            }
            for p in sim::emit_plot_data(&rows, &out_dir)? {
                println!("{}", p.display());
            }
            Ok(())
        }
    }
}

fn codegen(d: usize, out: &Path) -> Result<()> {
    let code = ToricCode::new(d)?;
    let report = toric_nbm::toric::validate(&code);
    if !report.passed() {
        return Err(Error::Invariant(report.to_string()));
    }
    fs::create_dir_all(out)?;
    code.standard()
        .write_text(fs::File::create(out.join(format!("h_std_d{d}.txt")))?)?;
    code.overcomplete()
        .write_text(fs::File::create(out.join(format!("h_oc_d{d}.txt")))?)?;
    let mut f = fs::File::create(out.join(format!("logicals_d{d}.txt")))?;
    for l in code.logicals() {
        writeln!(f, "{l}")?;
    }
    if d >= 3 {
        let classes = build_edge_classes(&code)?;
        let mut f = fs::File::create(out.join(format!("edge_classes_d{d}.txt")))?;
        for j in 0..code.overcomplete().num_rows() {
            let row: Vec<String> = classes.row_classes(j).iter().map(|c| c.to_string()).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
    }
    Ok(())
}

fn decode(a: DecodeArgs) -> Result<()> {
    let code = Arc::new(ToricCode::new(a.d)?);
    let s = Syndrome::from_hex(&a.syndrome, code.standard().num_rows())?;
    let weights = a.weights.as_ref().map(WeightSet::<f64>::load).transpose()?;
    let matching = matches!(a.second_stage, SecondStage::Matching);
    let variant = match (a.variant, a.weights_source, &weights) {
        (Some(v), _, _) => v,
        (None, WeightsSource::Prior, _) => Variant::Mwpm,
        (None, _, None) => if matching { Variant::BpMatch } else { Variant::Bp },
        (None, _, Some(w)) => match (w.matrix, w.kind, matching) {
            (MatrixKind::Standard, _, true) => Variant::NbpMatch,
            (MatrixKind::Standard, _, false) => Variant::Nbp,
            (_, WeightKind::Conv, true) => Variant::ConvRnbpMatch,
            (_, WeightKind::Conv, false) => Variant::ConvRnbp,
            (_, _, true) => Variant::RnbpMatch,
            (_, _, false) => Variant::Rnbp,
        },
    };
    let ch = DepolarizingChannel::new(a.epsilon)?;
    let pipe = Pipeline::new(code, variant, ch, weights.as_ref(), a.bp_iterations)?;
    let out = pipe.decoder()?.decode(&s)?;
    println!("variant: {variant}");
    println!("correction: {}", out.correction);
    println!("converged: {}", out.converged);
    println!("iterations: {}", out.bp_iterations);
    println!("second_stage: {}", out.stage2);
    Ok(())
}

fn train(a: TrainArgs, mut cfg: RunConfig) -> Result<()> {
    if let Some(d) = a.d {
        cfg.train_code.d = d;
    }
    if let Some(m) = a.matrix {
        cfg.train_code.matrix = match m {
            MatrixArg::Standard => MatrixKind::Standard,
            MatrixArg::Overcomplete => MatrixKind::Overcomplete,
        };
    }
    let t = &mut cfg.train;
    if let Some(k) = a.kind {
        t.kind = match k {
            KindArg::Dense => WeightKind::Dense,
            KindArg::Conv => WeightKind::Conv,
        };
    }
    t.shared |= a.shared;
    set(&mut t.iterations, a.iterations);
    set(&mut t.steps, a.steps);
    set(&mut t.batch_size, a.batch_size);
    set(&mut t.learning_rate, a.learning_rate);
    set(&mut t.epsilons, a.epsilon);
    set(&mut t.seed, a.seed);
    set(&mut t.loss, a.loss);
    set(&mut t.commutation_weight, a.commutation_weight);
    cfg.validate()?;
    let code = ToricCode::new(cfg.train_code.d)?;
    let (w, report) = toric_nbm::with_workers(cfg.workers(), || {
        nbp::train::<f64>(&code, cfg.train_code.matrix, &cfg.train)
    })??;
    w.save(&a.out)?;
    if let Some(p) = a.report {
        fs::write(p, report.to_json() + "\n")?;
    }
    let k = report.losses.len();
    if k > 0 {
        println!(
            "loss: first {:.6}, last {:.6}; checksum {}",
            report.losses[0],
            report.losses[k - 1],
            report.checksum
        );
    }
    Ok(())
}

fn simulate(a: SimulateArgs, mut cfg: RunConfig) -> Result<()> {
    let s = &mut cfg.sweep;
    if let Some(d) = a.d {
        s.distances = vec![d];
    }
    if let Some(e) = a.epsilon {
        s.epsilons = vec![e];
    }
    if let Some(v) = a.variant {
        s.variants = vec![v];
    }
    if a.weights.is_some() {
        s.weights_file = a.weights;
    }
    set(&mut s.seed, a.seed);
    set(&mut s.stop.target_failures, a.target_failures);
    set(&mut s.stop.max_shots, a.max_shots);
    if a.bp_iterations.is_some() {
        s.bp_iterations = a.bp_iterations;
    }
    cfg.validate()?;
    let s = &cfg.sweep;
    let point = PointConfig {
        d: s.distances[0],
        epsilon: s.epsilons[0],
        variant: s.variants[0],
        stop: s.stop,
        seed: s.seed,
        bp_iterations: s.bp_iterations,
        weights_file: match (&s.weights_file, s.variants[0].needs_weights()) {
            (Some(p), true) => p.display().to_string(),
            _ => String::new(),
        },
    };
    let weights = match (&s.weights_file, point.variant.needs_weights()) {
        (Some(p), true) => Some(WeightSet::<f64>::load(p)?),
        _ => None,
    };
    let row = sim::run_point(&point, weights.as_ref(), cfg.workers())?;
    match a.out {
        Some(p) => {
            sim::write_csv(&p, &[row])?;
            echo_config(&p, &cfg)
        }
        None => sim::write_rows(std::io::stdout().lock(), &[row]),
    }
}

fn sweep(a: SweepArgs, mut cfg: RunConfig) -> Result<()> {
    let s = &mut cfg.sweep;
    set(&mut s.distances, a.d);
    set(&mut s.epsilons, a.epsilon);
    set(&mut s.variants, a.variant);
    if a.weights.is_some() {
        s.weights_file = a.weights;
    }
    set(&mut s.seed, a.seed);
    set(&mut s.stop.target_failures, a.target_failures);
    set(&mut s.stop.max_shots, a.max_shots);
    if a.bp_iterations.is_some() {
        s.bp_iterations = a.bp_iterations;
    }
    cfg.validate()?;
    echo_config(&a.out, &cfg)?;
    let rows = sim::sweep(&cfg.sweep, cfg.workers(), &a.out)?;
    let bad: Vec<&str> = rows.iter().filter(|r| !r.is_ok()).map(|r| r.status.as_str()).collect();
    if let Some(first) = bad.first() {
        return Err(Error::Invariant(format!("{} grid point(s) failed; first: {first}", bad.len())));
    }
    Ok(())
}

fn set<T>(dst: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *dst = v;
    }
}

/// Writes the effective configuration next to an output artifact.
fn echo_config(out: &Path, cfg: &RunConfig) -> Result<()> {
    let mut p = out.as_os_str().to_owned();
    p.push(".config.toml");
    fs::write(PathBuf::from(p), cfg.to_toml())?;
    Ok(())
}
