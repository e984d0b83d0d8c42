use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use morphlat::experiment::{generate_synthetic, run_experiment, ConfigFile};
use morphlat::image_io::save_image_auto;

#[derive(Parser)]
#[command(
    name = "morphlat",
    version,
    about = "Color morphology under total orders and its irregularity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run operators x orders over the input images and write a report.
    Run(RunArgs),
    /// Write a deterministic synthetic test image.
    Synth(SynthArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration file; flags given here override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "input", num_args = 1..)]
    inputs: Vec<PathBuf>,
    /// Comma-separated subset of dilate,erode,open,close.
    #[arg(long)]
    operators: Option<String>,
    /// Comma-separated subset of tsp,lex,marginal.
    #[arg(long)]
    orders: Option<String>,
    /// Structuring element as <square|cross>:<odd size>.
    #[arg(long)]
    se: Option<String>,
    /// euclidean, manhattan or chebyshev.
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    emit_paths: bool,
    #[arg(long)]
    emit_images: bool,
    /// Seed for synthetic inputs (used when no --input is given).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// WIDTHxHEIGHT
    #[arg(long, default_value = "16x16")]
    size: String,
    #[arg(long, default_value_t = 32)]
    palette: usize,
    #[arg(long)]
    out: PathBuf,
}

const EXIT_CONFIG: u8 = 1;
const EXIT_PARTIAL: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => run(args),
        Command::Synth(args) => synth(args),
    }
}

fn run(args: RunArgs) -> ExitCode {
    let base = match &args.config {
        Some(path) => match ConfigFile::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_CONFIG);
            }
        },
        None => ConfigFile::default(),
    };
    let flags = ConfigFile {
        inputs: (!args.inputs.is_empty()).then_some(args.inputs),
        operators: args.operators.map(|s| vec![s]),
        orders: args.orders.map(|s| vec![s]),
        se: args.se,
        metric: args.metric,
        out: args.out,
        seed: args.seed,
        emit_images: args.emit_images.then_some(true),
        emit_paths: args.emit_paths.then_some(true),
        ..Default::default()
    };
    let config = match base.merge(flags).resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if config.out_dir.is_none() {
        eprintln!("error: no output directory (set --out or \"out\" in the config)");
        return ExitCode::from(EXIT_CONFIG);
    }

    let report = match run_experiment(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    let s = &report.summary;
    println!("rows: {}", report.rows.len());
    for o in &s.per_order {
        match o.mean_path_length {
            Some(p) => println!(
                "{:>8}: mean phi {:6.2}%  mean path length {:.4}",
                o.order, o.mean_phi_percent, p
            ),
            None => println!("{:>8}: mean phi {:6.2}%", o.order, o.mean_phi_percent),
        }
    }
    if s.paired_images > 0 {
        println!(
            "tsp path shorter than lex on {}/{} images; tsp more irregular on {} (image, operator) pairs",
            s.tsp_shorter_images,
            s.paired_images,
            s.tsp_more_irregular.len()
        );
    }
    for image in &s.heuristic_regressions {
        eprintln!("warning: tsp tour longer than lex tour on {image}");
    }
    if report.has_errors() {
        for e in &report.errors {
            eprintln!(
                "row failed: image={} operator={} order={}: {}",
                e.image,
                e.operator.as_deref().unwrap_or("-"),
                e.order.as_deref().unwrap_or("-"),
                e.message
            );
        }
        return ExitCode::from(EXIT_PARTIAL);
    }
    ExitCode::SUCCESS
}

fn synth(args: SynthArgs) -> ExitCode {
    let Some((w, h)) = args
        .size
        .split_once('x')
        .and_then(|(w, h)| Some((w.parse().ok()?, h.parse().ok()?)))
    else {
        eprintln!("error: --size must look like 16x16");
        return ExitCode::from(EXIT_CONFIG);
    };
    let result =
        generate_synthetic(args.seed, w, h, args.palette).and_then(|img| save_image_auto(&img, &args.out));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
