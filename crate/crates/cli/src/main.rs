//! `rdplab`: tables for the circle coders, scalar staggered quantizers and reference curves.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rdp_lab::circle::{
    one_shot_frontier, simulate_circle, staggered_circle_rd, verify_two_cell_optimality, CircleScheme,
};
use rdp_lab::frontier::{log_grid, rdp_curve};
use rdp_lab::mc::{McPlan, DEFAULT_CHUNK};
use rdp_lab::simlab::{
    fmt_g9, load_config, run_experiment, scalar_params, write_csv, write_json, OutputRow,
};
use rdp_lab::sources::SourceModel;
use rdp_lab::stagger::{build_boundaries, exact_code_distribution, exact_mse, simulate_pipeline, StaggeredSpec};
use rdp_lab::Result;

#[derive(Parser, Debug)]
#[command(name = "rdplab", version, about = "Rate-distortion-perception tables at perfect perceptual quality")]
struct Cli {
    /// Emit a JSON array instead of CSV.
    #[arg(long, global = true)]
    json: bool,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct McArgs {
    /// Number of Monte Carlo samples.
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    /// Seed of the counter-based generator.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Samples per parallel work unit; a multiple of 1024.
    #[arg(long, default_value_t = DEFAULT_CHUNK)]
    chunk_size: usize,
}

impl McArgs {
    fn plan(&self) -> McPlan {
        McPlan::new(self.samples, self.seed).with_chunk_size(self.chunk_size)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form (rate, distortion) of the staggered circle quantizer.
    CircleClosedForm {
        /// Cells per quantizer.
        #[arg(long = "L")]
        levels: u32,
        /// Number of staggered quantizers.
        #[arg(long = "N")]
        offsets: u32,
    },
    /// Simulate a circle coder.
    CircleSimulate {
        /// Cells per quantizer.
        #[arg(long = "L")]
        levels: u32,
        /// Number of staggered quantizers.
        #[arg(long = "N", required_unless_present = "dithered", conflicts_with = "dithered")]
        offsets: Option<u32>,
        /// Use the dithered quantizer instead of the staggered one.
        #[arg(long)]
        dithered: bool,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Extreme points of the one-shot frontier for L = 1..=Lmax, with hull membership.
    OneShotFrontier {
        /// Largest number of cells.
        #[arg(long = "Lmax")]
        max_levels: u32,
    },
    /// Perfect-perception rate-distortion curve on a log-spaced λ grid.
    RdpFrontier {
        #[arg(long, default_value_t = 1e-3)]
        lambda_min: f64,
        #[arg(long, default_value_t = 1e3)]
        lambda_max: f64,
        #[arg(long, default_value_t = 50)]
        points: usize,
    },
    /// Simulate the scalar staggered pipeline.
    ScalarSimulate {
        #[command(flatten)]
        scalar: ScalarArgs,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Exact per-quantizer, staggered and dithered rates for a scalar source.
    ScalarExact {
        #[command(flatten)]
        scalar: ScalarArgs,
    },
    /// Grid search over the split of two adjacent cells.
    TwoCell {
        /// Combined width of the two cells, in (0, 1].
        #[arg(long)]
        r: f64,
        #[arg(long)]
        lambda: f64,
        /// Number of interior grid points.
        #[arg(long, default_value_t = 100_000)]
        grid: usize,
    },
    /// Run an experiment config file.
    Sweep {
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
    },
}

#[derive(Args, Debug)]
struct ScalarArgs {
    /// `uniform:lo,hi`, `gauss:mu,sigma` or `circle`.
    #[arg(long)]
    source: SourceModel,
    /// Quantizer step.
    #[arg(long)]
    delta: f64,
    /// Number of staggered quantizers.
    #[arg(long, default_value_t = 1)]
    offsets: u32,
    /// Use the decoder intervals exactly as printed, one step to the left.
    #[arg(long)]
    literal_paper_indexing: bool,
}

impl ScalarArgs {
    fn spec(&self) -> Result<StaggeredSpec> {
        Ok(StaggeredSpec::new(self.source, self.delta, self.offsets)?
            .with_literal_paper_indexing(self.literal_paper_indexing))
    }
}

fn exact_row(scheme: &str, params: String, rate: f64, distortion: f64) -> OutputRow {
    OutputRow {
        scheme: scheme.into(),
        params,
        rate_bits: rate,
        distortion,
        perception_ks: f64::NAN,
        provenance: "exact-enumeration".into(),
        seed: 0,
        n_samples: 0,
    }
}

fn rows_for(command: &Command) -> Result<(Vec<OutputRow>, Option<PathBuf>)> {
    let rows = match command {
        Command::CircleClosedForm { levels, offsets } => {
            CircleScheme::staggered(*levels, *offsets)?;
            let p = staggered_circle_rd(*levels, *offsets);
            vec![OutputRow::from_point("circle-staggered", format!("L={levels};N={offsets}"), &p)]
        }
        Command::CircleSimulate { levels, offsets, dithered, mc } => {
            let (scheme, name, params) = match offsets {
                Some(n) if !dithered => {
                    (CircleScheme::staggered(*levels, *n)?, "circle-staggered", format!("L={levels};N={n}"))
                }
                _ => (CircleScheme::dithered(*levels)?, "circle-dithered", format!("L={levels}")),
            };
            vec![OutputRow::from_result(name, params, &simulate_circle(&scheme, &mc.plan())?)]
        }
        Command::OneShotFrontier { max_levels } => {
            let f = one_shot_frontier(*max_levels)?;
            f.points
                .iter()
                .enumerate()
                .map(|(i, p)| OutputRow::from_point("one-shot", format!("L={};on_hull={}", i + 1, f.on_hull(i)), p))
                .collect()
        }
        Command::RdpFrontier { lambda_min, lambda_max, points } => {
            let grid = log_grid(*lambda_min, *lambda_max, *points)?;
            rdp_curve(&grid)?
                .iter()
                .zip(&grid)
                .map(|(p, l)| OutputRow::from_point("rdp-frontier", format!("lambda={}", fmt_g9(*l)), p))
                .collect()
        }
        Command::ScalarSimulate { scalar, mc } => {
            let spec = scalar.spec()?;
            vec![OutputRow::from_result("scalar-staggered", scalar_params(&spec), &simulate_pipeline(&spec, &mc.plan())?)]
        }
        Command::ScalarExact { scalar } => {
            let spec = scalar.spec()?;
            let dist = exact_code_distribution(&spec)?;
            let mse = exact_mse(&build_boundaries(&spec)?)?;
            let base = scalar_params(&spec);
            let mut rows: Vec<OutputRow> = dist
                .per_quantizer_entropy_bits
                .iter()
                .enumerate()
                .map(|(n, &h)| exact_row("scalar-quantizer", format!("{base};n={n}"), h, f64::NAN))
                .collect();
            rows.push(exact_row("scalar-staggered", base.clone(), dist.staggered_rate_bits, mse));
            rows.push(exact_row(
                "scalar-dithered",
                format!("source={};delta={}", spec.source, fmt_g9(spec.step)),
                dist.dithered_rate_bits,
                dist.dithered_mse,
            ));
            rows
        }
        Command::TwoCell { r, lambda, grid } => {
            let rep = verify_two_cell_optimality(*r, *lambda, *grid)?;
            let params = format!(
                "r={};lambda={};grid={grid};optimum={};argmin={};argmax={};interior={};midpoint={}",
                fmt_g9(rep.r),
                fmt_g9(rep.lambda),
                fmt_g9(rep.optimum),
                fmt_g9(rep.argmin),
                fmt_g9(rep.argmax),
                rep.optimum_is_interior,
                rep.is_midpoint
            );
            vec![OutputRow {
                scheme: "two-cell".into(),
                params,
                rate_bits: f64::NAN,
                distortion: f64::NAN,
                perception_ks: f64::NAN,
                provenance: "grid-search".into(),
                seed: 0,
                n_samples: 0,
            }]
        }
        Command::Sweep { config } => {
            let cfg = load_config(config)?;
            return Ok((run_experiment(&cfg)?, cfg.out));
        }
    };
    Ok((rows, None))
}

fn run(cli: &Cli) -> Result<()> {
    let (rows, config_out) = rows_for(&cli.command)?;
    let sink: Box<dyn Write> = match cli.out.as_ref().or(config_out.as_ref()) {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    if cli.json {
        write_json(&rows, sink)
    } else {
        write_csv(&rows, sink)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
