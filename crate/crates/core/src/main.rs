use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bspapa::bench::{self, ExperimentFile, Overrides, Preset};
use bspapa::reference::equivalence_suite;
use bspapa::{build_weighted_regressor_direct, build_weighted_regressor_efficient};
use bspapa::{BlockPartition, GainVector, RegressorHistory};

/// Block-sparse proportionate affine projection experiments
#[derive(Parser, Debug)]
#[command(name = "bspapa", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run an experiment described by a JSON config file
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Run a built-in experiment (fig2: group-size sweep, fig3: algorithm comparison)
    Preset {
        name: Preset,
        #[command(flatten)]
        overrides: OverrideArgs,
        /// Print the preset as a config file instead of running it
        #[arg(long)]
        dump: bool,
    },
    /// Check the special-case reductions against textbook implementations
    EquivSuite {
        #[arg(long, default_value_t = 17)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
    },
    /// Print direct vs efficient multiplication counts for building G X
    CountMults {
        #[arg(long = "L")]
        filter_length: usize,
        #[arg(long = "M")]
        projection_order: usize,
        #[arg(long = "P")]
        group_size: usize,
    },
}

#[derive(Args, Debug, Default)]
struct OverrideArgs {
    /// Trace CSV path; the summary goes to <out>.summary.csv
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Total number of samples
    #[arg(long)]
    samples: Option<usize>,
    /// Sample index of the echo-path change
    #[arg(long)]
    switch_at: Option<usize>,
    #[arg(long)]
    snr_db: Option<f64>,
    /// AR(1) pole of the excitation
    #[arg(long)]
    pole: Option<f64>,
    /// Step size mu for every panel entry
    #[arg(long)]
    mu: Option<f64>,
    /// Regularization delta for every panel entry
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    /// Projection order M (ignored for the single-projection variants)
    #[arg(long = "order")]
    projection_order: Option<usize>,
    /// Keep every k-th sample in the trace CSV
    #[arg(long)]
    decimation: Option<usize>,
}

impl OverrideArgs {
    fn to_overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            total_samples: self.samples,
            switch_at: self.switch_at,
            snr_db: self.snr_db,
            pole: self.pole,
            step_size: self.mu,
            regularization: self.delta,
            rho: self.rho,
            q: self.q,
            projection_order: self.projection_order,
            trace_decimation: self.decimation,
            output: self.out.clone(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> bspapa::Result<ExitCode> {
    match command {
        Command::Run { config, overrides } => {
            let file = ExperimentFile::load(&config)?;
            execute(file, &overrides, Path::new("traces.csv"))
        }
        Command::Preset { name, overrides, dump } => {
            let mut file = name.file();
            if dump {
                overrides.to_overrides().apply(&mut file)?;
                println!("{}", file.to_json());
                return Ok(ExitCode::SUCCESS);
            }
            let default_out = PathBuf::from(format!("{name}.csv"));
            execute(file, &overrides, &default_out)
        }
        Command::EquivSuite { seed, steps } => {
            let checks = equivalence_suite(seed, steps)?;
            let mut ok = true;
            for c in &checks {
                let status = if c.passed() { "ok" } else { "FAIL" };
                println!("{:<28} max |dw| = {:.3e}  (tol {:.0e})  {status}", c.name, c.max_abs_deviation, c.tolerance);
                ok &= c.passed();
            }
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::CountMults {
            filter_length,
            projection_order,
            group_size,
        } => {
            let partition = BlockPartition::new(filter_length, group_size)?;
            let history = RegressorHistory::new(filter_length, projection_order)?;
            let gains = GainVector::unity(partition);
            let direct = build_weighted_regressor_direct(&gains, &history)?.multiplication_count();
            let efficient = build_weighted_regressor_efficient(&gains, &history)?.multiplication_count();
            println!("L={filter_length} M={projection_order} P={group_size} N={}", partition.block_count());
            println!("direct    (M*L)         = {direct}");
            println!("efficient ((P+M-1)*N)   = {efficient}");
            println!("memory    (L)           = {filter_length}");
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn execute(mut file: ExperimentFile, overrides: &OverrideArgs, default_out: &Path) -> bspapa::Result<ExitCode> {
    overrides.to_overrides().apply(&mut file)?;
    let config = file.build()?;
    let out = config.output_path.clone().unwrap_or_else(|| default_out.to_path_buf());
    let result = bench::run_experiment(&config)?;
    let summary_path = bench::write_traces_csv(&result.traces, &result.summary, &out, config.trace_decimation)?;

    println!("{:<12} {:>8} {:>12} {:>14} {:>10}", "label", "segment", "t(-15 dB)", "steady (dB)", "mults");
    for run in &result.summary.runs {
        for seg in &run.segments {
            let t = seg.time_to_threshold.map_or("-".to_string(), |t| t.to_string());
            let s = seg.steady_state_db.map_or("-".to_string(), |s| format!("{s:.2}"));
            println!("{:<12} {:>8} {:>12} {:>14} {:>10}", run.label, seg.segment + 1, t, s, run.mults_per_step);
        }
        if let Some(f) = &run.failure {
            eprintln!("{}: run aborted at {f}", run.label);
        }
    }
    println!("traces:  {}", out.display());
    println!("summary: {}", summary_path.display());

    Ok(if result.summary.any_failed() {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    })
}
