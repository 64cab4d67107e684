use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use slowvol::cli_report::{
    append_summary, run, run_all, ExperimentConfig, Fields, ReportError, RunConfig, SummaryRow,
    Verdict,
};

/// Slow volume growth experiments.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every experiment of a config file.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run experiments one after another.
        #[arg(long)]
        serial: bool,
    },
    /// Evaluate the homotopy invariant of a manifold descriptor.
    Gamma {
        descriptor: String,
        #[command(flatten)]
        common: Common,
    },
    /// Ball growth of a generator set (file or built-in name).
    Growth {
        generators: String,
        #[arg(long)]
        mmax: usize,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        window: Option<f64>,
        /// Lower-central-series ranks, comma separated.
        #[arg(long)]
        ranks: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Volume growth of the fiber sphere under a model flow.
    Flow {
        model: String,
        /// `geometric:a,b,n`, `doubling:k` or a comma-separated list.
        #[arg(long)]
        times: String,
        #[arg(long)]
        descriptor: String,
        #[arg(long)]
        threshold: Option<f64>,
        /// Scale the threshold with time.
        #[arg(long)]
        time_relative: bool,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long)]
        grading: Option<f64>,
        #[arg(long)]
        integrator: Option<String>,
        #[arg(long)]
        step: Option<f64>,
        /// Comma-separated chart coordinates.
        #[arg(long, allow_hyphen_values = true)]
        base_point: Option<String>,
        #[arg(long)]
        window: Option<f64>,
        #[arg(long)]
        certify: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[arg(long)]
    tolerance: Option<f64>,
    /// Experiment id used for file names.
    #[arg(long)]
    id: Option<String>,
}

fn set_opt<T: ToString>(f: &mut Fields, key: &str, value: Option<T>) {
    if let Some(v) = value {
        f.set(key, &v.to_string());
    }
}

fn single(
    kind: &str,
    common: &Common,
    fill: impl FnOnce(&mut Fields),
) -> Result<(ExperimentConfig, PathBuf), ReportError> {
    let mut f = Fields::new(common.id.as_deref().unwrap_or(kind));
    f.set("kind", kind);
    set_opt(&mut f, "tolerance", common.tolerance);
    fill(&mut f);
    Ok((
        ExperimentConfig::from_fields(f, Path::new("."))?,
        common.out.clone(),
    ))
}

fn execute(command: Command) -> Result<Vec<SummaryRow>, ReportError> {
    let (experiment, out) = match command {
        Command::Run {
            config,
            out,
            serial,
        } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(o) = out {
                cfg.output = o;
            }
            if serial {
                cfg.parallel = false;
            }
            return run_all(&cfg);
        }
        Command::Gamma { descriptor, common } => single("gamma_eval", &common, |f| {
            f.set("descriptor", &descriptor);
        })?,
        Command::Growth {
            generators,
            mmax,
            budget,
            window,
            ranks,
            common,
        } => single("group_growth", &common, |f| {
            f.set("generators", &generators);
            f.set("m_max", &mmax.to_string());
            set_opt(f, "element_budget", budget);
            set_opt(f, "window_fraction", window);
            set_opt(f, "ranks", ranks);
        })?,
        Command::Flow {
            model,
            times,
            descriptor,
            threshold,
            time_relative,
            budget,
            resolution,
            grading,
            integrator,
            step,
            base_point,
            window,
            certify,
            common,
        } => single("flow_growth", &common, |f| {
            f.set("model", &model);
            f.set("times", &times);
            f.set("descriptor", &descriptor);
            f.set("time_relative", &time_relative.to_string());
            f.set("certify", &certify.to_string());
            set_opt(f, "refine_threshold", threshold);
            set_opt(f, "volume_budget", budget);
            set_opt(f, "resolution", resolution);
            set_opt(f, "equator_grading", grading);
            set_opt(f, "integrator", integrator);
            set_opt(f, "step", step);
            set_opt(f, "base_point", base_point);
            set_opt(f, "window_fraction", window);
        })?,
    };
    let row = run(&experiment, &out)?;
    append_summary(&out, std::slice::from_ref(&row))?;
    Ok(vec![row])
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(rows) => {
            println!("{}", SummaryRow::HEADER);
            for r in &rows {
                println!("{}", r.line());
            }
            if rows.iter().all(|r| r.verdict == Verdict::Pass) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
