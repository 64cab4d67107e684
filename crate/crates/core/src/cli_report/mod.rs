//! Config-driven experiment runs: each experiment writes its series as CSV
//! and yields one summary row comparing the measured exponent with a bound.

mod config;

use std::fmt::{self, Write as _};
use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

pub use config::{
    default_base_point, parse_times, ExperimentConfig, ExperimentKind, ExperimentSpec, Fields,
    FlowSpec, GeneratorSource, GroupGrowthSpec, IntegralSpec, RunConfig,
};

use crate::fit::Classification;
use crate::gamma_catalog::{dimension_bound, gamma, theorem_bound, GammaError, GammaValue};
use crate::group_growth::{
    ball_counts, bass_guivarch, malcev_lcs_ranks, slow_growth_exponent, GrowthError, LcsRanks,
};
use crate::volume_growth::{
    evolve_and_measure, initial_fiber_sphere, integral_growth_check_with, reduction_gap,
    slow_vol_fit, ReductionSettings, VolumeError, VolumeSeries,
};

pub const SUMMARY_FILE: &str = "summary.txt";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Growth(#[from] GrowthError),
    #[error(transparent)]
    Volume(#[from] VolumeError),
    #[error(transparent)]
    Gamma(#[from] GammaError),
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// What an experiment measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measured {
    Exponent(f64),
    Exponential,
    /// Neither fit was convincing; carries the log-log slope.
    Inconclusive(f64),
    /// The element or vertex budget ran out before the last sample.
    BudgetExhausted,
}

impl Measured {
    fn from_fit(exponent: f64, classification: Classification, slope: f64) -> Self {
        match classification {
            Classification::Polynomial => Measured::Exponent(exponent),
            Classification::Exponential => Measured::Exponential,
            Classification::Inconclusive => Measured::Inconclusive(slope),
        }
    }

    pub fn classification(&self) -> &'static str {
        match self {
            Measured::Exponent(_) => "polynomial",
            Measured::Exponential => "exponential",
            Measured::Inconclusive(_) => "inconclusive",
            Measured::BudgetExhausted => "budget_exhausted",
        }
    }

    /// The numeric value, infinite for exponential growth.
    pub fn value(&self) -> f64 {
        match self {
            Measured::Exponent(x) | Measured::Inconclusive(x) => *x,
            Measured::Exponential | Measured::BudgetExhausted => f64::INFINITY,
        }
    }
}

impl fmt::Display for Measured {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Measured::Exponent(x) => write!(f, "{x:.4}"),
            Measured::Inconclusive(x) => write!(f, "inconclusive({x:.4})"),
            other => f.write_str(other.classification()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Pass,
    Fail,
    Error,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Error => "ERROR",
        })
    }
}

/// PASS iff a finite exponent reaches `bound - tolerance`, or growth is
/// exponential (an exhausted budget counts as such) and the bound is infinite.
/// Exponential growth also passes every finite bound. Inconclusive fits fail.
pub fn verdict(measured: Measured, bound: f64, tolerance: f64) -> Verdict {
    let pass = match measured {
        Measured::Exponent(x) => bound.is_finite() && x >= bound - tolerance,
        Measured::Exponential => true,
        Measured::BudgetExhausted => bound == f64::INFINITY,
        Measured::Inconclusive(_) => false,
    };
    if pass {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub id: String,
    pub kind: ExperimentKind,
    /// `None` when the experiment errored.
    pub measured: Option<Measured>,
    pub bound: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub message: String,
    pub seconds: f64,
}

fn fmt_bound(b: f64) -> String {
    if b.is_finite() {
        format!("{b:.4}")
    } else if b.is_nan() {
        "-".into()
    } else {
        "inf".into()
    }
}

impl SummaryRow {
    pub const HEADER: &'static str =
        "id\tkind\tmeasured\tbound\ttolerance\tverdict\tseconds\tmessage";

    /// One tab-separated line of the summary table.
    pub fn line(&self) -> String {
        let measured = self.measured.map_or("-".to_string(), |m| m.to_string());
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{:.3}\t{}",
            self.id,
            self.kind.as_str(),
            measured,
            fmt_bound(self.bound),
            self.tolerance,
            self.verdict,
            self.seconds,
            self.message
        )
    }

    /// Deterministic CSV (no timing) written next to the series.
    pub fn result_csv(&self) -> String {
        let (class, value) = match self.measured {
            Some(m) => (m.classification(), m.value().to_string()),
            None => ("-", String::new()),
        };
        format!(
            "id,kind,classification,measured,bound,tolerance,verdict,message\n{},{},{},{},{},{},{},{}\n",
            self.id,
            self.kind.as_str(),
            class,
            value,
            self.bound,
            self.tolerance,
            self.verdict,
            csv_field(&self.message)
        )
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

struct Outcome {
    measured: Measured,
    bound: f64,
    message: String,
}

fn write_file(path: &Path, contents: &str) -> Result<(), ReportError> {
    fs::write(path, contents).map_err(io_error(path))
}

/// Runs one experiment, writing `<id>*.csv` into `output_dir`. Module errors
/// become an ERROR row; only I/O failures on the output directory are
/// returned as `Err`.
pub fn run(config: &ExperimentConfig, output_dir: &Path) -> Result<SummaryRow, ReportError> {
    fs::create_dir_all(output_dir).map_err(io_error(output_dir))?;
    let start = Instant::now();
    let outcome = execute(config, output_dir);
    let seconds = start.elapsed().as_secs_f64();
    let row = match outcome {
        Ok(o) => SummaryRow {
            id: config.id.clone(),
            kind: config.kind,
            measured: Some(o.measured),
            bound: o.bound,
            tolerance: config.tolerance,
            verdict: verdict(o.measured, o.bound, config.tolerance),
            message: o.message,
            seconds,
        },
        Err(e @ ReportError::Io { .. }) => return Err(e),
        Err(e) => SummaryRow {
            id: config.id.clone(),
            kind: config.kind,
            measured: None,
            bound: f64::NAN,
            tolerance: config.tolerance,
            verdict: Verdict::Error,
            message: e.to_string(),
            seconds,
        },
    };
    write_file(
        &output_dir.join(format!("{}_result.csv", config.id)),
        &row.result_csv(),
    )?;
    Ok(row)
}

/// Runs every experiment (in parallel if configured) and appends their rows,
/// in config order, to `summary.txt` in the output directory.
pub fn run_all(config: &RunConfig) -> Result<Vec<SummaryRow>, ReportError> {
    let output = &config.output;
    let rows: Vec<SummaryRow> = if config.parallel {
        config
            .experiments
            .par_iter()
            .map(|e| run(e, output))
            .collect::<Result<_, _>>()?
    } else {
        config
            .experiments
            .iter()
            .map(|e| run(e, output))
            .collect::<Result<_, _>>()?
    };
    append_summary(output, &rows)?;
    Ok(rows)
}

/// Appends rows to the run-level summary, writing the header for a new file.
pub fn append_summary(output_dir: &Path, rows: &[SummaryRow]) -> Result<(), ReportError> {
    fs::create_dir_all(output_dir).map_err(io_error(output_dir))?;
    let path = output_dir.join(SUMMARY_FILE);
    let fresh = !path.exists();
    let mut text = String::new();
    if fresh {
        text.push_str(SummaryRow::HEADER);
        text.push('\n');
    }
    for r in rows {
        text.push_str(&r.line());
        text.push('\n');
    }
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .map_err(io_error(&path))?;
    file.write_all(text.as_bytes()).map_err(io_error(&path))
}

fn execute(config: &ExperimentConfig, out: &Path) -> Result<Outcome, ReportError> {
    let series_path = out.join(format!("{}.csv", config.id));
    match &config.spec {
        ExperimentSpec::GroupGrowth(spec) => run_group(spec, &series_path),
        ExperimentSpec::FlowGrowth(spec) => {
            let descriptor = config.descriptor.as_ref().ok_or_else(|| {
                ReportError::Config(format!("[{}] flow_growth needs a descriptor", config.id))
            })?;
            let bound = theorem_bound(descriptor).as_f64();
            let measured = run_flow(spec, &series_path)?;
            Ok(Outcome {
                measured,
                bound,
                message: format!("{} on {}", spec.model, descriptor),
            })
        }
        ExperimentSpec::ReductionCheck(spec) => run_reduction(spec, out, &config.id),
        ExperimentSpec::GammaEval => {
            let descriptor = config.descriptor.as_ref().ok_or_else(|| {
                ReportError::Config(format!("[{}] needs a descriptor", config.id))
            })?;
            let g = gamma(descriptor)?;
            let csv = format!(
                "descriptor,dimension,gamma_pi1,gamma_loop,gamma,bound,dimension_bound,slow\n\
                 {},{},{},{},{},{},{},{}\n",
                csv_field(&descriptor.to_string()),
                g.dimension,
                g.gamma_pi1,
                g.gamma_loop,
                g.gamma_total,
                g.theorem_bound,
                dimension_bound(g.dimension),
                g.slow
            );
            write_file(&series_path, &csv)?;
            let measured = match g.gamma_total {
                GammaValue::Finite(v) => Measured::Exponent(v as f64),
                GammaValue::Infinite => Measured::Exponential,
            };
            Ok(Outcome {
                measured,
                bound: g.theorem_bound.as_f64(),
                message: format!("gamma({descriptor})"),
            })
        }
        ExperimentSpec::IntegralLemma(spec) => run_integral(spec, &series_path),
    }
}

fn run_group(spec: &GroupGrowthSpec, path: &Path) -> Result<Outcome, ReportError> {
    let gens = spec.generators.load()?;
    let (bound, source) = if let Some(r) = &spec.ranks {
        (
            bass_guivarch(&LcsRanks::new(r.clone())) as f64,
            "configured ranks",
        )
    } else if gens.is_unitriangular() {
        (
            bass_guivarch(&malcev_lcs_ranks(&gens)?) as f64,
            "Malcev ranks",
        )
    } else {
        (f64::INFINITY, "no nilpotent structure")
    };
    let series = match ball_counts(&gens, spec.m_max, spec.element_budget) {
        Ok(s) => s,
        Err(GrowthError::BudgetExceeded { budget, radius }) => {
            write_file(path, "m,count\n")?;
            return Ok(Outcome {
                measured: Measured::BudgetExhausted,
                bound,
                message: format!(
                    "{budget} elements exceeded at radius {radius}; bound from {source}"
                ),
            });
        }
        Err(e) => return Err(e.into()),
    };
    write_file(path, &series.to_csv())?;
    let fit = slow_growth_exponent(&series, spec.window_fraction)?;
    Ok(Outcome {
        measured: Measured::from_fit(fit.exponent, fit.classification, fit.exponent),
        bound,
        message: format!(
            "radii {}..={}; bound from {source}",
            fit.window.0, fit.window.1
        ),
    })
}

/// Evolves the fiber sphere; a partial series is still written when the
/// vertex budget runs out.
fn run_flow(spec: &FlowSpec, path: &Path) -> Result<Measured, ReportError> {
    let mut mesh = initial_fiber_sphere(&spec.model, &spec.base_point, spec.resolution)?;
    if spec.equator_grading > 0.0 {
        mesh = mesh.with_equator_grading(&spec.model, spec.equator_grading)?;
    }
    let series = match evolve_and_measure(
        &spec.model,
        &mut mesh,
        &spec.times,
        &spec.flow,
        &spec.refine,
    ) {
        Ok(s) => s,
        Err(VolumeError::BudgetExceeded { partial, .. }) => {
            if let Some(p) = partial {
                write_file(path, &p.to_csv())?;
            }
            return Ok(Measured::BudgetExhausted);
        }
        Err(e) => return Err(e.into()),
    };
    write_file(path, &series.to_csv())?;
    measure_series(&series, spec.window_fraction)
}

fn measure_series(series: &VolumeSeries, window_fraction: f64) -> Result<Measured, ReportError> {
    let fit = slow_vol_fit(series, window_fraction)?;
    Ok(Measured::from_fit(
        fit.exponent,
        fit.classification,
        fit.exponent,
    ))
}

fn run_reduction(spec: &FlowSpec, out: &Path, id: &str) -> Result<Outcome, ReportError> {
    let settings = ReductionSettings {
        sphere: spec.refine,
        disc: spec.refine,
        resolution: spec.resolution,
        radial_layers: spec.radial_layers,
        inner_radius: spec.inner_radius,
        window_fraction: spec.window_fraction,
    };
    let gap = reduction_gap(
        &spec.model,
        &spec.base_point,
        &spec.times,
        &spec.flow,
        &settings,
    )?;
    write_file(
        &out.join(format!("{id}_sphere.csv")),
        &gap.sphere_series.to_csv(),
    )?;
    write_file(
        &out.join(format!("{id}_disc.csv")),
        &gap.disc_series.to_csv(),
    )?;
    let s = &gap.sphere_fit;
    Ok(Outcome {
        measured: Measured::from_fit(s.exponent, s.classification, s.exponent),
        bound: gap.disc_exponent - 1.0,
        message: format!(
            "disc {:.4} ({}), sphere {:.4}",
            gap.disc_exponent, gap.disc_fit.classification, gap.sphere_exponent
        ),
    })
}

fn run_integral(spec: &IntegralSpec, path: &Path) -> Result<Outcome, ReportError> {
    let ratio = (spec.r_max / spec.r_min).ln() / (spec.samples - 1) as f64;
    let samples: Vec<(f64, f64)> = (0..spec.samples)
        .map(|k| {
            let r = spec.r_min * (ratio * k as f64).exp();
            (r, r.powf(spec.exponent))
        })
        .collect();
    let (integral_exp, f_exp) = integral_growth_check_with(&samples, spec.window_fraction)?;
    let mut csv = String::from("r,f,integral\n");
    let mut acc = samples[0].0 * samples[0].1;
    let _ = writeln!(csv, "{},{},{}", samples[0].0, samples[0].1, acc);
    for w in samples.windows(2) {
        acc += 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1);
        let _ = writeln!(csv, "{},{},{}", w[1].0, w[1].1, acc);
    }
    write_file(path, &csv)?;
    Ok(Outcome {
        measured: Measured::Exponent(f_exp),
        bound: integral_exp - 1.0,
        message: format!("integral exponent {integral_exp:.4}, f exponent {f_exp:.4}"),
    })
}
