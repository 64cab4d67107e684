//! Experiment configuration files.
//!
//! One experiment per `[section]`; the section name is the experiment id.
//! Keys before the first section, or in a `[run]` section, apply to the whole
//! run (`output`, `parallel`). Unknown keys are rejected.
//!
//! ```text
//! output = results
//!
//! [heisenberg]
//! kind = group_growth
//! generators = heisenberg
//! m_max = 30
//!
//! [nil]
//! kind = flow_growth
//! model = nil3
//! descriptor = Nil(1)
//! times = geometric:16,256,9
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;

use crate::flow_models::{parse_model, FlowConfig, HamiltonianModel, Integrator};
use crate::gamma_catalog::{parse_descriptor, ManifoldDescriptor};
use crate::group_growth::GeneratorSet;
use crate::volume_growth::{doubling_times, geometric_times, RefineSettings, DEFAULT_PUNCTURE};

use super::ReportError;

const RUN_SECTION: &str = "run";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    GroupGrowth,
    FlowGrowth,
    GammaEval,
    ReductionCheck,
    IntegralLemma,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::GroupGrowth => "group_growth",
            ExperimentKind::FlowGrowth => "flow_growth",
            ExperimentKind::GammaEval => "gamma_eval",
            ExperimentKind::ReductionCheck => "reduction_check",
            ExperimentKind::IntegralLemma => "integral_lemma",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "group_growth" => ExperimentKind::GroupGrowth,
            "flow_growth" => ExperimentKind::FlowGrowth,
            "gamma_eval" => ExperimentKind::GammaEval,
            "reduction_check" => ExperimentKind::ReductionCheck,
            "integral_lemma" => ExperimentKind::IntegralLemma,
            other => return Err(format!("unknown experiment kind {other:?}")),
        })
    }
}

/// Where a generator set comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSource {
    Builtin(String),
    File(PathBuf),
}

impl GeneratorSource {
    pub fn load(&self) -> Result<GeneratorSet, ReportError> {
        match self {
            GeneratorSource::Builtin(name) => GeneratorSet::builtin(name)
                .ok_or_else(|| ReportError::Config(format!("unknown generator set {name:?}"))),
            GeneratorSource::File(path) => Ok(GeneratorSet::load(path)?),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupGrowthSpec {
    pub generators: GeneratorSource,
    pub m_max: usize,
    pub element_budget: usize,
    pub window_fraction: f64,
    /// Lower-central-series ranks used for the exact degree when the
    /// generators are not unitriangular.
    pub ranks: Option<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSpec {
    pub model: HamiltonianModel,
    pub model_text: String,
    pub base_point: Vec<f64>,
    /// Circle samples (2D) or icosphere level (3D).
    pub resolution: usize,
    pub equator_grading: f64,
    pub times: Vec<f64>,
    pub flow: FlowConfig,
    pub refine: RefineSettings,
    pub window_fraction: f64,
    pub inner_radius: f64,
    pub radial_layers: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegralSpec {
    /// Samples `f(r) = r^exponent`.
    pub exponent: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub samples: usize,
    pub window_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentSpec {
    GroupGrowth(GroupGrowthSpec),
    FlowGrowth(FlowSpec),
    GammaEval,
    ReductionCheck(FlowSpec),
    IntegralLemma(IntegralSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub id: String,
    pub kind: ExperimentKind,
    pub descriptor: Option<ManifoldDescriptor>,
    pub tolerance: f64,
    pub spec: ExperimentSpec,
}

/// A parsed configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub output: PathBuf,
    pub parallel: bool,
    pub experiments: Vec<ExperimentConfig>,
}

/// Raw `key = value` pairs of one section, consumed as they are read.
#[derive(Debug, Clone, Default)]
pub struct Fields {
    section: String,
    values: BTreeMap<String, String>,
}

impl Fields {
    pub fn new(section: &str) -> Self {
        Fields {
            section: section.to_string(),
            values: BTreeMap::new(),
        }
    }

    /// Sets a value, replacing any earlier one.
    pub fn set(&mut self, key: &str, value: &str) {
        self.values
            .insert(key.to_string(), value.trim().to_string());
    }

    fn err(&self, msg: String) -> ReportError {
        ReportError::Config(format!("[{}] {msg}", self.section))
    }

    fn take_str(&mut self, key: &str) -> Option<String> {
        self.values.remove(key)
    }

    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, ReportError>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.remove(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| self.err(format!("{key} = {v:?}: {e}"))),
        }
    }

    fn positive_f64(&mut self, key: &str, default: f64) -> Result<f64, ReportError> {
        let v = self.take::<f64>(key)?.unwrap_or(default);
        if !(v > 0.0 && v.is_finite()) {
            return Err(self.err(format!("{key} must be positive, got {v}")));
        }
        Ok(v)
    }

    fn positive_usize(&mut self, key: &str, default: usize) -> Result<usize, ReportError> {
        let v = self.take::<usize>(key)?.unwrap_or(default);
        if v == 0 {
            return Err(self.err(format!("{key} must be positive")));
        }
        Ok(v)
    }

    fn fraction(&mut self, key: &str, default: f64) -> Result<f64, ReportError> {
        let v = self.positive_f64(key, default)?;
        if v > 1.0 {
            return Err(self.err(format!("{key} must lie in (0, 1], got {v}")));
        }
        Ok(v)
    }

    fn finish(self) -> Result<(), ReportError> {
        match self.values.keys().next() {
            Some(k) => Err(self.err(format!("unknown key {k:?}"))),
            None => Ok(()),
        }
    }
}

/// Parses `geometric:start,end,count`, `doubling:k` or an explicit list.
pub fn parse_times(text: &str) -> Result<Vec<f64>, String> {
    let nums = |s: &str| -> Result<Vec<f64>, String> {
        s.split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}")))
            .collect()
    };
    let times = if let Some(rest) = text.strip_prefix("geometric:") {
        let v = nums(rest)?;
        if v.len() != 3 || v[2].fract() != 0.0 || v[2] < 2.0 || !(v[0] > 0.0 && v[1] > v[0]) {
            return Err(format!("{text:?}: expected geometric:start,end,count"));
        }
        geometric_times(v[0], v[1], v[2] as usize)
    } else if let Some(rest) = text.strip_prefix("doubling:") {
        let k: u32 = rest.trim().parse().map_err(|e| format!("{rest:?}: {e}"))?;
        doubling_times(k)
    } else {
        nums(text)?
    };
    if times.is_empty()
        || times.iter().any(|t| !(*t > 0.0 && t.is_finite()))
        || times.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(format!("{text:?}: times must be positive and increasing"));
    }
    Ok(times)
}

fn parse_list<T: FromStr>(text: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(|v| v.trim().parse::<T>().map_err(|e| format!("{v:?}: {e}")))
        .collect()
}

fn parse_bool(text: &str) -> Result<bool, String> {
    match text {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(format!("expected a boolean, got {other:?}")),
    }
}

impl ExperimentConfig {
    /// Builds an experiment from its section. Relative file references are
    /// resolved against `base_dir`.
    pub fn from_fields(mut f: Fields, base_dir: &Path) -> Result<Self, ReportError> {
        let id = f.section.clone();
        if id.is_empty()
            || !id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c))
        {
            return Err(
                f.err("experiment ids may only use letters, digits, '-', '_' and '.'".into())
            );
        }
        let kind: ExperimentKind = f
            .take_str("kind")
            .ok_or_else(|| f.err("missing key \"kind\"".into()))?
            .parse()
            .map_err(|e: String| f.err(e))?;
        let descriptor = match f.take_str("descriptor") {
            Some(d) => Some(parse_descriptor(&d).map_err(|e| f.err(e.to_string()))?),
            None => None,
        };
        let tolerance = f.take::<f64>("tolerance")?.unwrap_or(0.1);
        if !(tolerance >= 0.0 && tolerance.is_finite()) {
            return Err(f.err(format!("tolerance must be non-negative, got {tolerance}")));
        }
        let spec = match kind {
            ExperimentKind::GroupGrowth => {
                ExperimentSpec::GroupGrowth(group_spec(&mut f, base_dir)?)
            }
            ExperimentKind::FlowGrowth => ExperimentSpec::FlowGrowth(flow_spec(&mut f)?),
            ExperimentKind::ReductionCheck => ExperimentSpec::ReductionCheck(flow_spec(&mut f)?),
            ExperimentKind::GammaEval => {
                if descriptor.is_none() {
                    return Err(f.err("gamma_eval needs a descriptor".into()));
                }
                ExperimentSpec::GammaEval
            }
            ExperimentKind::IntegralLemma => ExperimentSpec::IntegralLemma(IntegralSpec {
                exponent: {
                    let e = f.take::<f64>("exponent")?.unwrap_or(1.0);
                    if !(e >= 0.0 && e.is_finite()) {
                        return Err(f.err(format!("exponent must be non-negative, got {e}")));
                    }
                    e
                },
                r_min: f.positive_f64("r_min", 1.0)?,
                r_max: f.positive_f64("r_max", 1000.0)?,
                samples: f.positive_usize("samples", 64)?,
                window_fraction: f.fraction("window_fraction", 0.5)?,
            }),
        };
        if let ExperimentSpec::IntegralLemma(s) = &spec {
            if s.r_max <= s.r_min || s.samples < 2 {
                return Err(f.err("need r_min < r_max and at least 2 samples".into()));
            }
        }
        f.finish()?;
        Ok(ExperimentConfig {
            id,
            kind,
            descriptor,
            tolerance,
            spec,
        })
    }
}

fn group_spec(f: &mut Fields, base_dir: &Path) -> Result<GroupGrowthSpec, ReportError> {
    let name = f
        .take_str("generators")
        .ok_or_else(|| f.err("missing key \"generators\"".into()))?;
    let generators = if GeneratorSet::builtin(&name).is_some() {
        GeneratorSource::Builtin(name)
    } else {
        let path = base_dir.join(&name);
        if !path.is_file() {
            return Err(f.err(format!(
                "generators {name:?} is neither a built-in set nor an existing file"
            )));
        }
        GeneratorSource::File(path)
    };
    let ranks = match f.take_str("ranks") {
        Some(r) => Some(parse_list::<u64>(&r).map_err(|e| f.err(e))?),
        None => None,
    };
    Ok(GroupGrowthSpec {
        generators,
        m_max: f.positive_usize("m_max", 20)?,
        element_budget: f.positive_usize("element_budget", 20_000_000)?,
        window_fraction: f.fraction("window_fraction", 0.5)?,
        ranks,
    })
}

fn flow_spec(f: &mut Fields) -> Result<FlowSpec, ReportError> {
    let model_text = f
        .take_str("model")
        .ok_or_else(|| f.err("missing key \"model\"".into()))?;
    let model = parse_model(&model_text).map_err(|e| f.err(e.to_string()))?;
    let base_point = match f.take_str("base_point") {
        Some(b) => parse_list::<f64>(&b).map_err(|e| f.err(e))?,
        None => default_base_point(&model),
    };
    let default_resolution = if model.manifold_dim() == 2 { 64 } else { 3 };
    let resolution = f.positive_usize("resolution", default_resolution)?;
    let equator_grading = f.take::<f64>("equator_grading")?.unwrap_or(0.0);
    if !(equator_grading >= 0.0 && equator_grading.is_finite()) {
        return Err(f.err("equator_grading must be non-negative".into()));
    }
    let times = match f.take_str("times") {
        Some(t) => parse_times(&t).map_err(|e| f.err(e))?,
        None => doubling_times(7),
    };
    let integrator = match f.take_str("integrator").as_deref() {
        None | Some("auto") if model.has_closed_form() => Integrator::Exact,
        None | Some("auto") => Integrator::ImplicitMidpoint,
        Some(name) => Integrator::parse(name).map_err(|e| f.err(e))?,
    };
    if integrator == Integrator::Exact && !model.has_closed_form() {
        return Err(f.err(format!("model {model_text:?} has no closed-form flow")));
    }
    let step = f.positive_f64("step", 1e-3)?;
    let mut refine = RefineSettings::new(
        f.positive_f64("refine_threshold", 0.05)?,
        f.positive_usize("volume_budget", 200_000)?,
    );
    refine.time_relative = match f.take_str("time_relative") {
        Some(v) => parse_bool(&v).map_err(|e| f.err(e))?,
        None => false,
    };
    refine.certify = match f.take_str("certify") {
        Some(v) => parse_bool(&v).map_err(|e| f.err(e))?,
        None => false,
    };
    let inner_radius = f.positive_f64("inner_radius", DEFAULT_PUNCTURE)?;
    if inner_radius >= 1.0 {
        return Err(f.err(format!("inner_radius must be below 1, got {inner_radius}")));
    }
    Ok(FlowSpec {
        model,
        model_text,
        base_point,
        resolution,
        equator_grading,
        times,
        flow: FlowConfig::with_integrator(integrator, step),
        refine,
        window_fraction: f.fraction("window_fraction", 0.5)?,
        inner_radius,
        radial_layers: f.positive_usize("radial_layers", 4)?,
    })
}

/// The origin of the chart, or the north pole for the round sphere.
pub fn default_base_point(model: &HamiltonianModel) -> Vec<f64> {
    match model {
        HamiltonianModel::RoundSphere2 => vec![0.0, 0.0, 1.0],
        m => vec![0.0; m.chart_dim()],
    }
}

impl RunConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, ReportError> {
        let ini = Ini::load_from_str(text).map_err(|e| ReportError::Config(e.to_string()))?;
        let mut run = Fields::new(RUN_SECTION);
        let mut sections: Vec<Fields> = Vec::new();
        for (name, props) in ini.iter() {
            let target = match name {
                None | Some(RUN_SECTION) => &mut run,
                Some(id) => {
                    if sections.iter().any(|s| s.section == id) {
                        return Err(ReportError::Config(format!("duplicate experiment [{id}]")));
                    }
                    sections.push(Fields::new(id));
                    sections.last_mut().expect("just pushed")
                }
            };
            for (k, v) in props.iter() {
                target.set(k, v);
            }
        }
        let output = run
            .take_str("output")
            .map(|o| base_dir.join(o))
            .unwrap_or_else(|| base_dir.join("results"));
        let parallel = match run.take_str("parallel") {
            Some(v) => parse_bool(&v).map_err(|e| run.err(e))?,
            None => true,
        };
        run.finish()?;
        let experiments = sections
            .into_iter()
            .map(|s| ExperimentConfig::from_fields(s, base_dir))
            .collect::<Result<Vec<_>, _>>()?;
        if experiments.is_empty() {
            return Err(ReportError::Config("no experiments configured".into()));
        }
        Ok(RunConfig {
            output,
            parallel,
            experiments,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ReportError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ReportError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_in_order() {
        let text = "output = out\n\n[a]\nkind = gamma_eval\ndescriptor = T(2)\n\n\
                    [b]\nkind = group_growth\ngenerators = zd:2\nm_max = 12\n";
        let cfg = RunConfig::parse(text, Path::new("/tmp")).unwrap();
        assert_eq!(cfg.output, PathBuf::from("/tmp/out"));
        let ids: Vec<_> = cfg.experiments.iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, ["a", "b"]);
        match &cfg.experiments[1].spec {
            ExperimentSpec::GroupGrowth(g) => assert_eq!(g.m_max, 12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let base = Path::new(".");
        for text in [
            "[a]\nkind = gamma_eval\ndescriptor = T(2)\ncolour = red\n",
            "[a]\nkind = group_growth\ngenerators = zd:2\nm_max = 0\n",
            "[a]\nkind = flow_growth\nmodel = flat2\nrefine_threshold = -1\n",
            "[a]\nkind = flow_growth\nmodel = sol3\nintegrator = exact\n",
            "[a]\nkind = group_growth\ngenerators = no/such/file.txt\n",
            "[a]\nkind = teleport\n",
            "[a]\nkind = gamma_eval\n",
            "output = x\n",
        ] {
            assert!(RunConfig::parse(text, base).is_err(), "{text}");
        }
    }

    #[test]
    fn time_grids() {
        assert_eq!(parse_times("doubling:3").unwrap(), vec![1.0, 2.0, 4.0, 8.0]);
        assert_eq!(parse_times("1, 3, 9").unwrap(), vec![1.0, 3.0, 9.0]);
        let g = parse_times("geometric:16,256,5").unwrap();
        assert_eq!(g.len(), 5);
        assert!((g[4] - 256.0).abs() < 1e-9);
        assert!(parse_times("3,2").is_err());
        assert!(parse_times("geometric:1,2").is_err());
    }

    #[test]
    fn integrator_defaults_follow_model() {
        let cfg =
            RunConfig::parse("[s]\nkind = flow_growth\nmodel = sol3\n", Path::new(".")).unwrap();
        match &cfg.experiments[0].spec {
            ExperimentSpec::FlowGrowth(f) => {
                assert_eq!(f.flow.integrator, Integrator::ImplicitMidpoint)
            }
            other => panic!("{other:?}"),
        }
    }
}
