//! Run configuration: JSON parsing with line-anchored diagnostics, command-line
//! overrides, and validation of every estimate before any computation starts.

use std::path::{Path, PathBuf};

use fracharm::commutators::{EstimateDescriptor, EstimateId, EstimateParams, ParamOverrides};
use fracharm::extension::TLevels;
use fracharm::GridSpec;
use serde::Deserialize;
use serde_json::value::RawValue;

use crate::failure::Failure;

pub const DEFAULT_SEED: u64 = 2024;
pub const DEFAULT_OUT: &str = "fracharm-out";

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    #[serde(rename = "N")]
    pub points: usize,
    #[serde(rename = "L", default = "unit_period")]
    pub period: f64,
}

fn unit_period() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TLevelConfig {
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub levels: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateEntry {
    pub id: String,
    #[serde(default)]
    pub params: ParamOverrides,
    /// Replaces the run-wide seeds for this estimate.
    pub seeds: Option<Vec<u64>>,
    /// Replaces the run-wide grid for this estimate.
    pub grid: Option<GridConfig>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    pub slack: Option<f64>,
    pub stability_tol: Option<f64>,
    pub zero_tol: Option<f64>,
}

/// Top level, with each section kept raw so that later errors can point at
/// the line where the section starts.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig<'a> {
    #[serde(borrow)]
    grid: &'a RawValue,
    #[serde(borrow, default)]
    t_levels: Option<&'a RawValue>,
    #[serde(borrow, default)]
    estimates: Vec<&'a RawValue>,
    #[serde(default)]
    seeds: Option<Vec<u64>>,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    #[serde(borrow, default)]
    tolerances: Option<&'a RawValue>,
    #[serde(borrow, default)]
    profiles: Option<&'a RawValue>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    /// Extension orders for which decay and boundary profiles are written.
    pub s: Vec<f64>,
}

/// Values given on the command line; each one replaces its config field.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub grid_n: Option<usize>,
    pub grid_points: Option<usize>,
    pub period: Option<f64>,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub t_levels: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub tolerance_scale: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Job {
    pub descriptor: EstimateDescriptor,
    pub spec: GridSpec,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct Tolerances {
    pub slack: f64,
    pub stability_tol: f64,
    pub zero_tol: f64,
}

/// A validated run.
#[derive(Debug, Clone)]
pub struct Plan {
    pub spec: GridSpec,
    pub levels: TLevels,
    pub jobs: Vec<Job>,
    pub out: PathBuf,
    pub tolerances: Tolerances,
    pub profile_s: Vec<f64>,
}

/// Source text with a name, used to turn byte offsets into `file:line` anchors.
struct Source<'a> {
    name: String,
    text: &'a str,
}

impl Source<'_> {
    fn line_of(&self, raw: &RawValue) -> usize {
        let offset = raw.get().as_ptr() as usize - self.text.as_ptr() as usize;
        self.text[..offset].matches('\n').count() + 1
    }

    fn at(&self, line: usize, msg: impl std::fmt::Display) -> Failure {
        Failure::Config(format!("{}:{line}: {msg}", self.name))
    }

    /// Parses a raw section, shifting serde's line numbers to the file.
    fn section<T: for<'de> Deserialize<'de>>(&self, raw: &RawValue, what: &str) -> Result<T, Failure> {
        let base = self.line_of(raw);
        serde_json::from_str(raw.get()).map_err(|e| {
            let line = base + e.line().saturating_sub(1);
            self.at(line, format!("{what}: {}", strip_position(&e)))
        })
    }
}

/// serde_json appends " at line L column C"; the anchor already carries the line.
fn strip_position(e: &serde_json::Error) -> String {
    let text = e.to_string();
    match text.rfind(" at line ") {
        Some(i) => text[..i].to_string(),
        None => text,
    }
}

pub fn load(path: &Path, overrides: &Overrides) -> Result<Plan, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("{}: cannot read config: {e}", path.display())))?;
    parse(&text, &path.display().to_string(), overrides)
}

pub fn parse(text: &str, name: &str, overrides: &Overrides) -> Result<Plan, Failure> {
    let src = Source {
        name: name.to_string(),
        text,
    };
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| src.at(e.line(), strip_position(&e)))?;

    let grid_line = src.line_of(raw.grid);
    let mut grid: GridConfig = src.section(raw.grid, "grid")?;
    if let Some(n) = overrides.grid_n {
        grid.n = n;
    }
    if let Some(points) = overrides.grid_points {
        grid.points = points;
    }
    if let Some(l) = overrides.period {
        grid.period = l;
    }
    let spec = make_spec(&grid).map_err(|e| src.at(grid_line, format!("grid: {e}")))?;

    let (levels_line, mut lv) = match raw.t_levels {
        Some(r) => (src.line_of(r), src.section::<TLevelConfig>(r, "t_levels")?),
        None => (grid_line, TLevelConfig::default()),
    };
    lv.t_min = overrides.t_min.or(lv.t_min);
    lv.t_max = overrides.t_max.or(lv.t_max);
    lv.levels = overrides.t_levels.or(lv.levels);
    let levels = make_levels(&spec, &lv).map_err(|e| src.at(levels_line, format!("t_levels: {e}")))?;

    let tolerances = match raw.tolerances {
        Some(r) => src.section::<ToleranceConfig>(r, "tolerances")?,
        None => ToleranceConfig::default(),
    };
    let scale = overrides.tolerance_scale.unwrap_or(1.0);
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Failure::Config(format!("--tolerance-scale must be positive, got {scale}")));
    }
    let tolerances = Tolerances {
        slack: tolerances.slack.unwrap_or(1.5),
        stability_tol: tolerances.stability_tol.unwrap_or(0.15) * scale,
        zero_tol: tolerances.zero_tol.unwrap_or(1e-12) * scale,
    };
    if let Some(r) = raw.tolerances {
        if !(tolerances.slack >= 1.0 && tolerances.stability_tol > 0.0 && tolerances.zero_tol > 0.0) {
            return Err(src.at(src.line_of(r), "tolerances: slack must be ≥ 1 and the other tolerances positive"));
        }
    }

    let default_seeds = match overrides.seed {
        Some(s) => vec![s],
        None => raw.seeds.unwrap_or_else(|| vec![DEFAULT_SEED]),
    };

    let mut jobs = Vec::with_capacity(raw.estimates.len());
    for (i, r) in raw.estimates.iter().enumerate() {
        let line = src.line_of(r);
        let entry: EstimateEntry = src.section(r, &format!("estimates[{i}]"))?;
        let id: EstimateId = entry
            .id
            .parse()
            .map_err(|_| src.at(line, format!("estimates[{i}]: unknown estimate id {:?}", entry.id)))?;
        let params: EstimateParams = entry.params.apply(EstimateParams::defaults(id));
        let descriptor = EstimateDescriptor::new(id, params).map_err(|e| src.at(line, format!("estimates[{i}] ({id}): {e}")))?;
        let job_spec = match entry.grid {
            Some(g) => make_spec(&g).map_err(|e| src.at(line, format!("estimates[{i}] ({id}) grid: {e}")))?,
            None => spec,
        };
        descriptor
            .check_grid(&job_spec)
            .map_err(|e| src.at(line, format!("estimates[{i}] ({id}): {e}")))?;
        let seeds = match (overrides.seed, entry.seeds) {
            (Some(s), _) => vec![s],
            (None, Some(list)) => list,
            (None, None) => default_seeds.clone(),
        };
        if seeds.is_empty() {
            return Err(src.at(line, format!("estimates[{i}] ({id}): the seed list is empty")));
        }
        jobs.push(Job {
            descriptor,
            spec: job_spec,
            seeds,
        });
    }

    let profile_s = match raw.profiles {
        Some(r) => {
            let p: ProfileConfig = src.section(r, "profiles")?;
            if let Some(s) = p.s.iter().find(|&&s| !(s > 0.0 && s < 2.0)) {
                return Err(src.at(src.line_of(r), format!("profiles: s = {s} must lie in (0, 2)")));
            }
            p.s
        }
        None => Vec::new(),
    };

    let out = overrides
        .out
        .clone()
        .or(raw.output_dir)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    Ok(Plan {
        spec,
        levels,
        jobs,
        out,
        tolerances,
        profile_s,
    })
}

fn make_spec(g: &GridConfig) -> fracharm::Result<GridSpec> {
    GridSpec::new(g.n, g.points, g.period)
}

fn make_levels(spec: &GridSpec, lv: &TLevelConfig) -> fracharm::Result<TLevels> {
    let default = TLevels::default_for(spec);
    if lv.t_min.is_none() && lv.t_max.is_none() && lv.levels.is_none() {
        return Ok(default);
    }
    let t_min = lv.t_min.unwrap_or(default.t_min());
    let t_max = lv.t_max.unwrap_or(default.t_max());
    let count = lv.levels.unwrap_or(default.len());
    TLevels::log_spaced(spec, t_min, t_max, count)
}
