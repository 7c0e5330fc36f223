//! The `run` subcommand: harness reports, the per-sample table and the
//! extension profiles.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use fracharm::commutators::{standard_family, verify_estimate, HarnessConfig, RatioReport};
use fracharm::extension::{boundary_heights, boundary_limit_check, decay_profile, extend_field, DerivativeFlags};
use fracharm::grid::make_function;
use fracharm::TestFunctionDescriptor;

use crate::config::Plan;
use crate::failure::Failure;
use crate::symbols;

pub const SAMPLES_FILE: &str = "samples.csv";

/// Everything a run wrote, in the order it was written.
#[derive(Debug, Default)]
pub struct RunOutcome {
    pub reports: Vec<RatioReport>,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn failed(&self) -> Vec<String> {
        self.reports
            .iter()
            .filter(|r| !r.pass)
            .map(|r| format!("{}: {}", r.estimate_id, r.failures.join("; ")))
            .collect()
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::Output(format!("{}: {e}", path.display())))
}

pub fn execute(plan: &Plan) -> Result<RunOutcome, Failure> {
    fs::create_dir_all(&plan.out).map_err(|e| Failure::Output(format!("{}: {e}", plan.out.display())))?;
    let mut outcome = RunOutcome::default();
    let mut table = csv::Writer::from_writer(Vec::new());
    table
        .write_record([
            "estimate_id",
            "seed",
            "index",
            "role",
            "lhs",
            "rhs",
            "ratio",
            "ratio_half",
            "ratio_double",
            "projected_mass",
        ])
        .map_err(|e| Failure::Output(e.to_string()))?;

    for job in &plan.jobs {
        let id = job.descriptor.id;
        let cfg = HarnessConfig {
            slack: plan.tolerances.slack,
            stability_tol: plan.tolerances.stability_tol,
            zero_tol: plan.tolerances.zero_tol,
            ..HarnessConfig::new(job.spec)
        };
        for &seed in &job.seeds {
            let family = standard_family(id, &job.spec, seed);
            let report = verify_estimate(&job.descriptor, &family, &cfg)
                .map_err(|e| Failure::numerical(&format!("{id} (seed {seed})"), e))?;
            let path = plan.out.join(format!("{id}-seed{seed}.json"));
            let mut json = serde_json::to_vec_pretty(&report).map_err(|e| Failure::Output(e.to_string()))?;
            json.push(b'\n');
            write_file(&path, &json)?;
            outcome.files.push(path);

            let seed_s = seed.to_string();
            for s in &report.samples {
                table
                    .write_record([
                        id.as_str(),
                        &seed_s,
                        &s.index.to_string(),
                        s.role,
                        &s.lhs.to_string(),
                        &s.rhs.to_string(),
                        &s.ratio.to_string(),
                        &s.dilated_ratios[0].to_string(),
                        &s.dilated_ratios[1].to_string(),
                        &s.projected_mass.to_string(),
                    ])
                    .map_err(|e| Failure::Output(e.to_string()))?;
            }
            for z in &report.zero_rhs {
                table
                    .write_record([
                        id.as_str(),
                        &seed_s,
                        &z.index.to_string(),
                        "zero-rhs",
                        &z.lhs.to_string(),
                        &z.rhs.to_string(),
                        "",
                        "",
                        "",
                        "",
                    ])
                    .map_err(|e| Failure::Output(e.to_string()))?;
            }
            outcome.reports.push(report);
        }
    }
    let bytes = table.into_inner().map_err(|e| Failure::Output(e.to_string()))?;
    let path = plan.out.join(SAMPLES_FILE);
    write_file(&path, &bytes)?;
    outcome.files.push(path);

    for &s in &plan.profile_s {
        outcome.files.extend(write_profiles(plan, s)?);
    }
    Ok(outcome)
}

/// Decay and boundary-trace profiles of the extension of a centered bump.
fn write_profiles(plan: &Plan, s: f64) -> Result<Vec<PathBuf>, Failure> {
    let spec = plan.spec;
    let l = spec.period();
    let center = if spec.dim() == 1 { [0.5 * l, 0.0] } else { [0.5 * l; 2] };
    let f = make_function(&TestFunctionDescriptor::bump(center, l / 8.0), &spec)
        .map_err(|e| Failure::numerical("profile function", e))?;
    let symbol = symbols::load(s, spec.dim())?;
    let field = extend_field(&f, &symbol, &plan.levels, DerivativeFlags::ALL)
        .map_err(|e| Failure::numerical(&format!("extension (s = {s})"), e))?;
    let value = decay_profile(&field, 0).map_err(|e| Failure::numerical("decay_profile", e))?;
    let grad = decay_profile(&field, 1).map_err(|e| Failure::numerical("decay_profile", e))?;

    let mut decay = Vec::new();
    let _ = writeln!(decay, "# s={s} n={} N={} L={l} bump radius {}", spec.dim(), spec.points(), l / 8.0);
    let _ = writeln!(decay, "# t sup|F| sup|grad F| t*sup|grad F|");
    for (a, b) in value.iter().zip(&grad) {
        let _ = writeln!(decay, "{} {} {} {}", a.t, a.sup, b.sup, b.scaled_linf);
    }

    let limit = boundary_limit_check(&f, &symbol, &boundary_heights(&spec, 12))
        .map_err(|e| Failure::numerical(&format!("boundary_limit_check (s = {s})"), e))?;
    let mut boundary = Vec::new();
    let _ = writeln!(boundary, "# s={s} n={} N={} L={l} fitted c={}", spec.dim(), spec.points(), limit.c);
    let _ = writeln!(boundary, "# t c_t residual");
    for lv in &limit.levels {
        let _ = writeln!(boundary, "{} {} {}", lv.t, lv.c_t, lv.residual);
    }

    let decay_path = plan.out.join(format!("profile-decay-s{s}.txt"));
    let boundary_path = plan.out.join(format!("profile-boundary-s{s}.txt"));
    write_file(&decay_path, &decay)?;
    write_file(&boundary_path, &boundary)?;
    Ok(vec![decay_path, boundary_path])
}
