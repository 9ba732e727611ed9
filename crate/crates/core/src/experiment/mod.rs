//! Config-driven experiment runner behind `lab run` and `lab describe`.

pub mod config;
pub mod report;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

pub use config::{ExperimentConfig, Format, ModelSpec, PrecisionMode, WeightSpec};
pub use report::ConstantsRow;

use crate::constants::{a1_constant, ainfty_exp, ainfty_fw, ap_constant};
use crate::decomp::{cz_decompose, lambda_grid, localization_check, CZFamily};
use crate::error::{Error, Result};
use crate::group::GroupModel;
use crate::oracle;
use crate::verify::{
    check_a1, check_buckley, check_duality, check_open_property, check_rhi_step1, check_rhi_with, check_weak_type,
    cz_row, localization_row, worst, HatTable, NormTestSpec, TheoremId, VerificationReport,
};
use crate::weight::{dual_weight, random_function, GroupFunction, Weight};

/// Environment variable capping the worker pool size.
pub const THREADS_ENV: &str = "LAB_THREADS";

/// `LAB_THREADS` as a positive integer, if set.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{THREADS_ENV}={v} is not a positive integer"))),
        },
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub rows: Vec<VerificationReport>,
    pub constants: Vec<ConstantsRow>,
    pub output_dir: PathBuf,
    pub summary: String,
}

impl RunOutcome {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    /// 0 when every check passes, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.pass() {
            0
        } else {
            1
        }
    }
}

struct WeightResult {
    rows: Vec<VerificationReport>,
    constants: Vec<ConstantsRow>,
    families: Vec<(String, CZFamily)>,
}

fn sanitize(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' }).collect()
}

fn row_or_fail(t: TheoremId, model: &GroupModel, p: Option<f64>, r: Result<VerificationReport>) -> VerificationReport {
    r.unwrap_or_else(|e| VerificationReport::failed(t, model, p, e.to_string()))
}

fn constants_rows(cfg: &ExperimentConfig, model: &GroupModel, id: &str, w: &Weight) -> Result<Vec<ConstantsRow>> {
    let exp = ainfty_exp(model, w).value;
    let rational = cfg.precision_mode == PrecisionMode::Rational;
    let (a_1, fw) = if rational {
        (oracle::exact_ap_constant(model, w, 1.0)?.value, oracle::exact_ainfty_fw(model, w).value)
    } else {
        (a1_constant(model, w).value, ainfty_fw(model, w).value)
    };
    cfg.p_grid
        .iter()
        .map(|&p| {
            let sigma = dual_weight(w, p)?;
            let (a_p, witness, sfw) = if rational {
                let c = oracle::exact_ap_constant(model, w, p)?;
                (c.value, c.witness, oracle::exact_ainfty_fw(model, &sigma).value)
            } else {
                let c = ap_constant(model, w, p)?;
                (c.value, c.witness, ainfty_fw(model, &sigma).value)
            };
            Ok(ConstantsRow {
                weight_id: id.to_string(),
                p,
                a_p,
                a_p_witness: witness.to_string(),
                a_1,
                ainfty_exp: exp,
                ainfty_fw: fw,
                sigma_ainfty_fw: sfw,
                precision: if rational { "rational" } else { "float" },
            })
        })
        .collect()
}

fn run_weight(
    cfg: &ExperimentConfig,
    model: &GroupModel,
    hats: &HatTable,
    functions: &[GroupFunction],
    id: &str,
    w: &Weight,
) -> Result<WeightResult> {
    let mut rows = Vec::new();
    let mut families = Vec::new();
    let tag = |r: VerificationReport| r.with_weight_id(id);
    for &t in &cfg.checks {
        match t {
            TheoremId::Rhi => {
                rows.push(tag(row_or_fail(t, model, None, check_rhi_with(model, w, hats).map(|c| c.worst))));
            }
            TheoremId::RhiStep1 => rows.push(tag(row_or_fail(t, model, None, check_rhi_step1(model, w)))),
            TheoremId::Open => {
                for &p in &cfg.p_grid {
                    rows.push(tag(row_or_fail(t, model, Some(p), check_open_property(model, w, p))));
                }
            }
            TheoremId::Duality => {
                for &p in &cfg.p_grid {
                    rows.push(tag(row_or_fail(t, model, Some(p), check_duality(model, w, p))));
                }
            }
            TheoremId::A1 => rows.push(tag(check_a1(model, w))),
            TheoremId::Weak => {
                for &q in &cfg.q_grid {
                    let per_f: Vec<VerificationReport> = functions
                        .iter()
                        .enumerate()
                        .map(|(k, f)| {
                            let mut r = row_or_fail(t, model, Some(q), check_weak_type(model, w, q, f));
                            r.witness = format!("f=random(seed={}); {}", cfg.seed + k as u64, r.witness);
                            r
                        })
                        .collect();
                    rows.push(tag(worst(&per_f).expect("at least one test function").clone()));
                }
            }
            TheoremId::Buckley => {
                let spec = NormTestSpec { n_random: cfg.norm_random, seed: cfg.seed };
                for &p in &cfg.p_grid {
                    match check_buckley(model, w, p, spec) {
                        Ok(c) => rows.extend(c.rows().into_iter().cloned().map(tag)),
                        Err(e) => rows.push(tag(VerificationReport::failed(t, model, Some(p), e.to_string()))),
                    }
                }
            }
            TheoremId::Cz | TheoremId::Localization => {
                let u = model.whole();
                for (k, lambda) in lambda_grid(model, &u, w, cfg.lambda_rho, cfg.lambda_levels).into_iter().enumerate()
                {
                    if t == TheoremId::Cz {
                        let row = cz_decompose(model, &u, w, lambda).and_then(|fam| {
                            let row = cz_row(model, w, &fam)?;
                            families.push((format!("{}_lambda{k}", sanitize(id)), fam));
                            Ok(row)
                        });
                        rows.push(tag(row_or_fail(t, model, None, row)));
                    } else {
                        let row = localization_check(model, &u, w, lambda).map(|r| localization_row(model, &u, &r));
                        rows.push(tag(row_or_fail(t, model, None, row)));
                    }
                }
            }
        }
    }
    Ok(WeightResult { rows, constants: constants_rows(cfg, model, id, w)?, families })
}

/// Runs every requested check for every weight and writes the report files
/// under the configured output directory. The worker pool is capped by
/// `LAB_THREADS`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    run_into(cfg, &cfg.output_dir)
}

/// As [`run`], writing to `output_dir` instead of the configured directory.
pub fn run_into(cfg: &ExperimentConfig, output_dir: &Path) -> Result<RunOutcome> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads_from_env()? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run_in_pool(cfg, output_dir))
}

fn run_in_pool(cfg: &ExperimentConfig, output_dir: &Path) -> Result<RunOutcome> {
    let config_err = |e: Error| match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    };
    let model = cfg.model.build(&cfg.base_dir).map_err(config_err)?;
    if cfg.precision_mode == PrecisionMode::Rational && model.order() > config::RATIONAL_MAX_ORDER {
        return Err(Error::Config(format!(
            "rational mode supports groups of order at most {}, got {}",
            config::RATIONAL_MAX_ORDER,
            model.order()
        )));
    }
    let mut weights = Vec::new();
    for spec in &cfg.weights {
        weights.extend(spec.expand(&model, &cfg.base_dir).map_err(config_err)?);
    }
    let hats = HatTable::new(&model);
    let functions: Vec<GroupFunction> =
        (0..cfg.n_functions as u64).map(|k| random_function(&model, 1.0, cfg.seed + k)).collect();
    let results: Vec<Result<WeightResult>> =
        weights.par_iter().map(|(id, w)| run_weight(cfg, &model, &hats, &functions, id, w)).collect();
    let mut rows = Vec::new();
    let mut constants = Vec::new();
    let mut families = Vec::new();
    for (k, r) in results.into_iter().enumerate() {
        let r = r?;
        rows.extend(r.rows);
        constants.extend(r.constants);
        families.extend(r.families.into_iter().map(|(name, f)| (format!("{k:03}_{name}"), f)));
    }
    fs::create_dir_all(output_dir)?;
    if cfg.format.csv() {
        report::write_report_csv(fs::File::create(output_dir.join("report.csv"))?, &rows)?;
    }
    if cfg.format.json() {
        report::write_report_json(fs::File::create(output_dir.join("report.json"))?, &rows)?;
    }
    report::write_constants_csv(fs::File::create(output_dir.join("constants.csv"))?, &constants)?;
    if !families.is_empty() {
        let dir = output_dir.join("cz_families");
        fs::create_dir_all(&dir)?;
        for (name, fam) in &families {
            let mut text = serde_json::to_string_pretty(fam)?;
            text.push('\n');
            fs::write(dir.join(format!("{name}.json")), text)?;
        }
    }
    let summary = report::summary(&rows);
    fs::write(output_dir.join("summary.txt"), &summary)?;
    Ok(RunOutcome { rows, constants, output_dir: output_dir.to_path_buf(), summary })
}

/// Human-readable summary of a model: order, index range, level sizes and
/// masses, the dilation map and the exhaustively computed doubling constant.
pub fn describe(spec: &str) -> Result<String> {
    let model = ModelSpec::parse(spec)?.build(Path::new("."))?;
    Ok(describe_model(&model))
}

pub fn describe_model(model: &GroupModel) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{}: {} elements, D={}, indices {}..{}",
        model.name(),
        model.order(),
        model.doubling(),
        model.i_min(),
        model.i_max()
    );
    let _ = writeln!(s, "{:>6} {:>8} {:>8} {:>14}", "index", "|U_i|", "theta", "mu(U_i)");
    for i in model.index_range() {
        let mass = model.mass_of(model.family(i));
        let _ = writeln!(s, "{:>6} {:>8} {:>8} {:>14}", i, model.family(i).len(), model.theta(i), mass);
    }
    let _ = writeln!(s, "{} distinct base sets", model.base_sets().len());
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn describe_padic() {
        let d = describe("padic{3,2}").unwrap();
        assert!(d.starts_with("padic{3,2}: 9 elements, D=3, indices 0..2\n"), "{d}");
        assert!(d.contains("13 distinct base sets"));
        assert!(describe("padic{2,1}").unwrap().starts_with("padic{2,1}: 2 elements"));
        assert!(describe("padic{4,1}").is_err());
    }

    #[test]
    fn describe_window() {
        let d = describe("window{4}").unwrap();
        assert!(d.starts_with("window{4}: 32 elements, D=3, indices 0..5\n"), "{d}");
    }

    #[test]
    fn sanitized_names() {
        assert_eq!(sanitize("random{-3,3,7}"), "random_-3_3_7_");
    }
}
