//! Experiment configuration: a TOML file, see `docs/config.md`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::group::{GroupModel, MeasureSpec};
use crate::verify::TheoremId;
use crate::weight::{power_weight, random_weight, Weight};

fn bad(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Splits `name{a,b,c}` into the name and trimmed arguments.
fn split_call(s: &str) -> Result<(String, Vec<String>)> {
    let s = s.trim();
    let open = s.find('{').ok_or_else(|| bad(format!("`{s}`: expected name{{args}}")))?;
    if !s.ends_with('}') {
        return Err(bad(format!("`{s}`: missing closing brace")));
    }
    let name = s[..open].trim().to_ascii_lowercase();
    let inner = &s[open + 1..s.len() - 1];
    let args =
        if inner.trim().is_empty() { Vec::new() } else { inner.split(',').map(|a| a.trim().to_string()).collect() };
    Ok((name, args))
}

fn num<T: std::str::FromStr>(spec: &str, what: &str, s: &str) -> Result<T> {
    s.parse().map_err(|_| bad(format!("`{spec}`: {what} `{s}` is not a valid number")))
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeasureToken {
    Haar,
    /// CSV of `element_id,value` masses.
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelSpec {
    Padic { p: u64, level: u32, measure: MeasureToken },
    Window { half_width: usize },
}

impl ModelSpec {
    /// `padic{p,L}`, `padic{p,L,haar}`, `padic{p,L,masses.csv}` or `window{N}`.
    pub fn parse(s: &str) -> Result<Self> {
        let (name, args) = split_call(s)?;
        match (name.as_str(), args.len()) {
            ("padic", 2 | 3) => {
                let measure = match args.get(2).map(String::as_str) {
                    None | Some("haar") => MeasureToken::Haar,
                    Some(path) => MeasureToken::File(PathBuf::from(path)),
                };
                Ok(ModelSpec::Padic { p: num(s, "prime", &args[0])?, level: num(s, "level", &args[1])?, measure })
            }
            ("window", 1) => Ok(ModelSpec::Window { half_width: num(s, "half-width", &args[0])? }),
            _ => Err(bad(format!("`{s}`: expected padic{{p,L[,measure]}} or window{{N}}"))),
        }
    }

    /// Builds the model; relative mass files resolve against `base_dir`.
    pub fn build(&self, base_dir: &Path) -> Result<GroupModel> {
        match self {
            ModelSpec::Padic { p, level, measure } => {
                let measure = match measure {
                    MeasureToken::Haar => MeasureSpec::Haar,
                    MeasureToken::File(path) => {
                        let file = fs::File::open(base_dir.join(path))?;
                        MeasureSpec::Masses(Weight::read_csv(file)?.values().to_vec())
                    }
                };
                GroupModel::padic(*p, *level, measure)
            }
            ModelSpec::Window { half_width } => GroupModel::integer_window(*half_width),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum WeightSpec {
    Power(f64),
    Random { log_min: f64, log_max: f64, seed: u64, count: u64 },
    File(PathBuf),
}

impl WeightSpec {
    /// `power{a}`, `random{log_min,log_max,seed,count}` or `file{path}`.
    pub fn parse(s: &str) -> Result<Self> {
        let (name, args) = split_call(s)?;
        match (name.as_str(), args.len()) {
            ("power", 1) => Ok(WeightSpec::Power(num(s, "exponent", &args[0])?)),
            ("random", 4) => {
                let spec = WeightSpec::Random {
                    log_min: num(s, "log_min", &args[0])?,
                    log_max: num(s, "log_max", &args[1])?,
                    seed: num(s, "seed", &args[2])?,
                    count: num(s, "count", &args[3])?,
                };
                if let WeightSpec::Random { log_min, log_max, count, .. } = spec {
                    if !(log_min <= log_max) || count == 0 {
                        return Err(bad(format!("`{s}`: need log_min <= log_max and count >= 1")));
                    }
                }
                Ok(spec)
            }
            ("file", 1) => Ok(WeightSpec::File(PathBuf::from(&args[0]))),
            _ => Err(bad(format!("`{s}`: expected power{{a}}, random{{log_min,log_max,seed,count}} or file{{path}}"))),
        }
    }

    /// Concrete weights with their report ids.
    pub fn expand(&self, model: &GroupModel, base_dir: &Path) -> Result<Vec<(String, Weight)>> {
        match self {
            WeightSpec::Power(a) => Ok(vec![(format!("power{{{a}}}"), power_weight(model, *a)?)]),
            WeightSpec::Random { log_min, log_max, seed, count } => (0..*count)
                .map(|k| {
                    let s = seed + k;
                    Ok((format!("random{{{log_min},{log_max},{s}}}"), random_weight(model, *log_min, *log_max, s)?))
                })
                .collect(),
            WeightSpec::File(path) => {
                let w = Weight::read_csv(fs::File::open(base_dir.join(path))?)?;
                if w.len() != model.order() {
                    return Err(bad(format!(
                        "{}: {} values for a group of order {}",
                        path.display(),
                        w.len(),
                        model.order()
                    )));
                }
                Ok(vec![(format!("file{{{}}}", path.display()), w)])
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    #[default]
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecisionMode {
    #[default]
    Float,
    Rational,
}

/// Largest group order accepted in rational mode.
pub const RATIONAL_MAX_ORDER: usize = 64;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: String,
    weights: Vec<String>,
    p_grid: Vec<f64>,
    #[serde(default = "default_q_grid")]
    q_grid: Vec<f64>,
    #[serde(default = "default_rho")]
    lambda_rho: f64,
    #[serde(default = "default_levels")]
    lambda_levels: u32,
    checks: Vec<String>,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
    #[serde(default)]
    format: Format,
    #[serde(default)]
    precision_mode: PrecisionMode,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_functions")]
    n_functions: usize,
    #[serde(default = "default_norm_random")]
    norm_random: usize,
}

fn default_q_grid() -> Vec<f64> {
    vec![1.0, 2.0]
}

fn default_rho() -> f64 {
    1.5
}

fn default_levels() -> u32 {
    8
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("lab-output")
}

fn default_functions() -> usize {
    4
}

fn default_norm_random() -> usize {
    16
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub model_text: String,
    pub weights: Vec<WeightSpec>,
    pub p_grid: Vec<f64>,
    pub q_grid: Vec<f64>,
    pub lambda_rho: f64,
    pub lambda_levels: u32,
    pub checks: Vec<TheoremId>,
    /// Resolved against `base_dir` when relative.
    pub output_dir: PathBuf,
    pub format: Format,
    pub precision_mode: PrecisionMode,
    /// Seed of the test functions used by the weak-type and operator-norm checks.
    pub seed: u64,
    pub n_functions: usize,
    pub norm_random: usize,
    /// Directory that relative paths are resolved against.
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        if raw.weights.is_empty() {
            return Err(bad("weights must not be empty"));
        }
        if raw.p_grid.is_empty() || raw.q_grid.is_empty() {
            return Err(bad("p_grid and q_grid must not be empty"));
        }
        if let Some(p) = raw.p_grid.iter().find(|&&p| !(p > 1.0 && p.is_finite())) {
            return Err(bad(format!("p_grid entry {p} must be a finite number > 1")));
        }
        if let Some(q) = raw.q_grid.iter().find(|&&q| !(q >= 1.0 && q.is_finite())) {
            return Err(bad(format!("q_grid entry {q} must be a finite number >= 1")));
        }
        if !(raw.lambda_rho > 1.0 && raw.lambda_rho.is_finite()) {
            return Err(bad(format!("lambda_rho {} must exceed 1", raw.lambda_rho)));
        }
        if raw.lambda_levels == 0 {
            return Err(bad("lambda_levels must be at least 1"));
        }
        if raw.checks.is_empty() {
            return Err(bad("checks must not be empty"));
        }
        if raw.n_functions == 0 {
            return Err(bad("n_functions must be at least 1"));
        }
        let mut checks = Vec::new();
        for c in &raw.checks {
            let t = TheoremId::parse(c).ok_or_else(|| bad(format!("unknown check `{c}`")))?;
            if !checks.contains(&t) {
                checks.push(t);
            }
        }
        let weights = raw.weights.iter().map(|w| WeightSpec::parse(w)).collect::<Result<Vec<_>>>()?;
        let output_dir = if raw.output_dir.is_absolute() { raw.output_dir } else { base_dir.join(raw.output_dir) };
        Ok(ExperimentConfig {
            model: ModelSpec::parse(&raw.model)?,
            model_text: raw.model,
            weights,
            p_grid: raw.p_grid,
            q_grid: raw.q_grid,
            lambda_rho: raw.lambda_rho,
            lambda_levels: raw.lambda_levels,
            checks,
            output_dir,
            format: raw.format,
            precision_mode: raw.precision_mode,
            seed: raw.seed,
            n_functions: raw.n_functions,
            norm_random: raw.norm_random,
            base_dir: base_dir.to_path_buf(),
        })
    }

    /// Reads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, &base)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        model = "padic{3,2,haar}"
        weights = ["power{1}"]
        p_grid = [2.0]
        checks = ["RHI"]
    "#;

    #[test]
    fn minimal_config_defaults() {
        let c = ExperimentConfig::from_toml(MINIMAL, Path::new("/tmp/x")).unwrap();
        assert_eq!(c.model, ModelSpec::Padic { p: 3, level: 2, measure: MeasureToken::Haar });
        assert_eq!(c.q_grid, vec![1.0, 2.0]);
        assert_eq!(c.lambda_rho, 1.5);
        assert_eq!(c.checks, vec![TheoremId::Rhi]);
        assert_eq!(c.format, Format::Both);
        assert_eq!(c.output_dir, PathBuf::from("/tmp/x/lab-output"));
    }

    #[test]
    fn rejects_invalid_configs() {
        let cases = [
            MINIMAL.replace(r#"checks = ["RHI"]"#, "checks = []"),
            MINIMAL.replace("p_grid = [2.0]", "p_grid = [1.0]"),
            MINIMAL.replace("p_grid = [2.0]", "p_grid = []"),
            MINIMAL.replace(r#"["RHI"]"#, r#"["NOPE"]"#),
            MINIMAL.replace("padic{3,2,haar}", "padic{3}"),
            MINIMAL.replace("power{1}", "random{1,0,1,1}"),
            format!("{MINIMAL}\nlambda_rho = 1.0"),
            format!("{MINIMAL}\nunknown_key = 3"),
            format!("{MINIMAL}\nformat = \"xml\""),
        ];
        for text in cases {
            assert!(matches!(ExperimentConfig::from_toml(&text, Path::new(".")), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn specs_parse() {
        assert_eq!(ModelSpec::parse("window{4}").unwrap(), ModelSpec::Window { half_width: 4 });
        assert_eq!(
            ModelSpec::parse(" padic{2, 3, m.csv} ").unwrap(),
            ModelSpec::Padic { p: 2, level: 3, measure: MeasureToken::File("m.csv".into()) }
        );
        assert_eq!(
            WeightSpec::parse("random{-3,3,7,4}").unwrap(),
            WeightSpec::Random { log_min: -3.0, log_max: 3.0, seed: 7, count: 4 }
        );
        assert!(WeightSpec::parse("power{x}").is_err());
        assert!(ModelSpec::parse("torus{3}").is_err());
    }

    #[test]
    fn random_spec_expands_with_consecutive_seeds() {
        let m = GroupModel::padic(3, 2, MeasureSpec::Haar).unwrap();
        let ws = WeightSpec::parse("random{-1,1,5,3}").unwrap().expand(&m, Path::new(".")).unwrap();
        let ids: Vec<&str> = ws.iter().map(|(id, _)| id.as_str()).collect();
        assert_eq!(ids, ["random{-1,1,5}", "random{-1,1,6}", "random{-1,1,7}"]);
        assert_eq!(ws[1].1, random_weight(&m, -1.0, 1.0, 6).unwrap());
    }
}
