//! Frozen outputs. Set `LAB_UPDATE_GOLDEN=1` to rewrite the files after an
//! intentional change.

use std::fs;
use std::path::PathBuf;

use lca_weights::decomp::cz_decompose;
use lca_weights::experiment::{self, ExperimentConfig};
use lca_weights::group::{GroupModel, MeasureSpec};
use lca_weights::verify::{estimate_operator_norm, NormTestSpec};
use lca_weights::weight::{power_weight, random_weight, Weight};

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("testdata").join(name)
}

fn check_golden(name: &str, actual: &str) {
    let path = golden_path(name);
    if std::env::var_os("LAB_UPDATE_GOLDEN").is_some() {
        fs::write(&path, actual).unwrap();
        return;
    }
    let expected = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(expected, actual, "{name} differs from the frozen copy");
}

/// Compares numeric CSV fields to 1e-12 relative, everything else exactly.
fn check_golden_numeric(name: &str, actual: &str) {
    let path = golden_path(name);
    if std::env::var_os("LAB_UPDATE_GOLDEN").is_some() {
        fs::write(&path, actual).unwrap();
        return;
    }
    let expected = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let mut a = csv::Reader::from_reader(actual.as_bytes());
    let mut e = csv::Reader::from_reader(expected.as_bytes());
    assert_eq!(a.headers().unwrap(), e.headers().unwrap());
    let ra: Vec<csv::StringRecord> = a.records().map(|r| r.unwrap()).collect();
    let re: Vec<csv::StringRecord> = e.records().map(|r| r.unwrap()).collect();
    assert_eq!(ra.len(), re.len(), "{name}: row count");
    for (x, y) in ra.iter().zip(&re) {
        for (u, v) in x.iter().zip(y) {
            match (u.parse::<f64>(), v.parse::<f64>()) {
                (Ok(u), Ok(v)) => assert!((u - v).abs() <= 1e-12 * v.abs().max(1e-300), "{name}: {u} vs {v}"),
                _ => assert_eq!(u, v, "{name}"),
            }
        }
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

#[test]
fn random_weight_seed_1() {
    let m = GroupModel::padic(3, 2, MeasureSpec::Haar).unwrap();
    let w = random_weight(&m, -3.0, 3.0, 1).unwrap();
    let mut s = String::from("x,w\n");
    for (x, v) in w.values().iter().enumerate() {
        s.push_str(&format!("{x},{}\n", fmt(*v)));
    }
    check_golden_numeric("random_weight_seed1.csv", &s);
}

#[test]
fn spike_family_on_z27() {
    let m = GroupModel::padic(3, 3, MeasureSpec::Haar).unwrap();
    let mut values = vec![1.0; 27];
    values[0] = 50.0;
    values[13] = 20.0;
    let w = Weight::new(values).unwrap();
    let fam = cz_decompose(&m, &m.whole(), &w, 10.0).unwrap();
    let mut text = serde_json::to_string_pretty(&fam).unwrap();
    text.push('\n');
    check_golden("cz_spike_z27.json", &text);
}

#[test]
fn operator_norm_lower_bounds_on_z27() {
    let m = GroupModel::padic(3, 3, MeasureSpec::Haar).unwrap();
    let mut s = String::from("a,p,estimate,stage_dual,stage_indicator,stage_random\n");
    for a in [-1.5, -0.5, 0.5, 1.0] {
        let w = power_weight(&m, a).unwrap();
        for p in [1.5, 2.0, 3.0] {
            let e = estimate_operator_norm(&m, &w, p, NormTestSpec::default()).unwrap();
            s.push_str(&format!(
                "{a},{p},{},{},{},{}\n",
                fmt(e.value),
                fmt(e.stages[0]),
                fmt(e.stages[1]),
                fmt(e.stages[2])
            ));
        }
    }
    check_golden_numeric("operator_norm_z27.csv", &s);
}

#[test]
fn minimal_config_report() {
    let dir = tempfile::TempDir::new().unwrap();
    let cfg_path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/minimal.toml");
    let cfg = ExperimentConfig::load(&cfg_path).unwrap();
    let outcome = experiment::run_into(&cfg, dir.path()).unwrap();
    assert_eq!(outcome.exit_code(), 0);
    check_golden_numeric("minimal_report.csv", &fs::read_to_string(dir.path().join("report.csv")).unwrap());
    check_golden_numeric("minimal_constants.csv", &fs::read_to_string(dir.path().join("constants.csv")).unwrap());
}
