//! Runs the bundled minimal configuration into a scratch directory.
use std::path::Path;

use lca_weights::experiment::{self, ExperimentConfig};

fn main() -> lca_weights::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/minimal.toml");
    let cfg = ExperimentConfig::load(&path)?;
    let out = std::env::temp_dir().join("lab-example-run");
    let outcome = experiment::run_into(&cfg, &out)?;
    print!("{}", outcome.summary);
    println!("{} rows written under {}", outcome.rows.len(), out.display());
    Ok(())
}
