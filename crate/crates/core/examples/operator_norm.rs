//! Lower bounds for the weighted operator norm against the Buckley bounds.
use lca_weights::group::{GroupModel, MeasureSpec};
use lca_weights::verify::{check_buckley, NormTestSpec};
use lca_weights::weight::power_weight;

fn main() -> lca_weights::Result<()> {
    let m = GroupModel::padic(3, 3, MeasureSpec::Haar)?;
    for a in [-1.5, 0.5, 1.0] {
        let w = power_weight(&m, a)?;
        for p in [1.5, 2.0, 3.0] {
            let c = check_buckley(&m, &w, p, NormTestSpec::default())?;
            println!(
                "a={a:>4} p={p}: lower {:.4} (stages {:.4?}), mixed {:.4e}, classical {:.4e}",
                c.estimate.value, c.estimate.stages, c.mixed.rhs, c.fold.rhs
            );
        }
    }
    Ok(())
}
