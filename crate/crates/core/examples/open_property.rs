//! The A_{p - eps} constant stays under the bound for the computed eps.
use lca_weights::group::{GroupModel, MeasureSpec};
use lca_weights::verify::check_open_property;
use lca_weights::weight::power_weight;

fn main() -> lca_weights::Result<()> {
    let m = GroupModel::padic(3, 2, MeasureSpec::Haar)?;
    for a in [-1.0, 0.5, 1.5] {
        let w = power_weight(&m, a)?;
        for p in [1.5, 2.0, 3.0] {
            let r = check_open_property(&m, &w, p)?;
            println!("a={a:>4} p={p}: lhs {:.6} rhs {:.6} pass {} ({})", r.lhs, r.rhs, r.pass, r.witness);
        }
    }
    Ok(())
}
