//! Calderon-Zygmund families over a threshold grid, with their checks.
use lca_weights::decomp::{cz_decompose, lambda_grid, verify_cz};
use lca_weights::group::{GroupModel, MeasureSpec};
use lca_weights::weight::random_weight;

fn main() -> lca_weights::Result<()> {
    let m = GroupModel::padic(2, 5, MeasureSpec::Haar)?;
    let w = random_weight(&m, -3.0, 3.0, 11)?;
    let u = m.whole();
    for lambda in lambda_grid(&m, &u, &w, 1.5, 6) {
        let fam = cz_decompose(&m, &u, &w, lambda)?;
        let r = verify_cz(&m, &w, &fam)?;
        println!(
            "lambda {lambda:>9.4}: {} sets, selected mass {} <= level mass {} <= {}, pass {}",
            fam.len(),
            r.selected_mass,
            r.level_set_mass,
            r.doubled_mass_bound,
            r.pass()
        );
        for item in &fam.items {
            println!("    center {:>3} index {} ({} points)", m.label(item.center), item.index, item.points.len());
        }
    }
    Ok(())
}
