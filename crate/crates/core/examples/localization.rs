//! Localization check on a deep 2-adic model, where it is not vacuous.
use lca_weights::decomp::{lambda_grid, localization_check};
use lca_weights::group::{GroupModel, MeasureSpec};
use lca_weights::weight::Weight;

fn main() -> lca_weights::Result<()> {
    let m = GroupModel::padic(2, 8, MeasureSpec::Haar)?;
    let mut values = vec![1.0; m.order()];
    values[0] = 1e6;
    let w = Weight::new(values)?;
    let u = m.whole();
    for lambda in lambda_grid(&m, &u, &w, 2.0, 4) {
        let r = localization_check(&m, &u, &w, lambda)?;
        println!(
            "lambda {lambda:.3}: {} items, {} checked points, vacuous {}, outside margin {:?}, pass {}",
            r.items,
            r.checked,
            r.is_vacuous(),
            r.min_outside_margin,
            r.pass()
        );
    }
    Ok(())
}
