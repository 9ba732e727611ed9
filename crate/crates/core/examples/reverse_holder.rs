//! Reverse Hoelder inequality over every base set.
use lca_weights::group::{GroupModel, MeasureSpec};
use lca_weights::verify::check_rhi;
use lca_weights::weight::{power_weight, random_weight};

fn main() -> lca_weights::Result<()> {
    for m in [GroupModel::padic(2, 3, MeasureSpec::Haar)?, GroupModel::integer_window(8)?] {
        for (name, w) in [("power{2}", power_weight(&m, 2.0)?), ("random{-3,3,1}", random_weight(&m, -3.0, 3.0, 1)?)] {
            let c = check_rhi(&m, &w)?;
            println!(
                "{} {name}: FW {:.4}, r - 1 = {:.3e}, worst ratio {:.4} at {}",
                m.name(),
                c.fw.value,
                c.exponent - 1.0,
                c.worst.ratio,
                c.worst.witness
            );
        }
    }
    Ok(())
}
