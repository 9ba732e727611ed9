//! Muckenhoupt constants of power weights, checked against exact arithmetic.
use lca_weights::constants::{a1_constant, ap_constant};
use lca_weights::group::{GroupModel, MeasureSpec};
use lca_weights::oracle;
use lca_weights::weight::power_weight;

fn main() -> lca_weights::Result<()> {
    let m = GroupModel::padic(2, 4, MeasureSpec::Haar)?;
    println!("{:>6} {:>6} {:>14} {:>14} {:>12}", "a", "p", "[w]_Ap", "exact", "witness");
    for a in [-0.5, 0.5, 1.0] {
        let w = power_weight(&m, a)?;
        for p in [1.5, 2.0, 3.0] {
            let c = ap_constant(&m, &w, p)?;
            let exact = oracle::exact_ap_constant(&m, &w, p)?;
            println!("{a:>6} {p:>6} {:>14.8} {:>14.8} {:>12}", c.value, exact.value, c.witness.to_string());
        }
        println!("{a:>6} {:>6} {:>14.8}", 1, a1_constant(&m, &w).value);
    }
    Ok(())
}
