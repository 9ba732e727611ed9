//! Maximal function of a spike on Z/27, full and truncated.
use lca_weights::group::{GroupModel, MeasureSpec};
use lca_weights::maximal::{maximal, truncated_maximal};

fn main() -> lca_weights::Result<()> {
    let m = GroupModel::padic(3, 3, MeasureSpec::Haar)?;
    let mut f = vec![0.0; m.order()];
    f[0] = 27.0;
    let full = maximal(&m, &f);
    println!("{:>4} {:>10} {:>10}", "x", "Mf", "M_1 f");
    let trunc = truncated_maximal(&m, &f, 1)?;
    for x in 0..m.order() {
        println!("{:>4} {:>10.4} {:>10.4}", m.label(x), full.values()[x], trunc.values()[x]);
    }
    Ok(())
}
