//! Each step of the weak-type estimate on one Vitali selection.
use lca_weights::group::{GroupModel, MeasureSpec};
use lca_weights::verify::{check_weak_type, weak_type_chain};
use lca_weights::weight::{power_weight, random_function};

fn main() -> lca_weights::Result<()> {
    let m = GroupModel::padic(3, 3, MeasureSpec::Haar)?;
    let w = power_weight(&m, 0.5)?;
    let f = random_function(&m, 1.0, 3);
    let window: Vec<usize> = (0..m.order()).collect();
    for q in [1.0, 2.0] {
        let chain = weak_type_chain(&m, &w, q, &f, 0.5, m.i_max(), &window)?;
        println!("q={q}: {} selected sets, monotone {}", chain.selected.len(), chain.is_monotone());
        for (k, s) in chain.steps.iter().enumerate() {
            println!("    step {k}: {s:.6e}");
        }
        let r = check_weak_type(&m, &w, q, &f)?;
        println!("    exact weak norm ratio {:.4} ({})", r.ratio, r.witness);
    }
    Ok(())
}
