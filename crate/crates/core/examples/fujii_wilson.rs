//! The two A_infinity constants, and a weight whose Fujii-Wilson constant
//! exceeds its A_2 constant.
use lca_weights::constants::{ainfty_exp, ainfty_fw, ap_constant};
use lca_weights::group::{GroupModel, MeasureSpec};
use lca_weights::weight::{power_weight, random_weight, Weight};

fn main() -> lca_weights::Result<()> {
    let m = GroupModel::padic(3, 3, MeasureSpec::Haar)?;
    for (name, w) in [
        ("power{1}", power_weight(&m, 1.0)?),
        ("power{-1.5}", power_weight(&m, -1.5)?),
        ("random{-3,3,7}", random_weight(&m, -3.0, 3.0, 7)?),
    ] {
        let fw = ainfty_fw(&m, &w);
        println!("{name:>16}: FW {:.6} at {}, exp {:.6}", fw.value, fw.witness, ainfty_exp(&m, &w).value);
    }
    let z2 = GroupModel::padic(2, 1, MeasureSpec::Haar)?;
    let w = Weight::new(vec![1.0, 2.0])?;
    println!("Z/2, w = (1, 2): FW {:.6} > A_2 {:.6}", ainfty_fw(&z2, &w).value, ap_constant(&z2, &w, 2.0)?.value);
    Ok(())
}
