//! Weight constants and the closed-form exponents built from them.
//!
//! Every supremum over base sets is a maximum over the distinct sets of
//! [`GroupModel::base_sets`]. Terms are computed in parallel, then reduced
//! sequentially in tie-break order so the recorded witness is the smallest
//! `(index, center)` among the maximisers.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{BaseSet, GroupModel};
use crate::weight::{conjugate, Weight};

/// A constant together with the base set attaining it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Constant {
    pub value: f64,
    pub witness: BaseSet,
}

/// Sequential arg-max in list order with strict improvement.
fn arg_max(sets: &[BaseSet], terms: &[f64]) -> Constant {
    let mut best = Constant { value: f64::NEG_INFINITY, witness: sets[0] };
    for (v, &t) in sets.iter().zip(terms) {
        if t > best.value {
            best = Constant { value: t, witness: *v };
        }
    }
    best
}

fn log_sum_exp(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    m + terms.map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// `[w]_{A_p}` for `p ≥ 1`.
///
/// For `p > 1` each term `(avg w)(avg w^{1-p'})^{p-1}` is assembled in log
/// space, so `w^{1-p'}` never has to be represented when `p` is close to 1.
pub fn ap_constant(model: &GroupModel, w: &Weight, p: f64) -> Result<Constant> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::BadExponent("p >= 1"));
    }
    let sets = model.base_sets();
    let masses = model.base_set_masses();
    let terms: Vec<f64> = if p == 1.0 {
        sets.par_iter()
            .zip(masses)
            .map(|(v, &m)| {
                let pts = model.points(v);
                let avg = pts.iter().map(|&x| w[x] * model.mass(x)).sum::<f64>() / m;
                let lo = pts.iter().map(|&x| w[x]).fold(f64::INFINITY, f64::min);
                avg / lo
            })
            .collect()
    } else {
        let e = 1.0 - conjugate(p)?;
        sets.par_iter()
            .zip(masses)
            .map(|(v, &m)| {
                let pts = model.points(v);
                let avg = pts.iter().map(|&x| w[x] * model.mass(x)).sum::<f64>() / m;
                let log_sigma = log_sum_exp(pts.iter().map(|&x| e * w[x].ln() + model.mass(x).ln())) - m.ln();
                (avg.ln() + (p - 1.0) * log_sigma).exp()
            })
            .collect()
    };
    Ok(arg_max(sets, &terms))
}

/// `[w]_{A_1} = max_U (avg_U w) / min_U w`.
pub fn a1_constant(model: &GroupModel, w: &Weight) -> Constant {
    ap_constant(model, w, 1.0).expect("p = 1 is admissible")
}

/// Exponential A∞ constant `max_U (avg_U w) exp(-avg_U log w)`.
pub fn ainfty_exp(model: &GroupModel, w: &Weight) -> Constant {
    let sets = model.base_sets();
    let masses = model.base_set_masses();
    let terms: Vec<f64> = sets
        .par_iter()
        .zip(masses)
        .map(|(v, &m)| {
            let pts = model.points(v);
            let avg = pts.iter().map(|&x| w[x] * model.mass(x)).sum::<f64>() / m;
            let avg_log = pts.iter().map(|&x| w[x].ln() * model.mass(x)).sum::<f64>() / m;
            (avg.ln() - avg_log).exp()
        })
        .collect();
    arg_max(sets, &terms)
}

/// `mu(c + U_i)` for every level and center.
pub(crate) fn mass_table(model: &GroupModel) -> Vec<Vec<f64>> {
    model.index_range().map(|i| (0..model.order()).map(|c| model.base_mass(&BaseSet::new(c, i))).collect()).collect()
}

/// `sum_{x in U} M(w chi_U)(x) mu(x) / w(U)` with the global maximal
/// operator.
pub(crate) fn fw_term(model: &GroupModel, w: &[f64], u: &BaseSet, masses: &[Vec<f64>]) -> f64 {
    let n = model.order();
    let pts = model.points(u);
    let mut best = vec![0.0f64; pts.len()];
    let mut integral = vec![0.0f64; n];
    for (level, i) in model.index_range().enumerate() {
        let offs = model.family(i);
        // Sets c + U_i meeting U are exactly those with c = y - u, y in U.
        for &y in &pts {
            let wy = w[y] * model.mass(y);
            for &d in offs {
                integral[model.sub(y, d)] += wy;
            }
        }
        for (k, &x) in pts.iter().enumerate() {
            for &d in offs {
                let c = model.sub(x, d);
                let a = integral[c] / masses[level][c];
                if a > best[k] {
                    best[k] = a;
                }
            }
        }
        for &y in &pts {
            for &d in offs {
                integral[model.sub(y, d)] = 0.0;
            }
        }
    }
    let num: f64 = pts.iter().zip(&best).map(|(&x, b)| b * model.mass(x)).sum();
    let den: f64 = pts.iter().map(|&x| w[x] * model.mass(x)).sum();
    num / den
}

/// Fujii–Wilson constant `max_U (1/w(U)) sum_{x in U} M(w chi_U)(x) mu(x)`.
pub fn ainfty_fw(model: &GroupModel, w: &Weight) -> Constant {
    let masses = mass_table(model);
    let sets = model.base_sets();
    let terms: Vec<f64> = sets.par_iter().map(|u| fw_term(model, w, u, &masses)).collect();
    arg_max(sets, &terms)
}

fn require(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Precondition(what.to_string()))
    }
}

/// Slack for `fw ≥ 1`: the computed constant can land a few ulps below 1.
const FW_FLOOR: f64 = 1.0 - 1e-12;

/// Reverse Hölder exponent `r = 1 + 1/(4 D^10 fw - 1)`.
pub fn rhi_exponent(d: f64, fw: f64) -> Result<f64> {
    require(d >= 1.0 && d.is_finite(), "D >= 1")?;
    require(fw >= FW_FLOOR && fw.is_finite(), "[w]_Ainfty >= 1")?;
    Ok(1.0 + 1.0 / (4.0 * d.powi(10) * fw - 1.0))
}

/// Openness margin `eps = (p - 1) / (4 D^10 fw_sigma)`.
pub fn open_epsilon(p: f64, d: f64, fw_sigma: f64) -> Result<f64> {
    require(p > 1.0 && p.is_finite(), "p > 1")?;
    require(d >= 1.0 && d.is_finite(), "D >= 1")?;
    require(fw_sigma >= FW_FLOOR && fw_sigma.is_finite(), "[sigma]_Ainfty >= 1")?;
    Ok((p - 1.0) / (4.0 * d.powi(10) * fw_sigma))
}

/// `C(p, D) = ((p/(p-1)) 2^{2p+1} D^{6p+8})^{1/p}`.
pub fn buckley_explicit_constant(p: f64, d: f64) -> Result<f64> {
    require(p > 1.0 && p.is_finite(), "p > 1")?;
    require(d >= 1.0 && d.is_finite(), "D >= 1")?;
    let log = (p / (p - 1.0)).ln() + (2.0 * p + 1.0) * 2f64.ln() + (6.0 * p + 8.0) * d.ln();
    Ok((log / p).exp())
}

/// Every constant of a weight at one exponent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantSet {
    pub p: f64,
    pub a_p: Constant,
    pub a_1: Constant,
    pub ainfty_exp: Constant,
    pub ainfty_fw: Constant,
    pub sigma_ainfty_fw: Constant,
}

pub fn constant_set(model: &GroupModel, w: &Weight, p: f64) -> Result<ConstantSet> {
    let sigma = crate::weight::dual_weight(w, p)?;
    Ok(ConstantSet {
        p,
        a_p: ap_constant(model, w, p)?,
        a_1: a1_constant(model, w),
        ainfty_exp: ainfty_exp(model, w),
        ainfty_fw: ainfty_fw(model, w),
        sigma_ainfty_fw: ainfty_fw(model, &sigma),
    })
}
