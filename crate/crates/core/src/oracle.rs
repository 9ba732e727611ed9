//! Brute-force reference computations.
//!
//! Everything here enumerates every `(center, index)` pair straight from the
//! family table, materialises point lists and sums directly. Nothing is
//! shared with the enumeration engine in [`crate::maximal`] and
//! [`crate::constants`] beyond the family table itself, which makes these
//! routines usable as independent oracles.
//!
//! The `exact_*` functions accumulate in arbitrary-precision rationals. Any
//! `f64` converts to a rational without rounding, so the only rounding left
//! is the final conversion (and, for non-integral exponents, the final root).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{BaseSet, GroupModel, Index};

fn all_pairs(model: &GroupModel, k_max: Index) -> Vec<(BaseSet, Vec<usize>)> {
    let n = model.order();
    let mut out = Vec::new();
    for i in model.i_min()..=k_max {
        for c in 0..n {
            let pts: Vec<usize> = model.family(i).iter().map(|&u| (c + u) % n).collect();
            out.push((BaseSet::new(c, i), pts));
        }
    }
    out
}

/// `max over pairs (c, i ≤ k_max) with x in c+U_i of avg |f|`, in `f64`.
pub fn maximal(model: &GroupModel, f: &[f64], k_max: Index) -> Vec<f64> {
    let pairs = all_pairs(model, k_max);
    (0..model.order())
        .map(|x| {
            pairs
                .iter()
                .filter(|(_, pts)| pts.contains(&x))
                .map(|(_, pts)| {
                    let s: f64 = pts.iter().map(|&y| f[y].abs() * model.mass(y)).sum();
                    let m: f64 = pts.iter().map(|&y| model.mass(y)).sum();
                    s / m
                })
                .fold(0.0, f64::max)
        })
        .collect()
}

pub fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

fn exact_masses(model: &GroupModel) -> Vec<BigRational> {
    model.measure().iter().map(|&m| rational(m)).collect()
}

fn exact_average(f: &[BigRational], mu: &[BigRational], pts: &[usize]) -> BigRational {
    let mut s = BigRational::zero();
    let mut m = BigRational::zero();
    for &y in pts {
        s += &f[y] * &mu[y];
        m += &mu[y];
    }
    s / m
}

/// Exact maximal function over pairs of index at most `k_max`.
pub fn exact_maximal(model: &GroupModel, f: &[BigRational], k_max: Index) -> Vec<BigRational> {
    let mu = exact_masses(model);
    let pairs = all_pairs(model, k_max);
    let mut best = vec![BigRational::zero(); model.order()];
    for (_, pts) in &pairs {
        let a = exact_average(f, &mu, pts);
        for &x in pts {
            if a > best[x] {
                best[x] = a.clone();
            }
        }
    }
    best
}

/// An exactly computed constant. `power` is the exact value of
/// `constant^root`; `value` is `power^(1/root)` rounded once.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactConstant {
    pub value: f64,
    #[serde(skip)]
    pub power: Option<BigRational>,
    pub root: u32,
    pub witness: BaseSet,
}

/// Smallest `D` with `mu(x+U_theta(i)) ≤ D mu(x+U_i)`, exactly.
pub fn exact_doubling(model: &GroupModel) -> BigRational {
    let mu = exact_masses(model);
    let n = model.order();
    let mass = |c: usize, i: Index| -> BigRational {
        model.family(i).iter().map(|&u| mu[(c + u) % n].clone()).fold(BigRational::zero(), |a, b| a + b)
    };
    let mut d = BigRational::one();
    for i in model.index_range() {
        for x in 0..n {
            let r = mass(x, model.theta(i)) / mass(x, i);
            if r > d {
                d = r;
            }
        }
    }
    d
}

/// `[w]_{A_p}` by brute force.
///
/// * `p = 1`: exact `max_U avg_U w * max_U 1/w`.
/// * `p = 1 + 1/m` for a positive integer `m ≤ 64`: the dual weight
///   `w^{-m}` is rational, the maximum of `(avg w)^m avg w^{-m}` is exact
///   and only the final `m`-th root rounds.
/// * otherwise the dual weight is rounded once to `f64` and the averages
///   are exact; candidates are compared after conversion.
pub fn exact_ap_constant(model: &GroupModel, w: &[f64], p: f64) -> Result<ExactConstant> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::BadExponent("p >= 1"));
    }
    let mu = exact_masses(model);
    let wq: Vec<BigRational> = w.iter().map(|&v| rational(v)).collect();
    let pairs = all_pairs(model, model.i_max());
    let mut best: Option<(BigRational, BaseSet)> = None;
    let mut consider = |val: BigRational, v: BaseSet| match &best {
        Some((b, bv)) if val < *b || (val == *b && v >= *bv) => {}
        _ => best = Some((val, v)),
    };
    if p == 1.0 {
        for (v, pts) in &pairs {
            let inv_max = pts.iter().map(|&y| wq[y].recip()).max().unwrap();
            consider(exact_average(&wq, &mu, pts) * inv_max, *v);
        }
        let (b, v) = best.unwrap();
        return Ok(ExactConstant { value: to_f64(&b), power: Some(b), root: 1, witness: v });
    }
    let m = (1.0 / (p - 1.0)).round();
    if (1.0..=64.0).contains(&m) && 1.0 + 1.0 / m == p {
        let m = m as i32;
        let sigma: Vec<BigRational> = wq.iter().map(|v| v.recip().pow(m)).collect();
        for (v, pts) in &pairs {
            let val = exact_average(&wq, &mu, pts).pow(m) * exact_average(&sigma, &mu, pts);
            consider(val, *v);
        }
        let (b, v) = best.unwrap();
        let value = to_f64(&b).powf(1.0 / m as f64);
        return Ok(ExactConstant { value, power: Some(b), root: m as u32, witness: v });
    }
    let e = 1.0 - p / (p - 1.0);
    let sigma: Vec<BigRational> = w.iter().map(|&v| rational(v.powf(e))).collect();
    let mut best_f: Option<(f64, BaseSet)> = None;
    for (v, pts) in &pairs {
        let val = to_f64(&exact_average(&wq, &mu, pts)) * to_f64(&exact_average(&sigma, &mu, pts)).powf(p - 1.0);
        match best_f {
            Some((b, bv)) if val < b || (val == b && *v >= bv) => {}
            _ => best_f = Some((val, *v)),
        }
    }
    let (value, witness) = best_f.unwrap();
    Ok(ExactConstant { value, power: None, root: 1, witness })
}

/// Fujii–Wilson constant `max_U (1/w(U)) sum_{x in U} M(w chi_U)(x) mu(x)`,
/// exactly.
pub fn exact_ainfty_fw(model: &GroupModel, w: &[f64]) -> ExactConstant {
    let mu = exact_masses(model);
    let wq: Vec<BigRational> = w.iter().map(|&v| rational(v)).collect();
    let pairs = all_pairs(model, model.i_max());
    let n = model.order();
    let mut best: Option<(BigRational, BaseSet)> = None;
    for (u, upts) in &pairs {
        let mut g = vec![BigRational::zero(); n];
        for &x in upts {
            g[x] = wq[x].clone();
        }
        // Only x in U contributes; restrict the scan to pairs meeting U.
        let mut mg = vec![BigRational::zero(); n];
        for (_, pts) in &pairs {
            if !pts.iter().any(|y| upts.contains(y)) {
                continue;
            }
            let a = exact_average(&g, &mu, pts);
            for &x in pts {
                if a > mg[x] {
                    mg[x] = a.clone();
                }
            }
        }
        let mut num = BigRational::zero();
        let mut den = BigRational::zero();
        for &x in upts {
            num += &mg[x] * &mu[x];
            den += &wq[x] * &mu[x];
        }
        let val = num / den;
        match &best {
            Some((b, bv)) if val < *b || (val == *b && u >= bv) => {}
            _ => best = Some((val, *u)),
        }
    }
    let (b, v) = best.unwrap();
    ExactConstant { value: to_f64(&b), power: Some(b), root: 1, witness: v }
}

/// `max_x Mw(x) / w(x)`, exactly.
pub fn exact_a1_pointwise(model: &GroupModel, w: &[f64]) -> BigRational {
    let wq: Vec<BigRational> = w.iter().map(|&v| rational(v)).collect();
    let mw = exact_maximal(model, &wq, model.i_max());
    mw.iter().zip(&wq).map(|(a, b)| a / b).max().unwrap()
}

/// Relative difference `|a - b| / |b|`, exactly, as `f64`.
pub fn relative_gap(a: f64, b: &BigRational) -> f64 {
    let d = (rational(a) - b).abs();
    if b.is_zero() {
        return to_f64(&d);
    }
    to_f64(&(d / b.abs()))
}

/// Integer-valued rational, for building exact test inputs.
pub fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::MeasureSpec;
    use crate::weight::power_weight;

    #[test]
    fn z9_power_weight_a2_constant() {
        // 9 * 3^{-v(x)}: exact in f64, and the constant is scale-free.
        // The whole group gives (61/81)(7/3) = 427/243, beating the coset
        // {0,3,6} with (7/27) * 5 = 35/27.
        let m = GroupModel::padic(3, 2, MeasureSpec::Haar).unwrap();
        let w: Vec<f64> = power_weight(&m, 1.0).unwrap().iter().map(|v| (9.0 * v).round()).collect();
        let c = exact_ap_constant(&m, &w, 2.0).unwrap();
        assert_eq!(c.power.unwrap(), int(427) / int(243));
        assert_eq!(c.witness, BaseSet::new(0, 2));
    }

    #[test]
    fn doubling_of_valuation_measure() {
        // masses 1 + v(x): 3 at 0, 2 at 3 and 6, 1 elsewhere. The worst step
        // is the coset {1,4,7} (mass 3) against the group (mass 13).
        let m0 = GroupModel::padic(3, 2, MeasureSpec::Haar).unwrap();
        let masses = (0..9).map(|x| 1.0 + m0.valuation(x).unwrap() as f64).collect();
        let m = GroupModel::padic(3, 2, MeasureSpec::Masses(masses)).unwrap();
        assert_eq!(exact_doubling(&m), int(13) / int(3));
    }

    #[test]
    fn constant_weight_constants_are_one() {
        let m = GroupModel::integer_window(2).unwrap();
        let w = vec![2.0; m.order()];
        assert_eq!(exact_ap_constant(&m, &w, 2.0).unwrap().power.unwrap(), int(1));
        assert_eq!(exact_ap_constant(&m, &w, 1.0).unwrap().power.unwrap(), int(1));
        assert_eq!(exact_ainfty_fw(&m, &w).power.unwrap(), int(1));
    }
}
