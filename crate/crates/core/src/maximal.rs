//! Maximal operators computed exactly by enumerating base sets.
//!
//! Each operator is a maximum of averages of `|f|` over a finite list of base
//! sets. Lists are scanned in tie-break order and a set replaces the current
//! witness only on a strictly larger average, so the witness recorded for a
//! point is the smallest `(index, center)` among the maximisers.

use serde::Serialize;

use crate::error::Result;
use crate::group::{BaseSet, GroupModel, Index};
use crate::weight::GroupFunction;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaximalFunction {
    pub values: GroupFunction,
    /// `None` for points covered by no admissible set (outside `Û` for the
    /// local operator).
    pub witnesses: Vec<Option<BaseSet>>,
}

impl MaximalFunction {
    pub fn values(&self) -> &[f64] {
        self.values.values()
    }
}

/// `sum_{x in V} |f(x)| mu(x)` for a base set.
pub(crate) fn set_integral(model: &GroupModel, f: &[f64], v: &BaseSet) -> f64 {
    model
        .family(v.index)
        .iter()
        .map(|&u| {
            let x = model.add(v.center, u);
            f[x].abs() * model.mass(x)
        })
        .sum()
}

/// Average of `|f|` over every listed set, in list order.
pub(crate) fn set_averages(model: &GroupModel, f: &[f64], sets: &[BaseSet], masses: Option<&[f64]>) -> Vec<f64> {
    sets.iter()
        .enumerate()
        .map(|(k, v)| {
            let mass = masses.map_or_else(|| model.base_mass(v), |m| m[k]);
            set_integral(model, f, v) / mass
        })
        .collect()
}

/// Pointwise maximum of the averages over the sets containing each point.
/// `sets` must be sorted by the tie-break key.
fn sup_over(model: &GroupModel, f: &[f64], sets: &[BaseSet], masses: Option<&[f64]>) -> MaximalFunction {
    let n = model.order();
    let mut best = vec![f64::NEG_INFINITY; n];
    let mut witnesses = vec![None; n];
    for (v, a) in sets.iter().zip(set_averages(model, f, sets, masses)) {
        for &u in model.family(v.index) {
            let x = model.add(v.center, u);
            if a > best[x] {
                best[x] = a;
                witnesses[x] = Some(*v);
            }
        }
    }
    let values = best.into_iter().map(|b| if b == f64::NEG_INFINITY { 0.0 } else { b }).collect();
    MaximalFunction {
        values: GroupFunction::new(values).expect("averages of |f| are finite and nonnegative"),
        witnesses,
    }
}

/// The maximal function `Mf(x) = max_{x in V} avg_V |f|` over all base sets.
pub fn maximal(model: &GroupModel, f: &[f64]) -> MaximalFunction {
    sup_over(model, f, model.base_sets(), Some(model.base_set_masses()))
}

/// `M_K f`: the maximum over base sets of index at most `k` containing the point.
pub fn truncated_maximal(model: &GroupModel, f: &[f64], k: Index) -> Result<MaximalFunction> {
    model.check_index(k)?;
    let sets = model.base_sets();
    let end = sets.partition_point(|v| v.index <= k);
    Ok(sup_over(model, f, &sets[..end], Some(&model.base_set_masses()[..end])))
}

/// Local maximal function `M_U f`, with `f` restricted to `Û`. Points outside
/// `Û` get 0.
pub fn local_maximal(model: &GroupModel, f: &[f64], u: &BaseSet) -> MaximalFunction {
    let base = model.local_base(u);
    local_maximal_over(model, f, &base)
}

/// `M_U f` for a precomputed local base. Every set of a local base lies in
/// `Û`, so no explicit restriction is needed.
pub fn local_maximal_over(model: &GroupModel, f: &[f64], local_base: &[BaseSet]) -> MaximalFunction {
    let mut sorted = local_base.to_vec();
    sorted.sort_unstable();
    sup_over(model, f, &sorted, None)
}

/// `{x in domain : g(x) > lambda}`, strict.
pub fn level_set(g: &[f64], lambda: f64, domain: &[usize]) -> Vec<usize> {
    domain.iter().copied().filter(|&x| g[x] > lambda).collect()
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::*;
    use crate::group::MeasureSpec;
    use crate::oracle;
    use crate::weight::{random_function, random_weight, Weight};

    fn z9() -> GroupModel {
        GroupModel::padic(3, 2, MeasureSpec::Haar).unwrap()
    }

    #[test]
    fn constant_is_fixed() {
        let m = GroupModel::integer_window(4).unwrap();
        let f = vec![0.7; m.order()];
        for v in maximal(&m, &f).values() {
            assert_relative_eq!(*v, 0.7, max_relative = 1e-15);
        }
    }

    #[test]
    fn delta_on_z9() {
        let m = z9();
        let f = GroupFunction::indicator(9, &[0]);
        let mf = maximal(&m, &f);
        assert_eq!(mf.values()[0], 1.0);
        assert_eq!(mf.witnesses[0], Some(BaseSet::new(0, 0)));
        for x in [3, 6] {
            assert_relative_eq!(mf.values()[x], 1.0 / 3.0);
            assert_eq!(mf.witnesses[x], Some(BaseSet::new(0, 1)));
        }
        for x in [1, 2, 4, 5, 7, 8] {
            assert_relative_eq!(mf.values()[x], 1.0 / 9.0);
            assert_eq!(mf.witnesses[x], Some(BaseSet::new(0, 2)));
        }
    }

    #[test]
    fn delta_on_window_matches_brute_force() {
        let m = GroupModel::integer_window(4).unwrap();
        let f = GroupFunction::indicator(m.order(), &[0]);
        let mf = maximal(&m, &f);
        let oracle = oracle::maximal(&m, &f, m.i_max());
        for x in 0..m.order() {
            assert_relative_eq!(mf.values()[x], oracle[x], max_relative = 1e-14);
        }
        // 3 is reached from 0 first by a radius-2 ball centred at 1 or 2.
        assert_relative_eq!(mf.values()[m.element(3)], 1.0 / 5.0);
    }

    #[test]
    fn truncated_examples() {
        let m = GroupModel::integer_window(4).unwrap();
        let f = GroupFunction::indicator(m.order(), &[0]);
        let m0 = truncated_maximal(&m, &f, 0).unwrap();
        assert_eq!(m0.values(), f.values());
        let top = truncated_maximal(&m, &f, m.i_max()).unwrap();
        assert_eq!(top, maximal(&m, &f));
        let m1 = truncated_maximal(&m, &f, 1).unwrap();
        let got: Vec<f64> = (0..5).map(|k| m1.values()[m.element(k)]).collect();
        let want = oracle::maximal(&m, &f, 1);
        assert_eq!(got[0], 1.0);
        for k in 1..=2 {
            assert_relative_eq!(got[k], 1.0 / 3.0);
        }
        assert_eq!(got[3], 0.0);
        for x in 0..m.order() {
            assert_relative_eq!(m1.values()[x], want[x], max_relative = 1e-14);
        }
        assert!(truncated_maximal(&m, &f, m.i_max() + 1).is_err());
    }

    #[test]
    fn truncated_is_monotone_in_k() {
        let m = GroupModel::padic(2, 4, MeasureSpec::Haar).unwrap();
        let f = random_function(&m, 5.0, 9);
        let mut prev = vec![0.0; m.order()];
        for k in m.index_range() {
            let cur = truncated_maximal(&m, &f, k).unwrap();
            assert!(cur.values().iter().zip(&prev).all(|(a, b)| a >= b));
            prev = cur.values().to_vec();
        }
    }

    #[test]
    fn local_maximal_examples() {
        let m = z9();
        let u = BaseSet::new(0, 1);
        let one = vec![1.0; 9];
        let mu = local_maximal(&m, &one, &u);
        for x in m.points(&u) {
            assert_eq!(mu.values()[x], 1.0);
        }
        assert_eq!(mu.values()[1], 0.0);
        assert_eq!(mu.witnesses[1], None);

        // Power weight a = 1 on U = {0,3,6}: w = (1/9, 1/3, 1/3); the local
        // base is the three singletons and U itself with average 7/27.
        let w = crate::weight::power_weight(&m, 1.0).unwrap();
        let mu = local_maximal(&m, &w, &u);
        assert_relative_eq!(mu.values()[0], 7.0 / 27.0, max_relative = 1e-15);
        assert_relative_eq!(mu.values()[3], 1.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(mu.values()[6], 1.0 / 3.0, max_relative = 1e-15);
        for x in m.points(&u) {
            assert!(mu.values()[x] >= w[x]);
        }
    }

    #[test]
    fn level_set_is_strict() {
        let g = [0.5, 1.0, 2.0];
        let all = [0, 1, 2];
        assert!(level_set(&g, 2.0, &all).is_empty());
        assert_eq!(level_set(&g, 0.1, &all), vec![0, 1, 2]);
        assert_eq!(level_set(&g, 1.0, &all), vec![2]);
        assert_eq!(level_set(&g, 0.1, &[1]), vec![1]);
    }

    #[test]
    fn local_is_below_global_on_hat() {
        let m = GroupModel::integer_window(8).unwrap();
        let w = random_weight(&m, -2.0, 2.0, 4).unwrap();
        for u in m.base_sets().iter().step_by(7) {
            let hat = m.hat(u);
            let restricted = w.to_function().restricted(&hat);
            let local = local_maximal(&m, &w, u);
            let global = maximal(&m, &restricted);
            for &x in &hat {
                assert!(local.values()[x] <= global.values()[x] * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn truncation_inclusion() {
        let m = GroupModel::padic(3, 3, MeasureSpec::Haar).unwrap();
        let f = random_function(&m, 10.0, 2);
        let mf = maximal(&m, &f);
        let all: Vec<usize> = (0..m.order()).collect();
        for t in [0.01, 0.1, 0.5, 1.0, 3.0] {
            let mft = maximal(&m, &f.truncated(t));
            for x in level_set(mf.values(), 2.0 * t, &all) {
                assert!(mft.values()[x] > t);
            }
        }
    }

    fn model_strategy() -> impl Strategy<Value = GroupModel> {
        prop_oneof![
            (prop::sample::select(vec![2u64, 3, 5]), 1u32..=3).prop_map(|(p, l)| GroupModel::padic(
                p,
                l,
                MeasureSpec::Haar
            )
            .unwrap()),
            prop::sample::select(vec![2usize, 4, 8]).prop_map(|n| GroupModel::integer_window(n).unwrap()),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn sublinear_and_homogeneous(m in model_strategy(), s1 in 0u64..1000, s2 in 0u64..1000, c in 0.0f64..10.0) {
            let f = random_function(&m, 3.0, s1);
            let g = random_function(&m, 3.0, s2);
            let sum: Vec<f64> = f.iter().zip(g.iter()).map(|(a, b)| a + b).collect();
            let mfg = maximal(&m, &sum);
            let mf = maximal(&m, &f);
            let mg = maximal(&m, &g);
            let mcf = maximal(&m, &f.scaled(c).unwrap());
            for x in 0..m.order() {
                prop_assert!(mfg.values()[x] <= (mf.values()[x] + mg.values()[x]) * (1.0 + 1e-12));
                prop_assert!((mcf.values()[x] - c * mf.values()[x]).abs() <= 1e-12 * (1.0 + c * mf.values()[x]));
            }
        }

        #[test]
        fn dominates_function(m in model_strategy(), seed in 0u64..1000) {
            let w = random_weight(&m, -3.0, 3.0, seed).unwrap();
            let mw = maximal(&m, &w);
            for x in 0..m.order() {
                prop_assert!(mw.values()[x] >= w[x]);
            }
            let u = m.base_sets()[seed as usize % m.base_sets().len()];
            let local = local_maximal(&m, &w, &u);
            for x in m.points(&u) {
                prop_assert!(local.values()[x] >= w[x]);
            }
        }

        #[test]
        fn matches_oracle(m in model_strategy(), seed in 0u64..1000) {
            let f = random_function(&m, 4.0, seed);
            let mf = maximal(&m, &f);
            let want = oracle::maximal(&m, &f, m.i_max());
            for x in 0..m.order() {
                prop_assert!((mf.values()[x] - want[x]).abs() <= 1e-12 * want[x].max(1e-300));
            }
        }

        #[test]
        fn monotone_under_domination(m in model_strategy(), seed in 0u64..1000) {
            let f = random_function(&m, 1.0, seed);
            let g = Weight::new(f.iter().map(|v| v + 0.5).collect()).unwrap();
            let mf = maximal(&m, &f);
            let mg = maximal(&m, &g);
            for x in 0..m.order() {
                prop_assert!(mf.values()[x] <= mg.values()[x]);
            }
        }
    }
}
