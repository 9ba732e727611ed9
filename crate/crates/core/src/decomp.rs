//! Greedy selection procedures: the Calderón–Zygmund decomposition of a
//! level set of the local maximal function, the localization check built on
//! it, and Vitali selection for truncated maximal functions.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{BaseSet, GroupModel, Index};
use crate::maximal::{level_set, local_maximal_over, set_averages, truncated_maximal};
use crate::weight::{weight_mass, Weight};

/// Relative slack for comparisons against bounds assembled from floats.
const TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CZItem {
    pub center: usize,
    pub index: Index,
    pub points: Vec<usize>,
}

impl CZItem {
    pub fn base_set(&self) -> BaseSet {
        BaseSet::new(self.center, self.index)
    }
}

/// Output of [`cz_decompose`]. Items are listed in selection order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CZFamily {
    pub lambda: f64,
    pub items: Vec<CZItem>,
    #[serde(skip)]
    pub base: Option<BaseSet>,
    /// `alpha(x)` for every point of the level set.
    #[serde(skip)]
    pub alpha: BTreeMap<usize, Index>,
}

impl CZFamily {
    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }
}

/// Data shared by the decomposition and its checks: `w` restricted to `Û`,
/// the local base and the local maximal function.
struct LocalData {
    base: Vec<BaseSet>,
    hat: Vec<usize>,
    w_hat: Vec<f64>,
    avg_hat: f64,
    mu_w: Vec<f64>,
}

impl LocalData {
    fn new(model: &GroupModel, u: &BaseSet, w: &Weight) -> Self {
        let mut base = model.local_base(u);
        base.sort_unstable();
        let hat = model.hat(u);
        let mut w_hat = vec![0.0; model.order()];
        for &x in &hat {
            w_hat[x] = w[x];
        }
        let avg_hat = weight_mass(model, &w_hat, &hat) / model.mass_of(&hat);
        let mu_w = local_maximal_over(model, &w_hat, &base).values.into_values();
        LocalData { base, hat, w_hat, avg_hat, mu_w }
    }

    fn check_lambda(&self, lambda: f64) -> Result<()> {
        if lambda > self.avg_hat && lambda.is_finite() {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "lambda {lambda} must exceed the average {} over the enlarged set",
                self.avg_hat
            )))
        }
    }
}

/// Average of `w` over the enlarged set of `u`.
pub fn hat_average(model: &GroupModel, u: &BaseSet, w: &Weight) -> f64 {
    let hat = model.hat(u);
    weight_mass(model, w, &hat) / model.mass_of(&hat)
}

/// Geometric threshold grid `avg_Û w * rho^k`, `k = 1..=levels`.
pub fn lambda_grid(model: &GroupModel, u: &BaseSet, w: &Weight, rho: f64, levels: u32) -> Vec<f64> {
    let base = hat_average(model, u, w);
    (1..=levels as i32).map(|k| base * rho.powi(k)).collect()
}

fn decompose(model: &GroupModel, u: &BaseSet, data: &LocalData, lambda: f64) -> CZFamily {
    let omega = level_set(&data.mu_w, lambda, &data.hat);
    let avgs = set_averages(model, &data.w_hat, &data.base, None);
    let mut alpha: BTreeMap<usize, Index> = BTreeMap::new();
    let mut witness: BTreeMap<usize, BaseSet> = BTreeMap::new();
    // Sets come in (index, center) order, so a strict index increase keeps
    // the smallest center at the largest index.
    for (v, &a) in data.base.iter().zip(&avgs) {
        if a <= lambda {
            continue;
        }
        for &d in model.family(v.index) {
            let x = model.add(v.center, d);
            if alpha.get(&x).is_none_or(|&j| v.index > j) {
                alpha.insert(x, v.index);
                witness.insert(x, *v);
            }
        }
    }
    let mut pool: BTreeSet<usize> = omega.iter().copied().collect();
    let mut items = Vec::new();
    while !pool.is_empty() {
        let x = *pool.iter().max_by(|a, b| alpha[a].cmp(&alpha[b]).then(b.cmp(a))).expect("pool is nonempty");
        let v = witness[&x];
        let reach = model.dilate(&v, 2);
        pool.retain(|&z| !model.contains(&reach, z));
        items.push(CZItem { center: v.center, index: v.index, points: model.points(&v) });
    }
    CZFamily { lambda, items, base: Some(*u), alpha }
}

/// Calderón–Zygmund decomposition of `{x in Û : M_U w(x) > lambda}`.
///
/// `w` is treated as supported on `Û`. The produced family is re-checked
/// with [`verify_cz`]; a failed check is reported as an invariant error.
pub fn cz_decompose(model: &GroupModel, u: &BaseSet, w: &Weight, lambda: f64) -> Result<CZFamily> {
    let data = LocalData::new(model, u, w);
    data.check_lambda(lambda)?;
    let family = decompose(model, u, &data, lambda);
    let report = verify_with(model, &data, &family);
    if let Some(f) = &report.failure {
        return Err(Error::Invariant(format!("decomposition of {u} at lambda {lambda}: {f}")));
    }
    Ok(family)
}

/// Per-item margins and the overall verdict for a decomposition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CzReport {
    pub lambda: f64,
    pub items: usize,
    /// `avg_{V_i} w - lambda`, per item.
    pub average_margins: Vec<f64>,
    /// `D^2 lambda - max_{r > alpha_i} avg_{y_i + U_r} w`, per item; `None`
    /// when `alpha_i` is the top index.
    pub growth_margins: Vec<Option<f64>>,
    pub selected_mass: f64,
    pub level_set_mass: f64,
    pub doubled_mass_bound: f64,
    pub failure: Option<String>,
}

impl CzReport {
    pub fn pass(&self) -> bool {
        self.failure.is_none()
    }
}

/// Checks the four decomposition properties: nonincreasing indices,
/// `⋃V_i ⊆ Ω ⊆ ⋃V_i**`, `avg_{V_i} w > lambda` and the growth bound
/// `avg_{y_i+U_r} w ≤ D^2 lambda` for every `r > alpha_i`. Also checks
/// disjointness, membership in the local base and the mass sandwich.
pub fn verify_cz(model: &GroupModel, w: &Weight, family: &CZFamily) -> Result<CzReport> {
    let u = family.base.ok_or_else(|| Error::Precondition("family carries no base set".into()))?;
    let data = LocalData::new(model, &u, w);
    Ok(verify_with(model, &data, family))
}

fn verify_with(model: &GroupModel, data: &LocalData, family: &CZFamily) -> CzReport {
    let lambda = family.lambda;
    let d2 = model.doubling().powi(2);
    let omega = level_set(&data.mu_w, lambda, &data.hat);
    let in_omega: BTreeSet<usize> = omega.iter().copied().collect();
    let local: BTreeSet<BaseSet> = data.base.iter().map(|v| model.canonical(v)).collect();
    let mut failure: Option<String> = None;
    let mut fail = |msg: String| {
        if failure.is_none() {
            failure = Some(msg);
        }
    };
    let mut covered = vec![false; model.order()];
    let mut reached = vec![false; model.order()];
    let mut average_margins = Vec::new();
    let mut growth_margins = Vec::new();
    let mut selected_mass = 0.0;
    let mut doubled_mass = 0.0;
    for (k, item) in family.items.iter().enumerate() {
        let v = item.base_set();
        if k > 0 && item.index > family.items[k - 1].index {
            fail(format!("(a) index increases at item {k}"));
        }
        if !local.contains(&model.canonical(&v)) {
            fail(format!("item {k} ({v}) is not in the local base"));
        }
        for &x in &item.points {
            if covered[x] {
                fail(format!("item {k} ({v}) overlaps an earlier item at {x}"));
            }
            covered[x] = true;
            if !in_omega.contains(&x) {
                fail(format!("(b) point {x} of item {k} lies outside the level set"));
            }
        }
        for x in model.points(&model.dilate(&v, 2)) {
            reached[x] = true;
        }
        let mass = model.base_mass(&v);
        selected_mass += mass;
        doubled_mass += d2 * mass;
        let avg = weight_mass(model, &data.w_hat, &item.points) / mass;
        average_margins.push(avg - lambda);
        if !(avg > lambda) {
            fail(format!("(c) average {avg} over item {k} does not exceed lambda"));
        }
        let mut worst: Option<(Index, f64)> = None;
        for r in (item.index + 1)..=model.i_max() {
            let big = BaseSet::new(item.center, r);
            let a = weight_mass(model, &data.w_hat, &model.points(&big)) / model.base_mass(&big);
            if worst.is_none_or(|(_, b)| a > b) {
                worst = Some((r, a));
            }
        }
        growth_margins.push(worst.map(|(_, a)| d2 * lambda - a));
        if let Some((r, a)) = worst {
            if a > d2 * lambda * (1.0 + TOL) {
                fail(format!("(d) item {k}, r = {r}: average {a} exceeds D^2 lambda = {}", d2 * lambda));
            }
        }
    }
    if let Some(x) = omega.iter().find(|&&x| !reached[x]) {
        fail(format!("(b) level-set point {x} escapes every doubled item"));
    }
    let level_set_mass = model.mass_of(&omega);
    if selected_mass > level_set_mass * (1.0 + TOL) || level_set_mass > doubled_mass * (1.0 + TOL) {
        fail(format!("mass sandwich {selected_mass} <= {level_set_mass} <= {doubled_mass} fails"));
    }
    CzReport {
        lambda,
        items: family.items.len(),
        average_margins,
        growth_margins,
        selected_mass,
        level_set_mass,
        doubled_mass_bound: doubled_mass,
        failure,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalizationReport {
    pub lambda: f64,
    /// `L = D^6`.
    pub factor: f64,
    pub items: usize,
    /// Points `x` in some `V_i^{**}` with `M_U w(x) > L lambda`.
    pub checked: usize,
    /// `min (M_U(w chi_{V_i^{4*}})(x) - M_U w(x))` over checked points.
    pub min_slack: Option<f64>,
    /// `min (L lambda - a)` over checked points, where `a` is the largest
    /// local average over sets containing `x` that leave `V_i^{4*}`. Positive
    /// values show the localization is forced by the threshold, not by the
    /// geometry.
    pub min_outside_margin: Option<f64>,
    /// `max M_U w(x) / M_U(w chi_{V_i^{4*}})(x)` over checked points, 0 when
    /// nothing is checked.
    pub max_ratio: f64,
    pub failure: Option<String>,
}

impl LocalizationReport {
    pub fn pass(&self) -> bool {
        self.failure.is_none()
    }

    pub fn is_vacuous(&self) -> bool {
        self.checked == 0
    }
}

/// Checks `M_U w(x) ≤ M_U(w chi_{V_i^{4*}})(x)` for every point `x` of
/// `V_i^{**}` with `M_U w(x) > D^6 lambda`, over the decomposition at
/// `lambda`.
pub fn localization_check(model: &GroupModel, u: &BaseSet, w: &Weight, lambda: f64) -> Result<LocalizationReport> {
    let data = LocalData::new(model, u, w);
    data.check_lambda(lambda)?;
    let family = decompose(model, u, &data, lambda);
    let factor = model.doubling().powi(6);
    let top = factor * lambda;
    let avgs = set_averages(model, &data.w_hat, &data.base, None);
    let mut checked = 0;
    let mut min_slack: Option<f64> = None;
    let mut min_outside: Option<f64> = None;
    let mut max_ratio = 0.0f64;
    let mut failure = None;
    for (k, item) in family.items.iter().enumerate() {
        let v = item.base_set();
        let far = model.dilate(&v, 4);
        let mut restricted = vec![0.0; model.order()];
        for x in model.points(&far) {
            restricted[x] = data.w_hat[x];
        }
        let local = local_maximal_over(model, &restricted, &data.base).values.into_values();
        for x in model.points(&model.dilate(&v, 2)) {
            if !(data.mu_w[x] > top) {
                continue;
            }
            checked += 1;
            let slack = local[x] - data.mu_w[x];
            max_ratio = max_ratio.max(data.mu_w[x] / local[x]);
            min_slack = Some(min_slack.map_or(slack, |s: f64| s.min(slack)));
            let outside = data
                .base
                .iter()
                .zip(&avgs)
                .filter(|(b, _)| model.contains(b, x) && !model.is_subset(b, &far))
                .map(|(_, &a)| a)
                .fold(0.0, f64::max);
            let margin = top - outside;
            min_outside = Some(min_outside.map_or(margin, |s: f64| s.min(margin)));
            if slack < -TOL * data.mu_w[x] && failure.is_none() {
                failure = Some(format!("item {k}, point {x}: M_U w = {} exceeds localized {}", data.mu_w[x], local[x]));
            }
        }
    }
    Ok(LocalizationReport {
        lambda,
        factor,
        items: family.items.len(),
        checked,
        min_slack,
        min_outside_margin: min_outside,
        max_ratio,
        failure,
    })
}

/// Greedy disjoint selection among base sets `V` of index at most `k` with
/// `avg_V |f| > lambda` that meet `window`, taken by decreasing index and
/// then increasing center. The doubled selected sets cover
/// `{M_k f > lambda} ∩ window`; a coverage failure is an invariant error.
pub fn vitali_select(model: &GroupModel, f: &[f64], lambda: f64, k: Index, window: &[usize]) -> Result<Vec<BaseSet>> {
    if !(lambda > 0.0) {
        return Err(Error::Precondition(format!("lambda {lambda} must be positive")));
    }
    model.check_index(k)?;
    let mut in_window = vec![false; model.order()];
    for &x in window {
        if x >= model.order() {
            return Err(Error::ElementOutOfRange(x));
        }
        in_window[x] = true;
    }
    let sets = model.base_sets();
    let end = sets.partition_point(|v| v.index <= k);
    let sets = &sets[..end];
    let avgs = set_averages(model, f, sets, Some(&model.base_set_masses()[..end]));
    let mut candidates: Vec<BaseSet> = sets
        .iter()
        .zip(&avgs)
        .filter(|(v, &a)| a > lambda && model.family(v.index).iter().any(|&d| in_window[model.add(v.center, d)]))
        .map(|(v, _)| *v)
        .collect();
    candidates.sort_by(|a, b| b.index.cmp(&a.index).then(a.center.cmp(&b.center)));
    let mut taken = vec![false; model.order()];
    let mut selected = Vec::new();
    for v in candidates {
        let pts = model.points(&v);
        if pts.iter().all(|&x| !taken[x]) {
            for &x in &pts {
                taken[x] = true;
            }
            selected.push(v);
        }
    }
    let mk = truncated_maximal(model, f, k)?;
    let mut reached = vec![false; model.order()];
    for v in &selected {
        for x in model.points(&model.dilate(v, 2)) {
            reached[x] = true;
        }
    }
    if let Some(x) = level_set(mk.values(), lambda, window).into_iter().find(|&x| !reached[x]) {
        return Err(Error::Invariant(format!("level-set point {x} escapes every doubled selected set")));
    }
    Ok(selected)
}
