//! Certifiers: each evaluates both sides of a quantitative inequality and
//! reports the ratio, the configuration attaining it and a pass flag.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{ainfty_fw, ap_constant, buckley_explicit_constant, open_epsilon, rhi_exponent, Constant};
use crate::decomp::{verify_cz, CZFamily, LocalizationReport};
use crate::error::{Error, Result};
use crate::group::{BaseSet, GroupModel, Index};
use crate::maximal::{local_maximal_over, maximal, truncated_maximal};
use crate::weight::{conjugate, dual_weight, random_function, weight_mass, GroupFunction, Weight};

/// Relative tolerance of every pass flag.
pub const PASS_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TheoremId {
    Rhi,
    RhiStep1,
    Open,
    Weak,
    Buckley,
    Duality,
    A1,
    Cz,
    Localization,
}

impl TheoremId {
    pub const ALL: [TheoremId; 9] = [
        TheoremId::Rhi,
        TheoremId::RhiStep1,
        TheoremId::Open,
        TheoremId::Weak,
        TheoremId::Buckley,
        TheoremId::Duality,
        TheoremId::A1,
        TheoremId::Cz,
        TheoremId::Localization,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::Rhi => "RHI",
            TheoremId::RhiStep1 => "RHI_STEP1",
            TheoremId::Open => "OPEN",
            TheoremId::Weak => "WEAK",
            TheoremId::Buckley => "BUCKLEY",
            TheoremId::Duality => "DUALITY",
            TheoremId::A1 => "A1",
            TheoremId::Cz => "CZ",
            TheoremId::Localization => "LOCALIZATION",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.as_str().eq_ignore_ascii_case(s.trim()))
    }

    /// Identities pass when both sides agree; everything else is `lhs ≤ rhs`.
    pub fn is_identity(self) -> bool {
        matches!(self, TheoremId::Duality | TheoremId::A1)
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One evaluated inequality. For inequalities `pass` is
/// `ratio ≤ 1 + PASS_TOL`; for identities it is `|ratio - 1| ≤ PASS_TOL`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub theorem_id: TheoremId,
    pub model: String,
    pub weight_id: String,
    pub p: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub witness: String,
    pub pass: bool,
}

impl VerificationReport {
    pub fn new(theorem_id: TheoremId, model: &GroupModel, p: Option<f64>, lhs: f64, rhs: f64, witness: String) -> Self {
        let ratio = if lhs == 0.0 && rhs == 0.0 { 0.0 } else { lhs / rhs };
        let pass = if theorem_id.is_identity() { (ratio - 1.0).abs() <= PASS_TOL } else { ratio <= 1.0 + PASS_TOL };
        VerificationReport {
            theorem_id,
            model: model.name(),
            weight_id: String::new(),
            p,
            lhs,
            rhs,
            ratio,
            witness,
            pass,
        }
    }

    pub fn with_weight_id(mut self, id: impl Into<String>) -> Self {
        self.weight_id = id.into();
        self
    }

    /// A failing row for a check that could not be completed.
    pub fn failed(theorem_id: TheoremId, model: &GroupModel, p: Option<f64>, why: String) -> Self {
        VerificationReport {
            theorem_id,
            model: model.name(),
            weight_id: String::new(),
            p,
            lhs: f64::NAN,
            rhs: f64::NAN,
            ratio: f64::NAN,
            witness: why,
            pass: false,
        }
    }
}

/// Row with the largest ratio; ties keep the earliest.
pub fn worst(reports: &[VerificationReport]) -> Option<&VerificationReport> {
    reports.iter().fold(None, |acc: Option<&VerificationReport>, r| match acc {
        Some(a) if !(r.ratio > a.ratio) && a.pass <= r.pass => Some(a),
        _ => Some(r),
    })
}

/// Enlarged sets of every entry of `model.base_sets()`, which depend on the
/// model only.
#[derive(Clone, Debug)]
pub struct HatTable {
    hats: Vec<Vec<usize>>,
}

impl HatTable {
    pub fn new(model: &GroupModel) -> Self {
        HatTable { hats: model.base_sets().par_iter().map(|u| model.hat(u)).collect() }
    }

    pub fn get(&self, k: usize) -> &[usize] {
        &self.hats[k]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RhiCheck {
    pub exponent: f64,
    pub fw: Constant,
    pub per_set: Vec<VerificationReport>,
    pub worst: VerificationReport,
}

/// Reverse Hölder inequality `(avg_U w^r)^{1/r} ≤ 2 D^2 avg_Û w` with
/// `r = rhi_exponent(D, [w]_Ainfty)`, for every base set `U`.
pub fn check_rhi(model: &GroupModel, w: &Weight) -> Result<RhiCheck> {
    check_rhi_with(model, w, &HatTable::new(model))
}

pub fn check_rhi_with(model: &GroupModel, w: &Weight, hats: &HatTable) -> Result<RhiCheck> {
    let d = model.doubling();
    let fw = ainfty_fw(model, w);
    let r = rhi_exponent(d, fw.value)?;
    let per_set: Vec<VerificationReport> = model
        .base_sets()
        .iter()
        .zip(model.base_set_masses())
        .enumerate()
        .map(|(k, (u, &m))| {
            let pts = model.points(u);
            let lhs = (pts.iter().map(|&x| w[x].powf(r) * model.mass(x)).sum::<f64>() / m).powf(1.0 / r);
            let hat = hats.get(k);
            let rhs = 2.0 * d * d * weight_mass(model, w, hat) / model.mass_of(hat);
            VerificationReport::new(TheoremId::Rhi, model, None, lhs, rhs, format!("U={u}; r={r:.17e}"))
        })
        .collect();
    let worst = worst(&per_set).expect("every model has base sets").clone();
    Ok(RhiCheck { exponent: r, fw, per_set, worst })
}

/// Intermediate maximal-function estimate of the reverse Hölder argument:
/// `avg_Û (M_U w)^{r} ≤ 2 [w]_Ainfty (avg_Û w)^{r}`, with `w` restricted to
/// `Û`. Reports the worst base set.
pub fn check_rhi_step1(model: &GroupModel, w: &Weight) -> Result<VerificationReport> {
    let fw = ainfty_fw(model, w);
    let r = rhi_exponent(model.doubling(), fw.value)?;
    let rows: Vec<VerificationReport> = model
        .base_sets()
        .par_iter()
        .map(|u| {
            let mut base = model.local_base(u);
            base.sort_unstable();
            let hat = model.hat(u);
            let mut w_hat = vec![0.0; model.order()];
            for &x in &hat {
                w_hat[x] = w[x];
            }
            let mu = local_maximal_over(model, &w_hat, &base);
            let mass = model.mass_of(&hat);
            let lhs = hat.iter().map(|&x| mu.values()[x].powf(r) * model.mass(x)).sum::<f64>() / mass;
            let rhs = 2.0 * fw.value * (weight_mass(model, w, &hat) / mass).powf(r);
            VerificationReport::new(TheoremId::RhiStep1, model, None, lhs, rhs, format!("U={u}"))
        })
        .collect();
    Ok(worst(&rows).expect("every model has base sets").clone())
}

/// Openness: `[w]_{A_{p-eps}} ≤ 2^{p-1} D^{4p-2} [w]_{A_p}` with
/// `eps = open_epsilon(p, D, [sigma]_Ainfty)`.
pub fn check_open_property(model: &GroupModel, w: &Weight, p: f64) -> Result<VerificationReport> {
    let sigma = dual_weight(w, p)?;
    let d = model.doubling();
    let eps = open_epsilon(p, d, ainfty_fw(model, &sigma).value)?;
    if !(p - eps > 1.0) {
        return Err(Error::Invariant(format!("p - eps = {} is not above 1", p - eps)));
    }
    let lower = ap_constant(model, w, p - eps)?;
    let rhs = 2f64.powf(p - 1.0) * d.powf(4.0 * p - 2.0) * ap_constant(model, w, p)?.value;
    Ok(VerificationReport::new(
        TheoremId::Open,
        model,
        Some(p),
        lower.value,
        rhs,
        format!("eps={eps:.17e}; U={}", lower.witness),
    ))
}

fn lq_norm_q(model: &GroupModel, f: &[f64], w: &[f64], q: f64) -> f64 {
    f.iter().enumerate().map(|(x, v)| v.abs().powf(q) * w[x] * model.mass(x)).sum()
}

/// `max_lambda lambda^q w({Mf > lambda})`, evaluated exactly: between
/// attained values of `Mf` the expression increases in `lambda`, so the
/// supremum is the largest `v^q w({Mf ≥ v})` over attained values `v`.
/// Returns the value and the maximising `v`.
pub fn weak_type_lhs(model: &GroupModel, w: &[f64], q: f64, f: &[f64]) -> (f64, f64) {
    let mf = maximal(model, f);
    let mut order: Vec<usize> = (0..model.order()).collect();
    order.sort_by(|&a, &b| mf.values()[b].total_cmp(&mf.values()[a]).then(a.cmp(&b)));
    let mut best = (0.0, 0.0);
    let mut mass = 0.0;
    for (k, &x) in order.iter().enumerate() {
        let v = mf.values()[x];
        mass += w[x] * model.mass(x);
        let last_of_value = order.get(k + 1).is_none_or(|&y| mf.values()[y] != v);
        if last_of_value && v > 0.0 {
            let t = v.powf(q) * mass;
            if t > best.0 {
                best = (t, v);
            }
        }
    }
    best
}

/// Weak type `(q, q)`: `sup_lambda lambda^q w({Mf > lambda}) ≤ D^{2q} [w]_{A_q} ||f||^q`.
pub fn check_weak_type(model: &GroupModel, w: &Weight, q: f64, f: &GroupFunction) -> Result<VerificationReport> {
    if !(q >= 1.0) || !q.is_finite() {
        return Err(Error::BadExponent("q >= 1"));
    }
    if f.is_zero() {
        return Err(Error::Precondition("f vanishes identically".into()));
    }
    let (lhs, lambda) = weak_type_lhs(model, w, q, f);
    let aq = ap_constant(model, w, q)?;
    let rhs = model.doubling().powf(2.0 * q) * aq.value * lq_norm_q(model, f, w, q);
    Ok(VerificationReport::new(
        TheoremId::Weak,
        model,
        Some(q),
        lhs,
        rhs,
        format!("lambda={lambda:.17e}; U={}", aq.witness),
    ))
}

/// The chain of estimates behind the weak-type bound, evaluated on one Vitali
/// selection.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeakChain {
    pub lambda: f64,
    pub k: Index,
    pub selected: Vec<BaseSet>,
    /// `lambda^q w(level ∩ window)`, then each successive upper bound, ending
    /// with `D^{2q} [w]_{A_q} ||f||^q`.
    pub steps: Vec<f64>,
}

impl WeakChain {
    /// Each step bounded by the next, up to `PASS_TOL`.
    pub fn is_monotone(&self) -> bool {
        self.steps.windows(2).all(|s| s[0] <= s[1] * (1.0 + PASS_TOL))
    }
}

/// Evaluates
///
/// ```text
/// lambda^q w(Ω_K ∩ window) ≤ Σ lambda^q w(V**)
///   ≤ Σ w(V**) (avg_V |f|)^q
///   ≤ Σ w(V**) mu(V)^{-q} (∫_V sigma)^{q-1} ∫_V |f|^q w
///   ≤ D^{2q} Σ w(V**) mu(V**)^{-q} (∫_{V**} sigma)^{q-1} ∫_V |f|^q w
///   ≤ D^{2q} [w]_{A_q} Σ ∫_V |f|^q w
///   ≤ D^{2q} [w]_{A_q} ||f||^q
/// ```
///
/// over the sets chosen by [`crate::decomp::vitali_select`]. For `q = 1` the
/// `sigma` factors become `max_V w^{-1}` and `max_{V**} w^{-1}`.
pub fn weak_type_chain(
    model: &GroupModel,
    w: &Weight,
    q: f64,
    f: &GroupFunction,
    lambda: f64,
    k: Index,
    window: &[usize],
) -> Result<WeakChain> {
    if !(q >= 1.0) || !q.is_finite() {
        return Err(Error::BadExponent("q >= 1"));
    }
    let selected = crate::decomp::vitali_select(model, f, lambda, k, window)?;
    let d2q = model.doubling().powf(2.0 * q);
    let aq = ap_constant(model, w, q)?.value;
    let level = truncated_maximal(model, f, k)?;
    let level: Vec<usize> = window.iter().copied().filter(|&x| level.values()[x] > lambda).collect();
    let sigma_mass = |pts: &[usize]| -> f64 {
        if q == 1.0 {
            pts.iter().map(|&x| 1.0 / w[x]).fold(0.0, f64::max)
        } else {
            let e = 1.0 - q / (q - 1.0);
            pts.iter().map(|&x| w[x].powf(e) * model.mass(x)).sum::<f64>().powf(q - 1.0)
        }
    };
    // For q = 1 the sigma factor carries no measure, so it is not divided
    // by a power of mu.
    let mu_pow = |m: f64| if q == 1.0 { m } else { m.powf(q) };
    let mut s = [0.0f64; 7];
    s[0] = lambda.powf(q) * weight_mass(model, w, &level);
    for v in &selected {
        let pts = model.points(v);
        let big = model.points(&model.dilate(v, 2));
        let w_big = weight_mass(model, w, &big);
        let mu_v = model.mass_of(&pts);
        let mu_big = model.mass_of(&big);
        let fq: f64 = pts.iter().map(|&x| f[x].abs().powf(q) * w[x] * model.mass(x)).sum();
        let avg_f = pts.iter().map(|&x| f[x].abs() * model.mass(x)).sum::<f64>() / mu_v;
        s[1] += lambda.powf(q) * w_big;
        s[2] += w_big * avg_f.powf(q);
        s[3] += w_big / mu_pow(mu_v) * sigma_mass(&pts) * fq;
        s[4] += d2q * w_big / mu_pow(mu_big) * sigma_mass(&big) * fq;
        s[5] += d2q * aq * fq;
    }
    s[6] = d2q * aq * lq_norm_q(model, f, w, q);
    Ok(WeakChain { lambda, k, selected, steps: s.to_vec() })
}

/// Test family for [`estimate_operator_norm`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct NormTestSpec {
    pub n_random: usize,
    pub seed: u64,
}

impl Default for NormTestSpec {
    fn default() -> Self {
        NormTestSpec { n_random: 16, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormEstimate {
    /// Largest observed `||Mf||_{L^p_w} / ||f||_{L^p_w}`.
    pub value: f64,
    pub witness: String,
    /// Running maximum after the dual-weight extremisers, after the
    /// indicators and after the random functions.
    pub stages: [f64; 3],
}

fn norm_ratio(model: &GroupModel, w: &[f64], p: f64, f: &[f64]) -> f64 {
    let mf = maximal(model, f);
    (lq_norm_q(model, mf.values(), w, p) / lq_norm_q(model, f, w, p)).powf(1.0 / p)
}

fn best_of(model: &GroupModel, w: &[f64], p: f64, cands: Vec<(String, Vec<f64>)>) -> (f64, String) {
    let ratios: Vec<f64> = cands.par_iter().map(|(_, f)| norm_ratio(model, w, p, f)).collect();
    let mut best = (f64::NEG_INFINITY, String::new());
    for ((name, _), r) in cands.into_iter().zip(ratios) {
        if r > best.0 {
            best = (r, name);
        }
    }
    best
}

/// Lower bound for `||M||_{L^p_w -> L^p_w}` from `sigma chi_U` and `chi_U`
/// over every base set `U`, plus seeded random functions.
pub fn estimate_operator_norm(model: &GroupModel, w: &Weight, p: f64, spec: NormTestSpec) -> Result<NormEstimate> {
    let sigma = dual_weight(w, p)?;
    let n = model.order();
    let restricted = |g: &[f64], u: &BaseSet| {
        let mut f = vec![0.0; n];
        for x in model.points(u) {
            f[x] = g[x];
        }
        f
    };
    let ones = vec![1.0; n];
    let dual: Vec<(String, Vec<f64>)> =
        model.base_sets().iter().map(|u| (format!("sigma*chi({u})"), restricted(&sigma, u))).collect();
    let ind: Vec<(String, Vec<f64>)> =
        model.base_sets().iter().map(|u| (format!("chi({u})"), restricted(&ones, u))).collect();
    let rnd: Vec<(String, Vec<f64>)> = (0..spec.n_random as u64)
        .map(|k| {
            let s = spec.seed.wrapping_add(k);
            (format!("random(seed={s})"), random_function(model, 1.0, s).into_values())
        })
        .collect();
    let mut best = (f64::NEG_INFINITY, String::new());
    let mut stages = [0.0; 3];
    for (stage, cands) in [dual, ind, rnd].into_iter().enumerate() {
        if !cands.is_empty() {
            let b = best_of(model, w, p, cands);
            if b.0 > best.0 {
                best = b;
            }
        }
        stages[stage] = best.0;
    }
    Ok(NormEstimate { value: best.0, witness: best.1, stages })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BuckleyCheck {
    pub constant: f64,
    pub estimate: NormEstimate,
    /// Lower bound against the mixed bound `C ([w]_{A_p} [sigma]_Ainfty)^{1/p}`.
    pub mixed: VerificationReport,
    /// Mixed bound against `C [w]_{A_p}^{1/(p-1)}`.
    pub fold: VerificationReport,
    /// Lower bound against `C [w]_{A_p}^{1/(p-1)}`.
    pub direct: VerificationReport,
}

impl BuckleyCheck {
    /// The full chain `lower ≤ mixed ≤ classical`.
    pub fn pass(&self) -> bool {
        self.mixed.pass && self.fold.pass
    }

    pub fn rows(&self) -> [&VerificationReport; 3] {
        [&self.mixed, &self.fold, &self.direct]
    }
}

/// Operator-norm lower bound against the mixed and classical explicit
/// bounds.
pub fn check_buckley(model: &GroupModel, w: &Weight, p: f64, spec: NormTestSpec) -> Result<BuckleyCheck> {
    let c = buckley_explicit_constant(p, model.doubling())?;
    let sigma = dual_weight(w, p)?;
    let ap = ap_constant(model, w, p)?;
    let fw_sigma = ainfty_fw(model, &sigma);
    let estimate = estimate_operator_norm(model, w, p, spec)?;
    let rhs1 = c * (ap.value * fw_sigma.value).powf(1.0 / p);
    let rhs2 = c * ap.value.powf(1.0 / (p - 1.0));
    let row = |leg: &str, lhs: f64, rhs: f64, extra: &str| {
        VerificationReport::new(TheoremId::Buckley, model, Some(p), lhs, rhs, format!("leg={leg}; {extra}"))
    };
    let lower_note = format!("f={}", estimate.witness);
    let fold_note = format!("A_p at {}; sigma Ainfty at {}", ap.witness, fw_sigma.witness);
    Ok(BuckleyCheck {
        constant: c,
        mixed: row("mixed", estimate.value, rhs1, &lower_note),
        fold: row("fold", rhs1, rhs2, &fold_note),
        direct: row("direct", estimate.value, rhs2, &lower_note),
        estimate,
    })
}

/// `max_x Mw(x)/w(x) = [w]_{A_1}`.
pub fn check_a1(model: &GroupModel, w: &Weight) -> VerificationReport {
    let mw = maximal(model, w);
    let (x, lhs) = mw
        .values()
        .iter()
        .zip(w.iter())
        .map(|(m, v)| m / v)
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |a, (x, r)| if r > a.1 { (x, r) } else { a });
    let a1 = ap_constant(model, w, 1.0).expect("p = 1 is admissible");
    VerificationReport::new(TheoremId::A1, model, Some(1.0), lhs, a1.value, format!("x={x}; U={}", a1.witness))
}

/// `[sigma]_{A_{p'}} = [w]_{A_p}^{p'-1}`.
pub fn check_duality(model: &GroupModel, w: &Weight, p: f64) -> Result<VerificationReport> {
    let q = conjugate(p)?;
    let lhs = ap_constant(model, &dual_weight(w, p)?, q)?;
    let rhs = ap_constant(model, w, p)?;
    Ok(VerificationReport::new(
        TheoremId::Duality,
        model,
        Some(p),
        lhs.value,
        rhs.value.powf(q - 1.0),
        format!("U={}; U'={}", rhs.witness, lhs.witness),
    ))
}

/// Report row for a decomposition: the largest growth average against
/// `D^2 lambda`. Structural failures fail the row regardless of the ratio.
pub fn cz_row(model: &GroupModel, w: &Weight, family: &CZFamily) -> Result<VerificationReport> {
    let report = verify_cz(model, w, family)?;
    let bound = model.doubling().powi(2) * family.lambda;
    let worst_margin = report.growth_margins.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
    let lhs = if worst_margin.is_finite() { bound - worst_margin } else { 0.0 };
    let mut row = VerificationReport::new(
        TheoremId::Cz,
        model,
        None,
        lhs,
        bound,
        format!(
            "U={}; lambda={:.17e}; items={}",
            family.base.map_or_else(String::new, |b| b.to_string()),
            family.lambda,
            family.items.len()
        ),
    );
    if let Some(f) = report.failure {
        row.pass = false;
        row.witness = format!("{}; {f}", row.witness);
    }
    Ok(row)
}

pub fn localization_row(model: &GroupModel, u: &BaseSet, report: &LocalizationReport) -> VerificationReport {
    let mut row = VerificationReport::new(
        TheoremId::Localization,
        model,
        None,
        report.max_ratio,
        1.0,
        format!(
            "U={u}; lambda={:.17e}; checked={}; outside_margin={}",
            report.lambda,
            report.checked,
            report.min_outside_margin.map_or_else(|| "none".to_string(), |m| format!("{m:.17e}"))
        ),
    );
    if let Some(f) = &report.failure {
        row.pass = false;
        row.witness = format!("{}; {f}", row.witness);
    }
    row
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::*;
    use crate::group::MeasureSpec;
    use crate::oracle;
    use crate::weight::{power_weight, random_weight};

    fn z9() -> GroupModel {
        GroupModel::padic(3, 2, MeasureSpec::Haar).unwrap()
    }

    #[test]
    fn rhi_constant_weight() {
        let m = z9();
        let w = Weight::constant(9, 1.0).unwrap();
        let c = check_rhi(&m, &w).unwrap();
        assert_eq!(c.per_set.len(), 13);
        for r in &c.per_set {
            assert_relative_eq!(r.lhs, 1.0, max_relative = 1e-14);
            assert_relative_eq!(r.ratio, 1.0 / 18.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn rhi_power_weight_against_exact_sides() {
        let m = z9();
        let w = power_weight(&m, 1.0).unwrap();
        let c = check_rhi(&m, &w).unwrap();
        assert!(c.per_set.iter().all(|r| r.pass));
        let exact_fw = oracle::exact_ainfty_fw(&m, &w);
        assert!(oracle::relative_gap(c.fw.value, exact_fw.power.as_ref().unwrap()) < 1e-12);
        // rhs: 2 D^2 times the exact average over the enlarged set.
        for (u, r) in m.base_sets().iter().zip(&c.per_set) {
            let hat = m.hat(u);
            let num: num_rational::BigRational = hat.iter().map(|&x| oracle::rational(w[x])).sum();
            let exact = num * oracle::int(18) / oracle::int(hat.len() as i64);
            assert!(oracle::relative_gap(r.rhs, &exact) < 1e-14);
        }
    }

    #[test]
    fn open_property_constant_weight() {
        let m = z9();
        let w = Weight::constant(9, 2.0).unwrap();
        let r = check_open_property(&m, &w, 2.0).unwrap();
        assert_relative_eq!(r.lhs, 1.0, max_relative = 1e-14);
        assert_relative_eq!(r.rhs, 2.0 * 3f64.powi(6), max_relative = 1e-14);
        assert!(r.pass);
    }

    #[test]
    fn weak_type_indicator_of_group() {
        let m = z9();
        let w = Weight::constant(9, 1.0).unwrap();
        let f = GroupFunction::indicator(9, &(0..9).collect::<Vec<_>>());
        let r = check_weak_type(&m, &w, 2.0, &f).unwrap();
        assert_relative_eq!(r.lhs, 9.0, max_relative = 1e-14);
        assert_relative_eq!(r.rhs, 729.0, max_relative = 1e-14);
    }

    #[test]
    fn weak_type_delta_levels() {
        // M delta_0 takes 1 at 0, 1/3 on {3, 6}, 1/9 elsewhere; the three
        // candidates at q = 1 are 1, 1 and 1.
        let m = z9();
        let w = Weight::constant(9, 1.0).unwrap();
        let f = GroupFunction::indicator(9, &[0]);
        let (v, lambda) = weak_type_lhs(&m, &w, 1.0, &f);
        assert_relative_eq!(v, 1.0, max_relative = 1e-14);
        assert_eq!(lambda, 1.0);
        // At q = 2: 1, 3 * (1/9) = 1/3, 9 * (1/81) = 1/9.
        let (v, _) = weak_type_lhs(&m, &w, 2.0, &f);
        assert_relative_eq!(v, 1.0, max_relative = 1e-14);
        // A heavier tail weight moves the maximiser.
        let w = Weight::new(vec![1.0, 10.0, 10.0, 1.0, 10.0, 10.0, 1.0, 10.0, 10.0]).unwrap();
        let (v, lambda) = weak_type_lhs(&m, &w, 1.0, &f);
        assert_relative_eq!(v, 63.0 / 9.0, max_relative = 1e-14);
        assert_relative_eq!(lambda, 1.0 / 9.0);
    }

    #[test]
    fn operator_norm_at_least_one_for_haar() {
        for m in [z9(), GroupModel::integer_window(4).unwrap()] {
            let w = random_weight(&m, -2.0, 2.0, 9).unwrap();
            let e = estimate_operator_norm(&m, &w, 2.0, NormTestSpec::default()).unwrap();
            assert!(e.value >= 1.0 - 1e-12);
            assert!(e.stages[0] <= e.stages[1] && e.stages[1] <= e.stages[2]);
        }
    }

    #[test]
    fn buckley_constant_weight() {
        let m = z9();
        let w = Weight::constant(9, 1.0).unwrap();
        let b = check_buckley(&m, &w, 2.0, NormTestSpec::default()).unwrap();
        // Constants are fixed points, but non-constant test functions push
        // the lower bound above 1.
        assert!(b.estimate.value >= 1.0);
        assert_relative_eq!(b.mixed.rhs, b.constant, max_relative = 1e-12);
        assert_relative_eq!(b.fold.ratio, 1.0, max_relative = 1e-12);
        assert!(b.pass());
    }

    #[test]
    fn a1_and_duality_are_identities() {
        let m = GroupModel::padic(3, 3, MeasureSpec::Haar).unwrap();
        for a in [-2.0, -1.0, 0.5, 1.0] {
            let w = power_weight(&m, a).unwrap();
            assert!(check_a1(&m, &w).pass);
            for p in [1.5, 2.0, 3.0] {
                assert!(check_duality(&m, &w, p).unwrap().pass);
            }
        }
    }

    #[test]
    fn report_rows_parse_back() {
        for t in TheoremId::ALL {
            assert_eq!(TheoremId::parse(t.as_str()), Some(t));
            assert_eq!(serde_json::to_string(&t).unwrap(), format!("\"{t}\""));
        }
        assert_eq!(TheoremId::parse("rhi"), Some(TheoremId::Rhi));
        assert_eq!(TheoremId::parse("nope"), None);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn weak_type_scaling(seed in 0u64..10_000, c in 0.01f64..100.0, q in 1.0f64..3.0) {
            let m = GroupModel::integer_window(4).unwrap();
            let w = random_weight(&m, -3.0, 3.0, seed).unwrap();
            let f = random_function(&m, 1.0, seed + 1);
            let base = check_weak_type(&m, &w, q, &f).unwrap();
            prop_assert!(base.pass);
            let ws = check_weak_type(&m, &w.scaled(c).unwrap(), q, &f).unwrap();
            let fs = check_weak_type(&m, &w, q, &f.scaled(c).unwrap()).unwrap();
            prop_assert!((ws.ratio - base.ratio).abs() <= 1e-9 * base.ratio);
            prop_assert!((fs.ratio - base.ratio).abs() <= 1e-9 * base.ratio);
        }

        #[test]
        fn weak_chain_is_monotone(seed in 0u64..10_000, q in prop::sample::select(vec![1.0, 1.5, 2.0, 3.0]), k in 0i32..6) {
            let m = GroupModel::integer_window(4).unwrap();
            let w = random_weight(&m, -2.0, 2.0, seed).unwrap();
            let f = random_function(&m, 1.0, seed + 7);
            let window = m.points(&BaseSet::new(0, 4));
            let lambda = 0.3;
            let chain = weak_type_chain(&m, &w, q, &f, lambda, k, &window).unwrap();
            prop_assert!(chain.is_monotone(), "{:?}", chain.steps);
        }

        #[test]
        fn rhi_holds_on_random_weights(seed in 0u64..10_000) {
            let m = GroupModel::padic(3, 3, MeasureSpec::Haar).unwrap();
            let w = random_weight(&m, -4.0, 4.0, seed).unwrap();
            prop_assert!(check_rhi(&m, &w).unwrap().worst.pass);
        }
    }
}
