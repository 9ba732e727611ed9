//! The acceptance suite: nine criteria, each evaluated at its stated
//! tolerance and summarised as one pass/fail line. Shared by the
//! `acceptance` test target and `lab selftest`.

use std::fmt;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::constants::{ainfty_fw, ap_constant};
use crate::decomp::{cz_decompose, lambda_grid, localization_check, verify_cz};
use crate::error::Result;
use crate::group::{GroupModel, MeasureSpec};
use crate::oracle;
use crate::verify::{
    check_buckley, check_duality, check_open_property, check_rhi_with, check_weak_type, estimate_operator_norm,
    HatTable, NormTestSpec, VerificationReport,
};
use crate::weight::{power_weight, random_function, random_weight, Weight};

#[derive(Clone, Debug)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
    /// Named sub-checks; `pass` is their conjunction when present.
    pub parts: Vec<(&'static str, bool)>,
}

impl CriterionOutcome {
    pub fn part(&self, name: &str) -> Option<bool> {
        self.parts.iter().find(|(n, _)| *n == name).map(|p| p.1)
    }
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {} [{}]: {} ({:.2} s) {}",
            self.id,
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

fn timed(id: u8, name: &'static str, body: impl FnOnce() -> Result<(bool, String)>) -> CriterionOutcome {
    let start = Instant::now();
    let (pass, detail) = body().unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionOutcome { id, name, pass, detail, elapsed: start.elapsed(), parts: Vec::new() }
}

/// `padic{p,L}` for `p ∈ {2,3,5}`, `L ∈ {1,2,3}`, then `window{4,8,16}`.
pub fn sweep_models() -> Result<Vec<GroupModel>> {
    let mut out = Vec::new();
    for p in [2, 3, 5] {
        for level in 1..=3 {
            out.push(GroupModel::padic(p, level, MeasureSpec::Haar)?);
        }
    }
    for n in [4, 8, 16] {
        out.push(GroupModel::integer_window(n)?);
    }
    Ok(out)
}

pub const POWER_EXPONENTS: [f64; 8] = [-2.0, -1.5, -1.0, -0.5, 0.5, 1.0, 1.5, 2.0];
pub const P_GRID: [f64; 3] = [1.5, 2.0, 3.0];
pub const Q_GRID: [f64; 4] = [1.0, 1.5, 2.0, 3.0];
pub const LOG_RANGE: (f64, f64) = (-3.0, 3.0);

/// The 8 power weights followed by `n_random` random weights, with ids.
pub fn sweep_weights(model: &GroupModel, n_random: u64) -> Result<Vec<(String, Weight)>> {
    let mut out = Vec::new();
    for a in POWER_EXPONENTS {
        out.push((format!("power{{{a}}}"), power_weight(model, a)?));
    }
    for seed in 0..n_random {
        out.push((format!("random{{seed={seed}}}"), random_weight(model, LOG_RANGE.0, LOG_RANGE.1, seed)?));
    }
    Ok(out)
}

fn worst_of<'a>(rows: impl IntoIterator<Item = &'a VerificationReport>) -> Option<&'a VerificationReport> {
    rows.into_iter().fold(None, |acc: Option<&VerificationReport>, r| match acc {
        Some(a) if a.pass && (!r.pass || r.ratio > a.ratio) => Some(r),
        Some(a) => Some(a),
        None => Some(r),
    })
}

fn describe_worst(rows: &[VerificationReport]) -> String {
    match worst_of(rows) {
        Some(r) => format!(
            "worst ratio {:.6e} on {} {} p={} ({})",
            r.ratio,
            r.model,
            r.weight_id,
            r.p.map_or_else(|| "-".into(), |p| p.to_string()),
            r.witness
        ),
        None => "no rows".into(),
    }
}

/// Covering axioms, engulfing and the enlarged-set bounds by exhaustion.
pub fn criterion_1() -> CriterionOutcome {
    timed(1, "covering axioms", || {
        let start = Instant::now();
        let models = sweep_models()?;
        let mut worst_hat = 0.0f64;
        let mut pairs = 0;
        for m in &models {
            let r = m.verify_axioms()?;
            worst_hat = worst_hat.max(r.max_hat_ratio);
            pairs += r.engulf_pairs;
        }
        let secs = start.elapsed().as_secs_f64();
        Ok((
            secs < 10.0,
            format!(
                "{} models, {pairs} engulfing pairs, max mu(hat U)/(D^2 mu(U)) = {worst_hat:.4}, {secs:.2} s < 10 s",
                models.len()
            ),
        ))
    })
}

/// Floating constants against the exact rational oracle, and the duality
/// identity.
pub fn criterion_2() -> CriterionOutcome {
    timed(2, "constant oracles", || {
        let m = GroupModel::padic(3, 2, MeasureSpec::Haar)?;
        let w = power_weight(&m, 1.0)?;
        let mut gap = 0.0f64;
        for p in [1.0, 1.25, 1.5, 2.0, 3.0] {
            let fast = ap_constant(&m, &w, p)?;
            let exact = oracle::exact_ap_constant(&m, &w, p)?;
            let g = match &exact.power {
                Some(power) => oracle::relative_gap(fast.value.powi(exact.root as i32), power),
                None => (fast.value - exact.value).abs() / exact.value,
            };
            gap = gap.max(g);
            if fast.witness != exact.witness {
                return Ok((false, format!("A_{p} witness {} differs from oracle {}", fast.witness, exact.witness)));
            }
        }
        let fw = ainfty_fw(&m, &w);
        let exact = oracle::exact_ainfty_fw(&m, &w);
        gap = gap.max(oracle::relative_gap(fw.value, exact.power.as_ref().expect("exact")));
        let mut dual_gap = 0.0f64;
        let mut rows = 0;
        for model in [GroupModel::padic(3, 2, MeasureSpec::Haar)?, GroupModel::integer_window(8)?] {
            let weights = [
                power_weight(&model, -1.0)?,
                power_weight(&model, 1.0)?,
                random_weight(&model, -3.0, 3.0, 1)?,
                random_weight(&model, -3.0, 3.0, 2)?,
                random_weight(&model, -3.0, 3.0, 3)?,
            ];
            for w in &weights {
                for p in P_GRID {
                    let r = check_duality(&model, w, p)?;
                    dual_gap = dual_gap.max((r.ratio - 1.0).abs());
                    rows += 1;
                }
            }
        }
        Ok((
            gap <= 1e-12 && dual_gap <= 1e-9,
            format!(
                "max oracle gap {gap:.3e} <= 1e-12; duality max |ratio-1| {dual_gap:.3e} <= 1e-9 over {rows} cases"
            ),
        ))
    })
}

/// Reverse Hölder inequality on every base set of the sweep.
pub fn criterion_3() -> CriterionOutcome {
    timed(3, "reverse Hoelder", || {
        let start = Instant::now();
        let mut worst: Vec<VerificationReport> = Vec::new();
        let mut checks = 0;
        for m in sweep_models()? {
            let hats = HatTable::new(&m);
            let weights = sweep_weights(&m, 100)?;
            let rows: Vec<Result<VerificationReport>> = weights
                .par_iter()
                .map(|(id, w)| check_rhi_with(&m, w, &hats).map(|c| c.worst.with_weight_id(id.clone())))
                .collect();
            for r in rows {
                worst.push(r?);
            }
            checks += weights.len() * m.base_sets().len();
        }
        let secs = start.elapsed().as_secs_f64();
        let all = worst.iter().all(|r| r.pass);
        Ok((all && secs < 60.0, format!("{checks} (weight, U) checks, {}; {secs:.1} s < 60 s", describe_worst(&worst))))
    })
}

/// Calderón–Zygmund families on seeded random weights over the threshold grid.
pub fn criterion_4() -> CriterionOutcome {
    timed(4, "CZ decomposition", || {
        let mut families = 0usize;
        let mut nonempty = 0usize;
        let mut failures = Vec::new();
        for m in sweep_models()? {
            let sets = m.base_sets();
            let results: Vec<Result<(usize, usize, Vec<String>)>> = (0..100u64)
                .into_par_iter()
                .map(|seed| {
                    // Cycle through base sets so every level serves as U.
                    let u = sets[(seed as usize * 7919) % sets.len()];
                    let w = random_weight(&m, LOG_RANGE.0, LOG_RANGE.1, seed)?;
                    let mut fams = 0;
                    let mut full = 0;
                    let mut bad = Vec::new();
                    for lambda in lambda_grid(&m, &u, &w, 1.5, 8) {
                        match cz_decompose(&m, &u, &w, lambda) {
                            Ok(f) => {
                                let r = verify_cz(&m, &w, &f)?;
                                if let Some(e) = r.failure {
                                    bad.push(format!("{} seed {seed}: {e}", m.name()));
                                }
                                fams += 1;
                                full += usize::from(!f.is_empty());
                            }
                            Err(e) => bad.push(format!("{} seed {seed}: {e}", m.name())),
                        }
                    }
                    Ok((fams, full, bad))
                })
                .collect();
            for r in results {
                let (f, n, b) = r?;
                families += f;
                nonempty += n;
                failures.extend(b);
            }
        }
        Ok((
            failures.is_empty(),
            match failures.first() {
                None => format!(
                    "{families} families ({nonempty} nonempty) pass (a)-(d), disjointness and the mass sandwich"
                ),
                Some(f) => format!("{} failures, first: {f}", failures.len()),
            },
        ))
    })
}

/// Spike weight `1 + height * delta_at`.
pub fn spike_weight(model: &GroupModel, at: usize, height: f64) -> Result<Weight> {
    let mut v = vec![1.0; model.order()];
    v[at] += height;
    Weight::new(v)
}

/// Localization bound with `L = D^6`.
pub fn criterion_5() -> CriterionOutcome {
    timed(5, "localization", || {
        let mut checked = 0usize;
        let mut runs = 0usize;
        let mut failures = Vec::new();
        let mut small_checked = 0usize;
        let mut best_margin: Option<f64> = None;
        let mut nonvacuous = 0usize;
        // Z/27: spikes at a representative of every coset of every level.
        let z27 = GroupModel::padic(3, 3, MeasureSpec::Haar)?;
        let mut configs: Vec<(GroupModel, Vec<usize>)> = vec![(z27, vec![0, 1, 2, 3, 9])];
        // A deep binary model, where mu(Û)/mu(V) can exceed D^6.
        configs.push((GroupModel::padic(2, 8, MeasureSpec::Haar)?, vec![0, 1, 2, 4, 8, 16, 32, 64, 128]));
        for (k, (m, spikes)) in configs.iter().enumerate() {
            for &at in spikes {
                for height in [1e2, 1e4, 1e6] {
                    let w = spike_weight(m, at, height)?;
                    for u in [m.whole(), crate::group::BaseSet::new(at, m.i_max() - 1)] {
                        for lambda in lambda_grid(m, &u, &w, 1.5, 8) {
                            let r = localization_check(m, &u, &w, lambda)?;
                            runs += 1;
                            checked += r.checked;
                            if k == 0 {
                                small_checked += r.checked;
                            }
                            if let Some(f) = &r.failure {
                                failures.push(format!("{} {f}", m.name()));
                            }
                            if !r.is_vacuous() {
                                nonvacuous += 1;
                                let mm = r.min_outside_margin.unwrap_or(f64::NAN);
                                best_margin = Some(best_margin.map_or(mm, |b: f64| b.max(mm)));
                            }
                        }
                    }
                }
            }
        }
        let positive = best_margin.is_some_and(|b| b > 0.0);
        Ok((
            failures.is_empty() && nonvacuous > 0 && positive,
            format!(
                "{runs} runs, {checked} checked points ({small_checked} on Z/27, where mu(hat U)/mu(V) <= 27 < D^6 keeps it vacuous), \
                 {nonvacuous} nonvacuous runs, largest outside margin {}",
                best_margin.map_or_else(|| "none".into(), |b| format!("{b:.4e}"))
            ),
        ))
    })
}

/// Exact weak-type bound with scaling invariance.
pub fn criterion_6() -> CriterionOutcome {
    timed(6, "weak type", || {
        let mut rows = Vec::new();
        let mut scale_gap = 0.0f64;
        for m in sweep_models()? {
            let pairs: Vec<Result<(Vec<VerificationReport>, f64)>> = (0..50u64)
                .into_par_iter()
                .map(|seed| {
                    let w = random_weight(&m, LOG_RANGE.0, LOG_RANGE.1, seed)?;
                    let f = random_function(&m, 1.0, 1_000_000 + seed);
                    let mut out = Vec::new();
                    let mut gap = 0.0f64;
                    for q in Q_GRID {
                        let r = check_weak_type(&m, &w, q, &f)?;
                        let rw = check_weak_type(&m, &w.scaled(7.5)?, q, &f)?;
                        let rf = check_weak_type(&m, &w, q, &f.scaled(0.02)?)?;
                        gap =
                            gap.max(((rw.ratio - r.ratio) / r.ratio).abs()).max(((rf.ratio - r.ratio) / r.ratio).abs());
                        out.push(r.with_weight_id(format!("random{{seed={seed}}}")));
                    }
                    Ok((out, gap))
                })
                .collect();
            for p in pairs {
                let (r, g) = p?;
                rows.extend(r);
                scale_gap = scale_gap.max(g);
            }
        }
        let all = rows.iter().all(|r| r.pass);
        Ok((
            all && scale_gap <= 1e-9,
            format!("{} cases, {}; scaling gap {scale_gap:.2e} <= 1e-9", rows.len(), describe_worst(&rows)),
        ))
    })
}

/// Operator-norm lower bound against the mixed and the classical bounds.
pub const PART_LOWER_MIXED: &str = "lower <= mixed";
pub const PART_MIXED_CLASSICAL: &str = "mixed <= classical";
pub const PART_LOWER_CLASSICAL: &str = "lower <= classical";
pub const PART_MONOTONE: &str = "monotone lower bounds";

pub fn criterion_7() -> CriterionOutcome {
    let mut parts = Vec::new();
    let mut outcome = timed(7, "Buckley bounds", || {
        let spec = NormTestSpec { n_random: 8, seed: 0 };
        let mut mixed = Vec::new();
        let mut fold = Vec::new();
        let mut direct = Vec::new();
        let mut stages_ok = true;
        let mut constant_ratio = 0.0f64;
        for m in sweep_models()? {
            let weights = sweep_weights(&m, 8)?;
            let checks: Vec<Result<Vec<crate::verify::BuckleyCheck>>> = weights
                .par_iter()
                .map(|(id, w)| {
                    P_GRID
                        .iter()
                        .map(|&p| {
                            let mut c = check_buckley(&m, w, p, spec)?;
                            c.mixed.weight_id = id.clone();
                            c.fold.weight_id = id.clone();
                            c.direct.weight_id = id.clone();
                            Ok(c)
                        })
                        .collect()
                })
                .collect();
            for c in checks {
                for c in c? {
                    stages_ok &= c.estimate.stages.windows(2).all(|s| s[0] <= s[1]);
                    mixed.push(c.mixed);
                    fold.push(c.fold);
                    direct.push(c.direct);
                }
            }
            let one = Weight::constant(m.order(), 1.0)?;
            for p in P_GRID {
                let c = check_buckley(&m, &one, p, spec)?;
                constant_ratio = constant_ratio.max(c.mixed.ratio);
                stages_ok &= c.mixed.pass;
            }
            // Growing the random family never lowers the bound.
            let w = random_weight(&m, LOG_RANGE.0, LOG_RANGE.1, 5)?;
            let mut last = 0.0;
            for n in [0, 4, 16] {
                let e = estimate_operator_norm(&m, &w, 2.0, NormTestSpec { n_random: n, seed: 0 })?;
                stages_ok &= e.value >= last;
                last = e.value;
            }
        }
        let lower_ok = mixed.iter().all(|r| r.pass);
        let fold_ok = fold.iter().all(|r| r.pass);
        let fold_fail = fold.iter().filter(|r| !r.pass).count();
        parts = vec![
            (PART_LOWER_MIXED, lower_ok),
            (PART_MIXED_CLASSICAL, fold_ok),
            (PART_LOWER_CLASSICAL, direct.iter().all(|r| r.pass)),
            (PART_MONOTONE, stages_ok),
        ];
        Ok((
            lower_ok && fold_ok && stages_ok,
            format!(
                "lower <= mixed: {} ({}); mixed <= classical: {} ({} of {} fail; {}); lower <= classical: {}; \
                 constant weight lower/C(p,D) max {constant_ratio:.4e}; monotone lower bounds: {stages_ok}",
                if lower_ok { "ok" } else { "FAIL" },
                describe_worst(&mixed),
                if fold_ok { "ok" } else { "FAIL" },
                fold_fail,
                fold.len(),
                describe_worst(&fold),
                if direct.iter().all(|r| r.pass) { "ok" } else { "FAIL" },
            ),
        ))
    });
    outcome.parts = parts;
    outcome
}

/// Openness of the `A_p` classes on the sweep grid.
pub fn criterion_9() -> CriterionOutcome {
    timed(9, "open property", || {
        let mut rows = Vec::new();
        for m in sweep_models()? {
            let weights = sweep_weights(&m, 8)?;
            let r: Vec<Result<Vec<VerificationReport>>> = weights
                .par_iter()
                .map(|(id, w)| {
                    P_GRID.iter().map(|&p| Ok(check_open_property(&m, w, p)?.with_weight_id(id.clone()))).collect()
                })
                .collect();
            for r in r {
                rows.extend(r?);
            }
        }
        Ok((
            rows.iter().all(|r| r.pass),
            format!("{} cases (p - eps > 1 in all), {}", rows.len(), describe_worst(&rows)),
        ))
    })
}

/// The reference configuration used for the determinism criterion.
pub const REFERENCE_CONFIG: &str = include_str!("../configs/reference.toml");

fn scratch_dir(tag: &str) -> std::path::PathBuf {
    let nanos = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_nanos());
    std::env::temp_dir().join(format!("lab-{tag}-{}-{nanos}", std::process::id()))
}

fn tree_bytes(root: &std::path::Path) -> Result<Vec<(std::path::PathBuf, Vec<u8>)>> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).expect("walked under root").to_path_buf();
                out.push((rel, std::fs::read(&path)?));
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Two runs of the reference configuration produce identical files.
pub fn criterion_8() -> CriterionOutcome {
    timed(8, "determinism", || {
        let cfg = crate::experiment::ExperimentConfig::from_toml(REFERENCE_CONFIG, &std::env::temp_dir())?;
        let a = scratch_dir("determinism-a");
        let b = scratch_dir("determinism-b");
        let result = (|| {
            let first = crate::experiment::run_into(&cfg, &a)?;
            crate::experiment::run_into(&cfg, &b)?;
            let (ta, tb) = (tree_bytes(&a)?, tree_bytes(&b)?);
            let same = ta == tb;
            let bytes: usize = ta.iter().map(|(_, v)| v.len()).sum();
            Ok((
                same && !ta.is_empty(),
                format!("{} files, {bytes} bytes, identical: {same}; {} report rows", ta.len(), first.rows.len()),
            ))
        })();
        let _ = std::fs::remove_dir_all(&a);
        let _ = std::fs::remove_dir_all(&b);
        result
    })
}

/// Every criterion, in order.
pub fn run_all() -> Vec<CriterionOutcome> {
    vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
    ]
}
