//! Weights, nonnegative group functions and their averages.

use std::io::{Read, Write};
use std::ops::Deref;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupModel, ModelKind};

/// Largest allowed max/min ratio of a generated weight.
pub const MAX_DYNAMIC_RANGE: f64 = 1e12;

/// Strictly positive, finite values indexed by group element.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Weight(Vec<f64>);

/// Nonnegative, finite values indexed by group element.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct GroupFunction(Vec<f64>);

impl Weight {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((x, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidWeight(format!("value {v} at element {x}")));
        }
        Ok(Weight(values))
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_function(self) -> GroupFunction {
        GroupFunction(self.0)
    }

    pub fn to_function(&self) -> GroupFunction {
        GroupFunction(self.0.clone())
    }

    /// Pointwise `c * w`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|v| v * c).collect())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_pairs(out, &self.0)
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        Self::new(read_pairs(input)?)
    }
}

impl GroupFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((x, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidFunction(format!("value {v} at element {x}")));
        }
        Ok(GroupFunction(values))
    }

    pub fn zeros(n: usize) -> Self {
        GroupFunction(vec![0.0; n])
    }

    /// Indicator of a point set.
    pub fn indicator(n: usize, points: &[usize]) -> Self {
        let mut v = vec![0.0; n];
        points.iter().for_each(|&x| v[x] = 1.0);
        GroupFunction(v)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    /// `f * g` pointwise.
    pub fn times(&self, g: &[f64]) -> Self {
        GroupFunction(self.0.iter().zip(g).map(|(a, b)| a * b).collect())
    }

    /// `f` restricted to a point set.
    pub fn restricted(&self, points: &[usize]) -> Self {
        let mut v = vec![0.0; self.0.len()];
        points.iter().for_each(|&x| v[x] = self.0[x]);
        GroupFunction(v)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|v| v * c).collect())
    }

    /// The truncation `f * chi_{f > t}`.
    pub fn truncated(&self, t: f64) -> Self {
        GroupFunction(self.0.iter().map(|&v| if v > t { v } else { 0.0 }).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_pairs(out, &self.0)
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        Self::new(read_pairs(input)?)
    }
}

impl Deref for Weight {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl Deref for GroupFunction {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Weight {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Weight::new(v)
    }
}

impl From<Weight> for Vec<f64> {
    fn from(w: Weight) -> Self {
        w.0
    }
}

impl TryFrom<Vec<f64>> for GroupFunction {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        GroupFunction::new(v)
    }
}

impl From<GroupFunction> for Vec<f64> {
    fn from(f: GroupFunction) -> Self {
        f.0
    }
}

impl From<Weight> for GroupFunction {
    fn from(w: Weight) -> Self {
        w.into_function()
    }
}

fn write_pairs<W: Write>(out: W, values: &[f64]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(out);
    wr.write_record(["element_id", "value"])?;
    for (x, v) in values.iter().enumerate() {
        wr.write_record([x.to_string(), format!("{v:.16e}")])?;
    }
    wr.flush()?;
    Ok(())
}

fn read_pairs<R: Read>(input: R) -> Result<Vec<f64>> {
    let mut rd = csv::Reader::from_reader(input);
    let mut pairs = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let parse_err = |what: &str| Error::InvalidWeight(format!("bad {what} in {rec:?}"));
        let x: usize = rec.get(0).and_then(|s| s.trim().parse().ok()).ok_or_else(|| parse_err("element_id"))?;
        let v: f64 = rec.get(1).and_then(|s| s.trim().parse().ok()).ok_or_else(|| parse_err("value"))?;
        pairs.push((x, v));
    }
    pairs.sort_by_key(|p| p.0);
    if pairs.iter().enumerate().any(|(k, p)| p.0 != k) {
        return Err(Error::InvalidWeight("element ids must be exactly 0..n".into()));
    }
    Ok(pairs.into_iter().map(|p| p.1).collect())
}

/// `mu`-weighted average of `f` over a point set.
pub fn average(model: &GroupModel, f: &[f64], points: &[usize]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(weight_mass(model, f, points) / model.mass_of(points))
}

/// `sum_{x in V} f(x) mu(x)`.
pub fn weight_mass(model: &GroupModel, f: &[f64], points: &[usize]) -> f64 {
    points.iter().map(|&x| f[x] * model.mass(x)).sum()
}

/// Hölder conjugate `p / (p - 1)`.
pub fn conjugate(p: f64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::BadExponent("p > 1"));
    }
    Ok(p / (p - 1.0))
}

/// The dual weight `w^{1 - p'}`.
pub fn dual_weight(w: &Weight, p: f64) -> Result<Weight> {
    let e = 1.0 - conjugate(p)?;
    Weight::new(w.iter().map(|v| v.powf(e)).collect())
}

fn check_range(values: &[f64]) -> Result<()> {
    let hi = values.iter().cloned().fold(f64::MIN, f64::max);
    let lo = values.iter().cloned().fold(f64::MAX, f64::min);
    if !(hi / lo <= MAX_DYNAMIC_RANGE) {
        return Err(Error::WeightRange(hi / lo));
    }
    Ok(())
}

/// Power weight: `p^{-a v(x)}` on p-adic models, `(1 + |k|)^a` on the
/// integer window.
pub fn power_weight(model: &GroupModel, a: f64) -> Result<Weight> {
    let values: Vec<f64> = match *model.kind() {
        ModelKind::Padic { p, .. } => {
            (0..model.order()).map(|x| (p as f64).powf(-a * model.valuation(x).unwrap() as f64)).collect()
        }
        ModelKind::Window { .. } => (0..model.order()).map(|x| (1.0 + model.label(x).abs() as f64).powf(a)).collect(),
        ModelKind::Table => return Err(Error::Unsupported("power weights need a p-adic or window model")),
    };
    check_range(&values)?;
    Weight::new(values)
}

/// Uniform draw in `[0, 1)` from the top 53 bits of a SplitMix64 output.
pub(crate) fn unit_f64(rng: &mut SplitMix64) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// I.i.d. values `exp(U(log_min, log_max))`, one SplitMix64 draw per element
/// in element order.
pub fn random_weight(model: &GroupModel, log_min: f64, log_max: f64, seed: u64) -> Result<Weight> {
    if !(log_min <= log_max) {
        return Err(Error::InvalidWeight(format!("log_min {log_min} > log_max {log_max}")));
    }
    let mut rng = SplitMix64::seed_from_u64(seed);
    let values: Vec<f64> =
        (0..model.order()).map(|_| (log_min + unit_f64(&mut rng) * (log_max - log_min)).exp()).collect();
    check_range(&values)?;
    Weight::new(values)
}

/// Nonnegative random function: each value is `U(0, 1)^3 * scale`, so a few
/// entries dominate.
pub fn random_function(model: &GroupModel, scale: f64, seed: u64) -> GroupFunction {
    let mut rng = SplitMix64::seed_from_u64(seed);
    GroupFunction((0..model.order()).map(|_| unit_f64(&mut rng).powi(3) * scale).collect())
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;
    use crate::group::{BaseSet, MeasureSpec};

    fn z9() -> GroupModel {
        GroupModel::padic(3, 2, MeasureSpec::Haar).unwrap()
    }

    #[test]
    fn average_examples() {
        let m = z9();
        let c = GroupFunction::new(vec![2.5; 9]).unwrap();
        assert_eq!(average(&m, &c, &[1, 4, 7]).unwrap(), 2.5);
        let delta = GroupFunction::indicator(9, &[0]);
        assert_relative_eq!(average(&m, &delta, m.family(1)).unwrap(), 1.0 / 3.0);
        assert!(matches!(average(&m, &delta, &[]), Err(Error::EmptySet)));

        let w = GroupModel::integer_window(4).unwrap();
        let abs: Vec<f64> = (0..w.order()).map(|x| w.label(x).abs() as f64).collect();
        assert_relative_eq!(average(&w, &abs, &w.points(&BaseSet::new(0, 2))).unwrap(), 6.0 / 5.0);
    }

    #[test]
    fn weight_mass_examples() {
        let m = z9();
        let one = Weight::constant(9, 1.0).unwrap();
        assert_eq!(weight_mass(&m, &one, &[0, 1, 2, 3, 4]), 5.0);
        assert_eq!(weight_mass(&m, &one, &[]), 0.0);
        let w = power_weight(&m, 1.0).unwrap();
        assert_relative_eq!(weight_mass(&m, &w, m.family(1)), 7.0 / 9.0, max_relative = 1e-15);
    }

    #[test]
    fn dual_weight_examples() {
        let m = z9();
        let one = Weight::constant(9, 1.0).unwrap();
        assert_eq!(dual_weight(&one, 3.0).unwrap(), one);
        let w = power_weight(&m, 1.0).unwrap();
        let sigma = dual_weight(&w, 2.0).unwrap();
        for (s, v) in sigma.iter().zip(w.iter()) {
            assert_relative_eq!(*s, 1.0 / v, max_relative = 1e-15);
        }
        let p = 1.7;
        let back = dual_weight(&dual_weight(&w, p).unwrap(), conjugate(p).unwrap()).unwrap();
        for (b, v) in back.iter().zip(w.iter()) {
            assert_relative_eq!(*b, *v, max_relative = 1e-12);
        }
        assert!(dual_weight(&w, 1.0).is_err());
    }

    #[test]
    fn power_weight_examples() {
        let m = z9();
        assert!(power_weight(&m, 0.0).unwrap().iter().all(|&v| v == 1.0));
        let w = power_weight(&m, 1.0).unwrap();
        let expected = [1.0 / 9.0, 1.0, 1.0, 1.0 / 3.0, 1.0, 1.0, 1.0 / 3.0, 1.0, 1.0];
        for (a, b) in w.iter().zip(expected) {
            assert_relative_eq!(*a, b, max_relative = 1e-15);
        }
        let win = GroupModel::integer_window(4).unwrap();
        let w = power_weight(&win, -1.0).unwrap();
        assert_relative_eq!(w[win.element(-3)], 0.25);
        assert!(matches!(power_weight(&m, 20.0), Err(Error::WeightRange(_))));
    }

    #[test]
    fn random_weight_is_reproducible() {
        let m = z9();
        let a = random_weight(&m, -3.0, 3.0, 11).unwrap();
        assert_eq!(a, random_weight(&m, -3.0, 3.0, 11).unwrap());
        assert_ne!(a, random_weight(&m, -3.0, 3.0, 12).unwrap());
        assert!(a.iter().all(|&v| v >= (-3.0f64).exp() && v <= 3.0f64.exp()));
        assert!(random_weight(&m, 0.0, 0.0, 5).unwrap().iter().all(|&v| v == 1.0));
        assert!(random_weight(&m, 1.0, 0.0, 5).is_err());
    }

    #[test]
    fn weights_reject_nonpositive_values() {
        assert!(Weight::new(vec![1.0, 0.0]).is_err());
        assert!(Weight::new(vec![1.0, f64::NAN]).is_err());
        assert!(GroupFunction::new(vec![0.0, -1.0]).is_err());
        assert!(GroupFunction::new(vec![0.0, 1.0]).is_ok());
    }

    #[test]
    fn csv_round_trip() {
        let m = z9();
        let w = random_weight(&m, -2.0, 2.0, 3).unwrap();
        let mut buf = Vec::new();
        w.write_csv(&mut buf).unwrap();
        assert_eq!(Weight::read_csv(buf.as_slice()).unwrap(), w);
        let json = serde_json::to_string(&w).unwrap();
        assert_eq!(serde_json::from_str::<Weight>(&json).unwrap(), w);
        assert!(serde_json::from_str::<Weight>("[1.0, -1.0]").is_err());
    }
}
