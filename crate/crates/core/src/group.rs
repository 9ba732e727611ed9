//! Finite group models carrying a covering family.
//!
//! Every model is a cyclic group `Z/nZ` whose elements are the identifiers
//! `0..n`. A model owns a point mass for each element, a nested family of
//! symmetric neighbourhoods `U_i` of the identity indexed by a clamped integer
//! range, the dilation map `theta` and a doubling constant that is always
//! recomputed by exhaustion at construction time.
//!
//! The family is clamped at both ends: the smallest index carries `{0}` and
//! the largest carries the whole group, so every supremum over base sets is
//! a maximum over a finite list.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Covering index. Indices live in `index_range()` of the owning model.
pub type Index = i32;

const MAX_MASS_RATIO: f64 = 1e12;

/// A translate `center + U_index`.
///
/// The derived ordering compares `(index, center)`, which is the global
/// tie-break key: when several base sets attain a maximum the smallest key
/// wins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BaseSet {
    pub index: Index,
    pub center: usize,
}

impl BaseSet {
    pub fn new(center: usize, index: Index) -> Self {
        BaseSet { index, center }
    }
}

impl fmt::Display for BaseSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+U_{}", self.center, self.index)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Padic { p: u64, level: u32 },
    Window { half_width: usize },
    Table,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub enum MeasureSpec {
    /// Unit mass at every element.
    #[default]
    Haar,
    /// One strictly positive mass per element.
    Masses(Vec<f64>),
}

/// Structure of one level of the family, used to canonicalise base sets
/// without hashing point lists.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Shape {
    Whole,
    Subgroup { step: usize },
    Interval,
    Generic,
}

/// Which index bounds the local base of `U`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HatRule {
    /// `j ≤ j_index(U)`.
    #[default]
    MaximalIndex,
    /// `j ≤ U.index`, the index of the representation handed in.
    GivenIndex,
}

/// Result of the engulfing check for a pair of base sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engulf {
    Disjoint,
    /// The smaller set lies inside `by = y + U_{theta^2(j)}`.
    Contained {
        by: BaseSet,
    },
}

/// Counts gathered while exhaustively re-checking the covering axioms.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct AxiomReport {
    pub base_sets: usize,
    pub engulf_pairs: usize,
    pub max_doubling_ratio: f64,
    pub max_hat_ratio: f64,
}

#[derive(Clone, Debug)]
pub struct GroupModel {
    kind: ModelKind,
    order: usize,
    measure: Vec<f64>,
    haar: bool,
    i_min: Index,
    family: Vec<Vec<usize>>,
    membership: Vec<Vec<bool>>,
    shapes: Vec<Shape>,
    theta: Vec<Index>,
    doubling: f64,
    canon: Vec<Vec<usize>>,
    bases: Vec<BaseSet>,
    base_masses: Vec<f64>,
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl GroupModel {
    /// `Z/p^L Z` with `U_i = p^{L-i} Z / p^L Z`, `0 ≤ i ≤ L`, and
    /// `theta(i) = min(i + 1, L)`.
    pub fn padic(p: u64, level: u32, measure: MeasureSpec) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if !(1..=8).contains(&level) {
            return Err(Error::LevelOutOfRange(level));
        }
        let order = p.checked_pow(level).filter(|&n| n <= 1 << 24).ok_or(Error::LevelOutOfRange(level))? as usize;
        let family = (0..=level)
            .map(|i| {
                let step = p.pow(level - i) as usize;
                (0..order).step_by(step).collect::<Vec<_>>()
            })
            .collect();
        let top = level as Index;
        let theta = (0..=top).map(|i| (i + 1).min(top)).collect();
        Self::build(ModelKind::Padic { p, level }, order, measure, 0, family, theta)
    }

    /// A window of `Z` hosted in `Z/8NZ`: `U_0 = {0}`,
    /// `U_i = {|k| ≤ 2^{i-1}}` for `1 ≤ i ≤ m + 2` and `U_{m+3}` the whole
    /// host group, with `N = 2^m` and `theta(i) = i + 1` clamped at the top.
    pub fn integer_window(half_width: usize) -> Result<Self> {
        if !(2..=4096).contains(&half_width) || !half_width.is_power_of_two() {
            return Err(Error::BadHalfWidth(half_width));
        }
        let m = half_width.trailing_zeros() as Index;
        let order = 8 * half_width;
        let top = m + 3;
        let mut family = vec![vec![0]];
        for i in 1..top {
            let r = 1usize << (i - 1);
            let mut set: Vec<usize> = (0..=r).chain((order - r)..order).collect();
            set.sort_unstable();
            set.dedup();
            family.push(set);
        }
        family.push((0..order).collect());
        let theta = (0..=top).map(|i| (i + 1).min(top)).collect();
        Self::build(ModelKind::Window { half_width }, order, MeasureSpec::Haar, 0, family, theta)
    }

    /// A user-supplied family on `Z/orderZ`. `family[k]` is `U_{i_min + k}`
    /// and must be strictly increasing, symmetric, start at `{0}` and end at
    /// the whole group.
    pub fn from_table(
        order: usize,
        measure: MeasureSpec,
        i_min: Index,
        family: Vec<Vec<usize>>,
        theta: Vec<Index>,
    ) -> Result<Self> {
        Self::build(ModelKind::Table, order, measure, i_min, family, theta)
    }

    fn build(
        kind: ModelKind,
        order: usize,
        measure: MeasureSpec,
        i_min: Index,
        mut family: Vec<Vec<usize>>,
        theta: Vec<Index>,
    ) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidFamily("empty group".into()));
        }
        let (measure, haar) = match measure {
            MeasureSpec::Haar => (vec![1.0; order], true),
            MeasureSpec::Masses(m) => {
                if m.len() != order {
                    return Err(Error::MassLength { expected: order, got: m.len() });
                }
                if let Some((element, &value)) = m.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
                    return Err(Error::NonPositiveMass { element, value });
                }
                let hi = m.iter().cloned().fold(f64::MIN, f64::max);
                let lo = m.iter().cloned().fold(f64::MAX, f64::min);
                if hi / lo > MAX_MASS_RATIO {
                    return Err(Error::MassRange(hi / lo));
                }
                let haar = m.iter().all(|&v| v == 1.0);
                (m, haar)
            }
        };
        if family.is_empty() {
            return Err(Error::InvalidFamily("no levels".into()));
        }
        if theta.len() != family.len() {
            return Err(Error::InvalidFamily(format!("theta has {} entries for {} levels", theta.len(), family.len())));
        }
        for set in family.iter_mut() {
            set.sort_unstable();
            set.dedup();
            if let Some(&x) = set.iter().find(|&&x| x >= order) {
                return Err(Error::ElementOutOfRange(x));
            }
        }
        let i_max = i_min + family.len() as Index - 1;
        let membership: Vec<Vec<bool>> = family
            .iter()
            .map(|set| {
                let mut m = vec![false; order];
                set.iter().for_each(|&x| m[x] = true);
                m
            })
            .collect();

        if family[0] != [0] {
            return Err(Error::InvalidFamily("smallest set must be {0}".into()));
        }
        if family[family.len() - 1].len() != order {
            return Err(Error::InvalidFamily("largest set must be the whole group".into()));
        }
        for (k, set) in family.iter().enumerate() {
            let i = i_min + k as Index;
            if let Some(&x) = set.iter().find(|&&x| !membership[k][(order - x) % order]) {
                return Err(Error::InvalidFamily(format!("U_{i} is not symmetric at {x}")));
            }
            if k > 0 {
                let prev = &family[k - 1];
                if prev.len() >= set.len() || prev.iter().any(|&x| !membership[k][x]) {
                    return Err(Error::InvalidFamily(format!("U_{} is not strictly contained in U_{i}", i - 1)));
                }
            }
        }
        for (k, &t) in theta.iter().enumerate() {
            let i = i_min + k as Index;
            if t < i || t > i_max {
                return Err(Error::InvalidFamily(format!("theta({i}) = {t} out of range")));
            }
            if k > 0 && t < theta[k - 1] {
                return Err(Error::InvalidFamily("theta must be nondecreasing".into()));
            }
        }

        let shapes = family.iter().map(|set| detect_shape(set, order)).collect::<Vec<_>>();
        let canon =
            family.iter().zip(&shapes).map(|(set, shape)| canonical_centers(set, *shape, order)).collect::<Vec<_>>();

        let mut model = GroupModel {
            kind,
            order,
            measure,
            haar,
            i_min,
            family,
            membership,
            shapes,
            theta,
            doubling: 1.0,
            canon,
            bases: Vec::new(),
            base_masses: Vec::new(),
        };
        model.check_difference_axiom()?;
        model.doubling = model.doubling_ratio();
        for i in model.index_range() {
            for c in 0..order {
                if model.canon[model.level(i)][c] == c {
                    model.bases.push(BaseSet::new(c, i));
                }
            }
        }
        model.base_masses = model.bases.iter().map(|b| model.base_mass(b)).collect();
        Ok(model)
    }

    fn check_difference_axiom(&self) -> Result<()> {
        for i in self.index_range() {
            let t = self.level(self.theta(i));
            if self.shapes[t] == Shape::Whole {
                continue;
            }
            let set = self.family(i);
            for &a in set {
                for &b in set {
                    if !self.membership[t][self.sub(a, b)] {
                        return Err(Error::AxiomViolation(format!("U_{i} - U_{i} not inside U_{}", self.theta(i))));
                    }
                }
            }
        }
        Ok(())
    }

    /// Smallest `D` with `mu(x + U_theta(i)) ≤ D mu(x + U_i)` for all `x, i`.
    fn doubling_ratio(&self) -> f64 {
        let mut d: f64 = 1.0;
        for i in self.index_range() {
            let t = self.theta(i);
            if t == i {
                continue;
            }
            for x in 0..self.order {
                let small = self.base_mass(&BaseSet::new(x, i));
                let big = self.base_mass(&BaseSet::new(x, t));
                d = d.max(big / small);
            }
        }
        d
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    /// Number of elements.
    /// Short model name: `padic{p,L}`, `window{N}` or `table{n}`, with a
    /// `,custom` suffix when the measure is not Haar.
    pub fn name(&self) -> String {
        let m = if self.haar { "" } else { ",custom" };
        match self.kind {
            ModelKind::Padic { p, level } => format!("padic{{{p},{level}{m}}}"),
            ModelKind::Window { half_width } => format!("window{{{half_width}{m}}}"),
            ModelKind::Table => format!("table{{{}{m}}}", self.order),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        (a + b) % self.order
    }

    pub fn neg(&self, a: usize) -> usize {
        (self.order - a % self.order) % self.order
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        (a + self.order - b % self.order) % self.order
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn mass(&self, x: usize) -> f64 {
        self.measure[x]
    }

    pub fn is_haar(&self) -> bool {
        self.haar
    }

    pub fn i_min(&self) -> Index {
        self.i_min
    }

    pub fn i_max(&self) -> Index {
        self.i_min + self.family.len() as Index - 1
    }

    pub fn index_range(&self) -> std::ops::RangeInclusive<Index> {
        self.i_min..=self.i_max()
    }

    pub fn check_index(&self, i: Index) -> Result<()> {
        if self.index_range().contains(&i) {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: i, min: self.i_min, max: self.i_max() })
        }
    }

    fn level(&self, i: Index) -> usize {
        (i - self.i_min) as usize
    }

    /// Sorted elements of `U_i`. Panics when `i` is out of range.
    pub fn family(&self, i: Index) -> &[usize] {
        &self.family[self.level(i)]
    }

    pub fn theta(&self, i: Index) -> Index {
        self.theta[self.level(i)]
    }

    /// `theta` applied `n` times.
    pub fn theta_n(&self, i: Index, n: u32) -> Index {
        (0..n).fold(i, |j, _| self.theta(j))
    }

    /// Doubling constant, recomputed by exhaustion.
    pub fn doubling(&self) -> f64 {
        self.doubling
    }

    /// Checked constructor for `center + U_index`.
    pub fn base_set(&self, center: usize, index: Index) -> Result<BaseSet> {
        self.check_index(index)?;
        if center >= self.order {
            return Err(Error::ElementOutOfRange(center));
        }
        Ok(BaseSet::new(center, index))
    }

    /// The base set `0 + U_{i_max}`, i.e. the whole group.
    pub fn whole(&self) -> BaseSet {
        BaseSet::new(0, self.i_max())
    }

    /// Sorted element list of a base set.
    pub fn points(&self, v: &BaseSet) -> Vec<usize> {
        let mut pts: Vec<usize> = self.family(v.index).iter().map(|&u| self.add(v.center, u)).collect();
        pts.sort_unstable();
        pts
    }

    pub fn contains(&self, v: &BaseSet, x: usize) -> bool {
        self.membership[self.level(v.index)][self.sub(x, v.center)]
    }

    pub fn mass_of(&self, points: &[usize]) -> f64 {
        points.iter().fold(0.0, |s, &x| s + self.measure[x])
    }

    pub fn base_mass(&self, v: &BaseSet) -> f64 {
        self.family(v.index).iter().map(|&u| self.measure[self.add(v.center, u)]).sum()
    }

    /// Representation of the same point set with the largest index and, at
    /// that index, the smallest center.
    pub fn canonical(&self, v: &BaseSet) -> BaseSet {
        // Levels are strictly nested, so a point set occurs at one index only.
        BaseSet::new(self.canon[self.level(v.index)][v.center], v.index)
    }

    /// All distinct base sets, sorted by the tie-break key.
    pub fn base_sets(&self) -> &[BaseSet] {
        &self.bases
    }

    /// `mu(V)` for each entry of `base_sets()`.
    pub fn base_set_masses(&self) -> &[f64] {
        &self.base_masses
    }

    /// Largest index at which `v`'s point set is a translate of `U_j`,
    /// found by scanning every `(x, j)`.
    pub fn j_index(&self, v: &BaseSet) -> Index {
        let pts = self.points(v);
        let mut best = v.index;
        for j in self.index_range() {
            if self.family(j).len() != pts.len() {
                continue;
            }
            // 0 ∈ U_j, so any representing center is a point of v.
            let hit = pts.iter().any(|&x| self.family(j).iter().all(|&u| pts.binary_search(&self.add(x, u)).is_ok()));
            if hit {
                best = best.max(j);
            }
        }
        best
    }

    pub fn sets_intersect(&self, a: &BaseSet, b: &BaseSet) -> bool {
        let (small, big) = if self.family(a.index).len() <= self.family(b.index).len() { (a, b) } else { (b, a) };
        self.family(small.index).iter().any(|&u| self.contains(big, self.add(small.center, u)))
    }

    pub fn is_subset(&self, a: &BaseSet, b: &BaseSet) -> bool {
        self.family(a.index).iter().all(|&u| self.contains(b, self.add(a.center, u)))
    }

    /// Engulfing property for `u = x + U_i`, `v = y + U_j` with `i ≤ j`.
    pub fn engulf_check(&self, u: &BaseSet, v: &BaseSet) -> Result<Engulf> {
        if u.index > v.index {
            return Err(Error::Precondition(format!("{u} has larger index than {v}")));
        }
        if !self.sets_intersect(u, v) {
            return Ok(Engulf::Disjoint);
        }
        let by = self.dilate(v, 2);
        if self.is_subset(u, &by) {
            Ok(Engulf::Contained { by })
        } else {
            Err(Error::AxiomViolation(format!("{u} meets {v} but escapes {by}")))
        }
    }

    /// `y + U_{theta^n(j)}`, clamped at the top index.
    pub fn dilate(&self, v: &BaseSet, n: u32) -> BaseSet {
        BaseSet::new(v.center, self.theta_n(v.index, n))
    }

    /// Local base `B_U`: the distinct sets `y + U_j` with `y ∈ U` and
    /// `j ≤ j_index(U)`. Each set is represented with a center in `U`.
    pub fn local_base(&self, u: &BaseSet) -> Vec<BaseSet> {
        self.local_base_with(u, HatRule::MaximalIndex)
    }

    pub fn local_base_with(&self, u: &BaseSet, rule: HatRule) -> Vec<BaseSet> {
        let k = match rule {
            HatRule::MaximalIndex => self.j_index(u),
            HatRule::GivenIndex => u.index,
        };
        let centers = self.points(u);
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for j in self.i_min..=k {
            for &y in &centers {
                let v = BaseSet::new(y, j);
                if seen.insert(self.canonical(&v)) {
                    out.push(v);
                }
            }
        }
        out
    }

    /// The enlarged set: union of the local base of `u`.
    pub fn hat(&self, u: &BaseSet) -> Vec<usize> {
        self.hat_with(u, HatRule::MaximalIndex)
    }

    pub fn hat_with(&self, u: &BaseSet, rule: HatRule) -> Vec<usize> {
        let mut inside = vec![false; self.order];
        for v in self.local_base_with(u, rule) {
            for &d in self.family(v.index) {
                inside[self.add(v.center, d)] = true;
            }
        }
        (0..self.order).filter(|&x| inside[x]).collect()
    }

    /// Signed integer label of an element: the window model reports the
    /// hosted integer in `-4N..4N`, every other model the identifier.
    pub fn label(&self, x: usize) -> i64 {
        match self.kind {
            ModelKind::Window { .. } if x >= self.order / 2 => x as i64 - self.order as i64,
            _ => x as i64,
        }
    }

    /// Element carrying a signed label (reduced modulo the order).
    pub fn element(&self, label: i64) -> usize {
        label.rem_euclid(self.order as i64) as usize
    }

    /// p-adic valuation in `Z/p^L Z`, with `v(0) = L`. `None` off p-adic models.
    pub fn valuation(&self, x: usize) -> Option<u32> {
        match self.kind {
            ModelKind::Padic { p, level } => {
                let p = p as usize;
                let mut v = 0;
                let mut y = x % self.order;
                if y == 0 {
                    return Some(level);
                }
                while y.is_multiple_of(p) {
                    y /= p;
                    v += 1;
                }
                Some(v)
            }
            _ => None,
        }
    }

    /// Re-checks every covering axiom, the engulfing property and the
    /// geometric properties of the enlarged sets by exhaustion.
    pub fn verify_axioms(&self) -> Result<AxiomReport> {
        let n = self.order;
        for (k, set) in self.family.iter().enumerate() {
            if !set.contains(&0) || set.iter().any(|&x| !self.membership[k][self.neg(x)]) {
                return Err(Error::AxiomViolation(format!(
                    "U_{} not a symmetric neighbourhood",
                    self.i_min + k as Index
                )));
            }
            if k > 0 && self.family[k - 1].iter().any(|&x| !self.membership[k][x]) {
                return Err(Error::AxiomViolation("family not nested".into()));
            }
        }
        self.check_difference_axiom()?;
        let mut report = AxiomReport { base_sets: self.bases.len(), ..Default::default() };
        let tol = 1.0 + 1e-12;
        for i in self.index_range() {
            for x in 0..n {
                let ratio = self.base_mass(&BaseSet::new(x, self.theta(i))) / self.base_mass(&BaseSet::new(x, i));
                if ratio > self.doubling * tol {
                    return Err(Error::AxiomViolation(format!("doubling fails at {x}+U_{i}")));
                }
                report.max_doubling_ratio = report.max_doubling_ratio.max(ratio);
            }
        }
        // Intersection and containment of x+U_i, y+U_j depend only on x - y.
        for i in self.index_range() {
            for j in i..=self.i_max() {
                let v = BaseSet::new(0, j);
                for d in 0..n {
                    let u = BaseSet::new(d, i);
                    if let Engulf::Contained { .. } = self.engulf_check(&u, &v)? {
                        report.engulf_pairs += 1;
                    }
                }
            }
        }
        for u in &self.bases {
            let k = self.j_index(u);
            let outer = BaseSet::new(u.center, self.theta(k));
            for v in self.local_base(u) {
                if !self.is_subset(&v, &outer) {
                    return Err(Error::AxiomViolation(format!("{v} escapes {outer}")));
                }
            }
            let hat = self.hat(u);
            let members = self.points(u);
            for &z in &members {
                let big = BaseSet::new(z, self.theta_n(k, 2));
                if hat.iter().any(|&h| !self.contains(&big, h)) {
                    return Err(Error::AxiomViolation(format!("hat of {u} escapes {big}")));
                }
            }
            let ratio = self.mass_of(&hat) / self.base_mass(u);
            let d2 = self.doubling * self.doubling;
            if ratio > d2 * tol {
                return Err(Error::AxiomViolation(format!("mu(hat {u}) > D^2 mu({u})")));
            }
            report.max_hat_ratio = report.max_hat_ratio.max(ratio);
        }
        Ok(report)
    }
}

fn detect_shape(set: &[usize], order: usize) -> Shape {
    if set.len() == order {
        return Shape::Whole;
    }
    if order.is_multiple_of(set.len()) {
        let step = order / set.len();
        if set.iter().enumerate().all(|(k, &x)| x == k * step) {
            return Shape::Subgroup { step };
        }
    }
    if set.len() % 2 == 1 {
        let r = set.len() / 2;
        let expected: BTreeSet<usize> = (0..=r).chain((order - r)..order).collect();
        if expected.len() == set.len() && expected.iter().copied().eq(set.iter().copied()) {
            return Shape::Interval;
        }
    }
    Shape::Generic
}

fn canonical_centers(set: &[usize], shape: Shape, order: usize) -> Vec<usize> {
    match shape {
        Shape::Whole => vec![0; order],
        Shape::Subgroup { step } => (0..order).map(|c| c % step).collect(),
        Shape::Interval => (0..order).collect(),
        Shape::Generic => {
            let mut first: HashMap<Vec<usize>, usize> = HashMap::new();
            (0..order)
                .map(|c| {
                    let mut pts: Vec<usize> = set.iter().map(|&u| (c + u) % order).collect();
                    pts.sort_unstable();
                    *first.entry(pts).or_insert(c)
                })
                .collect()
        }
    }
}
