//! Accuracy and demographic-disparity metrics over model beliefs.
//!
//! Predictions are `ŷ = 1[s > τ]` everywhere (strict inequality). Threshold
//! averages use a [`ThresholdGrid`]; the `*_exact` variants integrate over
//! `τ ∈ [0, 1]` piecewise and are used to cross-check the grid versions.
//!
//! SPDD sums over *ordered* pairs of distinct groups, so with two groups every
//! pair contributes twice. [`spdd_unordered`] reports the half-sum.

use std::collections::BTreeMap;

use crate::dataset::GroupId;
use crate::error::{Error, Result};
use crate::ot::{self, EmpiricalDist, ThresholdGrid};

/// Per-group beliefs with group weights `p_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedBeliefs {
    groups: BTreeMap<GroupId, Vec<f64>>,
    weights: BTreeMap<GroupId, f64>,
}

impl GroupedBeliefs {
    /// Weights default to the group frequencies `N_a / N`.
    pub fn new(groups: BTreeMap<GroupId, Vec<f64>>) -> Result<Self> {
        let total: usize = groups.values().map(Vec::len).sum();
        let weights = groups
            .iter()
            .map(|(g, v)| (*g, v.len() as f64 / total.max(1) as f64))
            .collect();
        Self::with_weights(groups, weights)
    }

    pub fn with_weights(
        groups: BTreeMap<GroupId, Vec<f64>>,
        weights: BTreeMap<GroupId, f64>,
    ) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::NoGroups);
        }
        for (g, beliefs) in &groups {
            if beliefs.is_empty() {
                return Err(Error::EmptyGroup(*g));
            }
            if let Some(&bad) = beliefs.iter().find(|s| !(0.0..=1.0).contains(*s)) {
                return Err(Error::BeliefOutOfDomain(bad));
            }
        }
        if weights.len() != groups.len() || groups.keys().any(|g| !weights.contains_key(g)) {
            return Err(Error::Config("weights must cover exactly the groups".into()));
        }
        let sum: f64 = weights.values().sum();
        if weights.values().any(|w| !w.is_finite() || *w < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Weights(sum));
        }
        Ok(Self { groups, weights })
    }

    /// Groups beliefs by their owner's group id.
    pub fn from_assignments(beliefs: &[f64], group_of: &[GroupId]) -> Result<Self> {
        if beliefs.len() != group_of.len() {
            return Err(Error::Length {
                what: "group assignments",
                expected: beliefs.len(),
                got: group_of.len(),
            });
        }
        let mut groups: BTreeMap<GroupId, Vec<f64>> = BTreeMap::new();
        for (&s, g) in beliefs.iter().zip(group_of) {
            groups.entry(*g).or_default().push(s);
        }
        Self::new(groups)
    }

    pub fn groups(&self) -> &BTreeMap<GroupId, Vec<f64>> {
        &self.groups
    }

    pub fn weights(&self) -> &BTreeMap<GroupId, f64> {
        &self.weights
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    /// All beliefs, group by group.
    pub fn pooled(&self) -> Vec<f64> {
        self.groups.values().flatten().copied().collect()
    }

    pub fn dists(&self) -> Vec<EmpiricalDist> {
        self.groups
            .values()
            .map(|v| EmpiricalDist::new(v).expect("validated on construction"))
            .collect()
    }

    pub fn weight_vec(&self) -> Vec<f64> {
        self.weights.values().copied().collect()
    }

    /// Weighted W1 barycenter of the group belief distributions.
    pub fn barycenter(&self, resolution: usize) -> Result<EmpiricalDist> {
        ot::barycenter(&self.dists(), &self.weight_vec(), resolution)
    }
}

/// Beliefs paired with binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledBeliefs {
    beliefs: Vec<f64>,
    labels: Vec<u8>,
}

impl LabeledBeliefs {
    pub fn new(beliefs: Vec<f64>, labels: Vec<u8>) -> Result<Self> {
        if beliefs.is_empty() {
            return Err(Error::EmptyData);
        }
        if beliefs.len() != labels.len() {
            return Err(Error::Length {
                what: "labels",
                expected: beliefs.len(),
                got: labels.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&y| y > 1) {
            return Err(Error::Label(bad));
        }
        if let Some(&bad) = beliefs.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(Error::BeliefOutOfDomain(bad));
        }
        Ok(Self { beliefs, labels })
    }

    pub fn beliefs(&self) -> &[f64] {
        &self.beliefs
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if (0.0..=1.0).contains(&tau) {
        Ok(())
    } else {
        Err(Error::Threshold(tau))
    }
}

fn error_rate(lb: &LabeledBeliefs, tau: f64) -> f64 {
    let wrong = lb
        .beliefs
        .iter()
        .zip(&lb.labels)
        .filter(|&(&s, &y)| u8::from(s > tau) != y)
        .count();
    wrong as f64 / lb.beliefs.len() as f64
}

/// Err-τ: fraction of misclassified individuals at threshold `tau`.
pub fn error_at(lb: &LabeledBeliefs, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    Ok(error_rate(lb, tau))
}

/// Err-Exp: error averaged over the grid.
pub fn error_expected(lb: &LabeledBeliefs, grid: &ThresholdGrid) -> f64 {
    let sum: f64 = grid.values().iter().map(|&t| error_rate(lb, t)).sum();
    sum / grid.count() as f64
}

/// `P̂(S > τ)` for every grid value, from sorted beliefs.
fn exceed_profile(sorted: &[f64], taus: &[f64]) -> Vec<f64> {
    let n = sorted.len() as f64;
    taus.iter()
        .map(|&t| (sorted.len() - sorted.partition_point(|&s| s <= t)) as f64 / n)
        .collect()
}

struct Profiles {
    groups: Vec<Vec<f64>>,
    pooled: Vec<f64>,
}

fn profiles(g: &GroupedBeliefs, taus: &[f64]) -> Profiles {
    let sorted = |v: &[f64]| {
        let mut v = v.to_vec();
        v.sort_by(f64::total_cmp);
        v
    };
    Profiles {
        groups: g
            .groups
            .values()
            .map(|v| exceed_profile(&sorted(v), taus))
            .collect(),
        pooled: exceed_profile(&sorted(&g.pooled()), taus),
    }
}

fn mean_abs_gap(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>() / p.len() as f64
}

/// DD-τ: `Σ_a |P̂(S_a > τ) − P̂(S > τ)|`.
pub fn demographic_disparity_at(g: &GroupedBeliefs, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    let p = profiles(g, &[tau]);
    Ok(p.groups.iter().map(|r| (r[0] - p.pooled[0]).abs()).sum())
}

/// SDD: grid average of the per-group gap to the pooled distribution, summed
/// over groups.
pub fn sdd(g: &GroupedBeliefs, grid: &ThresholdGrid) -> f64 {
    let p = profiles(g, grid.values());
    p.groups.iter().map(|r| mean_abs_gap(r, &p.pooled)).sum()
}

/// SPDD over ordered pairs `(a, ā)`, `a ≠ ā`.
pub fn spdd(g: &GroupedBeliefs, grid: &ThresholdGrid) -> f64 {
    2.0 * spdd_unordered(g, grid)
}

/// SPDD over unordered pairs.
pub fn spdd_unordered(g: &GroupedBeliefs, grid: &ThresholdGrid) -> f64 {
    let p = profiles(g, grid.values());
    let mut total = 0.0;
    for (i, ri) in p.groups.iter().enumerate() {
        for rj in &p.groups[i + 1..] {
            total += mean_abs_gap(ri, rj);
        }
    }
    total
}

/// SDD with the threshold average replaced by the exact integral over `[0, 1]`.
pub fn sdd_exact(g: &GroupedBeliefs) -> f64 {
    let pooled = EmpiricalDist::from_vec(g.pooled()).expect("validated beliefs");
    g.dists()
        .iter()
        .map(|d| ot::threshold_disparity(d, &pooled))
        .sum()
}

/// Ordered-pair SPDD with exact integration over `[0, 1]`.
pub fn spdd_exact(g: &GroupedBeliefs) -> f64 {
    let dists = g.dists();
    let mut total = 0.0;
    for (i, di) in dists.iter().enumerate() {
        for dj in &dists[i + 1..] {
            total += 2.0 * ot::threshold_disparity(di, dj);
        }
    }
    total
}

/// `2(|A| − 1) Σ_a W1(S_a, bary)`, the triangle-inequality bound on SPDD.
pub fn pseudo_spdd(g: &GroupedBeliefs, bary: &EmpiricalDist) -> f64 {
    let factor = 2.0 * (g.group_count() as f64 - 1.0);
    factor
        * g.dists()
            .iter()
            .map(|d| ot::wasserstein1(d, bary))
            .sum::<f64>()
}

/// Every metric reported in the benchmark tables, for one set of beliefs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSet {
    pub err_05: f64,
    pub err_exp: f64,
    pub dd_05: f64,
    pub sdd: f64,
    pub spdd: f64,
    pub spdd_unordered: f64,
    pub pseudo_spdd: f64,
}

impl MetricSet {
    /// Computes all metrics; pseudo-SPDD uses the barycenter of `g` itself at
    /// `resolution` atoms.
    pub fn compute(
        lb: &LabeledBeliefs,
        g: &GroupedBeliefs,
        grid: &ThresholdGrid,
        resolution: usize,
    ) -> Result<Self> {
        let bary = g.barycenter(resolution)?;
        let unordered = spdd_unordered(g, grid);
        Ok(Self {
            err_05: error_at(lb, 0.5)?,
            err_exp: error_expected(lb, grid),
            dd_05: demographic_disparity_at(g, 0.5)?,
            sdd: sdd(g, grid),
            spdd: 2.0 * unordered,
            spdd_unordered: unordered,
            pseudo_spdd: pseudo_spdd(g, &bary),
        })
    }
}
