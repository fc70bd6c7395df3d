//! Quantile matching of group beliefs onto a target distribution.
//!
//! With `B` bins, the `i`-th quantile of a sample is
//! `q(i) = sup{s ∈ ℝ : F̂(s) ≤ (i − 1)/B}`, which is the atom at sorted
//! position `⌊(i − 1)·N/B⌋`; `q(1)` is the minimum. The rank of a belief is
//! `q⁻¹(s) = max{i : q(i) ≤ s}`, clamped to 1 below the minimum. A belief `s`
//! of group `a` is replaced by `q_target(q⁻¹_a(s))`, a monotone map.

use std::collections::BTreeMap;

use crate::dataset::GroupId;
use crate::error::{Error, Result};
use crate::metrics::GroupedBeliefs;
use crate::ot::EmpiricalDist;

/// Number of quantile bins `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantileBins(usize);

impl QuantileBins {
    pub fn new(bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::Config("at least one quantile bin is required".into()));
        }
        Ok(Self(bins))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl Default for QuantileBins {
    fn default() -> Self {
        Self(100)
    }
}

/// Bin-level quantile function of one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileMap {
    sorted: Vec<f64>,
    bins: QuantileBins,
}

impl QuantileMap {
    pub fn new(beliefs: &[f64], bins: QuantileBins) -> Result<Self> {
        Ok(Self::from_dist(&EmpiricalDist::new(beliefs)?, bins))
    }

    pub fn from_dist(d: &EmpiricalDist, bins: QuantileBins) -> Self {
        Self {
            sorted: d.atoms().to_vec(),
            bins,
        }
    }

    pub fn bins(&self) -> QuantileBins {
        self.bins
    }

    /// `q(i)` for `i ∈ 1..=B`.
    pub fn quantile(&self, i: usize) -> Result<f64> {
        let b = self.bins.0;
        if i == 0 || i > b {
            return Err(Error::BinIndex { index: i, bins: b });
        }
        let n = self.sorted.len() as u128;
        let pos = ((i as u128 - 1) * n / b as u128) as usize;
        Ok(self.sorted[pos])
    }

    /// `q⁻¹(s)`: the largest `i` with `q(i) ≤ s`, at least 1.
    ///
    /// `q(i) ≤ s` iff `(i − 1)·N < c·B` with `c = #{atoms ≤ s}`, so the
    /// answer is `⌈c·B/N⌉` clamped to `1..=B`.
    pub fn inverse(&self, s: f64) -> usize {
        let c = self.sorted.partition_point(|&v| v <= s) as u128;
        let (b, n) = (self.bins.0 as u128, self.sorted.len() as u128);
        ((c * b).div_ceil(n) as usize).clamp(1, self.bins.0)
    }
}

/// `q(i)` of `beliefs` with `bins` bins.
pub fn group_quantile(beliefs: &[f64], i: usize, bins: QuantileBins) -> Result<f64> {
    QuantileMap::new(beliefs, bins)?.quantile(i)
}

/// `q⁻¹(s)` of `beliefs` with `bins` bins.
pub fn inverse_quantile(beliefs: &[f64], s: f64, bins: QuantileBins) -> Result<usize> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::BeliefOutOfDomain(s));
    }
    Ok(QuantileMap::new(beliefs, bins)?.inverse(s))
}

/// Distribution the groups are matched onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Target {
    /// Weighted W1 barycenter of the group distributions.
    #[default]
    Barycenter,
    /// All beliefs pooled across groups.
    Pooled,
}

impl std::fmt::Display for Target {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Target::Barycenter => "barycenter",
            Target::Pooled => "pooled",
        })
    }
}

impl std::str::FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "barycenter" => Ok(Target::Barycenter),
            "pooled" => Ok(Target::Pooled),
            other => Err(Error::Config(format!("unknown target '{other}'"))),
        }
    }
}

/// Group quantile maps fit on one set of beliefs, applicable to another.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileMatcher {
    groups: BTreeMap<GroupId, QuantileMap>,
    target: QuantileMap,
}

impl QuantileMatcher {
    /// Fits group maps on `fit` and resolves `target`; the barycenter uses
    /// `resolution` atoms and the group weights of `fit`.
    pub fn fit(
        fit: &GroupedBeliefs,
        target: Target,
        bins: QuantileBins,
        resolution: usize,
    ) -> Result<Self> {
        let target = match target {
            Target::Barycenter => fit.barycenter(resolution)?,
            Target::Pooled => EmpiricalDist::from_vec(fit.pooled())?,
        };
        Ok(Self::with_target(fit, &target, bins))
    }

    pub fn with_target(fit: &GroupedBeliefs, target: &EmpiricalDist, bins: QuantileBins) -> Self {
        let groups = fit
            .groups()
            .keys()
            .copied()
            .zip(fit.dists().iter().map(|d| QuantileMap::from_dist(d, bins)))
            .collect();
        Self {
            groups,
            target: QuantileMap::from_dist(target, bins),
        }
    }

    pub fn target(&self) -> &QuantileMap {
        &self.target
    }

    /// Adjusted belief for one member of `group`.
    pub fn map(&self, group: GroupId, s: f64) -> Result<f64> {
        let map = self.groups.get(&group).ok_or(Error::EmptyGroup(group))?;
        self.target.quantile(map.inverse(s))
    }

    /// Adjusts every belief of `g`, keeping group weights.
    pub fn apply(&self, g: &GroupedBeliefs) -> Result<GroupedBeliefs> {
        let groups = g
            .groups()
            .iter()
            .map(|(id, beliefs)| {
                let mapped = beliefs
                    .iter()
                    .map(|&s| self.map(*id, s))
                    .collect::<Result<Vec<_>>>()?;
                Ok((*id, mapped))
            })
            .collect::<Result<BTreeMap<_, _>>>()?;
        GroupedBeliefs::with_weights(groups, g.weights().clone())
    }
}

/// Replaces each belief by `q_target(q⁻¹_a(s))`, fitting the group maps on `g`
/// itself.
pub fn quantile_match(
    g: &GroupedBeliefs,
    target: &EmpiricalDist,
    bins: QuantileBins,
) -> Result<GroupedBeliefs> {
    QuantileMatcher::with_target(g, target, bins).apply(g)
}
