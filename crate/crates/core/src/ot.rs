//! Exact optimal transport on the line between uniform-mass empirical
//! distributions.
//!
//! Every distribution here lives on `[0, 1]` and gives each of its `n` atoms
//! mass `1/n`. In one dimension the optimal coupling between two such
//! distributions is the monotone (north-west corner) plan over the sorted
//! atoms, so distances, couplings, and barycenters are all computed exactly
//! without a linear-program solver.
//!
//! Four independent routes to the Wasserstein-1 distance are exposed:
//!
//! ```text
//! wasserstein1               Σ T_ij |b_i − c_j|          (monotone coupling)
//! wasserstein1_quantile_form ∫₀¹ |Q_b(t) − Q_c(t)| dt    (quantile functions)
//! threshold_disparity        ∫₀¹ |F_b(τ) − F_c(τ)| dτ    (CDFs)
//! expected_flip_cost         E_T λ((b ∧ c, b ∨ c))       (prediction flips)
//! ```
//!
//! All integrals are evaluated piecewise on exact breakpoints, never on a grid.

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Empirical distribution with sorted atoms in `[0, 1]`, each of mass `1/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDist {
    atoms: Vec<f64>,
}

impl EmpiricalDist {
    /// Builds a distribution from unsorted samples. Duplicates are kept.
    pub fn new(samples: &[f64]) -> Result<Self> {
        Self::from_vec(samples.to_vec())
    }

    pub fn from_vec(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        if let Some(&bad) = samples.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::BeliefOutOfDomain(bad));
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self { atoms: samples })
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    /// Always false; a distribution holds at least one atom.
    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.atoms[0]
    }

    pub fn max(&self) -> f64 {
        self.atoms[self.atoms.len() - 1]
    }

    /// Number of atoms `≤ x`.
    pub fn count_le(&self, x: f64) -> usize {
        self.atoms.partition_point(|&a| a <= x)
    }

    /// Right-continuous CDF: `#{atoms ≤ x} / n`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.count_le(x) as f64 / self.len() as f64
    }

    /// Index of the generalized inverse CDF at level `t`: the smallest `k`
    /// with `(k + 1) / n ≥ t`.
    fn quantile_index(&self, t: f64) -> usize {
        let n = self.len();
        partition_point_range(n, |k| ((k + 1) as f64 / n as f64) < t)
    }

    /// Generalized inverse CDF: smallest atom `v` with `cdf(v) ≥ t`.
    pub fn quantile(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::QuantileLevel(t));
        }
        Ok(self.atoms[self.quantile_index(t).min(self.len() - 1)])
    }
}

/// `partition_point` over the index range `0..n` without materializing it.
fn partition_point_range(n: usize, pred: impl Fn(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (0usize, n);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

pub fn make_dist(samples: &[f64]) -> Result<EmpiricalDist> {
    EmpiricalDist::new(samples)
}

pub fn cdf_at(d: &EmpiricalDist, x: f64) -> f64 {
    d.cdf(x)
}

pub fn quantile_at(d: &EmpiricalDist, t: f64) -> Result<f64> {
    d.quantile(t)
}

/// Iterator over the nonzero entries of the monotone coupling between `n_rows`
/// and `n_cols` sorted uniform atoms.
///
/// Masses are tracked in integer units of `1 / (n_rows · n_cols)`: each row
/// carries `n_cols` units and each column `n_rows`, so the scan is exact and
/// only the final division rounds.
#[derive(Debug, Clone)]
pub struct MonotonePlan {
    n_rows: usize,
    n_cols: usize,
    row: usize,
    col: usize,
    row_left: u64,
    col_left: u64,
    scale: f64,
}

impl MonotonePlan {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            row: 0,
            col: 0,
            row_left: n_cols as u64,
            col_left: n_rows as u64,
            scale: (n_rows as f64) * (n_cols as f64),
        }
    }
}

impl Iterator for MonotonePlan {
    type Item = (usize, usize, f64);

    fn next(&mut self) -> Option<Self::Item> {
        if self.row >= self.n_rows || self.col >= self.n_cols {
            return None;
        }
        let units = self.row_left.min(self.col_left);
        let item = (self.row, self.col, units as f64 / self.scale);
        self.row_left -= units;
        self.col_left -= units;
        if self.row_left == 0 {
            self.row += 1;
            self.row_left = self.n_cols as u64;
        }
        if self.col_left == 0 {
            self.col += 1;
            self.col_left = self.n_rows as u64;
        }
        Some(item)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let remaining = (self.n_rows - self.row.min(self.n_rows))
            + (self.n_cols - self.col.min(self.n_cols));
        (0, Some(remaining.saturating_sub(1)))
    }
}

/// Sparse transport plan between two empirical distributions. Row and column
/// indices refer to positions in the sorted atom lists.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    pub entries: Vec<(usize, usize, f64)>,
    pub n_rows: usize,
    pub n_cols: usize,
}

impl Coupling {
    pub fn row_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n_rows];
        for &(i, _, m) in &self.entries {
            sums[i] += m;
        }
        sums
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n_cols];
        for &(_, j, m) in &self.entries {
            sums[j] += m;
        }
        sums
    }

    /// `⟨T, C⟩` with `C_ij = |b_i − c_j|`.
    pub fn cost(&self, b: &EmpiricalDist, c: &EmpiricalDist) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, m)| m * (b.atoms[i] - c.atoms[j]).abs())
            .sum()
    }
}

pub fn optimal_coupling(b: &EmpiricalDist, c: &EmpiricalDist) -> Coupling {
    Coupling {
        entries: MonotonePlan::new(b.len(), c.len()).collect(),
        n_rows: b.len(),
        n_cols: c.len(),
    }
}

pub fn wasserstein1(b: &EmpiricalDist, c: &EmpiricalDist) -> f64 {
    MonotonePlan::new(b.len(), c.len())
        .map(|(i, j, m)| m * (b.atoms[i] - c.atoms[j]).abs())
        .sum()
}

/// `∫₀¹ |Q_b(t) − Q_c(t)| dt`, summed over the merged level breakpoints
/// `{i/n_b} ∪ {j/n_c}` with both quantile functions evaluated at each piece's
/// midpoint.
pub fn wasserstein1_quantile_form(b: &EmpiricalDist, c: &EmpiricalDist) -> f64 {
    let (nb, nc) = (b.len() as u64, c.len() as u64);
    let total = nb * nc;
    // Breakpoint k/n_b sits at k·n_c units, l/n_c at l·n_b units.
    let mut breaks: Vec<u64> = (0..=nb).map(|k| k * nc).chain((0..=nc).map(|l| l * nb)).collect();
    breaks.sort_unstable();
    breaks.dedup();
    let scale = total as f64;
    breaks
        .windows(2)
        .map(|w| {
            let width = (w[1] - w[0]) as f64 / scale;
            let mid = (w[0] + w[1]) as f64 / (2.0 * scale);
            let qb = b.atoms[b.quantile_index(mid)];
            let qc = c.atoms[c.quantile_index(mid)];
            width * (qb - qc).abs()
        })
        .sum()
}

/// `∫₀¹ |F_b(τ) − F_c(τ)| dτ`, exact on the merged atom breakpoints.
pub fn threshold_disparity(b: &EmpiricalDist, c: &EmpiricalDist) -> f64 {
    let (xb, xc) = (b.atoms(), c.atoms());
    let (nb, nc) = (xb.len() as f64, xc.len() as f64);
    let (mut ib, mut ic) = (0usize, 0usize);
    let mut x = xb[0].min(xc[0]);
    let mut total = 0.0;
    loop {
        while ib < xb.len() && xb[ib] <= x {
            ib += 1;
        }
        while ic < xc.len() && xc[ic] <= x {
            ic += 1;
        }
        let next = match (xb.get(ib), xc.get(ic)) {
            (Some(&u), Some(&v)) => u.min(v),
            (Some(&u), None) => u,
            (None, Some(&v)) => v,
            (None, None) => break,
        };
        total += (ib as f64 / nb - ic as f64 / nc).abs() * (next - x);
        x = next;
    }
    total
}

/// Expected number of class-prediction changes, over `τ ~ U[0, 1]`, when the
/// mass of `b` is carried to `c` along the optimal coupling: each entry flips
/// the prediction exactly when `τ` falls strictly between its two endpoints.
pub fn expected_flip_cost(b: &EmpiricalDist, c: &EmpiricalDist) -> f64 {
    optimal_coupling(b, c)
        .entries
        .iter()
        .map(|&(i, j, m)| {
            let (lo, hi) = match b.atoms[i].partial_cmp(&c.atoms[j]) {
                Some(Ordering::Greater) => (c.atoms[j], b.atoms[i]),
                _ => (b.atoms[i], c.atoms[j]),
            };
            m * (hi.min(1.0) - lo.max(0.0)).max(0.0)
        })
        .sum()
}

fn check_barycenter_inputs(dists: &[EmpiricalDist], weights: &[f64]) -> Result<()> {
    if dists.is_empty() {
        return Err(Error::NoGroups);
    }
    if dists.len() != weights.len() {
        return Err(Error::Length {
            what: "weights",
            expected: dists.len(),
            got: weights.len(),
        });
    }
    let sum: f64 = weights.iter().sum();
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::Weights(sum));
    }
    Ok(())
}

/// Weighted W1 barycenter with `resolution` uniform atoms.
///
/// The barycenter's quantile function is the pointwise weighted median of the
/// input quantile functions, so atom `j` is the lower weighted median of
/// `{Q_a(t_j)}` at `t_j = (j − ½) / resolution`. When `resolution` is a common
/// multiple of every input size the result is an exact minimizer of
/// [`barycenter_cost`] over all distributions on `[0, 1]`.
pub fn barycenter(
    dists: &[EmpiricalDist],
    weights: &[f64],
    resolution: usize,
) -> Result<EmpiricalDist> {
    check_barycenter_inputs(dists, weights)?;
    if resolution == 0 {
        return Err(Error::Config("barycenter resolution must be positive".into()));
    }
    let total: f64 = weights.iter().sum();
    let half = 0.5 * total - 1e-12;
    let mut column: Vec<(f64, f64)> = Vec::with_capacity(dists.len());
    let atoms = (0..resolution)
        .map(|j| {
            let t = (j as f64 + 0.5) / resolution as f64;
            column.clear();
            column.extend(
                dists
                    .iter()
                    .zip(weights)
                    .map(|(d, &w)| (d.atoms[d.quantile_index(t)], w)),
            );
            column.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut acc = 0.0;
            for &(v, w) in &column {
                acc += w;
                if acc >= half {
                    return v;
                }
            }
            column[column.len() - 1].0
        })
        .collect();
    Ok(EmpiricalDist { atoms })
}

/// `Σ_a w_a · W1(dist_a, target)`.
pub fn barycenter_cost(
    dists: &[EmpiricalDist],
    weights: &[f64],
    target: &EmpiricalDist,
) -> Result<f64> {
    check_barycenter_inputs(dists, weights)?;
    Ok(dists
        .iter()
        .zip(weights)
        .map(|(d, &w)| w * wasserstein1(d, target))
        .sum())
}

/// Least common multiple of the input sizes, if it does not exceed `cap`.
/// Passing it as the barycenter resolution makes the barycenter exact.
pub fn common_resolution(dists: &[EmpiricalDist], cap: usize) -> Option<usize> {
    fn gcd(mut a: usize, mut b: usize) -> usize {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    }
    dists.iter().try_fold(1usize, |acc, d| {
        let l = acc / gcd(acc, d.len()) * d.len();
        (l <= cap).then_some(l)
    })
}

/// Thresholds used to average disparity metrics over `τ ∈ (0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdGrid {
    values: Vec<f64>,
}

impl ThresholdGrid {
    /// `count` midpoints `τ_k = (k − ½) / count`.
    pub fn midpoints(count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::Config("threshold grid needs at least one value".into()));
        }
        Ok(Self {
            values: (1..=count)
                .map(|k| (k as f64 - 0.5) / count as f64)
                .collect(),
        })
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Config("threshold grid needs at least one value".into()));
        }
        if values.iter().any(|v| !(*v > 0.0 && *v < 1.0)) {
            return Err(Error::Config("thresholds must lie in (0, 1)".into()));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("thresholds must be strictly increasing".into()));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn count(&self) -> usize {
        self.values.len()
    }
}

impl Default for ThresholdGrid {
    fn default() -> Self {
        Self::midpoints(100).expect("nonzero count")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(v: &[f64]) -> EmpiricalDist {
        make_dist(v).unwrap()
    }

    #[test]
    fn make_dist_sorts_and_keeps_ties() {
        assert_eq!(d(&[0.9, 0.1]).atoms(), &[0.1, 0.9]);
        assert_eq!(d(&[0.5]).atoms(), &[0.5]);
        assert_eq!(d(&[0.3, 0.3, 0.1]).atoms(), &[0.1, 0.3, 0.3]);
    }

    #[test]
    fn make_dist_rejects_bad_input() {
        assert_eq!(make_dist(&[]), Err(Error::EmptyDistribution));
        assert_eq!(make_dist(&[0.2, 1.5]), Err(Error::BeliefOutOfDomain(1.5)));
        assert!(matches!(make_dist(&[f64::NAN]), Err(Error::BeliefOutOfDomain(_))));
    }

    #[test]
    fn cdf_is_right_continuous() {
        let x = d(&[0.1, 0.9]);
        assert_eq!(cdf_at(&x, 0.5), 0.5);
        assert_eq!(cdf_at(&x, 0.05), 0.0);
        assert_eq!(cdf_at(&x, 0.9), 1.0);
    }

    #[test]
    fn quantile_is_generalized_inverse() {
        let x = d(&[0.1, 0.9]);
        assert_eq!(quantile_at(&x, 0.5).unwrap(), 0.1);
        assert_eq!(quantile_at(&x, 0.51).unwrap(), 0.9);
        assert_eq!(quantile_at(&d(&[0.2, 0.4, 0.6]), 1.0).unwrap(), 0.6);
        assert!(quantile_at(&x, 0.0).is_err());
        assert!(quantile_at(&x, 1.01).is_err());
    }

    #[test]
    fn coupling_equal_sizes_is_scaled_identity() {
        // Rescaled version of the sorted equal-size case.
        let c = optimal_coupling(&d(&[0.1, 0.2]), &d(&[0.3, 0.4]));
        assert_eq!(c.entries, vec![(0, 0, 0.5), (1, 1, 0.5)]);
    }

    #[test]
    fn coupling_examples() {
        let c = optimal_coupling(&d(&[0.5]), &d(&[0.2, 0.8]));
        assert_eq!(c.entries, vec![(0, 0, 0.5), (0, 1, 0.5)]);

        let c = optimal_coupling(&d(&[0.0, 1.0]), &d(&[0.1, 0.5, 0.9]));
        assert_eq!(
            c.entries,
            vec![(0, 0, 1.0 / 3.0), (0, 1, 1.0 / 6.0), (1, 1, 1.0 / 6.0), (1, 2, 1.0 / 3.0)]
        );
    }

    #[test]
    fn distance_examples() {
        assert_eq!(wasserstein1(&d(&[0.2, 0.2]), &d(&[0.2, 0.2])), 0.0);
        assert!((wasserstein1(&d(&[0.0, 1.0]), &d(&[0.5, 0.5])) - 0.5).abs() < 1e-15);
        let w = wasserstein1(&d(&[0.1, 0.3, 0.5]), &d(&[0.2, 0.4, 0.6]));
        assert!((w - 0.1).abs() < 1e-15);

        let q = wasserstein1_quantile_form(&d(&[0.0, 1.0]), &d(&[0.5, 0.5]));
        assert!((q - 0.5).abs() < 1e-15);
        assert_eq!(wasserstein1_quantile_form(&d(&[0.0]), &d(&[1.0])), 1.0);
        assert_eq!(wasserstein1_quantile_form(&d(&[0.3, 0.7]), &d(&[0.7, 0.3])), 0.0);
    }

    #[test]
    fn threshold_disparity_examples() {
        assert_eq!(threshold_disparity(&d(&[0.3, 0.6]), &d(&[0.6, 0.3])), 0.0);
        assert!((threshold_disparity(&d(&[0.2]), &d(&[0.8])) - 0.6).abs() < 1e-15);
        assert!((threshold_disparity(&d(&[0.0, 1.0]), &d(&[0.5, 0.5])) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn flip_cost_examples() {
        assert_eq!(expected_flip_cost(&d(&[0.4]), &d(&[0.4])), 0.0);
        assert!((expected_flip_cost(&d(&[0.2]), &d(&[0.8])) - 0.6).abs() < 1e-15);
        let f = expected_flip_cost(&d(&[0.0, 1.0]), &d(&[0.1, 0.5, 0.9]));
        assert!((f - 0.7 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn barycenter_examples() {
        let single = d(&[0.1, 0.4, 0.45, 0.9]);
        let b = barycenter(std::slice::from_ref(&single), &[1.0], 8).unwrap();
        assert!(wasserstein1(&b, &single) <= (single.max() - single.min()) / 8.0);

        let three = [d(&[0.0]), d(&[0.5]), d(&[1.0])];
        let b = barycenter(&three, &[1.0 / 3.0; 3], 4).unwrap();
        assert_eq!(b.atoms(), &[0.5; 4]);

        let two = [d(&[0.0]), d(&[1.0])];
        let b = barycenter(&two, &[0.9, 0.1], 4).unwrap();
        assert_eq!(b.atoms(), &[0.0; 4]);
    }

    #[test]
    fn barycenter_rejects_bad_weights() {
        let two = [d(&[0.0]), d(&[1.0])];
        assert!(matches!(barycenter(&two, &[0.5, 0.6], 4), Err(Error::Weights(_))));
        assert!(matches!(barycenter(&two, &[1.5, -0.5], 4), Err(Error::Weights(_))));
        assert!(matches!(barycenter(&two, &[1.0], 4), Err(Error::Length { .. })));
        assert_eq!(barycenter(&[], &[], 4), Err(Error::NoGroups));
    }

    #[test]
    fn barycenter_cost_examples() {
        let one = d(&[0.2, 0.7]);
        assert_eq!(barycenter_cost(std::slice::from_ref(&one), &[1.0], &one).unwrap(), 0.0);
        let two = [d(&[0.0]), d(&[1.0])];
        assert_eq!(barycenter_cost(&two, &[0.5, 0.5], &d(&[0.5])).unwrap(), 0.5);
        let c = barycenter_cost(&two, &[0.9, 0.1], &d(&[0.0])).unwrap();
        assert!((c - 0.1).abs() < 1e-15);
    }

    #[test]
    fn common_resolution_is_lcm() {
        let ds = [d(&[0.1; 4]), d(&[0.2; 6]), d(&[0.3])];
        assert_eq!(common_resolution(&ds, 100), Some(12));
        assert_eq!(common_resolution(&ds, 10), None);
    }

    #[test]
    fn grid_midpoints() {
        let g = ThresholdGrid::midpoints(4).unwrap();
        assert_eq!(g.values(), &[0.125, 0.375, 0.625, 0.875]);
        assert!(ThresholdGrid::from_values(vec![0.5, 0.4]).is_err());
        assert!(ThresholdGrid::from_values(vec![0.0, 0.4]).is_err());
        assert_eq!(ThresholdGrid::default().count(), 100);
    }
}
