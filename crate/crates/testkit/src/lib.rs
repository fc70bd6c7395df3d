//! Reference implementations used as test oracles, and seeded generators of
//! random instances.
//!
//! Nothing here depends on the library under test: every oracle works on
//! plain slices and follows the textbook definition as literally as is
//! practical, trading speed for obviousness.

use rand::distributions::Uniform;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut v = v.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// `min_π (1/n) Σ |b_i − c_π(i)|` by enumerating all permutations.
pub fn permutation_w1(b: &[f64], c: &[f64]) -> f64 {
    assert_eq!(b.len(), c.len());
    assert!(b.len() <= 8, "factorial enumeration");
    fn rec(b: &[f64], c: &[f64], used: &mut [bool], acc: f64, best: &mut f64) {
        let i = used.iter().filter(|u| **u).count();
        if i == b.len() {
            *best = best.min(acc);
            return;
        }
        for j in 0..c.len() {
            if !used[j] {
                used[j] = true;
                rec(b, c, used, acc + (b[i] - c[j]).abs(), best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    rec(b, c, &mut vec![false; c.len()], 0.0, &mut best);
    best / b.len() as f64
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Optimal transport cost between uniform empirical measures of different
/// sizes, solved exactly.
///
/// Both measures are split into `L = lcm(n_b, n_c)` atoms of mass `1/L`;
/// the transportation polytope then has permutation vertices (Birkhoff), so
/// the LP optimum is a minimum-cost assignment, found by dynamic programming
/// over subsets.
pub fn lp_w1(b: &[f64], c: &[f64]) -> f64 {
    let l = lcm(b.len(), c.len());
    assert!(l <= 16, "subset DP is exponential in the expanded size");
    let expand = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .flat_map(|&x| std::iter::repeat(x).take(l / v.len()))
            .collect()
    };
    let (bb, cc) = (expand(b), expand(c));
    let mut dp = vec![f64::INFINITY; 1 << l];
    dp[0] = 0.0;
    for mask in 0usize..(1 << l) {
        let i = mask.count_ones() as usize;
        if i == l || !dp[mask].is_finite() {
            continue;
        }
        for (j, &cj) in cc.iter().enumerate() {
            if mask & (1 << j) == 0 {
                let next = mask | (1 << j);
                let v = dp[mask] + (bb[i] - cj).abs();
                if v < dp[next] {
                    dp[next] = v;
                }
            }
        }
    }
    dp[(1 << l) - 1] / l as f64
}

fn cdf(sorted: &[f64], x: f64) -> f64 {
    sorted.iter().filter(|&&v| v <= x).count() as f64 / sorted.len() as f64
}

/// `∫₀¹ |F_b(τ) − F_c(τ)| dτ`, exact: both CDFs are constant between
/// consecutive points of `{0, 1} ∪ atoms`, so each piece is evaluated at
/// its midpoint.
pub fn cdf_gap_integral(b: &[f64], c: &[f64]) -> f64 {
    let (b, c) = (sorted(b), sorted(c));
    let mut xs: Vec<f64> = b.iter().chain(&c).copied().chain([0.0, 1.0]).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs.windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            (w[1] - w[0]) * (cdf(&b, mid) - cdf(&c, mid)).abs()
        })
        .sum()
}

/// Generalized inverse `inf{x : F(x) ≥ t}` by linear scan.
fn quantile(sorted: &[f64], t: f64) -> f64 {
    let n = sorted.len() as f64;
    for (k, &v) in sorted.iter().enumerate() {
        if (k + 1) as f64 / n >= t {
            return v;
        }
    }
    sorted[sorted.len() - 1]
}

/// `∫₀¹ |Q_b(t) − Q_c(t)| dt`, exact: both quantile functions are constant
/// between consecutive points of `{i/n_b} ∪ {j/n_c}`.
pub fn quantile_gap_integral(b: &[f64], c: &[f64]) -> f64 {
    let (b, c) = (sorted(b), sorted(c));
    let mut ts: Vec<f64> = (0..=b.len())
        .map(|i| i as f64 / b.len() as f64)
        .chain((0..=c.len()).map(|j| j as f64 / c.len() as f64))
        .collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts.windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            (w[1] - w[0]) * (quantile(&b, mid) - quantile(&c, mid)).abs()
        })
        .sum()
}

/// `Σ_τ |P(S_b > τ) − P(S_c > τ)| / |grid|` by direct counting.
pub fn grid_gap(b: &[f64], c: &[f64], grid: &[f64]) -> f64 {
    let exceed = |v: &[f64], t: f64| v.iter().filter(|&&s| s > t).count() as f64 / v.len() as f64;
    grid.iter()
        .map(|&t| (exceed(b, t) - exceed(c, t)).abs())
        .sum::<f64>()
        / grid.len() as f64
}

/// Central finite-difference gradient of `f` at `x`.
pub fn finite_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|k| {
            probe[k] = x[k] + h;
            let up = f(&probe);
            probe[k] = x[k] - h;
            let down = f(&probe);
            probe[k] = x[k];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `‖a − b‖ / max(‖a‖, ‖b‖, floor)`.
pub fn relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm(&diff) / norm(a).max(norm(b)).max(floor)
}

/// Random beliefs in `[0, 1]`. About one instance in three is drawn from a
/// coarse lattice so that ties and shared atoms across samples are common.
pub fn beliefs(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    match rng.gen_range(0..3) {
        0 => {
            let steps = rng.gen_range(1..=10u32);
            (0..n)
                .map(|_| f64::from(rng.gen_range(0..=steps)) / f64::from(steps))
                .collect()
        }
        1 => {
            let lo = rng.gen_range(0.0..0.9);
            let width = rng.gen_range(0.0..(1.0 - lo));
            (0..n).map(|_| lo + width * rng.gen::<f64>()).collect()
        }
        _ => rng.sample_iter(Uniform::new_inclusive(0.0, 1.0)).take(n).collect(),
    }
}

/// [`beliefs`] with a length drawn uniformly from `min..=max`.
pub fn sized_beliefs(rng: &mut impl Rng, min: usize, max: usize) -> Vec<f64> {
    let n = rng.gen_range(min..=max);
    beliefs(rng, n)
}

/// Random probability weights of length `k`, bounded away from zero.
pub fn weights(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|w| w / total).collect()
}

/// A three-group population with closed-form quantile functions, used to
/// check that empirical barycenter costs converge to the population value.
#[derive(Debug, Clone)]
pub struct Population {
    pub weights: [f64; 3],
    shapes: [Shape; 3],
}

#[derive(Debug, Clone, Copy)]
enum Shape {
    /// `lo + width · t^power`.
    Power { lo: f64, width: f64, power: f64 },
    /// Kumaraswamy(2, 5).
    Kumaraswamy,
}

impl Population {
    /// Three slightly different near-uniform groups. Their barycenter cost is
    /// small, so the deviation of the empirical cost is dominated by its
    /// positive small-sample bias, which decays steadily.
    pub fn near() -> Self {
        Self {
            weights: [0.5, 0.3, 0.2],
            shapes: [
                Shape::Power { lo: 0.0, width: 1.0, power: 1.0 },
                Shape::Power { lo: 0.0, width: 1.0, power: 1.02 },
                Shape::Power { lo: 0.005, width: 0.99, power: 1.0 },
            ],
        }
    }

    /// Three clearly different groups: uniform on `[0.1, 0.5]`,
    /// Kumaraswamy(2, 5) and the square of a uniform.
    pub fn separated() -> Self {
        Self {
            weights: [0.5, 0.3, 0.2],
            shapes: [
                Shape::Power { lo: 0.1, width: 0.4, power: 1.0 },
                Shape::Kumaraswamy,
                Shape::Power { lo: 0.0, width: 1.0, power: 2.0 },
            ],
        }
    }

    /// Quantile function of group `a` at level `t ∈ [0, 1]`.
    pub fn quantile(&self, a: usize, t: f64) -> f64 {
        match self.shapes[a] {
            Shape::Power { lo, width, power } => lo + width * t.powf(power),
            Shape::Kumaraswamy => (1.0 - (1.0 - t).powf(0.2)).sqrt(),
        }
    }

    fn median(&self, t: f64) -> f64 {
        let mut col: Vec<(f64, f64)> = (0..3).map(|a| (self.quantile(a, t), self.weights[a])).collect();
        col.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut acc = 0.0;
        for (v, w) in &col {
            acc += w;
            if acc >= 0.5 - 1e-12 {
                return *v;
            }
        }
        col[2].0
    }

    /// `∫₀¹ Σ_a w_a |Q_a(t) − med_w(t)| dt` by midpoint quadrature.
    pub fn barycenter_cost(&self, nodes: usize) -> f64 {
        (0..nodes)
            .map(|k| {
                let t = (k as f64 + 0.5) / nodes as f64;
                let m = self.median(t);
                (0..3)
                    .map(|a| self.weights[a] * (self.quantile(a, t) - m).abs())
                    .sum::<f64>()
            })
            .sum::<f64>()
            / nodes as f64
    }

    /// `n` draws from group `a` by inverse-transform sampling.
    pub fn sample(&self, rng: &mut impl Rng, a: usize, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.quantile(a, rng.gen::<f64>())).collect()
    }
}

pub fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
