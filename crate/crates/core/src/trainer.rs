//! Gradient descent on the Wasserstein-1 penalized logistic objective
//!
//! `α·J_D(θ) + (1 − α)·β·Σ_a W1(p̂_{S_a}, bary)`.
//!
//! The penalty subgradient visits only the nonzero entries of each group's
//! monotone coupling to the barycenter, so one step costs
//! `O(nnz(W) + Σ_a (N_a + N̄))` plus the per-group re-sort of beliefs.

use std::collections::BTreeMap;

use crate::dataset::{Dataset, FeatureMode, GroupId};
use crate::error::{Error, Result};
use crate::logistic::{mean_cross_entropy, Design, ModelParams};
use crate::metrics::{self, GroupedBeliefs, LabeledBeliefs};
use crate::ot::{self, EmpiricalDist, MonotonePlan, ThresholdGrid};

/// Objective magnitude treated as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    /// Number of gradient steps `M`.
    pub steps: usize,
    /// Barycenter refresh period `K`; `None` computes it once, at step 0.
    pub refresh: Option<usize>,
    /// Barycenter atom count `N̄`.
    pub resolution: usize,
    pub mode: FeatureMode,
    pub seed: u64,
    pub log_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            alpha: 0.0,
            beta: 1.0,
            eta: 1e-2,
            steps: 80_000,
            refresh: None,
            resolution: 100,
            mode: FeatureMode::Full,
            seed: 0,
            log_every: 100,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad("alpha must lie in [0, 1]");
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return bad("beta must be finite and nonnegative");
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return bad("eta must be finite and positive");
        }
        if self.refresh == Some(0) {
            return bad("barycenter refresh period must be positive");
        }
        if self.resolution == 0 {
            return bad("barycenter resolution must be positive");
        }
        if self.log_every == 0 {
            return bad("log_every must be positive");
        }
        Ok(())
    }

    /// `K`, with "once" expressed as `M + 1`.
    pub fn refresh_period(&self) -> usize {
        self.refresh.unwrap_or(self.steps + 1)
    }

    /// Weight `(1 − α)·β` of the penalty term.
    pub fn penalty_weight(&self) -> f64 {
        (1.0 - self.alpha) * self.beta
    }
}

/// Metrics logged during training.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub step: usize,
    pub err_05: f64,
    pub err_exp: f64,
    pub dd_05: f64,
    pub sdd: f64,
    /// Ordered-pair SPDD.
    pub spdd: f64,
    pub spdd_unordered: f64,
    /// `2(|A| − 1) Σ_a W1(S_a, bary)` against the training barycenter.
    pub pseudo_spdd: f64,
    /// Objective on the logged split.
    pub objective: f64,
    /// Objective on the training split.
    pub train_objective: f64,
    /// `W1(S_a, bary)` on the logged split, per group.
    pub group_w1: Vec<(GroupId, f64)>,
}

/// Training data prepared for repeated objective and gradient evaluation.
#[derive(Debug, Clone)]
pub struct PenalizedProblem {
    design: Design,
    labels: Vec<u8>,
    groups: Vec<GroupId>,
    members: Vec<Vec<usize>>,
    weights: Vec<f64>,
    alpha: f64,
    penalty: f64,
}

/// Objective value and gradient at one parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub objective: f64,
    pub group_w1: Vec<f64>,
    pub grad: Vec<f64>,
    /// Coupling entries visited by the penalty gradient.
    pub terms: usize,
}

/// Per-group orderings of members by belief, carried across steps so each
/// re-sort starts from a nearly sorted permutation.
#[derive(Debug, Clone)]
pub struct GroupOrder {
    /// Row indices of each group, ascending by belief at the last step.
    rows: Vec<Vec<usize>>,
    scratch: Vec<(f64, usize)>,
}

impl PenalizedProblem {
    pub fn new(data: &Dataset, cfg: &TrainConfig) -> Result<Self> {
        cfg.validate()?;
        let members_map = data.members();
        let weights_map = data.group_weights();
        Ok(Self {
            design: Design::new(data, cfg.mode),
            labels: data.labels().to_vec(),
            groups: members_map.keys().copied().collect(),
            members: members_map.into_values().collect(),
            weights: weights_map.into_values().collect(),
            alpha: cfg.alpha,
            penalty: cfg.penalty_weight(),
        })
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    pub fn groups(&self) -> &[GroupId] {
        &self.groups
    }

    /// Train-split frequencies `N_a / N`, in group order.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn initial_order(&self) -> GroupOrder {
        GroupOrder {
            rows: self.members.clone(),
            scratch: Vec::new(),
        }
    }

    /// Per-group belief distributions under `theta`.
    pub fn group_dists(&self, theta: &[f64]) -> Result<Vec<EmpiricalDist>> {
        let s = self.design.beliefs(theta)?;
        self.members
            .iter()
            .map(|m| EmpiricalDist::from_vec(m.iter().map(|&n| s[n]).collect()))
            .collect()
    }

    /// Weighted barycenter of the current group belief distributions.
    pub fn barycenter(&self, theta: &[f64], resolution: usize) -> Result<EmpiricalDist> {
        ot::barycenter(&self.group_dists(theta)?, &self.weights, resolution)
    }

    /// Objective and subgradient, with `sign(0) = 0` at coupling kinks.
    pub fn evaluate(
        &self,
        theta: &[f64],
        bary: &EmpiricalDist,
        order: &mut GroupOrder,
    ) -> Result<Evaluation> {
        let s = self.design.beliefs(theta)?;
        let n = s.len();
        let mut coef = vec![0.0; n];
        let mut objective = 0.0;
        if self.alpha > 0.0 {
            let inv_n = 1.0 / n as f64;
            for ((c, &si), &y) in coef.iter_mut().zip(&s).zip(&self.labels) {
                *c = self.alpha * (si - f64::from(y)) * inv_n;
            }
            objective += self.alpha * mean_cross_entropy(&s, &self.labels);
        }
        let b = bary.atoms();
        let mut group_w1 = Vec::with_capacity(self.members.len());
        let mut terms = 0;
        let GroupOrder { rows, scratch } = order;
        for rows in rows.iter_mut() {
            // Stable sort from the previous order, so ties keep their
            // relative order across steps.
            scratch.clear();
            scratch.extend(rows.iter().map(|&r| (s[r], r)));
            scratch.sort_by(|a, b| a.0.total_cmp(&b.0));
            for (r, &(_, idx)) in rows.iter_mut().zip(scratch.iter()) {
                *r = idx;
            }
            let mut w1 = 0.0;
            for (i, j, mass) in MonotonePlan::new(rows.len(), b.len()) {
                let (si, idx) = scratch[i];
                let gap = si - b[j];
                w1 += mass * gap.abs();
                terms += 1;
                if self.penalty != 0.0 && gap != 0.0 {
                    coef[idx] += self.penalty * mass * gap.signum() * si * (1.0 - si);
                }
            }
            group_w1.push(w1);
        }
        objective += self.penalty * group_w1.iter().sum::<f64>();
        let mut grad = vec![0.0; self.design.width()];
        self.design.add_weighted_rows(&coef, &mut grad);
        Ok(Evaluation {
            objective,
            group_w1,
            grad,
            terms,
        })
    }
}

fn check_params(p: &ModelParams, data: &Dataset, cfg: &TrainConfig) -> Result<()> {
    if p.mode() != cfg.mode {
        return Err(Error::ModeMismatch {
            model: p.mode(),
            config: cfg.mode,
        });
    }
    if p.schema() != data.schema() {
        return Err(Error::Config("model schema does not match dataset".into()));
    }
    Ok(())
}

fn evaluate_once(
    p: &ModelParams,
    data: &Dataset,
    cfg: &TrainConfig,
    bary: &EmpiricalDist,
) -> Result<Evaluation> {
    check_params(p, data, cfg)?;
    let problem = PenalizedProblem::new(data, cfg)?;
    let mut order = problem.initial_order();
    problem.evaluate(p.theta(), bary, &mut order)
}

/// `α·J_D(θ) + (1 − α)·β·Σ_a W1(p̂_{S_a}, bary)`.
pub fn penalized_objective(
    p: &ModelParams,
    data: &Dataset,
    cfg: &TrainConfig,
    bary: &EmpiricalDist,
) -> Result<f64> {
    Ok(evaluate_once(p, data, cfg, bary)?.objective)
}

/// Subgradient of [`penalized_objective`] with the barycenter held fixed.
pub fn penalized_grad(
    p: &ModelParams,
    data: &Dataset,
    cfg: &TrainConfig,
    bary: &EmpiricalDist,
) -> Result<Vec<f64>> {
    Ok(evaluate_once(p, data, cfg, bary)?.grad)
}

/// Final parameters, the trajectory, and the last barycenter used.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub params: ModelParams,
    pub trajectory: Vec<TrajectoryPoint>,
    pub barycenter: EmpiricalDist,
}

/// [`train_with_holdout`] logging on the training data itself.
pub fn train(data: &Dataset, cfg: &TrainConfig, init: &ModelParams) -> Result<TrainOutcome> {
    train_with_holdout(data, data, cfg, init)
}

/// Runs `M` steps `θ ← θ − η·∇`, refreshing the barycenter every `K` steps
/// and logging metrics on `holdout` at step 0, every `log_every` steps and
/// at step `M`.
pub fn train_with_holdout(
    data: &Dataset,
    holdout: &Dataset,
    cfg: &TrainConfig,
    init: &ModelParams,
) -> Result<TrainOutcome> {
    check_params(init, data, cfg)?;
    check_params(init, holdout, cfg)?;
    let problem = PenalizedProblem::new(data, cfg)?;
    let logger = Logger::new(holdout, cfg)?;
    let mut order = problem.initial_order();
    let mut theta = init.theta().to_vec();
    let mut bary = problem.barycenter(&theta, cfg.resolution)?;
    let period = cfg.refresh_period();
    let mut trajectory = Vec::with_capacity(cfg.steps / cfg.log_every + 2);

    let mut eval = problem.evaluate(&theta, &bary, &mut order)?;
    trajectory.push(logger.point(0, &theta, &bary, eval.objective)?);
    for step in 1..=cfg.steps {
        check_divergence(step - 1, eval.objective)?;
        for (t, g) in theta.iter_mut().zip(&eval.grad) {
            *t -= cfg.eta * g;
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::Diverged {
                step,
                objective: f64::NAN,
            });
        }
        if step % period == 0 {
            bary = problem.barycenter(&theta, cfg.resolution)?;
        }
        eval = problem.evaluate(&theta, &bary, &mut order)?;
        if step % cfg.log_every == 0 || step == cfg.steps {
            trajectory.push(logger.point(step, &theta, &bary, eval.objective)?);
        }
    }
    check_divergence(cfg.steps, eval.objective)?;
    Ok(TrainOutcome {
        params: ModelParams::new(theta, cfg.mode, data.schema())?,
        trajectory,
        barycenter: bary,
    })
}

fn check_divergence(step: usize, objective: f64) -> Result<()> {
    if objective.is_finite() && objective <= DIVERGENCE_LIMIT {
        Ok(())
    } else {
        Err(Error::Diverged { step, objective })
    }
}

struct Logger {
    problem: PenalizedProblem,
    labels: Vec<u8>,
    group_of: Vec<GroupId>,
    groups: Vec<GroupId>,
    grid: ThresholdGrid,
}

impl Logger {
    fn new(holdout: &Dataset, cfg: &TrainConfig) -> Result<Self> {
        Ok(Self {
            problem: PenalizedProblem::new(holdout, cfg)?,
            labels: holdout.labels().to_vec(),
            group_of: holdout.group_of().to_vec(),
            groups: holdout.groups(),
            grid: ThresholdGrid::default(),
        })
    }

    fn point(
        &self,
        step: usize,
        theta: &[f64],
        bary: &EmpiricalDist,
        train_objective: f64,
    ) -> Result<TrajectoryPoint> {
        let mut order = self.problem.initial_order();
        let eval = self.problem.evaluate(theta, bary, &mut order)?;
        let beliefs = self.problem.design().beliefs(theta)?;
        let grouped = GroupedBeliefs::from_assignments(&beliefs, &self.group_of)?;
        let labeled = LabeledBeliefs::new(beliefs, self.labels.clone())?;
        let unordered = metrics::spdd_unordered(&grouped, &self.grid);
        let factor = 2.0 * (self.groups.len() as f64 - 1.0);
        Ok(TrajectoryPoint {
            step,
            err_05: metrics::error_at(&labeled, 0.5)?,
            err_exp: metrics::error_expected(&labeled, &self.grid),
            dd_05: metrics::demographic_disparity_at(&grouped, 0.5)?,
            sdd: metrics::sdd(&grouped, &self.grid),
            spdd: 2.0 * unordered,
            spdd_unordered: unordered,
            pseudo_spdd: factor * eval.group_w1.iter().sum::<f64>(),
            objective: eval.objective,
            train_objective,
            group_w1: self.groups.iter().copied().zip(eval.group_w1).collect(),
        })
    }
}

/// Per-group `W1(S_a, bary)` for a model on a dataset.
pub fn group_w1(
    p: &ModelParams,
    data: &Dataset,
    bary: &EmpiricalDist,
) -> Result<BTreeMap<GroupId, f64>> {
    let s = crate::logistic::predict(p, data)?;
    let grouped = GroupedBeliefs::from_assignments(&s, data.group_of())?;
    Ok(grouped
        .groups()
        .keys()
        .copied()
        .zip(grouped.dists().iter().map(|d| ot::wasserstein1(d, bary)))
        .collect())
}
