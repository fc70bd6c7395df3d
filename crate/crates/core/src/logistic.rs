//! Logistic regression: feature assembly, beliefs, cross-entropy loss and its
//! gradient, plus the unpenalized gradient-descent fit used as a baseline and
//! as the initial point of penalized training.
//!
//! Summation is sequential in row order everywhere, so every quantity is
//! bit-reproducible for fixed inputs.

use crate::dataset::{Dataset, FeatureMode, FeatureSchema};
use crate::error::{Error, Result};

/// Beliefs are clamped to `[LOG_CLAMP, 1 − LOG_CLAMP]` inside `ln` only.
pub const LOG_CLAMP: f64 = 1e-12;

/// `w = (x, a, 1)` in full mode, `(x, 1)` in blind mode.
pub fn assemble_features(
    schema: FeatureSchema,
    x: &[f64],
    a: &[u32],
    mode: FeatureMode,
) -> Result<Vec<f64>> {
    if x.len() != schema.d {
        return Err(Error::Length {
            what: "features",
            expected: schema.d,
            got: x.len(),
        });
    }
    if a.len() != schema.k {
        return Err(Error::Length {
            what: "sensitive attributes",
            expected: schema.k,
            got: a.len(),
        });
    }
    let mut w = Vec::with_capacity(schema.width(mode));
    w.extend_from_slice(x);
    if mode == FeatureMode::Full {
        w.extend(a.iter().map(|&v| f64::from(v)));
    }
    w.push(1.0);
    Ok(w)
}

/// Logistic parameters `θ` together with the feature mode they were fit for.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    theta: Vec<f64>,
    mode: FeatureMode,
    schema: FeatureSchema,
}

impl ModelParams {
    pub fn new(theta: Vec<f64>, mode: FeatureMode, schema: FeatureSchema) -> Result<Self> {
        let expected = schema.width(mode);
        if theta.len() != expected {
            return Err(Error::Length {
                what: "parameters",
                expected,
                got: theta.len(),
            });
        }
        if let Some(&bad) = theta.iter().find(|v| !v.is_finite()) {
            return Err(Error::Config(format!("non-finite parameter {bad}")));
        }
        Ok(Self { theta, mode, schema })
    }

    pub fn zeros(mode: FeatureMode, schema: FeatureSchema) -> Self {
        Self {
            theta: vec![0.0; schema.width(mode)],
            mode,
            schema,
        }
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn mode(&self) -> FeatureMode {
        self.mode
    }

    pub fn schema(&self) -> FeatureSchema {
        self.schema
    }

    pub fn into_theta(self) -> Vec<f64> {
        self.theta
    }
}

/// Numerically stable logistic function.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `σ(θᵀw)`.
pub fn belief(p: &ModelParams, w: &[f64]) -> Result<f64> {
    if w.len() != p.theta.len() {
        return Err(Error::Length {
            what: "feature vector entries",
            expected: p.theta.len(),
            got: w.len(),
        });
    }
    Ok(sigmoid(dot(&p.theta, w)))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cross-entropy of one belief against a binary label.
pub fn cross_entropy(s: f64, y: u8) -> f64 {
    let s = s.clamp(LOG_CLAMP, 1.0 - LOG_CLAMP);
    if y == 1 {
        -s.ln()
    } else {
        -(1.0 - s).ln()
    }
}

/// Assembled feature vectors of a dataset in compressed sparse row form.
///
/// Encoded tabular data is mostly one-hot, so storing only nonzeros keeps the
/// per-step cost of training proportional to the number of active features.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    width: usize,
    mode: FeatureMode,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl Design {
    pub fn new(data: &Dataset, mode: FeatureMode) -> Self {
        let schema = data.schema();
        let width = schema.width(mode);
        let mut indptr = Vec::with_capacity(data.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for n in 0..data.len() {
            let w = data.features(n, mode);
            for (j, &v) in w.iter().enumerate() {
                if v != 0.0 {
                    indices.push(j as u32);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self {
            width,
            mode,
            indptr,
            indices,
            values,
        }
    }

    pub fn rows(&self) -> usize {
        self.indptr.len() - 1
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn mode(&self) -> FeatureMode {
        self.mode
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() == self.width {
            Ok(())
        } else {
            Err(Error::Length {
                what: "parameters",
                expected: self.width,
                got: theta.len(),
            })
        }
    }

    fn row_dot(&self, n: usize, theta: &[f64]) -> f64 {
        let (lo, hi) = (self.indptr[n], self.indptr[n + 1]);
        self.indices[lo..hi]
            .iter()
            .zip(&self.values[lo..hi])
            .map(|(&j, &v)| theta[j as usize] * v)
            .sum()
    }

    /// `θᵀw^n` for every row.
    pub fn scores(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.check_theta(theta)?;
        Ok((0..self.rows()).map(|n| self.row_dot(n, theta)).collect())
    }

    /// `σ(θᵀw^n)` for every row.
    pub fn beliefs(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.check_theta(theta)?;
        Ok((0..self.rows())
            .map(|n| sigmoid(self.row_dot(n, theta)))
            .collect())
    }

    /// `out += Σ_n coef[n] · w^n`.
    pub fn add_weighted_rows(&self, coef: &[f64], out: &mut [f64]) {
        debug_assert_eq!(coef.len(), self.rows());
        debug_assert_eq!(out.len(), self.width);
        for (n, &c) in coef.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let (lo, hi) = (self.indptr[n], self.indptr[n + 1]);
            for (&j, &v) in self.indices[lo..hi].iter().zip(&self.values[lo..hi]) {
                out[j as usize] += c * v;
            }
        }
    }
}

fn check_labels(design: &Design, labels: &[u8]) -> Result<()> {
    if design.rows() == 0 {
        return Err(Error::EmptyData);
    }
    if labels.len() != design.rows() {
        return Err(Error::Length {
            what: "labels",
            expected: design.rows(),
            got: labels.len(),
        });
    }
    Ok(())
}

/// Mean cross-entropy `J_D(θ)` from precomputed beliefs.
pub fn mean_cross_entropy(beliefs: &[f64], labels: &[u8]) -> f64 {
    let sum: f64 = beliefs
        .iter()
        .zip(labels)
        .map(|(&s, &y)| cross_entropy(s, y))
        .sum();
    sum / beliefs.len() as f64
}

/// `J_D(θ)` over a design matrix.
pub fn design_loss(design: &Design, labels: &[u8], theta: &[f64]) -> Result<f64> {
    check_labels(design, labels)?;
    Ok(mean_cross_entropy(&design.beliefs(theta)?, labels))
}

/// `∇J_D(θ) = (1/N) Σ w^n (s^n − y^n)`.
pub fn design_loss_grad(design: &Design, labels: &[u8], theta: &[f64]) -> Result<Vec<f64>> {
    check_labels(design, labels)?;
    let beliefs = design.beliefs(theta)?;
    let inv_n = 1.0 / design.rows() as f64;
    let coef: Vec<f64> = beliefs
        .iter()
        .zip(labels)
        .map(|(&s, &y)| (s - f64::from(y)) * inv_n)
        .collect();
    let mut grad = vec![0.0; design.width()];
    design.add_weighted_rows(&coef, &mut grad);
    Ok(grad)
}

fn check_model(p: &ModelParams, data: &Dataset) -> Result<()> {
    if p.schema != data.schema() {
        return Err(Error::Config(format!(
            "model schema (d={}, k={}) does not match dataset (d={}, k={})",
            p.schema.d,
            p.schema.k,
            data.schema().d,
            data.schema().k
        )));
    }
    Ok(())
}

/// Beliefs of every individual in `data`.
pub fn predict(p: &ModelParams, data: &Dataset) -> Result<Vec<f64>> {
    check_model(p, data)?;
    Design::new(data, p.mode).beliefs(&p.theta)
}

pub fn loss(p: &ModelParams, data: &Dataset) -> Result<f64> {
    check_model(p, data)?;
    design_loss(&Design::new(data, p.mode), data.labels(), &p.theta)
}

pub fn loss_grad(p: &ModelParams, data: &Dataset) -> Result<Vec<f64>> {
    check_model(p, data)?;
    design_loss_grad(&Design::new(data, p.mode), data.labels(), &p.theta)
}

/// Full-batch gradient descent settings for the unpenalized fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdOptions {
    pub step: f64,
    pub max_iter: usize,
    /// Stop once `‖∇J‖₂` falls below this.
    pub grad_tol: f64,
}

impl Default for GdOptions {
    fn default() -> Self {
        Self {
            step: 0.1,
            max_iter: 5000,
            grad_tol: 1e-6,
        }
    }
}

/// Result of [`fit_unpenalized`].
#[derive(Debug, Clone, PartialEq)]
pub struct GdFit {
    pub theta: Vec<f64>,
    pub iterations: usize,
    pub grad_norm: f64,
}

/// Plain gradient descent on `J_D` from `init`.
pub fn fit_unpenalized(
    design: &Design,
    labels: &[u8],
    init: &[f64],
    opts: GdOptions,
) -> Result<GdFit> {
    check_labels(design, labels)?;
    design.check_theta(init)?;
    let mut theta = init.to_vec();
    let mut iterations = 0;
    loop {
        let grad = design_loss_grad(design, labels, &theta)?;
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if grad_norm < opts.grad_tol || iterations >= opts.max_iter {
            return Ok(GdFit {
                theta,
                iterations,
                grad_norm,
            });
        }
        for (t, g) in theta.iter_mut().zip(&grad) {
            *t -= opts.step * g;
        }
        iterations += 1;
    }
}

/// Baseline model: [`fit_unpenalized`] from `θ = 0` with default options.
pub fn fit_baseline(data: &Dataset, mode: FeatureMode) -> Result<ModelParams> {
    let design = Design::new(data, mode);
    let fit = fit_unpenalized(
        &design,
        data.labels(),
        &vec![0.0; design.width()],
        GdOptions::default(),
    )?;
    ModelParams::new(fit.theta, mode, data.schema())
}
