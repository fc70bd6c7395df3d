//! Encoded datasets: features `x`, sensitive attributes `a`, binary labels,
//! and the demographic group of every individual.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Identifier of a demographic group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupId(pub u32);

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Which inputs the logistic model sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureMode {
    /// `w = (x, a, 1)`.
    Full,
    /// `w = (x, 1)`; sensitive attributes are only used by the penalty.
    Blind,
}

impl fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureMode::Full => "full",
            FeatureMode::Blind => "blind",
        })
    }
}

impl std::str::FromStr for FeatureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "full" => Ok(FeatureMode::Full),
            "blind" => Ok(FeatureMode::Blind),
            other => Err(Error::Config(format!("unknown feature mode '{other}'"))),
        }
    }
}

/// Feature dimension `d` and sensitive-attribute count `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureSchema {
    pub d: usize,
    pub k: usize,
}

impl FeatureSchema {
    pub fn new(d: usize, k: usize) -> Self {
        Self { d, k }
    }

    /// Length of the assembled feature vector (and of `θ`).
    pub fn width(&self, mode: FeatureMode) -> usize {
        match mode {
            FeatureMode::Full => self.d + self.k + 1,
            FeatureMode::Blind => self.d + 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: FeatureSchema,
    /// Row-major `N × d`.
    x: Vec<f64>,
    /// Row-major `N × k`.
    a: Vec<u32>,
    y: Vec<u8>,
    group_of: Vec<GroupId>,
    group_sizes: BTreeMap<GroupId, usize>,
    feature_names: Vec<String>,
    attribute_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        schema: FeatureSchema,
        x: Vec<f64>,
        a: Vec<u32>,
        y: Vec<u8>,
        group_of: Vec<GroupId>,
    ) -> Result<Self> {
        let n = y.len();
        if n == 0 {
            return Err(Error::EmptyData);
        }
        let check = |what, expected, got| {
            if expected == got {
                Ok(())
            } else {
                Err(Error::Length { what, expected, got })
            }
        };
        check("feature values", n * schema.d, x.len())?;
        check("attribute values", n * schema.k, a.len())?;
        check("group assignments", n, group_of.len())?;
        if let Some(&bad) = y.iter().find(|&&v| v > 1) {
            return Err(Error::Label(bad));
        }
        let mut group_sizes = BTreeMap::new();
        for g in &group_of {
            *group_sizes.entry(*g).or_insert(0) += 1;
        }
        Ok(Self {
            schema,
            x,
            a,
            y,
            group_of,
            group_sizes,
            feature_names: (0..schema.d).map(|j| format!("x{j}")).collect(),
            attribute_names: (0..schema.k).map(|j| format!("a{j}")).collect(),
        })
    }

    pub fn with_names(mut self, features: Vec<String>, attributes: Vec<String>) -> Result<Self> {
        if features.len() != self.schema.d {
            return Err(Error::Length {
                what: "feature names",
                expected: self.schema.d,
                got: features.len(),
            });
        }
        if attributes.len() != self.schema.k {
            return Err(Error::Length {
                what: "attribute names",
                expected: self.schema.k,
                got: attributes.len(),
            });
        }
        self.feature_names = features;
        self.attribute_names = attributes;
        Ok(self)
    }

    pub fn schema(&self) -> FeatureSchema {
        self.schema
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn x_row(&self, n: usize) -> &[f64] {
        &self.x[n * self.schema.d..(n + 1) * self.schema.d]
    }

    pub fn a_row(&self, n: usize) -> &[u32] {
        &self.a[n * self.schema.k..(n + 1) * self.schema.k]
    }

    pub fn labels(&self) -> &[u8] {
        &self.y
    }

    pub fn group_of(&self) -> &[GroupId] {
        &self.group_of
    }

    pub fn group_sizes(&self) -> &BTreeMap<GroupId, usize> {
        &self.group_sizes
    }

    pub fn groups(&self) -> Vec<GroupId> {
        self.group_sizes.keys().copied().collect()
    }

    /// Empirical group frequencies `N_a / N`.
    pub fn group_weights(&self) -> BTreeMap<GroupId, f64> {
        let n = self.len() as f64;
        self.group_sizes
            .iter()
            .map(|(g, &c)| (*g, c as f64 / n))
            .collect()
    }

    /// Row indices of every group, in dataset order.
    pub fn members(&self) -> BTreeMap<GroupId, Vec<usize>> {
        let mut out: BTreeMap<GroupId, Vec<usize>> = BTreeMap::new();
        for (n, g) in self.group_of.iter().enumerate() {
            out.entry(*g).or_default().push(n);
        }
        out
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn attribute_names(&self) -> &[String] {
        &self.attribute_names
    }

    /// Rows `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let (d, k) = (self.schema.d, self.schema.k);
        let mut x = Vec::with_capacity(indices.len() * d);
        let mut a = Vec::with_capacity(indices.len() * k);
        for &n in indices {
            x.extend_from_slice(self.x_row(n));
            a.extend_from_slice(self.a_row(n));
        }
        let out = Self::new(
            self.schema,
            x,
            a,
            indices.iter().map(|&n| self.y[n]).collect(),
            indices.iter().map(|&n| self.group_of[n]).collect(),
        )?;
        out.with_names(self.feature_names.clone(), self.attribute_names.clone())
    }

    /// `w^n` for row `n`.
    pub fn features(&self, n: usize, mode: FeatureMode) -> Vec<f64> {
        crate::logistic::assemble_features(self.schema, self.x_row(n), self.a_row(n), mode)
            .expect("rows match the schema")
    }
}
