//! Model, trajectory and belief files.
//!
//! Model file, one value per line after a fixed header:
//!
//! ```text
//! wfair-model v1
//! dataset german
//! mode full
//! d 76
//! k 1
//! theta 78
//! -1.2345678901234567e-1
//! ...
//! ```
//!
//! Seventeen significant digits make every `θ` entry reload bit for bit.
//! Trajectory and belief files are tab-separated with a header row.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use wfair_core::{FeatureMode, FeatureSchema, GroupId, ModelParams, TrajectoryPoint};

pub const MODEL_MAGIC: &str = "wfair-model v1";

/// Parameters plus the dataset they were trained on.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub dataset: String,
    pub params: ModelParams,
}

impl ModelFile {
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let s = p.schema();
        let mut out = format!(
            "{MODEL_MAGIC}\ndataset {}\nmode {}\nd {}\nk {}\ntheta {}\n",
            self.dataset,
            p.mode(),
            s.d,
            s.k,
            p.theta().len()
        );
        for t in p.theta() {
            let _ = writeln!(out, "{t:.16e}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(MODEL_MAGIC) {
            bail!("not a model file (expected first line {MODEL_MAGIC:?})");
        }
        let mut field = |name: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| anyhow!("model file ends before {name}"))?;
            line.strip_prefix(name)
                .and_then(|r| r.strip_prefix(' '))
                .map(str::to_string)
                .ok_or_else(|| anyhow!("expected {name:?} line, found {line:?}"))
        };
        let dataset = field("dataset")?;
        let mode: FeatureMode = field("mode")?.parse()?;
        let d: usize = field("d")?.parse()?;
        let k: usize = field("k")?.parse()?;
        let n: usize = field("theta")?.parse()?;
        let theta: Vec<f64> = lines
            .map(|l| l.trim().parse::<f64>().with_context(|| format!("theta value {l:?}")))
            .collect::<Result<_>>()?;
        if theta.len() != n {
            bail!("model file lists {n} parameters but holds {}", theta.len());
        }
        let params = ModelParams::new(theta, mode, FeatureSchema::new(d, k))?;
        Ok(Self { dataset, params })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).with_context(|| format!("writing {}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

pub const TRAJECTORY_COLUMNS: [&str; 10] = [
    "step",
    "err_05",
    "err_exp",
    "dd_05",
    "sdd",
    "spdd",
    "spdd_unordered",
    "pseudo_spdd",
    "objective",
    "train_objective",
];

/// Header plus one row per point; per-group W1 columns follow as `w1:<id>`.
pub fn trajectory_text(points: &[TrajectoryPoint]) -> String {
    let mut out = TRAJECTORY_COLUMNS.join("\t");
    if let Some(p) = points.first() {
        for (g, _) in &p.group_w1 {
            let _ = write!(out, "\tw1:{}", g.0);
        }
    }
    out.push('\n');
    for p in points {
        let _ = write!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            p.step,
            p.err_05,
            p.err_exp,
            p.dd_05,
            p.sdd,
            p.spdd,
            p.spdd_unordered,
            p.pseudo_spdd,
            p.objective,
            p.train_objective
        );
        for (_, w) in &p.group_w1 {
            let _ = write!(out, "\t{w}");
        }
        out.push('\n');
    }
    out
}

pub fn parse_trajectory(text: &str) -> Result<Vec<TrajectoryPoint>> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or_else(|| anyhow!("empty trajectory file"))?.split('\t').collect();
    if header.len() < TRAJECTORY_COLUMNS.len() || header[..TRAJECTORY_COLUMNS.len()] != TRAJECTORY_COLUMNS {
        bail!("unexpected trajectory header");
    }
    let groups: Vec<GroupId> = header[TRAJECTORY_COLUMNS.len()..]
        .iter()
        .map(|h| {
            h.strip_prefix("w1:")
                .and_then(|g| g.parse().ok())
                .map(GroupId)
                .ok_or_else(|| anyhow!("bad column {h:?}"))
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != header.len() {
            bail!("trajectory line {}: {} fields, expected {}", i + 2, f.len(), header.len());
        }
        let x = |j: usize| -> Result<f64> { f[j].parse().with_context(|| format!("trajectory line {}", i + 2)) };
        out.push(TrajectoryPoint {
            step: f[0].parse().with_context(|| format!("trajectory line {}", i + 2))?,
            err_05: x(1)?,
            err_exp: x(2)?,
            dd_05: x(3)?,
            sdd: x(4)?,
            spdd: x(5)?,
            spdd_unordered: x(6)?,
            pseudo_spdd: x(7)?,
            objective: x(8)?,
            train_objective: x(9)?,
            group_w1: groups
                .iter()
                .enumerate()
                .map(|(j, &g)| Ok((g, x(TRAJECTORY_COLUMNS.len() + j)?)))
                .collect::<Result<_>>()?,
        });
    }
    Ok(out)
}

/// One individual's belief before and after post-processing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeliefRow {
    pub group: GroupId,
    pub label: u8,
    pub belief: f64,
    pub adjusted: f64,
}

pub const BELIEF_HEADER: &str = "row\tgroup\tlabel\tbelief\tadjusted";

pub fn beliefs_text(rows: &[BeliefRow]) -> String {
    let mut out = format!("{BELIEF_HEADER}\n");
    for (i, r) in rows.iter().enumerate() {
        let _ = writeln!(out, "{i}\t{}\t{}\t{}\t{}", r.group.0, r.label, r.belief, r.adjusted);
    }
    out
}

pub fn parse_beliefs(text: &str) -> Result<Vec<BeliefRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(BELIEF_HEADER) {
        bail!("not a belief file (expected header {BELIEF_HEADER:?})");
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 5 {
                bail!("belief line {}: expected 5 fields", i + 2);
            }
            let ctx = || format!("belief line {}", i + 2);
            Ok(BeliefRow {
                group: GroupId(f[1].parse().with_context(ctx)?),
                label: f[2].parse().with_context(ctx)?,
                belief: f[3].parse().with_context(ctx)?,
                adjusted: f[4].parse().with_context(ctx)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_round_trip_is_bit_exact() {
        let theta = vec![0.1, -1.0 / 3.0, 1e-300, 123456.789, f64::MIN_POSITIVE, -0.0];
        let params = ModelParams::new(theta.clone(), FeatureMode::Full, FeatureSchema::new(3, 2)).unwrap();
        let m = ModelFile { dataset: "german".into(), params };
        let back = ModelFile::parse(&m.to_text()).unwrap();
        for (a, b) in back.params.theta().iter().zip(&theta) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(back.dataset, "german");
        assert!(m.to_text().starts_with("wfair-model v1\ndataset german\nmode full\nd 3\nk 2\ntheta 6\n1.0000000000000001e-1\n"));
    }

    #[test]
    fn model_errors() {
        assert!(ModelFile::parse("nope").is_err());
        let p = ModelParams::new(vec![1.0, 2.0], FeatureMode::Blind, FeatureSchema::new(1, 0)).unwrap();
        let text = ModelFile { dataset: "x".into(), params: p }.to_text();
        assert!(ModelFile::parse(&text.replace("theta 2", "theta 3")).is_err());
        assert!(ModelFile::parse(&text.replace("d 1", "d 2")).is_err());
    }

    #[test]
    fn trajectory_round_trip() {
        let p = TrajectoryPoint {
            step: 100,
            err_05: 0.25,
            err_exp: 0.3,
            dd_05: 0.1,
            sdd: 0.05,
            spdd: 0.1,
            spdd_unordered: 0.05,
            pseudo_spdd: 0.2,
            objective: 1.5,
            train_objective: 1.25,
            group_w1: vec![(GroupId(0), 0.01), (GroupId(3), 0.02)],
        };
        let text = trajectory_text(&[p.clone(), TrajectoryPoint { step: 200, ..p.clone() }]);
        assert!(text.starts_with("step\terr_05\terr_exp\tdd_05\tsdd\tspdd\tspdd_unordered\tpseudo_spdd\tobjective\ttrain_objective\tw1:0\tw1:3\n"));
        let back = parse_trajectory(&text).unwrap();
        assert_eq!(back[0], p);
        assert_eq!(back[1].step, 200);
    }

    #[test]
    fn belief_round_trip() {
        let rows = vec![
            BeliefRow { group: GroupId(1), label: 0, belief: 0.123, adjusted: 0.2 },
            BeliefRow { group: GroupId(0), label: 1, belief: 1.0 / 3.0, adjusted: 0.5 },
        ];
        assert_eq!(parse_beliefs(&beliefs_text(&rows)).unwrap(), rows);
    }
}
