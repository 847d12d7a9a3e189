//! Threshold calibration by exhaustive grid search.
//!
//! Every `(s, c, p)` point of the candidate grid is scored with the
//! full-mask cascaded decision. The winner maximises balanced accuracy
//! (mean of positive-set and negative-set accuracy); ties go to the higher
//! negative-set accuracy, then to the lexicographically smallest thresholds.

use std::cmp::Ordering;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ScoringConfig, Thresholds};
use crate::error::{Error, Result};
use crate::map::ResponseMap;
use crate::scoring::{score, QualityScores};
use crate::synth::Label;

#[derive(Debug, Clone)]
pub enum SampleInput {
    Map(ResponseMap),
    Scores(QualityScores),
}

#[derive(Debug, Clone)]
pub struct LabeledSample {
    pub input: SampleInput,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredSample {
    pub scores: QualityScores,
    pub label: Label,
}

fn require_both_classes<'a>(labels: impl Iterator<Item = &'a Label>) -> Result<(usize, usize)> {
    let (mut pos, mut neg) = (0, 0);
    for l in labels {
        if l.is_present() {
            pos += 1;
        } else {
            neg += 1;
        }
    }
    if pos == 0 || neg == 0 {
        return Err(Error::Calibration(format!(
            "need at least one sample per class, got {pos} present and {neg} absent"
        )));
    }
    Ok((pos, neg))
}

/// Scores every sample, preserving order.
pub fn score_samples(
    samples: &[LabeledSample],
    config: &ScoringConfig,
) -> Result<Vec<ScoredSample>> {
    require_both_classes(samples.iter().map(|s| &s.label))?;
    samples
        .par_iter()
        .map(|s| {
            let scores = match &s.input {
                SampleInput::Map(map) => score(map, config)?,
                SampleInput::Scores(scores) => scores.clone(),
            };
            Ok(ScoredSample {
                scores,
                label: s.label,
            })
        })
        .collect()
}

/// Candidate thresholds per dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdGrid {
    pub strength: Vec<f64>,
    pub compactness: Vec<f64>,
    pub purity: Vec<f64>,
}

impl ThresholdGrid {
    /// `points` evenly spaced values covering `[0, 1]` in every dimension.
    pub fn uniform(points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::Calibration(
                "a uniform grid needs at least 2 points".into(),
            ));
        }
        let steps = (points - 1) as f64;
        let axis: Vec<f64> = (0..points).map(|i| i as f64 / steps).collect();
        Ok(Self {
            strength: axis.clone(),
            compactness: axis.clone(),
            purity: axis,
        })
    }

    pub fn len(&self) -> usize {
        self.strength.len() * self.compactness.len() * self.purity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn validate(&self) -> Result<()> {
        for (name, axis) in [
            ("strength", &self.strength),
            ("compactness", &self.compactness),
            ("purity", &self.purity),
        ] {
            if axis.is_empty() {
                return Err(Error::Calibration(format!("{name} grid is empty")));
            }
            if let Some(v) = axis.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::Calibration(format!(
                    "{name} grid value {v} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

impl Default for ThresholdGrid {
    /// 41 points per dimension: 0.0, 0.025, ..., 1.0.
    fn default() -> Self {
        Self::uniform(41).expect("41 points is a valid grid")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRecord {
    pub thresholds: Thresholds,
    pub positive_acc: f64,
    pub negative_acc: f64,
    pub balanced_acc: f64,
    pub positive_correct: usize,
    pub negative_correct: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub thresholds: Thresholds,
    /// Balanced accuracy at the selected point.
    pub objective_value: f64,
    pub positive_total: usize,
    pub negative_total: usize,
    pub grid_trace: Vec<GridRecord>,
}

/// Counts per-class correct decisions for one threshold point.
pub fn count_correct(scored: &[ScoredSample], t: &Thresholds) -> (usize, usize) {
    let mut pos = 0;
    let mut neg = 0;
    for s in scored {
        let [a, b, c] = s.scores.triple();
        let pass = a >= t.s_thr && b >= t.c_thr && c >= t.p_thr;
        match (s.label.is_present(), pass) {
            (true, true) => pos += 1,
            (false, false) => neg += 1,
            _ => {}
        }
    }
    (pos, neg)
}

fn cmp_thresholds(a: &Thresholds, b: &Thresholds) -> Ordering {
    a.s_thr
        .total_cmp(&b.s_thr)
        .then(a.c_thr.total_cmp(&b.c_thr))
        .then(a.p_thr.total_cmp(&b.p_thr))
}

pub fn calibrate(scored: &[ScoredSample], grid: &ThresholdGrid) -> Result<CalibrationResult> {
    grid.validate()?;
    let (n_pos, n_neg) = require_both_classes(scored.iter().map(|s| &s.label))?;

    let points: Vec<Thresholds> = grid
        .strength
        .iter()
        .flat_map(|&s| {
            grid.compactness.iter().flat_map(move |&c| {
                grid.purity.iter().map(move |&p| Thresholds {
                    s_thr: s,
                    c_thr: c,
                    p_thr: p,
                })
            })
        })
        .collect();

    let trace: Vec<GridRecord> = points
        .par_iter()
        .map(|t| {
            let (pc, nc) = count_correct(scored, t);
            let positive_acc = pc as f64 / n_pos as f64;
            let negative_acc = nc as f64 / n_neg as f64;
            GridRecord {
                thresholds: *t,
                positive_acc,
                negative_acc,
                balanced_acc: (positive_acc + negative_acc) / 2.0,
                positive_correct: pc,
                negative_correct: nc,
            }
        })
        .collect();

    // balanced accuracy compared exactly via pc/n_pos + nc/n_neg ∝ pc·n_neg + nc·n_pos
    let key = |r: &GridRecord| {
        (
            r.positive_correct * n_neg + r.negative_correct * n_pos,
            r.negative_correct,
        )
    };
    let best = trace
        .iter()
        .min_by(|a, b| {
            key(b)
                .cmp(&key(a))
                .then_with(|| cmp_thresholds(&a.thresholds, &b.thresholds))
        })
        .expect("grid is non-empty");

    Ok(CalibrationResult {
        thresholds: best.thresholds,
        objective_value: best.balanced_acc,
        positive_total: n_pos,
        negative_total: n_neg,
        grid_trace: trace.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterRecord {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub label: Label,
}

pub fn export_scatter(scored: &[ScoredSample]) -> Vec<ScatterRecord> {
    scored
        .iter()
        .map(|s| ScatterRecord {
            s1: s.scores.strength,
            s2: s.scores.compactness,
            s3: s.scores.purity,
            label: s.label,
        })
        .collect()
}

/// Writes `s1,s2,s3,label` CSV with a header row.
pub fn write_scatter_csv(records: &[ScatterRecord], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "s1,s2,s3,label")?;
    for r in records {
        writeln!(out, "{},{},{},{}", r.s1, r.s2, r.s3, r.label)?;
    }
    Ok(())
}
