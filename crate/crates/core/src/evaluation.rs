//! Batch accuracy over labelled maps, plus the per-dimension ablation table.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{DimensionMask, ScoringConfig, Thresholds};
use crate::error::{Error, Result};
use crate::holistic::HolisticDecision;
use crate::manifest::LoadedSample;
use crate::pipeline::Verifier;
use crate::scoring::{decide, score, QualityScores};
use crate::synth::Label;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub id: String,
    pub label: Label,
    pub scores: QualityScores,
    pub quantitative: bool,
    pub holistic: Option<HolisticDecision>,
    #[serde(rename = "final")]
    pub final_decision: bool,
}

impl SampleRecord {
    pub fn correct(&self) -> bool {
        self.final_decision == self.label.is_present()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub positive_total: usize,
    pub positive_correct: usize,
    pub negative_total: usize,
    pub negative_correct: usize,
}

impl Tally {
    pub fn from_decisions(decisions: impl IntoIterator<Item = (Label, bool)>) -> Self {
        let mut t = Tally {
            positive_total: 0,
            positive_correct: 0,
            negative_total: 0,
            negative_correct: 0,
        };
        for (label, decision) in decisions {
            if label.is_present() {
                t.positive_total += 1;
                t.positive_correct += usize::from(decision);
            } else {
                t.negative_total += 1;
                t.negative_correct += usize::from(!decision);
            }
        }
        t
    }

    pub fn positive_acc(&self) -> f64 {
        self.positive_correct as f64 / self.positive_total as f64
    }

    pub fn negative_acc(&self) -> f64 {
        self.negative_correct as f64 / self.negative_total as f64
    }

    pub fn overall_acc(&self) -> f64 {
        (self.positive_correct + self.negative_correct) as f64
            / (self.positive_total + self.negative_total) as f64
    }

    fn require_both_classes(&self) -> Result<()> {
        if self.positive_total == 0 || self.negative_total == 0 {
            return Err(Error::Config(format!(
                "evaluation needs both classes, got {} present and {} absent",
                self.positive_total, self.negative_total
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub mask: DimensionMask,
    pub positive_acc: f64,
    pub negative_acc: f64,
    pub overall_acc: f64,
    #[serde(flatten)]
    pub tally: Tally,
    pub per_sample_records: Vec<SampleRecord>,
}

impl EvaluationReport {
    pub fn from_records(mask: DimensionMask, records: Vec<SampleRecord>) -> Result<Self> {
        let tally = Tally::from_decisions(records.iter().map(|r| (r.label, r.final_decision)));
        tally.require_both_classes()?;
        Ok(Self {
            mask,
            positive_acc: tally.positive_acc(),
            negative_acc: tally.negative_acc(),
            overall_acc: tally.overall_acc(),
            tally,
            per_sample_records: records,
        })
    }
}

/// Verifies every sample (in parallel) and aggregates accuracy.
pub fn evaluate(samples: &[LoadedSample], verifier: &Verifier) -> Result<EvaluationReport> {
    let records = samples
        .par_iter()
        .map(|s| {
            let v = verifier.verify(&s.map)?;
            Ok(SampleRecord {
                id: s.id.clone(),
                label: s.label,
                scores: v.scores,
                quantitative: v.quantitative,
                holistic: v.holistic.map(|h| h.decision),
                final_decision: v.final_decision,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    EvaluationReport::from_records(verifier.mask, records)
}

/// One row of the dimension ablation: quantitative accuracy under one mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub mask: DimensionMask,
    pub positive_acc: f64,
    pub negative_acc: f64,
    pub overall_acc: f64,
    #[serde(flatten)]
    pub tally: Tally,
}

/// Scores each sample once, then tallies the quantitative decision for all
/// seven non-empty dimension masks.
pub fn ablation(
    samples: &[LoadedSample],
    config: &ScoringConfig,
    thresholds: &Thresholds,
) -> Result<Vec<AblationRow>> {
    let scored = samples
        .par_iter()
        .map(|s| Ok((score(&s.map, config)?, s.label)))
        .collect::<Result<Vec<_>>>()?;
    ablation_from_scores(&scored, thresholds)
}

pub fn ablation_from_scores(
    scored: &[(QualityScores, Label)],
    thresholds: &Thresholds,
) -> Result<Vec<AblationRow>> {
    DimensionMask::all_non_empty()
        .into_iter()
        .map(|mask| {
            let decisions = scored
                .iter()
                .map(|(s, label)| Ok((*label, decide(s, thresholds, mask)?)))
                .collect::<Result<Vec<_>>>()?;
            let tally = Tally::from_decisions(decisions);
            tally.require_both_classes()?;
            Ok(AblationRow {
                mask,
                positive_acc: tally.positive_acc(),
                negative_acc: tally.negative_acc(),
                overall_acc: tally.overall_acc(),
                tally,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(label: Label, final_decision: bool) -> SampleRecord {
        SampleRecord {
            id: String::new(),
            label,
            scores: QualityScores::from_triple(0.5, 0.0, 0.0),
            quantitative: final_decision,
            holistic: None,
            final_decision,
        }
    }

    #[test]
    fn accuracies_follow_records() {
        let records = vec![
            record(Label::TargetPresent, true),
            record(Label::TargetPresent, false),
            record(Label::TargetAbsent, false),
            record(Label::TargetAbsent, false),
            record(Label::TargetAbsent, true),
        ];
        let r = EvaluationReport::from_records(DimensionMask::ALL, records).unwrap();
        assert_eq!(r.positive_acc, 0.5);
        assert!((r.negative_acc - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.overall_acc, 3.0 / 5.0);
        let correct = r.per_sample_records.iter().filter(|r| r.correct()).count();
        assert_eq!(correct as f64 / 5.0, r.overall_acc);
    }

    #[test]
    fn missing_class_is_an_error() {
        let records = vec![record(Label::TargetPresent, true)];
        assert!(EvaluationReport::from_records(DimensionMask::ALL, records).is_err());
    }

    #[test]
    fn ablation_has_seven_rows() {
        let scored = vec![
            (
                QualityScores::from_triple(0.9, 0.6, 0.9),
                Label::TargetPresent,
            ),
            (
                QualityScores::from_triple(0.6, 0.1, 0.2),
                Label::TargetAbsent,
            ),
        ];
        let rows = ablation_from_scores(&scored, &Thresholds::default()).unwrap();
        assert_eq!(rows.len(), 7);
        assert_eq!(rows[0].mask.to_string(), "S");
        assert_eq!(rows[0].negative_acc, 0.0);
        assert_eq!(rows[6].overall_acc, 1.0);
    }
}
