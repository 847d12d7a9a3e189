//! Single-map verification: score, decide, optionally consult the assessor.

use serde::{Deserialize, Serialize};

use crate::config::{DimensionMask, ScoringConfig, Thresholds};
use crate::error::Result;
use crate::holistic::{build_prompt_with_verdict, combine, Assessor, HolisticVerdict};
use crate::map::ResponseMap;
use crate::render::{render_heatmap, Colormap, HeatmapImage, DEFAULT_SCALE};
use crate::scoring::{decide, dimension_checks, score, QualityScores};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionChecks {
    pub strength: bool,
    pub compactness: bool,
    pub purity: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub scores: QualityScores,
    pub quantitative: bool,
    pub holistic: Option<HolisticVerdict>,
    #[serde(rename = "final")]
    pub final_decision: bool,
    pub rationale: String,
    pub checks: DimensionChecks,
    pub mask: DimensionMask,
}

#[derive(Debug, Clone)]
pub struct Verifier {
    pub config: ScoringConfig,
    pub thresholds: Thresholds,
    pub mask: DimensionMask,
    pub assessor: Option<Assessor>,
    pub colormap: Colormap,
    pub scale: u32,
}

impl Verifier {
    pub fn new(config: ScoringConfig, thresholds: Thresholds) -> Result<Self> {
        config.validate()?;
        thresholds.validate()?;
        Ok(Self {
            config,
            thresholds,
            mask: DimensionMask::ALL,
            assessor: None,
            colormap: Colormap::default(),
            scale: DEFAULT_SCALE,
        })
    }

    pub fn with_mask(mut self, mask: DimensionMask) -> Result<Self> {
        if mask.is_empty() {
            return Err(crate::Error::Config(
                "dimension mask must not be empty".into(),
            ));
        }
        self.mask = mask;
        Ok(self)
    }

    pub fn with_assessor(mut self, assessor: Option<Assessor>) -> Self {
        self.assessor = assessor;
        self
    }

    pub fn verify(&self, map: &ResponseMap) -> Result<Verdict> {
        self.verify_with_heatmap(map, false).map(|(v, _)| v)
    }

    /// Like [`Verifier::verify`], also returning the rendered heatmap when it
    /// was rendered for the assessor or `want_heatmap` is set.
    pub fn verify_with_heatmap(
        &self,
        map: &ResponseMap,
        want_heatmap: bool,
    ) -> Result<(Verdict, Option<HeatmapImage>)> {
        let scores = score(map, &self.config)?;
        let quantitative = decide(&scores, &self.thresholds, self.mask)?;
        let heatmap = if want_heatmap || self.assessor.is_some() {
            Some(render_heatmap(map, self.scale, self.colormap)?)
        } else {
            None
        };
        let holistic = match (&self.assessor, &heatmap) {
            (Some(assessor), Some(image)) => {
                let prompt = build_prompt_with_verdict(&scores, &self.thresholds, quantitative);
                Some(assessor.assess(image, &prompt))
            }
            _ => None,
        };
        let (final_decision, rationale) = combine(quantitative, holistic.as_ref());
        let [strength, compactness, purity] = dimension_checks(&scores, &self.thresholds);
        Ok((
            Verdict {
                scores,
                quantitative,
                holistic,
                final_decision,
                rationale,
                checks: DimensionChecks {
                    strength,
                    compactness,
                    purity,
                },
                mask: self.mask,
            },
            heatmap,
        ))
    }
}
