//! Similarity-response quality scoring.
//!
//! Pipeline for a response map `M` (H×W):
//!
//! 1. Robust statistics: median `q50` and upper quantile `q95` of all entries.
//! 2. Strength: `m_top` is the mean of the `k = max(1, floor(rho·H·W))` largest
//!    entries, `r_s = max(0, (m_top - q50) / (q95 - q50 + eps))`,
//!    `s1 = sigmoid(r_s)`.
//! 3. Score map: `S = max(0, (M - q50) / (q95 - q50 + eps))`, then a
//!    `k×k` box average with replicated edges.
//! 4. Active region: `delta = max(Q_alpha(S > 0), delta_min)`,
//!    `A = {S >= delta}`, labelled into connected components.
//! 5. Compactness: score-weighted spread of `A` around its weighted centre,
//!    normalised by the grid diagonal, `s2 = exp(-d / tau_c)`.
//! 6. Purity: share of the active score mass held by the heaviest component.
//!
//! An empty active region scores `s2 = s3 = 0`.

use serde::{Deserialize, Serialize};

use crate::components::{label_components, ComponentLabels};
use crate::config::{Dimension, DimensionMask, ScoringConfig, Thresholds};
use crate::error::{Error, Result};
use crate::map::ResponseMap;
use crate::quantile::quantile_in_place;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobustStats {
    pub q50: f64,
    pub q95: f64,
}

impl RobustStats {
    /// `q95 - q50 + eps`, the normalising band width.
    fn band(&self, epsilon: f64) -> f64 {
        self.q95 - self.q50 + epsilon
    }
}

/// Non-negative, normalised and smoothed scores on the map grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMap {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl ScoreMap {
    /// Wraps precomputed scores. All values must be finite and non-negative.
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != height * width {
            return Err(Error::InvalidMap(format!(
                "score map of {height}x{width} needs {} values, got {}",
                height * width,
                values.len()
            )));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidMap(
                "score map values must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            height,
            width,
            values,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }
}

/// Pixels of the score map at or above the activation threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveRegion {
    pub threshold_used: f64,
    /// Active `(row, col)` coordinates in row-major order.
    pub pixels: Vec<(usize, usize)>,
    pub components: ComponentLabels,
}

impl ActiveRegion {
    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn component_count(&self) -> usize {
        self.components.count
    }
}

/// The strength / compactness / purity triple and its intermediates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityScores {
    pub strength: f64,
    pub compactness: f64,
    pub purity: f64,
    pub m_top: f64,
    pub r_s: f64,
    /// Normalised weighted spread. Infinite (serialised as `null`) when the
    /// active region is empty.
    #[serde(with = "infinite_as_null")]
    pub spread_d: f64,
    pub active_pixel_count: usize,
    pub component_count: usize,
    pub q50: f64,
    pub q95: f64,
    pub delta: f64,
}

impl QualityScores {
    pub fn get(&self, dim: Dimension) -> f64 {
        match dim {
            Dimension::Strength => self.strength,
            Dimension::Compactness => self.compactness,
            Dimension::Purity => self.purity,
        }
    }

    pub fn triple(&self) -> [f64; 3] {
        [self.strength, self.compactness, self.purity]
    }

    /// A score record with only the three headline values set; used when
    /// scores come from an external source.
    pub fn from_triple(strength: f64, compactness: f64, purity: f64) -> Self {
        Self {
            strength,
            compactness,
            purity,
            m_top: 0.0,
            r_s: 0.0,
            spread_d: f64::INFINITY,
            active_pixel_count: 0,
            component_count: 0,
            q50: 0.0,
            q95: 0.0,
            delta: 0.0,
        }
    }
}

mod infinite_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// Everything computed while scoring one map.
#[derive(Debug, Clone)]
pub struct ScoringTrace {
    pub stats: RobustStats,
    pub score_map: ScoreMap,
    pub region: ActiveRegion,
    pub scores: QualityScores,
}

pub fn compute_robust_stats(map: &ResponseMap, config: &ScoringConfig) -> RobustStats {
    let mut scratch = map.values().to_vec();
    let method = config.quantile_method;
    let q50 = quantile_in_place(&mut scratch, 0.5, method).expect("map is non-empty");
    let q95 = quantile_in_place(&mut scratch, 0.95, method).expect("map is non-empty");
    RobustStats { q50, q95 }
}

/// Returns `(s1, m_top, r_s)`.
pub fn response_strength(
    map: &ResponseMap,
    stats: &RobustStats,
    config: &ScoringConfig,
) -> (f64, f64, f64) {
    let values = map.values();
    let n = values.len();
    let k = ((config.rho * n as f64).floor() as usize).clamp(1, n);

    // total order: value descending, then row-major index ascending
    let order = |a: &usize, b: &usize| values[*b].total_cmp(&values[*a]).then(a.cmp(b));
    let mut idx: Vec<usize> = (0..n).collect();
    if k < n {
        idx.select_nth_unstable_by(k - 1, order);
    }
    let top = &mut idx[..k];
    top.sort_unstable_by(order);
    let m_top = top.iter().map(|&i| values[i]).sum::<f64>() / k as f64;

    let r_s = ((m_top - stats.q50) / stats.band(config.epsilon)).max(0.0);
    let s1 = 1.0 / (1.0 + (-r_s).exp());
    (s1, m_top, r_s)
}

pub fn build_score_map(map: &ResponseMap, stats: &RobustStats, config: &ScoringConfig) -> ScoreMap {
    let (h, w) = (map.height(), map.width());
    let band = stats.band(config.epsilon);
    let raw: Vec<f64> = map
        .values()
        .iter()
        .map(|&v| ((v - stats.q50) / band).max(0.0))
        .collect();

    let radius = (config.kernel_size / 2) as isize;
    let area = (config.kernel_size * config.kernel_size) as f64;
    let clamp = |v: isize, hi: usize| v.clamp(0, hi as isize - 1) as usize;
    let mut smoothed = Vec::with_capacity(raw.len());
    for row in 0..h {
        for col in 0..w {
            let mut acc = 0.0;
            for dy in -radius..=radius {
                let r = clamp(row as isize + dy, h);
                for dx in -radius..=radius {
                    let c = clamp(col as isize + dx, w);
                    acc += raw[r * w + c];
                }
            }
            smoothed.push(acc / area);
        }
    }
    ScoreMap {
        height: h,
        width: w,
        values: smoothed,
    }
}

/// Thresholds the score map. A map without strictly positive scores yields
/// an empty region with `threshold_used = delta_min`.
pub fn extract_active_region(score_map: &ScoreMap, config: &ScoringConfig) -> ActiveRegion {
    let mut positive: Vec<f64> = score_map
        .values
        .iter()
        .copied()
        .filter(|&v| v > 0.0)
        .collect();
    let (h, w) = (score_map.height, score_map.width);

    let threshold = match quantile_in_place(&mut positive, config.alpha, config.quantile_method) {
        Some(q) => q.max(config.delta_min),
        None => {
            return ActiveRegion {
                threshold_used: config.delta_min,
                pixels: Vec::new(),
                components: label_components(&vec![false; h * w], h, w, config.connectivity),
            }
        }
    };

    let mask: Vec<bool> = score_map
        .values
        .iter()
        .map(|&v| v > 0.0 && v >= threshold)
        .collect();
    let pixels = mask
        .iter()
        .enumerate()
        .filter(|(_, &on)| on)
        .map(|(i, _)| (i / w, i % w))
        .collect();
    ActiveRegion {
        threshold_used: threshold,
        pixels,
        components: label_components(&mask, h, w, config.connectivity),
    }
}

/// Returns `(s2, d)`; `(0, +inf)` for an empty region.
pub fn spatial_compactness(
    score_map: &ScoreMap,
    region: &ActiveRegion,
    config: &ScoringConfig,
) -> (f64, f64) {
    if region.is_empty() {
        return (0.0, f64::INFINITY);
    }
    let eps = config.epsilon;
    let mut mass = 0.0;
    let mut sum_row = 0.0;
    let mut sum_col = 0.0;
    for &(r, c) in &region.pixels {
        let s = score_map.get(r, c);
        mass += s;
        sum_row += s * r as f64;
        sum_col += s * c as f64;
    }
    let centre_row = sum_row / (mass + eps);
    let centre_col = sum_col / (mass + eps);

    let weighted_dist: f64 = region
        .pixels
        .iter()
        .map(|&(r, c)| {
            let s = score_map.get(r, c);
            s * (r as f64 - centre_row).hypot(c as f64 - centre_col)
        })
        .sum();
    let diagonal = (score_map.height as f64).hypot(score_map.width as f64);
    let d = weighted_dist / (mass * diagonal + eps);
    ((-d / config.tau_c).exp(), d)
}

/// Share of active score mass in the heaviest component; `0` for an empty
/// region. Equal masses resolve to the component whose first pixel comes
/// first in row-major order.
pub fn region_purity(score_map: &ScoreMap, region: &ActiveRegion, config: &ScoringConfig) -> f64 {
    if region.is_empty() {
        return 0.0;
    }
    let mut sums = vec![0.0; region.components.count + 1];
    let mut mass = 0.0;
    for &(r, c) in &region.pixels {
        let s = score_map.get(r, c);
        sums[region.components.get(r, c) as usize] += s;
        mass += s;
    }
    let mut best = 0.0;
    for &s in &sums[1..] {
        if s > best {
            best = s;
        }
    }
    best / (mass + config.epsilon)
}

/// Runs the full pipeline, keeping every intermediate.
pub fn analyze(map: &ResponseMap, config: &ScoringConfig) -> Result<ScoringTrace> {
    config.validate()?;
    let stats = compute_robust_stats(map, config);
    let (strength, m_top, r_s) = response_strength(map, &stats, config);
    let score_map = build_score_map(map, &stats, config);
    let region = extract_active_region(&score_map, config);
    let (compactness, spread_d) = spatial_compactness(&score_map, &region, config);
    let purity = region_purity(&score_map, &region, config);
    let scores = QualityScores {
        strength,
        compactness,
        purity,
        m_top,
        r_s,
        spread_d,
        active_pixel_count: region.pixels.len(),
        component_count: region.component_count(),
        q50: stats.q50,
        q95: stats.q95,
        delta: region.threshold_used,
    };
    Ok(ScoringTrace {
        stats,
        score_map,
        region,
        scores,
    })
}

pub fn score(map: &ResponseMap, config: &ScoringConfig) -> Result<QualityScores> {
    analyze(map, config).map(|t| t.scores)
}

/// Per-dimension `score >= threshold` checks in S, C, P order.
pub fn dimension_checks(scores: &QualityScores, thresholds: &Thresholds) -> [bool; 3] {
    Dimension::ALL.map(|d| scores.get(d) >= thresholds.get(d))
}

/// Cascaded decision: true iff every dimension in `mask` meets its threshold.
pub fn decide(
    scores: &QualityScores,
    thresholds: &Thresholds,
    mask: DimensionMask,
) -> Result<bool> {
    if mask.is_empty() {
        return Err(Error::Config("dimension mask must not be empty".into()));
    }
    Ok(mask.dims().all(|d| scores.get(d) >= thresholds.get(d)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Connectivity;

    fn cfg() -> ScoringConfig {
        ScoringConfig::default()
    }

    fn spike_map(h: usize, w: usize, spikes: &[(usize, usize, f64)]) -> ResponseMap {
        ResponseMap::from_fn(h, w, |r, c| {
            spikes
                .iter()
                .find(|&&(sr, sc, _)| sr == r && sc == c)
                .map_or(0.0, |s| s.2)
        })
        .unwrap()
    }

    #[test]
    fn constant_map_stats_and_scores() {
        let map = ResponseMap::new(6, 5, vec![3.0; 30]).unwrap();
        let stats = compute_robust_stats(&map, &cfg());
        assert_eq!((stats.q50, stats.q95), (3.0, 3.0));
        let s = score(&map, &cfg()).unwrap();
        assert_eq!((s.strength, s.compactness, s.purity), (0.5, 0.0, 0.0));
        assert_eq!(s.r_s, 0.0);
        assert!(s.spread_d.is_infinite());
        assert_eq!(s.active_pixel_count, 0);
        assert_eq!(s.delta, cfg().delta_min);
    }

    #[test]
    fn two_by_two_stats() {
        // sorted 0 0 0 1: h(0.5) = 1.5 -> 0, h(0.95) = 2.85 -> 0 + 0.85 * 1
        let map = ResponseMap::new(2, 2, vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let stats = compute_robust_stats(&map, &cfg());
        assert_eq!(stats.q50, 0.0);
        assert!((stats.q95 - 0.85).abs() < 1e-15);
    }

    #[test]
    fn strength_with_top_equal_to_q95() {
        // 10x10, k = 1. Top six entries are 1.0 so q95 = max = 1.0; half are 0 so q50 = 0.
        let mut values = vec![0.0; 100];
        for v in values.iter_mut().skip(51).take(43) {
            *v = 0.5;
        }
        for v in values.iter_mut().skip(94) {
            *v = 1.0;
        }
        let map = ResponseMap::new(10, 10, values).unwrap();
        let stats = compute_robust_stats(&map, &cfg());
        assert_eq!((stats.q50, stats.q95), (0.0, 1.0));
        let (s1, m_top, r_s) = response_strength(&map, &stats, &cfg());
        let expected_r = 1.0 / (1.0 + 1e-6);
        assert_eq!(m_top, 1.0);
        assert!((r_s - expected_r).abs() < 1e-15);
        assert!((s1 - 1.0 / (1.0 + (-expected_r).exp())).abs() < 1e-15);
        assert!((s1 - 0.731_058_578_6).abs() < 1e-6);
    }

    #[test]
    fn strength_floor_is_one_half() {
        // m_top below q50 cannot happen, but r_s is clamped at 0 regardless
        let map = ResponseMap::new(3, 3, vec![1.0; 9]).unwrap();
        let stats = RobustStats { q50: 2.0, q95: 3.0 };
        let (s1, _, r_s) = response_strength(&map, &stats, &cfg());
        assert_eq!((s1, r_s), (0.5, 0.0));
    }

    #[test]
    fn top_k_uses_floor_of_rho_hw() {
        let mut config = cfg();
        config.rho = 0.25;
        // 4x4, k = 4 -> mean of 9, 8, 7, 6
        let map =
            ResponseMap::new(4, 4, (0..16).map(|v| (v as f64 - 6.0).max(0.0)).collect()).unwrap();
        let stats = compute_robust_stats(&map, &config);
        let (_, m_top, _) = response_strength(&map, &stats, &config);
        assert_eq!(m_top, 7.5);
    }

    #[test]
    fn kernel_one_is_identity() {
        let mut config = cfg();
        config.kernel_size = 1;
        let map = spike_map(5, 5, &[(2, 2, 4.0)]);
        let stats = compute_robust_stats(&map, &config);
        let sm = build_score_map(&map, &stats, &config);
        assert_eq!(sm.get(2, 2), 4.0 / 1e-6);
        assert_eq!(sm.values().iter().filter(|&&v| v > 0.0).count(), 1);
    }

    #[test]
    fn box_filter_spreads_spike_over_neighbourhood() {
        let map = spike_map(5, 5, &[(2, 2, 9.0)]);
        let stats = compute_robust_stats(&map, &cfg());
        let sm = build_score_map(&map, &stats, &cfg());
        let spike = 9.0 / 1e-6;
        for r in 0..5 {
            for c in 0..5 {
                let expected = if (1..=3).contains(&r) && (1..=3).contains(&c) {
                    spike / 9.0
                } else {
                    0.0
                };
                assert!((sm.get(r, c) - expected).abs() <= 1e-9 * spike, "({r},{c})");
            }
        }
    }

    #[test]
    fn all_zero_score_map_gives_empty_region() {
        let sm = ScoreMap::new(4, 4, vec![0.0; 16]).unwrap();
        let region = extract_active_region(&sm, &cfg());
        assert!(region.is_empty());
        assert_eq!(region.threshold_used, cfg().delta_min);
        let mut zero_floor = cfg();
        zero_floor.delta_min = 0.0;
        assert!(extract_active_region(&sm, &zero_floor).is_empty());
    }

    #[test]
    fn single_positive_pixel_region() {
        let mut values = vec![0.0; 16];
        values[5] = 0.7;
        let sm = ScoreMap::new(4, 4, values).unwrap();
        let region = extract_active_region(&sm, &cfg());
        assert_eq!(region.pixels, vec![(1, 1)]);
        assert_eq!(region.component_count(), 1);
        assert_eq!(region.threshold_used, 0.7);

        let mut values = vec![0.0; 16];
        values[5] = 0.1;
        let sm = ScoreMap::new(4, 4, values).unwrap();
        assert!(extract_active_region(&sm, &cfg()).is_empty());
    }

    #[test]
    fn single_pixel_is_perfectly_compact() {
        // eps in the centre's denominator pulls it ~eps*|p|/S off the pixel;
        // a lone spike normalised by a zero band has S ~ 1/eps, making that negligible
        let mut values = vec![0.0; 25];
        values[7] = 2.0e6;
        let sm = ScoreMap::new(5, 5, values).unwrap();
        let region = extract_active_region(&sm, &cfg());
        let (s2, d) = spatial_compactness(&sm, &region, &cfg());
        assert!(d < 1e-9);
        assert!((s2 - 1.0).abs() < 1e-9);

        let mut values = vec![0.0; 25];
        values[7] = 2.0;
        let sm = ScoreMap::new(5, 5, values).unwrap();
        let region = extract_active_region(&sm, &cfg());
        let (s2, d) = spatial_compactness(&sm, &region, &cfg());
        assert!(d < 1e-6 && s2 > 1.0 - 1e-5);
    }

    #[test]
    fn two_pixels_spread_closed_form() {
        let (h, w, v, half) = (9usize, 13usize, 1.5, 3.0);
        let mut values = vec![0.0; h * w];
        values[4 * w + 2] = v;
        values[4 * w + 8] = v;
        let sm = ScoreMap::new(h, w, values).unwrap();
        let config = cfg();
        let region = extract_active_region(&sm, &config);
        assert_eq!(region.pixels.len(), 2);
        let (s2, d) = spatial_compactness(&sm, &region, &config);
        let diag = ((h * h + w * w) as f64).sqrt();
        let oracle_d = half * 2.0 * v / (2.0 * v * diag + config.epsilon);
        assert!((d - oracle_d).abs() < 1e-9);
        assert!((s2 - (-oracle_d / config.tau_c).exp()).abs() < 1e-9);
    }

    #[test]
    fn empty_region_zero_compactness_and_purity() {
        let sm = ScoreMap::new(3, 3, vec![0.0; 9]).unwrap();
        let region = extract_active_region(&sm, &cfg());
        assert_eq!(spatial_compactness(&sm, &region, &cfg()).0, 0.0);
        assert_eq!(region_purity(&sm, &region, &cfg()), 0.0);
    }

    #[test]
    fn purity_single_component() {
        let mut values = vec![0.0; 36];
        for i in [7, 8, 13, 14] {
            values[i] = 1.0;
        }
        let sm = ScoreMap::new(6, 6, values).unwrap();
        let region = extract_active_region(&sm, &cfg());
        assert_eq!(region.component_count(), 1);
        assert!(region_purity(&sm, &region, &cfg()) > 1.0 - 1e-3);
    }

    #[test]
    fn purity_two_equal_components() {
        let mut values = vec![0.0; 36];
        values[0] = 1.0;
        values[35] = 1.0;
        let sm = ScoreMap::new(6, 6, values).unwrap();
        let region = extract_active_region(&sm, &cfg());
        assert_eq!(region.component_count(), 2);
        assert!((region_purity(&sm, &region, &cfg()) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn purity_three_components_five_three_two() {
        // components of 5, 3 and 2 unit pixels, separated by empty columns
        let rows = ["#####.", "......", "###...", "......", "##....", "......"];
        let values: Vec<f64> = rows
            .iter()
            .flat_map(|r| r.chars().map(|c| if c == '#' { 1.0 } else { 0.0 }))
            .collect();
        let sm = ScoreMap::new(6, 6, values).unwrap();
        let mut config = cfg();
        config.connectivity = Connectivity::Four;
        let region = extract_active_region(&sm, &config);
        assert_eq!(region.component_count(), 3);
        let oracle = 5.0 / (10.0 + config.epsilon);
        assert!((region_purity(&sm, &region, &config) - oracle).abs() < 1e-15);
    }

    #[test]
    fn decide_examples() {
        let t = Thresholds::default();
        let pass = QualityScores::from_triple(0.80, 0.45, 0.75);
        let fail = QualityScores::from_triple(0.80, 0.45, 0.65);
        assert!(decide(&pass, &t, DimensionMask::ALL).unwrap());
        assert!(!decide(&fail, &t, DimensionMask::ALL).unwrap());
        assert!(decide(&fail, &t, "SC".parse().unwrap()).unwrap());
        assert!(decide(&fail, &t, DimensionMask::EMPTY).is_err());
    }

    #[test]
    fn decide_threshold_is_inclusive() {
        let t = Thresholds::default();
        let edge = QualityScores::from_triple(0.475, 0.4, 0.7);
        assert!(decide(&edge, &t, DimensionMask::ALL).unwrap());
        assert_eq!(dimension_checks(&edge, &t), [true; 3]);
    }

    #[test]
    fn spread_serialises_infinity_as_null() {
        let s = QualityScores::from_triple(0.5, 0.0, 0.0);
        let json = serde_json::to_value(&s).unwrap();
        assert!(json["spread_d"].is_null());
        let back: QualityScores = serde_json::from_value(json).unwrap();
        assert!(back.spread_d.is_infinite());
    }
}
