//! Scoring constants, decision thresholds and dimension masks.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantile::QuantileMethod;

/// Pixel adjacency used when grouping the active region into components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Connectivity {
    /// N, S, E, W neighbours.
    Four,
    /// All eight neighbours.
    #[default]
    Eight,
}

/// Every tunable constant of the scoring pipeline.
///
/// Loaded from JSON; absent fields take the defaults below, unknown fields
/// are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoringConfig {
    /// Fraction of the grid averaged for the top-k strength, in (0, 1].
    pub rho: f64,
    /// Stabiliser added to every denominator.
    pub epsilon: f64,
    /// Quantile level over positive scores that sets the active-region threshold.
    pub alpha: f64,
    /// Floor for the active-region threshold.
    pub delta_min: f64,
    /// Decay temperature of the compactness score.
    pub tau_c: f64,
    /// Side of the square box-average window (odd).
    pub kernel_size: usize,
    pub connectivity: Connectivity,
    pub quantile_method: QuantileMethod,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        Self {
            rho: 0.01,
            epsilon: 1e-6,
            alpha: 0.8,
            delta_min: 0.2,
            tau_c: 0.1,
            kernel_size: 3,
            connectivity: Connectivity::Eight,
            quantile_method: QuantileMethod::LinearInterpolation,
        }
    }
}

impl ScoringConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return fail(format!("rho must lie in (0, 1], got {}", self.rho));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return fail(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return fail(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if !(self.delta_min >= 0.0 && self.delta_min.is_finite()) {
            return fail(format!(
                "delta_min must be non-negative, got {}",
                self.delta_min
            ));
        }
        if !(self.tau_c > 0.0 && self.tau_c.is_finite()) {
            return fail(format!("tau_c must be positive, got {}", self.tau_c));
        }
        if self.kernel_size == 0 || self.kernel_size.is_multiple_of(2) {
            return fail(format!(
                "kernel_size must be odd and at least 1, got {}",
                self.kernel_size
            ));
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

/// Per-dimension pass thresholds for the cascaded decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub s_thr: f64,
    pub c_thr: f64,
    pub p_thr: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            s_thr: 0.475,
            c_thr: 0.4,
            p_thr: 0.7,
        }
    }
}

impl Thresholds {
    pub fn new(s_thr: f64, c_thr: f64, p_thr: f64) -> Result<Self> {
        let t = Self {
            s_thr,
            c_thr,
            p_thr,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("s_thr", self.s_thr),
            ("c_thr", self.c_thr),
            ("p_thr", self.p_thr),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }

    pub fn get(&self, dim: Dimension) -> f64 {
        match dim {
            Dimension::Strength => self.s_thr,
            Dimension::Compactness => self.c_thr,
            Dimension::Purity => self.p_thr,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.s_thr, self.c_thr, self.p_thr]
    }
}

/// Parses `s,c,p`.
impl FromStr for Thresholds {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!(
                "thresholds must be `s,c,p`, got `{s}`"
            )));
        }
        let mut out = [0.0; 3];
        for (slot, part) in out.iter_mut().zip(&parts) {
            *slot = part
                .parse()
                .map_err(|_| Error::Config(format!("cannot parse threshold `{part}`")))?;
        }
        Self::new(out[0], out[1], out[2])
    }
}

impl fmt::Display for Thresholds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.s_thr, self.c_thr, self.p_thr)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Strength,
    Compactness,
    Purity,
}

impl Dimension {
    pub const ALL: [Dimension; 3] = [
        Dimension::Strength,
        Dimension::Compactness,
        Dimension::Purity,
    ];

    fn bit(self) -> u8 {
        match self {
            Dimension::Strength => 0b001,
            Dimension::Compactness => 0b010,
            Dimension::Purity => 0b100,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Dimension::Strength => 'S',
            Dimension::Compactness => 'C',
            Dimension::Purity => 'P',
        }
    }
}

/// Subset of dimensions that participate in the decision. Written as a
/// string of the letters `S`, `C`, `P` (case-insensitive), e.g. `"SC"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DimensionMask(u8);

impl DimensionMask {
    pub const EMPTY: DimensionMask = DimensionMask(0);
    pub const ALL: DimensionMask = DimensionMask(0b111);

    pub fn from_dims(dims: &[Dimension]) -> Self {
        Self(dims.iter().fold(0, |acc, d| acc | d.bit()))
    }

    pub fn contains(self, dim: Dimension) -> bool {
        self.0 & dim.bit() != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn dims(self) -> impl Iterator<Item = Dimension> {
        Dimension::ALL
            .into_iter()
            .filter(move |d| self.contains(*d))
    }

    /// The seven non-empty subsets: singles, then pairs, then all three.
    pub fn all_non_empty() -> [DimensionMask; 7] {
        [0b001, 0b010, 0b100, 0b011, 0b101, 0b110, 0b111].map(DimensionMask)
    }
}

impl Default for DimensionMask {
    fn default() -> Self {
        Self::ALL
    }
}

impl fmt::Display for DimensionMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in self.dims() {
            write!(f, "{}", d.letter())?;
        }
        Ok(())
    }
}

impl FromStr for DimensionMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut bits = 0;
        for ch in s.trim().chars() {
            bits |= match ch.to_ascii_uppercase() {
                'S' => Dimension::Strength.bit(),
                'C' => Dimension::Compactness.bit(),
                'P' => Dimension::Purity.bit(),
                _ => {
                    return Err(Error::Config(format!(
                        "mask `{s}` may only contain the letters S, C, P"
                    )))
                }
            };
        }
        if bits == 0 {
            return Err(Error::Config("dimension mask must not be empty".into()));
        }
        Ok(Self(bits))
    }
}

impl Serialize for DimensionMask {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DimensionMask {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
