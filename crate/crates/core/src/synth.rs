//! Seeded synthetic response maps.
//!
//! Three regimes:
//! - `concentrated`: one Gaussian bump, labelled target present
//! - `scattered`: isolated single-pixel spikes, labelled target absent
//! - `fragmented`: 2 to 4 well separated Gaussian bumps, labelled target absent
//!
//! All randomness comes from a ChaCha8 stream seeded with `SyntheticSpec::seed`,
//! so a spec reproduces bit-identical maps from run to run.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifest::{Manifest, ManifestEntry};
use crate::map::ResponseMap;

pub const GENERATOR: &str = concat!("simcheck-synth/", env!("CARGO_PKG_VERSION"));
pub const RNG_ALGORITHM: &str = "ChaCha8";

/// Ground-truth existence label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "present", alias = "target_present")]
    TargetPresent,
    #[serde(rename = "absent", alias = "target_absent")]
    TargetAbsent,
}

impl Label {
    pub fn is_present(self) -> bool {
        self == Label::TargetPresent
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::TargetPresent => "target_present",
            Label::TargetAbsent => "target_absent",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticKind {
    Concentrated,
    Scattered,
    Fragmented,
}

impl SyntheticKind {
    pub fn label(self) -> Label {
        match self {
            SyntheticKind::Concentrated => Label::TargetPresent,
            SyntheticKind::Scattered | SyntheticKind::Fragmented => Label::TargetAbsent,
        }
    }

    fn name(self) -> &'static str {
        match self {
            SyntheticKind::Concentrated => "concentrated",
            SyntheticKind::Scattered => "scattered",
            SyntheticKind::Fragmented => "fragmented",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    pub height: usize,
    pub width: usize,
    pub peak: f64,
    /// Bump standard deviation in pixels (concentrated, fragmented).
    pub sigma: f64,
    /// Number of spikes (scattered) or bumps (fragmented, 2 to 4).
    pub spike_count: usize,
    /// Amplitude of uniform `[0, noise_floor)` noise added to every cell.
    pub noise_floor: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            kind: SyntheticKind::Concentrated,
            height: 24,
            width: 24,
            peak: 1.0,
            sigma: 2.0,
            spike_count: 30,
            noise_floor: 0.05,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn concentrated(seed: u64) -> Self {
        Self {
            kind: SyntheticKind::Concentrated,
            seed,
            ..Self::default()
        }
    }

    pub fn scattered(seed: u64) -> Self {
        Self {
            kind: SyntheticKind::Scattered,
            seed,
            ..Self::default()
        }
    }

    pub fn fragmented(seed: u64) -> Self {
        Self {
            kind: SyntheticKind::Fragmented,
            spike_count: 3,
            seed,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Generation(msg));
        if self.height < 2 || self.width < 2 {
            return fail(format!(
                "grid must be at least 2x2, got {}x{}",
                self.height, self.width
            ));
        }
        if !(self.peak > 0.0 && self.peak.is_finite()) {
            return fail(format!("peak must be positive, got {}", self.peak));
        }
        if !(self.noise_floor >= 0.0 && self.noise_floor.is_finite()) {
            return fail(format!(
                "noise_floor must be non-negative, got {}",
                self.noise_floor
            ));
        }
        match self.kind {
            SyntheticKind::Concentrated | SyntheticKind::Fragmented => {
                if !(self.sigma > 0.0 && self.sigma.is_finite()) {
                    return fail(format!("sigma must be positive, got {}", self.sigma));
                }
                if 2 * self.margin() >= self.height.min(self.width) {
                    return fail(format!(
                        "sigma {} leaves no room for a bump centre on a {}x{} grid",
                        self.sigma, self.height, self.width
                    ));
                }
                if self.kind == SyntheticKind::Fragmented && !(2..=4).contains(&self.spike_count) {
                    return fail(format!(
                        "fragmented maps need 2 to 4 bumps, got {}",
                        self.spike_count
                    ));
                }
            }
            SyntheticKind::Scattered => {
                if self.spike_count == 0 {
                    return fail("spike_count must be at least 1".into());
                }
            }
        }
        Ok(())
    }

    /// Bump centres stay `ceil(2 sigma)` cells away from the border.
    fn margin(&self) -> usize {
        (2.0 * self.sigma).ceil() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticMap {
    pub map: ResponseMap,
    pub label: Label,
    /// Bump centres or spike positions as `(row, col)`.
    pub centers: Vec<(usize, usize)>,
}

pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticMap> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (h, w) = (spec.height, spec.width);
    let mut signal = vec![0.0; h * w];

    let centers = match spec.kind {
        SyntheticKind::Concentrated => {
            let centre = sample_centre(spec, &mut rng);
            add_bump(&mut signal, spec, centre);
            vec![centre]
        }
        SyntheticKind::Fragmented => {
            let centres = sample_separated_centres(spec, &mut rng)?;
            for &c in &centres {
                add_bump(&mut signal, spec, c);
            }
            centres
        }
        SyntheticKind::Scattered => {
            let spikes = sample_isolated_cells(spec, &mut rng)?;
            for &(r, c) in &spikes {
                signal[r * w + c] = spec.peak;
            }
            spikes
        }
    };

    if spec.noise_floor > 0.0 {
        for v in signal.iter_mut() {
            *v += spec.noise_floor * rng.random::<f64>();
        }
    }

    Ok(SyntheticMap {
        map: ResponseMap::new(h, w, signal)?,
        label: spec.kind.label(),
        centers,
    })
}

fn sample_centre(spec: &SyntheticSpec, rng: &mut ChaCha8Rng) -> (usize, usize) {
    let m = spec.margin();
    (
        rng.random_range(m..spec.height - m),
        rng.random_range(m..spec.width - m),
    )
}

fn add_bump(signal: &mut [f64], spec: &SyntheticSpec, (cr, cc): (usize, usize)) {
    let two_var = 2.0 * spec.sigma * spec.sigma;
    for r in 0..spec.height {
        for c in 0..spec.width {
            let dr = r as f64 - cr as f64;
            let dc = c as f64 - cc as f64;
            signal[r * spec.width + c] += spec.peak * (-(dr * dr + dc * dc) / two_var).exp();
        }
    }
}

fn sample_separated_centres(
    spec: &SyntheticSpec,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(usize, usize)>> {
    const ATTEMPTS: usize = 1000;
    let min_dist = 4.0 * spec.sigma;
    for _ in 0..ATTEMPTS {
        let mut centres: Vec<(usize, usize)> = Vec::with_capacity(spec.spike_count);
        for _ in 0..spec.spike_count {
            let cand = sample_centre(spec, rng);
            let far_enough = centres.iter().all(|&(r, c)| {
                (r as f64 - cand.0 as f64).hypot(c as f64 - cand.1 as f64) >= min_dist
            });
            if !far_enough {
                break;
            }
            centres.push(cand);
        }
        if centres.len() == spec.spike_count {
            return Ok(centres);
        }
    }
    Err(Error::Generation(format!(
        "could not place {} bumps at least {min_dist} apart on a {}x{} grid",
        spec.spike_count, spec.height, spec.width
    )))
}

/// Spikes are pairwise non-adjacent (no shared edge or corner).
fn sample_isolated_cells(
    spec: &SyntheticSpec,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(usize, usize)>> {
    let (h, w) = (spec.height, spec.width);
    let mut cells: Vec<usize> = (0..h * w).collect();
    cells.shuffle(rng);
    let mut taken = vec![false; h * w];
    let mut spikes = Vec::with_capacity(spec.spike_count);
    for idx in cells {
        let (r, c) = (idx / w, idx % w);
        let blocked = (r.saturating_sub(1)..=(r + 1).min(h - 1))
            .any(|rr| (c.saturating_sub(1)..=(c + 1).min(w - 1)).any(|cc| taken[rr * w + cc]));
        if blocked {
            continue;
        }
        taken[idx] = true;
        spikes.push((r, c));
        if spikes.len() == spec.spike_count {
            return Ok(spikes);
        }
    }
    Err(Error::Generation(format!(
        "cannot place {} isolated spikes on a {h}x{w} grid",
        spec.spike_count
    )))
}

/// One corpus member: a spec and the split it belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusItem {
    #[serde(flatten)]
    pub spec: SyntheticSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<String>,
}

#[derive(Debug, Clone)]
pub struct CorpusSummary {
    pub manifest_path: PathBuf,
    pub manifest: Manifest,
    /// SHA-256 of the manifest file, which itself lists every map's hash.
    pub manifest_sha256: String,
}

/// Writes one JSON map per item under `out_dir/maps/` and a
/// `out_dir/manifest.json` describing them.
pub fn generate_corpus(items: &[CorpusItem], out_dir: impl AsRef<Path>) -> Result<CorpusSummary> {
    if items.is_empty() {
        return Err(Error::Generation("corpus needs at least one spec".into()));
    }
    let out_dir = out_dir.as_ref();
    let maps_dir = out_dir.join("maps");
    fs::create_dir_all(&maps_dir).map_err(|e| Error::io(&maps_dir, e))?;

    let entries = items
        .par_iter()
        .enumerate()
        .map(|(i, item)| {
            let generated = generate(&item.spec)?;
            let rel = format!("maps/{i:05}-{}.json", item.spec.kind.name());
            let text = generated.map.to_json_string();
            let path = out_dir.join(&rel);
            fs::write(&path, &text).map_err(|e| Error::io(&path, e))?;
            Ok(ManifestEntry {
                path: rel,
                label: generated.label,
                split: item.split.clone(),
                kind: Some(item.spec.kind),
                seed: Some(item.spec.seed),
                generator: Some(GENERATOR.to_string()),
                rng: Some(RNG_ALGORITHM.to_string()),
                sha256: Some(crate::manifest::sha256_hex(text.as_bytes())),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let manifest = Manifest {
        base_dir: out_dir.to_path_buf(),
        entries,
    };
    let manifest_path = out_dir.join("manifest.json");
    let manifest_sha256 = manifest.write(&manifest_path)?;
    Ok(CorpusSummary {
        manifest_path,
        manifest,
        manifest_sha256,
    })
}

/// Named corpus layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// 200 concentrated and 200 scattered default maps.
    Default,
    /// 200/200 calibration split plus a 278 present / 740 absent test split;
    /// absent maps alternate between scattered and fragmented.
    PaperScale,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(Preset::Default),
            "paper-scale" => Ok(Preset::PaperScale),
            other => Err(Error::Generation(format!(
                "unknown preset `{other}` (available: default, paper-scale)"
            ))),
        }
    }
}

/// Per-item seed derived from the corpus base seed.
pub fn derive_seed(base_seed: u64, index: usize) -> u64 {
    base_seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index as u64)
}

pub fn preset_items(preset: Preset, base_seed: u64) -> Vec<CorpusItem> {
    let mut items = Vec::new();
    let mut push = |spec: SyntheticSpec, split: Option<&str>| {
        items.push(CorpusItem {
            spec,
            split: split.map(str::to_string),
        });
    };
    let mut next = 0usize;
    let mut seed = || {
        next += 1;
        derive_seed(base_seed, next - 1)
    };
    match preset {
        Preset::Default => {
            for _ in 0..200 {
                push(SyntheticSpec::concentrated(seed()), None);
            }
            for _ in 0..200 {
                push(SyntheticSpec::scattered(seed()), None);
            }
        }
        Preset::PaperScale => {
            for (split, present, absent) in [("calibration", 200, 200), ("test", 278, 740)] {
                for _ in 0..present {
                    push(SyntheticSpec::concentrated(seed()), Some(split));
                }
                for i in 0..absent {
                    let s = seed();
                    let spec = if i % 2 == 0 {
                        SyntheticSpec::scattered(s)
                    } else {
                        SyntheticSpec::fragmented(s)
                    };
                    push(spec, Some(split));
                }
            }
        }
    }
    items
}
