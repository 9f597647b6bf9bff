//! Defaults file named by `AREAMATCH_CONFIG` and flag resolution.

use std::path::Path;

use serde::Deserialize;

use areamatch::map_io::Thresholds;
use areamatch::matching::WeightVector;
use areamatch::segmentation::SegmentationParams;
use areamatch::transform::{MatchConfig, ScoreScope};
use areamatch::Error;

use crate::args::{GridFlags, MatchFlags, SegFlags};

pub const CONFIG_ENV: &str = "AREAMATCH_CONFIG";
pub const DEFAULT_REPEATS: usize = 20;

/// Values read from the defaults file. Every key is optional; command-line
/// flags override them.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub width: Option<f64>,
    pub min_area: Option<f64>,
    pub k: Option<usize>,
    pub weights: Option<[f64; 3]>,
    pub angle_threshold_deg: Option<f64>,
    pub overlap_threshold: Option<f64>,
    pub seed: Option<u64>,
    pub free_threshold: Option<u8>,
    pub occupied_threshold: Option<u8>,
    pub repeats: Option<usize>,
}

impl FileConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self, Error> {
        toml::from_str(text).map_err(|e| Error::Config(format!("{origin}: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config file {}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// The file named by the environment variable, or empty defaults.
    pub fn from_env() -> Result<Self, Error> {
        match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
            _ => Ok(Self::default()),
        }
    }

    pub fn thresholds(&self, flags: &GridFlags) -> Result<Thresholds, Error> {
        let d = Thresholds::default();
        let t = Thresholds {
            free: flags.free_threshold.or(self.free_threshold).unwrap_or(d.free),
            occupied: flags
                .occupied_threshold
                .or(self.occupied_threshold)
                .unwrap_or(d.occupied),
        };
        t.validate()?;
        Ok(t)
    }

    pub fn segmentation(&self, flags: &SegFlags) -> Result<SegmentationParams, Error> {
        let d = SegmentationParams::default();
        let p = SegmentationParams {
            width: flags.width.or(self.width).unwrap_or(d.width),
            min_area: flags.min_area.or(self.min_area).unwrap_or(d.min_area),
            ..d
        };
        p.validate()?;
        Ok(p)
    }

    pub fn match_config(&self, seg: &SegFlags, flags: &MatchFlags) -> Result<MatchConfig, Error> {
        let d = MatchConfig::default();
        let weights = match (&flags.weights, self.weights) {
            (Some(s), _) => parse_weights(s)?,
            (None, Some([a, p, l])) => WeightVector::new(a, p, l)?,
            (None, None) => d.weights,
        };
        let config = MatchConfig {
            segmentation: self.segmentation(seg)?,
            k: flags.k.or(self.k).unwrap_or(d.k),
            weights,
            angle_threshold: flags
                .angle_threshold_deg
                .or(self.angle_threshold_deg)
                .map_or(d.angle_threshold, f64::to_radians),
            overlap_threshold: flags
                .overlap_threshold
                .or(self.overlap_threshold)
                .unwrap_or(d.overlap_threshold),
            seed: flags.seed.or(self.seed),
            score_scope: flags.score_scope.map_or(ScoreScope::AllPairs, Into::into),
            refine: !flags.no_refine,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn repeats(&self, flag: Option<usize>) -> usize {
        flag.or(self.repeats).unwrap_or(DEFAULT_REPEATS)
    }
}

/// Parses `wa,wp,wl`.
pub fn parse_weights(s: &str) -> Result<WeightVector, Error> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || Error::Config(format!("weights must be three comma-separated numbers, got {s:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let mut w = [0.0; 3];
    for (dst, p) in w.iter_mut().zip(&parts) {
        *dst = p.parse().map_err(|_| bad())?;
    }
    WeightVector::new(w[0], w[1], w[2])
}
