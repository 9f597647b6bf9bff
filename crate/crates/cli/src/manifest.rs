//! Pair manifests and map inputs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use areamatch::geometry::{Point2, RigidTransform2D};
use areamatch::map_io::{load_grid_map, read_area_graph, GridMap, Thresholds};
use areamatch::segmentation::{segment_grid_map, AreaGraph, SegmentationParams};
use areamatch::transform::MapInput;
use areamatch::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformRecord {
    pub theta_rad: f64,
    pub t: [f64; 2],
}

impl From<RigidTransform2D> for TransformRecord {
    fn from(t: RigidTransform2D) -> Self {
        Self {
            theta_rad: t.theta,
            t: [t.t.x, t.t.y],
        }
    }
}

impl From<TransformRecord> for RigidTransform2D {
    fn from(r: TransformRecord) -> Self {
        RigidTransform2D::new(r.theta_rad, Point2::new(r.t[0], r.t[1]))
    }
}

/// Two maps and the transform carrying A onto B. Map paths are relative to
/// the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairManifest {
    pub map_a: PathBuf,
    pub map_b: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution_b: Option<f64>,
    pub gt: TransformRecord,
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        location: format!("{}:{}:{}", path.display(), e.line(), e.column()),
        message: e.to_string(),
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// A manifest with its map paths resolved.
#[derive(Debug, Clone)]
pub struct LoadedManifest {
    pub path: PathBuf,
    pub map_a: PathBuf,
    pub map_b: PathBuf,
    pub resolution_a: Option<f64>,
    pub resolution_b: Option<f64>,
    pub gt: RigidTransform2D,
}

impl LoadedManifest {
    pub fn read(path: &Path) -> Result<Self, Error> {
        let m: PairManifest = read_json(path)?;
        let dir = path.parent().unwrap_or(Path::new(""));
        Ok(Self {
            path: path.to_path_buf(),
            map_a: dir.join(&m.map_a),
            map_b: dir.join(&m.map_b),
            resolution_a: m.resolution_a,
            resolution_b: m.resolution_b,
            gt: m.gt.into(),
        })
    }

    /// Manifest file stem, used as a row label.
    pub fn name(&self) -> String {
        let stem = self.path.file_stem().map(|s| s.to_string_lossy().into_owned());
        let parent = self
            .path
            .parent()
            .and_then(Path::file_name)
            .map(|s| s.to_string_lossy().into_owned());
        match (parent, stem) {
            (Some(p), Some(s)) if s == "pair" => p,
            (_, Some(s)) => s,
            _ => self.path.display().to_string(),
        }
    }
}

/// A raster or a pre-segmented area graph.
#[derive(Debug, Clone)]
pub enum MapSource {
    Grid(GridMap),
    Graph(AreaGraph),
}

pub fn is_graph_path(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("areagraph") | Some("json")
    )
}

impl MapSource {
    /// Area graphs by extension, rasters otherwise; rasters need a resolution.
    pub fn load(path: &Path, resolution: Option<f64>, thresholds: Thresholds, flag: &str) -> Result<Self, Error> {
        if is_graph_path(path) {
            return Ok(MapSource::Graph(read_area_graph(path)?));
        }
        let res = resolution
            .ok_or_else(|| Error::Config(format!("{flag} is required for raster input {}", path.display())))?;
        Ok(MapSource::Grid(load_grid_map(path, res, thresholds)?))
    }

    pub fn input(&self) -> MapInput<'_> {
        match self {
            MapSource::Grid(g) => MapInput::Grid(g),
            MapSource::Graph(g) => MapInput::Graph(g),
        }
    }

    pub fn grid(&self) -> Option<&GridMap> {
        match self {
            MapSource::Grid(g) => Some(g),
            MapSource::Graph(_) => None,
        }
    }

    pub fn resolution(&self) -> f64 {
        match self {
            MapSource::Grid(g) => g.resolution(),
            MapSource::Graph(g) => g.resolution(),
        }
    }

    /// Point at which translation error is measured.
    pub fn centroid(&self) -> Point2 {
        match self {
            MapSource::Grid(g) => g.free_centroid(),
            MapSource::Graph(g) => g.centroid(),
        }
    }

    pub fn into_graph(self, params: &SegmentationParams) -> Result<AreaGraph, Error> {
        match self {
            MapSource::Grid(g) => Ok(segment_grid_map(&g, params)?.graph),
            MapSource::Graph(g) => Ok(g),
        }
    }
}
