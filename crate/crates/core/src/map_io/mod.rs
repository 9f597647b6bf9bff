//! Map ingestion, area-graph interchange files and alignment overlays.

mod grid;

use std::fs;
use std::io::Cursor;
use std::path::Path;

use image::{ColorType, GrayImage, ImageReader, Luma, Rgb, RgbImage};
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geometry::{Point2, Polygon2, RigidTransform2D};
use crate::segmentation::{Area, AreaGraph};

pub use grid::{Cell, GridMap};

pub const DEFAULT_FREE_THRESHOLD: u8 = 250;
pub const DEFAULT_OCCUPIED_THRESHOLD: u8 = 50;

/// Current version of the area-graph interchange format.
pub const AREA_GRAPH_VERSION: i64 = 1;

/// Pixel value used when writing each cell state.
const FREE_PIXEL: u8 = 255;
const OCCUPIED_PIXEL: u8 = 0;
const UNKNOWN_PIXEL: u8 = 205;

/// Binarization thresholds on 8-bit intensities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Thresholds {
    pub free: u8,
    pub occupied: u8,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            free: DEFAULT_FREE_THRESHOLD,
            occupied: DEFAULT_OCCUPIED_THRESHOLD,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        if self.occupied == 0 || self.occupied >= self.free {
            return Err(Error::Config(format!(
                "thresholds must satisfy 0 < occupied ({}) < free ({}) <= 255",
                self.occupied, self.free
            )));
        }
        Ok(())
    }

    fn classify(&self, v: u8) -> Cell {
        if v >= self.free {
            Cell::Free
        } else if v <= self.occupied {
            Cell::Occupied
        } else {
            Cell::Unknown
        }
    }
}

/// Loads an 8-bit grayscale PGM/PNG raster as an occupancy grid.
///
/// The image's top row becomes the grid's last row so that world y points up.
pub fn load_grid_map(path: &Path, resolution: f64, thresholds: Thresholds) -> Result<GridMap> {
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(Error::Config(format!("resolution must be positive, got {resolution}")));
    }
    thresholds.validate()?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let location = path.display().to_string();
    let img = ImageReader::new(Cursor::new(bytes))
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|e| Error::format(&location, e.to_string()))?;
    if img.color() != ColorType::L8 {
        return Err(Error::format(
            location,
            format!("expected 8-bit grayscale, found {:?}", img.color()),
        ));
    }
    grid_from_gray(&img.into_luma8(), resolution, thresholds)
}

pub fn grid_from_gray(img: &GrayImage, resolution: f64, thresholds: Thresholds) -> Result<GridMap> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let mut cells = Vec::with_capacity(w * h);
    for row in 0..h {
        let y = (h - 1 - row) as u32;
        for x in 0..w as u32 {
            cells.push(thresholds.classify(img.get_pixel(x, y).0[0]));
        }
    }
    GridMap::new(w, h, cells, resolution, Point2::default())
}

pub fn grid_to_gray(grid: &GridMap) -> GrayImage {
    let (w, h) = (grid.width(), grid.height());
    GrayImage::from_fn(w as u32, h as u32, |x, y| {
        let v = match grid.get(h - 1 - y as usize, x as usize) {
            Cell::Free => FREE_PIXEL,
            Cell::Occupied => OCCUPIED_PIXEL,
            Cell::Unknown => UNKNOWN_PIXEL,
        };
        Luma([v])
    })
}

/// Writes a grid as a grayscale raster; the format follows the extension.
pub fn save_grid_map(grid: &GridMap, path: &Path) -> Result<()> {
    grid_to_gray(grid).save(path).map_err(|e| image_write_error(path, e))
}

fn image_write_error(path: &Path, e: image::ImageError) -> Error {
    match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::format(path.display().to_string(), other.to_string()),
    }
}

#[derive(Serialize)]
struct AreaRecord {
    id: u32,
    polygon: Vec<[f64; 2]>,
    passages: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct GraphRecord<'a> {
    version: i64,
    resolution: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    source: Option<&'a str>,
    areas: Vec<AreaRecord>,
}

fn xy(p: &Point2) -> [f64; 2] {
    [p.x, p.y]
}

/// Serializes an area graph to the interchange text (pretty JSON, shortest
/// round-trip float formatting).
pub fn area_graph_to_string(graph: &AreaGraph) -> String {
    let record = GraphRecord {
        version: AREA_GRAPH_VERSION,
        resolution: graph.resolution(),
        source: graph.source(),
        areas: graph
            .areas()
            .iter()
            .map(|a| AreaRecord {
                id: a.id,
                polygon: a.polygon.vertices().iter().map(xy).collect(),
                passages: a.passages.iter().map(xy).collect(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&record).expect("area graph serializes");
    s.push('\n');
    s
}

pub fn write_area_graph(graph: &AreaGraph, path: &Path) -> Result<()> {
    fs::write(path, area_graph_to_string(graph)).map_err(|e| Error::io(path, e))
}

pub fn read_area_graph(path: &Path) -> Result<AreaGraph> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    area_graph_from_str(&text)
}

fn field<'a>(obj: &'a serde_json::Map<String, Value>, key: &str, at: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::format(at, format!("missing field `{key}`")))
}

fn number(v: &Value, at: &str) -> Result<f64> {
    match v.as_f64() {
        Some(x) if x.is_finite() => Ok(x),
        _ => Err(Error::format(at, "expected a finite number")),
    }
}

fn point_list(v: &Value, at: &str) -> Result<Vec<Point2>> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::format(at, "expected an array of [x, y] pairs"))?;
    arr.iter()
        .enumerate()
        .map(|(i, p)| {
            let here = format!("{at}/{i}");
            let pair = p
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| Error::format(&here, "expected [x, y]"))?;
            Ok(Point2::new(
                number(&pair[0], &format!("{here}/0"))?,
                number(&pair[1], &format!("{here}/1"))?,
            ))
        })
        .collect()
}

/// Parses and validates the interchange text. Errors carry a JSON-pointer
/// location of the offending value.
pub fn area_graph_from_str(text: &str) -> Result<AreaGraph> {
    let root: Value = serde_json::from_str(text).map_err(|e| Error::format("", format!("invalid JSON: {e}")))?;
    let obj = root
        .as_object()
        .ok_or_else(|| Error::format("", "expected an object"))?;

    let version = field(obj, "version", "")?
        .as_i64()
        .ok_or_else(|| Error::format("/version", "expected an integer"))?;
    if version != AREA_GRAPH_VERSION {
        return Err(Error::format("/version", format!("unsupported version {version}")));
    }
    let resolution = number(field(obj, "resolution", "")?, "/resolution")?;
    if resolution <= 0.0 {
        return Err(Error::format("/resolution", "resolution must be positive"));
    }
    let source = match obj.get("source") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(Error::format("/source", "expected a string")),
    };

    let areas_v = field(obj, "areas", "")?
        .as_array()
        .ok_or_else(|| Error::format("/areas", "expected an array"))?;
    let mut areas = Vec::with_capacity(areas_v.len());
    for (i, av) in areas_v.iter().enumerate() {
        let at = format!("/areas/{i}");
        let ao = av.as_object().ok_or_else(|| Error::format(&at, "expected an object"))?;
        let id = field(ao, "id", &at)?
            .as_u64()
            .filter(|&id| id <= u32::MAX as u64)
            .ok_or_else(|| Error::format(format!("{at}/id"), "expected a non-negative integer"))?
            as u32;
        let poly_at = format!("{at}/polygon");
        let vertices = point_list(field(ao, "polygon", &at)?, &poly_at)?;
        let polygon = Polygon2::new(vertices).map_err(|e| Error::format(&poly_at, e.to_string()))?;
        if !polygon.is_simple() {
            return Err(Error::format(poly_at, "polygon is not simple"));
        }
        if polygon.signed_area() < crate::geometry::AREA_EPS {
            return Err(Error::format(poly_at, "polygon has zero area"));
        }
        let pass_at = format!("{at}/passages");
        let passages = point_list(field(ao, "passages", &at)?, &pass_at)?;
        for (k, p) in passages.iter().enumerate() {
            if polygon.boundary_distance(*p) > crate::segmentation::PASSAGE_BOUNDARY_TOLERANCE {
                return Err(Error::format(
                    format!("{pass_at}/{k}"),
                    "passage farther than 0.5 m from the area boundary",
                ));
            }
        }
        areas.push(Area::new(id, polygon, passages));
    }
    let mut seen = std::collections::BTreeMap::new();
    for (i, a) in areas.iter().enumerate() {
        if let Some(prev) = seen.insert(a.id, i) {
            return Err(Error::format(
                format!("/areas/{i}/id"),
                format!("duplicate id {} (also at /areas/{prev})", a.id),
            ));
        }
    }
    let graph = AreaGraph::new(areas, resolution)?;
    Ok(match source {
        Some(s) => graph.with_source(s),
        None => graph,
    })
}

const BACKGROUND: Rgb<u8> = Rgb([255, 255, 255]);
const MAP_B_COLOR: Rgb<u8> = Rgb([128, 128, 128]);
const MAP_A_COLOR: Rgb<u8> = Rgb([255, 0, 0]);

fn blend_half(under: Rgb<u8>, over: Rgb<u8>) -> Rgb<u8> {
    let mix = |u: u8, o: u8| (u as u16 + o as u16).div_ceil(2) as u8;
    Rgb([mix(under[0], over[0]), mix(under[1], over[1]), mix(under[2], over[2])])
}

/// Draws map B's occupied cells in gray and map A's occupied cells, moved by
/// `t` into B's frame, in red at 50% alpha.
///
/// The canvas spans the union of both extents at B's resolution; row 0 is the
/// top of the image.
pub fn render_alignment(map_a: &GridMap, map_b: &GridMap, t: &RigidTransform2D) -> RgbImage {
    let res = map_b.resolution();
    let (mut lo, mut hi) = map_b.extent();
    let (alo, ahi) = map_a.extent();
    for c in [alo, Point2::new(ahi.x, alo.y), ahi, Point2::new(alo.x, ahi.y)] {
        let p = t.apply(c);
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    let w = ((hi.x - lo.x) / res).ceil().max(1.0) as u32;
    let h = ((hi.y - lo.y) / res).ceil().max(1.0) as u32;
    let inv = t.inverse();
    RgbImage::from_fn(w, h, |x, y| {
        let p = Point2::new(lo.x + (x as f64 + 0.5) * res, lo.y + ((h - 1 - y) as f64 + 0.5) * res);
        let mut px = BACKGROUND;
        if let Some((r, c)) = map_b.world_to_cell(p) {
            if map_b.get(r, c) == Cell::Occupied {
                px = MAP_B_COLOR;
            }
        }
        if let Some((r, c)) = map_a.world_to_cell(inv.apply(p)) {
            if map_a.get(r, c) == Cell::Occupied {
                px = blend_half(px, MAP_A_COLOR);
            }
        }
        px
    })
}

/// Writes the alignment overlay as PNG.
pub fn write_alignment_png(map_a: &GridMap, map_b: &GridMap, t: &RigidTransform2D, path: &Path) -> Result<()> {
    render_alignment(map_a, map_b, t)
        .save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| image_write_error(path, e))
}

/// Pixel classes of a rendered overlay.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverlayPixel {
    Background,
    OnlyB,
    OnlyA,
    Both,
}

pub fn classify_overlay_pixel(px: &Rgb<u8>) -> OverlayPixel {
    if *px == MAP_B_COLOR {
        OverlayPixel::OnlyB
    } else if *px == blend_half(BACKGROUND, MAP_A_COLOR) {
        OverlayPixel::OnlyA
    } else if *px == blend_half(MAP_B_COLOR, MAP_A_COLOR) {
        OverlayPixel::Both
    } else {
        OverlayPixel::Background
    }
}
