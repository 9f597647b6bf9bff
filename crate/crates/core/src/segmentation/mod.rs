//! Free-space decomposition into areas connected by passages.

mod contour;
mod edt;
mod regions;

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{Point2, Polygon2, RigidMotion, RigidTransform2D};
use crate::map_io::{Cell, GridMap};

use contour::{Chain, Corner, LabelGrid};
use regions::NO_LABEL;

pub use edt::squared_distance_transform;

/// Maximum distance (m) between a passage point and its area's boundary.
pub const PASSAGE_BOUNDARY_TOLERANCE: f64 = 0.5;

/// Two passage points closer than this are considered the same passage.
pub const PASSAGE_MATCH_TOLERANCE: f64 = 1e-6;

pub const DEFAULT_WIDTH: f64 = 1.8;
pub const DEFAULT_MIN_AREA: f64 = 1.0;
pub const DEFAULT_MIN_OBSTACLE_AREA: f64 = 0.02;

/// If the midpoint of a shared boundary's endpoints is farther than this
/// from the boundary itself, the arc-length midpoint is used instead.
const PASSAGE_OFF_CHAIN: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub struct Area {
    pub id: u32,
    pub polygon: Polygon2,
    /// Sorted by x, then y.
    pub passages: Vec<Point2>,
}

impl Area {
    pub fn new(id: u32, polygon: Polygon2, mut passages: Vec<Point2>) -> Self {
        passages.sort_by(|a, b| a.lex_cmp(b));
        Self { id, polygon, passages }
    }

    pub fn area(&self) -> f64 {
        self.polygon.signed_area()
    }
}

/// The area's passage points, ordered by x then y.
pub fn passages_of(area: &Area) -> &[Point2] {
    &area.passages
}

#[derive(Debug, Clone, PartialEq)]
pub struct AreaGraph {
    areas: Vec<Area>,
    adjacency: Vec<(u32, u32)>,
    resolution: f64,
    source: Option<String>,
}

impl AreaGraph {
    /// Builds a graph; adjacency is derived from passage points shared by
    /// two areas.
    pub fn new(areas: Vec<Area>, resolution: f64) -> Result<Self> {
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(Error::Config(format!("resolution must be positive, got {resolution}")));
        }
        let mut ids: Vec<u32> = areas.iter().map(|a| a.id).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGeometry(format!("duplicate area id {}", w[0])));
        }
        let mut adjacency = Vec::new();
        for (i, a) in areas.iter().enumerate() {
            for b in &areas[i + 1..] {
                let shared = a
                    .passages
                    .iter()
                    .any(|p| b.passages.iter().any(|q| p.dist(*q) <= PASSAGE_MATCH_TOLERANCE));
                if shared {
                    adjacency.push((a.id.min(b.id), a.id.max(b.id)));
                }
            }
        }
        adjacency.sort_unstable();
        Ok(Self {
            areas,
            adjacency,
            resolution,
            source: None,
        })
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = Some(source.into());
        self
    }

    pub fn areas(&self) -> &[Area] {
        &self.areas
    }

    /// Pairs `(low id, high id)` of areas sharing a passage, sorted.
    pub fn adjacency(&self) -> &[(u32, u32)] {
        &self.adjacency
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn source(&self) -> Option<&str> {
        self.source.as_deref()
    }

    pub fn len(&self) -> usize {
        self.areas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.areas.is_empty()
    }

    pub fn area(&self, id: u32) -> Option<&Area> {
        self.areas.iter().find(|a| a.id == id)
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().map(Area::area).sum()
    }

    /// Area-weighted centroid of all areas.
    pub fn centroid(&self) -> Point2 {
        let total = self.total_area();
        if total <= 0.0 {
            return Point2::default();
        }
        self.areas.iter().fold(Point2::default(), |acc, a| {
            acc + a.polygon.centroid() * (a.area() / total)
        })
    }

    /// Copy with every polygon and passage moved by `t`.
    pub fn transformed(&self, t: &RigidTransform2D) -> Self {
        let areas = self
            .areas
            .iter()
            .map(|a| {
                Area::new(
                    a.id,
                    a.polygon.transformed(t),
                    a.passages.iter().map(|p| p.transformed(t)).collect(),
                )
            })
            .collect();
        Self {
            areas,
            adjacency: self.adjacency.clone(),
            resolution: self.resolution,
            source: self.source.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentationParams {
    /// Minimum clearance diameter (m) for a spot to seed its own area.
    pub width: f64,
    /// Regions smaller than this (m²) are merged into a neighbour.
    pub min_area: f64,
    /// Enclosed obstacle specks up to this size (m²) are treated as free.
    pub min_obstacle_area: f64,
}

impl Default for SegmentationParams {
    fn default() -> Self {
        Self {
            width: DEFAULT_WIDTH,
            min_area: DEFAULT_MIN_AREA,
            min_obstacle_area: DEFAULT_MIN_OBSTACLE_AREA,
        }
    }
}

impl SegmentationParams {
    pub fn with_width(width: f64) -> Self {
        Self {
            width,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width.is_finite() && self.width > 0.0) {
            return Err(Error::Config(format!("width must be positive, got {}", self.width)));
        }
        if !(self.min_area.is_finite() && self.min_area >= 0.0) {
            return Err(Error::Config(format!(
                "min area must be non-negative, got {}",
                self.min_area
            )));
        }
        if !(self.min_obstacle_area.is_finite() && self.min_obstacle_area >= 0.0) {
            return Err(Error::Config(format!(
                "min obstacle area must be non-negative, got {}",
                self.min_obstacle_area
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SegmentationWarning {
    /// Fewer than two areas; matching falls back to hull features.
    SingleArea { areas: usize },
}

impl fmt::Display for SegmentationWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::SingleArea { areas } => {
                write!(f, "segmentation produced {areas} area(s); passage features unavailable")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    pub graph: AreaGraph,
    pub warnings: Vec<SegmentationWarning>,
}

/// Splits the free space of `map` into areas.
///
/// Regions are grown by a watershed on the obstacle distance transform from
/// seeds whose clearance exceeds `width / 2`; outlines are traced, shared
/// borders simplified once (tolerance one cell) and each pair of touching
/// regions gets one passage at the narrowest shared border.
pub fn segment_grid_map(map: &GridMap, params: &SegmentationParams) -> Result<Segmentation> {
    params.validate()?;
    let (w, h) = (map.width(), map.height());
    let res = map.resolution();
    let mut free: Vec<bool> = map.cells().iter().map(|&c| c == Cell::Free).collect();
    if !free.iter().any(|&f| f) {
        return Err(Error::EmptyMap);
    }

    let cell_area = res * res;
    let speck_cells = (params.min_obstacle_area / cell_area).floor() as usize;
    regions::fill_small_obstacles(&mut free, w, h, speck_cells);

    let obstacle: Vec<bool> = free.iter().map(|f| !f).collect();
    let sq = squared_distance_transform(&obstacle, w, h);
    let half = params.width / 2.0;
    let core: Vec<bool> = sq
        .iter()
        .zip(&free)
        .map(|(&d, &f)| f && ((d as f64).sqrt() - 0.5) * res > half)
        .collect();
    let (mut labels, mut n) = regions::watershed(&free, &sq, &core, w, h);

    // Free pockets no seed can reach become regions of their own.
    let orphan: Vec<bool> = labels.iter().zip(&free).map(|(&l, &f)| f && l == NO_LABEL).collect();
    let (orphan_labels, n_orphan) = regions::components(&orphan, w, h);
    for (l, o) in labels.iter_mut().zip(&orphan_labels) {
        if *o != NO_LABEL {
            *l = n as i32 + *o;
        }
    }
    n += n_orphan;

    let mut min_cells = (params.min_area / cell_area).ceil() as usize;
    let mut sizes = vec![0usize; n];
    for &l in &labels {
        if l >= 0 {
            sizes[l as usize] += 1;
        }
    }
    if sizes.iter().all(|&s| s < min_cells) {
        // Keep a map that is entirely small rather than dropping it all.
        min_cells = 0;
    }
    regions::merge_small_regions(&mut labels, n, w, h, min_cells);

    let (pw, ph) = (w + 2, h + 2);
    let mut padded = vec![NO_LABEL; pw * ph];
    for r in 0..h {
        padded[(r + 1) * pw + 1..(r + 1) * pw + 1 + w].copy_from_slice(&labels[r * w..(r + 1) * w]);
    }
    if !regions::remove_pinches(&mut padded, pw, ph) {
        log::warn!("diagonal contacts remain after pinch removal");
    }
    let n_regions = regions::relabel_dense(&mut padded);

    let grid = LabelGrid {
        labels: &padded,
        pw,
        ph,
    };
    let chains = contour::trace_chains(&grid);
    let by_label = contour::chains_by_label(&chains);
    let origin = map.origin();
    let to_world = |(i, j): Corner| Point2::new(origin.x + (j as f64 - 1.0) * res, origin.y + (i as f64 - 1.0) * res);

    let mut simplified: Vec<Vec<Corner>> = chains.iter().map(|c| contour::simplify_chain(c, 1.0)).collect();
    let mut raw = vec![false; chains.len()];
    let mut polygons: BTreeMap<i32, Polygon2> = BTreeMap::new();
    // Simplification can make an outline self-intersect; such regions are
    // rebuilt from unsimplified chains, which also updates their neighbours.
    for _ in 0..=n_regions {
        polygons.clear();
        let mut changed = false;
        for label in 0..n_regions as i32 {
            let Some((outline, members)) = contour::region_outline(label, &chains, &simplified, &by_label) else {
                continue;
            };
            let poly = Polygon2::new(outline.iter().copied().map(to_world).collect());
            match poly {
                Ok(p) if p.is_simple() => {
                    polygons.insert(label, p);
                }
                _ => {
                    for k in members {
                        if !raw[k] {
                            raw[k] = true;
                            simplified[k] = contour::simplify_chain(&chains[k], 0.0);
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }

    let passages = passage_points(&chains, &simplified, &to_world);
    let mut areas = Vec::with_capacity(polygons.len());
    for (&label, poly) in &polygons {
        let pts: Vec<Point2> = passages
            .iter()
            .filter(|((a, b), _)| {
                (*a == label && polygons.contains_key(b)) || (*b == label && polygons.contains_key(a))
            })
            .map(|(_, p)| *p)
            .collect();
        areas.push(Area::new(label as u32, poly.clone(), pts));
    }
    if areas.is_empty() {
        return Err(Error::EmptyMap);
    }
    let mut warnings = Vec::new();
    if areas.len() < 2 {
        log::warn!("single-area segmentation");
        warnings.push(SegmentationWarning::SingleArea { areas: areas.len() });
    }
    let graph = AreaGraph::new(areas, res)?;
    Ok(Segmentation { graph, warnings })
}

/// One passage per pair of touching regions, at the middle of the shared
/// border with the narrowest opening.
fn passage_points(
    chains: &[Chain],
    simplified: &[Vec<Corner>],
    to_world: &impl Fn(Corner) -> Point2,
) -> BTreeMap<(i32, i32), Point2> {
    let mut best: BTreeMap<(i32, i32), (f64, usize)> = BTreeMap::new();
    for (k, ch) in chains.iter().enumerate() {
        if ch.left == NO_LABEL || ch.right == NO_LABEL {
            continue;
        }
        let key = (ch.left.min(ch.right), ch.left.max(ch.right));
        let gap = if ch.is_closed() {
            f64::INFINITY
        } else {
            to_world(ch.corners[0]).dist(to_world(*ch.corners.last().unwrap()))
        };
        let better = match best.get(&key) {
            None => true,
            Some(&(g, _)) => gap < g,
        };
        if better {
            best.insert(key, (gap, k));
        }
    }
    best.into_iter()
        .map(|(key, (_, k))| {
            let pts: Vec<Point2> = simplified[k].iter().copied().map(to_world).collect();
            let mid = if chains[k].is_closed() {
                arc_midpoint(&pts)
            } else {
                let m = pts[0].midpoint(*pts.last().unwrap());
                if polyline_distance(&pts, m) > PASSAGE_OFF_CHAIN {
                    arc_midpoint(&pts)
                } else {
                    m
                }
            };
            (key, mid)
        })
        .collect()
}

fn polyline_distance(pts: &[Point2], p: Point2) -> f64 {
    pts.windows(2)
        .map(|s| crate::geometry::point_segment_distance(p, s[0], s[1]))
        .fold(f64::INFINITY, f64::min)
}

fn arc_midpoint(pts: &[Point2]) -> Point2 {
    let total: f64 = pts.windows(2).map(|s| s[0].dist(s[1])).sum();
    let mut left = total / 2.0;
    for s in pts.windows(2) {
        let len = s[0].dist(s[1]);
        if len >= left && len > 0.0 {
            return s[0] + (s[1] - s[0]) * (left / len);
        }
        left -= len;
    }
    pts[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::polygon_overlap_area;

    /// Occupied canvas with free axis-aligned rectangles given in cells
    /// as (row0, col0, rows, cols).
    fn rect_map(w: usize, h: usize, res: f64, rects: &[(usize, usize, usize, usize)]) -> GridMap {
        let mut g = GridMap::filled(w, h, Cell::Occupied, res, Point2::default()).unwrap();
        for &(r0, c0, nr, nc) in rects {
            for r in r0..r0 + nr {
                for c in c0..c0 + nc {
                    g.set(r, c, Cell::Free);
                }
            }
        }
        g
    }

    /// Two 5 m rooms joined by a 1 m wide, 1 m long door corridor (0.05 m cells).
    fn two_rooms() -> GridMap {
        rect_map(
            240,
            120,
            0.05,
            &[(10, 10, 100, 100), (50, 110, 20, 20), (10, 130, 100, 100)],
        )
    }

    fn free_area(g: &GridMap) -> f64 {
        g.count(Cell::Free) as f64 * g.resolution() * g.resolution()
    }

    fn check_partition(g: &GridMap, graph: &AreaGraph) {
        let areas = graph.areas();
        for (i, a) in areas.iter().enumerate() {
            assert!(a.polygon.is_simple());
            for p in &a.passages {
                assert!(a.polygon.boundary_distance(*p) <= PASSAGE_BOUNDARY_TOLERANCE);
            }
            for b in &areas[i + 1..] {
                let ov = polygon_overlap_area(&a.polygon, &b.polygon);
                assert!(
                    ov / a.area().min(b.area()) < 0.01,
                    "areas {} and {} overlap by {ov}",
                    a.id,
                    b.id
                );
            }
        }
        assert!(graph.total_area() >= 0.9 * free_area(g));
    }

    #[test]
    fn two_rooms_and_a_door() {
        let g = two_rooms();
        let seg = segment_grid_map(&g, &SegmentationParams::default()).unwrap();
        let n = seg.graph.len();
        assert!((2..=3).contains(&n), "got {n} areas");
        assert!(seg.warnings.is_empty());
        check_partition(&g, &seg.graph);
        // Some passage sits within the door opening, x ∈ [5.5, 6.5], y ∈ [2.5, 3.5].
        let door = seg
            .graph
            .areas()
            .iter()
            .flat_map(|a| a.passages.iter())
            .any(|p| (5.45..=6.55).contains(&p.x) && (2.45..=3.55).contains(&p.y));
        assert!(door);
        assert!(!seg.graph.adjacency().is_empty());
        for a in seg.graph.areas() {
            assert!(!a.passages.is_empty());
        }
    }

    #[test]
    fn single_room_warns() {
        let g = rect_map(60, 60, 0.1, &[(5, 5, 50, 50)]);
        let seg = segment_grid_map(&g, &SegmentationParams::default()).unwrap();
        assert_eq!(seg.graph.len(), 1);
        assert_eq!(seg.warnings, vec![SegmentationWarning::SingleArea { areas: 1 }]);
        let a = &seg.graph.areas()[0];
        assert!((a.area() - 25.0).abs() < 1e-9);
        assert!(a.passages.is_empty());
    }

    #[test]
    fn no_free_space_is_an_error() {
        let g = GridMap::filled(10, 10, Cell::Unknown, 0.1, Point2::default()).unwrap();
        assert!(matches!(
            segment_grid_map(&g, &SegmentationParams::default()),
            Err(Error::EmptyMap)
        ));
        let g = rect_map(10, 10, 0.1, &[(2, 2, 3, 3)]);
        assert!(matches!(
            segment_grid_map(&g, &SegmentationParams::with_width(0.0)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn deterministic() {
        let g = two_rooms();
        let a = segment_grid_map(&g, &SegmentationParams::default()).unwrap();
        let b = segment_grid_map(&g, &SegmentationParams::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn commutes_with_whole_cell_translation() {
        let g = two_rooms();
        let (dr, dc) = (7, 13);
        let mut shifted = GridMap::filled(
            g.width() + dc,
            g.height() + dr,
            Cell::Unknown,
            g.resolution(),
            g.origin(),
        )
        .unwrap();
        for r in 0..g.height() {
            for c in 0..g.width() {
                shifted.set(r + dr, c + dc, g.get(r, c));
            }
        }
        let a = segment_grid_map(&g, &SegmentationParams::default()).unwrap().graph;
        let b = segment_grid_map(&shifted, &SegmentationParams::default())
            .unwrap()
            .graph;
        let off = Point2::new(dc as f64 * 0.05, dr as f64 * 0.05);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.areas().iter().zip(b.areas()) {
            assert_eq!(x.polygon.len(), y.polygon.len());
            for (p, q) in x.polygon.vertices().iter().zip(y.polygon.vertices()) {
                assert!((*p + off).dist(*q) < 1e-9);
            }
            for (p, q) in x.passages.iter().zip(&y.passages) {
                assert!((*p + off).dist(*q) < 1e-9);
            }
        }
    }

    #[test]
    fn corridor_with_rooms() {
        // Corridor along the bottom with three rooms above it, one door each.
        let mut rects = vec![(5, 5, 50, 300)];
        for k in 0..3 {
            rects.push((57, 10 + k * 100, 80, 90));
            rects.push((55, 40 + k * 100, 2, 20));
        }
        let g = rect_map(310, 140, 0.05, &rects);
        let seg = segment_grid_map(&g, &SegmentationParams::default()).unwrap();
        assert!(seg.graph.len() >= 4, "got {}", seg.graph.len());
        check_partition(&g, &seg.graph);
    }

    #[test]
    fn passages_sorted() {
        let a = Area::new(
            0,
            Polygon2::new(vec![
                Point2::new(0.0, 0.0),
                Point2::new(4.0, 0.0),
                Point2::new(4.0, 4.0),
                Point2::new(0.0, 4.0),
            ])
            .unwrap(),
            vec![Point2::new(4.0, 1.0), Point2::new(0.0, 2.0), Point2::new(4.0, 0.5)],
        );
        assert_eq!(
            passages_of(&a),
            &[Point2::new(0.0, 2.0), Point2::new(4.0, 0.5), Point2::new(4.0, 1.0)]
        );
    }

    #[test]
    fn adjacency_from_shared_passages() {
        let sq = |x: f64| {
            Polygon2::new(vec![
                Point2::new(x, 0.0),
                Point2::new(x + 1.0, 0.0),
                Point2::new(x + 1.0, 1.0),
                Point2::new(x, 1.0),
            ])
            .unwrap()
        };
        let door = Point2::new(1.0, 0.5);
        let g = AreaGraph::new(
            vec![
                Area::new(5, sq(0.0), vec![door]),
                Area::new(2, sq(1.0), vec![door]),
                Area::new(9, sq(3.0), vec![]),
            ],
            0.05,
        )
        .unwrap();
        assert_eq!(g.adjacency(), &[(2, 5)]);
        assert!(AreaGraph::new(vec![Area::new(1, sq(0.0), vec![]), Area::new(1, sq(1.0), vec![])], 0.05).is_err());
    }
}
